use serde::{Deserialize, Serialize};

use super::MapsError;
use crate::hilbert::SparseOperator;
use crate::model::{ElectronicOperators, Frame, ModelOperators, ModelParams};
use crate::solver::{converge_cutoff, ground_state, SolverError, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionOptions {
    /// Root search stops once `|d − d_target|` falls below this.
    pub d_tol: f64,
    /// Largest accepted final `|d − d_target|`.
    pub accept_tol: f64,
    /// Largest accepted `|d − d_target|` when the bracket has shrunk to
    /// floating-point resolution first (extremely steep maps).
    pub resolution_tol: f64,
    /// Absolute abscissa tolerance added to the relative `2 ε |x|`.
    pub x_tol: f64,
    pub max_iter: usize,
    /// Half width of the first bracket around `ṽ = 0`; doubled until the
    /// target is enclosed.
    pub initial_half_width: f64,
    pub max_half_width: f64,
    /// Samples used to check monotonicity on the final bracket.
    pub monotone_samples: usize,
    /// Samples of the scanning fallback when that check fails.
    pub scan_points: usize,
    /// Half width of the q stencil used to report the q-dependence of
    /// `v_xc`; 0 disables it.
    pub q_stencil: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            d_tol: 1e-12,
            accept_tol: 1e-9,
            resolution_tol: 1e-6,
            x_tol: 0.0,
            max_iter: 200,
            initial_half_width: 1.0,
            max_half_width: 1e4,
            monotone_samples: 9,
            scan_points: 65,
            q_stencil: 0.0,
        }
    }
}

impl InversionOptions {
    pub fn validate(&self) -> Result<(), String> {
        let pos = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {x}"))
            }
        };
        pos("d_tol", self.d_tol)?;
        pos("accept_tol", self.accept_tol)?;
        pos("resolution_tol", self.resolution_tol)?;
        if !(self.x_tol.is_finite() && self.x_tol >= 0.0) {
            return Err(format!("x_tol must be non-negative, got {}", self.x_tol));
        }
        pos("initial_half_width", self.initial_half_width)?;
        pos("max_half_width", self.max_half_width)?;
        if self.max_half_width < self.initial_half_width {
            return Err("max_half_width must be at least initial_half_width".into());
        }
        if self.max_iter == 0 {
            return Err("max_iter must be positive".into());
        }
        if self.monotone_samples < 3 || self.scan_points < 3 {
            return Err("monotone_samples and scan_points must be at least 3".into());
        }
        if !(self.q_stencil.is_finite() && self.q_stencil >= 0.0) {
            return Err(format!("q_stencil must be non-negative, got {}", self.q_stencil));
        }
        Ok(())
    }
}

enum Space {
    Coupled(Box<ModelOperators>),
    Electronic(Box<ElectronicOperators>),
}

/// The ground-state dipole as a function of the polaritonic potential at
/// zero drive, `ṽ ↦ d(ṽ)`, at a fixed photon cutoff so that it is a smooth
/// function for root finding. The electronic variant is the photon-free
/// Kohn–Sham map `v_s ↦ d`.
pub struct DipoleMap {
    params: ModelParams,
    space: Space,
    opts: SolverOptions,
}

impl DipoleMap {
    /// Coupled map of `p` in the transformed frame at `cutoff`.
    pub fn coupled(p: &ModelParams, cutoff: usize, opts: &SolverOptions) -> Result<Self, MapsError> {
        let ops = ModelOperators::new(p, cutoff).map_err(SolverError::from)?;
        Ok(Self {
            params: p.clone(),
            space: Space::Coupled(Box::new(ops)),
            opts: opts.clone(),
        })
    }

    /// Electrons only: `−t0 hop + U0 Σ n↑n↓ + v_s d̂`.
    pub fn kohn_sham(p: &ModelParams, opts: &SolverOptions) -> Result<Self, MapsError> {
        let el = ElectronicOperators::new(p).map_err(SolverError::from)?;
        Ok(Self {
            params: p.clone(),
            space: Space::Electronic(Box::new(el)),
            opts: opts.clone(),
        })
    }

    pub fn cutoff(&self) -> Option<usize> {
        match &self.space {
            Space::Coupled(ops) => Some(ops.cutoff()),
            Space::Electronic(_) => None,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dipole(&self, v: f64) -> Result<f64, MapsError> {
        let (h, d): (SparseOperator, &SparseOperator) = match &self.space {
            Space::Coupled(ops) => (
                ops.assemble(v, 0.0, Frame::Transformed).map_err(SolverError::from)?,
                ops.dipole(),
            ),
            Space::Electronic(el) => (
                el.hamiltonian(&self.params, v, false).map_err(SolverError::from)?,
                &el.dipole,
            ),
        };
        let gs = ground_state(&h, &self.opts)?;
        Ok(d.expectation(&gs.vector).map_err(SolverError::from)?)
    }
}

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    /// `f(x)` at the returned abscissa.
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Final bracket handed to the root search.
    pub bracket: (f64, f64),
    /// Whether the monotonicity check on the bracket passed.
    pub monotone: bool,
    /// The bracket collapsed to floating-point resolution before `d_tol`
    /// was reached.
    pub resolution_limited: bool,
}

struct Counted<F> {
    f: F,
    calls: usize,
}

impl<F: FnMut(f64) -> Result<f64, MapsError>> Counted<F> {
    fn call(&mut self, x: f64) -> Result<f64, MapsError> {
        self.calls += 1;
        (self.f)(x)
    }
}

fn encloses(fa: f64, fb: f64, t: f64) -> bool {
    (fa - t) * (fb - t) <= 0.0
}

/// Solves `f(x) = target` for a monotone `f`, starting from `bracket` and
/// widening it symmetrically until the target is enclosed. The bracket is
/// checked for monotonicity; if that fails a scan picks the first sampled
/// sub-interval that encloses the target. The root itself is polished with
/// Brent's method.
pub fn invert_monotone<F>(f: F, target: f64, bracket: (f64, f64), inv: &InversionOptions) -> Result<Root, MapsError>
where
    F: FnMut(f64) -> Result<f64, MapsError>,
{
    let mut f = Counted { f, calls: 0 };
    let centre = 0.5 * (bracket.0 + bracket.1);
    let mut half = (0.5 * (bracket.1 - bracket.0)).abs().max(f64::MIN_POSITIVE);
    let (mut a, mut b) = (centre - half, centre + half);
    let (mut fa, mut fb) = (f.call(a)?, f.call(b)?);
    while !encloses(fa, fb, target) {
        if half >= inv.max_half_width {
            return Err(MapsError::Unattainable {
                target,
                min: fa.min(fb),
                max: fa.max(fb),
            });
        }
        half = (2.0 * half).min(inv.max_half_width);
        (a, b) = (centre - half, centre + half);
        (fa, fb) = (f.call(a)?, f.call(b)?);
    }

    let n = inv.monotone_samples;
    let xs: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect();
    let mut ys = vec![fa];
    for &x in &xs[1..n - 1] {
        ys.push(f.call(x)?);
    }
    ys.push(fb);
    let dir = (fb - fa).signum();
    let slack = 1e-12 * (1.0 + fa.abs().max(fb.abs()));
    let monotone = ys.windows(2).all(|w| dir * (w[1] - w[0]) >= -slack);
    if !monotone {
        log::warn!("d(v) not monotone on [{a}, {b}] for target {target}; scanning");
        let m = inv.scan_points;
        let mut prev = (a, fa);
        let mut found = None;
        for k in 1..m {
            let x = if k == m - 1 { b } else { a + (b - a) * k as f64 / (m - 1) as f64 };
            let y = if k == m - 1 { fb } else { f.call(x)? };
            if encloses(prev.1, y, target) {
                found = Some((prev, (x, y)));
                break;
            }
            prev = (x, y);
        }
        let ((x0, y0), (x1, y1)) = found.expect("end points enclose the target");
        (a, fa, b, fb) = (x0, y0, x1, y1);
    }

    let (x, value, iterations, resolution_limited) = brent(&mut f, (a, fa), (b, fb), target, inv)?;
    Ok(Root {
        x,
        value,
        iterations,
        evaluations: f.calls,
        bracket: (a, b),
        monotone,
        resolution_limited,
    })
}

fn brent<F>(
    f: &mut Counted<F>,
    (mut a, fa): (f64, f64),
    (mut b, fb): (f64, f64),
    target: f64,
    inv: &InversionOptions,
) -> Result<(f64, f64, usize, bool), MapsError>
where
    F: FnMut(f64) -> Result<f64, MapsError>,
{
    let (mut fa, mut fb) = (fa - target, fb - target);
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for it in 0..inv.max_iter {
        if fb.signum() == fc.signum() && fb != 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * inv.x_tol + f64::MIN_POSITIVE;
        let xm = 0.5 * (c - b);
        if fb.abs() <= inv.d_tol {
            return Ok((b, fb + target, it, false));
        }
        if xm.abs() <= tol {
            return Ok((b, fb + target, it, true));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f.call(b)? - target;
    }
    Ok((b, fb + target, inv.max_iter, false))
}

/// External pair reproducing a target `(d, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    pub d_target: f64,
    pub q_target: f64,
    pub v_tilde: f64,
    pub v_ext: f64,
    pub j_ext: f64,
    /// `d` of the fixed-cutoff map at the root.
    pub d_achieved: f64,
    /// Photon cutoff of the map; `None` for the electronic map.
    pub cutoff: Option<usize>,
    pub root: Root,
}

impl Inversion {
    /// The same inversion at another displacement target: only the drive
    /// and the split of `ṽ` into `(v_ext, j_ext)` change.
    pub fn at_displacement(&self, p: &ModelParams, q_target: f64) -> Self {
        let w = p.omega;
        let j_ext = w * w * p.lambda * self.d_target - w.powi(3) * q_target;
        Self {
            q_target,
            j_ext,
            v_ext: self.v_tilde - p.lambda / (w * w) * j_ext,
            ..*self
        }
    }
}

fn check_target(p: &ModelParams, d_target: f64) -> Result<(), MapsError> {
    let m = p.max_dipole();
    if !d_target.is_finite() || d_target.abs() >= m {
        return Err(MapsError::Unattainable {
            target: d_target,
            min: -m,
            max: m,
        });
    }
    Ok(())
}

fn polish(map: &DipoleMap, d_target: f64, bracket: (f64, f64), inv: &InversionOptions) -> Result<Root, MapsError> {
    let root = invert_monotone(|v| map.dipole(v), d_target, bracket, inv)?;
    let residual = (root.value - d_target).abs();
    let limit = if root.resolution_limited {
        inv.resolution_tol.max(inv.accept_tol)
    } else {
        inv.accept_tol
    };
    if residual > limit {
        return Err(MapsError::InversionFailed {
            target: d_target,
            residual: (root.value - d_target).abs(),
        });
    }
    Ok(root)
}

fn at_zero_drive(p: &ModelParams, v: f64) -> ModelParams {
    p.clone().with_external(v, 0.0)
}

/// Inverts the polaritonic map: finds `ṽ` with `d(ṽ) = d_target` at zero
/// drive. The map is evaluated at the cutoff converged at `ṽ = 0`; if the
/// cutoff converged at the root is larger, the root is polished again at
/// that cutoff.
pub fn invert_polaritonic(
    p: &ModelParams,
    d_target: f64,
    opts: &SolverOptions,
    inv: &InversionOptions,
) -> Result<Inversion, MapsError> {
    p.validate().map_err(SolverError::from)?;
    inv.validate().map_err(MapsError::Grid)?;
    check_target(p, d_target)?;
    let converged = |v: f64| -> Result<usize, MapsError> {
        if opts.auto_cutoff {
            Ok(converge_cutoff(&at_zero_drive(p, v), opts)?.cutoff)
        } else {
            Ok(p.fock_cutoff)
        }
    };
    let mut cutoff = converged(0.0)?;
    let mut bracket = (-inv.initial_half_width, inv.initial_half_width);
    for _ in 0..8 {
        let map = DipoleMap::coupled(p, cutoff, opts)?;
        let root = polish(&map, d_target, bracket, inv)?;
        let at_root = converged(root.x)?;
        if at_root <= cutoff {
            return Ok(Inversion {
                d_target,
                q_target: 0.0,
                v_tilde: root.x,
                v_ext: root.x,
                j_ext: 0.0,
                d_achieved: root.value,
                cutoff: Some(cutoff),
                root,
            }
            .at_displacement(p, p.lambda * d_target / p.omega));
        }
        cutoff = at_root;
        let w = 1e-3 * (1.0 + root.x.abs());
        bracket = (root.x - w, root.x + w);
    }
    Err(MapsError::InversionFailed {
        target: d_target,
        residual: f64::NAN,
    })
}

/// External pair `(v_ext, j_ext)` whose ground state has dipole `d_target`
/// and displacement `q_target`. The drive follows from the photon constraint,
/// `j_ext = ω²λ d − ω³ q`; `v_ext` from inverting `d(ṽ)`.
pub fn invert_map(
    p: &ModelParams,
    d_target: f64,
    q_target: f64,
    opts: &SolverOptions,
    inv: &InversionOptions,
) -> Result<Inversion, MapsError> {
    if !q_target.is_finite() {
        return Err(MapsError::Range(format!("q target {q_target} is not finite")));
    }
    Ok(invert_polaritonic(p, d_target, opts, inv)?.at_displacement(p, q_target))
}

/// Kohn–Sham potential `v_s[d]` of the photon-free electronic system.
pub fn invert_kohn_sham(
    p: &ModelParams,
    d_target: f64,
    opts: &SolverOptions,
    inv: &InversionOptions,
) -> Result<Inversion, MapsError> {
    p.validate().map_err(SolverError::from)?;
    inv.validate().map_err(MapsError::Grid)?;
    check_target(p, d_target)?;
    let map = DipoleMap::kohn_sham(p, opts)?;
    let root = polish(&map, d_target, (-inv.initial_half_width, inv.initial_half_width), inv)?;
    Ok(Inversion {
        d_target,
        q_target: f64::NAN,
        v_tilde: root.x,
        v_ext: root.x,
        j_ext: f64::NAN,
        d_achieved: root.value,
        cutoff: None,
        root,
    })
}
