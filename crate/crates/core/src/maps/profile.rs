use serde::{Deserialize, Serialize};

use super::{MapTable, MapsError};
use crate::observables::ObservableSet;

/// A one-dimensional map `y(ṽ)` with strictly increasing `ṽ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub v_tilde: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(v_tilde: Vec<f64>, values: Vec<f64>) -> Result<Self, MapsError> {
        if v_tilde.len() != values.len() {
            return Err(MapsError::Grid("profile axes differ in length".into()));
        }
        if v_tilde.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MapsError::Grid("profile abscissa must be strictly increasing".into()));
        }
        Ok(Self { v_tilde, values })
    }

    /// `f` along the `j` index `ij` of a table whose `v` axis is `ṽ`
    /// (zero-drive profile tables).
    pub fn from_table(table: &MapTable, ij: usize, f: impl Fn(&ObservableSet) -> f64 + Copy) -> Result<Self, MapsError> {
        let (nv, _) = table.grid.shape();
        let x = (0..nv).map(|iv| table.row(iv, ij).v_tilde).collect();
        let y = (0..nv).map(|iv| table.row(iv, ij).value(f)).collect();
        Self::new(x, y)
    }

    pub fn len(&self) -> usize {
        self.v_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_tilde.is_empty()
    }
}

/// Straight cuts through a map table between opposite corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutDirection {
    /// `(v_min, j_min) → (v_max, j_max)`.
    Diagonal,
    /// `(v_min, j_max) → (v_max, j_min)`.
    Antidiagonal,
}

fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    if axis.len() == 1 {
        return (0, 0.0);
    }
    let i = match axis.binary_search_by(|a| a.total_cmp(&x)) {
        Ok(i) => i.min(axis.len() - 2),
        Err(i) => i.clamp(1, axis.len() - 1) - 1,
    };
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

fn bilinear(table: &MapTable, v: f64, j: f64, f: impl Fn(&ObservableSet) -> f64 + Copy) -> f64 {
    let (iv, tv) = locate(table.grid.v_values(), v);
    let (ij, tj) = locate(table.grid.j_values(), j);
    let (nv, nj) = table.grid.shape();
    let iv1 = (iv + 1).min(nv - 1);
    let ij1 = (ij + 1).min(nj - 1);
    let z = |a, b| table.row(a, b).value(f);
    (1.0 - tv) * (1.0 - tj) * z(iv, ij)
        + tv * (1.0 - tj) * z(iv1, ij)
        + (1.0 - tv) * tj * z(iv, ij1)
        + tv * tj * z(iv1, ij1)
}

/// Samples `f` along a corner-to-corner cut with bilinear interpolation and
/// returns it as a profile over `ṽ`, using `n` evenly spaced samples.
pub fn polariton_cut(
    table: &MapTable,
    direction: CutDirection,
    n: usize,
    lambda_over_omega_sq: f64,
    f: impl Fn(&ObservableSet) -> f64 + Copy,
) -> Result<Profile, MapsError> {
    table.grid.require_2d()?;
    if n < 2 {
        return Err(MapsError::Range("a cut needs at least 2 samples".into()));
    }
    let vs = table.grid.v_values();
    let js = table.grid.j_values();
    let (v0, v1) = (vs[0], vs[vs.len() - 1]);
    let (j0, j1) = match direction {
        CutDirection::Diagonal => (js[0], js[js.len() - 1]),
        CutDirection::Antidiagonal => (js[js.len() - 1], js[0]),
    };
    let vt = |v: f64, j: f64| v + lambda_over_omega_sq * j;
    let span = vt(v1, j1) - vt(v0, j0);
    if span.abs() <= 1e-12 * (1.0 + vt(v0, j0).abs()) {
        return Err(MapsError::Range(format!(
            "ṽ is constant along the {direction:?} cut; choose the other direction"
        )));
    }
    let mut pts: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            let (v, j) = (v0 + t * (v1 - v0), j0 + t * (j1 - j0));
            (vt(v, j), bilinear(table, v, j, f))
        })
        .collect();
    if span < 0.0 {
        pts.reverse();
    }
    let (x, y) = pts.into_iter().unzip();
    Profile::new(x, y)
}

/// `α_i = ∂y/∂ṽ` by central differences, one-sided at the ends.
pub fn polarizability(profile: &Profile) -> Result<Vec<f64>, MapsError> {
    let (x, y) = (&profile.v_tilde, &profile.values);
    let n = x.len();
    if n < 3 {
        return Err(MapsError::Grid("polarizability needs at least 3 points".into()));
    }
    if x.windows(2).any(|w| !(w[1] - w[0] > 0.0)) {
        return Err(MapsError::Grid("degenerate profile spacing".into()));
    }
    let mut a = Vec::with_capacity(n);
    a.push((y[1] - y[0]) / (x[1] - x[0]));
    for i in 1..n - 1 {
        a.push((y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]));
    }
    a.push((y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]));
    Ok(a)
}

/// Trapezoid rule `∫ y dx`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Vertex of the parabola through the three samples around the maximum.
    pub v_tilde: f64,
    /// Signed sample value at the local maximum of `|α|`.
    pub alpha: f64,
    pub index: usize,
}

/// Local maxima of `|α|` whose height is at least `min_relative` times the
/// global maximum, in ascending `ṽ`.
pub fn find_peaks(v_tilde: &[f64], alpha: &[f64], min_relative: f64) -> Vec<Peak> {
    let a: Vec<f64> = alpha.iter().map(|x| x.abs()).collect();
    let top = a.iter().copied().fold(0.0, f64::max);
    if top == 0.0 || a.len() < 3 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < a.len() {
        if a[i] > a[i - 1] && a[i] >= min_relative * top {
            // walk across flat tops
            let mut k = i;
            while k + 1 < a.len() && a[k + 1] == a[i] {
                k += 1;
            }
            if k + 1 < a.len() && a[k + 1] < a[i] {
                let c = (i + k) / 2;
                let mut x = v_tilde[c];
                if k == i {
                    let (y0, y1, y2) = (a[i - 1], a[i], a[i + 1]);
                    let denom = y0 - 2.0 * y1 + y2;
                    let h = 0.5 * (v_tilde[i + 1] - v_tilde[i - 1]);
                    if denom < 0.0 {
                        x += (0.5 * (y0 - y2) / denom * h).clamp(-h, h);
                    }
                }
                peaks.push(Peak {
                    v_tilde: x,
                    alpha: alpha[c],
                    index: c,
                });
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Measure of `{ṽ : |y(ṽ) − level| < half_width}` for the piecewise-linear
/// interpolant of the profile.
pub fn plateau_width(profile: &Profile, level: f64, half_width: f64) -> f64 {
    let (lo, hi) = (level - half_width, level + half_width);
    let mut total = 0.0;
    for (xw, yw) in profile.v_tilde.windows(2).zip(profile.values.windows(2)) {
        let (y0, y1) = (yw[0], yw[1]);
        if !(y0.is_finite() && y1.is_finite()) {
            continue;
        }
        let frac = if y1 == y0 {
            if y0 > lo && y0 < hi {
                1.0
            } else {
                0.0
            }
        } else {
            let (ta, tb) = ((lo - y0) / (y1 - y0), (hi - y0) / (y1 - y0));
            let (t0, t1) = (ta.min(tb).max(0.0), ta.max(tb).min(1.0));
            (t1 - t0).max(0.0)
        };
        total += frac * (xw[1] - xw[0]);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Steepening {
    pub max_gradient: f64,
    pub plateau_width: f64,
}

/// Largest `|∂y/∂ṽ|` and the plateau width around `level`.
pub fn steepening_diagnostics(profile: &Profile, level: f64, half_width: f64) -> Result<Steepening, MapsError> {
    let a = polarizability(profile)?;
    Ok(Steepening {
        max_gradient: a.iter().map(|x| x.abs()).fold(0.0, f64::max),
        plateau_width: plateau_width(profile, level, half_width),
    })
}
