//! Exact ground states with an automatically converged photon cutoff.

use serde::{Deserialize, Serialize};

use super::eigen::{ground_state_from, GroundState};
use super::{SolverError, SolverOptions};
use crate::hilbert::StateVector;
use crate::model::{Frame, ModelOperators, ModelParams};
use crate::observables::{evaluate, EntropyConvention, ObservableSet};

/// One entry of the cutoff convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffStep {
    pub cutoff: usize,
    pub energy: f64,
    pub d: f64,
    pub q: f64,
    pub n_photon: f64,
    /// Estimated eigenvector error `(‖Hv − Ev‖ + 100 ε ‖H‖) / gap`.
    pub resolution: f64,
    #[serde(skip)]
    scales: [f64; 3],
}

impl CutoffStep {
    fn of(cutoff: usize, obs: &ObservableSet, ground: &GroundState, norm: f64, max_dipole: f64) -> Self {
        let resolution = (ground.residual + 100.0 * f64::EPSILON * norm) / ground.gap;
        Self {
            cutoff,
            energy: obs.energy,
            d: obs.d,
            q: obs.q,
            n_photon: obs.n_photon,
            resolution,
            scales: [max_dipole, obs.q_sq.max(0.0).sqrt(), 2.0 * (obs.n_photon + 1.0)],
        }
    }

    /// Whether E, d, q and N all agree with `other` to within `tol`
    /// (relative to `max(1, |x|)`). Differences of d, q and N below what the
    /// eigenvectors can resolve, `2 δ ‖O ψ‖`, also count as agreement; this
    /// only matters for near-degenerate ground states.
    pub fn agrees_with(&self, other: &Self, tol: f64) -> bool {
        let delta = self.resolution.max(other.resolution);
        let rel = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(1.0);
        if !rel(self.energy, other.energy) {
            return false;
        }
        [(self.d, other.d), (self.q, other.q), (self.n_photon, other.n_photon)]
            .iter()
            .zip(self.scales.iter().zip(&other.scales))
            .all(|(&(a, b), (sa, sb))| rel(a, b) || (a - b).abs() <= 2.0 * delta * sa.max(*sb))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffConvergence {
    pub cutoff: usize,
    pub trace: Vec<CutoffStep>,
}

/// A solved grid point: lab-frame observables plus the raw ground state
/// in the frame that was diagonalized.
#[derive(Debug, Clone)]
pub struct ExactPoint {
    pub v_ext: f64,
    pub j_ext: f64,
    pub frame: Frame,
    pub cutoff: usize,
    pub ground: GroundState,
    pub observables: ObservableSet,
    pub trace: Vec<CutoffStep>,
}

/// Next cutoff of the ×1.25 schedule (always at least one more state).
pub fn next_cutoff(c: usize) -> usize {
    ((c as f64 * 1.25).ceil() as usize).max(c + 1)
}

fn pad(prev: &StateVector, fermion_dim: usize, old_cutoff: usize, new_cutoff: usize) -> StateVector {
    let (ob, nb) = (old_cutoff + 1, new_cutoff + 1);
    let mut out = vec![0.0; fermion_dim * nb];
    for f in 0..fermion_dim {
        out[f * nb..f * nb + ob].copy_from_slice(&prev.as_slice()[f * ob..(f + 1) * ob]);
    }
    StateVector::from_vec(out)
}

struct Solved {
    ground: GroundState,
    observables: ObservableSet,
    step: CutoffStep,
}

fn solve_at(
    p: &ModelParams,
    cutoff: usize,
    opts: &SolverOptions,
    conv: EntropyConvention,
    start: Option<&StateVector>,
) -> Result<Solved, SolverError> {
    let ops = ModelOperators::new(p, cutoff)?;
    let h = ops.assemble(p.v_ext, p.j_ext, opts.frame)?;
    let mut ground = ground_state_from(&h, opts, start)?;
    ground.cutoff_used = Some(cutoff);
    let observables = evaluate(&ops, &ground, opts.frame, p.j_ext, conv)?;
    let step = CutoffStep::of(cutoff, &observables, &ground, h.gershgorin_radius(), p.max_dipole());
    Ok(Solved {
        ground,
        observables,
        step,
    })
}

fn run(p: &ModelParams, opts: &SolverOptions, conv: EntropyConvention) -> Result<ExactPoint, SolverError> {
    p.validate()?;
    let point = |s: Solved, cutoff: usize, trace: Vec<CutoffStep>| ExactPoint {
        v_ext: p.v_ext,
        j_ext: p.j_ext,
        frame: opts.frame,
        cutoff,
        ground: s.ground,
        observables: s.observables,
        trace,
    };
    let mut cutoff = p.fock_cutoff;
    let first = solve_at(p, cutoff, opts, conv, None)?;
    let mut trace = vec![first.step];
    if !opts.auto_cutoff {
        return Ok(point(first, cutoff, trace));
    }
    let fermion_dim = first.ground.vector.len() / (cutoff + 1);
    let mut prev = first;
    loop {
        let next = next_cutoff(cutoff);
        if next > opts.cutoff_ceiling {
            return Err(SolverError::CutoffNotConverged {
                ceiling: opts.cutoff_ceiling,
                last: cutoff,
                trace,
            });
        }
        let start = pad(&prev.ground.vector, fermion_dim, cutoff, next);
        let cur = solve_at(p, next, opts, conv, Some(&start))?;
        let converged = cur.step.agrees_with(&prev.step, opts.cutoff_tol);
        trace.push(cur.step);
        if converged {
            return Ok(point(prev, cutoff, trace));
        }
        prev = cur;
        cutoff = next;
    }
}

/// Exact ground state of `p` at its external pair, converging the photon
/// cutoff upward from `p.fock_cutoff` unless `opts.auto_cutoff` is off.
pub fn solve_exact(p: &ModelParams, opts: &SolverOptions) -> Result<ExactPoint, SolverError> {
    run(p, opts, EntropyConvention::default())
}

/// As [`solve_exact`] with an explicit entropy convention.
pub fn solve_exact_with(
    p: &ModelParams,
    opts: &SolverOptions,
    conv: EntropyConvention,
) -> Result<ExactPoint, SolverError> {
    run(p, opts, conv)
}

/// Smallest cutoff of the geometric schedule at which E, d, q and N stop
/// changing by more than `cutoff_tol` (relative), with the full trace.
pub fn converge_cutoff(p: &ModelParams, opts: &SolverOptions) -> Result<CutoffConvergence, SolverError> {
    let opts = SolverOptions {
        auto_cutoff: true,
        ..opts.clone()
    };
    let pt = run(p, &opts, EntropyConvention::default())?;
    Ok(CutoffConvergence {
        cutoff: pt.cutoff,
        trace: pt.trace,
    })
}
