//! Ground states, photon-cutoff convergence and the mean-field
//! self-consistent field.

mod cutoff;
mod eigen;
mod scf;
pub mod tridiagonal;

pub use cutoff::{
    converge_cutoff, next_cutoff, solve_exact, solve_exact_with, CutoffConvergence, CutoffStep,
    ExactPoint,
};
pub use eigen::{
    default_start, dense_ground_state, ground_state, ground_state_from, lanczos_ground_state,
    GroundState, Method,
};
pub use scf::{default_seeds, mf_branches, scf_meanfield, MeanField, MfBranches, MfSelection, MfSolution};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::HilbertError;
use crate::model::{Frame, ModelError};
use crate::observables::ObservablesError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("operator is not flagged Hermitian")]
    NotHermitian,
    #[error("operator has dimension zero")]
    EmptyOperator,
    #[error("Lanczos did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("photon cutoff not converged below the ceiling of {ceiling} (last tried {last})")]
    CutoffNotConverged {
        ceiling: usize,
        last: usize,
        trace: Vec<CutoffStep>,
    },
    #[error("no mean-field seed converged ({attempted} attempted)")]
    NoConvergedBranch { attempted: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Observables(#[from] ObservablesError),
}

/// Numerical settings of the eigensolvers, cutoff search and SCF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Largest dimension handled by the dense eigensolver.
    pub dense_threshold: usize,
    pub lanczos_max_iter: usize,
    /// Required `‖Hv − Ev‖` of the Lanczos ground state.
    pub lanczos_tol: f64,
    /// Ground states with `E1 − E0` below this are flagged degenerate.
    pub degeneracy_tol: f64,
    pub scf_mixing: f64,
    pub scf_tol: f64,
    pub scf_max_iter: usize,
    /// Mean-field seeds for branch scans; empty selects
    /// `{−n_e, −n_e/2, 0, n_e/2, n_e}`.
    pub scf_seeds: Vec<f64>,
    /// Which converged mean-field fixed point represents a grid point.
    pub mf_selection: MfSelection,
    /// Relative change of E, d, q and N that counts as cutoff-converged.
    pub cutoff_tol: f64,
    pub cutoff_ceiling: usize,
    /// Converge the photon cutoff per point; otherwise use `fock_cutoff` as is.
    pub auto_cutoff: bool,
    /// Hamiltonian diagonalized for exact points.
    pub frame: Frame,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 256,
            lanczos_max_iter: 4000,
            lanczos_tol: 1e-10,
            degeneracy_tol: 1e-9,
            scf_mixing: 0.4,
            scf_tol: 1e-10,
            scf_max_iter: 10_000,
            scf_seeds: Vec::new(),
            mf_selection: MfSelection::default(),
            cutoff_tol: 1e-9,
            cutoff_ceiling: 4096,
            auto_cutoff: true,
            frame: Frame::Transformed,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.scf_mixing > 0.0 && self.scf_mixing <= 1.0) {
            return Err(format!("scf_mixing must lie in (0, 1], got {}", self.scf_mixing));
        }
        for (name, v) in [
            ("lanczos_tol", self.lanczos_tol),
            ("scf_tol", self.scf_tol),
            ("cutoff_tol", self.cutoff_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.degeneracy_tol >= 0.0) {
            return Err("degeneracy_tol must be non-negative".into());
        }
        if self.lanczos_max_iter < 2 {
            return Err("lanczos_max_iter must be at least 2".into());
        }
        if self.cutoff_ceiling < 1 {
            return Err("cutoff_ceiling must be at least 1".into());
        }
        if self.scf_seeds.iter().any(|s| !s.is_finite()) {
            return Err("scf_seeds must be finite".into());
        }
        Ok(())
    }
}
