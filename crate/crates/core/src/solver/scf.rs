//! Mean-field (classical photon) self-consistent field.
//!
//! The photon block of the mean-field problem is a displaced oscillator,
//! so `q = λd/ω − j_ext/ω³` and only `d` is iterated:
//! `d ← (1 − α) d + α ⟨d̂⟩[H_mf(d)]`.

use serde::{Deserialize, Serialize};

use super::eigen::{dense_ground_state, GroundState};
use super::{SolverError, SolverOptions};
use crate::hilbert::SparseOperator;
use crate::model::{mf_potential, ElectronicOperators, MfForm, MfState, ModelParams};
use crate::observables::{
    correlation_entropy, interaction_energy, natural_occupations, one_rdm_fermion, photon_energy,
    EntropyConvention, ObservableSet,
};

/// Which fixed point stands for a grid point when several coexist.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MfSelection {
    /// The fixed point reached from `d = 0`, i.e. the branch continuously
    /// connected to the unpolarized state.
    #[default]
    ZeroSeed,
    /// The converged fixed point of lowest mean-field energy.
    LowestEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfSolution {
    pub d: f64,
    pub q: f64,
    /// Product-state energy `⟨H⟩` of the electronic ground state times the
    /// coherent photon state with displacement `q`.
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed_d: f64,
    /// `|⟨d̂⟩[H_mf(d)] − d|` at the last iterate.
    pub residual: f64,
}

/// Converged branches of one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfBranches {
    /// Distinct converged fixed points, ascending in `d`.
    pub solutions: Vec<MfSolution>,
    pub selected: MfSolution,
    /// Index into `solutions` of the lowest-energy branch.
    pub lowest: usize,
    pub attempted: usize,
}

impl MfBranches {
    pub fn count(&self) -> usize {
        self.solutions.len()
    }
}

/// Default seeds `{−n_e, −n_e/2, 0, n_e/2, n_e}`.
pub fn default_seeds(p: &ModelParams) -> Vec<f64> {
    let n = p.n_electrons() as f64;
    vec![-n, -0.5 * n, 0.0, 0.5 * n, n]
}

/// Mean-field problem at one parameter point.
#[derive(Debug, Clone)]
pub struct MeanField {
    params: ModelParams,
    electronic: ElectronicOperators,
    /// `H_el + v_ext d̂ [+ λ²d̂²/2]`.
    bare: SparseOperator,
}

impl MeanField {
    pub fn new(p: &ModelParams) -> Result<Self, SolverError> {
        let electronic = ElectronicOperators::new(p)?;
        let bare = electronic.hamiltonian(p, p.v_ext, p.self_energy())?;
        Ok(Self {
            params: p.clone(),
            electronic,
            bare,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `q` slaved to `d` by the photon equation of motion.
    pub fn q_of(&self, d: f64) -> f64 {
        let p = &self.params;
        p.lambda * d / p.omega - p.j_ext / p.omega.powi(3)
    }

    /// Electronic ground state of the reduced mean-field Hamiltonian at `d`.
    pub fn electronic_ground_state(&self, d: f64, opts: &SolverOptions) -> Result<GroundState, SolverError> {
        let p = &self.params;
        let mf = MfState { d, q: self.q_of(d) };
        let h = self
            .electronic
            .hamiltonian(p, mf_potential(p, mf, MfForm::Reduced), p.self_energy())?;
        dense_ground_state(&h, opts)
    }

    /// `⟨d̂⟩` of the mean-field ground state at `d`, and that state's
    /// product-state energy.
    pub fn response(&self, d: f64, opts: &SolverOptions) -> Result<(f64, f64), SolverError> {
        let gs = self.electronic_ground_state(d, opts)?;
        let d_out = self.electronic.dipole.expectation(&gs.vector)?;
        Ok((d_out, self.product_energy(&gs, d_out)?))
    }

    /// `⟨H_el + v d̂ [+ λ²d̂²/2]⟩ − ω² q²/2` with `q` from the photon
    /// equation at `d_state = ⟨d̂⟩`; the exact expectation value of `H` in
    /// a product state, minimized over the coherent photon amplitude.
    fn product_energy(&self, gs: &GroundState, d_state: f64) -> Result<f64, SolverError> {
        let w = self.params.omega;
        let e_el = self.bare.expectation(&gs.vector)?;
        let q = self.q_of(d_state);
        Ok(e_el - 0.5 * w * w * q * q)
    }

    /// Linear-mixing SCF from `seed_d`. Non-convergence is reported through
    /// `converged = false`, not as an error.
    pub fn solve(&self, seed_d: f64, opts: &SolverOptions) -> Result<MfSolution, SolverError> {
        let alpha = if self.params.lambda == 0.0 { 1.0 } else { opts.scf_mixing };
        let mut d = seed_d;
        let mut last = (f64::INFINITY, f64::NAN);
        for it in 1..=opts.scf_max_iter.max(1) {
            let (d_out, energy) = self.response(d, opts)?;
            let residual = (d_out - d).abs();
            last = (residual, energy);
            if residual < opts.scf_tol || self.params.lambda == 0.0 {
                // at λ = 0 the response does not depend on d
                let d = if self.params.lambda == 0.0 { d_out } else { d };
                return Ok(MfSolution {
                    d,
                    q: self.q_of(d),
                    energy,
                    iterations: it,
                    converged: true,
                    seed_d,
                    residual,
                });
            }
            d = (1.0 - alpha) * d + alpha * d_out;
        }
        Ok(MfSolution {
            d,
            q: self.q_of(d),
            energy: last.1,
            iterations: opts.scf_max_iter,
            converged: false,
            seed_d,
            residual: last.0,
        })
    }

    /// All distinct converged fixed points reached from `seeds`
    /// (deduplicated at 1e-6 in `d`) and the selected branch.
    pub fn branches(&self, seeds: &[f64], opts: &SolverOptions) -> Result<MfBranches, SolverError> {
        let mut solutions: Vec<MfSolution> = Vec::new();
        let mut from_zero: Option<MfSolution> = None;
        for &seed in seeds {
            let sol = self.solve(seed, opts)?;
            if !sol.converged {
                log::debug!("mean-field seed {seed} did not converge (residual {:e})", sol.residual);
                continue;
            }
            if seed == 0.0 {
                from_zero = Some(sol.clone());
            }
            if solutions.iter().all(|s| (s.d - sol.d).abs() > 1e-6) {
                solutions.push(sol);
            }
        }
        if solutions.is_empty() {
            return Err(SolverError::NoConvergedBranch {
                attempted: seeds.len(),
            });
        }
        solutions.sort_by(|a, b| a.d.total_cmp(&b.d));
        let lowest = (0..solutions.len())
            .min_by(|&a, &b| solutions[a].energy.total_cmp(&solutions[b].energy))
            .expect("non-empty");
        let selected = match opts.mf_selection {
            MfSelection::LowestEnergy => solutions[lowest].clone(),
            MfSelection::ZeroSeed => match from_zero {
                Some(s) => s,
                None => self.solve(0.0, opts).ok().filter(|s| s.converged).unwrap_or_else(|| solutions[lowest].clone()),
            },
        };
        Ok(MfBranches {
            solutions,
            selected,
            lowest,
            attempted: seeds.len(),
        })
    }

    /// Lab-frame observables of a mean-field solution. The photon is a
    /// coherent state, so `N = ω q²/2`, `⟨q̂ d̂⟩ = q d` and `E_xc = 0`.
    pub fn observables(
        &self,
        sol: &MfSolution,
        opts: &SolverOptions,
        conv: EntropyConvention,
    ) -> Result<ObservableSet, SolverError> {
        let p = &self.params;
        let w = p.omega;
        let gs = self.electronic_ground_state(sol.d, opts)?;
        let rdm_eigs = natural_occupations(&one_rdm_fermion(&self.electronic.sector, &gs.vector)?);
        let s_corr = correlation_entropy(&rdm_eigs, conv)?;
        let n_photon = 0.5 * w * sol.q * sol.q;
        let qd_moment = sol.q * sol.d;
        let (e_int, _, e_xc) = interaction_energy(w, p.lambda, qd_moment, sol.q, sol.d);
        Ok(ObservableSet {
            d: sol.d,
            q: sol.q,
            p: 0.0,
            n_photon,
            energy: sol.energy,
            qd_moment,
            e_int,
            e_xc,
            e_photon: photon_energy(w, p.j_ext, n_photon, sol.q),
            q_sq: sol.q * sol.q + 0.5 / w,
            p_sq: 0.5 * w,
            s_corr,
            rdm_eigs,
        })
    }
}

/// SCF from a single seed.
pub fn scf_meanfield(p: &ModelParams, seed_d: f64, opts: &SolverOptions) -> Result<MfSolution, SolverError> {
    MeanField::new(p)?.solve(seed_d, opts)
}

/// Seeded branch scan; `seeds` empty selects the configured or default seeds.
pub fn mf_branches(p: &ModelParams, seeds: &[f64], opts: &SolverOptions) -> Result<MfBranches, SolverError> {
    let seeds = if !seeds.is_empty() {
        seeds.to_vec()
    } else if !opts.scf_seeds.is_empty() {
        opts.scf_seeds.clone()
    } else {
        default_seeds(p)
    };
    MeanField::new(p)?.branches(&seeds, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn uncoupled_converges_in_one_step() {
        let p = ModelParams::two_site(1, 0).with_external(0.7, 3.0);
        let s = scf_meanfield(&p, 0.4, &opts()).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations, 1);
        let exact = -0.7 / (0.49f64 + p.t0 * p.t0).sqrt();
        assert!((s.d - exact).abs() < 1e-12);
        assert!((s.q + 3.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_point_has_zero_dipole() {
        let p = ModelParams::two_site(1, 1).with_u0(1.0).with_lambda(0.3);
        let s = scf_meanfield(&p, 0.0, &opts()).unwrap();
        assert!(s.converged);
        assert!(s.d.abs() < 1e-12 && s.q.abs() < 1e-12);
    }

    #[test]
    fn photon_constraint_holds_exactly() {
        let p = ModelParams::two_site(1, 1)
            .with_u0(5.0)
            .with_lambda(1.0)
            .with_external(0.5, -0.8);
        let s = scf_meanfield(&p, 0.0, &opts()).unwrap();
        assert_eq!(s.q, p.lambda * s.d / p.omega - p.j_ext / p.omega.powi(3));
    }

    #[test]
    fn strong_coupling_is_multistable() {
        let p = ModelParams::two_site(1, 1).with_u0(5.0).with_lambda(2.0);
        let b = mf_branches(&p, &[], &opts()).unwrap();
        assert!(b.count() >= 2, "{:?}", b.solutions);
        assert!(b.selected.d.abs() < 1e-9, "zero seed stays unpolarized");
        let lowest = &b.solutions[b.lowest];
        assert!(lowest.energy <= b.selected.energy);
    }

    #[test]
    fn weak_coupling_is_single_branch() {
        let p = ModelParams::two_site(1, 1).with_u0(5.0).with_lambda(0.1).with_external(0.3, 0.0);
        assert_eq!(mf_branches(&p, &[-2.0, -1.0, 0.0, 1.0, 2.0], &opts()).unwrap().count(), 1);
    }
}
