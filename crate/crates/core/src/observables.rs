//! Ground-state expectation values and derived quantities.
//!
//! Ground states may come from either frame. Photon observables of a
//! transformed-frame state are mapped back to the lab frame with the
//! coherent shift `s = j_ext/ω³`:
//!
//! ```text
//! q = q' − s      ⟨q²⟩ = ⟨q²⟩' − 2 s q' + s²      ⟨q d⟩ = ⟨q d⟩' − s d
//! N = N' − ω s q' + ω s²/2
//! ```
//!
//! while `d`, `p`, `⟨p²⟩`, the 1-RDM and the energy are unchanged.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{
    Amplitude, ComplexOperator, FermionSector, HilbertError, ProductBasis, SparseOperator,
    Spin, StateVector,
};
use crate::model::{Frame, ModelOperators};
use crate::solver::GroundState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservablesError {
    #[error("expectation value has imaginary part {0:e}")]
    NotReal(f64),
    #[error("natural occupation {0} outside [0, 1]")]
    OccupationOutOfRange(f64),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Everything measured on one ground state, in the lab frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub d: f64,
    pub q: f64,
    pub p: f64,
    pub n_photon: f64,
    pub energy: f64,
    /// Raw moment `⟨q̂ d̂⟩`.
    pub qd_moment: f64,
    /// `−ωλ⟨q̂ d̂⟩`.
    pub e_int: f64,
    /// `−ωλ(⟨q̂ d̂⟩ − q d)`.
    pub e_xc: f64,
    /// `⟨ω a†a + (j_ext/ω) q̂⟩`.
    pub e_photon: f64,
    pub q_sq: f64,
    pub p_sq: f64,
    pub s_corr: f64,
    /// Natural occupations per spin-orbital, descending.
    pub rdm_eigs: Vec<f64>,
}

/// Entropy sign convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyConvention {
    /// Emit `+Σ n ln n` instead of the non-negative `−Σ n ln n`.
    pub paper_sign: bool,
}

/// `⟨v|op|v⟩` for a real operator.
pub fn expectation(op: &SparseOperator, v: &StateVector) -> Result<f64, ObservablesError> {
    Ok(op.expectation(v)?)
}

/// `⟨v|op|v⟩` for a complex Hermitian operator; fails if the result is not
/// real to within 1e-12.
pub fn expectation_complex(
    op: &ComplexOperator,
    v: &StateVector<Complex64>,
) -> Result<f64, ObservablesError> {
    let z = op.expectation(v)?;
    if z.im.abs() > 1e-12 * z.re.abs().max(1.0) {
        return Err(ObservablesError::NotReal(z.im));
    }
    Ok(z.re)
}

/// `⟨p̂⟩` evaluated from the ladder structure. Vanishes for real states.
pub fn momentum<T: Amplitude>(basis: &ProductBasis, v: &StateVector<T>) -> f64 {
    let nb = basis.photon().dim();
    let s = (basis.photon().omega() / 2.0).sqrt();
    let a = v.as_slice();
    let mut acc = 0.0;
    for f in 0..basis.fermion().dim() {
        for n in 1..nb {
            let z = a[basis.index(f, n - 1)].conj() * a[basis.index(f, n)];
            acc += (n as f64).sqrt() * z.im();
        }
    }
    2.0 * s * acc
}

/// `⟨p̂²⟩ = (ω/2)‖(a − a†)ψ‖²` in the truncated space. Invariant under the
/// coherent shift.
pub fn momentum_sq(basis: &ProductBasis, v: &StateVector) -> f64 {
    let nb = basis.photon().dim();
    let a = v.as_slice();
    let mut acc = 0.0;
    for block in a.chunks(nb) {
        for m in 0..nb {
            // ((a − a†)ψ)(m) = √(m+1) ψ(m+1) − √m ψ(m−1)
            let mut x = 0.0;
            if m + 1 < nb {
                x += ((m + 1) as f64).sqrt() * block[m + 1];
            }
            if m > 0 {
                x -= (m as f64).sqrt() * block[m - 1];
            }
            acc += x * x;
        }
    }
    0.5 * basis.photon().omega() * acc
}

/// `ω a†a + (j/ω) q` as a number, given lab-frame `N` and `q`.
pub fn photon_energy(omega: f64, j_ext: f64, n_photon: f64, q: f64) -> f64 {
    omega * n_photon + j_ext / omega * q
}

/// `(E_int, E_int_mf, E_xc)` from the raw moment and the internal pair.
pub fn interaction_energy(omega: f64, lambda: f64, qd_moment: f64, q: f64, d: f64) -> (f64, f64, f64) {
    let e_int = -omega * lambda * qd_moment;
    let e_int_mf = -omega * lambda * q * d;
    (e_int, e_int_mf, e_int - e_int_mf)
}

/// Spin-orbital one-body density matrix `ρ(a, b) = ⟨ĉ†_b ĉ_a⟩`, traced
/// over the photon factor of `basis`.
pub fn one_rdm(basis: &ProductBasis, v: &StateVector) -> Result<DMatrix<f64>, ObservablesError> {
    if v.len() != basis.total_dim() {
        return Err(HilbertError::ShapeMismatch {
            expected: basis.total_dim(),
            found: v.len(),
        }
        .into());
    }
    let sector = basis.fermion();
    let nf = sector.dim();
    let nb = basis.photon().dim();
    let a = v.as_slice();
    // reduced fermion density Γ(f', f) = Σ_n ψ(f', n) ψ(f, n)
    let mut gamma = DMatrix::<f64>::zeros(nf, nf);
    for f1 in 0..nf {
        let r1 = &a[f1 * nb..(f1 + 1) * nb];
        for f2 in f1..nf {
            let r2 = &a[f2 * nb..(f2 + 1) * nb];
            let g: f64 = r1.iter().zip(r2).map(|(x, y)| x * y).sum();
            gamma[(f1, f2)] = g;
            gamma[(f2, f1)] = g;
        }
    }
    Ok(rdm_from_gamma(sector, &gamma)?)
}

/// One-body density matrix of a pure fermion-sector state.
pub fn one_rdm_fermion(sector: &FermionSector, v: &StateVector) -> Result<DMatrix<f64>, ObservablesError> {
    if v.len() != sector.dim() {
        return Err(HilbertError::ShapeMismatch {
            expected: sector.dim(),
            found: v.len(),
        }
        .into());
    }
    let x = DMatrix::from_column_slice(sector.dim(), 1, v.as_slice());
    Ok(rdm_from_gamma(sector, &(&x * x.transpose()))?)
}

fn rdm_from_gamma(sector: &FermionSector, gamma: &DMatrix<f64>) -> Result<DMatrix<f64>, HilbertError> {
    let m = sector.n_modes();
    let mut rho = DMatrix::<f64>::zeros(m, m);
    for spin in Spin::BOTH {
        for i in 0..sector.n_sites() {
            let a = sector.mode(i, spin);
            for j in 0..sector.n_sites() {
                let b = sector.mode(j, spin);
                // ⟨ĉ†_b ĉ_a⟩ = Σ M(f', f) Γ(f', f)
                let op = sector.bilinear(b, a)?;
                rho[(a, b)] = op.iter().map(|(r, c, x)| x * gamma[(r, c)]).sum();
            }
        }
    }
    Ok(rho)
}

/// Eigenvalues of a symmetric density matrix, descending.
pub fn natural_occupations(rho: &DMatrix<f64>) -> Vec<f64> {
    let mut eigs: Vec<f64> = SymmetricEigen::new(rho.clone()).eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| b.total_cmp(a));
    eigs
}

/// Correlation entropy `−Σ n ln n` of spin-orbital occupations
/// (`+Σ n ln n` under the paper-sign convention), with `0 ln 0 = 0`.
pub fn correlation_entropy(occupations: &[f64], conv: EntropyConvention) -> Result<f64, ObservablesError> {
    let mut s = 0.0;
    for &n in occupations {
        if !(-1e-8..=1.0 + 1e-8).contains(&n) {
            return Err(ObservablesError::OccupationOutOfRange(n));
        }
        let n = if n.abs() < 1e-12 {
            0.0
        } else if (n - 1.0).abs() < 1e-12 {
            1.0
        } else {
            n.clamp(0.0, 1.0)
        };
        if n > 0.0 {
            s -= n * n.ln();
        }
    }
    Ok(if conv.paper_sign { -s } else { s })
}

/// `N − (ω⟨q²⟩/2 + ⟨p²⟩/(2ω) − 1/2)`; zero for a cutoff-converged state.
pub fn photon_number_defect(obs: &ObservableSet, omega: f64) -> f64 {
    obs.n_photon - (0.5 * omega * obs.q_sq + 0.5 * obs.p_sq / omega - 0.5)
}

/// Lab-frame observables at drive `j_ext` from those of the same `ṽ` at
/// zero drive. `H'` depends on `(v_ext, j_ext)` only through `ṽ` and the
/// constant `−j_ext²/(2ω⁴)`, so one solve serves a whole line of constant
/// `ṽ`; the same holds for mean-field solutions.
pub fn translate_drive(obs: &ObservableSet, omega: f64, lambda: f64, j_ext: f64) -> ObservableSet {
    let w = omega;
    let s = j_ext / w.powi(3);
    let q = obs.q - s;
    let n_photon = obs.n_photon - w * s * obs.q + 0.5 * w * s * s;
    let qd_moment = obs.qd_moment - s * obs.d;
    let (e_int, _, e_xc) = interaction_energy(w, lambda, qd_moment, q, obs.d);
    ObservableSet {
        q,
        n_photon,
        energy: obs.energy - j_ext * j_ext / (2.0 * w.powi(4)),
        qd_moment,
        e_int,
        e_xc,
        e_photon: photon_energy(w, j_ext, n_photon, q),
        q_sq: obs.q_sq - 2.0 * s * obs.q + s * s,
        ..obs.clone()
    }
}

/// Full observable set of `gs`, a ground state of the Hamiltonian assembled
/// from `ops` in `frame` at drive `j_ext`.
pub fn evaluate(
    ops: &ModelOperators,
    gs: &GroundState,
    frame: Frame,
    j_ext: f64,
    conv: EntropyConvention,
) -> Result<ObservableSet, ObservablesError> {
    let p = ops.params();
    let w = p.omega;
    let v = &gs.vector;
    let d = ops.dipole().expectation(v)?;
    let q_raw = ops.displacement().expectation(v)?;
    let n_raw = ops.number().expectation(v)?;
    let qd_raw = ops.qd().expectation(v)?;
    let q_sq_raw = ops.displacement_sq().expectation(v)?;
    let (q, n_photon, qd_moment, q_sq) = match frame {
        Frame::Direct => (q_raw, n_raw, qd_raw, q_sq_raw),
        Frame::Transformed => {
            let s = j_ext / w.powi(3);
            (
                q_raw - s,
                n_raw - w * s * q_raw + 0.5 * w * s * s,
                qd_raw - s * d,
                q_sq_raw - 2.0 * s * q_raw + s * s,
            )
        }
    };
    let p_sq = momentum_sq(ops.basis(), v);
    let (e_int, _, e_xc) = interaction_energy(w, p.lambda, qd_moment, q, d);
    let rdm_eigs = natural_occupations(&one_rdm(ops.basis(), v)?);
    let s_corr = correlation_entropy(&rdm_eigs, conv)?;
    Ok(ObservableSet {
        d,
        q,
        p: momentum(ops.basis(), v),
        n_photon,
        energy: gs.energy,
        qd_moment,
        e_int,
        e_xc,
        e_photon: photon_energy(w, j_ext, n_photon, q),
        q_sq,
        p_sq,
        s_corr,
        rdm_eigs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::solver::{ground_state, SolverOptions};

    #[test]
    fn entropy_limits() {
        let c = EntropyConvention::default();
        assert_eq!(correlation_entropy(&[1.0, 0.0, 0.0], c).unwrap(), 0.0);
        let s = correlation_entropy(&[0.5, 0.5], c).unwrap();
        assert!((s - 2.0f64.ln()).abs() < 1e-15);
        let paper = correlation_entropy(&[0.5, 0.5], EntropyConvention { paper_sign: true }).unwrap();
        assert_eq!(paper, -s);
        assert!(correlation_entropy(&[1.1], c).is_err());
    }

    #[test]
    fn bonding_orbital_rdm() {
        let p = ModelParams::two_site(1, 0).with_cutoff(3);
        let ops = ModelOperators::new(&p, 3).unwrap();
        let h = ops.assemble(0.0, 0.0, Frame::Direct).unwrap();
        let gs = ground_state(&h, &SolverOptions::default()).unwrap();
        let eigs = natural_occupations(&one_rdm(ops.basis(), &gs.vector).unwrap());
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!(eigs[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn transformed_frame_back_shift() {
        let p = ModelParams::two_site(1, 1).with_u0(1.0).with_lambda(0.4);
        let (v, j) = (0.3, 0.8);
        let ops = ModelOperators::new(&p, 40).unwrap();
        let opts = SolverOptions::default();
        let conv = EntropyConvention::default();
        let direct = {
            let gs = ground_state(&ops.assemble(v, j, Frame::Direct).unwrap(), &opts).unwrap();
            evaluate(&ops, &gs, Frame::Direct, j, conv).unwrap()
        };
        let shifted = {
            let gs = ground_state(&ops.assemble(v, j, Frame::Transformed).unwrap(), &opts).unwrap();
            evaluate(&ops, &gs, Frame::Transformed, j, conv).unwrap()
        };
        for (a, b) in [
            (direct.energy, shifted.energy),
            (direct.d, shifted.d),
            (direct.q, shifted.q),
            (direct.n_photon, shifted.n_photon),
            (direct.qd_moment, shifted.qd_moment),
            (direct.q_sq, shifted.q_sq),
            (direct.p_sq, shifted.p_sq),
            (direct.s_corr, shifted.s_corr),
        ] {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(photon_number_defect(&direct, p.omega).abs() < 1e-9);

        let v_tilde = p.clone().with_external(v, j).v_tilde();
        let gs = ground_state(&ops.assemble(v_tilde, 0.0, Frame::Transformed).unwrap(), &opts).unwrap();
        let base = evaluate(&ops, &gs, Frame::Transformed, 0.0, conv).unwrap();
        let moved = translate_drive(&base, p.omega, p.lambda, j);
        for (a, b) in [
            (direct.energy, moved.energy),
            (direct.q, moved.q),
            (direct.n_photon, moved.n_photon),
            (direct.e_int, moved.e_int),
            (direct.e_xc, moved.e_xc),
            (direct.e_photon, moved.e_photon),
        ] {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
