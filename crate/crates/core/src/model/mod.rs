//! Rabi–Hubbard Hamiltonians on two- and four-site chains.
//!
//! The full Hamiltonian is
//!
//! ```text
//! H = −t0 Σ_{i,σ} (c†_{iσ} c_{i+1σ} + h.c.) + U0 Σ_i n_{i↑} n_{i↓}
//!     + ω a†a − ωλ q d + (j_ext/ω) q + [(λ d)²/2] + v_ext d
//! ```
//!
//! and the coherent shift `exp(i j_ext p / ω³)` maps it onto
//!
//! ```text
//! H' = −t0 (…) + U0 (…) + ω a†a − ωλ q d + [(λ d)²/2] + ṽ d − j_ext²/(2ω⁴)
//! ```
//!
//! with `ṽ = v_ext + (λ/ω²) j_ext`. Both act on the same truncated product
//! basis; only `H'` keeps the photon cloud near the vacuum for large drives.

mod params;

pub use params::ModelParams;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{
    FermionSector, HilbertError, PhotonSpace, ProductBasis, SparseOperator, TripletBuilder,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unsupported lattice: {0} sites (only 2 and 4 are modelled)")]
    UnsupportedLattice(usize),
    #[error("invalid model parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Which of the two unitarily equivalent Hamiltonians to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// `H` with the explicit `(j_ext/ω) q` drive.
    Direct,
    /// `H'` with the drive absorbed into `ṽ` by the coherent shift.
    #[default]
    Transformed,
}

/// Mean-field internal variables `(d, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfState {
    pub d: f64,
    pub q: f64,
}

/// Form of the mean-field electronic Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfForm {
    /// Photon eliminated through `q = λd/ω − j_ext/ω³`:
    /// potential `v_ext − λ² d + (λ/ω²) j_ext`.
    Reduced,
    /// Explicit classical field: potential `v_ext − ωλ q`.
    Explicit,
}

/// Electronic operators on a fermion sector (no photon factor).
#[derive(Debug, Clone)]
pub struct ElectronicOperators {
    pub sector: FermionSector,
    /// `Σ_{i,σ} (c†_{iσ} c_{i+1σ} + h.c.)`, without `−t0`.
    pub hopping: SparseOperator,
    pub double_occupancy: SparseOperator,
    pub dipole: SparseOperator,
    pub dipole_sq: SparseOperator,
}

impl ElectronicOperators {
    pub fn new(p: &ModelParams) -> Result<Self, ModelError> {
        p.validate()?;
        let sector = FermionSector::new(p.n_sites, p.n_up, p.n_down)?;
        let hopping = sector.hopping()?;
        let double_occupancy = sector.double_occupancy();
        let dipole = sector.weighted_density(&p.dipole_weights())?;
        let dipole_sq = dipole.mul(&dipole)?.into_hermitian()?;
        Ok(Self {
            sector,
            hopping,
            double_occupancy,
            dipole,
            dipole_sq,
        })
    }

    /// `−t0 hop + U0 Σ n↑n↓ + v d [+ λ²d²/2]`.
    pub fn hamiltonian(
        &self,
        p: &ModelParams,
        potential: f64,
        self_energy: bool,
    ) -> Result<SparseOperator, ModelError> {
        let mut b = TripletBuilder::new(self.sector.dim());
        b.add_operator(&self.hopping, -p.t0)?;
        b.add_operator(&self.double_occupancy, p.u0)?;
        b.add_operator(&self.dipole, potential)?;
        if self_energy {
            b.add_operator(&self.dipole_sq, 0.5 * p.lambda * p.lambda)?;
        }
        Ok(b.build().into_hermitian()?)
    }
}

/// All product-space operators needed to assemble `H` or `H'` at a fixed
/// photon cutoff. Build once per cutoff, then [`ModelOperators::assemble`]
/// for any external pair.
#[derive(Debug, Clone)]
pub struct ModelOperators {
    params: ModelParams,
    basis: ProductBasis,
    electronic: ElectronicOperators,
    hopping: SparseOperator,
    double_occupancy: SparseOperator,
    dipole: SparseOperator,
    dipole_sq: SparseOperator,
    number: SparseOperator,
    q: SparseOperator,
    q_sq: SparseOperator,
    qd: SparseOperator,
}

impl ModelOperators {
    /// Operators for the model in `p` truncated at `cutoff` photons.
    /// `v_ext` and `j_ext` of `p` are ignored here.
    pub fn new(p: &ModelParams, cutoff: usize) -> Result<Self, ModelError> {
        let electronic = ElectronicOperators::new(p)?;
        let photon = PhotonSpace::new(cutoff, p.omega)?;
        let basis = ProductBasis::new(electronic.sector.clone(), photon);
        let q_photon = photon.displacement();
        let hopping = basis.embed_fermion(&electronic.hopping)?;
        let double_occupancy = basis.embed_fermion(&electronic.double_occupancy)?;
        let dipole = basis.embed_fermion(&electronic.dipole)?;
        let dipole_sq = basis.embed_fermion(&electronic.dipole_sq)?;
        let number = basis.embed_photon(&photon.number())?;
        let q = basis.embed_photon(&q_photon)?;
        let q_sq = basis.embed_photon(&q_photon.mul(&q_photon)?)?;
        let qd = basis.tensor_embed(&electronic.dipole, &q_photon)?;
        Ok(Self {
            params: p.clone(),
            basis,
            electronic,
            hopping,
            double_occupancy,
            dipole,
            dipole_sq,
            number,
            q,
            q_sq,
            qd,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &ProductBasis {
        &self.basis
    }

    pub fn cutoff(&self) -> usize {
        self.basis.photon().cutoff()
    }

    pub fn electronic(&self) -> &ElectronicOperators {
        &self.electronic
    }

    pub fn dipole(&self) -> &SparseOperator {
        &self.dipole
    }

    pub fn dipole_sq(&self) -> &SparseOperator {
        &self.dipole_sq
    }

    pub fn number(&self) -> &SparseOperator {
        &self.number
    }

    pub fn displacement(&self) -> &SparseOperator {
        &self.q
    }

    pub fn displacement_sq(&self) -> &SparseOperator {
        &self.q_sq
    }

    pub fn qd(&self) -> &SparseOperator {
        &self.qd
    }

    pub fn double_occupancy(&self) -> &SparseOperator {
        &self.double_occupancy
    }

    pub fn hopping(&self) -> &SparseOperator {
        &self.hopping
    }

    /// Assembles `H` (direct frame) or `H'` (transformed frame) at the
    /// external pair `(v_ext, j_ext)`.
    pub fn assemble(&self, v_ext: f64, j_ext: f64, frame: Frame) -> Result<SparseOperator, ModelError> {
        let p = &self.params;
        let w = p.omega;
        let mut b = TripletBuilder::with_capacity(
            self.basis.total_dim(),
            self.hopping.nnz() + self.qd.nnz() + 4 * self.basis.total_dim(),
        );
        b.add_operator(&self.hopping, -p.t0)?;
        b.add_operator(&self.double_occupancy, p.u0)?;
        b.add_operator(&self.number, w)?;
        b.add_operator(&self.qd, -w * p.lambda)?;
        if p.self_energy() {
            b.add_operator(&self.dipole_sq, 0.5 * p.lambda * p.lambda)?;
        }
        match frame {
            Frame::Direct => {
                b.add_operator(&self.q, j_ext / w)?;
                b.add_operator(&self.dipole, v_ext)?;
            }
            Frame::Transformed => {
                b.add_operator(&self.dipole, v_ext + p.lambda / (w * w) * j_ext)?;
                b.add_identity(-j_ext * j_ext / (2.0 * w.powi(4)));
            }
        }
        Ok(b.build().into_hermitian()?)
    }
}

/// Full Hamiltonian `H` of `p` at cutoff `p.fock_cutoff`.
pub fn build_hamiltonian(p: &ModelParams) -> Result<SparseOperator, ModelError> {
    ModelOperators::new(p, p.fock_cutoff)?.assemble(p.v_ext, p.j_ext, Frame::Direct)
}

/// Coherent-shift transformed Hamiltonian `H'` of `p` at cutoff `p.fock_cutoff`.
pub fn build_transformed(p: &ModelParams) -> Result<SparseOperator, ModelError> {
    ModelOperators::new(p, p.fock_cutoff)?.assemble(p.v_ext, p.j_ext, Frame::Transformed)
}

/// Kohn–Sham pair: electronic `−t0 hop + U0 Σ n↑n↓ + v_s d` on the fermion
/// sector and photonic `ω a†a + (j_s/ω) q` on the photon space.
pub fn build_ks_pair(
    p: &ModelParams,
    v_s: f64,
    j_s: f64,
) -> Result<(SparseOperator, SparseOperator), ModelError> {
    if p.n_sites != 2 {
        return Err(ModelError::UnsupportedLattice(p.n_sites));
    }
    let el = ElectronicOperators::new(p)?.hamiltonian(p, v_s, false)?;
    let photon = PhotonSpace::new(p.fock_cutoff, p.omega)?;
    let ph = photon
        .number()
        .linear_combination(p.omega, &photon.displacement(), j_s / p.omega)?
        .into_hermitian()?;
    Ok((el, ph))
}

/// Kohn–Sham photon drive reproducing the interacting displacement:
/// `j_s = j_ext − ω² λ d`.
pub fn ks_photon_drive(p: &ModelParams, d: f64) -> f64 {
    p.j_ext - p.omega * p.omega * p.lambda * d
}

/// Effective potential on `d̂` in the mean-field electronic Hamiltonian.
pub fn mf_potential(p: &ModelParams, mf: MfState, form: MfForm) -> f64 {
    match form {
        MfForm::Reduced => {
            p.v_ext - p.lambda * p.lambda * mf.d + p.lambda / (p.omega * p.omega) * p.j_ext
        }
        MfForm::Explicit => p.v_ext - p.omega * p.lambda * mf.q,
    }
}

/// Mean-field electronic Hamiltonian on the fermion sector. The dipole
/// self-energy, when enabled, enters as the electronic operator `(λd̂)²/2`.
pub fn build_mf_electronic(
    p: &ModelParams,
    mf: MfState,
    form: MfForm,
) -> Result<SparseOperator, ModelError> {
    ElectronicOperators::new(p)?.hamiltonian(p, mf_potential(p, mf, form), p.self_energy())
}
