//! Occupation-number bases and sparse operators on the electron ⊗ photon
//! product space.

mod fermion;
mod operator;
mod photon;
mod state;

pub use fermion::{FermionSector, Spin};
pub use operator::{
    Amplitude, ComplexOperator, SparseOperator, TripletBuilder, HERMITIAN_TOL,
};
pub use photon::{Ladder, PhotonSpace};
pub use state::StateVector;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("invalid fermion sector: {n_up} up and {n_down} down electrons on {n_sites} sites")]
    InvalidSector {
        n_sites: usize,
        n_up: usize,
        n_down: usize,
    },
    #[error("spin-orbital {mode} out of range (sector has {n_modes} modes)")]
    InvalidMode { mode: usize, n_modes: usize },
    #[error("photon cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),
    #[error("photon frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("entry ({row}, {col}) outside a {dim}-dimensional operator")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (max |A - A†| = {defect:e})")]
    NotHermitian { defect: f64 },
}

/// Electron sector ⊗ truncated photon space, with flat index
/// `fermion_index * (cutoff + 1) + photon_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductBasis {
    fermion: FermionSector,
    photon: PhotonSpace,
}

impl ProductBasis {
    pub fn new(fermion: FermionSector, photon: PhotonSpace) -> Self {
        Self { fermion, photon }
    }

    pub fn fermion(&self) -> &FermionSector {
        &self.fermion
    }

    pub fn photon(&self) -> &PhotonSpace {
        &self.photon
    }

    pub fn total_dim(&self) -> usize {
        self.fermion.dim() * self.photon.dim()
    }

    pub fn index(&self, fermion_state: usize, photon_state: usize) -> usize {
        fermion_state * self.photon.dim() + photon_state
    }

    /// Inverse of [`ProductBasis::index`].
    pub fn split(&self, flat: usize) -> (usize, usize) {
        (flat / self.photon.dim(), flat % self.photon.dim())
    }

    /// `fermion_op ⊗ photon_op` in the flat-index convention.
    pub fn tensor_embed<T: Amplitude>(
        &self,
        fermion_op: &SparseOperator<T>,
        photon_op: &SparseOperator<T>,
    ) -> Result<SparseOperator<T>, HilbertError> {
        if fermion_op.dim() != self.fermion.dim() {
            return Err(HilbertError::ShapeMismatch {
                expected: self.fermion.dim(),
                found: fermion_op.dim(),
            });
        }
        if photon_op.dim() != self.photon.dim() {
            return Err(HilbertError::ShapeMismatch {
                expected: self.photon.dim(),
                found: photon_op.dim(),
            });
        }
        Ok(fermion_op.kron(photon_op))
    }

    pub fn embed_fermion<T: Amplitude>(
        &self,
        op: &SparseOperator<T>,
    ) -> Result<SparseOperator<T>, HilbertError> {
        self.tensor_embed(op, &SparseOperator::identity(self.photon.dim()))
    }

    pub fn embed_photon<T: Amplitude>(
        &self,
        op: &SparseOperator<T>,
    ) -> Result<SparseOperator<T>, HilbertError> {
        self.tensor_embed(&SparseOperator::identity(self.fermion.dim()), op)
    }

    /// Product state `|f⟩ ⊗ |n⟩` from factor amplitudes.
    pub fn product_state<T: Amplitude>(
        &self,
        fermion: &StateVector<T>,
        photon: &StateVector<T>,
    ) -> StateVector<T> {
        let mut out = Vec::with_capacity(self.total_dim());
        for &f in fermion.as_slice() {
            for &p in photon.as_slice() {
                out.push(f * p);
            }
        }
        StateVector::from_vec(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n_up: usize, n_down: usize, cutoff: usize) -> ProductBasis {
        ProductBasis::new(
            FermionSector::new(2, n_up, n_down).unwrap(),
            PhotonSpace::new(cutoff, 1.0).unwrap(),
        )
    }

    #[test]
    fn flat_index_convention() {
        let b = basis(1, 1, 3);
        assert_eq!(b.total_dim(), 16);
        assert_eq!(b.index(2, 3), 11);
        assert_eq!(b.split(11), (2, 3));
    }

    #[test]
    fn identity_embedding() {
        let b = basis(1, 0, 4);
        let id = b
            .tensor_embed(&SparseOperator::<f64>::identity(2), &SparseOperator::identity(5))
            .unwrap();
        assert_eq!(id, SparseOperator::identity(10));
    }

    #[test]
    fn disjoint_factors_commute() {
        let b = basis(1, 1, 3);
        let d = b.fermion().weighted_density(&[1.0, -1.0]).unwrap();
        let q = b.photon().displacement();
        let dd = b.embed_fermion(&d).unwrap();
        let qq = b.embed_photon(&q).unwrap();
        let comm = dd.commutator(&qq).unwrap();
        assert!(comm.max_abs() < 1e-14);
    }

    #[test]
    fn embedded_action_on_product_state() {
        // dense oracle: (d ⊗ q)(f ⊗ n) = (d f) ⊗ (q n), dim 4 * 4 = 16
        let b = basis(1, 1, 3);
        let d = b.fermion().weighted_density(&[1.0, -1.0]).unwrap();
        let q = b.photon().displacement();
        let dq = b.tensor_embed(&d, &q).unwrap();
        let f = StateVector::from_vec(vec![0.3, -0.1, 0.7, 0.2]);
        let n = StateVector::from_vec(vec![0.5, 0.1, -0.4, 0.9]);
        let lhs = dq.matvec(&b.product_state(&f, &n)).unwrap();
        let rhs = b.product_state(&d.matvec(&f).unwrap(), &q.matvec(&n).unwrap());
        let dense = dq.to_dense() * nalgebra::DVector::from_column_slice(b.product_state(&f, &n).as_slice());
        for i in 0..16 {
            assert!((lhs.as_slice()[i] - rhs.as_slice()[i]).abs() < 1e-15);
            assert!((lhs.as_slice()[i] - dense[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn embed_shape_error() {
        let b = basis(1, 0, 2);
        let wrong = SparseOperator::<f64>::identity(5);
        assert!(matches!(
            b.embed_fermion(&wrong),
            Err(HilbertError::ShapeMismatch { .. })
        ));
    }
}
