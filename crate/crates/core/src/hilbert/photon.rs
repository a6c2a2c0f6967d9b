//! Truncated single-mode Fock space.

use num_complex::Complex64;

use super::{ComplexOperator, HilbertError, SparseOperator, TripletBuilder};

/// Fock states `|0⟩ … |cutoff⟩` of one photon mode with frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonSpace {
    cutoff: usize,
    omega: f64,
}

/// Ladder and quadrature operators of a [`PhotonSpace`].
///
/// `q = (a + a†)/√(2ω)` and `p = −i √(ω/2) (a − a†)`.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: SparseOperator,
    pub a_dagger: SparseOperator,
    pub q: SparseOperator,
    pub p: ComplexOperator,
}

impl PhotonSpace {
    pub fn new(cutoff: usize, omega: f64) -> Result<Self, HilbertError> {
        if cutoff < 1 {
            return Err(HilbertError::InvalidCutoff(cutoff));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(HilbertError::InvalidFrequency(omega));
        }
        Ok(Self { cutoff, omega })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn annihilation(&self) -> SparseOperator {
        let mut b = TripletBuilder::with_capacity(self.dim(), self.cutoff);
        for n in 1..=self.cutoff {
            b.push(n - 1, n, (n as f64).sqrt()).expect("in range");
        }
        b.build()
    }

    pub fn number(&self) -> SparseOperator {
        let diag: Vec<f64> = (0..self.dim()).map(|n| n as f64).collect();
        SparseOperator::diagonal(&diag)
            .into_hermitian()
            .expect("diagonal")
    }

    pub fn displacement(&self) -> SparseOperator {
        let a = self.annihilation();
        a.add(&a.adjoint())
            .expect("same dim")
            .scale(1.0 / (2.0 * self.omega).sqrt())
            .into_hermitian()
            .expect("symmetric")
    }

    pub fn ladder(&self) -> Ladder {
        let a = self.annihilation();
        let a_dagger = a.adjoint();
        let q = self.displacement();
        let s = (self.omega / 2.0).sqrt();
        let p = a
            .sub(&a_dagger)
            .expect("same dim")
            .to_complex()
            .scale(Complex64::new(0.0, -s))
            .into_hermitian()
            .expect("i times antisymmetric real is hermitian");
        Ladder {
            a,
            a_dagger,
            q,
            p,
        }
    }
}
