use num_complex::Complex64;

use super::Amplitude;

/// Amplitudes of a state in a flat product-basis ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T = f64> {
    amplitudes: Vec<T>,
}

impl<T: Amplitude> StateVector<T> {
    pub fn from_vec(amplitudes: Vec<T>) -> Self {
        Self { amplitudes }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            amplitudes: vec![T::zero(); dim],
        }
    }

    /// Unit vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amplitudes[index] = T::one();
        v
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.amplitudes
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.amplitudes
    }

    pub fn into_vec(self) -> Vec<T> {
        self.amplitudes
    }

    /// `⟨self|other⟩`, conjugating the left argument.
    pub fn dot(&self, other: &Self) -> T {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| {
                let m = a.modulus();
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Scales to unit 2-norm. A zero vector is left unchanged.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = T::from_real(1.0 / n);
            for a in &mut self.amplitudes {
                *a = *a * inv;
            }
        }
        n
    }
}

impl StateVector<f64> {
    pub fn to_complex(&self) -> StateVector<Complex64> {
        StateVector::from_vec(
            self.amplitudes
                .iter()
                .map(|&a| Complex64::new(a, 0.0))
                .collect(),
        )
    }
}
