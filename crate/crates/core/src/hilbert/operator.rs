//! Compressed-row sparse operators over a finite basis.

use std::fmt::Debug;
use std::io::{self, Write};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::{HilbertError, StateVector};

/// Tolerance used when verifying that an operator equals its adjoint.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Scalar type of operator entries and state amplitudes.
pub trait Amplitude:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn conj(self) -> Self;
    fn from_real(x: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn modulus(self) -> f64;
}

impl Amplitude for f64 {
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Amplitude for Complex64 {
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Square sparse matrix in compressed-row form.
///
/// Rows are stored with strictly increasing column indices and no explicit
/// zeros. The `hermitian` flag is only ever set after an explicit check.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T = f64> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<T>,
    hermitian: bool,
}

pub type ComplexOperator = SparseOperator<Complex64>;

/// Accumulates `(row, col, value)` entries; duplicates are summed on build.
#[derive(Debug, Clone)]
pub struct TripletBuilder<T = f64> {
    dim: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Amplitude> TripletBuilder<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        Self {
            dim,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) -> Result<(), HilbertError> {
        if row >= self.dim || col >= self.dim {
            return Err(HilbertError::IndexOutOfRange {
                row,
                col,
                dim: self.dim,
            });
        }
        self.entries.push((row, col, value));
        Ok(())
    }

    /// Adds `scale * op` to the accumulated entries.
    pub fn add_operator(&mut self, op: &SparseOperator<T>, scale: T) -> Result<(), HilbertError> {
        if op.dim != self.dim {
            return Err(HilbertError::ShapeMismatch {
                expected: self.dim,
                found: op.dim,
            });
        }
        if scale == T::zero() {
            return Ok(());
        }
        self.entries.reserve(op.nnz());
        for (r, c, v) in op.iter() {
            self.entries.push((r, c, scale * v));
        }
        Ok(())
    }

    /// Adds `value` to every diagonal entry.
    pub fn add_identity(&mut self, value: T) {
        if value == T::zero() {
            return;
        }
        self.entries.extend((0..self.dim).map(|i| (i, i, value)));
    }

    pub fn build(mut self) -> SparseOperator<T> {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut values: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                let top = values.len() - 1;
                values[top] += v;
            } else {
                cols.push(c);
                values.push(v);
                rows_of.push(r);
                last = Some((r, c));
            }
        }
        // drop entries that summed to exact zero
        let mut k = 0;
        for i in 0..values.len() {
            if values[i] != T::zero() {
                cols[k] = cols[i];
                values[k] = values[i];
                rows_of[k] = rows_of[i];
                k += 1;
            }
        }
        cols.truncate(k);
        values.truncate(k);
        rows_of.truncate(k);
        for &r in &rows_of {
            row_ptr[r + 1] += 1;
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator {
            dim: self.dim,
            row_ptr,
            cols,
            values,
            hermitian: false,
        }
    }
}

impl<T: Amplitude> SparseOperator<T> {
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self, HilbertError>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut b = TripletBuilder::new(dim);
        for (r, c, v) in triplets {
            b.push(r, c, v)?;
        }
        Ok(b.build())
    }

    pub fn zeros(dim: usize) -> Self {
        TripletBuilder::new(dim).build()
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::diagonal(&vec![T::one(); dim]);
        op.hermitian = true;
        op
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut b = TripletBuilder::with_capacity(diag.len(), diag.len());
        b.entries
            .extend(diag.iter().enumerate().map(|(i, &v)| (i, i, v)));
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Iterates over stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.values[k]))
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        let span = &self.cols[self.row_ptr[row]..self.row_ptr[row + 1]];
        match span.binary_search(&col) {
            Ok(k) => self.values[self.row_ptr[row] + k],
            Err(_) => T::zero(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut b = TripletBuilder::with_capacity(self.dim, self.nnz());
        b.entries
            .extend(self.iter().map(|(r, c, v)| (c, r, v.conj())));
        let mut op = b.build();
        op.hermitian = self.hermitian;
        op
    }

    /// Largest elementwise deviation from the adjoint.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (r, c, v) in self.iter() {
            worst = worst.max((v - self.get(c, r).conj()).modulus());
        }
        worst
    }

    /// Verifies `A = A†` within [`HERMITIAN_TOL`] and sets the hermitian flag.
    pub fn into_hermitian(mut self) -> Result<Self, HilbertError> {
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(HilbertError::NotHermitian { defect });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut op = self.clone();
        for v in &mut op.values {
            *v = *v * s;
        }
        op.hermitian = self.hermitian && s.im() == 0.0;
        op
    }

    pub fn add(&self, other: &Self) -> Result<Self, HilbertError> {
        self.linear_combination(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, HilbertError> {
        self.linear_combination(T::one(), other, -T::one())
    }

    pub fn linear_combination(&self, a: T, other: &Self, b: T) -> Result<Self, HilbertError> {
        let mut builder = TripletBuilder::with_capacity(self.dim, self.nnz() + other.nnz());
        builder.add_operator(self, a)?;
        builder.add_operator(other, b)?;
        Ok(builder.build())
    }

    /// Sparse matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self, HilbertError> {
        if self.dim != other.dim {
            return Err(HilbertError::ShapeMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut b = TripletBuilder::new(self.dim);
        for (r, k, a) in self.iter() {
            for (c, v) in other.row(k) {
                b.entries.push((r, c, a * v));
            }
        }
        Ok(b.build())
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, HilbertError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    /// `y = A x` on raw slices.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, v: &StateVector<T>) -> Result<StateVector<T>, HilbertError> {
        if v.len() != self.dim {
            return Err(HilbertError::ShapeMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        let mut out = vec![T::zero(); self.dim];
        self.apply(v.as_slice(), &mut out);
        Ok(StateVector::from_vec(out))
    }

    /// `⟨v|A|v⟩` without normalization.
    pub fn expectation(&self, v: &StateVector<T>) -> Result<T, HilbertError> {
        let av = self.matvec(v)?;
        Ok(v.dot(&av))
    }

    /// Kronecker product `self ⊗ other` with flat index `i * other.dim + j`.
    pub fn kron(&self, other: &Self) -> Self {
        let dim = self.dim * other.dim;
        let mut b = TripletBuilder::with_capacity(dim, self.nnz() * other.nnz());
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in other.iter() {
                b.entries
                    .push((r1 * other.dim + r2, c1 * other.dim + c2, v1 * v2));
            }
        }
        let mut op = b.build();
        op.hermitian = self.hermitian && other.hermitian;
        op
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<T>
    where
        T: nalgebra::Scalar,
    {
        let mut m = nalgebra::DMatrix::from_element(self.dim, self.dim, T::zero());
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(m: &nalgebra::DMatrix<T>) -> Result<Self, HilbertError>
    where
        T: nalgebra::Scalar,
    {
        if m.nrows() != m.ncols() {
            return Err(HilbertError::ShapeMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let mut b = TripletBuilder::new(m.nrows());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != T::zero() {
                    b.entries.push((r, c, v));
                }
            }
        }
        Ok(b.build())
    }

    /// Writes one `row col value` line per stored entry (0-based, 17
    /// significant digits). Complex entries print `row col re im`.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        let complex = self.values.iter().any(|v| v.im() != 0.0);
        for (r, c, v) in self.iter() {
            if complex {
                writeln!(w, "{r} {c} {:.16e} {:.16e}", v.re(), v.im())?;
            } else {
                writeln!(w, "{r} {c} {:.16e}", v.re())?;
            }
        }
        Ok(())
    }
}

impl SparseOperator<f64> {
    pub fn to_complex(&self) -> ComplexOperator {
        SparseOperator {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            hermitian: self.hermitian,
        }
    }

    /// Largest diagonal magnitude plus largest off-diagonal row sum; an
    /// upper bound on the spectral radius (Gershgorin).
    pub fn gershgorin_radius(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_sums_duplicates_and_drops_zeros() {
        let op = SparseOperator::from_triplets(
            3,
            [(0, 1, 1.0), (0, 1, 2.0), (2, 2, 1.0), (2, 2, -1.0)],
        )
        .unwrap();
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), 3.0);
        assert_eq!(op.get(2, 2), 0.0);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        let err = SparseOperator::from_triplets(2, [(0, 2, 1.0)]).unwrap_err();
        assert!(matches!(err, HilbertError::IndexOutOfRange { .. }));
    }

    #[test]
    fn hermitian_check() {
        let sym = SparseOperator::from_triplets(2, [(0, 1, 1.5), (1, 0, 1.5)]).unwrap();
        assert!(sym.into_hermitian().unwrap().is_hermitian());
        let asym = SparseOperator::from_triplets(2, [(0, 1, 1.5)]).unwrap();
        assert!(matches!(
            asym.into_hermitian(),
            Err(HilbertError::NotHermitian { .. })
        ));
        let c = ComplexOperator::from_triplets(
            2,
            [(0, 1, Complex64::new(0.0, 1.0)), (1, 0, Complex64::new(0.0, -1.0))],
        )
        .unwrap();
        assert!(c.into_hermitian().is_ok());
    }

    #[test]
    fn identity_matvec() {
        let id = SparseOperator::<f64>::identity(4);
        let v = StateVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        assert_eq!(id.matvec(&v).unwrap(), v);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let id = SparseOperator::<f64>::identity(3);
        let v = StateVector::from_vec(vec![1.0, 0.0]);
        assert!(matches!(
            id.matvec(&v),
            Err(HilbertError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn kron_matches_dense() {
        let a = SparseOperator::from_triplets(2, [(0, 1, 2.0), (1, 0, 3.0)]).unwrap();
        let b = SparseOperator::from_triplets(3, [(0, 0, 1.0), (2, 1, -1.0)]).unwrap();
        let k = a.kron(&b).to_dense();
        let expected = a.to_dense().kronecker(&b.to_dense());
        assert_eq!(k, expected);
    }

    #[test]
    fn product_matches_dense() {
        let a = SparseOperator::from_triplets(3, [(0, 1, 2.0), (1, 2, 3.0), (2, 0, 1.0)]).unwrap();
        let b = SparseOperator::from_triplets(3, [(1, 1, 4.0), (2, 0, -1.0)]).unwrap();
        assert_eq!(a.mul(&b).unwrap().to_dense(), a.to_dense() * b.to_dense());
    }

    #[test]
    fn coordinate_dump_format() {
        let op = SparseOperator::from_triplets(2, [(0, 1, 0.1), (1, 0, 0.1)]).unwrap();
        let mut buf = Vec::new();
        op.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "0 1 1.0000000000000001e-1\n1 0 1.0000000000000001e-1\n"
        );
    }
}
