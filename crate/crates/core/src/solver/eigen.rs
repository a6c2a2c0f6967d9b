//! Lowest eigenpair of a real symmetric sparse operator.
//!
//! Small problems go through a dense symmetric eigensolver; above
//! `dense_threshold` a Lanczos iteration with full reorthogonalization is
//! used. Both paths are deterministic.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tridiagonal;
use super::{SolverError, SolverOptions};
use crate::hilbert::{SparseOperator, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

/// Lowest eigenpair with convergence metadata.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: StateVector,
    /// `‖H v − E v‖`.
    pub residual: f64,
    /// `E1 − E0`. On the Lanczos path this is the Ritz estimate, which
    /// can only overestimate the true gap.
    pub gap: f64,
    /// Photon cutoff of the basis the operator lives in, when known.
    pub cutoff_used: Option<usize>,
    pub degenerate: bool,
    pub method: Method,
    pub iterations: usize,
}

/// Deterministic, non-symmetric start vector: all ones plus a fixed
/// pseudo-random ripple so no symmetry sector is missed.
pub fn default_start(dim: usize) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f1a_4c20);
    let mut v: Vec<f64> = (0..dim).map(|_| 1.0 + 0.5 * (rng.random::<f64>() - 0.5)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    StateVector::from_vec(v)
}

/// Lowest eigenpair of `op`, dispatching on dimension.
pub fn ground_state(op: &SparseOperator, opts: &SolverOptions) -> Result<GroundState, SolverError> {
    ground_state_from(op, opts, None)
}

/// As [`ground_state`], seeding Lanczos with `start` when given.
pub fn ground_state_from(
    op: &SparseOperator,
    opts: &SolverOptions,
    start: Option<&StateVector>,
) -> Result<GroundState, SolverError> {
    if !op.is_hermitian() {
        return Err(SolverError::NotHermitian);
    }
    if op.dim() == 0 {
        return Err(SolverError::EmptyOperator);
    }
    if op.dim() <= opts.dense_threshold {
        dense_ground_state(op, opts)
    } else {
        lanczos_ground_state(op, opts, start)
    }
}

fn residual(op: &SparseOperator, v: &[f64], e: f64) -> f64 {
    let mut hv = vec![0.0; v.len()];
    op.apply(v, &mut hv);
    hv.iter()
        .zip(v)
        .map(|(h, x)| (h - e * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Fixes the overall sign so the largest-magnitude component is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn dense_ground_state(op: &SparseOperator, opts: &SolverOptions) -> Result<GroundState, SolverError> {
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let i0 = order[0];
    let energy = eig.eigenvalues[i0];
    let gap = order
        .get(1)
        .map(|&i1| eig.eigenvalues[i1] - energy)
        .unwrap_or(f64::INFINITY);
    let mut v: Vec<f64> = eig.eigenvectors.column(i0).iter().copied().collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    fix_sign(&mut v);
    let res = residual(op, &v, energy);
    Ok(GroundState {
        energy,
        vector: StateVector::from_vec(v),
        residual: res,
        gap,
        cutoff_used: None,
        degenerate: gap < opts.degeneracy_tol,
        method: Method::Dense,
        iterations: 0,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

pub fn lanczos_ground_state(
    op: &SparseOperator,
    opts: &SolverOptions,
    start: Option<&StateVector>,
) -> Result<GroundState, SolverError> {
    let n = op.dim();
    let tol = opts.lanczos_tol;
    let scale = op.gershgorin_radius().max(1.0);
    let breakdown = scale * 1e-13;

    let mut v0 = match start {
        Some(s) if s.len() == n => s.as_slice().to_vec(),
        _ => default_start(n).into_vec(),
    };
    let norm = dot(&v0, &v0).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        v0 = default_start(n).into_vec();
    } else {
        v0.iter_mut().for_each(|x| *x /= norm);
    }

    let max_iter = opts.lanczos_max_iter.max(2).min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter.min(512));
    basis.push(v0);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(0xb4e4_d0e1);
    let mut best = (f64::INFINITY, 0.0);
    let mut next_true_check = 0usize;

    loop {
        let k = basis.len() - 1;
        op.apply(&basis[k], &mut w);
        let a = dot(&basis[k], &w);
        axpy(-a, &basis[k], &mut w);
        if k > 0 {
            axpy(-beta[k - 1], &basis[k - 1], &mut w);
        }
        orthogonalize(&basis, &mut w);
        let b = dot(&w, &w).sqrt();
        alpha.push(a);

        let theta = tridiagonal::eigenvalue(&alpha, &beta, 0);
        let s = tridiagonal::eigenvector(&alpha, &beta, theta);
        let estimate = b * s[k].abs();
        let exhausted = basis.len() == n;
        let stalled = b <= breakdown;

        if (estimate < tol && k >= next_true_check && !stalled) || exhausted || basis.len() >= max_iter {
            let mut x = vec![0.0; n];
            for (c, v) in s.iter().zip(&basis) {
                axpy(*c, v, &mut x);
            }
            let xn = dot(&x, &x).sqrt();
            x.iter_mut().for_each(|v| *v /= xn);
            let r = residual(op, &x, theta);
            if r < best.0 {
                best = (r, theta);
            }
            if r < tol || exhausted {
                fix_sign(&mut x);
                let gap = if alpha.len() > 1 {
                    tridiagonal::eigenvalue(&alpha, &beta, 1) - theta
                } else {
                    f64::INFINITY
                };
                if r >= tol {
                    return Err(SolverError::NotConverged {
                        iterations: basis.len(),
                        residual: r,
                    });
                }
                return Ok(GroundState {
                    energy: theta,
                    vector: StateVector::from_vec(x),
                    residual: r,
                    gap,
                    cutoff_used: None,
                    degenerate: gap < opts.degeneracy_tol,
                    method: Method::Lanczos,
                    iterations: basis.len(),
                });
            }
            if basis.len() >= max_iter {
                return Err(SolverError::NotConverged {
                    iterations: basis.len(),
                    residual: best.0,
                });
            }
            next_true_check = k + 5;
        }

        if stalled {
            // invariant subspace: continue with a fresh orthogonal direction
            let mut fresh: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            orthogonalize(&basis, &mut fresh);
            let fnorm = dot(&fresh, &fresh).sqrt();
            fresh.iter_mut().for_each(|x| *x /= fnorm);
            beta.push(0.0);
            basis.push(fresh);
        } else {
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(std::mem::replace(&mut w, vec![0.0; n]));
        }
    }
}
