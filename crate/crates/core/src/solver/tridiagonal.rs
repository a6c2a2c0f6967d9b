//! Eigenpairs of small symmetric tridiagonal matrices (the Lanczos
//! projection) by Sturm bisection and inverse iteration.

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based), bisected to machine precision.
pub fn eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    assert!(k < diag.len());
    let (mut lo, mut hi) = gershgorin(diag, off);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    lo -= scale * 1e-14;
    hi += scale * 1e-14;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − shift) x = rhs` by LU with partial pivoting.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = diag.len();
    if n == 1 {
        let p = diag[0] - shift;
        rhs[0] /= if p == 0.0 { f64::EPSILON } else { p };
        return;
    }
    // rows of U: (u0, u1, u2) for columns i, i+1, i+2
    let mut u = vec![[0.0f64; 3]; n];
    let tiny = f64::EPSILON * gershgorin(diag, off).1.abs().max(shift.abs()).max(1e-300);
    let mut cur = [diag[0] - shift, off[0], 0.0];
    for i in 0..n - 1 {
        let below = [off[i], diag[i + 1] - shift, if i + 2 < n { off[i + 1] } else { 0.0 }];
        let (mut top, mut bot) = (cur, below);
        if below[0].abs() > cur[0].abs() {
            std::mem::swap(&mut top, &mut bot);
            rhs.swap(i, i + 1);
        }
        if top[0] == 0.0 {
            top[0] = tiny;
        }
        let m = bot[0] / top[0];
        rhs[i + 1] -= m * rhs[i];
        u[i] = top;
        cur = [bot[1] - m * top[1], bot[2] - m * top[2], 0.0];
    }
    if cur[0] == 0.0 {
        cur[0] = tiny;
    }
    u[n - 1] = cur;
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u[i][1] * rhs[i + 1];
        }
        if i + 2 < n {
            s -= u[i][2] * rhs[i + 2];
        }
        rhs[i] = s / u[i][0];
    }
}

/// Normalized eigenvector for the eigenvalue `lambda` by inverse iteration.
pub fn eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 * 0.05).collect();
    for _ in 0..4 {
        shifted_solve(diag, off, lambda, &mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            x = vec![1.0; n];
            continue;
        }
        for v in &mut x {
            *v /= norm;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i];
            }
        }
        m
    }

    #[test]
    fn matches_dense_eigen() {
        let diag: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let off: Vec<f64> = (0..39).map(|i| 0.3 + ((i * 17) % 7) as f64 * 0.2).collect();
        let mut evs: Vec<f64> = dense(&diag, &off).symmetric_eigenvalues().iter().copied().collect();
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in [0, 1, 5, 39] {
            let e = eigenvalue(&diag, &off, k);
            assert!((e - evs[k]).abs() < 1e-12, "k={k}: {e} vs {}", evs[k]);
            let v = eigenvector(&diag, &off, e);
            let r = dense(&diag, &off) * nalgebra::DVector::from_vec(v.clone())
                - nalgebra::DVector::from_vec(v) * e;
            assert!(r.norm() < 1e-10, "residual {}", r.norm());
        }
    }

    #[test]
    fn split_matrix_with_zero_coupling() {
        let diag = vec![2.0, 1.0, -1.0, 3.0];
        let off = vec![0.5, 0.0, 0.2];
        let e = eigenvalue(&diag, &off, 0);
        let v = eigenvector(&diag, &off, e);
        let r = dense(&diag, &off) * nalgebra::DVector::from_vec(v.clone())
            - nalgebra::DVector::from_vec(v) * e;
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn single_element() {
        assert_eq!(eigenvalue(&[4.0], &[], 0), 4.0);
        assert_eq!(eigenvector(&[4.0], &[], 4.0).len(), 1);
    }
}
