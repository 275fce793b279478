//! Lowest eigenpair of a real symmetric tridiagonal matrix.
//!
//! The eigenvalue is bracketed by Sturm-sequence bisection and the vector is
//! obtained by inverse iteration with a shift at (or just below) the bracketed
//! eigenvalue, where `T - shift` is positive semidefinite and an unpivoted
//! `LDL^T` factorization is stable.

/// Gershgorin interval `[lo, hi]` containing the whole spectrum.
pub fn gershgorin(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += offdiag[i - 1].abs();
        }
        if i + 1 < n {
            r += offdiag[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// Number of eigenvalues strictly below `lambda`.
pub fn sturm_count(diag: &[f64], offdiag: &[f64], lambda: f64) -> usize {
    let guard = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let q_safe = if q.abs() < guard { guard.copysign(q) } else { q };
        q = (diag[i] - lambda) - offdiag[i - 1] * offdiag[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue, returned as a bracket `(lo, hi)` of width at most a
/// few ulps of the spectral scale.
pub fn lowest_eigenvalue_bracket(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let (mut lo, mut hi) = gershgorin(diag, offdiag);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    // Invariant: count(lo) == 0, count(hi) >= 1.
    hi += f64::EPSILON * scale;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
            break;
        }
        if sturm_count(diag, offdiag, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Solve `(T - shift) x = rhs` in place by unpivoted `LDL^T`.
fn shifted_solve(diag: &[f64], offdiag: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = diag.len();
    let tiny = f64::EPSILON * gershgorin(diag, offdiag).1.abs().max(1.0) * 1e-3;
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    d[0] = diag[0] - shift;
    if d[0].abs() < tiny {
        d[0] = tiny.copysign(d[0]);
    }
    for i in 1..n {
        l[i - 1] = offdiag[i - 1] / d[i - 1];
        d[i] = diag[i] - shift - l[i - 1] * offdiag[i - 1];
        if d[i].abs() < tiny {
            d[i] = if d[i] == 0.0 { tiny } else { tiny.copysign(d[i]) };
        }
    }
    for i in 1..n {
        rhs[i] -= l[i - 1] * rhs[i - 1];
    }
    for i in 0..n {
        rhs[i] /= d[i];
    }
    for i in (0..n.saturating_sub(1)).rev() {
        rhs[i] -= l[i] * rhs[i + 1];
    }
}

fn matvec(diag: &[f64], offdiag: &[f64], x: &[f64], y: &mut [f64]) {
    let n = diag.len();
    for i in 0..n {
        let mut acc = diag[i] * x[i];
        if i > 0 {
            acc += offdiag[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc += offdiag[i] * x[i + 1];
        }
        y[i] = acc;
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Residual `||T x - lambda x||` for a unit vector `x`.
pub fn residual(diag: &[f64], offdiag: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    matvec(diag, offdiag, x, &mut y);
    y.iter()
        .zip(x)
        .map(|(yi, xi)| (yi - lambda * xi).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Lowest eigenvalue and unit eigenvector. The sign is fixed so that the
/// largest-magnitude component is positive.
pub fn lowest_eigenpair(diag: &[f64], offdiag: &[f64]) -> (f64, Vec<f64>) {
    let n = diag.len();
    assert!(n >= 1 && offdiag.len() + 1 == n, "malformed tridiagonal matrix");
    if n == 1 {
        return (diag[0], vec![1.0]);
    }
    let (lo, hi) = lowest_eigenvalue_bracket(diag, offdiag);
    let (glo, ghi) = gershgorin(diag, offdiag);
    let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);

    // Uniform start has overlap with the nodeless ground state of a matrix
    // with nonpositive couplings; a mild ramp covers the general case.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * i as f64 / n as f64).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut best = (f64::INFINITY, 0.5 * (lo + hi), x.clone());
    for _ in 0..8 {
        shifted_solve(diag, offdiag, lo, &mut x);
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut tx = vec![0.0; n];
        matvec(diag, offdiag, &x, &mut tx);
        let rayleigh: f64 = tx.iter().zip(&x).map(|(a, b)| a * b).sum();
        let res = residual(diag, offdiag, rayleigh, &x);
        if res < best.0 {
            best = (res, rayleigh, x.clone());
        }
        if res <= 1e-14 * scale {
            break;
        }
    }
    let (_, energy, mut vec) = best;
    let pivot = vec
        .iter()
        .copied()
        .fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if pivot < 0.0 {
        vec.iter_mut().for_each(|v| *v = -*v);
    }
    (energy, vec)
}
