//! Small dense Hermitian kernels for the Monte Carlo oracle. Matrices are
//! row-major `m x m` slices of [`Complex64`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `ln det A` of a Hermitian positive-definite matrix from its Cholesky
/// factor `A = L L'`, or `None` if a pivot is not positive.
pub fn logdet_cholesky(a: &[Complex64], m: usize) -> Option<f64> {
    debug_assert_eq!(a.len(), m * m);
    let mut l = vec![Complex64::new(0.0, 0.0); m * m];
    let mut logdet = 0.0;
    for j in 0..m {
        let mut d = a[j * m + j].re;
        for k in 0..j {
            d -= l[j * m + k].norm_sqr();
        }
        if !(d > 0.0 && d.is_finite()) {
            return None;
        }
        let djj = d.sqrt();
        l[j * m + j] = Complex64::new(djj, 0.0);
        logdet += 2.0 * djj.ln();
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k].conj();
            }
            l[i * m + j] = s / djj;
        }
    }
    Some(logdet)
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The `m x m` Hermitian `A = X + iY` is embedded as the real symmetric
/// `[[X, -Y], [Y, X]]`, whose spectrum is that of `A` with every eigenvalue
/// doubled; cyclic Jacobi rotations diagonalize it.
pub fn hermitian_eigenvalues(a: &[Complex64], m: usize) -> Vec<f64> {
    let n = 2 * m;
    let mut s = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..m {
            let z = a[i * m + j];
            s[i * n + j] = z.re;
            s[(i + m) * n + (j + m)] = z.re;
            s[i * n + (j + m)] = -z.im;
            s[(i + m) * n + j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i * n + j] * s[i * n + j])
            .sum();
        let diag: f64 = (0..n).map(|i| s[i * n + i] * s[i * n + i]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = s[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[q * n + q] - s[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (skp, skq) = (s[k * n + p], s[k * n + q]);
                    s[k * n + p] = c * skp - sn * skq;
                    s[k * n + q] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let (spk, sqk) = (s[p * n + k], s[q * n + k]);
                    s[p * n + k] = c * spk - sn * sqk;
                    s[q * n + k] = sn * spk + c * sqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| s[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    // pairs are equal up to rounding; keep one of each
    eig.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// `ln det A` for Hermitian positive-definite `A`: Cholesky first, the
/// eigenvalue route if Cholesky breaks down.
pub fn hermitian_logdet(a: &[Complex64], m: usize) -> Result<f64> {
    if let Some(v) = logdet_cholesky(a, m) {
        return Ok(v);
    }
    let eig = hermitian_eigenvalues(a, m);
    if eig.iter().all(|&e| e > 0.0 && e.is_finite()) {
        Ok(eig.iter().map(|e| e.ln()).sum())
    } else {
        Err(Error::Decomposition)
    }
}
