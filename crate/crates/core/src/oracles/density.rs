//! One-point eigenvalue density of `H H'` and the integral representation of
//! the ergodic mutual information built on it.

use serde::{Deserialize, Serialize};

use crate::coefficients::ChannelDims;
use crate::error::{Error, Result};
use crate::evaluator::{check_t, EvaluationResult, Method};
use crate::oracles::quadrature::{integrate, polynomial_tail_bound, Integral, QuadratureConfig};
use crate::rational::to_f64;
use crate::special::{laguerre_coeffs, laguerre_eval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityForm {
    /// `(1/m) e^{-x} x^{n-m} sum_{k<m} k!/(n-m+k)! (L_k^{(n-m)}(x))^2`
    SumForm,
    /// `(m-1)!/(n-1)! x^{n-m} e^{-x} ((L_{m-1}^{(n-m+1)})^2 - L_{m-2}^{(n-m+1)} L_m^{(n-m+1)})`
    TwoTermForm,
}

/// `x^p e^{-x}`, with `0^0 = 1`.
fn gamma_weight(p: usize, x: f64) -> f64 {
    if x == 0.0 {
        if p == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (p as f64 * x.ln() - x).exp()
    }
}

/// `a! / b!` for `a <= b`, as a product of `b - a` factors.
fn factorial_ratio(a: usize, b: usize) -> f64 {
    1.0 / (a + 1..=b).fold(1.0, |acc, i| acc * i as f64)
}

/// `sum_{k<m} k!/(n-m+k)! e^{-x} x^{n-m} (L_k^{(n-m)}(x))^2 = m p(x)`.
fn kernel_diagonal(dims: ChannelDims, x: f64) -> f64 {
    let alpha = dims.alpha();
    let sum: f64 = (0..dims.m())
        .map(|k| {
            let l = laguerre_eval(k, alpha, x);
            factorial_ratio(k, alpha + k) * l * l
        })
        .sum();
    gamma_weight(alpha, x) * sum
}

fn two_term(dims: ChannelDims, x: f64) -> f64 {
    let (m, alpha) = (dims.m(), dims.alpha());
    let shifted = alpha + 1;
    let l_mid = laguerre_eval(m - 1, shifted, x);
    let l_lo = if m >= 2 { laguerre_eval(m - 2, shifted, x) } else { 0.0 };
    let l_hi = laguerre_eval(m, shifted, x);
    factorial_ratio(m - 1, dims.n() - 1) * gamma_weight(alpha, x) * (l_mid * l_mid - l_lo * l_hi)
}

/// Marginal density of one unordered eigenvalue of `H H'`.
pub fn one_point_density(dims: ChannelDims, lambda: f64, form: DensityForm) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("eigenvalue must be finite and >= 0, got {lambda}")));
    }
    Ok(match form {
        DensityForm::SumForm => kernel_diagonal(dims, lambda) / dims.m() as f64,
        DensityForm::TwoTermForm => two_term(dims, lambda),
    })
}

/// Coefficients of `sum_k k!/(n-m+k)! x^{n-m} |L_k|(x)^2` where `|L_k|` has
/// the absolute values of the Laguerre coefficients. It dominates the
/// density numerator on `x >= 0`.
fn majorant_coeffs(dims: ChannelDims) -> Vec<f64> {
    let alpha = dims.alpha();
    let mut out = vec![0.0; alpha + 2 * dims.m()];
    for k in 0..dims.m() {
        let abs: Vec<f64> = laguerre_coeffs(k, alpha)
            .coeffs()
            .iter()
            .map(|c| to_f64(c).abs())
            .collect();
        let w = factorial_ratio(k, alpha + k);
        for (i, a) in abs.iter().enumerate() {
            for (j, b) in abs.iter().enumerate() {
                out[alpha + i + j] += w * a * b;
            }
        }
    }
    out
}

/// `int_0^inf x^order p(x) dx` by truncated quadrature; the tail bound is
/// folded into the reported error.
pub fn density_moment(
    dims: ChannelDims,
    order: usize,
    form: DensityForm,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    let upper = cfg.upper_limit(dims.n() + order);
    let mut r = integrate(
        |x| x.powi(order as i32) * one_point_density(dims, x, form).unwrap_or(f64::NAN),
        0.0,
        upper,
        cfg,
    )?;
    let mut q = vec![0.0; order];
    q.extend(majorant_coeffs(dims).iter().map(|c| c / dims.m() as f64));
    r.error += polynomial_tail_bound(&q, upper, 1.0, f64::INFINITY)?;
    Ok(r)
}

/// The integral representation of the ergodic mutual information,
///
/// ```text
/// E[I] = sum_{k<m} k!/(n-m+k)! int_0^inf ln(1 + x/t) e^{-x} x^{n-m} (L_k^{(n-m)}(x))^2 dx,
/// ```
///
/// by adaptive quadrature on `[0, U]` plus an analytic bound on the tail.
pub fn telatar_quadrature(dims: ChannelDims, t: f64, cfg: &QuadratureConfig) -> Result<EvaluationResult> {
    check_t(t)?;
    let upper = cfg.upper_limit(dims.n());
    let integral = integrate(|x| (x / t).ln_1p() * kernel_diagonal(dims, x), 0.0, upper, cfg)?;
    // ln(1 + x/t) <= ln(1 + U/t) + x/(U + t) for x >= U
    let tail = polynomial_tail_bound(&majorant_coeffs(dims), upper, (upper / t).ln_1p(), upper + t)?;
    let err_estimate = integral.error + tail;
    let tolerance = cfg.tolerance(integral.value);
    if err_estimate > tolerance {
        return Err(Error::Convergence {
            subdivisions: integral.subdivisions,
            error: err_estimate,
            tolerance,
        });
    }
    Ok(EvaluationResult {
        dims,
        t,
        value: integral.value,
        method: Method::Quadrature,
        err_estimate,
    })
}

/// `int_0^inf x^alpha e^{-x} L_k^(alpha)(x) L_l^(alpha)(x) dx` by quadrature.
pub fn laguerre_inner_product(k: usize, l: usize, alpha: usize, cfg: &QuadratureConfig) -> Result<Integral> {
    let upper = cfg.upper_limit(alpha + k + l);
    let mut r = integrate(
        |x| gamma_weight(alpha, x) * laguerre_eval(k, alpha, x) * laguerre_eval(l, alpha, x),
        0.0,
        upper,
        cfg,
    )?;
    let abs = |deg| -> Vec<f64> {
        laguerre_coeffs(deg, alpha)
            .coeffs()
            .iter()
            .map(|c| to_f64(c).abs())
            .collect()
    };
    let (pk, pl) = (abs(k), abs(l));
    let mut q = vec![0.0; alpha + k + l + 1];
    for (i, a) in pk.iter().enumerate() {
        for (j, b) in pl.iter().enumerate() {
            q[alpha + i + j] += a * b;
        }
    }
    r.error += polynomial_tail_bound(&q, upper, 1.0, f64::INFINITY)?;
    Ok(r)
}
