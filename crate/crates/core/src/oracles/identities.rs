//! Numerical checks of the intermediate identities behind the closed form.
//! Each returns both sides so callers can decide on a tolerance.

use crate::coefficients::{coeff_c, ChannelDims};
use crate::error::{Error, Result};
use crate::evaluator::check_t;
use crate::oracles::quadrature::{integrate, polynomial_tail_bound, QuadratureConfig};
use crate::rational::{binomial, to_f64, Rational};
use crate::special::{factorial_f64, laguerre_coeffs, laguerre_eval, partial_exp_sum, scaled_e1, upper_gamma_int};

pub const LEMMA_MAX_K: usize = 20;

fn binomial_f64(n: i64, k: i64) -> f64 {
    to_f64(&Rational::from_integer(binomial(n, k)))
}

/// `e^t Gamma(s, t)` for integer `s >= 0`, without forming `e^t` separately.
fn scaled_upper_gamma(s: usize, t: f64) -> Result<f64> {
    if s == 0 {
        scaled_e1(t)
    } else {
        Ok(factorial_f64(s - 1) * partial_exp_sum(s - 1, t))
    }
}

/// Closed form `Gamma(k+1, t) ln t + k! sum_{s=0}^{k} Gamma(s, t)/s!` of
/// `int_t^inf x^k e^{-x} ln x dx`, all multiplied by `e^t`.
fn scaled_log_moment(k: usize, t: f64) -> Result<f64> {
    let mut sum = 0.0;
    for s in 0..=k {
        sum += scaled_upper_gamma(s, t)? / factorial_f64(s);
    }
    Ok(scaled_upper_gamma(k + 1, t)? * t.ln() + factorial_f64(k) * sum)
}

/// Both sides of `int_t^inf x^k e^{-x} ln x dx = Gamma(k+1,t) ln t + k! sum_{s=0}^k Gamma(s,t)/s!`.
///
/// Returns `(quadrature, closed form)`.
pub fn lemma1_check(k: usize, t: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    check_t(t)?;
    if k > LEMMA_MAX_K {
        return Err(Error::domain(format!("k must be <= {LEMMA_MAX_K}, got {k}")));
    }
    let upper = t + cfg.upper_limit(k);
    let quad = integrate(|x| (k as f64 * x.ln() - x).exp() * x.ln(), t, upper, cfg)?;
    // ln x <= ln U + x/U beyond the cutoff
    let mut q = vec![0.0; k + 1];
    q[k] = 1.0;
    let tail = polynomial_tail_bound(&q, upper, upper.ln(), upper)?;
    let tolerance = cfg.tolerance(quad.value);
    if quad.error + tail > tolerance {
        return Err(Error::Convergence {
            subdivisions: quad.subdivisions,
            error: quad.error + tail,
            tolerance,
        });
    }
    let mut rhs = 0.0;
    for s in 0..=k {
        rhs += upper_gamma_int(s, t)? / factorial_f64(s);
    }
    let rhs = upper_gamma_int(k + 1, t)? * t.ln() + factorial_f64(k) * rhs;
    Ok((quad.value, rhs))
}

/// Both sides of the evaluation of
///
/// ```text
/// A_pq(t) = e^t int_t^inf L_p(x-t) L_q(x-t) (x-t)^{n-m} e^{-x} ln x dx,   L = L^{(n-m+1)}
/// ```
///
/// as `(quadrature, triple-sum expansion)`.
pub fn a_pq_check(p: usize, q: usize, dims: ChannelDims, t: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    check_t(t)?;
    if p > dims.m() || q > dims.m() {
        return Err(Error::domain(format!("degrees must be <= m = {}, got p={p}, q={q}", dims.m())));
    }
    let alpha = dims.alpha();
    let shifted = alpha + 1;

    // y = x - t turns e^t e^{-x} into e^{-y}
    let upper = cfg.upper_limit(dims.n() + dims.m());
    let weight = |y: f64| if y == 0.0 { if alpha == 0 { 1.0 } else { 0.0 } } else { (alpha as f64 * y.ln() - y).exp() };
    let quad = integrate(
        |y| laguerre_eval(p, shifted, y) * laguerre_eval(q, shifted, y) * weight(y) * (y + t).ln(),
        0.0,
        upper,
        cfg,
    )?;
    let abs_coeffs = |deg| -> Vec<f64> {
        laguerre_coeffs(deg, shifted)
            .coeffs()
            .iter()
            .map(|c| to_f64(c).abs())
            .collect()
    };
    let (lp, lq) = (abs_coeffs(p), abs_coeffs(q));
    let mut poly = vec![0.0; alpha + p + q + 1];
    for (i, a) in lp.iter().enumerate() {
        for (j, b) in lq.iter().enumerate() {
            poly[alpha + i + j] += a * b;
        }
    }
    let tail = polynomial_tail_bound(&poly, upper, (upper + t).ln(), upper + t)?;
    let tolerance = cfg.tolerance(quad.value);
    if quad.error + tail > tolerance {
        return Err(Error::Convergence {
            subdivisions: quad.subdivisions,
            error: quad.error + tail,
            tolerance,
        });
    }

    let (a1, pi, qi) = (shifted as i64, p as i64, q as i64);
    let mut expansion = 0.0;
    for i in 0..=(pi + qi) {
        let power = (i + alpha as i64) as usize;
        let mut inner = 0.0;
        for k in 0..=power {
            inner += binomial_f64(power as i64, k as i64)
                * (-t).powi((power - k) as i32)
                * scaled_log_moment(k, t)?;
        }
        for j in 0..=i {
            let c = binomial_f64(a1 + qi, qi - j) * binomial_f64(a1 + pi, pi - i + j);
            if c == 0.0 {
                continue;
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            expansion += sign * c / (factorial_f64(j as usize) * factorial_f64((i - j) as usize)) * inner;
        }
    }
    Ok((quad.value, expansion))
}

/// Right-hand side of the `ln t` cancellation identity,
///
/// ```text
/// e^t sum_{i=0}^{2m-2} sum_{j=0}^{i} c_ij sum_{k=0}^{N} C(N,k) (-t)^{N-k} Gamma(k+1, t),   N = i+n-m,
/// ```
///
/// which equals `m` for every `t > 0`.
pub fn lnt_identity_check(dims: ChannelDims, t: f64) -> Result<f64> {
    check_t(t)?;
    let alpha = dims.alpha();
    let scale = t.exp();
    let mut total = 0.0;
    for i in 0..=(2 * dims.m() - 2) {
        let big_n = i + alpha;
        let mut inner = 0.0;
        for k in 0..=big_n {
            inner += binomial_f64(big_n as i64, k as i64)
                * (-t).powi((big_n - k) as i32)
                * upper_gamma_int(k + 1, t)?;
        }
        for j in 0..=i {
            let c = to_f64(&coeff_c(i as i64, j as i64, dims));
            total += c * inner;
        }
    }
    Ok(scale * total)
}
