//! Special functions needed by the closed form and by its oracles.
//!
//! Everything here is restricted to the integer orders that actually occur:
//! Laguerre polynomials `L_k^(alpha)` with integer `alpha >= 0`, the upper
//! incomplete gamma function `Gamma(s, t)` at integer `s >= 0`, and the
//! exponential integral at negative arguments only.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, to_f64, Rational};

/// Euler-Mascheroni constant to 30 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// Below this argument `E1` is summed from its power series, above it the
/// continued fraction is used.
const E1_SERIES_CUTOFF: f64 = 1.0;
const E1_MAX_ITERATIONS: usize = 100_000;

/// Dense polynomial with exact rational coefficients, `coeffs[i]` multiplying `x^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyRational {
    coeffs: Vec<Rational>,
}

impl PolyRational {
    /// Builds a polynomial, trimming trailing zeros. The zero polynomial is
    /// stored as a single zero coefficient.
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Rational::zero());
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Exact Horner evaluation.
    pub fn eval_exact(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Floating-point Horner evaluation on rounded coefficients.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + to_f64(c))
    }
}

/// Exact coefficients of `L_k^(alpha)(x) = sum_i (-1)^i C(alpha+k, k-i) x^i / i!`.
pub fn laguerre_coeffs(k: usize, alpha: usize) -> PolyRational {
    let top = (alpha + k) as i64;
    let coeffs = (0..=k)
        .map(|i| {
            let mut num = binomial(top, (k - i) as i64);
            if i % 2 == 1 {
                num = -num;
            }
            Rational::new(num, factorial(i))
        })
        .collect();
    PolyRational::new(coeffs)
}

/// `L_k^(alpha)(x)` by the three-term recurrence in the degree:
/// `(j+1) L_{j+1} = (2j + 1 + alpha - x) L_j - (j + alpha) L_{j-1}`.
pub fn laguerre_eval(k: usize, alpha: usize, x: f64) -> f64 {
    let a = alpha as f64;
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn check_positive(t: f64, what: &str) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} requires t > 0, got {t}")))
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let s = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - s) + x;
        } else {
            self.carry += (x - s) + self.sum;
        }
        self.sum = s;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// `E1(t) = -gamma - ln t - sum_{k>=1} (-t)^k / (k k!)`, for small `t`.
fn e1_series(t: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    acc.add(-EULER_GAMMA);
    acc.add(-t.ln());
    let mut term = 1.0;
    for k in 1..E1_MAX_ITERATIONS {
        let kf = k as f64;
        term *= -t / kf;
        let contrib = term / kf;
        acc.add(-contrib);
        if contrib.abs() < 1e-18 * acc.value().abs() {
            break;
        }
    }
    acc.value()
}

/// `e^t E1(t)` from the continued fraction, evaluated with modified Lentz.
fn scaled_e1_continued_fraction(t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = t + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..E1_MAX_ITERATIONS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

fn e1(t: f64) -> f64 {
    if t <= E1_SERIES_CUTOFF {
        e1_series(t)
    } else {
        scaled_e1_continued_fraction(t) * (-t).exp()
    }
}

/// `e^t E1(t) = -e^t Ei(-t)`, computed without forming `e^t` for large `t`.
///
/// This is the common factor of the closed form up to sign.
pub fn scaled_e1(t: f64) -> Result<f64> {
    check_positive(t, "scaled_e1")?;
    Ok(if t <= E1_SERIES_CUTOFF {
        t.exp() * e1_series(t)
    } else {
        scaled_e1_continued_fraction(t)
    })
}

/// Upper incomplete gamma `Gamma(s, t)` for integer `s >= 0` and `t > 0`.
///
/// For `s >= 1` this is the finite sum `(s-1)! e^{-t} sum_{i<s} t^i / i!`;
/// `Gamma(0, t) = E1(t) = -Ei(-t)`.
pub fn upper_gamma_int(s: usize, t: f64) -> Result<f64> {
    check_positive(t, "upper_gamma_int")?;
    if s == 0 {
        return Ok(e1(t));
    }
    Ok(factorial_f64(s - 1) * (-t).exp() * partial_exp_sum(s - 1, t))
}

/// `sum_{i=0}^{k} t^i / i!`.
pub fn partial_exp_sum(k: usize, t: f64) -> f64 {
    let mut term = 1.0;
    let mut acc = 1.0;
    for i in 1..=k {
        term *= t / i as f64;
        acc += term;
    }
    acc
}

/// `k!` rounded to `f64` (infinite beyond `170!`).
pub fn factorial_f64(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// The exponential integral `Ei(-t) = -int_t^inf e^{-s}/s ds` for `t > 0`.
pub fn exp_integral_ei_neg(t: f64) -> Result<f64> {
    upper_gamma_int(0, t).map(|v| -v)
}

/// Harmonic number `H_l = sum_{k=1}^{l} 1/k`, exactly. `psi(l + 1) = -gamma + H_l`.
pub fn harmonic(l: usize) -> Rational {
    (1..=l).fold(Rational::zero(), |acc, k| {
        acc + Rational::new(BigInt::one(), BigInt::from(k))
    })
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: &Rational, n: usize) -> Rational {
    let mut acc = Rational::one();
    let mut x = a.clone();
    for _ in 0..n {
        acc *= &x;
        x += Rational::one();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    // E1 reference values computed with mpmath at 40 digits.
    const E1_REFERENCE: &[(f64, f64)] = &[
        (0.001, 6.331_539_364_136_149_3),
        (0.1, 1.822_923_958_419_390_6),
        (0.5, 0.559_773_594_776_160_81),
        (1.0, 0.219_383_934_395_520_27),
        (2.0, 0.048_900_510_708_061_12),
        (5.0, 0.001_148_295_591_275_325_8),
        (8.0, 3.766_562_284_392_490_2e-5),
        (10.0, 4.156_968_929_685_324_3e-6),
        (20.0, 9.835_525_290_649_881_7e-11),
        (50.0, 3.783_264_029_550_459e-24),
        (200.0, 6.885_226_106_307_635_6e-90),
    ];

    #[test]
    fn laguerre_coeff_examples() {
        assert_eq!(laguerre_coeffs(0, 5).coeffs(), &[q(1, 1)]);
        assert_eq!(laguerre_coeffs(1, 3).coeffs(), &[q(4, 1), q(-1, 1)]);
        assert_eq!(
            laguerre_coeffs(2, 0).coeffs(),
            &[q(1, 1), q(-2, 1), q(1, 2)]
        );
    }

    #[test]
    fn laguerre_leading_coefficient() {
        for k in 0..12 {
            for alpha in [0, 1, 4] {
                let p = laguerre_coeffs(k, alpha);
                assert_eq!(p.degree(), k);
                let sign = if k % 2 == 0 { 1 } else { -1 };
                assert_eq!(
                    p.coeffs()[k],
                    Rational::new(BigInt::from(sign), factorial(k))
                );
            }
        }
    }

    #[test]
    fn laguerre_eval_examples() {
        assert_eq!(laguerre_eval(0, 0, 7.3), 1.0);
        assert_eq!(laguerre_eval(1, 3, 4.0), 0.0);
        assert_relative_eq!(laguerre_eval(2, 0, 2.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn laguerre_eval_matches_exact_coefficients() {
        // deterministic pseudo-random points in [0, 50]
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 50.0
        };
        for _ in 0..20 {
            let x = next();
            let xr = Rational::from_float(x).unwrap();
            for k in 0..=10 {
                for alpha in [0, 1, 2, 5] {
                    let exact = to_f64(&laguerre_coeffs(k, alpha).eval_exact(&xr));
                    let rec = laguerre_eval(k, alpha, x);
                    let rel = (exact - rec).abs() / exact.abs();
                    assert!(
                        rel <= 1e-12,
                        "k={k} alpha={alpha} x={x}: {rec} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn upper_gamma_examples() {
        assert_relative_eq!(upper_gamma_int(1, 1.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(upper_gamma_int(3, 1.0).unwrap(), 5.0 / std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(upper_gamma_int(0, 1.0).unwrap(), 0.219_383_934_395_520_27, max_relative = 1e-15);
    }

    #[test]
    fn upper_gamma_rejects_nonpositive() {
        assert!(upper_gamma_int(2, 0.0).is_err());
        assert!(upper_gamma_int(0, -1.0).is_err());
        assert!(upper_gamma_int(0, f64::NAN).is_err());
        assert!(exp_integral_ei_neg(0.0).is_err());
        assert!(scaled_e1(-2.0).is_err());
    }

    #[test]
    fn upper_gamma_recurrence() {
        for t in [0.3, 1.0, 4.0, 12.0] {
            for s in 1..=15usize {
                let lhs = upper_gamma_int(s + 1, t).unwrap();
                let rhs = s as f64 * upper_gamma_int(s, t).unwrap() + t.powi(s as i32) * (-t).exp();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn ei_matches_reference_to_1e14() {
        for &(t, e1_ref) in E1_REFERENCE {
            let got = exp_integral_ei_neg(t).unwrap();
            assert!(got < 0.0);
            let rel = (got + e1_ref).abs() / e1_ref;
            assert!(rel <= 1e-14, "t={t}: Ei(-t)={got}, ref={}, rel={rel:e}", -e1_ref);
        }
    }

    #[test]
    fn scaled_e1_matches_reference() {
        for &(t, e1_ref) in E1_REFERENCE.iter().filter(|(t, _)| *t <= 50.0) {
            let got = scaled_e1(t).unwrap();
            let want = e1_ref * t.exp();
            assert_relative_eq!(got, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn ei_examples() {
        assert_relative_eq!(exp_integral_ei_neg(1.0).unwrap(), -0.219_383_93, max_relative = 5e-8);
        assert_relative_eq!(exp_integral_ei_neg(10.0).unwrap(), -4.156_97e-6, max_relative = 1e-5);
    }

    #[test]
    fn ei_bracketing_for_large_t() {
        for t in [15.0, 30.0, 60.0, 120.0, 300.0] {
            let v = -exp_integral_ei_neg(t).unwrap();
            let lo = (-t).exp() / (t + 1.0);
            let hi = (-t).exp() / t;
            assert!(lo < v && v < hi, "t={t}");
        }
    }

    #[test]
    fn ei_is_same_path_as_gamma_zero() {
        for t in [0.01, 0.7, 1.0, 1.0000001, 3.3, 40.0] {
            let a = exp_integral_ei_neg(t).unwrap();
            let b = -upper_gamma_int(0, t).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn series_and_fraction_agree_at_crossover() {
        let t = E1_SERIES_CUTOFF;
        let series = e1_series(t);
        let cf = scaled_e1_continued_fraction(t) * (-t).exp();
        assert_relative_eq!(series, cf, max_relative = 1e-14);
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(0), Rational::zero());
        assert_eq!(harmonic(2), q(3, 2));
        assert_eq!(harmonic(4), q(25, 12));
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(&q(7, 3), 0), q(1, 1));
        assert_eq!(pochhammer(&q(1, 1), 4), q(24, 1));
        assert_eq!(pochhammer(&q(-2, 1), 3), q(0, 1));
    }

    #[test]
    fn chu_vandermonde_exact() {
        // sum_k (-N)_k (a)_k / (k! (b)_k) = (b-a)_N / (b)_N
        for big_n in 0..=6usize {
            for a in -3i64..=5 {
                for b in 1i64..=6 {
                    let (nq, aq, bq) = (q(-(big_n as i64), 1), q(a, 1), q(b, 1));
                    let lhs = (0..=big_n).fold(Rational::zero(), |acc, k| {
                        acc + pochhammer(&nq, k) * pochhammer(&aq, k)
                            / (Rational::from_integer(factorial(k)) * pochhammer(&bq, k))
                    });
                    let rhs = pochhammer(&(bq.clone() - aq), big_n) / pochhammer(&bq, big_n);
                    assert_eq!(lhs, rhs, "N={big_n} a={a} b={b}");
                }
            }
        }
        let lhs: Rational = (0..=2usize).fold(Rational::zero(), |acc, k| {
            acc + pochhammer(&q(-2, 1), k) * pochhammer(&q(1, 1), k)
                / (Rational::from_integer(factorial(k)) * pochhammer(&q(2, 1), k))
        });
        assert_eq!(lhs, q(1, 3));
    }

    #[test]
    fn incomplete_gamma_binomial_sum() {
        // sum_k C(N,k) (-t)^{-k} Gamma(k+1,t) = (-1/t)^N N! e^{-t}
        for big_n in 0..=8usize {
            for t in [0.5f64, 1.0, 3.0] {
                let lhs: f64 = (0..=big_n)
                    .map(|k| {
                        to_f64(&Rational::from_integer(binomial(big_n as i64, k as i64)))
                            * (-t).powi(-(k as i32))
                            * upper_gamma_int(k + 1, t).unwrap()
                    })
                    .sum();
                let rhs = (-1.0 / t).powi(big_n as i32) * factorial_f64(big_n) * (-t).exp();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn poly_trims_trailing_zeros() {
        let p = PolyRational::new(vec![q(1, 1), q(0, 1), q(0, 1)]);
        assert_eq!(p.degree(), 0);
        let z = PolyRational::new(vec![]);
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
    }
}
