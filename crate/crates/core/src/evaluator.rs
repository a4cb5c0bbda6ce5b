//! Numerical evaluation, symbolic rendering and SNR sweeps of the closed form.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{cached_table, common_denominator, ChannelDims, CoefficientTable};
use crate::error::{Error, Result};
use crate::rational::{from_f64, to_f64, Rational};
use crate::special::scaled_e1;

/// Relative accuracy assumed for [`scaled_e1`] when bounding the closed-form error.
const SCALED_E1_REL_ERR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ergodic mutual information (nats) of one channel size at one inverse SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    #[serde(flatten)]
    pub dims: ChannelDims,
    /// Inverse SNR.
    pub t: f64,
    /// `E[I]` in nats.
    pub value: f64,
    pub method: Method,
    /// Absolute error bound on `value`, in nats.
    pub err_estimate: f64,
}

impl EvaluationResult {
    pub fn snr_db(&self) -> f64 {
        // + 0.0 turns -0 into 0 at t = 1
        -10.0 * self.t.log10() + 0.0
    }
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("inverse SNR t must be positive and finite, got {t}")))
    }
}

fn eval_exact(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Largest relative error bound accepted from the floating-point path before
/// switching to exact continued-fraction evaluation.
const FLOAT_PATH_REL_TOL: f64 = 1e-13;

/// Target relative accuracy of the exact path, before the final rounding.
const EXACT_PATH_REL_TOL: f64 = 1.0 / (1u64 << 60) as f64;

const MAX_FRACTION_TERMS: usize = 50_000;

/// Evaluates `sum a_k t^k + e^t Ei(-t) sum b_k t^k`.
///
/// Both polynomial sums are formed exactly at the dyadic rational equal to
/// `t`. When they do not cancel much, `e^t Ei(-t)` comes from
/// [`scaled_e1`] in floating point. For larger `t` the two parts agree in
/// many leading digits, and `e^t E1(t)` is instead taken from exact
/// convergents of its continued fraction until the bracket they give is
/// well below the result.
pub fn evaluate_closed_form(table: &CoefficientTable, t: f64) -> Result<EvaluationResult> {
    check_t(t)?;
    let tq = from_f64(t).expect("finite t is representable");
    let poly = eval_exact(table.a(), &tq);
    let ei_poly = eval_exact(table.b(), &tq);
    let (poly_f, ei_poly_f) = (to_f64(&poly), to_f64(&ei_poly));
    // e^t Ei(-t) = -e^t E1(t)
    let g = scaled_e1(t)?;
    let ei_part = g * ei_poly_f;
    let value = (-g).mul_add(ei_poly_f, poly_f);
    let err_estimate = SCALED_E1_REL_ERR * ei_part.abs()
        + 4.0 * f64::EPSILON * (poly_f.abs() + ei_part.abs() + value.abs());
    let (value, err_estimate) = if err_estimate <= FLOAT_PATH_REL_TOL * value.abs() {
        (value, err_estimate)
    } else {
        exact_combination(&poly, &ei_poly, &tq).ok_or_else(|| {
            Error::domain(format!(
                "closed form for {} at t={t} needs more than {MAX_FRACTION_TERMS} continued-fraction terms",
                table.dims()
            ))
        })?
    };
    Ok(EvaluationResult {
        dims: table.dims(),
        t,
        value,
        method: Method::ClosedForm,
        err_estimate,
    })
}

/// `poly - e^t E1(t) ei_poly` with `e^t E1(t)` from the convergents of
///
/// ```text
/// e^t E1(t) = 1/(t + 1/(1 + 1/(t + 2/(1 + 2/(t + 3/(1 + ...))))))
/// ```
///
/// All partial numerators are positive, so consecutive convergents bracket
/// the limit and their gap bounds the error. Returns `(value, bound)`.
fn exact_combination(poly: &Rational, ei_poly: &Rational, t: &Rational) -> Option<(f64, f64)> {
    let (tp, tq) = (t.numer().clone(), t.denom().clone());
    // Scaled so every partial quotient is an integer: b_k is tp for odd k and
    // 1 for even k, and a_k = max(1, k/2) tq.
    let (mut num_prev, mut num) = (BigInt::from(1), BigInt::zero());
    let (mut den_prev, mut den) = (BigInt::zero(), BigInt::from(1));
    let mut partial_product = BigInt::from(1);
    let weight = ei_poly.abs();
    for k in 1..=MAX_FRACTION_TERMS {
        let a = BigInt::from((k / 2).max(1)) * &tq;
        let b = if k % 2 == 1 { tp.clone() } else { BigInt::from(1) };
        let next_num = &b * &num + &a * &num_prev;
        let next_den = &b * &den + &a * &den_prev;
        num_prev = std::mem::replace(&mut num, next_num);
        den_prev = std::mem::replace(&mut den, next_den);
        partial_product *= a;
        if k < 2 || k % 8 != 0 {
            continue;
        }
        let convergent = Rational::new(num.clone(), den.clone());
        let value = poly - &convergent * ei_poly;
        let gap = &weight * Rational::new(partial_product.clone(), &den * &den_prev);
        let value_f = to_f64(&value);
        let gap_f = to_f64(&gap);
        if gap_f <= EXACT_PATH_REL_TOL * value_f.abs() {
            return Some((value_f, gap_f + f64::EPSILON * value_f.abs()));
        }
    }
    None
}

fn push_term(out: &mut String, power: usize, coeff: &BigInt) {
    let magnitude = coeff.abs();
    let negative = coeff.is_negative();
    if out.is_empty() {
        if negative {
            out.push('-');
        }
    } else {
        out.push_str(if negative { " - " } else { " + " });
    }
    let unit = magnitude == BigInt::from(1);
    match (power, unit) {
        (0, _) => out.push_str(&magnitude.to_string()),
        (1, true) => out.push('t'),
        (1, false) => out.push_str(&format!("{magnitude} t")),
        (_, true) => out.push_str(&format!("t^{power}")),
        (_, false) => out.push_str(&format!("{magnitude} t^{power}")),
    }
}

fn render_poly(coeffs: &[BigInt]) -> String {
    let mut out = String::new();
    for (k, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            push_term(&mut out, k, c);
        }
    }
    out
}

fn scaled_integers(coeffs: &[Rational], scale: &BigInt, negate: bool) -> Vec<BigInt> {
    coeffs
        .iter()
        .map(|c| {
            let v = c * Rational::from_integer(scale.clone());
            debug_assert!(v.is_integer());
            let v = v.to_integer();
            if negate {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// Human-readable form of the closed form with the common denominator
/// pulled out, e.g. `1/6 (20 - 6 t - t^2 - t^3 - e^t Ei(-t) (12 - 12 t + 6 t^2 + 2 t^3 + t^4))`.
pub fn render_expression(table: &CoefficientTable) -> String {
    let denom = common_denominator(table);
    let poly = render_poly(&scaled_integers(table.a(), &denom, false));
    let ei_poly = render_poly(&scaled_integers(table.b(), &denom, true));
    let body = if poly.is_empty() {
        format!("-e^t Ei(-t) ({ei_poly})")
    } else {
        format!("{poly} - e^t Ei(-t) ({ei_poly})")
    };
    if denom == BigInt::from(1) {
        body
    } else {
        format!("1/{denom} ({body})")
    }
}

/// Units of an SNR grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrScale {
    Decibel,
    Linear,
}

/// Converts an SNR in the given scale to the inverse SNR `t`.
pub fn snr_to_t(snr: f64, scale: SnrScale) -> Result<f64> {
    let linear = match scale {
        SnrScale::Decibel => 10f64.powf(snr / 10.0),
        SnrScale::Linear => snr,
    };
    if !(linear.is_finite() && linear > 0.0) {
        return Err(Error::domain(format!("SNR {snr} is not a positive linear value")));
    }
    Ok(1.0 / linear)
}

/// Evaluates the closed form over an SNR grid, in grid order.
pub fn sweep(dims: ChannelDims, snr_grid: &[f64], scale: SnrScale) -> Result<Vec<EvaluationResult>> {
    if snr_grid.is_empty() {
        return Err(Error::domain("SNR grid is empty"));
    }
    let ts = snr_grid
        .iter()
        .map(|&s| snr_to_t(s, scale))
        .collect::<Result<Vec<_>>>()?;
    let table = cached_table(dims);
    ts.par_iter()
        .map(|&t| evaluate_closed_form(&table, t))
        .collect()
}

/// Round-trip exact float text with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CSV_HEADER: &str = "m,n,snr_db,t,mi_nats,method,err_estimate";

/// Writes results as CSV with header `m,n,snr_db,t,mi_nats,method,err_estimate`.
pub fn write_csv<W: Write>(results: &[EvaluationResult], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.dims.m(),
            r.dims.n(),
            fmt_f64(r.snr_db()),
            fmt_f64(r.t),
            fmt_f64(r.value),
            r.method,
            fmt_f64(r.err_estimate)
        )?;
    }
    Ok(())
}

pub fn to_json(results: &[EvaluationResult]) -> String {
    serde_json::to_string_pretty(results).expect("evaluation results serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::build_table;
    use approx::assert_relative_eq;

    fn table(m: usize, n: usize) -> CoefficientTable {
        build_table(ChannelDims::new(m, n).unwrap())
    }

    // Telatar's integral evaluated with mpmath quadrature at 40 digits.
    const TELATAR_REFERENCE: &[(usize, usize, f64, f64)] = &[
        (1, 1, 1.0, 0.596_347_362_323_194_07),
        (2, 2, 1.0, 1.789_042_086_969_582_2),
        (2, 4, 1.0, 2.894_521_043_484_791_1),
        (4, 6, 0.5, 8.932_187_495_166_415),
        (2, 2, 0.1, 4.949_431_514_863_987_8),
        (3, 5, 10.0, 1.123_710_751_819_225_7),
        (4, 7, 0.1, 15.679_601_451_037_631),
        (2, 2, 100.0, 0.039_226_751_903_650_1),
    ];

    #[test]
    fn closed_form_matches_reference_integrals() {
        for &(m, n, t, want) in TELATAR_REFERENCE {
            let r = evaluate_closed_form(&table(m, n), t).unwrap();
            assert_eq!(r.method, Method::ClosedForm);
            assert_relative_eq!(r.value, want, max_relative = 1e-10);
            assert!((r.value - want).abs() <= r.err_estimate.max(1e-12 * want), "{m}x{n} t={t}");
        }
    }

    #[test]
    fn accurate_where_the_two_parts_cancel() {
        // mpmath quadrature, 40 digits; the polynomial parts agree in up to
        // 30 leading digits here
        let cases = [
            (4, 7, 100.0, 0.265_857_165_780_777_43),
            (3, 9, 1000.0, 0.026_839_529_625_057_867),
            (2, 8, 1e4, 0.001_599_200_623_388_696_1),
            (6, 12, 30.0, 1.903_060_708_577_786_2),
        ];
        for (m, n, t, want) in cases {
            let r = evaluate_closed_form(&table(m, n), t).unwrap();
            assert_relative_eq!(r.value, want, max_relative = 1e-15);
            assert!(r.err_estimate <= 1e-15 * want);
            assert!((r.value - want).abs() <= r.err_estimate + 1e-16 * want);
        }
    }

    #[test]
    fn two_by_two_at_unit_snr() {
        let r = evaluate_closed_form(&table(2, 2), 1.0).unwrap();
        assert!((r.value - 1.78904).abs() < 1e-5);
    }

    #[test]
    fn rejects_nonpositive_t() {
        assert!(evaluate_closed_form(&table(2, 2), 0.0).is_err());
        assert!(evaluate_closed_form(&table(2, 2), -1.0).is_err());
        assert!(evaluate_closed_form(&table(2, 2), f64::INFINITY).is_err());
    }

    #[test]
    fn vanishes_at_low_snr() {
        let mut prev = f64::INFINITY;
        for t in [1.0, 10.0, 30.0, 100.0] {
            let v = evaluate_closed_form(&table(2, 2), t).unwrap().value;
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn decreasing_in_t() {
        let grid: Vec<f64> = (0..=80).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 80.0)).collect();
        for (m, n) in [(1, 1), (1, 4), (2, 2), (2, 5), (3, 3), (3, 6), (4, 4), (4, 7)] {
            let tab = table(m, n);
            let values: Vec<f64> = grid
                .iter()
                .map(|&t| evaluate_closed_form(&tab, t).unwrap().value)
                .collect();
            for w in values.windows(2) {
                assert!(w[1] < w[0], "{m}x{n}: {} !< {}", w[1], w[0]);
            }
        }
    }

    #[test]
    fn more_antennas_more_information() {
        for t in [0.1, 1.0, 10.0] {
            for m in 1..=4 {
                for n in m..8 {
                    let lo = evaluate_closed_form(&table(m, n), t).unwrap().value;
                    let hi = evaluate_closed_form(&table(m, n + 1), t).unwrap().value;
                    assert!(hi > lo, "{m}x{n} t={t}");
                }
            }
        }
    }

    #[test]
    fn high_snr_log_slope_converges() {
        // value - m ln(1/t) tends to a constant as t -> 0
        let tab = table(2, 2);
        let offsets: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&t| evaluate_closed_form(&tab, t).unwrap().value - 2.0 * (1.0 / t).ln())
            .collect();
        let d1 = (offsets[1] - offsets[0]).abs();
        let d2 = (offsets[2] - offsets[1]).abs();
        assert!(d2 < d1, "{offsets:?}");
    }

    #[test]
    fn renders_table_rows() {
        assert_eq!(render_expression(&table(2, 2)), "1 - t - e^t Ei(-t) (2 + t^2)");
        assert_eq!(
            render_expression(&table(2, 4)),
            "1/6 (20 - 6 t - t^2 - t^3 - e^t Ei(-t) (12 - 12 t + 6 t^2 + 2 t^3 + t^4))"
        );
        assert_eq!(render_expression(&table(1, 1)), "-e^t Ei(-t) (1)");
    }

    #[test]
    fn sweep_examples() {
        let d = ChannelDims::new(2, 2).unwrap();
        let r = sweep(d, &[0.0], SnrScale::Decibel).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].t, 1.0);
        assert!((r[0].value - 1.78904).abs() < 1e-5);

        let r = sweep(d, &[10.0], SnrScale::Decibel).unwrap();
        assert_relative_eq!(r[0].t, 0.1, max_relative = 1e-15);
        assert_relative_eq!(r[0].value, 4.949_431_514_863_987_8, max_relative = 1e-8);

        assert!(sweep(d, &[], SnrScale::Decibel).is_err());
        assert!(sweep(d, &[1.0, 0.0], SnrScale::Linear).is_err());
        assert!(sweep(d, &[-3.0], SnrScale::Linear).is_err());
    }

    #[test]
    fn sweep_preserves_grid_order() {
        let d = ChannelDims::new(3, 4).unwrap();
        let grid: Vec<f64> = (-10..=30).rev().map(|x| x as f64).collect();
        let r = sweep(d, &grid, SnrScale::Decibel).unwrap();
        for (res, snr) in r.iter().zip(&grid) {
            assert_relative_eq!(res.snr_db(), *snr, epsilon = 1e-12);
        }
    }

    #[test]
    fn csv_layout() {
        let d = ChannelDims::new(2, 2).unwrap();
        let r = sweep(d, &[0.0], SnrScale::Decibel).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0], "2");
        assert_eq!(fields[5], "closed_form");
        let v: f64 = fields[4].parse().unwrap();
        assert_eq!(v.to_bits(), r[0].value.to_bits());
    }

    #[test]
    fn json_round_trip() {
        let d = ChannelDims::new(2, 3).unwrap();
        let r = sweep(d, &[0.0, 5.0], SnrScale::Decibel).unwrap();
        let back: Vec<EvaluationResult> = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(back, r);
        assert!(to_json(&r).contains("\"method\": \"closed_form\""));
    }
}
