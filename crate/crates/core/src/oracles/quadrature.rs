//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals,
//! plus tail bounds for the truncated semi-infinite integrals used by the
//! oracles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::upper_gamma_int;

// Kronrod abscissae on [-1, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const INITIAL_PANELS: usize = 8;

/// Tolerances and truncation for the oracle integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// The semi-infinite range is cut at `n + multiplier * (sqrt(n) + 10)`.
    pub tail_cutoff_multiplier: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_subdivisions: 20_000,
            tail_cutoff_multiplier: 8.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 1e-13 && self.rel_tol.is_finite()) {
            return Err(Error::domain(format!("rel_tol must be >= 1e-13, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::domain(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.max_subdivisions == 0 || self.max_subdivisions > 1_000_000 {
            return Err(Error::domain(format!(
                "max_subdivisions must be in 1..=1000000, got {}",
                self.max_subdivisions
            )));
        }
        if !(self.tail_cutoff_multiplier > 0.0 && self.tail_cutoff_multiplier.is_finite()) {
            return Err(Error::domain("tail_cutoff_multiplier must be positive"));
        }
        Ok(())
    }

    /// Truncation point for a weight `x^p e^{-x}` with polynomial scale `n`.
    pub fn upper_limit(&self, n: usize) -> f64 {
        let n = n as f64;
        n + self.tail_cutoff_multiplier * (n.sqrt() + 10.0)
    }

    pub(crate) fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Result of a finite-interval quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = kronrod.abs();
    for i in 0..7 {
        let dx = half * XGK[i];
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod += WGK[i] * (f1 + f2);
        abs_sum += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    let error = ((kronrod - gauss) * half).abs().max(roundoff);
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]` until the summed panel error is within
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration limits must be finite"));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, subdivisions: 0 });
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut heap: BinaryHeap<Panel> = (0..INITIAL_PANELS)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
            gauss_kronrod(&f, lo, hi)
        })
        .collect();
    let totals = |heap: &BinaryHeap<Panel>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap);
    let mut subdivisions = 0;
    loop {
        if !value.is_finite() {
            return Err(Error::domain("integrand is not finite on the interval"));
        }
        if error <= cfg.tolerance(value) {
            // running sums drift; confirm against a fresh summation
            (value, error) = totals(&heap);
            if error <= cfg.tolerance(value) {
                return Ok(Integral { value, error, subdivisions });
            }
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if subdivisions >= cfg.max_subdivisions || !(worst.a < mid && mid < worst.b) {
            let (value, error) = totals(&heap);
            return Err(Error::Convergence {
                subdivisions,
                error: error + worst.error,
                tolerance: cfg.tolerance(value + worst.value),
            });
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// Upper bound on `int_U^inf q(x) e^{-x} (log_at_u + x / slope) dx` for a
/// polynomial with non-negative coefficients `q`.
///
/// Used with `log_at_u + x / slope` as a linear majorant of the slowly
/// growing logarithmic factor beyond the cutoff.
pub fn polynomial_tail_bound(q: &[f64], upper: f64, log_at_u: f64, slope: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (j, &c) in q.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut term = log_at_u.max(0.0) * upper_gamma_int(j + 1, upper)?;
        if slope.is_finite() {
            term += upper_gamma_int(j + 2, upper)? / slope;
        }
        acc += c.abs() * term;
    }
    Ok(acc)
}
