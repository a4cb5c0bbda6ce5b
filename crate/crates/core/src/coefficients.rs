//! Exact polynomial coefficients of the ergodic mutual information.
//!
//! For an `m x n` channel (`m <= n`, `alpha = n - m`) the expected mutual
//! information at inverse SNR `t` is
//!
//! ```text
//! E[I] = sum_{k=0}^{n+m-3} a_k t^k + e^t Ei(-t) sum_{k=0}^{n+m-2} b_k t^k
//! ```
//!
//! where `a_k` and `b_k` are finite double sums over the kernel `c_ij`. All of
//! it is computed in exact rational arithmetic; no floating point enters here.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{factorial, serde_rational_vec, Rational};
use crate::special::harmonic;

/// Antenna counts of a channel, normalized so that `m <= n`.
///
/// `ln det(I_m + H H'/t) = ln det(I_n + H' H/t)`, so swapping the two counts
/// leaves the mutual information unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawDims")]
pub struct ChannelDims {
    m: usize,
    n: usize,
}

#[derive(Deserialize)]
struct RawDims {
    m: usize,
    n: usize,
}

impl TryFrom<RawDims> for ChannelDims {
    type Error = Error;

    fn try_from(raw: RawDims) -> Result<Self> {
        ChannelDims::new(raw.m, raw.n)
    }
}

impl ChannelDims {
    /// Validates and normalizes a pair of antenna counts.
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidDims { m, n });
        }
        Ok(if m <= n { Self { m, n } } else { Self { m: n, n: m } })
    }

    /// The smaller antenna count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// The larger antenna count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Laguerre parameter `n - m`.
    pub fn alpha(&self) -> usize {
        self.n - self.m
    }

    /// Number of `a_k` coefficients, `n + m - 2`.
    pub fn a_len(&self) -> usize {
        self.n + self.m - 2
    }

    /// Number of `b_k` coefficients, `n + m - 1`.
    pub fn b_len(&self) -> usize {
        self.n + self.m - 1
    }
}

impl fmt::Display for ChannelDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

fn signed_factorial(k: i64) -> Option<BigInt> {
    (k >= 0).then(|| factorial(k as usize))
}

/// The kernel `c_ij` shared by every coefficient:
///
/// ```text
/// c_ij = n! m! (-1)^i (2nj + j - ni + n - m + 1)
///        / (j! (i-j)! (n-m+1+j)! (n-m+1+i-j)! (m-1-j)! (m-i+j)!)
/// ```
///
/// A reciprocal factorial of a negative integer counts as zero, so the value
/// is defined (and mostly zero) for every integer pair.
pub fn coeff_c(i: i64, j: i64, dims: ChannelDims) -> Rational {
    let (m, n) = (dims.m as i64, dims.n as i64);
    let denominators = [j, i - j, n - m + 1 + j, n - m + 1 + i - j, m - 1 - j, m - i + j];
    let mut den = BigInt::one();
    for d in denominators {
        match signed_factorial(d) {
            Some(f) => den *= f,
            None => return Rational::zero(),
        }
    }
    let mut num = factorial(dims.n) * factorial(dims.m) * BigInt::from(2 * n * j + j - n * i + n - m + 1);
    if i.rem_euclid(2) == 1 {
        num = -num;
    }
    Rational::new(num, den)
}

/// Precomputed `(i + alpha)! c_ij` over the support `0 <= j < m`, `j <= i <= 2m-2`.
struct Kernel {
    dims: ChannelDims,
    // weighted[i][j] = (i + alpha)! * c_ij
    weighted: Vec<Vec<Rational>>,
    c: Vec<Vec<Rational>>,
}

impl Kernel {
    fn new(dims: ChannelDims) -> Self {
        let rows = 2 * dims.m - 1;
        let mut c = vec![vec![Rational::zero(); dims.m]; rows];
        let mut weighted = c.clone();
        for (i, (c_row, w_row)) in c.iter_mut().zip(weighted.iter_mut()).enumerate() {
            let fact = Rational::from_integer(factorial(i + dims.alpha()));
            for j in 0..dims.m.min(i + 1) {
                let cij = coeff_c(i as i64, j as i64, dims);
                w_row[j] = &cij * &fact;
                c_row[j] = cij;
            }
        }
        Self { dims, weighted, c }
    }

    fn max_i(&self) -> usize {
        2 * self.dims.m - 2
    }

    /// `sum_{j<m} sum_{i >= max(j, lower)}^{2m-2} (i+alpha)! c_ij`.
    fn weighted_tail(&self, lower: i64) -> Rational {
        let mut acc = Rational::zero();
        for j in 0..self.dims.m {
            let start = lower.max(j as i64) as usize;
            for i in start..=self.max_i() {
                acc += &self.weighted[i][j];
            }
        }
        acc
    }

    fn a(&self, k: usize) -> Rational {
        let alpha = self.dims.alpha();
        if k == 0 {
            let mut acc = Rational::zero();
            for j in 0..self.dims.m {
                for i in j..=self.max_i() {
                    let w = &self.weighted[i][j];
                    if !w.is_zero() {
                        acc += w * harmonic(i + alpha);
                    }
                }
            }
            return acc;
        }
        let kf = factorial(k);
        let lower = k as i64 - alpha as i64 + 1;
        let mut acc = Rational::zero();
        for j in 0..self.dims.m {
            let start = lower.max(j as i64) as usize;
            for i in start..=self.max_i() {
                let cij = &self.c[i][j];
                if cij.is_zero() {
                    continue;
                }
                // i >= k - alpha + 1 keeps i + alpha - k >= 1
                let diff = factorial(i + alpha) - &kf * factorial(i + alpha - k);
                acc += cij * Rational::from_integer(diff);
            }
        }
        let scale = Rational::new(
            if k.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() },
            BigInt::from(k) * kf,
        );
        acc * scale
    }

    fn b_general(&self, k: usize) -> Rational {
        let lower = k as i64 - self.dims.alpha() as i64;
        let sum = self.weighted_tail(lower);
        b_prefactor(k) * sum
    }

    fn b(&self, k: usize) -> Rational {
        if k <= self.dims.alpha() {
            b_prefactor(k) * Rational::from_integer(BigInt::from(self.dims.m))
        } else {
            self.b_general(k)
        }
    }
}

/// `-(-1)^k / k!`
fn b_prefactor(k: usize) -> Rational {
    let sign = if k.is_multiple_of(2) { -BigInt::one() } else { BigInt::one() };
    Rational::new(sign, factorial(k))
}

fn check_index(k: usize, len: usize) -> Result<()> {
    if k < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: k,
            range: if len == 0 {
                "empty".to_string()
            } else {
                format!("0..={}", len - 1)
            },
        })
    }
}

/// Coefficient `a_k` of the polynomial part, `0 <= k <= n + m - 3`.
///
/// `a_0` carries the harmonic numbers `H_{i+n-m}` that come from the digamma
/// limit of the `k >= 1` formula.
pub fn coeff_a(k: usize, dims: ChannelDims) -> Result<Rational> {
    check_index(k, dims.a_len())?;
    Ok(Kernel::new(dims).a(k))
}

/// Coefficient `b_k` multiplying `e^t Ei(-t) t^k`, `0 <= k <= n + m - 2`.
pub fn coeff_b(k: usize, dims: ChannelDims) -> Result<Rational> {
    check_index(k, dims.b_len())?;
    Ok(Kernel::new(dims).b(k))
}

/// `b_k` through the reordered double sum
/// `-(-1)^k/k! sum_j sum_{i >= k-n+m} (i+n-m)! c_ij`, valid for every `k`.
///
/// For `k <= n - m` this must collapse to the closed branch `-(-1)^k m / k!`.
pub fn coeff_b_double_sum(k: usize, dims: ChannelDims) -> Result<Rational> {
    check_index(k, dims.b_len())?;
    Ok(Kernel::new(dims).b_general(k))
}

/// The t-free part of the `ln t` cancellation: `sum_i sum_j (i+n-m)! c_ij`,
/// which equals `m` exactly.
pub fn log_cancellation_sum(dims: ChannelDims) -> Rational {
    Kernel::new(dims).weighted_tail(0)
}

/// The full set of `a_k` and `b_k` for one channel size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct CoefficientTable {
    dims: ChannelDims,
    a: Vec<Rational>,
    b: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    m: usize,
    n: usize,
    #[serde(with = "serde_rational_vec")]
    a: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    b: Vec<Rational>,
}

impl From<CoefficientTable> for TableRepr {
    fn from(t: CoefficientTable) -> Self {
        TableRepr {
            m: t.dims.m,
            n: t.dims.n,
            a: t.a,
            b: t.b,
        }
    }
}

impl TryFrom<TableRepr> for CoefficientTable {
    type Error = Error;

    fn try_from(r: TableRepr) -> Result<Self> {
        if r.m > r.n {
            return Err(Error::Table(format!("expected m <= n, got m={}, n={}", r.m, r.n)));
        }
        let dims = ChannelDims::new(r.m, r.n)?;
        if r.a.len() != dims.a_len() || r.b.len() != dims.b_len() {
            return Err(Error::Table(format!(
                "{dims} needs {} a-coefficients and {} b-coefficients, got {} and {}",
                dims.a_len(),
                dims.b_len(),
                r.a.len(),
                r.b.len()
            )));
        }
        Ok(CoefficientTable { dims, a: r.a, b: r.b })
    }
}

impl CoefficientTable {
    pub fn dims(&self) -> ChannelDims {
        self.dims
    }

    pub fn a(&self) -> &[Rational] {
        &self.a
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Table(e.to_string()))
    }
}

/// Computes the exact coefficient table for `dims`.
///
/// # Panics
///
/// Panics if the `ln t` cancellation sum differs from `m`; that identity holds
/// for every valid size, so a mismatch means the kernel itself is wrong.
pub fn build_table(dims: ChannelDims) -> CoefficientTable {
    let kernel = Kernel::new(dims);
    let consistency = kernel.weighted_tail(0);
    assert!(
        consistency == Rational::from_integer(BigInt::from(dims.m)),
        "coefficient kernel for {dims} is inconsistent: sum (i+n-m)! c_ij = {consistency}, expected {}",
        dims.m
    );
    let a = (0..dims.a_len()).map(|k| kernel.a(k)).collect();
    let b = (0..dims.b_len()).map(|k| kernel.b(k)).collect();
    CoefficientTable { dims, a, b }
}

static TABLE_CACHE: OnceLock<Mutex<HashMap<ChannelDims, Arc<CoefficientTable>>>> = OnceLock::new();

/// [`build_table`] memoized for the lifetime of the process.
pub fn cached_table(dims: ChannelDims) -> Arc<CoefficientTable> {
    let cache = TABLE_CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&dims) {
        return Arc::clone(t);
    }
    // build outside the lock; a racing duplicate build is harmless
    let table = Arc::new(build_table(dims));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    Arc::clone(guard.entry(dims).or_insert(table))
}

/// Least common multiple of every coefficient denominator.
pub fn common_denominator(table: &CoefficientTable) -> BigInt {
    use num_integer::Integer;
    table
        .a
        .iter()
        .chain(table.b.iter())
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
        .abs()
}
