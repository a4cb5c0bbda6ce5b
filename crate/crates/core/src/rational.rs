//! Exact integer and rational combinatorics.
//!
//! Coefficients of the closed form are built from factorial quotients whose
//! intermediate terms overflow 64-bit integers around `m + n = 22`, so all of
//! it is carried in arbitrary precision.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision signed rational, always kept in lowest terms.
pub type Rational = BigRational;

static FACTORIALS: RwLock<Vec<BigInt>> = RwLock::new(Vec::new());

/// `k!` as an exact integer. Values are memoized process-wide.
pub fn factorial(k: usize) -> BigInt {
    {
        let table = FACTORIALS.read().unwrap_or_else(|e| e.into_inner());
        if let Some(v) = table.get(k) {
            return v.clone();
        }
    }
    let mut table = FACTORIALS.write().unwrap_or_else(|e| e.into_inner());
    if table.is_empty() {
        table.push(BigInt::one());
    }
    while table.len() <= k {
        let next = table.last().unwrap() * BigInt::from(table.len());
        table.push(next);
    }
    table[k].clone()
}

/// `1/k!` with the gamma-pole convention `1/(-j)! = 0` for negative arguments.
pub fn recip_factorial(k: i64) -> Rational {
    if k < 0 {
        Rational::zero()
    } else {
        Rational::new(BigInt::one(), factorial(k as usize))
    }
}

/// Binomial coefficient `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let (n, k) = (n as usize, k as usize);
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Serde adapter writing rationals as canonical `"p/q"` strings (`"p"` when `q = 1`).
pub mod serde_rational_vec {
    use super::Rational;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| r.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| {
                s.trim()
                    .parse::<Rational>()
                    .map_err(|e| D::Error::custom(format!("bad rational {s:?}: {e}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_small_values() {
        let expect = [1u64, 1, 2, 6, 24, 120, 720, 5040];
        for (k, v) in expect.iter().enumerate() {
            assert_eq!(factorial(k), BigInt::from(*v));
        }
    }

    #[test]
    fn factorial_beyond_u64() {
        // 25! = 15511210043330985984000000
        assert_eq!(
            factorial(25).to_string(),
            "15511210043330985984000000"
        );
    }

    #[test]
    fn negative_reciprocal_factorial_is_zero() {
        assert!(recip_factorial(-1).is_zero());
        assert!(recip_factorial(-7).is_zero());
        assert_eq!(recip_factorial(3), Rational::new(1.into(), 6.into()));
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert!(binomial(5, 6).is_zero());
        assert!(binomial(5, -1).is_zero());
        assert!(binomial(-1, 0).is_zero());
    }

    #[test]
    fn rational_display_is_canonical() {
        let r = Rational::new(BigInt::from(20), BigInt::from(-6));
        assert_eq!(r.to_string(), "-10/3");
        let one = Rational::new(BigInt::from(4), BigInt::from(4));
        assert_eq!(one.to_string(), "1");
    }
}
