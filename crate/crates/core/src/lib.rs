//! Exact ergodic mutual information of `m x n` MIMO Rayleigh fading channels.
//!
//! `E[ln det(I_m + H H'/t)]` with i.i.d. `CN(0, 1)` entries of `H` and inverse
//! SNR `t` is a polynomial in `t` plus `e^t Ei(-t)` times a second polynomial,
//! both with rational coefficients. This crate computes those coefficients
//! exactly, evaluates and renders the result, and checks it against
//! quadrature of the eigenvalue-density integral and against Monte Carlo.
//!
//! ```
//! use ergodic_mi::{build_table, evaluate_closed_form, render_expression, ChannelDims};
//!
//! let table = build_table(ChannelDims::new(2, 2)?);
//! assert_eq!(render_expression(&table), "1 - t - e^t Ei(-t) (2 + t^2)");
//! let mi = evaluate_closed_form(&table, 1.0)?;
//! assert!((mi.value - 1.78904).abs() < 1e-5);
//! # Ok::<(), ergodic_mi::Error>(())
//! ```

// Reference constants are quoted at the precision they were computed to.
#![allow(clippy::excessive_precision)]

pub mod coefficients;
pub mod error;
pub mod evaluator;
pub mod oracles;
pub mod rational;
pub mod special;
pub mod verify;

pub use coefficients::{
    build_table, cached_table, coeff_a, coeff_b, coeff_c, ChannelDims, CoefficientTable,
};
pub use error::{Error, Result};
pub use evaluator::{
    evaluate_closed_form, render_expression, sweep, EvaluationResult, Method, SnrScale,
};
pub use oracles::density::{one_point_density, telatar_quadrature, DensityForm};
pub use oracles::identities::{a_pq_check, lemma1_check, lnt_identity_check};
pub use oracles::montecarlo::{monte_carlo_mi, McReport};
pub use oracles::quadrature::QuadratureConfig;
pub use rational::Rational;
