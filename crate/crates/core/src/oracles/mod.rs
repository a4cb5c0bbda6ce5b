//! Independent ground truths for the closed form: numerical quadrature of
//! the integral representation, the one-point eigenvalue density, Monte Carlo
//! over random channel matrices, and numerical checks of the intermediate
//! identities the closed form rests on.

pub mod quadrature;
pub mod density;
pub mod linalg;
pub mod montecarlo;
pub mod identities;
