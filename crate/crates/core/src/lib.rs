//! Numerics for the spherical principal and complementary series of SL(2,R).
//!
//! The crate realizes the K-fixed vector of `D_lambda` in the circle and line
//! models, continues it analytically to complex group elements whose
//! transformed quadratic form has a positive definite real part, and measures
//! the resulting vectors with L2, Sobolev and invariant (orbit infimum) norms.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`algebra`] | real/complex unimodular matrices, Iwasawa factors, action on forms |
//! | [`geometry`] | point pairs in `P1 x P1`, the domain `Q+`, `U = G I K_C` factorization |
//! | [`repmodels`] | circle and line models, group action, model transfer, Fourier analysis |
//! | [`continuation`] | continued vectors `R^{(lambda-1)/2}`, the `Q_eps` family, spherical functions |
//! | [`norms`] | L2, complementary pairing, Sobolev norms, Casimir check |
//! | [`invnorm`] | seminorm infima, orbit bounds, dyadic certificates |
//! | [`spectral`] | norm sweeps, lower bounds, synthetic spectra, bound propagation |
//! | [`cusp`] | heights, horocycle diameters and fiber weights for `SL(2,Z)` |
//! | [`config`] | sweep configuration and spectrum file parsing |
//! | [`acceptance`] | the numbered acceptance checks shared by tests and the CLI |

pub mod acceptance;
pub mod algebra;
pub mod config;
pub mod continuation;
pub mod cusp;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod invnorm;
pub mod jet;
pub mod norms;
pub mod quad;
pub mod repmodels;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
