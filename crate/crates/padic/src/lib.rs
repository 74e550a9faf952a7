//! Finite-precision p-adic arithmetic over Q_p, ultrametric matrix analysis,
//! and a certified Neumann-series resolvent engine.
//!
//! The crate verifies, numerically and with machine-checkable certificates,
//! both directions of an equivalence between power-boundedness of a matrix
//! and a growth bound on powers of `R(mu, A) - I`, where
//! `R(mu, A) = (I - mu A)^{-1}` is built as the Neumann series
//! `sum_j mu^j A^j`.
//!
//! Precision is tracked honestly: every scalar carries the number of base-p
//! digits it is certified to, series results carry a total error exponent
//! combining the analytic ultrametric tail with accumulated rounding, and
//! comparisons that cannot be decided at the certified precision surface as
//! errors instead of silently passing.

pub mod context;
pub mod criterion;
pub mod error;
pub mod gen;
pub mod identities;
pub mod matfile;
pub mod matrix;
pub mod oracle;
pub mod scalar;
pub mod selftest;
pub mod series;
pub mod valuation;

pub use context::PadicContext;
pub use error::{Error, Result};
pub use matrix::PadicMatrix;
pub use scalar::PadicScalar;
pub use valuation::{Val, ValInterval};
