//! Numerical toolkit for Ikehara-type Tauberian asymptotics of positive,
//! non-increasing functions.
//!
//! A function `phi` whose one-sided transform `∫ e^{zt} phi(t) dt` admits the
//! representation `F(z)/(mu - z)^j + H(z)` near the abscissa `mu` decays like
//! `F(mu)/Γ(j) · t^{j-1} e^{-mu t}`. The crate evaluates the transforms
//! involved, predicts the law, computes the effective error machinery
//! (`G`, `eta`, `rho`) and checks the hypotheses numerically against a corpus
//! of closed-form exemplars.
//!
//! Modules:
//! - [`model`]: decay functions, singularity models, reports.
//! - [`quadrature`]: adaptive Gauss–Kronrod transforms on `[0, ∞)`.
//! - [`specialfn`]: Γ, incomplete Γ, `g_j`, `h_j` and its regime bounds.
//! - [`engine`]: prediction, `G`/`eta`/`rho`, envelope and condition checkers.
//! - [`corpus`]: exemplar families with exact transforms.
//! - [`estimator`]: fitting `(mu, j, D)` from samples and ratio tables.

// `!(x > 0.0)` deliberately rejects NaN; coefficient tables keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod corpus;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod model;
pub mod quadrature;
pub mod specialfn;

pub use error::{Error, Result};
pub use num_complex::Complex64;
