//! Relativistic f-divergences on finite distributions.
//!
//! The crate is organised around five layers:
//!
//! * [`loss`]: the concave loss family (`sgan`, `lsgan`, `hinge`) and its calculus.
//! * [`estimators`]: mini-batch estimators of every objective for a fixed critic,
//!   including the all-pairs U-statistic for the paired objective and the
//!   variance-corrected least-squares estimators.
//! * [`oracle`]: exact divergences by concave maximisation over a critic table,
//!   1-D Wasserstein-1, witness critics and property checkers.
//! * [`bias_lab`]: exact enumeration and Monte Carlo measurement of estimator
//!   bias and variance.
//! * [`dynamics`]: a full-batch critic/generator game on a fixed support.

pub mod bias_lab;
pub mod dynamics;
mod error;
pub mod estimators;
pub mod instances;
pub mod loss;
pub mod oracle;
mod sum;
mod variant;

pub use error::{Error, Result};
pub use loss::{ConcaveLoss, LossKind};
pub use variant::Variant;
