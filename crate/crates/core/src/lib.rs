//! Coefficient selection for compute-and-forward over the Gaussian integers
//! ℤ[i] and the Eisenstein integers ℤ[ω].
//!
//! Given a channel `h` and an SNR, the selectors search for the nonzero
//! integer vector `a` maximizing the computation rate.

pub mod error;
pub mod flops;
pub mod geometry;
pub mod random;
pub mod rate;
pub mod rings;
pub mod selectors;
pub mod thresholds;

pub use error::{Error, Result};
pub use flops::FlopCounter;
pub use rate::{Channel, CoeffVector, RateResult};
pub use rings::{ComplexScalar, RingElement, RingId};
pub use selectors::SelectionResult;
pub use thresholds::{Gamma, ThresholdTable};
