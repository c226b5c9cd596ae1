//! Optimal publication rules for research findings.
//!
//! * [`gaussian`]: `φ`, `Φ`, `Φ⁻¹` and the truncated-moment factor `Υ`.
//! * [`design`]: threshold rules for verifiable designs with research costs.
//! * [`manipulation`]: smoothed cutoff rules when results can be biased.
//! * [`sim`]: seeded Monte Carlo of researcher populations.
//! * [`calibration`]: parameter estimates from p-value corpora.
//! * [`tables`]: the calibrated table rows and figure series.

pub mod calibration;
pub mod design;
pub mod error;
pub mod gaussian;
pub mod manipulation;
pub mod numeric;
pub mod sim;
pub mod tables;

pub use error::{Error, Result};
