//! Spiked random-matrix models and their detection thresholds.
//!
//! ```
//! use spiked::detect::{pca_detect, Rule};
//! use spiked::models::sample_gaussian_wigner;
//! use spiked::priors::SpikePrior;
//!
//! let bundle = sample_gaussian_wigner(2.0, &SpikePrior::Spherical, 300, 1)?;
//! assert!(pca_detect(&bundle, Rule::Asymptotic)?.is_spiked());
//! # Ok::<(), spiked::Error>(())
//! ```

pub mod conditioning;
pub mod detect;
pub mod error;
pub mod experiment;
pub mod groups;
pub mod ids;
pub mod linalg;
pub mod models;
pub mod noise;
pub mod numeric;
pub mod output;
pub mod plot;
pub mod priors;
pub mod report;
pub mod rng;
pub mod thresholds;

pub use error::{Error, Result};
