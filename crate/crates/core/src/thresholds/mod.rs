//! Second moments, hypothesis-testing tradeoffs, and the closed-form or
//! optimized thresholds for every model.

pub mod moments;
pub mod synch;
pub mod wishart;

pub use moments::*;
pub use synch::*;
pub use wishart::*;
