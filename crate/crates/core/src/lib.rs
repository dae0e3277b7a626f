//! Tooling for studying how training on disaggregated annotations (human
//! label variation) interacts with group fairness.
//!
//! The crate covers the whole pipeline at desk scale:
//!
//! - [`annotations`]: multi-annotator datasets, soft labels with temperature,
//!   majority vote, repeated labels and Krippendorff's alpha.
//! - [`metrics`]: soft F1, soft micro F1 and the per class/group fairness matrix.
//! - [`aggregation`]: weighted generalised means, configuration sampling and
//!   exponent levels.
//! - [`stats`]: paired bootstrap tests, configuration sweeps and fraction summaries.
//! - [`training`]: a hashed bag-of-words linear classifier trained with one of
//!   five objectives (MV, ReL, SL, JSD, SmF1).
//! - [`synth`]: a generator of datasets where minority annotations carry a
//!   group-correlated signal.

pub mod aggregation;
pub mod annotations;
mod error;
pub mod metrics;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod training;

pub use error::{Error, Result};
