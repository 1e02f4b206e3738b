//! Growth-optimal portfolios under a drawdown constraint.
//!
//! The constrained optimum is obtained pathwise from the unconstrained
//! numeraire by the Azema-Yor transform
//! `aX = alpha * M^(1-alpha) + (1-alpha) * X * M^(-alpha)`, `M` the running
//! maximum. The crate provides the path primitives, a simulated market with
//! its numeraire, the transform and its inverse, relative-return diagnostics
//! and the long-horizon experiments, all reproducible from a seed.

pub mod error;
pub mod horizon;
pub mod io;
pub mod market;
pub mod par;
pub mod path;
pub mod returns;
pub mod rng;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use market::{MarketModel, NumerairePath, ProportionRule, SimBatch, SimulatedPath};
pub use path::{SampledPath, StopIndex, TimeGrid};
pub use stats::MCEstimate;
pub use transform::{az_forward, az_inverse, kelly_fraction, DrawdownParam};
