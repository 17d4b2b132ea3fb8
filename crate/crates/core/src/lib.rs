//! Construction and evaluation of Pareto-optimal catastrophe risk pools over
//! independent heavy-tailed losses.
//!
//! The crate is organised bottom-up:
//!
//! * [`distributions`]: Fréchet primitives used as simulation ground truth.
//! * [`pool`]: layer losses, premiums, asymptotic diversification ratios and
//!   the asymptotically optimal feasible box.
//! * [`evt`]: Hill, pooled-tail and scale estimators plus EVT quantile
//!   extrapolation.
//! * [`hypothesis`]: regular-variation, tail-equivalence and correlation tests.
//! * [`montecarlo`]: simulated and empirical diversification-ratio estimators.
//! * [`optimize`]: metaheuristics and the fairness-controlled comparison harness.
//! * [`ingest`]: claim-export parsing and monthly aggregation.

pub mod distributions;
pub mod error;
pub mod evt;
pub mod hypothesis;
pub mod ingest;
pub mod montecarlo;
pub mod optimize;
pub mod pool;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
