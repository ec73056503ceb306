//! Learning a hidden linear allocation objective from an operator's decisions.
//!
//! The crate simulates an operator who repeatedly solves a resource allocation
//! linear program under preferences the learner cannot see. The learner turns
//! every decision labeled "good" into homogeneous half-space cuts on the
//! preference vector and keeps a max-margin point estimate inside the
//! resulting cone. Metrics measure how quickly the learner's own decisions
//! coincide with the operator's, and how effectiveness degrades when the
//! operator's preferences change in steps.
//!
//! Module map:
//! - [`lp`]: forward LP (dense tableau simplex, vertex enumeration)
//! - [`inverse`]: cut generation and the windowed max-margin estimator
//! - [`operator`]: simulated decision-maker and the good/bad evaluation
//! - [`scenario`]: situation generator and preference schedules
//! - [`metrics`]: effectiveness, learning curves, adaptation period, frontier
//! - [`experiment`]: config, replication driver, CSV/manifest/plot output

pub mod error;
pub mod experiment;
pub mod inverse;
pub mod lp;
pub mod metrics;
pub mod operator;
pub mod plot;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use inverse::{Cut, CutSet, Label, Observation, PreferenceEstimate};
pub use lp::{LpInstance, LpSolution, LpStatus, UnitPreference, Vertex};
