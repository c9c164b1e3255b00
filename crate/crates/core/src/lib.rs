//! Nonlinear global Fréchet regression for random objects in metric spaces.
//!
//! Predictors and responses are [`MetricObject`]s. A [`FittedModel`] turns a
//! kernel on the predictor space into observation weights and predicts by
//! projecting the weighted average of responses back onto the response space.
//! [`simgen`] holds seeded data generators and the replication harness.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod metric;
pub mod projections;
pub mod regression;
pub mod simgen;
pub mod special;

pub use error::{Error, Result};
pub use kernel::{bandwidth_heuristic, build_gram, GramSystem, KernelKind, KernelSpec, DEFAULT_EPSILON, EPSILON_GRID};
pub use metric::{MetricObject, ObjectKind, ProbGrid, QuantileObject};
pub use projections::ProjectionConfig;
pub use regression::{gcv_tune, glfr_weights, FittedModel, Prediction};
