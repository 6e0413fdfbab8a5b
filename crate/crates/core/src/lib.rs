//! Phone-slip detection pipeline: synthetic trace generation, feature
//! extraction, database validation, four from-scratch classifiers and the
//! pairwise evaluation harness.
//!
//! All numeric types are generic over [`Scalar`] (implemented for `f32`
//! and `f64`); the aliases at the crate root fix the default `f64`
//! instantiation used by the CLI and the tests.

// `!(x > y)` guards reject NaN along with out-of-range values; the
// suggested `x <= y` would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case;
pub mod error;
pub mod eval;
pub mod featuredb;
pub mod features;
pub mod fft;
pub mod ingest;
pub mod nnets;
pub mod scalar;
pub mod seed;
pub mod synth;
pub mod trace;

pub use case::CaseLabel;
pub use error::{Error, Result};
pub use eval::{PerformanceTable, SplitPlan};
pub use nnets::{GaConfig, NetworkKind, TrainConfig};
pub use scalar::Scalar;

/// Default-precision instantiations of the generic pipeline types.
pub type SensorTrace = trace::SensorTrace<f64>;
pub type RawTrace = trace::RawTrace<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type FeatureRow = featuredb::FeatureRow<f64>;
pub type FeatureMatrix = featuredb::FeatureMatrix<f64>;
pub type StandardizationParams = featuredb::StandardizationParams<f64>;
pub type CorrelationReport = featuredb::CorrelationReport<f64>;
pub type MotionModelParams = synth::MotionModelParams<f64>;
pub type NetworkModel = nnets::NetworkModel<f64>;
