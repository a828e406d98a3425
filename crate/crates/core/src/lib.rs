//! Self-paced learning with implicit regularizers.

pub mod error;
pub mod numerics;
pub mod regularizers;
pub mod spl;
pub mod matfact;
pub mod classify;
pub mod mvc;
pub mod evalmetrics;

pub use error::{Error, Result};
pub use evalmetrics::{ClusterLabels, MetricsReport};
pub use numerics::Matrix;
pub use regularizers::{ExplicitKind, ExplicitRegularizer, ImplicitRegularizer, PaceParameter, Regularizer};
pub use spl::{hq_fit, spl_ir_fit, LambdaInit, PaceSchedule, SplFit, SplTrace, WeightedModel};
