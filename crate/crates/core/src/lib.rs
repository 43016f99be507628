//! Utility-based evaluation of binary classifiers.
//!
//! A classifier is scored by its expected utility under a 2×2 utility matrix
//! rather than by a fixed metric. The crate provides the utility and
//! confusion-matrix types, the common metrics, a test of whether a metric
//! ranks classifiers like some utility yield, the misranking Monte Carlo
//! experiment and utility-aware ROC analysis.

pub mod compliance;
pub mod confusion;
pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod roc;
pub mod sampling;
pub mod utility;

pub use compliance::{compliance_verdict, ComplianceReport, Verdict};
pub use confusion::ConfusionMatrix;
pub use error::{Error, Result};
pub use metrics::{metric_by_name, registry, MetricDescriptor, MetricKind};
pub use montecarlo::{run_pairwise_experiment, ExperimentConfig, ExperimentReport};
pub use roc::{OperatingContext, RocCurve, RocPoint};
pub use sampling::{substream, UtilityPrior};
pub use utility::{utility_yield, ClassDistribution, UtilityCoordinates, UtilityMatrix};
