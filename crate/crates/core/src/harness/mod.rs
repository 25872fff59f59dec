//! Configuration, drop simulation, campaigns and reports.

pub mod campaign;
pub mod config;
pub mod drop;
pub mod metrics;
pub mod report;

pub use campaign::{run_campaign, run_comparison, Campaign, Comparison, ComparisonSummary, Delta};
pub use config::{load_config, Mode, QamInterference, Scenario, SimConfig};
pub use drop::{DropContext, DropResult, UserRecord};
pub use metrics::{empirical_cdf, percentile, rate_metrics, Estimate, RateMetrics};
pub use report::{write_campaign, write_comparison, TIMESTAMP_FIELD};
