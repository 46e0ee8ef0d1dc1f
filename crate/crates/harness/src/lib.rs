//! Training harness for the safe-RL laboratory: configuration with
//! per-algorithm defaults, the deterministic training loop, evaluation,
//! metric logs, normalized reporting and benchmark suites.

pub mod analysis;
pub mod config;
pub mod eval;
pub mod joint_ckpt;
pub mod metrics;
pub mod report;
pub mod suites;
pub mod trainer;

pub use analysis::{classify_safety, normalize_metrics, SafetyClassification, SafetyThresholds};
pub use config::{load_config, load_config_with_overrides, AlgoId, ConfigError, RunConfig};
pub use eval::evaluate;
pub use metrics::{read_metrics, MetricsRecord};
pub use report::{build_report, emit_report, Report};
pub use trainer::{train, TrainError, TrainOutcome};
