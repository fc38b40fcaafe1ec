//! Scenario suite, benchmark runner, trajectory metrics, SVG plots and the
//! command implementations of the `polarnav` tool.

pub mod commands;
pub mod config;
pub mod gradcheck;
pub mod metrics;
pub mod render;
pub mod report;
pub mod scenarios;
pub mod stack;

pub use config::{ConfigError, HarnessConfig};
pub use metrics::{EpisodeMetrics, LogRow, TrajectoryLog};
pub use report::{run_benchmark, run_logged, BenchmarkReport, CellSummary, RunRecord};
pub use stack::{LocalPlanner, NavigationStack, PlannerKind};
