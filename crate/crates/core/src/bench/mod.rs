//! Random graph families, the paired benchmark runner and its metrics.

mod generators;
mod metrics;
mod suite;

pub use generators::{gen_graph, GraphType, BA_ATTACH, ER_EDGE_PROB};
pub use metrics::{
    aggregate, aggregate_csv, parse_csv, relative_rate, rows_to_csv, summary_table, Aggregate, RateSummary, ResultRow,
    CSV_HEADER, SCHEMA_VERSION,
};
pub use suite::{
    config_hash, instance_seed, run_instances, run_suite, run_to_dir, BenchConfig, InstanceResult, RunKey, RunOptions,
    RunReport, DEFAULT_REPEATS,
};
