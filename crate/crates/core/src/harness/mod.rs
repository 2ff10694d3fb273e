//! Synthetic workloads, the brute-force oracle, benchmark orchestration and
//! report output.

mod bench;
mod oracle;
mod report;
mod workload;

pub use bench::{
    load_bench_config, run_benchmark, BenchConfig, BenchMethod, BenchmarkReport, Recommendation, ReportRow,
    TraceSummary, REPORT_SCHEMA_VERSION,
};
pub use oracle::{brute_force_front, oracle_candidates, ORACLE_LIMIT};
pub use report::{resolve_out_dir, round_sig, write_report, ReportFormat, CSV_COLUMNS, OUT_DIR_ENV};
pub use workload::{gen_workload, load_scenario, load_workload_spec, CardinalityOverride, Scenario, Workload, WorkloadSpec};
