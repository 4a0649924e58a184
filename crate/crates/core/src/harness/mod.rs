//! Verification harness: test statistics, study drivers, result export,
//! and the numbered self-test gates shared by the library tests and the
//! command-line tool.

pub mod bumps;
pub mod config;
pub mod report;
pub mod selftest;
pub mod stats;
pub mod studies;

pub use bumps::{bump_suite, BumpFn};
pub use config::{ExperimentConfig, StudyKind, WaitingLawChoice};
pub use report::{
    config_sha256, write_outputs, Provenance, ResultRow, ResultTable, StudyOutput,
};
pub use selftest::{run_all, run_criterion, CriterionReport, CRITERION_COUNT, SELFTEST_SEED};
pub use studies::{normalization_window, run_study, KS_GATE};
pub use stats::{
    chi_square_threshold, kolmogorov_sf, ks_distance_to_cdf, ks_two_sample, occupation_chi_square,
};
