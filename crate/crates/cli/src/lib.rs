//! Sweep orchestration, persistence and reporting behind the `qbench`
//! command.

pub mod cli;
pub mod config;
pub mod sweep;
pub mod verify;

use thiserror::Error;

pub use config::{Engine, SweepConfig};
pub use sweep::{emit_reports, load_instances, load_manifest, run_sweep, verify_run, InstanceRecord, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("benchmark failure: {0}")]
    Benchmark(String),
}

impl CliError {
    /// 2 for bad input, 1 for everything that went wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Benchmark(_) => 1,
        }
    }
}

macro_rules! benchmark_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Benchmark(e.to_string())
            }
        }
    )*};
}

benchmark_errors!(
    qbench_core::benchmarks::BenchmarkError,
    qbench_core::sim::SimError,
    qbench_core::circuit::CircuitError,
    qbench_core::noise::NoiseError,
    qbench_core::distributed::DistError,
    qbench_core::metrics::MetricsError
);

impl From<qbench_qrl::QrlError> for CliError {
    fn from(e: qbench_qrl::QrlError) -> Self {
        match e {
            qbench_qrl::QrlError::Config(m) => CliError::Config(m),
            other => CliError::Benchmark(other.to_string()),
        }
    }
}
