use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qbench_core::benchmarks::Family;
use qbench_core::distributed::TransportKind;
use qbench_core::noise::NoiseSpec;
use qbench_core::GridTopology;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Serial,
    /// Statevector split over `workers` ranks.
    Partitioned,
}

/// One width sweep. Field names follow the benchmark parameter tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub benchmark: Family,
    pub min_qubits: usize,
    pub max_qubits: usize,
    pub skip_qubits: usize,
    /// Upper bound on instances per width; a family with fewer distinct
    /// problems at a width uses all of them.
    pub max_circuits: usize,
    pub num_shots: u64,
    /// Mid-circuit-measurement variants of the inverse QFT.
    pub dynamic: bool,
    /// Ansatz settings, used by `qrl-ansatz` only.
    pub num_layers: usize,
    /// Encoded state for every ansatz instance; distinct random states if unset.
    pub init_state: Option<u64>,
    /// Measured ansatz qubits; the full width if unset.
    pub n_measurements: Option<usize>,
    pub data_reupload: bool,
    pub nonoise: bool,
    pub noise: NoiseSpec,
    pub noise_seed: u64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub engine: Engine,
    pub workers: usize,
    pub transport: TransportKind,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            benchmark: Family::Qft1,
            min_qubits: 3,
            max_qubits: 10,
            skip_qubits: 1,
            max_circuits: 3,
            num_shots: 1000,
            dynamic: false,
            num_layers: 5,
            init_state: None,
            n_measurements: None,
            data_reupload: true,
            nonoise: true,
            noise: NoiseSpec::reference(false),
            noise_seed: 0,
            grid_rows: 12,
            grid_cols: 12,
            engine: Engine::Serial,
            workers: 4,
            transport: TransportKind::Channel,
            seed: 0,
            output_dir: PathBuf::from("qbench-out"),
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, CliError> {
        toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn widths(&self) -> Vec<usize> {
        (self.min_qubits..=self.max_qubits).step_by(self.skip_qubits.max(1)).collect()
    }

    pub fn grid(&self) -> GridTopology {
        GridTopology::new(self.grid_rows, self.grid_cols)
    }

    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.min_qubits > self.max_qubits {
            return bad(format!("min_qubits {} exceeds max_qubits {}", self.min_qubits, self.max_qubits));
        }
        if self.skip_qubits == 0 {
            return bad("skip_qubits must be at least 1".into());
        }
        if self.min_qubits < self.benchmark.min_width() {
            return bad(format!("{} needs at least {} qubits", self.benchmark, self.benchmark.min_width()));
        }
        if self.max_circuits == 0 || self.num_shots == 0 {
            return bad("max_circuits and num_shots must be positive".into());
        }
        if self.benchmark == Family::QrlAnsatz && self.num_layers == 0 {
            return bad("num_layers must be at least 1".into());
        }
        if let Some(m) = self.n_measurements {
            if m == 0 || m > self.min_qubits {
                return bad(format!("n_measurements {m} must lie in 1..={}", self.min_qubits));
            }
        }
        if let Some(s) = self.init_state {
            if self.min_qubits < 64 && s >> self.min_qubits != 0 {
                return bad(format!("init_state {s} does not fit in {} qubits", self.min_qubits));
            }
        }
        if !self.nonoise {
            self.noise.check().map_err(|e| CliError::Config(e.to_string()))?;
            if self.engine == Engine::Partitioned {
                return bad("the partitioned engine runs noiseless circuits only; set nonoise".into());
            }
        }
        if self.max_qubits > self.grid_rows * self.grid_cols {
            return bad(format!("{} qubits do not fit a {}x{} grid", self.max_qubits, self.grid_rows, self.grid_cols));
        }
        if self.engine == Engine::Partitioned && !self.workers.is_power_of_two() {
            return bad(format!("workers must be a power of two, got {}", self.workers));
        }
        Ok(())
    }
}
