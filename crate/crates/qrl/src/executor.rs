use std::time::Instant;

use serde::{Deserialize, Serialize};

use qbench_core::benchmarks::{build_qrl_ansatz, AnsatzConfig, Entangler};
use qbench_core::noise::{lower_for_noise, NoiseModel};
use qbench_core::{GridTopology, Simulator64};

use crate::QrlError;

/// How `<Z>` is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "shots")]
pub enum QMode {
    /// Read off the final statevector.
    Exact,
    /// Averaged over this many samples.
    Shots(u64),
}

/// Ansatz shape shared by every query of one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzShape {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub n_measurements: usize,
    pub data_reupload: bool,
}

impl AnsatzShape {
    pub fn param_count(&self) -> usize {
        AnsatzConfig::param_count(self.n_qubits, self.n_layers)
    }

    pub fn config(&self, params: &[f64], state: usize) -> AnsatzConfig {
        AnsatzConfig {
            n_qubits: self.n_qubits,
            n_layers: self.n_layers,
            n_measurements: self.n_measurements,
            data_reupload: self.data_reupload,
            input_state: state as u64,
            entangler: Entangler::Chain,
            params: params.to_vec(),
        }
    }
}

/// Runs ansatz queries and counts them. One evaluation is one ansatz
/// execution, whatever the shot count.
pub struct QExecutor {
    pub shape: AnsatzShape,
    pub mode: QMode,
    sim: Simulator64,
    noise: Option<(NoiseModel, GridTopology)>,
    seed: u64,
    pub evaluations: u64,
    pub quantum_secs: f64,
}

impl QExecutor {
    pub fn new(shape: AnsatzShape, mode: QMode, seed: u64) -> Self {
        Self { shape, mode, sim: Simulator64::default(), noise: None, seed, evaluations: 0, quantum_secs: 0.0 }
    }

    /// Noisy execution on a line of qubits, so the CZ chain needs no routing.
    pub fn with_noise(mut self, model: NoiseModel) -> Result<Self, QrlError> {
        if self.mode == QMode::Exact {
            return Err(QrlError::Config("exact expectations need the noiseless simulator".into()));
        }
        self.noise = Some((model, GridTopology::new(1, self.shape.n_qubits)));
        Ok(self)
    }

    pub fn is_noisy(&self) -> bool {
        self.noise.is_some()
    }

    /// `<Z>` on each measured qubit; entry `a` is the value of action `a`.
    pub fn q_values(&mut self, params: &[f64], state: usize) -> Result<Vec<f64>, QrlError> {
        let start = Instant::now();
        let circuit = build_qrl_ansatz(&self.shape.config(params, state))?;
        let m = self.shape.n_measurements;
        let out = match self.mode {
            QMode::Exact => {
                let psi = self.sim.final_state(&circuit)?;
                (0..m).map(|q| psi.expectation_z(q)).collect()
            }
            QMode::Shots(shots) => {
                let seed = self.seed ^ self.evaluations.wrapping_mul(0x9e37_79b9_7f4a_7c15);
                let (counts, _) = match &self.noise {
                    Some((model, topo)) => {
                        let (lowered, bound) = lower_for_noise(&circuit, model, topo)?;
                        self.sim.run_shots(&lowered, shots, seed, Some(&bound))?
                    }
                    None => self.sim.run_shots(&circuit, shots, seed, None)?,
                };
                let mut z = vec![0.0; m];
                for (key, &n) in &counts.counts {
                    // bit i is the i-th character from the right
                    for (i, bit) in key.bytes().rev().enumerate() {
                        z[i] += if bit == b'1' { -(n as f64) } else { n as f64 };
                    }
                }
                z.iter().map(|v| v / shots as f64).collect()
            }
        };
        self.evaluations += 1;
        self.quantum_secs += start.elapsed().as_secs_f64();
        Ok(out)
    }
}

/// Free-function form of [`QExecutor::q_values`].
pub fn q_values(params: &[f64], state: usize, executor: &mut QExecutor) -> Result<Vec<f64>, QrlError> {
    executor.q_values(params, state)
}
