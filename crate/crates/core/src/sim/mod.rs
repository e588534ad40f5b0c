//! Dense statevector execution: unitary evolution, mid-circuit measurement,
//! reset, classical feed-forward, shot sampling and exact branch-enumerated
//! distributions.

mod counts;
mod engine;
pub mod gates;
mod statevector;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Violation;
use crate::noise::NoiseError;

pub use counts::{bitstring, parse_bitstring, Counts, ExactDistribution};
pub use engine::{
    draw_targets, locate_target, outcome_value, quantize_probabilities, shot_rng, ShotRun, Simulator, Timing,
    WEIGHT_SCALE,
};
pub use statevector::{StateVector, COLLAPSE_EPS};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("qubit {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("classical bit {0} out of range")]
    ClbitOutOfRange(usize),
    #[error("gate `{kind}` applied to {got} qubit(s)")]
    Arity { kind: &'static str, got: usize },
    #[error("`{0}` is not a unitary gate")]
    NotUnitary(&'static str),
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("measurement collapsed onto an outcome of probability {0:e}")]
    NumericalCollapse(f64),
    #[error("width {width} exceeds the configured cap of {cap} qubits")]
    TooWide { width: usize, cap: usize },
    #[error("{measurements} branching measurements exceed the budget of {budget}")]
    BranchBudget { measurements: usize, budget: usize },
    #[error("classical register of {0} bits does not fit a 64-bit readout")]
    RegisterTooWide(usize),
    #[error("invalid circuit: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("circuit has mid-circuit measurements or feed-forward")]
    Dynamic,
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Engine limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Largest width the single-process engine will allocate.
    pub max_qubits: usize,
    /// Largest width accepted by branch enumeration.
    pub exact_max_qubits: usize,
    /// Most branching (mid-circuit) measurements and resets accepted by
    /// branch enumeration.
    pub max_branch_measurements: usize,
    /// Run trajectories on the rayon pool.
    pub parallel: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { max_qubits: 26, exact_max_qubits: 16, max_branch_measurements: 16, parallel: true }
    }
}

/// Shot execution on the default double-precision engine.
pub fn run_shots(
    circuit: &crate::Circuit,
    shots: u64,
    seed: u64,
    noise: Option<&crate::noise::NoiseModel>,
) -> Result<(Counts, Timing), SimError> {
    Simulator::<f64>::default().run_shots(circuit, shots, seed, noise)
}

/// Branch-enumerated distribution on the default double-precision engine.
pub fn exact_distribution(circuit: &crate::Circuit) -> Result<ExactDistribution, SimError> {
    Simulator::<f64>::default().exact_distribution(circuit)
}
