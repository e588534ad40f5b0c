//! Variational Q-learning on FrozenLake as a quantum workload: a layered
//! ansatz scores the four actions, trained from a replay buffer with
//! parameter-shift ADAM or SPSA, with every circuit execution accounted for.

pub mod buffer;
pub mod env;
pub mod executor;
pub mod optim;
pub mod train;

use thiserror::Error;

pub use buffer::ReplayBuffer;
pub use env::{env_step, Action, EnvError, FrozenLakeEnv, Tile, Transition};
pub use executor::{q_values, AnsatzShape, QExecutor, QMode};
pub use optim::{
    adam_step, gradient_parameter_shift, spsa_step, AdamConfig, AdamState, OptimizerKind, SpsaCoeffs,
};
pub use train::{epsilon, greedy_success, run_policy, train, QRLRunStats, StepLog, TrainConfig};

#[derive(Debug, Error)]
pub enum QrlError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Benchmark(#[from] qbench_core::benchmarks::BenchmarkError),
    #[error(transparent)]
    Sim(#[from] qbench_core::sim::SimError),
    #[error(transparent)]
    Circuit(#[from] qbench_core::circuit::CircuitError),
    #[error(transparent)]
    Noise(#[from] qbench_core::noise::NoiseError),
}
