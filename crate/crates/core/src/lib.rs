//! Application-oriented quantum benchmarking.
//!
//! The crate is organised along the three stages of a benchmark run:
//!
//! * problem generation ([`benchmarks`]) builds circuits together with the
//!   distribution an ideal device would produce,
//! * circuit execution ([`sim`], [`noise`], [`distributed`]) runs them on a
//!   dense statevector engine, optionally with a post-gate error model or
//!   split across several workers,
//! * results analysis ([`metrics`]) scores measured counts against the
//!   expectation and aggregates sweeps.
//!
//! Circuits ([`circuit`]) are the interchange format between the stages.
//!
//! Numerical code is generic over the amplitude scalar (see [`Real`]); the
//! aliases below pin the common choices.

pub mod benchmarks;
pub mod circuit;
pub mod distributed;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod scalar;
pub mod sim;

pub use circuit::{Angle, Circuit, Condition, GateKind, GridTopology, Instruction};
pub use scalar::Real;
pub use sim::{Counts, ExactDistribution, SimConfig};

/// Double precision statevector.
pub type StateVector64 = sim::StateVector<f64>;
/// Single precision statevector.
pub type StateVector32 = sim::StateVector<f32>;
/// Double precision execution engine.
pub type Simulator64 = sim::Simulator<f64>;
/// Single precision execution engine.
pub type Simulator32 = sim::Simulator<f32>;
/// Complex amplitude in double precision.
pub type C64 = num_complex::Complex<f64>;
