use std::collections::BTreeMap;
use std::marker::PhantomData;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Counts, ExactDistribution, SimConfig, SimError, StateVector};
use crate::circuit::{validate, Circuit, GateKind};
use crate::noise::NoiseModel;
use crate::scalar::Real;

/// Fixed-point scale for sampling weights. Integer prefix sums are exact and
/// associative, so any partition of the state samples identically.
pub const WEIGHT_SCALE: f64 = (1u64 << 60) as f64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Wall-clock seconds spent inside the simulator.
    pub execute_secs: f64,
}

/// Serialised result of one shot run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRun {
    #[serde(flatten)]
    pub counts: Counts,
    pub seed: u64,
    pub timing: Timing,
}

/// RNG for trajectory `shot` of a run seeded with `seed`: one ChaCha stream
/// per shot, so trajectories can run in any order.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot.wrapping_add(1));
    rng
}

pub fn quantize_probabilities<T: Real>(amps: &[num_complex::Complex<T>]) -> Vec<u64> {
    amps.iter().map(|a| (a.norm_sqr().f64() * WEIGHT_SCALE).round() as u64).collect()
}

/// Uniform draws in `[0, total)`, one per shot, from the run's master stream.
pub fn draw_targets(total: u128, shots: u64, seed: u64) -> Vec<u128> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..shots).map(|_| rng.random_range(0..total)).collect()
}

/// Index of the bucket containing `target` given inclusive prefix sums.
pub fn locate_target(prefix: &[u128], target: u128) -> usize {
    prefix.partition_point(|&p| p <= target)
}

/// Classical readout produced by basis state `index` under terminal
/// measurements `(qubit, clbit)`; later pairs overwrite earlier ones.
pub fn outcome_value(index: usize, terminal: &[(usize, usize)]) -> u64 {
    let mut v = 0u64;
    for &(q, c) in terminal {
        let bit = ((index >> q) & 1) as u64;
        v = (v & !(1u64 << c)) | (bit << c);
    }
    v
}

fn clbits_value(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
}

/// Statevector engine generic over the amplitude scalar.
#[derive(Clone, Debug, Default)]
pub struct Simulator<T> {
    pub config: SimConfig,
    _scalar: PhantomData<T>,
}

impl<T: Real> Simulator<T> {
    pub fn new(config: SimConfig) -> Self {
        Self { config, _scalar: PhantomData }
    }

    fn precheck(&self, circuit: &Circuit, cap: usize) -> Result<(), SimError> {
        let violations = validate(circuit);
        if !violations.is_empty() {
            return Err(SimError::Invalid(violations));
        }
        if circuit.num_qubits > cap {
            return Err(SimError::TooWide { width: circuit.num_qubits, cap });
        }
        if circuit.num_clbits > 64 {
            return Err(SimError::RegisterTooWide(circuit.num_clbits));
        }
        Ok(())
    }

    /// Unitary evolution of an MCM-free circuit, measurements skipped.
    pub fn final_state(&self, circuit: &Circuit) -> Result<StateVector<T>, SimError> {
        self.precheck(circuit, self.config.max_qubits)?;
        if circuit.terminal_measurements().is_none() {
            return Err(SimError::Dynamic);
        }
        let mut state = StateVector::new(circuit.num_qubits);
        for inst in circuit.instructions.iter().filter(|i| i.kind.is_unitary()) {
            state.apply_gate(&inst.kind, &inst.qubits)?;
        }
        Ok(state)
    }

    /// Execute `shots` repetitions.
    ///
    /// Noiseless circuits whose measurements are all terminal are evolved
    /// once and the final distribution is sampled; everything else runs one
    /// trajectory per shot. The result depends only on `(circuit, shots,
    /// seed, noise)`, never on thread count.
    pub fn run_shots(
        &self,
        circuit: &Circuit,
        shots: u64,
        seed: u64,
        noise: Option<&NoiseModel>,
    ) -> Result<(Counts, Timing), SimError> {
        self.precheck(circuit, self.config.max_qubits)?;
        let start = Instant::now();
        // an all-zero model must reproduce the ideal path bit for bit
        let noise = noise.filter(|m| !m.is_noiseless());
        let counts = match (circuit.terminal_measurements(), noise) {
            (Some(terminal), None) => {
                let state = self.final_state(circuit)?;
                sample_state(&state, &terminal, circuit.num_clbits, shots, seed)
            }
            _ => self.run_trajectories(circuit, shots, seed, noise)?,
        };
        Ok((counts, Timing { execute_secs: start.elapsed().as_secs_f64() }))
    }

    /// Trajectory sampling regardless of circuit structure.
    pub fn run_trajectories(
        &self,
        circuit: &Circuit,
        shots: u64,
        seed: u64,
        noise: Option<&NoiseModel>,
    ) -> Result<Counts, SimError> {
        self.precheck(circuit, self.config.max_qubits)?;
        if let Some(model) = noise {
            model.check_circuit(circuit)?;
        }
        let one = |shot: u64| -> Result<u64, SimError> {
            let mut rng = shot_rng(seed, shot);
            self.trajectory(circuit, noise, &mut rng)
        };
        let outcomes: Result<Vec<u64>, SimError> = if self.config.parallel {
            (0..shots).into_par_iter().map(one).collect()
        } else {
            (0..shots).map(one).collect()
        };
        Ok(Counts::from_outcomes(circuit.num_clbits, outcomes?))
    }

    /// One stochastic execution; returns the classical register.
    pub fn trajectory<R: Rng + ?Sized>(
        &self,
        circuit: &Circuit,
        noise: Option<&NoiseModel>,
        rng: &mut R,
    ) -> Result<u64, SimError> {
        let mut state = StateVector::<T>::new(circuit.num_qubits);
        let mut clbits = vec![false; circuit.num_clbits];
        for inst in &circuit.instructions {
            match inst.kind {
                GateKind::Measure(c) => clbits[c] = state.measure(inst.qubits[0], rng)?,
                GateKind::Reset => state.reset(inst.qubits[0], rng)?,
                _ => {
                    if state.apply_instruction(inst, &clbits)? {
                        if let Some(model) = noise {
                            model.apply_post_gate_error(&mut state, inst, rng)?;
                        }
                    }
                }
            }
        }
        Ok(clbits_value(&clbits))
    }

    /// Exact readout distribution by enumerating every mid-circuit
    /// measurement (and reset) branch. Terminal measurements are read off
    /// the leaf states directly.
    pub fn exact_distribution(&self, circuit: &Circuit) -> Result<ExactDistribution, SimError> {
        self.precheck(circuit, self.config.exact_max_qubits)?;
        let terminal = circuit.terminal_flags();
        let branching = circuit
            .instructions
            .iter()
            .zip(&terminal)
            .filter(|(i, &t)| matches!(i.kind, GateKind::Reset) || (matches!(i.kind, GateKind::Measure(_)) && !t))
            .count();
        if branching > self.config.max_branch_measurements {
            return Err(SimError::BranchBudget { measurements: branching, budget: self.config.max_branch_measurements });
        }
        let mut acc = BTreeMap::new();
        let walker = BranchWalker { circuit, terminal: &terminal };
        walker.walk(0, StateVector::<T>::new(circuit.num_qubits), vec![false; circuit.num_clbits], Vec::new(), 1.0, &mut acc)?;
        let mut dist = ExactDistribution::new(circuit.num_clbits);
        for (v, p) in acc {
            dist.add(v, p);
        }
        Ok(dist)
    }
}

/// Multinomial sampling of a final state through terminal measurements.
pub(crate) fn sample_state<T: Real>(
    state: &StateVector<T>,
    terminal: &[(usize, usize)],
    num_clbits: usize,
    shots: u64,
    seed: u64,
) -> Counts {
    let weights = quantize_probabilities(state.amplitudes());
    let mut prefix = Vec::with_capacity(weights.len());
    let mut running = 0u128;
    for w in weights {
        running += w as u128;
        prefix.push(running);
    }
    let mut counts = Counts::new(num_clbits);
    if running == 0 {
        return counts;
    }
    for target in draw_targets(running, shots, seed) {
        counts.record(outcome_value(locate_target(&prefix, target), terminal), 1);
    }
    counts
}

/// Probabilities below this are not explored further.
const BRANCH_EPS: f64 = 1e-15;

struct BranchWalker<'a> {
    circuit: &'a Circuit,
    terminal: &'a [bool],
}

impl BranchWalker<'_> {
    fn walk<T: Real>(
        &self,
        start: usize,
        mut state: StateVector<T>,
        clbits: Vec<bool>,
        mut pending: Vec<(usize, usize)>,
        weight: f64,
        acc: &mut BTreeMap<u64, f64>,
    ) -> Result<(), SimError> {
        for idx in start..self.circuit.instructions.len() {
            let inst = &self.circuit.instructions[idx];
            let q = inst.qubits[0];
            match inst.kind {
                GateKind::Measure(c) if self.terminal[idx] => pending.push((q, c)),
                GateKind::Measure(_) | GateKind::Reset => {
                    let p1 = state.prob_one(q).f64();
                    for (outcome, p) in [(false, 1.0 - p1), (true, p1)] {
                        if p <= BRANCH_EPS {
                            continue;
                        }
                        let mut branch = state.clone();
                        branch.project(q, outcome)?;
                        let mut bits = clbits.clone();
                        match inst.kind {
                            GateKind::Measure(c) => bits[c] = outcome,
                            _ if outcome => branch.apply_gate(&GateKind::X, &[q])?,
                            _ => {}
                        }
                        self.walk(idx + 1, branch, bits, pending.clone(), weight * p, acc)?;
                    }
                    return Ok(());
                }
                _ => {
                    state.apply_instruction(inst, &clbits)?;
                }
            }
        }
        let base = clbits_value(&clbits);
        for (index, p) in state.probabilities().into_iter().enumerate() {
            let p = p.f64();
            if p <= 0.0 {
                continue;
            }
            let mut v = base;
            for &(q, c) in &pending {
                let bit = ((index >> q) & 1) as u64;
                v = (v & !(1u64 << c)) | (bit << c);
            }
            *acc.entry(v).or_insert(0.0) += weight * p;
        }
        Ok(())
    }
}
