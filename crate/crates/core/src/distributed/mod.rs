//! Partitioned statevector execution.
//!
//! The `2^n` amplitudes are split across `W = 2^g` ranks by their `g`
//! highest qubits; rank `r` owns the indices whose high bits equal `r`.
//! Gates on local qubits run the serial kernels on each block. Gates that
//! move amplitude across a global qubit exchange (half-)blocks with the
//! partner rank and apply the same floating-point operations as the serial
//! engine, so final states and sampled counts are bit-identical.
//! Diagonal gates never communicate.
//!
//! Sampling mirrors [`crate::sim::Simulator::run_shots`]: every rank
//! quantises its block, rank 0 collects the block masses, draws the shot
//! targets from the run seed and asks the owning ranks to decode them.

mod transport;

use std::time::Instant;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use transport::{
    ChannelTransport, ExchangeMessage, Payload, TcpConnector, TcpRendezvous, TcpTransport, Transport, TransportKind,
};

use crate::circuit::{validate, Circuit, GateKind, Instruction};
use crate::scalar::Real;
use crate::sim::gates::{self, mix};
use crate::sim::{draw_targets, locate_target, outcome_value, quantize_probabilities, Counts, SimError, Simulator, Timing};

#[derive(Debug, Error, PartialEq)]
pub enum DistError {
    #[error("worker count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{n} qubits cannot be split over {workers} workers")]
    TooFewQubits { n: usize, workers: usize },
    #[error("qubit {0} is global; use the exchange path")]
    GlobalQubit(usize),
    #[error("instruction `{0}` is not supported in partitioned mode")]
    Unsupported(&'static str),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("rank {0} panicked")]
    RankPanicked(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One rank's share of the state.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition<T> {
    pub rank: usize,
    pub world: usize,
    pub n: usize,
    pub block: Vec<Complex<T>>,
}

impl<T: Real> Partition<T> {
    /// Block of `|0...0>` owned by `rank`.
    pub fn new(rank: usize, world: usize, n: usize) -> Result<Self, DistError> {
        if !world.is_power_of_two() {
            return Err(DistError::NotPowerOfTwo(world));
        }
        let g = world.trailing_zeros() as usize;
        if n < g {
            return Err(DistError::TooFewQubits { n, workers: world });
        }
        let mut block = vec![Complex::zero(); 1usize << (n - g)];
        if rank == 0 {
            block[0] = Complex::one();
        }
        Ok(Self { rank, world, n, block })
    }

    pub fn global_qubits(&self) -> usize {
        self.world.trailing_zeros() as usize
    }

    pub fn local_qubits(&self) -> usize {
        self.n - self.global_qubits()
    }

    pub fn is_local(&self, q: usize) -> bool {
        q < self.local_qubits()
    }

    /// Bit of this rank's index that fixes global qubit `q`.
    fn rank_bit(&self, q: usize) -> bool {
        (self.rank >> (q - self.local_qubits())) & 1 == 1
    }

    fn partner(&self, q: usize) -> usize {
        self.rank ^ (1 << (q - self.local_qubits()))
    }

    pub fn norm_sqr(&self) -> T {
        self.block.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }
}

/// Gate whose qubits are all local: the serial kernel on the block.
pub fn apply_local_gate<T: Real>(part: &mut Partition<T>, inst: &Instruction) -> Result<(), DistError> {
    if let Some(&q) = inst.qubits.iter().find(|&&q| !part.is_local(q)) {
        return Err(DistError::GlobalQubit(q));
    }
    check_supported(inst)?;
    let (b, q) = (&mut part.block, &inst.qubits);
    match inst.kind {
        GateKind::X => gates::apply_x(b, q[0]),
        GateKind::RZ(a) => {
            let (d0, d1) = gates::rz_phases(a.to_radians());
            gates::apply_diag1(b, q[0], d0, d1);
        }
        GateKind::H | GateKind::SX | GateKind::RX(_) | GateKind::RY(_) => {
            gates::apply_mat2(b, q[0], &gates::dense_single(&inst.kind).expect("dense kind"))
        }
        GateKind::CX => gates::apply_cx(b, q[0], q[1]),
        GateKind::Swap => gates::apply_swap(b, q[0], q[1]),
        GateKind::CZ | GateKind::CP(_) => gates::apply_phase11(b, q[0], q[1], gates::phase11(&inst.kind).expect("diagonal")),
        GateKind::Measure(_) | GateKind::Reset => unreachable!("rejected by check_supported"),
    }
    Ok(())
}

fn check_supported(inst: &Instruction) -> Result<(), DistError> {
    if inst.condition.is_some() {
        return Err(DistError::Unsupported("conditioned gate"));
    }
    match inst.kind {
        GateKind::Measure(_) | GateKind::Reset => Err(DistError::Unsupported(inst.kind.name())),
        _ => Ok(()),
    }
}

/// Communication and timing counters of one rank.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RankStats {
    pub rank: usize,
    /// Gates that required an amplitude exchange with a partner.
    pub exchange_rounds: u64,
    pub messages_sent: u64,
    pub amplitudes_sent: u64,
    pub compute_secs: f64,
    pub comm_secs: f64,
    pub sample_secs: f64,
    pub total_secs: f64,
}

/// Transport wrapper that records traffic.
struct Instrumented<'a, T, X: Transport<T>> {
    inner: &'a mut X,
    stats: &'a mut RankStats,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real, X: Transport<T>> Instrumented<'_, T, X> {
    fn send(&mut self, to: usize, payload: Payload<T>) -> Result<(), DistError> {
        let start = Instant::now();
        self.stats.messages_sent += 1;
        if let Payload::Amplitudes(a) = &payload {
            self.stats.amplitudes_sent += a.len() as u64;
        }
        let r = self.inner.send(to, payload);
        self.stats.comm_secs += start.elapsed().as_secs_f64();
        r
    }

    fn recv(&mut self, from: usize) -> Result<Payload<T>, DistError> {
        let start = Instant::now();
        let r = self.inner.recv(from);
        self.stats.comm_secs += start.elapsed().as_secs_f64();
        r
    }

    fn recv_amps(&mut self, from: usize, len: usize) -> Result<Vec<Complex<T>>, DistError> {
        match self.recv(from)? {
            Payload::Amplitudes(a) if a.len() == len => Ok(a),
            other => Err(DistError::Transport(format!("expected {len} amplitudes from rank {from}, got {other:?}"))),
        }
    }

    /// Send `out` to `peer` and return what the peer sent back.
    fn swap_with(&mut self, peer: usize, out: Vec<Complex<T>>) -> Result<Vec<Complex<T>>, DistError> {
        let len = out.len();
        self.send(peer, Payload::Amplitudes(out))?;
        self.recv_amps(peer, len)
    }
}

/// Gate touching at least one global qubit, executed collectively: every
/// rank calls this with the same instruction.
pub fn apply_global_gate<T: Real, X: Transport<T>>(
    part: &mut Partition<T>,
    inst: &Instruction,
    transport: &mut X,
    stats: &mut RankStats,
) -> Result<(), DistError> {
    check_supported(inst)?;
    let mut net = Instrumented { inner: transport, stats, _scalar: Default::default() };
    let q = &inst.qubits;
    let global = |q: usize| !part.is_local(q);
    let exchanged = match inst.kind {
        GateKind::RZ(a) => {
            let (d0, d1) = gates::rz_phases::<T>(a.to_radians());
            let d = if part.rank_bit(q[0]) { d1 } else { d0 };
            part.block.iter_mut().for_each(|x| *x *= d);
            false
        }
        GateKind::CZ | GateKind::CP(_) => {
            let phase = gates::phase11::<T>(&inst.kind).expect("diagonal");
            match (global(q[0]), global(q[1])) {
                (true, true) => {
                    if part.rank_bit(q[0]) && part.rank_bit(q[1]) {
                        part.block.iter_mut().for_each(|x| *x *= phase);
                    }
                }
                (true, false) | (false, true) => {
                    let (g, l) = if global(q[0]) { (q[0], q[1]) } else { (q[1], q[0]) };
                    if part.rank_bit(g) {
                        let mask = 1usize << l;
                        for (i, x) in part.block.iter_mut().enumerate() {
                            if i & mask != 0 {
                                *x *= phase;
                            }
                        }
                    }
                }
                (false, false) => unreachable!("local gate"),
            }
            false
        }
        GateKind::X => {
            let peer = part.partner(q[0]);
            part.block = net.swap_with(peer, std::mem::take(&mut part.block))?;
            true
        }
        GateKind::H | GateKind::SX | GateKind::RX(_) | GateKind::RY(_) => {
            let m = gates::dense_single::<T>(&inst.kind).expect("dense kind");
            exchange_dense(part, q[0], &m, &mut net)?;
            true
        }
        GateKind::CX => match (global(q[0]), global(q[1])) {
            (true, false) => {
                if part.rank_bit(q[0]) {
                    gates::apply_x(&mut part.block, q[1]);
                }
                false
            }
            (false, true) => {
                let mask = 1usize << q[0];
                let idx: Vec<usize> = (0..part.block.len()).filter(|i| i & mask != 0).collect();
                let out = idx.iter().map(|&i| part.block[i]).collect();
                let back = net.swap_with(part.partner(q[1]), out)?;
                for (i, v) in idx.into_iter().zip(back) {
                    part.block[i] = v;
                }
                true
            }
            (true, true) => {
                if part.rank_bit(q[0]) {
                    let peer = part.partner(q[1]);
                    part.block = net.swap_with(peer, std::mem::take(&mut part.block))?;
                }
                true
            }
            (false, false) => unreachable!("local gate"),
        },
        GateKind::Swap => match (global(q[0]), global(q[1])) {
            (true, true) => {
                if part.rank_bit(q[0]) != part.rank_bit(q[1]) {
                    let peer = part.partner(q[0]) ^ (1 << (q[1] - part.local_qubits()));
                    part.block = net.swap_with(peer, std::mem::take(&mut part.block))?;
                }
                true
            }
            (true, false) | (false, true) => {
                let (g, l) = if global(q[0]) { (q[0], q[1]) } else { (q[1], q[0]) };
                // (local bit 1, global bit 0) <-> (local bit 0, global bit 1)
                let want = !part.rank_bit(g);
                let mask = 1usize << l;
                let idx: Vec<usize> = (0..part.block.len()).filter(|i| (i & mask != 0) == want).collect();
                let out = idx.iter().map(|&i| part.block[i]).collect();
                let back = net.swap_with(part.partner(g), out)?;
                for (i, v) in idx.into_iter().zip(back) {
                    part.block[i] = v;
                }
                true
            }
            (false, false) => unreachable!("local gate"),
        },
        GateKind::Measure(_) | GateKind::Reset => unreachable!("rejected by check_supported"),
    };
    if exchanged {
        net.stats.exchange_rounds += 1;
    }
    Ok(())
}

/// Dense 2x2 gate on global qubit `q`. The rank holding the `0` half
/// updates the lower half of the pairs, its partner the upper half; each
/// ships the other the inputs it needs and then the outputs it produced.
fn exchange_dense<T: Real, X: Transport<T>>(
    part: &mut Partition<T>,
    q: usize,
    m: &gates::Mat2<T>,
    net: &mut Instrumented<'_, T, X>,
) -> Result<(), DistError> {
    let peer = part.partner(q);
    let len = part.block.len();
    let half = len / 2;
    if len == 1 {
        // no local qubits: one amplitude each way, both ranks compute
        let theirs = net.swap_with(peer, part.block.clone())?[0];
        let mine = part.block[0];
        part.block[0] = if part.rank_bit(q) { mix(m, theirs, mine).1 } else { mix(m, mine, theirs).0 };
        return Ok(());
    }
    if !part.rank_bit(q) {
        // own a0 everywhere; produce pairs [0, half)
        let a1 = net.swap_with(peer, part.block[half..].to_vec())?;
        let mut new_a1 = Vec::with_capacity(half);
        for (i, &b) in a1.iter().enumerate() {
            let (n0, n1) = mix(m, part.block[i], b);
            part.block[i] = n0;
            new_a1.push(n1);
        }
        let back = net.swap_with(peer, new_a1)?;
        part.block[half..].copy_from_slice(&back);
    } else {
        // own a1 everywhere; produce pairs [half, len)
        let a0 = net.swap_with(peer, part.block[..half].to_vec())?;
        let mut new_a0 = Vec::with_capacity(len - half);
        for (k, &a) in a0.iter().enumerate() {
            let i = half + k;
            let (n0, n1) = mix(m, a, part.block[i]);
            part.block[i] = n1;
            new_a0.push(n0);
        }
        let back = net.swap_with(peer, new_a0)?;
        part.block[..half].copy_from_slice(&back);
    }
    Ok(())
}

/// Dispatch one instruction to the local or collective path.
pub fn apply_partitioned<T: Real, X: Transport<T>>(
    part: &mut Partition<T>,
    inst: &Instruction,
    transport: &mut X,
    stats: &mut RankStats,
) -> Result<(), DistError> {
    if inst.qubits.iter().all(|&q| part.is_local(q)) {
        apply_local_gate(part, inst)
    } else {
        apply_global_gate(part, inst, transport, stats)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistConfig {
    /// Number of ranks, a power of two.
    pub workers: usize,
    #[serde(default)]
    pub transport: TransportKind,
}

impl DistConfig {
    pub fn new(workers: usize) -> Self {
        Self { workers, transport: TransportKind::Channel }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistRun {
    pub counts: Counts,
    /// One entry per rank, rank order.
    pub ranks: Vec<RankStats>,
    /// Dynamic circuits are executed by the serial engine.
    pub serial_fallback: bool,
    pub timing: Timing,
}

enum Job {
    Sample { shots: u64, seed: u64, terminal: Vec<(usize, usize)>, num_clbits: usize },
    Gather,
}

struct RankOutput<T> {
    stats: RankStats,
    counts: Option<Counts>,
    state: Option<Vec<Complex<T>>>,
}

fn rank_main<T: Real, X: Transport<T>>(
    circuit: &Circuit,
    job: &Job,
    mut transport: X,
) -> Result<RankOutput<T>, DistError> {
    let start = Instant::now();
    let (rank, world) = (transport.rank(), transport.world());
    let mut stats = RankStats { rank, ..RankStats::default() };
    let mut part = Partition::<T>::new(rank, world, circuit.num_qubits)?;
    for inst in circuit.instructions.iter().filter(|i| i.kind.is_unitary()) {
        apply_partitioned(&mut part, inst, &mut transport, &mut stats)?;
    }
    stats.compute_secs = start.elapsed().as_secs_f64() - stats.comm_secs;

    let sample_start = Instant::now();
    let mut net = Instrumented { inner: &mut transport, stats: &mut stats, _scalar: Default::default() };
    let local_bits = part.local_qubits();
    let mut out = RankOutput { stats: RankStats::default(), counts: None, state: None };
    match job {
        Job::Gather => {
            if rank == 0 {
                let mut full = std::mem::take(&mut part.block);
                for r in 1..world {
                    match net.recv(r)? {
                        Payload::Amplitudes(a) => full.extend(a),
                        other => return Err(DistError::Transport(format!("expected block from rank {r}, got {other:?}"))),
                    }
                }
                out.state = Some(full);
            } else {
                net.send(0, Payload::Amplitudes(std::mem::take(&mut part.block)))?;
            }
        }
        Job::Sample { shots, seed, terminal, num_clbits } => {
            let mut prefix = Vec::with_capacity(part.block.len());
            let mut running = 0u128;
            for w in quantize_probabilities(&part.block) {
                running += w as u128;
                prefix.push(running);
            }
            drop(part);
            if rank == 0 {
                let mut cumulative = vec![running];
                for r in 1..world {
                    match net.recv(r)? {
                        Payload::Mass(m) => cumulative.push(cumulative[r - 1] + m),
                        other => return Err(DistError::Transport(format!("expected mass from rank {r}, got {other:?}"))),
                    }
                }
                let total = cumulative[world - 1];
                let targets = if total == 0 { Vec::new() } else { draw_targets(total, *shots, *seed) };
                let mut per_rank: Vec<Vec<u128>> = vec![Vec::new(); world];
                for t in targets {
                    let r = locate_target(&cumulative, t);
                    let before = if r == 0 { 0 } else { cumulative[r - 1] };
                    per_rank[r].push(t - before);
                }
                for (r, ts) in per_rank.iter_mut().enumerate().skip(1) {
                    net.send(r, Payload::Targets(std::mem::take(ts)))?;
                }
                let mut counts = Counts::new(*num_clbits);
                for t in &per_rank[0] {
                    counts.record(outcome_value(locate_target(&prefix, *t), terminal), 1);
                }
                for r in 1..world {
                    match net.recv(r)? {
                        Payload::Indices(ix) => {
                            for i in ix {
                                counts.record(outcome_value(i as usize, terminal), 1);
                            }
                        }
                        other => return Err(DistError::Transport(format!("expected indices from rank {r}, got {other:?}"))),
                    }
                }
                out.counts = Some(counts);
            } else {
                net.send(0, Payload::Mass(running))?;
                let targets = match net.recv(0)? {
                    Payload::Targets(t) => t,
                    other => return Err(DistError::Transport(format!("expected targets, got {other:?}"))),
                };
                let base = (rank as u64) << local_bits;
                let ix = targets.iter().map(|&t| base | locate_target(&prefix, t) as u64).collect();
                net.send(0, Payload::Indices(ix))?;
            }
        }
    }
    stats.sample_secs = sample_start.elapsed().as_secs_f64();
    stats.total_secs = start.elapsed().as_secs_f64();
    out.stats = stats;
    Ok(out)
}

fn check_config(circuit: &Circuit, config: &DistConfig) -> Result<(), DistError> {
    if !config.workers.is_power_of_two() {
        return Err(DistError::NotPowerOfTwo(config.workers));
    }
    if circuit.num_qubits < config.workers.trailing_zeros() as usize {
        return Err(DistError::TooFewQubits { n: circuit.num_qubits, workers: config.workers });
    }
    let violations = validate(circuit);
    if !violations.is_empty() {
        return Err(SimError::Invalid(violations).into());
    }
    Ok(())
}

fn launch<T: Real>(circuit: &Circuit, config: &DistConfig, job: Job) -> Result<Vec<RankOutput<T>>, DistError> {
    let job = &job;
    std::thread::scope(|scope| {
        let handles: Vec<_> = match config.transport {
            TransportKind::Channel => ChannelTransport::<T>::mesh(config.workers)
                .into_iter()
                .map(|t| scope.spawn(move || rank_main(circuit, job, t)))
                .collect(),
            TransportKind::Tcp => TcpRendezvous::bind(config.workers)?
                .into_connectors()
                .into_iter()
                .map(|c| scope.spawn(move || rank_main(circuit, job, c.connect::<T>()?)))
                .collect(),
        };
        handles
            .into_iter()
            .enumerate()
            .map(|(r, h)| h.join().map_err(|_| DistError::RankPanicked(r))?)
            .collect()
    })
}

/// Shot sampling on `config.workers` ranks; counts equal the serial engine's
/// for the same seed. Circuits with mid-circuit measurement or
/// feed-forward fall back to the serial engine.
pub fn partitioned_run_with<T: Real>(
    circuit: &Circuit,
    shots: u64,
    seed: u64,
    config: &DistConfig,
) -> Result<DistRun, DistError> {
    check_config(circuit, config)?;
    let start = Instant::now();
    let Some(terminal) = circuit.terminal_measurements() else {
        let (counts, timing) = Simulator::<T>::default().run_shots(circuit, shots, seed, None)?;
        return Ok(DistRun { counts, ranks: Vec::new(), serial_fallback: true, timing });
    };
    if circuit.num_clbits > 64 {
        return Err(SimError::RegisterTooWide(circuit.num_clbits).into());
    }
    let job = Job::Sample { shots, seed, terminal, num_clbits: circuit.num_clbits };
    let outputs = launch::<T>(circuit, config, job)?;
    let counts = outputs[0].counts.clone().expect("rank 0 builds the counts");
    Ok(DistRun {
        counts,
        ranks: outputs.into_iter().map(|o| o.stats).collect(),
        serial_fallback: false,
        timing: Timing { execute_secs: start.elapsed().as_secs_f64() },
    })
}

/// Double precision [`partitioned_run_with`].
pub fn partitioned_run(circuit: &Circuit, shots: u64, seed: u64, config: &DistConfig) -> Result<DistRun, DistError> {
    partitioned_run_with::<f64>(circuit, shots, seed, config)
}

/// Final unitary state assembled on rank 0, with per-rank counters.
pub fn partitioned_state<T: Real>(
    circuit: &Circuit,
    config: &DistConfig,
) -> Result<(Vec<Complex<T>>, Vec<RankStats>), DistError> {
    check_config(circuit, config)?;
    if circuit.terminal_measurements().is_none() {
        return Err(SimError::Dynamic.into());
    }
    let mut outputs = launch::<T>(circuit, config, Job::Gather)?;
    let state = outputs[0].state.take().expect("rank 0 gathers the state");
    Ok((state, outputs.into_iter().map(|o| o.stats).collect()))
}
