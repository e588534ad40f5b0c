//! Post-gate error channels built from elementary error generators.
//!
//! Each noisy gate `G` is followed by `e^L` with
//! `L = sum_P h_P H_P + sum_P s_P S_P`, `H_P[rho] = -i[P, rho]` and
//! `S_P[rho] = P rho P - rho`. Trajectories realise the channel as the
//! coherent unitary `exp(-i sum_P h_P P)` followed by independent Pauli
//! flips, `P` with probability `(1 - e^{-2 s_P}) / 2`. Cross terms between
//! the two parts are second order in the rates and are not modelled.
//!
//! `RZ` is virtual and noiseless. With crosstalk enabled every `CX` also
//! couples its control (target) to each placed grid neighbour through
//! `exp(-i h_ZZ Z Z)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{row_major_placement, transpile_to_basis, Circuit, CircuitError, Coupling, GateKind, GridTopology, Instruction};
use crate::linalg::Matrix;
use crate::scalar::{cis, Real};
use crate::sim::StateVector;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("invalid rates: {0}")]
    InvalidRates(String),
    #[error("bad pauli label `{0}`")]
    BadLabel(String),
    #[error("qubit {0} has no placement on the crosstalk topology")]
    Unplaced(usize),
}

/// Stochastic rates must stay in the small-rate regime.
pub const MAX_TOTAL_STOCHASTIC_RATE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix<T: Real>(self) -> Matrix<T> {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        let i = Complex::new(T::zero(), T::one());
        match self {
            Pauli::I => Matrix::identity(2),
            Pauli::X => Matrix::from_rows(vec![vec![z, o], vec![o, z]]),
            Pauli::Y => Matrix::from_rows(vec![vec![z, -i], vec![i, z]]),
            Pauli::Z => Matrix::from_rows(vec![vec![o, z], vec![z, -o]]),
        }
    }

    fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Non-identity Pauli operator on a gate's qubits. Character `k` of the
/// label acts on the gate's `k`-th qubit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Result<Self, NoiseError> {
        if factors.is_empty() || factors.iter().all(|&p| p == Pauli::I) {
            let label: String = factors.iter().map(|p| p.label()).collect();
            return Err(NoiseError::BadLabel(label));
        }
        Ok(Self(factors))
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.0
    }

    /// All `4^w - 1` non-identity strings of width `w`, in label order.
    pub fn all(width: usize) -> Vec<PauliString> {
        const ORDER: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut out = Vec::new();
        for code in 1..4usize.pow(width as u32) {
            // first character is the most significant base-4 digit
            let factors = (0..width).map(|k| ORDER[(code / 4usize.pow((width - 1 - k) as u32)) % 4]).collect();
            out.push(PauliString(factors));
        }
        out
    }

    /// Dense matrix with factor `k` on bit `k`.
    pub fn matrix<T: Real>(&self) -> Matrix<T> {
        self.0.iter().fold(Matrix::identity(1), |acc, p| p.matrix::<T>().kron(&acc))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.label())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = NoiseError;
    fn from_str(s: &str) -> Result<Self, NoiseError> {
        let factors = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(NoiseError::BadLabel(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        PauliString::new(factors)
    }
}

impl TryFrom<String> for PauliString {
    type Error = NoiseError;
    fn try_from(s: String) -> Result<Self, NoiseError> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.to_string()
    }
}

/// Hamiltonian (`h_P`) and stochastic (`s_P`) rates for one gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorGenerator {
    pub width: usize,
    pub hamiltonian: BTreeMap<PauliString, f64>,
    pub stochastic: BTreeMap<PauliString, f64>,
}

impl ErrorGenerator {
    pub fn new(
        width: usize,
        hamiltonian: BTreeMap<PauliString, f64>,
        stochastic: BTreeMap<PauliString, f64>,
    ) -> Result<Self, NoiseError> {
        let g = Self { width, hamiltonian, stochastic };
        g.check()?;
        Ok(g)
    }

    pub fn zero(width: usize) -> Self {
        Self { width, hamiltonian: BTreeMap::new(), stochastic: BTreeMap::new() }
    }

    pub fn check(&self) -> Result<(), NoiseError> {
        if let Some(p) = self.hamiltonian.keys().chain(self.stochastic.keys()).find(|p| p.width() != self.width) {
            return Err(NoiseError::InvalidRates(format!("{p} does not have width {}", self.width)));
        }
        if self.hamiltonian.values().chain(self.stochastic.values()).any(|r| !r.is_finite()) {
            return Err(NoiseError::InvalidRates("non-finite rate".into()));
        }
        if self.stochastic.values().any(|&s| s < 0.0) {
            return Err(NoiseError::InvalidRates("negative stochastic rate".into()));
        }
        let total: f64 = self.stochastic.values().sum();
        if total >= MAX_TOTAL_STOCHASTIC_RATE {
            return Err(NoiseError::InvalidRates(format!("stochastic rates sum to {total}")));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.hamiltonian.values().chain(self.stochastic.values()).all(|&r| r == 0.0)
    }

    /// Pauli flip probabilities `(1 - e^{-2 s_P}) / 2`, zero rates omitted.
    pub fn flip_probabilities(&self) -> Vec<(PauliString, f64)> {
        self.stochastic
            .iter()
            .filter(|(_, &s)| s > 0.0)
            .map(|(p, &s)| (p.clone(), (1.0 - (-2.0 * s).exp()) / 2.0))
            .collect()
    }
}

/// `exp(-i sum_P h_P P)` as a `2^w x 2^w` matrix.
pub fn coherent_error_unitary<T: Real>(gen: &ErrorGenerator) -> Matrix<T> {
    let dim = 1usize << gen.width;
    let mut h = Matrix::<T>::zeros(dim);
    for (p, &rate) in &gen.hamiltonian {
        h = &h + &p.matrix::<T>().scale(Complex::new(T::of(rate), T::zero()));
    }
    h.scale(Complex::new(T::zero(), -T::one())).expm()
}

/// `exp(-i h Z Z)` as a little-endian diagonal.
pub fn zz_phases<T: Real>(h: f64) -> [Complex<T>; 4] {
    [cis(-h), cis(h), cis(h), cis(-h)]
}

/// Distribution parameters for sampling a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation of the Hamiltonian rates.
    pub sigma_h: f64,
    /// Upper bound of the uniform stochastic rates.
    pub s_max: f64,
    pub h_zz: f64,
    pub crosstalk_enabled: bool,
}

impl NoiseSpec {
    /// Coherent plus stochastic local errors at the 5e-4 scale, ZZ crosstalk
    /// at 1e-2.
    pub fn reference(crosstalk: bool) -> Self {
        Self { sigma_h: 5e-4, s_max: 5e-4, h_zz: 1e-2, crosstalk_enabled: crosstalk }
    }

    pub fn noiseless() -> Self {
        Self { sigma_h: 0.0, s_max: 0.0, h_zz: 0.0, crosstalk_enabled: false }
    }

    pub fn check(&self) -> Result<(), NoiseError> {
        for (name, v) in [("sigma_h", self.sigma_h), ("s_max", self.s_max), ("h_zz", self.h_zz)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(NoiseError::InvalidRates(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crosstalk {
    pub h_zz: f64,
    pub topology: GridTopology,
    /// Circuit slot to grid node; bound per transpiled circuit.
    #[serde(default)]
    pub placement: Option<Vec<usize>>,
}

#[derive(Debug)]
struct Cache {
    coherent: [Option<Matrix<f64>>; 3],
    flips: [Vec<(PauliString, f64)>; 3],
    slot_of_node: HashMap<usize, usize>,
}

/// Sampled, frozen noise model.
#[derive(Debug, Serialize, Deserialize)]
pub struct NoiseModel {
    pub x: ErrorGenerator,
    pub sx: ErrorGenerator,
    pub cx: ErrorGenerator,
    pub crosstalk: Option<Crosstalk>,
    pub seed: u64,
    #[serde(skip)]
    cache: OnceLock<Cache>,
}

impl Clone for NoiseModel {
    fn clone(&self) -> Self {
        Self::from_parts(self.x.clone(), self.sx.clone(), self.cx.clone(), self.crosstalk.clone(), self.seed)
    }
}

impl PartialEq for NoiseModel {
    fn eq(&self, o: &Self) -> bool {
        self.x == o.x && self.sx == o.sx && self.cx == o.cx && self.crosstalk == o.crosstalk && self.seed == o.seed
    }
}

/// Draw a model: `h_P ~ N(0, sigma_h^2)` and `s_P ~ U[0, s_max]` for every
/// non-identity Pauli of X, SX (width 1) and CX (width 2), in that order.
pub fn sample_noise_model(spec: &NoiseSpec, topology: GridTopology, seed: u64) -> Result<NoiseModel, NoiseError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, spec.sigma_h).map_err(|e| NoiseError::InvalidRates(e.to_string()))?;
    let uniform = Uniform::new_inclusive(0.0, spec.s_max).map_err(|e| NoiseError::InvalidRates(e.to_string()))?;
    let mut draw = |width: usize| -> Result<ErrorGenerator, NoiseError> {
        let mut h = BTreeMap::new();
        let mut s = BTreeMap::new();
        for p in PauliString::all(width) {
            h.insert(p.clone(), normal.sample(&mut rng));
            s.insert(p, uniform.sample(&mut rng));
        }
        ErrorGenerator::new(width, h, s)
    };
    let x = draw(1)?;
    let sx = draw(1)?;
    let cx = draw(2)?;
    let crosstalk = spec.crosstalk_enabled.then_some(Crosstalk { h_zz: spec.h_zz, topology, placement: None });
    Ok(NoiseModel::from_parts(x, sx, cx, crosstalk, seed))
}

/// Lower `circuit` to the native basis on `topology` (logical qubit `i` on
/// node `i`) and bind the model's crosstalk to the resulting slots. Noise
/// only attaches to basis gates, so this is the form noisy runs execute.
pub fn lower_for_noise(
    circuit: &Circuit,
    model: &NoiseModel,
    topology: &GridTopology,
) -> Result<(Circuit, NoiseModel), CircuitError> {
    let t = transpile_to_basis(circuit, topology, &row_major_placement(circuit.num_qubits, topology)?)?;
    Ok((t.circuit, model.with_placement(t.nodes)))
}

impl NoiseModel {
    pub fn from_parts(
        x: ErrorGenerator,
        sx: ErrorGenerator,
        cx: ErrorGenerator,
        crosstalk: Option<Crosstalk>,
        seed: u64,
    ) -> Self {
        Self { x, sx, cx, crosstalk, seed, cache: OnceLock::new() }
    }

    /// Model with every rate zero.
    pub fn ideal() -> Self {
        Self::from_parts(ErrorGenerator::zero(1), ErrorGenerator::zero(1), ErrorGenerator::zero(2), None, 0)
    }

    /// Same rates, crosstalk bound to `placement` (circuit slot to node).
    pub fn with_placement(&self, placement: Vec<usize>) -> Self {
        let mut m = self.clone();
        if let Some(ct) = m.crosstalk.as_mut() {
            ct.placement = Some(placement);
        }
        m
    }

    /// True if applying the model can never change a state.
    pub fn is_noiseless(&self) -> bool {
        self.x.is_zero()
            && self.sx.is_zero()
            && self.cx.is_zero()
            && self.crosstalk.as_ref().is_none_or(|c| c.h_zz == 0.0)
    }

    pub fn generator(&self, kind: &GateKind) -> Option<&ErrorGenerator> {
        match kind {
            GateKind::X => Some(&self.x),
            GateKind::SX => Some(&self.sx),
            GateKind::CX => Some(&self.cx),
            _ => None,
        }
    }

    fn cache(&self) -> &Cache {
        self.cache.get_or_init(|| {
            let gens = [&self.x, &self.sx, &self.cx];
            let coherent =
                gens.map(|g| (!g.hamiltonian.values().all(|&h| h == 0.0)).then(|| coherent_error_unitary::<f64>(g)));
            let flips = gens.map(|g| g.flip_probabilities());
            let slot_of_node = self
                .crosstalk
                .as_ref()
                .and_then(|c| c.placement.as_ref())
                .map(|p| p.iter().enumerate().map(|(slot, &node)| (node, slot)).collect())
                .unwrap_or_default();
            Cache { coherent, flips, slot_of_node }
        })
    }

    /// Every slot of `circuit` must be placed when crosstalk is on.
    pub fn check_circuit(&self, circuit: &Circuit) -> Result<(), NoiseError> {
        if let Some(ct) = &self.crosstalk {
            let placed = ct.placement.as_ref().map_or(0, |p| p.len());
            if circuit.num_qubits > placed {
                return Err(NoiseError::Unplaced(placed));
            }
        }
        Ok(())
    }

    /// Slot pairs that pick up a ZZ coupling when `CX(control, target)` runs:
    /// each placed neighbour of the control paired with the control, then
    /// each placed neighbour of the target paired with the target. The gate
    /// partner itself is excluded.
    pub fn crosstalk_pairs(&self, control: usize, target: usize) -> Result<Vec<(usize, usize)>, NoiseError> {
        let Some(ct) = &self.crosstalk else { return Ok(Vec::new()) };
        let placement = ct.placement.as_ref().ok_or(NoiseError::Unplaced(control))?;
        let node_c = *placement.get(control).ok_or(NoiseError::Unplaced(control))?;
        let node_t = *placement.get(target).ok_or(NoiseError::Unplaced(target))?;
        let slots = &self.cache().slot_of_node;
        let mut pairs = Vec::new();
        for (slot, node, partner) in [(control, node_c, node_t), (target, node_t, node_c)] {
            for nb in ct.topology.neighbors(node) {
                if nb == partner {
                    continue;
                }
                if let Some(&s) = slots.get(&nb) {
                    pairs.push((slot, s));
                }
            }
        }
        Ok(pairs)
    }

    /// Post-gate error for `gate`, which has just been applied to `state`.
    pub fn apply_post_gate_error<T: Real, R: Rng + ?Sized>(
        &self,
        state: &mut StateVector<T>,
        gate: &Instruction,
        rng: &mut R,
    ) -> Result<(), NoiseError> {
        let slot = match gate.kind {
            GateKind::X => 0,
            GateKind::SX => 1,
            GateKind::CX => 2,
            _ => return Ok(()),
        };
        let cache = self.cache();
        let qs = &gate.qubits;
        let sim_err = |_| NoiseError::Unplaced(qs[0]);

        if let Some(u) = &cache.coherent[slot] {
            let u = cast(u);
            if qs.len() == 1 {
                let m = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
                state.apply_matrix1(qs[0], &m).map_err(sim_err)?;
            } else {
                state.apply_matrix2(qs[0], qs[1], &u).map_err(sim_err)?;
            }
        }

        for (pauli, p) in &cache.flips[slot] {
            if rng.random::<f64>() < *p {
                for (k, factor) in pauli.factors().iter().enumerate() {
                    if *factor == Pauli::I {
                        continue;
                    }
                    let m = factor.matrix::<T>();
                    let m = [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
                    state.apply_matrix1(qs[k], &m).map_err(sim_err)?;
                }
            }
        }

        if gate.kind == GateKind::CX {
            if let Some(ct) = &self.crosstalk {
                if ct.h_zz != 0.0 {
                    let d = zz_phases::<T>(ct.h_zz);
                    for (a, b) in self.crosstalk_pairs(qs[0], qs[1])? {
                        state.apply_diagonal2(a, b, &d).map_err(|_| NoiseError::Unplaced(b))?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn cast<T: Real>(m: &Matrix<f64>) -> Matrix<T> {
    let d = m.dim();
    Matrix::from_rows(
        (0..d).map(|r| (0..d).map(|c| Complex::new(T::of(m[(r, c)].re), T::of(m[(r, c)].im))).collect()).collect(),
    )
}
