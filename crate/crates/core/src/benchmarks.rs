//! Problem generators. Each returns a circuit together with the readout
//! distribution an ideal device would produce.
//!
//! Readout is little-endian: classical bit `c_i` is the `i`-th character
//! from the right, so the integer value of a bitstring is the natural one.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Angle, Circuit, GateKind, Instruction};
use crate::sim::{ExactDistribution, SimError, Simulator};

#[derive(Debug, Error, PartialEq)]
pub enum BenchmarkError {
    #[error("width must be at least {min}, got {got}")]
    Width { min: usize, got: usize },
    #[error("secret {s} does not fit in {n} bits")]
    SecretOutOfRange { s: u64, n: usize },
    #[error("phase {0} is outside [0, 1)")]
    ThetaOutOfRange(f64),
    #[error("ansatz expects {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("invalid ansatz configuration: {0}")]
    Ansatz(String),
    #[error("unknown benchmark family `{0}`")]
    UnknownFamily(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Benchmark families known to the registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "qft1")]
    Qft1,
    #[serde(rename = "qft2")]
    Qft2,
    #[serde(rename = "qpe")]
    Qpe,
    #[serde(rename = "qrl-ansatz")]
    QrlAnsatz,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Qft1, Family::Qft2, Family::Qpe, Family::QrlAnsatz];

    pub fn name(self) -> &'static str {
        match self {
            Family::Qft1 => "qft1",
            Family::Qft2 => "qft2",
            Family::Qpe => "qpe",
            Family::QrlAnsatz => "qrl-ansatz",
        }
    }

    pub fn min_width(self) -> usize {
        match self {
            Family::Qpe => 2,
            _ => 1,
        }
    }

    /// Number of distinct problem parameters available at `width`.
    pub fn parameter_space(self, width: usize) -> u64 {
        let bits = match self {
            Family::Qpe => width.saturating_sub(1),
            _ => width,
        };
        1u64.checked_shl(bits as u32).unwrap_or(u64::MAX)
    }

    /// One instance for parameter index `k` (a secret, a phase numerator or
    /// an input state). `rng` supplies anything else the family needs.
    pub fn instance<R: Rng + ?Sized>(
        self,
        width: usize,
        k: u64,
        dynamic: bool,
        rng: &mut R,
    ) -> Result<BenchmarkInstance, BenchmarkError> {
        match self {
            Family::Qft1 => generate_qft_method1(width, k, dynamic),
            Family::Qft2 => generate_qft_method2(width, k, dynamic),
            Family::Qpe => {
                let t = width.checked_sub(1).filter(|&t| t >= 1).ok_or(BenchmarkError::Width { min: 2, got: width })?;
                generate_qpe(t, k as f64 / (1u64 << t) as f64, dynamic)
            }
            Family::QrlAnsatz => {
                let layers = 3;
                let params = (0..2 * layers * width).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                let config = AnsatzConfig {
                    n_qubits: width,
                    n_layers: layers,
                    n_measurements: width,
                    data_reupload: true,
                    input_state: k,
                    entangler: Entangler::Chain,
                    params,
                };
                generate_qrl_ansatz(&config)
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BenchmarkError;
    fn from_str(s: &str) -> Result<Self, BenchmarkError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| BenchmarkError::UnknownFamily(s.to_string()))
    }
}

/// Problem parameters of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkParams {
    pub family: Family,
    /// Circuit width in qubits.
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub dynamic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkInstance {
    pub circuit: Circuit,
    /// Distribution used for scoring.
    pub expected: ExactDistribution,
    /// QPE only: point mass on the rounded phase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_rounded: Option<ExactDistribution>,
    pub params: BenchmarkParams,
}

/// `m` instances of `family` at `width` with distinct problem parameters,
/// `m = min(parameter space, max_circuits)`.
pub fn generate_batch(
    family: Family,
    width: usize,
    max_circuits: usize,
    dynamic: bool,
    seed: u64,
) -> Result<Vec<BenchmarkInstance>, BenchmarkError> {
    if width < family.min_width() {
        return Err(BenchmarkError::Width { min: family.min_width(), got: width });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(width as u64);
    let space = family.parameter_space(width);
    let m = (max_circuits as u64).min(space) as usize;
    let mut ks: Vec<u64> = if space <= (1 << 24) {
        sample(&mut rng, space as usize, m).into_iter().map(|k| k as u64).collect()
    } else {
        let mut seen = std::collections::BTreeSet::new();
        while seen.len() < m {
            seen.insert(rng.random_range(0..space));
        }
        seen.into_iter().collect()
    };
    ks.sort_unstable();
    ks.into_iter().map(|k| family.instance(width, k, dynamic, &mut rng)).collect()
}

fn check_width(n: usize) -> Result<(), BenchmarkError> {
    if n == 0 {
        return Err(BenchmarkError::Width { min: 1, got: 0 });
    }
    Ok(())
}

/// QFT body on `qubits` (qubit `qubits[0]` least significant), including the
/// closing bit-reversal swaps. Realises `|x> -> 2^{-n/2} sum_k e^{2 pi i xk/2^n} |k>`.
pub fn append_qft(c: &mut Circuit, qubits: &[usize]) {
    let n = qubits.len();
    for j in (0..n).rev() {
        c.h(qubits[j]);
        for i in (0..j).rev() {
            c.cp(qubits[j], qubits[i], Angle::pi_frac(1, (j - i) as u32));
        }
    }
    for i in 0..n / 2 {
        c.swap(qubits[i], qubits[n - 1 - i]);
    }
}

/// Inverse QFT on `qubits` followed by readout of `qubits[j]` into `clbits[j]`.
///
/// The dynamic form drops the swaps by relabelling wires, measures each wire
/// right after its Hadamard and replaces every controlled phase by a phase
/// rotation conditioned on the control's measured bit.
pub fn append_iqft(c: &mut Circuit, qubits: &[usize], clbits: &[usize], dynamic: bool) {
    let n = qubits.len();
    if dynamic {
        let wire = |j: usize| qubits[n - 1 - j];
        for j in 0..n {
            for (i, &cb) in clbits.iter().enumerate().take(j) {
                let rz = GateKind::RZ(Angle::pi_frac(-1, (j - i) as u32));
                c.push(Instruction::new(rz, vec![wire(j)]).conditioned(cb, true));
            }
            c.h(wire(j));
            c.measure(wire(j), clbits[j]);
        }
    } else {
        for i in 0..n / 2 {
            c.swap(qubits[i], qubits[n - 1 - i]);
        }
        for j in 0..n {
            for i in 0..j {
                c.cp(qubits[j], qubits[i], Angle::pi_frac(-1, (j - i) as u32));
            }
            c.h(qubits[j]);
        }
        for j in 0..n {
            c.measure(qubits[j], clbits[j]);
        }
    }
}

pub fn qft_circuit(n: usize) -> Result<Circuit, BenchmarkError> {
    check_width(n)?;
    let mut c = Circuit::new(format!("qft-{n}"), n, 0);
    append_qft(&mut c, &(0..n).collect::<Vec<_>>());
    Ok(c)
}

/// Inverse QFT with measurement of every qubit.
pub fn iqft_circuit(n: usize, dynamic: bool) -> Result<Circuit, BenchmarkError> {
    check_width(n)?;
    let kind = if dynamic { "dynamic" } else { "static" };
    let mut c = Circuit::new(format!("iqft-{kind}-{n}"), n, n);
    let q: Vec<usize> = (0..n).collect();
    append_iqft(&mut c, &q, &q, dynamic);
    Ok(c)
}

fn check_secret(n: usize, s: u64) -> Result<(), BenchmarkError> {
    check_width(n)?;
    if n > 63 || s >> n != 0 {
        return Err(BenchmarkError::SecretOutOfRange { s, n });
    }
    Ok(())
}

fn tagged(c: Circuit, family: Family, dynamic: bool) -> Circuit {
    c.with_meta("family", family).with_meta("dynamic", dynamic)
}

/// Prepare `|s>`, apply QFT, add one in the Fourier basis, invert. Reads
/// out `s + 1 mod 2^n`.
pub fn generate_qft_method1(n: usize, s: u64, dynamic: bool) -> Result<BenchmarkInstance, BenchmarkError> {
    check_secret(n, s)?;
    let q: Vec<usize> = (0..n).collect();
    let mut c = Circuit::new(format!("qft1-{n}-{s}"), n, n);
    for &i in q.iter().filter(|&&i| (s >> i) & 1 == 1) {
        c.x(i);
    }
    append_qft(&mut c, &q);
    for j in 0..n {
        c.rz(j, Angle::pi_frac(1, (n - 1 - j) as u32));
    }
    append_iqft(&mut c, &q, &q, dynamic);
    let target = (s + 1) & ((1u64 << n) - 1);
    Ok(BenchmarkInstance {
        circuit: tagged(c, Family::Qft1, dynamic).with_meta("s", s),
        expected: ExactDistribution::point_mass(n, target),
        expected_rounded: None,
        params: BenchmarkParams { family: Family::Qft1, width: n, secret: Some(s), theta: None, dynamic },
    })
}

/// Uniform superposition, phase-encode `s`, invert the QFT. Reads out `s`.
pub fn generate_qft_method2(n: usize, s: u64, dynamic: bool) -> Result<BenchmarkInstance, BenchmarkError> {
    check_secret(n, s)?;
    let q: Vec<usize> = (0..n).collect();
    let mut c = Circuit::new(format!("qft2-{n}-{s}"), n, n);
    for &i in &q {
        c.h(i);
    }
    for j in 0..n {
        c.rz(j, Angle::pi_frac(s as i64, (n - 1 - j) as u32));
    }
    append_iqft(&mut c, &q, &q, dynamic);
    Ok(BenchmarkInstance {
        circuit: tagged(c, Family::Qft2, dynamic).with_meta("s", s),
        expected: ExactDistribution::point_mass(n, s),
        expected_rounded: None,
        params: BenchmarkParams { family: Family::Qft2, width: n, secret: Some(s), theta: None, dynamic },
    })
}

/// Readout distribution of ideal `t`-ancilla phase estimation of `theta`:
/// `P(k) = |2^{-t} sum_j e^{2 pi i j (theta - k/2^t)}|^2`.
pub fn qpe_kernel(t: usize, theta: f64) -> ExactDistribution {
    let size = 1u64 << t;
    let nf = size as f64;
    let mut d = ExactDistribution::new(t);
    for k in 0..size {
        let delta = theta - k as f64 / nf;
        let p = if (delta - delta.round()).abs() < 1e-15 {
            1.0
        } else {
            let r = (PI * nf * delta).sin() / (nf * (PI * delta).sin());
            r * r
        };
        // keep the table small for large registers
        if p > 0.0 && (size <= 1 << 16 || p > 1e-16) {
            d.add(k, p);
        }
    }
    d
}

/// Phase estimation of `U = diag(1, e^{2 pi i theta})` on one eigen qubit in
/// `|1>` with `t` ancillas (qubits `0..t`, eigen qubit `t`).
pub fn generate_qpe(t: usize, theta: f64, dynamic: bool) -> Result<BenchmarkInstance, BenchmarkError> {
    if t == 0 {
        return Err(BenchmarkError::Width { min: 2, got: 1 });
    }
    if t > 40 || !(0.0..1.0).contains(&theta) {
        return Err(BenchmarkError::ThetaOutOfRange(theta));
    }
    let size = 1u64 << t;
    let scaled = theta * size as f64;
    let exact = (scaled.fract() == 0.0).then_some(scaled as i64);

    let mut c = Circuit::new(format!("qpe-{t}-{theta}"), t + 1, t);
    c.x(t);
    for j in 0..t {
        c.h(j);
    }
    for j in 0..t {
        // U^{2^j} = phase 2 pi theta 2^j
        let angle = match exact {
            Some(a) => Angle::pi_frac((a << (j + 1)) & ((2 * size as i64) - 1), t as u32),
            None => Angle::radians(2.0 * PI * (theta * (1u64 << j) as f64).fract()),
        };
        c.cp(j, t, angle);
    }
    let anc: Vec<usize> = (0..t).collect();
    append_iqft(&mut c, &anc, &anc, dynamic);

    let rounded = (scaled.round() as u64) % size;
    Ok(BenchmarkInstance {
        circuit: tagged(c, Family::Qpe, dynamic).with_meta("theta", theta),
        expected: match exact {
            Some(a) => ExactDistribution::point_mass(t, a as u64),
            None => qpe_kernel(t, theta),
        },
        expected_rounded: Some(ExactDistribution::point_mass(t, rounded)),
        params: BenchmarkParams { family: Family::Qpe, width: t + 1, secret: None, theta: Some(theta), dynamic },
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Entangler {
    /// CZ on `(i, i+1)`.
    #[default]
    Chain,
    /// Chain plus CZ on `(n-1, 0)`.
    Ring,
}

/// Layered RY/RZ ansatz with CZ entanglers and RX(pi) input encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub n_measurements: usize,
    pub data_reupload: bool,
    pub input_state: u64,
    #[serde(default)]
    pub entangler: Entangler,
    /// `params[2 (l n + i)]` is the RY angle of qubit `i` in layer `l`,
    /// the next entry its RZ angle.
    pub params: Vec<f64>,
}

impl AnsatzConfig {
    pub fn param_count(n_qubits: usize, n_layers: usize) -> usize {
        2 * n_qubits * n_layers
    }

    pub fn check(&self) -> Result<(), BenchmarkError> {
        check_width(self.n_qubits)?;
        let expected = Self::param_count(self.n_qubits, self.n_layers);
        if self.params.len() != expected {
            return Err(BenchmarkError::ParamCount { expected, got: self.params.len() });
        }
        if self.n_measurements > self.n_qubits {
            return Err(BenchmarkError::Ansatz(format!(
                "{} measurements on {} qubits",
                self.n_measurements, self.n_qubits
            )));
        }
        if self.n_qubits < 64 && self.input_state >> self.n_qubits != 0 {
            return Err(BenchmarkError::Ansatz(format!("input state {} needs more qubits", self.input_state)));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(BenchmarkError::Ansatz("non-finite parameter".into()));
        }
        Ok(())
    }
}

pub fn build_qrl_ansatz(config: &AnsatzConfig) -> Result<Circuit, BenchmarkError> {
    config.check()?;
    let n = config.n_qubits;
    let mut c = Circuit::new(format!("qrl-ansatz-{n}x{}", config.n_layers), n, config.n_measurements);
    let encode = |c: &mut Circuit| {
        for i in (0..n).filter(|&i| (config.input_state >> i) & 1 == 1) {
            c.rx(i, Angle::pi_frac(1, 0));
        }
    };
    encode(&mut c);
    for l in 0..config.n_layers {
        if l > 0 && config.data_reupload {
            encode(&mut c);
        }
        for i in 0..n {
            let base = 2 * (l * n + i);
            c.ry(i, Angle::radians(config.params[base]));
            c.rz(i, Angle::radians(config.params[base + 1]));
        }
        for i in 0..n.saturating_sub(1) {
            c.cz(i, i + 1);
        }
        if config.entangler == Entangler::Ring && n > 2 {
            c.cz(n - 1, 0);
        }
    }
    for i in 0..config.n_measurements {
        c.measure(i, i);
    }
    Ok(c.with_meta("family", Family::QrlAnsatz).with_meta("input_state", config.input_state))
}

/// Ansatz as a benchmark instance; the expected distribution is the
/// noiseless simulation of the circuit itself.
pub fn generate_qrl_ansatz(config: &AnsatzConfig) -> Result<BenchmarkInstance, BenchmarkError> {
    let circuit = build_qrl_ansatz(config)?;
    let expected = Simulator::<f64>::default().exact_distribution(&circuit)?.pruned(1e-16);
    Ok(BenchmarkInstance {
        circuit,
        expected,
        expected_rounded: None,
        params: BenchmarkParams {
            family: Family::QrlAnsatz,
            width: config.n_qubits,
            secret: Some(config.input_state),
            theta: None,
            dynamic: false,
        },
    })
}
