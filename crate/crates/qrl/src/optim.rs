use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Transition;
use crate::executor::QExecutor;
use crate::QrlError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Spsa,
    Adam,
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "spsa" => Ok(OptimizerKind::Spsa),
            "adam" => Ok(OptimizerKind::Adam),
            _ => Err(format!("unknown optimizer `{s}` (spsa, adam)")),
        }
    }
}

/// `r + gamma * max_a' Q_target(s', a')`, or just `r` at episode end. Only
/// non-terminal transitions cost a circuit evaluation.
pub fn bellman_targets(
    target_params: &[f64],
    batch: &[Transition],
    gamma: f64,
    exec: &mut QExecutor,
) -> Result<Vec<f64>, QrlError> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                return Ok(t.reward);
            }
            let q = exec.q_values(target_params, t.next_state)?;
            Ok(t.reward + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        })
        .collect()
}

/// Predicted `Q(s, a)` for each transition: one circuit batch.
fn predictions(params: &[f64], batch: &[Transition], exec: &mut QExecutor) -> Result<Vec<f64>, QrlError> {
    batch.iter().map(|t| Ok(exec.q_values(params, t.state)?[t.action.index()])).collect()
}

/// Mean squared Bellman error over the batch.
pub fn batch_loss(params: &[f64], batch: &[Transition], targets: &[f64], exec: &mut QExecutor) -> Result<f64, QrlError> {
    let q = predictions(params, batch, exec)?;
    Ok(q.iter().zip(targets).map(|(q, y)| (q - y).powi(2)).sum::<f64>() / batch.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub loss: f64,
    pub grad: Vec<f64>,
    /// Shifted circuit batches run: always `2 * params.len()`.
    pub batches: u64,
}

/// Loss gradient by the parameter-shift rule. Every parameter drives exactly
/// one RY or RZ, so `dQ/dθ = (Q(θ + π/2) - Q(θ - π/2)) / 2` is exact.
pub fn gradient_parameter_shift(
    params: &[f64],
    batch: &[Transition],
    targets: &[f64],
    exec: &mut QExecutor,
) -> Result<Gradient, QrlError> {
    if batch.is_empty() {
        return Err(QrlError::Config("gradient of an empty batch".into()));
    }
    let q = predictions(params, batch, exec)?;
    let scale = 2.0 / batch.len() as f64;
    let residual: Vec<f64> = q.iter().zip(targets).map(|(q, y)| q - y).collect();
    let loss = residual.iter().map(|r| r * r).sum::<f64>() / batch.len() as f64;
    let mut shifted = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        shifted[k] = params[k] + FRAC_PI_2;
        let plus = predictions(&shifted, batch, exec)?;
        shifted[k] = params[k] - FRAC_PI_2;
        let minus = predictions(&shifted, batch, exec)?;
        shifted[k] = params[k];
        let g: f64 = residual.iter().zip(plus.iter().zip(&minus)).map(|(r, (p, m))| r * (p - m) / 2.0).sum();
        grad.push(scale * g);
    }
    Ok(Gradient { loss, grad, batches: 2 * params.len() as u64 })
}

/// Gain sequences `a_k = a / (A + k + 1)^alpha`, `c_k = c / (k + 1)^gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpsaCoeffs {
    pub a: f64,
    pub c: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for SpsaCoeffs {
    fn default() -> Self {
        Self { a: 0.2, c: 0.1, big_a: 10.0, alpha: 0.602, gamma: 0.101 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpsaStep {
    pub loss_plus: f64,
    pub loss_minus: f64,
    /// Always 2.
    pub loss_evaluations: u64,
}

/// One SPSA iteration with a Rademacher perturbation; `params` is updated
/// in place.
pub fn spsa_step<R, F>(
    params: &mut [f64],
    mut loss: F,
    iteration: u64,
    coeffs: &SpsaCoeffs,
    rng: &mut R,
) -> Result<SpsaStep, QrlError>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<f64, QrlError>,
{
    let k = iteration as f64;
    let ak = coeffs.a / (coeffs.big_a + k + 1.0).powf(coeffs.alpha);
    let ck = coeffs.c / (k + 1.0).powf(coeffs.gamma);
    let delta: Vec<f64> = (0..params.len()).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let plus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + ck * d).collect();
    let minus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p - ck * d).collect();
    let (lp, lm) = (loss(&plus)?, loss(&minus)?);
    let slope = (lp - lm) / (2.0 * ck);
    for (p, d) in params.iter_mut().zip(&delta) {
        // 1/delta_i == delta_i for a Rademacher draw
        *p -= ak * slope * d;
    }
    Ok(SpsaStep { loss_plus: lp, loss_minus: lm, loss_evaluations: 2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }
}

pub fn adam_step(params: &mut [f64], grad: &[f64], state: &mut AdamState, cfg: &AdamConfig) -> Result<(), QrlError> {
    if grad.len() != params.len() || state.m.len() != params.len() {
        return Err(QrlError::Config(format!("{} gradients for {} parameters", grad.len(), params.len())));
    }
    state.t += 1;
    let t = state.t as i32;
    let (c1, c2) = (1.0 - cfg.beta1.powi(t), 1.0 - cfg.beta2.powi(t));
    for i in 0..params.len() {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        let (m, v) = (state.m[i] / c1, state.v[i] / c2);
        params[i] -= cfg.lr * m / (v.sqrt() + cfg.eps);
    }
    Ok(())
}
