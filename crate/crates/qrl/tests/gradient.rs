use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbench_qrl::optim::{batch_loss, bellman_targets};
use qbench_qrl::{gradient_parameter_shift, q_values, Action, AnsatzShape, QExecutor, QMode, Transition};

fn shape(n_qubits: usize, n_layers: usize) -> AnsatzShape {
    AnsatzShape { n_qubits, n_layers, n_measurements: n_qubits.min(4), data_reupload: true }
}

fn random_batch(rng: &mut ChaCha8Rng, n: usize, states: usize) -> Vec<Transition> {
    (0..n)
        .map(|_| Transition {
            state: rng.random_range(0..states),
            action: Action::from_index(rng.random_range(0..4)).unwrap(),
            reward: if rng.random::<f64>() < 0.2 { 1.0 } else { 0.0 },
            next_state: rng.random_range(0..states),
            done: rng.random::<bool>(),
        })
        .collect()
}

#[test]
fn identity_and_single_rotation_closed_forms() {
    let mut exec = QExecutor::new(shape(4, 2), QMode::Exact, 0);
    let zeros = vec![0.0; 16];
    assert!(q_values(&zeros, 0, &mut exec).unwrap().iter().all(|z| (z - 1.0).abs() < 1e-12));
    let mut p = zeros.clone();
    p[0] = std::f64::consts::PI;
    let z = q_values(&p, 0, &mut exec).unwrap();
    assert!((z[0] + 1.0).abs() < 1e-12);
    assert!(z[1..].iter().all(|z| (z - 1.0).abs() < 1e-12));
    assert_eq!(exec.evaluations, 2);
}

#[test]
fn one_qubit_shift_rule_is_exact() {
    // <Z> = cos(theta) for RY(theta) RZ(phi) on |0>
    let mut exec = QExecutor::new(AnsatzShape { n_qubits: 1, n_layers: 1, n_measurements: 1, data_reupload: false }, QMode::Exact, 0);
    let y = 0.3;
    let batch = [Transition { state: 0, action: Action::Left, reward: y, next_state: 0, done: true }];
    for theta in [-2.0, -0.4, 0.0, 0.9, 2.7] {
        let g = gradient_parameter_shift(&[theta, 0.5], &batch, &[y], &mut exec).unwrap();
        let analytic = 2.0 * (theta.cos() - y) * -theta.sin();
        assert!((g.grad[0] - analytic).abs() < 1e-12);
        assert!(g.grad[1].abs() < 1e-12);
        assert!((g.loss - (theta.cos() - y).powi(2)).abs() < 1e-12);
    }
}

#[test]
fn shift_rule_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let sh = shape(4, 3);
    let mut exec = QExecutor::new(sh.clone(), QMode::Exact, 0);
    let h = 1e-5;
    for _ in 0..50 {
        let params: Vec<f64> = (0..sh.param_count()).map(|_| rng.random_range(-3.2..3.2)).collect();
        let target: Vec<f64> = (0..sh.param_count()).map(|_| rng.random_range(-3.2..3.2)).collect();
        let batch = random_batch(&mut rng, 4, 16);
        let y = bellman_targets(&target, &batch, 0.9, &mut exec).unwrap();
        let g = gradient_parameter_shift(&params, &batch, &y, &mut exec).unwrap();
        for k in 0..params.len() {
            let mut p = params.clone();
            p[k] += h;
            let up = batch_loss(&p, &batch, &y, &mut exec).unwrap();
            p[k] -= 2.0 * h;
            let down = batch_loss(&p, &batch, &y, &mut exec).unwrap();
            let fd = (up - down) / (2.0 * h);
            assert!((g.grad[k] - fd).abs() < 1e-4, "param {k}: {} vs {fd}", g.grad[k]);
        }
    }
}

#[test]
fn gradient_cost_is_two_batches_per_parameter() {
    let sh = shape(4, 3);
    let mut exec = QExecutor::new(sh.clone(), QMode::Exact, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let batch = random_batch(&mut rng, 7, 16);
    let before = exec.evaluations;
    let g = gradient_parameter_shift(&vec![0.1; sh.param_count()], &batch, &[0.0; 7], &mut exec).unwrap();
    assert_eq!(g.batches, 2 * sh.param_count() as u64);
    // one prediction batch plus the shifted batches
    assert_eq!(exec.evaluations - before, (1 + g.batches) * batch.len() as u64);
    let before = exec.evaluations;
    bellman_targets(&vec![0.1; sh.param_count()], &batch, 0.9, &mut exec).unwrap();
    assert_eq!(exec.evaluations - before, batch.iter().filter(|t| !t.done).count() as u64);
}

#[test]
fn shots_converge_to_exact_expectations() {
    let sh = shape(4, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params: Vec<f64> = (0..sh.param_count()).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut exact = QExecutor::new(sh.clone(), QMode::Exact, 0);
    let mut sampled = QExecutor::new(sh, QMode::Shots(1_000_000), 5);
    for state in [0, 6, 13] {
        let a = exact.q_values(&params, state).unwrap();
        let b = sampled.q_values(&params, state).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 0.01, "state {state}: {x} vs {y}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_values_are_bounded(seed in 0u64..1000, state in 0usize..16) {
        let sh = shape(4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params: Vec<f64> = (0..sh.param_count()).map(|_| rng.random_range(-7.0..7.0)).collect();
        let q = QExecutor::new(sh, QMode::Exact, 0).q_values(&params, state).unwrap();
        prop_assert_eq!(q.len(), 4);
        prop_assert!(q.iter().all(|z| z.abs() <= 1.0 + 1e-12));
    }
}
