//! Fast invariant checks runnable from the command line.

use qbench_core::benchmarks::{generate_batch, Family};
use qbench_core::distributed::{partitioned_run, DistConfig};
use qbench_core::metrics::{bootstrap_std, hellinger_fidelity, polarization_fidelity};
use qbench_core::{Counts, ExactDistribution, Simulator64};
use qbench_qrl::{run_policy, Action, FrozenLakeEnv, Tile};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Check {
    match f() {
        Ok(detail) => Check { name, passed: true, detail },
        Err(detail) => Check { name, passed: false, detail },
    }
}

fn deferred_measurement() -> Result<String, String> {
    let sim = Simulator64::default();
    let mut worst: f64 = 0.0;
    for family in [Family::Qft1, Family::Qft2, Family::Qpe] {
        for width in 2..=6 {
            let st = generate_batch(family, width, 3, false, 1).map_err(|e| e.to_string())?;
            let dy = generate_batch(family, width, 3, true, 1).map_err(|e| e.to_string())?;
            for (a, b) in st.iter().zip(&dy) {
                let pa = sim.exact_distribution(&a.circuit).map_err(|e| e.to_string())?;
                let pb = sim.exact_distribution(&b.circuit).map_err(|e| e.to_string())?;
                worst = worst.max(pa.total_variation(&pb));
            }
        }
    }
    if worst < 1e-9 {
        Ok(format!("max total variation {worst:.2e}"))
    } else {
        Err(format!("total variation {worst:.2e}"))
    }
}

fn metric_anchors() -> Result<String, String> {
    let mut same = Counts::new(2);
    same.record(1, 10);
    let point = ExactDistribution::point_mass(2, 1);
    let h = hellinger_fidelity(&same, &point).map_err(|e| e.to_string())?;
    let mut other = Counts::new(2);
    other.record(2, 10);
    let zero = hellinger_fidelity(&other, &point).map_err(|e| e.to_string())?;
    let ok = h == 1.0
        && zero == 0.0
        && polarization_fidelity(0.25, 4.0) == 0.0
        && polarization_fidelity(1.0, 4.0) == 1.0
        && bootstrap_std(&[0.2, 0.9, 0.4], 1000, 3) == bootstrap_std(&[0.2, 0.9, 0.4], 1000, 3);
    if ok {
        Ok("closed forms and bootstrap determinism".into())
    } else {
        Err("anchor mismatch".into())
    }
}

fn environment() -> Result<String, String> {
    let mut env = FrozenLakeEnv::new(4).map_err(|e| e.to_string())?;
    for s in 0..16 {
        for a in Action::ALL {
            let t = env.transition(s, a);
            let goal = t.next_state != s && env.tile(t.next_state) == Tile::Goal;
            if (t.reward == 1.0) != goal {
                return Err(format!("reward rule broken at state {s} action {a:?}"));
            }
        }
    }
    let policy = |s: usize| {
        Ok(match s {
            0 | 4 | 9 => Action::Down,
            _ => Action::Right,
        })
    };
    let rate = run_policy(&mut env, policy, 3, 100).map_err(|e| e.to_string())?;
    if rate == 1.0 {
        Ok("reward rule and optimal path".into())
    } else {
        Err(format!("optimal policy succeeded {rate}"))
    }
}

fn distributed() -> Result<String, String> {
    let sim = Simulator64::default();
    for family in [Family::Qft1, Family::Qpe] {
        let inst = &generate_batch(family, 8, 1, false, 2).map_err(|e| e.to_string())?[0];
        let serial = sim.run_shots(&inst.circuit, 500, 9, None).map_err(|e| e.to_string())?.0;
        for w in [2, 4] {
            let run = partitioned_run(&inst.circuit, 500, 9, &DistConfig::new(w)).map_err(|e| e.to_string())?;
            if run.counts != serial {
                return Err(format!("{family} W={w} counts differ"));
            }
        }
    }
    Ok("partitioned counts equal serial for W = 2, 4".into())
}

pub fn invariant_suite() -> Vec<Check> {
    vec![
        check("deferred-measurement", deferred_measurement),
        check("metrics-anchors", metric_anchors),
        check("environment", environment),
        check("distributed", distributed),
    ]
}
