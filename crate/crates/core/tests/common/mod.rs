//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use qbench_core::{Circuit, GateKind};

pub type Dense = Vec<Vec<C>>;

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Textbook matrix of a gate, first listed qubit as the low bit.
pub fn gate_matrix(kind: &GateKind) -> Dense {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (re(1.0), re(0.0), C::new(0.0, 1.0));
    match *kind {
        GateKind::H => vec![vec![re(s), re(s)], vec![re(s), re(-s)]],
        GateKind::X => vec![vec![z, o], vec![o, z]],
        GateKind::SX => vec![vec![(o + i) / 2.0, (o - i) / 2.0], vec![(o - i) / 2.0, (o + i) / 2.0]],
        GateKind::RX(a) => {
            let t = a.to_radians() / 2.0;
            vec![vec![re(t.cos()), -i * t.sin()], vec![-i * t.sin(), re(t.cos())]]
        }
        GateKind::RY(a) => {
            let t = a.to_radians() / 2.0;
            vec![vec![re(t.cos()), re(-t.sin())], vec![re(t.sin()), re(t.cos())]]
        }
        GateKind::RZ(a) => {
            let t = a.to_radians() / 2.0;
            vec![vec![C::from_polar(1.0, -t), z], vec![z, C::from_polar(1.0, t)]]
        }
        GateKind::CX => permutation4(&[0, 3, 2, 1]),
        GateKind::Swap => permutation4(&[0, 2, 1, 3]),
        GateKind::CZ => diag(&[o, o, o, -o]),
        GateKind::CP(a) => diag(&[o, o, o, C::from_polar(1.0, a.to_radians())]),
        GateKind::Measure(_) | GateKind::Reset => panic!("not unitary"),
    }
}

fn diag(d: &[C]) -> Dense {
    (0..d.len()).map(|r| (0..d.len()).map(|c| if r == c { d[r] } else { re(0.0) }).collect()).collect()
}

/// Column `c` maps to row `perm[c]`.
fn permutation4(perm: &[usize]) -> Dense {
    let mut m = vec![vec![re(0.0); 4]; 4];
    for (c, &r) in perm.iter().enumerate() {
        m[r][c] = re(1.0);
    }
    m
}

pub fn identity(dim: usize) -> Dense {
    diag(&vec![re(1.0); dim])
}

/// Lift a gate matrix on `qubits` to the full `2^n` space.
pub fn embed(n: usize, qubits: &[usize], m: &Dense) -> Dense {
    let dim = 1usize << n;
    let mask: usize = qubits.iter().map(|q| 1 << q).sum();
    let sub = |idx: usize| qubits.iter().enumerate().map(|(k, &q)| ((idx >> q) & 1) << k).sum::<usize>();
    let mut out = vec![vec![re(0.0); dim]; dim];
    for col in 0..dim {
        for row in 0..dim {
            if row & !mask == col & !mask {
                out[row][col] = m[sub(row)][sub(col)];
            }
        }
    }
    out
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![re(0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == re(0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Product of every unitary instruction; measurements are skipped.
pub fn circuit_unitary(c: &Circuit) -> Dense {
    let mut u = identity(1 << c.num_qubits);
    for inst in c.instructions.iter().filter(|i| i.kind.is_unitary()) {
        assert!(inst.condition.is_none(), "oracle handles unconditioned circuits only");
        u = matmul(&embed(c.num_qubits, &inst.qubits, &gate_matrix(&inst.kind)), &u);
    }
    u
}

pub fn column(m: &Dense, c: usize) -> Vec<C> {
    m.iter().map(|row| row[c]).collect()
}

/// Largest entrywise distance after removing the best global phase.
pub fn phase_distance(a: &[C], b: &[C]) -> f64 {
    let overlap: C = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 1e-12 { overlap / overlap.norm() } else { re(1.0) };
    a.iter().zip(b).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Longest path through the dependency DAG, by brute force over all
/// instruction pairs.
pub fn longest_path_depth(c: &Circuit) -> usize {
    let ins = &c.instructions;
    let mut best = vec![0usize; ins.len()];
    for j in 0..ins.len() {
        let mut longest = 0;
        for i in 0..j {
            let shares_qubit = ins[i].qubits.iter().any(|q| ins[j].qubits.contains(q));
            let feeds_condition = matches!((ins[i].kind, ins[j].condition), (GateKind::Measure(b), Some(cond)) if b == cond.clbit);
            if shares_qubit || feeds_condition {
                longest = longest.max(best[i]);
            }
        }
        best[j] = longest + 1;
    }
    best.into_iter().max().unwrap_or(0)
}

/// Upper chi-square critical value at significance `p = 0.001`
/// (Wilson-Hilferty).
pub fn chi2_critical_001(df: usize) -> f64 {
    let k = df as f64;
    let z = 3.090_232_306;
    k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
}
