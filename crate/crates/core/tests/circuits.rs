mod common;

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use qbench_core::benchmarks::{
    build_qrl_ansatz, generate_batch, generate_qft_method1, generate_qft_method2, generate_qpe, qft_circuit,
    AnsatzConfig, Entangler, Family,
};
use qbench_core::circuit::{
    algorithmic_depth, normalized_depth, row_major_placement, transpile_to_basis, validate, AllToAll, Coupling,
};
use qbench_core::sim::StateVector;
use qbench_core::{Angle, Circuit, GateKind, GridTopology, Instruction, Simulator64};

use common::*;

fn arb_gate(n: usize) -> impl Strategy<Value = Instruction> {
    let angle = (-4.0f64..4.0).prop_map(Angle::radians);
    let single = prop_oneof![
        Just(GateKind::H),
        Just(GateKind::X),
        Just(GateKind::SX),
        angle.clone().prop_map(GateKind::RX),
        angle.clone().prop_map(GateKind::RY),
        angle.clone().prop_map(GateKind::RZ),
    ];
    let double = prop_oneof![Just(GateKind::CX), Just(GateKind::CZ), Just(GateKind::Swap), angle.prop_map(GateKind::CP)];
    let pair = (0..n, 0..n - 1).prop_map(|(a, b)| (a, if b >= a { b + 1 } else { b }));
    prop_oneof![
        (single, 0..n).prop_map(|(k, q)| Instruction::new(k, vec![q])),
        (double, pair).prop_map(|(k, (a, b))| Instruction::new(k, vec![a, b])),
    ]
}

fn arb_circuit(max_n: usize, max_len: usize) -> impl Strategy<Value = Circuit> {
    (2..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec(arb_gate(n), 0..max_len).prop_map(move |ins| {
            let mut c = Circuit::new("random", n, 0);
            c.instructions = ins;
            c
        })
    })
}

fn simulate(c: &Circuit, input: usize, width: usize) -> Vec<C> {
    let mut s = StateVector::<f64>::basis(width, input);
    for inst in c.instructions.iter().filter(|i| i.kind.is_unitary()) {
        s.apply_gate(&inst.kind, &inst.qubits).unwrap();
    }
    s.into_amplitudes()
}

fn unitary_part(c: &Circuit) -> Circuit {
    let mut u = c.clone();
    u.instructions.retain(|i| i.kind.is_unitary());
    u.num_clbits = 0;
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_match_dense_oracle(c in arb_circuit(5, 30), input in 0usize..32) {
        let input = input % (1 << c.num_qubits);
        let expect = column(&circuit_unitary(&c), input);
        let got = simulate(&c, input, c.num_qubits);
        prop_assert!(max_diff(&got, &expect) < 1e-10);
        let norm: f64 = got.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn depth_matches_longest_path(c in arb_circuit(6, 40)) {
        prop_assert_eq!(algorithmic_depth(&c).unwrap(), longest_path_depth(&c));
    }

    #[test]
    fn transpiled_random_circuits_are_equivalent(c in arb_circuit(4, 14), input in 0usize..16) {
        let grid = GridTopology::new(2, 3);
        let t = transpile_to_basis(&c, &grid, &row_major_placement(c.num_qubits, &grid).unwrap()).unwrap();
        check_line_column(&c, &t, input % (1 << c.num_qubits), &grid);
    }
}

/// Unitary equality up to one global phase, column by column.
fn same_unitary(a: &Circuit, b: &Circuit, tol: f64) -> bool {
    let (ua, ub) = (circuit_unitary(a), circuit_unitary(b));
    let flat = |u: &Dense| u.iter().flatten().copied().collect::<Vec<_>>();
    phase_distance(&flat(&ua), &flat(&ub)) < tol
}

#[test]
fn qft_matches_dft() {
    let c = qft_circuit(3).unwrap();
    let got = simulate(&c, 5, 3);
    for (k, a) in got.iter().enumerate() {
        let expect = C::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * 5.0 * k as f64 / 8.0);
        assert!((a - expect).norm() < 1e-12, "k = {k}");
    }
    for n in 1..=6 {
        let u = circuit_unitary(&qft_circuit(n).unwrap());
        let dim = 1 << n;
        #[allow(clippy::needless_range_loop)]
        for x in 0..dim {
            for k in 0..dim {
                let expect = C::from_polar(1.0 / (dim as f64).sqrt(), 2.0 * PI * (x * k) as f64 / dim as f64);
                assert!((u[k][x] - expect).norm() < 1e-12);
            }
        }
    }
    assert!(same_unitary(&qft_circuit(1).unwrap(), &{
        let mut h = Circuit::new("h", 1, 0);
        h.h(0);
        h
    }, 1e-15));
}

#[test]
fn static_iqft_inverts_qft() {
    for n in 1..=5 {
        let mut c = qft_circuit(n).unwrap();
        c.num_clbits = n;
        let q: Vec<usize> = (0..n).collect();
        qbench_core::benchmarks::append_iqft(&mut c, &q, &q, false);
        let u = circuit_unitary(&unitary_part(&c));
        assert!(same_unitary(&unitary_part(&c), &Circuit::new("id", n, 0), 1e-12), "n = {n}");
        assert!((u[0][0] - C::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn hadamard_decomposition() {
    let mut h = Circuit::new("h", 1, 0);
    h.h(0);
    let t = transpile_to_basis(&h, &GridTopology::square(2), &[0]).unwrap();
    let kinds: Vec<_> = t.circuit.instructions.iter().map(|i| i.kind).collect();
    assert_eq!(kinds, vec![GateKind::RZ(Angle::pi_frac(1, 1)), GateKind::SX, GateKind::RZ(Angle::pi_frac(1, 1))]);
    assert!(same_unitary(&h, &t.circuit, 1e-12));
    assert_eq!(normalized_depth(&h, &GridTopology::square(2)).unwrap(), 3);
}

#[test]
fn routed_controlled_phase_at_distance_three() {
    // nodes 0 and 3 on a 1x4 line are three hops apart
    let line = GridTopology::new(1, 4);
    let mut c = Circuit::new("cp", 2, 0);
    c.cp(0, 1, Angle::pi_frac(1, 1));
    let t = transpile_to_basis(&c, &line, &[0, 3]).unwrap();
    assert!(t.swaps_inserted >= 2);
    for input in 0..4 {
        check_line_column(&c, &t, input, &line);
    }
}

fn check_line_column(c: &Circuit, t: &qbench_core::circuit::Transpiled, input: usize, topo: &GridTopology) {
    let n = c.num_qubits;
    let width = t.circuit.num_qubits;
    let place = |x: usize, layout: &[usize]| (0..n).map(|q| ((x >> q) & 1) << layout[q]).sum::<usize>();
    let got = simulate(&t.circuit, place(input, &t.initial_layout), width);
    let ideal = column(&circuit_unitary(c), input);
    let mut expect = vec![C::new(0.0, 0.0); 1 << width];
    for (x, a) in ideal.into_iter().enumerate() {
        expect[place(x, &t.final_layout)] = a;
    }
    assert!(phase_distance(&got, &expect) < 1e-10);
    for inst in t.circuit.instructions.iter().filter(|i| i.kind == GateKind::CX) {
        assert!(topo.adjacent(t.nodes[inst.qubits[0]], t.nodes[inst.qubits[1]]));
    }
}

#[test]
fn adjacent_cx_is_unchanged() {
    let mut c = Circuit::new("cx", 2, 0);
    c.cx(0, 1);
    let t = transpile_to_basis(&c, &GridTopology::square(2), &[0, 1]).unwrap();
    assert_eq!(t.circuit.instructions, c.instructions);
    assert_eq!(normalized_depth(&c, &GridTopology::square(2)).unwrap(), algorithmic_depth(&c).unwrap());
}

#[test]
fn qft3_depths_from_oracles() {
    let c = qft_circuit(3).unwrap();
    assert_eq!(c.count_kind(|k| *k == GateKind::H), 3);
    assert_eq!(c.count_kind(|k| matches!(k, GateKind::CP(_))), 3);
    assert_eq!(c.count_kind(|k| *k == GateKind::Swap), 1);
    assert_eq!(algorithmic_depth(&c).unwrap(), longest_path_depth(&c));
    let grid = GridTopology::square(2);
    let t = transpile_to_basis(&c, &grid, &row_major_placement(3, &grid).unwrap()).unwrap();
    assert_eq!(normalized_depth(&c, &grid).unwrap(), longest_path_depth(&t.circuit));
    for input in 0..8 {
        check_line_column(&c, &t, input, &grid);
    }
}

/// Every generated benchmark circuit without mid-circuit measurement, up to
/// five qubits.
fn small_static_benchmarks() -> Vec<Circuit> {
    let mut out = Vec::new();
    for n in 2..=5 {
        out.push(generate_qft_method1(n, 1, false).unwrap().circuit);
        out.push(generate_qft_method2(n, (1 << n) - 1, false).unwrap().circuit);
        out.push(generate_qpe(n - 1, 0.3, false).unwrap().circuit);
        let cfg = AnsatzConfig {
            n_qubits: n,
            n_layers: 2,
            n_measurements: n,
            data_reupload: true,
            input_state: 1,
            entangler: Entangler::Ring,
            params: (0..4 * n).map(|i| 0.37 * i as f64).collect(),
        };
        out.push(build_qrl_ansatz(&cfg).unwrap());
    }
    out
}

#[test]
fn transpiled_benchmarks_are_equivalent() {
    let grid = GridTopology::square(3);
    for c in small_static_benchmarks() {
        let u = unitary_part(&c);
        let t = transpile_to_basis(&u, &grid, &row_major_placement(u.num_qubits, &grid).unwrap()).unwrap();
        for input in [0, 1, (1 << u.num_qubits) - 1] {
            check_line_column(&u, &t, input, &grid);
        }
        assert!(normalized_depth(&c, &grid).unwrap() >= normalized_depth(&c, &AllToAll(c.num_qubits)).unwrap());
    }
}

#[test]
fn generators_validate_across_widths() {
    for family in [Family::Qft1, Family::Qft2, Family::Qpe] {
        for n in 2..=12 {
            for dynamic in [false, true] {
                for inst in generate_batch(family, n, 3, dynamic, 11).unwrap() {
                    assert!(validate(&inst.circuit).is_empty(), "{family} n={n} dynamic={dynamic}");
                }
            }
        }
    }
    for n in 2..=8 {
        for inst in generate_batch(Family::QrlAnsatz, n, 2, false, 11).unwrap() {
            assert!(validate(&inst.circuit).is_empty());
        }
    }
}

#[test]
fn iqft_gate_counts() {
    for n in 2..=8 {
        let d = generate_qft_method2(n, 0, true).unwrap().circuit;
        let s = generate_qft_method2(n, 0, false).unwrap().circuit;
        assert_eq!(d.two_qubit_gate_count(), 0);
        assert_eq!(s.count_kind(|k| matches!(k, GateKind::CP(_))), n * (n - 1) / 2);
    }
}

#[test]
fn circuit_json_round_trip() {
    let inst = generate_qpe(3, 0.3, true).unwrap();
    let back = Circuit::from_json(&inst.circuit.to_json()).unwrap();
    assert_eq!(back, inst.circuit);
    let d = Simulator64::default().exact_distribution(&back).unwrap();
    assert!(d.total_variation(&inst.expected) < 1e-9);
}
