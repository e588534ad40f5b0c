use qbench_core::benchmarks::{generate_batch, qft_circuit, Family};
use qbench_core::distributed::{
    apply_global_gate, apply_local_gate, partitioned_run, partitioned_state, ChannelTransport, DistConfig, DistError,
    Partition, RankStats, TransportKind,
};
use qbench_core::{Angle, Circuit, GateKind, Instruction, Simulator64};

fn serial_amplitudes(c: &Circuit) -> Vec<num_complex::Complex64> {
    Simulator64::default().final_state(c).unwrap().into_amplitudes()
}

#[test]
fn benchmark_counts_bit_exact() {
    let serial = Simulator64::default();
    for family in [Family::Qft1, Family::Qft2, Family::Qpe, Family::QrlAnsatz] {
        for width in [4, 7, 10] {
            for inst in generate_batch(family, width, 1, false, 3).unwrap() {
                let expect = serial.run_shots(&inst.circuit, 1000, 77, None).unwrap().0;
                for w in [2, 4, 8] {
                    let run = partitioned_run(&inst.circuit, 1000, 77, &DistConfig::new(w)).unwrap();
                    assert!(!run.serial_fallback);
                    assert_eq!(run.counts, expect, "{family} width {width} W={w}");
                }
            }
        }
    }
}

#[test]
fn gathered_state_equals_serial_state() {
    let mut c = qft_circuit(9).unwrap();
    c.rx(8, Angle::radians(0.2)).swap(2, 7).cx(8, 1).cx(1, 8).cz(7, 8).ry(7, Angle::radians(-1.3));
    let serial = serial_amplitudes(&c);
    for kind in [TransportKind::Channel, TransportKind::Tcp] {
        for w in [2, 4, 8] {
            let (state, stats) = partitioned_state::<f64>(&c, &DistConfig { workers: w, transport: kind }).unwrap();
            assert_eq!(state, serial, "W={w} {kind:?}");
            let total: f64 = state.iter().map(|a| a.norm_sqr()).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(stats.iter().all(|s| s.exchange_rounds == stats[0].exchange_rounds));
        }
    }
}

/// Gates that move amplitude across a global qubit.
fn expected_rounds(c: &Circuit, local: usize) -> u64 {
    c.instructions
        .iter()
        .filter(|i| i.kind.is_unitary() && !i.kind.is_diagonal())
        .filter(|i| match i.kind {
            GateKind::CX => i.qubits[1] >= local,
            _ => i.qubits.iter().any(|&q| q >= local),
        })
        .count() as u64
}

#[test]
fn exchange_rounds_follow_the_message_model() {
    let mut c = qft_circuit(8).unwrap();
    c.h(7).cx(7, 0).cx(0, 7).x(6).cz(6, 7);
    for w in [2usize, 4, 8] {
        let local = 8 - w.trailing_zeros() as usize;
        let (_, stats) = partitioned_state::<f64>(&c, &DistConfig::new(w)).unwrap();
        for s in &stats {
            assert_eq!(s.exchange_rounds, expected_rounds(&c, local), "W={w} rank {}", s.rank);
        }
    }
}

#[test]
fn collective_calls_on_explicit_partitions() {
    // H on the global qubit of a 3-qubit state split over two ranks
    let mut c = Circuit::new("h", 3, 0);
    c.h(0).h(2);
    let serial = serial_amplitudes(&c);
    let transports = ChannelTransport::<f64>::mesh(2);
    let blocks: Vec<Vec<num_complex::Complex64>> = std::thread::scope(|s| {
        let handles: Vec<_> = transports
            .into_iter()
            .enumerate()
            .map(|(rank, mut t)| {
                s.spawn(move || {
                    let mut p = Partition::<f64>::new(rank, 2, 3).unwrap();
                    let mut stats = RankStats::default();
                    apply_local_gate(&mut p, &Instruction::new(GateKind::H, vec![0])).unwrap();
                    let global = Instruction::new(GateKind::H, vec![2]);
                    assert_eq!(apply_local_gate(&mut p, &global), Err(DistError::GlobalQubit(2)));
                    apply_global_gate(&mut p, &global, &mut t, &mut stats).unwrap();
                    p.block
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let gathered: Vec<_> = blocks.concat();
    for (a, b) in gathered.iter().zip(&serial) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn zero_messages_for_diagonal_global_gates() {
    let mut c = Circuit::new("diag", 5, 0);
    for q in 0..3 {
        c.h(q);
    }
    let (_, base) = partitioned_state::<f64>(&c, &DistConfig::new(4)).unwrap();
    c.cz(3, 4).cp(0, 4, Angle::pi_frac(3, 3)).rz(4, Angle::radians(1.0)).cz(1, 3);
    let (state, after) = partitioned_state::<f64>(&c, &DistConfig::new(4)).unwrap();
    assert_eq!(state, serial_amplitudes(&c));
    for (a, b) in after.iter().zip(&base) {
        assert_eq!(a.messages_sent, b.messages_sent);
    }
}

#[test]
fn single_precision_partitioning() {
    let c = qft_circuit(7).unwrap();
    let serial = qbench_core::Simulator32::default().final_state(&c).unwrap().into_amplitudes();
    let (state, _) = partitioned_state::<f32>(&c, &DistConfig::new(4)).unwrap();
    assert_eq!(state, serial);
}

#[test]
fn rank_logs_serialise() {
    let mut c = qft_circuit(6).unwrap();
    c.num_clbits = 6;
    for q in 0..6 {
        c.measure(q, q);
    }
    let run = partitioned_run(&c, 100, 1, &DistConfig { workers: 2, transport: TransportKind::Tcp }).unwrap();
    let json = serde_json::to_string(&run.ranks).unwrap();
    let back: Vec<RankStats> = serde_json::from_str(&json).unwrap();
    assert_eq!(back.len(), 2);
    assert!(back.iter().all(|s| s.total_secs >= 0.0));
}

#[test]
fn one_amplitude_per_rank() {
    let mut c = qft_circuit(3).unwrap();
    c.rx(0, Angle::radians(0.7)).sx(1).cx(2, 0).swap(0, 2).ry(1, Angle::radians(-0.4));
    let serial = serial_amplitudes(&c);
    for kind in [TransportKind::Channel, TransportKind::Tcp] {
        let (state, _) = partitioned_state::<f64>(&c, &DistConfig { workers: 8, transport: kind }).unwrap();
        for (a, b) in state.iter().zip(&serial) {
            assert!((a - b).norm() < 1e-14, "{kind:?}");
        }
    }
    for family in [Family::Qft1, Family::Qpe] {
        let inst = &generate_batch(family, 3, 1, false, 1).unwrap()[0];
        let expect = Simulator64::default().run_shots(&inst.circuit, 500, 4, None).unwrap().0;
        assert_eq!(partitioned_run(&inst.circuit, 500, 4, &DistConfig::new(8)).unwrap().counts, expect);
    }
}
