use std::collections::HashMap;

use super::{validate, Angle, Circuit, CircuitError, Condition, Coupling, GateKind, Instruction};

/// A circuit lowered to `{X, SX, RZ, CX}` plus measurement and reset, with
/// every CX on adjacent topology nodes.
///
/// The lowered circuit is indexed by compact slots rather than topology
/// nodes: slot `i` lives on `nodes[i]`. The first `width` slots hold the
/// logical qubits at the start; further slots are idle nodes (in `|0>`)
/// pulled in by routing.
#[derive(Clone, Debug, PartialEq)]
pub struct Transpiled {
    pub circuit: Circuit,
    pub nodes: Vec<usize>,
    /// Logical qubit to slot before the first instruction.
    pub initial_layout: Vec<usize>,
    /// Logical qubit to slot after the last instruction.
    pub final_layout: Vec<usize>,
    pub swaps_inserted: usize,
}

/// Logical qubit `i` on node `i`.
pub fn row_major_placement(width: usize, topology: &impl Coupling) -> Result<Vec<usize>, CircuitError> {
    if width > topology.num_nodes() {
        return Err(CircuitError::Unplaceable { width, nodes: topology.num_nodes() });
    }
    Ok((0..width).collect())
}

struct Router<'a, T: Coupling> {
    topology: &'a T,
    nodes: Vec<usize>,
    slot_of_node: HashMap<usize, usize>,
    /// logical -> slot
    layout: Vec<usize>,
    /// slot -> logical, if occupied
    occupant: Vec<Option<usize>>,
    out: Vec<Instruction>,
    swaps: usize,
}

impl<'a, T: Coupling> Router<'a, T> {
    fn slot(&mut self, node: usize) -> usize {
        if let Some(&s) = self.slot_of_node.get(&node) {
            return s;
        }
        let s = self.nodes.len();
        self.nodes.push(node);
        self.occupant.push(None);
        self.slot_of_node.insert(node, s);
        s
    }

    fn emit(&mut self, kind: GateKind, qubits: &[usize], condition: Option<Condition>) {
        self.out.push(Instruction { kind, qubits: qubits.to_vec(), condition });
    }

    fn emit_rz(&mut self, q: usize, a: Angle, cond: Option<Condition>) {
        self.emit(GateKind::RZ(a), &[q], cond);
    }

    fn lower_single(&mut self, kind: GateKind, q: usize, cond: Option<Condition>) {
        let half_pi = Angle::pi_frac(1, 1);
        match kind {
            GateKind::X | GateKind::SX | GateKind::RZ(_) | GateKind::Measure(_) | GateKind::Reset => {
                self.emit(kind, &[q], cond)
            }
            GateKind::H => {
                self.emit_rz(q, half_pi, cond);
                self.emit(GateKind::SX, &[q], cond);
                self.emit_rz(q, half_pi, cond);
            }
            GateKind::RX(theta) => {
                self.emit_rz(q, half_pi, cond);
                self.emit(GateKind::SX, &[q], cond);
                self.emit_rz(q, theta + Angle::pi_frac(1, 0), cond);
                self.emit(GateKind::SX, &[q], cond);
                self.emit_rz(q, half_pi, cond);
            }
            GateKind::RY(theta) => {
                self.emit(GateKind::SX, &[q], cond);
                self.emit_rz(q, theta + Angle::pi_frac(1, 0), cond);
                self.emit(GateKind::SX, &[q], cond);
                self.emit_rz(q, Angle::pi_frac(1, 0), cond);
            }
            _ => unreachable!("two-qubit kind in single-qubit lowering"),
        }
    }

    fn lower_pair(&mut self, kind: GateKind, a: usize, b: usize) {
        match kind {
            GateKind::CX => self.emit(GateKind::CX, &[a, b], None),
            GateKind::CZ => {
                self.lower_single(GateKind::H, b, None);
                self.emit(GateKind::CX, &[a, b], None);
                self.lower_single(GateKind::H, b, None);
            }
            GateKind::CP(lambda) => {
                let half = lambda.half();
                self.emit_rz(a, half, None);
                self.emit(GateKind::CX, &[a, b], None);
                self.emit_rz(b, -half, None);
                self.emit(GateKind::CX, &[a, b], None);
                self.emit_rz(b, half, None);
            }
            GateKind::Swap => {
                self.emit(GateKind::CX, &[a, b], None);
                self.emit(GateKind::CX, &[b, a], None);
                self.emit(GateKind::CX, &[a, b], None);
            }
            _ => unreachable!("single-qubit kind in pair lowering"),
        }
    }

    /// Move logical `a` along a shortest path until it neighbours logical `b`.
    fn bring_together(&mut self, a: usize, b: usize) {
        loop {
            let (na, nb) = (self.nodes[self.layout[a]], self.nodes[self.layout[b]]);
            if self.topology.adjacent(na, nb) {
                return;
            }
            let path = self.topology.shortest_path(na, nb).expect("connected topology");
            let from = self.layout[a];
            let to = self.slot(path[1]);
            self.lower_pair(GateKind::Swap, from, to);
            self.swaps += 1;
            let displaced = self.occupant[to];
            self.occupant[to] = Some(a);
            self.occupant[from] = displaced;
            self.layout[a] = to;
            if let Some(d) = displaced {
                self.layout[d] = from;
            }
        }
    }
}

/// Lower `circuit` to the `{X, SX, RZ, CX}` basis and route it on
/// `topology`, starting from `placement` (logical qubit to node).
///
/// Routing is greedy: the first qubit of a non-adjacent pair walks along a
/// shortest path, one SWAP per step, until it neighbours the second.
/// Conditioned single-qubit gates are lowered gate by gate, each basis gate
/// keeping the original condition.
pub fn transpile_to_basis(
    circuit: &Circuit,
    topology: &impl Coupling,
    placement: &[usize],
) -> Result<Transpiled, CircuitError> {
    let violations = validate(circuit);
    if !violations.is_empty() {
        return Err(CircuitError::Invalid(violations));
    }
    let width = circuit.num_qubits;
    if width > topology.num_nodes() {
        return Err(CircuitError::Unplaceable { width, nodes: topology.num_nodes() });
    }
    if placement.len() != width {
        return Err(CircuitError::BadPlacement(placement.len()));
    }
    let mut router = Router {
        topology,
        nodes: Vec::new(),
        slot_of_node: HashMap::new(),
        layout: (0..width).collect(),
        occupant: Vec::new(),
        out: Vec::new(),
        swaps: 0,
    };
    for (logical, &node) in placement.iter().enumerate() {
        if node >= topology.num_nodes() || router.slot_of_node.contains_key(&node) {
            return Err(CircuitError::BadPlacement(node));
        }
        let s = router.slot(node);
        router.occupant[s] = Some(logical);
    }

    for inst in &circuit.instructions {
        match *inst.qubits.as_slice() {
            [q] => {
                let slot = router.layout[q];
                router.lower_single(inst.kind, slot, inst.condition);
            }
            [a, b] => {
                router.bring_together(a, b);
                let (sa, sb) = (router.layout[a], router.layout[b]);
                router.lower_pair(inst.kind, sa, sb);
            }
            _ => unreachable!("validated arity"),
        }
    }

    let mut lowered = Circuit::new(format!("{}-transpiled", circuit.name), router.nodes.len(), circuit.num_clbits);
    lowered.metadata = circuit.metadata.clone();
    lowered.instructions = router.out;
    Ok(Transpiled {
        circuit: lowered,
        nodes: router.nodes,
        initial_layout: (0..width).collect(),
        final_layout: router.layout,
        swaps_inserted: router.swaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{AllToAll, GridTopology};

    #[test]
    fn only_basis_gates_on_adjacent_nodes() {
        let mut c = Circuit::new("mix", 4, 4);
        c.h(0).cp(0, 3, Angle::pi_frac(1, 2)).swap(1, 3).cz(2, 0).rx(1, Angle::radians(0.3));
        c.ry(2, Angle::radians(-1.1));
        for q in 0..4 {
            c.measure(q, q);
        }
        let grid = GridTopology::new(1, 4);
        let t = transpile_to_basis(&c, &grid, &[0, 1, 2, 3]).unwrap();
        for inst in &t.circuit.instructions {
            assert!(inst.kind.is_basis(), "{inst}");
            if inst.kind == GateKind::CX {
                assert!(grid.adjacent(t.nodes[inst.qubits[0]], t.nodes[inst.qubits[1]]));
            }
        }
        assert!(t.swaps_inserted > 0);
    }

    #[test]
    fn adjacent_cx_is_untouched() {
        let mut c = Circuit::new("cx", 2, 0);
        c.cx(0, 1);
        let t = transpile_to_basis(&c, &GridTopology::new(2, 2), &[0, 1]).unwrap();
        assert_eq!(t.circuit.instructions, c.instructions);
        assert_eq!(t.swaps_inserted, 0);
    }

    #[test]
    fn routing_pulls_in_idle_nodes() {
        let mut c = Circuit::new("far", 2, 0);
        c.cp(0, 1, Angle::pi_frac(1, 1));
        let grid = GridTopology::new(1, 4);
        let t = transpile_to_basis(&c, &grid, &[0, 3]).unwrap();
        assert_eq!(t.nodes.len(), 4);
        assert_eq!(t.swaps_inserted, 2);
        assert_eq!(t.final_layout[1], 1);
    }

    #[test]
    fn unplaceable_and_bad_placements() {
        let c = Circuit::new("wide", 5, 0);
        assert!(matches!(
            transpile_to_basis(&c, &GridTopology::new(2, 2), &[0, 1, 2, 3, 4]),
            Err(CircuitError::Unplaceable { .. })
        ));
        let c = Circuit::new("two", 2, 0);
        assert!(transpile_to_basis(&c, &AllToAll(3), &[1, 1]).is_err());
        assert!(transpile_to_basis(&c, &AllToAll(3), &[0, 7]).is_err());
    }

    #[test]
    fn conditions_survive_lowering() {
        let mut c = Circuit::new("ff", 2, 1);
        c.h(0).measure(0, 0);
        c.push(Instruction::new(GateKind::H, vec![1]).conditioned(0, true));
        let t = transpile_to_basis(&c, &AllToAll(2), &[0, 1]).unwrap();
        let conditioned: Vec<_> = t.circuit.instructions.iter().filter(|i| i.condition.is_some()).collect();
        assert_eq!(conditioned.len(), 3);
        assert!(conditioned.iter().all(|i| i.kind.is_basis()));
    }
}
