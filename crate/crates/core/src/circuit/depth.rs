use super::transpile::{row_major_placement, transpile_to_basis};
use super::{validate, Circuit, CircuitError, Coupling, GateKind};

/// Length of the longest dependency chain.
///
/// Every instruction occupies one layer on each qubit it touches. A
/// conditioned instruction additionally waits for the measurement that
/// produced its condition bit.
pub fn algorithmic_depth(circuit: &Circuit) -> Result<usize, CircuitError> {
    let violations = validate(circuit);
    if !violations.is_empty() {
        return Err(CircuitError::Invalid(violations));
    }
    let mut qubit_layer = vec![0usize; circuit.num_qubits];
    let mut clbit_layer = vec![0usize; circuit.num_clbits];
    let mut depth = 0;
    for inst in &circuit.instructions {
        let mut start = inst.qubits.iter().map(|&q| qubit_layer[q]).max().unwrap_or(0);
        if let Some(cond) = inst.condition {
            start = start.max(clbit_layer[cond.clbit]);
        }
        let layer = start + 1;
        for &q in &inst.qubits {
            qubit_layer[q] = layer;
        }
        if let GateKind::Measure(c) = inst.kind {
            clbit_layer[c] = layer;
        }
        depth = depth.max(layer);
    }
    Ok(depth)
}

/// Depth after lowering to `{X, SX, RZ, CX}` on `topology` with row-major
/// placement.
pub fn normalized_depth(circuit: &Circuit, topology: &impl Coupling) -> Result<usize, CircuitError> {
    let placement = row_major_placement(circuit.num_qubits, topology)?;
    let routed = transpile_to_basis(circuit, topology, &placement)?;
    algorithmic_depth(&routed.circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{AllToAll, Angle, GridTopology, Instruction};

    #[test]
    fn trivial_depths() {
        let mut c = Circuit::new("m", 1, 1);
        c.h(0).measure(0, 0);
        assert_eq!(algorithmic_depth(&c).unwrap(), 2);
        assert_eq!(algorithmic_depth(&Circuit::new("e", 3, 0)).unwrap(), 0);
    }

    #[test]
    fn conditioned_gate_waits_for_measurement() {
        let mut c = Circuit::new("ff", 2, 1);
        c.h(0).h(0).h(0).measure(0, 0);
        c.push(Instruction::new(GateKind::X, vec![1]).conditioned(0, true));
        // qubit 1 is idle until the measurement at layer 4 completes
        assert_eq!(algorithmic_depth(&c).unwrap(), 5);
    }

    #[test]
    fn invalid_circuit_is_an_error() {
        let mut c = Circuit::new("bad", 1, 1);
        c.measure(0, 0).h(0);
        assert!(matches!(algorithmic_depth(&c), Err(CircuitError::Invalid(_))));
    }

    #[test]
    fn normalized_depth_of_basis_and_hadamard() {
        let mut basis = Circuit::new("b", 2, 0);
        basis.cx(0, 1).rz(1, Angle::pi_frac(1, 2)).cx(0, 1);
        let grid = GridTopology::new(1, 2);
        assert_eq!(normalized_depth(&basis, &grid).unwrap(), algorithmic_depth(&basis).unwrap());

        let mut h = Circuit::new("h", 1, 0);
        h.h(0);
        assert_eq!(normalized_depth(&h, &AllToAll(1)).unwrap(), 3);
    }
}
