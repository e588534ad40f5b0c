use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Circuit, GateKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    QubitOutOfRange,
    ClbitOutOfRange,
    DuplicateQubit,
    ArityMismatch,
    NonFiniteAngle,
    ConditionOnNonRotation,
    ConditionBeforeWrite,
    ClbitRewrite,
    ReuseWithoutReset,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::QubitOutOfRange => "qubit-out-of-range",
            ViolationKind::ClbitOutOfRange => "clbit-out-of-range",
            ViolationKind::DuplicateQubit => "duplicate-qubit",
            ViolationKind::ArityMismatch => "arity-mismatch",
            ViolationKind::NonFiniteAngle => "non-finite-angle",
            ViolationKind::ConditionOnNonRotation => "condition-on-non-rotation",
            ViolationKind::ConditionBeforeWrite => "condition-before-write",
            ViolationKind::ClbitRewrite => "clbit-rewrite",
            ViolationKind::ReuseWithoutReset => "reuse-without-reset",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}: {}", self.index, self.kind.as_str())
    }
}

/// All structural violations of `circuit`, in instruction order.
///
/// An empty result means the circuit is valid. Violations are data: the
/// function never fails.
pub fn validate(circuit: &Circuit) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut written = vec![false; circuit.num_clbits];
    let mut measured = vec![false; circuit.num_qubits];
    let mut push = |index, kind| out.push(Violation { index, kind });

    for (idx, inst) in circuit.instructions.iter().enumerate() {
        if inst.qubits.len() != inst.kind.arity() {
            push(idx, ViolationKind::ArityMismatch);
        }
        if inst.qubits.iter().any(|&q| q >= circuit.num_qubits) {
            push(idx, ViolationKind::QubitOutOfRange);
        }
        if inst.qubits.len() == 2 && inst.qubits[0] == inst.qubits[1] {
            push(idx, ViolationKind::DuplicateQubit);
        }
        if inst.kind.angle().is_some_and(|a| !a.is_finite()) {
            push(idx, ViolationKind::NonFiniteAngle);
        }
        if let Some(cond) = inst.condition {
            if !inst.kind.is_single_qubit_rotation() {
                push(idx, ViolationKind::ConditionOnNonRotation);
            }
            match written.get(cond.clbit) {
                None => push(idx, ViolationKind::ClbitOutOfRange),
                Some(false) => push(idx, ViolationKind::ConditionBeforeWrite),
                Some(true) => {}
            }
        }

        let in_range: Vec<usize> = inst.qubits.iter().copied().filter(|&q| q < circuit.num_qubits).collect();
        match inst.kind {
            GateKind::Reset => {
                for q in in_range {
                    measured[q] = false;
                }
            }
            GateKind::Measure(c) => {
                for &q in &in_range {
                    if measured[q] {
                        push(idx, ViolationKind::ReuseWithoutReset);
                    }
                    measured[q] = true;
                }
                match written.get_mut(c) {
                    None => push(idx, ViolationKind::ClbitOutOfRange),
                    Some(w) if *w => push(idx, ViolationKind::ClbitRewrite),
                    Some(w) => *w = true,
                }
            }
            _ => {
                if in_range.iter().any(|&q| measured[q]) {
                    push(idx, ViolationKind::ReuseWithoutReset);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, Instruction};

    fn kinds(c: &Circuit) -> Vec<ViolationKind> {
        validate(c).into_iter().map(|v| v.kind).collect()
    }

    #[test]
    fn measure_after_h_is_valid() {
        let mut c = Circuit::new("ok", 1, 1);
        c.h(0).measure(0, 0);
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn condition_before_write() {
        let mut c = Circuit::new("bad", 2, 1);
        c.push(Instruction::new(GateKind::X, vec![1]).conditioned(0, true));
        c.measure(0, 0);
        assert_eq!(validate(&c), vec![Violation { index: 0, kind: ViolationKind::ConditionBeforeWrite }]);
    }

    #[test]
    fn reuse_without_reset() {
        let mut c = Circuit::new("bad", 1, 1);
        c.measure(0, 0).h(0);
        assert_eq!(validate(&c), vec![Violation { index: 1, kind: ViolationKind::ReuseWithoutReset }]);

        let mut fixed = Circuit::new("ok", 1, 1);
        fixed.measure(0, 0).reset(0).h(0);
        assert!(validate(&fixed).is_empty());
    }

    #[test]
    fn structural_errors() {
        let mut c = Circuit::new("bad", 2, 1);
        c.cx(0, 0).h(5).measure(0, 3);
        c.push(Instruction::new(GateKind::CX, vec![0, 1]).conditioned(0, true));
        c.rz(1, Angle::radians(f64::NAN));
        let k = kinds(&c);
        assert!(k.contains(&ViolationKind::DuplicateQubit));
        assert!(k.contains(&ViolationKind::QubitOutOfRange));
        assert!(k.contains(&ViolationKind::ClbitOutOfRange));
        assert!(k.contains(&ViolationKind::ConditionOnNonRotation));
        assert!(k.contains(&ViolationKind::NonFiniteAngle));
    }

    #[test]
    fn clbit_rewrite() {
        let mut c = Circuit::new("bad", 2, 1);
        c.measure(0, 0).measure(1, 0);
        assert_eq!(kinds(&c), vec![ViolationKind::ClbitRewrite]);
    }
}
