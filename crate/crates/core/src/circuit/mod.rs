//! Circuit representation, validation, depth metrics and transpilation.

mod angle;
mod depth;
mod topology;
mod transpile;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use angle::Angle;
pub use depth::{algorithmic_depth, normalized_depth};
pub use topology::{AllToAll, Coupling, GridTopology};
pub use transpile::{row_major_placement, transpile_to_basis, Transpiled};
pub use validate::{validate, Violation, ViolationKind};

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("invalid circuit: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("circuit of width {width} does not fit a topology with {nodes} nodes")]
    Unplaceable { width: usize, nodes: usize },
    #[error("placement is not injective or references node {0} outside the topology")]
    BadPlacement(usize),
    #[error("unknown gate kind `{0}`")]
    UnknownKind(String),
    #[error("gate `{kind}` expects {expected} qubit(s), got {got}")]
    Arity { kind: &'static str, expected: usize, got: usize },
    #[error("gate `{0}` is missing a field: {1}")]
    MissingField(String, &'static str),
}

/// Gate kinds understood by the IR.
///
/// `CP` is the controlled phase `diag(1, 1, 1, e^{i lambda})`; it is
/// symmetric in its two qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    SX,
    RX(Angle),
    RY(Angle),
    RZ(Angle),
    CX,
    CZ,
    CP(Angle),
    Swap,
    /// Measure into the given classical bit.
    Measure(usize),
    Reset,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::SX => "sx",
            GateKind::RX(_) => "rx",
            GateKind::RY(_) => "ry",
            GateKind::RZ(_) => "rz",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
            GateKind::CP(_) => "cp",
            GateKind::Swap => "swap",
            GateKind::Measure(_) => "measure",
            GateKind::Reset => "reset",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ | GateKind::CP(_) | GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn angle(&self) -> Option<Angle> {
        match *self {
            GateKind::RX(a) | GateKind::RY(a) | GateKind::RZ(a) | GateKind::CP(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Measure(_) | GateKind::Reset)
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(self, GateKind::RZ(_) | GateKind::CZ | GateKind::CP(_))
    }

    /// Single-qubit unitaries; the only kinds allowed to carry a condition.
    pub fn is_single_qubit_rotation(&self) -> bool {
        matches!(
            self,
            GateKind::H | GateKind::X | GateKind::SX | GateKind::RX(_) | GateKind::RY(_) | GateKind::RZ(_)
        )
    }

    pub fn is_basis(&self) -> bool {
        matches!(
            self,
            GateKind::X | GateKind::SX | GateKind::RZ(_) | GateKind::CX | GateKind::Measure(_) | GateKind::Reset
        )
    }
}

/// Classical guard: the instruction fires iff `clbit == value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub clbit: usize,
    pub value: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstructionRecord", into = "InstructionRecord")]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub condition: Option<Condition>,
}

impl Instruction {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self { kind, qubits, condition: None }
    }

    pub fn conditioned(mut self, clbit: usize, value: bool) -> Self {
        self.condition = Some(Condition { clbit, value });
        self
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if let Some(a) = self.kind.angle() {
            write!(f, "({a})")?;
        }
        write!(f, " {:?}", self.qubits)?;
        if let GateKind::Measure(c) = self.kind {
            write!(f, " -> c{c}")?;
        }
        if let Some(cond) = self.condition {
            write!(f, " if c{}=={}", cond.clbit, cond.value as u8)?;
        }
        Ok(())
    }
}

/// Wire form of an instruction.
#[derive(Serialize, Deserialize)]
struct InstructionRecord {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<Angle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clbit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    condition: Option<Condition>,
}

impl From<Instruction> for InstructionRecord {
    fn from(i: Instruction) -> Self {
        let clbit = match i.kind {
            GateKind::Measure(c) => Some(c),
            _ => None,
        };
        InstructionRecord {
            kind: i.kind.name().to_string(),
            qubits: i.qubits,
            angle: i.kind.angle(),
            clbit,
            condition: i.condition,
        }
    }
}

impl TryFrom<InstructionRecord> for Instruction {
    type Error = CircuitError;

    fn try_from(r: InstructionRecord) -> Result<Self, Self::Error> {
        let angle = || r.angle.ok_or_else(|| CircuitError::MissingField(r.kind.clone(), "angle"));
        let kind = match r.kind.as_str() {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "sx" => GateKind::SX,
            "rx" => GateKind::RX(angle()?),
            "ry" => GateKind::RY(angle()?),
            "rz" => GateKind::RZ(angle()?),
            "cx" => GateKind::CX,
            "cz" => GateKind::CZ,
            "cp" => GateKind::CP(angle()?),
            "swap" => GateKind::Swap,
            "measure" => GateKind::Measure(
                r.clbit.ok_or_else(|| CircuitError::MissingField(r.kind.clone(), "clbit"))?,
            ),
            "reset" => GateKind::Reset,
            other => return Err(CircuitError::UnknownKind(other.to_string())),
        };
        if r.qubits.len() != kind.arity() {
            return Err(CircuitError::Arity { kind: kind.name(), expected: kind.arity(), got: r.qubits.len() });
        }
        Ok(Instruction { kind, qubits: r.qubits, condition: r.condition })
    }
}

/// Ordered instruction list over `num_qubits` qubits and `num_clbits`
/// classical bits.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub instructions: Vec<Instruction>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, num_qubits: usize, num_clbits: usize) -> Self {
        Self { name: name.into(), num_qubits, num_clbits, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn push(&mut self, inst: Instruction) -> &mut Self {
        self.instructions.push(inst);
        self
    }

    pub fn gate(&mut self, kind: GateKind, qubits: &[usize]) -> &mut Self {
        self.push(Instruction::new(kind, qubits.to_vec()))
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.gate(GateKind::H, &[q])
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.gate(GateKind::X, &[q])
    }

    pub fn sx(&mut self, q: usize) -> &mut Self {
        self.gate(GateKind::SX, &[q])
    }

    pub fn rx(&mut self, q: usize, a: Angle) -> &mut Self {
        self.gate(GateKind::RX(a), &[q])
    }

    pub fn ry(&mut self, q: usize, a: Angle) -> &mut Self {
        self.gate(GateKind::RY(a), &[q])
    }

    pub fn rz(&mut self, q: usize, a: Angle) -> &mut Self {
        self.gate(GateKind::RZ(a), &[q])
    }

    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.gate(GateKind::CX, &[control, target])
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.gate(GateKind::CZ, &[a, b])
    }

    pub fn cp(&mut self, a: usize, b: usize, angle: Angle) -> &mut Self {
        self.gate(GateKind::CP(angle), &[a, b])
    }

    pub fn swap(&mut self, a: usize, b: usize) -> &mut Self {
        self.gate(GateKind::Swap, &[a, b])
    }

    pub fn measure(&mut self, q: usize, c: usize) -> &mut Self {
        self.gate(GateKind::Measure(c), &[q])
    }

    pub fn reset(&mut self, q: usize) -> &mut Self {
        self.gate(GateKind::Reset, &[q])
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn count_kind(&self, pred: impl Fn(&GateKind) -> bool) -> usize {
        self.instructions.iter().filter(|i| pred(&i.kind)).count()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_two_qubit()).count()
    }

    pub fn measurement_count(&self) -> usize {
        self.count_kind(|k| matches!(k, GateKind::Measure(_)))
    }

    /// True if the circuit uses classical feed-forward, resets, or
    /// measurements that are followed by further operations.
    pub fn is_dynamic(&self) -> bool {
        self.terminal_measurements().is_none()
    }

    /// If every measurement is terminal (nothing later touches the qubit or
    /// reads the bit, no resets, no conditions), the `(qubit, clbit)` pairs in
    /// program order.
    pub fn terminal_measurements(&self) -> Option<Vec<(usize, usize)>> {
        let flags = self.terminal_flags();
        let mut out = Vec::new();
        for (inst, terminal) in self.instructions.iter().zip(flags) {
            if inst.condition.is_some() || matches!(inst.kind, GateKind::Reset) {
                return None;
            }
            if let GateKind::Measure(c) = inst.kind {
                if !terminal {
                    return None;
                }
                out.push((inst.qubits[0], c));
            }
        }
        Some(out)
    }

    /// Per instruction: for a measurement, whether it is terminal. Always
    /// false for other instructions.
    pub(crate) fn terminal_flags(&self) -> Vec<bool> {
        let mut qubit_used_later = vec![false; self.num_qubits];
        let mut clbit_used_later = vec![false; self.num_clbits];
        let mut flags = vec![false; self.instructions.len()];
        for (idx, inst) in self.instructions.iter().enumerate().rev() {
            if let GateKind::Measure(c) = inst.kind {
                let q = inst.qubits[0];
                flags[idx] = !qubit_used_later.get(q).copied().unwrap_or(true)
                    && !clbit_used_later.get(c).copied().unwrap_or(true);
                if let Some(slot) = clbit_used_later.get_mut(c) {
                    *slot = true;
                }
            }
            if let Some(cond) = inst.condition {
                if let Some(slot) = clbit_used_later.get_mut(cond.clbit) {
                    *slot = true;
                }
            }
            for &q in &inst.qubits {
                if let Some(slot) = qubit_used_later.get_mut(q) {
                    *slot = true;
                }
            }
        }
        flags
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({} qubits, {} clbits)", self.name, self.num_qubits, self.num_clbits)?;
        for inst in &self.instructions {
            writeln!(f, "  {inst}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema_shape() {
        let mut c = Circuit::new("demo", 2, 2);
        c.h(0).measure(0, 0);
        c.push(Instruction::new(GateKind::RZ(Angle::pi_frac(1, 1)), vec![1]).conditioned(0, true));
        let json = c.to_json();
        assert!(json.contains(r#"{"kind":"h","qubits":[0]}"#), "{json}");
        assert!(json.contains(r#"{"kind":"measure","qubits":[0],"clbit":0}"#), "{json}");
        assert!(
            json.contains(r#"{"kind":"rz","qubits":[1],"angle":{"pi":[1,1]},"condition":{"clbit":0,"value":true}}"#),
            "{json}"
        );
        assert_eq!(Circuit::from_json(&json).unwrap(), c);
    }

    #[test]
    fn rejects_malformed_records() {
        let bad = r#"{"name":"x","num_qubits":2,"num_clbits":0,"instructions":[{"kind":"cx","qubits":[0]}]}"#;
        assert!(Circuit::from_json(bad).is_err());
        let missing = r#"{"name":"x","num_qubits":1,"num_clbits":0,"instructions":[{"kind":"rz","qubits":[0]}]}"#;
        assert!(Circuit::from_json(missing).is_err());
        let unknown = r#"{"name":"x","num_qubits":1,"num_clbits":0,"instructions":[{"kind":"t","qubits":[0]}]}"#;
        assert!(Circuit::from_json(unknown).is_err());
    }

    #[test]
    fn terminal_measurement_detection() {
        let mut s = Circuit::new("s", 2, 2);
        s.h(0).measure(0, 0).cx(1, 0).measure(1, 1);
        // measure(0) is followed by cx touching qubit 0
        assert!(s.terminal_measurements().is_none());

        let mut t = Circuit::new("t", 2, 2);
        t.h(0).measure(0, 0).h(1).measure(1, 1);
        assert_eq!(t.terminal_measurements(), Some(vec![(0, 0), (1, 1)]));
        assert!(!t.is_dynamic());

        let mut d = Circuit::new("d", 2, 2);
        d.h(0).measure(0, 0);
        d.push(Instruction::new(GateKind::X, vec![1]).conditioned(0, true));
        d.measure(1, 1);
        assert!(d.is_dynamic());
    }
}
