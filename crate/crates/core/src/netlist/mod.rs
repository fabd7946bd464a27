//! Boolean netlists: representation, Bristol text I/O, plaintext evaluation,
//! ASAP levelization and synthetic circuit generators.

mod bristol;
mod eval;
mod generate;
mod levels;

pub use bristol::{parse_bristol, write_bristol};
pub use eval::plaintext_evaluate;
pub use generate::{gen_test_circuit, CircuitBuilder, GenKind};
pub use levels::{level_schedule, LevelStats};

use std::fmt;

use thiserror::Error;

/// Wire identifier inside a [`Circuit`].
pub type WireId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("expected {expected} input bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("unsupported generator kind `{0}`")]
    UnsupportedKind(String),
    #[error("circuit is not representable in Bristol format: {0}")]
    NotBristol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    Xor,
    Inv,
}

impl GateOp {
    pub fn arity(self) -> usize {
        match self {
            GateOp::And | GateOp::Xor => 2,
            GateOp::Inv => 1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            GateOp::And => "AND",
            GateOp::Xor => "XOR",
            GateOp::Inv => "INV",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "AND" => Some(GateOp::And),
            "XOR" => Some(GateOp::Xor),
            "INV" => Some(GateOp::Inv),
            _ => None,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A single gate. INV gates only use `ins[0]`; `ins[1]` mirrors it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: GateOp,
    ins: [WireId; 2],
    pub output: WireId,
}

impl Gate {
    pub fn and(a: WireId, b: WireId, output: WireId) -> Self {
        Gate {
            op: GateOp::And,
            ins: [a, b],
            output,
        }
    }

    pub fn xor(a: WireId, b: WireId, output: WireId) -> Self {
        Gate {
            op: GateOp::Xor,
            ins: [a, b],
            output,
        }
    }

    pub fn inv(a: WireId, output: WireId) -> Self {
        Gate {
            op: GateOp::Inv,
            ins: [a, a],
            output,
        }
    }

    pub fn new(op: GateOp, inputs: &[WireId], output: WireId) -> Self {
        match op {
            GateOp::Inv => Gate::inv(inputs[0], output),
            _ => Gate {
                op,
                ins: [inputs[0], inputs[1]],
                output,
            },
        }
    }

    pub fn inputs(&self) -> &[WireId] {
        &self.ins[..self.op.arity()]
    }
}

/// A combinational Boolean circuit with gates stored in a topological order.
///
/// Primary inputs are always wires `0..num_inputs()`. `input_groups` and
/// `output_groups` keep the Bristol value grouping (bits per value) so a
/// parsed file can be written back unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_wires: u32,
    input_groups: Vec<u32>,
    output_groups: Vec<u32>,
    outputs: Vec<WireId>,
    gates: Vec<Gate>,
}

impl Circuit {
    /// Builds and validates a circuit. Outputs may be any defined wire.
    pub fn new(
        num_wires: u32,
        input_groups: Vec<u32>,
        output_groups: Vec<u32>,
        outputs: Vec<WireId>,
        gates: Vec<Gate>,
    ) -> Result<Self, NetlistError> {
        let c = Circuit {
            num_wires,
            input_groups,
            output_groups,
            outputs,
            gates,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), NetlistError> {
        let n_in = self.num_inputs();
        if n_in as u64 > self.num_wires as u64 {
            return Err(NetlistError::Invalid(format!(
                "{n_in} inputs but only {} wires",
                self.num_wires
            )));
        }
        let out_bits: u32 = self.output_groups.iter().sum();
        if out_bits as usize != self.outputs.len() {
            return Err(NetlistError::Invalid(format!(
                "output groups declare {out_bits} bits but {} outputs listed",
                self.outputs.len()
            )));
        }
        let mut defined = vec![false; self.num_wires as usize];
        defined[..n_in as usize].iter_mut().for_each(|d| *d = true);
        for (i, g) in self.gates.iter().enumerate() {
            for &w in g.inputs() {
                if w >= self.num_wires || !defined[w as usize] {
                    return Err(NetlistError::Invalid(format!(
                        "gate {i} reads wire {w} before it is defined"
                    )));
                }
            }
            if g.output >= self.num_wires {
                return Err(NetlistError::Invalid(format!(
                    "gate {i} writes wire {} beyond wire count {}",
                    g.output, self.num_wires
                )));
            }
            if defined[g.output as usize] {
                return Err(NetlistError::Invalid(format!(
                    "wire {} is defined more than once",
                    g.output
                )));
            }
            defined[g.output as usize] = true;
        }
        for &o in &self.outputs {
            if o >= self.num_wires || !defined[o as usize] {
                return Err(NetlistError::Invalid(format!("output wire {o} is never defined")));
            }
        }
        Ok(())
    }

    pub fn num_wires(&self) -> u32 {
        self.num_wires
    }

    pub fn num_inputs(&self) -> u32 {
        self.input_groups.iter().sum()
    }

    pub fn inputs(&self) -> std::ops::Range<WireId> {
        0..self.num_inputs()
    }

    pub fn outputs(&self) -> &[WireId] {
        &self.outputs
    }

    pub fn input_groups(&self) -> &[u32] {
        &self.input_groups
    }

    pub fn output_groups(&self) -> &[u32] {
        &self.output_groups
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_and(&self) -> usize {
        self.gates.iter().filter(|g| g.op == GateOp::And).count()
    }

    pub fn has_inv(&self) -> bool {
        self.gates.iter().any(|g| g.op == GateOp::Inv)
    }
}
