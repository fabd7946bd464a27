use serde::{Deserialize, Serialize};

use crate::netlist::{Circuit, Gate, GateOp, WireId};

use super::encoding::{Instruction, Opcode};
use super::IsaError;

/// Record of the passes applied to a program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramMeta {
    pub passes: Vec<String>,
    pub segment_size: Option<usize>,
    /// SWW capacity (wires) the live bits and OoR operands were derived for.
    pub window_capacity: Option<u64>,
    pub live_marked: bool,
}

/// An assembled gate program. Addresses start at 1; address 0 is reserved
/// for OoR operands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub instructions: Vec<Instruction>,
    /// Output address of each instruction.
    pub output_addrs: Vec<u32>,
    /// Primary input slots, including the constant-one wire if present.
    pub num_inputs: u32,
    pub input_groups: Vec<u32>,
    pub output_groups: Vec<u32>,
    /// Address of the constant-one wire (the highest input address).
    pub one_wire: Option<u32>,
    /// Addresses holding the circuit outputs, in output order.
    pub outputs: Vec<u32>,
    /// Original addresses of the zeroed operands, in program order.
    pub oor_addrs: Option<Vec<u32>>,
    pub meta: ProgramMeta,
}

impl Program {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Number of inputs supplied by the caller (excludes the one-wire).
    pub fn num_circuit_inputs(&self) -> u32 {
        self.num_inputs - self.one_wire.is_some() as u32
    }

    pub fn input_addrs(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.num_inputs
    }

    pub fn is_renamed(&self) -> bool {
        self.output_addrs
            .iter()
            .enumerate()
            .all(|(k, &a)| a as u64 == self.num_inputs as u64 + 1 + k as u64)
    }

    pub fn max_address(&self) -> u32 {
        self.output_addrs.iter().copied().max().unwrap_or(0).max(self.num_inputs)
    }

    pub fn num_and(&self) -> usize {
        self.instructions.iter().filter(|i| i.op == Opcode::And).count()
    }

    pub fn num_live(&self) -> usize {
        self.instructions.iter().filter(|i| i.live).count()
    }

    /// Operand addresses with OoR zeros replaced by their original address.
    pub fn resolved_operands(&self) -> Result<Vec<[u32; 2]>, IsaError> {
        let mut oor = self.oor_addrs.as_deref().unwrap_or(&[]).iter();
        let mut out = Vec::with_capacity(self.len());
        for (pos, ins) in self.instructions.iter().enumerate() {
            let mut ops = ins.operands();
            let arity = if ins.op == Opcode::Nop { 0 } else { 2 };
            for a in ops.iter_mut().take(arity) {
                if *a == 0 {
                    *a = *oor.next().ok_or(IsaError::OorUnderflow { pos })?;
                }
            }
            out.push(ops);
        }
        let left = oor.count();
        if left > 0 {
            return Err(IsaError::OorLeftover(left));
        }
        Ok(out)
    }

    /// Rebuilds an equivalent netlist with wire = address - 1. The one-wire,
    /// if any, becomes the last primary input.
    pub fn to_circuit(&self) -> Result<Circuit, IsaError> {
        let ops = self.resolved_operands()?;
        let mut gates = Vec::with_capacity(self.len());
        for (pos, (ins, [a, b])) in self.instructions.iter().zip(ops).enumerate() {
            let op = match ins.op {
                Opcode::And => GateOp::And,
                Opcode::Xor => GateOp::Xor,
                Opcode::Nop => return Err(IsaError::Nop { pos }),
            };
            if a == 0 || b == 0 {
                return Err(IsaError::UndefinedOperand { pos, addr: 0 });
            }
            gates.push(Gate::new(op, &[a - 1, b - 1], self.output_addrs[pos] - 1));
        }
        let outputs: Vec<WireId> = self.outputs.iter().map(|&a| a - 1).collect();
        Circuit::new(
            self.max_address(),
            self.input_groups.clone(),
            self.output_groups.clone(),
            outputs,
            gates,
        )
        .map_err(|e| IsaError::Invalid(e.to_string()))
    }
}

/// Lowers a circuit to its baseline program: one instruction per gate in
/// netlist order, inputs at addresses 1..=n, gate k writing n + 1 + k.
/// INV(x) becomes XOR(x, one) with the one-wire at address n.
pub fn assemble(c: &Circuit) -> Program {
    let n_circuit = c.num_inputs();
    let has_inv = c.has_inv();
    let num_inputs = n_circuit + has_inv as u32;
    let one_wire = has_inv.then_some(num_inputs);
    let mut addr = vec![0u32; c.num_wires() as usize];
    for w in c.inputs() {
        addr[w as usize] = w + 1;
    }
    let mut instructions = Vec::with_capacity(c.gates().len());
    let mut output_addrs = Vec::with_capacity(c.gates().len());
    for (k, g) in c.gates().iter().enumerate() {
        let ins = g.inputs();
        let (op, in0, in1) = match g.op {
            GateOp::And => (Opcode::And, addr[ins[0] as usize], addr[ins[1] as usize]),
            GateOp::Xor => (Opcode::Xor, addr[ins[0] as usize], addr[ins[1] as usize]),
            GateOp::Inv => (Opcode::Xor, addr[ins[0] as usize], one_wire.unwrap()),
        };
        let out = num_inputs + 1 + k as u32;
        addr[g.output as usize] = out;
        instructions.push(Instruction {
            op,
            in0,
            in1,
            live: true,
        });
        output_addrs.push(out);
    }
    let mut input_groups = c.input_groups().to_vec();
    if has_inv {
        input_groups.push(1);
    }
    Program {
        instructions,
        output_addrs,
        num_inputs,
        input_groups,
        output_groups: c.output_groups().to_vec(),
        one_wire,
        outputs: c.outputs().iter().map(|&o| addr[o as usize]).collect(),
        oor_addrs: None,
        meta: ProgramMeta {
            passes: vec!["baseline".into()],
            ..Default::default()
        },
    }
}

/// Plaintext interpreter over the instruction stream. `inputs` excludes the
/// one-wire, which is driven to 1.
pub fn interpret(p: &Program, inputs: &[bool]) -> Result<Vec<bool>, IsaError> {
    let expected = p.num_circuit_inputs() as usize;
    if inputs.len() != expected {
        return Err(IsaError::InputLength {
            expected,
            actual: inputs.len(),
        });
    }
    let size = p.max_address() as usize + 1;
    let mut val = vec![false; size];
    let mut defined = vec![false; size];
    for (i, &b) in inputs.iter().enumerate() {
        val[i + 1] = b;
        defined[i + 1] = true;
    }
    if let Some(one) = p.one_wire {
        val[one as usize] = true;
        defined[one as usize] = true;
    }
    let mut oor = p.oor_addrs.as_deref().unwrap_or(&[]).iter();
    for (pos, ins) in p.instructions.iter().enumerate() {
        if ins.op == Opcode::Nop {
            continue;
        }
        let mut v = [false; 2];
        for (slot, &a) in v.iter_mut().zip(&ins.operands()) {
            let a = if a == 0 {
                *oor.next().ok_or(IsaError::OorUnderflow { pos })?
            } else {
                a
            };
            if !defined.get(a as usize).copied().unwrap_or(false) {
                return Err(IsaError::UndefinedOperand { pos, addr: a });
            }
            *slot = val[a as usize];
        }
        let out = p.output_addrs[pos] as usize;
        val[out] = match ins.op {
            Opcode::And => v[0] & v[1],
            _ => v[0] ^ v[1],
        };
        defined[out] = true;
    }
    p.outputs
        .iter()
        .map(|&a| {
            if defined[a as usize] {
                Ok(val[a as usize])
            } else {
                Err(IsaError::UndefinedOperand {
                    pos: p.len(),
                    addr: a,
                })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{gen_test_circuit, plaintext_evaluate, CircuitBuilder, GenKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Three inputs and four gates, in the style of the window walkthrough.
    pub(crate) fn walkthrough() -> Circuit {
        let mut b = CircuitBuilder::new();
        let x = b.input(3);
        let g4 = b.and(x[0], x[1]);
        let g5 = b.xor(x[1], x[2]);
        let g6 = b.and(g4, g5);
        let g7 = b.xor(g6, x[0]);
        b.finish(&[vec![g7]]).unwrap()
    }

    #[test]
    fn inputs_then_sequential_outputs() {
        let p = assemble(&walkthrough());
        assert_eq!(p.input_addrs().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(p.output_addrs, vec![4, 5, 6, 7]);
        assert_eq!(p.outputs, vec![7]);
        assert!(p.is_renamed());
        assert!(p.instructions.iter().all(|i| i.live));
    }

    #[test]
    fn inv_lowered_to_xor_with_one_wire() {
        let mut b = CircuitBuilder::new();
        let x = b.input(1);
        let a = b.inv(x[0]);
        let c = b.inv(a);
        let d = b.inv(c);
        let circuit = b.finish(&[vec![d]]).unwrap();
        let p = assemble(&circuit);
        assert_eq!(p.len(), 3);
        assert_eq!(p.one_wire, Some(2));
        assert!(p.instructions.iter().all(|i| i.op == Opcode::Xor && i.in1 == 2));
        assert_eq!(interpret(&p, &[true]).unwrap(), vec![false]);
        assert_eq!(interpret(&p, &[false]).unwrap(), vec![true]);
    }

    #[test]
    fn interpreter_matches_netlist() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in ["chain:33", "adder:8", "matmul:2:4", "fanout:5:7", "blocks:4:6"] {
            let c = gen_test_circuit(&kind.parse().unwrap()).unwrap();
            let p = assemble(&c);
            assert_eq!(p.len(), c.gates().len());
            assert_eq!(p.to_circuit().unwrap().gates().len(), c.gates().len());
            for _ in 0..20 {
                let bits: Vec<bool> = (0..c.num_inputs()).map(|_| rng.gen()).collect();
                assert_eq!(interpret(&p, &bits).unwrap(), plaintext_evaluate(&c, &bits).unwrap());
            }
        }
    }

    #[test]
    fn to_circuit_appends_one_wire_input() {
        let c = gen_test_circuit(&GenKind::Chain { len: 3, op: Some(GateOp::Inv) }).unwrap();
        let p = assemble(&c);
        let back = p.to_circuit().unwrap();
        assert_eq!(back.num_inputs(), c.num_inputs() + 1);
        assert!(!back.has_inv());
        let out = plaintext_evaluate(&back, &[true, false, true]).unwrap();
        assert_eq!(out, plaintext_evaluate(&c, &[true, false]).unwrap());
    }

    #[test]
    fn oor_queue_feeds_zero_operands() {
        let mut p = assemble(&walkthrough());
        p.instructions[3].in1 = 0;
        p.oor_addrs = Some(vec![1]);
        let bits = [true, false, true];
        assert_eq!(interpret(&p, &bits).unwrap(), interpret(&assemble(&walkthrough()), &bits).unwrap());
        p.oor_addrs = Some(vec![]);
        assert_eq!(interpret(&p, &bits), Err(IsaError::OorUnderflow { pos: 3 }));
    }
}
