use std::fmt;

use crate::netlist::{Circuit, GateOp, WireId};

use super::halfgate::{eval_and, free_xor, garble_and, GarbledTable};
use super::label::{GlobalDelta, Label, LabelPrf};
use super::GcError;

/// Garbler state: R plus the zero label of every wire assigned so far.
#[derive(Clone)]
pub struct GarblerContext {
    seed: u128,
    delta: GlobalDelta,
    prf: LabelPrf,
    zero_labels: Vec<Option<Label>>,
    output_wires: Vec<WireId>,
}

impl fmt::Debug for GarblerContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GarblerContext")
            .field("seed", &self.seed)
            .field("delta", &self.delta)
            .field("wires", &self.zero_labels.iter().flatten().count())
            .finish()
    }
}

impl GarblerContext {
    pub fn new(seed: u128) -> Self {
        let prf = LabelPrf::new(seed);
        GarblerContext {
            seed,
            delta: prf.delta(),
            prf,
            zero_labels: Vec::new(),
            output_wires: Vec::new(),
        }
    }

    pub fn seed(&self) -> u128 {
        self.seed
    }

    pub fn delta(&self) -> GlobalDelta {
        self.delta
    }

    fn slot(&mut self, wire: WireId) -> Result<&mut Option<Label>, GcError> {
        let i = wire as usize;
        if i >= self.zero_labels.len() {
            self.zero_labels.resize(i + 1, None);
        }
        let slot = &mut self.zero_labels[i];
        if slot.is_some() {
            return Err(GcError::DuplicateWire(wire));
        }
        Ok(slot)
    }

    /// Draws a fresh zero label for `wire` from the seeded PRF.
    pub fn gen_label(&mut self, wire: WireId) -> Result<Label, GcError> {
        let l = self.prf.wire(wire as u64);
        *self.slot(wire)? = Some(l);
        Ok(l)
    }

    /// Records a zero label computed by a gate.
    pub fn set_zero_label(&mut self, wire: WireId, label: Label) -> Result<(), GcError> {
        *self.slot(wire)? = Some(label);
        Ok(())
    }

    pub fn zero_label(&self, wire: WireId) -> Option<Label> {
        self.zero_labels.get(wire as usize).copied().flatten()
    }

    fn known(&self, wire: WireId) -> Result<Label, GcError> {
        self.zero_label(wire).ok_or(GcError::UnknownWire(wire))
    }

    /// Wires decoded by [`decode_outputs`], in output order.
    pub fn output_wires(&self) -> &[WireId] {
        &self.output_wires
    }
}

/// Everything the evaluator receives besides its input labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarbledCircuit {
    /// One table per AND gate, in gate order.
    pub tables: Vec<GarbledTable>,
    pub input_zero_labels: Vec<Label>,
    pub output_zero_labels: Vec<Label>,
    /// Active label of the public constant-one wire, present when the
    /// circuit contains INV gates.
    pub one_label: Option<Label>,
}

/// Garbles `c`. The hash tweak of a gate is derived from its position in the
/// gate list. INV is garbled as XOR with a constant-one wire whose id is
/// `c.num_wires()`.
pub fn garble_circuit(c: &Circuit, seed: u128) -> (GarblerContext, GarbledCircuit) {
    let mut ctx = GarblerContext::new(seed);
    let r = ctx.delta.label();
    let input_zero_labels: Vec<Label> = c
        .inputs()
        .map(|w| ctx.gen_label(w).expect("fresh context"))
        .collect();
    let one0 = c.has_inv().then(|| ctx.gen_label(c.num_wires()).expect("fresh wire"));

    let mut tables = Vec::with_capacity(c.num_and());
    for (k, g) in c.gates().iter().enumerate() {
        let ins = g.inputs();
        let a = ctx.zero_label(ins[0]).expect("validated circuit");
        let out = match g.op {
            GateOp::And => {
                let b = ctx.zero_label(ins[1]).expect("validated circuit");
                let (wc0, t) = garble_and(ctx.delta, a, b, k as u64);
                tables.push(t);
                wc0
            }
            GateOp::Xor => free_xor(a, ctx.zero_label(ins[1]).expect("validated circuit")),
            GateOp::Inv => free_xor(a, one0.expect("one wire exists when INV is present")),
        };
        ctx.set_zero_label(g.output, out).expect("validated circuit");
    }
    ctx.output_wires = c.outputs().to_vec();
    let output_zero_labels = c.outputs().iter().map(|&o| ctx.zero_label(o).unwrap()).collect();
    let gc = GarbledCircuit {
        tables,
        input_zero_labels,
        output_zero_labels,
        one_label: one0.map(|l| l ^ r),
    };
    (ctx, gc)
}

/// Evaluates on active labels, consuming one table per AND gate in order.
pub fn eval_circuit(c: &Circuit, gc: &GarbledCircuit, inputs: &[Label]) -> Result<Vec<Label>, GcError> {
    let n_in = c.num_inputs() as usize;
    if inputs.len() != n_in {
        return Err(GcError::InputCount {
            expected: n_in,
            actual: inputs.len(),
        });
    }
    if gc.tables.len() != c.num_and() {
        return Err(GcError::TableCount {
            expected: c.num_and(),
            actual: gc.tables.len(),
        });
    }
    let one = if c.has_inv() {
        Some(gc.one_label.ok_or(GcError::MissingOneLabel)?)
    } else {
        None
    };
    let mut wires = vec![Label::ZERO; c.num_wires() as usize];
    wires[..n_in].copy_from_slice(inputs);
    let mut tables = gc.tables.iter();
    for (k, g) in c.gates().iter().enumerate() {
        let ins = g.inputs();
        let a = wires[ins[0] as usize];
        wires[g.output as usize] = match g.op {
            GateOp::And => {
                let t = tables.next().expect("table count checked");
                eval_and(a, wires[ins[1] as usize], t, k as u64)
            }
            GateOp::Xor => free_xor(a, wires[ins[1] as usize]),
            GateOp::Inv => free_xor(a, one.unwrap()),
        };
    }
    Ok(c.outputs().iter().map(|&o| wires[o as usize]).collect())
}

/// Active labels for input wires `0..bits.len()`.
pub fn encode_inputs(ctx: &GarblerContext, bits: &[bool]) -> Result<Vec<Label>, GcError> {
    let r = ctx.delta.label();
    bits.iter()
        .enumerate()
        .map(|(w, &b)| Ok(ctx.known(w as WireId)?.xor_if(b, r)))
        .collect()
}

/// Maps active output labels back to bits using the context's output wires.
pub fn decode_outputs(ctx: &GarblerContext, labels: &[Label]) -> Result<Vec<bool>, GcError> {
    decode_wires(ctx, &ctx.output_wires, labels)
}

/// Decodes active labels of arbitrary wires.
pub fn decode_wires(ctx: &GarblerContext, wires: &[WireId], labels: &[Label]) -> Result<Vec<bool>, GcError> {
    if wires.len() != labels.len() {
        return Err(GcError::InputCount {
            expected: wires.len(),
            actual: labels.len(),
        });
    }
    let r = ctx.delta.label();
    wires
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&w, &l))| {
            let w0 = ctx.known(w)?;
            if l == w0 {
                Ok(false)
            } else if l == w0 ^ r {
                Ok(true)
            } else {
                Err(GcError::CorruptLabel { index: i, wire: w })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcrypto::{hash_counters, reset_hash_counters};
    use crate::netlist::{gen_test_circuit, plaintext_evaluate, CircuitBuilder, GenKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(c: &Circuit, seed: u128, bits: &[bool]) -> Result<Vec<bool>, GcError> {
        let (ctx, gc) = garble_circuit(c, seed);
        let active = encode_inputs(&ctx, bits)?;
        decode_outputs(&ctx, &eval_circuit(c, &gc, &active)?)
    }

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
        (0..n).map(|_| rng.gen()).collect()
    }

    #[test]
    fn duplicate_label_rejected() {
        let mut ctx = GarblerContext::new(1);
        let l = ctx.gen_label(3).unwrap();
        assert_eq!(ctx.gen_label(3), Err(GcError::DuplicateWire(3)));
        assert_eq!(ctx.zero_label(3), Some(l));
    }

    #[test]
    fn labels_are_distinct_and_deterministic() {
        let mut a = GarblerContext::new(9);
        let mut b = GarblerContext::new(9);
        let mut seen = std::collections::HashSet::new();
        for w in 0..10_000 {
            let l = a.gen_label(w).unwrap();
            assert_eq!(b.gen_label(w).unwrap(), l);
            seen.insert(l);
        }
        assert_eq!(seen.len(), 10_000);
    }

    #[test]
    fn xor_only_has_no_tables() {
        let c = gen_test_circuit(&GenKind::XorTree { inputs: 16 }).unwrap();
        assert!(garble_circuit(&c, 1).1.tables.is_empty());
    }

    #[test]
    fn adder_table_count_and_correctness() {
        let c = gen_test_circuit(&GenKind::Adder { bits: 8 }).unwrap();
        let (_, gc) = garble_circuit(&c, 2);
        assert_eq!(gc.tables.len(), c.num_and());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let bits = random_bits(&mut rng, 16);
            assert_eq!(run(&c, 2, &bits).unwrap(), plaintext_evaluate(&c, &bits).unwrap());
        }
    }

    #[test]
    fn chain_exhaustive_with_inversions() {
        let mut b = CircuitBuilder::new();
        let x = b.input(2);
        let mut w = b.and(x[0], x[1]);
        for i in 0..20 {
            w = match i % 3 {
                0 => b.inv(w),
                1 => b.xor(w, x[0]),
                _ => b.and(w, x[1]),
            };
        }
        let c = b.finish(&[vec![w]]).unwrap();
        for v in 0..4u8 {
            let bits = [v & 1 == 1, v & 2 == 2];
            assert_eq!(run(&c, 4, &bits).unwrap(), plaintext_evaluate(&c, &bits).unwrap());
        }
    }

    #[test]
    fn identity_round_trip() {
        let c = Circuit::new(3, vec![3], vec![3], vec![0, 1, 2], vec![]).unwrap();
        let (ctx, gc) = garble_circuit(&c, 5);
        let bits = [true, false, true];
        let active = encode_inputs(&ctx, &bits).unwrap();
        assert_eq!(eval_circuit(&c, &gc, &active).unwrap(), active);
        assert_eq!(decode_outputs(&ctx, &active).unwrap(), bits);
        assert_eq!(encode_inputs(&ctx, &[false; 3]).unwrap(), gc.input_zero_labels);
    }

    #[test]
    fn deterministic_garbling() {
        let c = gen_test_circuit(&GenKind::MatmulLike { n: 2, bits: 4 }).unwrap();
        assert_eq!(garble_circuit(&c, 77).1, garble_circuit(&c, 77).1);
        assert_ne!(garble_circuit(&c, 77).1, garble_circuit(&c, 78).1);
    }

    #[test]
    fn tampered_table_is_detected_whenever_consumed() {
        // Point-and-permute skips t_g when sa = 0 and t_e when sb = 0, so a
        // flipped bit is observable exactly when its half is consumed.
        let c = Circuit::new(3, vec![1, 1], vec![1], vec![2], vec![crate::netlist::Gate::and(0, 1, 2)])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (mut consumed, mut detected) = (0, 0);
        for trial in 0..200u128 {
            let (ctx, mut gc) = garble_circuit(&c, trial);
            let bits = random_bits(&mut rng, 2);
            let active = encode_inputs(&ctx, &bits).unwrap();
            let flip = Label(1u128 << rng.gen_range(0..128));
            let used = if rng.gen() {
                gc.tables[0].t_g ^= flip;
                active[0].lsb()
            } else {
                gc.tables[0].t_e ^= flip;
                active[1].lsb()
            };
            let out = eval_circuit(&c, &gc, &active).unwrap();
            let ok = decode_outputs(&ctx, &out).is_ok_and(|v| v == plaintext_evaluate(&c, &bits).unwrap());
            consumed += used as u32;
            detected += !ok as u32;
            assert_eq!(ok, !used);
        }
        assert_eq!(detected, consumed);
        assert!(consumed >= 70);
    }

    #[test]
    fn table_count_mismatch() {
        let c = gen_test_circuit(&GenKind::Adder { bits: 4 }).unwrap();
        let (ctx, mut gc) = garble_circuit(&c, 1);
        gc.tables.pop();
        let active = encode_inputs(&ctx, &[false; 8]).unwrap();
        assert!(matches!(eval_circuit(&c, &gc, &active), Err(GcError::TableCount { .. })));
    }

    #[test]
    fn circuit_call_accounting() {
        let c = gen_test_circuit(&GenKind::Adder { bits: 16 }).unwrap();
        let n_and = c.num_and() as u64;
        reset_hash_counters();
        let (ctx, gc) = garble_circuit(&c, 8);
        let g = hash_counters();
        assert_eq!((g.hash_calls, g.key_expansions), (4 * n_and, 2 * n_and));
        let active = encode_inputs(&ctx, &[true; 32]).unwrap();
        eval_circuit(&c, &gc, &active).unwrap();
        let e = hash_counters() - g;
        assert_eq!((e.hash_calls, e.key_expansions), (2 * n_and, 2 * n_and));
    }
}
