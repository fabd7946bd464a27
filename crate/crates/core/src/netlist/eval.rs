use super::{Circuit, GateOp, NetlistError};

/// Evaluates the circuit in the clear. `input_bits[i]` drives wire `i`.
pub fn plaintext_evaluate(c: &Circuit, input_bits: &[bool]) -> Result<Vec<bool>, NetlistError> {
    let n_in = c.num_inputs() as usize;
    if input_bits.len() != n_in {
        return Err(NetlistError::LengthMismatch {
            expected: n_in,
            actual: input_bits.len(),
        });
    }
    let mut wires = vec![false; c.num_wires() as usize];
    wires[..n_in].copy_from_slice(input_bits);
    for g in c.gates() {
        let ins = g.inputs();
        let a = wires[ins[0] as usize];
        wires[g.output as usize] = match g.op {
            GateOp::And => a & wires[ins[1] as usize],
            GateOp::Xor => a ^ wires[ins[1] as usize],
            GateOp::Inv => !a,
        };
    }
    Ok(c.outputs().iter().map(|&o| wires[o as usize]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{gen_test_circuit, Gate, GenKind};

    fn bits_of(v: u64, n: usize) -> impl Iterator<Item = bool> {
        (0..n).map(move |i| (v >> i) & 1 == 1)
    }

    fn value(bits: &[bool]) -> u64 {
        bits.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum()
    }

    #[test]
    fn and_truth_table() {
        let c = Circuit::new(3, vec![1, 1], vec![1], vec![2], vec![Gate::and(0, 1, 2)]).unwrap();
        assert_eq!(plaintext_evaluate(&c, &[true, true]).unwrap(), vec![true]);
        assert_eq!(plaintext_evaluate(&c, &[true, false]).unwrap(), vec![false]);
    }

    #[test]
    fn double_inversion_is_identity() {
        let c = Circuit::new(3, vec![1], vec![1], vec![2], vec![Gate::inv(0, 1), Gate::inv(1, 2)])
            .unwrap();
        for x in [false, true] {
            assert_eq!(plaintext_evaluate(&c, &[x]).unwrap(), vec![x]);
        }
    }

    #[test]
    fn adder_37_plus_91() {
        let c = gen_test_circuit(&GenKind::Adder { bits: 8 }).unwrap();
        let input: Vec<bool> = bits_of(37, 8).chain(bits_of(91, 8)).collect();
        let out = plaintext_evaluate(&c, &input).unwrap();
        assert_eq!(value(&out[..8]), 128);
        assert!(!out[8]);
    }

    #[test]
    fn length_mismatch() {
        let c = gen_test_circuit(&GenKind::Adder { bits: 4 }).unwrap();
        assert_eq!(
            plaintext_evaluate(&c, &[true; 3]),
            Err(NetlistError::LengthMismatch {
                expected: 8,
                actual: 3
            })
        );
    }
}
