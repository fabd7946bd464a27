//! 64-bit instruction container.
//!
//! | bits   | field |
//! |--------|-------|
//! | 1:0    | op (00 NOP, 01 XOR, 10 AND) |
//! | 2      | live |
//! | 32:3   | in0 |
//! | 62:33  | in1 |
//! | 63     | reserved, zero |

use serde::{Deserialize, Serialize};

use super::IsaError;

pub const MAX_ADDRESS_WIDTH: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Opcode {
    Nop,
    Xor,
    And,
}

impl Opcode {
    fn bits(self) -> u64 {
        match self {
            Opcode::Nop => 0,
            Opcode::Xor => 1,
            Opcode::And => 2,
        }
    }
}

/// One gate instruction. The output address is implied by position; an
/// operand address of 0 means "take the next entry of the OoR queue".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub op: Opcode,
    pub in0: u32,
    pub in1: u32,
    pub live: bool,
}

impl Instruction {
    pub const NOP: Instruction = Instruction {
        op: Opcode::Nop,
        in0: 0,
        in1: 0,
        live: false,
    };

    pub fn operands(&self) -> [u32; 2] {
        [self.in0, self.in1]
    }
}

/// Bits needed to address `capacity_wires` window slots.
pub fn address_width(capacity_wires: u64) -> u32 {
    capacity_wires.max(2).next_power_of_two().trailing_zeros()
}

pub fn encode_instruction(i: &Instruction, width: u32) -> Result<u64, IsaError> {
    let width = width.min(MAX_ADDRESS_WIDTH);
    for a in i.operands() {
        if (a as u64) >> width != 0 {
            return Err(IsaError::AddressOverflow { addr: a, width });
        }
    }
    Ok(i.op.bits() | (i.live as u64) << 2 | (i.in0 as u64) << 3 | (i.in1 as u64) << 33)
}

pub fn decode_instruction(word: u64) -> Result<Instruction, IsaError> {
    if word >> 63 != 0 {
        return Err(IsaError::BadWord(word));
    }
    let op = match word & 3 {
        0 => Opcode::Nop,
        1 => Opcode::Xor,
        2 => Opcode::And,
        _ => return Err(IsaError::BadWord(word)),
    };
    let mask = (1u64 << 30) - 1;
    Ok(Instruction {
        op,
        live: word >> 2 & 1 == 1,
        in0: ((word >> 3) & mask) as u32,
        in1: ((word >> 33) & mask) as u32,
    })
}

pub fn encode_stream(instrs: &[Instruction], width: u32) -> Result<Vec<u8>, IsaError> {
    let mut out = Vec::with_capacity(instrs.len() * 8);
    for i in instrs {
        out.extend_from_slice(&encode_instruction(i, width)?.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_stream(bytes: &[u8]) -> Result<Vec<Instruction>, IsaError> {
    if bytes.len() % 8 != 0 {
        return Err(IsaError::Truncated(bytes.len()));
    }
    bytes
        .chunks_exact(8)
        .map(|c| decode_instruction(u64::from_le_bytes(c.try_into().unwrap())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nop_is_zero() {
        assert_eq!(encode_instruction(&Instruction::NOP, 17).unwrap(), 0);
        assert_eq!(decode_instruction(0).unwrap(), Instruction::NOP);
    }

    #[test]
    fn two_megabyte_window_width() {
        let capacity = 2 * (1u64 << 20) / 16;
        assert_eq!(capacity, 131_072);
        assert_eq!(address_width(capacity), 17);
    }

    #[test]
    fn overflow_rejected() {
        let i = Instruction {
            op: Opcode::And,
            in0: 1 << 17,
            in1: 3,
            live: true,
        };
        assert_eq!(
            encode_instruction(&i, 17),
            Err(IsaError::AddressOverflow { addr: 1 << 17, width: 17 })
        );
        assert!(encode_instruction(&i, 18).is_ok());
    }

    #[test]
    fn bad_words() {
        assert!(decode_instruction(3).is_err());
        assert!(decode_instruction(1 << 63).is_err());
    }

    fn arb_instruction(width: u32) -> impl Strategy<Value = Instruction> {
        let addr = 0u32..(1u32 << width);
        (0..3u8, addr.clone(), addr, any::<bool>()).prop_map(|(op, in0, in1, live)| Instruction {
            op: [Opcode::Nop, Opcode::Xor, Opcode::And][op as usize],
            in0,
            in1,
            live,
        })
    }

    proptest! {
        #[test]
        fn round_trip_any_width(
            (width, i) in (1u32..=30).prop_flat_map(|w| (Just(w), arb_instruction(w)))
        ) {
            let word = encode_instruction(&i, width).unwrap();
            prop_assert_eq!(word >> 63, 0);
            prop_assert_eq!(decode_instruction(word).unwrap(), i);
        }

        #[test]
        fn round_trip_full_width(i in arb_instruction(30)) {
            prop_assert_eq!(decode_instruction(encode_instruction(&i, 30).unwrap()).unwrap(), i);
        }
    }
}
