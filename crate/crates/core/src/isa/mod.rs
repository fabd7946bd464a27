//! Accelerator instruction set: the instruction word, gate programs, the
//! netlist assembler and a plaintext interpreter.

mod encoding;
mod program;

pub use encoding::{
    address_width, decode_instruction, decode_stream, encode_instruction, encode_stream, Instruction, Opcode,
    MAX_ADDRESS_WIDTH,
};
pub use program::{assemble, interpret, Program, ProgramMeta};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsaError {
    #[error("address {addr} does not fit in {width} bits")]
    AddressOverflow { addr: u32, width: u32 },
    #[error("invalid instruction word {0:#018x}")]
    BadWord(u64),
    #[error("instruction stream of {0} bytes is not a whole number of words")]
    Truncated(usize),
    #[error("expected {expected} input bits, got {actual}")]
    InputLength { expected: usize, actual: usize },
    #[error("instruction {pos} reads undefined address {addr}")]
    UndefinedOperand { pos: usize, addr: u32 },
    #[error("instruction {pos} needs an OoR address but the sequence is exhausted")]
    OorUnderflow { pos: usize },
    #[error("{0} OoR addresses left unconsumed")]
    OorLeftover(usize),
    #[error("instruction {pos} is a NOP")]
    Nop { pos: usize },
    #[error("program does not form a valid circuit: {0}")]
    Invalid(String),
}
