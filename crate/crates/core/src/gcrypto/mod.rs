//! Garbling primitives: labels, the re-keyed AES hash, FreeXOR, half-gate
//! AND, and whole-circuit garbling/evaluation used as the functional oracle.

mod aes;
mod garble;
mod halfgate;
mod hash;
mod label;

pub use aes::Aes128;
pub use garble::{
    decode_outputs, decode_wires, encode_inputs, eval_circuit, garble_circuit, GarbledCircuit,
    GarblerContext,
};
pub use halfgate::{eval_and, free_xor, garble_and, GarbledTable};
pub use hash::{hash_counters, reset_hash_counters, sigma, tccr_hash, HashCounters, TweakCipher};
pub use label::{gen_delta, GlobalDelta, Label};

use thiserror::Error;

use crate::netlist::WireId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GcError {
    #[error("wire {0} already has a label")]
    DuplicateWire(WireId),
    #[error("wire {0} has no label")]
    UnknownWire(WireId),
    #[error("expected {expected} labels, got {actual}")]
    InputCount { expected: usize, actual: usize },
    #[error("circuit has {expected} AND gates but {actual} tables were supplied")]
    TableCount { expected: usize, actual: usize },
    #[error("circuit contains INV gates but no constant-one label was supplied")]
    MissingOneLabel,
    #[error("output {index} (wire {wire}) matches neither of its labels")]
    CorruptLabel { index: usize, wire: WireId },
    #[error("binary stream length {len} is not a multiple of {record} bytes")]
    Truncated { len: usize, record: usize },
}

/// Concatenated 32-byte table records.
pub fn tables_to_bytes(tables: &[GarbledTable]) -> Vec<u8> {
    tables.iter().flat_map(|t| t.to_bytes()).collect()
}

pub fn tables_from_bytes(bytes: &[u8]) -> Result<Vec<GarbledTable>, GcError> {
    if bytes.len() % GarbledTable::BYTES != 0 {
        return Err(GcError::Truncated {
            len: bytes.len(),
            record: GarbledTable::BYTES,
        });
    }
    Ok(bytes
        .chunks_exact(GarbledTable::BYTES)
        .map(|c| GarbledTable::from_bytes(c.try_into().unwrap()))
        .collect())
}

/// Concatenated 16-byte label records.
pub fn labels_to_bytes(labels: &[Label]) -> Vec<u8> {
    labels.iter().flat_map(|l| l.to_bytes()).collect()
}

pub fn labels_from_bytes(bytes: &[u8]) -> Result<Vec<Label>, GcError> {
    if bytes.len() % 16 != 0 {
        return Err(GcError::Truncated {
            len: bytes.len(),
            record: 16,
        });
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| Label::from_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_streams_round_trip() {
        let tables = vec![
            GarbledTable {
                t_g: Label(1),
                t_e: Label(2),
            };
            3
        ];
        let bytes = tables_to_bytes(&tables);
        assert_eq!(bytes.len(), 96);
        assert_eq!(tables_from_bytes(&bytes).unwrap(), tables);
        assert!(tables_from_bytes(&bytes[..95]).is_err());
        let labels = vec![Label(5), Label(u128::MAX)];
        assert_eq!(labels_from_bytes(&labels_to_bytes(&labels)).unwrap(), labels);
    }
}
