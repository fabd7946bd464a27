use crate::compiler::StreamSet;
use crate::gcrypto::{
    decode_outputs, encode_inputs, eval_circuit, garble_circuit, GarbledCircuit, GarbledTable, GarblerContext, Label,
};
use crate::isa::{interpret, Program};
use crate::netlist::Circuit;

use super::{Mode, SimError, SimOutput};

/// Initial contents of off-chip memory for one run.
///
/// `input_labels[a - 1]` is the label of input address `a`, one-wire
/// included: active labels for the evaluator, zero labels for the garbler.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DramImage {
    pub input_labels: Vec<Label>,
    /// Garbled tables in program AND order (evaluator only).
    pub tables: Vec<GarbledTable>,
    /// The FreeXOR offset R (garbler only).
    pub delta: Option<Label>,
}

impl DramImage {
    pub(crate) fn check(&self, streams: &StreamSet, mode: Mode) -> Result<(), SimError> {
        if self.input_labels.len() != streams.num_inputs as usize {
            return Err(SimError::Image(format!(
                "{} input labels for {} input addresses",
                self.input_labels.len(),
                streams.num_inputs
            )));
        }
        match mode {
            Mode::Evaluator if self.tables.len() != streams.num_and => Err(SimError::Image(format!(
                "{} tables for {} AND instructions",
                self.tables.len(),
                streams.num_and
            ))),
            Mode::Garbler if self.delta.is_none() => Err(SimError::Image("garbler image needs R".into())),
            _ => Ok(()),
        }
    }
}

/// Functional reference for a compiled program, computed gate by gate with
/// the software garbler on the program's own netlist.
pub struct Reference {
    pub circuit: Circuit,
    pub ctx: GarblerContext,
    pub garbled: GarbledCircuit,
    /// Active input labels, one-wire last.
    pub active_inputs: Vec<Label>,
    pub output_labels: Vec<Label>,
    pub output_bits: Vec<bool>,
}

impl Reference {
    /// `bits` excludes the one-wire.
    pub fn new(p: &Program, seed: u128, bits: &[bool]) -> Result<Self, SimError> {
        let plain = interpret(p, bits).map_err(|e| SimError::Image(e.to_string()))?;
        let circuit = p.to_circuit().map_err(|e| SimError::Image(e.to_string()))?;
        let (ctx, garbled) = garble_circuit(&circuit, seed);
        let mut all = bits.to_vec();
        if p.one_wire.is_some() {
            all.push(true);
        }
        let active_inputs = encode_inputs(&ctx, &all).map_err(|e| SimError::Image(e.to_string()))?;
        let output_labels =
            eval_circuit(&circuit, &garbled, &active_inputs).map_err(|e| SimError::Image(e.to_string()))?;
        let output_bits = decode_outputs(&ctx, &output_labels).map_err(|e| SimError::Image(e.to_string()))?;
        if output_bits != plain {
            return Err(SimError::Mismatch("software garbling disagrees with plaintext".into()));
        }
        Ok(Reference {
            circuit,
            ctx,
            garbled,
            active_inputs,
            output_labels,
            output_bits,
        })
    }

    pub fn image(&self, mode: Mode) -> DramImage {
        match mode {
            Mode::Evaluator => DramImage {
                input_labels: self.active_inputs.clone(),
                tables: self.garbled.tables.clone(),
                delta: None,
            },
            Mode::Garbler => DramImage {
                input_labels: self.garbled.input_zero_labels.clone(),
                tables: Vec::new(),
                delta: Some(self.ctx.delta().label()),
            },
        }
    }

    /// Compares a simulated run against the reference, bit-exactly.
    pub fn verify(&self, out: &SimOutput) -> Result<(), SimError> {
        match out.report.mode {
            Mode::Evaluator => {
                if let Some(i) = first_diff(&out.output_labels, &self.output_labels) {
                    return Err(SimError::Mismatch(format!("output label {i} differs")));
                }
                let bits = decode_outputs(&self.ctx, &out.output_labels).map_err(|e| SimError::Mismatch(e.to_string()))?;
                if bits != self.output_bits {
                    return Err(SimError::Mismatch("decoded outputs differ from plaintext".into()));
                }
            }
            Mode::Garbler => {
                if let Some(i) = first_diff(&out.tables, &self.garbled.tables) {
                    return Err(SimError::Mismatch(format!("garbled table {i} differs")));
                }
                if let Some(i) = first_diff(&out.output_labels, &self.garbled.output_zero_labels) {
                    return Err(SimError::Mismatch(format!("output zero label {i} differs")));
                }
            }
        }
        Ok(())
    }
}

fn first_diff<T: PartialEq>(a: &[T], b: &[T]) -> Option<usize> {
    if a.len() != b.len() {
        return Some(a.len().min(b.len()));
    }
    a.iter().zip(b).position(|(x, y)| x != y)
}
