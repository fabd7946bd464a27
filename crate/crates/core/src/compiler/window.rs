use serde::{Deserialize, Serialize};

use crate::isa::Program;

use super::CompileError;

/// Static view of the sliding wire window: `capacity` slots, advancing by
/// `half` addresses at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowModel {
    capacity: u64,
}

impl WindowModel {
    pub fn new(capacity_wires: u64) -> Result<Self, CompileError> {
        if capacity_wires < 2 || !capacity_wires.is_power_of_two() {
            return Err(CompileError::Window(format!(
                "capacity {capacity_wires} must be a power of two and at least 2"
            )));
        }
        Ok(WindowModel {
            capacity: capacity_wires,
        })
    }

    /// Window sized from SWW bytes at 16 bytes per label.
    pub fn from_sww_bytes(bytes: u64) -> Result<Self, CompileError> {
        if bytes % 16 != 0 {
            return Err(CompileError::Window(format!("{bytes} bytes is not a whole number of labels")));
        }
        Self::new(bytes / 16)
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn half(&self) -> u64 {
        self.capacity / 2
    }

    pub fn half_of(&self, addr: u64) -> u64 {
        addr / self.half()
    }

    /// Half holding the first gate output; the window starts with halves
    /// `{h0 - 1, h0}` resident.
    pub fn first_half(&self, num_inputs: u32) -> u64 {
        self.half_of(num_inputs as u64 + 1).max(1)
    }

    pub fn initial_base(&self, num_inputs: u32) -> u64 {
        (self.first_half(num_inputs) - 1) * self.half()
    }

    /// Inputs resident in the initial window, which are preloaded.
    pub fn preloaded_inputs(&self, num_inputs: u32) -> std::ops::RangeInclusive<u32> {
        let base = self.initial_base(num_inputs).max(1) as u32;
        base..=num_inputs
    }

    /// An operand at `addr` is out of range for an instruction writing
    /// `out` when it lies at least two halves below it.
    pub fn is_oor(&self, addr: u64, out: u64) -> bool {
        self.half_of(addr) + 2 <= self.half_of(out)
    }
}

/// Replays a compiled program against the window model: every non-zero
/// operand must be resident when its consumer runs, and every OoR operand
/// must refer to an input or a wire marked live.
pub fn check_window(p: &Program, w: &WindowModel) -> Result<(), CompileError> {
    if !p.is_renamed() {
        return Err(CompileError::NotRenamed);
    }
    let ops = p.resolved_operands()?;
    let n_in = p.num_inputs as u64;
    for (k, (ins, resolved)) in p.instructions.iter().zip(&ops).enumerate() {
        let out = p.output_addrs[k] as u64;
        let base = (w.half_of(out).max(1) - 1) * w.half();
        for (raw, &addr) in ins.operands().iter().zip(resolved) {
            let a = addr as u64;
            if a == 0 || a >= out {
                return Err(CompileError::Soundness(format!("instruction {k} reads address {a} (output {out})")));
            }
            if *raw == 0 {
                if !w.is_oor(a, out) {
                    return Err(CompileError::Soundness(format!(
                        "instruction {k} fetches resident address {a} through the OoR queue"
                    )));
                }
                if a > n_in && !p.instructions[(a - n_in - 1) as usize].live {
                    return Err(CompileError::SpentOor { pos: k, addr });
                }
            } else if a < base {
                return Err(CompileError::Soundness(format!(
                    "instruction {k} reads address {a} below window base {base}"
                )));
            }
        }
    }
    Ok(())
}
