use serde::{Deserialize, Serialize};

use crate::isa::Program;

use super::streams::StreamSet;
use super::window::WindowModel;

pub const WIRE_BYTES: u64 = 16;
pub const TABLE_BYTES: u64 = 32;
pub const INSTRUCTION_BYTES: u64 = 8;
pub const OOR_ADDR_BYTES: u64 = 4;

/// Static off-chip traffic of a compiled program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficReport {
    pub live_wires: u64,
    pub oor_wires: u64,
    pub total_wires: u64,
    pub preload_wires: u64,
    /// Preloaded inputs plus OoR fetches.
    pub bytes_wires_in: u64,
    /// Live-wire spills.
    pub bytes_wires_out: u64,
    pub bytes_tables: u64,
    pub bytes_instructions: u64,
    pub bytes_oor_addrs: u64,
}

pub fn traffic_report(p: &Program, w: &WindowModel, streams: &StreamSet) -> TrafficReport {
    let live = p.num_live() as u64;
    let oor = streams.num_oor() as u64;
    let preload = w.preloaded_inputs(p.num_inputs).count() as u64;
    TrafficReport {
        live_wires: live,
        oor_wires: oor,
        total_wires: live + oor,
        preload_wires: preload,
        bytes_wires_in: WIRE_BYTES * (preload + oor),
        bytes_wires_out: WIRE_BYTES * live,
        bytes_tables: TABLE_BYTES * streams.num_and as u64,
        bytes_instructions: INSTRUCTION_BYTES * streams.program_len as u64,
        bytes_oor_addrs: OOR_ADDR_BYTES * oor,
    }
}
