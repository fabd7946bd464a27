//! Cycle-level model of the accelerator: gate engines with pipelined
//! half-gate units, a banked sliding wire window and a bandwidth-limited
//! off-chip memory.
//!
//! Runs are functional: labels flow through the modeled datapath, so a run
//! produces the same output labels (evaluator) or tables (garbler) as the
//! software garbler.

mod config;
mod dram;
mod engine;
mod image;
mod report;
mod sww;

pub use config::{DramConfig, Mode, PipelineConfig, QueueDepths, SimConfig};
pub use dram::DramModel;
pub use engine::schedule_dynamic;
pub use image::{DramImage, Reference};
pub use report::{trace_csv, ByteCounts, GeStats, InstrTiming, SimReport, TraceRow};
pub use sww::{sww_map, SwwState};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compiler::StreamSet;
use crate::gcrypto::{labels_to_bytes, tables_to_bytes, GarbledTable, Label};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The instruction streams broke an invariant the hardware relies on.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("malformed instruction streams: {0}")]
    Stream(String),
    #[error("no progress for too long, stopped at cycle {cycle}\n{dump}")]
    Deadlock { cycle: u64, dump: String },
    #[error("bad memory image: {0}")]
    Image(String),
    #[error("result mismatch: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub report: SimReport,
    /// Labels of the program outputs as found in off-chip memory at the end
    /// of the run: active labels (evaluator) or zero labels (garbler).
    pub output_labels: Vec<Label>,
    /// Tables written back, in program AND order (garbler only).
    pub tables: Vec<GarbledTable>,
    pub timeline: Option<Vec<InstrTiming>>,
    pub trace: Option<Vec<TraceRow>>,
}

/// Runs compiled streams against a memory image.
pub fn simulate(streams: &StreamSet, image: &DramImage, cfg: &SimConfig) -> Result<SimOutput, SimError> {
    let r = engine::run_streams(streams, image, cfg)?;
    let mut h = Sha256::new();
    if cfg.mode == Mode::Garbler {
        h.update(tables_to_bytes(&r.tables));
    }
    h.update(labels_to_bytes(&r.output_labels));
    let totals = SimReport::sum_ges(&r.ges);
    let report = SimReport {
        mode: cfg.mode,
        num_ges: cfg.num_ges,
        sww_bytes: cfg.sww_bytes,
        instructions: r.instructions,
        total_cycles: r.total_cycles,
        gates_per_cycle: if r.total_cycles == 0 {
            0.0
        } else {
            r.instructions as f64 / r.total_cycles as f64
        },
        steady_gates_per_cycle: r.steady_gates_per_cycle,
        totals,
        ges: r.ges,
        bytes: r.bytes,
        live_wires: streams.writebacks.len() as u64,
        oor_wires: streams.num_oor() as u64,
        oor_retries: r.oor_retries,
        window_advances: r.window_advances,
        digest: hex::encode(h.finalize()),
    };
    Ok(SimOutput {
        report,
        output_labels: r.output_labels,
        tables: r.tables,
        timeline: r.timeline,
        trace: r.trace,
    })
}
