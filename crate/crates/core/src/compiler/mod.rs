//! Program optimization passes, OoR lowering, GE scheduling and static
//! traffic accounting.

mod passes;
mod pipeline;
mod streams;
mod traffic;
mod window;

pub use passes::{lower_oor, mark_live, program_levels, rename_wires, reorder_full, reorder_segment};
pub use pipeline::{compile, format_passes, parse_passes, Compiled, Pass};
pub use streams::{schedule_ges, schedule_ges_with, GeStream, StreamSet};
pub use traffic::{
    traffic_report, TrafficReport, INSTRUCTION_BYTES, OOR_ADDR_BYTES, TABLE_BYTES, WIRE_BYTES,
};
pub use window::{check_window, WindowModel};

use thiserror::Error;

use crate::isa::IsaError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("program must be renamed first")]
    NotRenamed,
    #[error("program has already been OoR-lowered")]
    AlreadyLowered,
    #[error("program must be OoR-lowered first")]
    NotLowered,
    #[error("instruction {pos} needs OoR wire {addr}, which was never marked live")]
    SpentOor { pos: usize, addr: u32 },
    #[error("invalid window: {0}")]
    Window(String),
    #[error("window soundness violated: {0}")]
    Soundness(String),
    #[error("{0}")]
    Pass(String),
    #[error("at least one gate engine is required")]
    NoGes,
    #[error(transparent)]
    Isa(#[from] IsaError),
    #[error("scheduling run failed: {0}")]
    Sim(String),
}
