use std::fmt;
use std::str::FromStr;

use crate::isa::{assemble, Program};
use crate::netlist::Circuit;
use crate::simulator::SimConfig;

use super::passes::{lower_oor, mark_live, rename_wires, reorder_full, reorder_segment};
use super::streams::{schedule_ges_with, StreamSet};
use super::window::WindowModel;
use super::CompileError;

/// One token of a pass list such as `full,rename,esw,oor,sched:16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    Baseline,
    Full,
    /// Segment reorder; `None` means half the window.
    Segment(Option<usize>),
    Rename,
    Esw,
    Oor,
    Sched(usize),
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pass::Baseline => f.write_str("baseline"),
            Pass::Full => f.write_str("full"),
            Pass::Segment(None) => f.write_str("segment"),
            Pass::Segment(Some(n)) => write!(f, "segment:{n}"),
            Pass::Rename => f.write_str("rename"),
            Pass::Esw => f.write_str("esw"),
            Pass::Oor => f.write_str("oor"),
            Pass::Sched(g) => write!(f, "sched:{g}"),
        }
    }
}

impl FromStr for Pass {
    type Err = CompileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CompileError::Pass(format!("unknown pass `{s}`"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a.parse::<usize>().map_err(|_| bad())?)),
            None => (s, None),
        };
        Ok(match (name, arg) {
            ("baseline", None) => Pass::Baseline,
            ("full", None) => Pass::Full,
            ("segment", Some(0)) => return Err(bad()),
            ("segment", n) => Pass::Segment(n),
            ("rename", None) => Pass::Rename,
            ("esw", None) => Pass::Esw,
            ("oor", None) => Pass::Oor,
            ("sched", Some(g)) if g > 0 => Pass::Sched(g),
            _ => return Err(bad()),
        })
    }
}

pub fn parse_passes(s: &str) -> Result<Vec<Pass>, CompileError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_passes(passes: &[Pass]) -> String {
    passes.iter().map(Pass::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub program: Program,
    pub streams: Option<StreamSet>,
}

/// Assembles `c` and applies `passes` in order. The window comes from
/// `cfg.sww_bytes`; `sched:G` schedules with `cfg`'s timing and G engines.
pub fn compile(c: &Circuit, passes: &[Pass], cfg: &SimConfig) -> Result<Compiled, CompileError> {
    let w = WindowModel::from_sww_bytes(cfg.sww_bytes)?;
    let mut program = assemble(c);
    let mut streams = None;
    for pass in passes {
        if streams.is_some() {
            return Err(CompileError::Pass(format!("`{pass}` after sched")));
        }
        program = match *pass {
            Pass::Baseline => program,
            Pass::Full => reorder_full(&program)?,
            Pass::Segment(n) => reorder_segment(&program, n.unwrap_or(w.half() as usize))?,
            Pass::Rename => rename_wires(&program),
            Pass::Esw => mark_live(&program, &w)?,
            Pass::Oor => lower_oor(&program, &w)?,
            Pass::Sched(g) => {
                let sched_cfg = SimConfig {
                    num_ges: g,
                    ..cfg.clone()
                };
                streams = Some(schedule_ges_with(&program, &sched_cfg)?);
                program.meta.passes.push(pass.to_string());
                program
            }
        };
    }
    Ok(Compiled { program, streams })
}
