use serde::{Deserialize, Serialize};

use crate::isa::{Instruction, Opcode, Program};
use crate::simulator::{schedule_dynamic, SimConfig};

use super::window::WindowModel;
use super::CompileError;

/// The queue contents of one gate engine.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeStream {
    /// Program position of each instruction.
    pub positions: Vec<u32>,
    pub instructions: Vec<Instruction>,
    /// Index into the program-order table sequence for each AND.
    pub tables: Vec<u32>,
    /// OoR wire addresses in consumption order.
    pub oor: Vec<u32>,
}

/// Per-GE streams for a compiled program plus the live-wire write schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSet {
    pub ges: Vec<GeStream>,
    /// `(program position, wire address)` of every live output.
    pub writebacks: Vec<(u32, u32)>,
    pub num_inputs: u32,
    pub one_wire: Option<u32>,
    pub outputs: Vec<u32>,
    pub window_capacity: u64,
    pub program_len: usize,
    pub num_and: usize,
}

impl StreamSet {
    /// Splits a lowered program across GEs given the GE of each position.
    pub fn from_assignment(p: &Program, ge_of: &[u32], num_ges: usize) -> Result<Self, CompileError> {
        let oor = p.oor_addrs.as_ref().ok_or(CompileError::NotLowered)?;
        let window_capacity = p.meta.window_capacity.ok_or(CompileError::NotLowered)?;
        if !p.is_renamed() {
            return Err(CompileError::NotRenamed);
        }
        if num_ges == 0 {
            return Err(CompileError::NoGes);
        }
        let mut ges = vec![GeStream::default(); num_ges];
        let mut next_oor = oor.iter();
        let mut and_ord = 0u32;
        let mut writebacks = Vec::new();
        for (k, ins) in p.instructions.iter().enumerate() {
            let g = ge_of[k] as usize;
            if g >= num_ges {
                return Err(CompileError::Pass(format!("instruction {k} assigned to GE {g} of {num_ges}")));
            }
            let s = &mut ges[g];
            s.positions.push(k as u32);
            s.instructions.push(*ins);
            if ins.op == Opcode::And {
                s.tables.push(and_ord);
                and_ord += 1;
            }
            if ins.op != Opcode::Nop {
                for a in ins.operands() {
                    if a == 0 {
                        s.oor.push(*next_oor.next().ok_or(crate::isa::IsaError::OorUnderflow { pos: k })?);
                    }
                }
            }
            if ins.live {
                writebacks.push((k as u32, p.output_addrs[k]));
            }
        }
        Ok(StreamSet {
            ges,
            writebacks,
            num_inputs: p.num_inputs,
            one_wire: p.one_wire,
            outputs: p.outputs.clone(),
            window_capacity,
            program_len: p.len(),
            num_and: and_ord as usize,
        })
    }

    pub fn num_ges(&self) -> usize {
        self.ges.len()
    }

    pub fn window(&self) -> WindowModel {
        WindowModel::new(self.window_capacity).expect("validated at construction")
    }

    pub fn num_oor(&self) -> usize {
        self.ges.iter().map(|g| g.oor.len()).sum()
    }

    /// Checks that the per-GE sequences partition `0..program_len` with each
    /// sequence in program order, and that table/OoR lengths agree.
    pub fn validate(&self) -> Result<(), CompileError> {
        let mut seen = vec![false; self.program_len];
        let mut ands = 0;
        for (g, s) in self.ges.iter().enumerate() {
            let bad = |m: String| Err(CompileError::Pass(format!("GE {g}: {m}")));
            if s.positions.len() != s.instructions.len() {
                return bad("positions and instructions differ in length".into());
            }
            if !s.positions.windows(2).all(|w| w[0] < w[1]) {
                return bad("positions are not increasing".into());
            }
            for &p in &s.positions {
                match seen.get_mut(p as usize) {
                    Some(x) if !*x => *x = true,
                    _ => return bad(format!("position {p} duplicated or out of range")),
                }
            }
            let n_and = s.instructions.iter().filter(|i| i.op == Opcode::And).count();
            if n_and != s.tables.len() {
                return bad(format!("{n_and} ANDs but {} tables", s.tables.len()));
            }
            ands += n_and;
            let zeros: usize = s
                .instructions
                .iter()
                .filter(|i| i.op != Opcode::Nop)
                .map(|i| (i.in0 == 0) as usize + (i.in1 == 0) as usize)
                .sum();
            if zeros != s.oor.len() {
                return bad(format!("{zeros} zero operands but {} OoR entries", s.oor.len()));
            }
        }
        if seen.iter().any(|x| !x) || ands != self.num_and {
            return Err(CompileError::Pass("streams do not cover the program".into()));
        }
        Ok(())
    }

    /// Reassembles the program-order instruction list.
    pub fn program_instructions(&self) -> Vec<Instruction> {
        let mut out = vec![Instruction::NOP; self.program_len];
        for s in &self.ges {
            for (&p, i) in s.positions.iter().zip(&s.instructions) {
                out[p as usize] = *i;
            }
        }
        out
    }
}

/// Assigns instructions to `num_ges` engines with the default evaluator
/// timing; see [`schedule_ges_with`].
pub fn schedule_ges(p: &Program, num_ges: usize) -> Result<StreamSet, CompileError> {
    let capacity = p.meta.window_capacity.ok_or(CompileError::NotLowered)?;
    let cfg = SimConfig {
        num_ges,
        sww_bytes: capacity * 16,
        ..SimConfig::default()
    };
    schedule_ges_with(p, &cfg)
}

/// Runs the timing model with ideal memory, handing the next program
/// instruction to the lowest-numbered engine that can accept one each
/// cycle, and records the resulting assignment.
pub fn schedule_ges_with(p: &Program, cfg: &SimConfig) -> Result<StreamSet, CompileError> {
    if cfg.num_ges == 0 {
        return Err(CompileError::NoGes);
    }
    if p.oor_addrs.is_none() {
        return Err(CompileError::NotLowered);
    }
    let ge_of = schedule_dynamic(p, cfg).map_err(|e| CompileError::Sim(e.to_string()))?;
    StreamSet::from_assignment(p, &ge_of, cfg.num_ges)
}
