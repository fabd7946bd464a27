use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Mode;

/// Cycle accounting of one gate engine. Every cycle lands in exactly one
/// bucket, so the buckets sum to the run's total cycle count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeStats {
    pub busy: u64,
    pub operand_not_ready: u64,
    pub bank_conflict: u64,
    pub queue_empty: u64,
    pub writeback_backpressure: u64,
    pub idle: u64,
}

impl GeStats {
    pub fn total(&self) -> u64 {
        self.busy + self.stalls() + self.idle
    }

    pub fn stalls(&self) -> u64 {
        self.operand_not_ready + self.bank_conflict + self.queue_empty + self.writeback_backpressure
    }

    fn add(&mut self, o: &GeStats) {
        self.busy += o.busy;
        self.operand_not_ready += o.operand_not_ready;
        self.bank_conflict += o.bank_conflict;
        self.queue_empty += o.queue_empty;
        self.writeback_backpressure += o.writeback_backpressure;
        self.idle += o.idle;
    }
}

/// Off-chip traffic by class. `oor_retry` counts re-reads of OoR wires that
/// had not been spilled yet when first requested.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteCounts {
    pub wires_in: u64,
    pub wires_out: u64,
    pub tables: u64,
    pub instructions: u64,
    pub oor_addrs: u64,
    pub oor_retry: u64,
}

impl ByteCounts {
    pub fn total(&self) -> u64 {
        self.wires_in + self.wires_out + self.tables + self.instructions + self.oor_addrs + self.oor_retry
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub mode: Mode,
    pub num_ges: usize,
    pub sww_bytes: u64,
    pub instructions: u64,
    pub total_cycles: u64,
    pub gates_per_cycle: f64,
    /// Throughput while every engine is issuing.
    pub steady_gates_per_cycle: f64,
    pub totals: GeStats,
    pub ges: Vec<GeStats>,
    pub bytes: ByteCounts,
    pub live_wires: u64,
    pub oor_wires: u64,
    pub oor_retries: u64,
    pub window_advances: u64,
    /// sha256 over the output labels (evaluator) or the tables followed by
    /// the output zero labels (garbler).
    pub digest: String,
}

impl SimReport {
    pub(crate) fn sum_ges(ges: &[GeStats]) -> GeStats {
        let mut t = GeStats::default();
        for g in ges {
            t.add(g);
        }
        t
    }

    /// One CSV row per GE plus a `total` row.
    pub fn stall_csv(&self) -> String {
        let mut s = String::from("ge,busy,operand_not_ready,bank_conflict,queue_empty,writeback_backpressure,idle\n");
        let row = |s: &mut String, name: &str, g: &GeStats| {
            let _ = writeln!(
                s,
                "{name},{},{},{},{},{},{}",
                g.busy, g.operand_not_ready, g.bank_conflict, g.queue_empty, g.writeback_backpressure, g.idle
            );
        };
        for (i, g) in self.ges.iter().enumerate() {
            row(&mut s, &i.to_string(), g);
        }
        row(&mut s, "total", &self.totals);
        s
    }
}

/// Per-instruction stage entry cycles, recorded when timelines are enabled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrTiming {
    pub ge: u32,
    pub fetch: u64,
    pub read: u64,
    pub issue: u64,
    pub exec_done: u64,
    pub retire: u64,
}

/// Machine-wide snapshot at the end of one cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub cycle: u64,
    pub issued: u32,
    pub in_flight: u32,
    pub instr_queue: u32,
    pub table_queue: u32,
    pub oor_queue: u32,
    pub writeback_buffer: u32,
    pub window_base: u64,
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("cycle,issued,in_flight,instr_queue,table_queue,oor_queue,writeback_buffer,window_base\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.cycle, r.issued, r.in_flight, r.instr_queue, r.table_queue, r.oor_queue, r.writeback_buffer, r.window_base
        );
    }
    s
}
