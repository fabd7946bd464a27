//! Cycle loop shared by simulation runs and the compile-time scheduling run.
//!
//! Each gate engine is a chain of four elastic stage groups (front end,
//! SWW read, execute, writeback). A slot may leave its group once its
//! `ready_at` cycle has been reached, one slot per group per cycle, in
//! order. Within a cycle the groups are processed back to front so an
//! instruction advances at most one group per cycle:
//!
//! * A: writeback retire (window residency, bank write port, spill buffer)
//! * B: execute -> writeback, publishing the result for forwarding
//! * C: read -> execute issue once every operand is resolved
//! * D/E/F per GE in index order: bank reads, front end -> read, fetch

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::compiler::{StreamSet, WindowModel, WIRE_BYTES};
use crate::gcrypto::{eval_and, garble_and, GarbledTable, GlobalDelta, Label};
use crate::isa::{Opcode, Program};

use super::config::{Mode, SimConfig};
use super::dram::DramModel;
use super::image::DramImage;
use super::report::{ByteCounts, GeStats, InstrTiming, TraceRow};
use super::sww::{sww_map, SwwState};
use super::SimError;

const STREAMS_PER_GE: usize = 5;
const S_INSTR: usize = 0;
const S_TABLE: usize = 1;
const S_OOR_ADDR: usize = 2;
const S_OOR_WIRE: usize = 3;
const S_WRITEBACK: usize = 4;

#[derive(Clone, Copy)]
struct Instr {
    and: bool,
    src: [u32; 2],
    oor: [bool; 2],
    live: bool,
    table: u32,
}

#[derive(Clone, Copy, Debug)]
enum Operand {
    Ready(Label),
    /// Valid in the SWW; needs a bank read.
    Bank(u32),
    /// Waiting for the producing instruction to forward its result.
    Pending(u32),
}

#[derive(Clone, Copy)]
struct Slot {
    pos: u32,
    ready_at: u64,
    read_at: u64,
    ops: [Operand; 2],
    table: GarbledTable,
    value: Label,
    out_table: Option<GarbledTable>,
    denied: bool,
}

impl Slot {
    fn new(pos: u32, ready_at: u64) -> Self {
        Slot {
            pos,
            ready_at,
            read_at: 0,
            ops: [Operand::Ready(Label::ZERO); 2],
            table: GarbledTable::default(),
            value: Label::ZERO,
            out_table: None,
            denied: false,
        }
    }

    fn needs_bank(&self) -> bool {
        self.ops.iter().any(|o| matches!(o, Operand::Bank(_)))
    }
}

#[derive(Default)]
struct Ge {
    front: VecDeque<Slot>,
    read: VecDeque<Slot>,
    exec: VecDeque<Slot>,
    wb: VecDeque<Slot>,
    /// Program positions assigned to this GE (static mode).
    positions: Vec<u32>,
    fetched: usize,
    retired: usize,
    issued: usize,
    // memory-side queue state, counted in stream entries
    instr_req: usize,
    instr_arrived: usize,
    table_req: usize,
    table_arrived: usize,
    table_popped: usize,
    addr_req: usize,
    addr_arrived: usize,
    wire_req: usize,
    oor_popped: usize,
    oor_data: Vec<Option<Label>>,
    stats: GeStats,
    first_issue: Option<u64>,
    last_issue: u64,
    issued_now: bool,
}

impl Ge {
    fn in_flight(&self) -> usize {
        self.front.len() + self.read.len() + self.exec.len() + self.wb.len()
    }
}

enum Req {
    Preload { from: u32, to: u32 },
    Instr { ge: usize, count: usize },
    Table { ge: usize, count: usize },
    OorAddr { ge: usize, count: usize },
    OorWire { ge: usize, seq: usize, addr: u32, retry: bool },
    Spill { addr: u32, label: Label },
    TableOut { ordinal: u32, table: GarbledTable },
}

pub(crate) struct RunResult {
    pub total_cycles: u64,
    pub ges: Vec<GeStats>,
    pub instructions: u64,
    pub steady_gates_per_cycle: f64,
    pub bytes: ByteCounts,
    pub oor_retries: u64,
    pub window_advances: u64,
    pub output_labels: Vec<Label>,
    pub tables: Vec<GarbledTable>,
    pub timeline: Option<Vec<InstrTiming>>,
    pub trace: Option<Vec<TraceRow>>,
    pub assignment: Vec<u32>,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    mode: Mode,
    functional: bool,
    dynamic: bool,
    now: u64,
    prog: Vec<Instr>,
    num_inputs: u32,
    outputs: Vec<u32>,
    ges: Vec<Ge>,
    sww: SwwState,
    num_banks: usize,
    bank_use: Vec<u32>,
    fwd: Vec<bool>,
    values: Vec<Label>,
    has_read: Vec<bool>,
    read_prefix: usize,
    written: Vec<bool>,
    wb_prefix: usize,
    store: Vec<Label>,
    store_valid: Vec<bool>,
    preload_left: usize,
    delta: Option<GlobalDelta>,
    image_tables: &'a [GarbledTable],
    ge_tables: Vec<&'a [u32]>,
    ge_oor: Vec<&'a [u32]>,
    dram: Option<DramModel<Req>>,
    retries: VecDeque<(u64, Req)>,
    tables_out: Vec<Option<GarbledTable>>,
    bytes: ByteCounts,
    oor_retries: u64,
    window_advances: u64,
    next_global: usize,
    assignment: Vec<u32>,
    issue_time: Vec<u64>,
    timeline: Option<Vec<InstrTiming>>,
    trace: Option<Vec<TraceRow>>,
    progress: bool,
    last_progress: u64,
    caps: [usize; 4],
}

fn latency_cap(l: u32) -> usize {
    l.max(1) as usize
}

impl<'a> Engine<'a> {
    fn base(cfg: &'a SimConfig, prog: Vec<Instr>, num_inputs: u32, outputs: Vec<u32>, window: WindowModel) -> Self {
        let len = prog.len();
        let max_addr = num_inputs as usize + len;
        let p = &cfg.pipeline;
        let exec_cap = latency_cap(p.and_garbler.max(p.and_evaluator).max(p.xor));
        Engine {
            cfg,
            mode: cfg.mode,
            functional: false,
            dynamic: false,
            now: 0,
            prog,
            num_inputs,
            outputs,
            ges: (0..cfg.num_ges).map(|_| Ge::default()).collect(),
            sww: SwwState::new(window.capacity(), window.initial_base(num_inputs)),
            num_banks: cfg.num_banks(),
            bank_use: vec![0; cfg.num_banks()],
            fwd: vec![false; len],
            values: vec![Label::ZERO; len],
            has_read: vec![false; len],
            read_prefix: 0,
            written: vec![false; len],
            wb_prefix: 0,
            store: vec![Label::ZERO; max_addr + 1],
            store_valid: vec![false; max_addr + 1],
            preload_left: 0,
            delta: None,
            image_tables: &[],
            ge_tables: Vec::new(),
            ge_oor: Vec::new(),
            dram: None,
            retries: VecDeque::new(),
            tables_out: Vec::new(),
            bytes: ByteCounts::default(),
            oor_retries: 0,
            window_advances: 0,
            next_global: 0,
            assignment: vec![u32::MAX; len],
            issue_time: vec![0; len],
            timeline: cfg.timeline.then(|| vec![InstrTiming::default(); len]),
            trace: cfg.trace.then(Vec::new),
            progress: false,
            last_progress: 0,
            caps: [
                latency_cap(p.fetch_decode),
                latency_cap(p.sww_read),
                exec_cap,
                latency_cap(p.writeback),
            ],
        }
    }

    fn out_addr(&self, pos: u32) -> u64 {
        self.num_inputs as u64 + 1 + pos as u64
    }

    fn latency(&self, and: bool) -> u64 {
        if and {
            self.cfg.and_latency() as u64
        } else {
            self.cfg.pipeline.xor as u64
        }
    }

    fn stream(ge: usize, kind: usize) -> usize {
        1 + ge * STREAMS_PER_GE + kind
    }

    fn contract(&self, msg: String) -> SimError {
        SimError::Contract(format!("cycle {}: {msg}", self.now))
    }

    // ----- window -------------------------------------------------------

    fn can_advance(&self) -> bool {
        if self.preload_left > 0 {
            return false;
        }
        let first_out = self.num_inputs as u64 + 1;
        let need_read = self.sww.top().saturating_sub(first_out) as usize;
        let need_written = (self.sww.base() + self.sww.half()).saturating_sub(first_out) as usize;
        self.read_prefix >= need_read.min(self.prog.len()) && self.wb_prefix >= need_written.min(self.prog.len())
    }

    fn mark_read(&mut self, pos: usize) {
        self.has_read[pos] = true;
        while self.read_prefix < self.has_read.len() && self.has_read[self.read_prefix] {
            self.read_prefix += 1;
        }
    }

    fn mark_written(&mut self, pos: usize) {
        self.written[pos] = true;
        while self.wb_prefix < self.written.len() && self.written[self.wb_prefix] {
            self.wb_prefix += 1;
        }
    }

    // ----- phases -------------------------------------------------------

    fn retire(&mut self, g: usize) -> Result<(), SimError> {
        let Some(head) = self.ges[g].wb.front().copied() else {
            return Ok(());
        };
        if self.now < head.ready_at {
            return Ok(());
        }
        let out = self.out_addr(head.pos);
        while out >= self.sww.top() {
            if !self.can_advance() {
                return Ok(());
            }
            let top = self.sww.top();
            self.sww.window_advance(top)?;
            self.window_advances += 1;
            self.progress = true;
        }
        let (bank, _) = sww_map(out, self.sww.capacity(), self.num_banks);
        if self.bank_use[bank] >= self.cfg.bank_ports as u32 {
            return Ok(());
        }
        let ins = self.prog[head.pos as usize];
        let table_out = self.mode == Mode::Garbler && ins.and;
        if !self.dynamic {
            let need = ins.live as usize + table_out as usize;
            let dram = self.dram.as_ref().unwrap();
            if need > 0 && dram.queued_on(Self::stream(g, S_WRITEBACK)) + need > self.cfg.queues.writeback {
                return Ok(());
            }
        }
        self.bank_use[bank] += 1;
        self.sww.write(out, head.value)?;
        let pos = head.pos as usize;
        self.mark_written(pos);
        if self.dynamic {
            if ins.live {
                self.store_valid[out as usize] = true;
            }
        } else {
            let s = Self::stream(g, S_WRITEBACK);
            let dram = self.dram.as_mut().unwrap();
            if ins.live {
                dram.enqueue(
                    s,
                    WIRE_BYTES as u32,
                    Req::Spill {
                        addr: out as u32,
                        label: head.value,
                    },
                );
            }
            if table_out {
                dram.enqueue(
                    s,
                    GarbledTable::BYTES as u32,
                    Req::TableOut {
                        ordinal: ins.table,
                        table: head.out_table.unwrap_or_default(),
                    },
                );
            }
        }
        let ge = &mut self.ges[g];
        ge.wb.pop_front();
        ge.retired += 1;
        if let Some(t) = &mut self.timeline {
            t[pos].retire = self.now;
        }
        self.progress = true;
        Ok(())
    }

    fn exec_to_wb(&mut self, g: usize) {
        let now = self.now;
        let wb_lat = self.cfg.pipeline.writeback as u64;
        let cap = self.caps[3];
        let ge = &mut self.ges[g];
        let Some(head) = ge.exec.front() else { return };
        if now < head.ready_at || ge.wb.len() >= cap {
            return;
        }
        let mut slot = ge.exec.pop_front().unwrap();
        slot.ready_at = now + wb_lat;
        let pos = slot.pos as usize;
        self.fwd[pos] = true;
        self.values[pos] = slot.value;
        ge.wb.push_back(slot);
        if let Some(t) = &mut self.timeline {
            t[pos].exec_done = now;
        }
        self.progress = true;
    }

    fn issue(&mut self, g: usize) {
        let now = self.now;
        let cap = self.caps[2];
        let Some(mut slot) = self.ges[g].read.front().copied() else {
            return;
        };
        if now < slot.ready_at || self.ges[g].exec.len() >= cap {
            return;
        }
        for op in slot.ops.iter_mut() {
            match *op {
                Operand::Ready(_) => {}
                Operand::Bank(_) => return,
                Operand::Pending(p) => {
                    if !self.fwd[p as usize] {
                        return;
                    }
                    *op = Operand::Ready(self.values[p as usize]);
                }
            }
        }
        let ins = self.prog[slot.pos as usize];
        if self.functional {
            let [Operand::Ready(a), Operand::Ready(b)] = slot.ops else {
                unreachable!()
            };
            slot.value = if !ins.and {
                a ^ b
            } else if self.mode == Mode::Garbler {
                let (out, table) = garble_and(self.delta.unwrap(), a, b, slot.pos as u64);
                slot.out_table = Some(table);
                out
            } else {
                eval_and(a, b, &slot.table, slot.pos as u64)
            };
        }
        slot.ready_at = now + self.latency(ins.and);
        let pos = slot.pos as usize;
        let ge = &mut self.ges[g];
        ge.read.pop_front();
        ge.exec.push_back(slot);
        ge.issued += 1;
        ge.issued_now = true;
        ge.first_issue.get_or_insert(now);
        ge.last_issue = now;
        self.issue_time[pos] = now;
        self.mark_read(pos);
        if let Some(t) = &mut self.timeline {
            t[pos].issue = now;
        }
        self.progress = true;
    }

    fn bank_reads(&mut self, g: usize) -> Result<(), SimError> {
        let now = self.now;
        let ports = self.cfg.bank_ports as u32;
        let cap = self.sww.capacity();
        for i in 0..self.ges[g].read.len() {
            let slot = self.ges[g].read[i];
            if !slot.needs_bank() || now < slot.read_at {
                continue;
            }
            let mut want: [(usize, u32); 2] = [(usize::MAX, 0); 2];
            let addrs: Vec<u32> = slot
                .ops
                .iter()
                .filter_map(|o| match o {
                    Operand::Bank(a) => Some(*a),
                    _ => None,
                })
                .collect();
            let distinct: &[u32] = if addrs.len() == 2 && addrs[0] == addrs[1] {
                &addrs[..1]
            } else {
                &addrs
            };
            for (j, &a) in distinct.iter().enumerate() {
                want[j] = (sww_map(a as u64, cap, self.num_banks).0, 1);
            }
            if distinct.len() == 2 && want[0].0 == want[1].0 {
                want[0].1 = 2;
                want[1].1 = 0;
            }
            let granted = want
                .iter()
                .filter(|w| w.1 > 0)
                .all(|&(b, n)| self.bank_use[b] + n <= ports);
            let s = &mut self.ges[g].read[i];
            if !granted {
                s.ready_at += 1;
                s.read_at += 1;
                s.denied = true;
                continue;
            }
            for &(b, n) in want.iter().filter(|w| w.1 > 0) {
                self.bank_use[b] += n;
            }
            let mut ops = s.ops;
            for op in ops.iter_mut() {
                if let Operand::Bank(a) = *op {
                    let label = self
                        .sww
                        .read(a as u64)?
                        .ok_or_else(|| self.contract(format!("bank read of invalid address {a}")))?;
                    *op = Operand::Ready(label);
                }
            }
            let s = &mut self.ges[g].read[i];
            s.ops = ops;
            s.denied = false;
            self.progress = true;
        }
        Ok(())
    }

    fn front_to_read(&mut self, g: usize) -> Result<(), SimError> {
        let now = self.now;
        if self.preload_left > 0 || self.ges[g].read.len() >= self.caps[1] {
            return Ok(());
        }
        let Some(head) = self.ges[g].front.front().copied() else {
            return Ok(());
        };
        if now < head.ready_at {
            return Ok(());
        }
        let ins = self.prog[head.pos as usize];
        let n_oor = ins.oor.iter().filter(|&&o| o).count();
        // every queue entry this instruction needs must already be present
        if self.dynamic {
            for j in 0..2 {
                if ins.oor[j] && !self.store_valid[ins.src[j] as usize] {
                    return Ok(());
                }
            }
        } else {
            let ge = &self.ges[g];
            if (0..n_oor).any(|i| ge.oor_data.get(ge.oor_popped + i).copied().flatten().is_none()) {
                return Ok(());
            }
            if ins.and && self.mode == Mode::Evaluator && ge.table_popped >= ge.table_arrived {
                return Ok(());
            }
        }
        let mut slot = head;
        for j in 0..2 {
            let a = ins.src[j];
            slot.ops[j] = if ins.oor[j] {
                if self.dynamic {
                    Operand::Ready(self.store[a as usize])
                } else {
                    let ge = &mut self.ges[g];
                    let v = ge.oor_data[ge.oor_popped].take().unwrap();
                    ge.oor_popped += 1;
                    Operand::Ready(v)
                }
            } else if self.sww.is_valid(a as u64) {
                Operand::Bank(a)
            } else if (a as u64) >= self.sww.base() && a > self.num_inputs {
                Operand::Pending(a - self.num_inputs - 1)
            } else {
                return Err(self.contract(format!(
                    "instruction {} reads address {a} which is neither resident nor marked OoR (window [{}, {}))",
                    head.pos,
                    self.sww.base(),
                    self.sww.top()
                )));
            };
        }
        if ins.and && self.mode == Mode::Evaluator && !self.dynamic {
            let ge = &mut self.ges[g];
            let ordinal = self.ge_tables[g][ge.table_popped];
            ge.table_popped += 1;
            slot.table = self.image_tables[ordinal as usize];
        }
        slot.ready_at = now + self.cfg.pipeline.sww_read as u64;
        slot.read_at = now + 1;
        let ge = &mut self.ges[g];
        ge.front.pop_front();
        ge.read.push_back(slot);
        if let Some(t) = &mut self.timeline {
            t[head.pos as usize].read = now;
        }
        self.progress = true;
        Ok(())
    }

    fn fetch(&mut self, g: usize) {
        let now = self.now;
        if self.ges[g].front.len() >= self.caps[0] {
            return;
        }
        let pos = if self.dynamic {
            if self.next_global >= self.prog.len() {
                return;
            }
            let p = self.next_global;
            self.next_global += 1;
            self.assignment[p] = g as u32;
            p as u32
        } else {
            let ge = &mut self.ges[g];
            if ge.fetched >= ge.instr_arrived {
                return;
            }
            let p = ge.positions[ge.fetched];
            ge.fetched += 1;
            p
        };
        self.ges[g]
            .front
            .push_back(Slot::new(pos, now + self.cfg.pipeline.fetch_decode as u64));
        if let Some(t) = &mut self.timeline {
            t[pos as usize].fetch = now;
            t[pos as usize].ge = g as u32;
        }
        self.progress = true;
    }

    // ----- memory side --------------------------------------------------

    fn memory_tick(&mut self) {
        let Some(dram) = self.dram.as_mut() else {
            return;
        };
        let now = self.now;
        let mut due = Vec::new();
        while self.retries.front().is_some_and(|r| r.0 <= now) {
            due.push(self.retries.pop_front().unwrap().1);
        }
        for req in due.into_iter().rev() {
            if let Req::OorWire { ge, .. } = req {
                dram.enqueue_front(Self::stream(ge, S_OOR_WIRE), WIRE_BYTES as u32, req);
            }
        }
        let bytes = &mut self.bytes;
        let mut issued = false;
        let mut done = Vec::new();
        dram.tick(
            now,
            |req, n| {
                issued = true;
                let n = n as u64;
                match req {
                    Req::Preload { .. } => bytes.wires_in += n,
                    Req::Instr { .. } => bytes.instructions += n,
                    Req::Table { .. } | Req::TableOut { .. } => bytes.tables += n,
                    Req::OorAddr { .. } => bytes.oor_addrs += n,
                    Req::OorWire { retry: false, .. } => bytes.wires_in += n,
                    Req::OorWire { retry: true, .. } => bytes.oor_retry += n,
                    Req::Spill { .. } => bytes.wires_out += n,
                }
            },
            &mut done,
        );
        self.progress |= issued || !done.is_empty();
        let delay = self.cfg.dram.retry_delay() as u64;
        for req in done {
            match req {
                Req::Preload { from, to } => {
                    for a in from..=to {
                        let _ = self.sww.write(a as u64, self.store[a as usize]);
                    }
                    self.preload_left -= (to - from + 1) as usize;
                }
                Req::Instr { ge, count } => self.ges[ge].instr_arrived += count,
                Req::Table { ge, count } => self.ges[ge].table_arrived += count,
                Req::OorAddr { ge, count } => self.ges[ge].addr_arrived += count,
                Req::OorWire { ge, seq, addr, .. } => {
                    if self.store_valid[addr as usize] {
                        self.ges[ge].oor_data[seq] = Some(self.store[addr as usize]);
                    } else {
                        self.oor_retries += 1;
                        self.retries.push_back((
                            now + delay,
                            Req::OorWire {
                                ge,
                                seq,
                                addr,
                                retry: true,
                            },
                        ));
                    }
                }
                Req::Spill { addr, label } => {
                    self.store[addr as usize] = label;
                    self.store_valid[addr as usize] = true;
                }
                Req::TableOut { ordinal, table } => self.tables_out[ordinal as usize] = Some(table),
            }
        }
    }

    fn refill(&mut self) {
        let Some(dram) = self.dram.as_mut() else {
            return;
        };
        let q = self.cfg.queues;
        let burst = self.cfg.dram.burst as usize;
        let evaluator = self.mode == Mode::Evaluator;
        for (g, ge) in self.ges.iter_mut().enumerate() {
            let total = ge.positions.len();
            let chunk = (burst / 8).max(1);
            while ge.instr_req < total {
                let n = chunk.min(total - ge.instr_req);
                if ge.instr_req - ge.fetched + n > q.instr {
                    break;
                }
                dram.enqueue(Self::stream(g, S_INSTR), (n * 8) as u32, Req::Instr { ge: g, count: n });
                ge.instr_req += n;
            }
            if evaluator {
                let total = self.ge_tables[g].len();
                let chunk = (burst / GarbledTable::BYTES).max(1);
                while ge.table_req < total {
                    let n = chunk.min(total - ge.table_req);
                    if ge.table_req - ge.table_popped + n > q.table {
                        break;
                    }
                    dram.enqueue(
                        Self::stream(g, S_TABLE),
                        (n * GarbledTable::BYTES) as u32,
                        Req::Table { ge: g, count: n },
                    );
                    ge.table_req += n;
                }
            }
            let oor = self.ge_oor[g];
            let chunk = (burst / 4).max(1);
            while ge.addr_req < oor.len() {
                let n = chunk.min(oor.len() - ge.addr_req);
                if ge.addr_req - ge.wire_req + n > q.oor_addr {
                    break;
                }
                dram.enqueue(Self::stream(g, S_OOR_ADDR), (n * 4) as u32, Req::OorAddr { ge: g, count: n });
                ge.addr_req += n;
            }
            while ge.wire_req < ge.addr_arrived && ge.wire_req - ge.oor_popped < q.oor {
                dram.enqueue(
                    Self::stream(g, S_OOR_WIRE),
                    WIRE_BYTES as u32,
                    Req::OorWire {
                        ge: g,
                        seq: ge.wire_req,
                        addr: oor[ge.wire_req],
                        retry: false,
                    },
                );
                ge.wire_req += 1;
            }
        }
    }

    // ----- bookkeeping --------------------------------------------------

    fn classify(&mut self, g: usize) {
        let now = self.now;
        let exec_cap = self.caps[2];
        let dynamic_done = self.next_global >= self.prog.len();
        let ge = &mut self.ges[g];
        let s = &mut ge.stats;
        if ge.issued_now {
            s.busy += 1;
            return;
        }
        let nothing_left = if self.dynamic {
            dynamic_done && ge.front.is_empty() && ge.read.is_empty()
        } else {
            ge.issued == ge.positions.len()
        };
        if nothing_left {
            s.idle += 1;
            return;
        }
        match ge.read.front() {
            None => s.queue_empty += 1,
            Some(h) if h.denied => s.bank_conflict += 1,
            Some(h) if now < h.ready_at => s.queue_empty += 1,
            Some(h) => {
                let unresolved = h.ops.iter().any(|o| match o {
                    Operand::Pending(p) => !self.fwd[*p as usize],
                    Operand::Bank(_) => true,
                    Operand::Ready(_) => false,
                });
                if unresolved {
                    s.operand_not_ready += 1;
                } else if ge.exec.len() >= exec_cap {
                    s.writeback_backpressure += 1;
                } else {
                    s.queue_empty += 1;
                }
            }
        }
    }

    fn finished(&self) -> bool {
        let ges_done = if self.dynamic {
            self.next_global >= self.prog.len() && self.ges.iter().all(|g| g.in_flight() == 0)
        } else {
            self.ges.iter().all(|g| g.retired == g.positions.len())
        };
        ges_done && self.retries.is_empty() && self.dram.as_ref().is_none_or(|d| d.is_idle())
    }

    fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "window [{}, {}), read prefix {}, written prefix {}, preload left {}",
            self.sww.base(),
            self.sww.top(),
            self.read_prefix,
            self.wb_prefix,
            self.preload_left
        );
        for (g, ge) in self.ges.iter().enumerate() {
            let head = |q: &VecDeque<Slot>| q.front().map(|s| s.pos as i64).unwrap_or(-1);
            let _ = writeln!(
                s,
                "GE {g}: front {} (head {}), read {} (head {}), exec {} (head {}), wb {} (head {}), fetched {}/{}, retired {}, instr arrived {}, tables {}/{}, oor popped {}/{}",
                ge.front.len(),
                head(&ge.front),
                ge.read.len(),
                head(&ge.read),
                ge.exec.len(),
                head(&ge.exec),
                ge.wb.len(),
                head(&ge.wb),
                ge.fetched,
                ge.positions.len(),
                ge.retired,
                ge.instr_arrived,
                ge.table_popped,
                ge.table_arrived,
                ge.oor_popped,
                ge.addr_arrived,
            );
        }
        s
    }

    fn trace_row(&self) -> TraceRow {
        let mut row = TraceRow {
            cycle: self.now,
            window_base: self.sww.base(),
            ..Default::default()
        };
        for ge in &self.ges {
            row.issued += ge.issued_now as u32;
            row.in_flight += ge.in_flight() as u32;
            row.instr_queue += (ge.instr_arrived - ge.fetched) as u32;
            row.table_queue += ge.table_arrived.saturating_sub(ge.table_popped) as u32;
            row.oor_queue += ge.oor_data[ge.oor_popped.min(ge.oor_data.len())..]
                .iter()
                .take_while(|d| d.is_some())
                .count() as u32;
        }
        if let Some(d) = &self.dram {
            row.writeback_buffer = (0..self.ges.len())
                .map(|g| d.queued_on(Self::stream(g, S_WRITEBACK)) as u32)
                .sum();
        }
        row
    }

    fn run(mut self) -> Result<RunResult, SimError> {
        if !self.dynamic {
            let dram = self.dram.as_mut().unwrap();
            let preload = WindowModel::new(self.sww.capacity())
                .expect("validated")
                .preloaded_inputs(self.num_inputs);
            let per = (self.cfg.dram.burst as usize / WIRE_BYTES as usize).max(1) as u32;
            let (lo, hi) = (*preload.start(), *preload.end());
            let mut a = lo;
            while a <= hi {
                let to = (a + per - 1).min(hi);
                dram.enqueue(0, (to - a + 1) * WIRE_BYTES as u32, Req::Preload { from: a, to });
                self.preload_left += (to - a + 1) as usize;
                a = to + 1;
            }
            self.refill();
        }
        while !self.finished() {
            self.now += 1;
            self.progress = false;
            self.memory_tick();
            self.bank_use.iter_mut().for_each(|b| *b = 0);
            for g in 0..self.ges.len() {
                self.ges[g].issued_now = false;
                self.retire(g)?;
            }
            for g in 0..self.ges.len() {
                self.exec_to_wb(g);
            }
            for g in 0..self.ges.len() {
                self.issue(g);
            }
            for g in 0..self.ges.len() {
                self.bank_reads(g)?;
                self.front_to_read(g)?;
                self.fetch(g);
            }
            self.refill();
            for g in 0..self.ges.len() {
                self.classify(g);
            }
            if self.trace.is_some() {
                let row = self.trace_row();
                self.trace.as_mut().unwrap().push(row);
            }
            if self.progress {
                self.last_progress = self.now;
            } else if self.now - self.last_progress > self.cfg.deadlock_cycles {
                return Err(SimError::Deadlock {
                    cycle: self.now,
                    dump: self.dump(),
                });
            }
        }
        Ok(self.into_result())
    }

    fn into_result(self) -> RunResult {
        let total = self.now;
        let len = self.prog.len() as u64;
        let active: Vec<&Ge> = self.ges.iter().filter(|g| g.first_issue.is_some()).collect();
        let steady = match (
            active.iter().map(|g| g.first_issue.unwrap()).max(),
            active.iter().map(|g| g.last_issue).min(),
        ) {
            (Some(lo), Some(hi)) if hi > lo => {
                let n = self.issue_time.iter().filter(|&&t| t >= lo && t <= hi).count();
                n as f64 / (hi - lo + 1) as f64
            }
            _ if total > 0 => len as f64 / total as f64,
            _ => 0.0,
        };
        let output_labels = self.outputs.iter().map(|&a| self.store[a as usize]).collect();
        RunResult {
            total_cycles: total,
            ges: self.ges.iter().map(|g| g.stats.clone()).collect(),
            instructions: len,
            steady_gates_per_cycle: steady,
            bytes: self.bytes,
            oor_retries: self.oor_retries,
            window_advances: self.window_advances,
            output_labels,
            tables: self.tables_out.iter().map(|t| t.unwrap_or_default()).collect(),
            timeline: self.timeline,
            trace: self.trace,
            assignment: self.assignment,
        }
    }
}

fn decode_streams(streams: &StreamSet) -> Result<Vec<Instr>, SimError> {
    let mut prog: Vec<Option<Instr>> = vec![None; streams.program_len];
    for (g, s) in streams.ges.iter().enumerate() {
        let mut oor = s.oor.iter();
        let mut tables = s.tables.iter();
        for (&pos, ins) in s.positions.iter().zip(&s.instructions) {
            let and = match ins.op {
                Opcode::And => true,
                Opcode::Xor => false,
                Opcode::Nop => {
                    return Err(SimError::Stream(format!("GE {g}: NOP at position {pos}")));
                }
            };
            let mut src = ins.operands();
            let mut is_oor = [false; 2];
            for j in 0..2 {
                if src[j] == 0 {
                    src[j] = *oor
                        .next()
                        .ok_or_else(|| SimError::Stream(format!("GE {g}: OoR stream underflow at {pos}")))?;
                    is_oor[j] = true;
                }
            }
            let table = if and {
                *tables
                    .next()
                    .ok_or_else(|| SimError::Stream(format!("GE {g}: table stream underflow at {pos}")))?
            } else {
                0
            };
            let slot = prog
                .get_mut(pos as usize)
                .ok_or_else(|| SimError::Stream(format!("GE {g}: position {pos} out of range")))?;
            if slot.is_some() {
                return Err(SimError::Stream(format!("position {pos} assigned twice")));
            }
            *slot = Some(Instr {
                and,
                src,
                oor: is_oor,
                live: ins.live,
                table,
            });
        }
        if oor.next().is_some() || tables.next().is_some() {
            return Err(SimError::Stream(format!("GE {g}: unconsumed OoR or table entries")));
        }
    }
    prog.into_iter()
        .enumerate()
        .map(|(k, i)| i.ok_or_else(|| SimError::Stream(format!("position {k} not assigned to any GE"))))
        .collect()
}

pub(crate) fn run_streams(streams: &StreamSet, image: &DramImage, cfg: &SimConfig) -> Result<RunResult, SimError> {
    cfg.validate()?;
    if cfg.num_ges != streams.num_ges() {
        return Err(SimError::Config(format!(
            "configuration has {} GEs but streams were scheduled for {}",
            cfg.num_ges,
            streams.num_ges()
        )));
    }
    if cfg.capacity() != streams.window_capacity {
        return Err(SimError::Config(format!(
            "SWW holds {} wires but streams were compiled for {}",
            cfg.capacity(),
            streams.window_capacity
        )));
    }
    image.check(streams, cfg.mode)?;
    let prog = decode_streams(streams)?;
    let window = streams.window();
    let mut e = Engine::base(cfg, prog, streams.num_inputs, streams.outputs.clone(), window);
    e.functional = true;
    for (i, l) in image.input_labels.iter().enumerate() {
        e.store[i + 1] = *l;
        e.store_valid[i + 1] = true;
    }
    e.delta = match image.delta {
        Some(l) => Some(GlobalDelta::from_label(l).ok_or_else(|| SimError::Image("delta must have its lsb set".into()))?),
        None => None,
    };
    e.image_tables = &image.tables;
    e.ge_tables = streams.ges.iter().map(|s| s.tables.as_slice()).collect();
    e.ge_oor = streams.ges.iter().map(|s| s.oor.as_slice()).collect();
    for (g, s) in streams.ges.iter().enumerate() {
        e.ges[g].positions = s.positions.clone();
        e.ges[g].oor_data = vec![None; s.oor.len()];
    }
    if cfg.mode == Mode::Garbler {
        e.tables_out = vec![None; streams.num_and];
    }
    e.dram = Some(DramModel::new(&cfg.dram, 1 + STREAMS_PER_GE * cfg.num_ges));
    e.run()
}

/// Scheduling run: ideal memory, instructions handed out in program order
/// to whichever GE can take one. Returns the GE of every position.
pub fn schedule_dynamic(p: &Program, cfg: &SimConfig) -> Result<Vec<u32>, SimError> {
    let window = WindowModel::new(cfg.capacity()).map_err(|e| SimError::Config(e.to_string()))?;
    if p.meta.window_capacity.is_some_and(|c| c != window.capacity()) {
        return Err(SimError::Config("program was lowered for a different window".into()));
    }
    if !p.is_renamed() {
        return Err(SimError::Config("program must be renamed".into()));
    }
    let resolved = p.resolved_operands().map_err(|e| SimError::Stream(e.to_string()))?;
    let prog = p
        .instructions
        .iter()
        .zip(resolved)
        .enumerate()
        .map(|(k, (ins, src))| {
            if ins.op == Opcode::Nop {
                return Err(SimError::Stream(format!("NOP at position {k}")));
            }
            Ok(Instr {
                and: ins.op == Opcode::And,
                src,
                oor: [ins.in0 == 0, ins.in1 == 0],
                live: ins.live,
                table: 0,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut e = Engine::base(cfg, prog, p.num_inputs, p.outputs.clone(), window);
    e.dynamic = true;
    for a in 1..=p.num_inputs as usize {
        e.store_valid[a] = true;
    }
    for a in window.preloaded_inputs(p.num_inputs) {
        e.sww.write(a as u64, Label::ZERO)?;
    }
    Ok(e.run()?.assignment)
}
