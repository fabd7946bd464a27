use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Garbler,
    Evaluator,
}

impl FromStr for Mode {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "garbler" => Ok(Mode::Garbler),
            "evaluator" => Ok(Mode::Evaluator),
            _ => Err(SimError::Config(format!("unknown mode `{s}`"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Garbler => "garbler",
            Mode::Evaluator => "evaluator",
        })
    }
}

/// Stage latencies in GE cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub and_garbler: u32,
    pub and_evaluator: u32,
    pub xor: u32,
    pub fetch_decode: u32,
    pub sww_read: u32,
    pub writeback: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            and_garbler: 21,
            and_evaluator: 18,
            xor: 1,
            fetch_decode: 2,
            sww_read: 3,
            writeback: 2,
        }
    }
}

impl PipelineConfig {
    /// Every stage completes in the cycle it is entered.
    pub fn zero_latency() -> Self {
        PipelineConfig {
            and_garbler: 0,
            and_evaluator: 0,
            xor: 0,
            fetch_decode: 0,
            sww_read: 0,
            writeback: 0,
        }
    }
}

/// Per-GE queue and buffer depths, in entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueDepths {
    pub instr: usize,
    pub table: usize,
    pub oor: usize,
    pub oor_addr: usize,
    pub writeback: usize,
}

impl Default for QueueDepths {
    fn default() -> Self {
        QueueDepths {
            instr: 1024,
            table: 256,
            oor: 256,
            oor_addr: 64,
            writeback: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DramConfig {
    /// Bytes per GE cycle; `None` is unlimited.
    pub bandwidth: Option<f64>,
    pub latency: u32,
    pub burst: u32,
    /// Delay before re-reading an OoR wire that was not yet written.
    pub oor_retry: Option<u32>,
}

impl DramConfig {
    pub fn ddr4() -> Self {
        DramConfig {
            bandwidth: Some(35.2),
            latency: 100,
            burst: 64,
            oor_retry: None,
        }
    }

    pub fn hbm2() -> Self {
        DramConfig {
            bandwidth: Some(512.0),
            ..Self::ddr4()
        }
    }

    /// Unlimited bandwidth, default latency.
    pub fn infinite() -> Self {
        DramConfig {
            bandwidth: None,
            ..Self::ddr4()
        }
    }

    /// Unlimited bandwidth and no latency.
    pub fn ideal() -> Self {
        DramConfig {
            bandwidth: None,
            latency: 0,
            ..Self::ddr4()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "ddr4" => Some(Self::ddr4()),
            "hbm2" => Some(Self::hbm2()),
            "infinite" => Some(Self::infinite()),
            "ideal" => Some(Self::ideal()),
            _ => None,
        }
    }

    pub fn retry_delay(&self) -> u32 {
        self.oor_retry.unwrap_or(self.latency)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: Mode,
    pub num_ges: usize,
    pub sww_bytes: u64,
    pub banks_per_ge: usize,
    pub bank_ports: usize,
    pub queues: QueueDepths,
    pub dram: DramConfig,
    pub pipeline: PipelineConfig,
    /// Cycles without any progress before the run is declared deadlocked.
    pub deadlock_cycles: u64,
    /// Record per-instruction stage times.
    pub timeline: bool,
    /// Record a per-cycle occupancy trace.
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mode: Mode::Evaluator,
            num_ges: 16,
            sww_bytes: 2 << 20,
            banks_per_ge: 4,
            bank_ports: 2,
            queues: QueueDepths::default(),
            dram: DramConfig::ddr4(),
            pipeline: PipelineConfig::default(),
            deadlock_cycles: 100_000,
            timeline: false,
            trace: false,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, SimError> {
    v.parse()
        .map_err(|_| SimError::Config(format!("`{key}`: cannot parse `{v}`")))
}

impl SimConfig {
    pub fn capacity(&self) -> u64 {
        self.sww_bytes / 16
    }

    pub fn num_banks(&self) -> usize {
        self.num_ges * self.banks_per_ge
    }

    pub fn and_latency(&self) -> u32 {
        match self.mode {
            Mode::Garbler => self.pipeline.and_garbler,
            Mode::Evaluator => self.pipeline.and_evaluator,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let err = |m: String| Err(SimError::Config(m));
        let n = self.capacity();
        if self.sww_bytes % 16 != 0 || n < 2 || !n.is_power_of_two() {
            return err(format!("SWW of {} bytes is not a power-of-two number of labels", self.sww_bytes));
        }
        if self.num_ges == 0 || self.banks_per_ge == 0 || self.bank_ports == 0 {
            return err("ges, banks_per_ge and bank_ports must be positive".into());
        }
        if n % self.num_banks() as u64 != 0 {
            return err(format!("{} banks do not divide {n} slots", self.num_banks()));
        }
        let q = &self.queues;
        if q.instr == 0 || q.table == 0 || q.oor == 0 || q.oor_addr == 0 || q.writeback < 2 {
            return err("queue depths must be positive (writeback at least 2)".into());
        }
        if self.dram.burst < 32 {
            return err("DRAM burst must hold at least one table (32 bytes)".into());
        }
        if let Some(bw) = self.dram.bandwidth {
            if !(bw > 0.0 && bw.is_finite()) {
                return err(format!("bandwidth {bw} must be positive"));
            }
        }
        Ok(())
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), SimError> {
        let p = &mut self.pipeline;
        let q = &mut self.queues;
        match key {
            "mode" => self.mode = v.parse()?,
            "ges" | "num_ges" => self.num_ges = num(key, v)?,
            "sww_bytes" => self.sww_bytes = num(key, v)?,
            "banks_per_ge" => self.banks_per_ge = num(key, v)?,
            "bank_ports" => self.bank_ports = num(key, v)?,
            "dram" => {
                self.dram = DramConfig::preset(v)
                    .ok_or_else(|| SimError::Config(format!("unknown DRAM preset `{v}`")))?
            }
            "dram.bandwidth" => {
                self.dram.bandwidth = match v {
                    "inf" | "infinite" => None,
                    _ => Some(num(key, v)?),
                }
            }
            "dram.latency" => self.dram.latency = num(key, v)?,
            "dram.burst" => self.dram.burst = num(key, v)?,
            "dram.oor_retry" => self.dram.oor_retry = Some(num(key, v)?),
            "queue.instr" => q.instr = num(key, v)?,
            "queue.table" => q.table = num(key, v)?,
            "queue.oor" => q.oor = num(key, v)?,
            "queue.oor_addr" => q.oor_addr = num(key, v)?,
            "queue.writeback" => q.writeback = num(key, v)?,
            "pipe.and_garbler" => p.and_garbler = num(key, v)?,
            "pipe.and_evaluator" => p.and_evaluator = num(key, v)?,
            "pipe.xor" => p.xor = num(key, v)?,
            "pipe.fetch_decode" => p.fetch_decode = num(key, v)?,
            "pipe.sww_read" => p.sww_read = num(key, v)?,
            "pipe.writeback" => p.writeback = num(key, v)?,
            "pipe" if v == "zero" => *p = PipelineConfig::zero_latency(),
            "deadlock_cycles" => self.deadlock_cycles = num(key, v)?,
            "timeline" => self.timeline = num(key, v)?,
            "trace" => self.trace = num(key, v)?,
            _ => return Err(SimError::Config(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    /// Parses `key=value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut cfg = SimConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SimError::Config(format!("line {}: expected key=value", i + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let q = &self.queues;
        let p = &self.pipeline;
        let bw = self.dram.bandwidth.map_or("inf".to_string(), |b| b.to_string());
        let _ = writeln!(s, "mode={}", self.mode);
        let _ = writeln!(s, "ges={}", self.num_ges);
        let _ = writeln!(s, "sww_bytes={}", self.sww_bytes);
        let _ = writeln!(s, "banks_per_ge={}", self.banks_per_ge);
        let _ = writeln!(s, "bank_ports={}", self.bank_ports);
        let _ = writeln!(s, "dram.bandwidth={bw}");
        let _ = writeln!(s, "dram.latency={}", self.dram.latency);
        let _ = writeln!(s, "dram.burst={}", self.dram.burst);
        if let Some(r) = self.dram.oor_retry {
            let _ = writeln!(s, "dram.oor_retry={r}");
        }
        for (k, v) in [
            ("queue.instr", q.instr),
            ("queue.table", q.table),
            ("queue.oor", q.oor),
            ("queue.oor_addr", q.oor_addr),
            ("queue.writeback", q.writeback),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        for (k, v) in [
            ("pipe.and_garbler", p.and_garbler),
            ("pipe.and_evaluator", p.and_evaluator),
            ("pipe.xor", p.xor),
            ("pipe.fetch_decode", p.fetch_decode),
            ("pipe.sww_read", p.sww_read),
            ("pipe.writeback", p.writeback),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "deadlock_cycles={}", self.deadlock_cycles);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        assert_eq!(DramConfig::ddr4().bandwidth, Some(35.2));
        assert_eq!(DramConfig::hbm2().bandwidth, Some(512.0));
        assert_eq!(DramConfig::ideal().latency, 0);
        assert_eq!(DramConfig::ddr4().retry_delay(), 100);
    }

    #[test]
    fn text_round_trip() {
        let cfg = SimConfig::parse("mode=garbler\nges=4 # four engines\nsww_bytes=4096\ndram=hbm2\npipe.xor=2\n").unwrap();
        assert_eq!(cfg.mode, Mode::Garbler);
        assert_eq!(cfg.num_ges, 4);
        assert_eq!(cfg.dram.bandwidth, Some(512.0));
        assert_eq!(cfg.and_latency(), 21);
        assert_eq!(SimConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(SimConfig::parse("sww_bytes=3000").is_err());
        assert!(SimConfig::parse("ges=3\nsww_bytes=1024").is_err());
        assert!(SimConfig::parse("frobnicate=1").is_err());
        assert!(SimConfig::default().validate().is_ok());
    }
}
