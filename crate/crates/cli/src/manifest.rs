//! Run manifests: `key = value` lines, `#` comments.
//!
//! Recognized keys are `circuit` (Bristol file), `gen` (generator spec),
//! `passes`, `seed`, `inputs`, `out`, plus every simulator configuration
//! key (`mode`, `ges`, `sww_bytes`, `dram`, `queue.*`, `pipe.*`, ...).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use gcaccel_core::compiler::{format_passes, parse_passes, Pass};
use gcaccel_core::netlist::{gen_test_circuit, parse_bristol, Circuit, GenKind};
use gcaccel_core::simulator::SimConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitSource {
    File(PathBuf),
    Gen(GenKind),
}

impl CircuitSource {
    pub fn load(&self) -> Result<Circuit> {
        match self {
            CircuitSource::File(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                parse_bristol(&text).with_context(|| format!("parsing {}", p.display()))
            }
            CircuitSource::Gen(k) => Ok(gen_test_circuit(k)?),
        }
    }
}

impl std::fmt::Display for CircuitSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CircuitSource::File(p) => write!(f, "{}", p.display()),
            CircuitSource::Gen(k) => write!(f, "gen:{k}"),
        }
    }
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub circuit: Option<CircuitSource>,
    pub passes: Vec<Pass>,
    pub sim: SimConfig,
    /// Seeds both the label PRF and the random input bits.
    pub seed: u64,
    /// Explicit input bits; random from `seed` when absent.
    pub inputs: Option<Vec<bool>>,
    pub out: PathBuf,
    ges_set: bool,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            circuit: None,
            passes: parse_passes("full,rename,esw,oor").expect("valid default"),
            sim: SimConfig::default(),
            seed: 1,
            inputs: None,
            out: PathBuf::from("out"),
            ges_set: false,
        }
    }
}

fn parse_seed(v: &str) -> Result<u64> {
    let r = match v.strip_prefix("0x") {
        Some(h) => u64::from_str_radix(h, 16),
        None => v.parse(),
    };
    r.map_err(|_| anyhow!("bad seed `{v}`"))
}

impl Manifest {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "circuit" => self.circuit = Some(CircuitSource::File(PathBuf::from(value))),
            "gen" => self.circuit = Some(CircuitSource::Gen(value.parse()?)),
            "passes" => self.passes = parse_passes(value)?,
            "seed" => self.seed = parse_seed(value)?,
            "inputs" => {
                self.inputs = match value {
                    "random" => None,
                    bits => Some(
                        bits.chars()
                            .map(|c| match c {
                                '0' => Ok(false),
                                '1' => Ok(true),
                                _ => Err(anyhow!("inputs must be a 0/1 string or `random`")),
                            })
                            .collect::<Result<_>>()?,
                    ),
                }
            }
            "out" => self.out = PathBuf::from(value),
            k => {
                self.sim.set(k, value)?;
                if k == "ges" || k == "num_ges" {
                    self.ges_set = true;
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", n + 1))?;
            m.set(k, v).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in manifest {}", path.display()))
    }

    /// Appends `sched:<ges>` when the pass list has no scheduling step, and
    /// takes the GE count from `sched:G` when `ges` was not given.
    pub fn resolve(&mut self) -> Result<()> {
        match self.passes.iter().find_map(|p| match p {
            Pass::Sched(g) => Some(*g),
            _ => None,
        }) {
            None => self.passes.push(Pass::Sched(self.sim.num_ges)),
            Some(g) if !self.ges_set => self.sim.num_ges = g,
            Some(g) if g != self.sim.num_ges => {
                bail!("pass list schedules {g} GEs but ges = {}", self.sim.num_ges)
            }
            Some(_) => {}
        }
        self.ges_set = true;
        self.sim.validate()?;
        Ok(())
    }

    pub fn circuit(&self) -> Result<&CircuitSource> {
        self.circuit
            .as_ref()
            .ok_or_else(|| anyhow!("no circuit: set `circuit` or `gen`"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match &self.circuit {
            Some(CircuitSource::File(p)) => {
                let _ = writeln!(s, "circuit = {}", p.display());
            }
            Some(CircuitSource::Gen(k)) => {
                let _ = writeln!(s, "gen = {k}");
            }
            None => {}
        }
        let _ = writeln!(s, "passes = {}", format_passes(&self.passes));
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(bits) = &self.inputs {
            let bits: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let _ = writeln!(s, "inputs = {bits}");
        }
        let _ = writeln!(s, "out = {}", self.out.display());
        s.push_str(&self.sim.to_text());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_resolve() {
        let mut m = Manifest::parse("gen = adder:8 # small\npasses = full,rename,esw,oor\nges = 4\nseed = 0x10\n").unwrap();
        m.resolve().unwrap();
        assert_eq!(m.seed, 16);
        assert_eq!(m.passes.last(), Some(&Pass::Sched(4)));
        assert_eq!(m.sim.num_ges, 4);
    }

    #[test]
    fn sched_sets_ges() {
        let mut m = Manifest::parse("passes = full,rename,esw,oor,sched:2").unwrap();
        m.resolve().unwrap();
        assert_eq!(m.sim.num_ges, 2);
    }

    #[test]
    fn conflicting_ges() {
        let mut m = Manifest::parse("passes = full,rename,esw,oor,sched:3\nges = 4").unwrap();
        assert!(m.resolve().is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut m = Manifest::parse("gen = matmul:2:4\nmode = garbler\ndram = hbm2\ninputs = 0110\n").unwrap();
        m.resolve().unwrap();
        let mut back = Manifest::parse(&m.to_text()).unwrap();
        back.resolve().unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn unknown_key() {
        assert!(Manifest::parse("colour = blue").is_err());
        assert!(Manifest::parse("passes = full,reshuffle").is_err());
    }
}
