mod artifacts;
mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "gcaccel", version, about = "Garbled-circuit accelerator toolchain: compile, garble, simulate, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Run settings. Flags override values read from `--manifest`.
#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Manifest file with `key = value` lines.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Bristol circuit file.
    #[arg(long, conflicts_with = "gen")]
    circuit: Option<PathBuf>,
    /// Generated circuit, e.g. `adder:8` or `matmul:4:8`.
    #[arg(long)]
    gen: Option<String>,
    /// Comma-separated pass list, e.g. `full,rename,esw,oor,sched:16`.
    #[arg(long)]
    passes: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Input bits as a 0/1 string, or `random`.
    #[arg(long)]
    inputs: Option<String>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// `garbler` or `evaluator`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    ges: Option<String>,
    #[arg(long)]
    sww_bytes: Option<String>,
    /// DRAM preset: ddr4, hbm2, infinite or ideal.
    #[arg(long)]
    dram: Option<String>,
    /// Any other manifest setting as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn manifest(&self) -> Result<Manifest> {
        let mut m = match &self.manifest {
            Some(p) => Manifest::load(p)?,
            None => Manifest::default(),
        };
        let path = |p: &PathBuf| p.display().to_string();
        let flags = [
            ("circuit", self.circuit.as_ref().map(path)),
            ("gen", self.gen.clone()),
            ("passes", self.passes.clone()),
            ("seed", self.seed.clone()),
            ("inputs", self.inputs.clone()),
            ("out", self.out.as_ref().map(path)),
            ("mode", self.mode.clone()),
            ("ges", self.ges.clone()),
            ("sww_bytes", self.sww_bytes.clone()),
            ("dram", self.dram.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                m.set(k, &v).with_context(|| format!("--{}", k.replace('_', "-")))?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--set `{kv}` is not key=value"))?;
            m.set(k, v).with_context(|| format!("--set {kv}"))?;
        }
        Ok(m)
    }

    fn resolved(&self) -> Result<Manifest> {
        let mut m = self.manifest()?;
        m.resolve()?;
        Ok(m)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated test circuit in Bristol format.
    Gen {
        /// Generator spec, e.g. `chain:100`, `parallel:and:64`, `matmul:4:8`.
        spec: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Compile a circuit to per-GE instruction, schedule and OoR streams.
    Compile(RunArgs),
    /// Compile, then garble with the manifest seed.
    Garble(RunArgs),
    /// Compile, garble, simulate and verify. Exits 0 only if the simulated
    /// result matches the software garbler.
    Run(RunArgs),
    /// Tabulate finished runs as CSV.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the cartesian product of `--vary` axes over a base manifest.
    Sweep {
        #[command(flatten)]
        base: RunArgs,
        /// `key=v1,v2,...` (for `passes`, separate lists with `;`); repeatable.
        #[arg(long, required = true)]
        vary: Vec<String>,
        /// Concurrent runs; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { spec, out } => commands::cmd_gen(&spec, out.as_deref())?,
        Command::Compile(args) => {
            let m = args.resolved()?;
            let c = commands::cmd_compile(&m)?;
            println!(
                "compiled {} instructions for {} GEs into {}",
                c.program.len(),
                c.streams.num_ges(),
                m.out.display()
            );
        }
        Command::Garble(args) => {
            let m = args.resolved()?;
            let (c, _) = commands::cmd_garble(&m)?;
            println!("garbled {} AND gates into {}", c.streams.num_and, m.out.display());
        }
        Command::Run(args) => {
            let m = args.resolved()?;
            let s = commands::cmd_run(&m)?;
            let r = &s.report;
            println!(
                "{} cycles, {:.3} gates/cycle ({:.3} steady), digest {}",
                r.total_cycles, r.gates_per_cycle, r.steady_gates_per_cycle, r.digest
            );
            if let Some(msg) = &s.mismatch {
                eprintln!("verification FAILED: {msg}");
                return Ok(ExitCode::FAILURE);
            }
            println!("verification passed");
        }
        Command::Report { runs, out } => {
            let csv = commands::cmd_report(&runs)?;
            match out {
                Some(p) => std::fs::write(&p, csv).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{csv}"),
            }
        }
        Command::Sweep { base, vary, jobs } => {
            let m = base.manifest()?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let r = commands::cmd_sweep(&m, &vary, jobs)?;
            println!("{} runs in {}", r.dirs.len(), m.out.display());
            if !r.failures.is_empty() {
                for f in &r.failures {
                    eprintln!("FAILED {f}");
                }
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
