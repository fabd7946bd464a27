use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, ensure, Context, Result};
use gcaccel_core::compiler::{compile, format_passes, traffic_report, Compiled, StreamSet, TrafficReport};
use gcaccel_core::isa::Program;
use gcaccel_core::netlist::{gen_test_circuit, write_bristol, GenKind};
use gcaccel_core::simulator::{simulate, trace_csv, Reference, SimReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artifacts::{read_streams, write_compiled, write_garbled};
use crate::manifest::Manifest;

/// Everything `report` needs about a finished run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub circuit: String,
    pub passes: String,
    pub seed: u64,
    pub verified: bool,
    pub mismatch: Option<String>,
    pub traffic: TrafficReport,
    pub report: SimReport,
}

pub fn cmd_gen(spec: &str, out: Option<&Path>) -> Result<()> {
    let kind: GenKind = spec.parse()?;
    let text = write_bristol(&gen_test_circuit(&kind)?)?;
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub struct CompileOutput {
    pub program: Program,
    pub streams: StreamSet,
    pub traffic: TrafficReport,
}

pub fn cmd_compile(m: &Manifest) -> Result<CompileOutput> {
    let c = m.circuit()?.load()?;
    let Compiled { program, streams } = compile(&c, &m.passes, &m.sim)?;
    let streams = streams.context("pass list produced no GE streams")?;
    let traffic = traffic_report(&program, &streams.window(), &streams);
    write_compiled(&m.out, &program, &streams, &traffic)?;
    fs::write(m.out.join("manifest.txt"), m.to_text())?;
    Ok(CompileOutput {
        program,
        streams,
        traffic,
    })
}

pub fn input_bits(m: &Manifest, p: &Program) -> Result<Vec<bool>> {
    let n = p.num_circuit_inputs() as usize;
    match &m.inputs {
        Some(bits) => {
            ensure!(bits.len() == n, "circuit has {n} inputs but {} bits were given", bits.len());
            Ok(bits.clone())
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
            Ok((0..n).map(|_| rng.gen()).collect())
        }
    }
}

pub fn cmd_garble(m: &Manifest) -> Result<(CompileOutput, Reference)> {
    let compiled = cmd_compile(m)?;
    let bits = input_bits(m, &compiled.program)?;
    let reference = Reference::new(&compiled.program, m.seed as u128, &bits)?;
    write_garbled(&m.out, &reference)?;
    Ok((compiled, reference))
}

/// Compiles, garbles, simulates from the on-disk streams and checks the
/// result against the software garbler.
pub fn cmd_run(m: &Manifest) -> Result<RunSummary> {
    let (compiled, reference) = cmd_garble(m)?;
    let streams = read_streams(&m.out)?;
    ensure!(streams == compiled.streams, "stream files do not reproduce the compiled streams");
    let out = simulate(&streams, &reference.image(m.sim.mode), &m.sim)?;
    let verdict = reference.verify(&out);
    let write = |name: &str, data: String| fs::write(m.out.join(name), data).with_context(|| format!("writing {name}"));
    write("report.json", serde_json::to_string_pretty(&out.report)? + "\n")?;
    write("stalls.csv", out.report.stall_csv())?;
    if let Some(t) = &out.trace {
        write("trace.csv", trace_csv(t))?;
    }
    if let Some(t) = &out.timeline {
        write("timeline.json", serde_json::to_string(t)? + "\n")?;
    }
    let summary = RunSummary {
        circuit: m.circuit()?.to_string(),
        passes: format_passes(&m.passes),
        seed: m.seed,
        verified: verdict.is_ok(),
        mismatch: verdict.err().map(|e| e.to_string()),
        traffic: compiled.traffic,
        report: out.report,
    };
    write("summary.json", serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

pub const REPORT_COLUMNS: &str = "run,circuit,passes,mode,ges,sww_bytes,total_cycles,gates_per_cycle,steady_gates_per_cycle,\
live_wires,oor_wires,total_wires,bytes_wires_in,bytes_wires_out,bytes_tables,bytes_instructions,bytes_oor_addrs,\
bytes_oor_retry,window_advances,verified";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn load_summary(dir: &Path) -> Result<RunSummary> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// One CSV row per run directory.
pub fn cmd_report(dirs: &[PathBuf]) -> Result<String> {
    ensure!(!dirs.is_empty(), "no run directories given");
    let mut s = String::from(REPORT_COLUMNS);
    s.push('\n');
    for d in dirs {
        let r = load_summary(d)?;
        let rep = &r.report;
        let b = &rep.bytes;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:.4},{:.4},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&d.display().to_string()),
            csv_field(&r.circuit),
            csv_field(&r.passes),
            rep.mode,
            rep.num_ges,
            rep.sww_bytes,
            rep.total_cycles,
            rep.gates_per_cycle,
            rep.steady_gates_per_cycle,
            r.traffic.live_wires,
            r.traffic.oor_wires,
            r.traffic.total_wires,
            b.wires_in,
            b.wires_out,
            b.tables,
            b.instructions,
            b.oor_addrs,
            b.oor_retry,
            rep.window_advances,
            r.verified
        );
    }
    Ok(s)
}

/// Expands `key=v1,v2,...` axes into the cartesian product of manifests.
/// Pass lists contain commas, so `passes` values are separated by `;`.
pub fn expand_sweep(base: &Manifest, axes: &[String]) -> Result<Vec<(String, Manifest)>> {
    let mut runs = vec![(String::new(), base.clone())];
    for axis in axes {
        let Some((key, values)) = axis.split_once('=') else {
            bail!("sweep axis `{axis}` is not key=v1,v2,...");
        };
        let key = key.trim();
        let sep = if key == "passes" { ';' } else { ',' };
        let mut next = Vec::new();
        for (name, m) in &runs {
            for v in values.split(sep) {
                let mut m = m.clone();
                m.set(key, v)?;
                let label = format!("{key}={v}");
                next.push((if name.is_empty() { label } else { format!("{name} {label}") }, m));
            }
        }
        runs = next;
    }
    Ok(runs)
}

pub struct SweepResult {
    pub dirs: Vec<PathBuf>,
    pub failures: Vec<String>,
}

/// Runs every point of the sweep in `out/run-NNN`, `jobs` at a time, and
/// writes `out/summary.csv`.
pub fn cmd_sweep(base: &Manifest, axes: &[String], jobs: usize) -> Result<SweepResult> {
    let runs = expand_sweep(base, axes)?;
    fs::create_dir_all(&base.out)?;
    let mut index = String::from("run,point\n");
    let mut prepared = Vec::with_capacity(runs.len());
    for (i, (name, mut m)) in runs.into_iter().enumerate() {
        m.out = base.out.join(format!("run-{i:03}"));
        m.resolve().with_context(|| format!("sweep point `{name}`"))?;
        let _ = writeln!(index, "run-{i:03},{}", csv_field(&name));
        prepared.push((name, m));
    }
    fs::write(base.out.join("points.csv"), index)?;

    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, prepared.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((name, m)) = prepared.get(i) else { break };
                let msg = match cmd_run(m) {
                    Ok(r) if r.verified => None,
                    Ok(r) => Some(r.mismatch.unwrap_or_default()),
                    Err(e) => Some(format!("{e:#}")),
                };
                if let Some(msg) = msg {
                    failures.lock().unwrap().push((i, format!("{name}: {msg}")));
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    failures.sort();
    let dirs: Vec<PathBuf> = prepared.iter().map(|(_, m)| m.out.clone()).collect();
    let ok: Vec<PathBuf> = dirs.iter().filter(|d| d.join("summary.json").is_file()).cloned().collect();
    if !ok.is_empty() {
        fs::write(base.out.join("summary.csv"), cmd_report(&ok)?)?;
    }
    Ok(SweepResult {
        dirs,
        failures: failures.into_iter().map(|f| f.1).collect(),
    })
}
