//! On-disk compile and garble artifacts.
//!
//! Compile output (all integers little-endian):
//!
//! * `instructions.bin`: 64-bit instruction words, GE 0's stream first
//! * `schedule.bin`: `u32` GE count, then per GE a `u32` length followed by
//!   the program position of each instruction. Positions fix each GE's
//!   garbled-table order and output addresses.
//! * `oor.bin`: `u32` OoR wire addresses, GE 0's queue first
//! * `program.meta`: `key=value` program metadata
//! * `traffic.json`: static traffic accounting

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use gcaccel_core::compiler::{GeStream, StreamSet, TrafficReport};
use gcaccel_core::gcrypto::{labels_to_bytes, tables_to_bytes};
use gcaccel_core::isa::{address_width, decode_stream, encode_stream, Opcode, Program};
use gcaccel_core::simulator::Reference;

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn split_list(v: &str) -> Result<Vec<u32>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|x| x.parse().map_err(|_| anyhow!("bad list entry `{x}`")))
        .collect()
}

fn words_u32(bytes: &[u8], what: &str) -> Result<Vec<u32>> {
    if bytes.len() % 4 != 0 {
        bail!("{what}: {} bytes is not a whole number of u32 words", bytes.len());
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn program_meta(p: &Program, streams: &StreamSet) -> String {
    let mut s = String::new();
    let width = address_width(p.max_address() as u64 + 1);
    let opt = |o: Option<String>| o.unwrap_or_else(|| "none".into());
    let _ = writeln!(s, "num_inputs={}", p.num_inputs);
    let _ = writeln!(s, "address_width={width}");
    let _ = writeln!(s, "passes={}", p.meta.passes.join(","));
    let _ = writeln!(s, "segment_size={}", opt(p.meta.segment_size.map(|n| n.to_string())));
    let _ = writeln!(s, "window_capacity={}", streams.window_capacity);
    let _ = writeln!(s, "num_ges={}", streams.num_ges());
    let _ = writeln!(s, "program_len={}", p.len());
    let _ = writeln!(s, "num_and={}", streams.num_and);
    let _ = writeln!(s, "one_wire={}", opt(p.one_wire.map(|n| n.to_string())));
    let _ = writeln!(s, "input_groups={}", join(&p.input_groups));
    let _ = writeln!(s, "output_groups={}", join(&p.output_groups));
    let _ = writeln!(s, "outputs={}", join(&p.outputs));
    s
}

pub fn write_compiled(dir: &Path, p: &Program, streams: &StreamSet, traffic: &TrafficReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let width = address_width(p.max_address() as u64 + 1);
    let mut instr = Vec::new();
    let mut sched = (streams.num_ges() as u32).to_le_bytes().to_vec();
    let mut oor = Vec::new();
    for g in &streams.ges {
        instr.extend(encode_stream(&g.instructions, width)?);
        sched.extend((g.positions.len() as u32).to_le_bytes());
        g.positions.iter().for_each(|x| sched.extend(x.to_le_bytes()));
        g.oor.iter().for_each(|x| oor.extend(x.to_le_bytes()));
    }
    let write = |name: &str, data: &[u8]| fs::write(dir.join(name), data).with_context(|| format!("writing {name}"));
    write("instructions.bin", &instr)?;
    write("schedule.bin", &sched)?;
    write("oor.bin", &oor)?;
    write("program.meta", program_meta(p, streams).as_bytes())?;
    write("traffic.json", (serde_json::to_string_pretty(traffic)? + "\n").as_bytes())?;
    Ok(())
}

/// Rebuilds the GE streams from the compile artifacts in `dir`.
pub fn read_streams(dir: &Path) -> Result<StreamSet> {
    let read = |name: &str| fs::read(dir.join(name)).with_context(|| format!("reading {}", dir.join(name).display()));
    let meta_text = String::from_utf8(read("program.meta")?).context("program.meta is not UTF-8")?;
    let meta: BTreeMap<&str, &str> = meta_text.lines().filter_map(|l| l.split_once('=')).collect();
    let get = |k: &str| meta.get(k).copied().ok_or_else(|| anyhow!("program.meta lacks `{k}`"));
    let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| anyhow!("program.meta: bad `{k}`")) };

    let num_inputs = num("num_inputs")? as u32;
    let program_len = num("program_len")? as usize;
    let sched = words_u32(&read("schedule.bin")?, "schedule.bin")?;
    let mut it = sched.into_iter();
    let num_ges = it.next().ok_or_else(|| anyhow!("schedule.bin is empty"))? as usize;
    let mut positions = Vec::with_capacity(num_ges);
    for g in 0..num_ges {
        let n = it.next().ok_or_else(|| anyhow!("schedule.bin truncated at GE {g}"))? as usize;
        let ps: Vec<u32> = it.by_ref().take(n).collect();
        if ps.len() != n {
            bail!("schedule.bin truncated in GE {g}");
        }
        positions.push(ps);
    }
    if it.next().is_some() {
        bail!("schedule.bin has trailing data");
    }
    let instrs = decode_stream(&read("instructions.bin")?)?;
    let oor = words_u32(&read("oor.bin")?, "oor.bin")?;

    let mut is_and = vec![false; program_len];
    let mut ges = Vec::with_capacity(num_ges);
    let (mut i_at, mut o_at) = (0usize, 0usize);
    for ps in positions {
        let ins = instrs
            .get(i_at..i_at + ps.len())
            .ok_or_else(|| anyhow!("instructions.bin shorter than the schedule"))?
            .to_vec();
        i_at += ps.len();
        let zeros: usize = ins
            .iter()
            .filter(|i| i.op != Opcode::Nop)
            .map(|i| (i.in0 == 0) as usize + (i.in1 == 0) as usize)
            .sum();
        let q = oor
            .get(o_at..o_at + zeros)
            .ok_or_else(|| anyhow!("oor.bin shorter than the zero operands"))?
            .to_vec();
        o_at += zeros;
        for (&p, i) in ps.iter().zip(&ins) {
            *is_and
                .get_mut(p as usize)
                .ok_or_else(|| anyhow!("position {p} beyond program length"))? = i.op == Opcode::And;
        }
        ges.push(GeStream {
            positions: ps,
            instructions: ins,
            tables: Vec::new(),
            oor: q,
        });
    }
    if i_at != instrs.len() || o_at != oor.len() {
        bail!("instructions.bin or oor.bin has entries not covered by the schedule");
    }
    let mut ordinal = vec![0u32; program_len];
    let mut n_and = 0u32;
    for (k, &a) in is_and.iter().enumerate() {
        if a {
            ordinal[k] = n_and;
            n_and += 1;
        }
    }
    let mut writebacks = Vec::new();
    for g in &mut ges {
        g.tables = g
            .positions
            .iter()
            .zip(&g.instructions)
            .filter(|(_, i)| i.op == Opcode::And)
            .map(|(&p, _)| ordinal[p as usize])
            .collect();
        writebacks.extend(
            g.positions
                .iter()
                .zip(&g.instructions)
                .filter(|(_, i)| i.live)
                .map(|(&p, _)| (p, num_inputs + 1 + p)),
        );
    }
    writebacks.sort_unstable();
    let one_wire = match get("one_wire")? {
        "none" => None,
        v => Some(v.parse().map_err(|_| anyhow!("program.meta: bad one_wire"))?),
    };
    let streams = StreamSet {
        ges,
        writebacks,
        num_inputs,
        one_wire,
        outputs: split_list(get("outputs")?)?,
        window_capacity: num("window_capacity")?,
        program_len,
        num_and: n_and as usize,
    };
    if num("num_and")? != n_and as u64 {
        bail!("program.meta num_and disagrees with the instruction stream");
    }
    streams.validate()?;
    Ok(streams)
}

/// Writes the garbler's outputs: tables in program AND order, the active
/// input labels handed to the evaluator, and the garbler's private zero
/// labels and offset.
pub fn write_garbled(dir: &Path, r: &Reference) -> Result<()> {
    fs::create_dir_all(dir)?;
    let write = |name: &str, data: Vec<u8>| fs::write(dir.join(name), data).with_context(|| format!("writing {name}"));
    write("tables.bin", tables_to_bytes(&r.garbled.tables))?;
    write("input_labels.bin", labels_to_bytes(&r.active_inputs))?;
    write("input_zero_labels.bin", labels_to_bytes(&r.garbled.input_zero_labels))?;
    write("output_zero_labels.bin", labels_to_bytes(&r.garbled.output_zero_labels))?;
    write("delta.bin", labels_to_bytes(&[r.ctx.delta().label()]))?;
    Ok(())
}
