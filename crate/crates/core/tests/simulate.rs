use gcaccel_core::compiler::{compile, parse_passes, traffic_report, Compiled};
use gcaccel_core::netlist::{gen_test_circuit, GenKind};
use gcaccel_core::simulator::{simulate, DramConfig, Mode, Reference, SimConfig, SimOutput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u128 = 0x5eed_0001;

fn config(mode: Mode, ges: usize, sww_wires: u64) -> SimConfig {
    SimConfig {
        mode,
        num_ges: ges,
        sww_bytes: sww_wires * 16,
        ..SimConfig::default()
    }
}

fn build(kind: &str, passes: &str, cfg: &SimConfig) -> Compiled {
    let c = gen_test_circuit(&kind.parse::<GenKind>().unwrap()).unwrap();
    let passes = parse_passes(&format!("{passes},sched:{}", cfg.num_ges)).unwrap();
    compile(&c, &passes, cfg).unwrap()
}

fn run(kind: &str, passes: &str, cfg: &SimConfig, input_seed: u64) -> (Compiled, Reference, SimOutput) {
    let compiled = build(kind, passes, cfg);
    let p = &compiled.program;
    let mut rng = ChaCha8Rng::seed_from_u64(input_seed);
    let bits: Vec<bool> = (0..p.num_circuit_inputs()).map(|_| rng.gen()).collect();
    let reference = Reference::new(p, SEED, &bits).unwrap();
    let out = simulate(compiled.streams.as_ref().unwrap(), &reference.image(cfg.mode), cfg).unwrap();
    (compiled, reference, out)
}

const FULL: &str = "full,rename,esw,oor";

#[test]
fn evaluator_matches_software_on_every_generator() {
    for kind in ["adder:16", "chain:40", "xor_tree:64", "matmul:3:4", "chains:4:20", "fanout:12:6", "blocks:6:8"] {
        for (ges, wires) in [(1, 64), (4, 64), (16, 256)] {
            let cfg = config(Mode::Evaluator, ges, wires);
            let (_, reference, out) = run(kind, FULL, &cfg, 7);
            reference.verify(&out).unwrap_or_else(|e| panic!("{kind} ges={ges} n={wires}: {e}"));
        }
    }
}

#[test]
fn garbler_matches_software_on_every_generator() {
    for kind in ["adder:16", "chain:40", "matmul:3:4", "fanout:12:6"] {
        for (ges, wires) in [(1, 64), (8, 128)] {
            let cfg = config(Mode::Garbler, ges, wires);
            let (_, reference, out) = run(kind, FULL, &cfg, 3);
            reference.verify(&out).unwrap_or_else(|e| panic!("{kind} ges={ges} n={wires}: {e}"));
        }
    }
}

#[test]
fn segment_reorder_and_baseline_are_also_correct() {
    for passes in ["baseline,rename,esw,oor", "segment,rename,esw,oor", "segment:8,rename,esw,oor"] {
        let cfg = config(Mode::Evaluator, 4, 64);
        let (_, reference, out) = run("matmul:3:4", passes, &cfg, 11);
        reference.verify(&out).unwrap_or_else(|e| panic!("{passes}: {e}"));
    }
}

#[test]
fn tiny_window_forces_oor_traffic_and_stays_correct() {
    let mut cfg = config(Mode::Evaluator, 2, 8);
    cfg.banks_per_ge = 2;
    let (compiled, reference, out) = run("matmul:3:4", FULL, &cfg, 5);
    assert!(compiled.streams.as_ref().unwrap().num_oor() > 0);
    reference.verify(&out).unwrap();
    assert!(out.report.window_advances > 0);
}

#[test]
fn stall_buckets_partition_cycles() {
    for mode in [Mode::Evaluator, Mode::Garbler] {
        let cfg = config(mode, 8, 64);
        let (_, _, out) = run("matmul:3:4", FULL, &cfg, 1);
        for g in &out.report.ges {
            assert_eq!(g.total(), out.report.total_cycles);
        }
        let issued: u64 = out.report.ges.iter().map(|g| g.busy).sum();
        assert_eq!(issued, out.report.instructions);
    }
}

#[test]
fn measured_traffic_equals_static_accounting() {
    for mode in [Mode::Evaluator, Mode::Garbler] {
        let cfg = config(mode, 4, 16);
        let (compiled, _, out) = run("matmul:3:4", FULL, &cfg, 9);
        let streams = compiled.streams.as_ref().unwrap();
        let t = traffic_report(&compiled.program, &streams.window(), streams);
        let b = out.report.bytes;
        assert_eq!(b.wires_in, t.bytes_wires_in);
        assert_eq!(b.wires_out, t.bytes_wires_out);
        assert_eq!(b.instructions, t.bytes_instructions);
        assert_eq!(b.oor_addrs, t.bytes_oor_addrs);
        assert_eq!(b.tables, t.bytes_tables);
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = config(Mode::Evaluator, 4, 64);
    let (_, _, a) = run("adder:32", FULL, &cfg, 2);
    let (_, _, b) = run("adder:32", FULL, &cfg, 2);
    assert_eq!(a.report, b.report);
}

#[test]
fn bandwidth_limited_memory_slows_the_run() {
    let mut fast = config(Mode::Evaluator, 4, 64);
    fast.dram = DramConfig::infinite();
    let mut slow = fast.clone();
    slow.dram = DramConfig {
        bandwidth: Some(4.0),
        ..DramConfig::ddr4()
    };
    let (_, _, a) = run("matmul:3:4", FULL, &fast, 4);
    let (_, r, b) = run("matmul:3:4", FULL, &slow, 4);
    r.verify(&b).unwrap();
    assert!(b.report.total_cycles > a.report.total_cycles);
}

#[test]
fn timeline_and_trace_are_recorded_on_request() {
    let mut cfg = config(Mode::Evaluator, 2, 64);
    cfg.timeline = true;
    cfg.trace = true;
    let (compiled, _, out) = run("adder:8", FULL, &cfg, 0);
    let tl = out.timeline.unwrap();
    assert_eq!(tl.len(), compiled.program.len());
    for t in &tl {
        assert!(t.fetch < t.read && t.read < t.issue && t.issue < t.exec_done && t.exec_done < t.retire);
    }
    assert_eq!(out.trace.unwrap().len() as u64, out.report.total_cycles);
}
