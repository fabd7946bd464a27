use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gcaccel(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcaccel"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn meta(dir: &Path) -> String {
    fs::read_to_string(dir.join("program.meta")).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn compile_writes_artifacts() {
    let t = tempfile::tempdir().unwrap();
    ok(&gcaccel(&["compile", "--gen", "adder:8", "--ges", "4", "-o", "c"], t.path()));
    for f in ["instructions.bin", "schedule.bin", "oor.bin", "program.meta", "traffic.json"] {
        assert!(t.path().join("c").join(f).is_file(), "{f} missing");
    }
    let m = meta(&t.path().join("c"));
    assert!(m.contains("num_ges=4"), "{m}");
    assert!(m.contains("segment_size=none"), "{m}");
}

#[test]
fn segment_size_is_recorded() {
    let t = tempfile::tempdir().unwrap();
    ok(&gcaccel(
        &[
            "compile",
            "--gen",
            "matmul:2:4",
            "--passes",
            "segment:65536,rename,esw,oor",
            "--sww-bytes",
            "2097152",
            "-o",
            "c",
        ],
        t.path(),
    ));
    assert!(meta(&t.path().join("c")).contains("segment_size=65536"));
}

#[test]
fn bad_pass_is_an_error() {
    let t = tempfile::tempdir().unwrap();
    let o = gcaccel(&["compile", "--gen", "adder:8", "--passes", "full,shuffle", "-o", "c"], t.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("shuffle"));
}

#[test]
fn bristol_file_round_trip() {
    let t = tempfile::tempdir().unwrap();
    ok(&gcaccel(&["gen", "adder:4", "-o", "adder.txt"], t.path()));
    ok(&gcaccel(&["run", "--circuit", "adder.txt", "--inputs", "10110011", "-o", "r"], t.path()));
    assert_eq!(json(&t.path().join("r/summary.json"))["verified"], true);
}

#[test]
fn run_is_verified_and_repeatable() {
    let t = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["run", "--gen", "matmul:2:4", "--ges", "4", "--seed", "11", "-o", out];
    ok(&gcaccel(&args("a"), t.path()));
    ok(&gcaccel(&args("b"), t.path()));
    let s = json(&t.path().join("a/summary.json"));
    assert_eq!(s["verified"], true);
    assert!(s["report"]["gates_per_cycle"].as_f64().unwrap() > 0.0);
    for f in ["report.json", "summary.json", "stalls.csv", "instructions.bin", "tables.bin"] {
        assert_eq!(
            fs::read(t.path().join("a").join(f)).unwrap(),
            fs::read(t.path().join("b").join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn garble_writes_labels_and_tables() {
    let t = tempfile::tempdir().unwrap();
    ok(&gcaccel(&["garble", "--gen", "adder:8", "-o", "g"], t.path()));
    let g = t.path().join("g");
    // adder:8 has 16 inputs; the evaluator receives one label per input
    assert_eq!(fs::read(g.join("input_labels.bin")).unwrap().len(), 16 * 16);
    assert_eq!(fs::read(g.join("delta.bin")).unwrap().len(), 16);
    assert!(!fs::read(g.join("tables.bin")).unwrap().is_empty());

    ok(&gcaccel(&["run", "--gen", "adder:8", "--mode", "garbler", "-o", "gr"], t.path()));
    assert_eq!(json(&t.path().join("gr/report.json"))["mode"], "garbler");
}

#[test]
fn report_compares_runs() {
    let t = tempfile::tempdir().unwrap();
    for (out, passes) in [("base", "baseline,rename,esw,oor"), ("full", "full,rename,esw,oor")] {
        ok(&gcaccel(
            &["run", "--gen", "chains:16:64", "--ges", "16", "--dram", "ideal", "--passes", passes, "-o", out],
            t.path(),
        ));
    }
    let o = gcaccel(&["report", "base", "full"], t.path());
    ok(&o);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    // total_cycles, counted from the right: the passes column is quoted
    let cycles = |row: &str| -> u64 { row.rsplit(',').nth(13).unwrap().parse().unwrap() };
    assert!(cycles(rows[2]) < cycles(rows[1]), "{text}");

    let single = gcaccel(&["report", "full"], t.path());
    assert_eq!(String::from_utf8(single.stdout).unwrap().lines().count(), 2);
}

#[test]
fn manifest_and_overrides() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("m.txt"), "gen = adder:8\nges = 2\ndram = hbm2\ntrace = true\n").unwrap();
    ok(&gcaccel(&["run", "--manifest", "m.txt", "--set", "timeline=true", "-o", "r"], t.path()));
    let r = t.path().join("r");
    assert!(r.join("trace.csv").is_file());
    assert!(r.join("timeline.json").is_file());
    assert_eq!(json(&r.join("report.json"))["num_ges"], 2);

    let o = gcaccel(&["run", "--manifest", "m.txt", "--set", "colour=blue", "-o", "x"], t.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_runs_every_point() {
    let t = tempfile::tempdir().unwrap();
    ok(&gcaccel(
        &[
            "sweep",
            "--gen",
            "adder:8",
            "-o",
            "sw",
            "--vary",
            "ges=1,4",
            "--vary",
            "passes=baseline,rename,esw,oor;full,rename,esw,oor",
            "--jobs",
            "2",
        ],
        t.path(),
    ));
    let sw = t.path().join("sw");
    for i in 0..4 {
        assert!(sw.join(format!("run-{i:03}/summary.json")).is_file());
    }
    let csv = fs::read_to_string(sw.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(fs::read_to_string(sw.join("points.csv")).unwrap().lines().count(), 5);
}
