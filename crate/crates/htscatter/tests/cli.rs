use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use htscatter::formats::{parse_circuit, Table};
use htscatter::manifest::{verify, RunManifest};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_htscatter"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(verb: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(verb)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let o = bin().arg("validate-config").arg("--config").arg(&path).output().unwrap();
        assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
        n += 1;
    }
    assert!(n >= 5);
}

#[test]
fn unknown_key_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", "{\n  \"model\": {\n    \"mass\": 1.0\n  }\n}\n");
    let o = run("basis", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 3"), "{e}");
    assert!(e.contains("mass"), "{e}");
}

#[test]
fn invalid_values_exit_2_at_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "{\n  \"schedule\": { \"rampTau\": 0.1 },\n  \"circuit\": {\n    \"dt\": 0.2\n  }\n}\n",
            "line 4",
            "circuit.dt",
        ),
        ("{\n  \"resources\": {\n    \"epsilons\": []\n  }\n}\n", "line 3", "resources.epsilons"),
        ("{\n  \"model\": { \"g\": -1 }\n}\n", "line 2", "model.g"),
    ];
    for (text, line, key) in cases {
        let cfg = write_config(dir.path(), "c.json", text);
        let o = bin().arg("validate-config").arg("--config").arg(&cfg).output().unwrap();
        assert_eq!(o.status.code(), Some(2), "{text}");
        let e = stderr(&o);
        assert!(e.contains(line) && e.contains(key), "{e}");
    }
}

#[test]
fn numeric_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // Below the two-particle threshold the basis holds only the vacuum.
    let cfg = write_config(dir.path(), "c.json", r#"{ "truncation": { "mode": "energy", "value": 1.0 } }"#);
    let o = run("scatter", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("basis", &dir.path().join("absent.json"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "model": { "g": 1.5 },
  "truncation": { "value": 6 },
  "schedule": { "tMax": 0.5, "sampleEvery": 0.1, "rampSteps": 20 },
  "sweep": { "parameter": "g", "values": [1.0, 2.0] },
  "outputs": { "formats": ["csv", "json"] }
}"#,
    );
    for verb in ["basis", "hamiltonian", "scatter"] {
        let (a, b) = (dir.path().join(format!("{verb}-a")), dir.path().join(format!("{verb}-b")));
        for out in [&a, &b] {
            let o = run(verb, &cfg, out, &["--deterministic"]);
            assert!(o.status.success(), "{verb}: {}", stderr(&o));
        }
        let m = manifest(&a);
        assert!(m.wall_clock_seconds.is_none());
        assert!(!m.files.is_empty());
        for f in m.files.iter().map(|f| f.path.as_str()).chain(["manifest.json"]) {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{verb}/{f}");
        }
    }
}

#[test]
fn manifest_checksums_detect_changes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run("basis", &configs().join("basis.json"), &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(verify(&out).unwrap().is_empty());
    let m = manifest(&out);
    assert_eq!(m.verb, "basis");
    assert!(m.wall_clock_seconds.is_some());
    assert_eq!(m.config_hash.len(), 64);
    let basis = Table::parse(&fs::read(out.join("basis.csv")).unwrap()).unwrap();
    assert_eq!(Some(basis.rows.len()), m.basis_dimension);
    fs::write(out.join("basis.csv"), b"tampered\n").unwrap();
    assert_eq!(verify(&out).unwrap(), vec!["basis.csv".to_string()]);
    let leftovers: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn resources_tables_follow_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "resources": {
    "epsilons": [0.2],
    "emaxFrom": 2, "emaxTo": 6, "emaxStep": 1,
    "nqPerSite": 3,
    "sparsityQubits": [1, 2, 3, 4, 5, 6, 7, 8]
  }
}"#,
    );
    let out = dir.path().join("out");
    let o = run("resources", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let q = Table::parse(&fs::read(out.join("qubits_vs_emax.csv")).unwrap()).unwrap();
    assert!(q.comments.contains(&("nq_per_site".into(), "3".into())));
    assert_eq!(q.rows.len(), 5);
    let lattice = q.column("lattice_qubits").unwrap();
    // nqPerSite · ML · E/M at E = 2.
    assert_eq!(q.rows[0][lattice], "96");
    let p = Table::parse(&fs::read(out.join("precision.csv")).unwrap()).unwrap();
    assert_eq!(p.rows.len(), 1);
    let s = Table::parse(&fs::read(out.join("sparsity.csv")).unwrap()).unwrap();
    assert_eq!(s.rows.len(), 8);
}

#[test]
fn emit_circuit_small_register() {
    let dir = tempfile::tempdir().unwrap();
    let small = configs().join("small-register.json");
    let mut gates = Vec::new();
    for reorder in [true, false] {
        let text = fs::read_to_string(&small)
            .unwrap()
            .replace("\"reorder\": true", &format!("\"reorder\": {reorder}"));
        let cfg = write_config(dir.path(), "c.json", &text);
        let out = dir.path().join(format!("out-{reorder}"));
        let o = run("emit-circuit", &cfg, &out, &[]);
        assert!(o.status.success(), "{}", stderr(&o));
        let m = manifest(&out);
        assert_eq!(m.qubit_count, Some(4));
        let fid = m.metrics["interpreterFidelity"].as_f64().unwrap();
        assert!((0.999..=1.0 + 1e-9).contains(&fid), "{fid}");
        assert!(m.metrics["prepFidelity"].as_f64().unwrap() > 1.0 - 1e-10);
        assert!(m.metrics["leakage"].as_f64().unwrap() < 1e-12);
        assert!(out.join("summary.json").exists());
        for name in ["prep.circ", "ramp.circ", "step.circ"] {
            let c = parse_circuit(&fs::read_to_string(out.join(name)).unwrap()).unwrap();
            assert_eq!(c.num_qubits, 4);
        }
        let report = Table::parse(&fs::read(out.join("gate_report.csv")).unwrap()).unwrap();
        assert_eq!(report.rows.len(), 3);
        gates.push(report.rows);
    }
    assert_eq!(gates[0][0][2], "15");
}

#[test]
fn free_scatter_keeps_pair_weight() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "model": { "g": 0 },
  "truncation": { "value": 7 },
  "schedule": { "tMax": 1.0, "sampleEvery": 0.1, "rampSteps": 10 }
}"#,
    );
    let out = dir.path().join("out");
    let o = run("scatter", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = Table::parse(&fs::read(out.join("summary.csv")).unwrap()).unwrap();
    assert_eq!(s.rows.len(), 1);
    let w: f64 = s.rows[0][s.column("final_pair_weight").unwrap()].parse().unwrap();
    assert!((w - 1.0).abs() < 1e-9, "{w}");
    let p4: f64 = s.rows[0][s.column("final_p4").unwrap()].parse().unwrap();
    assert!(p4.abs() < 1e-12);
}
