//! End-to-end checks of the `mixprep` binary: exit codes, circuit
//! round-trips, and byte-determinism of reports.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use mixprep::qasm::{export_qasm, parse_qasm};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mixprep"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mixprep-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// A normalized two-qubit statevector document with nontrivial phases.
fn pure_doc() -> serde_json::Value {
    let amps = [
        (0.5, 0.1),
        (0.3, -0.2),
        (-0.1, 0.4),
        (0.2, 0.0),
    ];
    let norm: f64 = amps.iter().map(|(r, i)| r * r + i * i).sum::<f64>().sqrt();
    let data: Vec<_> = amps
        .iter()
        .map(|(r, i)| serde_json::json!([r / norm, i / norm]))
        .collect();
    serde_json::json!({"kind": "statevector", "num_qubits": 2, "data": data})
}

fn ensemble_doc() -> serde_json::Value {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    serde_json::json!({
        "kind": "ensemble",
        "num_qubits": 1,
        "weights": [0.75, 0.25],
        "data": [
            [[1.0, 0.0], [0.0, 0.0]],
            [[h, 0.0], [h, 0.0]]
        ]
    })
}

fn density_doc() -> serde_json::Value {
    // rank-2 diagonal state on 2 qubits
    serde_json::json!({
        "kind": "density",
        "num_qubits": 2,
        "data": [
            [[0.7, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.3, 0.0], [0.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
        ]
    })
}

fn strip_timings(report: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(report).unwrap();
    v.as_object_mut().unwrap().remove("timings").unwrap();
    v
}

#[test]
fn acceptance_11_cli_contract() {
    let dir = scratch("contract");
    let input = dir.join("pure.json");
    fs::write(&input, pure_doc().to_string()).unwrap();
    let qasm_path = dir.join("pure.qasm");
    let report_path = dir.join("pure-report.json");

    // Exit 0: successful synthesis above the default threshold.
    let out = run(&[
        "synth-pure",
        input.to_str().unwrap(),
        "--output",
        qasm_path.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["verified"], true);
    assert!(report["fidelity"].as_f64().unwrap() > 1.0 - 1e-10);

    // Round trip: exported text parses back and re-exports byte-identically.
    let text = fs::read_to_string(&qasm_path).unwrap();
    let parsed = parse_qasm(&text).unwrap();
    assert_eq!(export_qasm(&parsed).unwrap(), text);

    // `verify` against the original target succeeds...
    let out = run(&[
        "verify",
        qasm_path.to_str().unwrap(),
        input.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    // ...and exits 2 against a different target.
    let wrong = dir.join("wrong.json");
    fs::write(
        &wrong,
        serde_json::json!({
            "kind": "statevector",
            "num_qubits": 2,
            "data": [[0.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&[
        "verify",
        qasm_path.to_str().unwrap(),
        wrong.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);

    // Exit 1: malformed input document.
    let bad = dir.join("bad.json");
    fs::write(&bad, "{not json").unwrap();
    let out = run(&["synth-pure", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());

    // Exit 1: wrong document kind.
    let out = run(&["synth-pure", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    println!("PASS criterion 11: CLI round-trip byte-identical; exit codes 0/1/2 exercised");
}

#[test]
fn reports_are_byte_deterministic() {
    let dir = scratch("determinism");
    let cases: [(&str, serde_json::Value, &[&str]); 4] = [
        ("pure", pure_doc(), &[]),
        ("ens-mix", ensemble_doc(), &["--method", "mixture"]),
        ("ens-pur", ensemble_doc(), &["--method", "purification"]),
        ("dens", density_doc(), &["--method", "purification", "--drop-tol", "1e-3"]),
    ];
    for (name, doc, extra) in cases {
        let input = dir.join(format!("{name}.json"));
        fs::write(&input, doc.to_string()).unwrap();
        let verb = if name == "pure" { "synth-pure" } else { "synth-mixed" };
        let mut outputs = Vec::new();
        for pass in 0..2 {
            let qasm = dir.join(format!("{name}-{pass}.qasm"));
            let report = dir.join(format!("{name}-{pass}.json"));
            let mut args = vec![
                verb,
                input.to_str().unwrap(),
                "--output",
                qasm.to_str().unwrap(),
                "--report",
                report.to_str().unwrap(),
            ];
            args.extend_from_slice(extra);
            let out = run(&args);
            assert_eq!(
                code(&out),
                0,
                "{name}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            outputs.push((
                fs::read_to_string(&qasm).unwrap(),
                fs::read_to_string(&report).unwrap(),
            ));
        }
        assert_eq!(outputs[0].0, outputs[1].0, "{name}: circuit bytes differ");
        // Timings vary run to run; everything else must match byte for byte.
        assert_eq!(
            serde_json::to_string(&strip_timings(&outputs[0].1)).unwrap(),
            serde_json::to_string(&strip_timings(&outputs[1].1)).unwrap(),
            "{name}: report differs beyond timings"
        );
    }
}

#[test]
fn factorize_and_counts_outputs() {
    let dir = scratch("factorize");
    let input = dir.join("density.json");
    fs::write(&input, density_doc().to_string()).unwrap();
    let out_path = dir.join("factor.json");
    let out = run(&[
        "factorize",
        input.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let factor: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(factor["rank"], 2);
    assert_eq!(factor["members"], 2);
    assert_eq!(factor["weights"].as_array().unwrap().len(), 2);

    // counts on a synthesized circuit prints a JSON object with cnot totals.
    let pure = dir.join("pure.json");
    fs::write(&pure, pure_doc().to_string()).unwrap();
    let qasm = dir.join("pure.qasm");
    let out = run(&[
        "synth-pure",
        pure.to_str().unwrap(),
        "--output",
        qasm.to_str().unwrap(),
        "--report",
        dir.join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&["counts", qasm.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let counts: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(counts["total_primitive"].as_u64().unwrap() > 0);
}

#[test]
fn mixture_report_tracks_registers() {
    let dir = scratch("registers");
    let input = dir.join("ens.json");
    fs::write(&input, ensemble_doc().to_string()).unwrap();
    let report_path = dir.join("report.json");
    let out = run(&[
        "synth-mixed",
        input.to_str().unwrap(),
        "--method",
        "mixture",
        "--output",
        dir.join("c.qasm").to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    // l=2 members over n=1 qubit: l(n+1)-1 = 3 static, 2n+1 = 3 dynamic.
    assert_eq!(report["counts"]["registers_static"], 3);
    assert_eq!(report["counts"]["registers_dynamic"], 3);
    assert_eq!(report["verified"], true);
    assert!(report["fidelity"].as_f64().unwrap() > 1.0 - 1e-10);
}
