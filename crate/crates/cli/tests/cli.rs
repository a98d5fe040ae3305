use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cone-deform"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn help_documents_syntax() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["params", "koebe", "triangle", "deform", "limitset", "verify", "animate"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
    assert!(text.contains("complex  = real | imag | real sign imag"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["deform", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = run(&["params", "--alpha", "1+", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a+bi"));
}

#[test]
fn deform_report_at_eighth_pi() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["deform", "--theta", "0.3926990817", "--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_file(&path);
    assert_eq!(r["schema"], 1);
    let v = &r["states"][0]["validity"];
    assert_eq!(v["passed"], true);
    for check in v["checks"].as_array().unwrap() {
        assert!(check["residual"].as_f64().unwrap() <= 1e-9, "{check}");
    }
    assert_eq!(r["jprime_trace_limits"]["corrected_limit"], -6.0);
    assert_eq!(r["jprime_trace_limits"]["printed_limit"], -2.0);
}

#[test]
fn deform_grid_marks_rho_crossing() {
    let out = run(&["deform", "--grid", "13..24/24"]);
    let r = stdout_json(&out);
    let states = r["states"].as_array().unwrap();
    assert_eq!(states.len(), 12);
    assert_eq!(r["continuity"]["rho_crossings"], serde_json::json!([9]));
    // the J and J' circles overlap at k = 16, 17, so the run reports failure
    assert_eq!(out.status.code(), Some(1));
    let failing: Vec<(usize, String)> = states
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            s["validity"]["checks"]
                .as_array()
                .unwrap()
                .iter()
                .filter(|c| c["status"] == "fail")
                .map(move |c| (i + 13, c["name"].as_str().unwrap().to_string()))
        })
        .collect();
    assert_eq!(
        failing,
        [(16, "J/J' disjoint".to_string()), (17, "J/J' disjoint".to_string())]
    );
}

#[test]
fn params_slices() {
    let out = run(&[
        "params",
        "--slice",
        "f",
        "--alpha",
        "16-4i",
        "--beta",
        "32.470588235294116-1.8823529411764706i",
        "--sigma",
        "-0.058823529411764705+0.23529411764705882i",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    let lambda = &r["derived"]["lambda"];
    assert!((lambda[0].as_f64().unwrap() - 3.0).abs() < 1e-12);
    let out = run(&[
        "params", "--alpha", "1+0.5i", "--beta", "0.3i", "--sigma", "0.2", "--lambda", "1.5", "--branch", "negated",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["defects"]["relator"].as_f64().unwrap() < 1e-8);
    let out = run(&[
        "params",
        "--slice",
        "cb",
        "--alpha",
        "2.5+0.2i",
        "--beta",
        "0.5+4.2i",
        "--lambda",
        "0.09+0.85i",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["params", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn koebe_report() {
    let out = run(&["koebe"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["exact"][3][1], "(3, -2i | 4i, 3)");
    let alpha = &r["parameters"]["point"]["alpha"];
    assert!((alpha[0].as_f64().unwrap() - 16.0).abs() < 1e-12);
}

#[test]
fn triangle_svg_and_discrepancies() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("t.svg");
    let out = run(&["triangle", "--t", "2", "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<circle") && text.contains("<polyline"));
    let r = stdout_json(&out);
    let rows = r["angle_discrepancies"].as_array().unwrap();
    let at_one = rows.iter().find(|row| row["t"] == 1.0).unwrap();
    assert_eq!(at_one["cos_printed"], -4.0);
    assert_eq!(at_one["printed_is_wrong"], true);
    assert_eq!(run(&["triangle", "--zeta", "3.141592653589793"]).status.code(), Some(0));
}

#[test]
fn limitset_images_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    let args = |p: &Path| {
        vec![
            "limitset".to_string(),
            "--alpha".into(),
            "2.5+0.2i".into(),
            "--beta".into(),
            "0.5+4.2i".into(),
            "--lambda".into(),
            "0.09+0.85i".into(),
            "--eps".into(),
            "0.01".into(),
            "--width".into(),
            "200".into(),
            "--height".into(),
            "200".into(),
            "--out".into(),
            p.to_str().unwrap().to_string(),
        ]
    };
    for p in [&a, &b] {
        let argv = args(p);
        let out = run(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout_json(&out)["points_in_view"].as_u64().unwrap() > 1000);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let pts = dir.path().join("p.bin");
    let svg = dir.path().join("p.svg");
    let out = run(&[
        "limitset",
        "--eps",
        "0.05",
        "--out",
        svg.to_str().unwrap(),
        "--points",
        pts.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let n = stdout_json(&out)["points"].as_u64().unwrap();
    assert_eq!(fs::metadata(&pts).unwrap().len(), 16 * n);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn unwritable_output_names_the_path() {
    let out = run(&["limitset", "--eps", "0.05", "--out", "/nonexistent-dir/x.png"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/x.png"));
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"schema": 1, "eps": 0.05, "depth": 30}"#).unwrap();
    let out = run(&["limitset", "--eps", "0.5", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["policy"]["prune_radius"], 0.05);
    assert_eq!(r["policy"]["max_word_length"], 30);

    fs::write(&cfg, r#"{"schema": 2}"#).unwrap();
    assert_eq!(
        run(&["koebe", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
    fs::write(&cfg, r#"{"schema": 1, "no-such-flag": 1}"#).unwrap();
    assert_eq!(
        run(&["koebe", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn animate_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("frames");
    let out = run(&[
        "animate",
        "--grid",
        "11..13/24",
        "--out",
        out_dir.to_str().unwrap(),
        "--depth",
        "8",
        "--eps",
        "0.02",
        "--max-points",
        "2000",
        "--width",
        "64",
        "--height",
        "64",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = json_file(&out_dir.join("manifest.json"));
    let frames = m["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 3);
    for (i, f) in frames.iter().enumerate() {
        assert_eq!(f["file"], format!("frame_{i:03}.png"));
        assert_eq!(f["status"], "ok");
        assert!(out_dir.join(f["file"].as_str().unwrap()).exists());
    }
    // the middle frame is θ = π/2
    assert!(frames[1]["flags"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f == "compression_body_endpoint"));

    let empty = dir.path().join("empty");
    let out = run(&["animate", "--grid", "1..0/24", "--out", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_file(&empty.join("manifest.json"))["frames"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn verify_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("v.json");
    let out = run(&[
        "verify",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json_file(&report);
    let ids: Vec<&str> = r["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8"]);
    assert_eq!(r["passed"], true);
}
