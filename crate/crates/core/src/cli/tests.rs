use super::*;

const RUNS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/runs");

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("holokit").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn runs(name: &str) -> String {
    format!("{RUNS}/{name}.toml")
}

/// Writes a run config next to a copy of the sphere fixture.
fn scratch(body: &str) -> (tempfile::TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sphere.toml"), crate::fixtures::SPHERE).unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, body).unwrap();
    let path = path.to_string_lossy().into_owned();
    (dir, path)
}

fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.contains("timestamp")).collect::<Vec<_>>().join("\n")
}

#[test]
fn transport_reports_the_latitude_rotation() {
    let (code, out, err) = invoke(&["transport", "--config", &runs("sphere")]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "transport");
    let angle = v["result"]["unwrapped_angle"].as_f64().unwrap();
    assert!((angle - std::f64::consts::PI).abs() < 1e-6, "{angle}");
    assert_eq!(v["reproducibility"]["parameters"]["steps"], 1024);
}

#[test]
fn timestamp_is_the_last_line_of_its_own() {
    let (_, out, _) = invoke(&["validate", "--config", &runs("plane_flux")]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[lines.len() - 1], "}");
    assert!(lines[lines.len() - 2].trim_start().starts_with("\"timestamp\": "));
    assert_eq!(out.matches("timestamp").count(), 1);
}

#[test]
fn exit_codes() {
    let (code, _, err) = invoke(&["holonomy", "--config", &runs("sphere_coarse")]);
    assert_eq!(code, 2);
    assert!(err.starts_with("warning: step-halving estimate"), "{err}");

    let (code, out, err) = invoke(&["holonomy", "--config", &runs("sphere_open")]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("N [0.8, 0.0]") && err.contains("N [0.30000000000000004, 0.4]"), "{err}");

    let (code, _, err) = invoke(&["transport"]);
    assert_eq!(code, 1);
    assert!(err.contains("--config"));

    let (code, _, _) = invoke(&["frobnicate", "--config", &runs("sphere")]);
    assert_eq!(code, 1);
}

#[test]
fn flags_override_the_config() {
    let (code, out, _) = invoke(&["transport", "--config", &runs("sphere_coarse"), "--steps", "512", "--seed", "9"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["reproducibility"]["parameters"]["steps"], 512);
    assert_eq!(v["reproducibility"]["seed"], 9);
}

#[test]
fn invalid_configs_name_the_offending_key() {
    let (_dir, path) = scratch("fixture = \"sphere.toml\"\npath = \"latitude_60\"\ntol = -1\n");
    let (code, _, err) = invoke(&["transport", "--config", &path]);
    assert_eq!(code, 1);
    assert!(err.contains("run.toml: tol") && err.contains("must be positive"), "{err}");

    let (code, _, err) = invoke(&["transport", "--config", &path, "--tol", "1e-6", "--steps", "8"]);
    assert_eq!(code, 1);
    assert!(err.contains("steps") && err.contains("at least 16"), "{err}");

    let (_dir, path) = scratch("fixture = \"sphere.toml\"\nstep = 100\n");
    let (code, _, err) = invoke(&["transport", "--config", &path]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2") && err.contains("unknown field `step`"), "{err}");

    let (_dir, path) = scratch("fixture = \"sphere.toml\"\npath = \"nowhere\"\n");
    let (code, _, err) = invoke(&["transport", "--config", &path]);
    assert_eq!(code, 1);
    assert!(err.contains("nowhere"), "{err}");

    let (_dir, path) = scratch("fixture = \"missing.toml\"\n");
    let (code, _, err) = invoke(&["validate", "--config", &path]);
    assert_eq!(code, 1);
    assert!(err.contains("missing.toml"), "{err}");
}

#[test]
fn constants_in_the_run_config_reach_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("flux.toml"), crate::fixtures::PLANE_FLUX).unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "fixture = \"flux.toml\"\nconstants = { a = 1.25 }\npath = \"vertical\"\n").unwrap();
    let (code, out, err) = invoke(&["transport", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["result"]["angle"].as_f64().unwrap() + 1.25).abs() < 1e-10);

    let (code, out, err) = invoke(&["holonomy", "--config", &runs("plane_flux_square")]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    // The flux connection is flat, so the square has trivial holonomy for any `a`.
    assert!(v["result"]["angle"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn sweep_is_csv_with_commented_header() {
    let (code, out, err) = invoke(&["sweep", "--config", &runs("sphere")]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(lines.next(), Some("u0,log0,angle,error_estimate"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), defaults::GRID);
    for w in rows.windows(2) {
        assert!(w[1][1] > w[0][1]);
    }
    for r in &rows {
        let expected = 2.0 * std::f64::consts::PI * (1.0 - r[0].cos());
        assert!((r[1] - expected).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn reports_are_deterministic() {
    for (cmd, cfg) in [("sweep", "plane_flux"), ("reconstruct", "plane_flux"), ("cocycle-check", "plane_two_chart")] {
        let (_, a, _) = invoke(&[cmd, "--config", &runs(cfg)]);
        let (_, b, _) = invoke(&[cmd, "--config", &runs(cfg)]);
        assert_eq!(without_timestamp(&a), without_timestamp(&b), "{cmd}");
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let (code, out, _) = invoke(&["validate", "--config", &runs("torus"), "--out", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["fixture"], "torus");
}

#[test]
fn homomorphism_names() {
    assert_eq!(homomorphism("SO2->SO3", LieGroup::SO2).unwrap().target(), LieGroup::SO3);
    assert_eq!(homomorphism("det", LieGroup::GL(2)).unwrap().target(), LieGroup::GL(1));
    assert!(matches!(homomorphism("det", LieGroup::SO3), Err(Error::InvalidArgument(_))));
    assert!(matches!(homomorphism("square", LieGroup::SO3), Err(Error::Unknown { .. })));
}

#[test]
fn every_command_has_a_distinct_name() {
    let names: std::collections::BTreeSet<_> = Command::ALL.iter().map(|c| c.name()).collect();
    assert_eq!(names.len(), Command::ALL.len());
}
