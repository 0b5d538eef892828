use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rip_gate::cli::{exit_code, sha256_hex, RunManifest, EXIT_CONFIG, EXIT_NUMERICAL};
use rip_gate::Error;

fn ripgate(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ripgate"))
        .args(args)
        .env("RIPGATE_OUT", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn presets_list_shows_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = ripgate(&["presets", "list"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["fsr1400", "fsr500", "fsr300", "fsr200"] {
        assert!(text.contains(name), "{text}");
    }
    assert!(text.contains("-20.09"));
}

#[test]
fn validate_writes_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = ripgate(&["validate", "--preset", "fsr1400"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let m = RunManifest::load(&dir.path().join("validate.manifest.json")).unwrap();
    assert_eq!(m.command, "validate");
    assert_eq!(m.config.preset_name.as_deref(), Some("fsr1400"));
    assert_eq!(m.outputs.len(), 1);
    let bytes = fs::read(dir.path().join(&m.outputs[0].path)).unwrap();
    assert_eq!(sha256_hex(&bytes), m.outputs[0].sha256);
    let report: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[left_qubit]\nfrequency = \"five\"\n").unwrap();
    let o = ripgate(&["validate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ripgate(&["validate", "--preset", "fsr9999"], dir.path()).status.code(), Some(2));
    assert_eq!(ripgate(&["validate", "--no-such-flag"], dir.path()).status.code(), Some(2));
    assert_eq!(ripgate(&["qpt", "--levels", "3,15"], dir.path()).status.code(), Some(2));
    assert_eq!(ripgate(&["pulse", "--shape", "poly4"], dir.path()).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(ripgate(&["pulse", "--config", missing.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn error_classes_map_to_exit_codes() {
    assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
    assert_eq!(exit_code(&Error::DimensionCap { dim: 2, cap: 1 }), EXIT_CONFIG);
    assert_eq!(exit_code(&Error::NumericalAbort { t: 1.0, reason: "x".into() }), EXIT_NUMERICAL);
}

#[test]
fn dry_run_computes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dry");
    for cmd in [
        "validate",
        "pulse",
        "zz-sweep",
        "residual-map",
        "asymmetry-sweep",
        "zz-vs-fsr",
        "mode-convergence",
        "optimize",
        "shootout",
        "calibrate",
        "qpt",
    ] {
        let o = ripgate(&[cmd, "--dry-run", "--preset", "fsr300", "--amplitude", "0.15"], &out);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        let text = stdout(&o);
        assert!(text.contains("preset_name = \"fsr300\""), "{cmd}");
        assert!(text.contains("amplitude = 0.15"), "{cmd}");
    }
    assert!(!out.exists());
}

#[test]
fn pulse_csv_has_header_and_honors_out_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = ripgate(&["pulse", "--shape", "poly3", "--gate-time", "40", "--dt", "0.5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("pulse.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t_ns,amplitude");
    assert_eq!(lines.len(), 82);
    assert_eq!(lines[41], "20.0,1.0");
}

#[test]
fn sweep_csv_puts_grid_first() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["zz-sweep", "--from", "0.08", "--to", "0.1", "--points", "2", "--hold", "100", "--dt", "0.05"];
    assert_eq!(ripgate(&args, dir.path()).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("zz-sweep.csv")).unwrap();
    assert!(text.starts_with("detuning,zz_rate_numeric,zz_rate_closed_form,"));
    assert_eq!(text.lines().count(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("zz-sweep.json")).unwrap()).unwrap();
    assert!(json[0]["result"]["zz_rate_numeric"].is_number());
}

#[test]
fn preset_round_trips_through_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let shown = ripgate(&["presets", "show", "fsr300"], dir.path());
    let cfg = dir.path().join("fsr300.toml");
    fs::write(&cfg, &shown.stdout).unwrap();
    let o = ripgate(&["validate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let m = RunManifest::load(&dir.path().join("validate.manifest.json")).unwrap();
    assert_eq!(m.config, rip_gate::DeviceConfig::preset("fsr300").unwrap());
}

#[test]
fn replay_detects_tampered_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    assert_eq!(ripgate(&["zz-vs-fsr", "--fsr-values", "0.5"], &first).status.code(), Some(0));
    let path = first.join("zz-vs-fsr.manifest.json");
    let mut m = RunManifest::load(&path).unwrap();
    let second = dir.path().join("b");
    let replay = |m: &Path| ripgate(&["replay", "--manifest", m.to_str().unwrap(), "--out", second.to_str().unwrap()], dir.path());
    assert_eq!(replay(&path).status.code(), Some(0));
    m.outputs[0].sha256 = "0".repeat(64);
    let forged = dir.path().join("forged.json");
    fs::write(&forged, serde_json::to_vec(&m).unwrap()).unwrap();
    let o = replay(&forged);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("DIFFER"));
}

#[test]
fn seeded_optimize_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["optimize", "--preset", "fsr200", "--terms", "3", "--generations", "2", "--population", "6", "--seed", "3", "--gate-time", "60", "--dt", "0.1"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(ripgate(&args, &a).status.code(), Some(0));
    assert_eq!(ripgate(&args, &b).status.code(), Some(0));
    for f in ["optimize.json", "optimize-trace.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    let m = RunManifest::load(&a.join("optimize.manifest.json")).unwrap();
    assert_eq!(m.seed, Some(3));
}
