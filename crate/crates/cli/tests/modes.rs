use std::path::{Path, PathBuf};

use polydisk_cli::run_cli;
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(config: &Path, out: &Path) -> i32 {
    run_cli([
        "polydisk".as_ref(),
        "--quiet".as_ref(),
        "--config".as_ref(),
        config.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ])
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn report(out: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn good_inner_power_matches_log_radius() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "dimension = 1\nmode = \"good-inner\"\n[diagnostics]\nfunctions = [\"z[1]^5\"]\nradii = [0.9, 0.99, 0.999]\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out), 0);
    let rows = csv_rows(&out.join("good_inner.csv"));
    assert_eq!(rows.len(), 3);
    for row in rows {
        let r: f64 = row[1].parse().unwrap();
        let value: f64 = row[2].parse().unwrap();
        assert!((value - 5.0 * r.ln()).abs() <= 1e-9, "r = {r}: {value}");
    }
}

#[test]
fn construct_then_verify_from_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(run(&configs().join("universal_n1.toml"), &out), 0);
    let rep = report(&out);
    assert_eq!(rep["status"], "ok");
    let stages = rep["universal"]["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 2);
    let rows = rep["universal"]["verification"].as_array().unwrap();
    for row in rows {
        assert!(row["value"].as_f64().unwrap() <= row["bound"].as_f64().unwrap(), "{row}");
    }

    let cfg = write_config(
        tmp.path(),
        "dimension = 1\nmode = \"verify-orbit\"\n[verify]\nfrom_report = \"run/report.json\"\n",
    );
    let again = tmp.path().join("verify");
    assert_eq!(run(&cfg, &again), 0);
    let fresh = report(&again)["orbit"]["verification"].clone();
    for (a, b) in rows.iter().zip(fresh.as_array().unwrap()) {
        assert_eq!(a["best_index"], b["best_index"]);
        let d = (a["value"].as_f64().unwrap() - b["value"].as_f64().unwrap()).abs();
        assert!(d <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn repeated_runs_write_identical_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = configs().join("universal_n2.toml");
    assert_eq!(run(&cfg, &a), 0);
    assert_eq!(run(&cfg, &b), 0);
    for name in ["report.json", "stages.csv", "verification.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn missing_config_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&tmp.path().join("absent.toml"), &out), 1);
    let rep = report(&out);
    assert_eq!(rep["error"]["kind"], "ConfigNotFound");
    assert_eq!(rep["status"], "config-error");
}

#[test]
fn engine_failure_exits_two_with_partial_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "dimension = 1\nmode = \"construct-universal\"\ntargets = [\"const 0.5+0i\"]\n[sequence]\nkind = \"generated\"\nradial = \"fixed\"\nmodulus = 0.5\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out), 2);
    let rep = report(&out);
    assert_eq!(rep["status"], "engine-failure");
    assert_eq!(rep["error"]["kind"], "NoBoundaryConvergence");
    assert!(rep["universal"].is_object());
}

#[test]
fn config_errors_exit_one() {
    let cases = [
        ("targets = [\"const 1.5+0i\"]", "ValidityError"),
        ("targets = [\"z[1] *\"]", "ParseError"),
        ("targets = [\"z[3]\"]", "ValidityError"),
        ("targets = [\"z[1]\"]\nbogus = 1", "ConfigParseError"),
    ];
    for (line, kind) in cases {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = write_config(
            tmp.path(),
            &format!("dimension = 1\nmode = \"construct-universal\"\n{line}\n[sequence]\nkind = \"generated\"\n"),
        );
        let out = tmp.path().join("out");
        assert_eq!(run(&cfg, &out), 1, "{line}");
        assert_eq!(report(&out)["error"]["kind"], kind, "{line}");
    }
}

#[test]
fn mode_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "dimension = 1\nmode = \"good-inner\"\n[diagnostics]\nfunctions = [\"z[1]\"]\n",
    );
    let out = tmp.path().join("out");
    let code = run_cli([
        "polydisk".as_ref(),
        "--quiet".as_ref(),
        "--mode".as_ref(),
        "diagnose-inner".as_ref(),
        "--config".as_ref(),
        cfg.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ] as [&std::ffi::OsStr; 8]);
    assert_eq!(code, 0);
    assert_eq!(report(&out)["mode"], "diagnose-inner");
    assert!(out.join("radial_modulus.csv").exists());
}
