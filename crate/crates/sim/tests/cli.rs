//! End-to-end runs of the `kerr` binary.

use std::process::Command;

use kerr_sim::table::Table;

fn kerr() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kerr"));
    c.env_remove("KERR_WORKERS");
    c
}

const CONFIG: &str = r#"
name = "mini"
tiers = ["quantum", "reduced", "fpe"]
n_max = 30

[model]
m = { start = 11.9, stop = 12.1, num = 3 }
gamma = 1e-2
drive_ratio = 0.4
n_thermal = 1.0
"#;

#[test]
fn sweep_writes_tables_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("mini.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let out = d.path().join("out");
    let st = kerr().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).args(["--workers", "2", "--svg"]).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let dir = out.join("mini");
    for f in ["config.toml", "quantum.csv", "reduced.csv", "fpe.csv", "summary.csv", "manifest.toml", "compare_reduced_quantum.csv", "p2_fpe.svg"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let s = Table::parse(&std::fs::read_to_string(dir.join("summary.csv")).unwrap()).unwrap();
    assert_eq!(s.columns[7..], ["p2_quantum", "p2_reduced", "p2_fpe"]);
    assert_eq!(s.rows.len(), 3);
    let manifest = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"success\""));
    assert!(manifest.contains("path = \"summary.csv\""));

    // environment default for the worker count; identical bytes
    let before = std::fs::read(dir.join("summary.csv")).unwrap();
    let st = kerr().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).env("KERR_WORKERS", "1").status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(before, std::fs::read(dir.join("summary.csv")).unwrap());

    let cmp = kerr().arg("compare").arg(dir.join("summary.csv")).args(["--other", "fpe"]).output().unwrap();
    assert!(cmp.status.success());
    assert!(String::from_utf8_lossy(&cmp.stdout).contains("rel_dev"));
}

#[test]
fn partial_failure_exit_code() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, CONFIG.replace("gamma = 1e-2", "gamma = [1e-2, 0.0]").replace("\"quantum\", \"reduced\", ", "")).unwrap();
    let st = kerr().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(d.path()).status().unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn invalid_input_is_rejected() {
    let st = kerr().args(["steady", "--m", "12", "--drive-ratio", "1.5"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    let st = kerr().args(["sweep", "--config", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    let st = kerr().args(["preset", "fig9"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn point_subcommands_print_tables() {
    for args in [
        vec!["classical", "--m", "12", "--drive-ratio", "0.4"],
        vec!["spectrum", "--m", "12", "--nmax", "30"],
        vec!["tunneling", "--m", "12", "--alpha3", "1e-5"],
        vec!["steady", "--delta", "6", "--nth", "1", "--nmax", "30"],
        vec!["reduced", "--m", "12.1", "--nth", "1"],
        vec!["fpe", "--m", "12.1", "--nth", "1", "--mode", "classical"],
    ] {
        let o = kerr().args(&args).output().unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let t = Table::parse(&String::from_utf8(o.stdout).unwrap()).unwrap();
        assert!(!t.rows.is_empty(), "{args:?}");
    }
}

#[test]
fn preset_prints_config() {
    let o = kerr().args(["preset", "fig6", "--print"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let c = kerr_sim::config::ExperimentConfig::from_toml(&text).unwrap();
    assert_eq!(c.points().len(), 804);
}
