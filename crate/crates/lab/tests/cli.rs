use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kdv5lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdv5lab"))
        .args(args)
        .output()
        .expect("spawn kdv5lab")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn help_lists_every_subcommand() {
    let out = kdv5lab(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in [
        "simulate",
        "check-cutoffs",
        "check-identities",
        "propagation",
        "decay",
        "bootstrap",
        "report",
    ] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn identity_subset_writes_csv_and_manifest() {
    let dir = scratch("identities");
    let csv = dir.join("r.csv");
    let out = kdv5lab(&[
        "check-identities",
        "--id",
        "kato_1,decay_2",
        "--seeds",
        "2",
        "--nu",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("id,seed,scale,abs_residual,rel_residual,convention")
    );
    // 2 identities x 2 seeds plus 3 manufactured energy rows
    assert_eq!(lines.count(), 7);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("r.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
    assert_eq!(manifest["outputs"]["r.csv"].as_str().unwrap().len(), 64);
}

#[test]
fn unknown_identity_is_an_error() {
    let dir = scratch("bad_id");
    let out = kdv5lab(&[
        "check-identities",
        "--id",
        "kato_9x",
        "--out",
        dir.join("r.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_is_an_error() {
    let dir = scratch("missing");
    let out = kdv5lab(&[
        "decay",
        "--config",
        dir.join("absent.toml").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_melts_wide_input() {
    let dir = scratch("report");
    let wide = dir.join("wide.csv");
    std::fs::write(&wide, "t,a,b\n0,1,2\n0.5,3,4\n").unwrap();
    let merged = dir.join("merged.csv");
    let out = kdv5lab(&[
        "report",
        "--inputs",
        wide.to_str().unwrap(),
        "--out",
        merged.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&merged).unwrap();
    assert!(text.starts_with("t,functional_id,value\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn simulate_writes_final_state() {
    let dir = scratch("simulate");
    let cfg = dir.join("run.toml");
    std::fs::write(
        &cfg,
        r#"
experiment = "propagation"
model = "kdv5"
l = 1
[grid]
L = 40.0
N = 128
[solver]
t_end = 0.002
dt = 0.0001
[data]
id = "gaussian"
[data.params]
amplitude = 0.5
center = 26.0
width = 2.0
[window]
x0 = 20.0
eps = 1.0
b = 1.0
R = 4.0
nu = 1.0
"#,
    )
    .unwrap();
    let out = kdv5lab(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(dir.join("final.bin")).unwrap();
    assert_eq!(bytes.len(), 8 * 128);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "simulate");
    assert_eq!(manifest["steps"], 20);
    assert!(manifest["outputs"]["final.bin"].is_string());
}
