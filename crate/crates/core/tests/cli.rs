use std::path::Path;
use std::process::Command;

use ccs_radar::scene::{decode_dump, MAP_MAGIC};

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ccs-radar")).args(args).output().unwrap()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_owned()
}

#[test]
fn nearfar_writes_tables_maps_and_roc() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = cli(&["nearfar", "--trials", "3", "--seed", "9", "--out", out]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(header(&dir.path().join("near_far.csv")).starts_with("waveform,near_peak,far_peak"));
    assert_eq!(header(&dir.path().join("roc.csv")), "eta,pd,pf,ci_lo,ci_hi,waveform");
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("near_far.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "near_far");
    let bytes = std::fs::read(dir.path().join("maps/ccs_ofdm.bin")).unwrap();
    let (magic, grid) = decode_dump(&bytes).unwrap();
    assert_eq!(magic, MAP_MAGIC);
    assert_eq!((grid.rows(), grid.cols()), (33, 1024));
}

#[test]
fn same_seed_same_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert!(cli(&["nearfar", "--trials", "2", "--out", d.path().to_str().unwrap()]).status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("roc.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "trials = \"many\"").unwrap();
    assert_eq!(cli(&["pslr", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, "experiment = \"near_far\"").unwrap();
    assert_eq!(cli(&["pslr", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cli(&["bounds", "--trials", "0", "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failed_property_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("loud.toml");
    std::fs::write(
        &cfg,
        "[scene.interferer]\nrange_bin = 29\ndoppler_bin = 518\namplitude = 1000.0\n",
    )
    .unwrap();
    let run = cli(&[
        "nearfar",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
        "--check",
    ]);
    assert_eq!(run.status.code(), Some(3), "{}", String::from_utf8_lossy(&run.stdout));
    assert!(String::from_utf8_lossy(&run.stdout).contains("FAIL sweet spot"));
}
