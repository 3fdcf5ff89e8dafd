use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sciencemap"));
    c.env_remove("SCIENCEMAP_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn synth(dir: &Path) -> String {
    let o = run(&["synth", "--dir", dir.to_str().unwrap(), "--documents", "600", "--sources", "60", "--seed", "3"]);
    assert!(o.status.success(), "{}", text(&o));
    dir.join("config.toml").to_string_lossy().into_owned()
}

#[test]
fn full_run_then_single_stages() {
    let ws = tempfile::tempdir().unwrap();
    let cfg = synth(ws.path());
    let out = ws.path().join("out");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "run"]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("selected"));
    assert!(out.join("report.json").exists());
    assert!(out.join("overlay/overlay.svg").exists());

    // re-running a downstream stage on intact artifacts is fine
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "cluster"]);
    assert!(o.status.success(), "{}", text(&o));
}

#[test]
fn stage_without_upstream_exits_4() {
    let ws = tempfile::tempdir().unwrap();
    let cfg = synth(ws.path());
    let out = ws.path().join("out");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "bands"]);
    assert_eq!(o.status.code(), Some(4), "{}", text(&o));
    assert!(text(&o).contains("participate"));
}

#[test]
fn changed_parameters_make_downstream_stale() {
    let ws = tempfile::tempdir().unwrap();
    let cfg = synth(ws.path());
    let out = ws.path().join("out");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "run"]);
    assert!(o.status.success(), "{}", text(&o));
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "--tol", "1e-7", "cluster"]);
    assert_eq!(o.status.code(), Some(4), "{}", text(&o));
    assert!(text(&o).contains("stale"));
}

#[test]
fn config_errors_exit_2() {
    let ws = tempfile::tempdir().unwrap();
    let cfg = synth(ws.path());
    // no output directory anywhere
    let o = run(&["--config", &cfg, "ingest"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    // no config
    let o = run(&["--out", ws.path().to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    // invalid value
    let o = run(&["--config", &cfg, "--out", ws.path().join("o").to_str().unwrap(), "--core-quantile", "1.5", "run"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    // missing labels file
    let o = run(&["--config", &cfg, "--out", ws.path().join("o").to_str().unwrap(), "--labels", "absent.csv", "run"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("bands"));
}

#[test]
fn bad_corpus_exits_3() {
    let ws = tempfile::tempdir().unwrap();
    let cfg = synth(ws.path());
    std::fs::write(ws.path().join("corpus.csv"), "doc_id,nonsense\n1,2\n").unwrap();
    let o = run(&["--config", &cfg, "--out", ws.path().join("o").to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o));
}

#[test]
fn output_dir_from_environment() {
    let ws = tempfile::tempdir().unwrap();
    let cfg = synth(ws.path());
    let out = ws.path().join("env-out");
    let o = bin().args(["--config", &cfg, "ingest"]).env("SCIENCEMAP_OUT", &out).output().unwrap();
    assert!(o.status.success(), "{}", text(&o));
    assert!(out.join("ingest/manifest.json").exists());
}

#[test]
fn pp_only_replays_band_table() {
    let ws = tempfile::tempdir().unwrap();
    let p = ws.path().join("bands.csv");
    std::fs::write(&p, sciencemap::participation::REFERENCE_BANDS).unwrap();
    let o = run(&["participate", "--pp-only", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l == "16,25,230,11,5,5,51"), "{stdout}");
    assert!(stdout.contains("cutoff 25"));
    assert!(stdout.contains("219 selected"));

    let o = run(&["participate", "--pp-only", ws.path().join("none.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_seed_same_bytes() {
    let ws = tempfile::tempdir().unwrap();
    let cfg = synth(ws.path());
    let mut svgs = Vec::new();
    for name in ["a", "b"] {
        let out = ws.path().join(name);
        let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11", "run"]);
        assert!(o.status.success(), "{}", text(&o));
        svgs.push(std::fs::read(out.join("map/density.svg")).unwrap());
    }
    assert_eq!(svgs[0], svgs[1]);
}
