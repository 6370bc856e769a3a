use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const SMALL: &str = r#"
name = "small"
seed = 9

[[filter]]
name = "pm"
kind = "pm"
stopband_atten_db = 60

[[scheme]]
name = "D8PSK"
modulation = "d8psk"
order = 8
code = "uncoded"
ebn0_db = [8.0, 10.0]
baseline = true

[[scheme]]
name = "16-QAM"
modulation = "qam"
order = 16
code = "uncoded"
ebn0_db = [8.0, 10.0]

[ber]
max_bits = 200000

[papr]
frames = 10000
"#;

fn avdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avdl")).args(args).env_remove("AVDL_OUT_DIR").output().unwrap()
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_command_prints_usage() {
    let o = avdl(&["transmogrify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn missing_scenario_is_config_error() {
    assert_eq!(avdl(&["ber"]).status.code(), Some(2));
    let o = avdl(&["ber", "--scenario", "/nonexistent/x.scenario"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unsupported_order_lists_supported() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "m128.scenario", &SMALL.replace("order = 16", "order = 128"));
    let o = avdl(&["ber", "--scenario", &sc, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("128") && e.contains("qam 16/32/64/256"), "{e}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unbracketed_curve_is_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("[8.0, 10.0]", "[0.0, 1.0]");
    let sc = write_scenario(dir.path(), "low.scenario", &text);
    let o = avdl(&["lm-table", "--quiet", "--scenario", &sc, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("insufficient data"));
}

#[test]
fn design_failure_is_simulation_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("stopband_atten_db = 60", "stopband_atten_db = 150\nspan = 4");
    let sc = write_scenario(dir.path(), "bad.scenario", &text);
    let o = avdl(&["papr", "--quiet", "--scenario", &sc, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("design failed"));
}

#[test]
fn csv_identical_across_jobs_and_manifest_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "small.scenario", SMALL);
    let mut csvs = Vec::new();
    for jobs in ["1", "3"] {
        let out = dir.path().join(format!("j{jobs}"));
        let o = avdl(&["ber", "--quiet", "--jobs", jobs, "--scenario", &sc, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let csv = fs::read(out.join("ber.csv")).unwrap();
        let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
        let digest = format!("{:x}", Sha256::digest(&csv));
        assert!(manifest.contains(&format!("sha256 ber.csv = {digest}")), "{manifest}");
        let sc_digest = format!("{:x}", Sha256::digest(SMALL.as_bytes()));
        assert!(manifest.contains(&format!("scenario_sha256 = {sc_digest}")));
        assert!(manifest.contains("seed = 9"));
        assert!(manifest.contains(&format!("threads = {jobs}")));
        csvs.push(csv);
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(String::from_utf8_lossy(&csvs[0]).starts_with("scheme,"));
}

#[test]
fn seed_flag_overrides_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "small.scenario", SMALL);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = avdl(&["papr", "--quiet", "--seed", seed, "--scenario", &sc, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        fs::read(out.join("papr.csv")).unwrap()
    };
    assert_eq!(run("9", "a"), run("9", "b"));
    assert_ne!(run("9", "c"), run("10", "d"));
}

#[test]
fn refuses_to_clobber_foreign_directory() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "small.scenario", SMALL);
    let out = dir.path().join("taken");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("precious.txt"), "keep").unwrap();
    let o = avdl(&["papr", "--quiet", "--scenario", &sc, "--out", out.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(out.join("precious.txt")).unwrap(), "keep");
}

#[test]
fn default_out_dir_follows_env() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "small.scenario", SMALL);
    let o = Command::new(env!("CARGO_BIN_EXE_avdl"))
        .args(["papr", "--quiet", "--scenario", &sc])
        .env("AVDL_OUT_DIR", dir.path().join("runs"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("runs/small-papr/papr.csv").exists());
}

#[test]
fn bundled_scenarios_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(scenarios_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().and_then(|e| e.to_str()) != Some("scenario") {
            continue;
        }
        let sc = avdl_cli::scenario::validate_scenario(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        if sc.name.starts_with("table1") || sc.name == "fig9" {
            assert_eq!(sc.schemes.len(), 10, "{}", sc.name);
            assert!(sc.schemes[0].baseline);
        }
        seen += 1;
    }
    assert!(seen >= 13);
}

#[test]
fn complexity_command_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let sc = scenarios_dir().join("fig13.scenario");
    let o = avdl(&["complexity", "--quiet", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("complexity.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("N,analytic_conventional,analytic_scfdma,measured_mults_conventional,measured_mults_scfdma")
    );
    assert!(lines.next().unwrap().starts_with("16,320,"));
}
