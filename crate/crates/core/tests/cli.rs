use std::path::Path;
use std::process::{Command, Output};

use gfield::harness::{preset, TheoremReport};
use gfield::sampler::io::read_binary;
use gfield::sampler::GridSpec;

fn gfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfield")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, edit: impl FnOnce(&mut gfield::harness::ExperimentConfig)) -> String {
    let mut c = preset("fbm-h05").unwrap();
    c.grid = GridSpec::interval(0.0, 1.0, 2049).unwrap();
    c.seeds = vec![1];
    c.pairs_per_rho = 500;
    c.frostman = None;
    edit(&mut c);
    let path = dir.join(name);
    std::fs::write(&path, c.to_json().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_passes_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.json", |c| c.tolerances.graph = Some(0.2));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = gfield(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ra = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap());
    let report = TheoremReport::from_json(std::str::from_utf8(&ra).unwrap()).unwrap();
    assert!(report.passed && report.verdicts_consistent());
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // A zero tolerance on a 2049-point grid cannot hit 1.5 exactly.
    let cfg = write_config(dir.path(), "tight.json", |c| c.tolerances.graph = Some(0.0));
    let o = gfield(&["verify", "--config", &cfg, "--format", "csv"]);
    assert_eq!(code(&o), 1);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("scope,t0,seed,check,value,lo,hi,tol,pass\n"));
    assert!(csv.lines().any(|l| l.starts_with("aggregate,") && l.ends_with(",false")));
    // The dimension subcommand reports the same failure without the exit status.
    assert_eq!(code(&gfield(&["dimension", "--config", &cfg, "--format", "csv"])), 0);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "empty.json", |c| c.t0_list.clear());
    assert_eq!(code(&gfield(&["verify", "--config", &empty])), 2);
    let schema = write_config(dir.path(), "schema.json", |c| c.schema = 7);
    assert_eq!(code(&gfield(&["exponent", "--config", &schema])), 2);
    assert_eq!(code(&gfield(&["verify", "--preset", "no-such-preset"])), 2);
    assert_eq!(code(&gfield(&["verify"])), 2);
    assert_eq!(code(&gfield(&["verify", "--preset", "fbm-h05", "--format", "yaml"])), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&gfield(&["verify", "--config", missing.to_str().unwrap()])), 2);
}

#[test]
fn budget_and_io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.json");
    let mut c = preset("mpfbm-h04").unwrap();
    c.grid.resolution = vec![128, 128];
    std::fs::write(&big, c.to_json().unwrap()).unwrap();
    let o = gfield(&["dimension", "--config", big.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let missing = dir.path().join("nothing.json");
    assert_eq!(code(&gfield(&["report", "--input", missing.to_str().unwrap()])), 3);
}

#[test]
fn simulate_writes_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = gfield(&["simulate", "--preset", "gw-const", "--seed", "9", "--out", out, "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("path_s9.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t1,x1"));
    assert_eq!(csv.lines().count(), (1 << 15) + 2);
    let path = read_binary(std::fs::File::open(dir.path().join("path_s9.gfl")).unwrap()).unwrap();
    assert_eq!(path.seed, 9);
    assert_eq!(path.len(), (1 << 15) + 1);
}

#[test]
fn report_reemits_saved_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&gfield(&["exponent", "--preset", "mpfbm-h025", "--out", out])), 0);
    let plots = dir.path().join("plots");
    let input = dir.path().join("report.json");
    let o = gfield(&["report", "--input", input.to_str().unwrap(), "--format", "plotdata", "--out", plots.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let table = std::fs::read_to_string(plots.join("ratios_t0_s0.dat")).unwrap();
    assert!(table.starts_with("# rho inf_ratio sup_ratio\n"));
    assert_eq!(table.lines().count(), 2);
}
