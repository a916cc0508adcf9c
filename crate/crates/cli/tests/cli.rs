use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shocklab_core::io::read_snapshot;

fn shocklab(args: &[&str], dir: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shocklab"));
    cmd.args(args).current_dir(dir).env_remove("SHOCKLAB_THREADS");
    if let Some(n) = threads {
        cmd.env("SHOCKLAB_THREADS", n);
    }
    cmd.output().expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_SIMULATION: &str = "\
flux.kind = burgers
flux.dim = 2
pair.u_minus = 1
pair.u_plus = -1
perturbation.shape = cosine
perturbation.center = [-1, 0]
perturbation.radius = 1
perturbation.amplitude = -0.4
grid.counts = [32, 48]
grid.dx = 0.125
experiment.horizon = 1
experiment.snapshot_every = 0.5
";

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shocklab(&["frobnicate"], tmp.path(), None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cone_prints_the_quarter_turn_sector() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "b.cfg", "flux.kind = burgers\nflux.dim = 2\npair.u_minus = 1\npair.u_plus = -1\n");
    let out = shocklab(&["cone", "--config", &cfg], tmp.path(), None);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let sector = stdout.lines().find(|l| l.starts_with("sector,")).expect("sector row");
    let bounds: Vec<f64> = sector.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    let quarter = std::f64::consts::FRAC_PI_4;
    assert!((bounds[0] + quarter).abs() < 2e-4 && (bounds[1] - quarter).abs() < 2e-4, "{sector}");
    assert!(stdout.lines().any(|l| l.starts_with("w,")));
}

#[test]
fn reversed_pair_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "bad.cfg", "flux.kind = burgers\npair.u_minus = -1\npair.u_plus = 1\n");
    let out = shocklab(&["stability", "--config", &cfg], tmp.path(), None);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn misspelled_key_and_bad_thread_count_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "typo.cfg", "grid.cout = [8, 8]\n");
    assert_eq!(shocklab(&["simulate", "--config", &cfg], tmp.path(), None).status.code(), Some(2));
    assert_eq!(shocklab(&["cone"], tmp.path(), Some("0")).status.code(), Some(2));
    assert_eq!(shocklab(&["cone", "--set", "cone.samples"], tmp.path(), None).status.code(), Some(2));
}

#[test]
fn simulate_writes_outputs_independent_of_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "sim.cfg", SMALL_SIMULATION);
    let mut runs = Vec::new();
    for threads in ["1", "3"] {
        let dir = format!("out{threads}");
        let set = format!("output.dir={dir}");
        let out = shocklab(&["simulate", "--config", &cfg, "--set", &set], tmp.path(), Some(threads));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        runs.push(tmp.path().join(dir));
    }
    for name in ["trajectory.csv", "final.shkw", "snap_0000.shkw", "verdict.txt"] {
        let a = fs::read(runs[0].join(name)).unwrap();
        let b = fs::read(runs[1].join(name)).unwrap();
        assert!(a == b, "{name} differs between worker counts");
    }
    let verdict = fs::read_to_string(runs[0].join("verdict.txt")).unwrap();
    assert!(verdict.contains("all_pass: true"), "{verdict}");
    let (field, t) = read_snapshot(&runs[0].join("final.shkw")).unwrap();
    assert_eq!(t, 1.0);
    assert_eq!(field.grid().counts(), &[32, 48]);
    let csv = fs::read_to_string(runs[0].join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,sup,inf,mass,l1_to_base,outflux\n"));
}

#[test]
fn written_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "sim.cfg", SMALL_SIMULATION);
    let first = shocklab(&["simulate", "--config", &cfg, "--set", "output.dir=a"], tmp.path(), None);
    assert_eq!(first.status.code(), Some(0));
    let echoed = tmp.path().join("a/config.txt").to_string_lossy().into_owned();
    let second = shocklab(&["simulate", "--config", &echoed, "--set", "output.dir=b"], tmp.path(), None);
    assert_eq!(second.status.code(), Some(0));
    let a = fs::read(tmp.path().join("a/final.shkw")).unwrap();
    let b = fs::read(tmp.path().join("b/final.shkw")).unwrap();
    assert!(a == b);
}

#[test]
fn unfinished_convergence_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "sim.cfg", SMALL_SIMULATION);
    let out = shocklab(&["stability", "--config", &cfg, "--set", "output.dir=st"], tmp.path(), None);
    let verdict = fs::read_to_string(tmp.path().join("st/verdict.txt")).unwrap();
    assert_eq!(out.status.code(), Some(1), "{verdict}");
    assert!(verdict.contains("convergence_to_limit.pass: false"), "{verdict}");
    assert!(tmp.path().join("st/stability.csv").exists());
}

#[test]
fn normalize_check_needs_burgers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "n.cfg", "flux.kind = poly\nflux.poly = [[0, 1, 1], [0, 0, 0, 1]]\n");
    let out = shocklab(&["normalize-check", "--config", &cfg], tmp.path(), None);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
