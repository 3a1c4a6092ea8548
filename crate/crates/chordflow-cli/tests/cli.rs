//! End-to-end checks of the chordflow binary: exit codes, output files,
//! and byte-level determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chordflow"))
}

fn write(path: &Path, text: &str) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, text).unwrap();
}

const SMALL_RUN: &str = "\
[run]
model = quartic
hbar = 0.05
t = 0.3
ode_tol = 1e-10
newton_tol = 1e-9

[leaf]
kind = circle
center_p = 1.1
center_q = 0.0
radius = 0.8
n_samples = 192

[region]
p_min = 0.3
p_max = 1.9
q_min = -0.8
q_max = 0.8
resolution = 12
";

#[test]
fn propagate_smoke_and_determinism() {
    let dir = std::env::temp_dir().join("chordflow_cli_prop");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = dir.join("run.cfg");
    write(&cfg, SMALL_RUN);

    for out in ["a", "b"] {
        let status = bin()
            .args(["propagate", "--config"])
            .arg(&cfg)
            .args(["--out"])
            .arg(dir.join(out))
            .args(["--threads", "1"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["propagation_report.csv", "wt_field.csv", "wt_field.pgm"] {
        let a = std::fs::read(dir.join("a").join(name)).unwrap();
        let b = std::fs::read(dir.join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} not byte-identical");
        assert!(!a.is_empty());
    }
    let manifest = std::fs::read_to_string(dir.join("a").join("manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"ok\""));
    assert!(manifest.contains("config_sha256"));

    // t = 0 reproduces the initial field: wt_field equals a fresh t=0 run
    let cfg0 = dir.join("run0.cfg");
    write(&cfg0, &SMALL_RUN.replace("t = 0.3", "t = 0.0"));
    let status = bin()
        .args(["propagate", "--config"])
        .arg(&cfg0)
        .args(["--out"])
        .arg(dir.join("zero"))
        .status()
        .unwrap();
    assert!(status.success());
    let report = std::fs::read_to_string(dir.join("zero").join("propagation_report.csv")).unwrap();
    for line in report.lines().skip(1).take(20) {
        let cols: Vec<&str> = line.split(',').collect();
        let s0: f64 = cols[4].parse().unwrap();
        let st: f64 = cols[5].parse().unwrap();
        assert!((s0 - st).abs() < 1e-12, "t=0 must leave the action unchanged");
    }
}

#[test]
fn invalid_model_exits_2() {
    let dir = std::env::temp_dir().join("chordflow_cli_badmodel");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = dir.join("run.cfg");
    write(&cfg, &SMALL_RUN.replace("quartic", "kepler"));
    let status = bin()
        .args(["propagate", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_key_exits_2() {
    let dir = std::env::temp_dir().join("chordflow_cli_badkey");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = dir.join("run.cfg");
    write(&cfg, &format!("{SMALL_RUN}\nmystery = 1\n"));
    let status = bin()
        .args(["propagate", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn compare_requires_oracle_flag() {
    let dir = std::env::temp_dir().join("chordflow_cli_cmp_flag");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = dir.join("run.cfg");
    write(&cfg, SMALL_RUN); // engines.oracle defaults to false
    let out = bin()
        .args(["compare", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // manifest still written, with the failure site recorded
    let manifest = std::fs::read_to_string(dir.join("out").join("manifest.json")).unwrap();
    assert!(manifest.contains("config-error"));
}

#[test]
fn caustic_map_on_circle_degenerates_to_center() {
    let dir = std::env::temp_dir().join("chordflow_cli_caustic");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        &SMALL_RUN.replace("t = 0.3", "t = 0.0").replace("resolution = 12", "resolution = 8"),
    );
    let status = bin()
        .args(["caustic-map", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let trace = std::fs::read_to_string(dir.join("out").join("caustic_trace.csv")).unwrap();
    // every locus point is the circle center (1.1, 0)
    for line in trace.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((cols[0] - 1.1).abs() < 1e-5 && cols[1].abs() < 1e-5);
    }
    assert!(dir.join("out").join("chord_counts.pgm").exists());
}

#[test]
fn quartic_bench_passes_and_rejects_zero_specs() {
    let dir = std::env::temp_dir().join("chordflow_cli_bench");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        "[run]\nmodel = quartic\nhbar = 1.0\n[leaf]\nradius = 1.0\n[bench]\nn_specs = 40\nscaling_n = 5\n",
    );
    let status = bin()
        .args(["quartic-bench", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.join("out").join("quartic_bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41); // header + 40 rows
    assert!(dir.join("out").join("scaling_probe.csv").exists());

    let cfg0 = dir.join("zero.cfg");
    write(
        &cfg0,
        "[run]\nmodel = quartic\nhbar = 1.0\n[leaf]\nradius = 1.0\n[bench]\nn_specs = 0\n",
    );
    let status = bin()
        .args(["quartic-bench", "--config"])
        .arg(&cfg0)
        .args(["--out"])
        .arg(dir.join("out0"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let cfg_h = dir.join("harm.cfg");
    write(
        &cfg_h,
        "[run]\nmodel = harmonic\nhbar = 1.0\n[leaf]\nradius = 1.0\n",
    );
    let status = bin()
        .args(["quartic-bench", "--config"])
        .arg(&cfg_h)
        .args(["--out"])
        .arg(dir.join("outh"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
