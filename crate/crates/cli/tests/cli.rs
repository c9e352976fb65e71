use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use bovirial_cli::commands::{DECAY_CSV, FRONT_HEADER, LEDGER_CSV, VIRIAL_CSV, VIRIAL_HEADER, VIRIAL_UNIT_CSV};
use bovirial_cli::output::{verify, RawTable, Status, MANIFEST_FILE};
use bovirial_cli::{cmd_decay_scan, cmd_ineq_lab, cmd_report, cmd_run, cmd_virial_check};
use bovirial_core::virial::DecayRecord;

const GAUSSIAN: &str = r#"
[grid]
length = 100.0
points = 512

[time]
dt = 0.01
t_end = 0.5
cadence = 5

[initial]
kind = "gaussian"
amplitude = 1.0
width = 2.0
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn bovirial(args: &[&str], env_out: Option<&Path>) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bovirial"));
    cmd.args(args);
    match env_out {
        Some(p) => cmd.env("BOVIRIAL_OUT", p),
        None => cmd.env_remove("BOVIRIAL_OUT"),
    };
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn zero_data_gives_zero_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.toml",
        "[grid]\nlength = 10.0\npoints = 64\n[time]\ndt = 0.1\nt_end = 1.0\ncadence = 2\n[initial]\nkind = \"zero\"\n",
    );
    let out = dir.path().join("zero");
    cmd_run(&cfg, Some(&out)).unwrap();
    let ledger = RawTable::read(&out.join(LEDGER_CSV)).unwrap();
    assert_eq!(ledger.header, ["t", "I1", "I2", "I3"]);
    assert_eq!(ledger.rows.len(), 6);
    for c in ["I1", "I2", "I3"] {
        assert!(ledger.column(c).unwrap().iter().all(|&v| v == 0.0));
    }
    let m = verify(&out).unwrap();
    assert_eq!(m.status, Status::Complete);
    assert_eq!(m.inventory.iter().filter(|p| p.starts_with("snapshots/")).count(), 6);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", GAUSSIAN);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cmd_run(&cfg, Some(&a)).unwrap();
    cmd_run(&cfg, Some(&b)).unwrap();
    assert_eq!(fs::read(a.join(LEDGER_CSV)).unwrap(), fs::read(b.join(LEDGER_CSV)).unwrap());
    let snap = "snapshots/u_000010.bovf";
    assert_eq!(fs::read(a.join(snap)).unwrap(), fs::read(b.join(snap)).unwrap());
    let text = fs::read_to_string(a.join(LEDGER_CSV)).unwrap();
    assert!(!text.contains('\r') && !text.contains("NaN") && !text.contains("inf"));
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let run = |name: &str, text: &str| {
        let cfg = write_config(dir.path(), name, text);
        bovirial(&["run", "--config", cfg.to_str().unwrap(), "--out", out_s], None)
    };
    assert_eq!(run("typo.toml", &GAUSSIAN.replace("cadence", "cadense")), 2);
    assert_eq!(run("grid.toml", &GAUSSIAN.replace("512", "500")), 2);
    assert_eq!(bovirial(&["run", "--config", "/nonexistent.toml", "--out", out_s], None), 2);
    assert_eq!(bovirial(&["run"], None), 2);
    let coarse = "[grid]\nlength = 100.0\npoints = 64\n[time]\ndt = 0.01\nt_end = 0.1\n\
                  [initial]\nkind = \"gaussian\"\namplitude = 1.0\nwidth = 0.2\n";
    assert_eq!(run("coarse.toml", coarse), 4);
    let unstable = "[grid]\nlength = 20.0\npoints = 256\n[time]\ndt = 1.0\nt_end = 200.0\n\
                    [initial]\nkind = \"gaussian\"\namplitude = 5.0\nwidth = 1.0\n";
    assert_eq!(run("unstable.toml", unstable), 3);
    let m = verify(&out).unwrap();
    assert_eq!(m.status, Status::Failed);
    assert_eq!(m.exit_code, 3);
}

#[test]
fn scans_reject_inadmissible_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let cfg = write_config(dir.path(), "b.toml", &format!("{GAUSSIAN}\n[scan]\nb = 0.7\n"));
    assert_eq!(bovirial(&["decay-scan", "--config", cfg.to_str().unwrap(), "--out", out_s], None), 2);
    let m = verify(&out).unwrap();
    assert!(m.error.unwrap().contains("b = 0.7"));

    let cfg = write_config(dir.path(), "eta.toml", &format!("{GAUSSIAN}\n[scan]\neta = 0.0\n"));
    assert_eq!(bovirial(&["front-scan", "--config", cfg.to_str().unwrap(), "--out", out_s], None), 2);
    assert!(verify(&out).unwrap().error.unwrap().contains("eta"));
}

#[test]
fn decay_scan_schema_and_clamp_note() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[grid]
length = 400.0
points = 1024

[time]
dt = 0.05
t_end = 32.0
cadence = 20

[initial]
kind = "gaussian"
amplitude = -1.0
width = 2.0

[scan]
b = 0.3
"#;
    let cfg = write_config(dir.path(), "decay.toml", text);
    let out = dir.path().join("decay");
    let outcome = cmd_decay_scan(&cfg, Some(&out)).unwrap();
    let table = RawTable::read(&out.join(DECAY_CSV)).unwrap();
    assert_eq!(table.header, DecayRecord::HEADER);
    let t = table.column("t").unwrap();
    let t_min = (1.0f64 / 0.3).exp();
    assert!(t[0] >= t_min && t.windows(2).all(|w| w[1] > w[0]));
    let m = verify(&out).unwrap();
    assert!(m.notes.iter().any(|n| n.contains("clamped")), "{:?}", m.notes);
    assert!(outcome.messages.iter().any(|n| n.contains("C0 >")));
    let partial = table.column("lemma34_partial").unwrap();
    assert!(partial.windows(2).all(|w| w[1] >= w[0]));

    // Scanning the stored trajectory reproduces the fresh scan.
    let stored = write_config(
        dir.path(),
        "stored.toml",
        "[scan]\nb = 0.3\nsource = \"decay\"\n",
    );
    let again = dir.path().join("again");
    cmd_decay_scan(&stored, Some(&again)).unwrap();
    assert_eq!(fs::read(out.join(DECAY_CSV)).unwrap(), fs::read(again.join(DECAY_CSV)).unwrap());
}

#[test]
fn front_scan_schema() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[grid]
length = 400.0
points = 4096

[time]
dt = 0.05
t_end = 15.0
cadence = 50

[initial]
kind = "soliton"
speed = 1.0

[scan]
c0 = 2.0
"#;
    let cfg = write_config(dir.path(), "front.toml", text);
    let out = dir.path().join("front");
    let code = bovirial(&["front-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(code, 0);
    let table = RawTable::read(&out.join("front.csv")).unwrap();
    assert_eq!(table.header, FRONT_HEADER);
    let t = table.column("t").unwrap();
    assert!(t[0] >= 10.0);
    let edge = table.column("right_edge").unwrap();
    for (s, e) in t.iter().zip(&edge) {
        assert!((e - 2.0 * s).abs() < 1e-12);
    }
}

#[test]
fn virial_check_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[weights]\nkind = \"tanh\"\ncenter = 1.0\nwidth = 3.0\nspeed = 0.3\n",
        GAUSSIAN.replace("cadence = 5", "cadence = 2")
    );
    let cfg = write_config(dir.path(), "v.toml", &text);
    let out = dir.path().join("v");
    cmd_virial_check(&cfg, Some(&out)).unwrap();
    let table = RawTable::read(&out.join(VIRIAL_CSV)).unwrap();
    assert_eq!(table.header, VIRIAL_HEADER);
    assert!(table.rows.len() >= 20);
    assert!(table.rows.iter().all(|r| r.len() == VIRIAL_HEADER.len() && !r[8].is_empty()));
    assert!(table.column("relative_residual").unwrap().iter().all(|&r| r < 1e-3));
    let unit = RawTable::read(&out.join(VIRIAL_UNIT_CSV)).unwrap();
    for c in ["A1", "A2", "A3", "A4", "A5"] {
        assert!(unit.column(c).unwrap().iter().all(|v| v.abs() < 1e-12));
    }
    let short = write_config(dir.path(), "short.toml", &text.replace("cadence = 2", "cadence = 25"));
    let code = bovirial(&["virial-check", "--config", short.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(code, 2);
}

#[test]
fn ineq_lab_is_reproducible_and_seedable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lab.toml",
        "[grid]\nlength = 64.0\npoints = 128\n[scan]\nfamily_size = 6\nclaim_resolution = 200\n",
    );
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    cmd_ineq_lab(&cfg, Some(&a), None).unwrap();
    cmd_ineq_lab(&cfg, Some(&b), None).unwrap();
    cmd_ineq_lab(&cfg, Some(&c), Some(7)).unwrap();
    let read = |d: &Path| fs::read(d.join("constants.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let table = RawTable::read(&c.join("constants.csv")).unwrap();
    let seed = table.column_index("seed").unwrap();
    assert!(table.rows.iter().all(|r| r[seed] == "7"));
    let lemma = table.column_index("lemma").unwrap();
    let value = table.column_index("empirical_constant").unwrap();
    let claim = table.rows.iter().find(|r| r[lemma] == "claim_scan").unwrap();
    assert!(claim[value].parse::<f64>().unwrap() <= 1.0 + 1e-6);
}

#[test]
fn report_plots_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", GAUSSIAN);
    let out = dir.path().join("run");
    cmd_run(&cfg, Some(&out)).unwrap();
    let outcome = cmd_report(&out).unwrap();
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("I2 drift"));
    assert!(outcome.messages.len() > 3);
    let svg = fs::read_to_string(out.join("plots/ledger_I2.svg")).unwrap();
    assert!(svg.contains("<polyline"));
    let m = verify(&out).unwrap();
    assert!(m.inventory.iter().any(|p| p == "plots/ledger_I2.svg"));

    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    assert_eq!(bovirial(&["report", empty.to_str().unwrap()], None), 2);

    fs::remove_file(out.join(LEDGER_CSV)).unwrap();
    fs::write(out.join(MANIFEST_FILE), fs::read_to_string(out.join(MANIFEST_FILE)).unwrap().replace(
        "\"ledger.csv\",", "",
    ))
    .unwrap();
    assert_eq!(bovirial(&["report", out.to_str().unwrap()], None), 2);
}

#[test]
fn tampered_config_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", GAUSSIAN);
    let out = dir.path().join("run");
    cmd_run(&cfg, Some(&out)).unwrap();
    fs::write(out.join("config.toml"), GAUSSIAN.replace("1.0", "1.5")).unwrap();
    assert_eq!(bovirial(&["report", out.to_str().unwrap()], None), 2);
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", GAUSSIAN);
    let root = dir.path().join("root");
    assert_eq!(bovirial(&["run", "--config", cfg.to_str().unwrap(), "--threads", "2"], Some(&root)), 0);
    let entries: Vec<_> = fs::read_dir(&root).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let run_dir = entries[0].as_ref().unwrap().path();
    assert!(run_dir.file_name().unwrap().to_str().unwrap().starts_with("run-"));
    assert!(run_dir.join(LEDGER_CSV).exists());
}

#[test]
fn shipped_recipes_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let loaded = bovirial_cli::config::load(&path).unwrap();
        let c = &loaded.config;
        if c.time.is_some() {
            c.run_config(&dir).unwrap();
        }
        if c.weights.is_some() {
            c.weight().unwrap();
        }
        c.schedule_params().unwrap();
        c.fronts(1.0).unwrap();
        seen += 1;
    }
    assert_eq!(seen, 5);
}

#[test]
fn shipped_virial_recipe_runs() {
    let recipe = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/virial.toml");
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().join("v");
    bovirial_cli::commands::cmd_virial_check(&recipe, Some(&dir)).unwrap();
    let table = bovirial_cli::output::RawTable::read(&dir.join("virial.csv")).unwrap();
    let t = table.column("t").unwrap();
    assert!(!t.is_empty() && t.iter().all(|&s| s > 0.0));
    let rel = table.column("relative_residual").unwrap();
    assert!(rel.iter().all(|&r| r < 1e-3), "{rel:?}");
}
