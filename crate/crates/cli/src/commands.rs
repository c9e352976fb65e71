//! Subcommand bodies. Each writes into its own experiment directory and
//! finalizes the manifest whether it succeeds or not.

use std::fs;
use std::path::{Path, PathBuf};

use bovirial_core::dynamics::{self, Snapshot, Trajectory};
use bovirial_core::lab::{run_lab, ConstantRow};
use bovirial_core::snapshot;
use bovirial_core::spectral::{derivative, norm, Field};
use bovirial_core::virial::{
    decay_records, front_mass, omega_mass, virial_breakdown, DecayRecord, Functionals, VirialBreakdown,
};
use bovirial_core::weights::{Constant, SpaceTimeWeight};

use crate::config::{self, LoadedConfig, WeightSection};
use crate::error::CliError;
use crate::output::{self, Cell, Experiment, RawTable, Table};
use crate::plot::{line_plot, PlotSpec};

pub const LEDGER_CSV: &str = "ledger.csv";
pub const DECAY_CSV: &str = "decay.csv";
pub const FRONT_CSV: &str = "front.csv";
pub const VIRIAL_CSV: &str = "virial.csv";
pub const VIRIAL_UNIT_CSV: &str = "virial_unit.csv";
pub const CONSTANTS_CSV: &str = "constants.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const PLOT_DIR: &str = "plots";

pub const LEDGER_HEADER: [&str; 4] = ["t", "I1", "I2", "I3"];
pub const FRONT_HEADER: [&str; 8] = [
    "t",
    "I2",
    "right_edge",
    "mass_right",
    "lp_right",
    "left_edge",
    "mass_left",
    "mass_omega",
];
pub const VIRIAL_HEADER: [&str; 10] = [
    "t",
    "A1",
    "A2",
    "A3",
    "A4",
    "A5",
    "rhs",
    "lhs_fd",
    "residual",
    "relative_residual",
];

/// Safety factor applied to the front-speed bound when `c0` is not configured.
pub const C0_MARGIN: f64 = 1.1;

/// Where a subcommand wrote its results, plus lines worth printing.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub dir: PathBuf,
    pub messages: Vec<String>,
}

fn execute(
    command: &str,
    config: &Path,
    out: Option<&Path>,
    body: impl FnOnce(&mut Experiment, &LoadedConfig, &mut Vec<String>) -> Result<(), CliError>,
) -> Result<Outcome, CliError> {
    let loaded = config::load(config)?;
    let id = output::experiment_id(command, &output::digest(loaded.text.as_bytes()));
    let dir = output::resolve_out(out, &id);
    let mut exp = Experiment::create(&dir, command, &loaded)?;
    let mut messages = Vec::new();
    let result = body(&mut exp, &loaded, &mut messages);
    exp.finish(&result)?;
    result.map(|()| Outcome { dir, messages })
}

fn base_dir(loaded: &LoadedConfig) -> PathBuf {
    loaded
        .path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}

fn snapshot_name(index: usize) -> String {
    format!("{SNAPSHOT_DIR}/u_{index:06}.bovf")
}

fn ledger_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(&LEDGER_HEADER);
    for row in &traj.ledger.rows {
        let i = row.invariants;
        t.push_numbers(&[row.t, i.mass, i.l2, i.energy]);
    }
    t
}

fn save_trajectory(exp: &mut Experiment, traj: &Trajectory) -> Result<(), CliError> {
    fs::create_dir_all(exp.path(SNAPSHOT_DIR))?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        let rel = snapshot_name(i);
        snapshot::save(&exp.path(&rel), &s.field, s.t)?;
        exp.record(&rel);
    }
    exp.write_table(LEDGER_CSV, &ledger_table(traj))
}

/// Loads the snapshots of a finished `run` directory.
pub fn load_trajectory(dir: &Path) -> Result<Trajectory, CliError> {
    let manifest = output::verify(dir)?;
    if manifest.status != output::Status::Complete {
        return Err(CliError::MissingData(format!(
            "{} did not complete (status {:?})",
            dir.display(),
            manifest.status
        )));
    }
    let stored = config::load(&dir.join(output::CONFIG_FILE))?;
    let run = stored.config.run_config(dir)?;
    let mut names: Vec<&String> = manifest
        .inventory
        .iter()
        .filter(|p| p.starts_with(SNAPSHOT_DIR))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::MissingData(format!("no snapshots in {}", dir.display())));
    }
    let mut snapshots = Vec::with_capacity(names.len());
    for name in names {
        let (field, t) = snapshot::load(&dir.join(name), Some(&run.grid))?;
        snapshots.push(Snapshot { t, field });
    }
    Ok(Trajectory::from_snapshots(run, snapshots)?)
}

/// Runs the configured evolution, or loads `[scan] source` when set.
fn trajectory(
    exp: &mut Experiment,
    loaded: &LoadedConfig,
    messages: &mut Vec<String>,
) -> Result<Trajectory, CliError> {
    if let Some(source) = &loaded.config.scan.source {
        let dir = base_dir(loaded).join(source);
        exp.note(format!("trajectory loaded from {}", dir.display()));
        messages.push(format!("scanning stored trajectory {}", dir.display()));
        return load_trajectory(&dir);
    }
    let run = loaded.config.run_config(&base_dir(loaded))?;
    let traj = dynamics::run(&run)?;
    save_trajectory(exp, &traj)?;
    Ok(traj)
}

/// Lower bound on the right-front speed `C0 = 3 c0` from the smallness
/// condition `2 (c2 ||u0||_{H^1})^k / ((k+2) c0) < 1`, with `c2 = 1/sqrt 2`
/// the sharp constant in `||u||_inf^2 <= ||u||_2 ||u'||_2 <= ||u||_{H^1}^2 / 2`.
pub fn front_speed_bound(u0: &Field, power: u32) -> Result<f64, CliError> {
    let l2 = norm(u0, 2.0)?;
    let d1 = norm(&derivative(u0, 1)?, 2.0)?;
    let h1 = (l2 * l2 + d1 * d1).sqrt();
    let k = power as i32;
    Ok(3.0 * 2.0 * (h1 / 2f64.sqrt()).powi(k) / (k + 2) as f64)
}

fn start_time(
    exp: &mut Experiment,
    traj: &Trajectory,
    requested: f64,
    minimum: f64,
    messages: &mut Vec<String>,
) -> f64 {
    let requested = requested.max(traj.config.t_start);
    let start = requested.max(minimum);
    if start > requested {
        let note = format!("scan start clamped from t = {requested} to t = {start}");
        exp.note(note.clone());
        messages.push(note);
    }
    start
}

fn decay_table(records: &[DecayRecord]) -> Table {
    let mut t = Table::new(&DecayRecord::HEADER);
    for r in records {
        t.push_numbers(&r.values());
    }
    t
}

fn c0_for(exp: &mut Experiment, loaded: &LoadedConfig, traj: &Trajectory, messages: &mut Vec<String>) -> Result<f64, CliError> {
    let bound = front_speed_bound(&traj.snapshots[0].field, traj.config.model.power())?;
    let note = format!("suggested right-front speed: C0 > {bound:.6}");
    exp.note(note.clone());
    messages.push(note);
    Ok(loaded.config.scan.c0.unwrap_or(C0_MARGIN * bound))
}

pub fn cmd_run(config: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    execute("run", config, out, |exp, loaded, messages| {
        let run = loaded.config.run_config(&base_dir(loaded))?;
        let traj = dynamics::run(&run)?;
        save_trajectory(exp, &traj)?;
        messages.push(format!(
            "{} snapshots to t = {}; I2 drift {:.3e}, I3 drift {:.3e}",
            traj.len(),
            traj.last().t,
            traj.ledger.l2_drift(),
            traj.ledger.energy_drift()
        ));
        Ok(())
    })
}

pub fn cmd_decay_scan(config: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    execute("decay-scan", config, out, |exp, loaded, messages| {
        let params = loaded.config.schedule_params()?;
        if let Some(note) = params.constraint_report() {
            exp.note(note.clone());
            messages.push(note);
        }
        let scan = &loaded.config.scan;
        let functionals = Functionals::new(params, scan.sigma, scan.delta)?;
        let traj = trajectory(exp, loaded, messages)?;
        let start = start_time(exp, &traj, scan.start, params.min_time(), messages);
        let c0 = c0_for(exp, loaded, &traj, messages)?;
        let fronts = loaded.config.fronts(c0)?;
        let records = decay_records(&traj, &functionals, &fronts, start)?;
        exp.write_table(DECAY_CSV, &decay_table(&records))?;
        messages.push(format!("{} decay records from t = {start}", records.len()));
        Ok(())
    })
}

pub fn cmd_front_scan(config: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    execute("front-scan", config, out, |exp, loaded, messages| {
        let scan = &loaded.config.scan;
        // Validate the front parameters before paying for a run.
        loaded.config.fronts(scan.c0.unwrap_or(1.0))?;
        if !(scan.p >= 2.0) {
            return Err(CliError::Config(format!("front exponent p must be >= 2, got {}", scan.p)));
        }
        let traj = trajectory(exp, loaded, messages)?;
        let start = start_time(exp, &traj, scan.start, 10.0, messages);
        let c0 = c0_for(exp, loaded, &traj, messages)?;
        let fronts = loaded.config.fronts(c0)?;
        let mut table = Table::new(&FRONT_HEADER);
        for s in traj.snapshots.iter().filter(|s| s.t >= start) {
            let u = &s.field;
            table.push_numbers(&[
                s.t,
                dynamics::invariants(u, traj.config.model).l2,
                fronts.right.edge(s.t),
                front_mass(u, s.t, &fronts.right, 2.0)?,
                front_mass(u, s.t, &fronts.right, scan.p)?,
                fronts.left.edge(s.t),
                front_mass(u, s.t, &fronts.left, 2.0)?,
                omega_mass(u, s.t, scan.omega_c, scan.omega_gamma, c0, scan.omega_inner_exponent)?,
            ]);
        }
        if table.rows.is_empty() {
            return Err(CliError::MissingData(format!("no snapshots at or after t = {start}")));
        }
        messages.push(format!("{} front rows from t = {start}", table.rows.len()));
        exp.write_table(FRONT_CSV, &table)
    })
}

fn virial_table(rows: &[VirialBreakdown]) -> Table {
    let mut t = Table::new(&VIRIAL_HEADER);
    for b in rows {
        let a = b.terms;
        t.push_numbers(&[
            b.t,
            a[0],
            a[1],
            a[2],
            a[3],
            a[4],
            b.rhs(),
            b.lhs_fd,
            b.residual,
            b.relative_residual(),
        ]);
    }
    t
}

fn breakdowns(traj: &Trajectory, weight: &dyn SpaceTimeWeight, after: f64) -> Result<Vec<VirialBreakdown>, CliError> {
    let n = traj.len();
    if n < 5 {
        return Err(CliError::Config(format!(
            "virial check needs at least 5 snapshots, got {n}; lower the cadence"
        )));
    }
    (2..n - 2)
        .filter(|&i| traj.snapshots[i - 2].t > after)
        .map(|i| Ok(virial_breakdown(traj, i, weight)?))
        .collect()
}

pub fn cmd_virial_check(config: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    execute("virial-check", config, out, |exp, loaded, messages| {
        let weight = loaded.config.weight()?;
        let after = match loaded.config.weights {
            Some(WeightSection::Left { .. }) => 1.0,
            // singular at t = 0
            Some(WeightSection::Right { .. }) => 0.0,
            _ => f64::NEG_INFINITY,
        };
        let traj = trajectory(exp, loaded, messages)?;
        let rows = breakdowns(&traj, weight.as_ref(), after)?;
        let unit = breakdowns(&traj, &Constant(1.0), f64::NEG_INFINITY)?;
        exp.write_table(VIRIAL_CSV, &virial_table(&rows))?;
        exp.write_table(VIRIAL_UNIT_CSV, &virial_table(&unit))?;
        let worst = rows.iter().map(VirialBreakdown::relative_residual).fold(0.0, f64::max);
        messages.push(format!("{} breakdowns; max relative residual {worst:.3e}", rows.len()));
        if matches!(loaded.config.weights, Some(WeightSection::Right { .. })) {
            let positive = rows.iter().filter(|b| b.terms[1] > 0.0).count();
            messages.push(format!("A2 > 0 on {positive} of {} rows", rows.len()));
        }
        Ok(())
    })
}

fn constants_table(rows: &[ConstantRow]) -> Table {
    let mut t = Table::new(&ConstantRow::HEADER);
    for r in rows {
        t.push(vec![
            Cell::Text(r.lemma.clone()),
            Cell::Int(r.family_size as u64),
            Cell::Int(r.seed),
            Cell::Num(r.constant),
            Cell::Num(r.refinement_change),
            Cell::Int(r.wrapped as u64),
        ]);
    }
    t
}

pub fn cmd_ineq_lab(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<Outcome, CliError> {
    execute("ineq-lab", config, out, |exp, loaded, messages| {
        let lab = loaded.config.lab(seed);
        exp.note(format!("family seed {}", lab.seed));
        let rows = run_lab(&lab)?;
        for r in &rows {
            messages.push(format!("{}: {:.6}", r.lemma, r.constant));
        }
        exp.write_table(CONSTANTS_CSV, &constants_table(&rows))
    })
}

/// Relative drift `max |x - x0| / |x0|`, absolute when `x0 = 0`.
fn drift(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else {
        return 0.0;
    };
    let scale = if first != 0.0 { first.abs() } else { 1.0 };
    values.iter().map(|v| (v - first).abs() / scale).fold(0.0, f64::max)
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

/// Final increment of the accumulator per unit `log log t`, and the mass at
/// the first row as the stationary reference.
pub fn accumulator_slopes(t: &[f64], partial: &[f64], mass: &[f64]) -> Option<(f64, f64)> {
    let n = t.len();
    if n < 2 || partial.len() != n || mass.is_empty() {
        return None;
    }
    let ll = |s: f64| s.ln().ln();
    let slope = (partial[n - 1] - partial[n - 2]) / (ll(t[n - 1]) - ll(t[n - 2]));
    Some((slope, mass[0]))
}

const REPORT_TABLES: [(&str, bool); 5] = [
    (LEDGER_CSV, false),
    (DECAY_CSV, true),
    (FRONT_CSV, true),
    (VIRIAL_CSV, false),
    (VIRIAL_UNIT_CSV, false),
];

/// Plots every series of a finished experiment and writes the summary.
pub fn cmd_report(dir: &Path) -> Result<Outcome, CliError> {
    if !dir.is_dir() {
        return Err(CliError::MissingData(format!("{} is not a directory", dir.display())));
    }
    let mut exp = Experiment::reopen(dir)?;
    let mut summary = vec![format!("experiment {}", exp.manifest.experiment)];
    let mut found = 0;
    for (name, log_x) in REPORT_TABLES {
        let path = dir.join(name);
        if !path.exists() {
            continue;
        }
        found += 1;
        let table = RawTable::read(&path)?;
        let stem = name.trim_end_matches(".csv");
        let t = table
            .column("t")
            .ok_or_else(|| CliError::MissingData(format!("{name} has no numeric t column")))?;
        summary.push(format!("[{stem}] {} rows", t.len()));
        for column in table.header.iter().filter(|h| *h != "t") {
            let Some(values) = table.column(column) else {
                continue;
            };
            let rel = format!("{PLOT_DIR}/{stem}_{column}.svg");
            let spec = PlotSpec {
                title: &format!("{column} ({stem})"),
                x_label: "t",
                y_label: column,
                log_x,
                log_y: false,
            };
            fs::create_dir_all(exp.path(PLOT_DIR))?;
            fs::write(exp.path(&rel), line_plot(&spec, &t, &values))?;
            exp.record(&rel);
            let (lo, hi) = min_max(&values);
            summary.push(format!("  {column}: min {} max {}", output::fmt_f64(lo), output::fmt_f64(hi)));
        }
        match name {
            LEDGER_CSV => {
                for c in ["I1", "I2", "I3"] {
                    if let Some(v) = table.column(c) {
                        summary.push(format!("  {c} drift: {:.3e}", drift(&v)));
                    }
                }
            }
            DECAY_CSV => {
                if let (Some(p), Some(m)) = (table.column("lemma34_partial"), table.column("mass_ball")) {
                    if let Some((slope, reference)) = accumulator_slopes(&t, &p, &m) {
                        let verdict = if slope < reference { "below" } else { "not below" };
                        summary.push(format!(
                            "  decay accumulator final slope {slope:.6e} is {verdict} the stationary reference {reference:.6e}"
                        ));
                    }
                }
            }
            VIRIAL_CSV => {
                if let Some(r) = table.column("relative_residual") {
                    summary.push(format!("  max relative residual: {:.3e}", min_max(&r).1));
                }
            }
            _ => {}
        }
    }
    let constants = dir.join(CONSTANTS_CSV);
    if constants.exists() {
        found += 1;
        let table = RawTable::read(&constants)?;
        summary.push(format!("[constants] {} rows", table.rows.len()));
        let (lemma, value) = (table.column_index("lemma"), table.column_index("empirical_constant"));
        if let (Some(l), Some(v)) = (lemma, value) {
            for row in &table.rows {
                summary.push(format!("  {}: {}", row[l], row[v]));
            }
        }
    }
    if found == 0 {
        return Err(CliError::MissingData(format!("no result CSVs in {}", dir.display())));
    }
    let text = summary.join("\n") + "\n";
    fs::write(exp.path(SUMMARY_TXT), &text)?;
    exp.record(SUMMARY_TXT);
    exp.write_manifest()?;
    Ok(Outcome {
        dir: dir.to_path_buf(),
        messages: summary,
    })
}
