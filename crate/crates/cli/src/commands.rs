//! Subcommands. Each writes its artifacts under the output directory and
//! returns the overall status, which `main` maps to the exit code.

use std::path::{Path, PathBuf};

use serde::Serialize;

use cryamabe::bubbles::probe_cloud;
use cryamabe::cayley::{pushforward_w_check, rossi_direction};
use cryamabe::deform::rossi_phi;

use crate::checks::{self, Env};
use crate::report::{overall, write_file, Check, Report, Status};
use crate::CliError;

pub struct Outcome {
    pub status: Status,
    pub summary: String,
    pub written: Vec<PathBuf>,
}

fn finish<T: Serialize>(report: Report<T>, path: PathBuf, mut written: Vec<PathBuf>) -> Result<Outcome, CliError> {
    report.write(&path)?;
    written.push(path);
    Ok(Outcome { status: report.status, summary: report.summary(), written })
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}

pub fn calibrate(env: &Env, out: &Path, kappa: Option<f64>) -> Result<Outcome, CliError> {
    let (checks, data) = checks::functional_constant(env, kappa);
    let report = Report::new("calibrate", env.cfg.hash(), env.seed, checks, data);
    finish(report, out.join("calibration.json"), vec![])
}

pub fn verify(env: &Env, out: &Path, suite: &str) -> Result<Outcome, CliError> {
    let names: Vec<&str> = if suite == "all" { checks::SUITES.to_vec() } else { vec![suite] };
    let mut all = Vec::new();
    for name in names {
        let cs = checks::run_suite(env, name).ok_or_else(|| {
            CliError::Usage(format!("unknown suite '{name}'; expected one of {:?} or 'all'", checks::SUITES))
        })?;
        all.extend(cs.into_iter().map(|mut c| {
            c.name = format!("{name}.{}", c.name);
            c
        }));
    }
    let report = Report::new("verify", env.cfg.hash(), env.seed, all, suite.to_string());
    finish(report, out.join(format!("verify-{suite}.json")), vec![])
}

pub fn expansion(env: &Env, out: &Path) -> Result<Outcome, CliError> {
    let table = checks::expansion_table(env)?;
    let csv_path = out.join("expansion.csv");
    write_file(&csv_path, &csv_bytes(&table.rows)?)?;
    let cs = checks::expansion_checks(env, &table);
    let report = Report::new("expansion", env.cfg.hash(), env.seed, cs, table);
    finish(report, out.join("expansion.json"), vec![csv_path])
}

pub fn scan(env: &Env, out: &Path) -> Result<Outcome, CliError> {
    let (ctx, fine) = checks::contexts(env)?;
    let rep = checks::scan(env, &ctx, &fine, &env.cfg.window)?;
    let csv_path = out.join("landscape.csv");
    write_file(&csv_path, &csv_bytes(&rep.cells)?)?;
    let cs = checks::scan_checks(&rep);
    let report = Report::new("scan", env.cfg.hash(), env.seed, cs, (&rep.window, &rep.verdict));
    finish(report, out.join("verdict.json"), vec![csv_path])
}

#[derive(Serialize)]
struct CayleyRow {
    x: f64,
    y: f64,
    t: f64,
    z_error: f64,
    spurious: f64,
    rossi_ratio_error: f64,
}

pub fn cayley_check(env: &Env, out: &Path, points: usize) -> Result<Outcome, CliError> {
    let s = 0.3;
    let mut rows = Vec::with_capacity(points);
    for p in probe_cloud(points, env.seed ^ 0xca1, 2.0) {
        let r = pushforward_w_check(&p)?;
        let (q, _) = rossi_direction(&p, s)?;
        rows.push(CayleyRow {
            x: p.x,
            y: p.y,
            t: p.t,
            z_error: r.z_error() / r.predicted.norm(),
            spurious: r.spurious(),
            rossi_ratio_error: (q + s * rossi_phi(&p)).norm(),
        });
    }
    let csv_path = out.join("cayley.csv");
    write_file(&csv_path, &csv_bytes(&rows)?)?;
    let tol = env.tol.get("cayley_spurious");
    let max = |f: fn(&CayleyRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let cs = vec![
        Check::below("pushforward_spurious", max(|r| r.spurious), tol),
        Check::below("pushforward_z_rel_error", max(|r| r.z_error), tol),
        Check::below("rossi_ratio_minus_s_phi", max(|r| r.rossi_ratio_error), tol),
    ];
    debug_assert!(overall(&cs) != Status::Inconclusive);
    let report = Report::new("cayley-check", env.cfg.hash(), env.seed, cs, points);
    finish(report, out.join("cayley.json"), vec![csv_path])
}
