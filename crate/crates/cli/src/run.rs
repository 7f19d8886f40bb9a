//! The `solve`, `sweep` and `check` commands.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use fracoc::conditions::{necessary_residuals, CandidateTriplet, Thresholds};
use fracoc::fracops::GridFn;
use fracoc::solver::{solve_with, FreeTimeCondition, Route, SolveOptions, SolveReport, END_OFFSET, GRADING};
use rayon::prelude::*;

use crate::config::{fmt_f, Problem, RunConfig};
use crate::output::{self, float, manifest, trajectory_csv};

const MAX_ITER: usize = 50;
const SEGMENTS: usize = 4;

fn options(cfg: &RunConfig, route: Route, k: usize, mesh: usize) -> SolveOptions {
    let mut o = SolveOptions::new(route, k, mesh, cfg.tol).t_guess(cfg.t_guess);
    o.max_iter = MAX_ITER;
    o.segments = SEGMENTS;
    o
}

/// One solve, with the reference error attached when the problem has one.
pub fn solve_one(cfg: &RunConfig, route: Route, k: usize, mesh: usize) -> Result<SolveReport> {
    let spec = cfg.problem.spec(cfg.order())?;
    let report = solve_with(&spec, &options(cfg, route, k, mesh))
        .with_context(|| format!("{} route, K = {k}, mesh = {mesh}", route.name()))?;
    Ok(match cfg.problem.reference(cfg.order()) {
        Some(r) => report.with_reference(r),
        None => report,
    })
}

fn solver_entries(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let spec = cfg.problem.spec(cfg.order())?;
    let fractional = spec.n_coef != 0.0;
    let cond = match FreeTimeCondition::default_for(&spec) {
        FreeTimeCondition::CostateVanishes => "costate_vanishes",
        FreeTimeCondition::Transversality => "transversality",
    };
    Ok(vec![
        ("max_iter".into(), MAX_ITER.to_string()),
        ("segments".into(), SEGMENTS.to_string()),
        ("end_offset".into(), fmt_f(if fractional { END_OFFSET } else { 0.0 })),
        ("grading".into(), fmt_f(if fractional { GRADING } else { 1.0 })),
        ("terminal_mode".into(), spec.terminal.name().into()),
        ("free_time_condition".into(), if spec.terminal.is_free_time() { cond } else { "none" }.into()),
    ])
}

fn report_entries(r: &SolveReport) -> Vec<(String, String)> {
    let p = r.route.name();
    vec![
        (format!("{p}.status"), "ok".into()),
        (format!("{p}.T"), float(r.t_final)),
        (format!("{p}.J"), float(r.cost)),
        (format!("{p}.E"), r.error_vs_reference.map_or("nan".into(), float)),
        (format!("{p}.boundary_residual"), float(r.boundary_residual_norm)),
        (format!("{p}.newton_iters"), r.newton_iters.to_string()),
        (format!("{p}.multiple_shooting"), r.multiple_shooting.to_string()),
    ]
}

/// Solves every requested route and writes trajectories, condition reports
/// and `manifest.txt` into `cfg.out`. A failed route still leaves a manifest.
pub fn solve(cfg: &RunConfig) -> Result<Vec<SolveReport>> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut entries = cfg.entries();
    entries.extend(solver_entries(cfg)?);
    let mut reports = Vec::new();
    let mut failure = None;
    for route in cfg.route.routes() {
        match solve_route(cfg, route) {
            Ok(r) => {
                entries.extend(report_entries(&r));
                reports.push(r);
            }
            Err(e) => {
                entries.push((format!("{}.status", route.name()), "failed".into()));
                entries.push((format!("{}.error", route.name()), format!("{e:#}").replace('\n', " ")));
                failure = Some(e);
                break;
            }
        }
    }
    entries.insert(0, ("status".into(), if failure.is_some() { "failed" } else { "ok" }.into()));
    output::write(&cfg.out.join("manifest.txt"), &manifest(&entries))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(reports),
    }
}

fn solve_route(cfg: &RunConfig, route: Route) -> Result<SolveReport> {
    let r = solve_one(cfg, route, cfg.k, cfg.mesh)?;
    let name = route.name();
    output::write(&cfg.out.join(format!("trajectory_{name}.csv")), &trajectory_csv(&r))?;
    let spec = cfg.problem.spec(cfg.order())?;
    let cand = CandidateTriplet::new(r.x.clone(), r.u.clone(), r.lambda.clone(), r.t_final)?;
    let cond = necessary_residuals(&spec, &cand)?;
    output::write(&cfg.out.join(format!("conditions_{name}.txt")), &format!("{cond}\n"))?;
    Ok(r)
}

/// A row of `sweep.csv`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub route: Route,
    pub k: usize,
    pub mesh: usize,
    pub outcome: Result<SolveReport, String>,
    pub runtime_s: f64,
}

impl SweepRow {
    fn e(&self) -> Option<f64> {
        self.outcome.as_ref().ok().and_then(|r| r.error_vs_reference)
    }
}

pub const SWEEP_HEADER: &str =
    "route,K,mesh,status,T,J,E,boundary_residual,newton_iters,multiple_shooting,e_drops_in_k,runtime_s";

/// Solves every `(route, K, mesh)` combination in parallel; rows keep the
/// nested loop order. Writes `sweep.csv` and `manifest.txt`.
pub fn sweep(cfg: &RunConfig, ks: &[usize], meshes: &[usize]) -> Result<Vec<SweepRow>> {
    if ks.is_empty() || meshes.is_empty() {
        bail!("sweep needs at least one K and one mesh");
    }
    for &k in ks {
        RunConfig { k, ..cfg.clone() }.validate()?;
    }
    for &mesh in meshes {
        RunConfig { mesh, ..cfg.clone() }.validate()?;
    }
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let jobs: Vec<(Route, usize, usize)> = cfg
        .route
        .routes()
        .into_iter()
        .flat_map(|r| ks.iter().flat_map(move |&k| meshes.iter().map(move |&m| (r, k, m))))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(route, k, mesh)| {
            let start = Instant::now();
            let outcome = solve_one(cfg, route, k, mesh).map_err(|e| format!("{e:#}"));
            SweepRow {
                route,
                k,
                mesh,
                outcome,
                runtime_s: start.elapsed().as_secs_f64(),
            }
        })
        .collect();

    let mut csv = format!("{}\n{SWEEP_HEADER}\n", output::CSV_VERSION);
    for row in &rows {
        let prev = rows
            .iter()
            .filter(|o| o.route == row.route && o.mesh == row.mesh && o.k < row.k)
            .max_by_key(|o| o.k);
        let drops = match (prev.and_then(SweepRow::e), row.e()) {
            (Some(p), Some(e)) => (e < p).to_string(),
            _ => String::new(),
        };
        let fields = match &row.outcome {
            Ok(r) => vec![
                "ok".into(),
                float(r.t_final),
                float(r.cost),
                r.error_vs_reference.map_or("nan".into(), float),
                float(r.boundary_residual_norm),
                r.newton_iters.to_string(),
                r.multiple_shooting.to_string(),
            ],
            Err(_) => {
                let mut f = vec!["failed".to_string()];
                f.extend(std::iter::repeat_n("nan".to_string(), 4));
                f.extend(["".into(), "".into()]);
                f
            }
        };
        csv.push_str(&format!(
            "{},{},{},{},{drops},{:.3}\n",
            row.route.name(),
            row.k,
            row.mesh,
            fields.join(","),
            row.runtime_s
        ));
    }
    output::write(&cfg.out.join("sweep.csv"), &csv)?;

    let mut entries = cfg.entries();
    entries.retain(|(k, _)| k != "K" && k != "mesh");
    entries.push(("K".into(), join(ks)));
    entries.push(("mesh".into(), join(meshes)));
    entries.extend(solver_entries(cfg)?);
    let failed: Vec<String> = rows
        .iter()
        .filter_map(|r| {
            r.outcome
                .as_ref()
                .err()
                .map(|e| format!("{} K={} mesh={}: {e}", r.route.name(), r.k, r.mesh))
        })
        .collect();
    entries.insert(0, ("status".into(), if failed.is_empty() { "ok" } else { "failed" }.into()));
    for (i, f) in failed.iter().enumerate() {
        entries.push((format!("error.{i}"), f.replace('\n', " ")));
    }
    output::write(&cfg.out.join("manifest.txt"), &manifest(&entries))?;
    if !failed.is_empty() {
        bail!("{} of {} sweep runs failed:\n{}", failed.len(), rows.len(), failed.join("\n"));
    }
    Ok(rows)
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Evaluates the necessary conditions on a trajectory CSV. Returns the
/// printable report and whether it passes `threshold`.
pub fn check(problem: &Problem, alpha: f64, candidate: &Path, threshold: f64) -> Result<(String, bool)> {
    let order = fracoc::fracops::Order::new(alpha)?;
    let spec = problem.spec(order)?;
    let c = output::read_candidate(candidate)?;
    let t_final = *c.t.last().expect("two rows");
    let cand = CandidateTriplet::new(
        GridFn::new(c.t.clone(), c.x)?,
        GridFn::new(c.t.clone(), c.u)?,
        GridFn::new(c.t, c.lambda)?,
        t_final,
    )?;
    let report = necessary_residuals(&spec, &cand)?;
    let thresholds = Thresholds {
        residual: threshold,
        ..Thresholds::default()
    };
    Ok((format!("T={}\n{report}", float(t_final)), report.passes(&thresholds)))
}
