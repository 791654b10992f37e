//! Monte Carlo comparison of the estimators: bias, variance and MSE per
//! design cell.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{stream_rng, EgtlParams};
use crate::error::{EgtlError, Result};
use crate::estimation::{
    default_init, fit_bayes, fit_em, fit_mle, fit_moments, BayesConfig, Dataset, FitResult, Method,
};
use crate::series::SeriesControl;

/// Share of failed replications above which a cell is flagged.
pub const FAILURE_FLAG_RATE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    pub sample_sizes: Vec<usize>,
    pub k_values: Vec<u32>,
    /// True `(p, theta)` settings.
    pub param_settings: Vec<(f64, f64)>,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub base_seed: u64,
    pub bayes: BayesConfig,
    pub series: SeriesControl,
}

impl Default for SimDesign {
    fn default() -> Self {
        SimDesign {
            sample_sizes: vec![20, 50, 100],
            k_values: vec![1, 2, 3],
            param_settings: vec![(0.5, 0.5), (0.7, 1.5), (0.3, 2.0)],
            replications: 1000,
            methods: vec![Method::MleDirect, Method::Moments, Method::Bayes],
            base_seed: 2024,
            bayes: BayesConfig::default(),
            series: SeriesControl::default(),
        }
    }
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(EgtlError::domain("replications must be at least 1"));
        }
        if self.methods.is_empty() || self.sample_sizes.is_empty() {
            return Err(EgtlError::domain(
                "design needs at least one method and sample size",
            ));
        }
        if self.sample_sizes.iter().any(|&n| n < 2) {
            return Err(EgtlError::domain("sample sizes must be at least 2"));
        }
        for &k in &self.k_values {
            for &(p, t) in &self.param_settings {
                EgtlParams::new(p, t, k)?;
            }
        }
        self.bayes.validate()
    }

    /// Cells in report order: sample size outermost, then `k`, then the
    /// parameter setting. `id` is the position in this order and seeds the
    /// samples, so every method sees the same samples within a cell.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.sample_sizes {
            for &k in &self.k_values {
                for &(p, theta) in &self.param_settings {
                    cells.push(Cell {
                        id: cells.len() as u64,
                        n,
                        k,
                        p,
                        theta,
                    });
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub id: u64,
    pub n: usize,
    pub k: u32,
    pub p: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub n: usize,
    pub k: u32,
    pub p: f64,
    pub theta: f64,
    pub method: Method,
    pub bias_p: f64,
    pub bias_theta: f64,
    pub var_p: f64,
    pub var_theta: f64,
    pub mse_p: f64,
    pub mse_theta: f64,
    pub replications: usize,
    pub failures: usize,
    /// More than 10% of the replications failed.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub replications: usize,
    pub base_seed: u64,
    pub records: Vec<CellRecord>,
}

impl SimulationReport {
    pub fn flagged(&self) -> impl Iterator<Item = &CellRecord> {
        self.records.iter().filter(|r| r.flagged)
    }

    pub fn find(
        &self,
        n: usize,
        k: u32,
        p: f64,
        theta: f64,
        method: Method,
    ) -> Option<&CellRecord> {
        self.records
            .iter()
            .find(|r| r.n == n && r.k == k && r.p == p && r.theta == theta && r.method == method)
    }
}

/// Stream index of replication `r` in cell `cell_id`.
pub fn replication_stream(cell_id: u64, r: usize) -> u64 {
    (cell_id << 32) | r as u64
}

/// The sample drawn for replication `r` of `cell`.
pub fn replication_sample(cell: &Cell, r: usize, base_seed: u64) -> Result<Dataset> {
    let params = EgtlParams::new(cell.p, cell.theta, cell.k)?;
    let mut rng = stream_rng(base_seed, replication_stream(cell.id, r));
    Dataset::new(params.sample_with_rng(cell.n, &mut rng), "simulated")
}

fn fit_with(method: Method, data: &Dataset, k: u32, design: &SimDesign) -> Result<FitResult> {
    match method {
        Method::MleDirect => fit_mle(data, k, None),
        Method::Em => fit_em(data, k, default_init(data, k)),
        Method::Moments => fit_moments(data, k, &design.series),
        Method::Bayes => fit_bayes(data, k, &design.bayes),
    }
}

/// Runs every replication of one cell for one method.
///
/// Replications run in parallel; estimates are assembled in replication
/// order so the record does not depend on scheduling. A replication whose
/// fit errors or does not converge counts as a failure and is excluded.
pub fn run_cell(
    cell: &Cell,
    method: Method,
    replications: usize,
    design: &SimDesign,
) -> Result<CellRecord> {
    let estimates: Vec<Option<(f64, f64)>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let data = replication_sample(cell, r, design.base_seed).ok()?;
            let fit = fit_with(method, &data, cell.k, design).ok()?;
            fit.converged.then(|| (fit.p(), fit.theta()))
        })
        .collect();
    let ok: Vec<(f64, f64)> = estimates.iter().flatten().copied().collect();
    let failures = replications - ok.len();
    let m = ok.len() as f64;

    let stats = |pick: fn(&(f64, f64)) -> f64, truth: f64| -> (f64, f64, f64) {
        if ok.is_empty() {
            return (f64::NAN, f64::NAN, f64::NAN);
        }
        let mean = ok.iter().map(pick).sum::<f64>() / m;
        let var = ok.iter().map(|e| (pick(e) - mean).powi(2)).sum::<f64>() / m;
        let mse = ok.iter().map(|e| (pick(e) - truth).powi(2)).sum::<f64>() / m;
        (mean - truth, var, mse)
    };
    let (bias_p, var_p, mse_p) = stats(|e| e.0, cell.p);
    let (bias_theta, var_theta, mse_theta) = stats(|e| e.1, cell.theta);
    Ok(CellRecord {
        n: cell.n,
        k: cell.k,
        p: cell.p,
        theta: cell.theta,
        method,
        bias_p,
        bias_theta,
        var_p,
        var_theta,
        mse_p,
        mse_theta,
        replications,
        failures,
        flagged: failures as f64 > FAILURE_FLAG_RATE * replications as f64,
    })
}

/// Runs the full grid. Records are ordered by sample size, `k`, parameter
/// setting, then method.
pub fn run_study(design: &SimDesign) -> Result<SimulationReport> {
    design.validate()?;
    let jobs: Vec<(Cell, Method)> = design
        .cells()
        .into_iter()
        .flat_map(|c| design.methods.iter().map(move |&m| (c, m)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|(cell, method)| run_cell(cell, *method, design.replications, design))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationReport {
        replications: design.replications,
        base_seed: design.base_seed,
        records,
    })
}

/// Text table with one row per `(n, k, setting)` and one column group per
/// method: bias, variance and MSE of `p` and `theta`.
pub fn render_method_columns(report: &SimulationReport) -> String {
    let mut methods: Vec<Method> = Vec::new();
    for r in &report.records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mut out = String::new();
    let _ = write!(out, "{:>5} {:>3} {:>12}", "n", "k", "(p; theta)");
    for m in &methods {
        let _ = write!(out, " | {:^65}", m.as_str());
    }
    out.push('\n');
    let _ = write!(out, "{:>5} {:>3} {:>12}", "", "", "");
    for _ in &methods {
        let _ = write!(
            out,
            " | {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "bias p", "var p", "mse p", "bias th", "var th", "mse th"
        );
    }
    out.push('\n');

    let mut seen: Vec<(usize, u32, u64, u64)> = Vec::new();
    for r in &report.records {
        let key = (r.n, r.k, r.p.to_bits(), r.theta.to_bits());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let _ = write!(
            out,
            "{:>5} {:>3} {:>12}",
            r.n,
            r.k,
            format!("({}; {})", r.p, r.theta)
        );
        for &m in &methods {
            match report.find(r.n, r.k, r.p, r.theta, m) {
                Some(c) => {
                    let _ = write!(
                        out,
                        " | {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                        c.bias_p, c.var_p, c.mse_p, c.bias_theta, c.var_theta, c.mse_theta
                    );
                    if c.flagged {
                        out.push('*');
                    }
                }
                None => {
                    let _ = write!(out, " | {:^65}", "-");
                }
            }
        }
        out.push('\n');
    }
    if report.flagged().next().is_some() {
        out.push_str("* more than 10% of replications failed\n");
    }
    out
}
