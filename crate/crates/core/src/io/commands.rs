use crate::distribution::EgtlParams;
use crate::error::{EgtlError, Result};
use crate::estimation::{
    default_init, fit_bayes, fit_em, fit_mle, fit_moments, BayesConfig, FitResult, Method,
};
use crate::gof::{model_selection_table, GofReport, P_VALUE_METHOD};
use crate::series::SeriesControl;
use crate::simulation::{run_study, SimDesign, SimulationReport};

use super::{load_dataset, Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Table,
}

impl std::str::FromStr for OutputFormat {
    type Err = EgtlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "table" => Ok(OutputFormat::Table),
            other => Err(EgtlError::domain(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Fit {
        data: String,
        k: u32,
        method: Method,
        init: Option<(f64, f64)>,
        bayes: BayesConfig,
    },
    Gof {
        data: String,
        k_max: u32,
    },
    Simulate {
        design: SimDesign,
    },
    Sample {
        params: EgtlParams,
        n: usize,
    },
    Curve {
        params: EgtlParams,
        points: usize,
        x_max: Option<f64>,
    },
}

/// A fully parsed invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub format: OutputFormat,
    pub seed: u64,
    pub series: SeriesControl,
}

/// Rendered output plus the exit status and any diagnostics for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
}

/// Exit status for an error: 2 usage, 3 I/O, 4 numeric failure, 5 data
/// quality.
pub fn exit_code(err: &EgtlError) -> i32 {
    match err {
        EgtlError::Domain(_) => 2,
        EgtlError::NotFound(_) | EgtlError::Io(_) => 3,
        EgtlError::NonConvergence { .. }
        | EgtlError::NoRoot(_)
        | EgtlError::DegeneratePosterior(_) => 4,
        EgtlError::DataQuality { .. } | EgtlError::Parse { .. } => 5,
    }
}

fn render(table: &Table, format: OutputFormat, single: bool) -> String {
    match format {
        OutputFormat::Json if single => table.to_json_object() + "\n",
        OutputFormat::Json => table.to_json() + "\n",
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Table => table.to_text(),
    }
}

pub fn fit_table(fit: &FitResult, n: usize) -> Table {
    let mut t = Table::new([
        "method",
        "k",
        "n",
        "p",
        "theta",
        "log_lik",
        "se_p",
        "se_theta",
        "converged",
        "boundary",
        "iterations",
        "warnings",
    ]);
    t.push(vec![
        fit.method.as_str().into(),
        fit.params.k().into(),
        n.into(),
        fit.p().into(),
        fit.theta().into(),
        fit.log_lik.into(),
        fit.std_errors.map(|s| s.0).into(),
        fit.std_errors.map(|s| s.1).into(),
        fit.converged.into(),
        fit.boundary.into(),
        fit.iterations.into(),
        fit.warnings.join("; ").into(),
    ]);
    t
}

pub fn gof_table(rows: &[GofReport]) -> Table {
    let mut t = Table::new([
        "model", "k", "param", "value", "param2", "value2", "ks_stat", "p_value", "log_lik", "n",
        "status",
    ]);
    for r in rows {
        let (n1, n2) = r.model.param_names();
        let k = match r.model {
            crate::gof::Model::Egtl { k } => Value::from(k),
            _ => Value::Null,
        };
        let status = if r.notes.is_empty() {
            "ok".to_string()
        } else {
            r.notes.join("; ")
        };
        t.push(vec![
            r.model.label().into(),
            k,
            n1.into(),
            r.fitted.map(|f| f.0).into(),
            n2.into(),
            r.fitted.map(|f| f.1).into(),
            r.ks_stat.into(),
            r.p_value.into(),
            r.log_lik.into(),
            r.n.into(),
            status.into(),
        ]);
    }
    t
}

pub fn simulation_table(report: &SimulationReport) -> Table {
    let mut t = Table::new([
        "n",
        "k",
        "p",
        "theta",
        "method",
        "bias_p",
        "bias_theta",
        "var_p",
        "var_theta",
        "mse_p",
        "mse_theta",
        "replications",
        "failures",
        "flagged",
    ]);
    for r in &report.records {
        t.push(vec![
            r.n.into(),
            r.k.into(),
            r.p.into(),
            r.theta.into(),
            r.method.as_str().into(),
            r.bias_p.into(),
            r.bias_theta.into(),
            r.var_p.into(),
            r.var_theta.into(),
            r.mse_p.into(),
            r.mse_theta.into(),
            r.replications.into(),
            r.failures.into(),
            r.flagged.into(),
        ]);
    }
    t
}

pub fn curve_table(params: &EgtlParams, points: usize, x_max: f64) -> Result<Table> {
    let mut t = Table::new(["x", "pdf", "cdf", "survival", "hazard"]);
    for i in 0..points {
        let x = if points == 1 {
            0.0
        } else {
            x_max * i as f64 / (points - 1) as f64
        };
        t.push(vec![
            x.into(),
            params.pdf(x)?.into(),
            params.cdf(x)?.into(),
            params.survival(x)?.into(),
            params.hazard(x)?.into(),
        ]);
    }
    Ok(t)
}

fn run_fit(
    cfg: &RunConfig,
    data: &str,
    k: u32,
    method: Method,
    init: Option<(f64, f64)>,
    bayes: &BayesConfig,
) -> Result<Outcome> {
    let ds = load_dataset(data)?;
    let fit = match method {
        Method::MleDirect => fit_mle(&ds, k, init)?,
        Method::Em => fit_em(&ds, k, init.unwrap_or_else(|| default_init(&ds, k)))?,
        Method::Moments => fit_moments(&ds, k, &cfg.series)?,
        Method::Bayes => fit_bayes(&ds, k, bayes)?,
    };
    let mut diagnostics = fit.warnings.clone();
    let exit_code = if fit.converged {
        0
    } else {
        diagnostics.push(format!("{} fit did not converge", method.as_str()));
        4
    };
    Ok(Outcome {
        output: render(&fit_table(&fit, ds.len()), cfg.format, true),
        exit_code,
        diagnostics,
    })
}

/// Executes one command.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Fit {
            data,
            k,
            method,
            init,
            bayes,
        } => run_fit(cfg, data, *k, *method, *init, bayes),
        Command::Gof { data, k_max } => {
            if *k_max == 0 {
                return Err(EgtlError::domain("k-max must be at least 1"));
            }
            let ds = load_dataset(data)?;
            let rows = model_selection_table(&ds, *k_max);
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| !r.is_ok())
                .map(|r| format!("{}: {}", r.model.label(), r.notes.join("; ")))
                .collect();
            let mut diagnostics = vec![format!("p-values: {P_VALUE_METHOD}")];
            diagnostics.extend(failed);
            Ok(Outcome {
                output: render(&gof_table(&rows), cfg.format, false),
                exit_code: 0,
                diagnostics,
            })
        }
        Command::Simulate { design } => {
            let design = SimDesign {
                base_seed: cfg.seed,
                series: cfg.series,
                ..design.clone()
            };
            let report = run_study(&design)?;
            let diagnostics = report
                .flagged()
                .map(|r| {
                    format!(
                        "cell n={} k={} p={} theta={} {}: {} of {} replications failed",
                        r.n,
                        r.k,
                        r.p,
                        r.theta,
                        r.method.as_str(),
                        r.failures,
                        r.replications
                    )
                })
                .collect();
            let output = match cfg.format {
                OutputFormat::Table => crate::simulation::render_method_columns(&report),
                f => render(&simulation_table(&report), f, false),
            };
            Ok(Outcome {
                output,
                exit_code: 0,
                diagnostics,
            })
        }
        Command::Sample { params, n } => {
            if *n == 0 {
                return Err(EgtlError::domain("n must be at least 1"));
            }
            let mut t = Table::new(["x"]);
            for x in params.sample(*n, cfg.seed) {
                t.push(vec![x.into()]);
            }
            Ok(Outcome {
                output: render(&t, cfg.format, false),
                exit_code: 0,
                diagnostics: Vec::new(),
            })
        }
        Command::Curve {
            params,
            points,
            x_max,
        } => {
            if *points == 0 {
                return Err(EgtlError::domain("points must be at least 1"));
            }
            let x_max = match x_max {
                Some(x) if *x > 0.0 && x.is_finite() => *x,
                Some(x) => {
                    return Err(EgtlError::domain(format!(
                        "x-max must be positive, got {x}"
                    )))
                }
                None => params.quantile(0.999)?,
            };
            let t = curve_table(params, *points, x_max)?;
            Ok(Outcome {
                output: render(&t, cfg.format, false),
                exit_code: 0,
                diagnostics: Vec::new(),
            })
        }
    }
}
