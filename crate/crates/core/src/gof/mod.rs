//! Kolmogorov–Smirnov goodness of fit for fitted models, with gamma and
//! Weibull baselines.

mod baselines;
mod ks;

pub use baselines::{fit_gamma, fit_weibull, GammaFit, WeibullFit};
pub use ks::{ks_p_value, ks_statistic, ks_statistic_right_steps};

use rayon::prelude::*;
use serde::Serialize;

use crate::estimation::{fit_mle_multistart, Dataset};

/// p-values treat the fitted parameters as known (no correction for
/// estimation), so they are optimistic.
pub const P_VALUE_METHOD: &str = "asymptotic Kolmogorov, parameters treated as known";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Model {
    Egtl { k: u32 },
    Gamma,
    Weibull,
}

impl Model {
    pub fn label(&self) -> String {
        match self {
            Model::Egtl { k } => format!("egtl_k{k}"),
            Model::Gamma => "gamma".into(),
            Model::Weibull => "weibull".into(),
        }
    }

    /// Names of the two fitted parameters, in report order.
    pub fn param_names(&self) -> (&'static str, &'static str) {
        match self {
            Model::Egtl { .. } => ("p", "theta"),
            Model::Gamma | Model::Weibull => ("rate", "shape"),
        }
    }
}

/// One row of a model-selection table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub model: Model,
    /// `(p, theta)` for EGTL rows, `(rate, shape)` for the baselines.
    pub fitted: Option<(f64, f64)>,
    pub ks_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub log_lik: Option<f64>,
    pub n: usize,
    pub p_value_method: &'static str,
    /// Fit diagnostics; a failed fit leaves the numeric fields empty and
    /// explains why here.
    pub notes: Vec<String>,
}

impl GofReport {
    fn failed(model: Model, n: usize, reason: String) -> Self {
        GofReport {
            model,
            fitted: None,
            ks_stat: None,
            p_value: None,
            log_lik: None,
            n,
            p_value_method: P_VALUE_METHOD,
            notes: vec![format!("fit failed: {reason}")],
        }
    }

    fn scored<F: FnMut(f64) -> f64>(
        model: Model,
        data: &Dataset,
        fitted: (f64, f64),
        log_lik: f64,
        cdf: F,
        notes: Vec<String>,
    ) -> Self {
        let d = ks_statistic(data.values(), cdf);
        GofReport {
            model,
            fitted: Some(fitted),
            ks_stat: Some(d),
            p_value: Some(ks_p_value(d, data.len())),
            log_lik: Some(log_lik),
            n: data.len(),
            p_value_method: P_VALUE_METHOD,
            notes,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.ks_stat.is_some()
    }
}

/// Fits and scores a single model.
pub fn evaluate_model(data: &Dataset, model: Model) -> GofReport {
    let n = data.len();
    let x = data.values();
    match model {
        Model::Egtl { k } => match fit_mle_multistart(data, k, None) {
            Ok(ms) => {
                let best = &ms.best;
                let mut notes = best.warnings.clone();
                if ms.optima.len() > 1 {
                    let others: Vec<String> = ms.optima[1..]
                        .iter()
                        .map(|o| {
                            format!(
                                "(p={:.6}, theta={:.6e}, lnL={:.4})",
                                o.p(),
                                o.theta(),
                                o.log_lik
                            )
                        })
                        .collect();
                    notes.push(format!("other local optima: {}", others.join(", ")));
                }
                if !best.converged {
                    notes.push("optimizer did not converge".into());
                }
                let m = best.params;
                GofReport::scored(
                    model,
                    data,
                    (m.p(), m.theta()),
                    best.log_lik,
                    |t| m.cdf(t).unwrap_or(f64::NAN),
                    notes,
                )
            }
            Err(e) => GofReport::failed(model, n, e.to_string()),
        },
        Model::Gamma => match fit_gamma(x) {
            Ok(g) => GofReport::scored(
                model,
                data,
                (g.rate, g.shape),
                g.log_likelihood(x),
                |t| g.cdf(t),
                Vec::new(),
            ),
            Err(e) => GofReport::failed(model, n, e.to_string()),
        },
        Model::Weibull => match fit_weibull(x) {
            Ok(w) => GofReport::scored(
                model,
                data,
                (w.rate, w.shape),
                w.log_likelihood(x),
                |t| w.cdf(t),
                Vec::new(),
            ),
            Err(e) => GofReport::failed(model, n, e.to_string()),
        },
    }
}

/// EGTL for `k = 1..=k_max`, then gamma, then Weibull. Rows are fitted in
/// parallel and returned in that fixed order; a failed fit is recorded in
/// its row.
pub fn model_selection_table(data: &Dataset, k_max: u32) -> Vec<GofReport> {
    let mut models: Vec<Model> = (1..=k_max).map(|k| Model::Egtl { k }).collect();
    models.push(Model::Gamma);
    models.push(Model::Weibull);
    models
        .par_iter()
        .map(|&m| evaluate_model(data, m))
        .collect()
}
