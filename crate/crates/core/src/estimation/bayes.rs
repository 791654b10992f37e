use crate::distribution::EgtlParams;
use crate::error::{EgtlError, Result};
use crate::quadrature::CompositeRule;
use crate::series::scaled_log_series_tail;

use super::likelihood::log_likelihood;
use super::{Dataset, FitResult, Method};

/// Uniform prior on `p`, `Gamma(a, b)` prior (shape, rate) on `theta`,
/// and the quadrature grid for the posterior means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesConfig {
    pub a: f64,
    pub b: f64,
    pub grid_p: usize,
    pub grid_theta: usize,
    /// Upper end of the `theta` grid; `None` uses
    /// `max(20 k / mean(x), 10 / mean(x))`.
    pub theta_max: Option<f64>,
}

impl Default for BayesConfig {
    fn default() -> Self {
        BayesConfig {
            a: 1.0,
            b: 1.0,
            grid_p: 128,
            grid_theta: 256,
            theta_max: None,
        }
    }
}

impl BayesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(EgtlError::domain("gamma prior needs a > 0 and b > 0"));
        }
        if self.grid_p < 32 || self.grid_theta < 32 {
            return Err(EgtlError::domain("posterior grids need at least 32 nodes"));
        }
        if let Some(t) = self.theta_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(EgtlError::domain("theta_max must be positive"));
            }
        }
        Ok(())
    }
}

/// Posterior means of `(p, theta)` by tensor-product Gauss–Legendre
/// quadrature, accumulated in log space.
///
/// `std_errors` carries the posterior standard deviations.
pub fn fit_bayes(data: &Dataset, k: u32, cfg: &BayesConfig) -> Result<FitResult> {
    cfg.validate()?;
    data.check_fittable(k)?;
    let x = data.values();
    let n = x.len() as f64;
    let kf = f64::from(k);
    let mean = data.mean();
    let theta_max = cfg
        .theta_max
        .unwrap_or_else(|| (20.0 * kf / mean).max(10.0 / mean));

    let rule_p = CompositeRule::with_total(0.0, 1.0, cfg.grid_p);
    let rule_t = CompositeRule::with_total(0.0, theta_max, cfg.grid_theta);
    let sum_x: f64 = x.iter().sum();
    let p_terms: Vec<f64> = rule_p
        .nodes
        .iter()
        .zip(&rule_p.weights)
        .map(|(&p, &w)| w.ln() - n * scaled_log_series_tail(p, k).ln())
        .collect();

    let np = rule_p.nodes.len();
    let nt = rule_t.nodes.len();
    let mut logw = vec![0.0; np * nt];
    let mut e = vec![0.0; x.len()];
    for (j, (&t, &wt)) in rule_t.nodes.iter().zip(&rule_t.weights).enumerate() {
        let mut base = wt.ln() + n * t.ln() - t * sum_x + (cfg.a - 1.0) * t.ln() - cfg.b * t;
        if k >= 2 {
            base += (kf - 1.0) * x.iter().map(|&xi| (-(-t * xi).exp_m1()).ln()).sum::<f64>();
        }
        for (ei, &xi) in e.iter_mut().zip(x) {
            *ei = (-t * xi).exp();
        }
        for (i, &p) in rule_p.nodes.iter().enumerate() {
            let denom: f64 = e.iter().map(|&ei| (-p * ei).ln_1p()).sum();
            logw[i * nt + j] = base + p_terms[i] - kf * denom;
        }
    }

    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(EgtlError::DegeneratePosterior(
            "posterior is zero on the whole grid".into(),
        ));
    }
    let mut mass = 0.0;
    let (mut m_p, mut m_t, mut m_pp, mut m_tt) = (0.0, 0.0, 0.0, 0.0);
    let mut largest = 0.0f64;
    for i in 0..np {
        let p = rule_p.nodes[i];
        for j in 0..nt {
            let t = rule_t.nodes[j];
            let w = (logw[i * nt + j] - max).exp();
            mass += w;
            largest = largest.max(w);
            m_p += w * p;
            m_t += w * t;
            m_pp += w * p * p;
            m_tt += w * t * t;
        }
    }
    if largest > 0.999 * mass {
        return Err(EgtlError::DegeneratePosterior(format!(
            "one grid cell holds {:.4}% of the posterior mass; refine the grid",
            100.0 * largest / mass
        )));
    }
    let (p_hat, t_hat) = (m_p / mass, m_t / mass);
    let sd_p = (m_pp / mass - p_hat * p_hat).max(0.0).sqrt();
    let sd_t = (m_tt / mass - t_hat * t_hat).max(0.0).sqrt();

    let mut warnings = Vec::new();
    let edge_mass: f64 = (0..np).map(|i| (logw[i * nt + nt - 1] - max).exp()).sum();
    if edge_mass > 1e-6 * mass {
        warnings.push("posterior mass reaches theta_max; consider a larger cutoff".into());
    }

    let params = EgtlParams::new(p_hat, t_hat, k)?;
    let log_lik = log_likelihood(x, &params)?;
    Ok(FitResult {
        params,
        log_lik,
        method: Method::Bayes,
        std_errors: Some((sd_p, sd_t)),
        iterations: 0,
        converged: true,
        boundary: false,
        trace: Vec::new(),
        warnings,
    })
}
