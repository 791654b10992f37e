use crate::distribution::{EgtlParams, P_MAX};
use crate::error::Result;
use crate::roots::bracketed_root;

use super::likelihood::{fisher_information, log_likelihood};
use super::{truncated_log_mean_excess, Dataset, FitResult, Method, TracePoint};

const MAX_OUTER: usize = 5000;
const TOL: f64 = 1e-9;
const P_EDGE: f64 = 1e-10;
const ASCENT_SLACK: f64 = 1e-10;
const DAMPING: f64 = 0.5;

/// Shape update: the `p` solving `E[Z] - k = mean(w) - k`, where `Z` is the
/// truncated logarithmic count. `excess` is `mean(w) - k`.
fn update_p(excess: f64, k: u32) -> Option<f64> {
    if excess <= 0.0 {
        return Some(0.0);
    }
    bracketed_root(
        |p| truncated_log_mean_excess(p, k) - excess,
        0.0,
        P_MAX,
        400,
    )
}

/// Rate update for fixed weights: root of
/// `g(t) = n/t - sum (w - k + 1) x + (k - 1) sum x / expm1(t x)`.
fn update_theta(x: &[f64], w: &[f64], k: u32, theta: f64) -> Option<f64> {
    let n = x.len() as f64;
    let sum_wx: f64 = x.iter().zip(w).map(|(x, w)| x * w).sum();
    if k == 1 {
        return Some(n / sum_wx);
    }
    let km1 = f64::from(k - 1);
    // sum x / (1 - e^{-t x}) = sum x + sum x / expm1(t x)
    let sum_x: f64 = x.iter().sum();
    let corr = |t: f64| x.iter().map(|&xi| xi / (t * xi).exp_m1()).sum::<f64>();

    let mut t = theta;
    for _ in 0..200 {
        let denom = sum_wx - km1 * (sum_x + corr(t));
        if !(denom > 0.0) {
            break;
        }
        let next = DAMPING * t + (1.0 - DAMPING) * n / denom;
        if ((next - t) / t).abs() < 1e-14 {
            return Some(next);
        }
        t = next;
    }

    let g = |t: f64| n / t - sum_wx + km1 * sum_x + km1 * corr(t);
    let (mut lo, mut hi) = (theta, theta);
    for _ in 0..200 {
        if g(lo) > 0.0 {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..200 {
        if g(hi) < 0.0 {
            break;
        }
        hi *= 2.0;
    }
    bracketed_root(g, lo, hi, 400)
}

/// Expectation-maximization for fixed `k`.
///
/// The E-step weight of observation `x` is `k / (1 - p e^{-theta x})`, the
/// conditional mean of the latent count. The M-step updates `theta` with
/// the weights held fixed and then `p`, each by a one-dimensional solve.
pub fn fit_em(data: &Dataset, k: u32, init: (f64, f64)) -> Result<FitResult> {
    data.check_fittable(k)?;
    let x = data.values();
    let n = x.len() as f64;
    let kf = f64::from(k);
    let (mut p, mut theta) = init;
    let start = EgtlParams::new(p, theta, k)?;
    let mut ll = log_likelihood(x, &start)?;
    let mut trace = vec![TracePoint {
        p,
        theta,
        objective: ll,
    }];
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut boundary = false;
    let mut iterations = 0;
    let mut w = vec![0.0; x.len()];

    while iterations < MAX_OUTER {
        iterations += 1;
        let mut excess = 0.0;
        for (wi, &xi) in w.iter_mut().zip(x) {
            let e = (-theta * xi).exp();
            let r = p * e / (1.0 - p * e);
            *wi = kf * (1.0 + r);
            excess += kf * r;
        }
        excess /= n;

        let Some(theta_new) = update_theta(x, &w, k, theta) else {
            warnings.push(format!("rate update failed at iteration {iterations}"));
            break;
        };
        let Some(p_new) = update_p(excess, k) else {
            warnings.push(format!("shape update failed at iteration {iterations}"));
            break;
        };
        let dp = (p_new - p).abs();
        let dt = ((theta_new - theta) / theta).abs();
        if p_new < P_EDGE {
            boundary = true;
            p = P_EDGE;
            theta = theta_new;
            break;
        }
        p = p_new;
        theta = theta_new;

        let ll_new = log_likelihood(x, &EgtlParams::new(p, theta, k)?)?;
        if ll_new < ll - ASCENT_SLACK * ll.abs().max(1.0) {
            warnings.push(format!(
                "log-likelihood decreased at iteration {iterations}: {ll} -> {ll_new}"
            ));
        }
        ll = ll_new;
        trace.push(TracePoint {
            p,
            theta,
            objective: ll,
        });
        if dp.max(dt) < TOL {
            converged = true;
            break;
        }
    }

    if boundary {
        warnings.push("shape estimate drifted to the p = 0 boundary".into());
        converged = true;
    } else if !converged && iterations >= MAX_OUTER {
        warnings.push(format!("no convergence after {MAX_OUTER} iterations"));
    }
    let params = EgtlParams::new(p, theta, k)?;
    let log_lik = log_likelihood(x, &params)?;
    let std_errors = if boundary {
        None
    } else {
        fisher_information(x, &params)
            .ok()
            .and_then(|i| i.std_errors)
    };
    Ok(FitResult {
        params,
        log_lik,
        method: Method::Em,
        std_errors,
        iterations,
        converged,
        boundary,
        trace,
        warnings,
    })
}

/// True when the recorded log-likelihood never drops by more than the
/// ascent slack.
pub fn is_monotone(fit: &FitResult) -> bool {
    fit.trace
        .windows(2)
        .all(|w| w[1].objective >= w[0].objective - ASCENT_SLACK * w[0].objective.abs().max(1.0))
}
