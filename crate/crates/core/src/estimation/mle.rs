use crate::distribution::EgtlParams;
use crate::error::Result;
use crate::roots::bracketed_root;

use super::likelihood::{fisher_information, log_likelihood, score};
use super::{default_init, Dataset, FitResult, Method, TracePoint};

const MAX_ITER: usize = 500;
const GRAD_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-10;
const P_EDGE: f64 = 1e-10;
/// Largest move in transformed coordinates allowed per line search.
const MAX_STEP: f64 = 4.0;

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Mean negative log-likelihood and its gradient in `(logit p, ln theta)`.
struct Objective<'a> {
    data: &'a [f64],
    k: u32,
    n: f64,
}

impl Objective<'_> {
    fn params(&self, z: [f64; 2]) -> Option<EgtlParams> {
        EgtlParams::new(logistic(z[0]), z[1].exp(), self.k).ok()
    }

    fn value(&self, z: [f64; 2]) -> f64 {
        match self.params(z) {
            Some(m) => match log_likelihood(self.data, &m) {
                Ok(ll) if ll.is_finite() => -ll / self.n,
                _ => f64::INFINITY,
            },
            None => f64::INFINITY,
        }
    }

    fn gradient(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        let m = self
            .params(z)
            .expect("gradient evaluated at an accepted point");
        let (dp, dt) = score(self.data, &m)?;
        let p = m.p();
        Ok([-dp * p * (1.0 - p) / self.n, -dt * m.theta() / self.n])
    }
}

fn sup(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Maximizes the likelihood in `theta` with `p` held fixed.
fn polish_theta(data: &[f64], p: f64, theta: f64, k: u32) -> f64 {
    let g = |t: f64| {
        EgtlParams::new(p, t, k)
            .and_then(|m| score(data, &m))
            .map(|s| s.1)
            .unwrap_or(f64::NAN)
    };
    let (mut lo, mut hi) = (theta, theta);
    for _ in 0..60 {
        if g(lo) > 0.0 && g(hi) < 0.0 {
            return bracketed_root(g, lo, hi, 200).unwrap_or(theta);
        }
        lo *= 0.5;
        hi *= 2.0;
    }
    theta
}

/// Direct maximum likelihood for fixed `k`.
///
/// Quasi-Newton (BFGS with Armijo backtracking) on the mean negative
/// log-likelihood in `(logit p, ln theta)`. If `p` leaves
/// `[1e-10, 1 - 1e-10]` the fit stops, clamps `p` to that edge, re-solves
/// for `theta` and sets `boundary`.
pub fn fit_mle(data: &Dataset, k: u32, init: Option<(f64, f64)>) -> Result<FitResult> {
    data.check_fittable(k)?;
    let x = data.values();
    let obj = Objective {
        data: x,
        k,
        n: x.len() as f64,
    };
    let (p0, t0) = init.unwrap_or_else(|| default_init(data, k));
    let start = EgtlParams::new(p0, t0, k)?;
    let ll_init = log_likelihood(x, &start)?;

    let mut z = [logit(p0), t0.ln()];
    let mut f = obj.value(z);
    let mut g = obj.gradient(z)?;
    let mut h = [[1.0, 0.0], [0.0, 1.0]];
    let mut trace = vec![TracePoint {
        p: p0,
        theta: t0,
        objective: -f * obj.n,
    }];
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut boundary = false;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        let p = logistic(z[0]);
        if !(P_EDGE..=1.0 - P_EDGE).contains(&p) {
            boundary = true;
            break;
        }
        if sup(g) < GRAD_TOL * 1e-4 {
            converged = true;
            break;
        }
        iterations += 1;

        let mut d = [
            -(h[0][0] * g[0] + h[0][1] * g[1]),
            -(h[1][0] * g[0] + h[1][1] * g[1]),
        ];
        if dot(d, g) >= 0.0 {
            h = [[1.0, 0.0], [0.0, 1.0]];
            d = [-g[0], -g[1]];
        }
        let len = sup(d);
        if len > MAX_STEP {
            d = [d[0] * MAX_STEP / len, d[1] * MAX_STEP / len];
        }
        let slope = dot(d, g);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let zn = [z[0] + t * d[0], z[1] + t * d[1]];
            let fn_ = obj.value(zn);
            if zn == z {
                break;
            }
            if fn_ <= f + 1e-4 * t * slope {
                accepted = Some((zn, fn_));
                break;
            }
            t *= 0.5;
        }
        let Some((zn, fn_)) = accepted else {
            // no descent left at working precision
            if sup(g) < 1e-6 {
                converged = true;
            } else {
                warnings.push("line search failed away from a stationary point".into());
            }
            break;
        };
        let gn = obj.gradient(zn)?;
        let s = [zn[0] - z[0], zn[1] - z[1]];
        let y = [gn[0] - g[0], gn[1] - g[1]];
        let sy = dot(s, y);
        if sy > 1e-12 * dot(s, s).sqrt() * dot(y, y).sqrt() {
            if iterations == 1 {
                let scale = sy / dot(y, y);
                h = [[scale, 0.0], [0.0, scale]];
            }
            let rho = 1.0 / sy;
            let hy = [
                h[0][0] * y[0] + h[0][1] * y[1],
                h[1][0] * y[0] + h[1][1] * y[1],
            ];
            let yhy = dot(y, hy);
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        let stalled = f - fn_ <= 4.0 * f64::EPSILON * f.abs().max(1.0);
        z = zn;
        f = fn_;
        g = gn;
        trace.push(TracePoint {
            p: logistic(z[0]),
            theta: z[1].exp(),
            objective: -f * obj.n,
        });
        // a tiny step, or a step that no longer lowers the objective beyond rounding
        if sup(g) < GRAD_TOL && (sup(s) < STEP_TOL || stalled) {
            converged = true;
            break;
        }
    }

    let mut p = logistic(z[0]);
    let mut theta = z[1].exp();
    if boundary {
        p = p.clamp(P_EDGE, 1.0 - P_EDGE);
        theta = polish_theta(x, p, theta, k);
        let edge = if p < 0.5 { "0" } else { "1" };
        warnings.push(format!("shape estimate drifted to the p = {edge} boundary"));
        converged = true;
    } else if !converged && iterations >= MAX_ITER {
        warnings.push(format!("no convergence after {MAX_ITER} iterations"));
    }

    let params = EgtlParams::new(p, theta, k)?;
    let log_lik = log_likelihood(x, &params)?;
    if log_lik < ll_init {
        warnings.push("final log-likelihood below the starting value".into());
    }
    let std_errors = if boundary {
        None
    } else {
        match fisher_information(x, &params) {
            Ok(info) if info.std_errors.is_some() => info.std_errors,
            _ => {
                warnings.push("observed information is not positive definite".into());
                None
            }
        }
    };
    Ok(FitResult {
        params,
        log_lik,
        method: Method::MleDirect,
        std_errors,
        iterations,
        converged,
        boundary,
        trace,
        warnings,
    })
}

/// Outcome of running the optimizer from several starting points.
#[derive(Debug, Clone)]
pub struct MultiStart {
    /// Highest log-likelihood among converged runs (or among all runs if none
    /// converged).
    pub best: FitResult,
    /// Distinct local optima, sorted by decreasing log-likelihood.
    pub optima: Vec<FitResult>,
    /// Every run, in the order of the starting points.
    pub runs: Vec<FitResult>,
}

/// Default starts: `p` in {0.1, 0.5, 0.9} crossed with `theta` at
/// {0.5, 1, 2} times `k / mean(x)`.
pub fn default_starts(data: &Dataset, k: u32) -> Vec<(f64, f64)> {
    let t = f64::from(k) / data.mean();
    let mut starts = Vec::new();
    for &p in &[0.1, 0.5, 0.9] {
        for &c in &[0.5, 1.0, 2.0] {
            starts.push((p, t * c));
        }
    }
    starts
}

/// Runs `fit_mle` from each start and groups the distinct local optima.
pub fn fit_mle_multistart(
    data: &Dataset,
    k: u32,
    starts: Option<&[(f64, f64)]>,
) -> Result<MultiStart> {
    let owned;
    let starts = match starts {
        Some(s) => s,
        None => {
            owned = default_starts(data, k);
            &owned
        }
    };
    let runs = starts
        .iter()
        .map(|&s| fit_mle(data, k, Some(s)))
        .collect::<Result<Vec<_>>>()?;

    let mut ranked: Vec<&FitResult> = runs.iter().filter(|r| r.converged).collect();
    if ranked.is_empty() {
        ranked = runs.iter().collect();
    }
    ranked.sort_by(|a, b| b.log_lik.total_cmp(&a.log_lik));
    let best = ranked[0].clone();

    let mut optima: Vec<FitResult> = Vec::new();
    for r in ranked {
        let same = optima.iter().any(|o| {
            (o.log_lik - r.log_lik).abs() < 1e-6
                || ((o.p() - r.p()).abs() < 1e-4
                    && ((o.theta() - r.theta()) / o.theta()).abs() < 1e-4)
        });
        if !same {
            optima.push(r.clone());
        }
    }
    Ok(MultiStart { best, optima, runs })
}
