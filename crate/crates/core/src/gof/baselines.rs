use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, gamma_lr, ln_gamma};

use crate::error::{EgtlError, Result};
use crate::special::trigamma;

fn check_positive(data: &[f64]) -> Result<()> {
    if data.len() < 2 {
        return Err(EgtlError::DataQuality {
            message: "baseline fits need at least 2 observations".into(),
            indices: Vec::new(),
        });
    }
    let bad: Vec<usize> = data
        .iter()
        .enumerate()
        .filter(|(_, x)| !(**x > 0.0 && x.is_finite()))
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(EgtlError::DataQuality {
            message: "baseline fits need strictly positive values".into(),
            indices: bad,
        });
    }
    Ok(())
}

/// Gamma law with density `rate^shape x^(shape-1) e^(-rate x) / Gamma(shape)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub shape: f64,
    pub rate: f64,
}

impl GammaFit {
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(self.shape, self.rate * x)
        }
    }

    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        let (a, r) = (self.shape, self.rate);
        data.iter()
            .map(|&x| a * r.ln() + (a - 1.0) * x.ln() - r * x - ln_gamma(a))
            .sum()
    }
}

/// Gamma maximum likelihood: Newton on `ln a - digamma(a) = ln(mean) - mean(ln x)`,
/// with the rate profiled out as `a / mean`.
pub fn fit_gamma(data: &[f64]) -> Result<GammaFit> {
    check_positive(data)?;
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let s = mean.ln() - data.iter().map(|x| x.ln()).sum::<f64>() / n;
    if !(s > 0.0) {
        return Err(EgtlError::DataQuality {
            message: "gamma fit needs non-constant data".into(),
            indices: Vec::new(),
        });
    }
    let mut a = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let f = a.ln() - digamma(a) - s;
        let fp = 1.0 / a - trigamma(a);
        let mut next = a - f / fp;
        if !(next > 0.0) {
            next = 0.5 * a;
        }
        let done = ((next - a) / a).abs() < 1e-14;
        a = next;
        if done {
            return Ok(GammaFit {
                shape: a,
                rate: a / mean,
            });
        }
    }
    Err(EgtlError::NonConvergence {
        context: "gamma shape equation",
        iterations: 100,
    })
}

/// Weibull law with cdf `1 - exp(-(rate x)^shape)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullFit {
    pub shape: f64,
    pub rate: f64,
}

impl WeibullFit {
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-(self.rate * x).powf(self.shape)).exp_m1()
        }
    }

    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        let (b, r) = (self.shape, self.rate);
        data.iter()
            .map(|&x| b.ln() + b * r.ln() + (b - 1.0) * x.ln() - (r * x).powf(b))
            .sum()
    }
}

/// Weibull maximum likelihood from the profiled shape equation
/// `sum x^b ln x / sum x^b - 1/b - mean(ln x) = 0`, solved by Newton steps
/// kept inside a shrinking bracket.
pub fn fit_weibull(data: &[f64]) -> Result<WeibullFit> {
    check_positive(data)?;
    let n = data.len() as f64;
    let scale = data.iter().copied().fold(0.0, f64::max);
    let logs: Vec<f64> = data.iter().map(|x| (x / scale).ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / n;
    if logs.iter().all(|&l| l == logs[0]) {
        return Err(EgtlError::DataQuality {
            message: "Weibull fit needs non-constant data".into(),
            indices: Vec::new(),
        });
    }

    // returns (g, g') with g increasing in b
    let eval = |b: f64| {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &logs {
            let w = (b * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        let r = s1 / s0;
        (r - 1.0 / b - mean_log, s2 / s0 - r * r + 1.0 / (b * b))
    };

    let (mut lo, mut hi) = (1e-3, 1.0);
    while eval(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(EgtlError::NonConvergence {
                context: "Weibull shape bracket",
                iterations: 30,
            });
        }
    }
    let mut b = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (g, gp) = eval(b);
        if g > 0.0 {
            hi = b;
        } else {
            lo = b;
        }
        let mut next = b - g / gp;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if ((next - b) / b).abs() < 1e-14 || hi - lo < 1e-15 * b {
            let s0: f64 = logs.iter().map(|&l| (next * l).exp()).sum();
            let rate = (s0 / n).powf(-1.0 / next) / scale;
            return Ok(WeibullFit { shape: next, rate });
        }
        b = next;
    }
    Err(EgtlError::NonConvergence {
        context: "Weibull shape equation",
        iterations: 200,
    })
}
