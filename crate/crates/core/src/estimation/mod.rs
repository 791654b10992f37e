//! Parameter estimation for fixed order `k`.

mod bayes;
mod em;
mod likelihood;
mod mle;
mod moments;

pub use bayes::{fit_bayes, BayesConfig};
pub use em::{fit_em, is_monotone};
pub use likelihood::{fisher_information, log_likelihood, score, FisherInfo};
pub use mle::{default_starts, fit_mle, fit_mle_multistart, MultiStart};
pub use moments::{fit_moments, fit_moments_from_moments};

use serde::{Deserialize, Serialize};

use crate::distribution::EgtlParams;
use crate::error::{EgtlError, Result};
use crate::series::scaled_log_series_tail;

/// A sorted sample of nonnegative lifetimes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    label: String,
}

impl Dataset {
    pub fn new(mut values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let bad: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !(v.is_finite() && **v >= 0.0))
            .map(|(i, _)| i)
            .collect();
        if !bad.is_empty() {
            return Err(EgtlError::DataQuality {
                message: "lifetimes must be finite and nonnegative".into(),
                indices: bad,
            });
        }
        if values.len() < 2 {
            return Err(EgtlError::DataQuality {
                message: format!("need at least 2 observations, got {}", values.len()),
                indices: Vec::new(),
            });
        }
        values.sort_by(f64::total_cmp);
        Ok(Dataset {
            values,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Mean of squares (second raw sample moment).
    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>() / self.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.len() - 1]
    }

    /// Every value multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Dataset {
        Dataset {
            values: self.values.iter().map(|x| x * c).collect(),
            label: self.label.clone(),
        }
    }

    pub(crate) fn zero_indices(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    fn distinct_positive(&self) -> usize {
        let mut count = 0;
        let mut last = f64::NAN;
        for &v in &self.values {
            if v > 0.0 && v != last {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// Checks the preconditions shared by all likelihood-based fitters.
    pub(crate) fn check_fittable(&self, k: u32) -> Result<()> {
        if k == 0 {
            return Err(EgtlError::domain("k must be at least 1"));
        }
        if self.distinct_positive() < 2 {
            return Err(EgtlError::DataQuality {
                message: "need at least 2 distinct positive values".into(),
                indices: Vec::new(),
            });
        }
        if k >= 2 {
            let zeros = self.zero_indices();
            if !zeros.is_empty() {
                return Err(EgtlError::DataQuality {
                    message: format!("zero lifetimes have zero density when k = {k}"),
                    indices: zeros,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MleDirect,
    Em,
    Moments,
    Bayes,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MleDirect => "mle_direct",
            Method::Em => "em",
            Method::Moments => "moments",
            Method::Bayes => "bayes",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = EgtlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mle" | "mle_direct" => Ok(Method::MleDirect),
            "em" => Ok(Method::Em),
            "moments" | "mom" => Ok(Method::Moments),
            "bayes" => Ok(Method::Bayes),
            other => Err(EgtlError::domain(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub p: f64,
    pub theta: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: EgtlParams,
    pub log_lik: f64,
    pub method: Method,
    pub std_errors: Option<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
    /// The shape estimate reached the edge of `(0, 1)`; the reported point is
    /// the clamped boundary value with `theta` optimized at that `p`.
    pub boundary: bool,
    pub trace: Vec<TracePoint>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn p(&self) -> f64 {
        self.params.p()
    }

    pub fn theta(&self) -> f64 {
        self.params.theta()
    }
}

/// Starting point used when the caller gives none: `p = 0.5`,
/// `theta = k / mean(x)`.
pub fn default_init(data: &Dataset, k: u32) -> (f64, f64) {
    (0.5, f64::from(k) / data.mean())
}

/// Mean of the logarithmic distribution truncated below `k`, minus `k`:
/// `E[Z] - k = p^k / ((1 - p) A(p, k)) - k`.
pub(crate) fn truncated_log_mean_excess(p: f64, k: u32) -> f64 {
    let kf = f64::from(k);
    if p <= 0.5 {
        // sum_{m>=1} m p^m / (k+m) over sum_{m>=0} p^m / (k+m)
        let mut num = 0.0;
        let mut pow = p;
        for m in 1..400 {
            let term = m as f64 * pow / (kf + m as f64);
            num += term;
            if term <= f64::EPSILON * 0.25 * num {
                break;
            }
            pow *= p;
        }
        num / scaled_log_series_tail(p, k)
    } else {
        1.0 / ((1.0 - p) * scaled_log_series_tail(p, k)) - kf
    }
}
