//! The EGTL family: law of the `k`-th smallest of `Z` iid exponential(`theta`)
//! lifetimes, where `Z` is logarithmic(`p`) truncated below `k`.
//!
//! Density
//!
//! ```text
//! g(x) = theta p^k e^{-theta x} (1 - e^{-theta x})^{k-1} / (A(p,k) (1 - p e^{-theta x})^k)
//! ```
//!
//! with `A(p, k) = sum_{j >= k} p^j / j`. Through the monotone map
//! `y = (1 - e^{-theta x}) / (1 - p e^{-theta x})` the distribution function
//! reduces to `A(p y, k) / A(p, k)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EgtlError, Result};
use crate::roots::bracketed_root;
use crate::series::{
    log_series_tail, log_series_tail_complement, mgf_series, moment_series, scaled_log_series_tail,
    SeriesControl,
};

/// Largest admissible shape parameter.
pub const P_MAX: f64 = 1.0 - 1e-12;

/// One member of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgtlParams {
    p: f64,
    theta: f64,
    k: u32,
}

impl EgtlParams {
    pub fn new(p: f64, theta: f64, k: u32) -> Result<Self> {
        if !(p > 0.0 && p <= P_MAX) {
            return Err(EgtlError::domain(format!("p must lie in (0, 1), got {p}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(EgtlError::domain(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        if k == 0 {
            return Err(EgtlError::domain("k must be at least 1"));
        }
        Ok(EgtlParams { p, theta, k })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Normalizer `A(p, k)`.
    pub fn norm(&self) -> f64 {
        log_series_tail(self.p, self.k)
    }

    fn check_time(x: f64) -> Result<()> {
        if x >= 0.0 {
            Ok(())
        } else {
            Err(EgtlError::domain(format!(
                "time must be nonnegative, got {x}"
            )))
        }
    }

    /// Log-density; `-inf` at `x = 0` when `k >= 2`.
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        Self::check_time(x)?;
        let (p, theta, k) = (self.p, self.theta, self.k);
        // p^k / A(p, k) = 1 / scaled tail
        let head = theta.ln() - scaled_log_series_tail(p, k).ln();
        if x == 0.0 {
            return Ok(if k == 1 {
                head - (-p).ln_1p()
            } else {
                f64::NEG_INFINITY
            });
        }
        let tx = theta * x;
        let one_minus_e = -(-tx).exp_m1();
        let denom = (1.0 - p) + p * one_minus_e;
        Ok(head - tx + f64::from(k - 1) * one_minus_e.ln() - f64::from(k) * denom.ln())
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Self::check_time(x)?;
        let y = YTransform::from_time(self, x);
        let a = self.norm();
        let lower = log_series_tail(self.p * y.y, self.k) / a;
        if lower <= 0.5 {
            Ok(lower)
        } else {
            Ok(1.0 - log_series_tail_complement(self.p, y.complement, self.k) / a)
        }
    }

    pub fn survival(&self, x: f64) -> Result<f64> {
        Self::check_time(x)?;
        let y = YTransform::from_time(self, x);
        let a = self.norm();
        let upper = log_series_tail_complement(self.p, y.complement, self.k) / a;
        if upper <= 0.5 {
            Ok(upper)
        } else {
            Ok(1.0 - log_series_tail(self.p * y.y, self.k) / a)
        }
    }

    /// Log-survival, finite far beyond the point where `survival` underflows.
    pub fn log_survival(&self, x: f64) -> Result<f64> {
        Self::check_time(x)?;
        let (p, theta, k) = (self.p, self.theta, self.k);
        let tx = theta * x;
        let one_minus_e = -(-tx).exp_m1();
        let denom = (1.0 - p) + p * one_minus_e;
        let ln_w = (-p).ln_1p() - tx - denom.ln();
        if ln_w > -700.0 {
            return Ok(self.survival(x)?.ln());
        }
        // T(p) - T(p(1-w)) = w p^k / (1-p) + O(w^2)
        Ok(ln_w + f64::from(k) * p.ln() - (-p).ln_1p() - self.norm().ln())
    }

    /// Failure rate `pdf / survival`.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        let lp = self.log_pdf(x)?;
        if lp == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok((lp - self.log_survival(x)?).exp())
    }

    /// Raw moment `E[X^r]`.
    pub fn raw_moment(&self, r: u32, ctl: &SeriesControl) -> Result<f64> {
        if r == 0 {
            return Err(EgtlError::domain("moment order must be at least 1"));
        }
        let s = moment_series(self.p, self.k, r as i32 + 1, ctl)?;
        let factorial: f64 = (1..=r).map(f64::from).product();
        Ok(factorial / self.theta.powi(r as i32) * s / scaled_log_series_tail(self.p, self.k))
    }

    pub fn mean(&self) -> Result<f64> {
        self.raw_moment(1, &SeriesControl::default())
    }

    /// Moment generating function `E[e^{tX}]`, defined for `t < theta`.
    pub fn mgf(&self, t: f64, ctl: &SeriesControl) -> Result<f64> {
        if !(t < self.theta) {
            return Err(EgtlError::domain(format!(
                "mgf requires t < theta = {}, got {t}",
                self.theta
            )));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        let s = mgf_series(self.p, self.k, t / self.theta, ctl)?;
        Ok(s / scaled_log_series_tail(self.p, self.k))
    }

    /// Quantile function on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(EgtlError::domain(format!(
                "quantile requires u in [0, 1), got {u}"
            )));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let (p, theta, k) = (self.p, self.theta, self.k);
        if k == 1 {
            // X = -(1/theta) ln((1 - (1-p)^(1-u)) / p)
            let num = -((1.0 - u) * (-p).ln_1p()).exp_m1();
            return Ok(-(num / p).ln() / theta);
        }
        let a = self.norm();
        if u <= 0.5 {
            let y = bracketed_root(
                |y| log_series_tail(p * y, k) / a - u,
                0.0,
                1.0 - 1e-15,
                QUANTILE_MAX_ITER,
            )
            .expect("cdf in y is continuous and spans [0, 1)");
            Ok(((-p * y).ln_1p() - (-y).ln_1p()) / theta)
        } else {
            // Upper half: solve in w = 1 - y so the right tail keeps precision.
            let target = 1.0 - u;
            let w = bracketed_root(
                |w| log_series_tail_complement(p, w, k) / a - target,
                0.0,
                1.0,
                QUANTILE_MAX_ITER,
            )
            .expect("survival in w is continuous and spans [0, 1]");
            Ok((((1.0 - p) + p * w).ln() - w.ln()) / theta)
        }
    }

    /// `n` iid draws by quantile inversion, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        self.sample_with_rng(n, &mut rng)
    }

    pub fn sample_with_rng<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                self.quantile(u).expect("uniform draw lies in [0, 1)")
            })
            .collect()
    }

    /// Inverts a caller-supplied sequence of uniforms.
    pub fn sample_from_uniforms<I>(&self, uniforms: I) -> Result<Vec<f64>>
    where
        I: IntoIterator<Item = f64>,
    {
        uniforms.into_iter().map(|u| self.quantile(u)).collect()
    }
}

const QUANTILE_MAX_ITER: usize = 200;

/// Deterministic generator for a `(seed, stream)` pair. Distinct streams of the
/// same seed never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Normalizer `A(p, k) = -ln(1 - p) - psi(k) sum_{j<k} p^j / j`.
pub fn a_norm(p: f64, k: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(EgtlError::domain(format!("p must lie in (0, 1), got {p}")));
    }
    if k == 0 {
        return Err(EgtlError::domain("k must be at least 1"));
    }
    Ok(log_series_tail(p, k))
}

/// The variate `y = (1 - e^{-theta x}) / (1 - p e^{-theta x})` together with
/// its complement `1 - y`, each computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YTransform {
    pub y: f64,
    pub complement: f64,
}

impl YTransform {
    pub fn from_time(params: &EgtlParams, x: f64) -> Self {
        let tx = params.theta * x;
        let e = (-tx).exp();
        let one_minus_e = -(-tx).exp_m1();
        let denom = (1.0 - params.p) + params.p * one_minus_e;
        YTransform {
            y: one_minus_e / denom,
            complement: (1.0 - params.p) * e / denom,
        }
    }

    /// Time corresponding to a given `y` in `[0, 1)`.
    pub fn to_time(params: &EgtlParams, y: f64) -> f64 {
        ((-params.p * y).ln_1p() - (-y).ln_1p()) / params.theta
    }
}
