use crate::distribution::EgtlParams;
use crate::error::{EgtlError, Result};
use crate::series::scaled_log_series_tail;

use super::truncated_log_mean_excess;

fn nonempty(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(EgtlError::domain(
            "likelihood needs at least one observation",
        ));
    }
    Ok(())
}

/// Log-likelihood of a complete sample.
///
/// Returns `-inf` (not an error) when `k >= 2` and a value is exactly zero.
pub fn log_likelihood(data: &[f64], params: &EgtlParams) -> Result<f64> {
    nonempty(data)?;
    let (p, theta, k) = (params.p(), params.theta(), params.k());
    let n = data.len() as f64;
    let kf = f64::from(k);

    let mut sum_x = 0.0;
    let mut sum_log_one_minus_e = 0.0;
    let mut sum_log_denom = 0.0;
    for &x in data {
        if x < 0.0 {
            return Err(EgtlError::domain(format!("negative lifetime {x}")));
        }
        let tx = theta * x;
        sum_x += x;
        if k >= 2 {
            if x == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            sum_log_one_minus_e += (-(-tx).exp_m1()).ln();
        }
        sum_log_denom += (-p * (-tx).exp()).ln_1p();
    }
    // A(p, k) = p^k * scaled tail, so n k ln p - n ln A = -n ln(scaled tail)
    Ok(
        n * theta.ln() - n * scaled_log_series_tail(p, k).ln() - theta * sum_x
            + (kf - 1.0) * sum_log_one_minus_e
            - kf * sum_log_denom,
    )
}

/// Gradient `(d/dp, d/dtheta)` of the log-likelihood.
pub fn score(data: &[f64], params: &EgtlParams) -> Result<(f64, f64)> {
    nonempty(data)?;
    let (p, theta, k) = (params.p(), params.theta(), params.k());
    let n = data.len() as f64;
    let kf = f64::from(k);

    let mut s_ratio = 0.0; // sum e / (1 - p e)
    let mut s_x = 0.0;
    let mut s_x_over_expm1 = 0.0;
    let mut s_x_ratio = 0.0; // sum x e / (1 - p e)
    for &x in data {
        if x < 0.0 || (k >= 2 && x == 0.0) {
            return Err(EgtlError::DataQuality {
                message: format!("score undefined at lifetime {x} for k = {k}"),
                indices: Vec::new(),
            });
        }
        let tx = theta * x;
        let e = (-tx).exp();
        let r = e / (1.0 - p * e);
        s_ratio += r;
        s_x += x;
        s_x_ratio += x * r;
        if k >= 2 {
            s_x_over_expm1 += x / tx.exp_m1();
        }
    }
    // n k / p - n A'/A with A' = p^{k-1}/(1-p), written as -(n/p)(E[Z] - k)
    let d_p = -(n / p) * truncated_log_mean_excess(p, k) + kf * s_ratio;
    let d_theta = n / theta - s_x + (kf - 1.0) * s_x_over_expm1 - kf * p * s_x_ratio;
    Ok((d_p, d_theta))
}

/// Observed information and the Wald standard errors derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInfo {
    /// Rows and columns ordered `(p, theta)`.
    pub matrix: [[f64; 2]; 2],
    /// `None` when the symmetrized matrix is not positive definite.
    pub std_errors: Option<(f64, f64)>,
}

impl FisherInfo {
    pub fn is_positive_definite(&self) -> bool {
        self.std_errors.is_some()
    }
}

/// Negative Hessian of the log-likelihood by central differences of `score`.
pub fn fisher_information(data: &[f64], params: &EgtlParams) -> Result<FisherInfo> {
    let (p, theta, k) = (params.p(), params.theta(), params.k());
    let hp = 1e-5 * p.min(1.0 - p);
    let ht = 1e-5 * theta;
    let at = |pp: f64, tt: f64| -> Result<(f64, f64)> { score(data, &EgtlParams::new(pp, tt, k)?) };

    let (sp_hi, st_hi_p) = at(p + hp, theta)?;
    let (sp_lo, st_lo_p) = at(p - hp, theta)?;
    let (sp_hi_t, st_hi) = at(p, theta + ht)?;
    let (sp_lo_t, st_lo) = at(p, theta - ht)?;

    let i_pp = -(sp_hi - sp_lo) / (2.0 * hp);
    let i_tt = -(st_hi - st_lo) / (2.0 * ht);
    let i_pt = -(sp_hi_t - sp_lo_t) / (2.0 * ht);
    let i_tp = -(st_hi_p - st_lo_p) / (2.0 * hp);
    let matrix = [[i_pp, i_pt], [i_tp, i_tt]];

    let off = 0.5 * (i_pt + i_tp);
    let det = i_pp * i_tt - off * off;
    let std_errors = if i_pp > 0.0 && i_tt > 0.0 && det > 0.0 && det.is_finite() {
        Some(((i_tt / det).sqrt(), (i_pp / det).sqrt()))
    } else {
        None
    };
    Ok(FisherInfo { matrix, std_errors })
}
