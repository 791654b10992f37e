use crate::distribution::EgtlParams;
use crate::error::{EgtlError, Result};
use crate::roots::bracketed_root;
use crate::series::{moment_series, scaled_log_series_tail, SeriesControl};

use super::likelihood::log_likelihood;
use super::{Dataset, FitResult, Method};

const P_LO: f64 = 1e-6;
const P_HI: f64 = 1.0 - 1e-4;
const SCAN_POINTS: usize = 256;

/// `E[X^2] / E[X]^2` as a function of `p` (free of `theta`).
fn moment_ratio(p: f64, k: u32, ctl: &SeriesControl) -> Result<f64> {
    let s2 = moment_series(p, k, 2, ctl)?;
    let s3 = moment_series(p, k, 3, ctl)?;
    Ok(2.0 * scaled_log_series_tail(p, k) * s3 / (s2 * s2))
}

/// Method-of-moments estimate from the first two raw moments.
///
/// Solves `E[X^2] / E[X]^2 = m2 / m1^2` for `p` on `[1e-6, 1 - 1e-4]`, then
/// sets `theta` from the first moment. When the scan finds several sign
/// changes, the root closest to `p = 0.5` is returned with a warning.
pub fn fit_moments_from_moments(
    m1: f64,
    m2: f64,
    k: u32,
    ctl: &SeriesControl,
) -> Result<(EgtlParams, Vec<String>)> {
    if k == 0 {
        return Err(EgtlError::domain("k must be at least 1"));
    }
    if !(m1 > 0.0 && m2 > m1 * m1 && m2.is_finite()) {
        return Err(EgtlError::NoRoot(format!(
            "moments m1 = {m1}, m2 = {m2} have no positive variance"
        )));
    }
    let target = m2 / (m1 * m1);
    let h = |p: f64| moment_ratio(p, k, ctl).map(|r| r - target);

    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| P_LO + (P_HI - P_LO) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let values = grid.iter().map(|&p| h(p)).collect::<Result<Vec<_>>>()?;

    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS - 1 {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            roots.push(grid[i]);
        } else if a.signum() != b.signum() && b != 0.0 {
            let root = bracketed_root(|p| h(p).unwrap_or(f64::NAN), grid[i], grid[i + 1], 200)
                .ok_or_else(|| EgtlError::NoRoot("moment equation refinement failed".into()))?;
            roots.push(root);
        }
    }
    if values[SCAN_POINTS - 1] == 0.0 {
        roots.push(grid[SCAN_POINTS - 1]);
    }

    let mut warnings = Vec::new();
    let p = match roots.len() {
        0 => {
            return Err(EgtlError::NoRoot(format!(
                "moment ratio {target} is outside the range attainable for k = {k}"
            )))
        }
        1 => roots[0],
        many => {
            warnings.push(format!(
                "moment equation has {many} roots; kept the one nearest 0.5"
            ));
            roots
                .iter()
                .copied()
                .min_by(|a, b| (a - 0.5).abs().total_cmp(&(b - 0.5).abs()))
                .expect("nonempty")
        }
    };
    let s2 = moment_series(p, k, 2, ctl)?;
    let theta = s2 / (m1 * scaled_log_series_tail(p, k));
    Ok((EgtlParams::new(p, theta, k)?, warnings))
}

/// Method-of-moments fit using the sample mean and mean square.
pub fn fit_moments(data: &Dataset, k: u32, ctl: &SeriesControl) -> Result<FitResult> {
    let (params, warnings) = fit_moments_from_moments(data.mean(), data.mean_square(), k, ctl)?;
    let log_lik = log_likelihood(data.values(), &params)?;
    Ok(FitResult {
        params,
        log_lik,
        method: Method::Moments,
        std_errors: None,
        iterations: 0,
        converged: true,
        boundary: false,
        trace: Vec::new(),
        warnings,
    })
}
