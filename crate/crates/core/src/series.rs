//! Truncated logarithmic-series sums and the moment double series.
//!
//! Every quantity of the family is built from the tail of the logarithmic
//! series `T(v, k) = sum_{j >= k} v^j / j`. For `k = 1` the tail is the closed
//! form `-ln(1 - v)`. For `k >= 2` the closed form subtracts a finite partial
//! sum from `-ln(1 - v)`, which cancels badly when `v` is small, so short
//! geometric series are summed directly in that regime.

use crate::error::{EgtlError, Result};

/// Truncation rule for the infinite series behind moments and the MGF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-12,
            max_terms: 1_000_000,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1e-6) {
            return Err(EgtlError::domain(format!(
                "series rel_tol must lie in (0, 1e-6), got {rel_tol}"
            )));
        }
        if max_terms < 64 {
            return Err(EgtlError::domain(format!(
                "series max_terms must be at least 64, got {max_terms}"
            )));
        }
        Ok(SeriesControl { rel_tol, max_terms })
    }
}

/// Number of consecutive small terms required before truncating.
const QUIET_TERMS: usize = 3;

/// Hard cap for the internal (machine-precision) log-series sums. These have
/// ratio at most `SERIES_MAX_RATIO`, so the cap is never reached in practice.
const INTERNAL_CAP: usize = 200_000;
const SERIES_MAX_RATIO: f64 = 0.999;

/// Whether the direct series is preferable to the closed form for ratio `v`.
///
/// The closed form loses roughly `-log10(v^(k-1) / k)` digits; the series
/// needs roughly `37 / -ln(v)` terms.
fn prefer_series(v: f64, k: u32) -> bool {
    if k == 1 {
        return false;
    }
    if v <= 0.5 {
        return true;
    }
    v < SERIES_MAX_RATIO && v.powi(k as i32 - 1) / f64::from(k) < 1e-4
}

fn partial_log_sum(v: f64, k: u32) -> f64 {
    // sum_{j=1}^{k-1} v^j / j
    let mut acc = 0.0;
    let mut pow = 1.0;
    for j in 1..k {
        pow *= v;
        acc += pow / f64::from(j);
    }
    acc
}

/// `sum_{m >= 0} v^m / (k + m)`, i.e. `T(v, k) / v^k`, by direct summation.
fn scaled_tail_series(v: f64, k: u32) -> f64 {
    let mut sum = 0.0;
    let mut pow = 1.0;
    for m in 0..INTERNAL_CAP {
        let term = pow / (f64::from(k) + m as f64);
        sum += term;
        if term <= f64::EPSILON * 0.25 * sum {
            break;
        }
        pow *= v;
        if pow == 0.0 {
            break;
        }
    }
    sum
}

/// Tail of the logarithmic series, `sum_{j >= k} v^j / j`, for `v` in `[0, 1)`.
pub fn log_series_tail(v: f64, k: u32) -> f64 {
    debug_assert!((0.0..1.0).contains(&v) && k >= 1);
    if v == 0.0 {
        return 0.0;
    }
    if prefer_series(v, k) {
        v.powi(k as i32) * scaled_tail_series(v, k)
    } else {
        -(-v).ln_1p() - partial_log_sum(v, k)
    }
}

/// `T(v, k) / v^k`, finite and positive as `v -> 0` (limit `1 / k`).
pub fn scaled_log_series_tail(v: f64, k: u32) -> f64 {
    debug_assert!((0.0..1.0).contains(&v) && k >= 1);
    if v == 0.0 {
        return 1.0 / f64::from(k);
    }
    if prefer_series(v, k) || v <= 0.5 {
        scaled_tail_series(v, k)
    } else {
        log_series_tail(v, k) / v.powi(k as i32)
    }
}

/// `T(p, k) - T(p (1 - w), k) = sum_{j >= k} p^j (1 - (1 - w)^j) / j`.
///
/// This is the survival numerator expressed through `w = 1 - y`, accurate when
/// `w` is tiny (far right tail) as well as when it is close to one.
pub fn log_series_tail_complement(p: f64, w: f64, k: u32) -> f64 {
    debug_assert!((0.0..1.0).contains(&p) && (0.0..=1.0).contains(&w));
    if w == 0.0 || p == 0.0 {
        return 0.0;
    }
    let ln_y = (-w).ln_1p();
    // 1 - y^j without cancellation
    let one_minus_yj = |j: f64| -(j * ln_y).exp_m1();
    if prefer_series(p, k) {
        let mut sum = 0.0;
        let mut pow = p.powi(k as i32);
        let mut j = f64::from(k);
        for _ in 0..INTERNAL_CAP {
            let term = pow * one_minus_yj(j) / j;
            sum += term;
            if term <= f64::EPSILON * 0.25 * sum {
                break;
            }
            pow *= p;
            j += 1.0;
            if pow == 0.0 {
                break;
            }
        }
        sum
    } else {
        // ln((1 - p y) / (1 - p)) = ln(1 + p w / (1 - p))
        let lead = (p * w / (1.0 - p)).ln_1p();
        let mut acc = 0.0;
        let mut pow = 1.0;
        for j in 1..k {
            pow *= p;
            acc += pow * one_minus_yj(f64::from(j)) / f64::from(j);
        }
        lead - acc
    }
}

/// Outer-series accumulator with the running geometric tail bound.
struct TailBoundedSum {
    sum: f64,
    prev: f64,
    quiet: usize,
}

impl TailBoundedSum {
    fn new() -> Self {
        TailBoundedSum {
            sum: 0.0,
            prev: f64::NAN,
            quiet: 0,
        }
    }

    /// Adds a nonnegative term; returns true once truncation is justified.
    fn push(&mut self, term: f64, rel_tol: f64) -> bool {
        self.sum += term;
        let ratio = term / self.prev;
        self.prev = term;
        let bound = if ratio.is_finite() && ratio < 1.0 {
            term * ratio / (1.0 - ratio)
        } else {
            term
        };
        if bound.abs() <= rel_tol * self.sum.abs() {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        self.quiet >= QUIET_TERMS
    }
}

/// `sum_{j=0}^{k-1} C(k-1, j) (-1)^j / (m + j)^s` with alternating pairs
/// combined before accumulation.
fn alternating_inner(m: f64, k: u32, s: i32, binom: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut j = 0usize;
    let km1 = (k - 1) as usize;
    while j <= km1 {
        let pos = binom[j] / (m + j as f64).powi(s);
        let pair = if j < km1 {
            pos - binom[j + 1] / (m + (j + 1) as f64).powi(s)
        } else {
            pos
        };
        acc += pair;
        j += 2;
    }
    acc
}

fn binomial_row(n: u32) -> Vec<f64> {
    let mut row = vec![1.0; n as usize + 1];
    for j in 1..=n as usize {
        row[j] = row[j - 1] * f64::from(n - j as u32 + 1) / j as f64;
    }
    row
}

/// Moment double series
/// `sum_{i>=0} sum_{j<k} C(k-1+i, i) C(k-1, j) p^i (-1)^j / (i+j+1)^s`.
///
/// The `r`-th raw moment uses `s = r + 1`.
pub fn moment_series(p: f64, k: u32, s: i32, ctl: &SeriesControl) -> Result<f64> {
    let binom = binomial_row(k - 1);
    let mut acc = TailBoundedSum::new();
    // c_i = C(k-1+i, i) p^i
    let mut c = 1.0;
    for i in 0..ctl.max_terms {
        let inner = alternating_inner(i as f64 + 1.0, k, s, &binom);
        if acc.push(c * inner, ctl.rel_tol) {
            return Ok(acc.sum);
        }
        c *= p * (f64::from(k) + i as f64) / (i as f64 + 1.0);
        if c == 0.0 {
            return Ok(acc.sum);
        }
    }
    Err(EgtlError::NonConvergence {
        context: "moment series",
        iterations: ctl.max_terms,
    })
}

/// Beta function `B(a, k)` for integer `k >= 1` and `a > 0`.
pub(crate) fn beta_int(a: f64, k: u32) -> f64 {
    let mut b = 1.0 / a;
    for m in 1..k {
        b *= f64::from(m) / (a + f64::from(m));
    }
    b
}

/// MGF series `sum_{i>=0} C(k-1+i, i) p^i B(i + 1 - tau, k)` with `tau = t / theta < 1`.
///
/// `B(a, k)` is the alternating inner sum `sum_j C(k-1, j) (-1)^j / (a + j)`
/// in product form.
pub fn mgf_series(p: f64, k: u32, tau: f64, ctl: &SeriesControl) -> Result<f64> {
    let mut acc = TailBoundedSum::new();
    let mut c = 1.0;
    for i in 0..ctl.max_terms {
        let term = c * beta_int(i as f64 + 1.0 - tau, k);
        if acc.push(term, ctl.rel_tol) {
            return Ok(acc.sum);
        }
        c *= p * (f64::from(k) + i as f64) / (i as f64 + 1.0);
        if c == 0.0 {
            return Ok(acc.sum);
        }
    }
    Err(EgtlError::NonConvergence {
        context: "mgf series",
        iterations: ctl.max_terms,
    })
}
