use std::f64::consts::PI;

/// Two-sided Kolmogorov–Smirnov distance between the empirical cdf of
/// `sorted` and `cdf`:
/// `D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)`.
///
/// `sorted` must be ascending. Ties are handled by the formula itself: the
/// tie group contributes both its left and right step heights.
pub fn ks_statistic<F>(sorted: &[f64], mut cdf: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        d = d.max(above).max(below);
    }
    d.clamp(0.0, 1.0)
}

/// `max_i |F(x_(i)) - i/n|`, comparing the model only against the
/// right-hand step heights.
///
/// This under-reports the sup distance whenever the largest gap sits on a
/// left limit. It is kept for comparing against tables computed that way
/// and is not used by the fitting pipeline.
pub fn ks_statistic_right_steps<F>(sorted: &[f64], mut cdf: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (cdf(x) - (i as f64 + 1.0) / n).abs())
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov p-value `P(K > sqrt(n) d)`.
///
/// Uses `2 sum_{m>=1} (-1)^{m-1} exp(-2 m^2 lambda^2)` for `lambda >= 1.18`
/// and the equivalent theta-function form of the cdf below that, where the
/// alternating series converges slowly.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    if d <= 0.0 || n == 0 {
        return 1.0;
    }
    let lambda = (n as f64).sqrt() * d;
    if lambda < 1.18 {
        // P(K <= lambda) = sqrt(2 pi)/lambda sum_{m>=1} exp(-(2m-1)^2 pi^2 / (8 lambda^2))
        let c = PI * PI / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for m in 1..100 {
            let j = (2 * m - 1) as f64;
            let term = (-j * j * c).exp();
            sum += term;
            if term <= 1e-12 * sum {
                break;
            }
        }
        let cdf = (2.0 * PI).sqrt() / lambda * sum;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let l2 = lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for m in 1..100 {
        let mf = m as f64;
        let term = (-2.0 * mf * mf * l2).exp();
        sum += sign * term;
        if term <= 1e-12 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
