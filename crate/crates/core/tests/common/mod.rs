#![allow(dead_code, clippy::excessive_precision)]

use egtl::EgtlParams;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature with absolute tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth >= 50 {
            return v;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
    }
    recurse(&mut f, a, b, tol, 0)
}

/// `{0.1, 0.5, 0.9} x {0.5, 1, 2} x k_values`.
pub fn param_grid(k_values: &[u32]) -> Vec<EgtlParams> {
    let mut out = Vec::new();
    for &p in &[0.1, 0.5, 0.9] {
        for &t in &[0.5, 1.0, 2.0] {
            for &k in k_values {
                out.push(EgtlParams::new(p, t, k).unwrap());
            }
        }
    }
    out
}

/// Exponential–logarithmic (k = 1) closed forms.
pub mod el {
    pub fn pdf(p: f64, t: f64, x: f64) -> f64 {
        let e = (-t * x).exp();
        -p * t * e / ((1.0 - p * e) * (1.0 - p).ln())
    }

    pub fn cdf(p: f64, t: f64, x: f64) -> f64 {
        1.0 - (1.0 - p * (-t * x).exp()).ln() / (1.0 - p).ln()
    }

    pub fn hazard(p: f64, t: f64, x: f64) -> f64 {
        let e = (-t * x).exp();
        -p * t * e / ((1.0 - p * e) * (1.0 - p * e).ln())
    }

    pub fn median(p: f64, t: f64) -> f64 {
        -((1.0 - (1.0 - p).sqrt()) / p).ln() / t
    }
}

/// Reliability closed forms for k = 1, 2, 3, written out term by term.
pub fn survival_closed(p: f64, t: f64, k: u32, x: f64) -> f64 {
    let e = (-t * x).exp();
    let y = (1.0 - e) / (1.0 - p * e);
    let l = (1.0 - p * e).ln();
    match k {
        1 => l / (1.0 - p).ln(),
        2 => (l - p * (y - 1.0)) / ((1.0 - p).ln() + p),
        3 => {
            (l + p + p * p / 2.0 - p * y - p * p / 2.0 * y * y) / ((1.0 - p).ln() + p + p * p / 2.0)
        }
        _ => panic!("closed form only for k <= 3"),
    }
}

/// Failure-rate closed forms for k = 1, 2, 3. The k = 2 denominator carries
/// `(1 - p e)^2`, matching the density.
pub fn hazard_closed(p: f64, t: f64, k: u32, x: f64) -> f64 {
    let e = (-t * x).exp();
    let y = (1.0 - e) / (1.0 - p * e);
    let l = (1.0 - p * e).ln();
    let q = 1.0 - p * e;
    match k {
        1 => -p * t * e / (q * l),
        2 => -p * p * t * e * (1.0 - e) / (q * q * (l - p * (y - 1.0))),
        3 => {
            -p.powi(3) * t * e * (1.0 - e).powi(2)
                / (q.powi(3) * (l + p + p * p / 2.0 - p * y - p * p / 2.0 * y * y))
        }
        _ => panic!("closed form only for k <= 3"),
    }
}

/// The k = 2 failure rate with only a single power of `(1 - p e)` in the
/// denominator.
pub fn hazard_k2_single_power(p: f64, t: f64, x: f64) -> f64 {
    let e = (-t * x).exp();
    let y = (1.0 - e) / (1.0 - p * e);
    let l = (1.0 - p * e).ln();
    -p * p * t * e * (1.0 - e) / ((1.0 - p * e) * (l - p * (y - 1.0)))
}

/// Cdf through the incomplete-integral route: integrate the joint density
/// of the order statistic against the truncated logarithmic weights.
pub fn cdf_by_integration(m: &EgtlParams, x: f64) -> f64 {
    integrate(|t| m.pdf(t).unwrap(), 0.0, x, 1e-14)
}

/// Sorted sample; K-S distance against `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(mut data: Vec<f64>, cdf: F) -> f64 {
    data.sort_by(f64::total_cmp);
    egtl::gof::ks_statistic(&data, cdf)
}
