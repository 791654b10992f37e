//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! values of every sub-item underneath.
//!
//! Set `EGTL_ACCEPTANCE_FULL=1` to run the sampler criterion at its full
//! count of 100 runs per parameter set instead of 10.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use common::{el, hazard_closed, integrate, param_grid, survival_closed};
use egtl::estimation::{
    default_init, fit_em, fit_mle, fit_moments, fit_moments_from_moments, is_monotone,
    log_likelihood, score,
};
use egtl::gof::{fit_gamma, fit_weibull, ks_p_value, ks_statistic, model_selection_table, Model};
use egtl::io::load_dataset;
use egtl::simulation::{replication_sample, run_study, SimDesign};
use egtl::{Dataset, EgtlParams, Method, SeriesControl};

struct Outcome {
    items: Vec<(bool, String)>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            items: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, text: String) {
        self.items.push((ok, text));
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }
}

fn report(id: u32, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_budget = elapsed <= budget;
    let ok = out.items.iter().all(|(ok, _)| *ok) && in_budget;
    println!(
        "C{id} {}  {title}  ({:.1}s, budget {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    for (ok, text) in &out.items {
        println!("    [{}] {text}", if *ok { "ok" } else { "no" });
    }
    if !in_budget {
        println!("    [no] runtime over budget");
    }
    for n in &out.notes {
        println!("    note: {n}");
    }
    ok
}

fn params(p: f64, t: f64, k: u32) -> EgtlParams {
    EgtlParams::new(p, t, k).unwrap()
}

/// Reference parameter points for the bundled datasets.
const REFERENCE_POINTS: [(&str, u32, f64, f64); 6] = [
    ("barlow1975", 2, 0.0232, 7.32e-4),
    ("barlow1975", 3, 0.8811, 4.38e-4),
    ("barlow1975", 4, 0.4209, 8.84e-4),
    ("quesenberry1982", 2, 0.0248, 6.65e-3),
    ("quesenberry1982", 3, 0.2127, 7.66e-3),
    ("quesenberry1982", 4, 0.1031, 9.10e-3),
];

fn ks_at_reference_points() -> Outcome {
    let mut out = Outcome::new();
    let cases = [
        ("barlow1975", 0.0232, 7.32e-4, 2, 0.0639),
        ("barlow1975", 0.4209, 8.84e-4, 4, 0.0723),
        ("quesenberry1982", 0.2127, 7.66e-3, 3, 0.0879),
        ("quesenberry1982", 0.1031, 9.10e-3, 4, 0.0786),
    ];
    for (name, p, t, k, want) in cases {
        let ds = load_dataset(name).unwrap();
        let m = params(p, t, k);
        let d = ks_statistic(ds.values(), |x| m.cdf(x).unwrap());
        out.check(
            (d - want).abs() <= 0.005,
            format!("{name} k={k} at ({p}, {t:e}): D = {d:.4}, target {want} +- 0.005"),
        );
    }
    out
}

fn baseline_ks() -> Outcome {
    let mut out = Outcome::new();
    for (name, g_want, w_want) in [
        ("barlow1975", 0.0680, 0.0490),
        ("quesenberry1982", 0.0950, 0.0760),
    ] {
        let ds = load_dataset(name).unwrap();
        let g = fit_gamma(ds.values()).unwrap();
        let w = fit_weibull(ds.values()).unwrap();
        let dg = ks_statistic(ds.values(), |x| g.cdf(x));
        let dw = ks_statistic(ds.values(), |x| w.cdf(x));
        out.check(
            (dg - g_want).abs() <= 0.005,
            format!(
                "{name} gamma (shape {:.4}, rate {:.4e}): D = {dg:.4}, target {g_want}",
                g.shape, g.rate
            ),
        );
        out.check(
            (dw - w_want).abs() <= 0.005,
            format!(
                "{name} weibull (shape {:.4}, rate {:.4e}): D = {dw:.4}, target {w_want}",
                w.shape, w.rate
            ),
        );
    }
    out
}

fn significance_pattern() -> Outcome {
    let mut out = Outcome::new();
    for name in ["barlow1975", "quesenberry1982"] {
        let ds = load_dataset(name).unwrap();
        for row in model_selection_table(&ds, 4) {
            let Model::Egtl { k } = row.model else {
                continue;
            };
            let (Some(pv), Some(d), Some((p, t))) = (row.p_value, row.ks_stat, row.fitted) else {
                out.check(
                    false,
                    format!("{name} k={k}: fit failed ({})", row.notes.join("; ")),
                );
                continue;
            };
            let ok = if k == 1 { pv < 0.001 } else { pv > 0.05 };
            let want = if k == 1 { "< 0.001" } else { "> 0.05" };
            out.check(
                ok,
                format!("{name} k={k}: p-value {pv:.4} (want {want}), D = {d:.4}, fit ({p:.4}, {t:.4e})"),
            );
            if !row.notes.is_empty() {
                out.note(format!("{name} k={k}: {}", row.notes.join("; ")));
            }
        }
    }
    out
}

fn mle_dominates_reference_points() -> Outcome {
    let mut out = Outcome::new();
    for (name, k, p, t) in REFERENCE_POINTS {
        let ds = load_dataset(name).unwrap();
        let fit = fit_mle(&ds, k, None).unwrap();
        let reference = log_likelihood(ds.values(), &params(p, t, k)).unwrap();
        out.check(
            fit.log_lik >= reference && fit.converged,
            format!(
                "{name} k={k}: fitted lnL {:.4} at ({:.4}, {:.4e}) vs reference {reference:.4}",
                fit.log_lik,
                fit.p(),
                fit.theta()
            ),
        );
    }
    out
}

fn directional_simulation() -> Outcome {
    let mut out = Outcome::new();
    let design = SimDesign {
        sample_sizes: vec![20, 100],
        k_values: vec![1, 2, 3],
        replications: 200,
        methods: vec![Method::MleDirect, Method::Moments],
        ..SimDesign::default()
    };
    let report = run_study(&design).unwrap();

    for method in [Method::MleDirect, Method::Moments] {
        let mut shrinking = 0;
        for &k in &design.k_values {
            for &(p, t) in &design.param_settings {
                let a = report.find(20, k, p, t, method).unwrap();
                let b = report.find(100, k, p, t, method).unwrap();
                shrinking +=
                    usize::from(b.mse_p < a.mse_p) + usize::from(b.mse_theta < a.mse_theta);
            }
        }
        out.check(
            shrinking >= 16,
            format!(
                "{}: mse(n=100) < mse(n=20) in {shrinking} of 18 comparisons (want >= 16)",
                method.as_str()
            ),
        );
    }

    let (mut worse_p, mut worse_t, mut worse_both, mut cells) = (0, 0, 0, 0);
    for cell in design.cells() {
        let mle = report
            .find(cell.n, cell.k, cell.p, cell.theta, Method::MleDirect)
            .unwrap();
        let mom = report
            .find(cell.n, cell.k, cell.p, cell.theta, Method::Moments)
            .unwrap();
        let (wp, wt) = (mom.mse_p >= mle.mse_p, mom.mse_theta >= mle.mse_theta);
        worse_p += usize::from(wp);
        worse_t += usize::from(wt);
        worse_both += usize::from(wp && wt);
        cells += 1;
        out.note(format!(
            "n={} k={} ({}, {}): mse_p mle {:.4} mom {:.4}, mse_theta mle {:.4} mom {:.4}, moment failures {}/{}",
            cell.n, cell.k, cell.p, cell.theta, mle.mse_p, mom.mse_p, mle.mse_theta, mom.mse_theta,
            mom.failures, mom.replications
        ));
    }
    out.check(
        worse_p + worse_t > cells,
        format!(
            "mse(moments) >= mse(mle) in {} of {} (cell, parameter) comparisons (p {worse_p}, theta {worse_t}, both {worse_both} of {cells} cells)",
            worse_p + worse_t,
            2 * cells
        ),
    );

    // Diagnostic only: both estimators scored on the replications where the
    // moment equation had a root.
    let common: Vec<(usize, usize)> = design
        .cells()
        .par_iter()
        .map(|cell| {
            let mut se = [[0.0; 2]; 2];
            for r in 0..design.replications {
                let data = replication_sample(cell, r, design.base_seed).unwrap();
                let (Ok(mom), Ok(mle)) = (
                    fit_moments(&data, cell.k, &design.series),
                    fit_mle(&data, cell.k, None),
                ) else {
                    continue;
                };
                if !mle.converged {
                    continue;
                }
                for (i, f) in [&mle, &mom].iter().enumerate() {
                    se[i][0] += (f.p() - cell.p).powi(2);
                    se[i][1] += (f.theta() - cell.theta).powi(2);
                }
            }
            (
                usize::from(se[1][0] >= se[0][0]),
                usize::from(se[1][1] >= se[0][1]),
            )
        })
        .collect();
    let (cp, ct): (usize, usize) = common.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    out.note(format!(
        "on replications where both estimators succeed, mse(moments) >= mse(mle) in {} of {} comparisons (p {cp}, theta {ct})",
        cp + ct,
        2 * common.len()
    ));
    out
}

fn distribution_invariants() -> Outcome {
    let mut out = Outcome::new();
    let ctl = SeriesControl::default();
    let grid = param_grid(&[1, 2, 3]);
    let mut worst = [0.0f64; 8];
    let mut rng_state = 12345u64;
    let mut next_u = || {
        // xorshift, only for spreading evaluation points
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        (rng_state >> 11) as f64 / (1u64 << 53) as f64
    };
    for d in &grid {
        let (p, t, k) = (d.p(), d.theta(), d.k());
        let top = d.quantile(1.0 - 1e-10).unwrap();
        let mass = integrate(|x| d.pdf(x).unwrap(), 0.0, top, 1e-12);
        worst[0] = worst[0].max((mass - 1.0).abs());

        for _ in 0..50 {
            let u = 0.001 + 0.998 * next_u();
            let x = d.quantile(u).unwrap();
            let h = 1e-5 / t;
            let lo = (x - h).max(0.0);
            let fd = (d.cdf(x + h).unwrap() - d.cdf(lo).unwrap()) / (x + h - lo);
            worst[1] = worst[1].max((fd - d.pdf(x).unwrap()).abs());
            worst[2] = worst[2].max((d.cdf(x).unwrap() - u).abs());
            let back = d.quantile(d.cdf(x).unwrap()).unwrap();
            worst[2] = worst[2].max((back - x).abs() / x.max(1.0 / t));
        }

        for i in 1..=20 {
            let x = d.quantile(i as f64 / 21.0).unwrap();
            let s = survival_closed(p, t, k, x);
            let hz = hazard_closed(p, t, k, x);
            worst[4] = worst[4]
                .max((d.survival(x).unwrap() - s).abs())
                .max((d.hazard(x).unwrap() - hz).abs() / hz.max(1.0));
            if k == 1 {
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
                worst[3] = worst[3]
                    .max(rel(d.pdf(x).unwrap(), el::pdf(p, t, x)))
                    .max((d.cdf(x).unwrap() - el::cdf(p, t, x)).abs())
                    .max(rel(d.hazard(x).unwrap(), el::hazard(p, t, x)));
            }
        }
        if k == 1 {
            let q = d.quantile(0.5).unwrap();
            worst[3] = worst[3].max((q - el::median(p, t)).abs() / q);
        }

        let far = d.quantile(1.0 - 1e-15).unwrap() * 1.5;
        for r in 1..=2u32 {
            let q = integrate(|x| x.powi(r as i32) * d.pdf(x).unwrap(), 0.0, far, 1e-12);
            worst[5] = worst[5].max((d.raw_moment(r, &ctl).unwrap() - q).abs());
        }

        if k == 1 {
            let h0 = t * p / (-(1.0 - p) * (-p).ln_1p());
            worst[6] = worst[6].max((d.hazard(0.0).unwrap() - h0).abs() / h0);
            worst[6] = worst[6].max((d.hazard(60.0 / t).unwrap() - t).abs() / t);
        } else {
            worst[7] = worst[7].max(d.hazard(0.0).unwrap());
        }
    }
    let labels = [
        ("normalization", 1e-7),
        ("pdf = d cdf / dx", 1e-6),
        ("quantile round trip", 1e-9),
        ("k = 1 exponential-logarithmic forms", 1e-12),
        ("closed survival/hazard forms, k <= 3", 1e-10),
        ("moments vs quadrature, r = 1, 2", 1e-6),
        ("k = 1 hazard at 0 and at infinity", 1e-12),
        ("k >= 2 hazard at 0", 0.0),
    ];
    for (i, (label, tol)) in labels.iter().enumerate() {
        out.check(
            worst[i] <= *tol,
            format!(
                "{label}: worst {:.2e} (tol {tol:e}) over {} points",
                worst[i],
                grid.len()
            ),
        );
    }
    out
}

fn estimator_cross_validation() -> Outcome {
    let mut out = Outcome::new();
    let ctl = SeriesControl::default();
    let settings = [
        (0.5, 0.5, 1),
        (0.7, 1.5, 2),
        (0.3, 2.0, 3),
        (0.8, 1.0, 4),
        (0.2, 0.7, 2),
    ];
    let results: Vec<(f64, bool, f64, f64, bool)> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let (p, t, k) = settings[i as usize % settings.len()];
            let ds = Dataset::new(params(p, t, k).sample(1000, 700 + i), "sim").unwrap();
            let mle = fit_mle(&ds, k, None).unwrap();
            let em = fit_em(&ds, k, default_init(&ds, k)).unwrap();
            let gap = (mle.p() - em.p())
                .abs()
                .max((mle.theta() - em.theta()).abs());
            let both = mle.converged && em.converged && !mle.boundary && !em.boundary;

            let (pe, te) = (p * 0.9, t * 1.1);
            let (sp, st) = score(ds.values(), &params(pe, te, k)).unwrap();
            let hp = 1e-6 * pe.min(1.0 - pe);
            let ht = 1e-6 * te;
            let ll = |a: f64, b: f64| log_likelihood(ds.values(), &params(a, b, k)).unwrap();
            let fp = (ll(pe + hp, te) - ll(pe - hp, te)) / (2.0 * hp);
            let ft = (ll(pe, te + ht) - ll(pe, te - ht)) / (2.0 * ht);
            let rel = ((sp - fp).abs() / sp.abs().max(fp.abs()).max(1.0))
                .max((st - ft).abs() / st.abs().max(ft.abs()).max(1.0));

            let truth = params(p, t, k);
            let m1 = truth.raw_moment(1, &ctl).unwrap();
            let m2 = truth.raw_moment(2, &ctl).unwrap();
            let (back, _) = fit_moments_from_moments(m1, m2, k, &ctl).unwrap();
            let mom = (back.p() - p).abs().max((back.theta() - t).abs() / t);
            (gap, is_monotone(&em) && both, rel, mom, both)
        })
        .collect();
    let worst =
        |f: fn(&(f64, bool, f64, f64, bool)) -> f64| results.iter().map(f).fold(0.0, f64::max);
    let gap = worst(|r| r.0);
    let interior = results.iter().filter(|r| r.4).count();
    out.check(gap < 1e-4, format!("EM vs direct MLE: worst coordinate gap {gap:.2e} over 20 datasets (n = 1000), {interior} interior converged"));
    let monotone = results.iter().filter(|r| r.1).count();
    out.check(
        monotone == 20,
        format!("EM log-likelihood nondecreasing and converged in {monotone} of 20 runs"),
    );
    let fd = worst(|r| r.2);
    out.check(
        fd < 1e-5,
        format!("score vs central differences: worst relative error {fd:.2e}"),
    );
    let mom = worst(|r| r.3);
    out.check(
        mom < 1e-6,
        format!("moment equations on exact population moments: worst error {mom:.2e}"),
    );
    out
}

fn full_scale() -> bool {
    std::env::var("EGTL_ACCEPTANCE_FULL").is_ok_and(|v| v == "1")
}

fn sampler_validity() -> Outcome {
    let mut out = Outcome::new();
    let full = full_scale();
    let runs = if full { 100 } else { 10 };
    let needed = if full { 98 } else { 10 };
    let sets: Vec<EgtlParams> = param_grid(&[1])
        .iter()
        .enumerate()
        .map(|(i, d)| params(d.p(), d.theta(), 1 + (i as u32 % 3)))
        .collect();
    for (i, m) in sets.iter().enumerate() {
        let passes = (0..runs as u64)
            .into_par_iter()
            .filter(|&r| {
                let mut x = m.sample(100_000, 50_000 + 1000 * i as u64 + r);
                x.sort_by(f64::total_cmp);
                let d = ks_statistic(&x, |t| m.cdf(t).unwrap());
                ks_p_value(d, x.len()) > 0.01
            })
            .count();
        out.check(
            passes >= needed,
            format!(
                "p={} theta={} k={}: {passes} of {runs} runs pass at the 1% level",
                m.p(),
                m.theta(),
                m.k()
            ),
        );
    }
    out
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        report(
            1,
            "K-S distance at reference parameter points",
            secs(1),
            ks_at_reference_points,
        ),
        report(
            2,
            "gamma and Weibull baseline K-S distances",
            secs(5),
            baseline_ks,
        ),
        report(
            3,
            "significance pattern of the K-S p-values",
            secs(30),
            significance_pattern,
        ),
        report(
            4,
            "MLE log-likelihood dominates reference points",
            secs(30),
            mle_dominates_reference_points,
        ),
        report(
            5,
            "directional Monte Carlo properties",
            secs(600),
            directional_simulation,
        ),
        report(
            6,
            "distribution invariants on the 27-point grid",
            secs(120),
            distribution_invariants,
        ),
        report(
            7,
            "estimator cross-validation",
            secs(300),
            estimator_cross_validation,
        ),
        // the time budget is set for 10 runs per set
        report(
            8,
            "sampler validity by one-sample K-S",
            secs(if full_scale() { 1800 } else { 180 }),
            sampler_validity,
        ),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed} of {} criteria pass", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
