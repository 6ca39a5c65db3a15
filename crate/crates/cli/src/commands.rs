use crate::error::CliError;
use crate::output::TableWriter;
use serde::Serialize;
use sl2cont::acceptance::run_all;
use sl2cont::algebra::transform_form_real;
use sl2cont::config::{parse_spectrum, Command, SweepConfig};
use sl2cont::continuation::{g_eps, g_prime, spherical};
use sl2cont::cusp::{dw_bounded_scan, siegel_samples};
use sl2cont::fit::{band_ratio, power_law_exponent};
use sl2cont::geometry::{decompose_u, diagonal_form, form_from_points, is_in_qplus, PointPair};
use sl2cont::invnorm::{dyadic_bound, invariant_bound_veps_k, HomogeneousFamily};
use sl2cont::norms::l2_line;
use sl2cont::repmodels::{Series, SpectralParameter};
use sl2cont::spectral::{
    ln_norm_sq, lower_bound_fit, majorant_check, norm_sweep, premise_constant, propagation_ledger, weyl_spectrum,
    WeylSpec,
};
use sl2cont::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;

#[derive(Default)]
pub struct Outcome {
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub summary: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.summary.push(format!("ok   {what}"));
        } else {
            self.summary.push(format!("FAIL {what}"));
            self.failures.push(what);
        }
    }
}

pub fn run(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::NormSweep => norm_sweep_cmd(cfg, out),
        Command::InvariantBound => invariant_bound_cmd(cfg, out),
        Command::Dyadic => dyadic_cmd(cfg, out),
        Command::Geometry => geometry_cmd(cfg, out),
        Command::SphericalCheck => spherical_cmd(cfg, out),
        Command::Propagate => propagate_cmd(cfg, out),
        Command::CuspScan => cusp_cmd(cfg, out),
        Command::Selftest => selftest_cmd(cfg, out),
    }
}

#[derive(Serialize)]
struct SweepCsv {
    lambda_re: f64,
    lambda_im: f64,
    epsilon: f64,
    norm_sq: f64,
    ln_norm_sq: f64,
    ratio: f64,
    flag: String,
}

#[derive(Serialize)]
struct SweepFitCsv {
    lambda_re: f64,
    lambda_im: f64,
    slope: f64,
    intercept: f64,
    r_squared: f64,
    band: f64,
}

#[derive(Serialize)]
struct LowerCsv {
    t: f64,
    epsilon: f64,
    ln_lhs: f64,
    ln_rhs: f64,
    margin: f64,
}

#[derive(Serialize)]
struct MajorantCsv {
    epsilon: f64,
    majorant: f64,
    direct: f64,
    ok: bool,
}

fn norm_sweep_cmd(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    let band_max = out.tolerance("band_max", cfg.tolerance("band_max", 3.0));
    let r2_min = out.tolerance("r_squared_min", cfg.tolerance("r_squared_min", 0.999));
    let slope_tol = out.tolerance("slope_tol", cfg.tolerance("slope_tol", 0.03));
    let eps = cfg.epsilons();
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for lam in cfg.parameters() {
        let s = norm_sweep(&lam, &eps)?;
        for r in &s.rows {
            if let Some(f) = &r.flag {
                o.warnings.push(format!("lambda {}: eps {}: {f}", lam.lambda, r.epsilon));
            }
            rows.push(SweepCsv {
                lambda_re: s.lambda_re,
                lambda_im: s.lambda_im,
                epsilon: r.epsilon,
                norm_sq: r.norm_sq,
                ln_norm_sq: r.ln_norm_sq,
                ratio: r.ratio,
                flag: r.flag.clone().unwrap_or_default(),
            });
        }
        let fit = s.fit.unwrap_or(sl2cont::fit::LineFit { slope: f64::NAN, intercept: f64::NAN, r_squared: f64::NAN });
        o.check(s.band <= band_max, format!("lambda {}: ratio band {:.4} <= {band_max}", lam.lambda, s.band));
        if lam.lambda == Complex64::new(0.0, 0.0) && s.fit.is_some() {
            o.check(fit.r_squared >= r2_min, format!("lambda 0: R^2 {:.6} >= {r2_min}", fit.r_squared));
        }
        fits.push(SweepFitCsv {
            lambda_re: s.lambda_re,
            lambda_im: s.lambda_im,
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            band: s.band,
        });
    }
    let mut maj = Vec::new();
    for &e in &eps {
        let (m, d) = majorant_check(e)?;
        maj.push(MajorantCsv { epsilon: e, majorant: m, direct: d, ok: d <= m });
    }
    o.check(maj.iter().all(|m| m.ok), "three-zone majorant dominates at t = 0".into());

    let ts = cfg.t_grid.clone().unwrap_or_else(|| (1..=30).map(|t| t as f64).collect());
    let lb = lower_bound_fit(&ts, &[0.1, 0.01])?;
    let lower: Vec<LowerCsv> = lb
        .rows
        .iter()
        .map(|r| LowerCsv { t: r.t, epsilon: r.epsilon, ln_lhs: r.ln_lhs, ln_rhs: r.ln_rhs, margin: r.margin })
        .collect();
    o.summary.push(format!("lower bound: ln c = {:.4}", lb.ln_c));
    if let Some((_, slope)) = lb.slopes.iter().find(|(e, _)| *e == 0.01) {
        let rel = slope / FRAC_PI_2 - 1.0;
        o.check(rel.abs() <= slope_tol, format!("slope in t at eps 0.01: {slope:.4} ({:+.2}% of pi/2)", 100.0 * rel));
    }

    out.write("norm_sweep", &["lambda_re", "lambda_im", "epsilon", "norm_sq", "ln_norm_sq", "ratio", "flag"], &rows)?;
    out.write("norm_sweep_fit", &["lambda_re", "lambda_im", "slope", "intercept", "r_squared", "band"], &fits)?;
    out.write("majorant", &["epsilon", "majorant", "direct", "ok"], &maj)?;
    out.write("lower_bound", &["t", "epsilon", "ln_lhs", "ln_rhs", "margin"], &lower)?;
    Ok(o)
}

#[derive(Serialize)]
struct BoundCsv {
    lambda_re: f64,
    lambda_im: f64,
    epsilon: f64,
    value: f64,
    y_axis: f64,
    x_axis: f64,
    bulk: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct ExponentCsv {
    lambda_re: f64,
    lambda_im: f64,
    exponent: f64,
}

fn invariant_bound_cmd(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    let tol = out.tolerance("exponent_tol", cfg.tolerance("exponent_tol", 0.05));
    let eps = cfg.epsilons();
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for lam in cfg.parameters() {
        let mut ratios = Vec::new();
        for &e in &eps {
            let b = invariant_bound_veps_k(&lam, e, cfg.sobolev_order)?;
            let ratio = b.value / (1.0 / e).ln();
            ratios.push(ratio);
            rows.push(BoundCsv {
                lambda_re: lam.lambda.re,
                lambda_im: lam.lambda.im,
                epsilon: e,
                value: b.value,
                y_axis: b.y_axis,
                x_axis: b.x_axis,
                bulk: b.bulk,
                ratio,
            });
        }
        if eps.len() >= 2 {
            let p = power_law_exponent(&eps, &ratios);
            o.check(p.abs() <= tol, format!("lambda {}: exponent of bound / ln(1/eps) {p:+.4}", lam.lambda));
            fits.push(ExponentCsv { lambda_re: lam.lambda.re, lambda_im: lam.lambda.im, exponent: p });
        }
    }
    out.write("invariant_bound", &["lambda_re", "lambda_im", "epsilon", "value", "y_axis", "x_axis", "bulk", "ratio"], &rows)?;
    out.write("invariant_bound_fit", &["lambda_re", "lambda_im", "exponent"], &fits)?;
    Ok(o)
}

#[derive(Serialize)]
struct DyadicCsv {
    kappa: f64,
    epsilon: f64,
    value: f64,
    eps_term: f64,
    nodes_per_octave: usize,
    l2_norm: f64,
    sound: bool,
}

#[derive(Serialize)]
struct DyadicFitCsv {
    kappa: f64,
    exponent: f64,
    eps_term_exponent: f64,
    log_band: f64,
}

fn dyadic_cmd(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    let tol = out.tolerance("exponent_tol", cfg.tolerance("exponent_tol", 0.05));
    let band_max = out.tolerance("band_max", cfg.tolerance("band_max", 1.2));
    let eps = cfg.epsilons();
    let r = -0.5;
    let norm = SpectralParameter::principal(0.0);
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for kappa in [-1.0, 0.0, -0.5] {
        let fam = HomogeneousFamily::power(Complex64::new(kappa, 0.0), r, cfg.sobolev_order);
        let certs: Vec<_> = eps.iter().map(|&e| dyadic_bound(&fam, e)).collect::<Result<_, _>>()?;
        for (c, &e) in certs.iter().zip(&eps) {
            let l2 = l2_line(&fam.u(e), &norm)?;
            rows.push(DyadicCsv {
                kappa,
                epsilon: e,
                value: c.value,
                eps_term: c.eps_term,
                nodes_per_octave: c.nodes_per_octave,
                l2_norm: l2,
                sound: l2 <= c.value,
            });
        }
        if eps.len() < 2 {
            continue;
        }
        let vals: Vec<f64> = certs.iter().map(|c| c.value).collect();
        let eterms: Vec<f64> = certs.iter().map(|c| c.eps_term).collect();
        let ratios: Vec<f64> = vals.iter().zip(&eps).map(|(v, e)| v / (1.0 / e).ln()).collect();
        let fit = DyadicFitCsv {
            kappa,
            exponent: power_law_exponent(&eps, &vals),
            eps_term_exponent: power_law_exponent(&eps, &eterms),
            log_band: band_ratio(&ratios),
        };
        if kappa < r {
            o.check((fit.exponent - (kappa - r)).abs() <= tol, format!("kappa {kappa}: exponent {:.4} vs {}", fit.exponent, kappa - r));
        } else if kappa > r {
            o.check(
                (fit.eps_term_exponent - (kappa - r)).abs() <= tol && fit.exponent.abs() <= tol,
                format!("kappa {kappa}: eps-term exponent {:.4} vs {}, total {:.4}", fit.eps_term_exponent, kappa - r, fit.exponent),
            );
        } else {
            o.check(fit.log_band <= band_max, format!("kappa {kappa}: bound / ln(1/eps) band {:.4} <= {band_max}", fit.log_band));
        }
        fits.push(fit);
    }
    o.check(rows.iter().all(|r| r.sound), "l2 norm below every certificate".into());
    out.write("dyadic", &["kappa", "epsilon", "value", "eps_term", "nodes_per_octave", "l2_norm", "sound"], &rows)?;
    out.write("dyadic_fit", &["kappa", "exponent", "eps_term_exponent", "log_band"], &fits)?;
    Ok(o)
}

#[derive(Serialize)]
struct GeometryCsv {
    set: &'static str,
    index: usize,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    in_qplus: bool,
    recomposition_error: f64,
}

fn geometry_cmd(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    let tol = out.tolerance("relative_tol", cfg.tolerance("relative_tol", 1e-9));
    let n = cfg.samples.unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut o = Outcome::default();
    let mut rows = Vec::with_capacity(2 * n);
    // Membership over a wide box, factorization over a moderate one.
    for (set, w, lo) in [("membership", 10.0, 1e-3), ("factorization", 3.0, 0.05)] {
        for index in 0..n {
            let a = Complex64::new(rng.gen_range(-w..w), rng.gen_range(lo..=w));
            let b = Complex64::new(rng.gen_range(-w..w), -rng.gen_range(lo..=w));
            let f = form_from_points(&PointPair::new(a, b))?;
            let in_qplus = is_in_qplus(&f);
            let recomposition_error = if set == "membership" {
                0.0
            } else {
                match decompose_u(&f) {
                    Ok((g, z)) => transform_form_real(&g, &diagonal_form(z)).max_dist(&f),
                    Err(_) => f64::INFINITY,
                }
            };
            rows.push(GeometryCsv { set, index, a_re: a.re, a_im: a.im, b_re: b.re, b_im: b.im, in_qplus, recomposition_error });
        }
    }
    let outside = rows.iter().filter(|r| !r.in_qplus).count();
    let worst = rows.iter().map(|r| r.recomposition_error).fold(0.0, f64::max);
    o.check(outside == 0, format!("{outside} of {} pairs outside Q+", rows.len()));
    o.check(worst <= tol, format!("max recomposition error {worst:.2e} <= {tol:e}"));
    out.write("geometry", &["set", "index", "a_re", "a_im", "b_re", "b_im", "in_qplus", "recomposition_error"], &rows)?;
    Ok(o)
}

#[derive(Serialize)]
struct SphericalCsv {
    lambda_re: f64,
    lambda_im: f64,
    epsilon: f64,
    direct: f64,
    spherical_re: f64,
    spherical_im: f64,
    relative_error: f64,
}

fn spherical_cmd(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    let tol = out.tolerance("relative_tol", cfg.tolerance("relative_tol", 1e-5));
    let mut o = Outcome::default();
    let lams = cfg.parameters();
    if let Some(l) = lams.iter().find(|l| l.series != Series::Principal) {
        return Err(CliError::Config(format!("spherical-check needs principal lambda, got {}", l.lambda)));
    }
    let pairs: Vec<(SpectralParameter, f64)> =
        lams.iter().flat_map(|l| cfg.epsilons().into_iter().map(move |e| (*l, e))).collect();
    let rows: Vec<SphericalCsv> = pairs
        .par_iter()
        .map(|(lam, e)| {
            let g = g_eps(*e)?;
            let direct = ln_norm_sq(*e, lam)?.exp();
            let s = spherical(lam, &g_prime(&g).compose(&g)?)?;
            Ok(SphericalCsv {
                lambda_re: lam.lambda.re,
                lambda_im: lam.lambda.im,
                epsilon: *e,
                direct,
                spherical_re: s.re,
                spherical_im: s.im,
                relative_error: (s - direct).norm() / direct,
            })
        })
        .collect::<Result<_, sl2cont::Error>>()?;
    let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    o.check(worst <= tol, format!("max relative error {worst:.2e}"));
    out.write(
        "spherical_check",
        &["lambda_re", "lambda_im", "epsilon", "direct", "spherical_re", "spherical_im", "relative_error"],
        &rows,
    )?;
    Ok(o)
}

fn propagate_cmd(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    let spectrum = match &cfg.spectrum {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("spectrum file {path}: {e}")))?;
            parse_spectrum(&text)?
        }
        None => weyl_spectrum(&WeylSpec { seed: cfg.seed, ..WeylSpec::default() })?,
    };
    let ts = cfg.t_grid.clone().unwrap_or_else(|| vec![10.0, 100.0, 1000.0, 10000.0]);
    if let Some(t) = ts.iter().find(|t| **t < std::f64::consts::E) {
        return Err(CliError::Config(format!("T = {t} below e")));
    }
    let mut dense: Vec<f64> = (8..=32).map(|j| 10f64.powf(j as f64 / 8.0)).collect();
    dense.extend(&ts);
    let a = premise_constant(&spectrum, &dense).max(f64::MIN_POSITIVE);
    let ledger = propagation_ledger(&spectrum, a, &ts)?;
    let mut o = Outcome::default();
    o.summary.push(format!("{} entries, premise constant A = {a:.6e}", spectrum.len()));
    let bad = ledger.iter().filter(|r| !r.ok).count();
    o.check(bad == 0, format!("{bad} violations of partial_sum <= e^6 A (ln T)^3"));
    out.write("propagate", &["T", "partial_sum", "bound", "ok"], &ledger)?;
    Ok(o)
}

fn cusp_cmd(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    let slope_max = out.tolerance("dw_slope_max", cfg.tolerance("dw_slope_max", 0.1));
    let n = cfg.samples.unwrap_or(500);
    let scan = dw_bounded_scan(&siegel_samples(n, 1.0, 10.0, cfg.seed))?;
    let mut o = Outcome::default();
    o.summary.push(format!(
        "max d*w {:.4}, w ~ e^({:.4} h), d ~ e^({:.4} h)",
        scan.max_product, scan.w_exponent, scan.d_exponent
    ));
    o.check(scan.slope <= slope_max, format!("slope of ln(d w) in h {:.4} <= {slope_max}", scan.slope));
    o.check(scan.stable, "counts unchanged under doubled entry bound".into());
    out.write("cusp_scan", &["height", "d", "w", "product", "count"], &scan.rows)?;
    Ok(o)
}

#[derive(Serialize)]
struct SelftestCsv {
    id: u8,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn selftest_cmd(cfg: &SweepConfig, out: &mut TableWriter) -> Result<Outcome, CliError> {
    let results = run_all(cfg.seed);
    let mut o = Outcome::default();
    for r in &results {
        o.summary.push(r.to_string());
        if !r.passed {
            o.failures.push(format!("criterion {} ({}): {}", r.id, r.name, r.detail));
        }
    }
    let rows: Vec<SelftestCsv> =
        results.into_iter().map(|r| SelftestCsv { id: r.id, name: r.name, passed: r.passed, detail: r.detail }).collect();
    out.write("selftest", &["id", "name", "passed", "detail"], &rows)?;
    Ok(o)
}
