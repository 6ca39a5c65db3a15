//! Norm sweeps of the continued vectors, the termwise lower bound, synthetic
//! spectra and the propagation of the smoothed spectral sum to partial sums.

use crate::continuation::{ln_abs_sq, modulus_argument, u_eps};
use crate::error::{Error, Result};
use crate::fit::{band_ratio, linear_fit, LineFit};
use crate::norms::comp_norm;
use crate::quad::{integrate_line, integrate_with_breaks, LineGrid, QuadOptions};
use crate::repmodels::{mean_square, CircleVector, Series, SpectralParameter};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Exponent constant of the termwise lower bound `exp((pi/2 - 6 eps) t)`.
pub const LOWER_BOUND_RATE: f64 = 6.0;

fn sweep_grid(eps: f64) -> LineGrid {
    LineGrid { center: 0.0, fine: eps, coarse: 1.0 / eps, breaks: vec![-2.0, -1.0, 1.0, 2.0] }
}

/// `ln ||v_eps||^2` for `lambda = it` (line model, accumulated relative to the
/// peak `exp(|t| pi/2)`) or for complementary `lambda` (pairing norm).
pub fn ln_norm_sq(eps: f64, lambda: &SpectralParameter) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("epsilon {eps} not in (0, 1]")));
    }
    match lambda.series {
        Series::Principal => {
            let shift = lambda.lambda.im.abs() * FRAC_PI_2;
            let lam = *lambda;
            let f = move |x: f64| Complex64::new((ln_abs_sq(eps, &lam, x) - shift).exp(), 0.0);
            let r = integrate_line(&f, &sweep_grid(eps), QuadOptions { rel_tol: 1e-10, ..Default::default() })?;
            if !(r.value.re > 0.0) {
                return Err(Error::Quadrature(format!("non-positive norm at eps = {eps}")));
            }
            Ok(shift + (r.value.re / PI).ln())
        }
        Series::Complementary => Ok(2.0 * comp_norm(&u_eps(eps, lambda)?, lambda.lambda.re)?.ln()),
        Series::General => Err(Error::Domain("norm needs a unitary parameter".into())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub ln_norm_sq: f64,
    pub norm_sq: f64,
    /// `||v_eps||^2 / ln(1/eps)`.
    pub ratio: f64,
    /// Quadrature failure for this row, if any.
    pub flag: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormSweep {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub rows: Vec<SweepRow>,
    /// `||v_eps||^2` against `ln(1/eps)` over the unflagged rows.
    pub fit: Option<LineFit>,
    /// `max / min` of the ratio column.
    pub band: f64,
}

/// `||v_eps||^2` over the grid, with the regression against `ln(1/eps)`.
pub fn norm_sweep(lambda: &SpectralParameter, eps_grid: &[f64]) -> Result<NormSweep> {
    if lambda.series == Series::General {
        return Err(Error::Domain("norm sweep needs a unitary parameter".into()));
    }
    if let Some(e) = eps_grid.iter().find(|e| !(**e > 0.0 && **e <= 0.25)) {
        return Err(Error::Domain(format!("epsilon {e} not in (0, 1/4]")));
    }
    let rows: Vec<SweepRow> = eps_grid
        .par_iter()
        .map(|&eps| {
            let l = (1.0 / eps).ln();
            match ln_norm_sq(eps, lambda) {
                Ok(v) => SweepRow { epsilon: eps, ln_norm_sq: v, norm_sq: v.exp(), ratio: v.exp() / l, flag: None },
                Err(e) => SweepRow { epsilon: eps, ln_norm_sq: f64::NAN, norm_sq: f64::NAN, ratio: f64::NAN, flag: Some(e.to_string()) },
            }
        })
        .collect();
    let good: Vec<&SweepRow> = rows.iter().filter(|r| r.flag.is_none()).collect();
    let fit = (good.len() >= 2).then(|| {
        let x: Vec<f64> = good.iter().map(|r| (1.0 / r.epsilon).ln()).collect();
        let y: Vec<f64> = good.iter().map(|r| r.norm_sq).collect();
        linear_fit(&x, &y)
    });
    let band = if good.is_empty() { f64::NAN } else { band_ratio(&good.iter().map(|r| r.ratio).collect::<Vec<_>>()) };
    Ok(NormSweep { lambda_re: lambda.lambda.re, lambda_im: lambda.lambda.im, rows, fit, band })
}

/// `(int of the three-zone majorant of 1/m, int 1/m)` at `t = 0`. The majorant
/// is `1/eps` on `|x| <= eps`, `1/|x|` up to `1/eps` and `1/(eps x^2)` beyond,
/// with integral `4 + 4 ln(1/eps)`.
pub fn majorant_check(eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::Domain(format!("epsilon {eps} not in (0, 1/4]")));
    }
    let f = |x: f64| Complex64::new(1.0 / modulus_argument(eps, x).0, 0.0);
    let direct = integrate_line(&f, &sweep_grid(eps), QuadOptions::default())?.value.re;
    Ok((4.0 + 4.0 * (1.0 / eps).ln(), direct))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LowerBound {
    pub t: f64,
    pub epsilon: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    /// `ln lhs - ln rhs`.
    pub margin: f64,
}

/// `ln ||v_eps||^2` against `ln exp((pi/2 - 6 eps) t)` for `lambda = it`.
pub fn lower_bound_check(t: f64, eps: f64) -> Result<LowerBound> {
    if !(eps > 0.0 && eps < 0.1 + 1e-15) || t < 0.0 {
        return Err(Error::Domain(format!("lower bound needs 0 < eps <= 0.1 and t >= 0, got ({eps}, {t})")));
    }
    let ln_lhs = ln_norm_sq(eps, &SpectralParameter::principal(t))?;
    let ln_rhs = (FRAC_PI_2 - LOWER_BOUND_RATE * eps) * t;
    Ok(LowerBound { t, epsilon: eps, ln_lhs, ln_rhs, margin: ln_lhs - ln_rhs })
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundFit {
    pub rows: Vec<LowerBound>,
    /// `ln c = min margin`.
    pub ln_c: f64,
    /// Slope of `ln ||v_eps||^2` in `t`, per epsilon.
    pub slopes: Vec<(f64, f64)>,
    /// Slope of the margin in `t`, per epsilon; nonnegative means no downward drift.
    pub margin_slopes: Vec<(f64, f64)>,
}

pub fn lower_bound_fit(ts: &[f64], eps: &[f64]) -> Result<LowerBoundFit> {
    let pairs: Vec<(f64, f64)> = eps.iter().flat_map(|&e| ts.iter().map(move |&t| (t, e))).collect();
    let rows: Vec<LowerBound> = pairs.par_iter().map(|&(t, e)| lower_bound_check(t, e)).collect::<Result<_>>()?;
    let ln_c = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let mut slopes = Vec::new();
    let mut margin_slopes = Vec::new();
    for &e in eps {
        let sel: Vec<&LowerBound> = rows.iter().filter(|r| r.epsilon == e).collect();
        if sel.len() >= 2 {
            let x: Vec<f64> = sel.iter().map(|r| r.t).collect();
            slopes.push((e, linear_fit(&x, &sel.iter().map(|r| r.ln_lhs).collect::<Vec<_>>()).slope));
            margin_slopes.push((e, linear_fit(&x, &sel.iter().map(|r| r.margin).collect::<Vec<_>>()).slope));
        }
    }
    Ok(LowerBoundFit { rows, ln_c, slopes, margin_slopes })
}

/// `ln((1/pi) int_{-2}^{-1} |u_eps|^2)`, the unit segment on which
/// `|arg q_eps| >= pi/2 - 3 eps`; for `t > 0` it alone carries the growth.
pub fn segment_witness(t: f64, eps: f64) -> Result<f64> {
    let lam = SpectralParameter::principal(t);
    let shift = t.abs() * FRAC_PI_2;
    let f = |x: f64| Complex64::new((ln_abs_sq(eps, &lam, x) - shift).exp(), 0.0);
    let r = integrate_with_breaks(&f, -2.0, -1.0, &[], QuadOptions::default())?;
    Ok(shift + (r.value.re / PI).ln())
}

/// One eigenvalue with its triple-product coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// `|lambda_i|`.
    pub lambda: f64,
    pub c: Complex64,
    /// `|c|^2 exp(pi lambda / 2)`.
    pub b: f64,
}

impl SpectrumEntry {
    pub fn new(lambda: f64, c: Complex64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) || !c.is_finite() {
            return Err(Error::Domain(format!("bad spectrum entry ({lambda}, {c})")));
        }
        Ok(SpectrumEntry { lambda, c, b: b_normalize(lambda, c) })
    }
}

/// `b = |c|^2 exp(pi lambda / 2)`.
pub fn b_normalize(lambda: f64, c: Complex64) -> f64 {
    c.norm_sqr() * (FRAC_PI_2 * lambda).exp()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParsevalSide {
    /// `sum |c_i|^2 ||v_eps(lambda_i)||^2`.
    pub rhs: f64,
    /// `c_fit sum b_i exp(-6 eps lambda_i)`.
    pub minorant: f64,
    /// `min ||v_eps(t)||^2 / exp((pi/2 - 6 eps) t)` over the calibration grid.
    pub c_fit: f64,
}

/// Right side of the Parseval identity on a finite spectrum, with the
/// termwise minorant. Errors if the minorant exceeds the sum.
pub fn parseval_rhs(spectrum: &[SpectrumEntry], eps: f64) -> Result<ParsevalSide> {
    if spectrum.is_empty() {
        return Ok(ParsevalSide { rhs: 0.0, minorant: 0.0, c_fit: f64::NAN });
    }
    let ln_norms: Vec<f64> =
        spectrum.par_iter().map(|e| ln_norm_sq(eps, &SpectralParameter::principal(e.lambda))).collect::<Result<_>>()?;
    let rate = FRAC_PI_2 - LOWER_BOUND_RATE * eps;
    let calib: Vec<f64> = (0..=30).map(|t| t as f64).collect();
    let mut ln_c = calib
        .par_iter()
        .map(|&t| ln_norm_sq(eps, &SpectralParameter::principal(t)).map(|v| v - rate * t))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    for (e, v) in spectrum.iter().zip(&ln_norms) {
        ln_c = ln_c.min(v - rate * e.lambda);
    }
    let rhs: f64 = spectrum.iter().zip(&ln_norms).map(|(e, v)| e.c.norm_sqr() * v.exp()).sum();
    let minorant: f64 =
        spectrum.iter().map(|e| e.c.norm_sqr() * (rate * e.lambda + ln_c).exp()).sum();
    if minorant > rhs * (1.0 + 1e-12) {
        return Err(Error::Invariant(format!("minorant {minorant:.6e} exceeds Parseval sum {rhs:.6e}")));
    }
    Ok(ParsevalSide { rhs, minorant, c_fit: ln_c.exp() })
}

/// `e^6 A (ln T)^3`, the partial-sum bound for `sum_{lambda_i <= T} b_i`
/// implied by `sum b_i exp(-6 eps lambda_i) <= A |ln eps|^3` at `eps = 1/T`.
pub fn propagate(a: f64, t: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("premise constant {a} must be positive")));
    }
    if !(t >= std::f64::consts::E) {
        return Err(Error::Domain(format!("T = {t} below e")));
    }
    Ok(6f64.exp() * a * t.ln().powi(3))
}

/// `sum b_i exp(-6 eps lambda_i)`.
pub fn smoothed_sum(spectrum: &[SpectrumEntry], eps: f64) -> f64 {
    spectrum.iter().map(|e| e.b * (-LOWER_BOUND_RATE * eps * e.lambda).exp()).sum()
}

pub fn partial_sum(spectrum: &[SpectrumEntry], t: f64) -> f64 {
    spectrum.iter().filter(|e| e.lambda <= t).map(|e| e.b).sum()
}

/// `max smoothed_sum(eps) / |ln eps|^3` over `eps = 1/T`, `T` in the grid.
pub fn premise_constant(spectrum: &[SpectrumEntry], t_grid: &[f64]) -> f64 {
    t_grid
        .iter()
        .map(|&t| smoothed_sum(spectrum, 1.0 / t) / t.ln().powi(3))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    pub partial_sum: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn propagation_ledger(spectrum: &[SpectrumEntry], a: f64, ts: &[f64]) -> Result<Vec<LedgerRow>> {
    ts.iter()
        .map(|&t| {
            let bound = propagate(a, t)?;
            let ps = partial_sum(spectrum, t);
            Ok(LedgerRow { t, partial_sum: ps, bound, ok: ps <= bound })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeylSpec {
    pub t_max: f64,
    /// Counting function `~ density T^2`.
    pub density: f64,
    /// `b_i ~ max(1, lambda_i)^{-b_exponent}`.
    pub b_exponent: f64,
    pub seed: u64,
}

impl Default for WeylSpec {
    fn default() -> Self {
        WeylSpec { t_max: 100.0, density: 1.0, b_exponent: 2.0, seed: 0 }
    }
}

/// Seeded synthetic spectrum: `lambda_n = sqrt((n + U_n) / density)` and
/// `b_n = max(1, lambda_n)^{-p}` with a uniform jitter in `[1/2, 3/2]`.
pub fn weyl_spectrum(spec: &WeylSpec) -> Result<Vec<SpectrumEntry>> {
    if !(spec.density > 0.0) {
        return Err(Error::Domain(format!("density {} must be positive", spec.density)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    for n in 0.. {
        let u: f64 = rng.gen();
        let lambda = ((n as f64 + u) / spec.density).sqrt();
        let jitter: f64 = rng.gen_range(0.5..1.5);
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        if lambda > spec.t_max {
            break;
        }
        let b = lambda.max(1.0).powf(-spec.b_exponent) * jitter;
        let c = Complex64::from_polar((b * (-FRAC_PI_2 * lambda).exp()).sqrt(), phase);
        out.push(SpectrumEntry::new(lambda, c)?);
    }
    Ok(out)
}

/// `(||f^2||^2, ||f||^2 sup|f|^2)` on `n` circle samples.
pub fn cauchy_schwarz_check(f: &CircleVector, n: usize) -> (f64, f64) {
    let s = f.samples(n);
    let sup = s.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let sq = CircleVector::from_fn({
        let f = f.clone();
        move |t| {
            let v = f.eval(t);
            v * v
        }
    });
    (mean_square(&sq, n), mean_square(f, n) * sup)
}
