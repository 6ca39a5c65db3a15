//! Siegel-domain quantities for `SL(2, Z)` with its cusp at infinity: height,
//! horocycle distance, the fiber weight and the periodic mean-value bound.

use crate::algebra::GroupElement;
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

/// Half-width of the reference ball `B = {||g - 1||_max <= 1/4}`.
pub const BALL_RADIUS: f64 = 0.25;

/// `||x y^{-1} - 1||_max <= 2 r^2 + 2 r` for `x, y` in `B`, so the fibers are
/// counted in this larger max-norm ball around the identity.
pub const FIBER_RADIUS: f64 = 2.0 * BALL_RADIUS * BALL_RADIUS + 2.0 * BALL_RADIUS;

/// Iwasawa height `h` of `g = n(x) a(h) k`; the point `g(i)` has `Im = e^{2h}`.
pub fn height(g: &GroupElement) -> f64 {
    g.iwasawa().height
}

pub fn in_siegel(g: &GroupElement, t: f64) -> bool {
    height(g) > t
}

/// `min(1, diam)` where `diam = arccosh(1 + 1/(8 y^2))` is the hyperbolic
/// diameter of the closed horocycle `Im z = y` modulo `z -> z + 1`.
pub fn horo_distance(g: &GroupElement) -> f64 {
    let y = (2.0 * height(g)).exp();
    let x = 1.0 / (8.0 * y * y);
    // arccosh(1 + x) without cancellation for small x
    (x + (x * (x + 2.0)).sqrt()).ln_1p().min(1.0)
}

fn row_norm(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Entry bounds `|gamma_ij| <= |row_i(g)| ||M||_op |col_j(g^{-1})|` for
/// `gamma = g M g^{-1}` with `M` in the fiber ball.
fn apriori_bounds(g: &GroupElement) -> [[f64; 2]; 2] {
    let gi = g.inverse();
    let op = 2.0 * (1.0 + FIBER_RADIUS);
    let rows = [row_norm(g.a, g.b), row_norm(g.c, g.d)];
    let cols = [row_norm(gi.a, gi.c), row_norm(gi.b, gi.d)];
    [[rows[0] * op * cols[0], rows[0] * op * cols[1]], [rows[1] * op * cols[0], rows[1] * op * cols[1]]]
}

/// Entry bound large enough for an exhaustive count at `g`.
pub fn default_entry_bound(g: &GroupElement) -> i64 {
    let b = apriori_bounds(g);
    let m = b.iter().flatten().cloned().fold(0.0, f64::max);
    (2.0 * m).ceil() as i64 + 2
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// `(x, y)` with `a x + b y = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum(), 0, a.abs())
    } else {
        let (x, y, g) = ext_gcd(b, a % b);
        (y, x - (a / b) * y, g)
    }
}

fn conj(gi: &GroupElement, m: [[f64; 2]; 2], g: &GroupElement) -> [[f64; 2]; 2] {
    let x = GroupElement { a: m[0][0], b: m[0][1], c: m[1][0], d: m[1][1] };
    let p = gi.mul_unchecked(&x).mul_unchecked(g);
    [[p.a, p.b], [p.c, p.d]]
}

fn intersect(iv: (f64, f64), lo: f64, hi: f64) -> (f64, f64) {
    (iv.0.max(lo), iv.1.min(hi))
}

/// Interval of real `m` with `|alpha + m beta - target| <= r`.
fn affine_interval(alpha: f64, beta: f64, target: f64, r: f64) -> (f64, f64) {
    if beta == 0.0 {
        return if (alpha - target).abs() <= r { (f64::NEG_INFINITY, f64::INFINITY) } else { (1.0, 0.0) };
    }
    let a = (target - r - alpha) / beta;
    let b = (target + r - alpha) / beta;
    (a.min(b), a.max(b))
}

fn integers_in(iv: (f64, f64)) -> u64 {
    if !(iv.0 <= iv.1) {
        return 0;
    }
    let lo = iv.0.ceil();
    let hi = iv.1.floor();
    if hi < lo {
        0
    } else {
        (hi - lo) as u64 + 1
    }
}

/// `#{gamma in SL(2,Z) : entries <= entry_bound, ||g^{-1} gamma g - 1||_max <= FIBER_RADIUS}`.
///
/// Bottom rows `(c, d)` are bounded a priori; each coprime row gives the coset
/// `n(m) gamma_0`, on which the ball condition is an intersection of affine
/// intervals in `m`, counted exactly. Errors if `entry_bound` cuts the ball.
pub fn fiber_count(g: &GroupElement, entry_bound: i64) -> Result<u64> {
    let bounds = apriori_bounds(g);
    let eb = entry_bound as f64;
    let (cb, db) = (bounds[1][0].floor(), bounds[1][1].floor());
    if cb > eb || db > eb {
        return Err(Error::Truncated(format!(
            "bottom rows reach ({cb}, {db}); entry bound {entry_bound} too small"
        )));
    }
    let (cb, db) = (cb as i64, db as i64);
    let gi = g.inverse();
    let rows: Vec<(i64, i64)> =
        (-cb..=cb).flat_map(|c| (-db..=db).map(move |d| (c, d))).filter(|&(c, d)| gcd(c, d) == 1).collect();
    let counts: Vec<u64> = rows
        .par_iter()
        .map(|&(c, d)| {
            // a0 d - b0 c = 1
            let (x, y, _) = ext_gcd(d, -c);
            let (a0, b0) = (x, y);
            let g0 = [[a0 as f64, b0 as f64], [c as f64, d as f64]];
            let e0 = [[c as f64, d as f64], [0.0, 0.0]];
            let alpha = conj(&gi, g0, g);
            let beta = conj(&gi, e0, g);
            let mut iv = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..2 {
                for j in 0..2 {
                    let target = if i == j { 1.0 } else { 0.0 };
                    let a = affine_interval(alpha[i][j], beta[i][j], target, FIBER_RADIUS);
                    iv = intersect(iv, a.0, a.1);
                }
            }
            let ball = iv;
            for (base, step) in [(a0 as f64, c as f64), (b0 as f64, d as f64)] {
                let a = affine_interval(base, step, 0.0, eb);
                iv = intersect(iv, a.0, a.1);
            }
            let n = integers_in(iv);
            if n != integers_in(ball) {
                return Err(Error::Truncated(format!("entry bound {entry_bound} cuts the coset of ({c}, {d})")));
            }
            Ok(n)
        })
        .collect::<Result<_>>()?;
    Ok(counts.iter().sum())
}

/// `w(g) = sqrt(fiber_count)`.
pub fn weight(g: &GroupElement, entry_bound: i64) -> Result<f64> {
    Ok((fiber_count(g, entry_bound)? as f64).sqrt())
}

/// `g = n(x) a(h) k(theta)` with `x` in `[-1/2, 1/2)`, `h` in `[h_lo, h_hi]`.
pub fn siegel_samples(n: usize, h_lo: f64, h_hi: f64, seed: u64) -> Vec<GroupElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = rng.gen_range(-0.5..0.5);
            let h = rng.gen_range(h_lo..=h_hi);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            GroupElement::unipotent(x)
                .mul_unchecked(&GroupElement::diagonal(h))
                .mul_unchecked(&GroupElement::rotation(t))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DwRow {
    pub height: f64,
    pub d: f64,
    pub w: f64,
    pub product: f64,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DwScan {
    pub rows: Vec<DwRow>,
    pub max_product: f64,
    /// Slope of `ln(d w)` against `h`.
    pub slope: f64,
    /// Fitted `c` in `w ~ e^{c h}`.
    pub w_exponent: f64,
    /// Fitted `c` in `d ~ e^{c h}`.
    pub d_exponent: f64,
    /// Counts unchanged under a doubled entry bound.
    pub stable: bool,
}

pub fn dw_bounded_scan(samples: &[GroupElement]) -> Result<DwScan> {
    if samples.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    let rows: Vec<(DwRow, bool)> = samples
        .par_iter()
        .map(|g| {
            let eb = default_entry_bound(g);
            let count = fiber_count(g, eb)?;
            let again = fiber_count(g, 2 * eb)?;
            let w = (count as f64).sqrt();
            let d = horo_distance(g);
            Ok((DwRow { height: height(g), d, w, product: d * w, count }, count == again))
        })
        .collect::<Result<_>>()?;
    let stable = rows.iter().all(|r| r.1);
    let rows: Vec<DwRow> = rows.into_iter().map(|r| r.0).collect();
    let max_product = rows.iter().map(|r| r.product).fold(0.0, f64::max);
    let (slope, w_exponent, d_exponent) = if rows.len() >= 2 {
        let h: Vec<f64> = rows.iter().map(|r| r.height).collect();
        let fit = |f: &dyn Fn(&DwRow) -> f64| linear_fit(&h, &rows.iter().map(f).collect::<Vec<_>>()).slope;
        (fit(&|r| r.product.ln()), fit(&|r| r.w.ln()), fit(&|r| r.d.ln()))
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(DwScan { rows, max_product, slope, w_exponent, d_exponent, stable })
}

/// `max w(x h) / w(x)` over the sample: the fitted weight-factor constant.
pub fn right_translation_constant(samples: &[GroupElement], h: &GroupElement) -> Result<f64> {
    let ratios: Vec<f64> = samples
        .par_iter()
        .map(|g| {
            let gh = g.mul_unchecked(h);
            Ok(weight(&gh, default_entry_bound(&gh))? / weight(g, default_entry_bound(g))?)
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Oversampling factor for the trigonometric interpolant.
const OVERSAMPLE: usize = 8;

/// `(sup|f|, (L/2) sup|f'|)` for a real zero-mean periodic function given by
/// equispaced samples over one period of length `L`. The derivative is
/// spectral, and both sups are taken on the oversampled interpolant.
pub fn mean_value_bound(samples: &[f64], period: f64) -> Result<(f64, f64)> {
    let n = samples.len();
    if n == 0 || !(period > 0.0) {
        return Err(Error::Domain("need samples and a positive period".into()));
    }
    let scale = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mean = samples.iter().sum::<f64>() / n as f64;
    if mean.abs() > 1e-10 * scale.max(1e-300) && scale > 0.0 {
        return Err(Error::Domain(format!("mean {mean:.3e} is not zero")));
    }
    if scale == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    let big = n * OVERSAMPLE;
    let mut f_hat = vec![Complex::new(0.0, 0.0); big];
    let mut d_hat = vec![Complex::new(0.0, 0.0); big];
    let half = n / 2;
    for (k, &c) in spec.iter().enumerate() {
        let freq = if k <= half { k as i64 } else { k as i64 - n as i64 };
        // split the Nyquist term evenly to keep the interpolant real
        let c = if n % 2 == 0 && k == half { c * 0.5 } else { c };
        let idx = |f: i64| if f >= 0 { f as usize } else { (big as i64 + f) as usize };
        let w = Complex::new(0.0, std::f64::consts::TAU * freq as f64 / period);
        f_hat[idx(freq)] += c;
        d_hat[idx(freq)] += c * w;
        if n % 2 == 0 && k == half {
            f_hat[idx(-freq)] += c;
            d_hat[idx(-freq)] -= c * w;
        }
    }
    let inv = planner.plan_fft_inverse(big);
    inv.process(&mut f_hat);
    inv.process(&mut d_hat);
    let norm = 1.0 / n as f64;
    let sup_f = f_hat.iter().map(|z| (z.re * norm).abs()).fold(0.0, f64::max);
    let sup_d = d_hat.iter().map(|z| (z.re * norm).abs()).fold(0.0, f64::max);
    Ok((sup_f, 0.5 * period * sup_d))
}
