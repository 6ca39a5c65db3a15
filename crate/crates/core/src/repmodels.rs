//! Circle and line models of `D_lambda`, the real group action in each, the
//! transfer maps between them, and Fourier analysis on the circle.
//!
//! A vector of `D_lambda` is an even function on `R^2 \ 0`, homogeneous of
//! degree `lambda - 1`. The circle model keeps its restriction to the unit
//! circle, the line model its restriction `u(x) = v(x, 1)`.

use crate::algebra::GroupElement;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quad::LineGrid;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Default circle sampling.
pub const DEFAULT_SAMPLES: usize = 4096;
/// Upper limit for adaptive circle sampling.
pub const MAX_SAMPLES: usize = 1 << 21;
/// Target Parseval defect for adaptive sampling.
pub const PARSEVAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Series {
    /// `lambda = i t`.
    Principal,
    /// Real `lambda` in `(-1, 0)`.
    Complementary,
    /// Any other complex parameter, for algebraic identities only.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParameter {
    pub lambda: Complex64,
    pub series: Series,
    /// Real part of `(1 - lambda^2) / 4`; exact for both unitary series.
    pub mu: f64,
}

impl SpectralParameter {
    fn build(lambda: Complex64, series: Series) -> Self {
        let mu = ((Complex64::new(1.0, 0.0) - lambda * lambda) / 4.0).re;
        SpectralParameter { lambda, series, mu }
    }

    pub fn principal(t: f64) -> Self {
        Self::build(Complex64::new(0.0, t), Series::Principal)
    }

    pub fn complementary(lambda: f64) -> Result<Self> {
        if !(lambda > -1.0 && lambda < 0.0) {
            return Err(Error::Domain(format!("complementary parameter {lambda} not in (-1, 0)")));
        }
        Ok(Self::build(Complex64::new(lambda, 0.0), Series::Complementary))
    }

    pub fn general(lambda: Complex64) -> Self {
        Self::build(lambda, Series::General)
    }

    /// Classify `lambda`: imaginary axis is principal, `(-1, 0)` complementary.
    pub fn from_lambda(lambda: Complex64) -> Self {
        if lambda.re == 0.0 {
            Self::principal(lambda.im)
        } else if lambda.im == 0.0 && lambda.re > -1.0 && lambda.re < 0.0 {
            Self::build(lambda, Series::Complementary)
        } else {
            Self::general(lambda)
        }
    }

    /// Homogeneity degree `lambda - 1` of the model functions.
    pub fn degree(&self) -> Complex64 {
        self.lambda - 1.0
    }

    /// `kappa = (lambda - 1) / 2`, the exponent of `v_R = R^kappa`.
    pub fn kappa(&self) -> Complex64 {
        (self.lambda - 1.0) * 0.5
    }

    /// The exact eigenvalue `(1 - lambda^2) / 4`.
    pub fn mu_complex(&self) -> Complex64 {
        (Complex64::new(1.0, 0.0) - self.lambda * self.lambda) / 4.0
    }
}

pub type CircleFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type LineFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
/// Evaluator on jets: maps the jet of `x` to the jet of `u(x)`.
pub type JetFn = Arc<dyn Fn(Jet) -> Jet + Send + Sync>;

/// A vector in the circle model, basis `e_k = exp(2ik theta)`.
#[derive(Clone)]
pub struct CircleVector {
    eval: CircleFn,
    coeffs: Option<BTreeMap<i64, Complex64>>,
}

impl std::fmt::Debug for CircleVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleVector").field("coeffs", &self.coeffs).finish_non_exhaustive()
    }
}

impl CircleVector {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        CircleVector { eval: Arc::new(f), coeffs: None }
    }

    pub fn from_coeffs(coeffs: BTreeMap<i64, Complex64>) -> Self {
        let terms: Vec<(i64, Complex64)> = coeffs.iter().map(|(k, a)| (*k, *a)).collect();
        let eval = move |t: f64| {
            terms.iter().fold(Complex64::new(0.0, 0.0), |acc, (k, a)| {
                acc + a * Complex64::from_polar(1.0, 2.0 * *k as f64 * t)
            })
        };
        CircleVector { eval: Arc::new(eval), coeffs: Some(coeffs) }
    }

    /// The basis vector `e_n`.
    pub fn basis(n: i64) -> Self {
        Self::from_coeffs(BTreeMap::from([(n, Complex64::new(1.0, 0.0))]))
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        (self.eval)(theta)
    }

    /// Exact coefficients, when the vector was built from them.
    pub fn coeffs(&self) -> Option<&BTreeMap<i64, Complex64>> {
        self.coeffs.as_ref()
    }

    /// Values on the uniform grid `2 pi j / n`, `j < n`.
    pub fn samples(&self, n: usize) -> Vec<Complex64> {
        (0..n).map(|j| self.eval(TAU * j as f64 / n as f64)).collect()
    }

    /// Pointwise product with a function of the angle.
    pub fn multiply<F>(&self, w: F) -> CircleVector
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let e = self.eval.clone();
        CircleVector::from_fn(move |t| e(t) * w(t))
    }

    /// Largest defect of `f(theta + pi) = f(theta)` on an `n`-point grid.
    pub fn parity_defect(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| {
                let t = std::f64::consts::PI * j as f64 / n as f64;
                (self.eval(t) - self.eval(t + std::f64::consts::PI)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Mean of `|f|^2` on an `n`-point uniform grid, i.e. the trapezoid rule for
/// `(1/2pi) int |f|^2`.
pub fn mean_square(f: &CircleVector, n: usize) -> f64 {
    f.samples(n).iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64
}

/// Truncated Fourier expansion of a circle vector.
#[derive(Clone, Debug)]
pub struct FourierCoeffs {
    pub coeffs: BTreeMap<i64, Complex64>,
    pub samples: usize,
    /// `|mean |f|^2 - sum |a_k|^2|`, relative to the mean square.
    pub parseval_defect: f64,
    /// `|a_{+-K}|` exceeds `1e-6 max |a_k|`.
    pub aliased: bool,
}

impl FourierCoeffs {
    pub fn get(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm_sqr()).sum()
    }
}

/// Coefficients `a_k`, `|k| <= max_k`, from `n >= 4 max_k` samples.
pub fn fourier_coeffs_with(f: &CircleVector, max_k: usize, n: usize) -> Result<FourierCoeffs> {
    if n < 4 * max_k || n == 0 {
        return Err(Error::Aliasing(format!("{n} samples cannot resolve |k| <= {max_k}")));
    }
    let mut buf = f.samples(n);
    let ms = buf.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    let k = max_k as i64;
    let mut coeffs = BTreeMap::new();
    for j in -k..=k {
        let idx = (2 * j).rem_euclid(n as i64) as usize;
        coeffs.insert(j, buf[idx] * inv);
    }
    let energy: f64 = coeffs.values().map(|a: &Complex64| a.norm_sqr()).sum();
    let peak = coeffs.values().map(|a| a.norm()).fold(0.0, f64::max);
    let edge = coeffs[&k].norm().max(coeffs[&-k].norm());
    let defect = if ms > 0.0 { (ms - energy).abs() / ms } else { energy };
    Ok(FourierCoeffs { coeffs, samples: n, parseval_defect: defect, aliased: edge > 1e-6 * peak })
}

/// Coefficients up to `max_k`, doubling the sample count from
/// [`DEFAULT_SAMPLES`] until the Parseval defect drops below [`PARSEVAL_TOL`].
pub fn fourier_coeffs(f: &CircleVector, max_k: usize) -> Result<FourierCoeffs> {
    let mut n = DEFAULT_SAMPLES.max(4 * max_k).next_power_of_two();
    loop {
        let fc = fourier_coeffs_with(f, max_k, n)?;
        if fc.parseval_defect < PARSEVAL_TOL || n >= MAX_SAMPLES {
            return Ok(fc);
        }
        n *= 2;
    }
}

/// All resolvable coefficients (`max_k = n / 4 - 1`), with adaptive `n`.
pub fn fourier_coeffs_auto(f: &CircleVector) -> Result<FourierCoeffs> {
    let mut n = DEFAULT_SAMPLES;
    loop {
        let fc = fourier_coeffs_with(f, n / 4 - 1, n)?;
        if fc.parseval_defect < PARSEVAL_TOL || n >= MAX_SAMPLES {
            return Ok(fc);
        }
        n *= 2;
    }
}

/// A vector in the line model, `u(x) = v(x, 1)`.
#[derive(Clone)]
pub struct LineVector {
    value: LineFn,
    jet: Option<JetFn>,
    /// Interval outside which `u` vanishes identically.
    pub support: Option<(f64, f64)>,
    /// Feature scales for quadrature.
    pub grid: LineGrid,
}

impl std::fmt::Debug for LineVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LineVector")
            .field("support", &self.support)
            .field("grid", &self.grid)
            .field("jet", &self.jet.is_some())
            .finish_non_exhaustive()
    }
}

impl LineVector {
    pub fn from_fn<F>(f: F, grid: LineGrid) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        LineVector { value: Arc::new(f), jet: None, support: None, grid }
    }

    /// A vector defined by a jet evaluator; plain values use order-zero jets.
    pub fn from_jet<F>(f: F, grid: LineGrid) -> Self
    where
        F: Fn(Jet) -> Jet + Send + Sync + 'static,
    {
        let jet: JetFn = Arc::new(f);
        let j2 = jet.clone();
        LineVector { value: Arc::new(move |x| j2(Jet::var(x, 0)).value()), jet: Some(jet), support: None, grid }
    }

    pub fn zero() -> Self {
        LineVector::from_jet(|x: Jet| Jet::real(0.0, x.order()), LineGrid::default())
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self
    }

    pub fn with_grid(mut self, grid: LineGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        if let Some((lo, hi)) = self.support {
            if x < lo || x > hi {
                return Complex64::new(0.0, 0.0);
            }
        }
        (self.value)(x)
    }

    pub fn has_jet(&self) -> bool {
        self.jet.is_some()
    }

    /// Jet of `u` along the jet `x`, when an analytic evaluator is present.
    pub fn eval_jet(&self, x: Jet) -> Option<Jet> {
        let j = self.jet.as_ref()?;
        if let Some((lo, hi)) = self.support {
            let x0 = x.value().re;
            if x0 < lo || x0 > hi {
                return Some(Jet::real(0.0, x.order()));
            }
        }
        Some(j(x))
    }

    /// `u(x), u'(x), ..., u^(k)(x)` from the jet evaluator.
    pub fn derivatives(&self, x: f64, k: usize) -> Option<Vec<Complex64>> {
        let j = self.eval_jet(Jet::var(x, k))?;
        Some((0..=k).map(|i| j.derivative(i)).collect())
    }

    /// Pointwise product with another line function (jets combined when
    /// both carry them). The support is the intersection.
    pub fn multiply(&self, o: &LineVector) -> LineVector {
        let (a, b) = (self.value.clone(), o.value.clone());
        let jet = match (&self.jet, &o.jet) {
            (Some(ja), Some(jb)) => {
                let (ja, jb) = (ja.clone(), jb.clone());
                Some(Arc::new(move |x: Jet| ja(x) * jb(x)) as JetFn)
            }
            _ => None,
        };
        let support = match (self.support, o.support) {
            (Some((a0, a1)), Some((b0, b1))) => Some((a0.max(b0), a1.min(b1))),
            (s, None) | (None, s) => s,
        };
        let mut grid = self.grid.clone();
        grid.breaks.extend(o.grid.breaks.iter().copied());
        LineVector { value: Arc::new(move |x| a(x) * b(x)), jet, support, grid }
    }

    pub fn scale(&self, s: Complex64) -> LineVector {
        let v = self.value.clone();
        let jet = self.jet.clone().map(|j| Arc::new(move |x: Jet| j(x).scale(s)) as JetFn);
        LineVector { value: Arc::new(move |x| v(x) * s), jet, support: self.support, grid: self.grid.clone() }
    }

    pub fn add(&self, o: &LineVector) -> LineVector {
        let (a, b) = (self.clone(), o.clone());
        let jet = if self.has_jet() && o.has_jet() {
            let (a2, b2) = (self.clone(), o.clone());
            Some(Arc::new(move |x: Jet| a2.eval_jet(x).unwrap() + b2.eval_jet(x).unwrap()) as JetFn)
        } else {
            None
        };
        let support = match (self.support, o.support) {
            (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
            _ => None,
        };
        let mut grid = self.grid.clone();
        grid.breaks.extend(o.grid.breaks.iter().copied());
        LineVector { value: Arc::new(move |x| a.eval(x) + b.eval(x)), jet, support, grid }
    }
}

/// The K-fixed vector `(1 + x^2)^{(lambda-1)/2}` in the line model.
pub fn k_fixed_line(lambda: &SpectralParameter) -> LineVector {
    let k = lambda.kappa();
    LineVector::from_jet(move |x: Jet| (x * x).add_const(Complex64::new(1.0, 0.0)).powc(k), LineGrid::scales(1.0, 1.0))
}

/// Dilation `h_t u(x) = u(x / t)`.
pub fn dilate(u: &LineVector, t: f64) -> LineVector {
    let v = u.clone();
    let v2 = u.clone();
    let mut out = LineVector {
        value: Arc::new(move |x| v.eval(x / t)),
        jet: None,
        support: u.support.map(|(a, b)| (a * t, b * t)),
        grid: LineGrid {
            center: u.grid.center * t,
            fine: u.grid.fine * t,
            coarse: u.grid.coarse * t,
            breaks: u.grid.breaks.iter().map(|b| b * t).collect(),
        },
    };
    if u.has_jet() {
        out.jet = Some(Arc::new(move |x: Jet| v2.eval_jet(x.scale_real(1.0 / t)).unwrap()));
    }
    out
}

fn real_pow(r: f64, s: Complex64) -> Complex64 {
    (s * r.ln()).exp()
}

/// `pi(g) u (x) = |-c x + a|^{lambda-1} u((d x - b) / (-c x + a))`.
///
/// At the singular point `x = a / c` the value is the homogeneous limit,
/// taken as the average of two symmetric nearby evaluations.
pub fn act_line(g: &GroupElement, u: &LineVector, lambda: &SpectralParameter) -> LineVector {
    let s = lambda.degree();
    let g = *g;
    let base = u.clone();
    let eval_at = move |x: f64| -> Complex64 {
        let den = -g.c * x + g.a;
        real_pow(den.abs(), s) * base.eval((g.d * x - g.b) / den)
    };
    let value = move |x: f64| -> Complex64 {
        let den = -g.c * x + g.a;
        let scale = g.a.abs() + g.c.abs() * x.abs();
        if den.abs() > 1e-7 * scale {
            return eval_at(x);
        }
        let h = 1e-5 * (1.0 + x.abs());
        (eval_at(x - h) + eval_at(x + h)) * 0.5
    };
    let jet = if u.has_jet() {
        let b = u.clone();
        Some(Arc::new(move |x: Jet| {
            let den = x.scale_real(-g.c).add_const(Complex64::new(g.a, 0.0));
            let y = x.scale_real(g.d).add_const(Complex64::new(-g.b, 0.0)) / den;
            b.eval_jet(y).unwrap() * den.abs_real().powc(s)
        }) as JetFn)
    } else {
        None
    };
    // Features of u at y sit at x = g y.
    let image = |y: f64| (g.a * y + g.b) / (g.c * y + g.d);
    let mut grid = u.grid.clone();
    let center = image(u.grid.center);
    let stretch = 1.0 / (g.c * u.grid.center + g.d).powi(2);
    if center.is_finite() && stretch.is_finite() {
        grid.center = center;
        grid.fine = (u.grid.fine * stretch.min(1.0)).max(1e-12);
        grid.coarse = u.grid.coarse * stretch.max(1.0);
    }
    grid.breaks = u.grid.breaks.iter().map(|b| image(*b)).filter(|b| b.is_finite()).collect();
    if g.c != 0.0 {
        grid.breaks.push(g.a / g.c);
    }
    let support = u.support.and_then(|(lo, hi)| {
        let (d0, d1) = (g.c * lo + g.d, g.c * hi + g.d);
        if d0 * d1 > 0.0 {
            let (a, b) = (image(lo), image(hi));
            Some((a.min(b), a.max(b)))
        } else {
            None
        }
    });
    LineVector { value: Arc::new(value), jet, support, grid }
}

/// `pi(g) f (theta) = r^{lambda-1} f(theta')` where
/// `g^{-1}(cos theta, sin theta) = r (cos theta', sin theta')`.
pub fn act_circle(g: &GroupElement, f: &CircleVector, lambda: &SpectralParameter) -> CircleVector {
    let s = lambda.degree();
    let gi = g.inverse();
    let base = f.eval.clone();
    CircleVector::from_fn(move |t| {
        let (sn, cs) = t.sin_cos();
        let x = gi.a * cs + gi.b * sn;
        let y = gi.c * cs + gi.d * sn;
        let r = x.hypot(y);
        real_pow(r, s) * base(y.atan2(x))
    })
}

/// `f(theta) = |sin theta|^{lambda-1} u(cot theta)`; the two x-axis
/// directions use the symmetric limit.
pub fn line_to_circle(u: &LineVector, lambda: &SpectralParameter) -> CircleVector {
    let s = lambda.degree();
    let u = u.clone();
    let at = move |t: f64| {
        let (sn, cs) = t.sin_cos();
        real_pow(sn.abs(), s) * u.eval(cs / sn)
    };
    CircleVector::from_fn(move |t| {
        if t.sin().abs() > 1e-9 {
            at(t)
        } else {
            (at(t - 1e-6) + at(t + 1e-6)) * 0.5
        }
    })
}

/// `u(x) = (1 + x^2)^{(lambda-1)/2} f(arccot x)`.
pub fn circle_to_line(f: &CircleVector, lambda: &SpectralParameter) -> LineVector {
    let k = lambda.kappa();
    let e = f.eval.clone();
    LineVector::from_fn(move |x| (k * (1.0 + x * x).ln()).exp() * e(1f64.atan2(x)), LineGrid::scales(1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_element;
    use crate::norms::l2_circle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_vector() -> LineVector {
        // smooth with quadratic decay
        LineVector::from_jet(
            |x: Jet| {
                let one = Complex64::new(1.0, 0.0);
                let d = (x - Jet::real(0.3, x.order())) * (x - Jet::real(0.3, x.order()));
                d.add_const(one).recip().scale(c(1.0, 0.5))
            },
            LineGrid::scales(0.5, 2.0),
        )
    }

    #[test]
    fn parameter_tags() {
        let p = SpectralParameter::principal(2.0);
        assert_eq!(p.series, Series::Principal);
        assert!((p.mu - 1.25).abs() < 1e-15);
        assert!(SpectralParameter::complementary(0.5).is_err());
        let q = SpectralParameter::complementary(-0.5).unwrap();
        assert!((q.mu - 0.1875).abs() < 1e-15);
        assert_eq!(SpectralParameter::from_lambda(c(1.0, 0.0)).series, Series::General);
    }

    #[test]
    fn borel_action_on_line() {
        let lam = SpectralParameter::principal(1.3);
        let u = test_vector();
        let shifted = act_line(&GroupElement::unipotent(1.0), &u, &lam);
        let dil = act_line(&GroupElement::diag(2.0), &u, &lam);
        let f = (lam.degree() * 2f64.ln()).exp();
        for x in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            assert!((shifted.eval(x) - u.eval(x - 1.0)).norm() < 1e-14);
            assert!((dil.eval(x) - f * u.eval(x / 4.0)).norm() < 1e-14);
            let id = act_line(&GroupElement::identity(), &u, &lam);
            assert!((id.eval(x) - u.eval(x)).norm() < 1e-15);
        }
    }

    #[test]
    fn line_action_is_homomorphism() {
        let lam = SpectralParameter::principal(0.7);
        let u = k_fixed_line(&lam);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let g = random_element(&mut rng, 1.0, 0.7);
            let h = random_element(&mut rng, 1.0, 0.7);
            let gh = g.compose(&h).unwrap();
            let lhs = act_line(&gh, &u, &lam);
            let rhs = act_line(&g, &act_line(&h, &u, &lam), &lam);
            for x in [-2.5, -0.4, 0.1, 1.9] {
                let (a, b) = (lhs.eval(x), rhs.eval(x));
                assert!((a - b).norm() < 1e-8 * a.norm().max(1.0), "{a} {b}");
            }
        }
    }

    #[test]
    fn jets_follow_action() {
        let lam = SpectralParameter::principal(0.4);
        let g = GroupElement::new(1.2, 0.3, -0.5, 0.708_333_333_333_333_3).unwrap();
        let v = act_line(&g, &k_fixed_line(&lam), &lam);
        let x = 0.37;
        let d = v.derivatives(x, 2).unwrap();
        let h = 1e-4;
        let fd1 = (v.eval(x + h) - v.eval(x - h)) / (2.0 * h);
        let fd2 = (v.eval(x + h) - v.eval(x) * 2.0 + v.eval(x - h)) / (h * h);
        assert!((d[0] - v.eval(x)).norm() < 1e-14);
        assert!((d[1] - fd1).norm() < 1e-7);
        assert!((d[2] - fd2).norm() < 1e-5);
    }

    #[test]
    fn circle_diagonal_action() {
        let lam = SpectralParameter::principal(1.0);
        let a = 1.7;
        let v = act_circle(&GroupElement::diag(1.0 / a), &CircleVector::basis(0), &lam);
        for t in [0.0, 0.4, 1.3, 2.9] {
            let (s, cs) = f64::sin_cos(t);
            let want = (lam.kappa() * (a * a * cs * cs + s * s / (a * a)).ln()).exp();
            assert!((v.eval(t) - want).norm() < 1e-14);
        }
        let rot = act_circle(&GroupElement::rotation(0.8), &CircleVector::basis(0), &lam);
        assert!((rot.eval(0.3) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn circle_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in [0.0, 1.0, 5.0] {
            let lam = SpectralParameter::principal(t);
            for _ in 0..10 {
                let g = random_element(&mut rng, 2.0, 1.0);
                let n = l2_circle(&act_circle(&g, &CircleVector::basis(0), &lam));
                assert!((n - 1.0).abs() < 1e-6, "t={t} n={n}");
            }
        }
    }

    #[test]
    fn fourier_basis() {
        let fc = fourier_coeffs(&CircleVector::basis(1), 16).unwrap();
        for (k, a) in &fc.coeffs {
            let want = if *k == 1 { 1.0 } else { 0.0 };
            assert!((a - want).norm() < 1e-14);
        }
        assert!(fc.parseval_defect < 1e-12);
        let f0 = fourier_coeffs(&CircleVector::basis(0), 4).unwrap();
        assert!((f0.get(0) - 1.0).norm() < 1e-14);
        assert!(fourier_coeffs_with(&CircleVector::basis(0), 10, 32).is_err());
    }

    #[test]
    fn aliasing_flag() {
        let v = CircleVector::from_coeffs(BTreeMap::from([(0, c(1.0, 0.0)), (8, c(0.5, 0.0))]));
        assert!(fourier_coeffs_with(&v, 8, 64).unwrap().aliased);
        assert!(!fourier_coeffs_with(&v, 12, 64).unwrap().aliased);
    }

    #[test]
    fn transfer_round_trip() {
        let lam = SpectralParameter::principal(0.9);
        let e1 = CircleVector::basis(1);
        let back = line_to_circle(&circle_to_line(&e1, &lam), &lam);
        for t in [0.0, 0.5, 1.5707963, 2.0, 3.0] {
            assert!((back.eval(t) - e1.eval(t)).norm() < 1e-8);
        }
        let u = circle_to_line(&CircleVector::basis(0), &lam);
        let k = k_fixed_line(&lam);
        for x in [-4.0, 0.0, 2.5] {
            assert!((u.eval(x) - k.eval(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn transfer_commutes_with_action() {
        let lam = SpectralParameter::principal(0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = CircleVector::from_coeffs(BTreeMap::from([(0, c(1.0, 0.0)), (2, c(0.2, -0.4)), (-1, c(0.0, 0.3))]));
        let u = circle_to_line(&f, &lam);
        for _ in 0..10 {
            let g = random_element(&mut rng, 1.5, 0.8);
            let a = circle_to_line(&act_circle(&g, &f, &lam), &lam);
            let b = act_line(&g, &u, &lam);
            for x in [-1.5, 0.2, 3.0] {
                assert!((a.eval(x) - b.eval(x)).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn singular_point_limit() {
        let lam = SpectralParameter::principal(0.0);
        let g = GroupElement::rotation(0.9);
        let v = act_line(&g, &k_fixed_line(&lam), &lam);
        let xs = g.a / g.c;
        let near = v.eval(xs + 1e-3);
        let at = v.eval(xs);
        assert!(at.is_finite());
        assert!((at - near).norm() < 1e-2);
    }

    #[test]
    fn even_homogeneity() {
        let lam = SpectralParameter::principal(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_element(&mut rng, 1.0, 1.0);
        assert!(act_circle(&g, &CircleVector::basis(0), &lam).parity_defect(64) < 1e-12);
    }
}
