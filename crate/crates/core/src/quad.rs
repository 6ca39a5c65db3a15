//! Adaptive Gauss-Kronrod quadrature for complex integrands, plus a line
//! integrator that splits the real axis into geometric panels around known
//! feature scales and maps both tails onto finite intervals.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-300, rel_tol: 1e-11, max_intervals: 4000 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// One application of the 15-point rule: (kronrod, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.partial_cmp(&o.error).unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive bisection on `[a, b]` pre-split at `breaks`.
pub fn integrate_with_breaks<F>(f: &F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut evals = 0;
    for w in pts.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        evals += 15;
        total += v;
        err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    while err > opts.abs_tol.max(opts.rel_tol * total.norm()) {
        if heap.len() >= opts.max_intervals {
            break;
        }
        let p = heap.pop().expect("nonempty panel heap");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(f, p.a, m);
        let (v2, e2) = gk15(f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for p in heap.iter() {
        value += p.value;
        error += p.error;
    }
    if !value.is_finite() {
        return Err(Error::Quadrature("non-finite integrand".into()));
    }
    Ok(QuadResult { value: value * sign, error, evaluations: evals })
}

/// Fixed composite 15-point rule on `panels` equal panels; the error is the
/// summed Kronrod-Gauss difference.
pub fn integrate_panels<F>(f: &F, a: f64, b: f64, panels: usize) -> QuadResult
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for j in 0..n {
        let (v, e) = gk15(f, a + j as f64 * h, a + (j + 1) as f64 * h);
        value += v;
        error += e;
    }
    QuadResult { value, error, evaluations: 15 * n }
}

pub fn integrate<F>(f: &F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    integrate_with_breaks(f, a, b, &[], opts)
}

pub fn integrate_real<F>(f: &F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let g = |x: f64| Complex64::new(f(x), 0.0);
    Ok(integrate(&g, a, b, opts)?.value.re)
}

/// Feature scales of a function on the line: detail near `center` down to
/// `fine`, and the transition to algebraic tails at `coarse`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineGrid {
    pub center: f64,
    pub fine: f64,
    pub coarse: f64,
    /// Extra break points (singular images, support edges, ...).
    pub breaks: Vec<f64>,
}

impl Default for LineGrid {
    fn default() -> Self {
        LineGrid { center: 0.0, fine: 1e-2, coarse: 1e2, breaks: Vec::new() }
    }
}

impl LineGrid {
    pub fn scales(fine: f64, coarse: f64) -> Self {
        LineGrid { fine, coarse, ..Default::default() }
    }

    /// Geometric break points, two per octave, covering `[fine/8, 8 coarse]`
    /// on both sides of the center.
    pub fn break_points(&self) -> Vec<f64> {
        let lo = self.fine / 8.0;
        let hi = self.coarse * 8.0;
        let mut pts = vec![self.center];
        let mut r = lo;
        while r <= hi * (1.0 + 1e-12) {
            pts.push(self.center + r);
            pts.push(self.center - r);
            r *= std::f64::consts::SQRT_2;
        }
        pts.extend(self.breaks.iter().copied());
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }
}

/// Integral over the whole real line. The panels come from `grid`; the two
/// tails beyond the outermost break are mapped to `(0, 1]` by `x = R / s`.
pub fn integrate_line<F>(f: &F, grid: &LineGrid, opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64 + Sync + ?Sized,
{
    let pts = grid.break_points();
    let lo = pts[0];
    let hi = *pts.last().unwrap();
    let mid = integrate_with_breaks(f, lo, hi, &pts, opts)?;
    let right = |s: f64| {
        if s <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let x = hi + (hi - grid.center).abs() * (1.0 / s - 1.0);
        f(x) * ((hi - grid.center).abs() / (s * s))
    };
    let left = |s: f64| {
        if s <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let x = lo - (grid.center - lo).abs() * (1.0 / s - 1.0);
        f(x) * ((grid.center - lo).abs() / (s * s))
    };
    let tail_breaks = [0.5, 0.25, 0.125, 1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0];
    let r = integrate_with_breaks(&right, 0.0, 1.0, &tail_breaks, opts)?;
    let l = integrate_with_breaks(&left, 0.0, 1.0, &tail_breaks, opts)?;
    Ok(QuadResult {
        value: mid.value + r.value + l.value,
        error: mid.error + r.error + l.error,
        evaluations: mid.evaluations + r.evaluations + l.evaluations,
    })
}
