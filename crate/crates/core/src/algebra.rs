//! Unimodular 2x2 matrices over R and C and their action on binary quadratic
//! forms.
//!
//! Forms transform on the left by `g(P) = P o g^{-1}`, so that
//! `diag(1/a, a)` sends `x^2 + y^2` to `a^2 x^2 + a^{-2} y^2`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance on `det = 1` accepted at construction.
pub const DET_TOL: f64 = 1e-12;
/// Drift allowed after a product before it is reported as an invariant violation.
pub const DRIFT_TOL: f64 = 1e-9;
/// Tolerance on `ps - q^2 = 1` for forms.
pub const FORM_DET_TOL: f64 = 1e-10;

/// A real matrix `[[a, b], [c, d]]` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

fn det_tolerance(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}

impl GroupElement {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let g = GroupElement { a, b, c, d };
        let det = g.det();
        if !(det - 1.0).is_finite() || (det - 1.0).abs() > det_tolerance(DET_TOL, g.scale()) {
            return Err(Error::Invariant(format!("det = {det} for {g:?}")));
        }
        Ok(g)
    }

    pub const fn identity() -> Self {
        GroupElement { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `n(x) = [[1, x], [0, 1]]`.
    pub fn unipotent(x: f64) -> Self {
        GroupElement { a: 1.0, b: x, c: 0.0, d: 1.0 }
    }

    /// `a(h) = diag(e^h, e^{-h})`.
    pub fn diagonal(h: f64) -> Self {
        GroupElement { a: h.exp(), b: 0.0, c: 0.0, d: (-h).exp() }
    }

    /// `diag(s, 1/s)` for nonzero real `s`.
    pub fn diag(s: f64) -> Self {
        GroupElement { a: s, b: 0.0, c: 0.0, d: 1.0 / s }
    }

    /// `k(t) = [[cos t, -sin t], [sin t, cos t]]`.
    pub fn rotation(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        GroupElement { a: c, b: -s, c: s, d: c }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    fn scale(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs()).powi(2)
    }

    pub fn inverse(&self) -> Self {
        GroupElement { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Product `self * h`, reporting determinant drift rather than rescaling.
    pub fn compose(&self, h: &GroupElement) -> Result<Self> {
        let p = self.mul_unchecked(h);
        let det = p.det();
        if !(det - 1.0).is_finite() || (det - 1.0).abs() > det_tolerance(DRIFT_TOL, p.scale()) {
            return Err(Error::Invariant(format!("determinant drifted to {det}")));
        }
        Ok(p)
    }

    pub(crate) fn mul_unchecked(&self, h: &GroupElement) -> Self {
        GroupElement {
            a: self.a * h.a + self.b * h.c,
            b: self.a * h.b + self.b * h.d,
            c: self.c * h.a + self.d * h.c,
            d: self.c * h.b + self.d * h.d,
        }
    }

    pub fn max_dist(&self, h: &GroupElement) -> f64 {
        (self.a - h.a)
            .abs()
            .max((self.b - h.b).abs())
            .max((self.c - h.c).abs())
            .max((self.d - h.d).abs())
    }

    /// Factorization `g = n(shift) a(height) k(angle)`.
    pub fn iwasawa(&self) -> Iwasawa {
        let r2 = self.c * self.c + self.d * self.d;
        Iwasawa {
            shift: (self.a * self.c + self.b * self.d) / r2,
            height: -0.5 * r2.ln(),
            angle: self.c.atan2(self.d),
        }
    }

    /// Moebius action on the Riemann sphere chart `z -> (az + b) / (cz + d)`.
    pub fn mobius(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    pub fn to_complex(&self) -> ComplexGroupElement {
        let r = |x: f64| Complex64::new(x, 0.0);
        ComplexGroupElement { a: r(self.a), b: r(self.b), c: r(self.c), d: r(self.d) }
    }

    /// Largest singular value squared; the operator norm of `Ad(g)` on sl2
    /// with the trace inner product.
    pub fn ad_norm(&self) -> f64 {
        let fro = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        // singular values s, 1/s with s^2 + s^-2 = fro
        0.5 * (fro + (fro * fro - 4.0).max(0.0).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Iwasawa {
    pub shift: f64,
    pub height: f64,
    pub angle: f64,
}

impl Iwasawa {
    pub fn recompose(&self) -> GroupElement {
        GroupElement::unipotent(self.shift)
            .mul_unchecked(&GroupElement::diagonal(self.height))
            .mul_unchecked(&GroupElement::rotation(self.angle))
    }
}

/// A complex matrix with unit determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexGroupElement {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl ComplexGroupElement {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let g = ComplexGroupElement { a, b, c, d };
        let det = g.det();
        let scale = [a, b, c, d].iter().map(|z| z.norm()).fold(0.0, f64::max).powi(2);
        if !det.is_finite() || (det - 1.0).norm() > det_tolerance(DET_TOL, scale) {
            return Err(Error::Invariant(format!("complex det = {det}")));
        }
        Ok(g)
    }

    pub fn identity() -> Self {
        GroupElement::identity().to_complex()
    }

    /// `diag(1/z, z)`, the elements of the slice `I` when `|arg z| < pi/4`.
    pub fn diag_inv(z: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        ComplexGroupElement { a: z.inv(), b: zero, c: zero, d: z }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        ComplexGroupElement { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn conj(&self) -> Self {
        ComplexGroupElement { a: self.a.conj(), b: self.b.conj(), c: self.c.conj(), d: self.d.conj() }
    }

    pub fn compose(&self, h: &ComplexGroupElement) -> Result<Self> {
        let p = ComplexGroupElement {
            a: self.a * h.a + self.b * h.c,
            b: self.a * h.b + self.b * h.d,
            c: self.c * h.a + self.d * h.c,
            d: self.c * h.b + self.d * h.d,
        };
        let det = p.det();
        let scale = [p.a, p.b, p.c, p.d].iter().map(|z| z.norm()).fold(0.0, f64::max).powi(2);
        if !det.is_finite() || (det - 1.0).norm() > det_tolerance(DRIFT_TOL, scale) {
            return Err(Error::Invariant(format!("complex determinant drifted to {det}")));
        }
        Ok(p)
    }
}

/// `P(x, y) = p x^2 + 2 q xy + s y^2` with `ps - q^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnimodularForm {
    pub p: Complex64,
    pub q: Complex64,
    pub s: Complex64,
}

impl UnimodularForm {
    pub fn new(p: Complex64, q: Complex64, s: Complex64) -> Result<Self> {
        let f = UnimodularForm { p, q, s };
        let det = f.det();
        let scale = p.norm().max(q.norm()).max(s.norm()).powi(2);
        if !det.is_finite() || (det - 1.0).norm() > det_tolerance(FORM_DET_TOL, scale) {
            return Err(Error::Invariant(format!("form determinant {det}")));
        }
        Ok(f)
    }

    /// The standard form `Q = x^2 + y^2`.
    pub fn standard() -> Self {
        let one = Complex64::new(1.0, 0.0);
        UnimodularForm { p: one, q: Complex64::new(0.0, 0.0), s: one }
    }

    pub fn det(&self) -> Complex64 {
        self.p * self.s - self.q * self.q
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.p * x * x + self.q * x * y * 2.0 + self.s * y * y
    }

    pub fn eval_real(&self, x: f64, y: f64) -> Complex64 {
        self.p * (x * x) + self.q * (2.0 * x * y) + self.s * (y * y)
    }

    /// Real part as a symmetric matrix `(p, q, s)`.
    pub fn real_part(&self) -> (f64, f64, f64) {
        (self.p.re, self.q.re, self.s.re)
    }

    pub fn imag_part(&self) -> (f64, f64, f64) {
        (self.p.im, self.q.im, self.s.im)
    }

    pub fn max_dist(&self, o: &UnimodularForm) -> f64 {
        (self.p - o.p).norm().max((self.q - o.q).norm()).max((self.s - o.s).norm())
    }

    /// Half the trace; the value that determines spherical functions.
    pub fn half_trace(&self) -> Complex64 {
        (self.p + self.s) * 0.5
    }
}

/// `g(P) = P o g^{-1}`, i.e. the matrix `g^{-T} M g^{-1}`.
pub fn transform_form(g: &ComplexGroupElement, form: &UnimodularForm) -> UnimodularForm {
    let h = g.inverse();
    // M h, then h^T (M h)
    let (p, q, s) = (form.p, form.q, form.s);
    let m11 = p * h.a + q * h.c;
    let m12 = p * h.b + q * h.d;
    let m21 = q * h.a + s * h.c;
    let m22 = q * h.b + s * h.d;
    UnimodularForm {
        p: h.a * m11 + h.c * m21,
        q: h.a * m12 + h.c * m22,
        s: h.b * m12 + h.d * m22,
    }
}

pub fn transform_form_real(g: &GroupElement, form: &UnimodularForm) -> UnimodularForm {
    transform_form(&g.to_complex(), form)
}

/// Random element `n(x) a(h) k(t)` with `|x| <= shift`, `|h| <= height`.
pub fn random_element<R: rand::Rng + ?Sized>(rng: &mut R, shift: f64, height: f64) -> GroupElement {
    let it = Iwasawa {
        shift: rng.gen_range(-shift..=shift),
        height: rng.gen_range(-height..=height),
        angle: rng.gen_range(0.0..std::f64::consts::TAU),
    };
    it.recompose()
}
