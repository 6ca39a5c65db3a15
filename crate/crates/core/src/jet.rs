//! Truncated Taylor series ("jets") for exact derivatives of analytic
//! evaluators.
//!
//! A `Jet` stores the normalized Taylor coefficients `f^(j)(x0) / j!` for
//! `j <= order`. Evaluating an expression on `Jet::var(x0, k)` yields its first
//! `k` derivatives at `x0` with no step-size error.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const MAX_ORDER: usize = 6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    c: [Complex64; MAX_ORDER + 1],
}

impl Jet {
    pub fn constant(v: Complex64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [ZERO; MAX_ORDER + 1];
        c[0] = v;
        Jet { order, c }
    }

    pub fn real(v: f64, order: usize) -> Self {
        Self::constant(Complex64::new(v, 0.0), order)
    }

    /// The independent variable expanded around `x0`.
    pub fn var(x0: f64, order: usize) -> Self {
        let mut j = Self::real(x0, order);
        if order >= 1 {
            j.c[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.c[j]
    }

    /// `j`-th derivative at the expansion point.
    pub fn derivative(&self, j: usize) -> Complex64 {
        assert!(j <= self.order);
        self.c[j] * factorial(j)
    }

    /// The jet of `f'`, one order shorter.
    pub fn differentiate(&self) -> Jet {
        let order = self.order.saturating_sub(1);
        let mut c = [ZERO; MAX_ORDER + 1];
        for j in 0..self.order {
            c[j] = self.c[j + 1] * (j + 1) as f64;
        }
        Jet { order, c }
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        let mut out = *self;
        for j in 0..=self.order {
            out.c[j] *= s;
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Jet {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add_const(&self, s: Complex64) -> Jet {
        let mut out = *self;
        out.c[0] += s;
        out
    }

    /// Composition `g(self)` where `g` is given by its Taylor coefficients at
    /// `self.value()` (Horner in the nilpotent part).
    fn compose(&self, g: &[Complex64; MAX_ORDER + 1]) -> Jet {
        let n = self.order;
        let mut h = *self;
        h.c[0] = ZERO;
        let mut acc = Jet::constant(g[n], n);
        for j in (0..n).rev() {
            acc = acc * h;
            acc.c[0] += g[j];
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        let mut g = [ZERO; MAX_ORDER + 1];
        for (j, gj) in g.iter_mut().enumerate().take(self.order + 1) {
            *gj = e / factorial(j);
        }
        self.compose(&g)
    }

    /// Principal logarithm; the constant term must avoid the branch cut.
    pub fn ln(&self) -> Jet {
        let x0 = self.c[0];
        let mut g = [ZERO; MAX_ORDER + 1];
        g[0] = x0.ln();
        let inv = x0.inv();
        let mut p = inv;
        for (j, gj) in g.iter_mut().enumerate().take(self.order + 1).skip(1) {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            *gj = p * (sign / j as f64);
            p *= inv;
        }
        self.compose(&g)
    }

    /// Principal power `self^k`, i.e. `exp(k ln self)`.
    pub fn powc(&self, k: Complex64) -> Jet {
        let x0 = self.c[0];
        let mut g = [ZERO; MAX_ORDER + 1];
        let mut binom = Complex64::new(1.0, 0.0);
        let base = x0.powc(k);
        let inv = x0.inv();
        let mut p = Complex64::new(1.0, 0.0);
        for (j, gj) in g.iter_mut().enumerate().take(self.order + 1) {
            *gj = base * binom * p;
            binom = binom * (k - j as f64) / (j + 1) as f64;
            p *= inv;
        }
        self.compose(&g)
    }

    pub fn recip(&self) -> Jet {
        let x0 = self.c[0];
        let inv = x0.inv();
        let mut g = [ZERO; MAX_ORDER + 1];
        let mut p = inv;
        for (j, gj) in g.iter_mut().enumerate().take(self.order + 1) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *gj = p * sign;
            p *= inv;
        }
        self.compose(&g)
    }

    /// `|x|` for a real-valued jet away from zero.
    pub fn abs_real(&self) -> Jet {
        if self.c[0].re < 0.0 {
            -*self
        } else {
            *self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c[..=self.order].iter().all(|z| z.is_finite())
    }
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let order = self.order.max(o.order);
        let mut c = [ZERO; MAX_ORDER + 1];
        for (j, cj) in c.iter_mut().enumerate().take(order + 1) {
            *cj = self.c[j] + o.c[j];
        }
        Jet { order, c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale_real(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let order = self.order.max(o.order);
        let mut c = [ZERO; MAX_ORDER + 1];
        for (n, cn) in c.iter_mut().enumerate().take(order + 1) {
            let mut s = ZERO;
            for j in 0..=n {
                s += self.c[j] * o.c[n - j];
            }
            *cn = s;
        }
        Jet { order, c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polynomial_derivatives() {
        // f = x^3 - 2x at x = 1.5
        let x = Jet::var(1.5, 4);
        let f = x * x * x - x.scale_real(2.0);
        assert!((f.derivative(0).re - (3.375 - 3.0)).abs() < 1e-14);
        assert!((f.derivative(1).re - (3.0 * 2.25 - 2.0)).abs() < 1e-14);
        assert!((f.derivative(2).re - 9.0).abs() < 1e-14);
        assert!((f.derivative(3).re - 6.0).abs() < 1e-14);
        assert!(f.derivative(4).norm() < 1e-14);
    }

    #[test]
    fn exp_ln_inverse() {
        let x = Jet::var(0.7, 5).scale(c(1.0, 0.3)).add_const(c(0.2, -0.1));
        let back = x.ln().exp();
        for j in 0..=5 {
            assert!((back.coeff(j) - x.coeff(j)).norm() < 1e-13, "j={j}");
        }
    }

    #[test]
    fn complex_power_matches_closed_form() {
        // d/dx (x + i)^k = k (x + i)^{k-1}
        let k = c(-0.5, 1.25);
        let x0 = 0.4;
        let f = Jet::var(x0, 3).add_const(c(0.0, 1.0)).powc(k);
        let z = c(x0, 1.0);
        assert!((f.derivative(0) - z.powc(k)).norm() < 1e-13);
        assert!((f.derivative(1) - k * z.powc(k - 1.0)).norm() < 1e-13);
        let d2 = k * (k - 1.0) * z.powc(k - 2.0);
        assert!((f.derivative(2) - d2).norm() < 1e-12);
    }

    #[test]
    fn differentiate_shifts() {
        let x = Jet::var(2.0, 4);
        let f = (x * x).exp();
        let df = f.differentiate();
        // (e^{x^2})' = 2x e^{x^2}
        let e4 = (4.0f64).exp();
        assert!((df.value().re - 4.0 * e4).abs() < 1e-9 * e4);
        // (e^{x^2})'' = (2 + 4x^2) e^{x^2}
        assert!((df.derivative(1).re - 18.0 * e4).abs() < 1e-9 * e4);
        assert_eq!(df.order(), 3);
    }

    #[test]
    fn division_and_reciprocal() {
        let x = Jet::var(0.5, 3);
        let one = Jet::real(1.0, 3);
        let f = one / (one + x * x);
        // derivative of 1/(1+x^2) is -2x/(1+x^2)^2
        let d = -2.0 * 0.5 / (1.25f64 * 1.25);
        assert!((f.derivative(1).re - d).abs() < 1e-14);
    }
}
