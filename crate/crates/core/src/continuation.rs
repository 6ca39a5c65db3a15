//! Analytic continuation of the K-fixed vector: `v_R = R^{(lambda-1)/2}` for
//! forms `R` in `Q+`, the family `Q_eps`, its line-model function `u_eps`,
//! and the spherical function.

use crate::algebra::{transform_form, ComplexGroupElement, UnimodularForm};
use crate::error::{Error, Result};
use crate::geometry::{decompose_u, is_in_qplus};
use crate::jet::Jet;
use crate::quad::LineGrid;
use crate::repmodels::{CircleVector, LineVector, SpectralParameter, MAX_SAMPLES};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// `Q_eps(x, y) = a (x - i eps y)(eps x + i y)` with `a = 2 / (1 + eps^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonForm {
    pub epsilon: f64,
    pub a: f64,
    pub form: UnimodularForm,
}

pub fn q_eps_form(eps: f64) -> Result<EpsilonForm> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("epsilon {eps} not in (0, 1]")));
    }
    let a = 2.0 / (1.0 + eps * eps);
    let form = UnimodularForm::new(
        Complex64::new(a * eps, 0.0),
        Complex64::new(0.0, a * (1.0 - eps * eps) / 2.0),
        Complex64::new(a * eps, 0.0),
    )?;
    Ok(EpsilonForm { epsilon: eps, a, form })
}

/// `q_eps(x) = Q_eps(x, 1) = a (eps (x^2 + 1) + i x (1 - eps^2))`.
pub fn q_eps(eps: f64, x: f64) -> Complex64 {
    let a = 2.0 / (1.0 + eps * eps);
    Complex64::new(a * eps * (x * x + 1.0), a * x * (1.0 - eps * eps))
}

/// Modulus and argument of `q_eps(x)`.
pub fn modulus_argument(eps: f64, x: f64) -> (f64, f64) {
    let q = q_eps(eps, x);
    (q.norm(), q.arg())
}

/// `|u_eps(x)|^2` from the modulus/argument split:
/// `m^{2 Re kappa} exp(-2 Im kappa arg q)`.
pub fn abs_sq_from_modulus(eps: f64, lambda: &SpectralParameter, x: f64) -> f64 {
    let (m, arg) = modulus_argument(eps, x);
    let k = lambda.kappa();
    (2.0 * k.re * m.ln() - 2.0 * k.im * arg).exp()
}

/// `ln |u_eps(x)|^2`, safe for large `|lambda|`.
pub fn ln_abs_sq(eps: f64, lambda: &SpectralParameter, x: f64) -> f64 {
    2.0 * (lambda.kappa() * q_eps(eps, x).ln()).re
}

fn assert_branch_safe(r: &UnimodularForm) -> Result<()> {
    if !is_in_qplus(r) {
        return Err(Error::Domain("form not in Q+; the power R^kappa is not single-valued".into()));
    }
    // Re R on the circle is the real quadratic form, positive definite here;
    // its minimum is the smaller eigenvalue.
    let (p, q, s) = r.real_part();
    let tr = p + s;
    let min_eig = 0.5 * (tr - ((p - s).powi(2) + 4.0 * q * q).sqrt());
    if !(min_eig > 0.0) {
        return Err(Error::Invariant(format!("Re R has minimum {min_eig} on the circle")));
    }
    Ok(())
}

/// `theta -> R(cos theta, sin theta)^{(lambda-1)/2}`.
pub fn continued_vector(r: &UnimodularForm, lambda: &SpectralParameter) -> Result<CircleVector> {
    assert_branch_safe(r)?;
    let k = lambda.kappa();
    let r = *r;
    Ok(CircleVector::from_fn(move |t| {
        let (s, c) = t.sin_cos();
        (k * r.eval_real(c, s).ln()).exp()
    }))
}

/// Line model of `v_R`: `x -> R(x, 1)^{(lambda-1)/2}`.
pub fn continued_line(r: &UnimodularForm, lambda: &SpectralParameter) -> Result<LineVector> {
    assert_branch_safe(r)?;
    let k = lambda.kappa();
    let r = *r;
    Ok(LineVector::from_jet(
        move |x: Jet| {
            let n = x.order();
            let val = (x * x).scale(r.p) + x.scale(r.q * 2.0) + Jet::constant(r.s, n);
            val.powc(k)
        },
        LineGrid::default(),
    ))
}

/// `u_eps = q_eps^{(lambda-1)/2}`; `Re q_eps > 0` so the principal power is smooth.
pub fn u_eps(eps: f64, lambda: &SpectralParameter) -> Result<LineVector> {
    let ef = q_eps_form(eps)?;
    let k = lambda.kappa();
    let (a, e) = (ef.a, eps);
    let grid = LineGrid { center: 0.0, fine: eps, coarse: 1.0 / eps, breaks: vec![-1.0, 1.0] };
    Ok(LineVector::from_jet(
        move |x: Jet| {
            let re = (x * x).add_const(Complex64::new(1.0, 0.0)).scale_real(a * e);
            let im = x.scale(Complex64::new(0.0, a * (1.0 - e * e)));
            (re + im).powc(k)
        },
        grid,
    ))
}

/// The element `g_eps = g diag(1/z, z)` with `g_eps(Q) = Q_eps`.
pub fn g_eps(eps: f64) -> Result<ComplexGroupElement> {
    let q = q_eps_form(eps)?.form;
    let (g, z) = decompose_u(&q)?;
    g.to_complex().compose(&ComplexGroupElement::diag_inv(z))
}

/// `g' = conj(g)^{-1}`, so that `||pi(g) v||^2 = S(g' g)`.
pub fn g_prime(g: &ComplexGroupElement) -> ComplexGroupElement {
    g.conj().inverse()
}

/// Circle mean `(1/2pi) int f` by the trapezoid rule, doubling until two
/// successive estimates agree to `rel_tol`.
pub fn circle_mean<F: Fn(f64) -> Complex64>(f: F, rel_tol: f64) -> Result<Complex64> {
    let mut n = 64usize;
    let mut sum: Complex64 = (0..n).map(|j| f(TAU * j as f64 / n as f64)).sum();
    let mut prev = sum / n as f64;
    loop {
        // odd nodes of the doubled grid
        let odd: Complex64 = (0..n).map(|j| f(TAU * (2 * j + 1) as f64 / (2 * n) as f64)).sum();
        sum += odd;
        n *= 2;
        let cur = sum / n as f64;
        if (cur - prev).norm() <= rel_tol * cur.norm() || (cur - prev).norm() < 1e-300 {
            return Ok(cur);
        }
        if n >= MAX_SAMPLES {
            return Err(Error::Quadrature(format!("circle mean unresolved with {n} nodes")));
        }
        prev = cur;
    }
}

/// `S_lambda(g) = <pi(g) v, v>` by circle quadrature; needs `g(Q)` in `Q+`.
pub fn spherical_quadrature(lambda: &SpectralParameter, g: &ComplexGroupElement) -> Result<Complex64> {
    let r = transform_form(g, &UnimodularForm::standard());
    assert_branch_safe(&r)?;
    let k = lambda.kappa();
    circle_mean(
        |t| {
            let (s, c) = t.sin_cos();
            (k * r.eval_real(c, s).ln()).exp()
        },
        1e-13,
    )
}

/// Legendre function `P_nu(z) = 2F1(-nu, nu + 1; 1; (1 - z)/2)` for
/// `|1 - z| < 2`, summed with compensation.
pub fn legendre_p(nu: Complex64, z: Complex64) -> Result<Complex64> {
    let w = (1.0 - z) * 0.5;
    if !(w.norm() < 1.0) {
        return Err(Error::Domain(format!("series for P_nu needs |1 - z| < 2, got z = {z}")));
    }
    let a = -nu;
    let b = nu + 1.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut comp = Complex64::new(0.0, 0.0);
    let hump = nu.norm() + 10.0;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        term = term * (a + nf) * (b + nf) / ((nf + 1.0) * (nf + 1.0)) * w;
        n += 1;
        // Kahan summation
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (n as f64) > hump && term.norm() < 1e-17 * sum.norm().max(1e-300) {
            return Ok(sum);
        }
        if n > 50_000_000 {
            return Err(Error::Quadrature(format!("Legendre series did not converge at z = {z}")));
        }
    }
}

/// The spherical function, by quadrature when `g(Q)` is in `Q+` and
/// otherwise through the Legendre continuation in the half trace of `g(Q)`.
pub fn spherical(lambda: &SpectralParameter, g: &ComplexGroupElement) -> Result<Complex64> {
    let r = transform_form(g, &UnimodularForm::standard());
    if is_in_qplus(&r) {
        spherical_quadrature(lambda, g)
    } else {
        legendre_p(lambda.kappa(), r.half_trace())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_element, transform_form_real, GroupElement};
    use crate::norms::l2_circle;
    use crate::quad::{integrate_line, QuadOptions};
    use crate::repmodels::act_circle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eps_form_examples() {
        let one = q_eps_form(1.0).unwrap();
        assert_eq!(one.a, 1.0);
        assert!(one.form.max_dist(&UnimodularForm::standard()) < 1e-15);
        assert!((q_eps_form(1.0 / 3.0).unwrap().a - 1.8).abs() < 1e-15);
        assert!(q_eps_form(0.0).is_err());
        assert!(q_eps_form(1.5).is_err());
        let tiny = q_eps_form(1e-9).unwrap().form;
        assert!(tiny.p.re < 1e-8 && is_in_qplus(&tiny));
    }

    #[test]
    fn eps_form_factorization() {
        let ef = q_eps_form(0.27).unwrap();
        for (x, y) in [(0.3, -1.2), (2.0, 0.5)] {
            let lhs = ef.form.eval_real(x, y);
            let rhs = c(x, -0.27 * y) * c(0.27 * x, y) * ef.a;
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn standard_form_gives_e0() {
        let lam = SpectralParameter::principal(1.7);
        let v = continued_vector(&UnimodularForm::standard(), &lam).unwrap();
        for t in [0.0, 1.0, 2.0] {
            assert!((v.eval(t) - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn real_points_match_action() {
        let lam = SpectralParameter::principal(2.3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let g = random_element(&mut rng, 2.0, 1.0);
            let v = continued_vector(&transform_form_real(&g, &UnimodularForm::standard()), &lam).unwrap();
            let w = act_circle(&g, &CircleVector::basis(0), &lam);
            for t in [0.1, 0.9, 2.2, 3.0] {
                assert!((v.eval(t) - w.eval(t)).norm() < 1e-8 * w.eval(t).norm().max(1.0));
            }
        }
    }

    #[test]
    fn equivariance_on_qplus() {
        let lam = SpectralParameter::principal(0.8);
        let r = q_eps_form(0.2).unwrap().form;
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..10 {
            let g = random_element(&mut rng, 1.0, 0.5);
            let lhs = continued_vector(&transform_form_real(&g, &r), &lam).unwrap();
            let rhs = act_circle(&g, &continued_vector(&r, &lam).unwrap(), &lam);
            for t in [0.2, 1.4, 2.7] {
                assert!((lhs.eval(t) - rhs.eval(t)).norm() < 1e-8 * rhs.eval(t).norm().max(1.0));
            }
        }
    }

    #[test]
    fn boundary_forms_rejected() {
        let lam = SpectralParameter::principal(0.0);
        let imag = UnimodularForm::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, -1.0)).unwrap();
        assert!(matches!(continued_vector(&imag, &lam), Err(Error::Domain(_))));
    }

    #[test]
    fn u_eps_examples() {
        let trivial = SpectralParameter::general(c(1.0, 0.0));
        let u = u_eps(0.2, &trivial).unwrap();
        assert!((u.eval(3.7) - 1.0).norm() < 1e-15);
        let lam = SpectralParameter::principal(1.5);
        let eps = 0.1;
        let a = 2.0 / (1.0 + eps * eps);
        let u = u_eps(eps, &lam).unwrap();
        assert!((u.eval(0.0) - (lam.kappa() * (a * eps as f64).ln()).exp()).norm() < 1e-14);
        for x in [-3.0, -1.0, -0.05, 0.0, 0.4, 7.0] {
            let direct = u.eval(x).norm_sqr();
            let split = abs_sq_from_modulus(eps, &lam, x);
            assert!((direct - split).abs() <= 1e-12 * direct, "{x}: {direct} {split}");
        }
    }

    #[test]
    fn growth_sits_on_negative_half_line() {
        let lam = SpectralParameter::principal(10.0);
        let eps = 0.05;
        assert!(ln_abs_sq(eps, &lam, -1.0) > ln_abs_sq(eps, &lam, 1.0) + 20.0);
        let (_, arg) = modulus_argument(eps, -1.0);
        assert!(arg < -PI / 2.0 + 3.0 * eps);
    }

    #[test]
    fn eps_vector_norm_matches_line_integral() {
        let lam = SpectralParameter::principal(1.0);
        let eps = 0.1;
        let v = continued_vector(&q_eps_form(eps).unwrap().form, &lam).unwrap();
        let circle = l2_circle(&v).powi(2);
        let u = u_eps(eps, &lam).unwrap();
        let f = |x: f64| c(u.eval(x).norm_sqr() / PI, 0.0);
        let line = integrate_line(&f, &u.grid, QuadOptions::default()).unwrap().value.re;
        assert!((circle - line).abs() < 1e-6 * line, "{circle} {line}");
    }

    #[test]
    fn spherical_identity_and_legendre() {
        let lam = SpectralParameter::principal(2.0);
        let s = spherical(&lam, &ComplexGroupElement::identity()).unwrap();
        assert!((s - 1.0).norm() < 1e-14);
        // P_{-1/2}(0) = sqrt(pi) / Gamma(3/4)^2
        let g34 = 1.225_416_702_465_177_6;
        let p = legendre_p(c(-0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert!((p.re - PI.sqrt() / (g34 * g34)).abs() < 1e-13);
    }

    #[test]
    fn spherical_quadrature_matches_series() {
        for t in [0.0, 1.0, 3.0] {
            let lam = SpectralParameter::principal(t);
            let real = GroupElement::diagonal(0.4).to_complex();
            let z = Complex64::from_polar(1.0, 0.3);
            let cplx = ComplexGroupElement::diag_inv(z);
            for g in [real, cplx] {
                let q = spherical_quadrature(&lam, &g).unwrap();
                let r = transform_form(&g, &UnimodularForm::standard());
                let s = legendre_p(lam.kappa(), r.half_trace()).unwrap();
                assert!((q - s).norm() < 1e-11 * s.norm().max(1.0), "t={t}: {q} {s}");
            }
        }
    }

    #[test]
    fn diagonal_norm_identity() {
        // ||pi(g) v||^2 = S(g^2) for g = diag(1/a, a), |a| = 1
        let lam = SpectralParameter::principal(1.2);
        let a = Complex64::from_polar(1.0, 0.35);
        let g = ComplexGroupElement::diag_inv(a);
        let r = transform_form(&g, &UnimodularForm::standard());
        let norm = l2_circle(&continued_vector(&r, &lam).unwrap()).powi(2);
        let g2 = g.compose(&g).unwrap();
        let s = spherical(&lam, &g2).unwrap();
        assert!((s - norm).norm() < 1e-8 * norm);
        let gp = g_prime(&g).compose(&g).unwrap();
        assert!((spherical(&lam, &gp).unwrap() - norm).norm() < 1e-8 * norm);
    }

    #[test]
    fn g_eps_moves_q_to_q_eps() {
        let g = g_eps(0.05).unwrap();
        let q = transform_form(&g, &UnimodularForm::standard());
        assert!(q.max_dist(&q_eps_form(0.05).unwrap().form) < 1e-9);
    }
}
