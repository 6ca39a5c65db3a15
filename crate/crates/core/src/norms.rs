//! L2 norms in both models, the complementary series pairing, and the two
//! Sobolev flavors: Lie monomials / Fourier multipliers on the circle and
//! plain derivatives on the line.

use crate::continuation::circle_mean;
use crate::error::{Error, Result};
use crate::quad::{integrate_line, integrate_with_breaks, QuadOptions};
use crate::repmodels::{
    fourier_coeffs_with, CircleVector, LineVector, Series, SpectralParameter, DEFAULT_SAMPLES, MAX_SAMPLES,
};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub type Coeffs = BTreeMap<i64, Complex64>;

/// `((1/2pi) int |f|^2)^{1/2}` by the trapezoid rule refined to `1e-13`.
pub fn l2_circle(f: &CircleVector) -> f64 {
    circle_mean(|t| Complex64::new(f.eval(t).norm_sqr(), 0.0), 1e-13)
        .map(|z| z.re.sqrt())
        .unwrap_or(f64::NAN)
}

/// `int g` over the line, restricted to the support of `u` when known.
pub fn line_integral<F>(u: &LineVector, g: &F, opts: QuadOptions) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    match u.support {
        Some((lo, hi)) => {
            let mut pts = u.grid.break_points();
            let n = 16;
            pts.extend((1..n).map(|j| lo + (hi - lo) * j as f64 / n as f64));
            Ok(integrate_with_breaks(g, lo, hi, &pts, opts)?.value)
        }
        None => Ok(integrate_line(g, &u.grid, opts)?.value),
    }
}

/// `int |u|^2 dx` with no normalization.
pub fn line_mass(u: &LineVector) -> Result<f64> {
    let g = |x: f64| Complex64::new(u.eval(x).norm_sqr(), 0.0);
    Ok(line_integral(u, &g, QuadOptions::default())?.re)
}

/// `((1/pi) int |u|^2 dx)^{1/2}`, the unitary norm for `lambda = it`.
pub fn l2_line(u: &LineVector, lambda: &SpectralParameter) -> Result<f64> {
    if lambda.series != Series::Principal {
        return Err(Error::Domain(format!(
            "line L2 norm diverges or is not invariant for lambda = {}; use comp_norm",
            lambda.lambda
        )));
    }
    Ok((line_mass(u)? / PI).sqrt())
}

/// Complementary series norm
/// `(int int |x - x'|^{-lambda-1} u(x) conj u(x') dx dx')^{1/2}`, `-1 < lambda < 0`.
///
/// The inner integral is taken in `s = |x - x'|` on both sides; the
/// substitution `s = sigma^p`, `p = 1 / (1 + beta)`, turns `s^beta ds` into
/// `p d sigma` and removes the diagonal singularity.
pub fn comp_norm(u: &LineVector, lambda: f64) -> Result<f64> {
    if !(lambda > -1.0 && lambda < 0.0) {
        return Err(Error::Domain(format!("complementary pairing needs -1 < lambda < 0, got {lambda}")));
    }
    let p = -1.0 / lambda;
    let base_pts = u.grid.break_points();
    let inner_opts = QuadOptions { rel_tol: 1e-9, ..Default::default() };
    let inner = |x: f64| -> Complex64 {
        let mut sig: Vec<f64> = base_pts
            .iter()
            .map(|b| (x - b).abs())
            .filter(|s| *s > 0.0)
            .map(|s| s.powf(1.0 / p))
            .collect();
        sig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let smax = sig.last().copied().unwrap_or(1.0).max(1.0);
        let g = |sg: f64| {
            let s = sg.powf(p);
            u.eval(x + s) + u.eval(x - s)
        };
        let head = integrate_with_breaks(&g, 0.0, smax, &sig, inner_opts).map(|r| r.value);
        let tail_fn = |tau: f64| {
            if tau <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            g(smax / tau) * (smax / (tau * tau))
        };
        let tail = integrate_with_breaks(&tail_fn, 0.0, 1.0, &[0.5, 0.25, 0.125, 1.0 / 32.0], inner_opts)
            .map(|r| r.value);
        match (head, tail) {
            (Ok(h), Ok(t)) => (h + t) * p,
            _ => Complex64::new(f64::NAN, 0.0),
        }
    };
    let outer = |x: f64| {
        let v = u.eval(x);
        if v.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        v * inner(x).conj()
    };
    let total = line_integral(u, &outer, QuadOptions { rel_tol: 1e-8, ..Default::default() })?;
    if !total.is_finite() {
        return Err(Error::Quadrature("complementary pairing not finite".into()));
    }
    if total.re < -1e-8 * total.norm() {
        return Err(Error::Invariant(format!("negative complementary pairing {}", total.re)));
    }
    Ok(total.re.max(0.0).sqrt())
}

fn fourier_weight(n: i64, s: f64, lambda: &SpectralParameter) -> f64 {
    (1.0 + lambda.mu + 2.0 * (n * n) as f64).powf(s)
}

/// `(sum |a_n|^2 (1 + mu + 2n^2)^s)^{1/2}` on explicit coefficients.
pub fn sobolev_from_coeffs(coeffs: &Coeffs, s: f64, lambda: &SpectralParameter) -> f64 {
    coeffs.iter().map(|(n, a)| a.norm_sqr() * fourier_weight(*n, s, lambda)).sum::<f64>().sqrt()
}

/// Fourier-multiplier Sobolev norm. Exact coefficients are used when the
/// vector carries them; otherwise the sample grid is doubled until the
/// weighted energy in the upper half of the band is below `1e-10` of the total.
pub fn sobolev_fourier(f: &CircleVector, s: f64, lambda: &SpectralParameter) -> Result<f64> {
    if let Some(c) = f.coeffs() {
        return Ok(sobolev_from_coeffs(c, s, lambda));
    }
    let mut n = DEFAULT_SAMPLES;
    loop {
        let k = n / 4 - 1;
        let fc = fourier_coeffs_with(f, k, n)?;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (j, a) in &fc.coeffs {
            let w = a.norm_sqr() * fourier_weight(*j, s, lambda);
            total += w;
            if j.unsigned_abs() as usize > k / 2 {
                tail += w;
            }
        }
        if tail <= 1e-10 * total {
            return Ok(total.sqrt());
        }
        if n >= MAX_SAMPLES {
            return Err(Error::Aliasing(format!(
                "weighted tail ratio {:.2e} with {n} samples",
                tail / total
            )));
        }
        n *= 2;
    }
}

/// Central-difference derivatives `u^(j)(x)`, `j <= 2`.
fn fd_derivatives(u: &LineVector, x: f64, k: usize, h: f64) -> Vec<Complex64> {
    let f0 = u.eval(x);
    let mut out = vec![f0];
    if k >= 1 {
        let (fp, fm) = (u.eval(x + h), u.eval(x - h));
        out.push((fp - fm) / (2.0 * h));
        if k >= 2 {
            out.push((fp - f0 * 2.0 + fm) / (h * h));
        }
    }
    out
}

/// Step for finite differences.
pub const FD_STEP: f64 = 1e-5;

/// `(sum_{j <= k} int |u^(j)|^2 dx)^{1/2}` over the support of `u` (or the
/// line). Derivatives come from the jet evaluator when present; otherwise
/// central differences with step [`FD_STEP`], valid for `k <= 2` and
/// checked against a doubled step.
pub fn sobolev_line(u: &LineVector, k: usize) -> Result<f64> {
    let opts = QuadOptions { rel_tol: 1e-10, ..Default::default() };
    if u.has_jet() {
        if k > crate::jet::MAX_ORDER {
            return Err(Error::Domain(format!("jet order {k} too large")));
        }
        let g = |x: f64| {
            let d = u.derivatives(x, k).unwrap();
            Complex64::new(d.iter().map(|z| z.norm_sqr()).sum(), 0.0)
        };
        let v = line_integral(u, &g, opts)?.re;
        if !v.is_finite() {
            return Err(Error::Quadrature("non-finite Sobolev integrand".into()));
        }
        return Ok(v.sqrt());
    }
    if k > 2 {
        return Err(Error::Domain("finite-difference Sobolev norm supports k <= 2".into()));
    }
    // Richardson-style consistency check on probe points
    let (lo, hi) = u.support.unwrap_or((u.grid.center - 4.0, u.grid.center + 4.0));
    for j in 1..32 {
        let x = lo + (hi - lo) * j as f64 / 32.0;
        let a = fd_derivatives(u, x, k, FD_STEP);
        let b = fd_derivatives(u, x, k, 2.0 * FD_STEP);
        for (da, db) in a.iter().zip(&b).skip(1) {
            let scale = 1.0 + da.norm() + a[0].norm();
            if !(da.is_finite() && (da - db).norm() <= 1e-3 * scale) {
                return Err(Error::Domain(format!("evaluator is not smooth near x = {x}")));
            }
        }
    }
    let g = |x: f64| {
        let d = fd_derivatives(u, x, k, FD_STEP);
        Complex64::new(d.iter().map(|z| z.norm_sqr()).sum(), 0.0)
    };
    let v = line_integral(u, &g, QuadOptions { rel_tol: 1e-8, ..opts })?.re;
    Ok(v.sqrt())
}

/// The orthonormal basis `X1 = H/sqrt2`, `X2 = (E+F)/sqrt2`, `X3 = (E-F)/sqrt2`
/// of sl2 acting on Fourier coefficients. With `s = lambda - 1`:
///
/// * `d pi(H) f   = -(s cos 2t f - sin 2t f')`
/// * `d pi(E+F) f = -(s sin 2t f + cos 2t f')`
/// * `d pi(E-F) f = f'`
pub fn lie_apply(i: usize, v: &Coeffs, lambda: &SpectralParameter) -> Coeffs {
    let s = lambda.degree();
    let mut out = Coeffs::new();
    let mut add = |k: i64, z: Complex64| {
        *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) += z * FRAC_1_SQRT_2;
    };
    let half = 0.5;
    let ih = Complex64::new(0.0, -0.5); // 1/(2i)
    for (&n, &a) in v {
        let d = Complex64::new(0.0, 2.0 * n as f64); // derivative multiplier
        match i {
            0 => {
                // -(s cos f) + sin f'
                add(n + 1, -(s * a) * half + d * a * ih);
                add(n - 1, -(s * a) * half - d * a * ih);
            }
            1 => {
                // -(s sin f) - cos f'
                add(n + 1, -(s * a) * ih - d * a * half);
                add(n - 1, (s * a) * ih - d * a * half);
            }
            2 => add(n, d * a),
            _ => panic!("sl2 basis index {i} out of range"),
        }
    }
    out.retain(|_, z| z.norm() != 0.0);
    out
}

fn coeff_norm_sq(v: &Coeffs) -> f64 {
    v.values().map(|z| z.norm_sqr()).sum()
}

/// Lie-monomial Sobolev norm `(sum_{|alpha| <= k} ||X^alpha v||^2)^{1/2}`.
pub fn sobolev_lie(v: &Coeffs, k: usize, lambda: &SpectralParameter) -> f64 {
    let mut level = vec![v.clone()];
    let mut total = coeff_norm_sq(v);
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * 3);
        for w in &level {
            for i in 0..3 {
                let x = lie_apply(i, w, lambda);
                total += coeff_norm_sq(&x);
                next.push(x);
            }
        }
        level = next;
    }
    total.sqrt()
}

/// `-sum X_i^2` applied to `e_n`.
pub fn casimir_apply(n: i64, lambda: &SpectralParameter) -> Coeffs {
    let e = Coeffs::from([(n, Complex64::new(1.0, 0.0))]);
    let mut out = Coeffs::new();
    for i in 0..3 {
        for (k, z) in lie_apply(i, &lie_apply(i, &e, lambda), lambda) {
            *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) -= z;
        }
    }
    out
}

/// Scalar `c` with `-sum X_i^2 e_1 = (mu + 2) c e_1`.
pub fn casimir_constant(lambda: &SpectralParameter) -> Complex64 {
    let img = casimir_apply(1, lambda);
    img.get(&1).copied().unwrap_or_default() / (lambda.mu_complex() + 2.0)
}

/// Relative error of `-sum X_i^2 e_n = (mu + 2n^2) c e_n` with `c` from `n = 1`.
pub fn casimir_check(n: i64, lambda: &SpectralParameter) -> f64 {
    assert!(n.abs() <= 64, "casimir_check is defined for |n| <= 64");
    let c = casimir_constant(lambda);
    let want = (lambda.mu_complex() + 2.0 * (n * n) as f64) * c;
    let img = casimir_apply(n, lambda);
    let mut err = 0.0;
    for (k, z) in &img {
        let target = if *k == n { want } else { Complex64::new(0.0, 0.0) };
        err += (z - target).norm_sqr();
    }
    if !img.contains_key(&n) {
        err += want.norm_sqr();
    }
    err.sqrt() / want.norm().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_element, GroupElement};
    use crate::jet::Jet;
    use crate::quad::LineGrid;
    use crate::repmodels::{act_circle, dilate, fourier_coeffs_auto, k_fixed_line};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_norm_examples() {
        assert!((l2_circle(&CircleVector::basis(0)) - 1.0).abs() < 1e-14);
        let v = CircleVector::from_coeffs(Coeffs::from([(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]));
        assert!((l2_circle(&v) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn line_norm_examples() {
        let lam = SpectralParameter::principal(1.4);
        let u = k_fixed_line(&lam);
        assert!((l2_line(&u, &lam).unwrap() - 1.0).abs() < 1e-10);
        let n2 = l2_line(&dilate(&u, 2.0), &lam).unwrap();
        assert!((n2 - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(l2_line(&LineVector::zero(), &lam).unwrap(), 0.0);
        let comp = SpectralParameter::complementary(-0.5).unwrap();
        assert!(matches!(l2_line(&u, &comp), Err(Error::Domain(_))));
    }

    #[test]
    fn fourier_sobolev_examples() {
        let lam = SpectralParameter::principal(0.0);
        let e0 = sobolev_fourier(&CircleVector::basis(0), 3.0, &lam).unwrap();
        assert!((e0 - (1.0 + lam.mu).powf(1.5)).abs() < 1e-14);
        let e5 = sobolev_fourier(&CircleVector::basis(5), 2.0, &lam).unwrap();
        assert!((e5 - (1.0 + lam.mu + 50.0)).abs() < 1e-12);
        // sampled path, s = 0 is the L2 norm
        let g = GroupElement::diagonal(0.3);
        let v = act_circle(&g, &CircleVector::basis(0), &lam);
        let s0 = sobolev_fourier(&v, 0.0, &lam).unwrap();
        assert!((s0 - l2_circle(&v)).abs() < 1e-10);
    }

    #[test]
    fn gaussian_line_sobolev() {
        let want = (5.0 * (PI / 2.0).sqrt()).sqrt();
        let jet = LineVector::from_jet(|x: Jet| (-(x * x)).exp(), LineGrid::scales(0.5, 4.0));
        assert!((sobolev_line(&jet, 2).unwrap() - want).abs() < 1e-8);
        let fd = LineVector::from_fn(|x| c((-(x * x)).exp(), 0.0), LineGrid::scales(0.5, 4.0)).with_support(-9.0, 9.0);
        assert!((sobolev_line(&fd, 2).unwrap() - want).abs() < 1e-6);
        let plain = sobolev_line(&jet, 0).unwrap();
        assert!((plain - (PI / 2.0).sqrt().sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rough_evaluator_rejected() {
        let kink = LineVector::from_fn(|x| c(x.abs().sqrt(), 0.0), LineGrid::default()).with_support(-1.0, 1.0);
        assert!(sobolev_line(&kink, 2).is_err());
    }

    #[test]
    fn casimir_eigenvalues() {
        for lam in [SpectralParameter::principal(0.0), SpectralParameter::principal(2.0)] {
            let c0 = casimir_constant(&lam);
            assert!((c0 - 2.0).norm() < 1e-12, "{c0}");
            assert!(casimir_check(1, &lam) < 1e-15);
            for n in [-64, -7, 0, 3, 32, 64] {
                assert!(casimir_check(n, &lam) < 1e-8, "n={n}");
            }
            let zero = casimir_apply(0, &lam);
            assert!((zero[&0] - lam.mu_complex() * c0).norm() < 1e-12);
        }
    }

    #[test]
    fn lie_operators_match_flows() {
        // d/dt pi(exp tX) e_n at t = 0 by finite differences on the circle
        let lam = SpectralParameter::principal(0.7);
        let n = 2;
        let e = CircleVector::basis(n);
        let h = 1e-5;
        let s = FRAC_1_SQRT_2;
        let flows: [Box<dyn Fn(f64) -> GroupElement>; 3] = [
            Box::new(move |t| GroupElement::diagonal(t * s)),
            Box::new(move |t| {
                let u = t * s;
                GroupElement { a: u.cosh(), b: u.sinh(), c: u.sinh(), d: u.cosh() }
            }),
            Box::new(move |t| GroupElement::rotation(-t * s)),
        ];
        for (i, flow) in flows.iter().enumerate() {
            let exact = CircleVector::from_coeffs(lie_apply(i, &Coeffs::from([(n, c(1.0, 0.0))]), &lam));
            let plus = act_circle(&flow(h), &e, &lam);
            let minus = act_circle(&flow(-h), &e, &lam);
            for t in [0.2, 1.1, 2.5] {
                let fd = (plus.eval(t) - minus.eval(t)) / (2.0 * h);
                assert!((fd - exact.eval(t)).norm() < 1e-6, "i={i} t={t}");
            }
        }
    }

    #[test]
    fn sobolev_g_continuity() {
        let lam = SpectralParameter::principal(1.0);
        let v = Coeffs::from([(0, c(1.0, 0.0)), (1, c(0.3, 0.2))]);
        let base = sobolev_lie(&v, 2, &lam);
        let f = CircleVector::from_coeffs(v);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let g = random_element(&mut rng, 1.0, 0.6);
            let moved = fourier_coeffs_auto(&act_circle(&g, &f, &lam)).unwrap();
            let mut cs = moved.coeffs.clone();
            cs.retain(|_, z| z.norm() > 1e-15);
            let lhs = sobolev_lie(&cs, 2, &lam);
            assert!(lhs <= g.ad_norm().powi(2) * base * (1.0 + 1e-8), "{lhs} {base}");
        }
    }

    #[test]
    fn comp_norm_examples() {
        assert_eq!(comp_norm(&LineVector::zero().with_support(-1.0, 1.0), -0.5).unwrap(), 0.0);
        assert!(comp_norm(&LineVector::zero(), 0.5).is_err());
        let lam = -0.5;
        let bump = LineVector::from_jet(|x: Jet| (-(x * x)).exp(), LineGrid::scales(0.5, 4.0));
        let n1 = comp_norm(&bump, lam).unwrap();
        let n2 = comp_norm(&dilate(&bump, 2.0), lam).unwrap();
        let want = 2f64.powf((1.0 - lam) / 2.0);
        assert!((n2 / n1 - want).abs() < 1e-6, "{} vs {want}", n2 / n1);
    }

    #[test]
    fn comp_norm_gaussian_closed_form() {
        // int int |x-y|^b e^{-x^2-y^2} = sqrt(pi) 2^{b/2} Gamma((b+1)/2) for b > -1
        let lam = -0.5;
        let b = -lam - 1.0;
        let gamma_quarter = 3.625_609_908_221_908_4; // Gamma(1/4)
        let want = (PI.sqrt() * 2f64.powf(b / 2.0) * gamma_quarter).sqrt();
        let bump = LineVector::from_jet(|x: Jet| (-(x * x)).exp(), LineGrid::scales(0.5, 4.0));
        let got = comp_norm(&bump, lam).unwrap();
        assert!((got - want).abs() < 1e-6 * want, "{got} {want}");
    }

    #[test]
    fn comp_norm_positive_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = LineVector::from_jet(
                move |x: Jet| {
                    let g = (-(x * x)).exp();
                    let p = x.scale_real(a[3]).add_const(c(a[2], a[1])) * x + Jet::real(a[0], x.order());
                    g * p
                },
                LineGrid::scales(0.5, 4.0),
            );
            assert!(comp_norm(&u, -0.5).unwrap() > 0.0);
        }
    }
}
