//! Point pairs on `P1 x P1`, the domain `Q+` of forms with positive definite
//! real part, and the factorization `U = G I K_C`.

use crate::algebra::{transform_form, ComplexGroupElement, GroupElement, UnimodularForm};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Two points of the affine chart `z -> (z, 1)` of `P1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointPair {
    pub a: Complex64,
    pub b: Complex64,
}

impl PointPair {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        PointPair { a, b }
    }

    /// Membership in `H x conj(H)`.
    pub fn in_upper_lower(&self) -> bool {
        self.a.im > 0.0 && self.b.im < 0.0
    }

    pub fn mobius(&self, g: &GroupElement) -> PointPair {
        PointPair { a: g.mobius(self.a), b: g.mobius(self.b) }
    }
}

fn leading_sign_positive(p: Complex64, s: Complex64) -> bool {
    for v in [p.re, p.im, s.re, s.im] {
        if v != 0.0 {
            return v > 0.0;
        }
    }
    true
}

/// The unimodular form vanishing at the two points: `k (x - a y)(x - b y)`
/// with `k = +-2i / (a - b)`. The sign makes `Re p > 0` (ties broken on the
/// next nonzero coefficient), which sends `(i, -i)` to `x^2 + y^2`.
pub fn form_from_points(pp: &PointPair) -> Result<UnimodularForm> {
    let (a, b) = (pp.a, pp.b);
    let diff = a - b;
    let scale = 1.0 + a.norm().max(b.norm());
    if !diff.is_finite() || diff.norm() <= 1e-14 * scale {
        return Err(Error::Domain(format!("coincident points {a} and {b}")));
    }
    let k = Complex64::new(0.0, 2.0) / diff;
    let mut p = k;
    let mut q = -k * (a + b) * 0.5;
    let mut s = k * a * b;
    if !leading_sign_positive(p, s) {
        p = -p;
        q = -q;
        s = -s;
    }
    Ok(UnimodularForm { p, q, s })
}

/// Real part positive definite, by the leading minor test.
pub fn is_in_qplus(f: &UnimodularForm) -> bool {
    let (p, q, s) = f.real_part();
    p > 0.0 && p * s - q * q > 0.0
}

/// The diagonal form `z^2 x^2 + z^{-2} y^2`, which is `diag(1/z, z)(Q)`.
pub fn diagonal_form(z: Complex64) -> UnimodularForm {
    transform_form(&ComplexGroupElement::diag_inv(z), &UnimodularForm::standard())
}

/// Factorization `P = g(diag(1/z, z)(Q))` with `g` real and `|arg z| < pi/4`.
///
/// `Re P` and `Im P` are diagonalized simultaneously: with `Re P = L L^T`
/// the symmetric matrix `L^{-1} Im P L^{-T}` is rotated to diagonal form and
/// the resulting real basis change is normalized to determinant one.
pub fn decompose_u(f: &UnimodularForm) -> Result<(GroupElement, Complex64)> {
    if !is_in_qplus(f) {
        return Err(Error::Domain("form is not in Q+".into()));
    }
    let (a11, a12, a22) = f.real_part();
    let (b11, b12, b22) = f.imag_part();
    // Cholesky A = L L^T, L = [[l11, 0], [l21, l22]]
    let l11 = a11.sqrt();
    let l21 = a12 / l11;
    let l22 = (a22 - l21 * l21).sqrt();
    // Linv = [[1/l11, 0], [-l21/(l11 l22), 1/l22]]
    let i11 = 1.0 / l11;
    let i21 = -l21 / (l11 * l22);
    let i22 = 1.0 / l22;
    // C = Linv B Linv^T
    let c11 = i11 * i11 * b11;
    let c12 = i11 * (i21 * b11 + i22 * b12);
    let c22 = i21 * i21 * b11 + 2.0 * i21 * i22 * b12 + i22 * i22 * b22;
    // Jacobi rotation diagonalizing C
    let (cs, sn) = if c12 == 0.0 {
        (1.0, 0.0)
    } else {
        let tau = (c22 - c11) / (2.0 * c12);
        let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
        let cs = 1.0 / (1.0 + t * t).sqrt();
        (cs, t * cs)
    };
    // S = Linv^T V, V = [[cs, sn], [-sn, cs]]
    let mut s11 = i11 * cs - i21 * sn;
    let mut s12 = i11 * sn + i21 * cs;
    let mut s21 = -i22 * sn;
    let mut s22 = i22 * cs;
    let mut det = s11 * s22 - s12 * s21;
    if det < 0.0 {
        s12 = -s12;
        s22 = -s22;
        det = -det;
    }
    let n = det.sqrt();
    s11 /= n;
    s12 /= n;
    s21 /= n;
    s22 /= n;
    let g = GroupElement { a: s11, b: s12, c: s21, d: s22 };
    // D = S^T M S; its (1,1) entry is z^2
    let m11 = f.p * s11 + f.q * s21;
    let m21 = f.q * s11 + f.s * s21;
    let d1 = m11 * s11 + m21 * s21;
    let z = d1.sqrt();
    let rebuilt = transform_form(&g.to_complex(), &diagonal_form(z));
    let scale = f.p.norm().max(f.q.norm()).max(f.s.norm()).max(1.0);
    if rebuilt.max_dist(f) > 1e-9 * scale {
        return Err(Error::Invariant(format!(
            "factorization residual {:.3e}",
            rebuilt.max_dist(f)
        )));
    }
    Ok((g, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_element, transform_form_real};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn standard_pair() {
        let f = form_from_points(&PointPair::new(c(0.0, 1.0), c(0.0, -1.0))).unwrap();
        assert!(f.max_dist(&UnimodularForm::standard()) < 1e-15);
    }

    #[test]
    fn scaled_pair() {
        let f = form_from_points(&PointPair::new(c(0.0, 2.0), c(0.0, -2.0))).unwrap();
        let want = UnimodularForm { p: c(0.5, 0.0), q: c(0.0, 0.0), s: c(2.0, 0.0) };
        assert!(f.max_dist(&want) < 1e-15);
    }

    #[test]
    fn symmetric_in_points() {
        let pp = PointPair::new(c(0.3, 1.7), c(-2.0, -0.4));
        let f = form_from_points(&pp).unwrap();
        let g = form_from_points(&PointPair::new(pp.b, pp.a)).unwrap();
        assert!(f.max_dist(&g) < 1e-14);
        assert!((f.det() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn coincident_points_rejected() {
        let z = c(1.0, 1.0);
        assert!(matches!(form_from_points(&PointPair::new(z, z)), Err(Error::Domain(_))));
    }

    #[test]
    fn qplus_membership() {
        assert!(is_in_qplus(&UnimodularForm::standard()));
        let imag = UnimodularForm::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, -1.0)).unwrap();
        assert!(!is_in_qplus(&imag));
        assert!(is_in_qplus(&crate::continuation::q_eps_form(0.1).unwrap().form));
    }

    #[test]
    fn decompose_standard_and_diagonal() {
        let (g, z) = decompose_u(&UnimodularForm::standard()).unwrap();
        assert!(g.max_dist(&GroupElement::identity()) < 1e-15);
        assert!((z - 1.0).norm() < 1e-15);

        let p = Complex64::from_polar(1.0, PI / 6.0);
        let f = UnimodularForm::new(p, c(0.0, 0.0), p.inv()).unwrap();
        let (_, z) = decompose_u(&f).unwrap();
        assert!((z - Complex64::from_polar(1.0, PI / 12.0)).norm() < 1e-14);
        assert!(z.arg().abs() < PI / 4.0);
    }

    #[test]
    fn decompose_eps_form_round_trip() {
        let q = crate::continuation::q_eps_form(0.3).unwrap().form;
        let (g, z) = decompose_u(&q).unwrap();
        let back = transform_form_real(&g, &diagonal_form(z));
        assert!(back.max_dist(&q) < 1e-9);
        assert!(z.arg().abs() < PI / 4.0);
    }

    #[test]
    fn pairs_land_in_qplus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = c(rng.gen_range(-10.0..10.0), rng.gen_range(1e-3..=10.0));
            let b = c(rng.gen_range(-10.0..10.0), -rng.gen_range(1e-3..=10.0));
            let f = form_from_points(&PointPair::new(a, b)).unwrap();
            assert!(is_in_qplus(&f), "{a} {b}");
        }
    }

    #[test]
    fn equivariance_under_real_mobius() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let g = random_element(&mut rng, 2.0, 1.0);
            let pp = PointPair::new(
                c(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..3.0)),
                c(rng.gen_range(-3.0..3.0), -rng.gen_range(0.1..3.0)),
            );
            let lhs = form_from_points(&pp.mobius(&g)).unwrap();
            let rhs = transform_form_real(&g, &form_from_points(&pp).unwrap());
            let scale = lhs.p.norm().max(lhs.s.norm()).max(1.0);
            assert!(lhs.max_dist(&rhs) < 1e-9 * scale);
        }
    }
}
