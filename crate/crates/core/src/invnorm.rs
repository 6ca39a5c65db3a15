//! Upper bounds for invariant norms: infima of seminorm families over
//! decompositions, infima over group orbits, and dyadic-decomposition
//! certificates for roughly homogeneous families on the line.

use crate::algebra::GroupElement;
use crate::continuation::{continued_vector, q_eps_form};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::norms::{line_integral, sobolev_fourier, sobolev_line};
use crate::quad::{integrate_panels, LineGrid, QuadOptions};
use crate::repmodels::{act_line, LineVector, SpectralParameter};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Below this distance from the ends of `[0, 1]` the step is treated as flat;
/// `exp(-1/0.02)` is below `2e-22`.
const STEP_FLAT: f64 = 0.02;

fn psi(x: Jet) -> Jet {
    (-x.recip()).exp()
}

/// Smooth step `S = psi(x) / (psi(x) + psi(1 - x))`, `psi(x) = exp(-1/x)`:
/// 0 for `x <= 0`, 1 for `x >= 1`, smooth in between.
pub fn smooth_step(x: Jet) -> Jet {
    let x0 = x.value().re;
    let n = x.order();
    if x0 <= STEP_FLAT {
        return Jet::real(0.0, n);
    }
    if x0 >= 1.0 - STEP_FLAT {
        return Jet::real(1.0, n);
    }
    let a = psi(x);
    let b = psi(Jet::real(1.0, n) - x);
    a / (a + b)
}

/// `S'(x)` along the jet `x`.
pub fn smooth_step_prime(x: Jet) -> Jet {
    let x0 = x.value().re;
    let n = x.order();
    if x0 <= STEP_FLAT || x0 >= 1.0 - STEP_FLAT {
        return Jet::real(0.0, n);
    }
    let one = Jet::real(1.0, n);
    let y = one - x;
    let (a, b) = (psi(x), psi(y));
    let (da, db) = (a / (x * x), b / (y * y));
    let s = a + b;
    (da * b + a * db) / (s * s)
}

pub fn smooth_step_value(x: f64) -> f64 {
    smooth_step(Jet::var(x, 0)).value().re
}

/// `gamma(x) = S(2 - |x|)`: 1 on `[-1, 1]`, supported on `[-2, 2]`.
pub fn gamma(x: Jet) -> Jet {
    smooth_step(Jet::real(2.0, x.order()) - x.abs_real())
}

/// `delta_1(x) = -x gamma'(x) = |x| S'(2 - |x|)`, supported on `1 <= |x| <= 2`.
pub fn delta1(x: Jet) -> Jet {
    let ax = x.abs_real();
    ax * smooth_step_prime(Jet::real(2.0, x.order()) - ax)
}

/// Truncation `S(2 - 2|x|)`: 1 on `[-1/2, 1/2]`, supported on `[-1, 1]`.
pub fn truncation(x: Jet) -> Jet {
    smooth_step(Jet::real(2.0, x.order()) - x.abs_real().scale_real(2.0))
}

pub fn truncation_value(x: f64) -> f64 {
    if !x.is_finite() {
        return 0.0;
    }
    truncation(Jet::var(x, 0)).value().re
}

pub type Seminorm<'a> = &'a (dyn Fn(&LineVector) -> Result<f64> + Sync);

/// Smooth partition of unity `phi_1..phi_b` subordinate to the cut points,
/// each transition of width `w`.
fn partition_piece(v: &LineVector, cuts: &[f64], w: f64, i: usize) -> LineVector {
    let cuts = cuts.to_vec();
    let b = cuts.len() + 1;
    let sigma = move |x: Jet, c: f64| smooth_step((x.add_const(Complex64::new(-c, 0.0))).scale_real(1.0 / w).add_const(Complex64::new(0.5, 0.0)));
    let phi = LineVector::from_jet(
        move |x: Jet| {
            let n = x.order();
            let upper = if i + 1 < b { sigma(x, cuts[i]) } else { Jet::real(1.0, n) };
            let lower = if i > 0 { sigma(x, cuts[i - 1]) } else { Jet::real(0.0, n) };
            // phi_i = sigma_{i-1} - sigma_i with sigma_0 = 1, sigma_b = 0
            let s_prev = if i > 0 { lower } else { Jet::real(1.0, n) };
            let s_next = if i + 1 < b { upper } else { Jet::real(0.0, n) };
            s_prev - s_next
        },
        v.grid.clone(),
    );
    let mut piece = v.multiply(&phi);
    piece.support = v.support;
    piece
}

fn split_objective(norms: &[Seminorm], v: &LineVector, cuts: &[f64], w: f64) -> f64 {
    (0..=cuts.len())
        .map(|i| {
            let piece = partition_piece(v, cuts, w, i);
            norms
                .iter()
                .map(|n| n(&piece).unwrap_or(f64::INFINITY))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Upper bound for `inf sum_i N_{j(i)}(v_i)` over decompositions
/// `v = v_1 + ... + v_b`, `b <= budget`, by smooth partitions of the line
/// whose cut points are tuned by coordinate descent with seeded restarts.
/// Each piece takes its smallest seminorm. Nonincreasing in `budget`.
pub fn seminorm_inf(norms: &[Seminorm], v: &LineVector, budget: usize, seed: u64) -> Result<f64> {
    if norms.is_empty() {
        return Err(Error::Domain("empty seminorm family".into()));
    }
    if budget == 0 {
        return Err(Error::Domain("decomposition budget must be at least 1".into()));
    }
    let mut best = norms.iter().map(|n| n(v)).collect::<Result<Vec<_>>>()?.into_iter().fold(f64::INFINITY, f64::min);
    let (lo, hi) = v.support.unwrap_or((v.grid.center - 4.0 * v.grid.coarse.min(4.0), v.grid.center + 4.0 * v.grid.coarse.min(4.0)));
    let width = (hi - lo) / 16.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for b in 2..=budget {
        let m = b - 1;
        let mut best_b = f64::INFINITY;
        for restart in 0..3 {
            let mut cuts: Vec<f64> = if restart == 0 {
                (1..=m).map(|j| lo + (hi - lo) * j as f64 / b as f64).collect()
            } else {
                let mut c: Vec<f64> = (0..m).map(|_| rng.gen_range(lo..hi)).collect();
                c.sort_by(|a, b| a.partial_cmp(b).unwrap());
                c
            };
            let mut val = split_objective(norms, v, &cuts, width);
            for _sweep in 0..3 {
                for j in 0..m {
                    let left = if j == 0 { lo } else { cuts[j - 1] };
                    let right = if j + 1 == m { hi } else { cuts[j + 1] };
                    for q in 1..8 {
                        let cand = left + (right - left) * q as f64 / 8.0;
                        let mut trial = cuts.clone();
                        trial[j] = cand;
                        let tv = split_objective(norms, v, &trial, width);
                        if tv < val {
                            val = tv;
                            cuts = trial;
                        }
                    }
                }
            }
            best_b = best_b.min(val);
        }
        best = best.min(best_b);
    }
    Ok(best)
}

/// `min_g S(pi(g^{-1}) v)` over the sample set.
pub fn orbit_upper_bound(
    v: &LineVector,
    s: Seminorm,
    samples: &[GroupElement],
    lambda: &SpectralParameter,
) -> Result<f64> {
    let vals: Vec<f64> = samples
        .par_iter()
        .map(|g| s(&act_line(&g.inverse(), v, lambda)))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

pub type FamilyGen = Arc<dyn Fn(f64) -> LineVector + Send + Sync>;

/// `u_eps = tau_eps f_eps` with `f_{t eps}(t x) = t^kappa f_eps(x)` and
/// `tau_eps` supported in `[-1, 1]`, for a norm of homogeneity degree `r`.
#[derive(Clone)]
pub struct HomogeneousFamily {
    pub kappa: Complex64,
    pub f_gen: FamilyGen,
    pub tau_gen: FamilyGen,
    pub k: usize,
    pub r: f64,
}

pub const DEFAULT_SOBOLEV_ORDER: usize = 2;

impl HomogeneousFamily {
    /// `f_eps = (x + i eps)^kappa` with the fixed truncation `S(2 - 2|x|)`.
    pub fn power(kappa: Complex64, r: f64, k: usize) -> Self {
        let f_gen: FamilyGen = Arc::new(move |eps: f64| {
            LineVector::from_jet(move |x: Jet| x.add_const(Complex64::new(0.0, eps)).powc(kappa), LineGrid::scales(eps, 1.0))
        });
        let tau_gen: FamilyGen =
            Arc::new(|_eps: f64| LineVector::from_jet(truncation, LineGrid::scales(0.5, 1.0)).with_support(-1.0, 1.0));
        HomogeneousFamily { kappa, f_gen, tau_gen, k, r }
    }

    /// Line-model piece of `v_eps` next to the y-axis (`side = 1`) or, after the
    /// coordinate change `(x, y) -> (y, -x)`, next to the x-axis (`side = -1`):
    /// `f_eps = (side x - i eps)^kappa`, `tau_eps = S(2 - 2|x|) (a (i + side eps x))^kappa`.
    pub fn eps_axis(lambda: &SpectralParameter, side: f64, k: usize) -> Self {
        let kappa = lambda.kappa();
        let r = (lambda.lambda.re - 1.0) / 2.0;
        let f_gen: FamilyGen = Arc::new(move |eps: f64| {
            LineVector::from_jet(
                move |x: Jet| x.scale_real(side).add_const(Complex64::new(0.0, -eps)).powc(kappa),
                LineGrid::scales(eps, 1.0),
            )
        });
        let tau_gen: FamilyGen = Arc::new(move |eps: f64| {
            let a = 2.0 / (1.0 + eps * eps);
            LineVector::from_jet(
                move |x: Jet| {
                    let w = x.scale_real(side * eps).add_const(Complex64::new(0.0, 1.0));
                    truncation(x) * w.scale_real(a).powc(kappa)
                },
                LineGrid::scales(0.5, 1.0),
            )
            .with_support(-1.0, 1.0)
        });
        HomogeneousFamily { kappa, f_gen, tau_gen, k, r }
    }

    pub fn u(&self, eps: f64) -> LineVector {
        let f = (self.f_gen)(eps);
        let t = (self.tau_gen)(eps);
        let mut u = t.multiply(&f);
        u.grid = f.grid.clone();
        u.grid.breaks.extend([-1.0, -0.5, 0.5, 1.0]);
        u
    }

    /// Largest relative defect of `f_{t eps}(t x) = t^kappa f_eps(x)`.
    pub fn homogeneity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for eps in [0.3, 0.05, 0.004] {
            let f = (self.f_gen)(eps);
            for t in [0.5, 2.0, 3.0] {
                let g = (self.f_gen)(t * eps);
                let tk = (self.kappa * (t as f64).ln()).exp();
                for x in [-1.7, -0.3, 0.2, 1.3] {
                    let (a, b) = (g.eval(t * x), tk * f.eval(x));
                    worst = worst.max((a - b).norm() / b.norm().max(1e-300));
                }
            }
        }
        worst
    }

    /// `C_tr`: sup of `|tau_eps^(j)|`, `j <= k`, on sampled `eps`; errors if a
    /// truncation leaks outside `[-1, 1]`.
    pub fn truncation_constant(&self, eps_samples: &[f64]) -> Result<f64> {
        let mut c: f64 = 0.0;
        for &eps in eps_samples {
            let tau = (self.tau_gen)(eps);
            match tau.support {
                Some((lo, hi)) if lo >= -1.0 && hi <= 1.0 => {}
                _ => return Err(Error::Invariant("truncation not supported in [-1, 1]".into())),
            }
            for j in 0..=200 {
                let x = -1.0 + 2.0 * j as f64 / 200.0;
                let d = tau
                    .derivatives(x, self.k)
                    .ok_or_else(|| Error::Domain("truncation needs a jet evaluator".into()))?;
                for z in d {
                    c = c.max(z.norm());
                }
            }
        }
        Ok(c)
    }

    /// `S_f`: bound for `S_k(f_eps)` on `[-2,-1] u [1,2]` over sampled `eps` and
    /// for `S_k(f_1)` on `[-2, 2]`.
    pub fn profile_constant(&self, eps_samples: &[f64]) -> Result<f64> {
        let mut s: f64 = sobolev_on(&(self.f_gen)(1.0), &[(-2.0, 2.0)], self.k)?;
        for &eps in eps_samples {
            s = s.max(sobolev_on(&(self.f_gen)(eps), &[(-2.0, -1.0), (1.0, 2.0)], self.k)?);
        }
        Ok(s)
    }
}

/// Line Sobolev norm of `u` restricted to a union of intervals.
pub fn sobolev_on(u: &LineVector, intervals: &[(f64, f64)], k: usize) -> Result<f64> {
    let mut total = 0.0;
    for &(lo, hi) in intervals {
        let piece = u.clone().with_support(lo, hi);
        total += sobolev_line(&piece, k)?.powi(2);
    }
    Ok(total.sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCertificate {
    /// Certified upper bound for `N(u_eps)`.
    pub value: f64,
    /// `eps^{-r} S_k(gamma u_eps(eps .))`.
    pub eps_term: f64,
    /// `(t_j, t_j^{-r} S_k(delta_1 u_eps(t_j .)))` on the midpoint grid in `ln t`.
    pub terms: Vec<(f64, f64)>,
    /// Finest node density used in any octave.
    pub nodes_per_octave: usize,
    pub c_tr: f64,
    pub s_f: f64,
}

/// Pieces are resolved when adjacent contributions differ by at most this
/// fraction of the largest one.
pub const PIECE_VARIATION: f64 = 0.10;
pub const MIN_NODES_PER_OCTAVE: usize = 4;
pub const MAX_NODES_PER_OCTAVE: usize = 64;

/// Panel-rule Sobolev norm for the dyadic pieces, which are smooth on unit
/// scale; falls back to the adaptive rule when the panel estimate is loose.
fn piece_sobolev(u: &LineVector, intervals: &[(f64, f64)], k: usize) -> Result<f64> {
    let g = |x: f64| {
        let d = u.derivatives(x, k).unwrap();
        Complex64::new(d.iter().map(|z| z.norm_sqr()).sum(), 0.0)
    };
    let mut total = 0.0;
    let mut err = 0.0;
    for &(lo, hi) in intervals {
        let r = integrate_panels(&g, lo, hi, (12.0 * (hi - lo)).ceil() as usize);
        total += r.value.re;
        err += r.error;
    }
    if total.is_finite() && err <= 1e-9 * total + 1e-280 {
        return Ok(total.sqrt());
    }
    sobolev_on(u, intervals, k)
}

fn piece_norm(u: &LineVector, t: f64, k: usize) -> Result<f64> {
    let u2 = u.clone();
    let piece = LineVector::from_jet(move |x: Jet| delta1(x) * u2.eval_jet(x.scale_real(t)).unwrap(), LineGrid::scales(0.25, 2.0));
    piece_sobolev(&piece, &[(-2.0, -1.0), (1.0, 2.0)], k)
}

fn eps_piece_norm(u: &LineVector, eps: f64, k: usize) -> Result<f64> {
    let u2 = u.clone();
    let piece = LineVector::from_jet(move |x: Jet| gamma(x) * u2.eval_jet(x.scale_real(eps)).unwrap(), LineGrid::scales(0.25, 2.0));
    piece_sobolev(&piece, &[(-2.0, -1.0), (-1.0, 1.0), (1.0, 2.0)], k)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("epsilon {eps} not in (0, 1]")));
    }
    Ok(())
}

fn family_vector(fam: &HomogeneousFamily, eps: f64) -> Result<LineVector> {
    check_eps(eps)?;
    let u = fam.u(eps);
    if !u.has_jet() {
        return Err(Error::Domain("family needs jet evaluators".into()));
    }
    Ok(u)
}

/// Weighted pieces at the `n` midpoints of `[lo, hi]` in `ln t`.
fn cell_terms(fam: &HomogeneousFamily, u: &LineVector, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let step = (hi - lo) / n as f64;
    let ts: Vec<f64> = (0..n).map(|j| (lo + (j as f64 + 0.5) * step).exp()).collect();
    ts.par_iter()
        .map(|&t| piece_norm(u, t, fam.k).map(|p| (t, t.powf(-fam.r) * p)))
        .collect()
}

/// Dyadic certificate on a uniform grid with a fixed number of nodes per octave.
pub fn dyadic_bound_fixed(fam: &HomogeneousFamily, eps: f64, nodes_per_octave: usize) -> Result<BoundCertificate> {
    let u = family_vector(fam, eps)?;
    let m = ((nodes_per_octave as f64) * (1.0 / eps).log2()).ceil().max(1.0) as usize;
    let step = -eps.ln() / m as f64;
    let terms = cell_terms(fam, &u, eps.ln(), 0.0, m)?;
    let integral: f64 = terms.iter().map(|(_, w)| w * step).sum();
    let eps_term = eps.powf(-fam.r) * eps_piece_norm(&u, eps, fam.k)?;
    Ok(BoundCertificate {
        value: integral + eps_term,
        eps_term,
        terms,
        nodes_per_octave,
        c_tr: f64::NAN,
        s_f: f64::NAN,
    })
}

struct Cell {
    lo: f64,
    hi: f64,
    n: usize,
    terms: Vec<(f64, f64)>,
}

/// Certified upper bound for `N(u_eps)`, valid for every norm `N` with
/// `N(h_t f) = t^{-r} N(f)` and `N <= S_k` on functions supported in `[-2, 2]`:
/// `eps^{-r} S_k(gamma u_eps(eps .)) + int_eps^1 t^{-r} S_k(delta_1 u_eps(t .)) dt/t`.
///
/// The `t`-integral uses the midpoint rule in `ln t` on octave cells, starting
/// at `MIN_NODES_PER_OCTAVE` nodes; cells next to a jump larger than
/// `PIECE_VARIATION` times the largest contribution are doubled, up to
/// `MAX_NODES_PER_OCTAVE`.
pub fn dyadic_bound(fam: &HomogeneousFamily, eps: f64) -> Result<BoundCertificate> {
    let u = family_vector(fam, eps)?;
    let defect = fam.homogeneity_defect();
    if !(defect <= 1e-9) {
        return Err(Error::Invariant(format!("family is not homogeneous: defect {defect:.2e}")));
    }
    let samples = [1.0, 0.5, 0.1, eps];
    let c_tr = fam.truncation_constant(&samples)?;
    let s_f = fam.profile_constant(&samples)?;

    let ncells = (1.0 / eps).log2().ceil().max(1.0) as usize;
    let width = -eps.ln() / ncells as f64;
    let mut cells = Vec::with_capacity(ncells);
    for j in 0..ncells {
        let lo = eps.ln() + j as f64 * width;
        let hi = lo + width;
        let terms = cell_terms(fam, &u, lo, hi, MIN_NODES_PER_OCTAVE)?;
        cells.push(Cell { lo, hi, n: MIN_NODES_PER_OCTAVE, terms });
    }
    loop {
        let flat: Vec<(usize, f64)> =
            cells.iter().enumerate().flat_map(|(i, c)| c.terms.iter().map(move |t| (i, t.1))).collect();
        let peak = flat.iter().map(|t| t.1).fold(0.0, f64::max);
        let mut marked = vec![false; ncells];
        let mut worst: f64 = 0.0;
        for w in flat.windows(2) {
            let v = if peak > 0.0 { (w[1].1 - w[0].1).abs() / peak } else { 0.0 };
            if v > PIECE_VARIATION {
                marked[w[0].0] = true;
                marked[w[1].0] = true;
                worst = worst.max(v);
            }
        }
        if !marked.iter().any(|&m| m) {
            break;
        }
        for (i, c) in cells.iter_mut().enumerate() {
            if !marked[i] {
                continue;
            }
            if c.n >= MAX_NODES_PER_OCTAVE {
                return Err(Error::Quadrature(format!(
                    "t-grid unresolved at {} nodes per octave (variation {worst:.3})",
                    c.n
                )));
            }
            c.n *= 2;
            c.terms = cell_terms(fam, &u, c.lo, c.hi, c.n)?;
        }
    }
    let integral: f64 = cells.iter().map(|c| c.terms.iter().map(|t| t.1).sum::<f64>() * (c.hi - c.lo) / c.n as f64).sum();
    let eps_term = eps.powf(-fam.r) * eps_piece_norm(&u, eps, fam.k)?;
    Ok(BoundCertificate {
        value: integral + eps_term,
        eps_term,
        terms: cells.iter().flat_map(|c| c.terms.iter().copied()).collect(),
        nodes_per_octave: cells.iter().map(|c| c.n).max().unwrap_or(MIN_NODES_PER_OCTAVE),
        c_tr,
        s_f,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VepsBound {
    pub value: f64,
    pub y_axis: f64,
    pub x_axis: f64,
    pub bulk: f64,
}

/// Certified upper bound for `S_k^G(v_eps)` (up to the fixed comparability
/// constant between line and circle Sobolev norms on `[-2, 2]`).
///
/// The circle is split by `alpha_y = T(cot theta)`, `alpha_x = T(tan theta)`
/// and the bulk `1 - alpha_x - alpha_y`, with `T` the truncation. The two axis
/// pieces are dyadic certificates of homogeneity `kappa = (lambda-1)/2`; the
/// bulk is bounded by its Fourier Sobolev norm.
pub fn invariant_bound_veps(lambda: &SpectralParameter, eps: f64) -> Result<VepsBound> {
    invariant_bound_veps_k(lambda, eps, DEFAULT_SOBOLEV_ORDER)
}

pub fn invariant_bound_veps_k(lambda: &SpectralParameter, eps: f64, k: usize) -> Result<VepsBound> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::Domain(format!("epsilon {eps} not in (0, 1/4]")));
    }
    if lambda.series == crate::repmodels::Series::General {
        return Err(Error::Domain("invariant bound needs a unitary parameter".into()));
    }
    let y = dyadic_bound(&HomogeneousFamily::eps_axis(lambda, 1.0, k), eps)?;
    let x = dyadic_bound(&HomogeneousFamily::eps_axis(lambda, -1.0, k), eps)?;
    let v = continued_vector(&q_eps_form(eps)?.form, lambda)?;
    let bulk_vec = v.multiply(|t| {
        let (s, c) = t.sin_cos();
        1.0 - truncation_value(c / s) - truncation_value(s / c)
    });
    let bulk = sobolev_fourier(&bulk_vec, k as f64, lambda)?;
    Ok(VepsBound { value: y.value + x.value + bulk, y_axis: y.value, x_axis: x.value, bulk })
}

/// `(int |u|^2)^{1/2}` with no normalization, which is homogeneous of degree
/// `r = -1/2` and dominated by `S_k`.
pub fn plain_l2(u: &LineVector) -> Result<f64> {
    let g = |x: f64| Complex64::new(u.eval(x).norm_sqr(), 0.0);
    Ok(line_integral(u, &g, QuadOptions::default())?.re.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::power_law_exponent;
    use crate::norms::sobolev_line;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cutoff_shapes() {
        let g = |x: f64| gamma(Jet::var(x, 0)).value().re;
        assert_eq!(g(0.0), 1.0);
        assert_eq!(g(1.0), 1.0);
        assert_eq!(g(-2.0), 0.0);
        assert!(g(1.5) > 0.0 && g(1.5) < 1.0);
        for x in [-1.8, -1.2, 1.1, 1.6] {
            // delta_1 = -x gamma'
            let j = gamma(Jet::var(x, 1));
            let d = delta1(Jet::var(x, 0)).value().re;
            assert!((d + x * j.derivative(1).re).abs() < 1e-13);
        }
        assert_eq!(delta1(Jet::var(0.5, 0)).value().re, 0.0);
        assert_eq!(truncation_value(0.4), 1.0);
        assert_eq!(truncation_value(1.0), 0.0);
    }

    #[test]
    fn dyadic_identity() {
        // gamma_1 - gamma_a = int_a^1 delta_t dt/t, delta_t(x) = delta_1(x/t)
        let a: f64 = 0.1;
        for x in [0.15, 0.3, 0.9, 1.4] {
            let n = 4000;
            let h = -a.ln() / n as f64;
            let integral: f64 = (0..n)
                .map(|j| {
                    let t = (a.ln() + (j as f64 + 0.5) * h).exp();
                    delta1(Jet::var(x / t, 0)).value().re * h
                })
                .sum();
            let lhs = gamma(Jet::var(x, 0)).value().re - gamma(Jet::var(x / a, 0)).value().re;
            assert!((lhs - integral).abs() < 1e-6, "x={x}: {lhs} {integral}");
        }
    }

    #[test]
    fn power_family_homogeneous() {
        let fam = HomogeneousFamily::power(c(-0.5, 0.3), -0.5, 2);
        assert!(fam.homogeneity_defect() < 1e-12);
        let lam = SpectralParameter::principal(1.0);
        assert!(HomogeneousFamily::eps_axis(&lam, 1.0, 2).homogeneity_defect() < 1e-12);
    }

    #[test]
    fn axis_family_reproduces_veps() {
        let lam = SpectralParameter::principal(0.5);
        let eps = 0.05;
        let fam = HomogeneousFamily::eps_axis(&lam, 1.0, 2);
        let u = fam.u(eps);
        let direct = crate::continuation::u_eps(eps, &lam).unwrap();
        for x in [-0.9, -0.3, 0.0, 0.2, 0.45] {
            let want = direct.eval(x) * truncation_value(x);
            assert!((u.eval(x) - want).norm() < 1e-12 * want.norm().max(1e-12));
        }
        // reflected family is the x-axis piece q_eps(-x)^kappa
        let refl = HomogeneousFamily::eps_axis(&lam, -1.0, 2).u(eps);
        for x in [-0.4, 0.3] {
            assert!((refl.eval(x) - direct.eval(-x) * truncation_value(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn seminorm_inf_examples() {
        let bump = |m: f64| {
            LineVector::from_jet(move |x: Jet| (-(x.add_const(c(-m, 0.0)) * x.add_const(c(-m, 0.0))).scale_real(4.0)).exp(), LineGrid::scales(0.5, 4.0))
        };
        let v = bump(-2.0).add(&bump(2.0)).with_support(-4.0, 4.0);
        let weighted = |wl: f64, wr: f64| {
            move |u: &LineVector| -> Result<f64> {
                let g = |x: f64| Complex64::new(u.eval(x).norm_sqr() * if x < 0.0 { wl } else { wr }, 0.0);
                Ok(line_integral(u, &g, QuadOptions::default())?.re.sqrt())
            }
        };
        let n1 = weighted(1.0, 100.0);
        let n2 = weighted(100.0, 1.0);
        let fam: [Seminorm; 2] = [&n1, &n2];
        let single = seminorm_inf(&fam[..1], &v, 1, 0).unwrap();
        assert!((single - n1(&v).unwrap()).abs() < 1e-12);
        let b1 = seminorm_inf(&fam, &v, 1, 0).unwrap();
        assert!(b1 <= n1(&v).unwrap().min(n2(&v).unwrap()) + 1e-12);
        let b2 = seminorm_inf(&fam, &v, 2, 0).unwrap();
        let b3 = seminorm_inf(&fam, &v, 3, 0).unwrap();
        assert!(b2 < 0.5 * b1, "{b2} {b1}");
        assert!(b3 <= b2 && b2 <= b1);
        assert!(seminorm_inf(&[], &v, 1, 0).is_err());
    }

    #[test]
    fn orbit_bound_examples() {
        let lam = SpectralParameter::principal(0.0);
        let s2 = |u: &LineVector| sobolev_line(u, 2);
        let narrow = LineVector::from_jet(
            |x: Jet| {
                // bump supported on [1/8, 1/4]
                let y = x.add_const(c(-0.1875, 0.0)).scale_real(16.0);
                truncation(y)
            },
            LineGrid::scales(0.01, 0.25),
        )
        .with_support(0.125, 0.25);
        let direct = s2(&narrow).unwrap();
        assert!((orbit_upper_bound(&narrow, &s2, &[GroupElement::identity()], &lam).unwrap() - direct).abs() < 1e-9 * direct);
        // dilation by 8 moves the support to [1, 2]
        let out = GroupElement::diag(8f64.sqrt()).inverse();
        let moved = orbit_upper_bound(&narrow, &s2, &[GroupElement::identity(), out], &lam).unwrap();
        assert!(moved < 0.5 * direct, "{moved} {direct}");
    }

    #[test]
    fn dyadic_power_family_scaling() {
        let fam = HomogeneousFamily::power(c(-1.0, 0.0), -0.5, 2);
        let eps: Vec<f64> = (4..=20).step_by(2).map(|j| 2f64.powi(-j)).collect();
        let vals: Vec<f64> = eps.iter().map(|e| dyadic_bound(&fam, *e).unwrap().value).collect();
        let p = power_law_exponent(&eps, &vals);
        assert!((p + 0.5).abs() < 0.05, "exponent {p}");
    }

    #[test]
    fn certificate_dominates_l2() {
        let fam = HomogeneousFamily::power(c(-0.5, 0.0), -0.5, 2);
        for e in [0.1, 0.01, 0.001] {
            let cert = dyadic_bound(&fam, e).unwrap();
            assert!(plain_l2(&fam.u(e)).unwrap() <= cert.value);
            assert!(cert.c_tr.is_finite() && cert.s_f.is_finite());
        }
    }

    #[test]
    fn panel_rule_matches_adaptive() {
        let fam = HomogeneousFamily::power(c(-0.5, 0.2), -0.5, 2);
        let u = fam.u(1e-3);
        for t in [1e-3, 0.02, 0.6, 0.9] {
            let u2 = u.clone();
            let piece = LineVector::from_jet(move |x: Jet| delta1(x) * u2.eval_jet(x.scale_real(t)).unwrap(), LineGrid::scales(0.25, 2.0));
            let iv = [(-2.0, -1.0), (1.0, 2.0)];
            let a = piece_sobolev(&piece, &iv, 2).unwrap();
            let b = sobolev_on(&piece, &iv, 2).unwrap();
            assert!((a - b).abs() <= 1e-8 * b, "t={t}: {a} {b}");
        }
    }

    #[test]
    fn grid_refinement_stable() {
        let fam = HomogeneousFamily::power(c(-0.5, 0.0), -0.5, 2);
        let a = dyadic_bound_fixed(&fam, 1e-3, 4).unwrap().value;
        let b = dyadic_bound_fixed(&fam, 1e-3, 8).unwrap().value;
        assert!(((a - b) / b).abs() < 0.02, "{a} {b}");
    }

    #[test]
    fn veps_bound_log_growth() {
        let lam = SpectralParameter::principal(0.0);
        let a = invariant_bound_veps(&lam, 2f64.powi(-6)).unwrap();
        let b = invariant_bound_veps(&lam, 2f64.powi(-12)).unwrap();
        let ra = a.value / (64f64).ln();
        let rb = b.value / (4096f64).ln();
        assert!(rb / ra < 1.2 && rb / ra > 0.8, "{ra} {rb}");
        assert!((a.y_axis - a.x_axis).abs() < 1e-9 * a.y_axis);
        assert!(invariant_bound_veps(&lam, 0.5).is_err());
        assert!(invariant_bound_veps(&SpectralParameter::general(Complex64::new(0.3, 0.2)), 0.1).is_err());
    }
}
