//! Bessel potentials `V_r = (I - L)^{-r/2}` in spectral and quadrature form,
//! derivatives along the Cameron-Martin directions, Hilbert-Schmidt norms of
//! derivative tensors, Sobolev norms and the Meyer-equivalence probe.
//!
//! On the Hermite basis `V_r` multiplies `c_alpha` by `(1 + |alpha|)^{-r/2}`:
//! the Gamma integral `int_0^inf t^{r/2-1} e^{-(1+m)t} dt = Gamma(r/2) (1+m)^{-r/2}`
//! turns the time integral of the semigroup into that multiplier, and the
//! quadrature route below serves as the independent check of this fact.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::model::{HermiteExpansion, QuadGrid};
use crate::semigroup::mehler_apply;

/// Sobolev smoothness/integrability pair `(r, p)` with integer `r >= 1` and
/// `1 < p < infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    pub r: u32,
    pub p: f64,
}

impl SobolevParams {
    pub fn new(r: u32, p: f64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("Sobolev order r must be >= 1".into()));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Sobolev exponent p must lie in (1, inf), got {p}"
            )));
        }
        Ok(SobolevParams { r, p })
    }
}

/// Spectral Bessel potential: `c_alpha -> (1 + |alpha|)^{-r/2} c_alpha`.
///
/// A contraction on coefficients that maps expansions to expansions of the
/// same degree.
pub fn bessel_spectral(u: &HermiteExpansion, r: f64) -> Result<HermiteExpansion> {
    if r <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "potential order must be positive, got {r}"
        )));
    }
    Ok(u.map_by_order(|m| (1.0 + m as f64).powf(-r / 2.0)))
}

/// Inverse of the spectral potential, `c_alpha -> (1 + |alpha|)^{+r/2} c_alpha`.
pub fn bessel_spectral_inverse(u: &HermiteExpansion, r: f64) -> HermiteExpansion {
    u.map_by_order(|m| (1.0 + m as f64).powf(r / 2.0))
}

const MAX_LAGUERRE_ORDER: usize = 200;

/// Generalized Gauss-Laguerre rule for the weight `t^exponent e^{-t}` on
/// `(0, inf)`; requires `exponent > -1`.
pub fn gauss_laguerre_rule(order: usize, exponent: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::InvalidParameter("Laguerre order must be >= 1".into()));
    }
    if order > MAX_LAGUERRE_ORDER {
        return Err(Error::UnstableQuadrature {
            order,
            detail: format!("orders above {MAX_LAGUERRE_ORDER} are not supported"),
        });
    }
    if exponent <= -1.0 {
        return Err(Error::InvalidParameter(format!(
            "Laguerre exponent must exceed -1, got {exponent}"
        )));
    }
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for i in 0..order {
        jacobi[(i, i)] = 2.0 * i as f64 + exponent + 1.0;
        if i > 0 {
            let b = (i as f64 * (i as f64 + exponent)).sqrt();
            jacobi[(i - 1, i)] = b;
            jacobi[(i, i - 1)] = b;
        }
    }
    let eigen = nalgebra::SymmetricEigen::new(jacobi);
    let mu0 = gamma(exponent + 1.0);
    let mut rule: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let v0 = eigen.eigenvectors[(0, i)];
            (eigen.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if rule.iter().any(|&(t, w)| t <= 0.0 || w <= 0.0) {
        return Err(Error::UnstableQuadrature {
            order,
            detail: "nonpositive node or weight".into(),
        });
    }
    Ok((
        rule.iter().map(|r| r.0).collect(),
        rule.iter().map(|r| r.1).collect(),
    ))
}

/// Bessel potential by time quadrature:
/// `V_r f(x) ~ Gamma(r/2)^{-1} sum_m omega_m P_{t_m} f(x)` with a generalized
/// Gauss-Laguerre rule of exponent `r/2 - 1`.
pub fn bessel_quadrature<F>(
    f: F,
    r: f64,
    x: &[f64],
    grid: &QuadGrid,
    laguerre_order: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if r <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "potential order must be positive, got {r}"
        )));
    }
    let (times, omegas) = gauss_laguerre_rule(laguerre_order, r / 2.0 - 1.0)?;
    let norm = gamma(r / 2.0);
    let mut acc = 0.0;
    for (t, w) in times.iter().zip(&omegas) {
        acc += w * mehler_apply(&f, *t, x, grid)?;
    }
    Ok(acc / norm)
}

/// Directional derivative along coordinate axis `axis`:
/// `(d_i u)_beta = sqrt(beta_i + 1) c_{beta + e_i}`. Lowers total degree by one.
pub fn h_derivative(u: &HermiteExpansion, axis: usize) -> Result<HermiteExpansion> {
    let space = u.space();
    if axis >= space.dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for dimension {}",
            space.dim()
        )));
    }
    let mut coeffs = vec![0.0; space.basis_len()];
    for (pos, beta) in space.indices().iter().enumerate() {
        let raised = beta.raised(axis);
        if let Some(src) = space.index_of(&raised) {
            coeffs[pos] = ((beta.degrees()[axis] + 1) as f64).sqrt() * u.coeffs()[src];
        }
    }
    HermiteExpansion::new(space.clone(), coeffs)
}

/// Fully symmetric sample of the order-`k` derivative tensor at a point.
#[derive(Clone, Debug)]
pub struct DerivativeTensorSample {
    order: usize,
    dim: usize,
    base_point: Vec<f64>,
    entries: Vec<f64>,
}

impl DerivativeTensorSample {
    /// `entries` is the flat row-major array over axis tuples `(i_1, ..., i_k)`.
    pub fn new(order: usize, dim: usize, base_point: Vec<f64>, entries: Vec<f64>) -> Result<Self> {
        let expected = dim.pow(order as u32);
        if entries.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: entries.len(),
            });
        }
        let sample = DerivativeTensorSample {
            order,
            dim,
            base_point,
            entries,
        };
        if !sample.is_symmetric(1e-10) {
            return Err(Error::InvalidParameter(
                "derivative tensor must be symmetric under index permutation".into(),
            ));
        }
        Ok(sample)
    }

    /// Assemble `D^k u(x)` by repeated directional differentiation.
    pub fn from_expansion(u: &HermiteExpansion, order: usize, x: &[f64]) -> Result<Self> {
        let dim = u.space().dim();
        let count = dim.pow(order as u32);
        let mut entries = vec![0.0; count];
        let mut tuple = vec![0usize; order];
        for (flat, entry) in entries.iter_mut().enumerate() {
            let mut rest = flat;
            for slot in (0..order).rev() {
                tuple[slot] = rest % dim;
                rest /= dim;
            }
            let mut d = u.clone();
            for &axis in &tuple {
                d = h_derivative(&d, axis)?;
            }
            *entry = d.eval(x)?;
        }
        DerivativeTensorSample::new(order, dim, x.to_vec(), entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entry(&self, tuple: &[usize]) -> f64 {
        assert_eq!(tuple.len(), self.order);
        let mut flat = 0;
        for &i in tuple {
            debug_assert!(i < self.dim);
            flat = flat * self.dim + i;
        }
        self.entries[flat]
    }

    /// Apply the tensor to `k` direction vectors.
    pub fn apply(&self, directions: &[&[f64]]) -> f64 {
        assert_eq!(directions.len(), self.order);
        let mut acc = 0.0;
        let mut tuple = vec![0usize; self.order];
        for flat in 0..self.entries.len() {
            let mut rest = flat;
            let mut weight = 1.0;
            for slot in (0..self.order).rev() {
                tuple[slot] = rest % self.dim;
                rest /= self.dim;
            }
            for (slot, &axis) in tuple.iter().enumerate() {
                weight *= directions[slot][axis];
            }
            acc += self.entries[flat] * weight;
        }
        acc
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    fn is_symmetric(&self, tol: f64) -> bool {
        if self.order < 2 {
            return true;
        }
        let scale = self.entries.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
        let mut tuple = vec![0usize; self.order];
        for flat in 0..self.entries.len() {
            let mut rest = flat;
            for slot in (0..self.order).rev() {
                tuple[slot] = rest % self.dim;
                rest /= self.dim;
            }
            let mut sorted = tuple.clone();
            sorted.sort_unstable();
            let canonical = self.entry(&sorted);
            if (self.entries[flat] - canonical).abs() > tol * scale {
                return false;
            }
        }
        true
    }
}

fn multisets(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(
        out: &mut Vec<Vec<usize>>,
        current: &mut Vec<usize>,
        start: usize,
        dim: usize,
        left: usize,
    ) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        for axis in start..dim {
            current.push(axis);
            rec(out, current, axis, dim, left - 1);
            current.pop();
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(order);
    rec(&mut out, &mut current, 0, dim, order);
    out
}

fn multiset_multiplicity(tuple: &[usize], dim: usize) -> f64 {
    let mut counts = vec![0u32; dim];
    for &axis in tuple {
        counts[axis] += 1;
    }
    // multinomial k! / prod(counts!)
    let mut mult = 1.0;
    let mut slot = 0u32;
    for &c in &counts {
        for j in 1..=c {
            slot += 1;
            mult *= slot as f64 / j as f64;
        }
    }
    mult
}

/// Derivative expansions of `u` for all axis multisets of size `order`,
/// with their permutation multiplicities.
pub(crate) fn derivative_family(
    u: &HermiteExpansion,
    order: usize,
) -> Result<Vec<(f64, HermiteExpansion)>> {
    let dim = u.space().dim();
    multisets(dim, order)
        .into_iter()
        .map(|tuple| {
            let mut d = u.clone();
            for &axis in &tuple {
                d = h_derivative(&d, axis)?;
            }
            Ok((multiset_multiplicity(&tuple, dim), d))
        })
        .collect()
}

/// Pointwise Hilbert-Schmidt norm of `D^k u(x)`; `k = 0` returns `|u(x)|`.
pub fn dk_hs_norm(u: &HermiteExpansion, order: usize, x: &[f64]) -> Result<f64> {
    if order == 0 {
        return Ok(u.eval(x)?.abs());
    }
    let mut acc = 0.0;
    for (mult, d) in derivative_family(u, order)? {
        let v = d.eval(x)?;
        acc += mult * v * v;
    }
    Ok(acc.sqrt())
}

/// Sobolev norm `sum_{k=0}^{r} ( sum_j w_j |D^k u(x_j)|_{HS}^p )^{1/p}`.
pub fn sobolev_norm(u: &HermiteExpansion, params: &SobolevParams, grid: &QuadGrid) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..=params.r as usize {
        let family = derivative_family(u, k)?;
        let nodal: Vec<Vec<f64>> = family
            .iter()
            .map(|(_, d)| d.nodal_values(grid))
            .collect::<Result<_>>()?;
        let mut lp = 0.0;
        for j in 0..grid.len() {
            let mut sq = 0.0;
            for ((mult, _), values) in family.iter().zip(&nodal) {
                sq += mult * values[j] * values[j];
            }
            lp += grid.weight(j) * sq.sqrt().powf(params.p);
        }
        total += lp.powf(1.0 / params.p);
    }
    Ok(total)
}

/// `p = 2` derivative seminorm squares from the coefficient identity
/// `sum_{i_1..i_k} |d^k u|_{L^2}^2 = sum_alpha |alpha|(|alpha|-1)...(|alpha|-k+1) c_alpha^2`.
pub fn l2_derivative_sq(u: &HermiteExpansion, k: usize) -> f64 {
    u.space()
        .indices()
        .iter()
        .zip(u.coeffs())
        .map(|(alpha, c)| {
            let m = alpha.order() as f64;
            let mut fall = 1.0;
            for j in 0..k {
                fall *= m - j as f64;
            }
            if fall <= 0.0 {
                0.0
            } else {
                fall * c * c
            }
        })
        .sum()
}

/// Coefficient form of the norm `|(I-L)^{s/2} u|_{L^2}^2`.
pub fn spectral_norm_sq(u: &HermiteExpansion, s: f64) -> f64 {
    u.space()
        .indices()
        .iter()
        .zip(u.coeffs())
        .map(|(alpha, c)| (1.0 + alpha.order() as f64).powf(s) * c * c)
        .sum()
}

/// `|(I-L)^{r/2} u|_{L^p} / |u|_{W^{r,p}}`, the Meyer-equivalence probe.
pub fn meyer_ratio(u: &HermiteExpansion, params: &SobolevParams, grid: &QuadGrid) -> Result<f64> {
    if u.coeff_norm() == 0.0 {
        return Err(Error::DegenerateInput("Meyer ratio of the zero function".into()));
    }
    let sharp = bessel_spectral_inverse(u, params.r as f64);
    let numerator = grid.lp_norm(&sharp.nodal_values(grid)?, params.p);
    let denominator = sobolev_norm(u, params, grid)?;
    Ok(numerator / denominator)
}

/// Outcome of the Hilbert-Schmidt norm bound probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HsBoundReport {
    pub hs_norm: f64,
    pub sup_estimate: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Estimate `sup |A(h_1, ..., h_k)|` over orthonormal tuples (repetition
/// allowed) by random frames plus local refinement, and test the bound
/// `|A|_{HS} <= 2 k^k sup`.
pub fn hs_bound_check(
    sample: &DerivativeTensorSample,
    trials: usize,
    seed: u64,
) -> Result<HsBoundReport> {
    use rand::{Rng, SeedableRng};

    let k = sample.order();
    if !(k == 1 || k == 2) {
        return Err(Error::InvalidParameter(format!(
            "orthonormal-frame search supports orders 1 and 2, got {k}"
        )));
    }
    let n = sample.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let random_frame = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
        // orthonormalize k Gaussian vectors
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(k);
        while frame.len() < k {
            let mut v: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            for prev in &frame {
                let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (vi, pi) in v.iter_mut().zip(prev) {
                    *vi -= dot * pi;
                }
            }
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                frame.push(v);
            }
        }
        frame
    };

    let eval_frame = |frame: &[Vec<f64>]| -> f64 {
        // try every multiplicity pattern of the frame members
        let mut best = 0.0f64;
        if k == 1 {
            best = sample.apply(&[&frame[0]]).abs();
        } else {
            for a in 0..k {
                for b in 0..k {
                    best = best.max(sample.apply(&[&frame[a], &frame[b]]).abs());
                }
            }
        }
        best
    };

    let mut best_frame = random_frame(&mut rng);
    let mut sup = eval_frame(&best_frame);
    for _ in 1..trials.max(1) {
        let frame = random_frame(&mut rng);
        let value = eval_frame(&frame);
        if value > sup {
            sup = value;
            best_frame = frame;
        }
    }

    // local refinement: random perturbations with a shrinking step
    let mut step = 0.3;
    for _ in 0..50 {
        let mut candidate = best_frame.clone();
        for v in candidate.iter_mut() {
            for vi in v.iter_mut() {
                *vi += step * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
        }
        for i in 0..k {
            for j in 0..i {
                let (left, right) = candidate.split_at_mut(i);
                let dot: f64 = right[0].iter().zip(&left[j]).map(|(a, b)| a * b).sum();
                for (vi, pi) in right[0].iter_mut().zip(&left[j]) {
                    *vi -= dot * pi;
                }
            }
            let norm: f64 = candidate[i].iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            for vi in candidate[i].iter_mut() {
                *vi /= norm;
            }
        }
        let value = eval_frame(&candidate);
        if value > sup {
            sup = value;
            best_frame = candidate;
        } else {
            step *= 0.9;
        }
    }

    let hs = sample.hs_norm();
    let bound = 2.0 * (k as f64).powi(k as i32) * sup;
    Ok(HsBoundReport {
        hs_norm: hs,
        sup_estimate: sup,
        bound,
        holds: hs <= bound * (1.0 + 1e-12) + 1e-300,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_grid, expand, GaussModelSpace, MultiIndex};
    use crate::semigroup::{maximal_function, TimeGrid};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn space_1d() -> (GaussModelSpace, QuadGrid) {
        let space = GaussModelSpace::new(1, 8, 12).unwrap();
        let grid = build_grid(&space).unwrap();
        (space, grid)
    }

    #[test]
    fn laguerre_rule_integrates_gamma_weight() {
        for r in [1.0, 2.0, 3.0, 4.0] {
            let exponent = r / 2.0 - 1.0;
            let (nodes, weights) = gauss_laguerre_rule(40, exponent).unwrap();
            assert!(nodes.windows(2).all(|w| w[0] < w[1]));
            let total: f64 = weights.iter().sum();
            assert_abs_diff_eq!(total, gamma(r / 2.0), epsilon = 1e-12 * gamma(r / 2.0));
            // first moment: int t^a e^{-t} t dt = Gamma(a+2)
            let m1: f64 = nodes.iter().zip(&weights).map(|(t, w)| t * w).sum();
            assert_abs_diff_eq!(m1, gamma(exponent + 2.0), epsilon = 1e-10);
        }
        assert!(gauss_laguerre_rule(0, 0.0).is_err());
        assert!(gauss_laguerre_rule(10, -1.5).is_err());
    }

    #[test]
    fn potential_of_constant_is_one() {
        let (_, grid) = space_1d();
        for r in [1.0, 2.0, 3.5] {
            let v = bessel_quadrature(|_| 1.0, r, &[0.7], &grid, 24).unwrap();
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectral_multipliers_match_quadrature() {
        let (space, grid) = space_1d();
        // h_1, r = 2: multiplier (1+1)^{-1}
        let h1 = HermiteExpansion::basis_element(&space, &MultiIndex::new(vec![1])).unwrap();
        let s = bessel_spectral(&h1, 2.0).unwrap();
        assert_abs_diff_eq!(s.coeff(&MultiIndex::new(vec![1])), 0.5, epsilon = 1e-15);
        let q = bessel_quadrature(|x| x[0], 2.0, &[1.0], &grid, 40).unwrap();
        assert_abs_diff_eq!(q, 0.5, epsilon = 1e-8);

        // h_2, r = 4: multiplier (1+2)^{-2} = 1/9
        let h2 = HermiteExpansion::basis_element(&space, &MultiIndex::new(vec![2])).unwrap();
        let s = bessel_spectral(&h2, 4.0).unwrap();
        assert_abs_diff_eq!(s.coeff(&MultiIndex::new(vec![2])), 1.0 / 9.0, epsilon = 1e-15);

        // h_2, r = 1: multiplier 3^{-1/2}, checked pointwise
        let h2fn = |x: &[f64]| (x[0] * x[0] - 1.0) / 2f64.sqrt();
        for x in [-1.3, 0.2, 2.4] {
            let q = bessel_quadrature(h2fn, 1.0, &[x], &grid, 40).unwrap();
            assert_abs_diff_eq!(q, h2fn(&[x]) / 3f64.sqrt(), epsilon = 1e-8);
        }

        assert!(bessel_spectral(&h1, 0.0).is_err());
        assert!(bessel_quadrature(|_| 1.0, -1.0, &[0.0], &grid, 24).is_err());
    }

    #[test]
    fn potential_semigroup_and_isometry() {
        let (space, grid) = space_1d();
        let u = expand(|x| 1.0 + x[0].powi(3) - 0.4 * x[0], &space, &grid);
        let a = bessel_spectral(&bessel_spectral(&u, 1.5).unwrap(), 2.5).unwrap();
        let b = bessel_spectral(&u, 4.0).unwrap();
        for (ca, cb) in a.coeffs().iter().zip(b.coeffs()) {
            assert_abs_diff_eq!(ca, cb, epsilon = 1e-14 * cb.abs().max(1.0));
        }
        // V_r is an isometry from the spectral s-norm to the (s+r)-norm
        let v = bessel_spectral(&u, 2.0).unwrap();
        assert_abs_diff_eq!(
            spectral_norm_sq(&v, 3.0 + 2.0),
            spectral_norm_sq(&u, 3.0),
            epsilon = 1e-12 * spectral_norm_sq(&u, 3.0)
        );
    }

    #[test]
    fn contraction_in_lp() {
        let (space, grid) = space_1d();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..space.basis_len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let u = HermiteExpansion::new(space.clone(), coeffs).unwrap();
            let v = bessel_spectral(&u, 1.7).unwrap();
            for p in [1.5, 2.0, 3.0] {
                let nu = grid.lp_norm(&u.nodal_values(&grid).unwrap(), p);
                let nv = grid.lp_norm(&v.nodal_values(&grid).unwrap(), p);
                assert!(nv <= nu * (1.0 + 1e-10), "contraction failed: {nv} > {nu}");
            }
        }
    }

    #[test]
    fn quadrature_potential_preserves_positivity() {
        let (_, grid) = space_1d();
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 0.1;
        for x in [-2.0, 0.0, 1.5] {
            let v = bessel_quadrature(f, 2.0, &[x], &grid, 30).unwrap();
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn h_derivative_relations() {
        let (space, _) = space_1d();
        let one = HermiteExpansion::constant(&space, 1.0);
        assert_eq!(h_derivative(&one, 0).unwrap().coeff_norm(), 0.0);

        let h1 = HermiteExpansion::basis_element(&space, &MultiIndex::new(vec![1])).unwrap();
        let d = h_derivative(&h1, 0).unwrap();
        assert_abs_diff_eq!(d.coeff(&MultiIndex::new(vec![0])), 1.0, epsilon = 1e-15);

        // d/dx h_2 = sqrt(2) h_1, cross-checked with finite differences
        let h2 = HermiteExpansion::basis_element(&space, &MultiIndex::new(vec![2])).unwrap();
        let d = h_derivative(&h2, 0).unwrap();
        assert_abs_diff_eq!(d.coeff(&MultiIndex::new(vec![1])), 2f64.sqrt(), epsilon = 1e-15);
        let x = 0.8;
        let h = 1e-5;
        let fd = (h2.eval(&[x + h]).unwrap() - h2.eval(&[x - h]).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(d.eval(&[x]).unwrap(), fd, epsilon = 1e-9);

        assert!(h_derivative(&h1, 1).is_err());
    }

    #[test]
    fn hs_norms_of_simple_tensors() {
        let (space, _) = space_1d();
        let one = HermiteExpansion::constant(&space, 1.0);
        assert_abs_diff_eq!(dk_hs_norm(&one, 1, &[0.3]).unwrap(), 0.0, epsilon = 1e-15);

        let h1 = HermiteExpansion::basis_element(&space, &MultiIndex::new(vec![1])).unwrap();
        assert_abs_diff_eq!(dk_hs_norm(&h1, 1, &[2.2]).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dk_hs_norm(&h1, 0, &[-1.5]).unwrap(), 1.5, epsilon = 1e-13);

        // u = x1 x2: Hessian has two unit off-diagonal entries
        let space2 = GaussModelSpace::new(2, 4, 6).unwrap();
        let grid2 = build_grid(&space2).unwrap();
        let u = expand(|x| x[0] * x[1], &space2, &grid2);
        assert_abs_diff_eq!(
            dk_hs_norm(&u, 2, &[0.4, -0.9]).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn derivative_tensor_symmetry() {
        let space = GaussModelSpace::new(3, 4, 6).unwrap();
        let grid = build_grid(&space).unwrap();
        let u = expand(
            |x| x[0] * x[1] * x[2] + 0.5 * x[0].powi(2) * x[2] - x[1],
            &space,
            &grid,
        );
        let sample = DerivativeTensorSample::from_expansion(&u, 2, &[0.3, -0.2, 1.1]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(
                    sample.entry(&[i, j]),
                    sample.entry(&[j, i]),
                    epsilon = 1e-12
                );
            }
        }
        // asymmetric input is rejected
        let bad = DerivativeTensorSample::new(2, 2, vec![0.0, 0.0], vec![0.0, 1.0, -1.0, 0.0]);
        assert!(bad.is_err());
    }

    #[test]
    fn sobolev_norm_examples() {
        let (space, grid) = space_1d();
        let params = SobolevParams::new(1, 2.0).unwrap();
        let c = HermiteExpansion::constant(&space, -2.5);
        assert_abs_diff_eq!(sobolev_norm(&c, &params, &grid).unwrap(), 2.5, epsilon = 1e-12);

        let h1 = HermiteExpansion::basis_element(&space, &MultiIndex::new(vec![1])).unwrap();
        assert_abs_diff_eq!(sobolev_norm(&h1, &params, &grid).unwrap(), 2.0, epsilon = 1e-10);
        let params2 = SobolevParams::new(2, 2.0).unwrap();
        assert_abs_diff_eq!(sobolev_norm(&h1, &params2, &grid).unwrap(), 2.0, epsilon = 1e-10);

        // the nodal route agrees with the coefficient identity for p = 2
        let u = expand(|x| 0.3 + x[0].powi(4) - x[0], &space, &grid);
        for k in 0..=2usize {
            let family = derivative_family(&u, k).unwrap();
            let nodal: f64 = (0..grid.len())
                .map(|j| {
                    let sq: f64 = family
                        .iter()
                        .map(|(mult, d)| {
                            let v = d.eval(grid.node(j)).unwrap();
                            mult * v * v
                        })
                        .sum();
                    grid.weight(j) * sq
                })
                .sum();
            assert_abs_diff_eq!(nodal, l2_derivative_sq(&u, k), epsilon = 1e-9);
        }
    }

    #[test]
    fn meyer_ratio_examples() {
        let (space, grid) = space_1d();
        let params = SobolevParams::new(1, 2.0).unwrap();
        let one = HermiteExpansion::constant(&space, 1.0);
        assert_abs_diff_eq!(meyer_ratio(&one, &params, &grid).unwrap(), 1.0, epsilon = 1e-12);

        let h1 = HermiteExpansion::basis_element(&space, &MultiIndex::new(vec![1])).unwrap();
        assert_abs_diff_eq!(
            meyer_ratio(&h1, &params, &grid).unwrap(),
            2f64.sqrt() / 2.0,
            epsilon = 1e-10
        );

        let zero = HermiteExpansion::zero(&space);
        assert!(meyer_ratio(&zero, &params, &grid).is_err());
    }

    #[test]
    fn hs_bound_probe() {
        // k = 1: a plain vector; sup over unit h is the Euclidean norm
        let v = DerivativeTensorSample::new(1, 3, vec![0.0; 3], vec![0.6, 0.0, 0.8]).unwrap();
        let report = hs_bound_check(&v, 500, 42).unwrap();
        assert_abs_diff_eq!(report.hs_norm, 1.0, epsilon = 1e-12);
        assert!(report.sup_estimate > 0.99 && report.sup_estimate <= 1.0 + 1e-9);
        assert_abs_diff_eq!(report.bound, 2.0 * report.sup_estimate, epsilon = 1e-12);
        assert!(report.holds);

        // k = 2: identity on R^2
        let id = DerivativeTensorSample::new(2, 2, vec![0.0; 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let report = hs_bound_check(&id, 500, 43).unwrap();
        assert_abs_diff_eq!(report.hs_norm, 2f64.sqrt(), epsilon = 1e-12);
        assert!((report.sup_estimate - 1.0).abs() < 1e-6);
        assert!(report.holds);

        // k = 2: rank one e1 (x) e1
        let rank1 =
            DerivativeTensorSample::new(2, 2, vec![0.0; 2], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let report = hs_bound_check(&rank1, 500, 44).unwrap();
        assert_abs_diff_eq!(report.hs_norm, 1.0, epsilon = 1e-12);
        assert!((report.sup_estimate - 1.0).abs() < 1e-6);
        assert!(report.holds);

        // unsupported order
        let cube = DerivativeTensorSample::from_expansion(
            &HermiteExpansion::constant(&GaussModelSpace::new(2, 3, 4).unwrap(), 1.0),
            3,
            &[0.0, 0.0],
        )
        .unwrap();
        assert!(hs_bound_check(&cube, 10, 0).is_err());
    }

    #[test]
    fn jensen_chain_for_potentials() {
        // (V_r f(x))^q <= sup_t P_t(f^q)(x) for nonnegative f
        let (_, grid) = space_1d();
        let tgrid = TimeGrid::default_maximal();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a: f64 = rng.random_range(0.1..1.5);
            let b: f64 = rng.random_range(-1.0..1.0);
            let f = move |x: &[f64]| a * (x[0] - b).powi(2) + 0.05;
            let x = [rng.random_range(-2.0..2.0)];
            for (r, q) in [(2.0, 2.0), (1.0, 3.0)] {
                let v = bessel_quadrature(f, r, &x, &grid, 30).unwrap();
                let m = maximal_function(|y| f(y).powf(q), &x, &tgrid, &grid).unwrap();
                assert!(
                    v.powf(q) <= m * (1.0 + 1e-10),
                    "Jensen chain violated: {} > {m}",
                    v.powf(q)
                );
            }
        }
    }
}
