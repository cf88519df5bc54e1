//! Shared random-function families for sweeps and tests.
//!
//! Coefficients are drawn in graded-lex order with a geometric decay in the
//! total degree, so enlarging the degree cutoff with the same seed reproduces
//! the coefficients of the shared low-degree indices and only appends small
//! high-degree ones. Sweeps that compare envelopes across cutoffs rely on
//! this.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::{GaussModelSpace, HermiteExpansion, QuadGrid};

/// Random expansion with `c_alpha = decay^{|alpha|} xi_alpha`,
/// `xi_alpha ~ N(0, 1)`.
pub fn random_expansion<R: Rng>(space: &GaussModelSpace, decay: f64, rng: &mut R) -> HermiteExpansion {
    let coeffs: Vec<f64> = space
        .indices()
        .iter()
        .map(|alpha| {
            let xi: f64 = rng.sample(StandardNormal);
            decay.powi(alpha.order() as i32) * xi
        })
        .collect();
    HermiteExpansion::new(space.clone(), coeffs).expect("coefficient count matches space")
}

/// Random expansion truncated to total degree `max_order` (coefficients for
/// higher orders are zero but the draw order is unchanged).
pub fn random_expansion_capped<R: Rng>(
    space: &GaussModelSpace,
    decay: f64,
    max_order: u32,
    rng: &mut R,
) -> HermiteExpansion {
    let coeffs: Vec<f64> = space
        .indices()
        .iter()
        .map(|alpha| {
            let xi: f64 = rng.sample(StandardNormal);
            if alpha.order() > max_order {
                0.0
            } else {
                decay.powi(alpha.order() as i32) * xi
            }
        })
        .collect();
    HermiteExpansion::new(space.clone(), coeffs).expect("coefficient count matches space")
}

/// Nonnegative nodal function `scale * g^2 / |g^2|_{L^2}` where `g` is a
/// random expansion of total degree at most `K/2` (so the square is exactly
/// representable at degree `K`).
pub fn random_nonneg_nodal<R: Rng>(
    space: &GaussModelSpace,
    grid: &QuadGrid,
    decay: f64,
    scale: f64,
    rng: &mut R,
) -> Vec<f64> {
    let g = random_expansion_capped(space, decay, space.max_degree() / 2, rng);
    let mut values: Vec<f64> = (0..grid.len())
        .map(|j| {
            let v = g.eval(grid.node(j)).expect("grid matches space");
            v * v
        })
        .collect();
    let norm = grid.lp_norm(&values, 2.0);
    let factor = if norm > 0.0 { scale / norm } else { 0.0 };
    for v in values.iter_mut() {
        *v *= factor;
    }
    values
}

/// Nonnegative nodal function built from a random 1-D profile composed with
/// a random direction: `f(x) = q(<x, u>)^2`, normalized to `|f|_{L^2} =
/// scale`.
///
/// Every ingredient of the truncation-bound ratio is rotation invariant, so
/// this family carries the same distribution of profiles into every ambient
/// dimension; cross-dimension sweeps compare like with like.
pub fn random_cylindrical_nonneg<R: Rng>(
    space: &GaussModelSpace,
    grid: &QuadGrid,
    decay: f64,
    scale: f64,
    rng: &mut R,
) -> Vec<f64> {
    let profile_degree = (space.max_degree() / 2) as usize;
    let coeffs: Vec<f64> = (0..=profile_degree)
        .map(|k| {
            let xi: f64 = rng.sample(StandardNormal);
            decay.powi(k as i32) * xi
        })
        .collect();
    let mut direction: Vec<f64> = (0..space.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let norm: f64 = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    for c in direction.iter_mut() {
        *c /= norm.max(1e-300);
    }

    let mut values: Vec<f64> = (0..grid.len())
        .map(|j| {
            let s: f64 = grid.node(j).iter().zip(&direction).map(|(x, u)| x * u).sum();
            let table = crate::model::hermite_values(profile_degree as u32, s);
            let q: f64 = coeffs.iter().zip(&table).map(|(c, h)| c * h).sum();
            q * q
        })
        .collect();
    let norm = grid.lp_norm(&values, 2.0);
    let factor = if norm > 0.0 { scale / norm } else { 0.0 };
    for v in values.iter_mut() {
        *v *= factor;
    }
    values
}
