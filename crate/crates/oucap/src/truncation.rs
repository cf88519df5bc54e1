//! Smooth truncation of potentials. `T` is a mollified step: identically 0
//! below 1/2, identically 1 above 1, smooth on the transition band, with the
//! growth bounds `sup_t |t^{i-1} T^{(i)}(t)| <= L` that make compositions
//! `T o V_r f` Sobolev-bounded in terms of `|f|_{L^p}` alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::model::{expand_nodal, GaussModelSpace, HermiteExpansion, QuadGrid};
use crate::potential::{bessel_spectral, dk_hs_norm, sobolev_norm, SobolevParams};
use crate::semigroup::{maximal_function, TimeGrid};

const BAND_LOWER: f64 = 0.5;
const BAND_UPPER: f64 = 1.0;
// below this distance from a band edge all derivatives underflow; clamping to
// the flat value avoids 0 * inf during jet propagation
const EDGE_CLAMP: f64 = 2e-3;

/// `T(t) = s(2t - 1)` with `s(u) = phi(u) / (phi(u) + phi(1 - u))` and
/// `phi(u) = exp(-1/u)` for `u > 0`, else 0. Smooth, monotone nondecreasing,
/// 0 below 1/2 and 1 above 1.
pub fn smooth_step(t: f64) -> f64 {
    let u = 2.0 * t - 1.0;
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

/// Jet of `T` at `t` carrying derivatives up to `len - 1`.
pub fn smooth_step_jet(t: f64, len: usize) -> Jet {
    let u0 = 2.0 * t - 1.0;
    if u0 <= EDGE_CLAMP {
        return Jet::constant(if u0 <= 0.0 { 0.0 } else { smooth_step(t) }, len);
    }
    if u0 >= 1.0 - EDGE_CLAMP {
        return Jet::constant(if u0 >= 1.0 { 1.0 } else { smooth_step(t) }, len);
    }
    // inner function u(t) = 2t - 1 as a jet in t
    let mut taylor = vec![0.0; len];
    taylor[0] = u0;
    if len >= 2 {
        taylor[1] = 2.0;
    }
    let u = Jet::from_taylor(taylor);
    let one_minus_u = Jet::constant(1.0, len).sub(&u);
    let a = u.recip().scale(-1.0).exp();
    let b = one_minus_u.recip().scale(-1.0).exp();
    let result = a.div(&a.add(&b));
    if result.is_finite() {
        result
    } else {
        Jet::constant(smooth_step(t), len)
    }
}

/// The smooth truncation together with its tabulated derivative-growth
/// constants `L_i = sup_t |t^{i-1} T^{(i)}(t)|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothTruncation {
    pub lower: f64,
    pub upper: f64,
    pub derivative_bounds: Vec<f64>,
}

impl SmoothTruncation {
    /// Tabulate bounds up to `i_max` by dense sampling of the band.
    pub fn standard(i_max: usize) -> Result<Self> {
        let bounds = derivative_bounds(i_max, 4001)?;
        Ok(SmoothTruncation {
            lower: BAND_LOWER,
            upper: BAND_UPPER,
            derivative_bounds: bounds,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        smooth_step(t)
    }

    /// The working constant `L = max_i L_i`.
    pub fn growth_constant(&self) -> f64 {
        self.derivative_bounds.iter().cloned().fold(0.0, f64::max)
    }
}

/// Numerically estimated suprema of `|t^{i-1} T^{(i)}(t)|` for `i = 0..=i_max`.
///
/// Outside the band all derivatives vanish, so sampling concentrates there;
/// the `i = 0` entry also accounts for the tail `T(t)/t = 1/t` on `t >= 1`.
pub fn derivative_bounds(i_max: usize, samples: usize) -> Result<Vec<f64>> {
    if i_max < 1 {
        return Err(Error::InvalidParameter("i_max must be >= 1".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 sample points".into()));
    }
    let mut bounds = vec![0.0f64; i_max + 1];
    bounds[0] = 1.0; // sup of 1/t on t >= 1
    for s in 0..samples {
        let t = BAND_LOWER + (BAND_UPPER - BAND_LOWER) * s as f64 / (samples - 1) as f64;
        let jet = smooth_step_jet(t, i_max + 1);
        for i in 0..=i_max {
            let weight = t.powi(i as i32 - 1);
            let value = (weight * jet.derivative(i)).abs();
            if value.is_finite() {
                bounds[i] = bounds[i].max(value);
            }
        }
    }
    Ok(bounds)
}

/// Result of composing the truncation with a potential.
#[derive(Clone, Debug)]
pub struct TruncationOutcome {
    /// Re-expansion of `T o V_r f`.
    pub expansion: HermiteExpansion,
    /// `|T o V_r f|_{W^{r,p}} / |f|_{L^p}`.
    pub ratio: f64,
    /// Nodal discrepancy introduced by the re-expansion, in the grid-weighted
    /// `L^2` norm; the composition is not polynomial, so this aliasing error
    /// accompanies every result.
    pub aliasing_error: f64,
}

/// Compose the truncation with the potential of a nonnegative nodal function
/// and report the Sobolev-to-`L^p` cost ratio.
pub fn truncate_potential(
    f_nodal: &[f64],
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
) -> Result<TruncationOutcome> {
    if f_nodal.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: f_nodal.len(),
        });
    }
    if f_nodal.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter(
            "truncation input must be nonnegative at all nodes".into(),
        ));
    }
    let fnorm = grid.lp_norm(f_nodal, params.p);
    if fnorm == 0.0 {
        return Err(Error::DegenerateInput("truncation input is identically zero".into()));
    }
    let u = expand_nodal(f_nodal, space, grid);
    let v = bessel_spectral(&u, params.r as f64)?;
    let v_nodal = v.nodal_values(grid)?;
    let composed: Vec<f64> = v_nodal.iter().map(|&t| smooth_step(t)).collect();
    let expansion = expand_nodal(&composed, space, grid);
    let aliasing_error = {
        let back = expansion.nodal_values(grid)?;
        back.iter()
            .zip(&composed)
            .zip(grid.weights())
            .map(|((a, b), w)| w * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let ratio = sobolev_norm(&expansion, params, grid)? / fnorm;
    Ok(TruncationOutcome {
        expansion,
        ratio,
        aliasing_error,
    })
}

/// Ratio of the pointwise multiplicative estimate
/// `|D^k V_r f(x)| / [ (V_r f(x))^{1-k/r} (sup_t P_t(f^q)(x))^{k/(rq)} ]`,
/// which the estimate asserts is bounded by a constant depending only on
/// `(k, q, r)`.
#[allow(clippy::too_many_arguments)]
pub fn multiplicative_estimate_check(
    f_nodal: &[f64],
    r: u32,
    k: usize,
    q: f64,
    x: &[f64],
    space: &GaussModelSpace,
    grid: &QuadGrid,
    tgrid: &TimeGrid,
) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must lie in (1, inf), got {q}")));
    }
    if k == 0 || k >= r as usize {
        return Err(Error::InvalidParameter(format!(
            "derivative order must satisfy 1 <= k < r, got k = {k}, r = {r}"
        )));
    }
    if f_nodal.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter("f must be nonnegative at all nodes".into()));
    }
    let u = expand_nodal(f_nodal, space, grid);
    let v = bessel_spectral(&u, r as f64)?;
    let numerator = dk_hs_norm(&v, k, x)?;
    let vfx = v.eval(x)?;
    let sup = maximal_function(
        |y| u.eval(y).unwrap_or(0.0).max(0.0).powf(q),
        x,
        tgrid,
        grid,
    )?;
    let rf = r as f64;
    let kf = k as f64;
    let denominator = vfx.max(0.0).powf(1.0 - kf / rf) * sup.powf(kf / (rf * q));
    if !(denominator > 1e-300) {
        return Err(Error::DegenerateInput(
            "multiplicative estimate denominator vanishes; f is zero a.e.".into(),
        ));
    }
    Ok(numerator / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_grid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn step_values() {
        assert_eq!(smooth_step(0.25), 0.0);
        assert_eq!(smooth_step(0.5), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert_eq!(smooth_step(1.0), 1.0);
        // symmetry s(u) + s(1-u) = 1 puts the midpoint at 1/2
        assert_abs_diff_eq!(smooth_step(0.75), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn step_range_and_monotonicity() {
        let mut prev = -1.0;
        for s in 0..=2000 {
            let t = -0.5 + 2.5 * s as f64 / 2000.0;
            let v = smooth_step(t);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev - 1e-15, "not monotone at t = {t}");
            prev = v;
        }
    }

    #[test]
    fn jet_matches_finite_differences_in_band() {
        for t in [0.6, 0.75, 0.9] {
            let jet = smooth_step_jet(t, 4);
            let h = 1e-5;
            let fd1 = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
            let fd2 = (smooth_step(t + h) - 2.0 * smooth_step(t) + smooth_step(t - h)) / (h * h);
            assert_abs_diff_eq!(jet.derivative(0), smooth_step(t), epsilon = 1e-14);
            assert_abs_diff_eq!(jet.derivative(1), fd1, epsilon = 1e-5);
            assert_abs_diff_eq!(jet.derivative(2), fd2, epsilon = 1e-3 * fd2.abs().max(1.0));
        }
        // flat outside the band
        let jet = smooth_step_jet(0.3, 5);
        for i in 1..5 {
            assert_eq!(jet.derivative(i), 0.0);
        }
    }

    #[test]
    fn derivative_bound_table() {
        let bounds = derivative_bounds(4, 2001).unwrap();
        // |t^{-1} T(t)| <= 1/(1/2) on the support
        assert!(bounds[0] <= 2.0 + 1e-12);
        assert!(bounds[0] >= 1.0);
        for (i, b) in bounds.iter().enumerate() {
            assert!(b.is_finite(), "L_{i} must be finite, got {b}");
        }
        assert!(bounds[1] > 0.0);
        assert!(derivative_bounds(0, 100).is_err());

        let trunc = SmoothTruncation::standard(4).unwrap();
        assert_eq!(trunc.lower, 0.5);
        assert_eq!(trunc.upper, 1.0);
        assert!(trunc.growth_constant() >= trunc.derivative_bounds[1]);
    }

    #[test]
    fn truncation_of_constants() {
        let space = GaussModelSpace::new(1, 8, 12).unwrap();
        let grid = build_grid(&space).unwrap();
        let params = SobolevParams::new(2, 2.0).unwrap();

        // f = 3: V_r f = 3, T = 1, ratio 1/3
        let f = vec![3.0; grid.len()];
        let out = truncate_potential(&f, &params, &space, &grid).unwrap();
        assert_abs_diff_eq!(out.ratio, 1.0 / 3.0, epsilon = 1e-10);
        assert!(out.aliasing_error < 1e-10);

        // f = 0.4 < 1/2: truncated to zero
        let f = vec![0.4; grid.len()];
        let out = truncate_potential(&f, &params, &space, &grid).unwrap();
        assert_abs_diff_eq!(out.ratio, 0.0, epsilon = 1e-12);

        let bad = vec![-1.0; grid.len()];
        assert!(truncate_potential(&bad, &params, &space, &grid).is_err());
        let zero = vec![0.0; grid.len()];
        assert!(truncate_potential(&zero, &params, &space, &grid).is_err());
    }

    #[test]
    fn composition_stability_at_moderate_degree() {
        let space = GaussModelSpace::new(1, 12, 16).unwrap();
        let grid = build_grid(&space).unwrap();
        let params = SobolevParams::new(2, 2.0).unwrap();

        // potential clear of the band: the composition is locally constant
        // and the re-expansion reproduces it to quadrature precision
        let f: Vec<f64> = (0..grid.len())
            .map(|j| 3.0 + 0.3 * grid.node(j)[0])
            .map(|v| v.max(0.0))
            .collect();
        let out = truncate_potential(&f, &params, &space, &grid).unwrap();
        assert!(
            out.aliasing_error < 1e-8,
            "off-band aliasing {} too large",
            out.aliasing_error
        );

        // gentle band crossing: tolerance relaxed to 1e-4 at K = 12; the
        // composed function is not polynomial and carries spectral content
        // beyond the cutoff
        let f: Vec<f64> = (0..grid.len())
            .map(|j| 0.85 + 0.1 * grid.node(j)[0])
            .map(|v| v.max(0.0))
            .collect();
        let out = truncate_potential(&f, &params, &space, &grid).unwrap();
        assert!(
            out.aliasing_error < 1e-4,
            "band-crossing aliasing {} too large at K = 12",
            out.aliasing_error
        );
    }

    #[test]
    fn multiplicative_estimate_basics() {
        let space = GaussModelSpace::new(1, 8, 12).unwrap();
        let grid = build_grid(&space).unwrap();
        let tgrid = TimeGrid::default_maximal();

        // constant f: numerator D^1 V_2 f = 0
        let f = vec![2.0; grid.len()];
        let ratio =
            multiplicative_estimate_check(&f, 2, 1, 2.0, &[0.3], &space, &grid, &tgrid).unwrap();
        assert_abs_diff_eq!(ratio, 0.0, epsilon = 1e-12);

        // f = 1 + h_1^2 (nonnegative); finite ratio, scaling invariant.
        // At the symmetric point the derivative of the potential vanishes;
        // the off-center value is a frozen regression baseline.
        let f: Vec<f64> = (0..grid.len())
            .map(|j| {
                let x = grid.node(j)[0];
                1.0 + x * x
            })
            .collect();
        let base0 =
            multiplicative_estimate_check(&f, 2, 1, 2.0, &[0.0], &space, &grid, &tgrid).unwrap();
        assert!(base0.is_finite());
        assert_abs_diff_eq!(base0, 0.0, epsilon = 1e-12);
        let base =
            multiplicative_estimate_check(&f, 2, 1, 2.0, &[0.5], &space, &grid, &tgrid).unwrap();
        assert_abs_diff_eq!(base, 1.60998529119548789e-1, epsilon = 1e-9);
        let scaled: Vec<f64> = f.iter().map(|v| 7.3 * v).collect();
        let lam = multiplicative_estimate_check(&scaled, 2, 1, 2.0, &[0.5], &space, &grid, &tgrid)
            .unwrap();
        assert_abs_diff_eq!(base, lam, epsilon = 1e-10 * base.max(1.0));

        assert!(
            multiplicative_estimate_check(&f, 2, 2, 2.0, &[0.0], &space, &grid, &tgrid).is_err()
        );
        assert!(
            multiplicative_estimate_check(&f, 2, 1, 0.5, &[0.0], &space, &grid, &tgrid).is_err()
        );
        let zero = vec![0.0; grid.len()];
        assert!(
            multiplicative_estimate_check(&zero, 2, 1, 2.0, &[0.0], &space, &grid, &tgrid).is_err()
        );
    }
}
