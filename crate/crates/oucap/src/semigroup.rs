//! The Ornstein-Uhlenbeck semigroup `P_t` in two forms: Mehler quadrature
//! (pointwise, for arbitrary functions) and spectral diagonalization (on
//! Hermite expansions, where `P_t` multiplies `c_alpha` by `exp(-t|alpha|)`),
//! together with the semigroup maximal function and Cameron-Martin
//! derivatives of `P_t f` for orders 1 and 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HermiteExpansion, QuadGrid};

/// Discretization of the supremum over `t > 0` in the maximal function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeGrid {
    values: Vec<f64>,
    includes_zero_limit: bool,
    includes_infinity_limit: bool,
}

impl TimeGrid {
    pub fn new(
        values: Vec<f64>,
        includes_zero_limit: bool,
        includes_infinity_limit: bool,
    ) -> Result<Self> {
        if values.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
            return Err(Error::InvalidParameter(
                "time grid values must be positive and finite".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "time grid must be strictly increasing".into(),
            ));
        }
        if values.is_empty() && !includes_zero_limit && !includes_infinity_limit {
            return Err(Error::InvalidParameter(
                "empty time grid with both limit flags off".into(),
            ));
        }
        Ok(TimeGrid {
            values,
            includes_zero_limit,
            includes_infinity_limit,
        })
    }

    /// Log-spaced grid on `[lo, hi]` with both limits included.
    pub fn log_spaced(count: usize, lo: f64, hi: f64) -> Result<Self> {
        if count < 2 || lo <= 0.0 || hi <= lo {
            return Err(Error::InvalidParameter(
                "log-spaced grid needs count >= 2 and 0 < lo < hi".into(),
            ));
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        let values = (0..count)
            .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
            .collect();
        TimeGrid::new(values, true, true)
    }

    /// Default grid for suprema: 64 log-spaced points on `[1e-4, 20]`.
    ///
    /// `P_t f(x)` is smooth in `t` and for polynomial `f` its extremes
    /// concentrate at the endpoints, which the limit flags capture exactly.
    pub fn default_maximal() -> Self {
        Self::log_spaced(64, 1e-4, 20.0).expect("static parameters are valid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn includes_zero_limit(&self) -> bool {
        self.includes_zero_limit
    }

    pub fn includes_infinity_limit(&self) -> bool {
        self.includes_infinity_limit
    }
}

/// `P_t f(x) = sum_j w_j f(e^{-t} x + sqrt(1 - e^{-2t}) y_j)`.
///
/// The grid carries the Gaussian measure of the `y`-integral, so the result
/// is exact for polynomial integrands up to the grid's exactness degree.
pub fn mehler_apply<F>(f: F, t: f64, x: &[f64], grid: &QuadGrid) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Mehler quadrature needs t > 0, got {t}"
        )));
    }
    if x.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: x.len(),
        });
    }
    let decay = (-t).exp();
    let diffuse = (1.0 - (-2.0 * t).exp()).sqrt();
    let n = grid.dim();
    let mut shifted = vec![0.0; n];
    let mut acc = 0.0;
    for j in 0..grid.len() {
        let y = grid.node(j);
        for i in 0..n {
            shifted[i] = decay * x[i] + diffuse * y[i];
        }
        acc += grid.weight(j) * f(&shifted);
    }
    Ok(acc)
}

/// Diagonal action of `P_t` on an expansion: `c_alpha -> exp(-t |alpha|) c_alpha`.
///
/// `t = 0` is the identity.
pub fn spectral_apply(u: &HermiteExpansion, t: f64) -> Result<HermiteExpansion> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "semigroup time must be >= 0, got {t}"
        )));
    }
    Ok(u.map_by_order(|order| (-t * order as f64).exp()))
}

/// `sup_t P_t f(x)` over the time grid, optionally including the `t -> 0`
/// limit `f(x)` and the `t -> infinity` limit `int f dmu`.
pub fn maximal_function<F>(f: F, x: &[f64], tgrid: &TimeGrid, grid: &QuadGrid) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if tgrid.values.is_empty() && !tgrid.includes_zero_limit && !tgrid.includes_infinity_limit {
        return Err(Error::InvalidParameter(
            "empty time grid with both limit flags off".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    if tgrid.includes_zero_limit {
        best = best.max(f(x));
    }
    if tgrid.includes_infinity_limit {
        let mean: f64 = (0..grid.len())
            .map(|j| grid.weight(j) * f(grid.node(j)))
            .sum();
        best = best.max(mean);
    }
    for &t in &tgrid.values {
        best = best.max(mehler_apply(&f, t, x, grid)?);
    }
    Ok(best)
}

/// Cameron-Martin derivative of `P_t f` at `x` in the unit direction `h`.
///
/// With `a = e^{-t} / sqrt(1 - e^{-2t})`:
/// order 1 integrates against `a <y, h>`, order 2 (both derivatives in the
/// same direction) against `a^2 (<y, h>^2 - 1)`.
pub fn mehler_derivative<F>(
    f: F,
    t: f64,
    x: &[f64],
    h: &[f64],
    order: u32,
    grid: &QuadGrid,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Cameron-Martin derivative needs t > 0, got {t}"
        )));
    }
    if !(order == 1 || order == 2) {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    if h.len() != grid.dim() || x.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: h.len(),
        });
    }
    let norm: f64 = h.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "direction must be a unit vector, got |h| = {norm}"
        )));
    }
    let decay = (-t).exp();
    let diffuse = (1.0 - (-2.0 * t).exp()).sqrt();
    let a = decay / diffuse;
    let n = grid.dim();
    let mut shifted = vec![0.0; n];
    let mut acc = 0.0;
    for j in 0..grid.len() {
        let y = grid.node(j);
        let mut dot = 0.0;
        for i in 0..n {
            shifted[i] = decay * x[i] + diffuse * y[i];
            dot += y[i] * h[i];
        }
        let kernel = match order {
            1 => a * dot,
            _ => a * a * (dot * dot - 1.0),
        };
        acc += grid.weight(j) * f(&shifted) * kernel;
    }
    Ok(acc)
}
