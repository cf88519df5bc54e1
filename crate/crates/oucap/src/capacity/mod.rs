//! Sobolev `(r,p)`-capacities as discretized convex programs.
//!
//! Two definitions are implemented over the same grid:
//!
//! * the potential form: minimize `|f|_{L^p}^p` over nonnegative nodal `f`
//!   subject to `V_r f >= 1` at every grid node of the target set
//!   ([`cap_potential`]);
//! * the variational form: minimize `|u|_{W^{r,p}}^p` over expansions equal
//!   to 1 at every node of the margin-fattened target set
//!   ([`cap_variational`]).
//!
//! "a.e. on `U`" becomes "at every grid node in `U`": the nodes are the atoms
//! of the discrete measure, and every result carries its grid metadata plus
//! an optional refinement trend so that no single grid value is mistaken for
//! a limit. On top of the two solvers sit the equivalence experiment
//! ([`equivalence_ratio`]), the restricted-cone probe
//! ([`lemma_description_check`]) and the `L^p`-uniqueness verdict
//! ([`uniqueness_verdict`]).

mod potential_cone;
mod variational;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{basis_matrix, build_grid, GaussModelSpace, QuadGrid};
use crate::potential::{sobolev_norm, SobolevParams};
use crate::region::RegionSpec;
use crate::truncation::{smooth_step, SmoothTruncation};

pub use potential_cone::representable_cone_value;

/// Grid provenance attached to every capacity value.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridMeta {
    pub dim: usize,
    pub max_degree: u32,
    pub quad_order: usize,
}

impl GridMeta {
    pub fn of(space: &GaussModelSpace) -> Self {
        GridMeta {
            dim: space.dim(),
            max_degree: space.max_degree(),
            quad_order: space.quad_order(),
        }
    }
}

/// Which capacity definition produced a value.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CapacityDefinition {
    Potential,
    Variational,
}

/// The optimizer of a capacity problem: nodal values for the potential form,
/// expansion coefficients for the variational form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerData {
    Nodal(Vec<f64>),
    Coefficients(Vec<f64>),
}

/// Capacity value with solver diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: f64,
    pub optimizer: OptimizerData,
    /// Maximal constraint violation of the reported optimizer.
    pub residual: f64,
    pub iterations: usize,
    /// Certified duality gap where available.
    pub duality_gap: Option<f64>,
    pub converged: bool,
    pub grid_meta: GridMeta,
    /// `(quad_order, value)` pairs from refinement studies.
    pub refinement_trend: Option<Vec<(usize, f64)>>,
}

/// Solver controls shared by both definitions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// First-order iteration budget.
    pub max_iterations: usize,
    /// Duality-gap target for the exact (`p = 2`) paths.
    pub tolerance: f64,
    /// Relative objective-change stopping rule for general `p`.
    pub rel_change_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 50_000,
            tolerance: 1e-8,
            rel_change_tol: 1e-7,
        }
    }
}

/// Dense kernel of the degree-truncated spectral potential operator on nodal
/// vectors: `M = B diag((1+|alpha|)^{-r/2}) B^T W`. Row sums are exactly 1,
/// so constants are preserved and `f = c 1` with `c >= 1` is always feasible.
pub fn potential_kernel(space: &GaussModelSpace, grid: &QuadGrid, r: f64) -> DMatrix<f64> {
    let b = basis_matrix(space, grid);
    let mut bt_w = b.transpose();
    for j in 0..grid.len() {
        let w = grid.weight(j);
        for a in 0..space.basis_len() {
            bt_w[(a, j)] *= w;
        }
    }
    for (a, alpha) in space.indices().iter().enumerate() {
        let d = (1.0 + alpha.order() as f64).powf(-r / 2.0);
        for j in 0..grid.len() {
            bt_w[(a, j)] *= d;
        }
    }
    &b * bt_w
}

pub(crate) fn masked_rows(mat: &DMatrix<f64>, mask: &[bool]) -> DMatrix<f64> {
    let rows: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect();
    let mut out = DMatrix::zeros(rows.len(), mat.ncols());
    for (dst, &src) in rows.iter().enumerate() {
        out.set_row(dst, &mat.row(src));
    }
    out
}

fn def5_margin(region: &RegionSpec) -> f64 {
    region.neighborhood_margin.unwrap_or(0.0)
}

fn def6_margin(region: &RegionSpec, grid: &QuadGrid) -> f64 {
    region.neighborhood_margin.unwrap_or_else(|| grid.min_axis_gap())
}

/// Potential-form capacity of `region` (constraint `V_r f >= 1` on the
/// region's grid nodes, `f >= 0`, objective `|f|_{L^p}^p`).
pub fn cap_potential(
    region: &RegionSpec,
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    region.validate(space.dim())?;
    let mask = region.node_mask(grid, def5_margin(region));
    cap_potential_masked(&mask, params, space, grid, opts)
}

/// Potential-form capacity of an explicit node set.
pub fn cap_potential_masked(
    mask: &[bool],
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    if mask.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: mask.len(),
        });
    }
    let meta = GridMeta::of(space);
    if !mask.iter().any(|&m| m) {
        return Ok(CapacityResult {
            value: 0.0,
            optimizer: OptimizerData::Nodal(vec![0.0; grid.len()]),
            residual: 0.0,
            iterations: 0,
            duality_gap: Some(0.0),
            converged: true,
            grid_meta: meta,
            refinement_trend: None,
        });
    }
    let kernel = potential_kernel(space, grid, params.r as f64);
    let constraint = masked_rows(&kernel, mask);
    let sol = if (params.p - 2.0).abs() < 1e-12 {
        potential_cone::solve_quadratic(&constraint, grid.weights(), opts)
    } else {
        potential_cone::solve_general_p(&constraint, grid.weights(), params.p, opts)
    }?;
    Ok(CapacityResult {
        value: sol.value,
        optimizer: OptimizerData::Nodal(sol.f),
        residual: sol.residual,
        iterations: sol.iterations,
        duality_gap: Some(sol.gap),
        converged: sol.converged,
        grid_meta: meta,
        refinement_trend: None,
    })
}

/// Variational capacity of `region` (constraint `u = 1` on the fattened
/// region's nodes, objective `|u|_{W^{r,p}}^p` over degree-`K` expansions).
pub fn cap_variational(
    region: &RegionSpec,
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    region.validate(space.dim())?;
    let mask = region.node_mask(grid, def6_margin(region, grid));
    cap_variational_masked(&mask, params, space, grid, opts)
}

/// Variational capacity of an explicit node set.
pub fn cap_variational_masked(
    mask: &[bool],
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    if mask.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: mask.len(),
        });
    }
    let meta = GridMeta::of(space);
    if !mask.iter().any(|&m| m) {
        return Ok(CapacityResult {
            value: 0.0,
            optimizer: OptimizerData::Coefficients(vec![0.0; space.basis_len()]),
            residual: 0.0,
            iterations: 0,
            duality_gap: None,
            converged: true,
            grid_meta: meta,
            refinement_trend: None,
        });
    }
    let sol = if (params.p - 2.0).abs() < 1e-12 {
        variational::solve_quadratic(mask, params, space, grid, opts)
    } else {
        variational::solve_general_p(mask, params, space, grid, opts)
    }?;
    Ok(CapacityResult {
        value: sol.value,
        optimizer: OptimizerData::Coefficients(sol.coeffs),
        residual: sol.residual,
        iterations: sol.iterations,
        duality_gap: None,
        converged: sol.converged,
        grid_meta: meta,
        refinement_trend: None,
    })
}

/// Gap between the nodal-cone capacity and its restriction to potentials of
/// grid-representable functions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescriptionReport {
    pub nodal_value: f64,
    pub representable_value: f64,
    /// `(representable - nodal) / nodal`, 0 when both vanish.
    pub relative_gap: f64,
    /// Worst negativity of the representable optimizer at nodes.
    pub negativity_residual: f64,
}

/// Re-solve the potential capacity with `f` restricted to nonnegative
/// evaluations of degree-`K` expansions and report the relative gap. In the
/// continuum limit the two cones give the same infimum.
pub fn lemma_description_check(
    region: &RegionSpec,
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    opts: &SolverOptions,
) -> Result<DescriptionReport> {
    region.validate(space.dim())?;
    let mask = region.node_mask(grid, def5_margin(region));
    let nodal = cap_potential_masked(&mask, params, space, grid, opts)?;
    if !mask.iter().any(|&m| m) {
        return Ok(DescriptionReport {
            nodal_value: 0.0,
            representable_value: 0.0,
            relative_gap: 0.0,
            negativity_residual: 0.0,
        });
    }
    let warm = match &nodal.optimizer {
        OptimizerData::Nodal(f) => f.clone(),
        OptimizerData::Coefficients(_) => unreachable!("potential capacity yields nodal data"),
    };
    let (rep_value, negativity) =
        representable_cone_value(&mask, params, space, grid, &warm, opts)?;
    let gap = if nodal.value > 0.0 {
        (rep_value - nodal.value) / nodal.value
    } else {
        0.0
    };
    Ok(DescriptionReport {
        nodal_value: nodal.value,
        representable_value: rep_value,
        relative_gap: gap,
        negativity_residual: negativity,
    })
}

/// Output of the capacity-equivalence experiment on one region.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub cap: CapacityResult,
    pub ccap: CapacityResult,
    /// `ccap / cap`; `NaN` when both vanish.
    pub ratio: f64,
    /// Sobolev cost of the explicit feasible witness `T(V_r f)` built from
    /// the potential-capacity optimizer; an upper bound on `ccap`.
    pub witness_cost: f64,
    /// Raised when one capacity is essentially zero while the other is not.
    pub violation_flag: bool,
}

/// Compute both capacities of one region, their ratio, and the truncation
/// witness bound.
pub fn equivalence_ratio(
    region: &RegionSpec,
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    truncation: &SmoothTruncation,
    opts: &SolverOptions,
) -> Result<EquivalenceReport> {
    region.validate(space.dim())?;
    let cap = cap_potential(region, params, space, grid, opts)?;
    let ccap = cap_variational(region, params, space, grid, opts)?;

    let mask6 = region.node_mask(grid, def6_margin(region, grid));
    let witness_cost = if mask6.iter().any(|&m| m) {
        let f = match &cap.optimizer {
            OptimizerData::Nodal(f) => f.clone(),
            OptimizerData::Coefficients(_) => unreachable!(),
        };
        witness_cost(&f, &mask6, params, space, grid, truncation)?
    } else {
        0.0
    };

    let tol = opts.tolerance.max(1e-9);
    let ratio = if cap.value > tol {
        ccap.value / cap.value
    } else if ccap.value > tol {
        f64::INFINITY
    } else {
        f64::NAN
    };
    let violation_flag = (cap.value <= tol && ccap.value > 1e-3)
        || (ccap.value <= tol && cap.value > 1e-3);
    Ok(EquivalenceReport {
        cap,
        ccap,
        ratio,
        witness_cost,
        violation_flag,
    })
}

/// Sobolev cost of the corrected witness `T(sigma V_r f)`, made exactly
/// feasible for the discrete variational problem on `mask`.
fn witness_cost(
    f_nodal: &[f64],
    mask: &[bool],
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    truncation: &SmoothTruncation,
) -> Result<f64> {
    let kernel = potential_kernel(space, grid, params.r as f64);
    let fvec = nalgebra::DVector::from_column_slice(f_nodal);
    let v = &kernel * &fvec;
    // scale so the potential clears 1 on every constrained node
    let min_on_mask = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| v[i])
        .fold(f64::INFINITY, f64::min);
    let sigma = if min_on_mask > 1e-12 {
        1.0 / min_on_mask
    } else {
        1.0
    };
    let composed: Vec<f64> = (0..grid.len())
        .map(|j| truncation.value(sigma * v[j]))
        .collect();
    debug_assert_eq!(truncation.value(1.0), smooth_step(1.0));
    let u = crate::model::expand_nodal(&composed, space, grid);
    // exact-feasibility correction: subtract the least-squares lift of the
    // nodal defect on the constrained set
    let b = basis_matrix(space, grid);
    let b_mask = masked_rows(&b, mask);
    let coeffs = nalgebra::DVector::from_column_slice(u.coeffs());
    let defect = &b_mask * &coeffs
        - nalgebra::DVector::from_element(b_mask.nrows(), 1.0);
    let svd = b_mask.clone().svd(true, true);
    let correction = svd
        .solve(&defect, 1e-10)
        .map_err(|e| Error::InvalidParameter(format!("witness correction failed: {e}")))?;
    let corrected = crate::model::HermiteExpansion::new(
        space.clone(),
        (coeffs - correction).as_slice().to_vec(),
    )?;
    Ok(sobolev_norm(&corrected, params, grid)?.powf(params.p))
}

/// Trend classification of a capacity refinement study.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CapacityTrend {
    DecaysToZero,
    BoundedAway,
    Inconclusive,
}

/// Uniqueness verdict for the closure problem of the `m`-th power of the
/// generator with the set removed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub m: u32,
    pub p: f64,
    /// `(margin, capacity)` per refinement level, margins decreasing.
    pub capacities: Vec<(f64, f64)>,
    pub trend: CapacityTrend,
    /// `|2/p - 1| < 1/m`, the condition for the power to generate a
    /// `C_0`-semigroup.
    pub generation_condition: bool,
    pub verdict: String,
}

/// The generation condition `|2/p - 1| < 1/m`.
pub fn generation_condition(m: u32, p: f64) -> bool {
    (2.0 / p - 1.0).abs() < 1.0 / m as f64
}

/// Decide `L^p`-uniqueness of the power `m` by the capacity trend of the
/// margin-fattened set under shrinking margins.
pub fn uniqueness_verdict(
    sigma: &RegionSpec,
    m: u32,
    p: f64,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    zero_threshold: f64,
    margins: &[f64],
    opts: &SolverOptions,
) -> Result<UniquenessReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("power m must be >= 1".into()));
    }
    if margins.len() < 3 {
        return Err(Error::InvalidParameter(
            "capacity-zero classification needs at least 3 refinement levels".into(),
        ));
    }
    if margins.windows(2).any(|w| w[1] >= w[0]) || margins.iter().any(|&m| m < 0.0) {
        return Err(Error::InvalidParameter(
            "margins must be strictly decreasing and nonnegative".into(),
        ));
    }
    let params = SobolevParams::new(2 * m, p)?;
    let mut capacities = Vec::with_capacity(margins.len());
    for &margin in margins {
        let fattened = sigma.clone().with_margin(margin);
        let result = cap_potential(&fattened, &params, space, grid, opts)?;
        capacities.push((margin, result.value));
    }

    let values: Vec<f64> = capacities.iter().map(|&(_, v)| v).collect();
    let tol = 10.0 * opts.tolerance;
    let monotone = values
        .windows(2)
        .all(|w| w[1] <= w[0] * 1.05 + tol);
    let first = values[0];
    let last = *values.last().expect("at least 3 levels");
    let trend = if !monotone {
        CapacityTrend::Inconclusive
    } else if last < zero_threshold {
        CapacityTrend::DecaysToZero
    } else if last >= 0.5 * first {
        CapacityTrend::BoundedAway
    } else {
        CapacityTrend::Inconclusive
    };

    let condition = generation_condition(m, p);
    let verdict = match trend {
        CapacityTrend::BoundedAway => "not L^p-unique".to_string(),
        CapacityTrend::DecaysToZero if condition => "L^p-unique".to_string(),
        CapacityTrend::DecaysToZero => "generation condition fails".to_string(),
        CapacityTrend::Inconclusive => "inconclusive".to_string(),
    };
    Ok(UniquenessReport {
        m,
        p,
        capacities,
        trend,
        generation_condition: condition,
        verdict,
    })
}

/// Capacity of one region across increasing quadrature orders; the base
/// result carries the trend.
pub fn capacity_with_refinement(
    region: &RegionSpec,
    params: &SobolevParams,
    definition: CapacityDefinition,
    dim: usize,
    max_degree: u32,
    quad_orders: &[usize],
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    if quad_orders.is_empty() {
        return Err(Error::InvalidParameter("need at least one quadrature order".into()));
    }
    let mut trend = Vec::with_capacity(quad_orders.len());
    let mut base: Option<CapacityResult> = None;
    for &q in quad_orders {
        let space = GaussModelSpace::new(dim, max_degree, q)?;
        let grid = build_grid(&space)?;
        let result = match definition {
            CapacityDefinition::Potential => cap_potential(region, params, &space, &grid, opts)?,
            CapacityDefinition::Variational => {
                cap_variational(region, params, &space, &grid, opts)?
            }
        };
        trend.push((q, result.value));
        base = Some(result);
    }
    let mut result = base.expect("at least one order");
    result.refinement_trend = Some(trend);
    Ok(result)
}
