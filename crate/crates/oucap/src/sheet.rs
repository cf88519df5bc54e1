//! Multiparameter Ornstein-Uhlenbeck sheets: exact sampling on parameter
//! grids, hitting-probability Monte Carlo and the Kakutani-correspondence
//! experiment against `(r, 2)`-capacities.
//!
//! The sheet is the centered Gaussian field with tensor-product exponential
//! covariance `Cov(Z_s, Z_t) = prod_i exp(-|s_i - t_i|) I_n`. Sampling draws
//! iid standard Gaussians on the grid and applies the stationary AR(1)
//! recursion `X_{j+1} = e^{-dt} X_j + sqrt(1 - e^{-2dt}) xi` along each
//! parameter axis; the axis maps act on disjoint tensor legs, so they
//! commute exactly and any application order yields the same array.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_with_refinement, CapacityDefinition, SolverOptions};
use crate::error::{Error, Result};
use crate::potential::SobolevParams;
use crate::region::RegionSpec;

/// Parameter grid of an `r`-parameter sheet with values in `R^n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SheetGrid {
    axes: Vec<Vec<f64>>,
    state_dim: usize,
}

impl SheetGrid {
    pub fn new(axes: Vec<Vec<f64>>, state_dim: usize) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter("need at least one parameter axis".into()));
        }
        if state_dim == 0 {
            return Err(Error::InvalidParameter("state dimension must be >= 1".into()));
        }
        for axis in &axes {
            if axis.is_empty() {
                return Err(Error::InvalidParameter("parameter axes must be nonempty".into()));
            }
            if axis.iter().any(|&t| t < 0.0 || !t.is_finite()) {
                return Err(Error::InvalidParameter(
                    "parameter values must be nonnegative and finite".into(),
                ));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(
                    "parameter axes must be strictly increasing".into(),
                ));
            }
        }
        Ok(SheetGrid { axes, state_dim })
    }

    /// Uniform grid on `[0, horizon]^r` with the given spacing.
    pub fn uniform(param_count: usize, horizon: f64, spacing: f64, state_dim: usize) -> Result<Self> {
        if !(horizon > 0.0 && spacing > 0.0 && spacing <= horizon) {
            return Err(Error::InvalidParameter(
                "need 0 < spacing <= horizon".into(),
            ));
        }
        let steps = (horizon / spacing).round() as usize;
        let axis: Vec<f64> = (0..=steps).map(|i| i as f64 * spacing).collect();
        SheetGrid::new(vec![axis; param_count], state_dim)
    }

    pub fn param_count(&self) -> usize {
        self.axes.len()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|a| a.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// Parameter coordinates of the flat grid index.
    pub fn params_of(&self, mut flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (axis, values) in self.axes.iter().enumerate().rev() {
            out[axis] = values[flat % values.len()];
            flat /= values.len();
        }
        out
    }
}

/// One realization of the sheet over a grid.
#[derive(Clone, Debug)]
pub struct SheetSample {
    values: Vec<f64>,
    shape: Vec<usize>,
    state_dim: usize,
    pub seed: u64,
    pub stream: u64,
}

impl SheetSample {
    pub fn point(&self, flat: usize) -> &[f64] {
        &self.values[flat * self.state_dim..(flat + 1) * self.state_dim]
    }

    pub fn point_count(&self) -> usize {
        self.values.len() / self.state_dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
}

fn ar_pass(values: &mut [f64], shape: &[usize], state_dim: usize, axis: usize, times: &[f64]) {
    let len = shape[axis];
    if len < 2 {
        return;
    }
    let inner: usize = shape[axis + 1..].iter().product::<usize>() * state_dim;
    let outer: usize = shape[..axis].iter().product();
    let stride = len * inner;
    for block in 0..outer {
        let base = block * stride;
        for j in 1..len {
            let dt = times[j] - times[j - 1];
            let decay = (-dt).exp();
            let diffuse = (1.0 - (-2.0 * dt).exp()).sqrt();
            let (prev, cur) = values[base + (j - 1) * inner..base + (j + 1) * inner]
                .split_at_mut(inner);
            for (c, p) in cur.iter_mut().zip(prev.iter()) {
                *c = decay * p + diffuse * *c;
            }
        }
    }
}

/// Exact draw of the sheet: iid Gaussians filled in grid order, then one
/// stationary AR(1) pass per parameter axis. Every marginal is standard
/// Gaussian on `R^n`.
pub fn sample_sheet(grid: &SheetGrid, seed: u64) -> SheetSample {
    sample_sheet_stream(grid, seed, 0)
}

/// Draw with an explicit counter stream; replicas use one stream each so the
/// ensemble is reproducible under any parallel schedule.
pub fn sample_sheet_stream(grid: &SheetGrid, seed: u64, stream: u64) -> SheetSample {
    let shape: Vec<usize> = grid.axes.iter().map(|a| a.len()).collect();
    let total: usize = shape.iter().product::<usize>() * grid.state_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut values: Vec<f64> = (0..total)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    for axis in 0..grid.axes.len() {
        ar_pass(&mut values, &shape, grid.state_dim, axis, &grid.axes[axis]);
    }
    SheetSample {
        values,
        shape,
        state_dim: grid.state_dim,
        seed,
        stream,
    }
}

/// Hitting counts with the Wilson 95% confidence interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HitStats {
    pub replicas: usize,
    pub hits: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl HitStats {
    fn from_counts(hits: usize, replicas: usize) -> Self {
        let z = 1.959963984540054f64;
        let n = replicas as f64;
        let p = hits as f64 / n;
        let denom = 1.0 + z * z / n;
        let center = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        HitStats {
            replicas,
            hits,
            estimate: p,
            ci_low: (center - half).max(0.0),
            ci_high: (center + half).min(1.0),
        }
    }
}

fn margin_for(region: &RegionSpec, grid: &SheetGrid) -> f64 {
    match region.neighborhood_margin {
        Some(m) => m,
        // a discrete grid almost surely misses a zero-volume set; fatten thin
        // sets by the parameter spacing
        None if region.is_thin() => grid.max_spacing(),
        None => 0.0,
    }
}

/// Fraction of sheet replicas that visit the margin-fattened region at some
/// grid point. Replicas are independent streams; the scan short-circuits on
/// the first hit.
pub fn hitting_probability(
    region: &RegionSpec,
    grid: &SheetGrid,
    replicas: usize,
    seed: u64,
) -> Result<HitStats> {
    if replicas == 0 {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    region.validate(grid.state_dim)?;
    let margin = margin_for(region, grid);
    let hits: usize = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let sample = sample_sheet_stream(grid, seed, rep as u64);
            let hit = (0..sample.point_count())
                .any(|j| region.contains_with_margin(sample.point(j), margin));
            usize::from(hit)
        })
        .sum();
    Ok(HitStats::from_counts(hits, replicas))
}

/// Hitting estimates on nested subsamplings of one fine grid, evaluated on
/// shared driving noise: level `l` keeps every `strides[l]`-th point per
/// axis. Coarser levels see subsets of the fine samples, so the estimates
/// are monotone in refinement by construction.
pub fn hitting_refinement(
    region: &RegionSpec,
    fine: &SheetGrid,
    strides: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<Vec<(usize, HitStats)>> {
    if strides.is_empty() || strides.iter().any(|&s| s == 0) {
        return Err(Error::InvalidParameter("strides must be positive".into()));
    }
    region.validate(fine.state_dim)?;
    let margin = margin_for(region, fine);
    let shape: Vec<usize> = fine.axes.iter().map(|a| a.len()).collect();
    let hit_counts: Vec<usize> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let sample = sample_sheet_stream(fine, seed, rep as u64);
            let mut mask = 0usize;
            for (level, &stride) in strides.iter().enumerate() {
                let hit = (0..sample.point_count()).any(|flat| {
                    let mut rest = flat;
                    for &len in shape.iter().rev() {
                        let idx = rest % len;
                        rest /= len;
                        if idx % stride != 0 {
                            return false;
                        }
                    }
                    region.contains_with_margin(sample.point(flat), margin)
                });
                if hit {
                    mask |= 1 << level;
                }
            }
            mask
        })
        .fold(
            || vec![0usize; strides.len()],
            |mut acc, mask| {
                for (level, slot) in acc.iter_mut().enumerate() {
                    if mask & (1 << level) != 0 {
                        *slot += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0usize; strides.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(strides
        .iter()
        .zip(hit_counts)
        .map(|(&stride, hits)| (stride, HitStats::from_counts(hits, replicas)))
        .collect())
}

/// One row of the Kakutani experiment table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KakutaniRow {
    pub label: String,
    pub region: RegionSpec,
    pub hit: HitStats,
    pub capacity: f64,
    pub capacity_trend: Vec<(usize, f64)>,
    /// Relative change of the capacity across the refinement trend.
    pub trend_change: f64,
    /// Capacity trends to zero while hitting stays significantly positive,
    /// or the other way around.
    pub contradiction: bool,
    pub seed: u64,
}

/// Kakutani-correspondence experiment across a family of sets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KakutaniReport {
    pub rows: Vec<KakutaniRow>,
    /// Spearman rank correlation between hitting estimates and capacities.
    pub rank_correlation: f64,
    pub param_count: usize,
    pub replicas: usize,
}

/// Capacity grid configuration for the Kakutani experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KakutaniCapacityConfig {
    pub max_degree: u32,
    pub quad_orders: Vec<usize>,
    pub zero_threshold: f64,
}

/// For each set: hitting estimate of the `r`-parameter sheet and the
/// `(r, 2)`-capacity with a refinement trend, plus ordering consistency.
pub fn kakutani_experiment(
    family: &[(String, RegionSpec)],
    grid: &SheetGrid,
    replicas: usize,
    seed: u64,
    capacity: &KakutaniCapacityConfig,
    opts: &SolverOptions,
) -> Result<KakutaniReport> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty region family".into()));
    }
    let params = SobolevParams::new(grid.param_count() as u32, 2.0)?;
    let mut rows = Vec::with_capacity(family.len());
    for (label, region) in family {
        let hit = hitting_probability(region, grid, replicas, seed)?;
        let cap = capacity_with_refinement(
            region,
            &params,
            CapacityDefinition::Potential,
            grid.state_dim(),
            capacity.max_degree,
            &capacity.quad_orders,
            opts,
        )?;
        let trend = cap.refinement_trend.clone().unwrap_or_default();
        let first = trend.first().map(|&(_, v)| v).unwrap_or(cap.value);
        let trend_change = if first > 0.0 {
            (cap.value - first) / first
        } else {
            0.0
        };
        let cap_zero = cap.value < capacity.zero_threshold;
        let hit_positive = hit.ci_low > 0.02;
        let hit_zero = hit.ci_high < 0.02;
        let contradiction = (cap_zero && hit_positive) || (!cap_zero && hit_zero);
        rows.push(KakutaniRow {
            label: label.clone(),
            region: region.clone(),
            hit,
            capacity: cap.value,
            capacity_trend: trend,
            trend_change,
            contradiction,
            seed,
        });
    }
    let hits: Vec<f64> = rows.iter().map(|r| r.hit.estimate).collect();
    let caps: Vec<f64> = rows.iter().map(|r| r.capacity).collect();
    Ok(KakutaniReport {
        rank_correlation: spearman(&hits, &caps),
        rows,
        param_count: grid.param_count(),
        replicas,
    })
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for i in 0..a.len() {
        cov += (ra[i] - mean) * (rb[i] - mean);
        var_a += (ra[i] - mean) * (ra[i] - mean);
        var_b += (rb[i] - mean) * (rb[i] - mean);
    }
    if var_a <= 0.0 || var_b <= 0.0 {
        return 0.0;
    }
    cov / (var_a * var_b).sqrt()
}

/// Kolmogorov-Smirnov statistic of sorted samples against the standard
/// normal law.
pub fn ks_statistic_standard_normal(sorted: &[f64]) -> f64 {
    use statrs::distribution::ContinuousCDF;
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("static parameters");
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal.cdf(x);
        d = d.max(cdf - i as f64 / n).max((i + 1) as f64 / n - cdf);
    }
    d
}
