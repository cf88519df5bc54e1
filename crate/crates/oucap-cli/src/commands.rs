//! Command implementations. Each command materializes its defaults into the
//! config, runs the experiment, and writes `<command>.json` (plus CSV tables
//! where the experiment is a sweep) and `<command>_config.toml` into the
//! output directory.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use oucap::capacity::{
    cap_potential, cap_variational, capacity_with_refinement, equivalence_ratio,
    uniqueness_verdict, CapacityDefinition, CapacityResult, EquivalenceReport,
};
use oucap::hausdorff::{default_subspace_family, gaussian_hausdorff, CoveringSchedule};
use oucap::io::{csv_document, csv_float, to_json_bytes, write_atomic};
use oucap::model::{build_grid, GaussModelSpace};
use oucap::potential::SobolevParams;
use oucap::random::{random_cylindrical_nonneg, random_nonneg_nodal};
use oucap::region::RegionSpec;
use oucap::selftest::run_selftest;
use oucap::semigroup::TimeGrid;
use oucap::sheet::{
    hitting_probability, hitting_refinement, kakutani_experiment, KakutaniCapacityConfig,
    SheetGrid,
};
use oucap::truncation::{multiplicative_estimate_check, truncate_potential, SmoothTruncation};

use crate::config::*;
use crate::CliError;

pub struct RunContext {
    pub out_dir: PathBuf,
    pub quiet: bool,
    pub command: &'static str,
}

#[derive(Serialize)]
struct RunRecord<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    result: T,
    meta: RunMeta,
}

#[derive(Serialize)]
struct RunMeta {
    timestamp_unix: u64,
    tool_version: &'static str,
}

impl RunMeta {
    fn now() -> Self {
        RunMeta {
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool_version: env!("CARGO_PKG_VERSION"),
        }
    }
}

fn write_record<T: Serialize>(
    ctx: &RunContext,
    cfg: &ExperimentConfig,
    seed: u64,
    result: T,
) -> Result<(), CliError> {
    let record = RunRecord {
        command: ctx.command,
        seed,
        config: cfg,
        result,
        meta: RunMeta::now(),
    };
    let bytes = to_json_bytes(&record).map_err(|e| CliError::Validation(e.to_string()))?;
    write_atomic(&ctx.out_dir.join(format!("{}.json", ctx.command)), &bytes)?;

    let config_toml =
        toml::to_string_pretty(cfg).map_err(|e| CliError::Validation(e.to_string()))?;
    write_atomic(
        &ctx.out_dir.join(format!("{}_config.toml", ctx.command)),
        config_toml.as_bytes(),
    )?;
    Ok(())
}

fn write_csv(ctx: &RunContext, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let doc = csv_document(header, rows);
    write_atomic(&ctx.out_dir.join(name), doc.as_bytes())?;
    Ok(())
}

fn say(ctx: &RunContext, line: String) {
    if !ctx.quiet {
        println!("{line}");
    }
}

fn seed_of(cfg: &ExperimentConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

fn need<T: Clone>(section: &Option<T>, name: &str) -> Result<T, CliError> {
    section
        .clone()
        .ok_or_else(|| CliError::Validation(format!("config section [{name}] is required")))
}

fn space_of(cfg: &SpaceConfig) -> Result<(GaussModelSpace, oucap::model::QuadGrid), CliError> {
    let space = GaussModelSpace::new(cfg.dim, cfg.max_degree, cfg.quad_order)?;
    let grid = build_grid(&space)?;
    Ok((space, grid))
}

pub fn capacity(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    let space_cfg = need(&cfg.space, "space")?;
    let sobolev = need(&cfg.sobolev, "sobolev")?;
    let region_cfg = need(&cfg.region, "region")?;
    let solver = cfg.solver.clone().unwrap_or_default();
    cfg.seed = Some(seed_of(&cfg));
    cfg.solver = Some(solver.clone());

    let region = region_cfg.to_region().map_err(CliError::Validation)?;
    let params = SobolevParams::new(sobolev.r, sobolev.p)?;
    let definition = solver.definition().map_err(CliError::Validation)?;
    let opts = solver.options();

    let result = match &solver.refinement_orders {
        Some(orders) => capacity_with_refinement(
            &region,
            &params,
            definition,
            space_cfg.dim,
            space_cfg.max_degree,
            orders,
            &opts,
        )?,
        None => {
            let (space, grid) = space_of(&space_cfg)?;
            match definition {
                CapacityDefinition::Potential => {
                    cap_potential(&region, &params, &space, &grid, &opts)?
                }
                CapacityDefinition::Variational => {
                    cap_variational(&region, &params, &space, &grid, &opts)?
                }
            }
        }
    };

    #[derive(Serialize)]
    struct CapacityRecord {
        region: RegionSpec,
        r: u32,
        p: f64,
        definition: CapacityDefinition,
        #[serde(flatten)]
        result: CapacityResult,
    }
    let converged = result.converged;
    let value = result.value;
    write_record(
        ctx,
        &cfg,
        seed_of(&cfg),
        CapacityRecord {
            region: region.clone(),
            r: sobolev.r,
            p: sobolev.p,
            definition,
            result,
        },
    )?;
    say(ctx, format!("capacity({}) = {value:.12}", region.label()));
    if !converged {
        return Err(CliError::Solver(format!(
            "capacity solver flagged non-convergence (value {value:.6e})"
        )));
    }
    Ok(())
}

fn equivalence_family(dim: usize, cfg: &EquivalenceConfig) -> Vec<(String, RegionSpec)> {
    let mut family = Vec::new();
    for &radius in &cfg.ball_radii {
        let region = RegionSpec::ball(vec![0.0; dim], radius).with_margin(cfg.margin);
        family.push((format!("n{dim}-ball{radius}"), region));
    }
    for &width in &cfg.slab_widths {
        let normal = if dim == 1 {
            vec![1.0]
        } else {
            let mut n = vec![0.0; dim];
            let c = (2.0f64).sqrt().recip();
            n[0] = c;
            n[1] = c;
            n
        };
        let region = RegionSpec::slab(normal, 0.25, width / 2.0).with_margin(cfg.margin);
        family.push((format!("n{dim}-slab{width}"), region));
    }
    family
}

#[derive(Serialize, Clone)]
struct EquivalenceRow {
    dim: usize,
    label: String,
    r: u32,
    p: f64,
    quad_order: usize,
    cap: f64,
    ccap: f64,
    ratio: f64,
    witness_cost: f64,
    violation: bool,
}

#[derive(Serialize)]
struct RpEnvelope {
    r: u32,
    p: f64,
    min_ratio: f64,
    max_ratio: f64,
    /// Worst relative ratio change between consecutive quadrature orders.
    max_refinement_change: f64,
}

#[derive(Serialize)]
struct EquivalenceSummary {
    rows: Vec<EquivalenceRow>,
    envelopes: Vec<RpEnvelope>,
}

pub fn equivalence(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    let eq = cfg.equivalence.clone().unwrap_or_default();
    cfg.equivalence = Some(eq.clone());
    cfg.seed = Some(seed_of(&cfg));
    let opts = cfg.solver.clone().unwrap_or_default().options();
    let truncation = SmoothTruncation::standard(4)?;

    // one task per (dim, region, r, p, order), solved in parallel
    let mut tasks = Vec::new();
    for &dim in &eq.dims {
        for (label, region) in equivalence_family(dim, &eq) {
            for &r in &eq.rs {
                for &p in &eq.ps {
                    for &q in &eq.quad_orders {
                        tasks.push((dim, label.clone(), region.clone(), r, p, q));
                    }
                }
            }
        }
    }
    let rows: Vec<EquivalenceRow> = tasks
        .par_iter()
        .map(|(dim, label, region, r, p, q)| -> Result<EquivalenceRow, CliError> {
            let space = GaussModelSpace::new(*dim, eq.max_degree, *q)?;
            let grid = build_grid(&space)?;
            let params = SobolevParams::new(*r, *p)?;
            let report: EquivalenceReport =
                equivalence_ratio(region, &params, &space, &grid, &truncation, &opts)?;
            Ok(EquivalenceRow {
                dim: *dim,
                label: label.clone(),
                r: *r,
                p: *p,
                quad_order: *q,
                cap: report.cap.value,
                ccap: report.ccap.value,
                ratio: report.ratio,
                witness_cost: report.witness_cost,
                violation: report.violation_flag,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut envelopes = Vec::new();
    for &r in &eq.rs {
        for &p in &eq.ps {
            let subset: Vec<&EquivalenceRow> = rows
                .iter()
                .filter(|row| row.r == r && row.p == p && row.ratio.is_finite())
                .collect();
            if subset.is_empty() {
                continue;
            }
            let min_ratio = subset.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
            let max_ratio = subset.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
            let mut max_change = 0.0f64;
            for row in &subset {
                if row.quad_order != eq.quad_orders[0] {
                    continue;
                }
                for other in &subset {
                    if other.label == row.label
                        && other.dim == row.dim
                        && other.quad_order != row.quad_order
                    {
                        max_change = max_change.max((other.ratio / row.ratio - 1.0).abs());
                    }
                }
            }
            envelopes.push(RpEnvelope {
                r,
                p,
                min_ratio,
                max_ratio,
                max_refinement_change: max_change,
            });
        }
    }

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.dim.to_string(),
                row.label.clone(),
                row.r.to_string(),
                csv_float(row.p),
                row.quad_order.to_string(),
                csv_float(row.cap),
                csv_float(row.ccap),
                csv_float(row.ratio),
                csv_float(row.witness_cost),
                row.violation.to_string(),
            ]
        })
        .collect();
    write_csv(
        ctx,
        "equivalence.csv",
        &["n", "region", "r", "p", "Q", "cap", "ccap", "ratio", "witness", "violation"],
        &csv_rows,
    )?;
    let summary = EquivalenceSummary { rows, envelopes };
    let lines: Vec<String> = summary
        .envelopes
        .iter()
        .map(|e| {
            format!(
                "r={} p={}: ratio in [{:.4}, {:.4}], refinement change {:.2}%",
                e.r,
                e.p,
                e.min_ratio,
                e.max_ratio,
                100.0 * e.max_refinement_change
            )
        })
        .collect();
    write_record(ctx, &cfg, seed_of(&cfg), summary)?;
    for line in lines {
        say(ctx, line);
    }
    Ok(())
}

/// Deterministic per-dimension spaces for the dimension sweeps: total degree
/// and quadrature order shrink with the ambient dimension to keep the node
/// count bounded.
fn sweep_space(dim: usize) -> Result<(GaussModelSpace, oucap::model::QuadGrid), CliError> {
    let (k, q) = match dim {
        1 => (8, 13),
        2 => (6, 9),
        3 => (4, 7),
        _ => (4, 6),
    };
    let space = GaussModelSpace::new(dim, k, q)?;
    let grid = build_grid(&space)?;
    Ok((space, grid))
}

const SCALE_LADDER: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

#[derive(Serialize)]
struct TruncationBoundSummary {
    per_dim_max: Vec<(usize, f64)>,
    pooled_median: f64,
    /// max over dims of per-dim max, relative to the min over dims.
    dimension_spread: f64,
    outliers_over_10x_median: usize,
}

pub fn truncation_bound(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    use rand::SeedableRng;
    let tb = cfg.truncation_bound.clone().unwrap_or_default();
    cfg.truncation_bound = Some(tb.clone());
    let seed = seed_of(&cfg);
    cfg.seed = Some(seed);
    let params = SobolevParams::new(tb.r, tb.p)?;

    let mut csv_rows = Vec::new();
    let mut per_dim_max = Vec::new();
    let mut all_ratios = Vec::new();
    for &dim in &tb.dims {
        // identical degree and order across dimensions keeps the family
        // comparable, which is the point of the sweep
        let space = GaussModelSpace::new(dim, 4, 7)?;
        let grid = build_grid(&space)?;
        let ratios: Vec<f64> = (0..tb.samples_per_dim)
            .into_par_iter()
            .map(|i| -> Result<f64, CliError> {
                // stream keyed by the sample index only: common random
                // numbers across dimensions
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let scale = SCALE_LADDER[i % SCALE_LADDER.len()];
                let f = random_cylindrical_nonneg(&space, &grid, tb.decay, scale, &mut rng);
                let out = truncate_potential(&f, &params, &space, &grid)?;
                Ok(out.ratio)
            })
            .collect::<Result<_, _>>()?;
        for (i, ratio) in ratios.iter().enumerate() {
            csv_rows.push(vec![
                dim.to_string(),
                tb.r.to_string(),
                csv_float(tb.p),
                format!("{seed}:{i}"),
                csv_float(*ratio),
            ]);
        }
        let max = ratios.iter().cloned().fold(0.0f64, f64::max);
        per_dim_max.push((dim, max));
        all_ratios.extend(ratios);
    }
    write_csv(ctx, "truncation_bound.csv", &["n", "r", "p", "seed", "ratio"], &csv_rows)?;

    let mut sorted = all_ratios.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pooled_median = sorted[sorted.len() / 2];
    let outliers = all_ratios
        .iter()
        .filter(|&&r| r > 10.0 * pooled_median)
        .count();
    let max_of_max = per_dim_max.iter().map(|&(_, m)| m).fold(0.0f64, f64::max);
    let min_of_max = per_dim_max
        .iter()
        .map(|&(_, m)| m)
        .fold(f64::INFINITY, f64::min);
    let summary = TruncationBoundSummary {
        per_dim_max: per_dim_max.clone(),
        pooled_median,
        dimension_spread: max_of_max / min_of_max - 1.0,
        outliers_over_10x_median: outliers,
    };
    let spread = summary.dimension_spread;
    write_record(ctx, &cfg, seed, summary)?;
    say(
        ctx,
        format!("truncation-bound: per-dim maxima {per_dim_max:?}, spread {:.2}%", 100.0 * spread),
    );
    Ok(())
}

#[derive(Serialize)]
struct MultestSummary {
    samples: usize,
    max_ratio: f64,
    median_ratio: f64,
    violations_over_10x_median: usize,
    max_scaling_deviation: f64,
}

pub fn multest(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    use rand::{Rng, SeedableRng};
    let mt = cfg.multest.clone().unwrap_or_default();
    cfg.multest = Some(mt.clone());
    let seed = seed_of(&cfg);
    cfg.seed = Some(seed);
    let tgrid = TimeGrid::default_maximal();

    let mut csv_rows = Vec::new();
    let mut ratios = Vec::new();
    let mut max_scaling_dev = 0.0f64;
    for (dpos, &dim) in mt.dims.iter().enumerate() {
        let (space, grid) = sweep_space(dim)?;
        let per_dim = mt.samples / mt.dims.len();
        let outcomes: Vec<(f64, f64)> = (0..per_dim)
            .into_par_iter()
            .map(|i| -> Result<(f64, f64), CliError> {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((dpos as u64 + 1) << 40) | i as u64);
                let scale = SCALE_LADDER[i % SCALE_LADDER.len()];
                let f = random_nonneg_nodal(&space, &grid, mt.decay, scale, &mut rng);
                let x: Vec<f64> = (0..dim)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect();
                let ratio = multiplicative_estimate_check(
                    &f, mt.r, mt.k, mt.q, &x, &space, &grid, &tgrid,
                )?;
                // scaling invariance f -> lambda f on a subsample
                let dev = if i % 10 == 0 {
                    let lambda = 3.7;
                    let scaled: Vec<f64> = f.iter().map(|v| lambda * v).collect();
                    let r2 = multiplicative_estimate_check(
                        &scaled, mt.r, mt.k, mt.q, &x, &space, &grid, &tgrid,
                    )?;
                    (r2 - ratio).abs() / ratio.abs().max(1e-300)
                } else {
                    0.0
                };
                Ok((ratio, dev))
            })
            .collect::<Result<_, _>>()?;
        for (i, (ratio, dev)) in outcomes.iter().enumerate() {
            csv_rows.push(vec![
                dim.to_string(),
                mt.r.to_string(),
                mt.k.to_string(),
                csv_float(mt.q),
                format!("{seed}:{i}"),
                csv_float(*ratio),
            ]);
            ratios.push(*ratio);
            max_scaling_dev = max_scaling_dev.max(*dev);
        }
    }
    write_csv(ctx, "multest.csv", &["n", "r", "k", "q", "seed", "ratio"], &csv_rows)?;

    let mut sorted = ratios.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let max_ratio = sorted.last().cloned().unwrap_or(0.0);
    let violations = ratios.iter().filter(|&&r| r > 10.0 * median).count();
    let summary = MultestSummary {
        samples: ratios.len(),
        max_ratio,
        median_ratio: median,
        violations_over_10x_median: violations,
        max_scaling_deviation: max_scaling_dev,
    };
    write_record(ctx, &cfg, seed, summary)?;
    say(
        ctx,
        format!(
            "multest: max ratio {max_ratio:.4}, median {median:.4}, violations {violations}, \
             scaling deviation {max_scaling_dev:.2e}"
        ),
    );
    Ok(())
}

pub fn hausdorff(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    let hd = need(&cfg.hausdorff, "hausdorff")?;
    cfg.seed = Some(seed_of(&cfg));
    let region = hd.set.to_region().map_err(CliError::Validation)?;
    let schedule = CoveringSchedule::dyadic(hd.schedule_k_lo, hd.schedule_k_hi)?;
    let family = default_subspace_family(hd.dim, hd.d)?;
    let report = gaussian_hausdorff(
        &region,
        hd.dim,
        hd.d,
        &family,
        hd.section_samples,
        &schedule,
        seed_of(&cfg),
        Some(hd.window),
    )?;

    #[derive(Serialize)]
    struct HausdorffRecord {
        set: RegionSpec,
        schedule: CoveringSchedule,
        #[serde(flatten)]
        report: oucap::hausdorff::GaussianHausdorffReport,
    }
    let value = report.value;
    write_record(
        ctx,
        &cfg,
        seed_of(&cfg),
        HausdorffRecord {
            set: region.clone(),
            schedule,
            report,
        },
    )?;
    say(ctx, format!("rho_{}({}) ~ {value:.9}", hd.d, region.label()));
    Ok(())
}

pub fn hitting(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    let ht = need(&cfg.hitting, "hitting")?;
    cfg.seed = Some(seed_of(&cfg));
    let region = ht.set.to_region().map_err(CliError::Validation)?;
    let grid = SheetGrid::uniform(ht.param_count, ht.horizon, ht.spacing, ht.state_dim)?;
    let stats = hitting_probability(&region, &grid, ht.replicas, seed_of(&cfg))?;
    let refinement = hitting_refinement(&region, &grid, &ht.strides, ht.replicas, seed_of(&cfg))?;

    #[derive(Serialize)]
    struct HittingRecord {
        set: RegionSpec,
        param_count: usize,
        state_dim: usize,
        horizon: f64,
        spacing: f64,
        stats: oucap::sheet::HitStats,
        refinement: Vec<(usize, oucap::sheet::HitStats)>,
    }
    let estimate = stats.estimate;
    write_record(
        ctx,
        &cfg,
        seed_of(&cfg),
        HittingRecord {
            set: region.clone(),
            param_count: ht.param_count,
            state_dim: ht.state_dim,
            horizon: ht.horizon,
            spacing: ht.spacing,
            stats,
            refinement,
        },
    )?;
    say(ctx, format!("P(hit {}) ~ {estimate:.6}", region.label()));
    Ok(())
}

pub fn kakutani(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    let kk = cfg.kakutani.clone().unwrap_or_default();
    cfg.kakutani = Some(kk.clone());
    let seed = seed_of(&cfg);
    cfg.seed = Some(seed);
    let opts = cfg.solver.clone().unwrap_or_default().options();

    if kk.ball_center.len() != kk.state_dim {
        return Err(CliError::Validation(format!(
            "ball_center has {} coordinates, state dimension is {}",
            kk.ball_center.len(),
            kk.state_dim
        )));
    }
    let family: Vec<(String, RegionSpec)> = kk
        .ball_radii
        .iter()
        .map(|&radius| {
            (
                format!("ball{radius}"),
                RegionSpec::ball(kk.ball_center.clone(), radius),
            )
        })
        .collect();
    let grid = SheetGrid::uniform(kk.param_count, kk.horizon, kk.spacing, kk.state_dim)?;
    let capacity = KakutaniCapacityConfig {
        max_degree: kk.max_degree,
        quad_orders: kk.quad_orders.clone(),
        zero_threshold: kk.zero_threshold,
    };
    let report = kakutani_experiment(&family, &grid, kk.replicas, seed, &capacity, &opts)?;

    let csv_rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|row| {
            vec![
                row.label.clone(),
                row.region.label(),
                csv_float(row.hit.estimate),
                csv_float(row.hit.ci_low),
                csv_float(row.hit.ci_high),
                csv_float(row.capacity),
                csv_float(row.trend_change),
                row.seed.to_string(),
            ]
        })
        .collect();
    write_csv(
        ctx,
        "kakutani.csv",
        &["set", "params", "hit", "ci_low", "ci_high", "cap", "trend_slope", "seed"],
        &csv_rows,
    )?;
    let rank = report.rank_correlation;
    let contradictions = report.rows.iter().filter(|r| r.contradiction).count();
    write_record(ctx, &cfg, seed, report)?;
    say(
        ctx,
        format!("kakutani: rank correlation {rank:.3}, contradictions {contradictions}"),
    );
    Ok(())
}

pub fn uniqueness(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    let un = need(&cfg.uniqueness, "uniqueness")?;
    let space_cfg = need(&cfg.space, "space")?;
    cfg.seed = Some(seed_of(&cfg));
    let opts = cfg.solver.clone().unwrap_or_default().options();
    let region = un.set.to_region().map_err(CliError::Validation)?;
    let (space, grid) = space_of(&space_cfg)?;
    let report = uniqueness_verdict(
        &region,
        un.m,
        un.p,
        &space,
        &grid,
        un.zero_threshold,
        &un.margins,
        &opts,
    )?;
    let verdict = report.verdict.clone();
    write_record(ctx, &cfg, seed_of(&cfg), report)?;
    say(ctx, format!("uniqueness verdict: {verdict}"));
    Ok(())
}

pub fn selftest(mut cfg: ExperimentConfig, ctx: &RunContext) -> Result<(), CliError> {
    let seed = seed_of(&cfg);
    cfg.seed = Some(seed);
    let report = run_selftest(seed)?;
    let passed = report.passed;
    let failures: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    for checkpoint in &report.checks {
        say(
            ctx,
            format!(
                "[{}] {}: {}",
                if checkpoint.passed { "ok" } else { "FAIL" },
                checkpoint.name,
                checkpoint.detail
            ),
        );
    }
    write_record(ctx, &cfg, seed, report)?;
    if !passed {
        return Err(CliError::Invariant(format!(
            "selftest failures: {}",
            failures.join(", ")
        )));
    }
    Ok(())
}

/// Shared writer for commands needing a bare file path.
#[allow(dead_code)]
fn out_path(ctx: &RunContext, name: &str) -> PathBuf {
    Path::new(&ctx.out_dir).join(name)
}
