//! Deterministic desk-scale invariant suite. Every check re-verifies one of
//! the structural identities the modules promise (orthonormality, semigroup
//! laws, oracle agreements, capacity inequalities, covering monotonicity,
//! sheet law); the CLI exposes the suite as `selftest` and fails the run if
//! any check is violated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::{cap_potential, cap_potential_masked, cap_variational, SolverOptions};
use crate::hausdorff::{spherical_hausdorff, theta_df, CoveringSchedule};
use crate::model::{build_grid, expand, GaussModelSpace, HermiteExpansion};
use crate::potential::{
    bessel_quadrature, bessel_spectral, spectral_norm_sq, SobolevParams,
};
use crate::region::RegionSpec;
use crate::semigroup::{maximal_function, mehler_apply, spectral_apply, TimeGrid};
use crate::sheet::{hitting_probability, sample_sheet_stream, SheetGrid};
use crate::truncation::{derivative_bounds, multiplicative_estimate_check, smooth_step};
use crate::error::Result;

/// Outcome of a single invariant check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Full suite result.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

fn check(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Run the invariant suite with the given seed.
pub fn run_selftest(seed: u64) -> Result<SelftestReport> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let space = GaussModelSpace::new(1, 8, 12)?;
    let grid = build_grid(&space)?;
    let space2 = GaussModelSpace::new(2, 5, 7)?;
    let grid2 = build_grid(&space2)?;

    // model: orthonormality of the basis under the grid
    {
        let b = crate::model::basis_matrix(&space2, &grid2);
        let mut worst = 0.0f64;
        for a in 0..space2.basis_len() {
            for c in a..space2.basis_len() {
                let acc: f64 = (0..grid2.len())
                    .map(|j| grid2.weight(j) * b[(j, a)] * b[(j, c)])
                    .sum();
                let expected = if a == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - expected).abs());
            }
        }
        checks.push(check(
            "model/orthonormality",
            worst < 1e-10,
            format!("max Gram deviation {worst:.3e}"),
        ));
    }

    // model: expansion round trip on a random polynomial
    {
        let coeffs: Vec<f64> = (0..space.basis_len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let u = HermiteExpansion::new(space.clone(), coeffs)?;
        let v = expand(|x| u.eval(x).unwrap(), &space, &grid);
        let worst = u
            .coeffs()
            .iter()
            .zip(v.coeffs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        checks.push(check(
            "model/expand-roundtrip",
            worst < 1e-10,
            format!("max coefficient deviation {worst:.3e}"),
        ));
    }

    // semigroup: coefficient law and Mehler agreement
    {
        let u = expand(|x| 1.0 + x[0].powi(3) - 0.5 * x[0], &space, &grid);
        let a = spectral_apply(&spectral_apply(&u, 0.4)?, 0.9)?;
        let b = spectral_apply(&u, 1.3)?;
        let law = a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);

        let mut worst = 0.0f64;
        for _ in 0..20 {
            let t: f64 = rng.random_range(0.05..4.0);
            let x = [rng.random_range(-2.0..2.0)];
            let quad = mehler_apply(|y| u.eval(y).unwrap(), t, &x, &grid)?;
            let spec = spectral_apply(&u, t)?.eval(&x)?;
            worst = worst.max((quad - spec).abs());
        }
        checks.push(check(
            "semigroup/law-and-oracle",
            law < 1e-14 && worst < 1e-8,
            format!("law deviation {law:.3e}, Mehler-vs-spectral {worst:.3e}"),
        ));
    }

    // semigroup: positivity and mass conservation
    {
        let f = |x: &[f64]| (x[0] - 0.4).powi(2) + 0.2;
        let t = 0.7;
        let mean: f64 = (0..grid.len())
            .map(|j| grid.weight(j) * f(grid.node(j)))
            .sum();
        let mut mass = 0.0;
        let mut min_value = f64::INFINITY;
        for j in 0..grid.len() {
            let v = mehler_apply(f, t, grid.node(j), &grid)?;
            min_value = min_value.min(v);
            mass += grid.weight(j) * v;
        }
        checks.push(check(
            "semigroup/positivity-mass",
            min_value >= 0.0 && (mass - mean).abs() < 1e-8,
            format!("min {min_value:.3e}, mass deviation {:.3e}", (mass - mean).abs()),
        ));
    }

    // potential: spectral multiplier against the Laguerre quadrature route
    {
        let u = expand(|x| 0.5 + x[0].powi(4) - x[0], &space, &grid);
        let mut worst = 0.0f64;
        for r in [1.0, 2.0] {
            let v = bessel_spectral(&u, r)?;
            for _ in 0..10 {
                let x = [rng.random_range(-2.0..2.0)];
                let q = bessel_quadrature(|y| u.eval(y).unwrap(), r, &x, &grid, 40)?;
                worst = worst.max((q - v.eval(&x)?).abs());
            }
        }
        checks.push(check(
            "potential/spectral-vs-quadrature",
            worst < 1e-8,
            format!("max deviation {worst:.3e}"),
        ));
    }

    // potential: contraction and the isometry shift
    {
        let coeffs: Vec<f64> = (0..space.basis_len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let u = HermiteExpansion::new(space.clone(), coeffs)?;
        let v = bessel_spectral(&u, 1.5)?;
        let contraction = grid.lp_norm(&v.nodal_values(&grid)?, 2.0)
            <= grid.lp_norm(&u.nodal_values(&grid)?, 2.0) * (1.0 + 1e-12);
        let iso = (spectral_norm_sq(&v, 2.5 + 1.5) - spectral_norm_sq(&u, 2.5)).abs();
        checks.push(check(
            "potential/contraction-isometry",
            contraction && iso < 1e-10 * spectral_norm_sq(&u, 2.5),
            format!("isometry deviation {iso:.3e}"),
        ));
    }

    // potential/semigroup: Jensen chain for potentials
    {
        let tgrid = TimeGrid::default_maximal();
        let mut ok = true;
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let a: f64 = rng.random_range(0.2..1.2);
            let f = move |x: &[f64]| a * x[0] * x[0] + 0.1;
            let x = [rng.random_range(-1.5..1.5)];
            let v = bessel_quadrature(f, 2.0, &x, &grid, 30)?;
            let m = maximal_function(|y| f(y).powi(2), &x, &tgrid, &grid)?;
            let slack = v.powi(2) / m;
            worst = worst.max(slack);
            ok &= slack <= 1.0 + 1e-10;
        }
        checks.push(check(
            "potential/jensen-chain",
            ok,
            format!("max (V_r f)^q / sup_t P_t f^q = {worst:.12}"),
        ));
    }

    // truncation: step range, derivative bounds, homogeneity
    {
        let mut range_ok = true;
        let mut prev = -1.0;
        for s in 0..=1000 {
            let t = -0.5 + 2.0 * s as f64 / 1000.0;
            let v = smooth_step(t);
            range_ok &= (0.0..=1.0).contains(&v) && v >= prev - 1e-15;
            prev = v;
        }
        let bounds = derivative_bounds(4, 2001)?;
        let bounds_ok = bounds[0] <= 2.0 + 1e-9 && bounds.iter().all(|b| b.is_finite());

        let tgrid = TimeGrid::default_maximal();
        let f: Vec<f64> = (0..grid.len())
            .map(|j| {
                let x = grid.node(j)[0];
                1.0 + 0.5 * x * x
            })
            .collect();
        let base = multiplicative_estimate_check(&f, 2, 1, 2.0, &[0.2], &space, &grid, &tgrid)?;
        let scaled: Vec<f64> = f.iter().map(|v| 3.7 * v).collect();
        let lam = multiplicative_estimate_check(&scaled, 2, 1, 2.0, &[0.2], &space, &grid, &tgrid)?;
        let homog = (base - lam).abs();
        checks.push(check(
            "truncation/step-bounds-homogeneity",
            range_ok && bounds_ok && homog < 1e-10 * base.max(1.0),
            format!("L = {:.6}, homogeneity deviation {homog:.3e}", bounds[1]),
        ));
    }

    // capacity: full space, monotonicity, subadditivity
    {
        let opts = SolverOptions::default();
        let params = SobolevParams::new(2, 2.0)?;
        let full = cap_potential(&RegionSpec::full(), &params, &space, &grid, &opts)?;
        let full_var = cap_variational(&RegionSpec::full(), &params, &space, &grid, &opts)?;

        let small = cap_potential(&RegionSpec::ball(vec![0.0], 0.5), &params, &space, &grid, &opts)?;
        let large = cap_potential(&RegionSpec::ball(vec![0.0], 1.5), &params, &space, &grid, &opts)?;

        let a = RegionSpec::ball(vec![-0.7], 0.4);
        let b = RegionSpec::ball(vec![0.8], 0.5);
        let ca = cap_potential(&a, &params, &space, &grid, &opts)?.value;
        let cb = cap_potential(&b, &params, &space, &grid, &opts)?.value;
        let cu = cap_potential(
            &RegionSpec::union(vec![a.clone(), b.clone()]),
            &params,
            &space,
            &grid,
            &opts,
        )?
        .value;

        let ok = (full.value - 1.0).abs() < 1e-6
            && (full_var.value - 1.0).abs() < 1e-6
            && small.value <= large.value + 1e-8
            && cu <= ca + cb + 2.0 * opts.tolerance;
        checks.push(check(
            "capacity/full-monotone-subadditive",
            ok,
            format!(
                "full {:.9}/{:.9}, nested {:.6}<={:.6}, union {cu:.6} <= {:.6}",
                full.value,
                full_var.value,
                small.value,
                large.value,
                ca + cb
            ),
        ));

        // weak-type bound on random nonnegative functions
        let kernel = crate::capacity::potential_kernel(&space, &grid, 2.0);
        let mut weak_ok = true;
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let f: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(0.0..2.5)).collect();
            let fv = nalgebra::DVector::from_column_slice(&f);
            let vr = &kernel * fv;
            let fp: f64 = (0..grid.len())
                .map(|j| grid.weight(j) * f[j] * f[j])
                .sum();
            for threshold in [1.0, 2.0, 4.0] {
                let mask: Vec<bool> = (0..grid.len()).map(|j| vr[j] > threshold).collect();
                let cap = cap_potential_masked(&mask, &params, &space, &grid, &opts)?;
                let bound = fp / (threshold * threshold);
                if cap.value > bound + 1e-7 {
                    weak_ok = false;
                }
                worst = worst.max(cap.value - bound);
            }
        }
        checks.push(check(
            "capacity/weak-type",
            weak_ok,
            format!("max excess over bound {worst:.3e}"),
        ));
    }

    // hausdorff: point counting measure and set monotonicity
    {
        let schedule = CoveringSchedule::dyadic(3, 6)?;
        let point = theta_df(&RegionSpec::point(vec![0.0]), 1, 1.0, &schedule, None)?;
        let expected = (2.0 * std::f64::consts::PI).powf(-0.5);
        let small = spherical_hausdorff(
            &RegionSpec::ball(vec![0.0], 0.4),
            1,
            1.0,
            &schedule,
            Some(2.0),
        )?;
        let large = spherical_hausdorff(
            &RegionSpec::ball(vec![0.0], 0.9),
            1,
            1.0,
            &schedule,
            Some(2.0),
        )?;
        checks.push(check(
            "hausdorff/point-and-monotonicity",
            (point.value - expected).abs() < 5e-3 && small.value <= large.value + 1e-12,
            format!("theta(point) = {:.6}, expected {expected:.6}", point.value),
        ));
    }

    // sheet: marginal moments, covariance, hit nesting
    {
        let t = 2f64.ln();
        let sheet_grid = SheetGrid::new(vec![vec![0.0, t], vec![0.0, t]], 1)?;
        let n = 20_000;
        let (mut sum, mut sumsq, mut cross) = (0.0, 0.0, 0.0);
        for rep in 0..n {
            let s = sample_sheet_stream(&sheet_grid, seed, rep as u64);
            let v = s.point(0)[0];
            sum += v;
            sumsq += v * v;
            cross += v * s.point(3)[0];
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let corr = cross / n as f64;

        let hit_grid = SheetGrid::uniform(2, 2.0, 0.5, 1)?;
        let small = hitting_probability(&RegionSpec::ball(vec![1.0], 0.3), &hit_grid, 300, seed)?;
        let large = hitting_probability(&RegionSpec::ball(vec![1.0], 0.8), &hit_grid, 300, seed)?;
        checks.push(check(
            "sheet/law-and-hit-nesting",
            mean.abs() < 0.05
                && (var - 1.0).abs() < 0.05
                && (corr - 0.25).abs() < 0.05
                && small.hits <= large.hits,
            format!("mean {mean:.4}, var {var:.4}, corr {corr:.4}"),
        ));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(SelftestReport {
        seed,
        passed,
        checks,
    })
}
