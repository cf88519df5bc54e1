//! Solvers for the potential-form capacity: minimize `sum_j w_j f_j^p` over
//! nodal `f >= 0` subject to `(A f)_i >= 1` on the constrained rows.
//!
//! The inner minimization over `f >= 0` of the Lagrangian has the closed form
//! `f_j = ((A^T lambda)_j^+ / (p w_j))^{1/(p-1)}`, so both solvers ascend the
//! concave dual over `lambda >= 0` and recover feasible primal points by
//! scaling (`A` has unit row sums, so scaled iterates stay feasible). For
//! `p = 2` an active-set polish turns the approximate dual point into an
//! exactly certified KKT solution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{basis_matrix, expand_nodal, GaussModelSpace, QuadGrid};
use crate::potential::SobolevParams;

use super::SolverOptions;

pub(crate) struct ConeSolution {
    pub f: Vec<f64>,
    pub value: f64,
    pub residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest eigenvalue of `P^{1/2} A W^{-1} A^T P^{1/2}` by power iteration:
/// the Lipschitz scale of the preconditioned dual gradient.
fn preconditioned_curvature(a: &DMatrix<f64>, weights: &[f64], precond: &DVector<f64>) -> f64 {
    let m = a.nrows();
    let sqrt_p: DVector<f64> = precond.map(f64::sqrt);
    let mut v = DVector::from_element(m, 1.0 / (m as f64).sqrt());
    let mut lambda = 1.0;
    for _ in 0..60 {
        let scaled = v.component_mul(&sqrt_p);
        let mut at_v = a.transpose() * scaled;
        for (j, w) in weights.iter().enumerate() {
            at_v[j] /= w;
        }
        let next = (a * at_v).component_mul(&sqrt_p);
        lambda = next.norm();
        if lambda <= 1e-300 {
            return 1.0;
        }
        v = next / lambda;
    }
    lambda
}

fn primal_from_dual_p2(a: &DMatrix<f64>, weights: &[f64], lambda: &DVector<f64>) -> DVector<f64> {
    let mut f = a.transpose() * lambda;
    for (j, w) in weights.iter().enumerate() {
        f[j] = (f[j] / (2.0 * w)).max(0.0);
    }
    f
}

fn dual_value_p2(weights: &[f64], lambda: &DVector<f64>, f: &DVector<f64>) -> f64 {
    let quad: f64 = f
        .iter()
        .zip(weights)
        .map(|(fj, w)| w * fj * fj)
        .sum();
    lambda.sum() - quad
}

struct FeasibleCandidate {
    f: DVector<f64>,
    value: f64,
}

/// Repair `f` into the feasible set and report the primal cost. Scaling
/// works whenever every constraint is already positive; shifting by a
/// constant always works because the kernel has unit row sums, so
/// `A(f + beta 1) = Af + beta`. The cheaper repaired point wins.
fn feasible_by_repair(
    a: &DMatrix<f64>,
    weights: &[f64],
    f: &DVector<f64>,
    p: f64,
) -> Option<FeasibleCandidate> {
    let cost = |g: &DVector<f64>| -> f64 {
        g.iter()
            .zip(weights)
            .map(|(gj, w)| w * gj.abs().powf(p))
            .sum()
    };
    let af = a * f;
    let s = af.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut best: Option<FeasibleCandidate> = None;
    if s > 1e-12 {
        let scaled = f / s;
        let value = cost(&scaled);
        best = Some(FeasibleCandidate { f: scaled, value });
    }
    if s < 1.0 {
        let shifted = f.add_scalar(1.0 - s);
        let value = cost(&shifted);
        if best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(FeasibleCandidate { f: shifted, value });
        }
    }
    best
}

/// `p = 2`: diagonally preconditioned accelerated dual ascent plus an exact
/// active-set polish. The preconditioner matters: far-out grid nodes carry
/// weights down to 1e-12 and without scaling they dominate the dual
/// curvature, freezing plain gradient steps.
pub(crate) fn solve_quadratic(
    a: &DMatrix<f64>,
    weights: &[f64],
    opts: &SolverOptions,
) -> Result<ConeSolution> {
    let m = a.nrows();

    // diag of the dual Hessian bound A W^{-1} A^T and its inverse as metric
    let mut precond = DVector::<f64>::zeros(m);
    for i in 0..m {
        let mut acc = 0.0;
        for j in 0..a.ncols() {
            acc += a[(i, j)] * a[(i, j)] / weights[j];
        }
        precond[i] = 1.0 / acc.max(1e-300);
    }
    let step = 2.0 / (preconditioned_curvature(a, weights, &precond) * 1.05);

    // warm start at the constant-function KKT scale
    let mut lambda = DVector::from_element(m, 0.0);
    for i in 0..m {
        let row_weight: f64 = (0..a.ncols()).map(|j| a[(i, j)] * weights[j]).sum();
        lambda[i] = 2.0 * row_weight.max(0.0);
    }
    let mut lambda_prev = lambda.clone();
    let mut momentum = 1.0f64;

    let mut best: Option<FeasibleCandidate> = None;
    let mut best_gap = f64::INFINITY;
    let mut g_prev = f64::NEG_INFINITY;
    let mut iterations = 0;
    let polish_schedule = [200usize, 600, 1500, 4000, 10_000, 25_000];

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        let mut y = &lambda + (&lambda - &lambda_prev) * beta;
        y.apply(|v| *v = v.max(0.0));

        let f_y = primal_from_dual_p2(a, weights, &y);
        let grad = DVector::from_element(m, 1.0) - a * &f_y;
        lambda_prev = lambda;
        lambda = &y + grad.component_mul(&precond) * step;
        lambda.apply(|v| *v = v.max(0.0));
        momentum = next_momentum;

        if iter % 25 == 24 || iter + 1 == opts.max_iterations {
            let f = primal_from_dual_p2(a, weights, &lambda);
            let g = dual_value_p2(weights, &lambda, &f);
            if g < g_prev {
                momentum = 1.0; // adaptive restart
            }
            g_prev = g;
            if let Some(cand) = feasible_by_repair(a, weights, &f, 2.0) {
                let gap = cand.value - g;
                if best.as_ref().map_or(true, |b| cand.value < b.value) {
                    best = Some(cand);
                }
                best_gap = best_gap.min(gap.max(0.0));
                let scale = best.as_ref().map(|b| b.value.max(1.0)).unwrap_or(1.0);
                if best_gap <= opts.tolerance * scale {
                    break;
                }
            }
            if polish_schedule.contains(&(iter + 1)) {
                if let Some(sol) = polish(a, weights, &lambda, opts)? {
                    return Ok(sol);
                }
            }
        }
    }

    if let Some(sol) = polish(a, weights, &lambda, opts)? {
        return Ok(sol);
    }
    let cand = best.ok_or(Error::SolverDidNotConverge {
        iterations,
        residual: f64::INFINITY,
    })?;
    let af = a * &cand.f;
    let residual = af.iter().map(|&v| (1.0 - v).max(0.0)).fold(0.0, f64::max);
    let scale = cand.value.max(1.0);
    Ok(ConeSolution {
        converged: best_gap <= opts.tolerance * scale,
        f: cand.f.as_slice().to_vec(),
        value: cand.value,
        residual,
        gap: best_gap,
        iterations,
    })
}

/// Exact KKT solve on the active set guessed from the dual point. Returns a
/// certified solution or `None` when the guess fails verification.
fn polish(
    a: &DMatrix<f64>,
    weights: &[f64],
    lambda: &DVector<f64>,
    opts: &SolverOptions,
) -> Result<Option<ConeSolution>> {
    let m = a.nrows();
    let n = a.ncols();
    let f_guess = primal_from_dual_p2(a, weights, lambda);
    let af = a * &f_guess;
    let f_max = f_guess.iter().cloned().fold(0.0f64, f64::max);
    if f_max <= 0.0 {
        return Ok(None);
    }

    let mut active: Vec<usize> = (0..m)
        .filter(|&i| {
            let slack = af[i] / af.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-300);
            slack <= 1.0 + 1e-6 || lambda[i] > 1e-10 * lambda.max()
        })
        .collect();
    let mut support: Vec<usize> = (0..n).filter(|&j| f_guess[j] > 1e-10 * f_max).collect();
    if active.is_empty() || support.is_empty() {
        return Ok(None);
    }

    for _round in 0..40 {
        // reduced KKT: S mu = 2 * 1 with S = A_act W^{-1}_sup A_act^T
        let mut reduced = DMatrix::<f64>::zeros(active.len(), support.len());
        for (ri, &i) in active.iter().enumerate() {
            for (cj, &j) in support.iter().enumerate() {
                reduced[(ri, cj)] = a[(i, j)] / weights[j].sqrt();
            }
        }
        let s = &reduced * reduced.transpose();
        let rhs = DVector::from_element(active.len(), 2.0);
        let mu = match solve_psd_least_norm(&s, &rhs) {
            Some(mu) => mu,
            None => return Ok(None),
        };

        // f on the support
        let mut f = DVector::zeros(n);
        for &j in support.iter() {
            let mut acc = 0.0;
            for (ri, &i) in active.iter().enumerate() {
                acc += a[(i, j)] * mu[ri];
            }
            f[j] = acc / (2.0 * weights[j]);
        }

        // verification; each failure mode adjusts the working sets
        if let Some((worst, _)) = mu
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < -1e-9)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        {
            active.remove(worst);
            if active.is_empty() {
                return Ok(None);
            }
            continue;
        }
        if let Some((worst, _)) = support
            .iter()
            .enumerate()
            .map(|(cj, &j)| (cj, f[j]))
            .filter(|&(_, v)| v < -1e-10 * f_max)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        {
            support.remove(worst);
            if support.is_empty() {
                return Ok(None);
            }
            continue;
        }
        f.apply(|v| *v = v.max(0.0));
        let af = a * &f;
        if let Some((worst, _)) = (0..m)
            .map(|i| (i, af[i]))
            .filter(|&(i, v)| v < 1.0 - 1e-10 && !active.contains(&i))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        {
            active.push(worst);
            continue;
        }
        // off-support stationarity: (A^T mu)_j <= 0 must hold where f_j = 0
        let mut lambda_full = DVector::zeros(m);
        for (ri, &i) in active.iter().enumerate() {
            lambda_full[i] = mu[ri];
        }
        let at_mu = a.transpose() * &lambda_full;
        let station_scale = at_mu.iter().cloned().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
        if let Some(j) = (0..n)
            .filter(|j| !support.contains(j))
            .find(|&j| at_mu[j] > 1e-9 * station_scale)
        {
            support.push(j);
            continue;
        }

        // certified: report the exact value and gap
        let value: f64 = f.iter().zip(weights).map(|(fj, w)| w * fj * fj).sum();
        let g = dual_value_p2(weights, &lambda_full, &primal_from_dual_p2(a, weights, &lambda_full));
        let gap = (value - g).abs();
        let residual = af.iter().map(|&v| (1.0 - v).max(0.0)).fold(0.0, f64::max);
        if gap > opts.tolerance * value.max(1.0) || residual > 1e-9 {
            return Ok(None);
        }
        return Ok(Some(ConeSolution {
            f: f.as_slice().to_vec(),
            value,
            residual,
            gap,
            iterations: 0,
            converged: true,
        }));
    }
    Ok(None)
}

/// Solve a PSD system, falling back to an eigenvalue pseudo-inverse when the
/// Cholesky factorization fails (rank-deficient active sets).
pub(crate) fn solve_psd_least_norm(s: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = s.clone().cholesky() {
        return Some(chol.solve(rhs));
    }
    let eig = nalgebra::SymmetricEigen::new(s.clone());
    let lam_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if lam_max <= 0.0 {
        return None;
    }
    let tol = 1e-12 * lam_max;
    let mut out = DVector::zeros(rhs.len());
    for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > tol {
            let v = eig.eigenvectors.column(idx);
            out += v * (v.dot(rhs) / lam);
        }
    }
    Some(out)
}

/// General `p`: iteratively reweighted quadratic programs. Around a model
/// point the term `w f^p` is replaced by `w (p/2) f0^{p-2} f^2` (tangent in
/// value slope at `f0`), and the weighted program is solved exactly by the
/// certified `p = 2` machinery. Every iterate is feasible, so the running
/// best is an honest upper bound; iteration stops on the relative change of
/// that bound. For `p > 2` the quadratic model is not a majorizer, so a
/// worsening step damps the model point instead of moving it.
pub(crate) fn solve_general_p(
    a: &DMatrix<f64>,
    weights: &[f64],
    p: f64,
    opts: &SolverOptions,
) -> Result<ConeSolution> {
    let n = a.ncols();
    let cost = |f: &DVector<f64>| -> f64 {
        f.iter()
            .zip(weights)
            .map(|(fj, w)| w * fj.abs().powf(p))
            .sum()
    };

    // the constant function is feasible (unit row sums)
    let mut model = DVector::from_element(n, 1.0);
    let mut best_f = model.clone();
    let mut best_value = cost(&best_f);
    let mut last_value = best_value;
    let mut last_gap = 0.0;
    let mut iterations = 0;
    let mut converged = false;

    for _outer in 0..40 {
        let peak = model.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
        let floor = 1e-6 * peak;
        let reweighted: Vec<f64> = weights
            .iter()
            .zip(model.iter())
            .map(|(w, fj)| w * (p / 2.0) * fj.max(floor).powf(p - 2.0))
            .collect();
        let sub = solve_quadratic(a, &reweighted, opts)?;
        iterations += sub.iterations.max(1);
        last_gap = sub.gap;
        let f_new = DVector::from_column_slice(&sub.f);
        let value_new = cost(&f_new);

        if value_new < best_value {
            best_value = value_new;
            best_f = f_new.clone();
        }
        let change = (last_value - value_new).abs() / value_new.max(1e-12);
        if change <= opts.rel_change_tol {
            converged = true;
            break;
        }
        last_value = value_new;
        if value_new <= best_value {
            model = f_new;
        } else {
            // damp toward the best point when the local model oversteps
            model = (&model + &f_new) * 0.5;
        }
        if iterations >= opts.max_iterations {
            break;
        }
    }

    let af = a * &best_f;
    let residual = af.iter().map(|&v| (1.0 - v).max(0.0)).fold(0.0, f64::max);
    Ok(ConeSolution {
        converged,
        f: best_f.as_slice().to_vec(),
        value: best_value,
        residual,
        gap: last_gap,
        iterations,
    })
}

/// Capacity over the cone of potentials of grid-representable functions:
/// `f = B c` with `B c >= 0` at all nodes and `(B D c) >= 1` on the mask.
///
/// For `p = 2` the problem is a quadratic program over the free coefficient
/// vector (the grid orthonormality turns the objective into `|c|^2`) and is
/// solved exactly through its dual with an active-set polish. Other `p` run
/// penalty continuation from the nodal warm start. Either way the returned
/// value is the cost of a repaired, exactly feasible point, along with the
/// worst nodal negativity encountered before the repair.
pub fn representable_cone_value(
    mask: &[bool],
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    warm_nodal: &[f64],
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let b = basis_matrix(space, grid);
    let mut bd = b.clone();
    for (aidx, alpha) in space.indices().iter().enumerate() {
        let d = (1.0 + alpha.order() as f64).powf(-(params.r as f64) / 2.0);
        for j in 0..grid.len() {
            bd[(j, aidx)] *= d;
        }
    }
    let a1 = super::masked_rows(&bd, mask);
    let p = params.p;
    let weights = grid.weights();

    if (p - 2.0).abs() < 1e-12 {
        return representable_p2(&b, &a1, weights, opts);
    }

    let objective_grad = |c: &DVector<f64>, rho: f64| -> (f64, DVector<f64>) {
        let v = &b * c;
        let mut obj = 0.0;
        let mut obj_slope = DVector::<f64>::zeros(v.len());
        for j in 0..v.len() {
            let av = v[j].abs();
            obj += weights[j] * av.powf(p);
            obj_slope[j] = weights[j] * p * av.powf(p - 1.0) * v[j].signum();
        }
        let mut grad = b.transpose() * obj_slope;

        // hinge penalties for constraint shortfall and nodal negativity
        let a1c = &a1 * c;
        let mut pen = 0.0;
        let mut short = DVector::<f64>::zeros(a1c.len());
        for i in 0..a1c.len() {
            let h = (1.0 - a1c[i]).max(0.0);
            pen += h * h;
            short[i] = -2.0 * h;
        }
        let mut neg = DVector::<f64>::zeros(v.len());
        for j in 0..v.len() {
            let h = (-v[j]).max(0.0);
            pen += h * h;
            neg[j] = -2.0 * h;
        }
        grad += (a1.transpose() * short + b.transpose() * neg) * rho;
        (obj + rho * pen, grad)
    };

    let warm = expand_nodal(warm_nodal, space, grid);
    let mut c = DVector::from_column_slice(warm.coeffs());
    let budget = (opts.max_iterations / 10).max(500);
    for stage in 0..5 {
        let rho = 1e2 * 10f64.powi(stage);
        let mut step = 1e-3;
        let (mut cur, mut grad) = objective_grad(&c, rho);
        for _ in 0..budget {
            let mut improved = false;
            for _ in 0..30 {
                let trial = &c - &grad * step;
                let (val, g) = objective_grad(&trial, rho);
                if val < cur - 1e-15 * cur.abs().max(1.0) {
                    let change = (cur - val).abs();
                    c = trial;
                    grad = g;
                    step *= 1.25;
                    improved = true;
                    if change <= 1e-9 * cur.abs().max(1e-12) {
                        cur = val;
                        break;
                    }
                    cur = val;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
    }

    // repair into the exact cone. Lifting along the constant expansion adds
    // tau to every nodal value and to every potential constraint (the kernel
    // preserves constants), so it removes negativity without breaking
    // feasibility; a final scaling clears the constraint level exactly.
    let v_raw = &b * &c;
    let negativity = v_raw.iter().map(|&x| (-x).max(0.0)).fold(0.0, f64::max);
    if negativity > 0.0 {
        c[0] += negativity;
    }
    let a1c = &a1 * &c;
    let s = a1c.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(s > 1e-9) {
        return Err(Error::SolverDidNotConverge {
            iterations: opts.max_iterations,
            residual: 1.0 - s,
        });
    }
    c /= s;
    let v = &b * &c;
    let value: f64 = v
        .iter()
        .zip(weights)
        .map(|(x, w)| w * x.max(0.0).powf(p))
        .sum();
    Ok((value, negativity))
}

/// Exact `p = 2` representable-cone solve: dual ascent over the stacked
/// constraints `[B D; B] c >= [1; 0]` with an active-set polish.
fn representable_p2(
    b: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    weights: &[f64],
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let n_nodes = b.nrows();
    let m_coef = b.ncols();
    let m1 = a1.nrows();
    let rows = m1 + n_nodes;

    // objective c^T G c with G = B^T W B (identity up to quadrature exactness)
    let mut gram = DMatrix::<f64>::zeros(m_coef, m_coef);
    for j in 0..n_nodes {
        let w = weights[j];
        for r in 0..m_coef {
            let brj = b[(j, r)];
            if brj == 0.0 {
                continue;
            }
            for s in 0..m_coef {
                gram[(r, s)] += w * brj * b[(j, s)];
            }
        }
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("grid Gram matrix is singular".into()))?;

    let stacked_t = {
        // columns of A^T in coefficient space
        let mut at = DMatrix::<f64>::zeros(m_coef, rows);
        for i in 0..m1 {
            for r in 0..m_coef {
                at[(r, i)] = a1[(i, r)];
            }
        }
        for j in 0..n_nodes {
            for r in 0..m_coef {
                at[(r, m1 + j)] = b[(j, r)];
            }
        }
        at
    };
    let rhs = {
        let mut v = DVector::<f64>::zeros(rows);
        for i in 0..m1 {
            v[i] = 1.0;
        }
        v
    };

    let c_of = |theta: &DVector<f64>| -> DVector<f64> {
        let mut c = &stacked_t * theta;
        c = chol.solve(&c);
        c / 2.0
    };
    let dual_of = |theta: &DVector<f64>, c: &DVector<f64>| -> f64 {
        // g = theta^T rhs - c^T G c
        let gc = &gram * c;
        theta.dot(&rhs) - c.dot(&gc)
    };
    let repair = |c: &DVector<f64>| -> Option<(DVector<f64>, f64, f64)> {
        let v = b * c;
        let negativity = v.iter().map(|&x| (-x).max(0.0)).fold(0.0, f64::max);
        let mut fixed = c.clone();
        if negativity > 0.0 {
            fixed[0] += negativity;
        }
        let a1c = a1 * &fixed;
        let s = a1c.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(s > 1e-12) {
            return None;
        }
        fixed /= s;
        let gc = &gram * &fixed;
        let value = fixed.dot(&gc);
        Some((fixed, value, negativity))
    };

    // curvature of the dual: largest eigenvalue of A G^{-1} A^T / 2
    let mut probe = DVector::from_element(rows, 1.0 / (rows as f64).sqrt());
    let mut curvature = 1.0;
    for _ in 0..60 {
        let c = c_of(&probe);
        let next = {
            let mut out = DVector::<f64>::zeros(rows);
            let image = &stacked_t.transpose() * &c;
            out.copy_from(&image);
            out
        };
        curvature = next.norm();
        if curvature <= 1e-300 {
            curvature = 1.0;
            break;
        }
        probe = next / curvature;
    }
    let step = 1.0 / (curvature.max(1e-12) * 1.05);

    let mut theta = DVector::from_element(rows, 0.0);
    for i in 0..m1 {
        theta[i] = 2.0; // scale of the KKT multipliers for unit constraints
    }
    let mut theta_prev = theta.clone();
    let mut momentum = 1.0f64;
    let mut g_prev = f64::NEG_INFINITY;
    let mut best: Option<(DVector<f64>, f64, f64)> = None;
    let mut best_gap = f64::INFINITY;

    for iter in 0..opts.max_iterations.min(20_000) {
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        let mut y = &theta + (&theta - &theta_prev) * beta;
        y.apply(|v| *v = v.max(0.0));
        let c_y = c_of(&y);
        let grad = &rhs - stacked_t.transpose() * &c_y;
        theta_prev = theta;
        theta = &y + &grad * step;
        theta.apply(|v| *v = v.max(0.0));
        momentum = next_momentum;

        if iter % 25 == 24 {
            let c = c_of(&theta);
            let g = dual_of(&theta, &c);
            if g < g_prev {
                momentum = 1.0;
            }
            g_prev = g;
            if let Some(cand) = repair(&c) {
                let gap = (cand.1 - g).max(0.0);
                if best.as_ref().map_or(true, |b| cand.1 < b.1) {
                    best = Some(cand);
                }
                best_gap = best_gap.min(gap);
                let scale = best.as_ref().map(|b| b.1.max(1.0)).unwrap();
                if best_gap <= opts.tolerance * scale {
                    break;
                }
            }
            // polish: exact equality solve on the near-active rows
            if [500usize, 1500, 4000, 10_000].contains(&(iter + 1)) || best_gap <= 1e-6 {
                if let Some(result) =
                    representable_polish(&stacked_t, &gram, &chol, &rhs, &theta, opts)
                {
                    return Ok(result);
                }
            }
        }
    }
    if let Some(result) = representable_polish(&stacked_t, &gram, &chol, &rhs, &theta, opts) {
        return Ok(result);
    }
    let (_c, value, negativity) = best.ok_or(Error::SolverDidNotConverge {
        iterations: opts.max_iterations,
        residual: f64::INFINITY,
    })?;
    Ok((value, negativity))
}

fn representable_polish(
    stacked_t: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    rhs: &DVector<f64>,
    theta: &DVector<f64>,
    opts: &SolverOptions,
) -> Option<(f64, f64)> {
    let rows = stacked_t.ncols();
    let theta_max = theta.max().max(1e-300);
    let c_guess = chol.solve(&(stacked_t * theta)) / 2.0;
    let residual_all = stacked_t.transpose() * &c_guess - rhs;
    let mut active: Vec<usize> = (0..rows)
        .filter(|&i| theta[i] > 1e-8 * theta_max || residual_all[i].abs() < 1e-6)
        .collect();
    if active.is_empty() {
        return None;
    }

    for _round in 0..40 {
        let mut at_act = DMatrix::<f64>::zeros(stacked_t.nrows(), active.len());
        for (col, &i) in active.iter().enumerate() {
            at_act.set_column(col, &stacked_t.column(i));
        }
        let ginv_at = chol.solve(&at_act);
        let s = at_act.transpose() * &ginv_at;
        let b_act = DVector::from_iterator(active.len(), active.iter().map(|&i| rhs[i]));
        let mu = solve_psd_least_norm(&s, &(&b_act * 2.0))?;
        let c = &ginv_at * &mu / 2.0;

        if let Some((worst, _)) = mu
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < -1e-9 * theta_max.max(1.0))
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        {
            active.remove(worst);
            if active.is_empty() {
                return None;
            }
            continue;
        }
        let slack = stacked_t.transpose() * &c - rhs;
        if let Some((worst, _)) = (0..rows)
            .map(|i| (i, slack[i]))
            .filter(|&(i, v)| v < -1e-10 && !active.contains(&i))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        {
            active.push(worst);
            continue;
        }

        let gc = gram * &c;
        let value = c.dot(&gc);
        // duality gap of the certified pair
        let mut theta_full = DVector::<f64>::zeros(rows);
        for (col, &i) in active.iter().enumerate() {
            theta_full[i] = mu[col];
        }
        let g = theta_full.dot(rhs) - value;
        if (value - g).abs() > opts.tolerance * value.max(1.0) {
            return None;
        }
        return Some((value, 0.0));
    }
    None
}
