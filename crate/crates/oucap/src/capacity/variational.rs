//! Solvers for the variational capacity: minimize `|u|_{W^{r,p}}^p` over
//! degree-`K` expansions with `u = 1` at every constrained node.
//!
//! The constant expansion is always feasible, so the equality system `B_U c = 1`
//! is consistent no matter how many nodes are constrained. For `p = 2` the
//! problem is solved exactly on the affine feasible set by iteratively
//! reweighted least squares over the null space of `B_U` (the stationarity
//! system with multipliers, in reduced form); rank deficiency is handled by
//! an eigenvalue pseudo-inverse of the Gram matrix. For general `p` a
//! penalty continuation descends the smooth objective and finishes with an
//! exact feasibility projection.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{basis_matrix, GaussModelSpace, QuadGrid};
use crate::potential::SobolevParams;

use super::{masked_rows, SolverOptions};

pub(crate) struct VariationalSolution {
    pub coeffs: Vec<f64>,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Geometry of the affine feasible set `{c : B_U c = 1}`. The constant
/// expansion `e_0` is always exactly feasible (the zeroth basis column is the
/// all-ones vector), so it anchors the set; the null space comes from
/// Gram-Schmidt over a maximal independent subset of constraint rows.
struct ConstraintGeometry {
    /// The constant expansion, exactly feasible.
    particular: DVector<f64>,
    /// Orthonormal basis of the null space of the selected rows.
    null_basis: DMatrix<f64>,
    /// Orthonormalized independent constraint rows (for projections).
    row_basis: Vec<DVector<f64>>,
}

fn constraint_geometry(b_mask: &DMatrix<f64>) -> ConstraintGeometry {
    let m = b_mask.ncols();

    // modified Gram-Schmidt row selection; nearly dependent rows are
    // satisfied automatically once the independent ones are
    let mut row_basis: Vec<DVector<f64>> = Vec::new();
    for i in 0..b_mask.nrows() {
        let row = b_mask.row(i).transpose();
        let scale = row.norm();
        if scale <= 0.0 {
            continue;
        }
        let mut v = row.clone();
        for q in &row_basis {
            let dot = v.dot(q);
            v -= q * dot;
        }
        if v.norm() > 1e-12 * scale {
            let norm = v.norm();
            row_basis.push(v / norm);
            if row_basis.len() == m {
                break;
            }
        }
    }

    // extend the row basis to a full orthonormal basis; the complement spans
    // the null space
    let mut null_cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..m {
        if row_basis.len() + null_cols.len() == m {
            break;
        }
        let mut v = DVector::<f64>::zeros(m);
        v[i] = 1.0;
        for q in row_basis.iter().chain(null_cols.iter()) {
            let dot = v.dot(q);
            v -= q * dot;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            null_cols.push(v / norm);
        }
    }
    let mut null_basis = DMatrix::<f64>::zeros(m, null_cols.len());
    for (i, col) in null_cols.iter().enumerate() {
        null_basis.set_column(i, col);
    }

    let mut particular = DVector::<f64>::zeros(m);
    particular[0] = 1.0;
    ConstraintGeometry {
        particular,
        null_basis,
        row_basis,
    }
}

impl ConstraintGeometry {
    /// Project `c` onto the affine feasible set by removing the row-space
    /// component of its deviation from the feasible anchor.
    fn project_feasible(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut delta = c - &self.particular;
        for q in &self.row_basis {
            let dot = delta.dot(q);
            delta -= q * dot;
        }
        &self.particular + delta
    }
}

/// Falling-factorial diagonal of the order-`k` derivative seminorm in
/// coefficients: entry `|alpha| (|alpha|-1) ... (|alpha|-k+1)`.
fn seminorm_diagonal(space: &GaussModelSpace, k: usize) -> DVector<f64> {
    DVector::from_iterator(
        space.basis_len(),
        space.indices().iter().map(|alpha| {
            let m = alpha.order() as f64;
            let mut fall = 1.0;
            for j in 0..k {
                fall *= m - j as f64;
            }
            fall.max(0.0)
        }),
    )
}

/// `p = 2`: exact KKT linear algebra driven by iteratively reweighted least
/// squares for the sum-of-norms objective `(sum_k |D^k u|_{L^2})^2`.
pub(crate) fn solve_quadratic(
    mask: &[bool],
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    _opts: &SolverOptions,
) -> Result<VariationalSolution> {
    let b = basis_matrix(space, grid);
    let b_mask = masked_rows(&b, mask);
    let geometry = constraint_geometry(&b_mask);

    let diags: Vec<DVector<f64>> =
        (0..=params.r as usize).map(|k| seminorm_diagonal(space, k)).collect();
    let seminorms = |c: &DVector<f64>| -> Vec<f64> {
        diags
            .iter()
            .map(|d| {
                c.iter()
                    .zip(d.iter())
                    .map(|(ci, di)| di * ci * ci)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    };
    let objective = |c: &DVector<f64>| -> f64 { seminorms(c).iter().sum::<f64>().powi(2) };

    let mut c = geometry.particular.clone();
    let mut value = objective(&c);
    let mut iterations = 0;
    let d_null = geometry.null_basis.ncols();
    if d_null > 0 {
        for iter in 0..300 {
            iterations = iter + 1;
            let s = seminorms(&c);
            let total: f64 = s.iter().sum();
            if total <= 1e-300 {
                break;
            }
            let floor = 1e-10 * total;
            // majorize (sum s_k)^2 by total * sum q_k / s_k and minimize the
            // quadratic surrogate over the feasible affine set
            let mut q_diag = DVector::<f64>::zeros(space.basis_len());
            for (sk, d) in s.iter().zip(&diags) {
                let wk = total / sk.max(floor);
                q_diag += d * wk;
            }
            let n = &geometry.null_basis;
            let qn = DMatrix::from_fn(n.nrows(), n.ncols(), |r, col| q_diag[r] * n[(r, col)]);
            let ntqn = n.transpose() * &qn;
            let rhs = -(qn.transpose() * &geometry.particular);
            let z = match ntqn.clone().cholesky() {
                Some(chol) => chol.solve(&rhs),
                None => super::potential_cone::solve_psd_least_norm(&ntqn, &rhs).ok_or(
                    Error::SolverDidNotConverge {
                        iterations,
                        residual: f64::INFINITY,
                    },
                )?,
            };
            let c_new = geometry.project_feasible(&(&geometry.particular + n * z));
            let value_new = objective(&c_new);
            let change = (value - value_new).abs();
            c = c_new;
            let done = change <= 1e-13 * value.max(1.0);
            value = value_new;
            if done {
                break;
            }
        }
    }

    let residual = (&b_mask * &c)
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0f64, f64::max);
    Ok(VariationalSolution {
        coeffs: c.as_slice().to_vec(),
        value,
        residual,
        iterations,
        converged: true,
    })
}

/// Sparse form of one directional-derivative composition: entries
/// `(dst, src, factor)` so that `(S c)[dst] = factor * c[src]`.
struct ShiftOperator {
    entries: Vec<(usize, usize, f64)>,
    multiplicity: f64,
}

fn shift_operators(space: &GaussModelSpace, order: usize) -> Vec<ShiftOperator> {
    fn multisets(dim: usize, order: usize) -> Vec<Vec<usize>> {
        fn rec(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize, dim: usize, left: usize) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for axis in start..dim {
                cur.push(axis);
                rec(out, cur, axis, dim, left - 1);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut out, &mut Vec::new(), 0, dim, order);
        out
    }

    let dim = space.dim();
    multisets(dim, order)
        .into_iter()
        .map(|tuple| {
            let mut counts = vec![0u32; dim];
            for &axis in &tuple {
                counts[axis] += 1;
            }
            let mut mult = 1.0;
            let mut slot = 0u32;
            for &cnt in &counts {
                for j in 1..=cnt {
                    slot += 1;
                    mult *= slot as f64 / j as f64;
                }
            }
            let mut entries = Vec::new();
            for (dst, beta) in space.indices().iter().enumerate() {
                let mut degrees = beta.degrees().to_vec();
                let mut factor = 1.0;
                for &axis in &tuple {
                    factor *= ((degrees[axis] + 1) as f64).sqrt();
                    degrees[axis] += 1;
                }
                let raised = crate::model::MultiIndex::new(degrees);
                if let Some(src) = space.index_of(&raised) {
                    entries.push((dst, src, factor));
                }
            }
            ShiftOperator {
                entries,
                multiplicity: mult,
            }
        })
        .collect()
}

impl ShiftOperator {
    fn apply(&self, c: &DVector<f64>, out: &mut DVector<f64>) {
        out.fill(0.0);
        for &(dst, src, factor) in &self.entries {
            out[dst] += factor * c[src];
        }
    }

    fn apply_transpose(&self, v: &DVector<f64>, out: &mut DVector<f64>) {
        for &(dst, src, factor) in &self.entries {
            out[src] += factor * v[dst];
        }
    }
}

/// General `p`: penalty continuation on the smooth Sobolev objective with a
/// final exact feasibility projection.
pub(crate) fn solve_general_p(
    mask: &[bool],
    params: &SobolevParams,
    space: &GaussModelSpace,
    grid: &QuadGrid,
    opts: &SolverOptions,
) -> Result<VariationalSolution> {
    let b = basis_matrix(space, grid);
    let b_mask = masked_rows(&b, mask);
    let geometry = constraint_geometry(&b_mask);
    let p = params.p;
    let m = space.basis_len();
    let families: Vec<Vec<ShiftOperator>> =
        (0..=params.r as usize).map(|k| shift_operators(space, k)).collect();

    // F(c) = (sum_k NK_k)^p with NK_k the nodal L^p norm of |D^k u|_HS
    let objective_grad = |c: &DVector<f64>| -> (f64, DVector<f64>) {
        let mut norms = Vec::with_capacity(families.len());
        let mut grads: Vec<DVector<f64>> = Vec::with_capacity(families.len());
        let mut shifted = DVector::<f64>::zeros(m);
        for family in &families {
            let nodal: Vec<DVector<f64>> = family
                .iter()
                .map(|op| {
                    op.apply(c, &mut shifted);
                    &b * &shifted
                })
                .collect();
            let nodes = grid.len();
            let mut hs = vec![0.0f64; nodes];
            for (op, values) in family.iter().zip(&nodal) {
                for j in 0..nodes {
                    hs[j] += op.multiplicity * values[j] * values[j];
                }
            }
            for h in hs.iter_mut() {
                *h = h.sqrt();
            }
            let lp_p: f64 = (0..nodes).map(|j| grid.weight(j) * hs[j].powf(p)).sum();
            let nk = lp_p.powf(1.0 / p);
            norms.push(nk);

            // d(NK_k)/dc = NK_k^{1-p} sum_t mult S_t^T B^T (w hs^{p-2} v_t)
            let mut grad_k = DVector::<f64>::zeros(m);
            if nk > 1e-300 {
                for (op, values) in family.iter().zip(&nodal) {
                    let mut weighted = DVector::<f64>::zeros(nodes);
                    for j in 0..nodes {
                        if hs[j] > 1e-100 {
                            weighted[j] =
                                grid.weight(j) * hs[j].powf(p - 2.0) * values[j] * op.multiplicity;
                        }
                    }
                    let back = b.transpose() * weighted;
                    op.apply_transpose(&back, &mut grad_k);
                }
                grad_k *= nk.powf(1.0 - p);
            }
            grads.push(grad_k);
        }
        let total: f64 = norms.iter().sum();
        let value = total.powf(p);
        let mut grad = DVector::<f64>::zeros(m);
        if total > 1e-300 {
            let outer = p * total.powf(p - 1.0);
            for g in &grads {
                grad += g * outer;
            }
        }
        (value, grad)
    };

    // start from the exact p = 2 optimizer (feasible by construction)
    let warm = solve_quadratic(mask, &SobolevParams::new(params.r, 2.0)?, space, grid, opts)?;
    let mut c = DVector::from_column_slice(&warm.coeffs);
    let budget = (opts.max_iterations / 10).max(500);
    let mut iterations = 0;
    let mut converged = false;
    for stage in 0..5 {
        let rho = 1e2 * 10f64.powi(stage);
        let with_penalty = |c: &DVector<f64>| -> (f64, DVector<f64>) {
            let (val, mut grad) = objective_grad(c);
            let defect = &b_mask * c - DVector::from_element(b_mask.nrows(), 1.0);
            let pen: f64 = defect.iter().map(|d| d * d).sum();
            grad += b_mask.transpose() * defect * (2.0 * rho);
            (val + rho * pen, grad)
        };
        let (mut cur, mut grad) = with_penalty(&c);
        let mut step = 1e-3;
        for _ in 0..budget {
            iterations += 1;
            let mut improved = false;
            for _ in 0..30 {
                let trial = &c - &grad * step;
                let (val, g) = with_penalty(&trial);
                if val < cur - 1e-15 * cur.abs().max(1.0) {
                    let change = cur - val;
                    c = trial;
                    grad = g;
                    cur = val;
                    step *= 1.25;
                    improved = true;
                    if change <= opts.rel_change_tol * cur.abs().max(1e-12) {
                        converged = true;
                    }
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                converged = true;
                break;
            }
            if converged {
                break;
            }
        }
    }

    // exact feasibility projection onto the constraint rows
    c = geometry.project_feasible(&c);
    let (value, _) = objective_grad(&c);
    let residual = (&b_mask * &c)
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0f64, f64::max);
    Ok(VariationalSolution {
        coeffs: c.as_slice().to_vec(),
        value,
        residual,
        iterations,
        converged,
    })
}
