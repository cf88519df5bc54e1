//! Finite-dimensional Gaussian model space: `R^n` with the standard Gaussian
//! measure, the orthonormal Hermite basis indexed by multi-indices, tensor
//! Gauss-Hermite quadrature grids, and truncated Hermite expansions.
//!
//! Expansions are truncated by *total* degree `|alpha| <= K`; this matches the
//! eigenvalue structure `exp(-t|alpha|)` of the Ornstein-Uhlenbeck semigroup
//! and keeps the multi-index count polynomial in `K`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vector of nonnegative Hermite degrees, one per coordinate axis.
///
/// Ordered graded-lexicographically (first by total order, then
/// lexicographically by degrees) so coefficient vectors are reproducible
/// byte-for-byte.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(degrees: Vec<u32>) -> Self {
        MultiIndex(degrees)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Unit multi-index `e_axis` scaled to `degree`.
    pub fn axis(dim: usize, axis: usize, degree: u32) -> Self {
        let mut d = vec![0; dim];
        d[axis] = degree;
        MultiIndex(d)
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total order `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `alpha + e_i`.
    pub fn raised(&self, axis: usize) -> Self {
        let mut d = self.0.clone();
        d[axis] += 1;
        MultiIndex(d)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    // graded-lex: total order first, then lexicographic on degrees
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Normalized probabilists' Hermite value `h_k(x)`.
///
/// `h_0 = 1`, `h_1(x) = x`, `h_{k+1}(x) = (x h_k(x) - sqrt(k) h_{k-1}(x)) / sqrt(k+1)`;
/// the family is orthonormal in `L^2` of the standard Gaussian.
pub fn hermite_eval(k: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = x;
    for j in 1..k {
        let jf = j as f64;
        let next = (x * cur - jf.sqrt() * prev) / (jf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// All values `h_0(x) .. h_max(x)` in one recurrence pass.
pub fn hermite_values(max_degree: u32, x: f64) -> Vec<f64> {
    let mut vals = Vec::with_capacity(max_degree as usize + 1);
    vals.push(1.0);
    if max_degree == 0 {
        return vals;
    }
    vals.push(x);
    for j in 1..max_degree {
        let jf = j as f64;
        let next = (x * vals[j as usize] - jf.sqrt() * vals[j as usize - 1]) / (jf + 1.0).sqrt();
        vals.push(next);
    }
    vals
}

/// Finite-dimensional Gaussian model space: ambient dimension, maximal total
/// Hermite degree `K` and per-axis quadrature order `Q`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussModelSpace {
    dim: usize,
    max_degree: u32,
    quad_order: usize,
    #[serde(skip)]
    indices: Vec<MultiIndex>,
}

impl PartialEq for GaussModelSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.max_degree == other.max_degree
            && self.quad_order == other.quad_order
    }
}

impl GaussModelSpace {
    /// Requires `Q >= K + 1` so quadrature is exact on products of basis
    /// polynomials up to total degree `K`.
    pub fn new(dim: usize, max_degree: u32, quad_order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if quad_order < max_degree as usize + 1 {
            return Err(Error::InvalidParameter(format!(
                "quadrature order {quad_order} must be >= max degree {max_degree} + 1"
            )));
        }
        let indices = enumerate_graded_lex(dim, max_degree);
        Ok(GaussModelSpace {
            dim,
            max_degree,
            quad_order,
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Multi-indices with `|alpha| <= K` in graded-lex order.
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn basis_len(&self) -> usize {
        self.indices.len()
    }

    /// Position of `alpha` in the graded-lex enumeration.
    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.indices.binary_search_by(|probe| probe.cmp(alpha)).ok()
    }
}

fn enumerate_graded_lex(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    for total in 0..=max_degree {
        push_compositions(&mut out, &mut current, 0, total);
    }
    out
}

fn push_compositions(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, axis: usize, rest: u32) {
    if axis + 1 == current.len() {
        current[axis] = rest;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for d in 0..=rest {
        current[axis] = d;
        push_compositions(out, current, axis + 1, rest - d);
    }
    current[axis] = 0;
}

/// Tensor Gauss-Hermite rule for the standard Gaussian weight
/// `(2 pi)^{-1/2} exp(-x^2/2)` per axis.
#[derive(Clone, Debug)]
pub struct QuadGrid {
    dim: usize,
    axis_nodes: Vec<f64>,
    axis_weights: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

const MAX_STABLE_ORDER: usize = 256;

/// 1-D Gauss-Hermite rule (probabilists' weight) of the given order.
///
/// Nodes are eigenvalues of the symmetric tridiagonal Jacobi matrix of the
/// three-term recurrence; weights come from the first eigenvector components.
pub fn gauss_hermite_rule(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::InvalidParameter("quadrature order must be >= 1".into()));
    }
    if order > MAX_STABLE_ORDER {
        return Err(Error::UnstableQuadrature {
            order,
            detail: format!("orders above {MAX_STABLE_ORDER} are not supported"),
        });
    }
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for i in 1..order {
        let b = (i as f64).sqrt();
        jacobi[(i - 1, i)] = b;
        jacobi[(i, i - 1)] = b;
    }
    let eigen = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let v0 = eigen.eigenvectors[(0, i)];
            (eigen.eigenvalues[i], v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut nodes: Vec<f64> = rule.iter().map(|r| r.0).collect();
    let mut weights: Vec<f64> = rule.iter().map(|r| r.1).collect();
    // the rule is symmetric; enforce it exactly (odd orders get a node at 0)
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }

    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 || weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::UnstableQuadrature {
            order,
            detail: format!("weights failed validation (sum {sum:.17e})"),
        });
    }
    let mean: f64 = nodes.iter().zip(&weights).map(|(x, w)| x * w).sum();
    // the second moment is representable only from exactness degree 2Q-1 >= 2
    let var: f64 = if order >= 2 {
        nodes.iter().zip(&weights).map(|(x, w)| x * x * w).sum()
    } else {
        1.0
    };
    if mean.abs() > 1e-10 || (var - 1.0).abs() > 1e-10 {
        return Err(Error::UnstableQuadrature {
            order,
            detail: format!("moment check failed (mean {mean:.3e}, var {var:.17e})"),
        });
    }
    Ok((nodes, weights))
}

/// Build the tensor quadrature grid of `space`.
pub fn build_grid(space: &GaussModelSpace) -> Result<QuadGrid> {
    let (axis_nodes, axis_weights) = gauss_hermite_rule(space.quad_order())?;
    let n = space.dim();
    let q = axis_nodes.len();
    let count = q.pow(n as u32);
    let mut nodes = Vec::with_capacity(count * n);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; n];
    for _ in 0..count {
        let mut w = 1.0;
        for axis in 0..n {
            nodes.push(axis_nodes[idx[axis]]);
            w *= axis_weights[idx[axis]];
        }
        weights.push(w);
        // odometer increment over the tensor index
        for axis in (0..n).rev() {
            idx[axis] += 1;
            if idx[axis] < q {
                break;
            }
            idx[axis] = 0;
        }
    }
    Ok(QuadGrid {
        dim: n,
        axis_nodes,
        axis_weights,
        nodes,
        weights,
    })
}

impl QuadGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, j: usize) -> &[f64] {
        &self.nodes[j * self.dim..(j + 1) * self.dim]
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn axis_nodes(&self) -> &[f64] {
        &self.axis_nodes
    }

    pub fn axis_weights(&self) -> &[f64] {
        &self.axis_weights
    }

    /// Smallest gap between consecutive 1-D nodes; the scale used for default
    /// neighborhood margins.
    pub fn min_axis_gap(&self) -> f64 {
        if self.axis_nodes.len() < 2 {
            return 1.0;
        }
        self.axis_nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Integrate a nodal vector against the grid weights.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// `(sum_j w_j |v_j|^p)^{1/p}`.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        let s: f64 = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v.abs().powf(p))
            .sum();
        s.powf(1.0 / p)
    }
}

/// Truncated Hermite expansion: coefficients over `|alpha| <= K` in graded-lex
/// order. The computational representative of a smooth cylindrical function.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteExpansion {
    space: GaussModelSpace,
    coeffs: Vec<f64>,
}

impl HermiteExpansion {
    pub fn new(space: GaussModelSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.basis_len() {
            return Err(Error::DimensionMismatch {
                expected: space.basis_len(),
                got: coeffs.len(),
            });
        }
        Ok(HermiteExpansion { space, coeffs })
    }

    pub fn zero(space: &GaussModelSpace) -> Self {
        HermiteExpansion {
            space: space.clone(),
            coeffs: vec![0.0; space.basis_len()],
        }
    }

    pub fn constant(space: &GaussModelSpace, value: f64) -> Self {
        let mut u = Self::zero(space);
        u.coeffs[0] = value;
        u
    }

    /// The basis element `h_alpha`.
    pub fn basis_element(space: &GaussModelSpace, alpha: &MultiIndex) -> Result<Self> {
        let pos = space.index_of(alpha).ok_or_else(|| {
            Error::InvalidParameter(format!("multi-index {alpha:?} outside degree cutoff"))
        })?;
        let mut u = Self::zero(space);
        u.coeffs[pos] = 1.0;
        Ok(u)
    }

    pub fn space(&self) -> &GaussModelSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.space
            .index_of(alpha)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// Apply a multiplier depending on the total order `|alpha|`.
    pub fn map_by_order(&self, f: impl Fn(u32) -> f64) -> Self {
        let coeffs = self
            .space
            .indices()
            .iter()
            .zip(&self.coeffs)
            .map(|(alpha, c)| f(alpha.order()) * c)
            .collect();
        HermiteExpansion {
            space: self.space.clone(),
            coeffs,
        }
    }

    /// Pointwise evaluation `sum_alpha c_alpha prod_i h_{alpha_i}(x_i)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: x.len(),
            });
        }
        let tables: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| hermite_values(self.space.max_degree(), xi))
            .collect();
        let mut acc = 0.0;
        for (alpha, c) in self.space.indices().iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            let mut basis = 1.0;
            for (axis, &deg) in alpha.degrees().iter().enumerate() {
                basis *= tables[axis][deg as usize];
            }
            acc += c * basis;
        }
        Ok(acc)
    }

    /// Nodal values on a grid (one basis pass per node).
    pub fn nodal_values(&self, grid: &QuadGrid) -> Result<Vec<f64>> {
        if grid.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: grid.dim(),
            });
        }
        (0..grid.len()).map(|j| self.eval(grid.node(j))).collect()
    }

    /// `l^2` norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        HermiteExpansion {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn to_record(&self) -> ExpansionRecord {
        ExpansionRecord {
            n: self.space.dim(),
            k: self.space.max_degree(),
            entries: self
                .space
                .indices()
                .iter()
                .zip(&self.coeffs)
                .map(|(alpha, &c)| (alpha.degrees().to_vec(), c))
                .collect(),
        }
    }

    pub fn from_record(record: &ExpansionRecord, quad_order: usize) -> Result<Self> {
        let space = GaussModelSpace::new(record.n, record.k, quad_order)?;
        let mut coeffs = vec![0.0; space.basis_len()];
        for (degrees, c) in &record.entries {
            let alpha = MultiIndex::new(degrees.clone());
            let pos = space.index_of(&alpha).ok_or_else(|| {
                Error::InvalidParameter(format!("entry {degrees:?} outside degree cutoff"))
            })?;
            coeffs[pos] = *c;
        }
        HermiteExpansion::new(space, coeffs)
    }
}

/// JSON wire form of an expansion: `{n, K, entries: [[degrees...], coeff]}`
/// with entries in graded-lex order.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExpansionRecord {
    pub n: usize,
    pub k: u32,
    pub entries: Vec<(Vec<u32>, f64)>,
}

/// Project a pointwise function onto the truncated Hermite basis:
/// `c_alpha = sum_j w_j f(x_j) h_alpha(x_j)`.
///
/// Exact (a round-trip identity at the nodes) for polynomials of total degree
/// up to `K` because the quadrature integrates products of basis elements
/// exactly.
pub fn expand<F>(f: F, space: &GaussModelSpace, grid: &QuadGrid) -> HermiteExpansion
where
    F: Fn(&[f64]) -> f64,
{
    let values: Vec<f64> = (0..grid.len()).map(|j| f(grid.node(j))).collect();
    expand_nodal(&values, space, grid)
}

/// Projection of a vector of nodal values.
pub fn expand_nodal(values: &[f64], space: &GaussModelSpace, grid: &QuadGrid) -> HermiteExpansion {
    assert_eq!(values.len(), grid.len(), "nodal value count must match grid");
    let m = space.basis_len();
    let mut coeffs = vec![0.0; m];
    let max_degree = space.max_degree();
    for j in 0..grid.len() {
        let fw = values[j] * grid.weight(j);
        if fw == 0.0 {
            continue;
        }
        let x = grid.node(j);
        let tables: Vec<Vec<f64>> = x.iter().map(|&xi| hermite_values(max_degree, xi)).collect();
        for (pos, alpha) in space.indices().iter().enumerate() {
            let mut basis = 1.0;
            for (axis, &deg) in alpha.degrees().iter().enumerate() {
                basis *= tables[axis][deg as usize];
            }
            coeffs[pos] += fw * basis;
        }
    }
    HermiteExpansion {
        space: space.clone(),
        coeffs,
    }
}

/// Node-by-basis matrix `B[j, a] = prod_i h_{alpha_a(i)}(x_j(i))`.
///
/// With `W = diag(weights)` the orthonormality identity `B^T W B = I` holds to
/// quadrature exactness; most capacity solvers are assembled from it.
pub fn basis_matrix(space: &GaussModelSpace, grid: &QuadGrid) -> DMatrix<f64> {
    let rows = grid.len();
    let cols = space.basis_len();
    let max_degree = space.max_degree();
    let mut mat = DMatrix::<f64>::zeros(rows, cols);
    for j in 0..rows {
        let x = grid.node(j);
        let tables: Vec<Vec<f64>> = x.iter().map(|&xi| hermite_values(max_degree, xi)).collect();
        for (pos, alpha) in space.indices().iter().enumerate() {
            let mut basis = 1.0;
            for (axis, &deg) in alpha.degrees().iter().enumerate() {
                basis *= tables[axis][deg as usize];
            }
            mat[(j, pos)] = basis;
        }
    }
    mat
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_low_degrees() {
        assert_abs_diff_eq!(hermite_eval(0, 3.7), 1.0);
        assert_abs_diff_eq!(hermite_eval(1, 2.0), 2.0);
        // h_2(x) = (x^2 - 1)/sqrt(2) vanishes at x = 1
        assert_abs_diff_eq!(hermite_eval(2, 1.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hermite_eval(2, 2.0), 3.0 / 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn one_point_rule_is_the_mean() {
        let space = GaussModelSpace::new(1, 0, 1).unwrap();
        let grid = build_grid(&space).unwrap();
        assert_eq!(grid.len(), 1);
        assert_abs_diff_eq!(grid.node(0)[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(grid.weight(0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_point_rule_hits_h2_roots() {
        // roots of h_2, i.e. x^2 - 1 = 0, with equal weights
        let space = GaussModelSpace::new(1, 1, 2).unwrap();
        let grid = build_grid(&space).unwrap();
        assert_abs_diff_eq!(grid.node(0)[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(grid.node(1)[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(grid.weight(0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(grid.weight(1), 0.5, epsilon = 1e-14);
        let second: f64 = (0..2).map(|j| grid.weight(j) * grid.node(j)[0].powi(2)).sum();
        assert_abs_diff_eq!(second, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_rule_two_by_two() {
        let space = GaussModelSpace::new(2, 1, 2).unwrap();
        let grid = build_grid(&space).unwrap();
        assert_eq!(grid.len(), 4);
        for j in 0..4 {
            assert_abs_diff_eq!(grid.weight(j), 0.25, epsilon = 1e-14);
            assert_abs_diff_eq!(grid.node(j)[0].abs(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(grid.node(j)[1].abs(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn grid_moments_and_exactness() {
        let space = GaussModelSpace::new(1, 10, 12).unwrap();
        let grid = build_grid(&space).unwrap();
        assert_abs_diff_eq!(grid.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        // E[x^{2m}] = (2m-1)!! up to polynomial exactness degree 2Q-1 = 23
        let mut expected = 1.0;
        for m in 1..=11usize {
            expected *= (2 * m - 1) as f64;
            let approx: f64 = (0..grid.len())
                .map(|j| grid.weight(j) * grid.node(j)[0].powi(2 * m as i32))
                .sum();
            assert!(
                (approx - expected).abs() <= 1e-10 * expected.max(1.0),
                "moment 2m={} approx={approx} expected={expected}",
                2 * m
            );
        }
    }

    #[test]
    fn orthonormality_on_grid() {
        let space = GaussModelSpace::new(2, 5, 8).unwrap();
        let grid = build_grid(&space).unwrap();
        let b = basis_matrix(&space, &grid);
        for a in 0..space.basis_len() {
            for c in 0..space.basis_len() {
                let mut acc = 0.0;
                for j in 0..grid.len() {
                    acc += grid.weight(j) * b[(j, a)] * b[(j, c)];
                }
                let expected = if a == c { 1.0 } else { 0.0 };
                assert!(
                    (acc - expected).abs() < 1e-10,
                    "gram[{a},{c}] = {acc}, expected {expected}"
                );
            }
        }
    }

    #[test]
    fn expand_constant_and_coordinate() {
        let space = GaussModelSpace::new(1, 6, 8).unwrap();
        let grid = build_grid(&space).unwrap();

        let one = expand(|_| 1.0, &space, &grid);
        assert_abs_diff_eq!(one.coeff(&MultiIndex::new(vec![0])), 1.0, epsilon = 1e-12);
        for (alpha, &c) in space.indices().iter().zip(one.coeffs()) {
            if alpha.order() > 0 {
                assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
            }
        }

        let coord = expand(|x| x[0], &space, &grid);
        assert_abs_diff_eq!(coord.coeff(&MultiIndex::new(vec![1])), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coord.coeff(&MultiIndex::new(vec![0])), 0.0, epsilon = 1e-12);

        // x^2 = 1 + sqrt(2) h_2(x)
        let sq = expand(|x| x[0] * x[0], &space, &grid);
        assert_abs_diff_eq!(sq.coeff(&MultiIndex::new(vec![0])), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            sq.coeff(&MultiIndex::new(vec![2])),
            2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(sq.eval(&[2.0]).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coord.eval(&[0.5]).unwrap(), 0.5, epsilon = 1e-13);
    }

    #[test]
    fn parseval_at_nodes() {
        let space = GaussModelSpace::new(2, 4, 6).unwrap();
        let grid = build_grid(&space).unwrap();
        let f = |x: &[f64]| 1.0 + x[0] * x[1] + 0.3 * x[0].powi(3) - x[1].powi(2);
        let u = expand(f, &space, &grid);
        let coeff_sq: f64 = u.coeffs().iter().map(|c| c * c).sum();
        let nodal_sq: f64 = (0..grid.len())
            .map(|j| grid.weight(j) * f(grid.node(j)).powi(2))
            .sum();
        assert_abs_diff_eq!(coeff_sq, nodal_sq, epsilon = 1e-10);
    }

    #[test]
    fn graded_lex_enumeration_is_sorted_and_complete() {
        let space = GaussModelSpace::new(3, 4, 5).unwrap();
        let idx = space.indices();
        // count = C(3+4, 3)
        assert_eq!(idx.len(), 35);
        for w in idx.windows(2) {
            assert!(w[0] < w[1], "enumeration must be strictly graded-lex");
        }
        for (pos, alpha) in idx.iter().enumerate() {
            assert_eq!(space.index_of(alpha), Some(pos));
        }
    }

    #[test]
    fn record_roundtrip() {
        let space = GaussModelSpace::new(2, 3, 4).unwrap();
        let grid = build_grid(&space).unwrap();
        let u = expand(|x| 0.5 + x[0] - 2.0 * x[1] * x[0], &space, &grid);
        let rec = u.to_record();
        let json = serde_json::to_string(&rec).unwrap();
        let back: ExpansionRecord = serde_json::from_str(&json).unwrap();
        let v = HermiteExpansion::from_record(&back, space.quad_order()).unwrap();
        for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn invalid_spaces_are_rejected() {
        assert!(GaussModelSpace::new(0, 2, 4).is_err());
        assert!(GaussModelSpace::new(1, 4, 4).is_err());
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_hermite_rule(MAX_STABLE_ORDER + 1).is_err());
    }

    #[test]
    fn eval_dimension_mismatch() {
        let space = GaussModelSpace::new(2, 2, 3).unwrap();
        let u = HermiteExpansion::constant(&space, 1.0);
        assert!(u.eval(&[0.0]).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn expand_eval_is_identity_on_expansions(seed in 0u64..500) {
                // any expansion supported in |alpha| <= K survives a
                // re-expansion round trip
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let space = GaussModelSpace::new(2, 3, 5).unwrap();
                let grid = build_grid(&space).unwrap();
                let coeffs: Vec<f64> =
                    (0..space.basis_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let u = HermiteExpansion::new(space.clone(), coeffs).unwrap();
                let v = expand(|x| u.eval(x).unwrap(), &space, &grid);
                for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
                    prop_assert!((a - b).abs() < 1e-10);
                }
            }

            #[test]
            fn graded_lex_round(order_a in 0u32..3, order_b in 0u32..2) {
                let space = GaussModelSpace::new(2, 4, 5).unwrap();
                let a = MultiIndex::new(vec![order_a, order_b]);
                let pos = space.index_of(&a).unwrap();
                prop_assert_eq!(&space.indices()[pos], &a);
            }
        }
    }
}
