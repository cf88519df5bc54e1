//! Constructive region descriptions: balls, slabs, unions and complements,
//! with membership predicates, signed distances, grid node masks, bounding
//! boxes, box intersection tests and coordinate sections.
//!
//! Signed distances are exact for balls and slabs. For unions the pointwise
//! minimum is exact outside the set but may understate the depth inside;
//! for box tests of complements of unions the containment check is
//! conservative. Both approximations only ever enlarge coverings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuadGrid;

/// Geometric shape of a region.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Slab {
        normal: Vec<f64>,
        offset: f64,
        halfwidth: f64,
    },
    Union {
        members: Vec<RegionKind>,
    },
    Complement {
        inner: Box<RegionKind>,
    },
}

/// A set `U` (or `Sigma`) together with its open-fattening parameter.
///
/// Radii and halfwidths of zero are allowed: they describe the points and
/// hyperplanes whose fattened neighborhoods the experiments constrain.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RegionSpec {
    pub kind: RegionKind,
    /// Open-fattening parameter; `None` defers to the caller's default
    /// (typically one grid spacing).
    pub neighborhood_margin: Option<f64>,
}

impl RegionKind {
    fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            RegionKind::Ball { center, radius } => {
                let d: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                d - radius
            }
            RegionKind::Slab {
                normal,
                offset,
                halfwidth,
            } => {
                let proj: f64 = x.iter().zip(normal).map(|(a, b)| a * b).sum();
                (proj - offset).abs() - halfwidth
            }
            RegionKind::Union { members } => members
                .iter()
                .map(|m| m.signed_distance(x))
                .fold(f64::INFINITY, f64::min),
            RegionKind::Complement { inner } => -inner.signed_distance(x),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            RegionKind::Ball { center, radius } => {
                if center.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: center.len(),
                    });
                }
                if !(*radius >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "ball radius must be >= 0, got {radius}"
                    )));
                }
                Ok(())
            }
            RegionKind::Slab {
                normal,
                offset: _,
                halfwidth,
            } => {
                if normal.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: normal.len(),
                    });
                }
                let norm: f64 = normal.iter().map(|c| c * c).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "slab normal must be unit length, got |n| = {norm}"
                    )));
                }
                if !(*halfwidth >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "slab halfwidth must be >= 0, got {halfwidth}"
                    )));
                }
                Ok(())
            }
            RegionKind::Union { members } => members.iter().try_for_each(|m| m.validate(dim)),
            RegionKind::Complement { inner } => inner.validate(dim),
        }
    }

    /// Does the region meet the closed box `[lo, hi]`? Exact for balls and
    /// slabs; conservative (may report true) through complements of unions.
    fn intersects_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        match self {
            RegionKind::Ball { center, radius } => {
                let mut d2 = 0.0;
                for i in 0..center.len() {
                    let c = center[i].clamp(lo[i], hi[i]);
                    d2 += (c - center[i]) * (c - center[i]);
                }
                d2 <= radius * radius
            }
            RegionKind::Slab {
                normal,
                offset,
                halfwidth,
            } => {
                let (mut pmin, mut pmax) = (0.0, 0.0);
                for i in 0..normal.len() {
                    if normal[i] >= 0.0 {
                        pmin += normal[i] * lo[i];
                        pmax += normal[i] * hi[i];
                    } else {
                        pmin += normal[i] * hi[i];
                        pmax += normal[i] * lo[i];
                    }
                }
                pmin <= offset + halfwidth && pmax >= offset - halfwidth
            }
            RegionKind::Union { members } => members.iter().any(|m| m.intersects_box(lo, hi)),
            RegionKind::Complement { inner } => !inner.contains_box(lo, hi),
        }
    }

    /// Is the closed box `[lo, hi]` inside the region? Exact for balls,
    /// slabs, complements; for unions only member-wise containment is
    /// checked, which may under-report.
    fn contains_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        match self {
            RegionKind::Ball { center, radius } => {
                let mut far2 = 0.0;
                for i in 0..center.len() {
                    let d = (lo[i] - center[i]).abs().max((hi[i] - center[i]).abs());
                    far2 += d * d;
                }
                far2 <= radius * radius
            }
            RegionKind::Slab {
                normal,
                offset,
                halfwidth,
            } => {
                let (mut pmin, mut pmax) = (0.0, 0.0);
                for i in 0..normal.len() {
                    if normal[i] >= 0.0 {
                        pmin += normal[i] * lo[i];
                        pmax += normal[i] * hi[i];
                    } else {
                        pmin += normal[i] * hi[i];
                        pmax += normal[i] * lo[i];
                    }
                }
                pmin >= offset - halfwidth && pmax <= offset + halfwidth
            }
            RegionKind::Union { members } => members.iter().any(|m| m.contains_box(lo, hi)),
            RegionKind::Complement { inner } => !inner.intersects_box(lo, hi),
        }
    }

    /// Per-axis interval bounds, when derivable.
    fn axis_bounds(&self, dim: usize) -> Vec<Option<(f64, f64)>> {
        match self {
            RegionKind::Ball { center, radius } => center
                .iter()
                .map(|c| Some((c - radius, c + radius)))
                .collect(),
            RegionKind::Slab {
                normal,
                offset,
                halfwidth,
            } => (0..dim)
                .map(|i| {
                    if (normal[i].abs() - 1.0).abs() < 1e-12 {
                        let sign = normal[i].signum();
                        Some((
                            (offset - halfwidth) * sign,
                            (offset + halfwidth) * sign,
                        ))
                        .map(|(a, b)| (a.min(b), a.max(b)))
                    } else {
                        None
                    }
                })
                .collect(),
            RegionKind::Union { members } => {
                if members.is_empty() {
                    // the empty set: degenerate bounds
                    return vec![Some((0.0, 0.0)); dim];
                }
                let mut bounds = members[0].axis_bounds(dim);
                for m in &members[1..] {
                    let mb = m.axis_bounds(dim);
                    for i in 0..dim {
                        bounds[i] = match (bounds[i], mb[i]) {
                            (Some((alo, ahi)), Some((blo, bhi))) => {
                                Some((alo.min(blo), ahi.max(bhi)))
                            }
                            _ => None,
                        };
                    }
                }
                bounds
            }
            RegionKind::Complement { .. } => vec![None; dim],
        }
    }

    /// Restrict to the affine subspace `{ base + sum_i y_i basis_i }` with an
    /// orthonormal `basis`; the result lives in the `y` coordinates.
    fn section_affine(&self, basis: &[Vec<f64>], base: &[f64]) -> RegionKind {
        let m = basis.len();
        match self {
            RegionKind::Ball { center, radius } => {
                // |base + B y - c|^2 = |y - B^T(c - base)|^2 + |orthogonal part|^2
                let diff: Vec<f64> = center.iter().zip(base).map(|(c, z)| c - z).collect();
                let proj: Vec<f64> = basis
                    .iter()
                    .map(|b| b.iter().zip(&diff).map(|(bi, di)| bi * di).sum())
                    .collect();
                let diff2: f64 = diff.iter().map(|d| d * d).sum();
                let proj2: f64 = proj.iter().map(|p| p * p).sum();
                let r2 = radius * radius - (diff2 - proj2).max(0.0);
                if r2 < 0.0 {
                    return RegionKind::Union { members: vec![] };
                }
                RegionKind::Ball {
                    center: proj,
                    radius: r2.sqrt(),
                }
            }
            RegionKind::Slab {
                normal,
                offset,
                halfwidth,
            } => {
                // <base + B y, n> = <y, B^T n> + <base, n>
                let sub: Vec<f64> = basis
                    .iter()
                    .map(|b| b.iter().zip(normal).map(|(bi, ni)| bi * ni).sum())
                    .collect();
                let shift: f64 = base.iter().zip(normal).map(|(z, n)| z * n).sum();
                let scale: f64 = sub.iter().map(|c| c * c).sum::<f64>().sqrt();
                let centered = offset - shift;
                if scale < 1e-12 {
                    // the normal is orthogonal to the subspace
                    return if centered.abs() <= *halfwidth {
                        full_region(m)
                    } else {
                        RegionKind::Union { members: vec![] }
                    };
                }
                RegionKind::Slab {
                    normal: sub.iter().map(|c| c / scale).collect(),
                    offset: centered / scale,
                    halfwidth: halfwidth / scale,
                }
            }
            RegionKind::Union { members } => RegionKind::Union {
                members: members
                    .iter()
                    .map(|m| m.section_affine(basis, base))
                    .collect(),
            },
            RegionKind::Complement { inner } => RegionKind::Complement {
                inner: Box::new(inner.section_affine(basis, base)),
            },
        }
    }
}

fn full_region(dim: usize) -> RegionKind {
    let _ = dim;
    RegionKind::Complement {
        inner: Box::new(RegionKind::Union { members: vec![] }),
    }
}

impl RegionSpec {
    pub fn new(kind: RegionKind) -> Self {
        RegionSpec {
            kind,
            neighborhood_margin: None,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.neighborhood_margin = Some(margin);
        self
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Self::new(RegionKind::Ball { center, radius })
    }

    pub fn slab(normal: Vec<f64>, offset: f64, halfwidth: f64) -> Self {
        Self::new(RegionKind::Slab {
            normal,
            offset,
            halfwidth,
        })
    }

    pub fn union(members: Vec<RegionSpec>) -> Self {
        Self::new(RegionKind::Union {
            members: members.into_iter().map(|m| m.kind).collect(),
        })
    }

    pub fn complement(inner: RegionSpec) -> Self {
        Self::new(RegionKind::Complement {
            inner: Box::new(inner.kind),
        })
    }

    pub fn empty() -> Self {
        Self::new(RegionKind::Union { members: vec![] })
    }

    pub fn full() -> Self {
        Self::new(full_region(0))
    }

    /// A single point, as a ball of radius zero.
    pub fn point(center: Vec<f64>) -> Self {
        Self::ball(center, 0.0)
    }

    /// The hyperplane `{x_axis = offset}`, as a slab of halfwidth zero.
    pub fn hyperplane(dim: usize, axis: usize, offset: f64) -> Self {
        let mut normal = vec![0.0; dim];
        normal[axis] = 1.0;
        Self::slab(normal, offset, 0.0)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Some(m) = self.neighborhood_margin {
            if !(m >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "neighborhood margin must be >= 0, got {m}"
                )));
            }
        }
        self.kind.validate(dim)
    }

    /// Signed distance to the region boundary (negative inside).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        self.kind.signed_distance(x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) <= 0.0
    }

    /// Membership in the margin-fattened region.
    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        self.signed_distance(x) <= margin
    }

    /// Mask of grid nodes inside the margin-fattened region.
    pub fn node_mask(&self, grid: &QuadGrid, margin: f64) -> Vec<bool> {
        (0..grid.len())
            .map(|j| self.contains_with_margin(grid.node(j), margin))
            .collect()
    }

    pub fn intersects_box(&self, lo: &[f64], hi: &[f64], margin: f64) -> bool {
        if margin == 0.0 {
            return self.kind.intersects_box(lo, hi);
        }
        let lo_m: Vec<f64> = lo.iter().map(|v| v - margin).collect();
        let hi_m: Vec<f64> = hi.iter().map(|v| v + margin).collect();
        self.kind.intersects_box(&lo_m, &hi_m)
    }

    pub fn axis_bounds(&self, dim: usize) -> Vec<Option<(f64, f64)>> {
        self.kind.axis_bounds(dim)
    }

    /// Zero-volume sets (points, hyperplanes) that need fattening before a
    /// grid can see them.
    pub fn is_thin(&self) -> bool {
        fn thin(kind: &RegionKind) -> bool {
            match kind {
                RegionKind::Ball { radius, .. } => *radius == 0.0,
                RegionKind::Slab { halfwidth, .. } => *halfwidth == 0.0,
                RegionKind::Union { members } => {
                    !members.is_empty() && members.iter().all(thin)
                }
                RegionKind::Complement { .. } => false,
            }
        }
        thin(&self.kind)
    }

    /// Section by the affine subspace `{ base + sum_i y_i basis_i }` spanned
    /// by an orthonormal `basis`; the result lives in the `y` coordinates.
    pub fn section_affine(&self, basis: &[Vec<f64>], base: &[f64]) -> RegionSpec {
        RegionSpec {
            kind: self.kind.section_affine(basis, base),
            neighborhood_margin: self.neighborhood_margin,
        }
    }

    /// Short deterministic label used in CSV rows.
    pub fn label(&self) -> String {
        fn lab(kind: &RegionKind) -> String {
            match kind {
                RegionKind::Ball { center, radius } => format!(
                    "ball(c={:?},r={})",
                    center.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>(),
                    radius
                ),
                RegionKind::Slab {
                    normal,
                    offset,
                    halfwidth,
                } => format!(
                    "slab(n={:?},o={},h={})",
                    normal.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>(),
                    offset,
                    halfwidth
                ),
                RegionKind::Union { members } => {
                    if members.is_empty() {
                        "empty".to_string()
                    } else {
                        format!(
                            "union[{}]",
                            members.iter().map(lab).collect::<Vec<_>>().join(";")
                        )
                    }
                }
                RegionKind::Complement { inner } => {
                    if matches!(**inner, RegionKind::Union { ref members } if members.is_empty()) {
                        "full".to_string()
                    } else {
                        format!("complement[{}]", lab(inner))
                    }
                }
            }
        }
        lab(&self.kind)
    }
}
