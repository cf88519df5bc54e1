//! Experiment configuration: a TOML file with one section per concern, flag
//! overrides winning over file values. Unknown fields are rejected and all
//! defaults are materialized into the stored copy of the config so a run can
//! be reproduced from its artifacts alone.

use serde::{Deserialize, Serialize};

use oucap::capacity::{CapacityDefinition, SolverOptions};
use oucap::region::{RegionKind, RegionSpec};

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for every randomized component; the `--seed` flag wins.
    pub seed: Option<u64>,
    pub space: Option<SpaceConfig>,
    pub sobolev: Option<SobolevConfig>,
    pub region: Option<RegionConfig>,
    pub solver: Option<SolverConfig>,
    pub equivalence: Option<EquivalenceConfig>,
    pub truncation_bound: Option<TruncationBoundConfig>,
    pub multest: Option<MultestConfig>,
    pub hausdorff: Option<HausdorffConfig>,
    pub hitting: Option<HittingConfig>,
    pub kakutani: Option<KakutaniConfig>,
    pub uniqueness: Option<UniquenessConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub dim: usize,
    pub max_degree: u32,
    pub quad_order: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevConfig {
    pub r: u32,
    pub p: f64,
}

/// Flat region description; `kind` selects the variant.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub kind: String,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub normal: Option<Vec<f64>>,
    #[serde(default)]
    pub offset: Option<f64>,
    #[serde(default)]
    pub halfwidth: Option<f64>,
    #[serde(default)]
    pub margin: Option<f64>,
}

impl RegionConfig {
    pub fn to_region(&self) -> Result<RegionSpec, String> {
        let kind = match self.kind.as_str() {
            "ball" => RegionKind::Ball {
                center: self.center.clone().ok_or("ball needs `center`")?,
                radius: self.radius.ok_or("ball needs `radius`")?,
            },
            "slab" => RegionKind::Slab {
                normal: self.normal.clone().ok_or("slab needs `normal`")?,
                offset: self.offset.ok_or("slab needs `offset`")?,
                halfwidth: self.halfwidth.ok_or("slab needs `halfwidth`")?,
            },
            "point" => RegionKind::Ball {
                center: self.center.clone().ok_or("point needs `center`")?,
                radius: 0.0,
            },
            "empty" => RegionKind::Union { members: vec![] },
            "full" => RegionKind::Complement {
                inner: Box::new(RegionKind::Union { members: vec![] }),
            },
            other => return Err(format!("unknown region kind `{other}`")),
        };
        let mut region = RegionSpec::new(kind);
        region.neighborhood_margin = self.margin;
        Ok(region)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_definition")]
    pub definition: String,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_rel_change")]
    pub rel_change_tol: f64,
    /// Optional quadrature orders for a refinement trend.
    #[serde(default)]
    pub refinement_orders: Option<Vec<usize>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            definition: default_definition(),
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
            rel_change_tol: default_rel_change(),
            refinement_orders: None,
        }
    }
}

fn default_definition() -> String {
    "potential".to_string()
}
fn default_max_iterations() -> usize {
    SolverOptions::default().max_iterations
}
fn default_tolerance() -> f64 {
    SolverOptions::default().tolerance
}
fn default_rel_change() -> f64 {
    SolverOptions::default().rel_change_tol
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            rel_change_tol: self.rel_change_tol,
        }
    }

    pub fn definition(&self) -> Result<CapacityDefinition, String> {
        match self.definition.as_str() {
            "potential" => Ok(CapacityDefinition::Potential),
            "variational" => Ok(CapacityDefinition::Variational),
            other => Err(format!(
                "unknown capacity definition `{other}` (expected `potential` or `variational`)"
            )),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    #[serde(default = "default_dims_12")]
    pub dims: Vec<usize>,
    #[serde(default = "default_radii")]
    pub ball_radii: Vec<f64>,
    #[serde(default = "default_radii")]
    pub slab_widths: Vec<f64>,
    #[serde(default = "default_rs")]
    pub rs: Vec<u32>,
    #[serde(default = "default_ps")]
    pub ps: Vec<f64>,
    #[serde(default = "default_equiv_margin")]
    pub margin: f64,
    #[serde(default = "default_equiv_degree")]
    pub max_degree: u32,
    #[serde(default = "default_equiv_orders")]
    pub quad_orders: Vec<usize>,
}

fn default_dims_12() -> Vec<usize> {
    vec![1, 2]
}
fn default_radii() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_rs() -> Vec<u32> {
    vec![1, 2]
}
fn default_ps() -> Vec<f64> {
    vec![1.5, 2.0, 3.0]
}
fn default_equiv_margin() -> f64 {
    0.3
}
fn default_equiv_degree() -> u32 {
    8
}
fn default_equiv_orders() -> Vec<usize> {
    vec![13, 21]
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields defaulted")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationBoundConfig {
    #[serde(default = "default_dims_1234")]
    pub dims: Vec<usize>,
    #[serde(default = "default_samples_100")]
    pub samples_per_dim: usize,
    #[serde(default = "default_r2")]
    pub r: u32,
    #[serde(default = "default_p2")]
    pub p: f64,
    #[serde(default = "default_decay")]
    pub decay: f64,
}

fn default_dims_1234() -> Vec<usize> {
    vec![1, 2, 3, 4]
}
fn default_samples_100() -> usize {
    100
}
fn default_r2() -> u32 {
    2
}
fn default_p2() -> f64 {
    2.0
}
fn default_decay() -> f64 {
    0.5
}

impl Default for TruncationBoundConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields defaulted")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultestConfig {
    #[serde(default = "default_samples_500")]
    pub samples: usize,
    #[serde(default = "default_r2")]
    pub r: u32,
    #[serde(default = "default_k1")]
    pub k: usize,
    #[serde(default = "default_p2")]
    pub q: f64,
    #[serde(default = "default_dims_12")]
    pub dims: Vec<usize>,
    #[serde(default = "default_decay")]
    pub decay: f64,
}

fn default_samples_500() -> usize {
    500
}
fn default_k1() -> usize {
    1
}

impl Default for MultestConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields defaulted")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HausdorffConfig {
    pub set: RegionConfig,
    pub dim: usize,
    pub d: f64,
    #[serde(default = "default_samples_200")]
    pub section_samples: usize,
    #[serde(default = "default_klo")]
    pub schedule_k_lo: u32,
    #[serde(default = "default_khi")]
    pub schedule_k_hi: u32,
    #[serde(default = "default_window")]
    pub window: f64,
}

fn default_samples_200() -> usize {
    200
}
fn default_klo() -> u32 {
    2
}
fn default_khi() -> u32 {
    6
}
fn default_window() -> f64 {
    oucap::hausdorff::DEFAULT_WINDOW
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittingConfig {
    pub set: RegionConfig,
    #[serde(default = "default_param_count")]
    pub param_count: usize,
    #[serde(default = "default_state_dim")]
    pub state_dim: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Coupled-refinement strides on the fine grid (coarse to fine).
    #[serde(default = "default_strides")]
    pub strides: Vec<usize>,
}

fn default_param_count() -> usize {
    2
}
fn default_state_dim() -> usize {
    1
}
fn default_horizon() -> f64 {
    4.0
}
fn default_spacing() -> f64 {
    0.25
}
fn default_replicas() -> usize {
    10_000
}
fn default_strides() -> Vec<usize> {
    vec![2, 1]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KakutaniConfig {
    #[serde(default = "default_kak_radii")]
    pub ball_radii: Vec<f64>,
    /// Center of the nested balls; off the bulk so grid hitting is
    /// fractional rather than certain.
    #[serde(default = "default_kak_center")]
    pub ball_center: Vec<f64>,
    #[serde(default = "default_param_count")]
    pub param_count: usize,
    #[serde(default = "default_state_dim")]
    pub state_dim: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_kak_degree")]
    pub max_degree: u32,
    #[serde(default = "default_kak_orders")]
    pub quad_orders: Vec<usize>,
    #[serde(default = "default_zero_threshold")]
    pub zero_threshold: f64,
}

fn default_kak_radii() -> Vec<f64> {
    vec![1.0, 0.5, 0.25]
}
fn default_kak_center() -> Vec<f64> {
    vec![2.5]
}
fn default_kak_degree() -> u32 {
    10
}
fn default_kak_orders() -> Vec<usize> {
    vec![97, 129]
}
fn default_zero_threshold() -> f64 {
    1e-3
}

impl Default for KakutaniConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields defaulted")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessConfig {
    pub set: RegionConfig,
    pub m: u32,
    pub p: f64,
    #[serde(default = "default_margins")]
    pub margins: Vec<f64>,
    #[serde(default = "default_zero_threshold")]
    pub zero_threshold: f64,
}

fn default_margins() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}
