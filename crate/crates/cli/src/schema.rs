//! Scenario file format. Polynomials are strings in the polynomial text
//! syntax (`x0`, `x1`, ... for coordinates, exact rationals like `3/4`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub settings: Settings,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub presentations: BTreeMap<String, PresentationBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub groupoids: BTreeMap<String, GroupoidBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subalgebroids: BTreeMap<String, SubalgebroidBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub charts: BTreeMap<String, ChartBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub oracles: BTreeMap<String, OracleBlock>,
    #[serde(default)]
    pub tasks: Vec<TaskBlock>,
}

/// Scenario-wide numeric settings; command-line flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rk_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PresentationBlock {
    /// `TR^n` with the coordinate frame.
    Tangent { n: usize },
    /// `T*R^n` for a constant Poisson matrix (rows of rational strings).
    Poisson { matrix: Vec<Vec<String>> },
    /// Lie algebra bundle over `R^n` (`n = 0` for the algebra itself) with
    /// constants `c[i][j][k]`, `[e_i, e_j] = sum_k c[i][j][k] e_k`.
    LieAlgebra {
        #[serde(default)]
        n: usize,
        constants: Vec<Vec<Vec<String>>>,
    },
    /// Anchor rows (`n` rows of `r` polynomials) and the nonzero structure
    /// functions of frame pairs.
    Explicit {
        n: usize,
        r: usize,
        anchor: Vec<Vec<String>>,
        #[serde(default)]
        structure: Vec<StructureEntry>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureEntry {
    pub i: usize,
    pub j: usize,
    pub coefficients: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupName {
    Gl,
    So,
    Translation,
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseBlock {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Torus { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionBlock {
    Linear,
    /// `x |-> x + B v` for the offset `v` of a vector group.
    Translation(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupoidBlock {
    PairBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snap_tolerance: Option<f64>,
    },
    PairTorus {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snap_tolerance: Option<f64>,
    },
    MatrixGroup {
        group: GroupName,
        k: usize,
    },
    Transformation {
        group: GroupName,
        k: usize,
        base: BaseBlock,
        action: ActionBlock,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snap_tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchBlock {
    pub lower: Vec<String>,
    pub upper: Vec<String>,
}

/// `presentation` names a presentation block or, failing that, a groupoid
/// block, whose canonical algebroid is then used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubalgebroidBlock {
    pub presentation: String,
    pub generators: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<PatchBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionBlock {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartBlock {
    pub subalgebroid: String,
    pub groupoid: String,
    /// Generator indices; all generators when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<usize>>,
    pub lambda_box: RegionBlock,
    pub base_box: RegionBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimal_at: Option<Vec<f64>>,
    /// Grid density of the submersion check run at validation.
    #[serde(default = "default_density")]
    pub check_density: usize,
}

fn default_density() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum MembershipBlock {
    Trivial { tolerance: f64 },
    AngleKernel { period: f64, tolerance: f64 },
}

/// A presenting groupoid together with one lift per generator of
/// `subalgebroid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    pub presenting: String,
    pub subalgebroid: String,
    pub lifts: Vec<Vec<String>>,
    pub membership: MembershipBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepBlock {
    pub chart: String,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorBlock {
    pub chart: String,
    pub lambda: Vec<f64>,
    pub base: Vec<f64>,
}

/// A word either as `steps` applied in order from `source`, or as
/// `factors` in product order with explicit bases (the report format,
/// where `source` is repeated). A bare `source` is the empty word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groupoid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<FactorBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryMode {
    /// Every factor split into two halves.
    Split,
    /// All factors merged into one; only meaningful for commuting charts.
    Merge,
    /// The last applied factor shifted by a small random amount.
    Perturb,
    /// The first applied factor shifted by a nonzero multiple of `2 pi`
    /// along its first parameter.
    Wrap,
    /// An independent random word with the same source.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoveringBlock {
    ActionOverTorusPair { dim: usize },
    VectorGroupOverTorus { dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphismBlock {
    Identity,
    AnchorToPair,
    Covering(CoveringBlock),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPoints {
    pub count: usize,
    /// Numerators are drawn from `-range..=range`.
    pub range: i64,
    pub denominator: i64,
    /// Redraw points having a zero coordinate.
    #[serde(default)]
    pub nonzero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    VerifyPresentation {
        presentation: String,
        #[serde(default = "default_check_degree")]
        check_degree: u32,
    },
    Involutivity {
        subalgebroid: String,
        /// Expected constant coefficients `c[i][j][k]` of
        /// `[alpha_i, alpha_j] = sum_k c[i][j][k] alpha_k`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected_constants: Option<Vec<Vec<Vec<String>>>>,
    },
    Syzygies {
        subalgebroid: String,
        degree: u32,
    },
    FiberDimensions {
        subalgebroid: String,
        #[serde(default)]
        points: Vec<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_points: Option<RandomPoints>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        degree: Option<u32>,
    },
    LeafTrace {
        subalgebroid: String,
        seeds: Vec<Vec<f64>>,
        time: f64,
        step: f64,
        #[serde(default)]
        invariants: Vec<String>,
        #[serde(default = "default_proximity")]
        proximity: f64,
        #[serde(default = "default_zero_level")]
        zero_level_tolerance: f64,
    },
    ChartEval {
        chart: String,
        lambda: Vec<f64>,
        base: Vec<f64>,
    },
    DomainCheck {
        chart: String,
        #[serde(default = "default_density")]
        density: usize,
    },
    Equivalence {
        left: WordBlock,
        right: WordBlock,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        oracle: Option<String>,
    },
    IdentityTest {
        word: WordBlock,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        oracle: Option<String>,
    },
    EquivalenceBattery {
        charts: Vec<String>,
        count: usize,
        modes: Vec<BatteryMode>,
        source_box: RegionBlock,
        lambda_range: f64,
        #[serde(default = "default_max_length")]
        max_length: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        oracle: Option<String>,
    },
    WordLaws {
        charts: Vec<String>,
        count: usize,
        source_box: RegionBlock,
        lambda_range: f64,
        #[serde(default = "default_max_length")]
        max_length: usize,
    },
    Pushforward {
        chart: String,
        morphism: MorphismBlock,
        target_groupoid: String,
        target_subalgebroid: String,
        count: usize,
        source_box: RegionBlock,
        lambda_range: f64,
    },
    Include {
        word: WordBlock,
        chart: String,
    },
    CoveringLift {
        covering: CoveringBlock,
        words: Vec<WordBlock>,
    },
    FlowCheck {
        groupoid: String,
        count: usize,
        /// Linear sections get integer coefficients in `-range..=range`
        /// divided by `denominator`.
        coefficient_range: i64,
        denominator: i64,
        max_time: f64,
        source_box: RegionBlock,
    },
}

fn default_check_degree() -> u32 {
    2
}

fn default_proximity() -> f64 {
    1e-2
}

fn default_zero_level() -> f64 {
    1e-9
}

fn default_max_length() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    /// Numbers or arrays of numbers equal within `tolerance`.
    #[serde(rename = "approx")]
    Approx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub metric: String,
    pub op: Op,
    pub value: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub task: Task,
    #[serde(default, rename = "assert", skip_serializing_if = "Vec::is_empty")]
    pub assertions: Vec<Assertion>,
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::VerifyPresentation { .. } => "verify_presentation",
            Task::Involutivity { .. } => "involutivity",
            Task::Syzygies { .. } => "syzygies",
            Task::FiberDimensions { .. } => "fiber_dimensions",
            Task::LeafTrace { .. } => "leaf_trace",
            Task::ChartEval { .. } => "chart_eval",
            Task::DomainCheck { .. } => "domain_check",
            Task::Equivalence { .. } => "equivalence",
            Task::IdentityTest { .. } => "identity_test",
            Task::EquivalenceBattery { .. } => "equivalence_battery",
            Task::WordLaws { .. } => "word_laws",
            Task::Pushforward { .. } => "pushforward",
            Task::Include { .. } => "include",
            Task::CoveringLift { .. } => "covering_lift",
            Task::FlowCheck { .. } => "flow_check",
        }
    }
}
