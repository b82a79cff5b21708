//! Scenario files: a TOML document with `model`, `principal`, `numerics`
//! and `experiment` sections. Parsing is strict, so a misspelled key is an
//! error rather than a silently ignored setting.

use std::fs;
use std::path::Path;

use pressgame_core::harness::Regularity;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub principal: PrincipalConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Model family and its parameters. Countable families index slots from 0,
/// slot `k` holding coalitions (or types) of size `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Replicator {
        payoff: PayoffConfig,
        #[serde(default = "one")]
        kappa: f64,
    },
    KthOrder {
        payoff: PayoffConfig,
        #[serde(default = "one")]
        kappa: f64,
        max_order: usize,
    },
    Multiclass {
        /// One payoff per class, all with the same strategy count.
        payoffs: Vec<PayoffConfig>,
        communication: Communication,
        class_fractions: Vec<f64>,
        class_kappas: Vec<f64>,
    },
    Growth {
        max_index: usize,
        channels: Vec<ChannelConfig>,
    },
    Coalition {
        max_index: usize,
        #[serde(default)]
        merge: KernelConfig,
        #[serde(default)]
        split: KernelConfig,
        /// Per-size payoff `R(k)`, required by strategic kernels.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size_payoff: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        attachment: Option<AttachmentConfig>,
    },
    Attachment {
        max_index: usize,
        alpha: f64,
        lambda: f64,
        #[serde(default)]
        lambda_slope: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Communication {
    Full,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Constant,
    Strategic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub kind: KernelKind,
    /// Rate of the constant kernel; ignored by the strategic one.
    #[serde(default)]
    pub rate: f64,
    /// Uniform weight `a` (merge) or `b` (split) multiplying the kernel.
    #[serde(default = "one")]
    pub weight: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            kind: KernelKind::Constant,
            rate: 0.0,
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachmentConfig {
    pub alpha: f64,
    /// Injection rate `lambda(b) = max(0, lambda + lambda_slope * b)`.
    pub lambda: f64,
    #[serde(default)]
    pub lambda_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub term: TermConfig,
    pub rate: f64,
    /// Multiply the rate by the densities of the consumed slots.
    #[serde(default)]
    pub mass_action: bool,
    /// Control dependence of a mass-action rate.
    #[serde(default)]
    pub control_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermConfig {
    Birth { to: usize },
    Death { from: usize },
    Mutation { from: usize, to: usize },
    Split { from: usize, into: [usize; 2] },
    Merge { from: [usize; 2], to: usize },
    Regroup { from: [usize; 2], to: [usize; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffConfig {
    /// `R_j(x, b) = T_j(b) + sum_k A_jk x_k`; `values` holds one block per
    /// strategy, each row-major over the grid spanned by `b_axes`.
    Tabular {
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        b_axes: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interaction: Option<Vec<f64>>,
    },
    Inspection {
        legal: f64,
        levels: Vec<f64>,
        fine: FineConfig,
        detection: DetectionConfig,
    },
    Corruption {
        wage: f64,
        reservation_wage: f64,
        levels: Vec<f64>,
        fine: FineConfig,
        detection: DetectionConfig,
    },
    Cyber {
        infection_cost: f64,
        levels: Vec<f64>,
        detection: DetectionConfig,
    },
    /// `fail` and `success` list `[intercept, slope]` per strategy (or one
    /// pair shared by all).
    Terror {
        gains: Vec<f64>,
        fail: Vec<[f64; 2]>,
        success: Vec<[f64; 2]>,
        detection: DetectionConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FineConfig {
    Constant(f64),
    Affine { intercept: f64, slope: f64 },
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DetectionConfig {
    Constant(f64),
    Saturating { theta: f64 },
    Logistic { a: f64, c: f64, d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    Fixed,
    BestResponse,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalConfig {
    #[serde(default)]
    pub mode: ModeConfig,
    /// Control held in fixed mode; defaults to `[0.0]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub control: Vec<f64>,
    /// `[lo, hi]` per control coordinate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<[f64; 2]>,
    #[serde(default)]
    pub reward: RewardConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardConfig {
    Constant {
        value: f64,
    },
    /// `sum w_j x_j + sum (l_k b_k - q_k b_k^2) + sum c_jk x_j b_k`.
    Quadratic {
        #[serde(default)]
        x_weights: Vec<f64>,
        #[serde(default)]
        b_linear: Vec<f64>,
        #[serde(default)]
        b_quadratic: Vec<f64>,
        #[serde(default)]
        cross: Vec<f64>,
    },
    /// Negated cost of a terror payoff model.
    TerrorCost,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig::Constant { value: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepperKind {
    #[default]
    Rk45,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default)]
    pub stepper: StepperKind,
    /// Step of the fixed-step scheme.
    #[serde(default = "NumericsConfig::default_h")]
    pub h_ode: f64,
    #[serde(default = "NumericsConfig::default_rtol")]
    pub rtol: f64,
    #[serde(default = "NumericsConfig::default_atol")]
    pub atol: f64,
    /// Points per free simplex coordinate of value grids.
    #[serde(default = "NumericsConfig::default_m")]
    pub grid_points: usize,
    /// Control grid points per axis.
    #[serde(default = "NumericsConfig::default_m")]
    pub b_points: usize,
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default = "NumericsConfig::default_support_tol")]
    pub support_tol: f64,
    /// Random starts per zero set of the rest-point solver.
    #[serde(default = "NumericsConfig::default_starts")]
    pub starts: usize,
}

impl NumericsConfig {
    fn default_h() -> f64 {
        0.01
    }
    fn default_rtol() -> f64 {
        1e-8
    }
    fn default_atol() -> f64 {
        1e-10
    }
    fn default_m() -> usize {
        11
    }
    fn default_support_tol() -> f64 {
        1e-8
    }
    fn default_starts() -> usize {
        32
    }
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            stepper: StepperKind::Rk45,
            h_ode: Self::default_h(),
            rtol: Self::default_rtol(),
            atol: Self::default_atol(),
            grid_points: Self::default_m(),
            b_points: Self::default_m(),
            refine: true,
            support_tol: Self::default_support_tol(),
            starts: Self::default_starts(),
        }
    }
}

/// Scalar observable of the macroscopic state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    Constant { value: f64 },
    Coordinate { index: usize },
    Linear { weights: Vec<f64> },
    /// `sum_k (k + 1)^order x_k`.
    Moment { order: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Initial densities; uniform on the simplex when omitted. Countable
    /// states shorter than the truncation are padded with zeros.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<f64>,
    #[serde(default = "one")]
    pub t_end: f64,
    /// Population size of a single simulation on the simplex.
    #[serde(default = "ExperimentConfig::default_population")]
    pub population: u64,
    /// Scale `h` of a single countable-state simulation.
    #[serde(default = "ExperimentConfig::default_scale")]
    pub scale: f64,
    #[serde(default = "ExperimentConfig::default_runs")]
    pub n_runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_values: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableConfig>,
    #[serde(default = "ExperimentConfig::default_regularity")]
    pub regularity: Regularity,
    #[serde(default)]
    pub smooth_rates: bool,
    /// Holding interval of the principal's control in planning.
    #[serde(default = "ExperimentConfig::default_tau")]
    pub tau: f64,
    #[serde(default = "one_usize")]
    pub horizon: usize,
    /// Discount factor; switches `plan` to the infinite-horizon problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "ExperimentConfig::default_tol")]
    pub tol: f64,
    #[serde(default = "ExperimentConfig::default_sweeps")]
    pub max_sweeps: usize,
    /// Terminal value `V_0`; zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<ObservableConfig>,
}

fn one_usize() -> usize {
    1
}

impl ExperimentConfig {
    fn default_population() -> u64 {
        100
    }
    fn default_scale() -> f64 {
        0.01
    }
    fn default_runs() -> usize {
        1
    }
    fn default_regularity() -> Regularity {
        Regularity::Lipschitz
    }
    fn default_tau() -> f64 {
        0.1
    }
    fn default_tol() -> f64 {
        1e-10
    }
    fn default_sweeps() -> usize {
        1000
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty experiment section parses")
    }
}

impl ScenarioConfig {
    /// Parse without semantic checks; syntax errors carry line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::parse(&text)
    }

    /// Canonical TOML of the fully resolved configuration (defaults filled
    /// in); feeding it back reproduces the run.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolved_echo_parses_back_to_the_same_config() {
        let text = r#"
            [model]
            family = "coalition"
            max_index = 16
            merge = { kind = "strategic" }
            split = { rate = 0.5, weight = 2.0 }
            size_payoff = [1.0, 0.5]
            attachment = { alpha = 0.3, lambda = 2.0 }
            [principal]
            mode = "best_response"
            bounds = [[0.0, 2.0]]
            reward = { kind = "quadratic", b_quadratic = [1.0] }
            [experiment]
            initial = [0.5, 0.25]
            beta = 0.9
            terminal = { kind = "moment", order = 1 }
        "#;
        let config = ScenarioConfig::parse(text).unwrap();
        assert_eq!(ScenarioConfig::parse(&config.to_toml()).unwrap(), config);
        assert_eq!(config.numerics, NumericsConfig::default());
        assert_eq!(config.experiment.n_runs, 1);
    }

    #[test]
    fn unknown_keys_fail_inside_tagged_sections() {
        let err = ScenarioConfig::parse("[model]\nfamily = \"replicator\"\nkapa = 2.0\npayoff = { kind = \"tabular\", values = [0.0] }\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("kapa"), "{err}");
        let err = ScenarioConfig::parse("[model]\nfamily = \"attachment\"\nmax_index = 3\nalpha = 0.5\nlambda = 1.0\nlambda_slop = 1.0\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("lambda_slop"), "{err}");
    }
}
