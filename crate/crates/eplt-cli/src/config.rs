//! JSON experiment configurations, one document per command. Command-line
//! flags override the corresponding fields.

use serde::Deserialize;

use eplt_core::error::{Error, Result};
use eplt_core::states::{thermal_state, DensityOperator, Temperature, ThermalSpec};

/// Temperature entry: a number (finite kT) or the string `"infinite"`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum KtSpec {
    Finite(f64),
    Named(InfiniteName),
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum InfiniteName {
    #[serde(rename = "infinite", alias = "inf")]
    Infinite,
}

impl KtSpec {
    pub fn temperature(&self) -> Temperature {
        match self {
            KtSpec::Finite(t) => Temperature::Finite(*t),
            KtSpec::Named(_) => Temperature::Infinite,
        }
    }
}

/// Diagonal local Hamiltonian plus temperature; the building block for
/// thermal marginals in configs.
#[derive(Debug, Clone, Deserialize)]
pub struct MarginalSpec {
    pub energies: Vec<f64>,
    pub kt: KtSpec,
    #[serde(default = "default_boltzmann")]
    pub boltzmann: f64,
}

fn default_boltzmann() -> f64 {
    1.0
}

impl MarginalSpec {
    pub fn thermal_spec(&self) -> Result<ThermalSpec> {
        ThermalSpec::from_energies(&self.energies, self.kt.temperature())
            .and_then(|s| ThermalSpec::with_boltzmann(s.hamiltonian, s.temperature, self.boltzmann))
    }

    pub fn state(&self) -> Result<DensityOperator> {
        thermal_state(&self.thermal_spec()?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub energies: Vec<f64>,
    pub kt_values: Vec<f64>,
    #[serde(default)]
    pub include_infinite_temperature: bool,
    #[serde(default)]
    pub epsilon_values: Vec<f64>,
    #[serde(default = "default_true")]
    pub include_epsilon_star: bool,
    #[serde(default = "default_boltzmann")]
    pub boltzmann: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Standard,
    Alternative,
    Multipartite,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpltVerifyConfig {
    pub family: Family,
    /// Bipartite families: the two marginals.
    pub marginal_a: Option<MarginalSpec>,
    pub marginal_b: Option<MarginalSpec>,
    /// Multipartite family: one marginal per qubit party.
    #[serde(default)]
    pub parties: Vec<MarginalSpec>,
    /// Twirl weight as a fraction of the admissible maximum ε*.
    #[serde(default = "default_one")]
    pub epsilon_fraction: f64,
    /// Alternative family: B-side fraction (A uses `epsilon_fraction`).
    pub epsilon_fraction_b: Option<f64>,
    /// Isotropic-input grid (bipartite families).
    #[serde(default)]
    pub isotropic_grid: Vec<f64>,
    #[serde(default)]
    pub random_inputs: usize,
    #[serde(default = "default_restarts")]
    pub fef_restarts: usize,
    pub seed: Option<u64>,
    #[serde(default)]
    pub nonlocal_threshold: Option<f64>,
    #[serde(default)]
    pub steerable_threshold: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub n_factors: Vec<usize>,
    pub realizations: usize,
    pub probes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaceConfig {
    pub scenario: eplt_core::thermo::SpeedupScenario,
    /// Accuracies to tabulate (defaults to the scenario's own δ).
    #[serde(default)]
    pub delta_values: Vec<f64>,
    /// Initial states as diagonal populations; `distance` overrides them.
    pub rho_populations: Option<Vec<f64>>,
    pub gamma_populations: Option<Vec<f64>>,
    /// Hypothetical initial sup-distance for formula-only rows.
    pub distance: Option<f64>,
    #[serde(default)]
    pub t_twirl: f64,
    pub monte_carlo: Option<MonteCarloConfig>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DilationChannel {
    Eplt,
    EpltAlternative,
    Constant,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationConfig {
    pub channel: DilationChannel,
    pub marginal_a: MarginalSpec,
    pub marginal_b: MarginalSpec,
    #[serde(default = "default_one")]
    pub epsilon_fraction: f64,
    #[serde(default = "default_inputs")]
    pub random_inputs: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwirlSampleConfig {
    pub d: usize,
    pub n_factors: usize,
    #[serde(default = "default_one_usize")]
    pub realizations: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
    pub seed: Option<u64>,
    /// Optional path for the first realization's channel as JSON.
    pub channel_out: Option<String>,
}

fn default_true() -> bool {
    true
}
fn default_one() -> f64 {
    1.0
}
fn default_one_usize() -> usize {
    1
}
fn default_restarts() -> usize {
    32
}
fn default_inputs() -> usize {
    20
}
fn default_probes() -> usize {
    200
}

pub fn load<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read config {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("config {path}: {e}")))
}

/// Stochastic commands must pin their randomness.
pub fn require_seed(config_seed: Option<u64>, flag_seed: Option<u64>) -> Result<u64> {
    flag_seed.or(config_seed).ok_or_else(|| {
        Error::InvalidParameter(
            "this command draws random samples; provide a seed in the config or via --seed".into(),
        )
    })
}
