//! Scenario configuration: TOML sections with `key = value` pairs.
//!
//! Grid, generator, state, and evolution keys are dimensionless internal
//! units (ħ = 1); the `[gas]` section is SI.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FreeGrw,
    PureDissipator,
    DissipativeQbm,
    LinearBoltzmann,
    TwoParticleAmplification,
    CovarianceCheck,
    ParamsReport,
    EquivalenceCheck,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::FreeGrw => "free_grw",
            ScenarioKind::PureDissipator => "pure_dissipator",
            ScenarioKind::DissipativeQbm => "dissipative_qbm",
            ScenarioKind::LinearBoltzmann => "linear_boltzmann",
            ScenarioKind::TwoParticleAmplification => "two_particle_amplification",
            ScenarioKind::CovarianceCheck => "covariance_check",
            ScenarioKind::ParamsReport => "params_report",
            ScenarioKind::EquivalenceCheck => "equivalence_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorVariant {
    Grw,
    MomentumTransfer,
    CollisionalZeroEnergy,
    LinearBoltzmann,
    DissipativeQbm,
    BrokenFixture,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    /// Deterministic reductions and a timing-free manifest: reruns are
    /// byte-identical.
    #[serde(default)]
    pub reproducible: bool,
    /// Seed for the pseudo-random states of verification scenarios.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Number of random states in the covariance check.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_seed() -> u64 {
    1
}
fn default_samples() -> usize {
    50
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub variant: GeneratorVariant,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda_bar: Option<f64>,
    pub alpha_bar: Option<f64>,
    /// Gaussian transfer-distribution cutoff in lattice steps.
    pub k_max: Option<i64>,
    /// Explicit kernel: list of `[steps, weight]` pairs.
    pub kernel: Option<Vec<(i64, f64)>>,
    /// Tracked-particle mass for the linear Boltzmann energy exchange.
    pub mass_m: Option<f64>,
    /// Gas-particle mass entering the structure factor.
    pub gas_mass: Option<f64>,
    /// Inverse gas temperature (dimensionless units).
    pub beta: Option<f64>,
    #[serde(default)]
    pub zero_energy: bool,
    /// Reference mass of the mass-scaled QBM parameter family.
    pub m0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Gaussian,
    Cat,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub kind: StateKind,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub p0: f64,
    pub sigma: f64,
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Defaults per scenario: on for `free_grw`, off otherwise.
    pub include_free_hamiltonian: Option<bool>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Lattice index pairs sampled into `coh_<i>_re/_im` columns.
    pub coherence_points: Option<Vec<(usize, usize)>>,
}

fn default_mass() -> f64 {
    1.0
}
fn default_record_every() -> usize {
    10
}

/// SI-unit gas description for the collisional parameter map.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    /// Number density [m⁻³].
    pub n: f64,
    /// Gas-particle mass [kg].
    pub m: f64,
    /// Inverse temperature [J⁻¹].
    pub beta: f64,
    /// Power-law coupling constant of the r⁻⁴ interaction.
    pub k_coupling: f64,
    /// Tracked-particle mass [kg].
    pub m_test: f64,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<String>,
    #[serde(default)]
    pub snapshot_final: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSection,
    pub grid: Option<GridSection>,
    pub generator: Option<GeneratorSection>,
    pub state: Option<StateSection>,
    pub evolution: Option<EvolutionSection>,
    pub gas: Option<GasSection>,
    #[serde(default)]
    pub output: OutputSection,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Missing-field diagnostic naming section and key.
pub fn require<T: Copy>(value: Option<T>, section: &str, field: &str) -> Result<T> {
    value.ok_or_else(|| {
        CliError::Config(format!("[{section}] missing field '{field}'"))
    })
}

/// Missing-section diagnostic.
pub fn require_section<'a, T>(value: &'a Option<T>, section: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing section [{section}]")))
}
