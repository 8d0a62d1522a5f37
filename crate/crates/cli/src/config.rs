//! Run configuration: TOML schema, defaults, and validation.
//!
//! A run is described by a single TOML file with three tables:
//!
//! ```toml
//! [scenario]
//! name = "bell_decay"            # bell_decay | swap_exchange | custom
//! # [scenario.rates]             # scenario-specific rate map
//! # [scenario.initial_state]    # product-state override (complex amplitudes)
//! # [scenario.custom]           # full model entry for name = "custom"
//!
//! [evolution]
//! t_max = 2.0
//! tau = 0.2
//! substep_threshold = 0.1
//! seed = 42
//! n_trajectories = 600
//!
//! [run]
//! engines = ["full_mcwf", "separable_mcwf", "oracles"]
//! observables = ["negativity", "population:00", "population:phi+", "population:phi-"]
//! batches = 20
//! bootstrap_resamples = 200
//! out_dir = "out"
//! ```
//!
//! Complex scalars are `[re, im]` pairs; matrices are nested row arrays of
//! such pairs. Unknown keys are rejected. Every omitted field falls back to
//! the defaults above (which reproduce the reference decay simulation) and is
//! recorded in `defaults_applied` so the emitted manifest documents them.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use seplind_core::full::EvolutionConfig;
use seplind_core::linalg::{CMatrix, CVector, C64};
use seplind_core::model::{ProductState, SystemModel};
use seplind_core::scenarios::{self, BellRates};

pub const DEFAULT_T_MAX: f64 = 2.0;
pub const DEFAULT_TAU: f64 = 0.2;
pub const DEFAULT_SUBSTEP_THRESHOLD: f64 = 0.1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRAJECTORIES: usize = 600;
pub const DEFAULT_BATCHES: usize = 20;
pub const DEFAULT_RESAMPLES: usize = 200;
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    FullDeterministic,
    FullMcwf,
    SeparableMcwf,
    Oracles,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::FullDeterministic => "full_deterministic",
            Engine::FullMcwf => "full_mcwf",
            Engine::SeparableMcwf => "separable_mcwf",
            Engine::Oracles => "oracles",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "full_deterministic" => Ok(Engine::FullDeterministic),
            "full_mcwf" => Ok(Engine::FullMcwf),
            "separable_mcwf" => Ok(Engine::SeparableMcwf),
            "oracles" => Ok(Engine::Oracles),
            other => bail!(
                "run.engines: unknown engine {other:?} (expected full_deterministic, \
                 full_mcwf, separable_mcwf, or oracles)"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observable {
    Negativity,
    Population(String),
    Purity,
}

impl Observable {
    fn parse(s: &str) -> Result<Self> {
        if s == "negativity" {
            return Ok(Observable::Negativity);
        }
        if s == "purity" {
            return Ok(Observable::Purity);
        }
        if let Some(label) = s.strip_prefix("population:") {
            if label.is_empty() {
                bail!("run.observables: empty population label in {s:?}");
            }
            return Ok(Observable::Population(label.to_string()));
        }
        bail!(
            "run.observables: unknown observable {s:?} (expected negativity, purity, \
             or population:<label>)"
        )
    }

    pub fn config_name(&self) -> String {
        match self {
            Observable::Negativity => "negativity".to_string(),
            Observable::Purity => "purity".to_string(),
            Observable::Population(label) => format!("population:{label}"),
        }
    }

    /// Label usable in file names: `population:phi+` becomes
    /// `population_phi_plus`.
    pub fn file_label(&self) -> String {
        match self {
            Observable::Negativity => "negativity".to_string(),
            Observable::Purity => "purity".to_string(),
            Observable::Population(label) => {
                let safe = label.replace('+', "_plus").replace('-', "_minus");
                format!("population_{safe}")
            }
        }
    }

    /// Resolve a population label to a normalized target state.
    ///
    /// Two-qubit systems accept the computational bitstrings `00`..`11` and
    /// the maximally entangled `phi+`/`phi-`; any system accepts a plain
    /// basis index.
    pub fn target(&self, dim_a: usize, dim_b: usize) -> Result<Option<CVector>> {
        let label = match self {
            Observable::Population(label) => label,
            _ => return Ok(None),
        };
        let d = dim_a * dim_b;
        if dim_a == 2 && dim_b == 2 {
            match label.as_str() {
                "00" => return Ok(Some(CVector::basis(4, 0))),
                "01" => return Ok(Some(CVector::basis(4, 1))),
                "10" => return Ok(Some(CVector::basis(4, 2))),
                "11" => return Ok(Some(CVector::basis(4, 3))),
                "phi+" => return Ok(Some(scenarios::bell_plus())),
                "phi-" => return Ok(Some(scenarios::bell_minus())),
                _ => {}
            }
        }
        let idx: usize = label.parse().map_err(|_| {
            anyhow!("run.observables: population label {label:?} is not recognized")
        })?;
        if idx >= d {
            bail!("run.observables: population index {idx} out of range for dimension {d}");
        }
        Ok(Some(CVector::basis(d, idx)))
    }
}

/// Which physical model a run simulates.
#[derive(Debug, Clone)]
pub enum Scenario {
    BellDecay { rates: BellRates },
    SwapExchange { gamma: f64 },
    Custom(CustomModel),
}

#[derive(Debug, Clone)]
pub struct CustomModel {
    pub dim_a: usize,
    pub dim_b: usize,
    pub hamiltonian: CMatrix,
    pub lindblads: Vec<CMatrix>,
    pub label: String,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::BellDecay { .. } => "bell_decay",
            Scenario::SwapExchange { .. } => "swap_exchange",
            Scenario::Custom(_) => "custom",
        }
    }

    pub fn build_model(&self) -> Result<SystemModel> {
        match self {
            Scenario::BellDecay { rates } => {
                scenarios::build_bell_decay(*rates).map_err(|e| anyhow!("scenario: {e}"))
            }
            Scenario::SwapExchange { gamma } => {
                scenarios::build_swap(*gamma).map_err(|e| anyhow!("scenario: {e}"))
            }
            Scenario::Custom(custom) => SystemModel::new(
                custom.dim_a,
                custom.dim_b,
                custom.hamiltonian.clone(),
                custom.lindblads.clone(),
                custom.label.clone(),
            )
            .map_err(|e| anyhow!("scenario.custom: {e}")),
        }
    }
}

/// Fully resolved run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub initial_state: ProductState,
    /// Whether the initial state came from the config file (as opposed to the
    /// scenario default).
    pub initial_state_overridden: bool,
    pub evolution: EvolutionConfig,
    pub engines: Vec<Engine>,
    pub observables: Vec<Observable>,
    pub batches: usize,
    pub bootstrap_resamples: usize,
    pub out_dir: String,
    /// Field paths that fell back to defaults, for the manifest.
    pub defaults_applied: Vec<String>,
}

impl RunConfig {
    /// Parse and validate a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).context("config parse error")?;
        resolve(raw)
    }

    pub fn wants(&self, engine: Engine) -> bool {
        self.engines.contains(&engine)
    }

    /// Echo of the resolved configuration as a TOML table that parses back to
    /// the same run.
    pub fn to_toml(&self) -> toml::Table {
        let mut scenario = toml::Table::new();
        scenario.insert("name".into(), self.scenario.name().into());
        match &self.scenario {
            Scenario::BellDecay { rates } => {
                let mut t = toml::Table::new();
                t.insert(
                    "gamma_11_to_phi_plus".into(),
                    rates.gamma_11_to_phi_plus.into(),
                );
                t.insert(
                    "gamma_phi_plus_to_00".into(),
                    rates.gamma_phi_plus_to_00.into(),
                );
                t.insert(
                    "gamma_11_to_phi_minus".into(),
                    rates.gamma_11_to_phi_minus.into(),
                );
                t.insert(
                    "gamma_phi_minus_to_00".into(),
                    rates.gamma_phi_minus_to_00.into(),
                );
                scenario.insert("rates".into(), toml::Value::Table(t));
            }
            Scenario::SwapExchange { gamma } => {
                let mut t = toml::Table::new();
                t.insert("gamma".into(), (*gamma).into());
                scenario.insert("rates".into(), toml::Value::Table(t));
            }
            Scenario::Custom(custom) => {
                let mut t = toml::Table::new();
                t.insert("dim_a".into(), (custom.dim_a as i64).into());
                t.insert("dim_b".into(), (custom.dim_b as i64).into());
                t.insert("hamiltonian".into(), matrix_to_value(&custom.hamiltonian));
                t.insert(
                    "lindblads".into(),
                    toml::Value::Array(custom.lindblads.iter().map(matrix_to_value).collect()),
                );
                t.insert("label".into(), custom.label.clone().into());
                scenario.insert("custom".into(), toml::Value::Table(t));
            }
        }
        let mut state = toml::Table::new();
        state.insert("psi_a".into(), vector_to_value(&self.initial_state.psi_a));
        state.insert("psi_b".into(), vector_to_value(&self.initial_state.psi_b));
        scenario.insert("initial_state".into(), toml::Value::Table(state));

        let mut evolution = toml::Table::new();
        evolution.insert("t_max".into(), self.evolution.t_max.into());
        evolution.insert("tau".into(), self.evolution.tau.into());
        evolution.insert(
            "substep_threshold".into(),
            self.evolution.substep_threshold.into(),
        );
        evolution.insert("seed".into(), (self.evolution.seed as i64).into());
        evolution.insert(
            "n_trajectories".into(),
            (self.evolution.n_trajectories as i64).into(),
        );

        let mut run = toml::Table::new();
        run.insert(
            "engines".into(),
            toml::Value::Array(
                self.engines
                    .iter()
                    .map(|e| toml::Value::String(e.name().to_string()))
                    .collect(),
            ),
        );
        run.insert(
            "observables".into(),
            toml::Value::Array(
                self.observables
                    .iter()
                    .map(|o| toml::Value::String(o.config_name()))
                    .collect(),
            ),
        );
        run.insert("batches".into(), (self.batches as i64).into());
        run.insert(
            "bootstrap_resamples".into(),
            (self.bootstrap_resamples as i64).into(),
        );
        run.insert("out_dir".into(), self.out_dir.clone().into());

        let mut root = toml::Table::new();
        root.insert("scenario".into(), toml::Value::Table(scenario));
        root.insert("evolution".into(), toml::Value::Table(evolution));
        root.insert("run".into(), toml::Value::Table(run));
        root
    }
}

// ---------------------------------------------------------------------------
// Raw schema

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    #[serde(default)]
    evolution: RawEvolution,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    rates: Option<BTreeMap<String, f64>>,
    initial_state: Option<RawInitialState>,
    custom: Option<RawCustomModel>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitialState {
    psi_a: Vec<[f64; 2]>,
    psi_b: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCustomModel {
    dim_a: usize,
    dim_b: usize,
    hamiltonian: Vec<Vec<[f64; 2]>>,
    lindblads: Vec<Vec<Vec<[f64; 2]>>>,
    label: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolution {
    t_max: Option<f64>,
    tau: Option<f64>,
    substep_threshold: Option<f64>,
    seed: Option<u64>,
    n_trajectories: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    engines: Option<Vec<String>>,
    observables: Option<Vec<String>>,
    batches: Option<usize>,
    bootstrap_resamples: Option<usize>,
    out_dir: Option<String>,
}

// ---------------------------------------------------------------------------
// Resolution

const BELL_RATE_KEYS: [&str; 4] = [
    "gamma_11_to_phi_plus",
    "gamma_phi_plus_to_00",
    "gamma_11_to_phi_minus",
    "gamma_phi_minus_to_00",
];

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let mut defaults = Vec::new();

    let scenario = match raw.scenario.name.as_str() {
        "bell_decay" => {
            if raw.scenario.custom.is_some() {
                bail!("scenario.custom: only valid with scenario.name = \"custom\"");
            }
            let rates = match &raw.scenario.rates {
                None => {
                    defaults.push("scenario.rates".to_string());
                    BellRates::reference()
                }
                Some(map) => {
                    for key in map.keys() {
                        if !BELL_RATE_KEYS.contains(&key.as_str()) {
                            bail!(
                                "scenario.rates: unknown key {key:?} for bell_decay \
                                 (expected {BELL_RATE_KEYS:?})"
                            );
                        }
                    }
                    let default = BellRates::reference();
                    BellRates {
                        gamma_11_to_phi_plus: *map
                            .get(BELL_RATE_KEYS[0])
                            .unwrap_or(&default.gamma_11_to_phi_plus),
                        gamma_phi_plus_to_00: *map
                            .get(BELL_RATE_KEYS[1])
                            .unwrap_or(&default.gamma_phi_plus_to_00),
                        gamma_11_to_phi_minus: *map
                            .get(BELL_RATE_KEYS[2])
                            .unwrap_or(&default.gamma_11_to_phi_minus),
                        gamma_phi_minus_to_00: *map
                            .get(BELL_RATE_KEYS[3])
                            .unwrap_or(&default.gamma_phi_minus_to_00),
                    }
                }
            };
            Scenario::BellDecay { rates }
        }
        "swap_exchange" => {
            if raw.scenario.custom.is_some() {
                bail!("scenario.custom: only valid with scenario.name = \"custom\"");
            }
            let gamma = match &raw.scenario.rates {
                None => {
                    defaults.push("scenario.rates".to_string());
                    1.0
                }
                Some(map) => {
                    for key in map.keys() {
                        if key != "gamma" {
                            bail!(
                                "scenario.rates: unknown key {key:?} for swap_exchange \
                                 (expected \"gamma\")"
                            );
                        }
                    }
                    *map.get("gamma").unwrap_or(&1.0)
                }
            };
            Scenario::SwapExchange { gamma }
        }
        "custom" => {
            let custom = raw.scenario.custom.as_ref().ok_or_else(|| {
                anyhow!("scenario.custom: required for scenario.name = \"custom\"")
            })?;
            if raw.scenario.rates.is_some() {
                bail!("scenario.rates: not accepted for custom scenarios (rates are absorbed in the operators)");
            }
            let hamiltonian =
                matrix_from_raw(&custom.hamiltonian).context("scenario.custom.hamiltonian")?;
            let lindblads = custom
                .lindblads
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    matrix_from_raw(m).with_context(|| format!("scenario.custom.lindblads[{i}]"))
                })
                .collect::<Result<Vec<_>>>()?;
            Scenario::Custom(CustomModel {
                dim_a: custom.dim_a,
                dim_b: custom.dim_b,
                hamiltonian,
                lindblads,
                label: custom.label.clone().unwrap_or_else(|| "custom".to_string()),
            })
        }
        other => bail!(
            "scenario.name: unknown scenario {other:?} \
             (expected bell_decay, swap_exchange, or custom)"
        ),
    };

    // Initial state: explicit override, otherwise the scenario default.
    let (initial_state, initial_state_overridden) = match &raw.scenario.initial_state {
        Some(state) => {
            let psi_a = vector_from_raw(&state.psi_a).context("scenario.initial_state.psi_a")?;
            let psi_b = vector_from_raw(&state.psi_b).context("scenario.initial_state.psi_b")?;
            // Keep already-normalized amplitudes bit-exact so that a run and
            // its manifest-echo rerun consume identical inputs; only rescale
            // what actually needs it.
            let product = ProductState::new(psi_a.clone(), psi_b.clone())
                .or_else(|_| ProductState::normalized(&psi_a, &psi_b))
                .map_err(|e| anyhow!("scenario.initial_state: {e}"))?;
            (product, true)
        }
        None => {
            defaults.push("scenario.initial_state".to_string());
            let state = match &scenario {
                Scenario::BellDecay { .. } => scenarios::bell_decay_initial(),
                Scenario::SwapExchange { .. } => scenarios::swap_initial(),
                Scenario::Custom(_) => {
                    bail!("scenario.initial_state: required for custom scenarios")
                }
            };
            (state, false)
        }
    };

    macro_rules! or_default {
        ($field:expr, $path:literal, $default:expr) => {
            match $field {
                Some(v) => v,
                None => {
                    defaults.push($path.to_string());
                    $default
                }
            }
        };
    }

    let evolution = EvolutionConfig {
        t_max: or_default!(raw.evolution.t_max, "evolution.t_max", DEFAULT_T_MAX),
        tau: or_default!(raw.evolution.tau, "evolution.tau", DEFAULT_TAU),
        substep_threshold: or_default!(
            raw.evolution.substep_threshold,
            "evolution.substep_threshold",
            DEFAULT_SUBSTEP_THRESHOLD
        ),
        seed: or_default!(raw.evolution.seed, "evolution.seed", DEFAULT_SEED),
        n_trajectories: or_default!(
            raw.evolution.n_trajectories,
            "evolution.n_trajectories",
            DEFAULT_TRAJECTORIES
        ),
    };
    evolution
        .validate()
        .map_err(|e| anyhow!("evolution: {e}"))?;

    let engines = match &raw.run.engines {
        Some(list) => list
            .iter()
            .map(|s| Engine::parse(s))
            .collect::<Result<Vec<_>>>()?,
        None => {
            defaults.push("run.engines".to_string());
            vec![Engine::FullMcwf, Engine::SeparableMcwf, Engine::Oracles]
        }
    };
    if engines.is_empty() {
        bail!("run.engines: at least one engine must be selected");
    }

    let observables = match &raw.run.observables {
        Some(list) => list
            .iter()
            .map(|s| Observable::parse(s))
            .collect::<Result<Vec<_>>>()?,
        None => {
            defaults.push("run.observables".to_string());
            vec![
                Observable::Negativity,
                Observable::Population("00".to_string()),
                Observable::Population("phi+".to_string()),
                Observable::Population("phi-".to_string()),
            ]
        }
    };
    if observables.is_empty() {
        bail!("run.observables: at least one observable must be selected");
    }

    let batches = or_default!(raw.run.batches, "run.batches", DEFAULT_BATCHES);
    let bootstrap_resamples = or_default!(
        raw.run.bootstrap_resamples,
        "run.bootstrap_resamples",
        DEFAULT_RESAMPLES
    );
    let out_dir = or_default!(
        raw.run.out_dir.clone(),
        "run.out_dir",
        DEFAULT_OUT_DIR.to_string()
    );

    if batches < 2 {
        bail!("run.batches: at least 2 batches are required for bootstrap bands");
    }
    if !evolution.n_trajectories.is_multiple_of(batches) {
        bail!(
            "run.batches: n_trajectories ({}) must be divisible by batches ({batches})",
            evolution.n_trajectories
        );
    }
    if bootstrap_resamples < 2 {
        bail!("run.bootstrap_resamples: at least 2 resamples are required");
    }

    let config = RunConfig {
        scenario,
        initial_state,
        initial_state_overridden,
        evolution,
        engines,
        observables,
        batches,
        bootstrap_resamples,
        out_dir,
        defaults_applied: defaults,
    };

    // Building the model validates the operators (Hermiticity, dimensions).
    let model = config.scenario.build_model()?;
    let dims = model.dims();
    if config.initial_state.psi_a.dim() != dims.dim_a
        || config.initial_state.psi_b.dim() != dims.dim_b
    {
        bail!(
            "scenario.initial_state: factor dimensions ({}, {}) do not match the model ({}, {})",
            config.initial_state.psi_a.dim(),
            config.initial_state.psi_b.dim(),
            dims.dim_a,
            dims.dim_b
        );
    }
    for obs in &config.observables {
        obs.target(dims.dim_a, dims.dim_b)?;
    }

    Ok(config)
}

// ---------------------------------------------------------------------------
// Complex array conversions

fn vector_from_raw(raw: &[[f64; 2]]) -> Result<CVector> {
    if raw.is_empty() {
        bail!("empty state vector");
    }
    Ok(CVector::new(
        raw.iter().map(|&[re, im]| C64::new(re, im)).collect(),
    ))
}

fn matrix_from_raw(raw: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    if raw.is_empty() {
        bail!("empty matrix");
    }
    let cols = raw[0].len();
    if raw.iter().any(|row| row.len() != cols) {
        bail!("ragged matrix rows");
    }
    let rows: Vec<Vec<C64>> = raw
        .iter()
        .map(|row| row.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    Ok(CMatrix::from_rows(&rows))
}

fn vector_to_value(v: &CVector) -> toml::Value {
    toml::Value::Array(
        v.data
            .iter()
            .map(|z| toml::Value::Array(vec![z.re.into(), z.im.into()]))
            .collect(),
    )
}

fn matrix_to_value(m: &CMatrix) -> toml::Value {
    toml::Value::Array(
        (0..m.rows())
            .map(|i| {
                toml::Value::Array(
                    (0..m.cols())
                        .map(|j| {
                            let z = m[(i, j)];
                            toml::Value::Array(vec![z.re.into(), z.im.into()])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_applies_reference_defaults() {
        let config = RunConfig::from_toml_str("[scenario]\nname = \"bell_decay\"\n").unwrap();
        match config.scenario {
            Scenario::BellDecay { rates } => {
                assert_eq!(rates.as_array(), [9.0, 1.0, 1.0, 9.0]);
            }
            _ => panic!("wrong scenario"),
        }
        assert_eq!(config.evolution.tau, 0.2);
        assert_eq!(config.evolution.n_trajectories, 600);
        assert_eq!(config.evolution.t_max, 2.0);
        assert_eq!(config.batches, 20);
        assert_eq!(config.engines.len(), 3);
        assert_eq!(config.observables.len(), 4);
        assert!(config.defaults_applied.iter().any(|d| d == "evolution.tau"));
    }

    #[test]
    fn divisibility_violation_is_rejected() {
        let text = "[scenario]\nname = \"bell_decay\"\n[evolution]\nn_trajectories = 601\n[run]\nbatches = 20\n";
        let err = RunConfig::from_toml_str(text).unwrap_err();
        assert!(format!("{err}").contains("divisible"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[scenario]\nname = \"bell_decay\"\ntypo_key = 1\n";
        assert!(RunConfig::from_toml_str(text).is_err());
        let text = "[scenario]\nname = \"bell_decay\"\n[evolution]\nstep = 0.1\n";
        assert!(RunConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn unknown_rate_keys_are_rejected() {
        let text = "[scenario]\nname = \"swap_exchange\"\n[scenario.rates]\ngama = 1.0\n";
        let err = RunConfig::from_toml_str(text).unwrap_err();
        assert!(format!("{err}").contains("gama"), "{err}");
    }

    #[test]
    fn non_hermitian_custom_hamiltonian_is_rejected() {
        let text = r#"
[scenario]
name = "custom"
[scenario.custom]
dim_a = 2
dim_b = 2
hamiltonian = [
  [[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]],
  [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
  [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
  [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
]
lindblads = []
[scenario.initial_state]
psi_a = [[1.0,0.0],[0.0,0.0]]
psi_b = [[1.0,0.0],[0.0,0.0]]
"#;
        let err = RunConfig::from_toml_str(text).unwrap_err();
        assert!(format!("{err}").contains("Hermitian"), "{err}");
    }

    #[test]
    fn config_echo_round_trips() {
        let text = r#"
[scenario]
name = "swap_exchange"
[scenario.rates]
gamma = 0.5
[evolution]
t_max = 1.0
tau = 0.1
seed = 9
n_trajectories = 40
[run]
engines = ["full_deterministic", "oracles"]
observables = ["negativity", "population:0"]
batches = 4
bootstrap_resamples = 50
out_dir = "results"
"#;
        let config = RunConfig::from_toml_str(text).unwrap();
        let echoed = toml::to_string(&toml::Value::Table(config.to_toml())).unwrap();
        let reparsed = RunConfig::from_toml_str(&echoed).unwrap();
        assert_eq!(reparsed.evolution, config.evolution);
        assert_eq!(reparsed.engines, config.engines);
        assert_eq!(reparsed.observables, config.observables);
        assert_eq!(reparsed.batches, config.batches);
        assert_eq!(reparsed.out_dir, config.out_dir);
        // The echo pins everything explicitly.
        assert!(reparsed.defaults_applied.is_empty());
    }

    #[test]
    fn population_targets_resolve() {
        let obs = Observable::parse("population:phi+").unwrap();
        let target = obs.target(2, 2).unwrap().unwrap();
        assert!((target.norm() - 1.0).abs() < 1e-12);
        assert_eq!(obs.file_label(), "population_phi_plus");

        let obs = Observable::parse("population:3").unwrap();
        let target = obs.target(2, 2).unwrap().unwrap();
        assert_eq!(target.data[3].re, 1.0);

        assert!(Observable::parse("population:xy")
            .unwrap()
            .target(2, 2)
            .is_err());
    }
}
