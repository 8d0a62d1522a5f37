//! Experiment orchestration: builds the model, drives the selected engines
//! over a shared time grid, and reduces trajectory ensembles into observable
//! time series.
//!
//! Trajectories are dispatched to a worker pool; each draws from its own
//! counter-based stream keyed by `(master seed, trajectory index)`, and
//! results are folded into the accumulator in trajectory-index order, so
//! outputs are byte-identical for any worker count.

use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use seplind_core::full::{integrate_master, mcwf_trajectory_full};
use seplind_core::linalg::{Bipartition, CVector, DensityMatrix, C64};
use seplind_core::model::SystemModel;
use seplind_core::observables::{negativity, population, purity, EnsembleAccumulator, TimeSeries};
use seplind_core::rng::CounterRng;
use seplind_core::scenarios;
use seplind_core::separable::{mcwf_trajectory_separable, swap_restricted_closed_form};

use crate::config::{Engine, Observable, RunConfig, Scenario};
use crate::report::{compare, SeriesComparison};

/// Abort fractions above this fail the run.
pub const ABORT_FRACTION_LIMIT: f64 = 0.01;

/// One family of output curves (one per observable) produced by an engine.
#[derive(Debug, Clone)]
pub struct CurveSet {
    /// File prefix: the engine name, or `oracle_full` / `oracle_restricted`.
    pub name: String,
    pub series: Vec<(String, TimeSeries)>,
    pub wall_seconds: f64,
    pub trajectories: usize,
    pub aborted: usize,
}

impl CurveSet {
    pub fn abort_fraction(&self) -> f64 {
        if self.trajectories == 0 {
            0.0
        } else {
            self.aborted as f64 / self.trajectories as f64
        }
    }

    pub fn find(&self, file_label: &str) -> Option<&TimeSeries> {
        self.series
            .iter()
            .find(|(label, _)| label == file_label)
            .map(|(_, s)| s)
    }
}

/// Everything a run produces, prior to being written out.
#[derive(Debug)]
pub struct RunOutput {
    pub curve_sets: Vec<CurveSet>,
    pub comparisons: Vec<SeriesComparison>,
    /// Whether the unrestricted engine's negativity leaves its zero band
    /// anywhere; `None` when the run does not produce that series.
    pub entanglement_detected: Option<bool>,
    pub separable_generator: bool,
    pub workers: usize,
}

impl RunOutput {
    pub fn abort_breach(&self) -> Option<&CurveSet> {
        self.curve_sets
            .iter()
            .find(|set| set.abort_fraction() > ABORT_FRACTION_LIMIT)
    }
}

/// Execute every selected engine. Deterministic for a fixed config and seed,
/// independent of `workers`.
pub fn execute(config: &RunConfig, workers: usize) -> Result<RunOutput> {
    let model = config.scenario.build_model()?;
    let times = config.evolution.grid_times();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("failed to build worker pool")?;

    let mut curve_sets = Vec::new();
    for (slot, engine) in config.engines.iter().enumerate() {
        match engine {
            Engine::FullDeterministic => {
                let start = Instant::now();
                let rho0 = DensityMatrix::pure(&config.initial_state.composite())
                    .map_err(|e| anyhow!("initial state: {e}"))?;
                let grid = integrate_master(&model, &rho0, &config.evolution)
                    .map_err(|e| anyhow!("full_deterministic: {e}"))?;
                let rhos: Vec<DensityMatrix> = grid.into_iter().map(|(_, rho)| rho).collect();
                let series = exact_series(config, &model, &times, &rhos, "full_deterministic")?;
                curve_sets.push(CurveSet {
                    name: "full_deterministic".to_string(),
                    series,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    trajectories: 0,
                    aborted: 0,
                });
            }
            Engine::FullMcwf => {
                let start = Instant::now();
                let acc = run_full_ensemble(&pool, &model, config)?;
                let series = sampled_series(config, &model, &acc, slot, "full_mcwf")?;
                curve_sets.push(CurveSet {
                    name: "full_mcwf".to_string(),
                    series,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    trajectories: config.evolution.n_trajectories,
                    aborted: 0,
                });
            }
            Engine::SeparableMcwf => {
                let start = Instant::now();
                let acc = run_separable_ensemble(&pool, &model, config)?;
                let aborted = acc.aborted();
                let series = sampled_series(config, &model, &acc, slot, "separable_mcwf")?;
                curve_sets.push(CurveSet {
                    name: "separable_mcwf".to_string(),
                    series,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    trajectories: config.evolution.n_trajectories,
                    aborted,
                });
            }
            Engine::Oracles => {
                let start = Instant::now();
                let mut sets = oracle_curve_sets(config, &model, &times)?;
                for set in &mut sets {
                    set.wall_seconds = start.elapsed().as_secs_f64();
                }
                curve_sets.extend(sets);
            }
        }
    }

    // Restricted-versus-unrestricted comparison, when both engines ran.
    let mut comparisons = Vec::new();
    let full = curve_sets.iter().find(|s| s.name == "full_mcwf");
    let sep = curve_sets.iter().find(|s| s.name == "separable_mcwf");
    if let (Some(full), Some(sep)) = (full, sep) {
        for obs in &config.observables {
            let label = obs.file_label();
            if let (Some(a), Some(b)) = (full.find(&label), sep.find(&label)) {
                let mut cmp = compare(a, b).with_context(|| format!("comparing {label}"))?;
                cmp.observable = label;
                comparisons.push(cmp);
            }
        }
    }

    let entanglement_detected = full.and_then(|set| set.find("negativity")).map(|series| {
        series
            .mean
            .iter()
            .zip(series.stddev.iter())
            .any(|(&m, &s)| m > 3.0 * s + 1e-10)
    });

    let separable_generator = model
        .separability_report(1e-10, Some(&config.initial_state))
        .is_separable;

    Ok(RunOutput {
        curve_sets,
        comparisons,
        entanglement_detected,
        separable_generator,
        workers: workers.max(1),
    })
}

fn run_full_ensemble(
    pool: &rayon::ThreadPool,
    model: &SystemModel,
    config: &RunConfig,
) -> Result<EnsembleAccumulator> {
    let n = config.evolution.n_trajectories;
    let psi0 = config.initial_state.composite();
    let records: Vec<_> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|idx| {
                let mut rng = CounterRng::new(config.evolution.seed, idx as u64);
                mcwf_trajectory_full(model, &psi0, &config.evolution, &mut rng)
            })
            .collect()
    });

    let times = config.evolution.grid_times();
    let mut acc = EnsembleAccumulator::new(times, model.dim(), config.batches, n / config.batches)
        .map_err(|e| anyhow!("accumulator: {e}"))?;
    for (idx, record) in records.into_iter().enumerate() {
        let record = record.map_err(|e| anyhow!("full_mcwf trajectory {idx}: {e}"))?;
        acc.add_pure_states(idx, &record.states)
            .map_err(|e| anyhow!("accumulator: {e}"))?;
    }
    Ok(acc)
}

fn run_separable_ensemble(
    pool: &rayon::ThreadPool,
    model: &SystemModel,
    config: &RunConfig,
) -> Result<EnsembleAccumulator> {
    let n = config.evolution.n_trajectories;
    let state0 = config.initial_state.clone();
    let records: Vec<_> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|idx| {
                let mut rng = CounterRng::new(config.evolution.seed, idx as u64);
                mcwf_trajectory_separable(model, &state0, &config.evolution, &mut rng)
            })
            .collect()
    });

    let times = config.evolution.grid_times();
    let mut acc = EnsembleAccumulator::new(times, model.dim(), config.batches, n / config.batches)
        .map_err(|e| anyhow!("accumulator: {e}"))?;
    for (idx, record) in records.into_iter().enumerate() {
        let record = record.map_err(|e| anyhow!("separable_mcwf trajectory {idx}: {e}"))?;
        if record.aborted.is_some() {
            acc.record_aborted();
        } else {
            acc.add_product_states(idx, &record.states)
                .map_err(|e| anyhow!("accumulator: {e}"))?;
        }
    }
    Ok(acc)
}

/// Evaluate one observable on a density matrix.
fn evaluate(
    obs: &Observable,
    dims: Bipartition,
    target: Option<&CVector>,
    rho: &DensityMatrix,
) -> seplind_core::error::Result<f64> {
    match obs {
        Observable::Negativity => negativity(rho, dims),
        Observable::Purity => Ok(purity(rho)),
        Observable::Population(_) => {
            let target = target.expect("population target resolved at config time");
            population(rho, target)
        }
    }
}

/// Exact series (zero band) from a precomputed grid of density matrices.
fn exact_series(
    config: &RunConfig,
    model: &SystemModel,
    times: &[f64],
    rhos: &[DensityMatrix],
    context: &str,
) -> Result<Vec<(String, TimeSeries)>> {
    let dims = model.dims();
    let mut out = Vec::new();
    for obs in &config.observables {
        let target = obs.target(dims.dim_a, dims.dim_b)?;
        let mut mean = Vec::with_capacity(times.len());
        for rho in rhos {
            mean.push(
                evaluate(obs, dims, target.as_ref(), rho).map_err(|e| anyhow!("{context}: {e}"))?,
            );
        }
        let label = obs.file_label();
        let series = TimeSeries::exact(times.to_vec(), mean, format!("{context}/{label}"))
            .map_err(|e| anyhow!("{context}: {e}"))?;
        out.push((label, series));
    }
    Ok(out)
}

/// Bootstrap-banded series from an ensemble accumulator.
fn sampled_series(
    config: &RunConfig,
    model: &SystemModel,
    acc: &EnsembleAccumulator,
    engine_slot: usize,
    engine_name: &str,
) -> Result<Vec<(String, TimeSeries)>> {
    let dims = model.dims();
    let mut out = Vec::new();
    for (obs_idx, obs) in config.observables.iter().enumerate() {
        let target = obs.target(dims.dim_a, dims.dim_b)?;
        let label = obs.file_label();
        let seed = bootstrap_seed(config.evolution.seed, engine_slot, obs_idx);
        let series = acc
            .observable_series(
                |rho| evaluate(obs, dims, target.as_ref(), rho),
                config.bootstrap_resamples,
                seed,
                &format!("{engine_name}/{label}"),
            )
            .map_err(|e| anyhow!("bootstrap for {label}: {e}"))?;
        out.push((label, series));
    }
    Ok(out)
}

/// Bootstrap streams must not collide with trajectory streams or each other.
fn bootstrap_seed(master: u64, engine_slot: usize, obs_idx: usize) -> u64 {
    master ^ (0xB007_5EED_u64 << 24) ^ ((engine_slot as u64) << 16) ^ obs_idx as u64
}

/// Closed-form curves for the built-in scenarios.
fn oracle_curve_sets(
    config: &RunConfig,
    model: &SystemModel,
    times: &[f64],
) -> Result<Vec<CurveSet>> {
    match &config.scenario {
        Scenario::BellDecay { rates } => {
            // The cascade solution assumes the doubly excited initial state.
            let expected = scenarios::bell_decay_initial().composite();
            let actual = config.initial_state.composite();
            if actual.distance_up_to_phase(&expected) > 1e-9 {
                bail!(
                    "oracles: the bell_decay closed form is only valid from the |11> initial state"
                );
            }
            let dims = model.dims();
            let mut series: Vec<(String, TimeSeries)> = Vec::new();
            for obs in &config.observables {
                let label = obs.file_label();
                let mut mean = Vec::with_capacity(times.len());
                for &t in times {
                    let point = scenarios::bell_decay_oracle(*rates, t);
                    let value = match obs {
                        // Closed form, independent of the eigensolver.
                        Observable::Negativity => point.negativity,
                        Observable::Purity => {
                            point.p00 * point.p00
                                + point.p_phi_plus * point.p_phi_plus
                                + point.p_phi_minus * point.p_phi_minus
                                + point.p11 * point.p11
                        }
                        Observable::Population(_) => {
                            let target = obs.target(dims.dim_a, dims.dim_b)?.expect("population");
                            cascade_population(&point, &target)
                        }
                    };
                    mean.push(value);
                }
                let ts = TimeSeries::exact(times.to_vec(), mean, format!("oracle_full/{label}"))
                    .map_err(|e| anyhow!("oracle: {e}"))?;
                series.push((label, ts));
            }
            Ok(vec![CurveSet {
                name: "oracle_full".to_string(),
                series,
                wall_seconds: 0.0,
                trajectories: 0,
                aborted: 0,
            }])
        }
        Scenario::SwapExchange { gamma } => {
            let state = &config.initial_state;
            let full_grid: Vec<DensityMatrix> = times
                .iter()
                .map(|&t| scenarios::swap_full_oracle(*gamma, t, state))
                .collect();
            let full = exact_series(config, model, times, &full_grid, "oracle_full")?;
            let mut sets = vec![CurveSet {
                name: "oracle_full".to_string(),
                series: full,
                wall_seconds: 0.0,
                trajectories: 0,
                aborted: 0,
            }];

            let tau = config.evolution.tau;
            if gamma * tau <= 1.0 {
                let restricted_grid: Vec<DensityMatrix> = (0..times.len())
                    .map(|k| {
                        swap_restricted_closed_form(*gamma, tau, k as u64, state)
                            .map_err(|e| anyhow!("restricted oracle: {e}"))
                    })
                    .collect::<Result<_>>()?;
                let restricted =
                    exact_series(config, model, times, &restricted_grid, "oracle_restricted")?;
                sets.push(CurveSet {
                    name: "oracle_restricted".to_string(),
                    series: restricted,
                    wall_seconds: 0.0,
                    trajectories: 0,
                    aborted: 0,
                });
            }
            Ok(sets)
        }
        Scenario::Custom(_) => bail!("oracles: no closed form is available for custom scenarios"),
    }
}

/// `<target| rho |target>` for the diagonal cascade mixture, assembled from
/// its four populations without any matrix machinery.
fn cascade_population(point: &scenarios::CascadePoint, target: &CVector) -> f64 {
    let basis = [
        CVector::basis(4, 0),
        scenarios::bell_plus(),
        scenarios::bell_minus(),
        CVector::basis(4, 3),
    ];
    let weights = [point.p00, point.p_phi_plus, point.p_phi_minus, point.p11];
    let mut acc = 0.0;
    for (vec, w) in basis.iter().zip(weights.iter()) {
        let amp: C64 = vec.inner(target);
        acc += w * amp.norm_sqr();
    }
    acc.clamp(0.0, 1.0)
}
