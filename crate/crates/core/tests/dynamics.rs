//! Cross-validation of the deterministic integrator, the two stochastic
//! engines, and the closed-form scenario solutions.

use seplind_core::full::{
    integrate_master, kraus_step_full, mcwf_trajectory_full, EvolutionConfig,
};
use seplind_core::linalg::{Bipartition, CMatrix, CVector, DensityMatrix, C64};
use seplind_core::model::{ProductState, SystemModel};
use seplind_core::observables::{negativity, population, EnsembleAccumulator};
use seplind_core::rng::CounterRng;
use seplind_core::scenarios::{self, BellRates};
use seplind_core::separable::{
    generator_consistency_check, mcwf_trajectory_separable, swap_restricted_closed_form,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn dims22() -> Bipartition {
    Bipartition::new(2, 2)
}

/// Acceptance band for a sampled population against an exact value: three
/// bootstrap standard deviations, floored by the binomial deviation the exact
/// value itself predicts for the ensemble size (the bootstrap band degenerates
/// to zero when every trajectory agrees, e.g. for nearly empty levels).
fn oracle_band(sigma_boot: f64, p_exact: f64, n_traj: usize) -> f64 {
    let p = p_exact.clamp(0.0, 1.0);
    let sigma_binomial = (p * (1.0 - p) / n_traj as f64).sqrt();
    3.0 * sigma_boot.max(sigma_binomial) + 1e-12
}

fn run_full_ensemble(
    model: &SystemModel,
    psi0: &CVector,
    config: &EvolutionConfig,
    batches: usize,
) -> EnsembleAccumulator {
    let times = config.grid_times();
    let mut acc =
        EnsembleAccumulator::new(times, model.dim(), batches, config.n_trajectories / batches)
            .unwrap();
    for idx in 0..config.n_trajectories {
        let mut rng = CounterRng::new(config.seed, idx as u64);
        let rec = mcwf_trajectory_full(model, psi0, config, &mut rng).unwrap();
        acc.add_pure_states(idx, &rec.states).unwrap();
    }
    acc
}

fn run_separable_ensemble(
    model: &SystemModel,
    state0: &ProductState,
    config: &EvolutionConfig,
    batches: usize,
) -> EnsembleAccumulator {
    let times = config.grid_times();
    let mut acc =
        EnsembleAccumulator::new(times, model.dim(), batches, config.n_trajectories / batches)
            .unwrap();
    for idx in 0..config.n_trajectories {
        let mut rng = CounterRng::new(config.seed, idx as u64);
        let rec = mcwf_trajectory_separable(model, state0, config, &mut rng).unwrap();
        if rec.aborted.is_some() {
            acc.record_aborted();
        } else {
            acc.add_product_states(idx, &rec.states).unwrap();
        }
    }
    acc
}

#[test]
fn deterministic_swap_matches_closed_form() {
    let gamma = 1.0;
    let model = scenarios::build_swap(gamma).unwrap();
    let state = scenarios::swap_initial();
    let rho0 = DensityMatrix::pure(&state.composite()).unwrap();
    let config = EvolutionConfig::new(3.0, 0.1);
    let series = integrate_master(&model, &rho0, &config).unwrap();
    let mut worst: f64 = 0.0;
    for (t, rho) in &series {
        let exact = scenarios::swap_full_oracle(gamma, *t, &state);
        worst = worst.max(rho.matrix().sub(exact.matrix()).max_norm());
    }
    assert!(worst < 1e-6, "max deviation {worst:e}");
}

#[test]
fn deterministic_bell_decay_matches_cascade_oracle() {
    let rates = BellRates::reference();
    let model = scenarios::build_bell_decay(rates).unwrap();
    let rho0 = DensityMatrix::pure(&scenarios::bell_decay_initial().composite()).unwrap();
    // 50 grid points over the horizon.
    let config = EvolutionConfig::new(2.0, 0.04);
    let series = integrate_master(&model, &rho0, &config).unwrap();
    assert_eq!(series.len(), 51);

    let phi_p = scenarios::bell_plus();
    let phi_m = scenarios::bell_minus();
    for (t, rho) in &series {
        let oracle = scenarios::bell_decay_oracle(rates, *t);
        let p00 = population(rho, &CVector::basis(4, 0)).unwrap();
        let p11 = population(rho, &CVector::basis(4, 3)).unwrap();
        let pp = population(rho, &phi_p).unwrap();
        let pm = population(rho, &phi_m).unwrap();
        assert!((p00 - oracle.p00).abs() < 1e-6, "t={t}");
        assert!((p11 - oracle.p11).abs() < 1e-6, "t={t}");
        assert!((pp - oracle.p_phi_plus).abs() < 1e-6, "t={t}");
        assert!((pm - oracle.p_phi_minus).abs() < 1e-6, "t={t}");
        let neg = negativity(rho, dims22()).unwrap();
        assert!((neg - oracle.negativity).abs() < 1e-6, "t={t}");
    }
}

#[test]
fn deterministic_bell_decay_stays_diagonal_in_cascade_basis() {
    let model = scenarios::build_bell_decay(BellRates::reference()).unwrap();
    let rho0 = DensityMatrix::pure(&scenarios::bell_decay_initial().composite()).unwrap();
    let config = EvolutionConfig::new(2.0, 0.2);
    let series = integrate_master(&model, &rho0, &config).unwrap();

    let basis = [
        CVector::basis(4, 0),
        scenarios::bell_plus(),
        scenarios::bell_minus(),
        CVector::basis(4, 3),
    ];
    for (_, rho) in &series {
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let off = rho.matrix().expectation(&basis[i], &basis[j]).norm();
                assert!(off <= 1e-8, "off-diagonal mass {off:e}");
            }
        }
    }
}

#[test]
fn unstable_step_is_reported() {
    // A deliberately absurd observation step on a stiff model still works
    // because of internal subdivision; forcing the subdivision off by scaling
    // rates enormously while keeping tau moderate must at least stay
    // trace-stable or error out cleanly.
    let model = scenarios::build_bell_decay(BellRates {
        gamma_11_to_phi_plus: 9e6,
        gamma_phi_plus_to_00: 1e6,
        gamma_11_to_phi_minus: 1e6,
        gamma_phi_minus_to_00: 9e6,
    })
    .unwrap();
    let rho0 = DensityMatrix::pure(&scenarios::bell_decay_initial().composite()).unwrap();
    let config = EvolutionConfig::new(0.2, 0.2);
    match integrate_master(&model, &rho0, &config) {
        Ok(series) => {
            for (_, rho) in &series {
                assert!((rho.matrix().trace().re - 1.0).abs() < 1e-6);
            }
        }
        Err(e) => {
            let msg = format!("{e}");
            assert!(msg.contains("step"), "unexpected error {msg}");
        }
    }
}

#[test]
fn kraus_weights_sum_to_one_up_to_second_order() {
    let model = scenarios::build_bell_decay(BellRates::reference()).unwrap();
    let bound = model.jump_rate_bound();
    let states = [
        scenarios::bell_decay_initial().composite(),
        scenarios::bell_plus(),
        CVector::basis(4, 0),
    ];
    for tau in [0.05, 0.01, 0.002] {
        for psi in &states {
            let total: f64 = kraus_step_full(&model, psi, tau)
                .iter()
                .map(|b| b.weight)
                .sum();
            assert!(
                (total - 1.0).abs() <= 2.0 * tau * tau * bound * bound,
                "tau={tau}: sum {total}"
            );
        }
    }
}

#[test]
fn full_mcwf_bell_decay_matches_oracle_within_three_sigma() {
    let rates = BellRates::reference();
    let model = scenarios::build_bell_decay(rates).unwrap();
    let mut config = EvolutionConfig::new(2.0, 0.2);
    config.seed = 42;
    config.n_trajectories = 600;
    let psi0 = scenarios::bell_decay_initial().composite();
    let acc = run_full_ensemble(&model, &psi0, &config, 20);

    let observables: [(&str, CVector); 3] = [
        ("p00", CVector::basis(4, 0)),
        ("p_phi_plus", scenarios::bell_plus()),
        ("p11", CVector::basis(4, 3)),
    ];
    for (name, target) in &observables {
        let series = acc
            .observable_series(|rho| population(rho, target), 200, 17, name)
            .unwrap();
        for (i, &t) in series.times.iter().enumerate() {
            let oracle = scenarios::bell_decay_oracle(rates, t);
            let expected = match *name {
                "p00" => oracle.p00,
                "p_phi_plus" => oracle.p_phi_plus,
                _ => oracle.p11,
            };
            let diff = (series.mean[i] - expected).abs();
            let band = oracle_band(series.stddev[i], expected, config.n_trajectories);
            assert!(diff <= band, "{name} at t={t}: |{diff:e}| > {band:e}");
        }
    }
}

#[test]
fn full_mcwf_error_decreases_with_ensemble_size() {
    // Ensemble error on the ground-state population at t = 0.5 shrinks as the
    // trajectory count quadruples.
    let rates = BellRates::reference();
    let model = scenarios::build_bell_decay(rates).unwrap();
    let psi0 = scenarios::bell_decay_initial().composite();
    let exact = scenarios::bell_decay_oracle(rates, 0.5).p00;

    let mut errors = Vec::new();
    for n in [150usize, 600, 2400] {
        let mut config = EvolutionConfig::new(0.5, 0.1);
        config.seed = 20260811;
        config.n_trajectories = n;
        let acc = run_full_ensemble(&model, &psi0, &config, 10);
        let series = acc
            .observable_series(|rho| population(rho, &CVector::basis(4, 0)), 100, 3, "p00")
            .unwrap();
        let last = series.mean.last().unwrap();
        errors.push((last - exact).abs());
    }
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "errors not monotone: {errors:?}"
    );
}

#[test]
fn bootstrap_bands_shrink_with_ensemble_size() {
    // Quadrupling the trajectory count should roughly halve the band.
    let rates = BellRates::reference();
    let model = scenarios::build_bell_decay(rates).unwrap();
    let psi0 = scenarios::bell_decay_initial().composite();
    let mut bands = Vec::new();
    for n in [150usize, 600, 2400] {
        let mut config = EvolutionConfig::new(0.6, 0.2);
        config.seed = 404;
        config.n_trajectories = n;
        let acc = run_full_ensemble(&model, &psi0, &config, 20);
        let series = acc
            .observable_series(|rho| population(rho, &CVector::basis(4, 0)), 200, 8, "p00")
            .unwrap();
        bands.push(*series.stddev.last().unwrap());
    }
    assert!(
        bands[0] > bands[1] && bands[1] > bands[2],
        "bands not decreasing: {bands:?}"
    );
    // Slope of log(band) against log(N) over the full 16x range; the
    // individual band estimates carry ~15% noise, the slope does not.
    let slope = (bands[0] / bands[2]).ln() / 16f64.ln();
    assert!((0.3..=0.8).contains(&slope), "slope {slope:.2}: {bands:?}");
}

#[test]
fn full_mcwf_swap_matches_closed_form_within_three_sigma() {
    let gamma = 1.0;
    let model = scenarios::build_swap(gamma).unwrap();
    let state = scenarios::swap_initial();
    let psi0 = state.composite();
    let mut config = EvolutionConfig::new(2.0, 0.1);
    config.seed = 11;
    config.n_trajectories = 600;
    // The jump probability per internal step is an O(h) discretization of the
    // continuous process; resolve it well below the sampling noise.
    config.substep_threshold = 0.02;
    let acc = run_full_ensemble(&model, &psi0, &config, 20);

    let target = state.composite();
    let series = acc
        .observable_series(|rho| population(rho, &target), 200, 5, "stay")
        .unwrap();
    for (i, &t) in series.times.iter().enumerate() {
        let exact = scenarios::swap_full_oracle(gamma, t, &state);
        let expected = exact.matrix().quadratic_form(&target).re;
        let diff = (series.mean[i] - expected).abs();
        let band = oracle_band(series.stddev[i], expected, config.n_trajectories);
        assert!(diff <= band, "t={t}: {diff:e} > {band:e}");
    }
}

#[test]
fn separable_mcwf_swap_matches_binomial_closed_form() {
    let gamma = 1.0;
    let model = scenarios::build_swap(gamma).unwrap();
    let state0 = scenarios::swap_initial();
    let mut config = EvolutionConfig::new(3.0, 0.05);
    config.seed = 7;
    config.n_trajectories = 800;
    let acc = run_separable_ensemble(&model, &state0, &config, 20);
    assert_eq!(acc.aborted(), 0);

    let target = state0.composite();
    let series = acc
        .observable_series(|rho| population(rho, &target), 200, 5, "stay")
        .unwrap();
    for (i, _) in series.times.iter().enumerate() {
        let exact = swap_restricted_closed_form(gamma, config.tau, i as u64, &state0).unwrap();
        let expected = exact.matrix().quadratic_form(&target).re;
        let diff = (series.mean[i] - expected).abs();
        assert!(
            diff <= 3.0 * series.stddev[i] + 1e-12,
            "step {i}: {diff:e} vs band {:e}",
            3.0 * series.stddev[i]
        );
    }
}

#[test]
fn separable_bell_decay_average_has_zero_negativity() {
    let model = scenarios::build_bell_decay(BellRates::reference()).unwrap();
    let state0 = scenarios::bell_decay_initial();
    let mut config = EvolutionConfig::new(2.0, 0.2);
    config.seed = 42;
    config.n_trajectories = 300;
    let acc = run_separable_ensemble(&model, &state0, &config, 10);
    assert_eq!(acc.aborted(), 0);
    for t_idx in 0..acc.times().len() {
        let rho = acc.mean(t_idx).unwrap();
        let neg = negativity(&rho, dims22()).unwrap();
        assert!(neg <= 1e-10, "negativity {neg:e}");
    }
}

#[test]
fn shared_seeds_make_separable_coincide_with_full_for_local_models() {
    // One representative separability-preserving model; the acceptance suite
    // sweeps twenty random ones.
    let sz = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
    let i2 = CMatrix::identity(2);
    let mut lower = CMatrix::zeros(2, 2);
    lower[(0, 1)] = c(0.7, 0.0);
    let h = sz.kron(&i2).add(&i2.kron(&sz).scale(c(0.5, 0.0)));
    let lindblads = vec![lower.kron(&i2), i2.kron(&lower).scale(c(0.8, 0.0))];
    let model = SystemModel::new(2, 2, h, lindblads, "local").unwrap();
    assert!(model.separability_report(1e-10, None).is_separable);

    let inv = 1.0 / 2.0f64.sqrt();
    let state0 = ProductState::new(
        CVector::from_reals(&[inv, inv]),
        CVector::from_reals(&[0.6, 0.8]),
    )
    .unwrap();
    let psi0 = state0.composite();
    let mut config = EvolutionConfig::new(1.0, 0.1);
    config.seed = 7;
    config.n_trajectories = 200;
    config.substep_threshold = 0.02;

    let acc_full = run_full_ensemble(&model, &psi0, &config, 20);
    let acc_sep = run_separable_ensemble(&model, &state0, &config, 20);
    assert_eq!(acc_sep.aborted(), 0);

    for basis_idx in 0..4 {
        let target = CVector::basis(4, basis_idx);
        let full = acc_full
            .observable_series(|rho| population(rho, &target), 200, 13, "full")
            .unwrap();
        let sep = acc_sep
            .observable_series(|rho| population(rho, &target), 200, 13, "sep")
            .unwrap();
        for i in 0..full.times.len() {
            let diff = (full.mean[i] - sep.mean[i]).abs();
            let band = 3.0 * (full.stddev[i].powi(2) + sep.stddev[i].powi(2)).sqrt() + 1e-9;
            assert!(
                diff <= band,
                "basis {basis_idx} t_idx {i}: {diff:e} > {band:e}"
            );
        }
    }
}

#[test]
fn generator_consistency_constant_stable_under_halving() {
    let model = scenarios::build_swap(1.0).unwrap();
    let state = scenarios::swap_initial();
    let taus = [0.04, 0.02, 0.01];
    let constants: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let check = generator_consistency_check(&model, &state, tau).unwrap();
            assert!(check.skipped_channels.is_empty());
            check.residual / tau
        })
        .collect();
    for pair in constants.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((0.5..=2.0).contains(&ratio), "constants {constants:?}");
    }
}

#[test]
fn restricted_swap_refinement_approaches_full_solution_linearly() {
    // Deviation between the restricted and unrestricted closed forms shrinks
    // linearly in the step size.
    let gamma = 1.0;
    let state = scenarios::swap_initial();
    let mut deviations = Vec::new();
    for &tau in &[0.1, 0.05, 0.025] {
        let steps = (3.0 / tau) as u64;
        let mut worst: f64 = 0.0;
        for s in 0..=steps {
            let t = s as f64 * tau;
            let restricted = swap_restricted_closed_form(gamma, tau, s, &state).unwrap();
            let full = scenarios::swap_full_oracle(gamma, t, &state);
            worst = worst.max(restricted.matrix().sub(full.matrix()).max_norm());
        }
        deviations.push(worst);
    }
    let r1 = deviations[0] / deviations[1];
    let r2 = deviations[1] / deviations[2];
    assert!((1.6..=2.4).contains(&r1), "{deviations:?}");
    assert!((1.6..=2.4).contains(&r2), "{deviations:?}");
}
