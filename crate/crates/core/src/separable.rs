//! Restricted evolution: the nonlinear master equation whose trajectories are
//! confined to product states, realized as a piecewise deterministic process.
//!
//! Each branch of a time step acts on the two factors separately through the
//! reduced operators of the current state: the no-jump propagator applies
//! `(K0)_k = 1 - i tau (H)_k - (tau/2) sum_m (L^m dag L^m)_k` to factor `k`,
//! and jump `m` replaces the factors by `(L^m)_A |psi_a>` and
//! `(L^m)_B |psi_b>`. Jump probabilities are the Poisson rates
//! `<L^m dag L^m>` evaluated on the composite product state — not the norms of
//! the reduced branch states, which differ whenever `L^m` is not of product
//! form. Post-jump factors are renormalized, so the scalar `1/<L^m>`
//! normalizations of the underlying map cancel and never appear here; they
//! enter only the direct generator assembly in
//! [`generator_consistency_check`].
//!
//! Channels of exact product form `L = A ⊗ B` jump through the factors
//! themselves, `A|psi_a>` and `B|psi_b>`: the reduced operators `(L)_A = <B>
//! A` and `(L)_B = <A> B` carry scalars that can vanish (one-sided operators
//! on an eigenstate being the common case), and after normalization the two
//! routes agree wherever both are defined. A jump is undefined — and aborts
//! the trajectory — only when a non-product channel fires while its reduced
//! product state has no direction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::full::{substeps_per_tau, EvolutionConfig};
use crate::linalg::{CMatrix, CVector, DensityMatrix, C64};
use crate::model::{ProductState, ReducedOperatorSet, SystemModel};
use crate::rng::CounterRng;

/// A jump branch whose rate is nonzero while a reduced factor vanishes has no
/// defined direction; trajectories abort when they draw such a jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbortReason {
    UndefinedPostJumpState { channel: usize },
    NonFinite,
}

/// One restricted trajectory. The composite state is exactly product at every
/// recorded time by construction; both factors are kept normalized.
///
/// An aborted trajectory stops recording at the abort time and must be
/// excluded from ensemble averages.
#[derive(Debug, Clone)]
pub struct ProductTrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<ProductState>,
    pub jump_log: Vec<(f64, usize)>,
    pub aborted: Option<(f64, AbortReason)>,
}

/// One branch of a restricted Kraus step: raw (unnormalized) factors, the
/// branch weight, and the channel (0 = no-jump, m >= 1 = jump on `L^m`).
#[derive(Debug, Clone)]
pub struct SeparableBranch {
    pub channel: usize,
    pub factor_a: CVector,
    pub factor_b: CVector,
    pub weight: f64,
}

impl SeparableBranch {
    /// The normalized product state this branch maps to.
    pub fn state(&self) -> Result<ProductState> {
        ProductState::normalized(&self.factor_a, &self.factor_b)
    }
}

/// First-order restricted Kraus decomposition of one time step.
///
/// Branch 0 carries the factorized no-jump update with weight
/// `|K0_A psi_a|^2 |K0_B psi_b|^2 / |<K0>|^2`; branch m carries the factors
/// `sqrt(tau) (L^m)_A |psi_a>` and `sqrt(tau) (L^m)_B |psi_b>` with weight
/// `tau <L^m dag L^m>`. All reduced operators are evaluated at `state`.
pub fn separable_kraus_step(
    model: &SystemModel,
    state: &ProductState,
    tau: f64,
) -> Result<Vec<SeparableBranch>> {
    let red = model.reduced_operators(state);
    let composite = state.composite();

    let mut branches = Vec::with_capacity(model.channels() + 1);

    // No-jump branch.
    let (fa, fb) = no_jump_factors(&red, state, tau);
    let h_expect = model.hamiltonian().quadratic_form(&composite);
    // <K0> = 1 - i tau <Heff> with <Heff> = <H> - (i/2) sum_m <L^m dag L^m>.
    let heff_expect = h_expect - C64::new(0.0, 0.5) * C64::new(red.total_rate(), 0.0);
    let k0_expect = C64::new(1.0, 0.0) - C64::new(0.0, tau) * heff_expect;
    let weight0 = fa.norm_sqr() * fb.norm_sqr() / k0_expect.norm_sqr();
    branches.push(SeparableBranch {
        channel: 0,
        factor_a: fa,
        factor_b: fb,
        weight: weight0,
    });

    let sqrt_tau = libm::sqrt(tau);
    for (m, ch) in red.channels.iter().enumerate() {
        let (fa, fb) = jump_factors(model, ch, m, state);
        let fa = fa.scale(C64::new(sqrt_tau, 0.0));
        let fb = fb.scale(C64::new(sqrt_tau, 0.0));
        let weight = tau * ch.rate;
        if weight > 1e-12 && fa.norm() * fb.norm() < 1e-12 {
            return Err(Error::UndefinedPostJumpState { channel: m + 1 });
        }
        branches.push(SeparableBranch {
            channel: m + 1,
            factor_a: fa,
            factor_b: fb,
            weight,
        });
    }
    Ok(branches)
}

/// Raw jump factors of channel `m`: the tensor factors themselves for
/// product-form operators, the state-reduced operators otherwise.
fn jump_factors(
    model: &SystemModel,
    channel: &crate::model::ReducedChannel,
    m: usize,
    state: &ProductState,
) -> (CVector, CVector) {
    if let Some((a_op, b_op)) = model.product_factors(m) {
        (a_op.matvec(&state.psi_a), b_op.matvec(&state.psi_b))
    } else {
        (
            channel.reduced_a.matvec(&state.psi_a),
            channel.reduced_b.matvec(&state.psi_b),
        )
    }
}

/// Raw factorized no-jump update `(K0)_A psi_a`, `(K0)_B psi_b`.
fn no_jump_factors(red: &ReducedOperatorSet, state: &ProductState, tau: f64) -> (CVector, CVector) {
    let fa = state
        .psi_a
        .sub(&red.h_a.matvec(&state.psi_a).scale(C64::new(0.0, tau)))
        .sub(
            &red.sum_square_a
                .matvec(&state.psi_a)
                .scale(C64::new(tau / 2.0, 0.0)),
        );
    let fb = state
        .psi_b
        .sub(&red.h_b.matvec(&state.psi_b).scale(C64::new(0.0, tau)))
        .sub(
            &red.sum_square_b
                .matvec(&state.psi_b)
                .scale(C64::new(tau / 2.0, 0.0)),
        );
    (fa, fb)
}

/// One trajectory of the restricted piecewise deterministic process.
///
/// Per substep `h`, jump `m` fires with probability `h <L^m dag L^m>` on the
/// current composite product state, after which the factors are replaced by
/// the normalized jump factors (the tensor factors for product-form channels,
/// the state-reduced operators otherwise); without a jump both factors advance
/// with their local no-jump propagators and are renormalized independently.
/// The reduced operators are recomputed every substep (the generator is
/// state-dependent). Substepping follows the same rule as the unrestricted
/// engine, so runs with shared seeds stay draw-for-draw aligned.
///
/// A trajectory that draws a jump with no defined post-jump direction is
/// marked aborted and stops; callers must exclude it from averages.
pub fn mcwf_trajectory_separable(
    model: &SystemModel,
    state0: &ProductState,
    config: &EvolutionConfig,
    rng: &mut CounterRng,
) -> Result<ProductTrajectoryRecord> {
    config.validate()?;
    let steps = config.grid_steps();
    let n_sub = substeps_per_tau(model, config.tau, config.substep_threshold);
    let h = config.tau / n_sub as f64;

    let mut state = state0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut jump_log = Vec::new();
    times.push(0.0);
    states.push(state.clone());

    for k in 0..steps {
        let t_base = k as f64 * config.tau;
        for sub in 0..n_sub {
            let t_now = t_base + (sub + 1) as f64 * h;
            let red = model.reduced_operators(&state);
            let u = rng.next_f64();
            let p_jump = h * red.total_rate();
            if u < p_jump {
                let mut acc = 0.0;
                let mut channel = red.channels.len() - 1;
                for (m, ch) in red.channels.iter().enumerate() {
                    acc += h * ch.rate;
                    if u < acc {
                        channel = m;
                        break;
                    }
                }
                let ch = &red.channels[channel];
                let (fa, fb) = jump_factors(model, ch, channel, &state);
                if fa.norm() < 1e-12 || fb.norm() < 1e-12 {
                    return Ok(ProductTrajectoryRecord {
                        times,
                        states,
                        jump_log,
                        aborted: Some((
                            t_now,
                            AbortReason::UndefinedPostJumpState {
                                channel: channel + 1,
                            },
                        )),
                    });
                }
                state = ProductState::normalized(&fa, &fb)?;
                jump_log.push((t_now, channel + 1));
            } else {
                let (fa, fb) = no_jump_factors(&red, &state, h);
                state = match ProductState::normalized(&fa, &fb) {
                    Ok(s) => s,
                    Err(_) => {
                        return Ok(ProductTrajectoryRecord {
                            times,
                            states,
                            jump_log,
                            aborted: Some((t_now, AbortReason::NonFinite)),
                        })
                    }
                };
            }
            if !state.psi_a.is_finite() || !state.psi_b.is_finite() {
                return Ok(ProductTrajectoryRecord {
                    times,
                    states,
                    jump_log,
                    aborted: Some((t_now, AbortReason::NonFinite)),
                });
            }
        }
        times.push((k + 1) as f64 * config.tau);
        states.push(state.clone());
    }

    Ok(ProductTrajectoryRecord {
        times,
        states,
        jump_log,
        aborted: None,
    })
}

/// Closed-form restricted evolution of the swap model after `s` steps of size
/// `tau`: a binomial mixture of the initial product state and its flip,
///
/// ```text
/// rho(s tau) = w_even |psi_a psi_b><psi_a psi_b| + w_odd |psi_b psi_a><psi_b psi_a|
/// ```
///
/// with the even/odd binomial sums evaluated stably as
/// `w_even/odd = (1 ± (1 - 2 gamma tau)^s) / 2`.
pub fn swap_restricted_closed_form(
    gamma: f64,
    tau: f64,
    s: u64,
    state: &ProductState,
) -> Result<DensityMatrix> {
    if gamma < 0.0 {
        return Err(Error::NegativeRate { value: gamma });
    }
    let p = gamma * tau;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig {
            detail: "gamma * tau must lie in [0, 1]",
        });
    }
    if state.psi_a.dim() != state.psi_b.dim() {
        return Err(Error::DimensionMismatch {
            context: "swap_restricted_closed_form",
            expected: state.psi_a.dim(),
            found: state.psi_b.dim(),
        });
    }
    let parity = libm::pow(1.0 - 2.0 * p, s as f64);
    let w_even = 0.5 * (1.0 + parity);
    let w_odd = 0.5 * (1.0 - parity);
    let direct = state.composite();
    let flipped = state.flipped().composite();
    let rho = direct
        .outer(&direct)
        .scale(C64::new(w_even, 0.0))
        .add(&flipped.outer(&flipped).scale(C64::new(w_odd, 0.0)));
    DensityMatrix::new(rho)
}

/// Outcome of [`generator_consistency_check`].
#[derive(Debug, Clone)]
pub struct GeneratorCheck {
    /// Max-norm distance between the finite-difference branch average and the
    /// directly assembled restricted generator; O(tau) when all channels are
    /// admissible.
    pub residual: f64,
    /// Channels with nonzero jump rate but vanishing `<L^m>`, for which the
    /// direct generator form is undefined; they are removed from both sides
    /// of the comparison.
    pub skipped_channels: Vec<usize>,
}

/// Verifies that averaging the restricted branch decomposition reproduces the
/// restricted master equation.
///
/// Assembles the generator directly — the commutator with the single-site
/// Hamiltonian parts, the nonlinear `sum_m <L^m dag L^m> rho` term, the
/// anticommutator with the reduced dissipator parts, and the
/// `<L^m>`-normalized sandwich term — and compares it against
/// `(E[branch mixture] - rho) / tau`. The residual is O(tau).
///
/// Channels whose `<L^m>` vanishes while their rate does not are reported in
/// `skipped_channels` and excluded from both sides (the direct form has no
/// meaning for them); channels with vanishing rate contribute no sandwich term
/// but keep their reduced dissipator parts.
pub fn generator_consistency_check(
    model: &SystemModel,
    state: &ProductState,
    tau: f64,
) -> Result<GeneratorCheck> {
    let red = model.reduced_operators(state);

    let mut skipped_channels = Vec::new();
    for (m, ch) in red.channels.iter().enumerate() {
        let active = ch.rate > 1e-12;
        let amp_defined = ch.amplitude.norm() > 1e-10 * libm::sqrt(ch.rate.max(1e-300));
        if active && !amp_defined {
            skipped_channels.push(m + 1);
        }
    }

    // Remove inadmissible channels from both sides of the comparison.
    let submodel;
    let model_ref = if skipped_channels.is_empty() {
        model
    } else {
        let kept: Vec<CMatrix> = model
            .lindblads()
            .iter()
            .enumerate()
            .filter(|(m, _)| !skipped_channels.contains(&(m + 1)))
            .map(|(_, l)| l.clone())
            .collect();
        submodel = SystemModel::new(
            model.dims().dim_a,
            model.dims().dim_b,
            model.hamiltonian().clone(),
            kept,
            model.label(),
        )?;
        &submodel
    };

    let red = model_ref.reduced_operators(state);
    let composite = state.composite();
    let rho = composite.outer(&composite);
    let dims = model_ref.dims();
    let ia = CMatrix::identity(dims.dim_a);
    let ib = CMatrix::identity(dims.dim_b);

    // Direct assembly of the restricted generator.
    let h_local = red.h_a.kron(&ib).add(&ia.kron(&red.h_b));
    let mut rhs = rho
        .matmul(&h_local)
        .sub(&h_local.matmul(&rho))
        .scale(C64::new(0.0, 1.0));
    let total_rate = red.total_rate();
    rhs = rhs.add(&rho.scale(C64::new(total_rate, 0.0)));
    let s_local = red.sum_square_a.kron(&ib).add(&ia.kron(&red.sum_square_b));
    let anti = s_local
        .matmul(&rho)
        .add(&rho.matmul(&s_local))
        .scale(C64::new(0.5, 0.0));
    rhs = rhs.sub(&anti);
    for ch in &red.channels {
        if ch.rate <= 1e-12 {
            continue;
        }
        let joint = ch.reduced_a.kron(&ch.reduced_b);
        let sandwich = joint.matmul(&rho).matmul(&joint.dagger());
        rhs = rhs.add(&sandwich.scale(C64::new(1.0 / ch.amplitude.norm_sqr(), 0.0)));
    }

    // Branch average of the restricted Kraus step.
    let branches = separable_kraus_step(model_ref, state, tau)?;
    let d = dims.total();
    let mut mixture = CMatrix::zeros(d, d);
    for branch in &branches {
        if branch.weight <= 1e-14 {
            continue;
        }
        let bstate = branch.state()?.composite();
        mixture = mixture.add(&bstate.outer(&bstate).scale(C64::new(branch.weight, 0.0)));
    }
    let finite_difference = mixture.sub(&rho).scale(C64::new(1.0 / tau, 0.0));

    Ok(GeneratorCheck {
        residual: finite_difference.sub(&rhs).max_norm(),
        skipped_channels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::full::kraus_step_full;
    use crate::linalg::{schmidt_coefficients, Bipartition};
    use crate::scenarios;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn nontrivial_product_state() -> ProductState {
        ProductState::new(
            CVector::basis(2, 0),
            CVector::new(vec![
                c(1.0 / libm::sqrt(2.0), 0.0),
                c(1.0 / libm::sqrt(2.0), 0.0),
            ]),
        )
        .unwrap()
    }

    #[test]
    fn swap_jump_branch_is_flip_with_rate_weight() {
        let gamma = 0.9;
        let model = scenarios::build_swap(gamma).unwrap();
        let state = nontrivial_product_state();
        let tau = 0.01;
        let branches = separable_kraus_step(&model, &state, tau).unwrap();
        assert_eq!(branches.len(), 2);
        assert!((branches[1].weight - gamma * tau).abs() < 1e-14);
        let jumped = branches[1].state().unwrap();
        let flipped = state.flipped();
        assert!(jumped.psi_a.distance_up_to_phase(&flipped.psi_a) < 1e-12);
        assert!(jumped.psi_b.distance_up_to_phase(&flipped.psi_b) < 1e-12);
    }

    #[test]
    fn bell_decay_jump_lands_on_ground_state() {
        // From |11> the strong channel fires with weight 9 tau and both
        // reduced factors point at |0>.
        let model = scenarios::build_bell_decay(scenarios::BellRates::reference()).unwrap();
        let state = ProductState::new(CVector::basis(2, 1), CVector::basis(2, 1)).unwrap();
        let tau = 0.004;
        let branches = separable_kraus_step(&model, &state, tau).unwrap();
        assert!((branches[1].weight - 9.0 * tau).abs() < 1e-13);
        assert!((branches[3].weight - 1.0 * tau).abs() < 1e-13);
        let jumped = branches[1].state().unwrap();
        assert!(jumped.psi_a.distance_up_to_phase(&CVector::basis(2, 0)) < 1e-12);
        assert!(jumped.psi_b.distance_up_to_phase(&CVector::basis(2, 0)) < 1e-12);
    }

    #[test]
    fn product_channels_match_full_branches_after_normalization() {
        // Local H plus product-form Lindblads with a local dissipator sum:
        // the restricted branch states coincide with the unrestricted ones.
        let sz = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let sx = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let i2 = CMatrix::identity(2);
        let h = sz.kron(&i2).add(&i2.kron(&sx).scale(c(0.5, 0.0)));
        let mut lower = CMatrix::zeros(2, 2);
        lower[(0, 1)] = c(0.6, 0.0);
        let lindblads = vec![lower.kron(&i2), i2.kron(&lower)];
        let model = SystemModel::new(2, 2, h, lindblads, "local-decay").unwrap();
        assert!(model.separability_report(1e-10, None).is_separable);

        let state = ProductState::new(
            CVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]),
            CVector::new(vec![c(0.8, 0.0), c(0.6, 0.0)]),
        )
        .unwrap();
        let tau = 1e-4;
        let restricted = separable_kraus_step(&model, &state, tau).unwrap();
        let full = kraus_step_full(&model, &state.composite(), tau);

        for (r, f) in restricted.iter().zip(full.iter()) {
            if r.weight <= 1e-14 {
                assert!(f.weight <= 2e-14);
                continue;
            }
            let r_state = r.state().unwrap().composite();
            let f_state = f.state.normalized().unwrap();
            let dist = r_state.distance_up_to_phase(&f_state);
            // No-jump branches agree to O(tau^2), jump branches exactly.
            assert!(dist < 1e-6, "channel {} dist {dist}", r.channel);
        }
    }

    #[test]
    fn one_sided_jump_from_eigenstate_is_defined() {
        // Amplitude damping on qubit A from |1>: the reduced operator route
        // has <L> = 0 (a removable zero), but the product factorization keeps
        // the jump defined and equal to the unrestricted jump state.
        let mut lower = CMatrix::zeros(2, 2);
        lower[(0, 1)] = c(1.0, 0.0);
        let i2 = CMatrix::identity(2);
        let model =
            SystemModel::new(2, 2, CMatrix::zeros(4, 4), vec![lower.kron(&i2)], "damping").unwrap();
        let psi_b = CVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let state = ProductState::new(CVector::basis(2, 1), psi_b.clone()).unwrap();

        let branches = separable_kraus_step(&model, &state, 0.01).unwrap();
        assert!((branches[1].weight - 0.01).abs() < 1e-14);
        let jumped = branches[1].state().unwrap();
        assert!(jumped.psi_a.distance_up_to_phase(&CVector::basis(2, 0)) < 1e-12);
        assert!(jumped.psi_b.distance_up_to_phase(&psi_b) < 1e-12);

        // A trajectory long enough to certainly jump never aborts.
        let config = EvolutionConfig::new(4.0, 0.2);
        let mut rng = CounterRng::new(5, 0);
        let rec = mcwf_trajectory_separable(&model, &state, &config, &mut rng).unwrap();
        assert!(rec.aborted.is_none());
        assert!(!rec.jump_log.is_empty());
    }

    #[test]
    fn unitary_restricted_trajectory_is_deterministic_and_local() {
        let sz = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let i2 = CMatrix::identity(2);
        let h = sz.kron(&i2).add(&i2.kron(&sz).scale(c(0.5, 0.0)));
        let model = SystemModel::new(2, 2, h, Vec::new(), "unitary").unwrap();
        let state0 = ProductState::new(
            CVector::new(vec![c(0.6, 0.0), c(0.8, 0.0)]),
            CVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let config = EvolutionConfig::new(1.0, 0.01);
        let mut rng_a = CounterRng::new(3, 0);
        let mut rng_b = CounterRng::new(17, 9);
        let rec_a = mcwf_trajectory_separable(&model, &state0, &config, &mut rng_a).unwrap();
        let rec_b = mcwf_trajectory_separable(&model, &state0, &config, &mut rng_b).unwrap();
        assert!(rec_a.aborted.is_none());
        assert!(rec_a.jump_log.is_empty());
        for (a, b) in rec_a.states.iter().zip(rec_b.states.iter()) {
            assert!(a.psi_a.sub(&b.psi_a).norm() < 1e-15);
            assert!(a.psi_b.sub(&b.psi_b).norm() < 1e-15);
        }
        // |psi_b> = |0> is an eigenstate of its local Hamiltonian: only a
        // phase accumulates.
        let last = rec_a.states.last().unwrap();
        assert!((last.psi_b.data[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn trajectories_stay_product_and_normalized() {
        let model = scenarios::build_bell_decay(scenarios::BellRates::reference()).unwrap();
        let state0 = scenarios::bell_decay_initial();
        let config = EvolutionConfig::new(1.0, 0.2);
        let mut rng = CounterRng::new(11, 4);
        let rec = mcwf_trajectory_separable(&model, &state0, &config, &mut rng).unwrap();
        assert!(rec.aborted.is_none());
        for s in &rec.states {
            assert!((s.psi_a.norm() - 1.0).abs() < 1e-10);
            assert!((s.psi_b.norm() - 1.0).abs() < 1e-10);
            let coeffs = schmidt_coefficients(&s.composite(), Bipartition::new(2, 2)).unwrap();
            assert!((coeffs[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn swap_closed_form_small_step_counts() {
        let state = nontrivial_product_state();
        let gamma = 1.0;
        let tau = 0.05;

        let s0 = swap_restricted_closed_form(gamma, tau, 0, &state).unwrap();
        let direct = state.composite();
        assert!(s0.matrix().sub(&direct.outer(&direct)).max_norm() < 1e-14);

        let s1 = swap_restricted_closed_form(gamma, tau, 1, &state).unwrap();
        let flipped = state.flipped().composite();
        let expected = direct
            .outer(&direct)
            .scale(c(1.0 - gamma * tau, 0.0))
            .add(&flipped.outer(&flipped).scale(c(gamma * tau, 0.0)));
        assert!(s1.matrix().sub(&expected).max_norm() < 1e-14);
    }

    #[test]
    fn swap_closed_form_refines_to_full_solution() {
        // With tau = t/s and s large the binomial weights converge to the
        // exponential mixture of the unrestricted solution.
        let state = nontrivial_product_state();
        let gamma = 1.0;
        let t = 0.8;
        let s = 2_000_000u64;
        let restricted = swap_restricted_closed_form(gamma, t / s as f64, s, &state).unwrap();
        let full = scenarios::swap_full_oracle(gamma, t, &state);
        assert!(restricted.matrix().sub(full.matrix()).max_norm() < 1e-6);
    }

    #[test]
    fn swap_closed_form_rejects_bad_parameters() {
        let state = nontrivial_product_state();
        assert!(swap_restricted_closed_form(-1.0, 0.1, 1, &state).is_err());
        assert!(swap_restricted_closed_form(1.0, 1.5, 1, &state).is_err());
    }

    #[test]
    fn generator_check_residual_shrinks_linearly_for_swap() {
        let model = scenarios::build_swap(1.0).unwrap();
        let state = nontrivial_product_state();
        let r1 = generator_consistency_check(&model, &state, 0.02).unwrap();
        let r2 = generator_consistency_check(&model, &state, 0.01).unwrap();
        assert!(r1.skipped_channels.is_empty());
        let c1 = r1.residual / 0.02;
        let c2 = r2.residual / 0.01;
        assert!(c1 > 0.0 && c2 > 0.0);
        let ratio = c1 / c2;
        assert!((0.5..=2.0).contains(&ratio), "C ratio {ratio}");
    }

    #[test]
    fn generator_check_skips_vanishing_amplitude_channels() {
        let model = scenarios::build_bell_decay(scenarios::BellRates::reference()).unwrap();
        let state = ProductState::new(CVector::basis(2, 1), CVector::basis(2, 1)).unwrap();
        let check = generator_consistency_check(&model, &state, 0.01).unwrap();
        // Both channels draining |11> have <L> = 0 there.
        assert_eq!(check.skipped_channels, vec![1, 3]);
    }
}
