//! Unrestricted evolution of the composite system: deterministic integration
//! of the Lindblad master equation and its Monte Carlo wave-function
//! (quantum-jump) unravelling, plus the first-order Kraus decomposition of a
//! single time step.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, DensityMatrix, C64};
use crate::model::SystemModel;
use crate::rng::CounterRng;

/// Parameters of a time evolution run.
///
/// `tau` is the observation grid spacing; the stochastic engines subdivide it
/// internally so that the total jump probability per substep stays below
/// `substep_threshold` (see [`substeps_per_tau`]), and the deterministic
/// integrator subdivides it for accuracy. `seed` and `n_trajectories` are
/// consumed by the ensemble layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub t_max: f64,
    pub tau: f64,
    pub substep_threshold: f64,
    pub seed: u64,
    pub n_trajectories: usize,
}

impl EvolutionConfig {
    pub fn new(t_max: f64, tau: f64) -> Self {
        Self {
            t_max,
            tau,
            substep_threshold: 0.1,
            seed: 42,
            n_trajectories: 600,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau <= 0.0 || !self.tau.is_finite() {
            return Err(Error::InvalidConfig {
                detail: "tau must be positive",
            });
        }
        if self.t_max < 0.0 || !self.t_max.is_finite() {
            return Err(Error::InvalidConfig {
                detail: "t_max must be nonnegative",
            });
        }
        if !(self.substep_threshold > 0.0 && self.substep_threshold <= 1.0) {
            return Err(Error::InvalidConfig {
                detail: "substep_threshold must lie in (0, 1]",
            });
        }
        if self.n_trajectories == 0 {
            return Err(Error::InvalidConfig {
                detail: "n_trajectories must be at least 1",
            });
        }
        Ok(())
    }

    /// Number of coarse grid steps (grid has one more point, including t=0).
    pub fn grid_steps(&self) -> usize {
        libm::floor(self.t_max / self.tau + 1e-9) as usize
    }

    /// Observation grid times `0, tau, 2 tau, ...`.
    pub fn grid_times(&self) -> Vec<f64> {
        (0..=self.grid_steps())
            .map(|k| k as f64 * self.tau)
            .collect()
    }
}

/// One stochastic trajectory of the unrestricted dynamics, recorded on the
/// coarse grid. Every stored state is normalized.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    /// `(time, channel)` of every jump at substep resolution; channels are
    /// 1-based, matching [`KrausBranch::channel`] where 0 is the no-jump
    /// branch.
    pub jump_log: Vec<(f64, usize)>,
}

/// Right-hand side of the Lindblad master equation,
/// `i[rho, H] + sum_m (L^m rho L^m dag - 1/2 {L^m dag L^m, rho})`.
///
/// The output is traceless and Hermitian for Hermitian input.
pub fn lindblad_rhs(model: &SystemModel, rho: &CMatrix) -> CMatrix {
    let h = model.hamiltonian();
    // i(rho H - H rho)
    let mut out = rho.matmul(h).sub(&h.matmul(rho)).scale(C64::new(0.0, 1.0));
    for (m, l) in model.lindblads().iter().enumerate() {
        let sq = model.lindblad_square(m);
        let sandwich = l.matmul(rho).matmul(&l.dagger());
        let anti = sq
            .matmul(rho)
            .add(&rho.matmul(sq))
            .scale(C64::new(0.5, 0.0));
        out = out.add(&sandwich.sub(&anti));
    }
    out
}

/// Classical fourth-order Runge-Kutta integration of the master equation,
/// recording the state on the coarse grid.
///
/// The internal step is `tau` subdivided far enough that the fastest rate in
/// the model is well resolved; Hermiticity is enforced by symmetrization after
/// every step and the trace is monitored, aborting with
/// [`Error::StepInstability`] if it drifts beyond 1e-6.
pub fn integrate_master(
    model: &SystemModel,
    rho0: &DensityMatrix,
    config: &EvolutionConfig,
) -> Result<Vec<(f64, DensityMatrix)>> {
    config.validate()?;
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            context: "integrate_master",
            expected: model.dim(),
            found: rho0.dim(),
        });
    }

    // Resolve the fastest timescale: target h * scale ~ 0.02 keeps the global
    // RK4 error well below the 1e-6 tolerances used downstream. The
    // subdivision is capped; a model stiff beyond the cap trips the trace
    // monitor instead of stalling.
    let scale = model.hamiltonian_scale() + model.jump_rate_bound();
    let h_target = if scale > 0.0 {
        0.02 / scale
    } else {
        config.tau
    };
    let n_sub = (libm::ceil(config.tau / h_target).max(1.0) as usize).min(20_000);
    let h = config.tau / n_sub as f64;

    let steps = config.grid_steps();
    let mut rho = rho0.matrix().clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, rho0.clone()));

    for k in 0..steps {
        for _ in 0..n_sub {
            let k1 = lindblad_rhs(model, &rho);
            let k2 = lindblad_rhs(model, &rho.add(&k1.scale(C64::new(h / 2.0, 0.0))));
            let k3 = lindblad_rhs(model, &rho.add(&k2.scale(C64::new(h / 2.0, 0.0))));
            let k4 = lindblad_rhs(model, &rho.add(&k3.scale(C64::new(h, 0.0))));
            let incr = k1
                .add(&k2.scale(C64::new(2.0, 0.0)))
                .add(&k3.scale(C64::new(2.0, 0.0)))
                .add(&k4)
                .scale(C64::new(h / 6.0, 0.0));
            rho = rho.add(&incr).symmetrize();
            let drift = rho.trace().re - 1.0;
            if !drift.is_finite() || drift.abs() > 1e-6 {
                return Err(Error::StepInstability {
                    trace_drift: drift.abs(),
                });
            }
        }
        if !rho.is_finite() {
            return Err(Error::NonFinite {
                context: "integrate_master",
            });
        }
        let t = (k + 1) as f64 * config.tau;
        out.push((t, DensityMatrix::new(rho.clone())?));
    }
    Ok(out)
}

/// One branch of a first-order Kraus step: the (unnormalized) branch state,
/// its weight, and the channel index (0 = no-jump).
#[derive(Debug, Clone)]
pub struct KrausBranch {
    pub channel: usize,
    pub state: CVector,
    pub weight: f64,
}

/// First-order Kraus decomposition of one time step applied to a pure state:
/// branch 0 is `(1 - i tau Heff)|psi>`, branch m is `sqrt(tau) L^m |psi>`,
/// each weighted by its squared norm. The weights sum to `1 + O(tau^2)`.
pub fn kraus_step_full(model: &SystemModel, state: &CVector, tau: f64) -> Vec<KrausBranch> {
    let mut branches = Vec::with_capacity(model.channels() + 1);
    let heff = model.effective_hamiltonian();
    let no_jump = state.sub(&heff.matvec(state).scale(C64::new(0.0, tau)));
    branches.push(KrausBranch {
        channel: 0,
        weight: no_jump.norm_sqr(),
        state: no_jump,
    });
    let sqrt_tau = libm::sqrt(tau);
    for (m, l) in model.lindblads().iter().enumerate() {
        let jump = l.matvec(state).scale(C64::new(sqrt_tau, 0.0));
        branches.push(KrausBranch {
            channel: m + 1,
            weight: jump.norm_sqr(),
            state: jump,
        });
    }
    branches
}

/// Substeps per coarse grid step: chosen so that the worst-case total jump
/// probability per substep stays at or below `threshold`, uniformly over
/// states. Both stochastic engines use this rule, which keeps their RNG
/// streams aligned when run with shared seeds.
pub fn substeps_per_tau(model: &SystemModel, tau: f64, threshold: f64) -> usize {
    let bound = model.jump_rate_bound();
    if bound <= 0.0 {
        return 1;
    }
    libm::ceil(tau * bound / threshold).max(1.0) as usize
}

/// One quantum-jump trajectory of the unrestricted dynamics.
///
/// First-order scheme: per substep `h`, jump `m` fires with probability
/// `h <L^m dag L^m>` (post-jump state `L^m|psi>` renormalized); otherwise the
/// state advances with the no-jump propagator `1 - i h Heff` and is
/// renormalized. One uniform variate decides both whether a jump occurs and
/// which channel fires, so each substep consumes exactly one draw of the
/// stream.
pub fn mcwf_trajectory_full(
    model: &SystemModel,
    psi0: &CVector,
    config: &EvolutionConfig,
    rng: &mut CounterRng,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    let norm_dev = (psi0.norm() - 1.0).abs();
    if norm_dev > 1e-10 {
        return Err(Error::InvalidState {
            norm_deviation: norm_dev,
        });
    }

    let steps = config.grid_steps();
    let n_sub = substeps_per_tau(model, config.tau, config.substep_threshold);
    let h = config.tau / n_sub as f64;

    let mut psi = psi0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut jump_log = Vec::new();
    times.push(0.0);
    states.push(psi.clone());

    let heff = model.effective_hamiltonian();
    let n_channels = model.channels();
    let mut rates = Vec::with_capacity(n_channels);

    for k in 0..steps {
        let t_base = k as f64 * config.tau;
        for sub in 0..n_sub {
            rates.clear();
            let mut total = 0.0;
            for m in 0..n_channels {
                let r = model.lindblad_square(m).quadratic_form(&psi).re.max(0.0);
                rates.push(r);
                total += r;
            }
            let p_jump = h * total;
            let u = rng.next_f64();
            if u < p_jump {
                // Locate the channel by cumulative probability.
                let mut acc = 0.0;
                let mut channel = n_channels - 1;
                for (m, r) in rates.iter().enumerate() {
                    acc += h * r;
                    if u < acc {
                        channel = m;
                        break;
                    }
                }
                psi = model.lindblads()[channel]
                    .matvec(&psi)
                    .normalized()
                    .map_err(|_| Error::NonFinite {
                        context: "mcwf jump update",
                    })?;
                jump_log.push((t_base + (sub + 1) as f64 * h, channel + 1));
            } else {
                let drift = heff.matvec(&psi).scale(C64::new(0.0, h));
                psi = psi.sub(&drift).normalized().map_err(|_| Error::NonFinite {
                    context: "mcwf no-jump update",
                })?;
            }
            if !psi.is_finite() {
                return Err(Error::NonFinite {
                    context: "mcwf trajectory state",
                });
            }
        }
        times.push((k + 1) as f64 * config.tau);
        states.push(psi.clone());
    }

    Ok(TrajectoryRecord {
        times,
        states,
        jump_log,
    })
}
