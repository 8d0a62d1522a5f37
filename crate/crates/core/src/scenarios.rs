//! Built-in reference scenarios and their closed-form solutions.
//!
//! Two models exercise everything the engines can do:
//!
//! * **Bell-mediated decay**: a doubly excited two-qubit state decays to the
//!   ground state through metastable maximally entangled levels
//!   `|Phi±> = (|01> ± |10>)/sqrt(2)`. The unrestricted populations follow a
//!   four-level linear cascade solved here in closed form.
//! * **Random exchange**: a single dissipator `sqrt(gamma) V` built on the
//!   swap operator `V|ab> = |ba>`. Both the unrestricted evolution and the
//!   restricted (product-state) evolution have closed forms.
//!
//! The oracles live here rather than in test code so the CLI can emit oracle
//! curves next to simulated ones.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, DensityMatrix, C64};
use crate::model::{ProductState, SystemModel};

/// `|Phi+> = (|01> + |10>)/sqrt(2)`.
pub fn bell_plus() -> CVector {
    let inv = 1.0 / libm::sqrt(2.0);
    CVector::from_reals(&[0.0, inv, inv, 0.0])
}

/// `|Phi-> = (|01> - |10>)/sqrt(2)`.
pub fn bell_minus() -> CVector {
    let inv = 1.0 / libm::sqrt(2.0);
    CVector::from_reals(&[0.0, inv, -inv, 0.0])
}

/// The two-qubit swap operator.
pub fn swap_operator() -> CMatrix {
    let mut v = CMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            v[(a * 2 + b, b * 2 + a)] = C64::new(1.0, 0.0);
        }
    }
    v
}

/// Transition rates of the Bell-mediated decay cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellRates {
    pub gamma_11_to_phi_plus: f64,
    pub gamma_phi_plus_to_00: f64,
    pub gamma_11_to_phi_minus: f64,
    pub gamma_phi_minus_to_00: f64,
}

impl BellRates {
    /// The reference parameter set: the strong channel feeds the `|Phi+>`
    /// level (rate 9) which drains slowly (rate 1), and vice versa for
    /// `|Phi->`.
    pub fn reference() -> Self {
        Self {
            gamma_11_to_phi_plus: 9.0,
            gamma_phi_plus_to_00: 1.0,
            gamma_11_to_phi_minus: 1.0,
            gamma_phi_minus_to_00: 9.0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.gamma_11_to_phi_plus,
            self.gamma_phi_plus_to_00,
            self.gamma_11_to_phi_minus,
            self.gamma_phi_minus_to_00,
        ]
    }
}

/// Bell-mediated decay model: `H = 0` and the four jump operators
/// `sqrt(g1)|Phi+><11|`, `sqrt(g2)|00><Phi+|`, `sqrt(g3)|Phi-><11|`,
/// `sqrt(g4)|00><Phi-|`.
pub fn build_bell_decay(rates: BellRates) -> Result<SystemModel> {
    for g in rates.as_array() {
        if g < 0.0 {
            return Err(Error::NegativeRate { value: g });
        }
        if !g.is_finite() {
            return Err(Error::NonFinite {
                context: "bell decay rate",
            });
        }
    }
    let e11 = CVector::basis(4, 3);
    let e00 = CVector::basis(4, 0);
    let phi_p = bell_plus();
    let phi_m = bell_minus();
    let scale = |m: CMatrix, g: f64| m.scale(C64::new(libm::sqrt(g), 0.0));
    let lindblads = vec![
        scale(phi_p.outer(&e11), rates.gamma_11_to_phi_plus),
        scale(e00.outer(&phi_p), rates.gamma_phi_plus_to_00),
        scale(phi_m.outer(&e11), rates.gamma_11_to_phi_minus),
        scale(e00.outer(&phi_m), rates.gamma_phi_minus_to_00),
    ];
    SystemModel::new(2, 2, CMatrix::zeros(4, 4), lindblads, "bell_decay")
}

/// Default initial state of the decay scenario: the doubly excited `|11>`.
pub fn bell_decay_initial() -> ProductState {
    ProductState::new(CVector::basis(2, 1), CVector::basis(2, 1)).expect("basis states are unit")
}

/// Populations and negativity of the unrestricted Bell-decay solution at one
/// time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadePoint {
    pub p11: f64,
    pub p_phi_plus: f64,
    pub p_phi_minus: f64,
    pub p00: f64,
    pub negativity: f64,
}

/// Closed-form solution of the four-level cascade rate equations, starting
/// from `|11>`:
///
/// ```text
/// p11(t)   = exp(-(g1+g3) t)
/// pPhi±(t) = g · (exp(-gout t) - exp(-(g1+g3) t)) / ((g1+g3) - gout)
/// p00(t)   = 1 - p11 - pPhi+ - pPhi-
/// ```
///
/// (with the degenerate-rate limit `g t exp(-gout t)` where the denominators
/// vanish). The density matrix is diagonal in `{|00>, |Phi+>, |Phi->, |11>}`,
/// so the negativity of its partial transpose reduces to a 2x2 block problem
/// with the closed form used below.
pub fn bell_decay_oracle(rates: BellRates, t: f64) -> CascadePoint {
    let [g1, g2, g3, g4] = rates.as_array();
    let total = g1 + g3;
    let p11 = libm::exp(-total * t);
    let p_phi_plus = g1 * exp_difference(g2, total, t);
    let p_phi_minus = g3 * exp_difference(g4, total, t);
    let p00 = 1.0 - p11 - p_phi_plus - p_phi_minus;

    // Partial transpose couples |00> and |11> through the Phi± imbalance:
    // lambda_min = (p00+p11)/2 - sqrt(((p00-p11)/2)^2 + ((pP-pM)/2)^2).
    let half_sum = 0.5 * (p00 + p11);
    let half_diff = 0.5 * (p00 - p11);
    let coherence = 0.5 * (p_phi_plus - p_phi_minus);
    let negativity =
        (libm::sqrt(half_diff * half_diff + coherence * coherence) - half_sum).max(0.0);

    CascadePoint {
        p11,
        p_phi_plus,
        p_phi_minus,
        p00,
        negativity,
    }
}

/// `(exp(-a t) - exp(-b t)) / (b - a)`, stable as `b -> a`.
fn exp_difference(a: f64, b: f64, t: f64) -> f64 {
    let delta = b - a;
    if delta == 0.0 {
        return t * libm::exp(-a * t);
    }
    -libm::exp(-a * t) * libm::expm1(-delta * t) / delta
}

/// Exchange model: `H = 0` with the single dissipator `sqrt(gamma) V`.
pub fn build_swap(gamma: f64) -> Result<SystemModel> {
    if gamma < 0.0 {
        return Err(Error::NegativeRate { value: gamma });
    }
    if !gamma.is_finite() {
        return Err(Error::NonFinite {
            context: "swap rate",
        });
    }
    let l = swap_operator().scale(C64::new(libm::sqrt(gamma), 0.0));
    SystemModel::new(2, 2, CMatrix::zeros(4, 4), vec![l], "swap_exchange")
}

/// Default initial state of the exchange scenario, chosen so the factor
/// overlap `<psi_a|psi_b> = 1/sqrt(2)` is neither zero nor one.
pub fn swap_initial() -> ProductState {
    let inv = 1.0 / libm::sqrt(2.0);
    ProductState::new(CVector::basis(2, 0), CVector::from_reals(&[inv, inv]))
        .expect("states are unit")
}

/// Closed-form unrestricted evolution of the exchange model,
/// `rho(t) = e^{-gt} cosh(gt) rho + e^{-gt} sinh(gt) V rho V`, evaluated
/// through the overflow-free weights `(1 ± e^{-2gt})/2`.
pub fn swap_full_oracle(gamma: f64, t: f64, state: &ProductState) -> DensityMatrix {
    let decay = libm::exp(-2.0 * gamma * t);
    let w_stay = 0.5 * (1.0 + decay);
    let w_flip = 0.5 * (1.0 - decay);
    let direct = state.composite();
    let flipped = state.flipped().composite();
    let rho = direct
        .outer(&direct)
        .scale(C64::new(w_stay, 0.0))
        .add(&flipped.outer(&flipped).scale(C64::new(w_flip, 0.0)));
    DensityMatrix::new(rho).expect("convex mixture of projectors")
}

/// Grid evaluation of the cascade oracle.
pub fn bell_decay_oracle_series(rates: BellRates, times: &[f64]) -> Vec<CascadePoint> {
    times.iter().map(|&t| bell_decay_oracle(rates, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strong_channel_matrix_entries() {
        // sqrt(9)|Phi+><11| has entries 3/sqrt(2) at rows 1,2 of column 3.
        let model = build_bell_decay(BellRates::reference()).unwrap();
        let l1 = &model.lindblads()[0];
        let expect = 3.0 / libm::sqrt(2.0);
        for r in 0..4 {
            for c in 0..4 {
                let want = if (r == 1 || r == 2) && c == 3 {
                    expect
                } else {
                    0.0
                };
                assert!((l1[(r, c)].re - want).abs() < 1e-14);
                assert!(l1[(r, c)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_rates_freeze_the_dynamics() {
        let rates = BellRates {
            gamma_11_to_phi_plus: 0.0,
            gamma_phi_plus_to_00: 0.0,
            gamma_11_to_phi_minus: 0.0,
            gamma_phi_minus_to_00: 0.0,
        };
        let model = build_bell_decay(rates).unwrap();
        for l in model.lindblads() {
            assert_eq!(l.max_norm(), 0.0);
        }
        let p = bell_decay_oracle(rates, 3.0);
        assert_eq!(p.p11, 1.0);
        assert_eq!(p.p00, 0.0);
    }

    #[test]
    fn negative_rate_rejected() {
        let mut rates = BellRates::reference();
        rates.gamma_phi_plus_to_00 = -1.0;
        assert!(build_bell_decay(rates).is_err());
        assert!(build_swap(-0.5).is_err());
    }

    #[test]
    fn effective_hamiltonian_spectrum_in_cascade_basis() {
        // Heff = -(i/2) (10 |11><11| + 1 |Phi+><Phi+| + 9 |Phi-><Phi-|).
        let model = build_bell_decay(BellRates::reference()).unwrap();
        let e11 = CVector::basis(4, 3);
        let expected = e11
            .outer(&e11)
            .scale(C64::new(10.0, 0.0))
            .add(&bell_plus().outer(&bell_plus()))
            .add(&bell_minus().outer(&bell_minus()).scale(C64::new(9.0, 0.0)))
            .scale(C64::new(0.0, -0.5));
        assert!(model.effective_hamiltonian().sub(&expected).max_norm() < 1e-12);
    }

    #[test]
    fn oracle_boundary_values() {
        let rates = BellRates::reference();
        let start = bell_decay_oracle(rates, 0.0);
        assert_eq!(
            (start.p11, start.p_phi_plus, start.p_phi_minus, start.p00),
            (1.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(start.negativity, 0.0);

        let end = bell_decay_oracle(rates, 60.0);
        assert!(end.p11 < 1e-12);
        assert!((end.p00 - 1.0).abs() < 1e-12);
        assert!(end.negativity < 1e-12);
    }

    #[test]
    fn oracle_populations_sum_to_one() {
        let rates = BellRates::reference();
        for i in 0..50 {
            let p = bell_decay_oracle(rates, 0.05 * i as f64);
            let sum = p.p11 + p.p_phi_plus + p.p_phi_minus + p.p00;
            assert!((sum - 1.0).abs() < 1e-15);
            assert!(p.p00 >= -1e-15);
        }
    }

    #[test]
    fn oracle_negativity_is_unimodal() {
        let rates = BellRates::reference();
        let values: Vec<f64> = (0..400)
            .map(|i| bell_decay_oracle(rates, 0.005 * i as f64).negativity)
            .collect();
        let peak = values.iter().cloned().fold(0.0, f64::max);
        assert!(peak > 0.05, "peak {peak}");
        let peak_idx = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        for w in values[..peak_idx].windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for w in values[peak_idx..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(values[0] == 0.0);
        assert!(values[399] < 0.02);
    }

    #[test]
    fn oracle_degenerate_rates_use_limit_formula() {
        // g2 equal to the total decay rate of |11>.
        let rates = BellRates {
            gamma_11_to_phi_plus: 1.0,
            gamma_phi_plus_to_00: 2.0,
            gamma_11_to_phi_minus: 1.0,
            gamma_phi_minus_to_00: 5.0,
        };
        let t = 0.7;
        let p = bell_decay_oracle(rates, t);
        let expected = 1.0 * t * libm::exp(-2.0 * t);
        assert!((p.p_phi_plus - expected).abs() < 1e-12);
    }

    // Independent check of the closed form: integrate the classical rate
    // equations with a fine RK4 step and compare.
    #[test]
    fn oracle_matches_integrated_rate_equations() {
        let rates = BellRates::reference();
        let [g1, g2, g3, g4] = rates.as_array();
        let deriv = |p: [f64; 4]| -> [f64; 4] {
            let [p11, pp, pm, _] = p;
            [
                -(g1 + g3) * p11,
                g1 * p11 - g2 * pp,
                g3 * p11 - g4 * pm,
                g2 * pp + g4 * pm,
            ]
        };
        let add = |a: [f64; 4], b: [f64; 4], s: f64| {
            [
                a[0] + s * b[0],
                a[1] + s * b[1],
                a[2] + s * b[2],
                a[3] + s * b[3],
            ]
        };
        let mut p = [1.0, 0.0, 0.0, 0.0];
        let h = 1e-4;
        let mut t = 0.0;
        for step in 1..=20_000 {
            let k1 = deriv(p);
            let k2 = deriv(add(p, k1, h / 2.0));
            let k3 = deriv(add(p, k2, h / 2.0));
            let k4 = deriv(add(p, k3, h));
            for i in 0..4 {
                p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t = step as f64 * h;
            if step % 2000 == 0 {
                let oracle = bell_decay_oracle(rates, t);
                assert!((oracle.p11 - p[0]).abs() < 1e-9, "t={t}");
                assert!((oracle.p_phi_plus - p[1]).abs() < 1e-9, "t={t}");
                assert!((oracle.p_phi_minus - p[2]).abs() < 1e-9, "t={t}");
                assert!((oracle.p00 - p[3]).abs() < 1e-9, "t={t}");
            }
        }
        assert!(t > 1.9);
    }

    #[test]
    fn swap_operator_definition() {
        let v = swap_operator();
        let out = v.matvec(&CVector::basis(4, 1));
        assert_eq!(out.data, CVector::basis(4, 2).data);
        assert!(v.matmul(&v).sub(&CMatrix::identity(4)).max_norm() < 1e-15);
    }

    #[test]
    fn swap_oracle_limits() {
        let state = swap_initial();
        let rho0 = swap_full_oracle(1.0, 0.0, &state);
        let direct = state.composite();
        assert!(rho0.matrix().sub(&direct.outer(&direct)).max_norm() < 1e-14);

        let late = swap_full_oracle(1.0, 50.0, &state);
        let flipped = state.flipped().composite();
        let even_mix = direct
            .outer(&direct)
            .add(&flipped.outer(&flipped))
            .scale(C64::new(0.5, 0.0));
        assert!(late.matrix().sub(&even_mix).max_norm() < 1e-12);
    }

    #[test]
    fn swap_oracle_fixed_point_for_equal_factors() {
        let psi = CVector::from_reals(&[0.6, 0.8]);
        let state = ProductState::new(psi.clone(), psi).unwrap();
        let rho0 = state.composite().outer(&state.composite());
        for t in [0.3, 1.7] {
            let rho = swap_full_oracle(2.0, t, &state);
            assert!(rho.matrix().sub(&rho0).max_norm() < 1e-13);
        }
    }
}
