//! The `check` subcommand: a fast self-test of the numerical core, printing
//! one line per invariant.

use seplind_core::full::{integrate_master, kraus_step_full, EvolutionConfig};
use seplind_core::linalg::{
    hermitian_eigen, hermitian_eigenvalues, operator_schmidt_rank, partial_inner,
    partial_transpose, Bipartition, CMatrix, CVector, DensityMatrix, Subsystem, C64,
};
use seplind_core::model::ProductState;
use seplind_core::observables::{bootstrap_band, negativity};
use seplind_core::rng::CounterRng;
use seplind_core::scenarios::{self, BellRates};
use seplind_core::separable::{generator_consistency_check, swap_restricted_closed_form};

struct Checker {
    failures: usize,
}

impl Checker {
    fn run(&mut self, name: &str, pass: bool, detail: String) {
        if pass {
            println!("check {name:<42} ok");
        } else {
            println!("check {name:<42} FAILED: {detail}");
            self.failures += 1;
        }
    }
}

/// Run the built-in invariant suite; returns the number of failures.
pub fn run_all() -> usize {
    let mut checker = Checker { failures: 0 };
    let c = |re: f64, im: f64| C64::new(re, im);
    let dims = Bipartition::new(2, 2);

    // Tensor product identities.
    {
        let i4 = CMatrix::identity(2).kron(&CMatrix::identity(2));
        checker.run(
            "tensor identity",
            i4 == CMatrix::identity(4),
            "I2 x I2 != I4".into(),
        );
        let sx = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let out = sx.kron(&CMatrix::identity(2)).matvec(&CVector::basis(4, 0));
        checker.run(
            "tensor basis permutation",
            out.data == CVector::basis(4, 2).data,
            "sigma_x x I |00> != |10>".into(),
        );
    }

    // Partial transpose involution and Bell spectrum.
    {
        let bell = scenarios::bell_plus();
        let rho = bell.outer(&bell);
        let pt = partial_transpose(&rho, dims, Subsystem::B).unwrap();
        let back = partial_transpose(&pt, dims, Subsystem::B).unwrap();
        checker.run(
            "partial transpose involution",
            back == rho,
            "not exact".into(),
        );
        let eigs = hermitian_eigenvalues(&pt).unwrap();
        let dev = (eigs[0] + 0.5).abs().max((eigs[3] - 0.5).abs());
        checker.run(
            "Bell partial transpose spectrum",
            dev < 1e-12,
            format!("deviation {dev:e}"),
        );
    }

    // Eigendecomposition reconstruction on a fixed complex Hermitian matrix.
    {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.2, -0.7), c(0.0, 0.3), c(0.1, 0.0)],
            vec![c(0.2, 0.7), c(-0.5, 0.0), c(0.4, 0.1), c(0.0, -0.2)],
            vec![c(0.0, -0.3), c(0.4, -0.1), c(2.0, 0.0), c(0.6, 0.0)],
            vec![c(0.1, 0.0), c(0.0, 0.2), c(0.6, 0.0), c(0.3, 0.0)],
        ]);
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        let mut rec = CMatrix::zeros(4, 4);
        for (i, &lam) in vals.iter().enumerate() {
            let col = CVector::new((0..4).map(|r| vecs[(r, i)]).collect());
            rec = rec.add(&col.outer(&col).scale(c(lam, 0.0)));
        }
        let dev = rec.sub(&m).max_norm();
        checker.run(
            "eigen reconstruction",
            dev < 1e-8,
            format!("deviation {dev:e}"),
        );
        let trace_dev = (vals.iter().sum::<f64>() - m.trace().re).abs();
        checker.run(
            "eigenvalue sum equals trace",
            trace_dev < 1e-10,
            format!("deviation {trace_dev:e}"),
        );
    }

    // Operator Schmidt ranks of the reference operators.
    {
        let sx = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let product = sx.kron(&CMatrix::identity(2));
        let rank_product = operator_schmidt_rank(&product, dims, 1e-10).unwrap();
        let rank_swap = operator_schmidt_rank(&scenarios::swap_operator(), dims, 1e-10).unwrap();
        let bell_jump = scenarios::bell_plus().outer(&CVector::basis(4, 3));
        let rank_jump = operator_schmidt_rank(&bell_jump, dims, 1e-10).unwrap();
        checker.run(
            "operator Schmidt ranks",
            rank_product == 1 && rank_swap == 4 && rank_jump == 2,
            format!("got ({rank_product}, {rank_swap}, {rank_jump}), want (1, 4, 2)"),
        );
    }

    // Reduced swap operators are projectors onto the partner state.
    {
        let psi_a = CVector::from_reals(&[0.6, 0.8]);
        let psi_b = CVector::from_reals(&[1.0, 0.0]);
        let reduced = partial_inner(&scenarios::swap_operator(), &psi_b, Subsystem::A).unwrap();
        let dev = reduced.sub(&psi_b.outer(&psi_b)).max_norm();
        checker.run(
            "swap reduction projector",
            dev < 1e-12,
            format!("deviation {dev:e}"),
        );
        let _ = psi_a;
    }

    // Negativity of the Bell projector.
    {
        let rho = DensityMatrix::pure(&scenarios::bell_plus()).unwrap();
        let n = negativity(&rho, dims).unwrap();
        checker.run(
            "Bell negativity 1/2",
            (n - 0.5).abs() < 1e-10,
            format!("{n}"),
        );
    }

    // Kraus branch weights of the decay model.
    {
        let model = scenarios::build_bell_decay(BellRates::reference()).unwrap();
        let branches = kraus_step_full(&model, &CVector::basis(4, 3), 0.01);
        let ok = (branches[0].weight - 0.9025).abs() < 1e-12
            && (branches[1].weight - 0.09).abs() < 1e-14
            && (branches[3].weight - 0.01).abs() < 1e-14;
        checker.run(
            "decay Kraus branch weights",
            ok,
            format!(
                "weights ({}, {}, {})",
                branches[0].weight, branches[1].weight, branches[3].weight
            ),
        );
    }

    // Deterministic integration against the exchange closed form.
    {
        let model = scenarios::build_swap(1.0).unwrap();
        let state = scenarios::swap_initial();
        let rho0 = DensityMatrix::pure(&state.composite()).unwrap();
        let config = EvolutionConfig::new(1.0, 0.25);
        let series = integrate_master(&model, &rho0, &config).unwrap();
        let mut worst: f64 = 0.0;
        for (t, rho) in &series {
            let exact = scenarios::swap_full_oracle(1.0, *t, &state);
            worst = worst.max(rho.matrix().sub(exact.matrix()).max_norm());
        }
        checker.run(
            "integrator vs exchange closed form",
            worst < 1e-6,
            format!("max deviation {worst:e}"),
        );
    }

    // Restricted binomial closed form refines to the full solution.
    {
        let state = scenarios::swap_initial();
        let s = 400_000u64;
        let t = 1.0;
        let restricted = swap_restricted_closed_form(1.0, t / s as f64, s, &state).unwrap();
        let full = scenarios::swap_full_oracle(1.0, t, &state);
        let dev = restricted.matrix().sub(full.matrix()).max_norm();
        checker.run(
            "restricted refinement limit",
            dev < 1e-5,
            format!("deviation {dev:e}"),
        );
    }

    // Branch average reproduces the restricted generator.
    {
        let model = scenarios::build_swap(1.0).unwrap();
        let state = scenarios::swap_initial();
        let r1 = generator_consistency_check(&model, &state, 0.02).unwrap();
        let r2 = generator_consistency_check(&model, &state, 0.01).unwrap();
        let ratio = (r1.residual / 0.02) / (r2.residual / 0.01);
        checker.run(
            "restricted generator consistency",
            (0.5..=2.0).contains(&ratio) && r1.skipped_channels.is_empty(),
            format!("constant ratio {ratio}"),
        );
    }

    // Restricted trajectories remain product states.
    {
        let model = scenarios::build_bell_decay(BellRates::reference()).unwrap();
        let config = EvolutionConfig::new(1.0, 0.2);
        let mut rng = CounterRng::new(3, 1);
        let rec = seplind_core::separable::mcwf_trajectory_separable(
            &model,
            &scenarios::bell_decay_initial(),
            &config,
            &mut rng,
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        for s in &rec.states {
            let coeffs = seplind_core::linalg::schmidt_coefficients(&s.composite(), dims).unwrap();
            worst = worst.max((coeffs[0] - 1.0).abs());
        }
        checker.run(
            "restricted trajectories stay product",
            rec.aborted.is_none() && worst < 1e-10,
            format!("largest Schmidt deviation {worst:e}"),
        );
    }

    // Counter-based generator reference values.
    {
        let mut rng = CounterRng::new(0, 0);
        let ok = rng.next_u64() == 0x4181b152fb77616f && rng.next_u64() == 0x169c646d52269d62;
        checker.run("rng reference stream", ok, "frozen values changed".into());
    }

    // Bootstrap degenerate cases.
    {
        let series = bootstrap_band(&[0.0], &[vec![0.4; 6]], 100, 1, "c").unwrap();
        let zero_band = series.stddev[0] == 0.0;
        let err = bootstrap_band(&[0.0], &[vec![1.0]], 10, 0, "one").is_err();
        checker.run(
            "bootstrap degenerate cases",
            zero_band && err,
            "identical batches or single-batch handling broken".into(),
        );
    }

    // Product-state normalization contract.
    {
        let bad = ProductState::new(CVector::from_reals(&[0.5, 0.5]), CVector::basis(2, 0));
        checker.run(
            "product state validation",
            bad.is_err(),
            "unnormalized factor accepted".into(),
        );
    }

    checker.failures
}
