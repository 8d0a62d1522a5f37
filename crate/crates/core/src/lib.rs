//! Core library for simulating bipartite open quantum systems under two kinds
//! of Markovian dynamics:
//!
//! * the ordinary Lindblad master equation, integrated deterministically or
//!   unravelled into Monte Carlo wave-function (quantum-jump) trajectories;
//! * a restricted, nonlinear variant of the same generator whose trajectories
//!   are confined to product states, so that the evolved ensemble carries
//!   classical correlations only.
//!
//! Comparing observables between the two evolutions quantifies how much a
//! dissipative process relies on entanglement. The crate also ships the two
//! reference scenarios used throughout the test suite (a decay cascade through
//! maximally entangled intermediate levels, and a random exchange interaction
//! built on the swap operator), together with their closed-form solutions.
//!
//! The crate is `no_std` (with `alloc`); all I/O, parallel dispatch, and file
//! formats live in the companion CLI crate.
//!
//! # Conventions
//!
//! Composite states live on a Hilbert space of dimension `dim_a * dim_b`, with
//! the left tensor factor belonging to subsystem A and row-major composite
//! indexing `i = a * dim_b + b`. For two qubits the basis ordering is
//! `{|00>, |01>, |10>, |11>}`. Lindblad operators carry their rates absorbed
//! as `sqrt(gamma)` factors, and `hbar = 1` throughout.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod full;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod rng;
pub mod scenarios;
pub mod separable;

pub use error::Error;
pub use linalg::{Bipartition, CMatrix, CVector, DensityMatrix, Subsystem, C64};
pub use model::{ProductState, ReducedOperatorSet, SystemModel};

/// Statement of the global basis convention, recorded in run manifests.
pub const BASIS_ORDERING: &str = "composite index i = a*dim_b + b, left factor = subsystem A; \
     two-qubit order {|00>, |01>, |10>, |11>}";
