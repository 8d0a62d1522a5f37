//! Open-system problem definition: bipartition, Hamiltonian, Lindblad
//! operators, and the state-dependent reduced operators that drive the
//! restricted evolution.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{
    operator_schmidt_rank, partial_inner, partial_trace, Bipartition, CMatrix, CVector, Subsystem,
    C64,
};

/// Hermiticity tolerance for Hamiltonians at construction.
const H_TOL: f64 = 1e-10;

/// A bipartite open system: Hamiltonian `H` and Lindblad operators `L^m` with
/// rates absorbed as `sqrt(gamma)` factors, all acting on the composite space
/// `dim_a * dim_b`.
///
/// `L^m dag L^m` products and the effective non-Hermitian Hamiltonian are
/// precomputed once; the model is immutable afterwards and freely shareable
/// across threads.
#[derive(Debug, Clone)]
pub struct SystemModel {
    dims: Bipartition,
    hamiltonian: CMatrix,
    lindblads: Vec<CMatrix>,
    lindblad_squares: Vec<CMatrix>,
    sum_squares: CMatrix,
    effective_h: CMatrix,
    /// `(A, B)` with `A ⊗ B = L^m` for channels of exact product form.
    product_factors: Vec<Option<(CMatrix, CMatrix)>>,
    label: String,
}

impl SystemModel {
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        hamiltonian: CMatrix,
        lindblads: Vec<CMatrix>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let dims = Bipartition::new(dim_a, dim_b);
        let d = dims.total();
        if d == 0 {
            return Err(Error::InvalidConfig {
                detail: "subsystem dimensions must be positive",
            });
        }
        if hamiltonian.rows() != d || hamiltonian.cols() != d {
            return Err(Error::DimensionMismatch {
                context: "hamiltonian",
                expected: d,
                found: hamiltonian.rows(),
            });
        }
        if !hamiltonian.is_finite() {
            return Err(Error::NonFinite {
                context: "hamiltonian",
            });
        }
        let dev = hamiltonian.hermiticity_deviation();
        if dev > H_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        for l in &lindblads {
            if l.rows() != d || l.cols() != d {
                return Err(Error::DimensionMismatch {
                    context: "lindblad operator",
                    expected: d,
                    found: l.rows(),
                });
            }
            if !l.is_finite() {
                return Err(Error::NonFinite {
                    context: "lindblad operator",
                });
            }
        }

        let hamiltonian = hamiltonian.symmetrize();
        let lindblad_squares: Vec<CMatrix> =
            lindblads.iter().map(|l| l.dagger().matmul(l)).collect();
        let mut sum_squares = CMatrix::zeros(d, d);
        for sq in &lindblad_squares {
            sum_squares = sum_squares.add(sq);
        }
        // H - (i/2) sum_m L^m dag L^m
        let effective_h = hamiltonian.sub(&sum_squares.scale(C64::new(0.0, 0.5)));
        let product_factors = lindblads
            .iter()
            .map(|l| product_factorization(l, dims))
            .collect();

        Ok(Self {
            dims,
            hamiltonian,
            lindblads,
            lindblad_squares,
            sum_squares,
            effective_h,
            product_factors,
            label: label.into(),
        })
    }

    pub fn dims(&self) -> Bipartition {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn lindblads(&self) -> &[CMatrix] {
        &self.lindblads
    }

    /// Precomputed `L^m dag L^m`.
    pub fn lindblad_square(&self, m: usize) -> &CMatrix {
        &self.lindblad_squares[m]
    }

    /// Precomputed `sum_m L^m dag L^m`.
    pub fn sum_squares(&self) -> &CMatrix {
        &self.sum_squares
    }

    pub fn channels(&self) -> usize {
        self.lindblads.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Effective non-Hermitian Hamiltonian `H - (i/2) sum_m L^m dag L^m`
    /// generating the no-jump evolution.
    pub fn effective_hamiltonian(&self) -> &CMatrix {
        &self.effective_h
    }

    /// Exact factorization `L^m = A ⊗ B` for channels of product form,
    /// detected at construction. Restricted jumps on such channels act through
    /// the factors themselves, which keeps the post-jump state defined even
    /// where the scalar `<L^m>` vanishes (the reduced operators `(L)_A =
    /// <B> A`, `(L)_B = <A> B` pick up removable zeros there).
    pub fn product_factors(&self, m: usize) -> Option<&(CMatrix, CMatrix)> {
        self.product_factors[m].as_ref()
    }

    /// Upper bound on the total jump rate `sum_m <L^m dag L^m>` over all
    /// states; used to choose substep counts.
    pub fn jump_rate_bound(&self) -> f64 {
        self.sum_squares.inf_norm()
    }

    /// Scale of the Hamiltonian, for integrator step control.
    pub fn hamiltonian_scale(&self) -> f64 {
        self.hamiltonian.inf_norm()
    }

    /// Reduced operators for the current product state; recomputed whenever
    /// the state changes, which is what makes the restricted generator
    /// nonlinear.
    pub fn reduced_operators(&self, state: &ProductState) -> ReducedOperatorSet {
        let psi_a = &state.psi_a;
        let psi_b = &state.psi_b;
        let composite = state.composite();

        let h_a = partial_inner(&self.hamiltonian, psi_b, Subsystem::A)
            .expect("model and state dimensions agree");
        let h_b = partial_inner(&self.hamiltonian, psi_a, Subsystem::B)
            .expect("model and state dimensions agree");

        let mut channels = Vec::with_capacity(self.lindblads.len());
        let da = self.dims.dim_a;
        let db = self.dims.dim_b;
        let mut sum_square_a = CMatrix::zeros(da, da);
        let mut sum_square_b = CMatrix::zeros(db, db);
        for (l, sq) in self.lindblads.iter().zip(self.lindblad_squares.iter()) {
            let reduced_a = partial_inner(l, psi_b, Subsystem::A).expect("dims agree");
            let reduced_b = partial_inner(l, psi_a, Subsystem::B).expect("dims agree");
            let square_a = partial_inner(sq, psi_b, Subsystem::A).expect("dims agree");
            let square_b = partial_inner(sq, psi_a, Subsystem::B).expect("dims agree");
            let amplitude = l.quadratic_form(&composite);
            let rate = sq.quadratic_form(&composite).re.max(0.0);
            sum_square_a = sum_square_a.add(&square_a);
            sum_square_b = sum_square_b.add(&square_b);
            channels.push(ReducedChannel {
                reduced_a,
                reduced_b,
                square_a,
                square_b,
                amplitude,
                rate,
            });
        }

        ReducedOperatorSet {
            h_a,
            h_b,
            channels,
            sum_square_a,
            sum_square_b,
        }
    }

    /// Diagnoses whether the generator preserves separability: every Lindblad
    /// operator must be of product form (operator Schmidt rank 1) and the
    /// effective Hamiltonian must split as `Ha ⊗ 1 + 1 ⊗ Hb`.
    ///
    /// Locality of the effective Hamiltonian is tested through the residual of
    /// its local decomposition, with the single-site parts obtained by
    /// contraction against the maximally mixed state; when a `reference`
    /// product state is supplied, the residual contracted against that state
    /// must vanish as well.
    pub fn separability_report(
        &self,
        tol: f64,
        reference: Option<&ProductState>,
    ) -> SeparabilityReport {
        let dims = self.dims;
        let mut schmidt_ranks = Vec::with_capacity(self.lindblads.len());
        let mut offending = Vec::new();
        for (m, l) in self.lindblads.iter().enumerate() {
            let rank = operator_schmidt_rank(l, dims, tol).unwrap_or(usize::MAX);
            if rank > 1 {
                offending.push(m);
            }
            schmidt_ranks.push(rank);
        }

        let scale = self.effective_h.max_norm().max(1.0);
        let mut h_residual = local_decomposition_residual_mixed(&self.effective_h, dims);
        if let Some(state) = reference {
            let contracted = local_decomposition_residual_state(&self.effective_h, state);
            h_residual = h_residual.max(contracted);
        }
        let h_local = h_residual <= tol * scale;

        SeparabilityReport {
            is_separable: offending.is_empty() && h_local,
            schmidt_ranks,
            offending,
            h_residual,
            h_local,
        }
    }
}

/// Attempt to split a composite operator into exact tensor factors `A ⊗ B`.
///
/// The reshuffled matrix of a product operator is rank one, `R = vec(A)
/// vec(B)^T`; the factors are read off by pivoting on its largest entry and
/// verified against the original to 1e-10 relative.
fn product_factorization(op: &CMatrix, dims: Bipartition) -> Option<(CMatrix, CMatrix)> {
    let r = crate::linalg::reshuffle(op, dims).ok()?;
    let (rows, cols) = (r.rows(), r.cols());
    let mut pivot = (0usize, 0usize);
    let mut best = 0.0f64;
    for i in 0..rows {
        for j in 0..cols {
            let mag = r[(i, j)].norm_sqr();
            if mag > best {
                best = mag;
                pivot = (i, j);
            }
        }
    }
    if best == 0.0 {
        return None;
    }
    let (pr, pc) = pivot;
    let da = dims.dim_a;
    let db = dims.dim_b;
    let mut a = CMatrix::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            a[(i, j)] = r[(i * da + j, pc)];
        }
    }
    let inv_pivot = C64::new(1.0, 0.0) / r[(pr, pc)];
    let mut b = CMatrix::zeros(db, db);
    for k in 0..db {
        for l in 0..db {
            b[(k, l)] = r[(pr, k * db + l)] * inv_pivot;
        }
    }
    let tol = 1e-10 * op.max_norm().max(1.0);
    if a.kron(&b).sub(op).max_norm() <= tol {
        Some((a, b))
    } else {
        None
    }
}

/// Residual of `op - (op)_A ⊗ 1 - 1 ⊗ (op)_B + <op> 1` with the single-site
/// parts contracted against the maximally mixed state. Vanishes exactly iff
/// `op` is a sum of single-site terms.
fn local_decomposition_residual_mixed(op: &CMatrix, dims: Bipartition) -> f64 {
    let tr_b = partial_trace(op, dims, Subsystem::A).expect("square operator");
    let tr_a = partial_trace(op, dims, Subsystem::B).expect("square operator");
    let op_a = tr_b.scale(C64::new(1.0 / dims.dim_b as f64, 0.0));
    let op_b = tr_a.scale(C64::new(1.0 / dims.dim_a as f64, 0.0));
    let mean = op.trace() / C64::new(dims.total() as f64, 0.0);
    residual_norm(op, dims, &op_a, &op_b, mean)
}

/// Same residual with the contractions taken against a product state.
fn local_decomposition_residual_state(op: &CMatrix, state: &ProductState) -> f64 {
    let dims = Bipartition::new(state.psi_a.dim(), state.psi_b.dim());
    let op_a = partial_inner(op, &state.psi_b, Subsystem::A).expect("dims agree");
    let op_b = partial_inner(op, &state.psi_a, Subsystem::B).expect("dims agree");
    let mean = op.quadratic_form(&state.composite());
    residual_norm(op, dims, &op_a, &op_b, mean)
}

fn residual_norm(
    op: &CMatrix,
    dims: Bipartition,
    op_a: &CMatrix,
    op_b: &CMatrix,
    mean: C64,
) -> f64 {
    let ia = CMatrix::identity(dims.dim_a);
    let ib = CMatrix::identity(dims.dim_b);
    let local = op_a.kron(&ib).add(&ia.kron(op_b));
    let correction = CMatrix::identity(dims.total()).scale(mean);
    op.sub(&local).add(&correction).max_norm()
}

/// Outcome of [`SystemModel::separability_report`].
#[derive(Debug, Clone)]
pub struct SeparabilityReport {
    pub is_separable: bool,
    /// Operator Schmidt rank of each Lindblad operator.
    pub schmidt_ranks: Vec<usize>,
    /// Indices of Lindblad operators that are not of product form.
    pub offending: Vec<usize>,
    /// Residual of the local decomposition of the effective Hamiltonian.
    pub h_residual: f64,
    pub h_local: bool,
}

/// A product pure state `|psi_a> ⊗ |psi_b>`, the carrier of restricted
/// trajectories. Both factors are kept normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub psi_a: CVector,
    pub psi_b: CVector,
}

impl ProductState {
    /// Requires both factors normalized to 1e-12.
    pub fn new(psi_a: CVector, psi_b: CVector) -> Result<Self> {
        for v in [&psi_a, &psi_b] {
            let dev = (v.norm() - 1.0).abs();
            if dev > 1e-12 {
                return Err(Error::InvalidState {
                    norm_deviation: dev,
                });
            }
        }
        Ok(Self { psi_a, psi_b })
    }

    /// Normalizes both factors.
    pub fn normalized(psi_a: &CVector, psi_b: &CVector) -> Result<Self> {
        Ok(Self {
            psi_a: psi_a.normalized()?,
            psi_b: psi_b.normalized()?,
        })
    }

    /// Composite state vector `psi_a ⊗ psi_b`.
    pub fn composite(&self) -> CVector {
        self.psi_a.kron(&self.psi_b)
    }

    /// Swaps the two factors (meaningful only for equal subsystem dimensions).
    pub fn flipped(&self) -> ProductState {
        ProductState {
            psi_a: self.psi_b.clone(),
            psi_b: self.psi_a.clone(),
        }
    }
}

/// Reduced operator of a single dissipation channel at a fixed product state:
/// `(L)_A`, `(L)_B`, `(L dag L)_A`, `(L dag L)_B`, the full expectation
/// `<L>`, and the jump rate `<L dag L>` (clamped to be nonnegative).
#[derive(Debug, Clone)]
pub struct ReducedChannel {
    pub reduced_a: CMatrix,
    pub reduced_b: CMatrix,
    pub square_a: CMatrix,
    pub square_b: CMatrix,
    pub amplitude: C64,
    pub rate: f64,
}

/// All reduced operators at a fixed product state: the single-site Hamiltonian
/// contractions, the per-channel reductions, and the summed reduced
/// dissipator parts entering the no-jump propagator.
#[derive(Debug, Clone)]
pub struct ReducedOperatorSet {
    pub h_a: CMatrix,
    pub h_b: CMatrix,
    pub channels: Vec<ReducedChannel>,
    pub sum_square_a: CMatrix,
    pub sum_square_b: CMatrix,
}

impl ReducedOperatorSet {
    /// Total jump rate `sum_m <L^m dag L^m>`.
    pub fn total_rate(&self) -> f64 {
        self.channels.iter().map(|c| c.rate).sum()
    }
}
