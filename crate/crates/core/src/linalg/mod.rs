//! Dense complex linear algebra for small composite Hilbert spaces.
//!
//! Everything here targets dimensions of at most ~16, which is all the rest of
//! the crate needs; storage is row-major `Vec<Complex64>` and no attempt is
//! made at cache blocking or sparsity. Besides the generic container types
//! this module carries the bipartite-specific primitives: tensor (Kronecker)
//! products, partial trace and partial transpose, the contraction of a
//! composite operator against one subsystem's pure state, and the operator
//! Schmidt decomposition obtained from the reshuffled matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

mod eigen;
pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, operator_schmidt_rank, operator_schmidt_values,
    singular_values,
};

/// Complex double-precision scalar used everywhere.
pub type C64 = num_complex::Complex<f64>;

/// Which tensor factor of a bipartite space an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Dimensions of the two tensor factors; subsystem A is the left factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl Bipartition {
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        Self { dim_a, dim_b }
    }

    /// Dimension of the composite space.
    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Composite basis index of `|a> ⊗ |b>`.
    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.dim_b + b
    }

    pub fn dim(&self, part: Subsystem) -> usize {
        match part {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }
}

/// Complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    pub data: Vec<C64>,
}

impl CVector {
    pub fn new(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![C64::new(0.0, 0.0); dim],
        }
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_reals(entries: &[f64]) -> Self {
        Self {
            data: entries.iter().map(|&r| C64::new(r, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> C64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, s: C64) -> CVector {
        CVector::new(self.data.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &CVector) -> CVector {
        CVector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        CVector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Returns the unit vector along `self`, or an error if the norm vanishes.
    pub fn normalized(&self) -> Result<CVector> {
        let n = self.norm();
        if n < 1e-300 || !n.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &CVector) -> CVector {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        CVector::new(data)
    }

    /// Outer product `|self><other|`.
    pub fn outer(&self, other: &CVector) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), other.dim());
        for i in 0..self.dim() {
            for j in 0..other.dim() {
                m[(i, j)] = self.data[i] * other.data[j].conj();
            }
        }
        m
    }

    /// Largest `|<self> - <other>|` entrywise, after aligning global phases.
    ///
    /// Useful for comparing pure states that are only defined up to a phase.
    pub fn distance_up_to_phase(&self, other: &CVector) -> f64 {
        // Align on the entry of largest magnitude in self.
        let (k, _) = self
            .data
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.norm_sqr().total_cmp(&y.norm_sqr()))
            .expect("non-empty vector");
        let a = self.data[k];
        let b = other.data[k];
        let phase = if b.norm_sqr() > 0.0 && a.norm_sqr() > 0.0 {
            (a / b) / C64::new((a / b).norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(x, y)| (x - y * phase).norm())
            .fold(0.0, f64::max)
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let converted: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "inner dimensions must agree");
        let mut out = CVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v.data[j];
            }
            out.data[i] = acc;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|c| c.norm_sqr()).sum())
    }

    /// Maximum absolute row sum; upper-bounds the spectral norm for Hermitian
    /// matrices.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].norm()).sum())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Max-norm of `self - self^dag`.
    pub fn hermiticity_deviation(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian part `(self + self^dag) / 2`.
    pub fn symmetrize(&self) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * C64::new(0.5, 0.0);
                out[(i, j)] = avg;
            }
        }
        out
    }

    /// Tensor (Kronecker) product: `(a ⊗ b)[(i*rb+k, j*cb+l)] = a[i,j] b[k,l]`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// `<bra| self |ket>`.
    pub fn expectation(&self, bra: &CVector, ket: &CVector) -> C64 {
        bra.inner(&self.matvec(ket))
    }

    /// `<psi| self |psi>`.
    pub fn quadratic_form(&self, psi: &CVector) -> C64 {
        self.expectation(psi, psi)
    }
}

/// Partial transpose of a square operator on `dims`, transposing the chosen
/// factor: for `part = B`, `<i,k| out |j,l> = <i,l| m |j,k>`.
///
/// A pure index permutation, hence exactly involutive.
pub fn partial_transpose(m: &CMatrix, dims: Bipartition, part: Subsystem) -> Result<CMatrix> {
    let d = dims.total();
    if m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch {
            context: "partial_transpose",
            expected: d,
            found: m.rows(),
        });
    }
    let mut out = CMatrix::zeros(d, d);
    for i in 0..dims.dim_a {
        for k in 0..dims.dim_b {
            for j in 0..dims.dim_a {
                for l in 0..dims.dim_b {
                    let (r, c) = (dims.index(i, k), dims.index(j, l));
                    let src = match part {
                        Subsystem::B => (dims.index(i, l), dims.index(j, k)),
                        Subsystem::A => (dims.index(j, k), dims.index(i, l)),
                    };
                    out[(r, c)] = m[src];
                }
            }
        }
    }
    Ok(out)
}

/// Partial trace over the complement of `keep`.
pub fn partial_trace(m: &CMatrix, dims: Bipartition, keep: Subsystem) -> Result<CMatrix> {
    let d = dims.total();
    if m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: d,
            found: m.rows(),
        });
    }
    match keep {
        Subsystem::A => {
            let mut out = CMatrix::zeros(dims.dim_a, dims.dim_a);
            for i in 0..dims.dim_a {
                for j in 0..dims.dim_a {
                    for k in 0..dims.dim_b {
                        out[(i, j)] += m[(dims.index(i, k), dims.index(j, k))];
                    }
                }
            }
            Ok(out)
        }
        Subsystem::B => {
            let mut out = CMatrix::zeros(dims.dim_b, dims.dim_b);
            for k in 0..dims.dim_b {
                for l in 0..dims.dim_b {
                    for i in 0..dims.dim_a {
                        out[(k, l)] += m[(dims.index(i, k), dims.index(i, l))];
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Contraction of a composite operator against one subsystem's pure state,
/// producing an operator on the retained factor.
///
/// For `keep = A` the result is `M[i,j] = <phi| . |phi>`-sandwiched over the B
/// indices, divided by `<phi|phi>`:
///
/// ```text
/// M[i,j] = sum_{k,l} conj(phi[k]) op[(i,k),(j,l)] phi[l] / <phi|phi>
/// ```
///
/// and mirrored for `keep = B`. The built-in normalization makes the result
/// invariant under rescaling of `phi` by any nonzero complex number.
pub fn partial_inner(op: &CMatrix, phi: &CVector, keep: Subsystem) -> Result<CMatrix> {
    let d = op.rows();
    if !op.is_square() || phi.dim() == 0 || !d.is_multiple_of(phi.dim()) {
        return Err(Error::DimensionMismatch {
            context: "partial_inner",
            expected: d,
            found: phi.dim(),
        });
    }
    let nsq = phi.norm_sqr();
    if nsq < 1e-300 {
        return Err(Error::DegenerateState);
    }
    let d_keep = d / phi.dim();
    let inv = C64::new(1.0 / nsq, 0.0);
    let mut out = CMatrix::zeros(d_keep, d_keep);
    match keep {
        Subsystem::A => {
            // phi contracts the B factor: composite index (i, k) = i*dim_b + k.
            let dim_b = phi.dim();
            for i in 0..d_keep {
                for j in 0..d_keep {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..dim_b {
                        let pk = phi.data[k].conj();
                        if pk.norm_sqr() == 0.0 {
                            continue;
                        }
                        for l in 0..dim_b {
                            acc += pk * op[(i * dim_b + k, j * dim_b + l)] * phi.data[l];
                        }
                    }
                    out[(i, j)] = acc * inv;
                }
            }
        }
        Subsystem::B => {
            // phi contracts the A factor: composite index (i, k) = i*dim_b + k.
            let dim_a = phi.dim();
            let dim_b = d_keep;
            for k in 0..d_keep {
                for l in 0..d_keep {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..dim_a {
                        let pi = phi.data[i].conj();
                        if pi.norm_sqr() == 0.0 {
                            continue;
                        }
                        for j in 0..dim_a {
                            acc += pi * op[(i * dim_b + k, j * dim_b + l)] * phi.data[j];
                        }
                    }
                    out[(k, l)] = acc * inv;
                }
            }
        }
    }
    Ok(out)
}

/// Reshuffle a composite operator into the matrix whose singular values are
/// its operator Schmidt coefficients:
///
/// ```text
/// R[(i,j),(k,l)] = op[(i,k),(j,l)]
/// ```
///
/// with row index `i*dim_a + j` and column index `k*dim_b + l`.
pub fn reshuffle(op: &CMatrix, dims: Bipartition) -> Result<CMatrix> {
    let d = dims.total();
    if op.rows() != d || op.cols() != d {
        return Err(Error::DimensionMismatch {
            context: "reshuffle",
            expected: d,
            found: op.rows(),
        });
    }
    let (da, db) = (dims.dim_a, dims.dim_b);
    let mut out = CMatrix::zeros(da * da, db * db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[(i * da + j, k * db + l)] = op[(dims.index(i, k), dims.index(j, l))];
                }
            }
        }
    }
    Ok(out)
}

/// Schmidt coefficients (descending) of a composite pure state, i.e. the
/// singular values of its `dim_a x dim_b` amplitude matrix.
pub fn schmidt_coefficients(psi: &CVector, dims: Bipartition) -> Result<Vec<f64>> {
    if psi.dim() != dims.total() {
        return Err(Error::DimensionMismatch {
            context: "schmidt_coefficients",
            expected: dims.total(),
            found: psi.dim(),
        });
    }
    let mut amp = CMatrix::zeros(dims.dim_a, dims.dim_b);
    for a in 0..dims.dim_a {
        for b in 0..dims.dim_b {
            amp[(a, b)] = psi.data[dims.index(a, b)];
        }
    }
    singular_values(&amp)
}

/// Density matrix: Hermitian, unit-trace, finite. Positivity is *not* checked
/// at construction (it needs an eigendecomposition); see [`DensityMatrix::min_eigenvalue`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10 max-norm), unit trace (1e-10), and
    /// finiteness; stores the Hermitian part.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidDensity {
                detail: "not square",
            });
        }
        if !mat.is_finite() {
            return Err(Error::InvalidDensity {
                detail: "non-finite entries",
            });
        }
        let dev = mat.hermiticity_deviation();
        if dev > 1e-10 {
            return Err(Error::InvalidDensity {
                detail: "not Hermitian",
            });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidDensity {
                detail: "trace differs from one",
            });
        }
        Ok(Self {
            mat: mat.symmetrize(),
        })
    }

    /// `|psi><psi|` for a normalized pure state.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState {
                norm_deviation: (n - 1.0).abs(),
            });
        }
        Self::new(psi.outer(psi))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Smallest eigenvalue; a density matrix is positive semidefinite when
    /// this is nonnegative up to numerical slack.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eigs = hermitian_eigenvalues(&self.mat)?;
        Ok(eigs.first().copied().unwrap_or(0.0))
    }
}
