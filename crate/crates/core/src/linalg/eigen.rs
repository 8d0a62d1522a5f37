//! Hermitian eigendecomposition by cyclic Jacobi rotations, plus the singular
//! values and operator Schmidt rank built on top of it.
//!
//! The solver is self-contained: at the dimensions this crate works with
//! (d <= 16) Jacobi is robust, and its quadratic convergence leaves no reason
//! to pull in an external eigensolver. Complex Hermitian pivots are reduced to
//! real 2x2 rotations by absorbing the phase of the off-diagonal entry.

use alloc::vec;
use alloc::vec::Vec;

use super::{Bipartition, CMatrix, C64};
use crate::error::{Error, Result};

/// Tolerance on `max|m - m^dag|` accepted by the Hermitian solvers.
const HERMITICITY_TOL: f64 = 1e-10;
/// Sweep convergence: off-diagonal Frobenius mass below this fraction of the
/// matrix norm.
const CONVERGENCE_FRACTION: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and the unitary of eigenvector columns of a
/// Hermitian matrix.
///
/// The input may deviate from exact Hermiticity by at most `1e-10` in
/// max-norm; it is symmetrized before iterating.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "hermitian_eigen",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite {
            context: "hermitian_eigen",
        });
    }
    let dev = m.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }

    let d = m.rows();
    let mut a = m.symmetrize();
    let mut q = CMatrix::identity(d);
    if d <= 1 {
        let vals = if d == 1 { vec![a[(0, 0)].re] } else { vec![] };
        return Ok((vals, q));
    }

    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok((vec![0.0; d], q));
    }
    let target = CONVERGENCE_FRACTION * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_mass(&a) < target {
            converged = true;
            break;
        }
        for p in 0..d - 1 {
            for qi in p + 1..d {
                rotate(&mut a, &mut q, p, qi);
            }
        }
    }
    if !converged && off_diagonal_mass(&a) >= target {
        return Err(Error::EigenNoConvergence);
    }

    // Sort ascending, permuting eigenvector columns alongside.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..d {
            vectors[(row, new_col)] = q[(row, old_col)];
        }
    }
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|(vals, _)| vals)
}

/// Singular values of a rectangular matrix, descending, computed as square
/// roots of the eigenvalues of the smaller Gram matrix.
///
/// Eigenvalues below `1e-14` of the largest are floored to zero before the
/// square root: they sit at the double-precision noise floor of the Gram
/// matrix, and the root would otherwise inflate them to ~1e-8 relative.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let gram = if m.cols() <= m.rows() {
        m.dagger().matmul(m)
    } else {
        m.matmul(&m.dagger())
    };
    let eigs = hermitian_eigenvalues(&gram)?;
    let floor = 1e-14 * eigs.last().copied().unwrap_or(0.0).max(0.0);
    let mut sv: Vec<f64> = eigs
        .into_iter()
        .map(|x| if x > floor { libm::sqrt(x) } else { 0.0 })
        .collect();
    sv.reverse();
    Ok(sv)
}

/// Operator Schmidt rank of a composite operator: the number of singular
/// values of its reshuffled matrix exceeding `tol` times the largest one.
/// Rank 1 means the operator is of product form `A ⊗ B`.
pub fn operator_schmidt_rank(op: &CMatrix, dims: Bipartition, tol: f64) -> Result<usize> {
    let sv = operator_schmidt_values(op, dims)?;
    let top = sv.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * top).count())
}

/// Operator Schmidt coefficients (descending).
pub fn operator_schmidt_values(op: &CMatrix, dims: Bipartition) -> Result<Vec<f64>> {
    let r = super::reshuffle(op, dims)?;
    singular_values(&r)
}

fn off_diagonal_mass(a: &CMatrix) -> f64 {
    let d = a.rows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    libm::sqrt(acc)
}

/// One complex Jacobi rotation annihilating `a[(p,q)]`, applied as
/// `a <- V^dag a V`, `q <- q V`. Hermiticity is maintained exactly by
/// mirroring updated entries.
fn rotate(a: &mut CMatrix, q: &mut CMatrix, p: usize, qi: usize) {
    let beta = a[(p, qi)];
    let beta_mag = beta.norm();
    if beta_mag == 0.0 {
        return;
    }
    let phase = beta / C64::new(beta_mag, 0.0);

    let app = a[(p, p)].re;
    let aqq = a[(qi, qi)].re;
    let theta = (app - aqq) / (2.0 * beta_mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + libm::sqrt(theta * theta + 1.0))
    } else {
        -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;

    let d = a.rows();
    let cs = C64::new(c, 0.0);
    let s_conj_phase = C64::new(s, 0.0) * phase.conj();
    let s_phase = C64::new(s, 0.0) * phase;

    // Rows/columns outside the pivot plane.
    for j in 0..d {
        if j == p || j == qi {
            continue;
        }
        let ajp = a[(j, p)];
        let ajq = a[(j, qi)];
        let new_p = ajp * cs + ajq * s_conj_phase;
        let new_q = ajq * cs - ajp * s_phase;
        a[(j, p)] = new_p;
        a[(p, j)] = new_p.conj();
        a[(j, qi)] = new_q;
        a[(qi, j)] = new_q.conj();
    }

    // Pivot block.
    let app_new = app * c * c + 2.0 * beta_mag * c * s + aqq * s * s;
    let aqq_new = app * s * s - 2.0 * beta_mag * c * s + aqq * c * c;
    a[(p, p)] = C64::new(app_new, 0.0);
    a[(qi, qi)] = C64::new(aqq_new, 0.0);
    a[(p, qi)] = C64::new(0.0, 0.0);
    a[(qi, p)] = C64::new(0.0, 0.0);

    // Accumulate eigenvectors.
    for j in 0..d {
        let qjp = q[(j, p)];
        let qjq = q[(j, qi)];
        q[(j, p)] = qjp * cs + qjq * s_conj_phase;
        q[(j, qi)] = qjq * cs - qjp * s_phase;
    }
}
