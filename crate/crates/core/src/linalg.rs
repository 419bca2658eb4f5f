//! Dense complex matrix helpers shared by the solvers and measures.
//!
//! Vectorization is column stacking, which is the native storage order of
//! `nalgebra`: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Square root of a positive semidefinite Hermitian matrix; negative
/// eigenvalues from roundoff are clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = hermitize(m).symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|v| c(v.max(0.0).sqrt()));
    &eig.eigenvectors * CMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint()
}

/// `½‖A − B‖₁` for Hermitian `A`, `B`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|v| v.abs()).sum::<f64>()
}

/// Von Neumann entropy in nats. Eigenvalues below `1e-14` contribute zero.
pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    hermitian_eigenvalues(rho)
        .into_iter()
        .filter(|&p| p > 1e-14)
        .map(|p| -p * p.ln())
        .sum()
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

fn compose(digits: &[usize], dims: &[usize], sites: &[usize]) -> usize {
    sites.iter().fold(0, |acc, &k| acc * dims[k] + digits[k])
}

/// Partial trace over every site not listed in `keep`. `keep` is taken in
/// ascending site order regardless of how it is given.
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let total: usize = dims.iter().product();
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for row in 0..total {
        let rd = digits(row, dims);
        for col in 0..total {
            let cd = digits(col, dims);
            if traced.iter().any(|&k| rd[k] != cd[k]) {
                continue;
            }
            out[(compose(&rd, dims, &keep), compose(&cd, dims, &keep))] += rho[(row, col)];
        }
    }
    out
}

/// Transpose the tensor factors listed in `sites`.
pub fn partial_transpose(rho: &CMatrix, dims: &[usize], sites: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    let all: Vec<usize> = (0..dims.len()).collect();
    let mut out = CMatrix::zeros(total, total);
    for row in 0..total {
        let rd = digits(row, dims);
        for col in 0..total {
            let cd = digits(col, dims);
            let (mut nr, mut nc) = (rd.clone(), cd.clone());
            for &k in sites {
                nr[k] = cd[k];
                nc[k] = rd[k];
            }
            out[(compose(&nr, dims, &all), compose(&nc, dims, &all))] = rho[(row, col)];
        }
    }
    out
}
