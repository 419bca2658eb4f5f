//! Hamiltonian and Lindblad generator assembly, steady states, time
//! evolution and partial traces.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, StepControl};
use crate::linalg::{self, c, dagger, hermitize, identity, kron, CMatrix, CVector, I};
use crate::network::{JumpKind, NetworkSpec};
use crate::spin::{embed, spin_operators, SpinOperatorSet};

/// Hermitian, unit-trace state on the network Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > Self::HERMITICITY_TOL {
            return Err(Error::validation("rho", format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr - c(1.0)).norm() > Self::TRACE_TOL {
            return Err(Error::validation("rho", format!("trace {tr} differs from 1")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix { matrix }
    }

    pub fn pure(psi: &CVector) -> Self {
        let psi = psi / c(psi.norm());
        DensityMatrix {
            matrix: &psi * psi.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: identity(dim) * c(1.0 / dim as f64),
        }
    }

    /// Projector onto basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix[(index, index)] = c(1.0);
        DensityMatrix { matrix }
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    /// `Tr[op ρ]`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (op * &self.matrix).trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        linalg::trace_distance(&self.matrix, &other.matrix)
    }
}

/// Lindblad generator acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Superoperator { dim, matrix })
    }

    /// Hilbert-space dimension `D`; the matrix is `D² × D²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        linalg::unvectorize(&(&self.matrix * linalg::vectorize(x)), self.dim)
    }

    /// `−i[H, ·]` plus `Σ rate·D[A]` over `(rate, A)` channels.
    pub fn lindblad(h: &CMatrix, channels: &[(f64, CMatrix)]) -> Self {
        let d = h.nrows();
        let id = identity(d);
        let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * (-I);
        for (rate, a) in channels {
            if *rate == 0.0 {
                continue;
            }
            let ada = dagger(a) * a;
            let term = kron(&a.conjugate(), a) - kron(&id, &ada) * c(0.5) - kron(&ada.transpose(), &id) * c(0.5);
            l += term * c(*rate);
        }
        Superoperator { dim: d, matrix: l }
    }
}

pub fn free_hamiltonian(spec: &NetworkSpec) -> Result<CMatrix> {
    spec.validate()?;
    let ops = spin_operators(spec.spin);
    let mut h = CMatrix::zeros(spec.dim(), spec.dim());
    for (k, &w) in spec.omegas.iter().enumerate() {
        if w != 0.0 {
            h += embed(&ops.jz, k, spec)? * c(w);
        }
    }
    Ok(h)
}

/// `V = Σ_{k<l} Σ_α u^α_{kl} J^α_k J^α_l`, without the overall `ε`.
pub fn interaction(spec: &NetworkSpec) -> Result<CMatrix> {
    spec.validate()?;
    let ops = spin_operators(spec.spin);
    let mut v = CMatrix::zeros(spec.dim(), spec.dim());
    for cp in &spec.couplings {
        let (k, l) = cp.pair;
        for (u, op) in [(cp.ux, &ops.jx), (cp.uy, &ops.jy), (cp.uz, &ops.jz)] {
            if u != 0.0 {
                v += embed(op, k, spec)? * embed(op, l, spec)? * c(u);
            }
        }
    }
    Ok(v)
}

pub fn build_hamiltonian(spec: &NetworkSpec) -> Result<CMatrix> {
    let mut h = free_hamiltonian(spec)?;
    if spec.epsilon != 0.0 {
        h += interaction(spec)? * c(spec.epsilon);
    }
    Ok(h)
}

pub fn jump_operators(ops: &SpinOperatorSet, kind: JumpKind) -> (CMatrix, CMatrix) {
    match kind {
        JumpKind::JpmJz => (&ops.jplus * &ops.jz, &ops.jminus * &ops.jz),
        JumpKind::Jpm => (ops.jplus.clone(), ops.jminus.clone()),
    }
}

/// Dissipation channels `(γ_k^±·f, O_k^±)` embedded in the network space,
/// where `f` is 1 or 1/2 according to the spec's [`RateConvention`].
///
/// [`RateConvention`]: crate::network::RateConvention
pub fn dissipation_channels(spec: &NetworkSpec) -> Result<Vec<(f64, CMatrix)>> {
    spec.validate()?;
    let ops = spin_operators(spec.spin);
    let (up, down) = jump_operators(&ops, spec.jump);
    let f = spec.rate_convention.factor();
    let mut channels = Vec::with_capacity(2 * spec.sites);
    for k in 0..spec.sites {
        channels.push((f * spec.gains[k], embed(&up, k, spec)?));
        channels.push((f * spec.damps[k], embed(&down, k, spec)?));
    }
    Ok(channels)
}

pub fn build_liouvillian(spec: &NetworkSpec) -> Result<Superoperator> {
    let h = build_hamiltonian(spec)?;
    Ok(Superoperator::lindblad(&h, &dissipation_channels(spec)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    NullSpace,
    Evolve,
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    pub kernel_dim: usize,
    /// `‖L vec(ρ)‖₂`.
    pub residual: f64,
    pub method: SolveMethod,
    /// Set when more than one singular value fell below the threshold.
    pub degenerate: bool,
}

/// Relative singular-value threshold used by callers that do not choose one.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;

/// Kernel of `L` by SVD; singular values below `tol·σ_max` span the kernel.
///
/// A degenerate kernel returns the unit-norm kernel combination with the
/// largest trace and sets `degenerate`.
pub fn steady_state(l: &Superoperator, tol: f64) -> Result<SteadyStateResult> {
    let d = l.dim();
    let svd = l.matrix().clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    let mut kernel: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] < tol * sigma_max).collect();
    if kernel.is_empty() {
        kernel.push(sigma.imin());
    }
    let vectors: Vec<CMatrix> = kernel
        .iter()
        .map(|&i| {
            let v: CVector = v_t.row(i).adjoint();
            linalg::unvectorize(&v, d)
        })
        .collect();
    let traces: Vec<Complex64> = vectors.iter().map(linalg::trace).collect();
    let norm = traces.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::NoTrace { trace: norm });
    }
    let mut k = CMatrix::zeros(d, d);
    for (v, t) in vectors.iter().zip(&traces) {
        k += v * (t.conj() / norm);
    }
    let k = hermitize(&k);
    let tr = linalg::trace(&k).re;
    if tr.abs() < 1e-12 {
        return Err(Error::NoTrace { trace: tr });
    }
    let rho = k * c(1.0 / tr);
    let residual = (l.matrix() * linalg::vectorize(&rho)).norm();
    Ok(SteadyStateResult {
        rho: DensityMatrix::from_matrix_unchecked(rho),
        kernel_dim: kernel.len(),
        residual,
        method: SolveMethod::NullSpace,
        degenerate: kernel.len() > 1,
    })
}

/// Default step: `0.01 / rate_scale`.
pub fn default_dt(spec: &NetworkSpec) -> f64 {
    0.01 / spec.rate_scale().max(1e-300)
}

/// Integrate `dρ/dt = L ρ` to `t_final`.
pub fn evolve(l: &Superoperator, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    evolve_observed(l, rho0, t_final, &StepControl::new(dt), |_, _| {})
}

pub fn evolve_observed<O>(
    l: &Superoperator,
    rho0: &DensityMatrix,
    t_final: f64,
    ctl: &StepControl,
    mut observe: O,
) -> Result<DensityMatrix>
where
    O: FnMut(f64, &DensityMatrix),
{
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho0.dim(),
        });
    }
    let d = l.dim();
    let y = integrate(
        |y| l.matrix() * y,
        linalg::vectorize(rho0.matrix()),
        t_final,
        ctl,
        |t, y| observe(t, &DensityMatrix::from_matrix_unchecked(linalg::unvectorize(y, d))),
    )?;
    Ok(DensityMatrix::from_matrix_unchecked(linalg::unvectorize(&y, d)))
}

/// Steady state by long-time evolution from the maximally mixed state.
pub fn steady_state_by_evolution(l: &Superoperator, t_final: f64, dt: f64) -> Result<SteadyStateResult> {
    let rho = evolve(l, &DensityMatrix::maximally_mixed(l.dim()), t_final, dt)?;
    let m = hermitize(rho.matrix());
    let m = &m * c(1.0 / linalg::trace(&m).re);
    let residual = (l.matrix() * linalg::vectorize(&m)).norm();
    Ok(SteadyStateResult {
        rho: DensityMatrix::from_matrix_unchecked(m),
        kernel_dim: 1,
        residual,
        method: SolveMethod::Evolve,
        degenerate: false,
    })
}

/// Partial trace onto the sites in `keep` (ascending order).
pub fn reduced_density(rho: &DensityMatrix, keep: &[usize], spec: &NetworkSpec) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    if let Some(&site) = keep.iter().find(|&&k| k >= spec.sites) {
        return Err(Error::SiteOutOfRange {
            site,
            sites: spec.sites,
        });
    }
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho.dim(),
        });
    }
    Ok(DensityMatrix::from_matrix_unchecked(linalg::partial_trace(
        rho.matrix(),
        &spec.site_dims(),
        keep,
    )))
}
