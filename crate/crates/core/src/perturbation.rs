//! Steady state as a power series in the coupling strength `ε`.
//!
//! With `L = L₀ − iε[V, ·]` the orders satisfy `L₀ρ⁽⁰⁾ = 0` and
//! `L₀ρ⁽ʲ⁺¹⁾ = i[V, ρ⁽ʲ⁾]`, where `L₀` includes the free Hamiltonian.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, commutator, hermitize, CMatrix, CVector, I};
use crate::liouvillian::{build_liouvillian, interaction, steady_state, DensityMatrix, DEFAULT_KERNEL_TOL};
use crate::network::{JumpKind, NetworkSpec};
use crate::spin::Spin;

/// Singular values below `PINV_CUTOFF·σ_max` are treated as kernel directions.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Largest admissible right-hand-side weight outside the range of `L₀`,
/// relative to the right-hand-side norm.
pub const COKERNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PerturbationSeries {
    pub order: usize,
    /// `ρ⁽⁰⁾ … ρ⁽ᵒʳᵈᵉʳ⁾`.
    pub terms: Vec<CMatrix>,
    pub epsilon_ref: f64,
    /// `‖L₀ρ⁽ʲ⁾ − i[V, ρ⁽ʲ⁻¹⁾]‖₂` for `j ≥ 1`; entry 0 is `‖L₀ρ⁽⁰⁾‖₂`.
    pub residuals: Vec<f64>,
}

impl PerturbationSeries {
    /// `Σ_{j ≤ upto} εʲ ρ⁽ʲ⁾`.
    pub fn partial_sum(&self, epsilon: f64, upto: usize) -> DensityMatrix {
        let mut sum = CMatrix::zeros(self.terms[0].nrows(), self.terms[0].ncols());
        for (j, t) in self.terms.iter().enumerate().take(upto + 1) {
            sum += t * c(epsilon.powi(j as i32));
        }
        DensityMatrix::from_matrix_unchecked(sum)
    }

    /// Full series at `epsilon_ref`.
    pub fn state(&self) -> DensityMatrix {
        self.partial_sum(self.epsilon_ref, self.order)
    }
}

/// Product of the single-site steady states at `ε = 0`.
pub fn zeroth_order(spec: &NetworkSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let mut rho: Option<DensityMatrix> = None;
    for k in 0..spec.sites {
        let ss = steady_state(&build_liouvillian(&spec.single_site(k))?, DEFAULT_KERNEL_TOL)?;
        if ss.degenerate {
            return Err(Error::DegenerateKernel {
                kernel_dim: ss.kernel_dim,
            });
        }
        rho = Some(match rho {
            None => ss.rho,
            Some(r) => r.tensor(&ss.rho),
        });
    }
    Ok(rho.expect("at least one site"))
}

/// Series through `order`, evaluated against `spec.epsilon` as `epsilon_ref`.
pub fn expand(spec: &NetworkSpec, order: usize) -> Result<PerturbationSeries> {
    let rho0 = zeroth_order(spec)?.into_matrix();
    let free = spec.clone().with_epsilon(0.0);
    let l0 = build_liouvillian(&free)?;
    let v = interaction(spec)?;
    let d = spec.dim();

    let svd = l0.matrix().clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let cutoff = PINV_CUTOFF * sigma.max();

    let mut residuals = vec![(l0.matrix() * linalg::vectorize(&rho0)).norm()];
    let mut terms = vec![rho0.clone()];
    for j in 1..=order {
        let rhs = commutator(&v, &terms[j - 1]) * I;
        let b = linalg::vectorize(&rhs);
        let coeffs = u.adjoint() * &b;
        let mut x = CVector::zeros(d * d);
        let mut outside = 0.0;
        for i in 0..sigma.len() {
            if sigma[i] > cutoff {
                x += v_t.row(i).adjoint() * (coeffs[i] / sigma[i]);
            } else {
                outside += coeffs[i].norm_sqr();
            }
        }
        let outside = outside.sqrt();
        if outside > COKERNEL_TOL * b.norm().max(1.0) {
            return Err(Error::Unsolvable {
                order: j,
                component: outside,
            });
        }
        let mut term = hermitize(&linalg::unvectorize(&x, d));
        let tr = linalg::trace(&term);
        term -= &rho0 * tr;
        residuals.push((l0.matrix() * linalg::vectorize(&term) - b).norm());
        terms.push(term);
    }
    Ok(PerturbationSeries {
        order,
        terms,
        epsilon_ref: spec.epsilon,
        residuals,
    })
}

/// First-order relative-phase profile for two resonant spin-1 sites with
/// `J±Jᶻ` jumps:
/// `(9πε(uˣ+uʸ)/256)·(1/(γ₁⁻+γ₂⁺) − 1/(γ₁⁺+γ₂⁻))·sin φ₁₂`.
pub fn analytic_s2(spec: &NetworkSpec, phi12: f64) -> Result<f64> {
    spec.validate()?;
    if spec.sites != 2 {
        return Err(Error::UnsupportedRegime(format!("needs 2 sites, got {}", spec.sites)));
    }
    if spec.spin != Spin::ONE {
        return Err(Error::UnsupportedRegime(format!("needs J = 1, got {}", spec.spin)));
    }
    if spec.omegas[0] != spec.omegas[1] {
        return Err(Error::UnsupportedRegime("sites are detuned".into()));
    }
    if spec.jump != JumpKind::JpmJz {
        return Err(Error::UnsupportedRegime("needs J±Jz jumps".into()));
    }
    let Some(cp) = spec.coupling(0, 1) else {
        return Ok(0.0);
    };
    let slow = spec.damps[0] + spec.gains[1];
    let fast = spec.gains[0] + spec.damps[1];
    let inv = |x: f64| if x > 0.0 { 1.0 / x } else { 0.0 };
    Ok(9.0 * PI * spec.epsilon * (cp.ux + cp.uy) / 256.0 * (inv(slow) - inv(fast)) * phi12.sin())
}
