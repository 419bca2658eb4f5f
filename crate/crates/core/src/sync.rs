//! Phase-space synchronization measures: Husimi Q, the S-function, and the
//! relative-phase profile `S₂(φ₁₂)` with its flip-flop harmonic expansion.
//!
//! The S-function of a subset of sites is evaluated as
//! `Σ_{ab} (⊗_k c(φ_k))_{ab} ρ_{ab} − (2π)^{−n}` with
//! `c_{nm}(φ) = e^{i(n−m)φ} c'_{nm}` indexed by magnetic quantum numbers. This
//! is the θ-marginal of the Q-function for coherent states
//! `|θ,φ⟩ = e^{−iφJᶻ}e^{−iθJʸ}|J,J⟩`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, kron, CMatrix, CVector};
use crate::liouvillian::{reduced_density, DensityMatrix};
use crate::network::NetworkSpec;
use crate::quadrature::{periodic_nodes, GaussLegendre};
use crate::spin::{coherent_state, spin_operators, Spin};

/// Nodes of the Gauss–Legendre rule in θ used for Q-function marginals.
pub const THETA_NODES: usize = 64;
/// Uniform nodes for the φ₂ integration of `S₂`.
pub const PHI2_NODES: usize = 256;
/// Grid points of the reported `S₂(φ₁₂)` profile on `[−π, π)`.
pub const PROFILE_POINTS: usize = 256;
const PEAK_SCAN_POINTS: usize = 4096;
const NEWTON_STEPS: usize = 3;

/// `Γ(x)` for positive `x` on the half-integer lattice, given `2x`.
fn gamma_half(twice: i64) -> f64 {
    assert!(twice > 0, "gamma argument must be positive");
    let (mut value, mut x) = if twice % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = twice as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `c'_{J,n,m}` for magnetic quantum numbers `n = J − a`, `m = J − b`.
pub fn c_prime(spin: Spin, a: usize, b: usize) -> f64 {
    let tj = spin.twice() as i64;
    let (a, b) = (a as i64, b as i64);
    // 1 + J ± (n+m)/2 with n + m = 2J − a − b, passed as twice the argument
    let num = gamma_half(2 + 2 * tj - a - b) * gamma_half(2 + a + b);
    let den = 2.0 * PI * (factorial(tj - a) * factorial(a) * factorial(tj - b) * factorial(b)).sqrt();
    num / den
}

#[derive(Debug, Clone)]
pub struct CJMatrix {
    pub spin: Spin,
    pub phi: f64,
    pub entries: CMatrix,
}

/// Closed-form phase-marginal kernel `c^J(φ)`.
pub fn c_matrix(spin: Spin, phi: f64) -> CJMatrix {
    let d = spin.dim();
    let entries = CMatrix::from_fn(d, d, |a, b| {
        // n − m = b − a in index space
        Complex64::from_polar(c_prime(spin, a, b), (b as f64 - a as f64) * phi)
    });
    CJMatrix { spin, phi, entries }
}

fn check_angles(spec: &NetworkSpec, n: usize) -> Result<()> {
    if n != spec.sites {
        return Err(Error::DimensionMismatch {
            expected: spec.sites,
            found: n,
        });
    }
    Ok(())
}

/// `Q = ((2J+1)/4π)^N ⟨φ⃗,θ⃗|ρ|φ⃗,θ⃗⟩` for a state on `sites` spins.
fn q_value(rho: &CMatrix, spin: Spin, phis: &[f64], thetas: &[f64]) -> f64 {
    let mut psi = CVector::from_element(1, c(1.0));
    for (&phi, &theta) in phis.iter().zip(thetas) {
        let a = coherent_state(spin, theta, phi).amplitudes;
        psi = psi.kronecker(&a);
    }
    let prefactor = (spin.dim() as f64 / (4.0 * PI)).powi(phis.len() as i32);
    prefactor * (psi.adjoint() * rho * &psi)[(0, 0)].re
}

pub fn husimi_q(rho: &DensityMatrix, phis: &[f64], thetas: &[f64], spec: &NetworkSpec) -> Result<f64> {
    check_angles(spec, phis.len())?;
    check_angles(spec, thetas.len())?;
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho.dim(),
        });
    }
    Ok(q_value(rho.matrix(), spec.spin, phis, thetas))
}

fn subset_state(rho: &DensityMatrix, subset: &[usize], spec: &NetworkSpec) -> Result<CMatrix> {
    if subset.is_empty() {
        return Err(Error::EmptySelection);
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("subset", "site indices must be strictly ascending"));
    }
    Ok(reduced_density(rho, subset, spec)?.into_matrix())
}

fn elementwise_sum(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// S-function over `subset` (ascending sites) at phases `phis` (one per
/// subset site), by the closed-form `c^J` kernel.
pub fn s_function(rho: &DensityMatrix, phis: &[f64], subset: &[usize], spec: &NetworkSpec) -> Result<f64> {
    let reduced = subset_state(rho, subset, spec)?;
    if phis.len() != subset.len() {
        return Err(Error::DimensionMismatch {
            expected: subset.len(),
            found: phis.len(),
        });
    }
    let kernel = phis
        .iter()
        .map(|&phi| c_matrix(spec.spin, phi).entries)
        .reduce(|acc, m| kron(&acc, &m))
        .expect("nonempty subset");
    Ok(elementwise_sum(&kernel, &reduced).re - (2.0 * PI).powi(-(subset.len() as i32)))
}

/// Same quantity as [`s_function`] by Gauss–Legendre integration of the
/// Q-function over every θ of the subset.
pub fn s_function_quadrature(rho: &DensityMatrix, phis: &[f64], subset: &[usize], spec: &NetworkSpec) -> Result<f64> {
    let reduced = subset_state(rho, subset, spec)?;
    if phis.len() != subset.len() {
        return Err(Error::DimensionMismatch {
            expected: subset.len(),
            found: phis.len(),
        });
    }
    let gl = GaussLegendre::new(THETA_NODES, 0.0, PI);
    let nodes: Vec<(f64, f64)> = gl.iter().map(|(t, w)| (t, w * t.sin())).collect();
    let n = subset.len();
    let mut index = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let thetas: Vec<f64> = index.iter().map(|&i| nodes[i].0).collect();
        let weight: f64 = index.iter().map(|&i| nodes[i].1).product();
        total += weight * q_value(&reduced, spec.spin, phis, &thetas);
        let mut k = 0;
        loop {
            index[k] += 1;
            if index[k] < nodes.len() {
                break;
            }
            index[k] = 0;
            k += 1;
            if k == n {
                return Ok(total - (2.0 * PI).powi(-(n as i32)));
            }
        }
    }
}

/// One flip-flop harmonic of `S₂(φ₁₂)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Harmonic {
    /// Harmonic order `p = 1 … 2J`.
    pub order: usize,
    /// `⟨(J₁⁺J₂⁻)^p⟩`.
    pub correlator: Complex64,
    /// Fourier coefficient `A_p` with `S₂(φ) = Σ_p Re[A_p e^{−ipφ}]`.
    pub coefficient: Complex64,
}

impl Harmonic {
    pub fn modulus(&self) -> f64 {
        self.correlator.norm()
    }

    pub fn phase(&self) -> f64 {
        self.correlator.arg()
    }

    /// `|A_p| / |⟨(J₁⁺J₂⁻)^p⟩|`, or `None` when the correlator vanishes.
    pub fn weight(&self) -> Option<f64> {
        let m = self.modulus();
        (m > 1e-300).then(|| self.coefficient.norm() / m)
    }

    pub fn value_at(&self, phi: f64) -> f64 {
        (self.coefficient * Complex64::from_polar(1.0, -(self.order as f64) * phi)).re
    }
}

/// Relative-phase synchronization profile for one site pair.
#[derive(Debug, Clone, Serialize)]
pub struct S2Profile {
    pub pair: (usize, usize),
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
    pub harmonics: Vec<Harmonic>,
    pub s_max: f64,
    pub phi_star: f64,
}

impl S2Profile {
    pub fn reconstruct(&self, phi: f64) -> f64 {
        reconstruct(&self.harmonics, phi)
    }
}

pub fn reconstruct(harmonics: &[Harmonic], phi: f64) -> f64 {
    harmonics.iter().map(|h| h.value_at(phi)).sum()
}

/// Uniform factor `w_p` with `A_p = w_p ⟨(J₁⁺J₂⁻)^p⟩` for every state, when
/// one exists (it does for `J ≤ 1`; for larger spin the contributing
/// coherences carry unequal weights).
pub fn flip_flop_weight(spin: Spin, p: usize) -> Option<f64> {
    let d = spin.dim();
    if p == 0 || p >= d {
        return None;
    }
    let ops = spin_operators(spin);
    let up = ops.jplus.pow(p as u32);
    let down = ops.jminus.pow(p as u32);
    let mut weight: Option<f64> = None;
    for a1 in p..d {
        let b1 = a1 - p;
        for a2 in 0..d - p {
            let b2 = a2 + p;
            let ladder = up[(b1, a1)].re * down[(b2, a2)].re;
            let w = 4.0 * PI * c_prime(spin, a1, b1) * c_prime(spin, a2, b2) / ladder;
            match weight {
                None => weight = Some(w),
                Some(w0) if ((w - w0) / w0).abs() > 1e-12 => return None,
                _ => {}
            }
        }
    }
    weight
}

fn pair_state(rho: &DensityMatrix, spec: &NetworkSpec, pair: (usize, usize)) -> Result<CMatrix> {
    if spec.sites < 2 {
        return Err(Error::UnsupportedRegime(format!(
            "relative-phase measures need at least two sites, network has {}",
            spec.sites
        )));
    }
    let (i, j) = pair;
    if i >= spec.sites || j >= spec.sites {
        return Err(Error::SiteOutOfRange {
            site: i.max(j),
            sites: spec.sites,
        });
    }
    if i >= j {
        return Err(Error::validation("pair", "pair must be ordered (i < j)"));
    }
    Ok(reduced_density(rho, &[i, j], spec)?.into_matrix())
}

fn harmonics_of(r: &CMatrix, spin: Spin) -> Vec<Harmonic> {
    let d = spin.dim();
    let ops = spin_operators(spin);
    (1..d)
        .map(|p| {
            // entries with b1 − a1 = −p and b2 − a2 = +p
            let mut coeff = Complex64::new(0.0, 0.0);
            for a1 in p..d {
                let b1 = a1 - p;
                for a2 in 0..d - p {
                    let b2 = a2 + p;
                    let w = c_prime(spin, a1, b1) * c_prime(spin, a2, b2);
                    coeff += r[(a1 * d + a2, b1 * d + b2)] * w;
                }
            }
            let x = kron(&ops.jplus.pow(p as u32), &ops.jminus.pow(p as u32));
            Harmonic {
                order: p,
                correlator: (x * r).trace(),
                coefficient: coeff * (4.0 * PI),
            }
        })
        .collect()
}

/// Harmonics of `S₂(φ₁₂)` for sites (0, 1) from the coherences selected by
/// `n − m + p − q = 0`.
pub fn s2_from_correlators(rho: &DensityMatrix, spec: &NetworkSpec) -> Result<Vec<Harmonic>> {
    s2_from_correlators_pair(rho, spec, (0, 1))
}

pub fn s2_from_correlators_pair(
    rho: &DensityMatrix,
    spec: &NetworkSpec,
    pair: (usize, usize),
) -> Result<Vec<Harmonic>> {
    let r = pair_state(rho, spec, pair)?;
    Ok(harmonics_of(&r, spec.spin))
}

/// Peak of a finite harmonic series: dense scan on `[−π, π)` refined by
/// Newton steps on the derivative.
pub fn harmonic_peak(harmonics: &[Harmonic]) -> (f64, f64) {
    if harmonics.iter().all(|h| h.coefficient == Complex64::new(0.0, 0.0)) {
        return (0.0, 0.0);
    }
    let scan = (0..PEAK_SCAN_POINTS).map(|k| -PI + 2.0 * PI * k as f64 / PEAK_SCAN_POINTS as f64);
    let (mut phi, mut best) = scan
        .map(|p| (p, reconstruct(harmonics, p)))
        .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    for _ in 0..NEWTON_STEPS {
        let (mut d1, mut d2) = (0.0, 0.0);
        for h in harmonics {
            let p = h.order as f64;
            let z = h.coefficient * Complex64::from_polar(1.0, -p * phi);
            d1 += (z * Complex64::new(0.0, -p)).re;
            d2 += -p * p * z.re;
        }
        if d2 >= 0.0 {
            break;
        }
        let next = phi - d1 / d2;
        let value = reconstruct(harmonics, next);
        if value < best {
            break;
        }
        phi = next;
        best = value;
    }
    let phi = (phi + PI).rem_euclid(2.0 * PI) - PI;
    (best, phi)
}

/// `S₂(φ₁₂)` for sites (0, 1).
pub fn s2_relative(rho: &DensityMatrix, spec: &NetworkSpec) -> Result<S2Profile> {
    s2_relative_pair(rho, spec, (0, 1))
}

/// `S₂(φ₁₂) = ∫dφ₂ S(φ₁₂ + φ₂, φ₂)` on a uniform grid by trapezoid
/// integration of the two-site S-function, with harmonics, `S^max` and the
/// locked phase from the correlator form.
pub fn s2_relative_pair(rho: &DensityMatrix, spec: &NetworkSpec, pair: (usize, usize)) -> Result<S2Profile> {
    let r = pair_state(rho, spec, pair)?;
    let spin = spec.spin;
    let d = spin.dim();
    let phis: Vec<f64> = (0..PROFILE_POINTS)
        .map(|k| -PI + 2.0 * PI * k as f64 / PROFILE_POINTS as f64)
        .collect();
    let phi2s = periodic_nodes(PHI2_NODES);
    let weight = 2.0 * PI / PHI2_NODES as f64;
    let offset = 1.0 / (4.0 * PI * PI);
    let mut values = vec![0.0; phis.len()];
    for &phi2 in &phi2s {
        let c2 = c_matrix(spin, phi2).entries;
        // contract the second site: M_{a1 b1} = Σ R_{(a1 a2),(b1 b2)} c_{a2 b2}(φ₂)
        let mut m = CMatrix::zeros(d, d);
        for a1 in 0..d {
            for b1 in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for a2 in 0..d {
                    for b2 in 0..d {
                        acc += r[(a1 * d + a2, b1 * d + b2)] * c2[(a2, b2)];
                    }
                }
                m[(a1, b1)] = acc;
            }
        }
        for (v, &phi12) in values.iter_mut().zip(&phis) {
            let c1 = c_matrix(spin, phi12 + phi2).entries;
            *v += weight * (elementwise_sum(&c1, &m).re - offset);
        }
    }
    let harmonics = harmonics_of(&r, spin);
    let (s_max, phi_star) = harmonic_peak(&harmonics);
    Ok(S2Profile {
        pair,
        phis,
        values,
        harmonics,
        s_max,
        phi_star,
    })
}
