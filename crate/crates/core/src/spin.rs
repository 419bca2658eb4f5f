//! Spin-J operators, coherent spin states and tensor-product embeddings.
//!
//! Single-site bases are ordered by magnetic quantum number descending,
//! index `i` ↔ `m = J − i`. Multi-site bases are the Kronecker product of the
//! site bases with site 0 most significant.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, identity, kron, CMatrix, CVector, I};

/// Spin magnitude stored as `2J` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Spin { twice })
    }

    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 1.0 || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Spin {
            twice: twice.round() as u32,
        })
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    /// Local Hilbert-space dimension `2J + 1`.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// Magnetic quantum number of basis index `i`.
    pub fn m(self, index: usize) -> f64 {
        self.value() - index as f64
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(j: f64) -> Result<Self> {
        Spin::new(j)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    pub spin: Spin,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub jplus: CMatrix,
    pub jminus: CMatrix,
}

/// `⟨m+1|J⁺|m⟩ = √(J(J+1) − m(m+1))`.
pub fn ladder_coefficient(spin: Spin, m: f64) -> f64 {
    let j = spin.value();
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

pub fn spin_operators(spin: Spin) -> SpinOperatorSet {
    let d = spin.dim();
    let mut jz = CMatrix::zeros(d, d);
    let mut jplus = CMatrix::zeros(d, d);
    for i in 0..d {
        jz[(i, i)] = c(spin.m(i));
        if i > 0 {
            // |m⟩ at index i raises to |m+1⟩ at index i-1
            jplus[(i - 1, i)] = c(ladder_coefficient(spin, spin.m(i)));
        }
    }
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus) * c(0.5);
    let jy = (&jplus - &jminus) * (-0.5 * I);
    SpinOperatorSet {
        spin,
        jx,
        jy,
        jz,
        jplus,
        jminus,
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `d^J_{m,J}(θ) = √C(2J, J−m) cos^{J+m}(θ/2) sin^{J−m}(θ/2)` for
/// `m = J … −J`, all entries nonnegative on `θ ∈ [0, π]`.
pub fn wigner_d_column(spin: Spin, theta: f64) -> Vec<f64> {
    let (s, co) = (0.5 * theta).sin_cos();
    let n = spin.twice();
    (0..=n)
        .map(|k| binomial(n, k).sqrt() * co.powi((n - k) as i32) * s.powi(k as i32))
        .collect()
}

#[derive(Debug, Clone)]
pub struct CoherentState {
    pub spin: Spin,
    pub theta: f64,
    pub phi: f64,
    pub amplitudes: CVector,
}

/// `|θ,φ⟩ = e^{−iφJᶻ} e^{−iθJʸ} |J,J⟩`.
pub fn coherent_state(spin: Spin, theta: f64, phi: f64) -> CoherentState {
    let d = wigner_d_column(spin, theta);
    let amplitudes = CVector::from_iterator(
        spin.dim(),
        d.iter()
            .enumerate()
            .map(|(i, &dm)| Complex64::from_polar(dm, -spin.m(i) * phi)),
    );
    CoherentState {
        spin,
        theta,
        phi,
        amplitudes,
    }
}

/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1` with `op` at `site` in a `sites`-site register.
pub fn embed_at(op: &CMatrix, site: usize, sites: usize, local_dim: usize) -> Result<CMatrix> {
    if site >= sites {
        return Err(Error::SiteOutOfRange { site, sites });
    }
    if op.nrows() != local_dim || op.ncols() != local_dim {
        return Err(Error::DimensionMismatch {
            expected: local_dim,
            found: op.nrows(),
        });
    }
    let left = identity(local_dim.pow(site as u32));
    let right = identity(local_dim.pow((sites - site - 1) as u32));
    Ok(kron(&kron(&left, op), &right))
}

pub fn embed(op: &CMatrix, site: usize, spec: &crate::network::NetworkSpec) -> Result<CMatrix> {
    embed_at(op, site, spec.sites, spec.spin.dim())
}
