//! Problem statement for an XYZ-coupled network of dissipative spins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::Spin;

/// Jump operators of the gain/damping channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKind {
    /// `O± = J± Jᶻ`; stabilizes the `m = 0` limit cycle for integer spin.
    JpmJz,
    /// `O± = J±`.
    Jpm,
}

/// Strength of each dissipation channel relative to its rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// `γ D[O]`; the convention of the first-order analytic `S₂` and of the
    /// mean-field equation.
    #[default]
    Full,
    /// `γ D[O] / 2`.
    Half,
}

impl RateConvention {
    pub fn factor(self) -> f64 {
        match self {
            RateConvention::Full => 1.0,
            RateConvention::Half => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub pair: (usize, usize),
    pub ux: f64,
    pub uy: f64,
    pub uz: f64,
}

impl Coupling {
    pub fn new(k: usize, l: usize, ux: f64, uy: f64, uz: f64) -> Self {
        Coupling {
            pair: (k, l),
            ux,
            uy,
            uz,
        }
    }

    /// Resolve an anisotropy ratio `ux/uy` under the normalization
    /// `|ux + uy| + |ux − uy| = 1`, i.e. `max(|ux|, |uy|) = 1/2`.
    ///
    /// Inside `[−1, 1]` the ratio is carried by `ux` with `uy = 1/2`; outside
    /// it `|ux| = 1/2` and `uy = 1/(2|r|)` stays positive. Infinite ratios map
    /// to `(±1/2, 0)`.
    pub fn from_ratio(k: usize, l: usize, ratio: f64, uz: f64) -> Self {
        let (ux, uy) = if ratio.abs() <= 1.0 {
            (0.5 * ratio, 0.5)
        } else {
            (0.5 * ratio.signum(), 0.5 / ratio.abs())
        };
        Coupling::new(k, l, ux, uy, uz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub spin: Spin,
    pub sites: usize,
    /// Natural frequencies `ω_k`, in units of the reference rate.
    pub omegas: Vec<f64>,
    /// Overall coupling strength `ε`.
    pub epsilon: f64,
    pub couplings: Vec<Coupling>,
    /// Gain rates `γ_k⁺`.
    pub gains: Vec<f64>,
    /// Damping rates `γ_k⁻`.
    pub damps: Vec<f64>,
    pub jump: JumpKind,
    #[serde(default)]
    pub rate_convention: RateConvention,
}

impl NetworkSpec {
    /// Uncoupled resonant network with `ω_k = 0`.
    pub fn uncoupled(spin: Spin, gains: Vec<f64>, damps: Vec<f64>, jump: JumpKind) -> Self {
        let sites = gains.len();
        NetworkSpec {
            spin,
            sites,
            omegas: vec![0.0; sites],
            epsilon: 0.0,
            couplings: Vec::new(),
            gains,
            damps,
            jump,
            rate_convention: RateConvention::Full,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.couplings.push(coupling);
        self
    }

    pub fn with_rate_convention(mut self, convention: RateConvention) -> Self {
        self.rate_convention = convention;
        self
    }

    pub fn with_omegas(mut self, omegas: Vec<f64>) -> Self {
        self.omegas = omegas;
        self
    }

    pub fn local_dim(&self) -> usize {
        self.spin.dim()
    }

    /// Hilbert-space dimension `(2J+1)^N`.
    pub fn dim(&self) -> usize {
        self.local_dim().pow(self.sites as u32)
    }

    pub fn site_dims(&self) -> Vec<usize> {
        vec![self.local_dim(); self.sites]
    }

    /// Coupling entry for the unordered pair `{k, l}`, if any.
    pub fn coupling(&self, k: usize, l: usize) -> Option<&Coupling> {
        let key = (k.min(l), k.max(l));
        self.couplings.iter().find(|c| c.pair == key)
    }

    /// The isolated site `k`: same spin, rates and frequency, no couplings.
    pub fn single_site(&self, k: usize) -> NetworkSpec {
        NetworkSpec {
            spin: self.spin,
            sites: 1,
            omegas: vec![self.omegas[k]],
            epsilon: 0.0,
            couplings: Vec::new(),
            gains: vec![self.gains[k]],
            damps: vec![self.damps[k]],
            jump: self.jump,
            rate_convention: self.rate_convention,
        }
    }

    /// Largest rate or frequency scale entering the generator.
    pub fn rate_scale(&self) -> f64 {
        let rates = self
            .gains
            .iter()
            .zip(&self.damps)
            .map(|(g, d)| g + d)
            .chain(self.omegas.iter().map(|w| w.abs()))
            .chain(std::iter::once(self.epsilon.abs()));
        rates.fold(0.0, f64::max)
    }

    /// Smallest strictly positive dissipation rate.
    pub fn min_positive_rate(&self) -> Option<f64> {
        self.gains
            .iter()
            .chain(&self.damps)
            .copied()
            .filter(|&r| r > 0.0)
            .min_by(f64::total_cmp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::validation("network.sites", "must be at least 1"));
        }
        let n = self.sites;
        for (name, v) in [
            ("network.omegas", &self.omegas),
            ("network.dissipation.gain", &self.gains),
            ("network.dissipation.damp", &self.damps),
        ] {
            if v.len() != n {
                return Err(Error::validation(
                    name,
                    format!("expected {n} entries, found {}", v.len()),
                ));
            }
            for (i, x) in v.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::validation(format!("{name}[{i}]"), "must be finite"));
                }
            }
        }
        for (name, v) in [
            ("network.dissipation.gain", &self.gains),
            ("network.dissipation.damp", &self.damps),
        ] {
            if let Some(i) = v.iter().position(|&x| x < 0.0) {
                return Err(Error::validation(
                    format!("{name}[{i}]"),
                    format!("rate {} must be nonnegative", v[i]),
                ));
            }
        }
        if !self.epsilon.is_finite() {
            return Err(Error::validation("network.epsilon", "must be finite"));
        }
        let mut seen = Vec::new();
        for (i, cp) in self.couplings.iter().enumerate() {
            let (k, l) = cp.pair;
            if k >= l || l >= n {
                return Err(Error::validation(
                    format!("network.couplings[{i}].pair"),
                    format!("pair ({k}, {l}) must satisfy k < l < {n}"),
                ));
            }
            if seen.contains(&cp.pair) {
                return Err(Error::validation(
                    format!("network.couplings[{i}].pair"),
                    format!("duplicate pair ({k}, {l})"),
                ));
            }
            seen.push(cp.pair);
            for (name, u) in [("ux", cp.ux), ("uy", cp.uy), ("uz", cp.uz)] {
                if !u.is_finite() || u.abs() > 1.0 {
                    return Err(Error::validation(
                        format!("network.couplings[{i}].{name}"),
                        format!("{u} outside [-1, 1]"),
                    ));
                }
            }
        }
        Ok(())
    }
}
