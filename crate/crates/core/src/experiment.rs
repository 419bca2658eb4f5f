//! Effective couplings of the Rydberg-dressing implementation.
//!
//! Inputs and outputs are angular frequencies (rad/s); divide by a reference
//! rate with [`EffectiveCouplings::to_dimensionless`] before building a
//! [`NetworkSpec`](crate::network::NetworkSpec).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One molecular eigenstate `α`: overlaps with the pair states and its
/// two-photon detuning `Δ_α⁽²⁾`, interaction shift included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DressingChannel {
    pub c_pp: f64,
    pub c_mm: f64,
    pub c_pm: f64,
    pub c_mp: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DressingParams {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub channels: Vec<DressingChannel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCouplings {
    /// Flip-flip amplitude `u⁺⁺`.
    pub u_pp: f64,
    /// Flip-flop amplitude `u⁺⁻`.
    pub u_pm: f64,
}

impl EffectiveCouplings {
    /// `(u⁺⁺, u⁺⁻) / gamma_ref`.
    pub fn to_dimensionless(&self, gamma_ref: f64) -> Result<EffectiveCouplings> {
        if !(gamma_ref > 0.0 && gamma_ref.is_finite()) {
            return Err(Error::validation("gamma_ref", format!("{gamma_ref} must be positive")));
        }
        Ok(EffectiveCouplings {
            u_pp: self.u_pp / gamma_ref,
            u_pm: self.u_pm / gamma_ref,
        })
    }
}

impl DressingParams {
    pub fn validate(&self) -> Result<()> {
        if self.delta_plus == 0.0 {
            return Err(Error::ZeroDetuning("delta_plus".into()));
        }
        if self.delta_minus == 0.0 {
            return Err(Error::ZeroDetuning("delta_minus".into()));
        }
        if let Some(i) = self.channels.iter().position(|ch| ch.delta2 == 0.0) {
            return Err(Error::ZeroDetuning(format!("channels[{i}].delta2")));
        }
        Ok(())
    }
}

/// `u⁺⁺ = Σ_α (Ω₊Ω₋)²/(4Δ₊Δ₋) · c₊₊c₋₋/Δ_α⁽²⁾` and
/// `u⁺⁻ = Σ_α (Ω₊Ω₋)²(Δ₊+Δ₋)²/(16(Δ₊Δ₋)²) · c₊₋c₋₊/Δ_α⁽²⁾`.
pub fn effective_couplings(p: &DressingParams) -> Result<EffectiveCouplings> {
    p.validate()?;
    let rabi = (p.omega_plus * p.omega_minus).powi(2);
    let prod = p.delta_plus * p.delta_minus;
    let sum = p.delta_plus + p.delta_minus;
    let pp_prefactor = rabi / (4.0 * prod);
    let pm_prefactor = rabi * sum * sum / (16.0 * prod * prod);
    let (mut u_pp, mut u_pm) = (0.0, 0.0);
    for ch in &p.channels {
        u_pp += pp_prefactor * ch.c_pp * ch.c_mm / ch.delta2;
        u_pm += pm_prefactor * ch.c_pm * ch.c_mp / ch.delta2;
    }
    Ok(EffectiveCouplings { u_pp, u_pm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn random_params(rng: &mut ChaCha8Rng) -> DressingParams {
        let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
        let channels = (0..3)
            .map(|_| DressingChannel {
                c_pp: r(-1.0, 1.0),
                c_mm: r(-1.0, 1.0),
                c_pm: r(-1.0, 1.0),
                c_mp: r(-1.0, 1.0),
                delta2: TAU * r(5e3, 5e4),
            })
            .collect();
        DressingParams {
            omega_plus: TAU * r(1e5, 1e6),
            omega_minus: TAU * r(1e5, 1e6),
            delta_plus: TAU * r(1e6, 1e7),
            delta_minus: TAU * r(1e6, 1e7),
            channels,
        }
    }

    #[test]
    fn antisymmetric_detuning_kills_flip_flop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut p = random_params(&mut rng);
            p.delta_minus = -p.delta_plus;
            assert_eq!(effective_couplings(&p).unwrap().u_pm, 0.0);
        }
    }

    #[test]
    fn rabi_scaling_is_quartic() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = random_params(&mut rng);
        let base = effective_couplings(&p).unwrap();
        let s = 1.7;
        let scaled = effective_couplings(&DressingParams {
            omega_plus: s * p.omega_plus,
            omega_minus: s * p.omega_minus,
            ..p.clone()
        })
        .unwrap();
        assert!((scaled.u_pp / base.u_pp - s.powi(4)).abs() < 1e-12);
        assert!((scaled.u_pm / base.u_pm - s.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_single_channel_gives_equal_couplings() {
        let (om, d, c, d2) = (2.0, 3.0, 0.4, 5.0);
        let p = DressingParams {
            omega_plus: om,
            omega_minus: om,
            delta_plus: d,
            delta_minus: d,
            channels: vec![DressingChannel {
                c_pp: c,
                c_mm: c,
                c_pm: c,
                c_mp: c,
                delta2: d2,
            }],
        };
        let u = effective_couplings(&p).unwrap();
        let expected = om.powi(4) * c * c / (4.0 * d * d * d2);
        assert!((u.u_pp - expected).abs() < 1e-15);
        assert!((u.u_pm - expected).abs() < 1e-15);
        let dimless = u.to_dimensionless(2.0).unwrap();
        assert_eq!(dimless.u_pp, u.u_pp / 2.0);
        assert!(u.to_dimensionless(0.0).is_err());
    }

    #[test]
    fn zero_overlaps_and_zero_detunings() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut p = random_params(&mut rng);
        for ch in &mut p.channels {
            ch.c_pp = 0.0;
            ch.c_pm = 0.0;
        }
        assert_eq!(
            effective_couplings(&p).unwrap(),
            EffectiveCouplings { u_pp: 0.0, u_pm: 0.0 }
        );
        p.channels[1].delta2 = 0.0;
        assert!(matches!(effective_couplings(&p), Err(Error::ZeroDetuning(f)) if f == "channels[1].delta2"));
        p.delta_plus = 0.0;
        assert!(matches!(effective_couplings(&p), Err(Error::ZeroDetuning(f)) if f == "delta_plus"));
    }
}
