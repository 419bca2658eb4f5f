//! Thermodynamic-limit dynamics of a representative spin in an all-to-all
//! network, and classification of its long-time attractor.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, StepControl};
use crate::linalg::{self, c, dagger, CMatrix, CVector, I};
use crate::liouvillian::jump_operators;
use crate::network::JumpKind;
use crate::spin::{coherent_state, spin_operators, Spin};

/// Seed state: the coherent state at `(theta, phi)` mixed with a fraction
/// `mix` of the maximally mixed state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherentSeed {
    pub theta: f64,
    pub phi: f64,
    pub mix: f64,
}

impl Default for CoherentSeed {
    fn default() -> Self {
        CoherentSeed {
            theta: std::f64::consts::FRAC_PI_2,
            phi: 0.0,
            mix: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldSpec {
    #[serde(default = "default_spin")]
    pub spin: Spin,
    pub epsilon: f64,
    pub ux: f64,
    pub uy: f64,
    /// `γ⁺`.
    pub gain: f64,
    /// `γ⁻`.
    pub damp: f64,
    #[serde(default = "default_jump")]
    pub jump: JumpKind,
    #[serde(default)]
    pub seed: CoherentSeed,
    /// Explicit initial state; overrides `seed` when set.
    #[serde(skip)]
    pub rho0: Option<CMatrix>,
    pub t_max: f64,
    pub dt: f64,
    #[serde(default = "default_transient")]
    pub transient_fraction: f64,
    /// Local error tolerance of the integrator.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_spin() -> Spin {
    Spin::ONE
}

fn default_jump() -> JumpKind {
    JumpKind::JpmJz
}

fn default_transient() -> f64 {
    0.8
}

fn default_tol() -> f64 {
    1e-10
}

impl MeanFieldSpec {
    /// Spin-1 spec with `J±Jᶻ` jumps and the default seed and window.
    pub fn new(epsilon: f64, ux: f64, uy: f64, gain: f64, damp: f64, t_max: f64, dt: f64) -> Self {
        MeanFieldSpec {
            spin: Spin::ONE,
            epsilon,
            ux,
            uy,
            gain,
            damp,
            jump: JumpKind::JpmJz,
            seed: CoherentSeed::default(),
            rho0: None,
            t_max,
            dt,
            transient_fraction: default_transient(),
            tol: default_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = |path: &str, reason: String| Err(Error::validation(format!("meanfield.{path}"), reason));
        for (name, x) in [("gain", self.gain), ("damp", self.damp)] {
            if !(x >= 0.0 && x.is_finite()) {
                return v(name, format!("rate {x} must be nonnegative"));
            }
        }
        for (name, x) in [("ux", self.ux), ("uy", self.uy)] {
            if !x.is_finite() || x.abs() > 1.0 {
                return v(name, format!("{x} outside [-1, 1]"));
            }
        }
        if !self.epsilon.is_finite() {
            return v("epsilon", "must be finite".into());
        }
        if !(self.t_max > 0.0 && self.dt > 0.0 && self.dt <= self.t_max) {
            return v(
                "dt",
                format!("need 0 < dt <= t_max (dt {}, t_max {})", self.dt, self.t_max),
            );
        }
        if !(self.transient_fraction > 0.0 && self.transient_fraction < 1.0) {
            return v(
                "transient_fraction",
                format!("{} outside (0, 1)", self.transient_fraction),
            );
        }
        if !(0.0..=1.0).contains(&self.seed.mix) {
            return v("seed.mix", format!("{} outside [0, 1]", self.seed.mix));
        }
        if let Some(rho) = &self.rho0 {
            if rho.nrows() != self.spin.dim() || rho.ncols() != self.spin.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.spin.dim(),
                    found: rho.nrows(),
                });
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> CMatrix {
        if let Some(rho) = &self.rho0 {
            return rho.clone();
        }
        let d = self.spin.dim();
        let cs = coherent_state(self.spin, self.seed.theta, self.seed.phi);
        let psi = cs.amplitudes;
        let pure = &psi * psi.adjoint();
        pure * c(1.0 - self.seed.mix) + linalg::identity(d) * c(self.seed.mix / d as f64)
    }
}

#[derive(Debug, Clone)]
pub struct MeanFieldTrajectory {
    pub times: Vec<f64>,
    /// `⟨J⁺⟩(t)`.
    pub order_parameter: Vec<Complex64>,
    pub jz: Vec<f64>,
    pub final_rho: CMatrix,
    pub transient_fraction: f64,
    /// Largest `|Tr ρ − 1|` seen along the run.
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
}

/// Integrate the mean-field master equation
/// `dρ/dt = −i[ε(uˣJˣ⟨Jˣ⟩ + uʸJʸ⟨Jʸ⟩), ρ] + γ⁺D[O⁺]ρ + γ⁻D[O⁻]ρ`,
/// refreshing the field from the current state at every stage.
pub fn mf_evolve(spec: &MeanFieldSpec) -> Result<MeanFieldTrajectory> {
    spec.validate()?;
    let d = spec.spin.dim();
    let ops = spin_operators(spec.spin);
    let (up, down) = jump_operators(&ops, spec.jump);
    let channels: Vec<(f64, CMatrix, CMatrix)> = [(spec.gain, up), (spec.damp, down)]
        .into_iter()
        .filter(|(g, _)| *g != 0.0)
        .map(|(g, a)| {
            let ada = dagger(&a) * &a;
            (g, a, ada)
        })
        .collect();
    let (ex, ey) = (spec.epsilon * spec.ux, spec.epsilon * spec.uy);

    let rhs = |y: &CVector| -> CVector {
        let rho = linalg::unvectorize(y, d);
        let mx = (&ops.jx * &rho).trace().re;
        let my = (&ops.jy * &rho).trace().re;
        let h = &ops.jx * c(ex * mx) + &ops.jy * c(ey * my);
        let mut out = (&h * &rho - &rho * &h) * (-I);
        for (g, a, ada) in &channels {
            out += (a * &rho * a.adjoint() - (ada * &rho + &rho * ada) * c(0.5)) * c(*g);
        }
        linalg::vectorize(&out)
    };

    let mut times = Vec::new();
    let mut order_parameter = Vec::new();
    let mut jz = Vec::new();
    let mut max_trace_error: f64 = 0.0;
    let mut max_herm: f64 = 0.0;
    let ctl = StepControl {
        dt: spec.dt,
        tol: spec.tol,
        max_depth: 12,
    };
    let y = integrate(
        rhs,
        linalg::vectorize(&spec.initial_state()),
        spec.t_max,
        &ctl,
        |t, y| {
            let rho = linalg::unvectorize(y, d);
            times.push(t);
            order_parameter.push((&ops.jplus * &rho).trace());
            jz.push((&ops.jz * &rho).trace().re);
            max_trace_error = max_trace_error.max((linalg::trace(&rho) - c(1.0)).norm());
            max_herm = max_herm.max(linalg::hermiticity_error(&rho));
        },
    )?;
    Ok(MeanFieldTrajectory {
        times,
        order_parameter,
        jz,
        final_rho: linalg::unvectorize(&y, d),
        transient_fraction: spec.transient_fraction,
        max_trace_error,
        max_hermiticity_error: max_herm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttractorKind {
    FixedPoint,
    LimitCycle,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub kind: AttractorKind,
    /// Area enclosed by one period of `⟨J⁺⟩` in the complex plane.
    pub area: f64,
    pub period: f64,
    /// Peak-to-peak `Re⟨J⁺⟩` over the analysis window.
    pub residual_amplitude: f64,
    /// Min/max distance from the cycle centroid over one period; 0 unless
    /// a cycle was found.
    pub circularity: f64,
    /// `|⟨J⁺⟩|` at the end of the run.
    pub final_modulus: f64,
}

pub const DEFAULT_TOL_FP: f64 = 1e-4;
/// Fewest samples accepted in the analysis window.
pub const MIN_WINDOW: usize = 16;
/// Relative spread allowed among the last three detected periods and among
/// the areas they enclose.
pub const PERIOD_AGREEMENT: f64 = 0.01;

/// Classify the late-time part of `traj` (after `transient_fraction` of the
/// run) as a fixed point or a limit cycle.
pub fn classify_attractor(traj: &MeanFieldTrajectory, tol_fp: f64) -> Result<AttractorReport> {
    let n = traj.times.len();
    let t_end = *traj.times.last().unwrap_or(&0.0);
    let t_start = traj.transient_fraction * t_end;
    let first = traj.times.partition_point(|&t| t < t_start);
    let times = &traj.times[first..];
    let z = &traj.order_parameter[first..];
    if times.len() < MIN_WINDOW || n < MIN_WINDOW {
        return Err(Error::WindowTooShort { samples: times.len() });
    }
    let final_modulus = z.last().map_or(0.0, |v| v.norm());
    let (lo, hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v.re), hi.max(v.re))
    });
    let residual_amplitude = hi - lo;
    let mut report = AttractorReport {
        kind: AttractorKind::Undecided,
        area: 0.0,
        period: 0.0,
        residual_amplitude,
        circularity: 0.0,
        final_modulus,
    };
    if residual_amplitude < tol_fp {
        report.kind = AttractorKind::FixedPoint;
        return Ok(report);
    }

    let centroid = z.iter().sum::<Complex64>() / z.len() as f64;
    // upward crossings of Im z = Im centroid, linearly interpolated
    let mut crossings: Vec<(usize, f64, Complex64)> = Vec::new();
    for i in 1..z.len() {
        let (a, b) = (z[i - 1].im - centroid.im, z[i].im - centroid.im);
        if a < 0.0 && b >= 0.0 {
            let s = a / (a - b);
            let t = times[i - 1] + s * (times[i] - times[i - 1]);
            crossings.push((i, t, z[i - 1] + (z[i] - z[i - 1]) * s));
        }
    }
    if crossings.len() < 4 {
        return Ok(report);
    }
    let periods: Vec<f64> = crossings.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let last = &periods[periods.len() - 3..];
    let (pmin, pmax) = last
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| (a.min(p), b.max(p)));
    if pmax - pmin > PERIOD_AGREEMENT * pmax {
        return Ok(report);
    }

    let loop_of = |k: usize| {
        let (i0, _, p0) = crossings[k];
        let (i1, _, p1) = crossings[k + 1];
        let mut polygon = vec![p0];
        polygon.extend_from_slice(&z[i0..i1]);
        polygon.push(p1);
        polygon
    };
    let m = crossings.len();
    let areas: Vec<f64> = (m - 4..m - 1).map(|k| shoelace(&loop_of(k))).collect();
    let (amin, amax) = areas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    // a spiral still relaxing onto a fixed point has stable periods but
    // shrinking loops
    if amax - amin > PERIOD_AGREEMENT * amax {
        return Ok(report);
    }
    let polygon = loop_of(m - 2);
    report.kind = AttractorKind::LimitCycle;
    report.period = last[2];
    report.area = areas[2];
    let interior = &polygon[1..polygon.len() - 1];
    let center = interior.iter().sum::<Complex64>() / interior.len() as f64;
    let radii = polygon.iter().map(|p| (p - center).norm());
    let (rmin, rmax) = radii.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
    report.circularity = if rmax > 0.0 { rmin / rmax } else { 0.0 };
    Ok(report)
}

/// Absolute area of the closed polygon through `points`.
pub fn shoelace(points: &[Complex64]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum();
    0.5 * twice.abs()
}

/// `S∞` at each `(ux, uy)`; each point integrates independently and a
/// failing point does not stop the others.
pub fn mf_sweep(base: &MeanFieldSpec, grid: &[(f64, f64)], tol_fp: f64) -> Vec<Result<AttractorReport>> {
    grid.par_iter()
        .map(|&(ux, uy)| {
            let spec = MeanFieldSpec { ux, uy, ..base.clone() };
            classify_attractor(&mf_evolve(&spec)?, tol_fp)
        })
        .collect()
}

/// Smallest `ε` in `[lo, hi]` with a limit cycle, located by bisection on
/// whether the attractor is classified as a limit cycle. Returns `None` when `hi`
/// shows no cycle or `lo` already does.
pub fn critical_coupling(
    base: &MeanFieldSpec,
    lo: f64,
    hi: f64,
    iterations: usize,
    tol_fp: f64,
) -> Result<Option<f64>> {
    let cycles = |eps: f64| -> Result<bool> {
        let spec = MeanFieldSpec {
            epsilon: eps,
            ..base.clone()
        };
        Ok(classify_attractor(&mf_evolve(&spec)?, tol_fp)?.kind == AttractorKind::LimitCycle)
    };
    if !cycles(hi)? || cycles(lo)? {
        return Ok(None);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (a + b);
        if cycles(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Some(b))
}
