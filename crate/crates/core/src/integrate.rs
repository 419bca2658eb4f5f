//! Classical fourth-order Runge–Kutta with step-halving error control.
//!
//! Each nominal step `h` is taken once at full size and once as two half
//! steps; the max-norm difference is the local error estimate. Steps whose
//! estimate exceeds the tolerance are bisected recursively, and the run fails
//! with [`Error::StepTooLarge`] once the bisection depth is exhausted.

use crate::error::{Error, Result};
use crate::linalg::{c, CVector};

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub dt: f64,
    /// Absolute local error tolerance (max norm).
    pub tol: f64,
    pub max_depth: u32,
}

impl StepControl {
    pub fn new(dt: f64) -> Self {
        StepControl {
            dt,
            tol: 1e-10,
            max_depth: 12,
        }
    }
}

fn rk4<F>(f: &mut F, y: &CVector, h: f64) -> CVector
where
    F: FnMut(&CVector) -> CVector,
{
    let k1 = f(y);
    let k2 = f(&(y + &k1 * c(h / 2.0)));
    let k3 = f(&(y + &k2 * c(h / 2.0)));
    let k4 = f(&(y + &k3 * c(h)));
    y + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0)
}

fn max_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn controlled_step<F>(f: &mut F, y: &CVector, t: f64, h: f64, ctl: &StepControl, depth: u32) -> Result<CVector>
where
    F: FnMut(&CVector) -> CVector,
{
    let full = rk4(f, y, h);
    let mid = rk4(f, y, h / 2.0);
    let half = rk4(f, &mid, h / 2.0);
    let err = max_norm(&(&full - &half));
    if err.is_finite() && err <= ctl.tol {
        return Ok(half);
    }
    if depth >= ctl.max_depth || !err.is_finite() {
        return Err(Error::StepTooLarge {
            time: t,
            error: err,
            tol: ctl.tol,
        });
    }
    let first = controlled_step(f, y, t, h / 2.0, ctl, depth + 1)?;
    controlled_step(f, &first, t + h / 2.0, h / 2.0, ctl, depth + 1)
}

/// Integrate `dy/dt = f(y)` from `0` to `t_final`, calling `observe(t, y)`
/// at `t = 0` and after every nominal step.
pub fn integrate<F, O>(mut f: F, y0: CVector, t_final: f64, ctl: &StepControl, mut observe: O) -> Result<CVector>
where
    F: FnMut(&CVector) -> CVector,
    O: FnMut(f64, &CVector),
{
    assert!(ctl.dt > 0.0, "step must be positive");
    let mut y = y0;
    let mut t = 0.0;
    observe(t, &y);
    let steps = (t_final / ctl.dt).ceil() as usize;
    for n in 0..steps {
        let next = ((n + 1) as f64 * ctl.dt).min(t_final);
        let h = next - t;
        if h <= 0.0 {
            break;
        }
        y = controlled_step(&mut f, &y, t, h, ctl, 0)?;
        t = next;
        observe(t, &y);
    }
    Ok(y)
}
