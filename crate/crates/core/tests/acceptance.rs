//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `harness = false` so the report is always printed. The process
//! exits nonzero only when the set of failing criteria differs from
//! `KNOWN_FAILURES`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use spinsync::linalg::{trace_distance, CMatrix};
use spinsync::liouvillian::{
    build_liouvillian, default_dt, jump_operators, steady_state, steady_state_by_evolution, DensityMatrix,
    DEFAULT_KERNEL_TOL,
};
use spinsync::meanfield::{classify_attractor, mf_evolve, AttractorKind, DEFAULT_TOL_FP};
use spinsync::network::{Coupling, JumpKind, NetworkSpec};
use spinsync::perturbation::{analytic_s2, expand};
use spinsync::quadrature::{periodic_nodes, GaussLegendre};
use spinsync::spin::{spin_operators, Spin};
use spinsync::sweep::export::to_csv;
use spinsync::sweep::{arnold_tongue, run_sweep, Config, Measure, SweepRequest, SweepResult};
use spinsync::sync::{
    harmonic_peak, husimi_q, reconstruct, s2_from_correlators, s2_relative, s_function, s_function_quadrature,
};

/// Criteria that fail for reasons recorded in the project notes.
const KNOWN_FAILURES: &[usize] = &[5];

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn recipe(name: &str) -> Config {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "recipes", name]
        .iter()
        .collect();
    Config::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn sweep(config: Config) -> SweepResult {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    run_sweep(&SweepRequest::new(config, jobs).unwrap()).unwrap()
}

fn column(result: &SweepResult, name: &str) -> Vec<f64> {
    let k = result.columns.iter().position(|c| c == name).unwrap();
    result.rows.iter().map(|r| r.values[k].unwrap_or(f64::NAN)).collect()
}

/// Two resonant spin-1 oscillators with the imbalanced rates of the
/// two-site figures.
fn pair(ux: f64, uy: f64, epsilon: f64) -> NetworkSpec {
    NetworkSpec::uncoupled(Spin::ONE, vec![100.0, 1.0], vec![1.0, 100.0], JumpKind::JpmJz)
        .with_epsilon(epsilon)
        .with_coupling(Coupling::new(0, 1, ux, uy, 0.0))
}

fn solved(spec: &NetworkSpec) -> DensityMatrix {
    steady_state(&build_liouvillian(spec).unwrap(), DEFAULT_KERNEL_TOL)
        .unwrap()
        .rho
}

fn peak(spec: &NetworkSpec) -> (f64, f64) {
    harmonic_peak(&s2_from_correlators(&solved(spec), spec).unwrap())
}

fn c1_blockade_null() -> Outcome {
    let iso = peak(&pair(0.5, 0.5, 0.1)).0;
    let a = peak(&pair(0.5, -0.5, 0.1)).0;
    let b = peak(&pair(-0.5, 0.5, 0.1)).0;
    let worst = a.max(b) / iso;
    outcome(
        worst < 1e-4,
        format!("anisotropic/isotropic smax = {worst:.3e} (< 1e-4)"),
    )
}

fn c2_phase_locking() -> Outcome {
    let cases = [(0.5, 0.5), (0.3, 0.1), (1.0, -0.5), (-0.2, 0.9), (0.05, 0.0)];
    let mut worst: f64 = 0.0;
    for (ux, uy) in cases {
        for sign in [1.0, -1.0] {
            let (_, phi) = peak(&pair(sign * ux, sign * uy, 0.1));
            let target = sign * FRAC_PI_2;
            worst = worst.max((phi - target).abs());
        }
    }
    outcome(
        worst < 1e-3,
        format!("max |phistar -/+ pi/2| = {worst:.2e} rad over 10 couplings (< 1e-3)"),
    )
}

fn c3_analytic_agreement() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (eps, limit) in [(0.1, 0.05), (0.05, 0.015)] {
        let spec = pair(0.5, 0.5, eps);
        let exact = reconstruct(&s2_from_correlators(&solved(&spec), &spec).unwrap(), FRAC_PI_2);
        let analytic = analytic_s2(&spec, FRAC_PI_2).unwrap();
        let rel = (exact - analytic).abs() / analytic.abs();
        pass &= rel < limit;
        parts.push(format!("eps={eps}: rel {rel:.2e} (< {limit})"));
    }
    let direct = 9.0 * PI * 0.1 * (0.5 + 0.5) / 256.0 * (1.0 / (1.0 + 1.0) - 1.0 / (100.0 + 100.0));
    let analytic = analytic_s2(&pair(0.5, 0.5, 0.1), FRAC_PI_2).unwrap();
    let formula_ok = (analytic - direct).abs() < 1e-15 && ((direct - 5.467e-3) / 5.467e-3).abs() < 1e-3;
    pass &= formula_ok;
    parts.push(format!("analytic(0.1) = {analytic:.4e}"));
    outcome(pass, parts.join(", "))
}

fn c4_inversion_symmetry() -> Outcome {
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let points: Vec<(f64, f64)> = grid.iter().flat_map(|&x| grid.iter().map(move |&y| (x, y))).collect();
    let worst = points
        .par_iter()
        .map(|&(x, y)| (peak(&pair(x, y, 0.1)).0 - peak(&pair(-x, -y, 0.1)).0).abs())
        .reduce(|| 0.0, f64::max);
    outcome(
        worst < 1e-8,
        format!("max |smax(u) - smax(-u)| = {worst:.2e} on 5x5 (< 1e-8)"),
    )
}

fn c5_linearity_window() -> Outcome {
    let mut config = recipe("fig2b.json");
    config.measures = vec![Measure::Smax];
    let result = sweep(config);
    let r: Vec<f64> = result.rows.iter().map(|row| row.axes[0]).collect();
    let s = column(&result, "smax");
    let inner: Vec<(f64, f64)> = r
        .iter()
        .zip(&s)
        .filter(|(x, _)| x.abs() <= 1.0)
        .map(|(&x, &y)| (x, y))
        .collect();
    let n = inner.len() as f64;
    let (mx, my) = (
        inner.iter().map(|p| p.0).sum::<f64>() / n,
        inner.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let slope = inner.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / inner.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let range = inner.iter().map(|p| p.1).fold(f64::MIN, f64::max) - inner.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    let residual = inner
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).abs())
        .fold(0.0, f64::max)
        / range;
    let outer_slope = r
        .windows(2)
        .zip(s.windows(2))
        .filter(|(x, _)| x[0].abs() >= 1.0 && x[1].abs() >= 1.0 && x[0] * x[1] > 0.0)
        .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs() / range)
        .fold(0.0, f64::max);
    outcome(
        residual < 0.03 && outer_slope < 0.03,
        format!(
            "fit residual {:.2}% of range (< 3%), max slope outside [-1,1] {:.1}% per unit (< 3%)",
            100.0 * residual,
            100.0 * outer_slope
        ),
    )
}

fn c6_entanglement_tongue() -> Outcome {
    let config = recipe("fig2c_anisotropic.json");
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let result = arnold_tongue(&SweepRequest::new(config, jobs).unwrap()).unwrap();
    let smax = column(&result, "smax");
    let neg = column(&result, "negativity");
    let max_s = smax.iter().cloned().fold(0.0, f64::max);
    let at = |eps: f64| {
        result
            .rows
            .iter()
            .zip(&neg)
            .find(|(row, _)| row.axes[0] == 0.0 && row.axes[1] == eps)
            .map(|(_, &n)| n)
            .unwrap()
    };
    let eps: Vec<f64> = {
        let mut e: Vec<f64> = result.rows.iter().map(|r| r.axes[1]).filter(|&e| e > 0.0).collect();
        e.sort_by(f64::total_cmp);
        e.dedup();
        e
    };
    let (lo, hi) = (at(eps[0]), at(*eps.last().unwrap()));
    outcome(
        max_s < 1e-4 && hi > 10.0 * lo && result.failed_rows() == 0,
        format!(
            "max smax {max_s:.1e} over {} points (< 1e-4), negativity at detuning 0: {hi:.2e} (eps={}) vs {lo:.2e} (eps={}), ratio {:.1} (> 10)",
            result.rows.len(),
            eps.last().unwrap(),
            eps[0],
            hi / lo
        ),
    )
}

fn c7_mean_field_regimes() -> Outcome {
    let report = |name: &str| {
        let config = recipe(name);
        classify_attractor(&mf_evolve(config.meanfield.as_ref().unwrap()).unwrap(), DEFAULT_TOL_FP).unwrap()
    };
    let (b1, b2, b3) = (report("fig3b1.json"), report("fig3b2.json"), report("fig3b3.json"));
    let pass = b3.kind == AttractorKind::LimitCycle
        && b3.circularity > 0.99
        && b1.kind == AttractorKind::FixedPoint
        && b1.residual_amplitude < 1e-4
        && b1.final_modulus > 1e-6
        && b2.kind == AttractorKind::LimitCycle
        && b2.circularity < 0.95;
    outcome(
        pass,
        format!(
            "isotropic {:?} circ {:.4}; anisotropic {:?} residual {:.1e} |J+| {:.3}; partial {:?} circ {:.3}",
            b3.kind, b3.circularity, b1.kind, b1.residual_amplitude, b1.final_modulus, b2.kind, b2.circularity
        ),
    )
}

fn c8_macroscopic_onset() -> Outcome {
    let result = sweep(recipe("fig3c1.json"));
    let d: Vec<f64> = result.rows.iter().map(|r| r.axes[0]).collect();
    let area = column(&result, "mf_area");
    // first point from which the area stays zero through maximal anisotropy
    let onset = (0..area.len()).rev().take_while(|&k| area[k] == 0.0).last();
    let pass = area[0] > 0.0 && onset.is_some_and(|k| k + 1 < area.len()) && result.failed_rows() == 0;
    let onset_txt = onset.map_or("none".to_string(), |k| format!("{:.2}", d[k]));
    outcome(
        pass,
        format!(
            "area {:.4} at isotropy, zero from |ux-uy| = {onset_txt} up to {:.2}",
            area[0],
            d.last().unwrap()
        ),
    )
}

fn c9_three_spin_insensitivity() -> Outcome {
    let mut two = recipe("fig2b.json");
    two.measures = vec![Measure::Smax];
    let joint = recipe("fig3a_joint.json");
    let axis = joint.grid.axis1.clone().unwrap();
    let two_axis = two.grid.axis1.as_mut().unwrap();
    two_axis.start = axis.start;
    two_axis.stop = axis.stop;
    two_axis.points = axis.points;
    let reference = column(&sweep(two), "smax");
    let ratios = axis.values();
    let minus_one = ratios.iter().position(|&r| r == -1.0).unwrap();
    let max = reference.iter().cloned().fold(0.0, f64::max);
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["fig3a_joint.json", "fig3a_pair12.json"] {
        let s = column(&sweep(recipe(name)), "smax");
        let dev = s.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / max;
        let floor = s[minus_one];
        pass &= dev < 0.10 && floor > 1e-3 * max && floor > 1e3 * reference[minus_one];
        parts.push(format!(
            "{}: max dev {:.2}% of max, floor at -1 {floor:.2e}",
            name.trim_end_matches(".json"),
            100.0 * dev
        ));
    }
    parts.push(format!("two-spin at -1 {:.1e}", reference[minus_one]));
    outcome(pass, parts.join("; "))
}

fn random_spec(rng: &mut ChaCha8Rng) -> NetworkSpec {
    let (spin, jump) = if rng.gen_bool(0.5) {
        (Spin::ONE, JumpKind::JpmJz)
    } else {
        (Spin::HALF, JumpKind::Jpm)
    };
    let mut rate = || rng.gen_range(0.5..5.0);
    let gains = vec![rate(), rate()];
    let damps = vec![rate(), rate()];
    let mut u = || rng.gen_range(-1.0..1.0);
    let coupling = Coupling::new(0, 1, u(), u(), u());
    let omegas = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    NetworkSpec::uncoupled(spin, gains, damps, jump)
        .with_omegas(omegas)
        .with_epsilon(rng.gen_range(0.0..1.0))
        .with_coupling(coupling)
}

/// Smallest nonzero `|⟨m'|O|m⟩|²` over both jump operators.
fn weakest_transition(spec: &NetworkSpec) -> f64 {
    let (up, down) = jump_operators(&spin_operators(spec.spin), spec.jump);
    up.iter()
        .chain(down.iter())
        .map(|z| z.norm_sqr())
        .filter(|&x| x > 1e-12)
        .fold(f64::INFINITY, f64::min)
}

fn c10_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let specs: Vec<NetworkSpec> = (0..20).map(|_| random_spec(&mut rng)).collect();
    let worst = specs
        .par_iter()
        .map(|spec| {
            let l = build_liouvillian(spec).unwrap();
            let a = steady_state(&l, DEFAULT_KERNEL_TOL).unwrap();
            let t_final = 60.0 / (spec.min_positive_rate().unwrap() * weakest_transition(spec));
            let b = steady_state_by_evolution(&l, t_final, default_dt(spec)).unwrap();
            a.rho.trace_distance(&b.rho)
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst < 1e-6,
        format!("max trace distance {worst:.2e} over 20 specs (< 1e-6)"),
    )
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).unwrap()
}

fn c11_harmonic_identity() -> Outcome {
    let spec = NetworkSpec::uncoupled(Spin::ONE, vec![1.0; 2], vec![1.0; 2], JumpKind::JpmJz);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let states: Vec<DensityMatrix> = (0..200).map(|_| random_state(&mut rng, 9)).collect();
    let phi12s = [-2.5, -0.7, 0.4, 1.9];
    let phi2s = periodic_nodes(5);
    let w = 2.0 * PI / phi2s.len() as f64;
    let worst = states
        .par_iter()
        .map(|rho| {
            let h = s2_from_correlators(rho, &spec).unwrap();
            let mut dev: f64 = 0.0;
            for &phi12 in &phi12s {
                let quad: f64 = phi2s
                    .iter()
                    .map(|&phi2| w * s_function_quadrature(rho, &[phi12 + phi2, phi2], &[0, 1], &spec).unwrap())
                    .sum();
                dev = dev.max((quad - reconstruct(&h, phi12)).abs());
            }
            let profile = s2_relative(rho, &spec).unwrap();
            for (&phi, &v) in profile.phis.iter().zip(&profile.values) {
                dev = dev.max((v - reconstruct(&h, phi)).abs());
            }
            dev
        })
        .reduce(|| 0.0, f64::max);

    // zero every coherence with n₁ − m₁ + n₂ − m₂ = 0, n₁ ≠ m₁
    let mut null_dev: f64 = 0.0;
    for rho in states.iter().take(20) {
        let mut m = rho.matrix().clone();
        for r in 0..9 {
            for c in 0..9 {
                let (a1, a2, b1, b2) = ((r / 3) as i64, (r % 3) as i64, (c / 3) as i64, (c % 3) as i64);
                if a1 != b1 && (a1 - b1) + (a2 - b2) == 0 {
                    m[(r, c)] = num_complex::Complex64::new(0.0, 0.0);
                }
            }
        }
        let stripped = DensityMatrix::from_matrix_unchecked(m);
        let profile = s2_relative(&stripped, &spec).unwrap();
        let h = s2_from_correlators(&stripped, &spec).unwrap();
        null_dev = null_dev.max(profile.values.iter().map(|v| v.abs()).fold(0.0, f64::max));
        null_dev = null_dev.max(h.iter().map(|h| h.coefficient.norm()).fold(0.0, f64::max));
    }
    outcome(
        worst < 1e-8 && null_dev < 1e-12,
        format!("max |quadrature - harmonics| {worst:.2e} on 200 states (< 1e-8), stripped max |S2| {null_dev:.1e}"),
    )
}

fn c12_perturbation_order() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut ratios = Vec::new();
    for k in 0..5 {
        let mut spec = random_spec(&mut rng);
        if k < 3 {
            spec = NetworkSpec {
                spin: Spin::ONE,
                jump: JumpKind::JpmJz,
                ..spec
            };
        }
        spec.omegas = vec![0.0, 0.0];
        let eps = 0.02 * spec.min_positive_rate().unwrap();
        let err = |e: f64| {
            let s = NetworkSpec {
                epsilon: e,
                ..spec.clone()
            };
            let exact = solved(&s);
            let series = expand(&s, 1).unwrap();
            trace_distance(exact.matrix(), series.partial_sum(e, 1).matrix())
        };
        ratios.push(err(eps) / err(eps / 2.0));
    }
    let pass = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    let list: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(
        pass,
        format!(
            "first-order error ratios eps vs eps/2: [{}] (in [3.5, 4.5])",
            list.join(", ")
        ),
    )
}

fn c13_normalizations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut q_dev: f64 = 0.0;
    let mut s_dev: f64 = 0.0;
    for twice in 1..=4u32 {
        let spin = Spin::from_twice(twice).unwrap();
        for sites in [1usize, 2] {
            if sites == 2 && twice > 2 {
                continue;
            }
            let spec = NetworkSpec::uncoupled(spin, vec![1.0; sites], vec![1.0; sites], JumpKind::Jpm);
            let theta = GaussLegendre::new(if sites == 1 { 64 } else { 24 }, 0.0, PI);
            let th: Vec<(f64, f64)> = theta.iter().map(|(t, w)| (t, w * t.sin())).collect();
            let nphi = 2 * twice as usize + 3;
            let phis = periodic_nodes(nphi);
            let wphi = 2.0 * PI / nphi as f64;
            for _ in 0..3 {
                let rho = random_state(&mut rng, spec.dim());
                let total = if sites == 1 {
                    let mut t = 0.0;
                    for &(a, wa) in &th {
                        for &p in &phis {
                            t += wa * wphi * husimi_q(&rho, &[p], &[a], &spec).unwrap();
                        }
                    }
                    t
                } else {
                    let mut t = 0.0;
                    for &(a, wa) in &th {
                        for &(b, wb) in &th {
                            for &p in &phis {
                                for &q in &phis {
                                    t += wa * wb * wphi * wphi * husimi_q(&rho, &[p, q], &[a, b], &spec).unwrap();
                                }
                            }
                        }
                    }
                    t
                };
                q_dev = q_dev.max((total - 1.0).abs());
                let subset: Vec<usize> = (0..sites).collect();
                let mut s = 0.0;
                if sites == 1 {
                    for &p in &phis {
                        s += wphi * s_function(&rho, &[p], &subset, &spec).unwrap();
                    }
                } else {
                    for &p in &phis {
                        for &q in &phis {
                            s += wphi * wphi * s_function(&rho, &[p, q], &subset, &spec).unwrap();
                        }
                    }
                }
                s_dev = s_dev.max(s.abs());
            }
        }
    }
    outcome(
        q_dev < 1e-8 && s_dev < 1e-8,
        format!("max |int Q - 1| {q_dev:.1e}, max |int S| {s_dev:.1e} for J in 1/2..2, N in 1,2 (< 1e-8)"),
    )
}

fn c14_determinism() -> Outcome {
    let mut config = recipe("fig1b.json");
    config.grid.axis1.as_mut().unwrap().points = 9;
    let outputs: Vec<Vec<u8>> = [1, 4, 16]
        .iter()
        .map(|&jobs| to_csv(&run_sweep(&SweepRequest::new(config.clone(), jobs).unwrap()).unwrap()))
        .collect();
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "CSV with discord, {} bytes, identical for jobs 1/4/16: {same}",
            outputs[0].len()
        ),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "blockade null", c1_blockade_null),
        (2, "phase locking", c2_phase_locking),
        (3, "analytic agreement", c3_analytic_agreement),
        (4, "inversion symmetry", c4_inversion_symmetry),
        (5, "linearity window", c5_linearity_window),
        (6, "entanglement tongue", c6_entanglement_tongue),
        (7, "mean-field regimes", c7_mean_field_regimes),
        (8, "macroscopic onset", c8_macroscopic_onset),
        (9, "three-spin insensitivity", c9_three_spin_insensitivity),
        (10, "oracle equivalence", c10_oracle_equivalence),
        (11, "harmonic identity", c11_harmonic_identity),
        (12, "perturbation order", c12_perturbation_order),
        (13, "normalizations", c13_normalizations),
        (14, "determinism", c14_determinism),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = Vec::new();
    for (n, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2} {status} {name} [{:.1}s]: {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failures.push(n);
        }
    }
    let expected: Vec<usize> = KNOWN_FAILURES
        .iter()
        .copied()
        .filter(|n| filter.is_empty() || filter.contains(n))
        .collect();
    println!("failing: {failures:?}, known: {expected:?}");
    if failures != expected {
        std::process::exit(1);
    }
}
