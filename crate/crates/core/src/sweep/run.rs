//! Grid evaluation of the requested measures.

use std::time::Instant;

use serde::Serialize;

use super::config::{Config, Measure, DETUNING_PATH};
use crate::correlations::{concurrence_qubit, discord, mutual_information_pair, negativity, DiscordOptions};
use crate::error::{Error, Result};
use crate::liouvillian::{
    build_liouvillian, default_dt, reduced_density, steady_state, steady_state_by_evolution, SolveMethod,
    SteadyStateResult,
};
use crate::meanfield::{classify_attractor, mf_evolve};
use crate::network::NetworkSpec;
use crate::spin::Spin;
use crate::sync::{harmonic_peak, s2_from_correlators_pair};

/// A validated configuration with its grid expanded.
#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub config: Config,
    pub jobs: usize,
}

impl SweepRequest {
    pub fn new(config: Config, jobs: usize) -> Result<Self> {
        config.validate()?;
        if jobs == 0 {
            return Err(Error::validation("sweep.jobs", "must be at least 1"));
        }
        Ok(SweepRequest { config, jobs })
    }

    pub fn axis_names(&self) -> Vec<String> {
        [&self.config.grid.axis1, &self.config.grid.axis2]
            .into_iter()
            .flatten()
            .map(|a| a.name.clone())
            .collect()
    }

    /// Grid points in row-major order over `(axis1, axis2)`.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let grid = &self.config.grid;
        match (&grid.axis1, &grid.axis2) {
            (None, _) => vec![vec![]],
            (Some(a), None) => a.values().into_iter().map(|x| vec![x]).collect(),
            (Some(a), Some(b)) => {
                let bv = b.values();
                a.values()
                    .into_iter()
                    .flat_map(|x| bv.iter().map(move |&y| vec![x, y]))
                    .collect()
            }
        }
    }

    /// Output column names for the measures, in request order.
    pub fn measure_columns(&self) -> Vec<String> {
        let spin = self.config.network.as_ref().map(|n| n.spin);
        measure_columns(&self.config.measures, spin)
    }

    fn point_config(&self, values: &[f64]) -> Result<Config> {
        let grid = &self.config.grid;
        let mut assignments = Vec::new();
        for (axis, &v) in [&grid.axis1, &grid.axis2].into_iter().flatten().zip(values) {
            for p in &axis.paths {
                assignments.push((p.as_str(), v));
            }
        }
        self.config.with_assignments(&assignments)
    }
}

pub fn measure_columns(measures: &[Measure], spin: Option<Spin>) -> Vec<String> {
    let mut cols = Vec::new();
    for m in measures {
        if *m == Measure::Sprofile {
            let orders = spin.map_or(0, |s| s.twice() as usize);
            for p in 1..=orders {
                cols.push(format!("sprofile_h{p}_abs"));
                cols.push(format!("sprofile_h{p}_arg"));
            }
        } else {
            cols.push(m.name().to_string());
        }
    }
    cols
}

/// One grid point. `values` follows [`SweepRequest::measure_columns`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub axes: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub kernel_dim: Option<usize>,
    pub residual: Option<f64>,
    pub wall_ms: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis_names: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<PointRecord>,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Steady state of `spec` by the configured method.
pub fn solve(spec: &NetworkSpec, config: &Config) -> Result<SteadyStateResult> {
    let l = build_liouvillian(spec)?;
    match config.solve.method {
        SolveMethod::NullSpace => steady_state(&l, config.solve.tol),
        SolveMethod::Evolve => {
            let t_final = match config.solve.t_final {
                Some(t) => t,
                None => 50.0 / spec.min_positive_rate().unwrap_or(1.0),
            };
            let dt = config.solve.dt.unwrap_or_else(|| default_dt(spec));
            steady_state_by_evolution(&l, t_final, dt)
        }
    }
}

/// SplitMix64 finalizer combining the request seed and grid index.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Evaluate every measure of `config` at its (already resolved) parameters.
pub fn run_point(config: &Config, seed: u64) -> PointRecord {
    let start = Instant::now();
    let needs_state = config.measures.iter().any(|m| m.needs_steady_state());
    let state = needs_state.then(|| {
        config
            .network_spec()
            .and_then(|spec| solve(&spec, config).map(|ss| (spec, ss)))
    });
    let mut record = evaluate(config, seed, state.as_ref().map(|r| r.as_ref()));
    if config.sweep.record_wall_time {
        record.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    record
}

/// Measures of `config` on an already computed steady state (`None` when no
/// measure needs one). Leaves `axes` and `wall_ms` empty.
pub fn evaluate(
    config: &Config,
    seed: u64,
    solved: Option<std::result::Result<&(NetworkSpec, SteadyStateResult), &Error>>,
) -> PointRecord {
    let spin = config.network.as_ref().map(|n| n.spin);
    let columns = measure_columns(&config.measures, spin);
    let mut record = PointRecord {
        axes: Vec::new(),
        values: vec![None; columns.len()],
        kernel_dim: None,
        residual: None,
        wall_ms: None,
        error: None,
    };
    let mut errors: Vec<String> = Vec::new();
    let state = match solved {
        Some(Ok(pair)) => {
            record.kernel_dim = Some(pair.1.kernel_dim);
            record.residual = Some(pair.1.residual);
            Some(pair)
        }
        Some(Err(e)) => {
            errors.push(e.to_string());
            None
        }
        None => None,
    };

    let pair = config.sweep.pair;
    let mut col = 0;
    for &m in &config.measures {
        let width = measure_columns(&[m], spin).len();
        let result: Result<Vec<f64>> = match (m, &state) {
            (Measure::MfArea, _) => mf_area(config).map(|a| vec![a]),
            (_, None) => Err(Error::UnsupportedRegime("no steady state".into())),
            (_, Some((spec, ss))) => state_measure(m, spec, ss, config, pair, seed),
        };
        match result {
            Ok(vals) => {
                for (k, v) in vals.into_iter().enumerate() {
                    record.values[col + k] = Some(v);
                }
            }
            Err(e) => {
                if state.is_some() || m == Measure::MfArea {
                    errors.push(format!("{}: {e}", m.name()));
                }
            }
        }
        col += width;
    }
    if !errors.is_empty() {
        record.error = Some(errors.join("; "));
    }
    record
}

fn state_measure(
    m: Measure,
    spec: &NetworkSpec,
    ss: &SteadyStateResult,
    config: &Config,
    pair: (usize, usize),
    seed: u64,
) -> Result<Vec<f64>> {
    let rho = &ss.rho;
    match m {
        Measure::Smax | Measure::Phistar => {
            let h = s2_from_correlators_pair(rho, spec, pair)?;
            let (s_max, phi_star) = harmonic_peak(&h);
            Ok(vec![if m == Measure::Smax { s_max } else { phi_star }])
        }
        Measure::Sprofile => {
            let h = s2_from_correlators_pair(rho, spec, pair)?;
            Ok(h.iter().flat_map(|h| [h.modulus(), h.phase()]).collect())
        }
        Measure::Negativity => {
            let pair_spec = two_site(spec);
            let r = reduced_density(rho, &[pair.0, pair.1], spec)?;
            negativity(&r, &[0], &pair_spec).map(|v| vec![v])
        }
        Measure::Concurrence => {
            let r = reduced_density(rho, &[pair.0, pair.1], spec)?;
            concurrence_qubit(&r).map(|v| vec![v])
        }
        Measure::MutualInfo => mutual_information_pair(rho, spec, pair).map(|v| vec![v]),
        Measure::Discord => {
            let d = config.sweep.discord;
            let opts = DiscordOptions {
                restarts: d.restarts,
                tol: d.tol,
                max_iter: d.max_iter,
                seed,
                pair,
            };
            discord(rho, spec, &opts).map(|r| vec![r.value])
        }
        Measure::MfArea => unreachable!("handled by caller"),
    }
}

fn two_site(spec: &NetworkSpec) -> NetworkSpec {
    NetworkSpec::uncoupled(spec.spin, vec![0.0; 2], vec![0.0; 2], spec.jump)
}

fn mf_area(config: &Config) -> Result<f64> {
    let mf = config
        .meanfield
        .as_ref()
        .ok_or_else(|| Error::validation("meanfield", "block is required for measure mf_area"))?;
    let report = classify_attractor(&mf_evolve(mf)?, config.sweep.tol_fp)?;
    Ok(report.area)
}

/// Evaluate the grid on a `jobs`-thread pool; rows come back in grid order.
pub fn run_sweep(req: &SweepRequest) -> Result<SweepResult> {
    use rayon::prelude::*;
    let points = req.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.jobs)
        .build()
        .map_err(|e| Error::validation("sweep.jobs", e.to_string()))?;
    let columns = req.measure_columns();
    let width = columns.len();
    let rows = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, axes)| {
                let mut record = match req.point_config(axes) {
                    Ok(config) => run_point(&config, point_seed(req.config.sweep.seed, index)),
                    Err(e) => PointRecord {
                        axes: Vec::new(),
                        values: vec![None; width],
                        kernel_dim: None,
                        residual: None,
                        wall_ms: None,
                        error: Some(e.to_string()),
                    },
                };
                record.axes = axes.clone();
                record
            })
            .collect()
    });
    Ok(SweepResult {
        axis_names: req.axis_names(),
        columns,
        rows,
    })
}

/// A sweep whose first axis is the detuning `ω₁ − ω₂` and second axis `ε`.
pub fn arnold_tongue(req: &SweepRequest) -> Result<SweepResult> {
    let grid = &req.config.grid;
    let ok1 = grid.axis1.as_ref().is_some_and(|a| a.paths == [DETUNING_PATH]);
    let ok2 = grid.axis2.as_ref().is_some_and(|a| a.paths == ["network.epsilon"]);
    if !ok1 {
        return Err(Error::validation(
            "grid.axis1.paths",
            format!("a tongue sweeps [\"{DETUNING_PATH}\"]"),
        ));
    }
    if !ok2 {
        return Err(Error::validation(
            "grid.axis2.paths",
            "a tongue sweeps [\"network.epsilon\"]",
        ));
    }
    run_sweep(req)
}
