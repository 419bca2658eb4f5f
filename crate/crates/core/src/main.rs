use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use spinsync::experiment::effective_couplings;
use spinsync::linalg::CMatrix;
use spinsync::liouvillian::DensityMatrix;
use spinsync::meanfield::{classify_attractor, mf_evolve};
use spinsync::perturbation::{analytic_s2, expand};
use spinsync::sweep::config::OutputFormat;
use spinsync::sweep::export::{self, format_float};
use spinsync::sweep::run::{evaluate, solve};
use spinsync::sweep::{arnold_tongue, run_sweep, Config, SweepRequest};
use spinsync::sync::{harmonic_peak, s2_from_correlators_pair};
use spinsync::Error;

const EXIT_OTHER: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(
    name = "spinsync",
    version,
    about = "Synchronization in dissipative spin-J oscillator networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    io: Io,
    /// Worker threads; defaults to `sweep.jobs`, then the number of CPUs.
    #[arg(long, env = "SPINSYNC_JOBS")]
    jobs: Option<usize>,
    /// Overrides `sweep.format`.
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the steady state of the base network and evaluate the measures.
    Steady(Io),
    /// Evaluate the measures over the configured grid.
    Sweep(SweepArgs),
    /// Sweep over detuning (axis1) and coupling strength (axis2).
    Tongue(SweepArgs),
    /// Integrate the mean-field equation; writes the trajectory as CSV and
    /// prints the attractor report.
    Meanfield(Io),
    /// Perturbative expansion in the coupling strength.
    Perturb {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        order: usize,
    },
    /// Effective couplings from the `dressing` block.
    MapCouplings {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("unknown format {s:?} (expected csv or json)")),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. }
        | Error::Parse { .. }
        | Error::InvalidSpin(_)
        | Error::SiteOutOfRange { .. }
        | Error::InvalidBipartition(_)
        | Error::EmptySelection
        | Error::ZeroDetuning(_) => EXIT_VALIDATION,
        Error::Io { .. } => EXIT_OTHER,
        _ => EXIT_SOLVER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> spinsync::Result<u8> {
    match command {
        Command::Steady(io) => steady(&io),
        Command::Sweep(args) => sweep(&args, false),
        Command::Tongue(args) => sweep(&args, true),
        Command::Meanfield(io) => meanfield(&io),
        Command::Perturb { io, order } => perturb(&io, order),
        Command::MapCouplings { config, out } => map_couplings(&config, out.as_deref()),
    }
}

fn write_json(path: &Path, value: &Value) -> spinsync::Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("json serializes");
    s.push('\n');
    export::write_file(path, s.as_bytes())
}

fn matrix_json(m: &CMatrix) -> Value {
    let part = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
            .collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

fn steady(io: &Io) -> spinsync::Result<u8> {
    let config = Config::load(&io.config)?;
    let spec = config.network_spec()?;
    let ss = solve(&spec, &config)?;
    let rho = ss.rho.matrix().clone();
    let (kernel_dim, residual, degenerate) = (ss.kernel_dim, ss.residual, ss.degenerate);
    let solved = (spec, ss);
    let record = evaluate(&config, config.sweep.seed, Some(Ok(&solved)));
    let columns = spinsync::sweep::run::measure_columns(&config.measures, Some(solved.0.spin));
    let measures: serde_json::Map<String, Value> = columns
        .into_iter()
        .zip(&record.values)
        .map(|(k, v)| (k, v.map_or(Value::Null, Value::from)))
        .collect();
    write_json(
        &io.out,
        &json!({
            "kernel_dim": kernel_dim,
            "residual": residual,
            "degenerate": degenerate,
            "method": config.solve.method,
            "measures": measures,
            "error": record.error,
            "rho": matrix_json(&rho),
        }),
    )?;
    Ok(if record.error.is_some() { EXIT_PARTIAL } else { 0 })
}

fn sweep(args: &SweepArgs, tongue: bool) -> spinsync::Result<u8> {
    let config = Config::load(&args.io.config)?;
    let jobs = args
        .jobs
        .or(config.sweep.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let format = args.format.unwrap_or(config.sweep.format);
    let req = SweepRequest::new(config, jobs)?;
    let result = if tongue { arnold_tongue(&req)? } else { run_sweep(&req)? };
    export::export(&result, &req.config, format, &args.io.out)?;
    let failed = result.failed_rows();
    if failed > 0 {
        eprintln!("{failed} of {} grid points failed", result.rows.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn meanfield(io: &Io) -> spinsync::Result<u8> {
    let config = Config::load(&io.config)?;
    let spec = config.meanfield.as_ref().ok_or_else(|| Error::Validation {
        path: "meanfield".into(),
        reason: "block is required".into(),
    })?;
    let traj = mf_evolve(spec)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "re_jplus", "im_jplus", "jz"])
        .expect("in-memory write");
    for ((t, z), jz) in traj.times.iter().zip(&traj.order_parameter).zip(&traj.jz) {
        w.write_record([
            format_float(*t),
            format_float(z.re),
            format_float(z.im),
            format_float(*jz),
        ])
        .expect("in-memory write");
    }
    export::write_file(&io.out, &w.into_inner().expect("in-memory flush"))?;
    let report = classify_attractor(&traj, config.sweep.tol_fp)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("json serializes"));
    Ok(0)
}

fn perturb(io: &Io, order: usize) -> spinsync::Result<u8> {
    let config = Config::load(&io.config)?;
    let spec = config.network_spec()?;
    if order == 0 {
        return Err(Error::Validation {
            path: "--order".into(),
            reason: "must be at least 1".into(),
        });
    }
    let series = expand(&spec, order)?;
    let exact = solve(&spec, &config)?;
    let pair = config.sweep.pair;
    let peak = |rho: &DensityMatrix| -> spinsync::Result<(f64, f64)> {
        Ok(harmonic_peak(&s2_from_correlators_pair(rho, &spec, pair)?))
    };
    let (smax, phistar) = peak(&exact.rho)?;
    let mut partial = Vec::new();
    for j in 0..=order {
        let rho = series.partial_sum(spec.epsilon, j);
        let (s, p) = peak(&rho)?;
        partial.push(json!({
            "order": j,
            "smax": s,
            "phistar": p,
            "trace_distance_to_exact": rho.trace_distance(&exact.rho),
        }));
    }
    let analytic = analytic_s2(&spec, std::f64::consts::FRAC_PI_2).ok();
    write_json(
        &io.out,
        &json!({
            "order": order,
            "epsilon_ref": series.epsilon_ref,
            "residuals": series.residuals,
            "partial_sums": partial,
            "exact": { "smax": smax, "phistar": phistar, "kernel_dim": exact.kernel_dim },
            "analytic_s2_half_pi": analytic,
        }),
    )?;
    Ok(0)
}

fn map_couplings(path: &Path, out: Option<&Path>) -> spinsync::Result<u8> {
    let config = Config::load(path)?;
    let dressing = config.dressing.as_ref().ok_or_else(|| Error::Validation {
        path: "dressing".into(),
        reason: "block is required".into(),
    })?;
    let raw = effective_couplings(&dressing.params())?;
    let dimensionless = match dressing.gamma_ref {
        Some(g) => Some(raw.to_dimensionless(g)?),
        None => None,
    };
    let doc = json!({ "raw": raw, "dimensionless": dimensionless, "gamma_ref": dressing.gamma_ref });
    match out {
        Some(p) => write_json(p, &doc)?,
        None => println!("{}", serde_json::to_string_pretty(&doc).expect("json serializes")),
    }
    Ok(0)
}
