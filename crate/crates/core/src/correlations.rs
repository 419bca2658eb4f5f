//! Bipartite correlation measures: negativity, two-qubit concurrence,
//! mutual information and projective quantum discord.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, von_neumann_entropy, CMatrix};
use crate::liouvillian::{reduced_density, DensityMatrix};
use crate::network::NetworkSpec;

fn check_dim(rho: &DensityMatrix, spec: &NetworkSpec) -> Result<()> {
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Sum of the magnitudes of the negative eigenvalues of `ρ^{T_A}`, where `A`
/// is the group of sites in `bipartition` and the rest form the other side.
pub fn negativity(rho: &DensityMatrix, bipartition: &[usize], spec: &NetworkSpec) -> Result<f64> {
    check_dim(rho, spec)?;
    let mut group = bipartition.to_vec();
    group.sort_unstable();
    group.dedup();
    if group.len() != bipartition.len() {
        return Err(Error::InvalidBipartition(format!("repeated site in {bipartition:?}")));
    }
    if let Some(&k) = group.iter().find(|&&k| k >= spec.sites) {
        return Err(Error::InvalidBipartition(format!(
            "site {k} out of range for {} sites",
            spec.sites
        )));
    }
    if group.is_empty() || group.len() == spec.sites {
        return Err(Error::InvalidBipartition(format!(
            "{bipartition:?} leaves one side empty"
        )));
    }
    let pt = linalg::partial_transpose(rho.matrix(), &spec.site_dims(), &group);
    Ok(linalg::hermitian_eigenvalues(&pt)
        .into_iter()
        .filter(|&v| v < 0.0)
        .map(f64::abs)
        .sum())
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence_qubit(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::WrongDimension(rho.dim()));
    }
    let mut yy = CMatrix::zeros(4, 4);
    for (i, v) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        yy[(i, 3 - i)] = c(v);
    }
    let m = rho.matrix();
    let tilde = &yy * m.conjugate() * &yy;
    let s = linalg::psd_sqrt(m);
    let r = linalg::psd_sqrt(&(&s * tilde * &s));
    let mut lambdas = linalg::hermitian_eigenvalues(&r);
    lambdas.reverse();
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// `S(ρ₁) + S(ρ₂) − S(ρ₁₂)` in nats for sites `(0, 1)`.
pub fn mutual_information(rho: &DensityMatrix, spec: &NetworkSpec) -> Result<f64> {
    mutual_information_pair(rho, spec, (0, 1))
}

pub fn mutual_information_pair(rho: &DensityMatrix, spec: &NetworkSpec, pair: (usize, usize)) -> Result<f64> {
    let (a, b, ab) = pair_marginals(rho, spec, pair)?;
    Ok(mutual_info_of(&a, &b, &ab))
}

fn mutual_info_of(a: &CMatrix, b: &CMatrix, ab: &CMatrix) -> f64 {
    (von_neumann_entropy(a) + von_neumann_entropy(b) - von_neumann_entropy(ab)).max(0.0)
}

fn pair_marginals(
    rho: &DensityMatrix,
    spec: &NetworkSpec,
    pair: (usize, usize),
) -> Result<(CMatrix, CMatrix, CMatrix)> {
    check_dim(rho, spec)?;
    if spec.sites < 2 {
        return Err(Error::UnsupportedRegime("pair measures need at least two sites".into()));
    }
    let (k, l) = pair;
    if k == l {
        return Err(Error::InvalidBipartition(format!("pair ({k}, {l}) repeats a site")));
    }
    let ab = reduced_density(rho, &[k, l], spec)?.into_matrix();
    // reduced_density orders the kept sites ascending
    let d = spec.local_dim();
    let (first, second) = if k < l { (0, 1) } else { (1, 0) };
    let a = linalg::partial_trace(&ab, &[d, d], &[first]);
    let b = linalg::partial_trace(&ab, &[d, d], &[second]);
    let ab = if k < l { ab } else { swap_sites(&ab, d) };
    Ok((a, b, ab))
}

fn swap_sites(m: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, col| {
        let (r1, r2) = (r / d, r % d);
        let (c1, c2) = (col / d, col % d);
        m[(r2 * d + r1, c2 * d + c1)]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscordOptions {
    pub restarts: usize,
    /// Spread of the simplex function values at which a run stops.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Sites `(A, B)`; the measurement acts on `B`.
    pub pair: (usize, usize),
}

impl Default for DiscordOptions {
    fn default() -> Self {
        DiscordOptions {
            restarts: 16,
            tol: 1e-7,
            max_iter: 4000,
            seed: 0,
            pair: (0, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub value: f64,
    pub mutual_information: f64,
    pub classical_correlation: f64,
    /// Whether the best restart met the tolerance within `max_iter`.
    pub converged: bool,
    /// Always set: the optimum is taken over projective measurements only.
    pub upper_bound: bool,
    pub evaluations: usize,
}

/// `I(A:B) − max_Π J(A|Π_B)` over rank-one projective measurements on `B`.
///
/// The measurement basis is the column set of a product of Givens rotations
/// `G_{jk}(θ, φ)`, `j < k`, which reaches every basis up to phases. Each
/// restart runs Nelder–Mead from a seeded random point; the first starts at
/// the computational basis.
pub fn discord(rho: &DensityMatrix, spec: &NetworkSpec, opts: &DiscordOptions) -> Result<DiscordResult> {
    let (a, b, ab) = pair_marginals(rho, spec, opts.pair)?;
    let d = spec.local_dim();
    let mi = mutual_info_of(&a, &b, &ab);
    let n_params = d * (d - 1);
    let objective = |x: &[f64]| conditional_entropy(&ab, &givens_unitary(d, x), d);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, bool)> = None;
    let mut evaluations = 0;
    for restart in 0..opts.restarts.max(1) {
        let start: Vec<f64> = if restart == 0 {
            vec![0.0; n_params]
        } else {
            (0..n_params)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect()
        };
        let run = nelder_mead(&objective, &start, 0.4, opts.tol, opts.max_iter);
        evaluations += run.evaluations;
        if best.is_none_or(|(v, _)| run.value < v) {
            best = Some((run.value, run.converged));
        }
    }
    let (min_cond, converged) = best.expect("at least one restart");
    let classical = von_neumann_entropy(&a) - min_cond;
    Ok(DiscordResult {
        value: (mi - classical).max(0.0),
        mutual_information: mi,
        classical_correlation: classical,
        converged,
        upper_bound: true,
        evaluations,
    })
}

/// Product of Givens rotations over all pairs `j < k`, two angles each.
fn givens_unitary(d: usize, params: &[f64]) -> CMatrix {
    let mut u = linalg::identity(d);
    let mut it = params.chunks_exact(2);
    for j in 0..d {
        for k in j + 1..d {
            let p = it.next().expect("parameter count d(d-1)");
            let (s, co) = p[0].sin_cos();
            let phase = num_complex::Complex64::from_polar(1.0, p[1]);
            let mut g = linalg::identity(d);
            g[(j, j)] = c(co);
            g[(k, k)] = c(co);
            g[(j, k)] = -phase.conj() * s;
            g[(k, j)] = phase * s;
            u *= g;
        }
    }
    u
}

/// `Σ_k p_k S(ρ_{A|k})` for the projective measurement onto the columns of `u`
/// on the second factor.
fn conditional_entropy(ab: &CMatrix, u: &CMatrix, d: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..d {
        let v = u.column(k);
        let mut cond = CMatrix::zeros(d, d);
        for a in 0..d {
            for a2 in 0..d {
                let mut acc = c(0.0);
                for b in 0..d {
                    for b2 in 0..d {
                        acc += v[b].conj() * ab[(a * d + b, a2 * d + b2)] * v[b2];
                    }
                }
                cond[(a, a2)] = acc;
            }
        }
        let p = linalg::trace(&cond).re;
        if p > 1e-14 {
            total += p * von_neumann_entropy(&(cond / c(p)));
        }
    }
    total
}

struct NelderMeadRun {
    value: f64,
    converged: bool,
    evaluations: usize,
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64], step: f64, tol: f64, max_iter: usize) -> NelderMeadRun {
    let n = start.len();
    if n == 0 {
        return NelderMeadRun {
            value: f(start),
            converged: true,
            evaluations: 1,
        };
    }
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evaluations = n + 1;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[n] - values[0] <= tol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|p| p[i]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect() };
        let reflected = along(1.0);
        let fr = f(&reflected);
        evaluations += 1;
        if fr < values[0] {
            let expanded = along(2.0);
            let fe = f(&expanded);
            evaluations += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let p = along(0.5);
                let v = f(&p);
                (p, v)
            } else {
                let p = along(-0.5);
                let v = f(&p);
                (p, v)
            };
            evaluations += 1;
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = best.iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    values[i] = f(&simplex[i]);
                }
                evaluations += n;
            }
        }
    }
    let value = values.iter().copied().fold(f64::INFINITY, f64::min);
    NelderMeadRun {
        value,
        converged,
        evaluations,
    }
}
