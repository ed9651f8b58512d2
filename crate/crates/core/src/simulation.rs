//! Monte Carlo study of the two estimators.
//!
//! Data follow a cosine-basis design: X = Σₖ k^{-α/2} Uₖ φₖ with
//! Uₖ ~ Unif[−√3, √3], ℰ = Σⱼ j^{-d/2} Zⱼ φⱼ with Zⱼ ~ N(0,1), and
//! Y(s) = ∫ b(s,t) X(t) dt + ℰ(s) where b = Σ bⱼₖ φⱼ ⊗ φₖ,
//! b₁₁ = 0.3 and bⱼₖ = 4(−1)^{j+k} j^{-γ} k^{-β} otherwise.
//!
//! Every replication draws from its own ChaCha substream, so results do
//! not depend on how replications are scheduled across threads.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{FofError, Result};
use crate::grid::{surface_sq_norm, FunctionSample, Grid};
use crate::regression::{
    population_coefficient, CoefficientSurface, Decomposition, Estimator, Truncation,
};

/// Parameters of the simulated design.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n: usize,
    pub grid_size: usize,
    pub n_components: usize,
    pub noise_decay: f64,
    pub reps: usize,
    pub seed: u64,
    /// Multiplier on the noise process; 0 gives noiseless responses.
    pub noise_scale: f64,
    /// Only the first `x` basis functions carry predictor variance.
    pub x_components: Option<usize>,
    /// Restricts b to the block j, k ≤ this value.
    pub b_support: Option<usize>,
}

impl DgpConfig {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        DgpConfig {
            alpha,
            beta,
            gamma,
            n: 400,
            grid_size: 101,
            n_components: 50,
            noise_decay: 1.1,
            reps: 100,
            seed: 0,
            noise_scale: 1.0,
            x_components: None,
            b_support: None,
        }
    }

    /// Hard errors for configurations that cannot run, warnings for
    /// parameters outside the theory's smoothness class.
    pub fn validate(&self) -> Result<Vec<String>> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("noise_decay", self.noise_decay),
            ("noise_scale", self.noise_scale),
        ] {
            if !v.is_finite() {
                return Err(FofError::Config(format!("{name} must be finite")));
            }
        }
        if self.n < 2 {
            return Err(FofError::Config(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.reps == 0 {
            return Err(FofError::Config("reps must be at least 1".into()));
        }
        if self.n_components == 0 || self.n_components >= self.grid_size {
            return Err(FofError::Config(format!(
                "n_components must lie in 1..{} for a {}-point grid",
                self.grid_size - 1,
                self.grid_size
            )));
        }
        let mut warnings = Vec::new();
        if self.alpha <= 1.0 {
            warnings.push(format!("alpha = {} should exceed 1", self.alpha));
        }
        if self.beta <= self.alpha / 2.0 + 1.0 {
            warnings.push(format!(
                "beta = {} should exceed alpha/2 + 1 = {}",
                self.beta,
                self.alpha / 2.0 + 1.0
            ));
        }
        if self.gamma <= 0.5 {
            warnings.push(format!("gamma = {} should exceed 1/2", self.gamma));
        }
        Ok(warnings)
    }

    pub fn region(&self) -> Region {
        restriction_region(self.alpha, self.beta, self.gamma)
    }
}

/// Where (α, β, γ) sits relative to the set on which the double-truncation
/// estimator attains the optimal rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// γ > α + 1 and β ≤ {(2γ−1)α + 2γ}/2.
    A,
    /// γ ≤ α + 1 and β < {(2γ−1)α + 2α + 2}/{2(2α − 2γ + 3)}.
    B,
    Outside,
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::A => "A",
            Region::B => "B",
            Region::Outside => "outside",
        }
    }
}

pub fn restriction_region(alpha: f64, beta: f64, gamma: f64) -> Region {
    if gamma > alpha + 1.0 {
        if beta <= ((2.0 * gamma - 1.0) * alpha + 2.0 * gamma) / 2.0 {
            return Region::A;
        }
    } else {
        let bound = ((2.0 * gamma - 1.0) * alpha + 2.0 * alpha + 2.0)
            / (2.0 * (2.0 * alpha - 2.0 * gamma + 3.0));
        if beta < bound {
            return Region::B;
        }
    }
    Region::Outside
}

/// −(2β − 1)/(α + 2β), the log-log slope of the optimal MISE in n.
pub fn theory_slope(alpha: f64, beta: f64) -> f64 {
    -(2.0 * beta - 1.0) / (alpha + 2.0 * beta)
}

/// φ₁ ≡ 1, φ_{j+1}(t) = √2 cos(jπt).
pub fn cosine_basis(grid: &Arc<Grid>, count: usize) -> Result<Vec<FunctionSample>> {
    if count > grid.len() {
        return Err(FofError::InvalidInput(format!(
            "{count} basis functions requested on a {}-point grid",
            grid.len()
        )));
    }
    Ok((0..count)
        .map(|j| {
            let values = grid
                .points()
                .iter()
                .map(|&t| {
                    if j == 0 {
                        1.0
                    } else {
                        SQRT_2 * (j as f64 * PI * t).cos()
                    }
                })
                .collect();
            FunctionSample::from_parts_unchecked(grid.clone(), values)
        })
        .collect())
}

/// bⱼₖ rule of the simulation design (1-based indices).
pub fn design_coefficient(gamma: f64, beta: f64) -> impl Fn(usize, usize) -> f64 + Copy {
    move |j, k| {
        if j == 1 && k == 1 {
            0.3
        } else {
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            4.0 * sign * (j as f64).powf(-gamma) * (k as f64).powf(-beta)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimDataset {
    pub xs: Vec<FunctionSample>,
    pub ys: Vec<FunctionSample>,
    pub truth: CoefficientSurface,
    pub basis: Vec<FunctionSample>,
}

/// Deterministic generator for replication `stream` of a run seeded by `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws n (X, Y) pairs from the design in `config`.
pub fn generate_dataset<R: Rng + ?Sized>(config: &DgpConfig, rng: &mut R) -> Result<SimDataset> {
    config.validate()?;
    let grid = Arc::new(Grid::uniform(config.grid_size)?);
    let basis = cosine_basis(&grid, config.n_components)?;
    let kdim = config.n_components;
    let rule = design_coefficient(config.gamma, config.beta);
    let support = config.b_support.unwrap_or(kdim);
    let truth = population_coefficient(
        |j, k| {
            if j <= support && k <= support {
                rule(j, k)
            } else {
                0.0
            }
        },
        &basis,
        kdim,
        kdim,
    )?;
    let b = match &truth.coeffs {
        crate::regression::Coefficients::Table(t) => t.clone(),
        crate::regression::Coefficients::Curves(_) => unreachable!(),
    };
    let x_active = config.x_components.unwrap_or(kdim).min(kdim);
    let sqrt3 = 3f64.sqrt();
    let n = config.n;

    let mut a = DMatrix::zeros(n, kdim);
    let mut e = DMatrix::zeros(n, kdim);
    for i in 0..n {
        for k in 0..kdim {
            let u: f64 = rng.random_range(-sqrt3..sqrt3);
            if k < x_active {
                a[(i, k)] = ((k + 1) as f64).powf(-config.alpha / 2.0) * u;
            }
        }
        for j in 0..kdim {
            let z: f64 = rng.sample(StandardNormal);
            e[(i, j)] = config.noise_scale * ((j + 1) as f64).powf(-config.noise_decay / 2.0) * z;
        }
    }
    let phi = DMatrix::from_fn(grid.len(), kdim, |t, k| basis[k].values()[t]);
    let x = &a * phi.transpose();
    // Y coordinates: Σₖ bⱼₖ aₖ + εⱼ
    let y_coef = &a * b.transpose() + e;
    let y = y_coef * phi.transpose();
    let rows = |m: &DMatrix<f64>| -> Vec<FunctionSample> {
        (0..n)
            .map(|i| {
                FunctionSample::from_parts_unchecked(
                    grid.clone(),
                    m.row(i).iter().copied().collect(),
                )
            })
            .collect()
    };
    Ok(SimDataset {
        xs: rows(&x),
        ys: rows(&y),
        truth,
        basis,
    })
}

/// Integrated squared errors of every truncation up to `max_truncation`
/// on one dataset; `None` marks truncations beyond the usable rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationErrors {
    /// Index m − 1.
    pub single: Vec<Option<f64>>,
    /// Index (m₁ − 1, m₂ − 1).
    pub double: Vec<Vec<Option<f64>>>,
}

/// Computes |||estimate − b|||² for all truncations at once.
///
/// Uses the orthonormality of φ̂ in the quadrature inner product:
/// |||b̂ₘ − b|||² = |||b|||² − 2 Σ_{k≤m} ⟨hₖ, T_b φ̂ₖ⟩ + Σ_{k≤m} ‖hₖ‖² and
/// |||b̃ − b|||² = |||b|||² − 2 Σ b̃ⱼₖ ⟨b, φ̂ⱼ⊗φ̂ₖ⟩ + Σ b̃ⱼₖ².
pub fn replication_errors(
    data: &SimDataset,
    max_truncation: usize,
    estimators: &[Estimator],
) -> Result<ReplicationErrors> {
    let dec = Decomposition::capped(&data.xs, &data.ys, max_truncation)?;
    let d = dec.depth();
    let b = data.truth.surface.values();
    let b_sq = surface_sq_norm(&data.truth.surface);
    let w = dec.grid.weights();
    let p = w.len();
    // column k: (T_b φ̂ₖ)(s)
    let b_phi = b * &dec.weighted_phi;

    let mut single = vec![None; max_truncation];
    if estimators.contains(&Estimator::Single) {
        let h = dec.single_curves(d);
        let mut acc = b_sq;
        for k in 0..d {
            let mut cross = 0.0;
            let mut sq = 0.0;
            for s in 0..p {
                cross += w[s] * h[(s, k)] * b_phi[(s, k)];
                sq += w[s] * h[(s, k)] * h[(s, k)];
            }
            acc += sq - 2.0 * cross;
            single[k] = Some(acc.max(0.0));
        }
    }

    let mut double = vec![vec![None; max_truncation]; max_truncation];
    if estimators.contains(&Estimator::Double) {
        let table = dec.double_table(d, d);
        let proj = dec.weighted_phi.tr_mul(&b_phi);
        // prefix sums over the (j, k) rectangle
        let mut prefix = DMatrix::<f64>::zeros(d + 1, d + 1);
        for j in 0..d {
            for k in 0..d {
                let c = table[(j, k)];
                let term = c * c - 2.0 * c * proj[(j, k)];
                prefix[(j + 1, k + 1)] =
                    term + prefix[(j, k + 1)] + prefix[(j + 1, k)] - prefix[(j, k)];
            }
        }
        for (j, row) in double.iter_mut().enumerate().take(d) {
            for (k, cell) in row.iter_mut().enumerate().take(d) {
                *cell = Some((b_sq + prefix[(j + 1, k + 1)]).max(0.0));
            }
        }
    }
    Ok(ReplicationErrors { single, double })
}

/// Mean integrated squared error of one estimator at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct MiseSweep {
    pub estimator: Estimator,
    pub n: usize,
    /// (truncation, MISE); `None` if some replication could not fit it.
    pub table: Vec<(Truncation, Option<f64>)>,
    pub optimal: Truncation,
    pub optimal_mise: f64,
    /// Per-replication minimizers of the integrated squared error.
    pub rep_optima: Vec<Truncation>,
}

fn sweep_from(
    estimator: Estimator,
    n: usize,
    max_truncation: usize,
    reps: &[ReplicationErrors],
) -> Result<MiseSweep> {
    let truncations: Vec<Truncation> = match estimator {
        Estimator::Single => (1..=max_truncation).map(Truncation::Single).collect(),
        Estimator::Double => (1..=max_truncation)
            .flat_map(|a| (1..=max_truncation).map(move |b| Truncation::Double(a, b)))
            .collect(),
    };
    let lookup = |r: &ReplicationErrors, t: Truncation| match t {
        Truncation::Single(m) => r.single[m - 1],
        Truncation::Double(a, b) => r.double[a - 1][b - 1],
    };
    let table: Vec<(Truncation, Option<f64>)> = truncations
        .iter()
        .map(|&t| {
            let total: Option<f64> = reps.iter().map(|r| lookup(r, t)).sum();
            (t, total.map(|s| s / reps.len() as f64))
        })
        .collect();
    let (optimal, optimal_mise) = argmin(table.iter().filter_map(|&(t, v)| v.map(|v| (t, v))))
        .ok_or_else(|| FofError::InvalidInput(format!("no feasible truncation at n = {n}")))?;
    let rep_optima = reps
        .iter()
        .filter_map(|r| {
            argmin(
                truncations
                    .iter()
                    .filter_map(|&t| lookup(r, t).map(|v| (t, v))),
            )
        })
        .map(|(t, _)| t)
        .collect();
    Ok(MiseSweep {
        estimator,
        n,
        table,
        optimal,
        optimal_mise,
        rep_optima,
    })
}

/// First minimum in iteration order.
fn argmin(iter: impl Iterator<Item = (Truncation, f64)>) -> Option<(Truncation, f64)> {
    iter.fold(None, |best, (t, v)| match best {
        Some((_, bv)) if bv <= v => best,
        _ => Some((t, v)),
    })
}

fn run_replications(
    config: &DgpConfig,
    stream_base: u64,
    max_truncation: usize,
    estimators: &[Estimator],
) -> Result<Vec<ReplicationErrors>> {
    (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(config.seed, stream_base + rep as u64);
            let data = generate_dataset(config, &mut rng)?;
            replication_errors(&data, max_truncation, estimators)
        })
        .collect()
}

/// MISE of `estimator` over truncations 1..=`max_truncation` (all pairs for
/// the double estimator) at sample size `config.n`.
pub fn mise_sweep(
    config: &DgpConfig,
    estimator: Estimator,
    max_truncation: usize,
) -> Result<MiseSweep> {
    let reps = run_replications(config, 0, max_truncation, &[estimator])?;
    sweep_from(estimator, config.n, max_truncation, &reps)
}

/// Ordinary least-squares fit of log(MISE) on log(n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeCheck {
    pub fitted: f64,
    pub std_error: f64,
    pub theory: f64,
    pub gap: f64,
}

pub fn slope_check(ns: &[usize], mise: &[f64], alpha: f64, beta: f64) -> Result<SlopeCheck> {
    if ns.len() != mise.len() {
        return Err(FofError::InvalidInput(
            "sample sizes and MISE values differ in length".into(),
        ));
    }
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(FofError::InvalidInput(format!(
            "slope fit needs at least 3 distinct sample sizes, got {}",
            distinct.len()
        )));
    }
    if mise.iter().any(|&m| !m.is_finite() || m <= 0.0) {
        return Err(FofError::InvalidInput(
            "slope fit needs positive finite MISE values".into(),
        ));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = mise.iter().map(|m| m.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let fitted = sxy / sxx;
    let intercept = my - fitted * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - fitted * x).powi(2))
        .sum();
    let std_error = (ssr / (k - 2.0) / sxx).sqrt();
    let theory = theory_slope(alpha, beta);
    Ok(SlopeCheck {
        fitted,
        std_error,
        theory,
        gap: (fitted - theory).abs(),
    })
}

/// Full study over a grid of sample sizes.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub config: DgpConfig,
    pub n_grid: Vec<usize>,
    pub max_truncation: usize,
    pub sweeps: Vec<MiseSweep>,
    pub slopes: Vec<(Estimator, Option<SlopeCheck>)>,
    pub theory_slope: f64,
    pub region: Region,
    pub warnings: Vec<String>,
}

impl SimResult {
    pub fn sweep(&self, estimator: Estimator, n: usize) -> Option<&MiseSweep> {
        self.sweeps
            .iter()
            .find(|s| s.estimator == estimator && s.n == n)
    }

    pub fn slope(&self, estimator: Estimator) -> Option<SlopeCheck> {
        self.slopes
            .iter()
            .find(|(e, _)| *e == estimator)
            .and_then(|(_, s)| *s)
    }
}

/// Runs `config.reps` replications at every n in `n_grid`, scoring the
/// requested estimators on the same datasets.
pub fn run_study(
    config: &DgpConfig,
    n_grid: &[usize],
    max_truncation: usize,
    estimators: &[Estimator],
) -> Result<SimResult> {
    let warnings = config.validate()?;
    if n_grid.is_empty() {
        return Err(FofError::Config("empty sample-size grid".into()));
    }
    if max_truncation == 0 {
        return Err(FofError::Config("max_truncation must be at least 1".into()));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut sweeps = Vec::new();
    for (idx, &n) in n_grid.iter().enumerate() {
        let cfg = DgpConfig {
            n,
            ..config.clone()
        };
        cfg.validate()?;
        let reps = run_replications(&cfg, (idx as u64) << 32, max_truncation, estimators)?;
        for &e in estimators {
            sweeps.push(sweep_from(e, n, max_truncation, &reps)?);
        }
    }
    let slopes = estimators
        .iter()
        .map(|&e| {
            let (ns, ms): (Vec<usize>, Vec<f64>) = sweeps
                .iter()
                .filter(|s| s.estimator == e)
                .map(|s| (s.n, s.optimal_mise))
                .unzip();
            (e, slope_check(&ns, &ms, config.alpha, config.beta).ok())
        })
        .collect();
    Ok(SimResult {
        config: config.clone(),
        n_grid: n_grid.to_vec(),
        max_truncation,
        sweeps,
        slopes,
        theory_slope: theory_slope(config.alpha, config.beta),
        region: config.region(),
        warnings,
    })
}
