use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use fofreg_core::io::{fmt_f64, write_atomic, RunConfig};
use fofreg_core::{run_study, DgpConfig, Estimator, FofError, Result, SimResult, Truncation};

use crate::SimulateArgs;

const KEYS: &[&str] = &[
    "alpha",
    "beta",
    "gamma",
    "n",
    "reps",
    "seed",
    "grid_size",
    "n_components",
    "noise_decay",
    "max_truncation",
    "estimator",
    "out",
];

const DEFAULT_MAX_TRUNCATION: usize = 20;

/// Parsed study settings.
#[derive(Debug, Clone)]
pub(crate) struct StudyPlan {
    pub dgp: DgpConfig,
    pub n_grid: Vec<usize>,
    pub max_truncation: usize,
    pub estimators: Vec<Estimator>,
    pub out: PathBuf,
}

fn as_config_error(e: FofError) -> FofError {
    match e {
        FofError::Parse { .. } => FofError::Config(e.to_string()),
        other => other,
    }
}

pub(crate) fn plan_from(cfg: &RunConfig) -> Result<StudyPlan> {
    cfg.require(&["alpha", "beta", "gamma", "n", "out"])?;
    let alpha = cfg.f64("alpha")?.unwrap_or_default();
    let beta = cfg.f64("beta")?.unwrap_or_default();
    let gamma = cfg.f64("gamma")?.unwrap_or_default();
    let mut dgp = DgpConfig::new(alpha, beta, gamma);
    if let Some(v) = cfg.usize("reps")? {
        dgp.reps = v;
    }
    if let Some(v) = cfg.u64("seed")? {
        dgp.seed = v;
    }
    if let Some(v) = cfg.usize("grid_size")? {
        dgp.grid_size = v;
    }
    if let Some(v) = cfg.usize("n_components")? {
        dgp.n_components = v;
    }
    if let Some(v) = cfg.f64("noise_decay")? {
        dgp.noise_decay = v;
    }
    let n_grid = cfg.usize_list("n")?.unwrap_or_default();
    if n_grid.is_empty() {
        return Err(FofError::Config(
            "n must list at least one sample size".into(),
        ));
    }
    let mut sorted = n_grid.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != n_grid.len() {
        return Err(FofError::Config("n contains duplicate sample sizes".into()));
    }
    let max_truncation = cfg
        .usize("max_truncation")?
        .unwrap_or(DEFAULT_MAX_TRUNCATION);
    if max_truncation == 0 || max_truncation > dgp.grid_size {
        return Err(FofError::Config(format!(
            "max_truncation must lie in 1..={}, got {max_truncation}",
            dgp.grid_size
        )));
    }
    let estimators = match cfg.get("estimator").unwrap_or("both") {
        "both" => vec![Estimator::Single, Estimator::Double],
        other => vec![other.parse()?],
    };
    let out = PathBuf::from(cfg.get("out").unwrap_or_default());
    Ok(StudyPlan {
        dgp,
        n_grid,
        max_truncation,
        estimators,
        out,
    })
}

fn cells(t: Truncation) -> (usize, String) {
    match t {
        Truncation::Single(m) => (m, String::new()),
        Truncation::Double(a, b) => (a, b.to_string()),
    }
}

pub(crate) fn mise_table_csv(res: &SimResult) -> String {
    let mut out = String::from("estimator,n,m1,m2,mise\n");
    for sweep in &res.sweeps {
        for &(t, v) in &sweep.table {
            let (m1, m2) = cells(t);
            let v = v.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(out, "{},{},{m1},{m2},{v}", sweep.estimator.name(), sweep.n);
        }
    }
    out
}

pub(crate) fn optimal_csv(res: &SimResult) -> String {
    let mut out = String::from("estimator,n,m1,m2,mise\n");
    for sweep in &res.sweeps {
        let (m1, m2) = cells(sweep.optimal);
        let _ = writeln!(
            out,
            "{},{},{m1},{m2},{}",
            sweep.estimator.name(),
            sweep.n,
            fmt_f64(sweep.optimal_mise)
        );
    }
    out
}

pub(crate) fn slopes_csv(res: &SimResult) -> String {
    let mut out = String::from("estimator,fitted_slope,std_error,theory_slope,gap\n");
    for (e, slope) in &res.slopes {
        let (fitted, se, gap) = match slope {
            Some(s) => (fmt_f64(s.fitted), fmt_f64(s.std_error), fmt_f64(s.gap)),
            None => Default::default(),
        };
        let _ = writeln!(
            out,
            "{},{fitted},{se},{},{gap}",
            e.name(),
            fmt_f64(res.theory_slope)
        );
    }
    out
}

pub(crate) fn metadata_txt(plan: &StudyPlan, res: &SimResult) -> String {
    let d = &plan.dgp;
    let ns: Vec<String> = plan.n_grid.iter().map(|n| n.to_string()).collect();
    let es: Vec<&str> = plan.estimators.iter().map(|e| e.name()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "alpha={}", fmt_f64(d.alpha));
    let _ = writeln!(out, "beta={}", fmt_f64(d.beta));
    let _ = writeln!(out, "gamma={}", fmt_f64(d.gamma));
    let _ = writeln!(out, "n={}", ns.join(","));
    let _ = writeln!(out, "reps={}", d.reps);
    let _ = writeln!(out, "seed={}", d.seed);
    let _ = writeln!(out, "grid_size={}", d.grid_size);
    let _ = writeln!(out, "n_components={}", d.n_components);
    let _ = writeln!(out, "noise_decay={}", fmt_f64(d.noise_decay));
    let _ = writeln!(out, "max_truncation={}", plan.max_truncation);
    let _ = writeln!(out, "estimators={}", es.join(","));
    let _ = writeln!(out, "rng=chacha8 stream=(n_index<<32)+replication");
    let _ = writeln!(out, "region={}", res.region.name());
    let _ = writeln!(out, "theory_slope={}", fmt_f64(res.theory_slope));
    for (i, w) in res.warnings.iter().enumerate() {
        let _ = writeln!(out, "warning_{}={w}", i + 1);
    }
    out
}

pub(crate) fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = RunConfig::read(&args.config, KEYS).map_err(as_config_error)?;
    if let Some(seed) = args.seed {
        cfg.set("seed", seed.to_string());
    }
    if let Some(out) = &args.out {
        cfg.set("out", out.display().to_string());
    }
    let plan = plan_from(&cfg)?;
    let res = run_study(
        &plan.dgp,
        &plan.n_grid,
        plan.max_truncation,
        &plan.estimators,
    )?;

    fs::create_dir_all(&plan.out).map_err(|source| FofError::Io {
        path: plan.out.display().to_string(),
        source,
    })?;
    write_atomic(&plan.out.join("mise_table.csv"), &mise_table_csv(&res))?;
    write_atomic(
        &plan.out.join("optimal_truncations.csv"),
        &optimal_csv(&res),
    )?;
    write_atomic(&plan.out.join("slopes.csv"), &slopes_csv(&res))?;
    write_atomic(&plan.out.join("metadata.txt"), &metadata_txt(&plan, &res))?;
    for sweep in &res.sweeps {
        println!(
            "{} n={} optimal={} mise={}",
            sweep.estimator.name(),
            sweep.n,
            sweep.optimal,
            fmt_f64(sweep.optimal_mise)
        );
    }
    Ok(())
}
