use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fofreg_core::io::{
    fmt_f64, read_dataset, read_surface, slice_surface, slice_to_csv, surface_to_csv, write_atomic,
    AxisMap, Dataset,
};
use fofreg_core::{
    cross_validate, eigendecompose, empirical_covariance, fit_double, fit_single, Coefficients,
    CvResult, Estimator, FitStatus, FittedModel, FofError, Result, Truncation,
};

use crate::{CvArgs, DataArgs, FitArgs, SliceArgs};

/// Parses `M` or `M1,M2`. A single value means `(M, M)` for the double
/// estimator.
pub fn parse_truncation(text: &str, estimator: Estimator) -> Result<Truncation> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| FofError::Config(format!("invalid truncation '{text}'")))
        })
        .collect::<Result<_>>()?;
    if parts.contains(&0) {
        return Err(FofError::Config(format!(
            "truncation must be at least 1, got '{text}'"
        )));
    }
    match (estimator, parts.as_slice()) {
        (Estimator::Single, [m]) => Ok(Truncation::Single(*m)),
        (Estimator::Double, [m]) => Ok(Truncation::Double(*m, *m)),
        (Estimator::Double, [a, b]) => Ok(Truncation::Double(*a, *b)),
        (Estimator::Single, _) => Err(FofError::Config(format!(
            "the single estimator takes one truncation, got '{text}'"
        ))),
        _ => Err(FofError::Config(format!("invalid truncation '{text}'"))),
    }
}

/// Expands `A-B` (or `A`) into candidates; the double estimator gets every
/// pair in the square.
pub fn parse_cv_range(text: &str, estimator: Estimator) -> Result<Vec<Truncation>> {
    let bad = || FofError::Config(format!("invalid range '{text}' (expected A-B or A)"));
    let (lo, hi) = match text.split_once('-') {
        Some((a, b)) => (
            a.trim().parse::<usize>().map_err(|_| bad())?,
            b.trim().parse::<usize>().map_err(|_| bad())?,
        ),
        None => {
            let a = text.trim().parse::<usize>().map_err(|_| bad())?;
            (a, a)
        }
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok(match estimator {
        Estimator::Single => (lo..=hi).map(Truncation::Single).collect(),
        Estimator::Double => (lo..=hi)
            .flat_map(|a| (lo..=hi).map(move |b| Truncation::Double(a, b)))
            .collect(),
    })
}

fn load(data: &DataArgs) -> Result<Dataset> {
    let ds = read_dataset(&data.x, &data.y, data.grid_size)?;
    log::info!(
        "read {} curve pairs on {} grid points",
        ds.xs.len(),
        ds.grid.len()
    );
    Ok(ds)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| FofError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn truncation_cells(t: Truncation) -> (usize, String) {
    match t {
        Truncation::Single(m) => (m, String::new()),
        Truncation::Double(a, b) => (a, b.to_string()),
    }
}

fn cv_csv(result: &CvResult) -> String {
    let mut out = String::from("m1,m2,criterion\n");
    for s in &result.scores {
        let (m1, m2) = truncation_cells(s.truncation);
        let _ = writeln!(out, "{m1},{m2},{}", fmt_f64(s.value));
    }
    out
}

/// Scree table of the full-data covariance and its usable rank.
fn scree_csv(ds: &Dataset) -> Result<(String, usize)> {
    let cov = empirical_covariance(&ds.xs)?;
    let eig = eigendecompose(&cov, ds.grid.len())?;
    let total: f64 = eig.eigenvalues.iter().sum();
    let mut out = String::from("k,eigenvalue,cumulative_fraction\n");
    let mut cum = 0.0;
    for (k, &v) in eig.eigenvalues.iter().enumerate() {
        cum += v;
        let frac = if total > 0.0 { cum / total } else { 0.0 };
        let _ = writeln!(out, "{},{},{}", k + 1, fmt_f64(v), fmt_f64(frac));
    }
    Ok((out, eig.rank))
}

fn metadata(ds: &Dataset, estimator: Estimator, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n={}", ds.xs.len());
    let _ = writeln!(out, "grid_size={}", ds.grid.len());
    let _ = writeln!(out, "axis_min={}", fmt_f64(ds.axis.min));
    let _ = writeln!(out, "axis_max={}", fmt_f64(ds.axis.max));
    let _ = writeln!(out, "estimator={}", estimator.name());
    for (k, v) in extra {
        let _ = writeln!(out, "{k}={v}");
    }
    let _ = writeln!(out, "observations=rows treated as independent");
    out
}

fn fit_model(ds: &Dataset, t: Truncation) -> Result<FittedModel> {
    match t {
        Truncation::Single(m) => fit_single(&ds.xs, &ds.ys, m),
        Truncation::Double(a, b) => fit_double(&ds.xs, &ds.ys, a, b),
    }
}

pub(crate) fn fit(args: &FitArgs) -> Result<()> {
    let estimator = args.data.estimator;
    let fixed = args
        .truncation
        .as_deref()
        .map(|t| parse_truncation(t, estimator))
        .transpose()?;
    let candidates = match (&fixed, &args.cv) {
        (None, Some(range)) => Some(parse_cv_range(range, estimator)?),
        _ => None,
    };
    let ds = load(&args.data)?;
    ensure_dir(&args.out)?;

    let mut extra = Vec::new();
    let truncation = match (fixed, candidates) {
        (Some(t), _) => t,
        (None, None) => {
            return Err(FofError::Config(
                "either --truncation or --cv is required".into(),
            ))
        }
        (None, Some(candidates)) => {
            let result = cross_validate(&ds.xs, &ds.ys, &candidates)?;
            write_atomic(&args.out.join("cv_scores.csv"), &cv_csv(&result))?;
            extra.push(("cv_candidates", args.cv.clone().unwrap_or_default()));
            extra.push(("cv_ties_broken", result.ties_broken.to_string()));
            if !result.infeasible.is_empty() {
                let list: Vec<String> =
                    result.infeasible.iter().map(|t| format!("({t})")).collect();
                extra.push(("cv_infeasible", list.join(" ")));
            }
            result.best
        }
    };

    let model = fit_model(&ds, truncation)?;
    if model.status == FitStatus::EmptyTruncation {
        log::warn!("empty truncation; the fitted surface is zero");
    }
    write_atomic(
        &args.out.join("surface.csv"),
        &surface_to_csv(&model.coefficient.surface, ds.axis),
    )?;
    if let Coefficients::Table(table) = &model.coefficient.coeffs {
        let mut out = String::from("j,k,value\n");
        for k in 0..table.ncols() {
            for j in 0..table.nrows() {
                let _ = writeln!(out, "{},{},{}", j + 1, k + 1, fmt_f64(table[(j, k)]));
            }
        }
        write_atomic(&args.out.join("coefficients.csv"), &out)?;
    }
    let (scree, rank) = scree_csv(&ds)?;
    write_atomic(&args.out.join("scree.csv"), &scree)?;

    let mut meta = vec![("truncation", truncation.to_string())];
    meta.push(("rank", rank.to_string()));
    meta.push(("eigenvalue_cutoff", fmt_f64(model.eigen.cutoff)));
    meta.extend(extra);
    write_atomic(
        &args.out.join("metadata.txt"),
        &metadata(&ds, estimator, &meta),
    )?;
    println!("truncation={truncation}");
    Ok(())
}

pub(crate) fn cv(args: &CvArgs) -> Result<()> {
    let estimator = args.data.estimator;
    let candidates = parse_cv_range(&args.cv, estimator)?;
    let ds = load(&args.data)?;
    let result = cross_validate(&ds.xs, &ds.ys, &candidates)?;
    let table = cv_csv(&result);
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_atomic(&dir.join("cv_scores.csv"), &table)?;
        let meta = vec![
            ("cv_candidates", args.cv.clone()),
            ("best", result.best.to_string()),
            ("cv_ties_broken", result.ties_broken.to_string()),
            ("cv_infeasible", result.infeasible.len().to_string()),
        ];
        write_atomic(&dir.join("metadata.txt"), &metadata(&ds, estimator, &meta))?;
    } else {
        print!("{table}");
    }
    if !result.infeasible.is_empty() {
        let list: Vec<String> = result.infeasible.iter().map(|t| format!("({t})")).collect();
        log::warn!(
            "candidates beyond the usable rank of some fold: {}",
            list.join(" ")
        );
    }
    println!("best={}", result.best);
    Ok(())
}

pub(crate) fn slice(args: &SliceArgs) -> Result<()> {
    let (surface, axis_map): (_, AxisMap) = read_surface(&args.surface)?;
    let rows = slice_surface(&surface, axis_map, args.axis, args.at)?;
    let text = slice_to_csv(args.axis, &rows);
    match &args.out {
        Some(path) => write_atomic(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
