//! Leave-one-out cross-validation of the truncation levels.
//!
//! For each held-out pair (Xᵢ, Yᵢ) the estimator is refitted on the other
//! n − 1 pairs (mean, covariance, eigenbasis and scores all recomputed) and
//! the criterion accumulates ∫ [Yᵢ(s) − Ȳ₋ᵢ(s) − ∫ b₋ᵢ(s,t){Xᵢ(t) − X̄₋ᵢ(t)} dt]² ds.
//! One eigendecomposition per fold serves every candidate.

use rayon::prelude::*;

use crate::error::{FofError, Result};
use crate::grid::{weighted_dot, FunctionSample};
use crate::regression::{Decomposition, Truncation};

/// Criterion values closer than this fraction of the total response energy
/// count as ties.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvScore {
    pub truncation: Truncation,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Feasible candidates in input order.
    pub scores: Vec<CvScore>,
    /// Candidates exceeding the usable rank of at least one fold.
    pub infeasible: Vec<Truncation>,
    pub best: Truncation,
    pub ties_broken: bool,
}

impl CvResult {
    pub fn score(&self, t: Truncation) -> Option<f64> {
        self.scores
            .iter()
            .find(|s| s.truncation == t)
            .map(|s| s.value)
    }
}

pub fn cv_single(
    xs: &[FunctionSample],
    ys: &[FunctionSample],
    candidates: &[usize],
) -> Result<CvResult> {
    let c: Vec<Truncation> = candidates.iter().map(|&m| Truncation::Single(m)).collect();
    cross_validate(xs, ys, &c)
}

pub fn cv_double(
    xs: &[FunctionSample],
    ys: &[FunctionSample],
    candidates: &[(usize, usize)],
) -> Result<CvResult> {
    let c: Vec<Truncation> = candidates
        .iter()
        .map(|&(a, b)| Truncation::Double(a, b))
        .collect();
    cross_validate(xs, ys, &c)
}

/// Leave-one-out criterion for a mixed list of candidates.
pub fn cross_validate(
    xs: &[FunctionSample],
    ys: &[FunctionSample],
    candidates: &[Truncation],
) -> Result<CvResult> {
    let n = xs.len();
    if n < 3 {
        return Err(FofError::InvalidInput(format!(
            "cross-validation needs at least 3 samples, got {n}"
        )));
    }
    if ys.len() != n {
        return Err(FofError::InvalidInput(format!(
            "{n} predictor curves but {} responses",
            ys.len()
        )));
    }
    if candidates.is_empty() {
        return Err(FofError::InvalidInput("no truncation candidates".into()));
    }
    if let Some(t) = candidates.iter().find(|t| match t {
        Truncation::Single(m) => *m == 0,
        Truncation::Double(a, b) => *a == 0 || *b == 0,
    }) {
        return Err(FofError::InvalidInput(format!(
            "truncation candidate {t} must be positive"
        )));
    }
    let max_depth = candidates.iter().map(Truncation::depth).max().unwrap_or(0);

    let per_fold: Vec<Vec<Option<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| fold_errors(xs, ys, i, max_depth, candidates))
        .collect::<Result<_>>()?;

    let mut totals: Vec<Option<f64>> = vec![Some(0.0); candidates.len()];
    for fold in &per_fold {
        for (acc, e) in totals.iter_mut().zip(fold) {
            *acc = match (*acc, e) {
                (Some(a), Some(e)) => Some(a + e),
                _ => None,
            };
        }
    }

    let mut scores = Vec::new();
    let mut infeasible = Vec::new();
    for (&t, v) in candidates.iter().zip(&totals) {
        match v {
            Some(v) => scores.push(CvScore {
                truncation: t,
                value: *v,
            }),
            None => infeasible.push(t),
        }
    }
    let min = scores.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(FofError::IllConditionedTruncation {
            requested: candidates.iter().map(Truncation::depth).min().unwrap_or(0),
            rank: 0,
            cutoff: 0.0,
        });
    }
    let energy: f64 = ys
        .iter()
        .map(|y| weighted_dot(y.grid().weights(), y.values(), y.values()))
        .sum();
    let tol = TIE_TOL * energy.max(f64::MIN_POSITIVE);
    let tied: Vec<Truncation> = scores
        .iter()
        .filter(|s| s.value - min <= tol)
        .map(|s| s.truncation)
        .collect();
    let best = *tied.iter().min().expect("minimum is attained");
    Ok(CvResult {
        scores,
        infeasible,
        best,
        ties_broken: tied.len() > 1,
    })
}

/// Squared prediction error of sample `i` under each candidate, fitted on
/// the other samples. `None` for candidates beyond this fold's rank.
pub(crate) fn fold_errors(
    xs: &[FunctionSample],
    ys: &[FunctionSample],
    i: usize,
    max_depth: usize,
    candidates: &[Truncation],
) -> Result<Vec<Option<f64>>> {
    let train_x: Vec<FunctionSample> = xs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, x)| x.clone())
        .collect();
    let train_y: Vec<FunctionSample> = ys
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, y)| y.clone())
        .collect();
    let dec = Decomposition::capped(&train_x, &train_y, max_depth)?;
    crate::grid::check_same(&dec.grid, xs[i].grid(), "held-out predictor")?;
    crate::grid::check_same(&dec.grid, ys[i].grid(), "held-out response")?;
    let d = dec.depth();
    let w = dec.grid.weights();
    let p = w.len();
    let scores = dec.project(xs[i].values());
    // Yᵢ − Ȳ₋ᵢ
    let base: Vec<f64> = ys[i]
        .values()
        .iter()
        .zip(&dec.mean_y)
        .map(|(y, m)| y - m)
        .collect();

    let has_single = candidates
        .iter()
        .any(|t| matches!(t, Truncation::Single(_)));
    let has_double = candidates
        .iter()
        .any(|t| matches!(t, Truncation::Double(..)));
    let curves = has_single.then(|| dec.single_curves(d));
    let (table, phi) = if has_double {
        (Some(dec.double_table(d, d)), Some(dec.phi(d)))
    } else {
        (None, None)
    };

    let mut resid = vec![0.0; p];
    Ok(candidates
        .iter()
        .map(|&t| {
            if t.depth() > d {
                return None;
            }
            resid.copy_from_slice(&base);
            match t {
                Truncation::Single(m) => {
                    let h = curves.as_ref().expect("single curves prepared");
                    for k in 0..m {
                        for s in 0..p {
                            resid[s] -= h[(s, k)] * scores[k];
                        }
                    }
                }
                Truncation::Double(m1, m2) => {
                    let c = table.as_ref().expect("double table prepared");
                    let phi = phi.as_ref().expect("basis prepared");
                    for j in 0..m1 {
                        let mut coef = 0.0;
                        for k in 0..m2 {
                            coef += c[(j, k)] * scores[k];
                        }
                        for s in 0..p {
                            resid[s] -= coef * phi[(s, j)];
                        }
                    }
                }
            }
            Some(weighted_dot(w, &resid, &resid))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_norm;
    use crate::regression::{fit_double, fit_single, predict};
    use crate::simulation::{generate_dataset, rng_for, DgpConfig};

    fn data(cfg: DgpConfig, seed: u64) -> (Vec<FunctionSample>, Vec<FunctionSample>) {
        let ds = generate_dataset(&cfg, &mut rng_for(seed, 0)).unwrap();
        (ds.xs, ds.ys)
    }

    fn rank5(n: usize) -> DgpConfig {
        DgpConfig {
            n,
            noise_scale: 0.0,
            x_components: Some(5),
            b_support: Some(5),
            ..DgpConfig::new(1.2, 3.0, 3.0)
        }
    }

    #[test]
    fn fold_matches_refit_from_scratch() {
        let (xs, ys) = data(
            DgpConfig {
                n: 40,
                ..DgpConfig::new(1.2, 3.0, 3.0)
            },
            1,
        );
        let i = 17;
        let cands = [Truncation::Single(3), Truncation::Double(2, 4)];
        let errs = fold_errors(&xs, &ys, i, 4, &cands).unwrap();
        let mut tx = xs.clone();
        let mut ty = ys.clone();
        tx.remove(i);
        ty.remove(i);
        let single = fit_single(&tx, &ty, 3).unwrap();
        let double = fit_double(&tx, &ty, 2, 4).unwrap();
        for (model, err) in [(single, errs[0]), (double, errs[1])] {
            let r = ys[i].sub(&predict(&model, &xs[i]).unwrap()).unwrap();
            assert!((l2_norm(&r).powi(2) - err.unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_response_ties_to_smallest() {
        let (xs, _) = data(
            DgpConfig {
                n: 12,
                ..DgpConfig::new(1.2, 3.0, 3.0)
            },
            2,
        );
        let y = FunctionSample::from_fn(xs[0].grid().clone(), |t| 1.0 + t).unwrap();
        let ys = vec![y; xs.len()];
        let r = cv_single(&xs, &ys, &[4, 2, 6]).unwrap();
        assert_eq!(r.best, Truncation::Single(2));
        assert!(r.ties_broken);
        let zeros: Vec<_> = ys.iter().map(|y| y.scale(0.0)).collect();
        let r = cv_double(&xs, &zeros, &[(2, 2), (1, 3), (3, 1)]).unwrap();
        assert!(r.scores.iter().all(|s| s.value == 0.0));
        assert_eq!(r.best, Truncation::Double(1, 3));
    }

    #[test]
    fn single_candidate_is_selected() {
        let (xs, ys) = data(
            DgpConfig {
                n: 20,
                ..DgpConfig::new(1.2, 3.0, 3.0)
            },
            3,
        );
        let r = cv_single(&xs, &ys, &[3]).unwrap();
        assert_eq!(r.best, Truncation::Single(3));
        assert!(!r.ties_broken);
    }

    #[test]
    fn noiseless_rank_five_selects_five() {
        let (xs, ys) = data(rank5(200), 4);
        let cands: Vec<usize> = (1..=10).collect();
        let r = cv_single(&xs, &ys, &cands).unwrap();
        assert_eq!(r.best, Truncation::Single(5));
        assert_eq!(r.scores.len(), 5);
        assert_eq!(r.infeasible.len(), 5);

        let pairs: Vec<(usize, usize)> =
            (1..=8).flat_map(|a| (1..=8).map(move |b| (a, b))).collect();
        let r = cv_double(&xs, &ys, &pairs).unwrap();
        match r.best {
            Truncation::Double(a, b) => assert!((4..=6).contains(&a) && (4..=6).contains(&b)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn transposed_candidates_agree_on_symmetric_data() {
        let (xs, _) = data(
            DgpConfig {
                n: 30,
                ..DgpConfig::new(1.2, 3.0, 3.0)
            },
            5,
        );
        let r = cv_double(&xs, &xs, &[(2, 5), (5, 2), (3, 4), (4, 3)]).unwrap();
        let v = |a, b| r.score(Truncation::Double(a, b)).unwrap();
        assert!((v(2, 5) - v(5, 2)).abs() < 1e-10);
        assert!((v(3, 4) - v(4, 3)).abs() < 1e-10);
    }

    #[test]
    fn deterministic() {
        let (xs, ys) = data(
            DgpConfig {
                n: 25,
                ..DgpConfig::new(1.2, 3.0, 3.0)
            },
            6,
        );
        let a = cv_single(&xs, &ys, &[1, 2, 3, 4]).unwrap();
        let b = cv_single(&xs, &ys, &[1, 2, 3, 4]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn input_errors() {
        let (xs, ys) = data(
            DgpConfig {
                n: 5,
                ..DgpConfig::new(1.2, 3.0, 3.0)
            },
            7,
        );
        assert!(cv_single(&xs[..2], &ys[..2], &[1]).is_err());
        assert!(cv_single(&xs, &ys, &[]).is_err());
        assert!(cv_single(&xs, &ys, &[0]).is_err());
        assert!(cv_single(&xs, &ys[..4], &[1]).is_err());
    }

    #[test]
    fn pure_noise_criterion_grows_with_truncation() {
        let mut medians = Vec::new();
        let mut table = vec![Vec::new(); 6];
        for rep in 0..20 {
            let cfg = DgpConfig {
                n: 40,
                b_support: Some(0),
                ..DgpConfig::new(1.2, 3.0, 3.0)
            };
            let (xs, ys) = data(cfg, 100 + rep);
            let r = cv_single(&xs, &ys, &[1, 2, 3, 4, 5, 6]).unwrap();
            for (m, s) in r.scores.iter().enumerate() {
                table[m].push(s.value);
            }
        }
        for col in &mut table {
            col.sort_by(f64::total_cmp);
            medians.push((col[9] + col[10]) / 2.0);
        }
        for w in medians.windows(2) {
            assert!(w[1] >= w[0], "{medians:?}");
        }
    }
}
