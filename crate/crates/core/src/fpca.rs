//! Functional principal component analysis on a quadrature grid.
//!
//! The covariance operator K̂ is discretized as the symmetric matrix
//! `W^½ K̂ W^½` (W the quadrature weights); its eigenvectors mapped back by
//! `W^-½` are orthonormal in the quadrature inner product.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{FofError, Result};
use crate::grid::{check_same, inner_product, FunctionSample, Grid, Surface};

/// Eigenvalues below `RELATIVE_CUTOFF * κ̂₁` are treated as zero.
pub const RELATIVE_CUTOFF: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-8;
const SIGN_TOL: f64 = 1e-8;

/// Leading eigenpairs of an empirical covariance operator.
///
/// `eigenvalues` and `eigenfunctions` hold `min(max_rank, grid size)` pairs;
/// only the first `rank` of them clear the cut-off and may be used as
/// divisors by the estimators.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<FunctionSample>,
    pub rank: usize,
    pub cutoff: f64,
}

impl EigenSystem {
    pub fn grid(&self) -> Option<&Arc<Grid>> {
        self.eigenfunctions.first().map(|f| f.grid())
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Copy with the sign of every component in `flip` reversed.
    pub fn with_flipped(&self, flip: &[bool]) -> EigenSystem {
        let mut out = self.clone();
        for (f, &neg) in out.eigenfunctions.iter_mut().zip(flip) {
            if neg {
                *f = f.scale(-1.0);
            }
        }
        out
    }

    pub(crate) fn require(&self, m: usize) -> Result<()> {
        if m > self.rank {
            Err(FofError::IllConditionedTruncation {
                requested: m,
                rank: self.rank,
                cutoff: self.cutoff,
            })
        } else {
            Ok(())
        }
    }
}

/// PC scores of the centered predictors and φ̂-coordinates of the responses.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    /// n × m_x, ξ̂ᵢₖ = ⟨Xᵢ − X̄, φ̂ₖ⟩.
    pub xi: DMatrix<f64>,
    /// n × m_y, η̂ᵢⱼ = ⟨Yᵢ, φ̂ⱼ⟩ (responses are not centered).
    pub eta: DMatrix<f64>,
    pub n: usize,
}

/// Stacks curves as the columns of a p × n matrix after checking they
/// share one grid.
pub(crate) fn stack(samples: &[FunctionSample]) -> Result<(Arc<Grid>, DMatrix<f64>)> {
    let first = samples
        .first()
        .ok_or_else(|| FofError::InvalidInput("empty sample list".into()))?;
    let grid = first.grid().clone();
    let mut m = DMatrix::zeros(grid.len(), samples.len());
    for (i, s) in samples.iter().enumerate() {
        check_same(&grid, s.grid(), &format!("sample {i}"))?;
        m.column_mut(i).copy_from_slice(s.values());
    }
    Ok((grid, m))
}

/// Centers the columns of `m` in place and returns their mean.
///
/// Deviations are taken from the first column before averaging, so
/// identical curves center to exact zeros.
pub(crate) fn center(m: &mut DMatrix<f64>) -> Vec<f64> {
    let (p, n) = m.shape();
    let anchor: Vec<f64> = m.column(0).iter().copied().collect();
    let mut shift = vec![0.0; p];
    for i in 0..n {
        for t in 0..p {
            let d = m[(t, i)] - anchor[t];
            m[(t, i)] = d;
            shift[t] += d;
        }
    }
    for v in shift.iter_mut() {
        *v /= n as f64;
    }
    for i in 0..n {
        for t in 0..p {
            m[(t, i)] -= shift[t];
        }
    }
    anchor.iter().zip(&shift).map(|(a, s)| a + s).collect()
}

/// Σ aᵢbᵢ in ascending index order.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Pointwise average X̄ = n⁻¹ Σ Xᵢ.
pub fn empirical_mean(samples: &[FunctionSample]) -> Result<FunctionSample> {
    let (grid, mut m) = stack(samples)?;
    let mean = center(&mut m);
    Ok(FunctionSample::from_parts_unchecked(grid, mean))
}

/// K̂(s,t) = n⁻¹ Σ {Xᵢ(s) − X̄(s)}{Xᵢ(t) − X̄(t)}.
pub fn empirical_covariance(samples: &[FunctionSample]) -> Result<Surface> {
    if samples.len() < 2 {
        return Err(FofError::InvalidInput(format!(
            "covariance needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let (grid, mut m) = stack(samples)?;
    center(&mut m);
    let cov = covariance_of_centered(&m);
    Ok(Surface::from_parts_unchecked(grid.clone(), grid, cov))
}

/// K̂ on the grid from a p × n matrix of centered curves.
pub(crate) fn covariance_of_centered(centered: &DMatrix<f64>) -> DMatrix<f64> {
    let n = centered.ncols() as f64;
    let mut cov = centered * centered.transpose();
    cov /= n;
    // exact symmetry regardless of the product kernel's rounding
    let p = cov.nrows();
    for i in 0..p {
        for j in i + 1..p {
            let v = cov[(i, j)];
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Solves ∫ K̂(s,t) φ̂(t) dt = κ̂ φ̂(s) on the surface's grid.
///
/// Signs follow the data-mode convention of [`fix_signs`].
pub fn eigendecompose(k: &Surface, max_rank: usize) -> Result<EigenSystem> {
    check_same(k.grid_s(), k.grid_t(), "eigendecomposition")?;
    let grid = k.grid_s().clone();
    let p = grid.len();
    if max_rank > p {
        return Err(FofError::InvalidInput(format!(
            "max_rank {max_rank} exceeds grid size {p}"
        )));
    }
    let values = k.values();
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut defect = 0.0f64;
    for i in 0..p {
        for j in i + 1..p {
            defect = defect.max((values[(i, j)] - values[(j, i)]).abs());
        }
    }
    if defect > SYMMETRY_TOL * scale {
        return Err(FofError::Asymmetric { defect });
    }
    decompose_matrix(&grid, values, max_rank)
}

pub(crate) fn decompose_matrix(
    grid: &Arc<Grid>,
    k: &DMatrix<f64>,
    max_rank: usize,
) -> Result<EigenSystem> {
    let p = grid.len();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let m = DMatrix::from_fn(p, p, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        sqrt_w[a] * k[(a, b)] * sqrt_w[b]
    });
    let eig = SymmetricEigen::new(m);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let keep = max_rank.min(p);
    let top = eig.eigenvalues[order[0]].max(0.0);
    let cutoff = RELATIVE_CUTOFF * top;
    let mut eigenvalues = Vec::with_capacity(keep);
    let mut eigenfunctions = Vec::with_capacity(keep);
    let mut rank = 0;
    for &idx in order.iter().take(keep) {
        let kappa = eig.eigenvalues[idx].max(0.0);
        if kappa > 0.0 && kappa >= cutoff && rank == eigenvalues.len() {
            rank += 1;
        }
        let v = eig.eigenvectors.column(idx);
        let mut phi: Vec<f64> = v.iter().zip(&sqrt_w).map(|(x, s)| x / s).collect();
        if data_sign_negative(&phi) {
            phi.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvalues.push(kappa);
        eigenfunctions.push(FunctionSample::from_parts_unchecked(grid.clone(), phi));
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenfunctions,
        rank,
        cutoff,
    })
}

fn data_sign_negative(values: &[f64]) -> bool {
    values
        .iter()
        .find(|v| v.abs() > SIGN_TOL)
        .is_some_and(|&v| v < 0.0)
}

/// Fixes the arbitrary sign of each eigenfunction.
///
/// With a reference basis, φ̂ₖ is flipped so that ⟨φ̂ₖ, φₖ⟩ ≥ 0 for every
/// k covered by the reference. Without one, the first coordinate with
/// magnitude above 1e-8 is made positive.
pub fn fix_signs(
    system: &EigenSystem,
    reference: Option<&[FunctionSample]>,
) -> Result<EigenSystem> {
    let mut out = system.clone();
    match reference {
        Some(basis) => {
            for (phi, target) in out.eigenfunctions.iter_mut().zip(basis) {
                if inner_product(phi, target)? < 0.0 {
                    *phi = phi.scale(-1.0);
                }
            }
        }
        None => {
            for phi in out.eigenfunctions.iter_mut() {
                if data_sign_negative(phi.values()) {
                    *phi = phi.scale(-1.0);
                }
            }
        }
    }
    Ok(out)
}

/// p × m matrix with column k holding wₜ φ̂ₖ(t).
pub(crate) fn weighted_basis(grid: &Grid, phis: &[FunctionSample]) -> DMatrix<f64> {
    let w = grid.weights();
    DMatrix::from_fn(grid.len(), phis.len(), |t, k| w[t] * phis[k].values()[t])
}

/// n × m matrix of quadrature inner products between the columns of
/// `curves` (p × n) and of `weighted` (p × m).
pub(crate) fn project_columns(curves: &DMatrix<f64>, weighted: &DMatrix<f64>) -> DMatrix<f64> {
    let n = curves.ncols();
    let m = weighted.ncols();
    let mut out = DMatrix::zeros(n, m);
    for k in 0..m {
        let w = weighted.column(k);
        for i in 0..n {
            out[(i, k)] = dot(curves.column(i).as_slice(), w.as_slice());
        }
    }
    out
}

/// ξ̂ᵢₖ for k ≤ `m_x` and η̂ᵢⱼ for j ≤ `m_y`.
pub fn compute_scores(
    samples_x: &[FunctionSample],
    samples_y: &[FunctionSample],
    system: &EigenSystem,
    m_x: usize,
    m_y: usize,
) -> Result<ScoreMatrix> {
    system.require(m_x.max(m_y))?;
    if samples_x.len() != samples_y.len() {
        return Err(FofError::InvalidInput(format!(
            "{} predictor curves but {} responses",
            samples_x.len(),
            samples_y.len()
        )));
    }
    let (grid, mut xm) = stack(samples_x)?;
    let (grid_y, ym) = stack(samples_y)?;
    check_same(&grid, &grid_y, "predictor vs response")?;
    if let Some(g) = system.grid() {
        check_same(&grid, g, "samples vs eigenfunctions")?;
    }
    center(&mut xm);
    let xi = project_columns(&xm, &weighted_basis(&grid, &system.eigenfunctions[..m_x]));
    let eta = project_columns(&ym, &weighted_basis(&grid, &system.eigenfunctions[..m_y]));
    Ok(ScoreMatrix {
        xi,
        eta,
        n: samples_x.len(),
    })
}
