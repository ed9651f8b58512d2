//! Series estimators of the coefficient surface b(s,t).
//!
//! Both estimators start from the empirical eigenpairs (κ̂ₖ, φ̂ₖ) of the
//! predictor covariance and the PC scores ξ̂ᵢₖ:
//!
//! * single truncation: b̂(s,t) = Σ_{k≤m} gₖ(s) φ̂ₖ(t) / κ̂ₖ with
//!   gₖ(s) = n⁻¹ Σᵢ ξ̂ᵢₖ Yᵢ(s), kept at full grid resolution in `s`;
//! * double truncation: b̃(s,t) = Σ_{j≤m₁} Σ_{k≤m₂} b̃ⱼₖ φ̂ⱼ(s) φ̂ₖ(t) with
//!   b̃ⱼₖ = n⁻¹ Σᵢ η̂ᵢⱼ ξ̂ᵢₖ / κ̂ₖ.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{FofError, Result};
use crate::fpca::{
    center, covariance_of_centered, decompose_matrix, dot, project_columns, stack, weighted_basis,
    EigenSystem,
};
use crate::grid::{
    apply_kernel, check_same, inner_product, surface_sq_norm, FunctionSample, Grid, Surface,
};

/// Orthonormality tolerance for externally supplied bases.
const BASIS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Truncation {
    Single(usize),
    Double(usize, usize),
}

impl Truncation {
    /// Largest number of eigencomponents the truncation touches.
    pub fn depth(&self) -> usize {
        match *self {
            Truncation::Single(m) => m,
            Truncation::Double(a, b) => a.max(b),
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Single(m) => write!(f, "{m}"),
            Truncation::Double(a, b) => write!(f, "{a},{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Single,
    Double,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Single => "single",
            Estimator::Double => "double",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = FofError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Estimator::Single),
            "double" => Ok(Estimator::Double),
            other => Err(FofError::Config(format!(
                "unknown estimator '{other}' (expected single|double)"
            ))),
        }
    }
}

/// Coefficients behind a [`CoefficientSurface`].
#[derive(Debug, Clone)]
pub enum Coefficients {
    /// Per-component curves gₖ(s)/κ̂ₖ of the single-truncation estimator.
    Curves(Vec<FunctionSample>),
    /// Table bⱼₖ (rows j in `s`, columns k in `t`).
    Table(DMatrix<f64>),
}

#[derive(Debug, Clone)]
pub struct CoefficientSurface {
    pub surface: Surface,
    pub coeffs: Coefficients,
    pub truncation: Truncation,
    /// Basis functions the coefficients refer to.
    pub basis: Vec<FunctionSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Ok,
    /// A zero truncation was requested; the surface is identically zero.
    EmptyTruncation,
}

#[derive(Debug, Clone)]
pub struct FittedModel {
    pub coefficient: CoefficientSurface,
    pub mean_x: FunctionSample,
    pub mean_y: FunctionSample,
    pub eigen: EigenSystem,
    pub status: FitStatus,
}

/// Empirical eigenbasis and scores of one training set, shared by every
/// truncation fitted on it.
#[derive(Debug, Clone)]
pub(crate) struct Decomposition {
    pub grid: Arc<Grid>,
    pub n: usize,
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    pub eigen: EigenSystem,
    /// Responses, p × n (one column per sample), uncentered.
    pub y: DMatrix<f64>,
    /// n × depth predictor scores.
    pub xi: DMatrix<f64>,
    /// p × depth matrix of wₜ φ̂ₖ(t).
    pub weighted_phi: DMatrix<f64>,
}

impl Decomposition {
    /// Decomposes the training set keeping `depth` components.
    pub fn new(xs: &[FunctionSample], ys: &[FunctionSample], depth: usize) -> Result<Self> {
        let (grid, x, y) = stack_pair(xs, ys)?;
        let mut xc = x;
        let mean_x = center(&mut xc);
        let cov = covariance_of_centered(&xc);
        let eigen = decompose_matrix(&grid, &cov, depth.min(grid.len()))?;
        eigen.require(depth)?;
        Ok(Self::assemble(grid, xc, y, mean_x, eigen, depth))
    }

    /// Like [`Decomposition::new`] but keeps `min(max_depth, rank)` components
    /// instead of failing when the usable rank is short.
    pub fn capped(xs: &[FunctionSample], ys: &[FunctionSample], max_depth: usize) -> Result<Self> {
        let (grid, x, y) = stack_pair(xs, ys)?;
        let mut xc = x;
        let mean_x = center(&mut xc);
        let cov = covariance_of_centered(&xc);
        let eigen = decompose_matrix(&grid, &cov, max_depth.min(grid.len()))?;
        let depth = eigen.rank.min(max_depth);
        Ok(Self::assemble(grid, xc, y, mean_x, eigen, depth))
    }

    /// Uses a caller-supplied eigensystem instead of decomposing K̂.
    pub fn with_eigen(
        xs: &[FunctionSample],
        ys: &[FunctionSample],
        eigen: EigenSystem,
        depth: usize,
    ) -> Result<Self> {
        let (grid, x, y) = stack_pair(xs, ys)?;
        if let Some(g) = eigen.grid() {
            check_same(&grid, g, "samples vs eigenfunctions")?;
        }
        eigen.require(depth)?;
        let mut xc = x;
        let mean_x = center(&mut xc);
        Ok(Self::assemble(grid, xc, y, mean_x, eigen, depth))
    }

    fn assemble(
        grid: Arc<Grid>,
        xc: DMatrix<f64>,
        y: DMatrix<f64>,
        mean_x: Vec<f64>,
        eigen: EigenSystem,
        depth: usize,
    ) -> Self {
        let weighted_phi = weighted_basis(&grid, &eigen.eigenfunctions[..depth]);
        let xi = project_columns(&xc, &weighted_phi);
        let mean_y = center(&mut y.clone());
        Decomposition {
            n: xc.ncols(),
            mean_y,
            grid,
            mean_x,
            eigen,
            y,
            xi,
            weighted_phi,
        }
    }

    pub fn depth(&self) -> usize {
        self.xi.ncols()
    }

    /// p × m matrix whose column k is gₖ(s)/κ̂ₖ.
    pub fn single_curves(&self, m: usize) -> DMatrix<f64> {
        let p = self.grid.len();
        let mut h = DMatrix::zeros(p, m);
        for k in 0..m {
            let scale = 1.0 / (self.n as f64 * self.eigen.eigenvalues[k]);
            let mut col = vec![0.0; p];
            for i in 0..self.n {
                let xi = self.xi[(i, k)];
                for (c, y) in col.iter_mut().zip(self.y.column(i).iter()) {
                    *c += xi * y;
                }
            }
            for (t, c) in col.into_iter().enumerate() {
                h[(t, k)] = c * scale;
            }
        }
        h
    }

    /// n × m η̂ᵢⱼ.
    pub fn eta(&self, m: usize) -> DMatrix<f64> {
        project_columns(&self.y, &self.weighted_phi.columns(0, m).into_owned())
    }

    /// m₁ × m₂ table b̃ⱼₖ.
    pub fn double_table(&self, m1: usize, m2: usize) -> DMatrix<f64> {
        let eta = self.eta(m1);
        let mut table = DMatrix::zeros(m1, m2);
        for k in 0..m2 {
            let scale = 1.0 / (self.n as f64 * self.eigen.eigenvalues[k]);
            for j in 0..m1 {
                table[(j, k)] = dot(eta.column(j).as_slice(), self.xi.column(k).as_slice()) * scale;
            }
        }
        table
    }

    /// p × m matrix of φ̂ₖ values.
    pub fn phi(&self, m: usize) -> DMatrix<f64> {
        let p = self.grid.len();
        DMatrix::from_fn(p, m, |t, k| self.eigen.eigenfunctions[k].values()[t])
    }

    pub fn fit(&self, truncation: Truncation) -> Result<FittedModel> {
        self.eigen.require(truncation.depth())?;
        if truncation.depth() > self.depth() {
            return Err(FofError::InvalidInput(format!(
                "truncation {truncation} deeper than the prepared basis ({})",
                self.depth()
            )));
        }
        let g = self.grid.clone();
        let empty = match truncation {
            Truncation::Single(m) => m == 0,
            Truncation::Double(a, b) => a == 0 || b == 0,
        };
        let (values, coeffs, basis) = match truncation {
            Truncation::Single(m) => {
                let h = self.single_curves(m);
                let values = &h * self.phi(m).transpose();
                let curves = (0..m)
                    .map(|k| {
                        FunctionSample::from_parts_unchecked(
                            g.clone(),
                            h.column(k).iter().copied().collect(),
                        )
                    })
                    .collect();
                let basis = self.eigen.eigenfunctions[..m].to_vec();
                (values, Coefficients::Curves(curves), basis)
            }
            Truncation::Double(m1, m2) => {
                let table = self.double_table(m1, m2);
                let values = self.phi(m1) * &table * self.phi(m2).transpose();
                let basis = self.eigen.eigenfunctions[..m1.max(m2)].to_vec();
                (values, Coefficients::Table(table), basis)
            }
        };
        let values = if empty {
            log::warn!("truncation {truncation} is empty; returning the zero surface");
            DMatrix::zeros(g.len(), g.len())
        } else {
            values
        };
        Ok(FittedModel {
            coefficient: CoefficientSurface {
                surface: Surface::from_parts_unchecked(g.clone(), g.clone(), values),
                coeffs,
                truncation,
                basis,
            },
            mean_x: FunctionSample::from_parts_unchecked(g.clone(), self.mean_x.clone()),
            mean_y: FunctionSample::from_parts_unchecked(g, self.mean_y.clone()),
            eigen: self.eigen.clone(),
            status: if empty {
                FitStatus::EmptyTruncation
            } else {
                FitStatus::Ok
            },
        })
    }

    /// ⟨x − X̄, φ̂ₖ⟩ for k < depth.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        (0..self.depth())
            .map(|k| {
                let mut acc = 0.0;
                for (t, (xt, mt)) in x.iter().zip(&self.mean_x).enumerate() {
                    acc += (xt - mt) * self.weighted_phi[(t, k)];
                }
                acc
            })
            .collect()
    }
}

fn stack_pair(
    xs: &[FunctionSample],
    ys: &[FunctionSample],
) -> Result<(Arc<Grid>, DMatrix<f64>, DMatrix<f64>)> {
    if xs.len() != ys.len() {
        return Err(FofError::InvalidInput(format!(
            "{} predictor curves but {} responses",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(FofError::InvalidInput(format!(
            "fitting needs at least 2 samples, got {}",
            xs.len()
        )));
    }
    let (grid, x) = stack(xs)?;
    let (grid_y, y) = stack(ys)?;
    check_same(&grid, &grid_y, "predictor vs response")?;
    Ok((grid, x, y))
}

/// Single-truncation estimator b̂ with `m` components.
pub fn fit_single(xs: &[FunctionSample], ys: &[FunctionSample], m: usize) -> Result<FittedModel> {
    Decomposition::new(xs, ys, m)?.fit(Truncation::Single(m))
}

/// Double-truncation estimator b̃ with `m1` components in `s`, `m2` in `t`.
pub fn fit_double(
    xs: &[FunctionSample],
    ys: &[FunctionSample],
    m1: usize,
    m2: usize,
) -> Result<FittedModel> {
    Decomposition::new(xs, ys, m1.max(m2))?.fit(Truncation::Double(m1, m2))
}

/// Fits either estimator against a given eigensystem (e.g. one whose signs
/// were changed) instead of decomposing the data's covariance.
pub fn fit_with_eigen(
    xs: &[FunctionSample],
    ys: &[FunctionSample],
    eigen: EigenSystem,
    truncation: Truncation,
) -> Result<FittedModel> {
    Decomposition::with_eigen(xs, ys, eigen, truncation.depth())?.fit(truncation)
}

/// Ŷ(s) = Ȳ(s) + ∫ b(s,t) {x(t) − X̄(t)} dt.
pub fn predict(model: &FittedModel, x_new: &FunctionSample) -> Result<FunctionSample> {
    let centered = x_new.sub(&model.mean_x)?;
    let fitted = apply_kernel(&model.coefficient.surface, &centered)?;
    model.mean_y.add(&fitted)
}

/// |||estimate − truth|||².
pub fn estimation_error(estimate: &CoefficientSurface, truth: &CoefficientSurface) -> Result<f64> {
    Ok(surface_sq_norm(&estimate.surface.sub(&truth.surface)?))
}

/// Max |⟨φⱼ, φₖ⟩ − δⱼₖ| over the given basis.
pub fn orthonormality_defect(basis: &[FunctionSample]) -> Result<f64> {
    let mut defect = 0.0f64;
    for (j, a) in basis.iter().enumerate() {
        for (k, b) in basis.iter().enumerate().skip(j) {
            let target = if j == k { 1.0 } else { 0.0 };
            defect = defect.max((inner_product(a, b)? - target).abs());
        }
    }
    Ok(defect)
}

/// b(s,t) = Σ_{j≤J} Σ_{k≤K} bⱼₖ φⱼ(s) φₖ(t) with `rule(j, k)` 1-based.
pub fn population_coefficient(
    rule: impl Fn(usize, usize) -> f64,
    basis: &[FunctionSample],
    rows: usize,
    cols: usize,
) -> Result<CoefficientSurface> {
    let depth = rows.max(cols);
    if basis.len() < depth {
        return Err(FofError::InvalidInput(format!(
            "basis has {} functions, {depth} needed",
            basis.len()
        )));
    }
    let basis = &basis[..depth];
    let defect = orthonormality_defect(basis)?;
    if defect > BASIS_TOL {
        return Err(FofError::NotOrthonormal { defect });
    }
    let grid = basis
        .first()
        .map(|f| f.grid().clone())
        .ok_or_else(|| FofError::InvalidInput("empty basis".into()))?;
    let p = grid.len();
    let table = DMatrix::from_fn(rows, cols, |j, k| rule(j + 1, k + 1));
    let phi = DMatrix::from_fn(p, depth, |t, k| basis[k].values()[t]);
    let values = phi.columns(0, rows) * &table * phi.columns(0, cols).transpose();
    Ok(CoefficientSurface {
        surface: Surface::new(grid.clone(), grid, values)?,
        coeffs: Coefficients::Table(table),
        truncation: Truncation::Double(rows, cols),
        basis: basis.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_norm, surface_norm, tensor};
    use crate::simulation::{cosine_basis, generate_dataset, design_coefficient, DgpConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rank5(
        n: usize,
        seed: u64,
    ) -> (Vec<FunctionSample>, Vec<FunctionSample>, CoefficientSurface) {
        let cfg = DgpConfig {
            n,
            x_components: Some(5),
            b_support: Some(5),
            noise_scale: 0.0,
            ..DgpConfig::new(1.2, 3.0, 3.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = generate_dataset(&cfg, &mut rng).unwrap();
        (ds.xs, ds.ys, ds.truth)
    }

    fn noisy(n: usize, seed: u64) -> (Vec<FunctionSample>, Vec<FunctionSample>) {
        let cfg = DgpConfig {
            n,
            ..DgpConfig::new(1.2, 3.0, 3.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = generate_dataset(&cfg, &mut rng).unwrap();
        (ds.xs, ds.ys)
    }

    #[test]
    fn zero_response_gives_zero_estimates() {
        let (xs, ys) = noisy(50, 1);
        let zeros: Vec<_> = ys.iter().map(|y| y.scale(0.0)).collect();
        let single = fit_single(&xs, &zeros, 4).unwrap();
        assert!(single
            .coefficient
            .surface
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let double = fit_double(&xs, &zeros, 3, 4).unwrap();
        match &double.coefficient.coeffs {
            Coefficients::Table(t) => assert!(t.iter().all(|&v| v == 0.0)),
            _ => panic!("expected table"),
        }
    }

    #[test]
    fn noiseless_rank_five_is_recovered() {
        let (xs, ys, truth) = rank5(500, 11);
        let single = fit_single(&xs, &ys, 5).unwrap();
        assert!(estimation_error(&single.coefficient, &truth).unwrap() < 1e-8);
        let double = fit_double(&xs, &ys, 5, 5).unwrap();
        assert!(estimation_error(&double.coefficient, &truth).unwrap() < 1e-8);
    }

    #[test]
    fn in_sample_prediction_is_exact_without_noise() {
        let (xs, ys, _) = rank5(200, 5);
        let model = fit_single(&xs, &ys, 5).unwrap();
        let mse: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| l2_norm(&predict(&model, x).unwrap().sub(y).unwrap()).powi(2))
            .sum::<f64>()
            / xs.len() as f64;
        assert!(mse < 1e-8, "{mse}");
    }

    #[test]
    fn prediction_at_mean_returns_mean_response() {
        let (xs, ys) = noisy(40, 2);
        let model = fit_double(&xs, &ys, 3, 3).unwrap();
        let yhat = predict(&model, &model.mean_x).unwrap();
        assert!(l2_norm(&yhat.sub(&model.mean_y).unwrap()) < 1e-14);

        let zeros: Vec<_> = ys.iter().map(|y| y.scale(0.0)).collect();
        let flat = fit_single(&xs, &zeros, 3).unwrap();
        let yhat = predict(&flat, &xs[7]).unwrap();
        assert!(l2_norm(&yhat.sub(&flat.mean_y).unwrap()) < 1e-14);
    }

    #[test]
    fn zero_truncation_warns() {
        let (xs, ys) = noisy(20, 3);
        let model = fit_single(&xs, &ys, 0).unwrap();
        assert_eq!(model.status, FitStatus::EmptyTruncation);
        assert_eq!(surface_norm(&model.coefficient.surface), 0.0);
    }

    #[test]
    fn truncation_beyond_rank_fails() {
        let (xs, ys, _) = rank5(30, 4);
        assert!(matches!(
            fit_single(&xs, &ys, 6),
            Err(FofError::IllConditionedTruncation { rank: 5, .. })
        ));
        assert!(matches!(
            fit_double(&xs, &ys, 2, 7),
            Err(FofError::IllConditionedTruncation { .. })
        ));
        assert!(fit_single(&xs[..1], &ys[..1], 1).is_err());
    }

    #[test]
    fn sign_flips_leave_estimates_unchanged() {
        let (xs, ys) = noisy(120, 8);
        let base = Decomposition::new(&xs, &ys, 8).unwrap();
        let flip: Vec<bool> = (0..8).map(|k| k % 3 != 1).collect();
        let flipped = base.eigen.with_flipped(&flip);
        for t in [Truncation::Single(8), Truncation::Double(6, 8)] {
            let a = base.fit(t).unwrap();
            let b = fit_with_eigen(&xs, &ys, flipped.clone(), t).unwrap();
            let d = surface_norm(&a.coefficient.surface.sub(&b.coefficient.surface).unwrap());
            assert!(d < 1e-12, "{t}: {d}");
        }
    }

    #[test]
    fn single_estimator_nests() {
        let (xs, ys) = noisy(100, 12);
        let big = fit_single(&xs, &ys, 7).unwrap();
        let small = fit_single(&xs, &ys, 4).unwrap();
        match (&big.coefficient.coeffs, &small.coefficient.coeffs) {
            (Coefficients::Curves(b), Coefficients::Curves(s)) => {
                for k in 0..4 {
                    assert_eq!(b[k], s[k]);
                }
            }
            _ => panic!("expected curves"),
        }
    }

    #[test]
    fn linear_in_response() {
        let (xs, ys) = noisy(60, 13);
        let c = -2.5;
        let scaled: Vec<_> = ys.iter().map(|y| y.scale(c)).collect();
        for t in [Truncation::Single(5), Truncation::Double(4, 5)] {
            let d = Decomposition::new(&xs, &ys, 5).unwrap().fit(t).unwrap();
            let e = Decomposition::new(&xs, &scaled, 5).unwrap().fit(t).unwrap();
            let diff = e
                .coefficient
                .surface
                .sub(&d.coefficient.surface.scale(c))
                .unwrap();
            assert!(surface_norm(&diff) < 1e-12 * (1.0 + surface_norm(&e.coefficient.surface)));
        }
    }

    #[test]
    fn double_table_matches_quadrature_projection() {
        let (xs, ys) = noisy(150, 21);
        let model = fit_double(&xs, &ys, 4, 6).unwrap();
        let Coefficients::Table(table) = &model.coefficient.coeffs else {
            panic!("expected table")
        };
        let phis = &model.eigen.eigenfunctions;
        let s = &model.coefficient.surface;
        for j in 0..4 {
            let proj = apply_kernel(&transpose(s), &phis[j]).unwrap();
            for k in 0..6 {
                let q = inner_product(&proj, &phis[k]).unwrap();
                assert!((q - table[(j, k)]).abs() < 1e-8);
            }
        }
        // reassembly from the table
        let mut rebuilt = Surface::zeros(s.grid_s().clone(), s.grid_t().clone());
        for j in 0..4 {
            for k in 0..6 {
                rebuilt = rebuilt
                    .add(&tensor(&phis[j], &phis[k]).scale(table[(j, k)]))
                    .unwrap();
            }
        }
        assert!(surface_norm(&rebuilt.sub(s).unwrap()) < 1e-10);
    }

    #[test]
    fn single_curves_project_onto_double_table() {
        let (xs, ys) = noisy(150, 22);
        let m = 6;
        let single = fit_single(&xs, &ys, m).unwrap();
        let double = fit_double(&xs, &ys, m, m).unwrap();
        let (Coefficients::Curves(curves), Coefficients::Table(table)) =
            (&single.coefficient.coeffs, &double.coefficient.coeffs)
        else {
            panic!("unexpected coefficient kinds")
        };
        for j in 0..m {
            for k in 0..m {
                let proj = inner_product(&curves[k], &single.eigen.eigenfunctions[j]).unwrap();
                assert!((proj - table[(j, k)]).abs() < 1e-10);
            }
        }
    }

    fn transpose(s: &Surface) -> Surface {
        Surface::new(
            s.grid_t().clone(),
            s.grid_s().clone(),
            s.values().transpose(),
        )
        .unwrap()
    }

    #[test]
    fn population_coefficient_examples() {
        let g = Arc::new(Grid::uniform(101).unwrap());
        let basis = cosine_basis(&g, 50).unwrap();
        let zero = population_coefficient(|_, _| 0.0, &basis, 10, 10).unwrap();
        assert_eq!(surface_norm(&zero.surface), 0.0);
        let one =
            population_coefficient(|j, k| f64::from(u8::from(j == 1 && k == 1)), &basis, 3, 3)
                .unwrap();
        let d = one.surface.sub(&tensor(&basis[0], &basis[0])).unwrap();
        assert!(surface_norm(&d) < 1e-14);

        let truth = population_coefficient(design_coefficient(3.0, 3.0), &basis, 50, 50).unwrap();
        assert!(surface_norm(&truth.surface).is_finite());
        let t = transpose(&truth.surface);
        for j in [0usize, 1, 4, 17, 49] {
            let proj = apply_kernel(&t, &basis[j]).unwrap();
            for k in [0usize, 2, 9, 30] {
                let q = inner_product(&proj, &basis[k]).unwrap();
                assert!((q - design_coefficient(3.0, 3.0)(j + 1, k + 1)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn population_coefficient_rejects_bad_basis() {
        let g = Arc::new(Grid::uniform(11).unwrap());
        let f = FunctionSample::constant(g.clone(), 2.0);
        assert!(matches!(
            population_coefficient(|_, _| 1.0, &[f], 1, 1),
            Err(FofError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn estimation_error_examples() {
        let g = Arc::new(Grid::uniform(101).unwrap());
        let basis = cosine_basis(&g, 50).unwrap();
        let truth = population_coefficient(design_coefficient(3.0, 3.0), &basis, 50, 50).unwrap();
        assert_eq!(estimation_error(&truth, &truth).unwrap(), 0.0);
        let mut bumped = truth.clone();
        bumped.surface = truth.surface.add(&tensor(&basis[0], &basis[0])).unwrap();
        assert!((estimation_error(&bumped, &truth).unwrap() - 1.0).abs() < 1e-8);
    }
}
