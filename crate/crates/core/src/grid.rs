//! Discretized L²(I) and L²(I²) on a shared grid over I = [0, 1].
//!
//! Curves are stored by their values on grid points and every integral is
//! a trapezoidal quadrature sum. Sums always run in ascending index order
//! so results are reproducible bit-for-bit.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{FofError, Result};

/// Ordered abscissas on [0, 1] with trapezoidal quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Uniform grid with `size` points, `0` and `1` included.
    pub fn uniform(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(FofError::InvalidGrid(format!(
                "a grid needs at least 2 points, got {size}"
            )));
        }
        let last = (size - 1) as f64;
        let mut points: Vec<f64> = (0..size).map(|i| i as f64 / last).collect();
        points[size - 1] = 1.0;
        Self::from_points(points)
    }

    /// Grid on arbitrary strictly increasing points spanning exactly [0, 1].
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(FofError::InvalidGrid(format!(
                "a grid needs at least 2 points, got {n}"
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(FofError::InvalidGrid("non-finite grid point".into()));
        }
        if points[0] != 0.0 || points[n - 1] != 1.0 {
            return Err(FofError::InvalidGrid(format!(
                "grid must start at 0 and end at 1, got [{}, {}]",
                points[0],
                points[n - 1]
            )));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(FofError::InvalidGrid(format!(
                "grid points not strictly increasing at index {}",
                i + 1
            )));
        }
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (points[i + 1] - points[i]);
            weights[i] += half;
            weights[i + 1] += half;
        }
        Ok(Grid { points, weights })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; a grid has at least two points.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the grid point closest to `x` (lower index on ties).
    pub fn nearest_index(&self, x: f64) -> usize {
        let idx = self.points.partition_point(|&p| p < x);
        if idx == 0 {
            return 0;
        }
        if idx == self.points.len() {
            return idx - 1;
        }
        if x - self.points[idx - 1] <= self.points[idx] - x {
            idx - 1
        } else {
            idx
        }
    }
}

/// True when both grids are the same object or hold identical points.
pub fn same_grid(a: &Grid, b: &Grid) -> bool {
    std::ptr::eq(a, b) || a.points == b.points
}

/// One curve observed on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSample {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl FunctionSample {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FofError::InvalidInput(format!(
                "curve has {} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FofError::InvalidInput(format!(
                "non-finite curve value at grid index {i}"
            )));
        }
        Ok(FunctionSample { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.len()];
        FunctionSample { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        FunctionSample { grid, values }
    }

    /// Evaluates `f` at each grid point.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scale(&self, c: f64) -> FunctionSample {
        FunctionSample {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn sub(&self, other: &FunctionSample) -> Result<FunctionSample> {
        check_same(&self.grid, &other.grid, "curve subtraction")?;
        Ok(FunctionSample {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &FunctionSample) -> Result<FunctionSample> {
        check_same(&self.grid, &other.grid, "curve addition")?;
        Ok(FunctionSample {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub(crate) fn from_parts_unchecked(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        FunctionSample { grid, values }
    }
}

pub(crate) fn check_same(a: &Grid, b: &Grid, what: &str) -> Result<()> {
    if same_grid(a, b) {
        Ok(())
    } else {
        Err(FofError::GridMismatch(format!(
            "{what}: grids of {} and {} points differ",
            a.len(),
            b.len()
        )))
    }
}

/// Real function on I² evaluated on a product grid; rows follow `s`, columns `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    grid_s: Arc<Grid>,
    grid_t: Arc<Grid>,
    values: DMatrix<f64>,
}

impl Surface {
    pub fn new(grid_s: Arc<Grid>, grid_t: Arc<Grid>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != grid_s.len() || values.ncols() != grid_t.len() {
            return Err(FofError::InvalidInput(format!(
                "surface is {}x{} but grids are {}x{}",
                values.nrows(),
                values.ncols(),
                grid_s.len(),
                grid_t.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FofError::InvalidInput("non-finite surface value".into()));
        }
        Ok(Surface {
            grid_s,
            grid_t,
            values,
        })
    }

    pub fn zeros(grid_s: Arc<Grid>, grid_t: Arc<Grid>) -> Self {
        let values = DMatrix::zeros(grid_s.len(), grid_t.len());
        Surface {
            grid_s,
            grid_t,
            values,
        }
    }

    pub fn grid_s(&self) -> &Arc<Grid> {
        &self.grid_s
    }

    pub fn grid_t(&self) -> &Arc<Grid> {
        &self.grid_t
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Row `i` of the surface as a curve in `t`.
    pub fn row(&self, i: usize) -> FunctionSample {
        let values = self.values.row(i).iter().copied().collect();
        FunctionSample::from_parts_unchecked(self.grid_t.clone(), values)
    }

    /// Column `j` of the surface as a curve in `s`.
    pub fn column(&self, j: usize) -> FunctionSample {
        let values = self.values.column(j).iter().copied().collect();
        FunctionSample::from_parts_unchecked(self.grid_s.clone(), values)
    }

    pub fn sub(&self, other: &Surface) -> Result<Surface> {
        check_same(&self.grid_s, &other.grid_s, "surface subtraction (s)")?;
        check_same(&self.grid_t, &other.grid_t, "surface subtraction (t)")?;
        Ok(Surface {
            grid_s: self.grid_s.clone(),
            grid_t: self.grid_t.clone(),
            values: &self.values - &other.values,
        })
    }

    pub fn add(&self, other: &Surface) -> Result<Surface> {
        check_same(&self.grid_s, &other.grid_s, "surface addition (s)")?;
        check_same(&self.grid_t, &other.grid_t, "surface addition (t)")?;
        Ok(Surface {
            grid_s: self.grid_s.clone(),
            grid_t: self.grid_t.clone(),
            values: &self.values + &other.values,
        })
    }

    pub fn scale(&self, c: f64) -> Surface {
        Surface {
            grid_s: self.grid_s.clone(),
            grid_t: self.grid_t.clone(),
            values: &self.values * c,
        }
    }

    pub(crate) fn from_parts_unchecked(
        grid_s: Arc<Grid>,
        grid_t: Arc<Grid>,
        values: DMatrix<f64>,
    ) -> Self {
        Surface {
            grid_s,
            grid_t,
            values,
        }
    }
}

/// ⟨f, g⟩ = Σᵢ wᵢ f(tᵢ) g(tᵢ).
pub fn inner_product(f: &FunctionSample, g: &FunctionSample) -> Result<f64> {
    check_same(&f.grid, &g.grid, "inner product")?;
    Ok(weighted_dot(f.grid.weights(), &f.values, &g.values))
}

pub(crate) fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..w.len() {
        acc += w[i] * (a[i] * b[i]);
    }
    acc
}

pub fn l2_norm(f: &FunctionSample) -> f64 {
    weighted_dot(f.grid.weights(), &f.values, &f.values).sqrt()
}

/// |||R||| = (Σᵢⱼ wˢᵢ wᵗⱼ R(sᵢ,tⱼ)²)^½.
pub fn surface_norm(r: &Surface) -> f64 {
    surface_sq_norm(r).sqrt()
}

pub(crate) fn surface_sq_norm(r: &Surface) -> f64 {
    let ws = r.grid_s.weights();
    let wt = r.grid_t.weights();
    let mut acc = 0.0;
    for (i, wi) in ws.iter().enumerate() {
        let mut row = 0.0;
        for (j, wj) in wt.iter().enumerate() {
            let v = r.values[(i, j)];
            row += wj * (v * v);
        }
        acc += wi * row;
    }
    acc
}

/// (T_R h)(s) = Σⱼ wᵗⱼ R(s, tⱼ) h(tⱼ).
pub fn apply_kernel(r: &Surface, h: &FunctionSample) -> Result<FunctionSample> {
    check_same(&r.grid_t, &h.grid, "kernel application")?;
    let wt = r.grid_t.weights();
    let wh: Vec<f64> = wt.iter().zip(&h.values).map(|(w, v)| w * v).collect();
    let out = (0..r.grid_s.len())
        .map(|i| {
            let mut acc = 0.0;
            for (j, w) in wh.iter().enumerate() {
                acc += r.values[(i, j)] * w;
            }
            acc
        })
        .collect();
    Ok(FunctionSample::from_parts_unchecked(r.grid_s.clone(), out))
}

/// (f ⊗ g)(s, t) = f(s) g(t).
pub fn tensor(f: &FunctionSample, g: &FunctionSample) -> Surface {
    let values = DMatrix::from_fn(f.values.len(), g.values.len(), |i, j| {
        f.values[i] * g.values[j]
    });
    Surface::from_parts_unchecked(f.grid.clone(), g.grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(n).unwrap())
    }

    /// Composite Simpson on a fine mesh, used as an independent integrator.
    fn simpson(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
        let h = 1.0 / panels as f64;
        let mut acc = f(0.0) + f(1.0);
        for i in 1..panels {
            let c = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += c * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::uniform(1).is_err());
        assert!(Grid::from_points(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Grid::from_points(vec![0.1, 1.0]).is_err());
        let g = Grid::uniform(2).unwrap();
        assert_eq!(g.weights(), &[0.5, 0.5]);
        for n in [2, 3, 101, 201, 1000] {
            let g = Grid::uniform(n).unwrap();
            assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let g = Grid::from_points(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn nearest_index_picks_closest() {
        let g = Grid::uniform(11).unwrap();
        assert_eq!(g.nearest_index(0.0), 0);
        assert_eq!(g.nearest_index(0.26), 3);
        assert_eq!(g.nearest_index(0.24), 2);
        assert_eq!(g.nearest_index(1.0), 10);
    }

    #[test]
    fn inner_product_examples() {
        for n in [2, 7, 201] {
            let g = grid(n);
            let one = FunctionSample::constant(g.clone(), 1.0);
            assert_abs_diff_eq!(inner_product(&one, &one).unwrap(), 1.0, epsilon = 1e-12);
        }
        let g = grid(201);
        let one = FunctionSample::constant(g.clone(), 1.0);
        let c1 = FunctionSample::from_fn(g.clone(), |t| SQRT_2 * (PI * t).cos()).unwrap();
        assert_abs_diff_eq!(inner_product(&one, &c1).unwrap(), 0.0, epsilon = 1e-6);
        let oracle = simpson(|t| 2.0 * (PI * t).cos().powi(2), 20_000);
        assert_abs_diff_eq!(inner_product(&c1, &c1).unwrap(), oracle, epsilon = 1e-4);
    }

    #[test]
    fn inner_product_rejects_mismatched_grids() {
        let f = FunctionSample::constant(grid(5), 1.0);
        let g = FunctionSample::constant(grid(6), 1.0);
        assert!(matches!(
            inner_product(&f, &g),
            Err(FofError::GridMismatch(_))
        ));
    }

    #[test]
    fn sample_rejects_bad_values() {
        assert!(FunctionSample::new(grid(3), vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(FunctionSample::new(grid(3), vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn norm_examples() {
        let g = grid(201);
        assert_eq!(l2_norm(&FunctionSample::zeros(g.clone())), 0.0);
        assert_abs_diff_eq!(
            l2_norm(&FunctionSample::constant(g.clone(), 2.0)),
            2.0,
            epsilon = 1e-12
        );
        let id = FunctionSample::from_fn(g, |t| t).unwrap();
        assert_abs_diff_eq!(l2_norm(&id), (1.0f64 / 3.0).sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn surface_norm_examples() {
        let g = grid(101);
        assert_eq!(surface_norm(&Surface::zeros(g.clone(), g.clone())), 0.0);
        let ones = tensor(
            &FunctionSample::constant(g.clone(), 1.0),
            &FunctionSample::constant(g.clone(), 1.0),
        );
        assert_abs_diff_eq!(surface_norm(&ones), 1.0, epsilon = 1e-12);
        assert!(ones.values().iter().all(|&v| v == 1.0));

        let g = grid(201);
        let phi1 = FunctionSample::constant(g.clone(), 1.0);
        let phi2 = FunctionSample::from_fn(g.clone(), |t| SQRT_2 * (PI * t).cos()).unwrap();
        let oracle =
            simpson(|_| 1.0, 2).sqrt() * simpson(|t| 2.0 * (PI * t).cos().powi(2), 20_000).sqrt();
        assert_abs_diff_eq!(surface_norm(&tensor(&phi1, &phi2)), oracle, epsilon = 1e-4);
    }

    #[test]
    fn kernel_examples() {
        let g = grid(51);
        let h = FunctionSample::from_fn(g.clone(), |t| t * t - 0.3).unwrap();
        let zero = apply_kernel(&Surface::zeros(g.clone(), g.clone()), &h).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let f = FunctionSample::from_fn(g.clone(), |t| (3.0 * t).sin()).unwrap();
        let k = FunctionSample::from_fn(g.clone(), |t| 1.0 + t).unwrap();
        let out = apply_kernel(&tensor(&f, &k), &h).unwrap();
        let c = inner_product(&k, &h).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert_abs_diff_eq!(*a, c * b, epsilon = 1e-14);
        }
        assert!(apply_kernel(&tensor(&f, &k), &FunctionSample::zeros(grid(5))).is_err());
    }

    #[test]
    fn two_point_grid_is_usable() {
        let g = grid(2);
        let f = FunctionSample::new(g.clone(), vec![1.0, 3.0]).unwrap();
        assert_abs_diff_eq!(inner_product(&f, &f).unwrap(), 5.0, epsilon = 1e-15);
        let r = tensor(&f, &f);
        assert_abs_diff_eq!(surface_norm(&r), 5.0, epsilon = 1e-14);
        assert_eq!(apply_kernel(&r, &f).unwrap().values(), &[5.0, 15.0]);
    }

    #[test]
    fn linear_functions_integrate_exactly() {
        let g = grid(37);
        let f = FunctionSample::from_fn(g.clone(), |t| 2.0 * t - 0.25).unwrap();
        let one = FunctionSample::constant(g, 1.0);
        // ∫ (2t − 1/4) dt = 3/4
        assert_abs_diff_eq!(inner_product(&f, &one).unwrap(), 0.75, epsilon = 1e-12);
    }

    fn curve(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn inner_product_symmetric_and_bounded(a in curve(23), b in curve(23)) {
            let g = grid(23);
            let f = FunctionSample::new(g.clone(), a).unwrap();
            let h = FunctionSample::new(g, b).unwrap();
            let fh = inner_product(&f, &h).unwrap();
            prop_assert_eq!(fh.to_bits(), inner_product(&h, &f).unwrap().to_bits());
            prop_assert!(fh.abs() <= l2_norm(&f) * l2_norm(&h) + 1e-12);
        }

        #[test]
        fn tensor_norm_factorises(a in curve(17), b in curve(9)) {
            let f = FunctionSample::new(grid(17), a).unwrap();
            let h = FunctionSample::new(grid(9), b).unwrap();
            let lhs = surface_norm(&tensor(&f, &h));
            prop_assert!((lhs - l2_norm(&f) * l2_norm(&h)).abs() < 1e-10);
        }

        #[test]
        fn tensor_kernel_identity(a in curve(15), b in curve(15), c in curve(15)) {
            let g = grid(15);
            let f = FunctionSample::new(g.clone(), a).unwrap();
            let k = FunctionSample::new(g.clone(), b).unwrap();
            let h = FunctionSample::new(g, c).unwrap();
            let out = apply_kernel(&tensor(&f, &k), &h).unwrap();
            let scale = inner_product(&k, &h).unwrap();
            for (x, y) in out.values().iter().zip(f.values()) {
                prop_assert!((x - scale * y).abs() < 1e-10 * (1.0 + x.abs()));
            }
        }
    }
}
