//! Plain-text formats: curve datasets, surfaces and `key=value` configs.
//!
//! CSV dialect: comma separated, `.` decimal point, no quoting, `\n` line
//! endings. Numbers are written with 17 significant digits so a write/read
//! cycle reproduces every `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{FofError, Result};
use crate::grid::{FunctionSample, Grid, Surface};

/// Formats a value with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Affine map between a dataset's native axis [min, max] and [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMap {
    pub min: f64,
    pub max: f64,
}

impl AxisMap {
    pub const UNIT: AxisMap = AxisMap { min: 0.0, max: 1.0 };

    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(FofError::InvalidGrid(format!(
                "axis range [{min}, {max}] is not a proper interval"
            )));
        }
        Ok(AxisMap { min, max })
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        if x == self.max {
            return 1.0;
        }
        (x - self.min) / (self.max - self.min)
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        if u == 1.0 {
            return self.max;
        }
        self.min + u * (self.max - self.min)
    }
}

fn parse_err(file: &str, line: usize, column: usize, message: impl Into<String>) -> FofError {
    FofError::Parse {
        file: file.to_string(),
        line,
        column,
        message: message.into(),
    }
}

fn parse_field(file: &str, line: usize, column: usize, field: &str) -> Result<f64> {
    let f = field.trim();
    if f.is_empty() || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan") {
        return Err(parse_err(
            file,
            line,
            column,
            "missing value; only complete curves are supported, drop or impute incomplete rows first",
        ));
    }
    let v: f64 = f.parse().map_err(|_| {
        parse_err(
            file,
            line,
            column,
            format!("cannot parse '{f}' as a number"),
        )
    })?;
    if !v.is_finite() {
        return Err(parse_err(
            file,
            line,
            column,
            format!("non-finite value '{f}'"),
        ));
    }
    Ok(v)
}

/// Header row of grid coordinates followed by one curve per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub header: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_curves(text: &str, file: &str) -> Result<CurveTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header_text) = lines
        .next()
        .ok_or_else(|| parse_err(file, 1, 1, "empty file"))?;
    let header = header_text
        .split(',')
        .enumerate()
        .map(|(c, f)| parse_field(file, hline + 1, c + 1, f))
        .collect::<Result<Vec<f64>>>()?;
    if header.len() < 2 {
        return Err(parse_err(
            file,
            hline + 1,
            1,
            "header needs at least 2 grid points",
        ));
    }
    if let Some(c) = header.windows(2).position(|w| w[1] <= w[0]) {
        return Err(parse_err(
            file,
            hline + 1,
            c + 2,
            "grid header must be strictly increasing",
        ));
    }
    let mut rows = Vec::new();
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(parse_err(
                file,
                ln + 1,
                fields.len().min(header.len()) + 1,
                format!("expected {} values, found {}", header.len(), fields.len()),
            ));
        }
        let row = fields
            .iter()
            .enumerate()
            .map(|(c, f)| parse_field(file, ln + 1, c + 1, f))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(file, hline + 2, 1, "no curves after the header"));
    }
    Ok(CurveTable { header, rows })
}

pub fn read_curves(path: &Path) -> Result<CurveTable> {
    let text = read_text(path)?;
    parse_curves(&text, &path.display().to_string())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FofError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Linear interpolation of `values` given at `from` onto `to`
/// (both increasing, `to` within the range of `from`).
pub fn interpolate(from: &[f64], values: &[f64], to: &[f64]) -> Vec<f64> {
    to.iter()
        .map(|&x| {
            let idx = from.partition_point(|&p| p < x);
            if idx == 0 {
                values[0]
            } else if idx == from.len() {
                values[from.len() - 1]
            } else if from[idx] == x {
                values[idx]
            } else {
                let (x0, x1) = (from[idx - 1], from[idx]);
                let lam = (x - x0) / (x1 - x0);
                values[idx - 1] * (1.0 - lam) + values[idx] * lam
            }
        })
        .collect()
}

/// Paired predictor/response curves on a shared unit-interval grid.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub xs: Vec<FunctionSample>,
    pub ys: Vec<FunctionSample>,
    pub grid: Arc<Grid>,
    pub axis: AxisMap,
}

/// Builds a dataset from the two tables. Native axes are mapped to [0, 1];
/// with `grid_size` set, curves are resampled onto a uniform grid.
pub fn dataset_from_tables(
    x: &CurveTable,
    y: &CurveTable,
    x_name: &str,
    y_name: &str,
    grid_size: Option<usize>,
) -> Result<Dataset> {
    if x.header != y.header {
        return Err(parse_err(
            y_name,
            1,
            1,
            format!("grid header differs from {x_name}"),
        ));
    }
    if x.rows.len() != y.rows.len() {
        return Err(parse_err(
            y_name,
            y.rows.len().min(x.rows.len()) + 2,
            1,
            format!(
                "{} has {} curves but {} has {}",
                x_name,
                x.rows.len(),
                y_name,
                y.rows.len()
            ),
        ));
    }
    let axis = AxisMap::new(x.header[0], x.header[x.header.len() - 1])?;
    let unit: Vec<f64> = x.header.iter().map(|&p| axis.to_unit(p)).collect();
    let (grid, resample) = match grid_size {
        Some(size) => (Arc::new(Grid::uniform(size)?), true),
        None => (Arc::new(Grid::from_points(unit.clone())?), false),
    };
    let to_samples = |rows: &[Vec<f64>]| -> Result<Vec<FunctionSample>> {
        rows.iter()
            .map(|r| {
                let v = if resample {
                    interpolate(&unit, r, grid.points())
                } else {
                    r.clone()
                };
                FunctionSample::new(grid.clone(), v)
            })
            .collect()
    };
    Ok(Dataset {
        xs: to_samples(&x.rows)?,
        ys: to_samples(&y.rows)?,
        grid,
        axis,
    })
}

pub fn read_dataset(x_path: &Path, y_path: &Path, grid_size: Option<usize>) -> Result<Dataset> {
    let x = read_curves(x_path)?;
    let y = read_curves(y_path)?;
    dataset_from_tables(
        &x,
        &y,
        &x_path.display().to_string(),
        &y_path.display().to_string(),
        grid_size,
    )
}

/// Curves as CSV: header of native coordinates, one curve per row.
pub fn curves_to_csv(samples: &[FunctionSample], axis: AxisMap) -> String {
    let mut out = String::new();
    if let Some(first) = samples.first() {
        let header: Vec<String> = first
            .grid()
            .points()
            .iter()
            .map(|&u| fmt_f64(axis.from_unit(u)))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
    }
    for s in samples {
        let row: Vec<String> = s.values().iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Surface as CSV: first row `s/t,t₁,…`, then `sᵢ,R(sᵢ,t₁),…`.
pub fn surface_to_csv(surface: &Surface, axis: AxisMap) -> String {
    let mut out = String::from("s/t");
    for &t in surface.grid_t().points() {
        out.push(',');
        out.push_str(&fmt_f64(axis.from_unit(t)));
    }
    out.push('\n');
    let v = surface.values();
    for (i, &s) in surface.grid_s().points().iter().enumerate() {
        out.push_str(&fmt_f64(axis.from_unit(s)));
        for j in 0..v.ncols() {
            out.push(',');
            out.push_str(&fmt_f64(v[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`surface_to_csv`]; both axes must span the same range.
pub fn parse_surface(text: &str, file: &str) -> Result<(Surface, AxisMap)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(file, 1, 1, "empty file"))?;
    let mut fields = header.split(',');
    if fields.next().map(str::trim) != Some("s/t") {
        return Err(parse_err(file, hline + 1, 1, "expected 's/t' corner cell"));
    }
    let t_native = fields
        .enumerate()
        .map(|(c, f)| parse_field(file, hline + 1, c + 2, f))
        .collect::<Result<Vec<f64>>>()?;
    let mut s_native = Vec::new();
    let mut values = Vec::new();
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != t_native.len() + 1 {
            return Err(parse_err(
                file,
                ln + 1,
                fields.len().min(t_native.len() + 1) + 1,
                format!(
                    "expected {} fields, found {}",
                    t_native.len() + 1,
                    fields.len()
                ),
            ));
        }
        s_native.push(parse_field(file, ln + 1, 1, fields[0])?);
        for (c, f) in fields[1..].iter().enumerate() {
            values.push(parse_field(file, ln + 1, c + 2, f)?);
        }
    }
    if t_native.len() < 2 || s_native.len() < 2 {
        return Err(parse_err(
            file,
            hline + 1,
            1,
            "surface needs at least 2x2 values",
        ));
    }
    let axis = AxisMap::new(t_native[0], t_native[t_native.len() - 1])?;
    if s_native[0] != axis.min || s_native[s_native.len() - 1] != axis.max {
        return Err(parse_err(
            file,
            hline + 2,
            1,
            "s and t axes span different ranges",
        ));
    }
    let to_grid = |pts: &[f64]| Grid::from_points(pts.iter().map(|&p| axis.to_unit(p)).collect());
    let grid_t = Arc::new(to_grid(&t_native)?);
    let grid_s = Arc::new(to_grid(&s_native)?);
    let m = DMatrix::from_row_slice(s_native.len(), t_native.len(), &values);
    Ok((Surface::new(grid_s, grid_t, m)?, axis))
}

pub fn read_surface(path: &Path) -> Result<(Surface, AxisMap)> {
    let text = read_text(path)?;
    parse_surface(&text, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxis {
    /// Fix `s`, vary `t`.
    S,
    /// Fix `t`, vary `s`.
    T,
}

impl std::str::FromStr for SliceAxis {
    type Err = FofError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(SliceAxis::S),
            "t" => Ok(SliceAxis::T),
            other => Err(FofError::Config(format!(
                "axis must be s or t, got '{other}'"
            ))),
        }
    }
}

/// Nearest-grid-point slice of `surface` at native coordinate `at`,
/// returned as (native coordinate, value) pairs along the free axis.
pub fn slice_surface(
    surface: &Surface,
    axis_map: AxisMap,
    axis: SliceAxis,
    at: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(at >= axis_map.min && at <= axis_map.max) {
        return Err(FofError::InvalidInput(format!(
            "slice position {at} outside [{}, {}]",
            axis_map.min, axis_map.max
        )));
    }
    let u = axis_map.to_unit(at);
    let curve = match axis {
        SliceAxis::S => surface.row(surface.grid_s().nearest_index(u)),
        SliceAxis::T => surface.column(surface.grid_t().nearest_index(u)),
    };
    Ok(curve
        .grid()
        .points()
        .iter()
        .zip(curve.values())
        .map(|(&p, &v)| (axis_map.from_unit(p), v))
        .collect())
}

pub fn slice_to_csv(axis: SliceAxis, rows: &[(f64, f64)]) -> String {
    let mut out = String::from(match axis {
        SliceAxis::S => "t,value\n",
        SliceAxis::T => "s,value\n",
    });
    for &(c, v) in rows {
        let _ = writeln!(out, "{},{}", fmt_f64(c), fmt_f64(v));
    }
    out
}

/// Writes via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| FofError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

/// `key=value` configuration with `#` comments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
    file: String,
}

impl RunConfig {
    /// Parses `text`, rejecting keys outside `allowed` and duplicates.
    pub fn parse(text: &str, file: &str, allowed: &[&str]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                parse_err(
                    file,
                    ln + 1,
                    1,
                    format!("expected key=value, found '{line}'"),
                )
            })?;
            let k = k.trim();
            if !allowed.contains(&k) {
                return Err(parse_err(
                    file,
                    ln + 1,
                    1,
                    format!("unknown key '{k}' (allowed: {})", allowed.join(", ")),
                ));
            }
            if entries
                .insert(k.to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(parse_err(file, ln + 1, 1, format!("duplicate key '{k}'")));
            }
        }
        Ok(RunConfig {
            entries,
            file: file.to_string(),
        })
    }

    pub fn read(path: &Path, allowed: &[&str]) -> Result<Self> {
        let text = read_text(path)?;
        Self::parse(&text, &path.display().to_string(), allowed)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn require(&self, keys: &[&str]) -> Result<()> {
        let missing: Vec<&str> = keys
            .iter()
            .copied()
            .filter(|k| self.get(k).is_none())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(FofError::Config(format!(
                "{}: missing required keys: {}",
                self.file,
                missing.join(", ")
            )))
        }
    }

    fn typed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    FofError::Config(format!("{}: cannot parse {key}='{v}'", self.file))
                })
            })
            .transpose()
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.typed(key)
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.typed(key)
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.typed(key)
    }

    /// Comma-separated list of counts.
    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim().parse::<usize>().map_err(|_| {
                            FofError::Config(format!("{}: cannot parse {key}='{v}'", self.file))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
