//! Two-dimensional slices of a trained run.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use anyhow::{bail, Result};
use ndarray::{Array1, Array2};
use selectnet::problems::BOUNDARY_TOL;
use selectnet::{apply_operator, Field, OperatorConfig, Problem, Selection};

use crate::artifacts::fmt_real;

pub const SLICE_HEADER: [&str; 3] = ["coord1", "coord2", "value"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    /// `(x₁, x₂)` with every other coordinate, including time, at 0.
    X1X2,
    /// `(t, x₁)` with the other spatial coordinates at 0.
    TX1,
}

impl Plane {
    pub fn as_str(self) -> &'static str {
        match self {
            Plane::X1X2 => "x1x2",
            Plane::TX1 => "tx1",
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Plane {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x1x2" => Ok(Plane::X1X2),
            "tx1" => Ok(Plane::TX1),
            _ => bail!("unknown plane `{s}` (expected x1x2 or tx1)"),
        }
    }
}

/// Grid of a slice: `(coord1, coord2)` pairs in row-major order and the
/// full-dimensional points they map to.
#[derive(Clone, Debug)]
pub struct SliceGrid {
    pub coords: Vec<(f64, f64)>,
    pub points: Array2<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn slice_grid(problem: &Problem, plane: Plane, grid: usize) -> Result<SliceGrid> {
    if grid == 0 {
        bail!("grid must have at least one point per axis");
    }
    let dim = problem.input_dim();
    let d = problem.spatial_dim;
    let (axes, first, second) = match plane {
        Plane::X1X2 => ((0, 1), linspace(-1.0, 1.0, grid), linspace(-1.0, 1.0, grid)),
        Plane::TX1 => {
            let Some(horizon) = problem.domain.horizon() else {
                bail!("plane tx1 needs a time-dependent problem, {} is stationary", problem.name);
            };
            ((d, 0), linspace(0.0, horizon, grid), linspace(-1.0, 1.0, grid))
        }
    };
    let mut coords = Vec::with_capacity(grid * grid);
    let mut points = Array2::zeros((grid * grid, dim));
    for (i, &a) in first.iter().enumerate() {
        for (j, &b) in second.iter().enumerate() {
            let row = i * grid + j;
            points[[row, axes.0]] = a;
            points[[row, axes.1]] = b;
            coords.push((a, b));
        }
    }
    Ok(SliceGrid { coords, points })
}

/// `|Du − f|` at the grid points inside the closed domain, NaN elsewhere.
pub fn residual_values<F: Field<f64> + ?Sized>(
    problem: &Problem,
    field: &F,
    points: &Array2<f64>,
    cfg: &OperatorConfig<f64>,
) -> Result<Array1<f64>> {
    let inside: Vec<usize> = (0..points.nrows())
        .filter(|&i| problem.domain.contains_closed(points.row(i), BOUNDARY_TOL))
        .collect();
    let mut out = Array1::from_elem(points.nrows(), f64::NAN);
    if inside.is_empty() {
        return Ok(out);
    }
    let sub = points.select(ndarray::Axis(0), &inside);
    let du = apply_operator(problem, field, sub.view(), cfg)?.operator_values;
    let f = problem.evaluate_f(sub.view())?;
    for (k, &i) in inside.iter().enumerate() {
        out[i] = (du[k] - f[k]).abs();
    }
    Ok(out)
}

pub fn selection_values(selection: &Selection, points: &Array2<f64>) -> Result<Array1<f64>> {
    Ok(selection.forward(points.view())?)
}

pub fn write_slice<W: Write>(out: W, coords: &[(f64, f64)], values: &Array1<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SLICE_HEADER)?;
    for (&(a, b), &v) in coords.iter().zip(values.iter()) {
        w.write_record([fmt_real(a), fmt_real(b), fmt_real(v)])?;
    }
    w.flush()?;
    Ok(())
}
