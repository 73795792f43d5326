//! Uniform cell-centred grids on a square box and the fields that live on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform `n × n` grid of cell centres covering `[-half_width, half_width]²`.
///
/// Node `(ix, iy)` sits at `-half_width + (i + 1/2)·h` along each axis, so the
/// midpoint rule over the nodes integrates over the whole box. Fields are stored
/// row-major with `iy` as the slow index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid2D {
    pub n: usize,
    pub half_width: f64,
}

impl Grid2D {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid needs at least one node".into()));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Self { n, half_width })
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Coordinate of node `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    #[inline]
    pub fn unravel(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    #[inline]
    pub fn point(&self, k: usize) -> [f64; 2] {
        let (ix, iy) = self.unravel(k);
        [self.coord(ix), self.coord(iy)]
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }

    /// True when `k` lies in the outermost ring of cells.
    #[inline]
    pub fn is_boundary(&self, k: usize) -> bool {
        let (ix, iy) = self.unravel(k);
        ix == 0 || iy == 0 || ix + 1 == self.n || iy + 1 == self.n
    }

    /// Sample a function at every node.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        self.points().map(f).collect()
    }

    pub fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self.n != other.n || (self.half_width - other.half_width).abs() > 1e-12 * self.half_width {
            return Err(Error::GridMismatch(format!(
                "{}×{} on ±{} vs {}×{} on ±{}",
                self.n, self.n, self.half_width, other.n, other.n, other.half_width
            )));
        }
        Ok(())
    }

    /// Midpoint-rule integral of node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_area()
    }
}

/// A nonnegative scalar density on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "density values must be finite and nonnegative, found {v}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self { values: vec![0.0; grid.len()], grid }
    }

    pub fn from_fn<F: Fn([f64; 2]) -> f64>(grid: Grid2D, f: F) -> Result<Self> {
        Self::new(grid, grid.sample(f))
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }
}

/// A two-component vector field on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    pub grid: Grid2D,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Self { x: vec![0.0; grid.len()], y: vec![0.0; grid.len()], grid }
    }

    pub fn from_fn<F: Fn([f64; 2]) -> [f64; 2]>(grid: Grid2D, f: F) -> Self {
        let (x, y) = grid.points().map(f).map(|[a, b]| (a, b)).unzip();
        Self { grid, x, y }
    }

    #[inline]
    pub fn at(&self, k: usize) -> [f64; 2] {
        [self.x[k], self.y[k]]
    }

    pub fn max_norm(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }

    /// `self + factor·other`, nodewise.
    pub fn add_scaled(&self, other: &VectorField2D, factor: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + factor * b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + factor * b).collect(),
        })
    }

    /// Central-difference curl `∂_x A_y − ∂_y A_x` on interior nodes (zero on the
    /// outer ring).
    pub fn curl(&self) -> Vec<f64> {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let mut out = vec![0.0; self.grid.len()];
        for iy in 1..n.saturating_sub(1) {
            for ix in 1..n - 1 {
                let k = self.grid.index(ix, iy);
                let day = self.y[self.grid.index(ix + 1, iy)] - self.y[self.grid.index(ix - 1, iy)];
                let dax = self.x[self.grid.index(ix, iy + 1)] - self.x[self.grid.index(ix, iy - 1)];
                out[k] = (day - dax) / (2.0 * h);
            }
        }
        out
    }
}
