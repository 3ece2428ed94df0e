//! Uniform-grid scalar fields and two-channel image states.
//!
//! Storage is row-major with the origin at the top-left pixel. The column
//! index `i` runs along x (`0..width`) and the row index `j` along y
//! (`0..height`). Sampling accepts one ghost layer on each side, which is
//! all the five-point stencils of the solver ever touch.

use crate::error::{Error, Result};

/// Extent and mesh spacing of a uniform image grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    h: f64,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, h: f64) -> Result<Self> {
        if width < 3 || height < 3 || !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid { width, height, h });
        }
        Ok(Self { width, height, h })
    }

    /// Grid with unit spacing.
    pub fn unit(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, 1.0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Linear index of an interior pixel.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.width && j < self.height);
        j * self.width + i
    }

    /// Area element h².
    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }
}

/// How values outside the grid are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Homogeneous Neumann via even reflection: the ghost equals the first
    /// interior value, so differences across the boundary vanish.
    #[default]
    Reflect,
    /// Torus topology.
    Periodic,
}

impl BoundaryMode {
    /// Maps a possibly-ghost index onto `0..n`, or `None` beyond one ghost layer.
    #[inline]
    pub fn resolve(self, k: isize, n: usize) -> Option<usize> {
        let n_i = n as isize;
        if k < -1 || k > n_i {
            return None;
        }
        Some(match self {
            BoundaryMode::Reflect => k.clamp(0, n_i - 1) as usize,
            BoundaryMode::Periodic => k.rem_euclid(n_i) as usize,
        })
    }
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reflect" | "neumann" => Ok(BoundaryMode::Reflect),
            "periodic" => Ok(BoundaryMode::Periodic),
            other => Err(Error::InvalidParameter(format!("unknown boundary mode `{other}`"))),
        }
    }
}

/// A finite real-valued field on an [`ImageGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: ImageGrid,
    values: Vec<f64>,
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteValue { index }),
        None => Ok(()),
    }
}

impl ScalarField {
    pub fn new(grid: ImageGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    /// Builds a field without the finiteness check. Used by the solver, which
    /// reports non-finite states itself.
    pub(crate) fn from_raw(grid: ImageGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: ImageGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn zeros(grid: ImageGrid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.len()])
    }

    /// Evaluates `f(i, j)` at every pixel.
    pub fn from_fn(grid: ImageGrid, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.height() {
            for i in 0..grid.width() {
                values.push(f(i, j));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &ImageGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Value at `(i, j)` where either index may sit on the ghost layer.
    pub fn sample(&self, i: isize, j: isize, mode: BoundaryMode) -> Result<f64> {
        let ii = mode.resolve(i, self.grid.width);
        let jj = mode.resolve(j, self.grid.height);
        match (ii, jj) {
            (Some(ii), Some(jj)) => Ok(self.get(ii, jj)),
            _ => Err(Error::IndexOutOfGhostRange { i, j }),
        }
    }

    /// Applies `f` pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Plain sum of values, accumulated in storage order.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute pointwise difference to `other`.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Cyclic shift: output(i, j) = self(i - dx, j - dy) with wraparound.
    pub fn roll(&self, dx: isize, dy: isize) -> Self {
        let (w, hgt) = (self.grid.width as isize, self.grid.height as isize);
        let mut out = vec![0.0; self.values.len()];
        for j in 0..hgt {
            for i in 0..w {
                let si = (i - dx).rem_euclid(w) as usize;
                let sj = (j - dy).rem_euclid(hgt) as usize;
                out[self.grid.index(i as usize, j as usize)] = self.get(si, sj);
            }
        }
        Self::from_raw(self.grid, out)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// The two-channel state `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    u: ScalarField,
    v: ScalarField,
}

impl ChannelPair {
    pub fn new(u: ScalarField, v: ScalarField) -> Result<Self> {
        if u.grid != v.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u, v })
    }

    /// Copies `u_values` and `v_values` into a new pair on `grid`.
    pub fn from_values(grid: ImageGrid, u_values: &[f64], v_values: &[f64]) -> Result<Self> {
        let u = ScalarField::new(grid, u_values.to_vec())?;
        let v = ScalarField::new(grid, v_values.to_vec())?;
        Self::new(u, v)
    }

    /// Image as the first channel, second channel zero.
    pub fn from_image(u: ScalarField) -> Self {
        let v = ScalarField::zeros(u.grid);
        Self { u, v }
    }

    pub fn grid(&self) -> &ImageGrid {
        &self.u.grid
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn v(&self) -> &ScalarField {
        &self.v
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField) {
        (self.u, self.v)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn negated(&self) -> Self {
        Self {
            u: self.u.map(|x| -x),
            v: self.v.map(|x| -x),
        }
    }

    /// Adds the constant vector `(c1, c2)`.
    pub fn shifted(&self, c1: f64, c2: f64) -> Self {
        Self {
            u: self.u.map(|x| x + c1),
            v: self.v.map(|x| x + c2),
        }
    }

    pub fn rolled(&self, dx: isize, dy: isize) -> Self {
        Self {
            u: self.u.roll(dx, dy),
            v: self.v.roll(dx, dy),
        }
    }

    /// Max-abs deviation over both channels.
    pub fn max_abs_diff(&self, other: &ChannelPair) -> Result<f64> {
        Ok(self.u.max_abs_diff(&other.u)?.max(self.v.max_abs_diff(&other.v)?))
    }
}

/// Builds a pair from raw arrays, copying them.
pub fn new_pair(grid: ImageGrid, u_values: &[f64], v_values: &[f64]) -> Result<ChannelPair> {
    ChannelPair::from_values(grid, u_values, v_values)
}
