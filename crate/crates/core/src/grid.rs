//! Uniform Cartesian grids and cell-average fields.

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::pairwise_sum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("every axis needs at least 4 cells, got {0:?}")]
    TooFewCells(Vec<usize>),
    #[error("cell size must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite value at cell {0}")]
    NonFinite(usize),
    #[error("fields live on different grids")]
    GridMismatch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    counts: Vec<usize>,
    lo: Vec<f64>,
    dx: f64,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(counts: Vec<usize>, lo: Vec<f64>, dx: f64) -> Result<Self, GridError> {
        let d = counts.len();
        if !(2..=3).contains(&d) || lo.len() != d {
            return Err(GridError::BadDimension(d));
        }
        if counts.iter().any(|&n| n < 4) {
            return Err(GridError::TooFewCells(counts));
        }
        if !(dx > 0.0 && dx.is_finite()) || lo.iter().any(|x| !x.is_finite()) {
            return Err(GridError::BadSpacing(dx));
        }
        let mut strides = vec![1; d];
        for k in (0..d - 1).rev() {
            strides[k] = strides[k + 1] * counts[k + 1];
        }
        Ok(Grid {
            counts,
            lo,
            dx,
            strides,
        })
    }

    /// Grid covering `[lo, lo + counts * dx]` per axis, centred on the
    /// origin when `lo = -counts * dx / 2`.
    pub fn centered(counts: Vec<usize>, dx: f64) -> Result<Self, GridError> {
        let lo = counts.iter().map(|&n| -0.5 * n as f64 * dx).collect();
        Grid::new(counts, lo, dx)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
    pub fn lo(&self) -> &[f64] {
        &self.lo
    }
    pub fn hi(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.counts)
            .map(|(l, &n)| l + n as f64 * self.dx)
            .collect()
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.dim() as i32)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in 0..self.dim() {
            idx[k] = flat / self.strides[k];
            flat %= self.strides[k];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Centre of the cell with the given flat index.
    pub fn center(&self, flat: usize) -> Vec<f64> {
        let idx = self.multi_index(flat);
        self.center_of(&idx)
    }

    pub fn center_of(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.lo)
            .map(|(&i, l)| l + (i as f64 + 0.5) * self.dx)
            .collect()
    }

    /// Cell containing `x`, if inside the box.
    pub fn locate(&self, x: &[f64]) -> Option<Vec<usize>> {
        x.iter()
            .zip(&self.lo)
            .zip(&self.counts)
            .map(|((xi, l), &n)| {
                let t = ((xi - l) / self.dx).floor();
                (t >= 0.0 && (t as usize) < n).then_some(t as usize)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    data: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self, GridError> {
        if data.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Field { grid, data })
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Field {
            data: vec![value; grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.center(i)))
            .collect();
        Field {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.data
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn range(&self) -> (f64, f64) {
        (self.min(), self.max())
    }

    /// `sum u_c dx^d`.
    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.data) * self.grid.cell_volume()
    }

    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<f64> = self.data.par_iter().map(|v| v.abs()).collect();
        pairwise_sum(&abs) * self.grid.cell_volume()
    }

    /// `sup |u - c|`.
    pub fn sup_deviation(&self, c: f64) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max((v - c).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Field {
        Field {
            grid: self.grid.clone(),
            data: self.data.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &Field,
        f: impl Fn(f64, f64) -> f64 + Sync,
    ) -> Result<Field, GridError> {
        self.check_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            data: self
                .data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_grid(&self, other: &Field) -> Result<(), GridError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(GridError::GridMismatch)
        }
    }

    /// Largest `self - other` over cells (positive means `self` exceeds).
    pub fn max_excess_over(&self, other: &Field) -> Result<f64, GridError> {
        self.check_grid(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b)))
    }
}

/// `sum |a_c - b_c| dx^d` with a fixed summation tree.
pub fn l1_distance(a: &Field, b: &Field) -> Result<f64, GridError> {
    a.check_grid(b)?;
    let diff: Vec<f64> = a
        .data
        .par_iter()
        .zip(b.data.par_iter())
        .map(|(x, y)| (x - y).abs())
        .collect();
    Ok(pairwise_sum(&diff) * a.grid.cell_volume())
}
