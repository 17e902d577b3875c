//! Point collections and center sets.
//!
//! Both are stored row-major in a single `Vec<f64>`; row `i` occupies
//! `values[i * dim..(i + 1) * dim]`.

use crate::error::{Error, Result};

/// Squared Euclidean distance.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_rows(values: &[f64], dim: usize, what: &str) -> Result<usize> {
    if dim == 0 {
        return Err(Error::invalid(format!(
            "{what}: dimension must be positive"
        )));
    }
    if values.is_empty() {
        return Err(Error::invalid(format!("{what}: no rows")));
    }
    if !values.len().is_multiple_of(dim) {
        return Err(Error::invalid(format!(
            "{what}: {} values is not a multiple of dim={dim}",
            values.len()
        )));
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "{what}: non-finite coordinate in row {}",
            pos / dim
        )));
    }
    Ok(values.len() / dim)
}

fn rows_to_flat(rows: &[Vec<f64>], what: &str) -> Result<(Vec<f64>, usize)> {
    let first = rows
        .first()
        .ok_or_else(|| Error::invalid(format!("{what}: no rows")))?;
    let dim = first.len();
    let mut flat = Vec::with_capacity(rows.len() * dim);
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        flat.extend_from_slice(row);
    }
    Ok((flat, dim))
}

/// Immutable `n x d` collection of finite points.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    dim: usize,
}

impl Dataset {
    pub fn from_flat(values: Vec<f64>, dim: usize) -> Result<Self> {
        let n = check_rows(&values, dim, "dataset")?;
        Ok(Self { values, n, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (flat, dim) = rows_to_flat(rows, "dataset")?;
        Self::from_flat(flat, dim)
    }

    /// One-dimensional dataset from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Affine image `scale * x + shift` of every point.
    pub fn transformed(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        let values = self
            .points()
            .flat_map(|p| p.iter().zip(shift).map(|(x, s)| scale * x + s))
            .collect();
        Self::from_flat(values, self.dim)
    }

    /// Sub-dataset made of the given point indices, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.point(i));
        }
        Self::from_flat(values, self.dim)
    }
}

/// Ordered list of `k` centers in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    values: Vec<f64>,
    dim: usize,
}

impl CenterSet {
    pub fn from_flat(values: Vec<f64>, dim: usize) -> Result<Self> {
        check_rows(&values, dim, "center set")?;
        Ok(Self { values, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (flat, dim) = rows_to_flat(rows, "center set")?;
        Self::from_flat(flat, dim)
    }

    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }

    /// Centers taken from the given data points.
    pub fn from_points(data: &Dataset, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * data.dim());
        for &i in indices {
            values.extend_from_slice(data.point(i));
        }
        Self::from_flat(values, data.dim())
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.values.len() / self.dim
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn center(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub(crate) fn center_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.centers().map(<[f64]>::to_vec).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn push(&mut self, center: &[f64]) -> Result<()> {
        if center.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: center.len(),
            });
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("center set: non-finite coordinate"));
        }
        self.values.extend_from_slice(center);
        Ok(())
    }

    /// Copy of this set without the listed centers (order of the rest kept).
    pub(crate) fn without(&self, drop: &[usize]) -> Vec<f64> {
        self.centers()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .flat_map(|(_, c)| c.iter().copied())
            .collect()
    }

    pub fn transformed(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        let values = self
            .centers()
            .flat_map(|c| c.iter().zip(shift).map(|(x, s)| scale * x + s))
            .collect();
        Self::from_flat(values, self.dim)
    }

    pub(crate) fn check_compatible(&self, data: &Dataset) -> Result<()> {
        if self.dim != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                got: self.dim,
            });
        }
        Ok(())
    }
}
