use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A row-major collection of points in R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Points {
    data: Vec<f64>,
    dim: usize,
}

impl Points {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("point dimension must be at least 1".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "buffer of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, dim)
    }

    /// Builds points from column vectors of equal length.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let dim = columns.len();
        let len = columns.first().map(|c| c.as_ref().len()).unwrap_or(0);
        for c in columns {
            if c.as_ref().len() != len {
                return Err(Error::SampleSizeMismatch { expected: len, actual: c.as_ref().len() });
            }
        }
        let mut data = Vec::with_capacity(len * dim);
        for i in 0..len {
            data.extend(columns.iter().map(|c| c.as_ref()[i]));
        }
        Self::new(data, dim)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument("empty column selection".into()));
        }
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.dim) {
            return Err(Error::InvalidArgument(format!(
                "column index {bad} out of range for dimension {}",
                self.dim
            )));
        }
        let mut data = Vec::with_capacity(self.len() * columns.len());
        for row in self.rows() {
            data.extend(columns.iter().map(|&c| row[c]));
        }
        Self::new(data, columns.len())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.dim);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Self { data, dim: self.dim }
    }
}

/// A raw sample of `m` observations of `d` real features.
///
/// Construction rejects non-finite entries and samples with fewer than two
/// rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    points: Points,
    column_names: Option<Vec<String>>,
}

impl SampleMatrix {
    pub fn new(points: Points) -> Result<Self> {
        Self::with_names(points, None)
    }

    pub fn with_names(points: Points, column_names: Option<Vec<String>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewObservations { required: 2, actual: points.len() });
        }
        if let Some(pos) = points.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / points.dim(), column: pos % points.dim() });
        }
        if let Some(names) = &column_names {
            if names.len() != points.dim() {
                return Err(Error::DimensionMismatch { expected: points.dim(), actual: names.len() });
            }
        }
        Ok(Self { points, column_names })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Points::from_rows(rows)?)
    }

    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        Self::new(Points::from_columns(columns)?)
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn d(&self) -> usize {
        self.points.dim()
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn into_points(self) -> Points {
        self.points
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.points.column(j)
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Column label, falling back to `x{j}` when the sample is unnamed.
    pub fn column_name(&self, j: usize) -> String {
        match &self.column_names {
            Some(names) => names[j].clone(),
            None => format!("x{j}"),
        }
    }

    /// Submatrix with the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        let points = self.points.select_columns(columns)?;
        let names = self
            .column_names
            .as_ref()
            .map(|n| columns.iter().map(|&c| n[c].clone()).collect());
        Self::with_names(points, names)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::with_names(self.points.select_rows(rows), self.column_names.clone())
    }

    /// Applies `f` to every entry of column `j`, re-validating finiteness.
    pub fn map_column(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut points = self.points.clone();
        for i in 0..points.len() {
            let v = points.get(i, j);
            points.set(i, j, f(v));
        }
        Self::with_names(points, self.column_names.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_short_samples() {
        let err = SampleMatrix::from_rows(&[[1.0, f64::NAN], [2.0, 3.0]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, column: 1 }));
        let err = SampleMatrix::from_rows(&[[1.0, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::TooFewObservations { .. }));
    }

    #[test]
    fn columns_and_rows_agree() {
        let s = SampleMatrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(s.m(), 3);
        assert_eq!(s.d(), 2);
        assert_eq!(s.points().row(1), &[2.0, 5.0]);
        assert_eq!(s.column(1), vec![4.0, 5.0, 6.0]);
        let t = s.select_columns(&[1, 0]).unwrap();
        assert_eq!(t.points().row(2), &[6.0, 3.0]);
    }
}
