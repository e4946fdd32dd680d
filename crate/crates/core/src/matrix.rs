//! Dense row-major matrices used for writing probabilities and their
//! transposed 0/1 targets.

use crate::error::{Error, Result};
use crate::path::GSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from nested rows; a ragged row is reported by its 1-based index.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::parse(
                    None,
                    format!("ragged matrix: row {} has {} entries, expected {cols}", i + 1, row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// 0-based row slice.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// 0-based access.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.row_iter().map(<[f64]>::to_vec).collect()
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        check_same_shape(self, other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub(crate) fn check_same_shape(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::dimension(format!(
            "matrices are {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

/// Expected writing probabilities: rows are target positions, columns source positions.
#[derive(Debug, Clone, PartialEq)]
pub struct WritingProbabilityMatrix(Matrix);

impl WritingProbabilityMatrix {
    /// Entries must be finite and non-negative and every row needs a positive entry.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows == 0 || m.cols == 0 {
            return Err(Error::invalid("writing probability matrix", "empty matrix"));
        }
        for (i, row) in m.row_iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::invalid(
                    "writing probability matrix",
                    format!("entry ({}, {}) = {} is not a finite non-negative value", i + 1, j + 1, row[j]),
                ));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::invalid(
                    "writing probability matrix",
                    format!("row {} has no positive entry", i + 1),
                ));
            }
        }
        Ok(WritingProbabilityMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Target length `I`.
    pub fn target_len(&self) -> usize {
        self.0.rows
    }

    /// Source length `J`.
    pub fn source_len(&self) -> usize {
        self.0.cols
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// 0/1 matrix with exactly one 1 per row, at monotone non-decreasing columns.
///
/// Stored as the 1-based column of each row's 1, which is the g-sequence of
/// the path it encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaMatrix {
    ones: GSequence,
    cols: usize,
}

impl GammaMatrix {
    pub fn from_g(g: GSequence, cols: usize) -> Result<Self> {
        g.check_source_len(cols)?;
        Ok(GammaMatrix { ones: g, cols })
    }

    pub fn rows(&self) -> usize {
        self.ones.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 1-based column of the 1 in each row.
    pub fn write_columns(&self) -> &GSequence {
        &self.ones
    }

    /// 1-based `(row, col)` coordinates of every 1.
    pub fn ones(&self) -> Vec<(usize, usize)> {
        self.ones
            .values()
            .iter()
            .enumerate()
            .map(|(r, &c)| (r + 1, c))
            .collect()
    }

    /// 1-based lookup.
    pub fn get(&self, r: usize, c: usize) -> u8 {
        u8::from(self.ones.at(r) == c)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows(), self.cols);
        for (r, &c) in self.ones.values().iter().enumerate() {
            m.set(r, c - 1, 1.0);
        }
        m
    }
}
