//! Dense row-major matrices, block partitioning and reassembly.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                axis: "entries",
                detail: format!("{} entries for a {rows}x{cols} matrix", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
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

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.cols + col]
    }

    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut T {
        &mut self.data[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Copy of the `rows x cols` window starting at (`row0`, `col0`).
    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        assert!(row0 + rows <= self.rows && col0 + cols <= self.cols);
        Self::from_fn(rows, cols, |r, c| self.get(row0 + r, col0 + c).clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, T::zero())
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Self, factor: &T) -> Result<()> {
        check_same_shape(self, other)?;
        for (dst, src) in self.data.iter_mut().zip(&other.data) {
            dst.mul_add_assign(src, factor);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(other, &T::one())?;
        Ok(out)
    }

    /// `selfᵀ · other`; both operands share their row count.
    pub fn transpose_mul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension {
                axis: "inner",
                detail: format!("left has {} rows, right has {} rows", self.rows, other.rows),
            });
        }
        let mut out = Self::zeros(self.cols, other.cols);
        // k-outer keeps both operand rows contiguous.
        for k in 0..self.rows {
            let left = &self.data[k * self.cols..(k + 1) * self.cols];
            let right = &other.data[k * other.cols..(k + 1) * other.cols];
            for (i, a) in left.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (dst, b) in row.iter_mut().zip(right) {
                    dst.mul_add_assign(a, b);
                }
            }
        }
        Ok(out)
    }
}

impl Matrix<i64> {
    pub fn max_abs(&self) -> u64 {
        self.data.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn to_scalar<T: Scalar>(&self) -> Matrix<T> {
        self.map(|&v| T::from_i64(v))
    }

    /// Exact `selfᵀ · other` in 128-bit accumulators.
    pub fn transpose_mul_i128(&self, other: &Self) -> Result<Matrix<i128>> {
        if self.rows != other.rows {
            return Err(Error::Dimension {
                axis: "inner",
                detail: format!("left has {} rows, right has {} rows", self.rows, other.rows),
            });
        }
        let mut out = Matrix::filled(self.cols, other.cols, 0i128);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = *self.get(k, i) as i128;
                for j in 0..other.cols {
                    let acc = out.get_mut(i, j);
                    *acc = acc
                        .checked_add(a * *other.get(k, j) as i128)
                        .ok_or_else(|| Error::Overflow("128-bit product accumulator".into()))?;
                }
            }
        }
        Ok(out)
    }
}

fn check_same_shape<A, B>(a: &Matrix<A>, b: &Matrix<B>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            axis: "shape",
            detail: format!("{:?} vs {:?}", a.shape(), b.shape()),
        });
    }
    Ok(())
}

/// A matrix cut into a `row_blocks x col_blocks` grid of equal tiles.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedMatrix<T> {
    source_rows: usize,
    source_cols: usize,
    row_blocks: usize,
    col_blocks: usize,
    blocks: Vec<Matrix<T>>,
}

impl<T> PartitionedMatrix<T> {
    pub fn row_blocks(&self) -> usize {
        self.row_blocks
    }

    pub fn col_blocks(&self) -> usize {
        self.col_blocks
    }

    pub fn block_rows(&self) -> usize {
        self.source_rows / self.row_blocks
    }

    pub fn block_cols(&self) -> usize {
        self.source_cols / self.col_blocks
    }

    pub fn source_shape(&self) -> (usize, usize) {
        (self.source_rows, self.source_cols)
    }

    pub fn block(&self, row_block: usize, col_block: usize) -> &Matrix<T> {
        &self.blocks[row_block * self.col_blocks + col_block]
    }

    /// Blocks as a grid of rows, suitable for [`assemble`].
    pub fn into_grid(self) -> Vec<Vec<Matrix<T>>> {
        let mut it = self.blocks.into_iter();
        (0..self.row_blocks)
            .map(|_| it.by_ref().take(self.col_blocks).collect())
            .collect()
    }
}

pub fn partition<T: Clone>(m: &Matrix<T>, row_blocks: usize, col_blocks: usize) -> Result<PartitionedMatrix<T>> {
    if row_blocks == 0 || !m.rows.is_multiple_of(row_blocks) {
        return Err(Error::Dimension {
            axis: "rows",
            detail: format!("{row_blocks} row blocks do not divide {} rows", m.rows),
        });
    }
    if col_blocks == 0 || !m.cols.is_multiple_of(col_blocks) {
        return Err(Error::Dimension {
            axis: "cols",
            detail: format!("{col_blocks} column blocks do not divide {} columns", m.cols),
        });
    }
    let (br, bc) = (m.rows / row_blocks, m.cols / col_blocks);
    let mut blocks = Vec::with_capacity(row_blocks * col_blocks);
    for i in 0..row_blocks {
        for j in 0..col_blocks {
            blocks.push(m.submatrix(i * br, j * bc, br, bc));
        }
    }
    Ok(PartitionedMatrix {
        source_rows: m.rows,
        source_cols: m.cols,
        row_blocks,
        col_blocks,
        blocks,
    })
}

pub fn assemble<T: Clone>(grid: &[Vec<Matrix<T>>]) -> Result<Matrix<T>> {
    let ragged = |detail: String| Error::Dimension { axis: "grid", detail };
    let Some(first_row) = grid.first() else {
        return Err(ragged("empty grid".into()));
    };
    let width = first_row.len();
    if width == 0 {
        return Err(ragged("empty grid row".into()));
    }
    let col_widths: Vec<usize> = first_row.iter().map(Matrix::cols).collect();
    let mut heights = Vec::with_capacity(grid.len());
    for (gi, row) in grid.iter().enumerate() {
        if row.len() != width {
            return Err(ragged(format!(
                "grid row {gi} has {} blocks, expected {width}",
                row.len()
            )));
        }
        let h = row[0].rows();
        for (gj, b) in row.iter().enumerate() {
            if b.rows() != h {
                return Err(ragged(format!(
                    "block ({gi}, {gj}) has {} rows, expected {h}",
                    b.rows()
                )));
            }
            if b.cols() != col_widths[gj] {
                return Err(ragged(format!(
                    "block ({gi}, {gj}) has {} cols, expected {}",
                    b.cols(),
                    col_widths[gj]
                )));
            }
        }
        heights.push(h);
    }
    let rows: usize = heights.iter().sum();
    let cols: usize = col_widths.iter().sum();
    let mut data = Vec::with_capacity(rows * cols);
    for (row, &h) in grid.iter().zip(&heights) {
        for r in 0..h {
            for b in row {
                data.extend_from_slice(&b.as_slice()[r * b.cols()..(r + 1) * b.cols()]);
            }
        }
    }
    Matrix::from_vec(rows, cols, data)
}

/// `v · max|A| · max|B| + 1`, strictly above every entry of `AᵀB` and of any
/// partial sum of its inner products.
pub fn conservative_bound(a: &Matrix<i64>, b: &Matrix<i64>) -> Result<u64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if a.rows() != b.rows() {
        return Err(Error::Dimension {
            axis: "rows",
            detail: format!("A has {} rows, B has {}", a.rows(), b.rows()),
        });
    }
    (a.rows() as u64)
        .checked_mul(a.max_abs())
        .and_then(|x| x.checked_mul(b.max_abs()))
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Error::Overflow("conservative bound exceeds u64".into()))
}

/// `‖C − Ĉ‖_F / ‖C‖_F`.
pub fn frobenius_rel_error(reference: &Matrix<i64>, estimate: &Matrix<i64>) -> Result<f64> {
    check_same_shape(reference, estimate)?;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (&c, &h) in reference.as_slice().iter().zip(estimate.as_slice()) {
        let d = c as i128 - h as i128;
        num += (d as f64) * (d as f64);
        den += (c as f64) * (c as f64);
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt())
}
