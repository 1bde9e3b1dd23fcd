use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// A bounded linear map between flat real vectors.
///
/// Every kind supplies its adjoint and a declared upper bound on its operator
/// norm. Images are stored row-major (`p = i * cols + j`); gradient fields
/// interleave the two components per pixel (`[dx_0, dy_0, dx_1, dy_1, ...]`).
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    ScaledIdentity { dim: usize, scale: f64 },
    Dense(DMatrix<f64>),
    Diagonal(Vec<f64>),
    ForwardDifference2d { rows: usize, cols: usize },
    Convolution2d(Convolution2d),
    Block(BlockOperator),
}

impl LinearOperator {
    pub fn identity(dim: usize) -> Self {
        LinearOperator::ScaledIdentity { dim, scale: 1.0 }
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> Self {
        LinearOperator::Dense(DMatrix::zeros(out_dim, in_dim))
    }

    pub fn in_dim(&self) -> usize {
        match self {
            LinearOperator::ScaledIdentity { dim, .. } => *dim,
            LinearOperator::Dense(m) => m.ncols(),
            LinearOperator::Diagonal(d) => d.len(),
            LinearOperator::ForwardDifference2d { rows, cols } => rows * cols,
            LinearOperator::Convolution2d(c) => c.rows * c.cols,
            LinearOperator::Block(b) => b.col_dims.iter().sum(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            LinearOperator::ForwardDifference2d { rows, cols } => 2 * rows * cols,
            LinearOperator::Dense(m) => m.nrows(),
            LinearOperator::Block(b) => b.row_dims.iter().sum(),
            _ => self.in_dim(),
        }
    }

    /// Returns `Lx`, checking the input dimension.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("linear operator input", self.in_dim(), x.len())?;
        let mut out = vec![0.0; self.out_dim()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Returns `Lᵀy`, checking the input dimension.
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim("linear operator adjoint input", self.out_dim(), y.len())?;
        let mut out = vec![0.0; self.in_dim()];
        self.apply_adjoint_into(y, &mut out);
        Ok(out)
    }

    /// Overwrites `out` with `Lx`. Dimensions are the caller's responsibility.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim());
        debug_assert_eq!(out.len(), self.out_dim());
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = scale * v;
                }
            }
            LinearOperator::Dense(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = m.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            LinearOperator::Diagonal(d) => {
                for ((o, v), di) in out.iter_mut().zip(x).zip(d) {
                    *o = di * v;
                }
            }
            LinearOperator::ForwardDifference2d { rows, cols } => {
                forward_difference(*rows, *cols, x, out)
            }
            LinearOperator::Convolution2d(c) => c.apply_into(x, out),
            LinearOperator::Block(b) => b.apply_into(x, out, false),
        }
    }

    /// Overwrites `out` with `Lᵀy`.
    pub fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.out_dim());
        debug_assert_eq!(out.len(), self.in_dim());
        match self {
            LinearOperator::ScaledIdentity { .. } | LinearOperator::Diagonal(_) => {
                self.apply_into(y, out)
            }
            LinearOperator::Dense(m) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for (i, yi) in y.iter().enumerate() {
                    for (o, a) in out.iter_mut().zip(m.row(i).iter()) {
                        *o += a * yi;
                    }
                }
            }
            LinearOperator::ForwardDifference2d { rows, cols } => {
                forward_difference_adjoint(*rows, *cols, y, out)
            }
            LinearOperator::Convolution2d(c) => c.apply_adjoint_into(y, out),
            LinearOperator::Block(b) => b.apply_into(y, out, true),
        }
    }

    /// Declared upper bound on `‖L‖₂`.
    pub fn norm_bound(&self) -> f64 {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => scale.abs(),
            LinearOperator::Dense(m) => m.norm(),
            LinearOperator::Diagonal(d) => d.iter().fold(0.0, |a, v| a.max(v.abs())),
            // ‖D‖² ≤ 8 for forward differences on a grid.
            LinearOperator::ForwardDifference2d { .. } => 8f64.sqrt(),
            LinearOperator::Convolution2d(c) => c.norm_bound,
            LinearOperator::Block(b) => b.norm_bound(),
        }
    }

    /// Dense matrix of the operator; intended for small dimensions.
    pub fn to_dense(&self) -> DMatrix<f64> {
        linalg::assemble_dense(self.in_dim(), self.out_dim(), |x, y| self.apply_into(x, y))
    }
}

fn forward_difference(rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..rows {
        for j in 0..cols {
            let p = i * cols + j;
            out[2 * p] = if j + 1 < cols { x[p + 1] - x[p] } else { 0.0 };
            out[2 * p + 1] = if i + 1 < rows { x[p + cols] - x[p] } else { 0.0 };
        }
    }
}

fn forward_difference_adjoint(rows: usize, cols: usize, y: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in 0..rows {
        for j in 0..cols {
            let p = i * cols + j;
            if j + 1 < cols {
                let g = y[2 * p];
                out[p + 1] += g;
                out[p] -= g;
            }
            if i + 1 < rows {
                let g = y[2 * p + 1];
                out[p + cols] += g;
                out[p] -= g;
            }
        }
    }
}

/// Half-sample symmetric reflection of an out-of-range index into `0..n`.
fn reflect(idx: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = idx.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

/// 2-D correlation of a row-major image with a small kernel.
///
/// Boundaries use half-sample symmetric reflection, so constant images are
/// preserved by any kernel whose weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Convolution2d {
    pub rows: usize,
    pub cols: usize,
    pub kernel_rows: usize,
    pub kernel_cols: usize,
    pub kernel: Vec<f64>,
    norm_bound: f64,
}

impl Convolution2d {
    pub fn new(
        rows: usize,
        cols: usize,
        kernel_rows: usize,
        kernel_cols: usize,
        kernel: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("image shape", "rows and cols must be positive"));
        }
        if kernel_rows.is_multiple_of(2) || kernel_cols.is_multiple_of(2) {
            return Err(Error::invalid("kernel", "kernel sides must be odd"));
        }
        check_dim("convolution kernel", kernel_rows * kernel_cols, kernel.len())?;
        linalg::ensure_finite(&kernel)?;
        let mut conv = Convolution2d {
            rows,
            cols,
            kernel_rows,
            kernel_cols,
            kernel,
            norm_bound: 0.0,
        };
        conv.norm_bound = conv.schur_bound();
        Ok(conv)
    }

    /// `√(max row sum · max column sum)` of the absolute matrix entries,
    /// an upper bound on the spectral norm.
    fn schur_bound(&self) -> f64 {
        let n = self.rows * self.cols;
        let abs = Convolution2d {
            kernel: self.kernel.iter().map(|k| k.abs()).collect(),
            ..self.clone()
        };
        let ones = vec![1.0; n];
        let mut rs = vec![0.0; n];
        let mut cs = vec![0.0; n];
        abs.apply_into(&ones, &mut rs);
        abs.apply_adjoint_into(&ones, &mut cs);
        let rmax = rs.iter().fold(0.0f64, |a, &v| a.max(v));
        let cmax = cs.iter().fold(0.0f64, |a, &v| a.max(v));
        (rmax * cmax).sqrt()
    }

    fn taps(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let cr = (self.kernel_rows / 2) as isize;
        let cc = (self.kernel_cols / 2) as isize;
        let kc = self.kernel_cols;
        self.kernel
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(move |(t, &w)| ((t / kc) as isize - cr, (t % kc) as isize - cc, w))
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (di, dj, w) in self.taps() {
            for i in 0..self.rows {
                let si = reflect(i as isize + di, self.rows);
                let src = &x[si * self.cols..(si + 1) * self.cols];
                let dst = &mut out[i * self.cols..(i + 1) * self.cols];
                for (j, o) in dst.iter_mut().enumerate() {
                    *o += w * src[reflect(j as isize + dj, self.cols)];
                }
            }
        }
    }

    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (di, dj, w) in self.taps() {
            for i in 0..self.rows {
                let si = reflect(i as isize + di, self.rows);
                for j in 0..self.cols {
                    let sj = reflect(j as isize + dj, self.cols);
                    out[si * self.cols + sj] += w * y[i * self.cols + j];
                }
            }
        }
    }
}

/// Block matrix of linear operators; `None` entries are zero blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    blocks: Vec<Vec<Option<LinearOperator>>>,
}

impl BlockOperator {
    pub fn new(
        row_dims: Vec<usize>,
        col_dims: Vec<usize>,
        blocks: Vec<Vec<Option<LinearOperator>>>,
    ) -> Result<Self> {
        check_dim("block rows", row_dims.len(), blocks.len())?;
        for (i, row) in blocks.iter().enumerate() {
            check_dim("block columns", col_dims.len(), row.len())?;
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    check_dim("block input", col_dims[j], b.in_dim())?;
                    check_dim("block output", row_dims[i], b.out_dim())?;
                }
            }
        }
        Ok(BlockOperator {
            row_dims,
            col_dims,
            blocks,
        })
    }

    pub fn diagonal(ops: Vec<LinearOperator>) -> Self {
        let n = ops.len();
        let row_dims = ops.iter().map(|o| o.out_dim()).collect();
        let col_dims = ops.iter().map(|o| o.in_dim()).collect();
        let mut blocks: Vec<Vec<Option<LinearOperator>>> =
            (0..n).map(|_| (0..n).map(|_| None).collect()).collect();
        for (i, op) in ops.into_iter().enumerate() {
            blocks[i][i] = Some(op);
        }
        BlockOperator {
            row_dims,
            col_dims,
            blocks,
        }
    }

    fn offsets(dims: &[usize]) -> Vec<usize> {
        let mut acc = 0;
        dims.iter()
            .map(|d| {
                let o = acc;
                acc += d;
                o
            })
            .collect()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64], adjoint: bool) {
        let (in_dims, out_dims) = if adjoint {
            (&self.row_dims, &self.col_dims)
        } else {
            (&self.col_dims, &self.row_dims)
        };
        let in_off = Self::offsets(in_dims);
        let out_off = Self::offsets(out_dims);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, row) in self.blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                let Some(b) = b else { continue };
                let (src, dst) = if adjoint { (i, j) } else { (j, i) };
                let xs = &x[in_off[src]..in_off[src] + in_dims[src]];
                let mut tmp = vec![0.0; out_dims[dst]];
                if adjoint {
                    b.apply_adjoint_into(xs, &mut tmp);
                } else {
                    b.apply_into(xs, &mut tmp);
                }
                linalg::axpy(1.0, &tmp, &mut out[out_off[dst]..out_off[dst] + out_dims[dst]]);
            }
        }
    }

    fn norm_bound(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .flatten()
            .map(|b| b.norm_bound().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_dense_actions() {
        let id = LinearOperator::identity(3);
        assert_eq!(id.apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let d = LinearOperator::Dense(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
        assert_eq!(d.apply(&[1.0, 1.0]).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn dimension_mismatch_names_both_dims() {
        let id = LinearOperator::identity(3);
        assert_eq!(
            id.apply(&[1.0]),
            Err(Error::DimensionMismatch {
                context: "linear operator input",
                expected: 3,
                got: 1
            })
        );
    }

    #[test]
    fn gradient_of_constant_image_vanishes() {
        let d = LinearOperator::ForwardDifference2d { rows: 2, cols: 2 };
        assert_eq!(d.apply(&[7.0; 4]).unwrap(), vec![0.0; 8]);
    }

    #[test]
    fn gradient_stencil_on_one_by_two() {
        let d = LinearOperator::ForwardDifference2d { rows: 1, cols: 2 };
        assert_eq!(d.apply(&[3.0, 5.0]).unwrap(), vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn reflection_is_half_sample_symmetric() {
        assert_eq!(reflect(-1, 4), 0);
        assert_eq!(reflect(-2, 4), 1);
        assert_eq!(reflect(4, 4), 3);
        assert_eq!(reflect(5, 4), 2);
        assert_eq!(reflect(2, 4), 2);
        assert_eq!(reflect(-3, 1), 0);
    }

    #[test]
    fn delta_kernel_is_identity() {
        let c = Convolution2d::new(3, 4, 3, 3, vec![0., 0., 0., 0., 1., 0., 0., 0., 0.]).unwrap();
        let op = LinearOperator::Convolution2d(c);
        let x: Vec<f64> = (0..12).map(|v| v as f64).collect();
        assert_eq!(op.apply(&x).unwrap(), x);
        assert!((op.norm_bound() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_diagonal_stacks_actions() {
        let b = BlockOperator::diagonal(vec![
            LinearOperator::ScaledIdentity { dim: 1, scale: 2.0 },
            LinearOperator::Diagonal(vec![3.0, 4.0]),
        ]);
        let op = LinearOperator::Block(b);
        assert_eq!(op.apply(&[1.0, 1.0, 1.0]).unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(op.apply_adjoint(&[1.0, 1.0, 1.0]).unwrap(), vec![2.0, 3.0, 4.0]);
    }
}
