//! Imaging experiments for the quasi-Newton splitting solvers: TV-ℓ₂
//! deconvolution, infimal-convolution deconvolution and denoising, with
//! synthetic phantoms, PGM input/output and exact objective evaluation.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod pgm;
pub mod phantom;
pub mod problem;

pub use error::{ImagingError, Result};
pub use phantom::{add_gaussian_noise, Phantom};
pub use problem::{
    build_blur_op, build_deconvolution, build_denoising, build_gradient_op, build_infconv, dual_value, edge_weights,
    gaussian_kernel, pd_gap, primal_value, Family, GapReport, ImageProblem, Kernel,
};

/// A grayscale image, row-major, nominally on the `[0, 255]` scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || pixels.len() != rows * cols {
            return Err(ImagingError::InvalidImage(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(ImagingError::InvalidImage("non-finite pixel".into()));
        }
        Ok(Image { rows, cols, pixels })
    }
}
