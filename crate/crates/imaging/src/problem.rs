//! TV-type imaging problems in saddle-point form
//! `min_x max_y ⟨Dx, y⟩ + g(x) + ½‖Ax − b‖² − δ_{‖y‖₂,∞ ≤ μ}(y) − F(y)`.

use std::sync::Arc;

use qnsplit::linalg::{self, dot};
use qnsplit::ops::{
    BoxConstraint, CocoerciveMap, Convolution2d, DiagonalMap, LinearOperator, MonotoneOperator, PairwiseBall,
    QuadraticGradient, ZeroMap, ZeroOperator,
};
use qnsplit::pdhg::{build_pdhg_metric, PdhgMetric, SaddleProblem, StepSize};

use crate::error::{ImagingError, Result};
use crate::Image;

/// Slack allowed on the box and ball constraints when evaluating objectives.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Forward differences, interleaved as `(∂ₓ, ∂ᵧ)` per pixel; the difference
/// leaving the image is zero. `‖D‖² ≤ 8`.
pub fn build_gradient_op(rows: usize, cols: usize) -> Result<LinearOperator> {
    if rows == 0 || cols == 0 {
        return Err(ImagingError::InvalidImage(format!("empty shape {rows}x{cols}")));
    }
    Ok(LinearOperator::ForwardDifference2d { rows, cols })
}

/// A correlation kernel with odd side lengths, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Kernel {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.is_multiple_of(2) || cols.is_multiple_of(2) || data.len() != rows * cols {
            return Err(ImagingError::InvalidKernel(format!(
                "need odd sides and {rows}x{cols} entries, got {}",
                data.len()
            )));
        }
        Ok(Kernel { rows, cols, data })
    }

    pub fn delta() -> Self {
        Kernel {
            rows: 1,
            cols: 1,
            data: vec![1.0],
        }
    }

    fn validate_normalized(&self) -> Result<()> {
        if self.data.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ImagingError::InvalidKernel("entries must be finite and nonnegative".into()));
        }
        let total: f64 = self.data.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ImagingError::InvalidKernel(format!("entries sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Normalized `size × size` Gaussian with standard deviation `sigma` pixels.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel> {
    if size.is_multiple_of(2) || !(sigma > 0.0) {
        return Err(ImagingError::InvalidKernel(format!("size {size} must be odd and sigma {sigma} positive")));
    }
    let h = (size / 2) as f64;
    let mut data: Vec<f64> = (0..size * size)
        .map(|i| {
            let (r, c) = ((i / size) as f64 - h, (i % size) as f64 - h);
            (-(r * r + c * c) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = data.iter().sum();
    data.iter_mut().for_each(|v| *v /= total);
    Kernel::new(size, size, data)
}

/// Blur by correlation with half-sample symmetric boundary extension.
/// Every pixel receives and emits total weight one, so `‖A‖ ≤ 1`.
pub fn build_blur_op(kernel: &Kernel, rows: usize, cols: usize) -> Result<LinearOperator> {
    kernel.validate_normalized()?;
    let conv = Convolution2d::new(rows, cols, kernel.rows, kernel.cols, kernel.data.clone())?;
    Ok(LinearOperator::Convolution2d(conv))
}

/// Edge-adaptive weights `w = ½ + ½·exp(−|∇b|/scale)` per pixel, in `(½, 1]`.
pub fn edge_weights(b: &Image, scale: f64) -> Result<Vec<f64>> {
    if !(scale > 0.0) {
        return Err(ImagingError::InvalidParameter {
            name: "edge scale",
            reason: format!("must be positive, got {scale}"),
        });
    }
    let grad = build_gradient_op(b.rows, b.cols)?.apply(&b.pixels).map_err(ImagingError::Core)?;
    Ok(grad
        .chunks(2)
        .map(|g| (0.5 + 0.5 * (-linalg::norm(g) / scale).exp()).max(0.5))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `min_{0 ≤ x ≤ 255} ½‖Ax − b‖² + μ‖Dx‖₂,₁`.
    Deconvolution,
    /// TV blended with a weighted quadratic by infimal convolution.
    InfConv,
    /// The infimal-convolution model with `A = I`.
    Denoising,
}

impl Family {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "deconvolution" => Ok(Family::Deconvolution),
            "infconv" => Ok(Family::InfConv),
            "denoising" => Ok(Family::Denoising),
            other => Err(ImagingError::InvalidParameter {
                name: "family",
                reason: format!("unknown problem family `{other}`"),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Deconvolution => "deconvolution",
            Family::InfConv => "infconv",
            Family::Denoising => "denoising",
        }
    }
}

/// An assembled imaging problem. Iterates are stacked `z = (x, y)` with
/// `x ∈ ℝ^{MN}` and `y ∈ ℝ^{2MN}`.
#[derive(Debug, Clone)]
pub struct ImageProblem {
    pub family: Family,
    pub rows: usize,
    pub cols: usize,
    pub b: Vec<f64>,
    /// `None` is the identity.
    pub blur: Option<Arc<LinearOperator>>,
    pub d: Arc<LinearOperator>,
    pub mu: f64,
    /// Per-pixel weights `w`, used for both gradient components.
    pub weights: Option<Vec<f64>>,
    pub tau: f64,
    pub sigma: f64,
    /// Cocoercivity constant of `B` guaranteed for any admissible weights.
    pub beta: f64,
    pub saddle: SaddleProblem,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ImagingError::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

fn validate_image(b: &Image) -> Result<()> {
    if b.pixels.iter().any(|v| !(0.0..=255.0).contains(v)) {
        return Err(ImagingError::InvalidImage("pixel values must lie in [0, 255]".into()));
    }
    Ok(())
}

fn validate_weights(w: &[f64], pixels: usize) -> Result<()> {
    if w.len() != pixels {
        return Err(ImagingError::InvalidWeights(format!("expected {pixels} weights, got {}", w.len())));
    }
    if let Some(v) = w.iter().find(|v| !(0.5..=1.0).contains(*v)) {
        return Err(ImagingError::InvalidWeights(format!("weight {v} outside [1/2, 1]")));
    }
    Ok(())
}

struct Parts {
    blur: Option<Arc<LinearOperator>>,
    g: Arc<dyn MonotoneOperator>,
    grad_f: Arc<dyn CocoerciveMap>,
    weights: Option<Vec<f64>>,
    beta: f64,
}

fn assemble(family: Family, b: &Image, mu: f64, tau: f64, sigma: f64, parts: Parts) -> Result<ImageProblem> {
    validate_image(b)?;
    positive("mu", mu)?;
    positive("tau", tau)?;
    positive("sigma", sigma)?;
    let n = b.pixels.len();
    let d = Arc::new(build_gradient_op(b.rows, b.cols)?);
    let a = parts.blur.clone().unwrap_or_else(|| Arc::new(LinearOperator::identity(n)));
    let mut grad_g = QuadraticGradient::new(a, b.pixels.clone())?;
    if parts.blur.is_none() {
        grad_g = grad_g.with_strong_monotonicity(1.0);
    }
    let saddle = SaddleProblem::new(
        d.clone(),
        parts.g,
        Arc::new(PairwiseBall::new(mu)?),
        Arc::new(grad_g),
        parts.grad_f,
    )?;
    Ok(ImageProblem {
        family,
        rows: b.rows,
        cols: b.cols,
        b: b.pixels.clone(),
        blur: parts.blur,
        d,
        mu,
        weights: parts.weights,
        tau,
        sigma,
        beta: parts.beta,
        saddle,
    })
}

/// TV-ℓ₂ deconvolution with the box `[0, 255]`; `β = 1`.
pub fn build_deconvolution(b: &Image, mu: f64, tau: f64, sigma: f64, kernel: &Kernel) -> Result<ImageProblem> {
    let blur = Arc::new(build_blur_op(kernel, b.rows, b.cols)?);
    let parts = Parts {
        blur: Some(blur),
        g: Arc::new(BoxConstraint::new(0.0, 255.0)?),
        grad_f: Arc::new(ZeroMap { dim: 2 * b.pixels.len() }),
        weights: None,
        beta: 1.0,
    };
    assemble(Family::Deconvolution, b, mu, tau, sigma, parts)
}

fn infconv_parts(b: &Image, w: &[f64], blur: Option<Arc<LinearOperator>>) -> Result<Parts> {
    validate_weights(w, b.pixels.len())?;
    let inv_sq: Vec<f64> = w.iter().flat_map(|v| [1.0 / (v * v); 2]).collect();
    Ok(Parts {
        blur,
        g: Arc::new(ZeroOperator),
        grad_f: Arc::new(DiagonalMap::new(inv_sq)?),
        weights: Some(w.to_vec()),
        beta: 0.25,
    })
}

/// Infimal convolution of `μ‖·‖₂,₁` with `½‖W·‖²` as regularizer, which adds
/// `−½‖W⁻¹y‖²` to the saddle function; `β = 1/4`. A missing kernel means
/// no blur.
pub fn build_infconv(
    b: &Image,
    mu: f64,
    w: &[f64],
    tau: f64,
    sigma: f64,
    kernel: Option<&Kernel>,
) -> Result<ImageProblem> {
    let blur = kernel
        .map(|k| build_blur_op(k, b.rows, b.cols).map(Arc::new))
        .transpose()?;
    let parts = infconv_parts(b, w, blur)?;
    assemble(Family::InfConv, b, mu, tau, sigma, parts)
}

/// The infimal-convolution model with `A = I`: strongly convex in both the
/// primal (modulus 1) and the dual (modulus `min W⁻² ≥ 1`), with an explicit
/// dual objective.
pub fn build_denoising(b: &Image, mu: f64, w: &[f64], tau: f64, sigma: f64) -> Result<ImageProblem> {
    let parts = infconv_parts(b, w, None)?;
    assemble(Family::Denoising, b, mu, tau, sigma, parts)
}

impl ImageProblem {
    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn dim(&self) -> usize {
        3 * self.pixels()
    }

    /// The PDHG block metric for the problem's step sizes.
    pub fn metric(&self) -> Result<PdhgMetric> {
        Ok(build_pdhg_metric(
            StepSize::Scalar(self.tau),
            StepSize::Scalar(self.sigma),
            self.d.clone(),
        )?)
    }

    /// `(x, y) = (b, 0)`.
    pub fn initial_point(&self) -> Vec<f64> {
        let mut z = self.b.clone();
        z.resize(self.dim(), 0.0);
        z
    }

    pub fn split<'z>(&self, z: &'z [f64]) -> (&'z [f64], &'z [f64]) {
        z.split_at(self.pixels())
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut ax = match &self.blur {
            Some(a) => {
                let mut out = vec![0.0; x.len()];
                a.apply_into(x, &mut out);
                out
            }
            None => x.to_vec(),
        };
        ax.iter_mut().zip(&self.b).for_each(|(v, b)| *v -= b);
        ax
    }

    /// Fingerprint of everything that determines the solution.
    pub fn fingerprint(&self) -> u64 {
        let mut data = vec![
            self.rows as f64,
            self.cols as f64,
            self.mu,
            match self.family {
                Family::Deconvolution => 0.0,
                Family::InfConv => 1.0,
                Family::Denoising => 2.0,
            },
        ];
        data.extend_from_slice(&self.b);
        if let Some(w) = &self.weights {
            data.extend_from_slice(w);
        }
        if let Some(LinearOperator::Convolution2d(c)) = self.blur.as_deref() {
            data.push(c.kernel_rows as f64);
            data.extend_from_slice(&c.kernel);
        }
        linalg::fingerprint(&data)
    }
}

/// `inf_v μ‖v‖ + (c/2)‖p − v‖²`, the per-pixel regularizer of the
/// infimal-convolution model.
fn huber(p: &[f64], mu: f64, c: f64) -> f64 {
    let r = linalg::norm(p);
    if r * c <= mu {
        0.5 * c * r * r
    } else {
        mu * r - 0.5 * mu * mu / c
    }
}

/// Primal objective; `+∞` outside the box beyond [`FEASIBILITY_SLACK`].
pub fn primal_value(p: &ImageProblem, x: &[f64]) -> f64 {
    assert_eq!(x.len(), p.pixels(), "primal iterate has the wrong length");
    let r = p.residual(x);
    let data = 0.5 * dot(&r, &r);
    let mut dx = vec![0.0; 2 * p.pixels()];
    p.d.apply_into(x, &mut dx);
    match (&p.family, &p.weights) {
        (Family::Deconvolution, _) => {
            if x.iter().any(|v| *v < -FEASIBILITY_SLACK || *v > 255.0 + FEASIBILITY_SLACK) {
                return f64::INFINITY;
            }
            data + p.mu * dx.chunks(2).map(linalg::norm).sum::<f64>()
        }
        (_, Some(w)) => data + dx.chunks(2).zip(w).map(|(g, wi)| huber(g, p.mu, wi * wi)).sum::<f64>(),
        (_, None) => unreachable!("infimal-convolution problems always carry weights"),
    }
}

/// Dual objective `−½‖Dᵀy − b‖² + ½‖b‖² − ½‖W⁻¹y‖²` on `‖y‖₂,∞ ≤ μ`;
/// `None` outside the denoising family, `−∞` when infeasible.
pub fn dual_value(p: &ImageProblem, y: &[f64]) -> Option<f64> {
    if p.family != Family::Denoising {
        return None;
    }
    assert_eq!(y.len(), 2 * p.pixels(), "dual iterate has the wrong length");
    if y.chunks(2).any(|q| linalg::norm(q) > p.mu * (1.0 + FEASIBILITY_SLACK) + FEASIBILITY_SLACK) {
        return Some(f64::NEG_INFINITY);
    }
    let w = p.weights.as_ref()?;
    let mut dty = vec![0.0; p.pixels()];
    p.d.apply_adjoint_into(y, &mut dty);
    // ½‖b‖² − ½‖Dᵀy − b‖² expanded, so the large ½‖b‖² never cancels.
    let fit: f64 = dty.iter().zip(&p.b).map(|(a, b)| a * b - 0.5 * a * a).sum();
    let reg: f64 = y.chunks(2).zip(w).map(|(q, wi)| dot(q, q) / (wi * wi)).sum();
    Some(fit - 0.5 * reg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub primal: f64,
    pub dual: Option<f64>,
    /// `primal − reference` when a reference optimum is known.
    pub primal_gap: Option<f64>,
    /// `primal − dual` for the denoising family.
    pub pd_gap: Option<f64>,
}

pub fn pd_gap(p: &ImageProblem, x: &[f64], y: &[f64], reference: Option<f64>) -> GapReport {
    let primal = primal_value(p, x);
    let dual = dual_value(p, y);
    GapReport {
        primal,
        dual,
        primal_gap: reference.map(|r| primal - r),
        pd_gap: dual.map(|d| primal - d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(rows: usize, cols: usize, v: f64) -> Image {
        Image::new(rows, cols, vec![v; rows * cols]).unwrap()
    }

    #[test]
    fn gradient_examples() {
        let d = build_gradient_op(3, 4).unwrap();
        assert!(d.apply(&[7.0; 12]).unwrap().iter().all(|v| *v == 0.0));
        let d = build_gradient_op(1, 2).unwrap();
        assert_eq!(d.apply(&[2.0, 5.0]).unwrap(), vec![3.0, 0.0, 0.0, 0.0]);
        assert!(build_gradient_op(0, 3).is_err());
    }

    #[test]
    fn blur_examples() {
        let img = Image::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let id = build_blur_op(&Kernel::delta(), 2, 3).unwrap();
        assert_eq!(id.apply(&img.pixels).unwrap(), img.pixels);
        let k = gaussian_kernel(5, 1.5).unwrap();
        let a = build_blur_op(&k, 6, 7).unwrap();
        for v in a.apply(&[42.0; 42]).unwrap() {
            assert!((v - 42.0).abs() < 1e-12);
        }
        assert!(a.norm_bound() <= 1.0 + 1e-12);
        let bad = Kernel::new(3, 1, vec![0.5, 0.5, 0.5]).unwrap();
        assert!(matches!(build_blur_op(&bad, 4, 4), Err(ImagingError::InvalidKernel(_))));
        assert!(Kernel::new(2, 1, vec![0.5, 0.5]).is_err());
        let negative = Kernel::new(3, 1, vec![-0.5, 1.0, 0.5]).unwrap();
        assert!(build_blur_op(&negative, 4, 4).is_err());
    }

    #[test]
    fn builders_validate() {
        let b = flat(4, 4, 100.0);
        let w = vec![0.75; 16];
        assert!(build_deconvolution(&b, 0.0, 0.1, 0.1, &Kernel::delta()).is_err());
        assert!(build_denoising(&b, 0.1, &[0.4; 16], 0.1, 0.1).is_err());
        assert!(build_denoising(&b, 0.1, &[0.75; 15], 0.1, 0.1).is_err());
        assert!(build_denoising(&flat(2, 2, 300.0), 0.1, &[0.75; 4], 0.1, 0.1).is_err());
        let p = build_infconv(&b, 0.01, &w, 0.1, 0.1, None).unwrap();
        assert_eq!(p.beta, 0.25);
        assert!(p.saddle.beta() >= 0.25);
        let p = build_deconvolution(&b, 0.001, 0.09, 0.9, &gaussian_kernel(5, 1.5).unwrap()).unwrap();
        assert_eq!(p.beta, 1.0);
        assert!(p.saddle.beta() >= 1.0 - 1e-12);
        assert_eq!(p.dim(), 48);
        assert!(p.metric().is_ok());
    }

    #[test]
    fn zero_weight_gradient_at_origin() {
        let p = build_infconv(&flat(3, 3, 10.0), 0.01, &[1.0; 9], 0.1, 0.1, None).unwrap();
        assert!(p.saddle.grad_f.apply(&[0.0; 18]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn objective_examples() {
        let b = Image::new(2, 2, vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        let p = build_deconvolution(&b, 0.5, 0.1, 0.1, &Kernel::delta()).unwrap();
        assert!(primal_value(&p, &b.pixels).is_finite());
        assert_eq!(primal_value(&p, &[256.0, 20.0, 30.0, 40.0]), f64::INFINITY);
        assert_eq!(primal_value(&p, &[-1.0, 20.0, 30.0, 40.0]), f64::INFINITY);
        // Differences: (10, 20) at the corner, 20 down, 10 across, 0.
        let tv = (100.0f64 + 400.0).sqrt() + 20.0 + 10.0;
        assert!((primal_value(&p, &b.pixels) - 0.5 * tv).abs() < 1e-12);
        assert!(dual_value(&p, &[0.0; 8]).is_none());
    }

    #[test]
    fn zero_data_has_zero_gap() {
        let b = flat(3, 3, 0.0);
        let p = build_denoising(&b, 0.1, &[1.0; 9], 0.1, 0.1).unwrap();
        let r = pd_gap(&p, &[0.0; 9], &[0.0; 18], Some(0.0));
        assert_eq!((r.primal, r.dual, r.pd_gap, r.primal_gap), (0.0, Some(0.0), Some(0.0), Some(0.0)));
        assert_eq!(dual_value(&p, &[1.0; 18]), Some(f64::NEG_INFINITY));
    }

    #[test]
    fn huber_matches_direct_minimization() {
        let (mu, c) = (0.3, 0.8);
        for p in [[0.1, 0.05], [1.0, -2.0], [0.0, 0.0]] {
            let mut best = f64::INFINITY;
            for i in -400..=400 {
                for j in -400..=400 {
                    let v = [i as f64 * 0.006, j as f64 * 0.006];
                    let d = [p[0] - v[0], p[1] - v[1]];
                    best = best.min(mu * linalg::norm(&v) + 0.5 * c * dot(&d, &d));
                }
            }
            assert!((huber(&p, mu, c) - best).abs() < 1e-4, "{p:?}");
        }
    }
}
