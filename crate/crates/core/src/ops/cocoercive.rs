use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::ops::LinearOperator;

/// A single-valued β-cocoercive map `B`.
pub trait CocoerciveMap: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    /// Cocoercivity constant: `⟨x−y, Bx−By⟩ ≥ β‖Bx−By‖²`.
    fn beta(&self) -> f64;

    /// Strong monotonicity modulus.
    fn strong_monotonicity(&self) -> f64 {
        0.0
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }
}

/// `B ≡ 0`. Any β works; `f64::INFINITY` is reported.
#[derive(Debug, Clone, Copy)]
pub struct ZeroMap {
    pub dim: usize,
}

impl CocoerciveMap for ZeroMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }

    fn beta(&self) -> f64 {
        f64::INFINITY
    }
}

/// `B(x) = w ∘ x` for a positive weight vector, the gradient of `½Σ wᵢxᵢ²`.
#[derive(Debug, Clone)]
pub struct DiagonalMap {
    weights: Vec<f64>,
}

impl DiagonalMap {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        linalg::ensure_finite(&weights)?;
        if weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::invalid("weights", "must be positive"));
        }
        Ok(DiagonalMap { weights })
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        Self::new(vec![scale; dim])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl CocoerciveMap for DiagonalMap {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, v), w) in out.iter_mut().zip(x).zip(&self.weights) {
            *o = w * v;
        }
    }

    fn beta(&self) -> f64 {
        1.0 / self.weights.iter().fold(0.0f64, |a, &w| a.max(w))
    }

    fn strong_monotonicity(&self) -> f64 {
        self.weights.iter().fold(f64::INFINITY, |a, &w| a.min(w))
    }
}

/// `B(x) = Qx + c` for symmetric positive semidefinite `Q`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    q: DMatrix<f64>,
    c: Vec<f64>,
    beta: f64,
    gamma: f64,
}

impl AffineMap {
    pub fn new(q: DMatrix<f64>, c: Vec<f64>) -> Result<Self> {
        check_dim("affine map rows", q.ncols(), q.nrows())?;
        check_dim("affine map offset", q.nrows(), c.len())?;
        if (&q - q.transpose()).norm() > 1e-12 * (1.0 + q.norm()) {
            return Err(Error::invalid("q", "matrix must be symmetric"));
        }
        let eig = q.clone().symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        if lo < -1e-12 * (1.0 + hi.abs()) {
            return Err(Error::invalid("q", format!("matrix has negative eigenvalue {lo:e}")));
        }
        Ok(AffineMap {
            q,
            c,
            beta: if hi > 0.0 { 1.0 / hi } else { f64::INFINITY },
            gamma: lo.max(0.0),
        })
    }
}

impl CocoerciveMap for AffineMap {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.q.row(i).iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.c[i];
        }
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn strong_monotonicity(&self) -> f64 {
        self.gamma
    }
}

/// Gradient of `½‖Ax − b‖²`, i.e. `Aᵀ(Ax − b)`, with `β = 1/‖A‖²` from the
/// declared norm bound of `A`.
#[derive(Debug, Clone)]
pub struct QuadraticGradient {
    a: Arc<LinearOperator>,
    b: Vec<f64>,
    gamma: f64,
}

impl QuadraticGradient {
    pub fn new(a: Arc<LinearOperator>, b: Vec<f64>) -> Result<Self> {
        check_dim("quadratic data", a.out_dim(), b.len())?;
        Ok(QuadraticGradient { a, b, gamma: 0.0 })
    }

    /// Declares a strong monotonicity modulus (e.g. 1 when `A` is the identity).
    pub fn with_strong_monotonicity(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.a
    }

    pub fn data(&self) -> &[f64] {
        &self.b
    }
}

impl CocoerciveMap for QuadraticGradient {
    fn dim(&self) -> usize {
        self.a.in_dim()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let mut r = vec![0.0; self.a.out_dim()];
        self.a.apply_into(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        self.a.apply_adjoint_into(&r, out);
    }

    fn beta(&self) -> f64 {
        1.0 / self.a.norm_bound().powi(2)
    }

    fn strong_monotonicity(&self) -> f64 {
        self.gamma
    }
}

/// `Aᵀ(Ax − b)` with dimension checks.
pub fn grad_quadratic(a: &LinearOperator, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_dim("quadratic data", a.out_dim(), b.len())?;
    let mut r = a.apply(x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    a.apply_adjoint(&r)
}

/// Cocoercivity defect `β‖Bx−By‖² − ⟨x−y, Bx−By⟩`; nonpositive for a
/// β-cocoercive map.
pub fn cocoercivity_defect(map: &dyn CocoerciveMap, x: &[f64], y: &[f64]) -> f64 {
    let bx = map.apply(x);
    let by = map.apply(y);
    let db: Vec<f64> = bx.iter().zip(&by).map(|(a, b)| a - b).collect();
    let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let beta = map.beta();
    let nb = linalg::dot(&db, &db);
    let lhs = if beta.is_infinite() { if nb == 0.0 { 0.0 } else { f64::INFINITY } } else { beta * nb };
    lhs - linalg::dot(&dx, &db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grad_quadratic_examples() {
        let id = LinearOperator::identity(2);
        assert_eq!(grad_quadratic(&id, &[0.0, 0.0], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        let a = LinearOperator::Dense(DMatrix::from_element(1, 1, 2.0));
        assert_eq!(grad_quadratic(&a, &[2.0], &[3.0]).unwrap(), vec![8.0]);
        assert_eq!(grad_quadratic(&a, &[6.0], &[3.0]).unwrap(), vec![0.0]);
        assert!(grad_quadratic(&a, &[1.0, 2.0], &[3.0]).is_err());
    }

    #[test]
    fn quadratic_gradient_declares_inverse_norm_squared() {
        let a = Arc::new(LinearOperator::Dense(DMatrix::from_element(1, 1, 2.0)));
        let g = QuadraticGradient::new(a, vec![2.0]).unwrap();
        assert_eq!(g.apply(&[3.0]), vec![8.0]);
        assert!((g.beta() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn affine_map_constants() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let m = AffineMap::new(q, vec![1.0, -1.0]).unwrap();
        assert!((m.beta() - 0.5).abs() < 1e-14);
        assert!((m.strong_monotonicity() - 0.5).abs() < 1e-14);
        assert_eq!(m.apply(&[1.0, 2.0]), vec![3.0, 0.0]);
    }
}
