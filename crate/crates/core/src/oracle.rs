//! Dense reference computations and random test instances.
//!
//! These never touch the root-finding machinery: the perturbed resolvent is
//! computed as the fixed point of a forward-backward iteration on the
//! assembled matrix `V`, which only needs the Euclidean proximal map.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::metric::{Sign, SpdBase};
use crate::ops::{BoxConstraint, GroupShrink, MonotoneOperator, PairwiseBall, SoftShrink, Step};
use crate::resolvent::LowRankTerm;

/// Dense `M ± UUᵀ`.
pub fn dense_metric(base: &SpdBase, term: &LowRankTerm) -> DMatrix<f64> {
    let mut v = base.to_dense();
    let s = term.sign().as_f64();
    for u in term.dirs() {
        let u = DVector::from_column_slice(u);
        v += s * &u * u.transpose();
    }
    v
}

/// Solves `V(z − x) − q ∈ T(x)` for SPD `V` by iterating
/// `x ← J_{sT}(x − s(V(x − z) + q))` with `s = 1/λ_max(V)`.
pub fn dense_fb_step(
    op: &dyn MonotoneOperator,
    v: &DMatrix<f64>,
    z: &[f64],
    q: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = z.len();
    check_dim("oracle metric", n, v.nrows())?;
    let lmin = linalg::min_eigenvalue(v);
    if !(lmin > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("oracle metric has eigenvalue {lmin}")));
    }
    let s = 1.0 / linalg::max_eigenvalue(v);
    op.validate(n, Step::Scalar(s))?;
    let zv = DVector::from_column_slice(z);
    let mut x = z.to_vec();
    let mut arg = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        let g = v * (DVector::from_column_slice(&x) - &zv);
        for i in 0..n {
            arg[i] = x[i] - s * (g[i] + q.map_or(0.0, |q| q[i]));
        }
        op.resolvent_into(&arg, Step::Scalar(s), &mut next);
        let change = linalg::dist(&x, &next);
        std::mem::swap(&mut x, &mut next);
        if change <= tol * (1.0 + linalg::norm(&x)) {
            return Ok(x);
        }
    }
    Err(Error::RootNotConverged {
        residual: linalg::dist(&x, &next),
        iterations: max_iter,
    })
}

/// `J^V_T(z)` by the dense fixed-point iteration.
pub fn dense_resolvent(op: &dyn MonotoneOperator, v: &DMatrix<f64>, z: &[f64]) -> Result<Vec<f64>> {
    dense_fb_step(op, v, z, None, 1e-14, 200_000)
}

/// `V(z − x) ∈ T(x)` residual measured by one Euclidean proximal step:
/// zero exactly when `x` is the perturbed resolvent.
pub fn inclusion_residual(op: &dyn MonotoneOperator, v: &DMatrix<f64>, z: &[f64], x: &[f64]) -> f64 {
    let g = v * (DVector::from_column_slice(z) - DVector::from_column_slice(x));
    let arg: Vec<f64> = x.iter().zip(g.iter()).map(|(a, b)| a + b).collect();
    let mut p = vec![0.0; x.len()];
    op.resolvent_into(&arg, Step::Scalar(1.0), &mut p);
    linalg::dist(&p, x)
}

/// The operators covered by the random instance generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Box,
    Ball,
    Shrink,
    Group,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [OperatorKind::Box, OperatorKind::Ball, OperatorKind::Shrink, OperatorKind::Group];

    pub fn build(self, rng: &mut impl Rng) -> Arc<dyn MonotoneOperator> {
        match self {
            OperatorKind::Box => {
                let lo = -rng.random_range(0.1..2.0);
                Arc::new(BoxConstraint::new(lo, rng.random_range(0.1..2.0)).expect("valid box"))
            }
            OperatorKind::Ball => Arc::new(PairwiseBall::new(rng.random_range(0.1..2.0)).expect("valid radius")),
            OperatorKind::Shrink => Arc::new(SoftShrink::new(rng.random_range(0.0..1.0)).expect("valid weight")),
            OperatorKind::Group => Arc::new(GroupShrink::new(rng.random_range(0.0..1.0)).expect("valid weight")),
        }
    }

    fn paired(self) -> bool {
        matches!(self, OperatorKind::Ball | OperatorKind::Group)
    }
}

/// A random resolvent problem `J^{M ± UUᵀ}_T(z)` with diagonal `M`.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub kind: OperatorKind,
    pub op: Arc<dyn MonotoneOperator>,
    pub base: SpdBase,
    pub term: LowRankTerm,
    pub z: Vec<f64>,
}

impl RandomInstance {
    pub fn dense_metric(&self) -> DMatrix<f64> {
        dense_metric(&self.base, &self.term)
    }
}

/// `dim` must be even and at least `rank`. For the minus sign `U` is scaled
/// so that `‖M^{-1/2}U‖² ≤ 0.9`, keeping `M − UUᵀ` positive definite.
pub fn random_instance(
    rng: &mut impl Rng,
    kind: OperatorKind,
    dim: usize,
    rank: usize,
    sign: Sign,
) -> RandomInstance {
    assert!(dim >= 2 && dim.is_multiple_of(2) && rank <= dim, "instances use an even dimension of at least the rank");
    let mut diag: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..3.0)).collect();
    if kind.paired() {
        for i in (0..dim).step_by(2) {
            diag[i + 1] = diag[i];
        }
    }
    let (dirs, term) = loop {
        let dirs: Vec<Vec<f64>> = (0..rank)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        if let Ok(term) = LowRankTerm::new(sign, dirs.clone(), dim) {
            break (dirs, term);
        }
    };
    let scale = if rank == 0 {
        1.0
    } else {
        let weighted = DMatrix::from_fn(dim, rank, |i, j| dirs[j][i] / diag[i].sqrt());
        let top = linalg::max_eigenvalue(&(weighted.transpose() * &weighted));
        match sign {
            Sign::Minus => (rng.random_range(0.05..0.9) / top).sqrt(),
            Sign::Plus => rng.random_range(0.1..2.0) / top.sqrt(),
        }
    };
    let scaled = term.dirs().iter().map(|u| u.iter().map(|v| v * scale).collect()).collect();
    let z = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
    RandomInstance {
        kind,
        op: kind.build(rng),
        base: SpdBase::diagonal(diag).expect("positive diagonal"),
        term: LowRankTerm::new(sign, scaled, dim).expect("scaling keeps independence"),
        z,
    }
}
