use std::fmt;

use crate::error::{Error, Result};
use crate::linalg;

/// Per-coordinate resolvent step: `J_{tT}` with `t` either a scalar or a
/// positive diagonal (the inverse of a diagonal metric).
#[derive(Debug, Clone, Copy)]
pub enum Step<'a> {
    Scalar(f64),
    Diagonal(&'a [f64]),
}

impl Step<'_> {
    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Step::Scalar(t) => *t,
            Step::Diagonal(d) => d[i],
        }
    }

    /// Whether coordinates `2p` and `2p + 1` share one step for every pair.
    fn pairwise_uniform(&self) -> bool {
        match self {
            Step::Scalar(_) => true,
            Step::Diagonal(d) => d.chunks(2).all(|c| c.len() == 2 && c[0] == c[1]),
        }
    }
}

/// A maximally monotone operator described by its resolvent.
///
/// `resolvent_into` evaluates `J_{tT}(z) = (I + tT)⁻¹ z` for a per-coordinate
/// step `t`. Operators that are not separable per coordinate restrict which
/// diagonal steps they accept; see [`MonotoneOperator::validate`].
pub trait MonotoneOperator: fmt::Debug + Send + Sync {
    fn resolvent_into(&self, z: &[f64], step: Step<'_>, out: &mut [f64]);

    /// Applies one element of the generalized Jacobian of `z ↦ J_{tT}(z)` to
    /// `dir`. Returns `false` when no closed-form element is available.
    fn resolvent_derivative(&self, _z: &[f64], _step: Step<'_>, _dir: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Strong monotonicity modulus.
    fn strong_monotonicity(&self) -> f64 {
        0.0
    }

    /// Checks that the operator can act on `dim` coordinates with `step`.
    fn validate(&self, dim: usize, step: Step<'_>) -> Result<()>;

    fn resolvent(&self, z: &[f64], tau: f64) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        self.resolvent_into(z, Step::Scalar(tau), &mut out);
        out
    }
}

/// `T ≡ 0`; the resolvent is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroOperator;

impl MonotoneOperator for ZeroOperator {
    fn resolvent_into(&self, z: &[f64], _step: Step<'_>, out: &mut [f64]) {
        out.copy_from_slice(z);
    }

    fn resolvent_derivative(&self, _z: &[f64], _step: Step<'_>, dir: &[f64], out: &mut [f64]) -> bool {
        out.copy_from_slice(dir);
        true
    }

    fn validate(&self, _dim: usize, _step: Step<'_>) -> Result<()> {
        Ok(())
    }
}

/// Normal cone of the box `[lo, hi]ⁿ`; `hi = ∞` gives the nonnegative orthant
/// when `lo = 0`.
#[derive(Debug, Clone, Copy)]
pub struct BoxConstraint {
    lo: f64,
    hi: f64,
}

impl BoxConstraint {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidBox { lo, hi });
        }
        Ok(BoxConstraint { lo, hi })
    }

    pub fn orthant() -> Self {
        BoxConstraint {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

impl MonotoneOperator for BoxConstraint {
    fn resolvent_into(&self, z: &[f64], _step: Step<'_>, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(z) {
            *o = v.clamp(self.lo, self.hi);
        }
    }

    fn resolvent_derivative(&self, z: &[f64], _step: Step<'_>, dir: &[f64], out: &mut [f64]) -> bool {
        for ((o, v), d) in out.iter_mut().zip(z).zip(dir) {
            *o = if *v > self.lo && *v < self.hi { *d } else { 0.0 };
        }
        true
    }

    fn validate(&self, _dim: usize, _step: Step<'_>) -> Result<()> {
        Ok(())
    }
}

/// Normal cone of `{y : ‖y_p‖₂ ≤ radius for every pixel pair p}`.
#[derive(Debug, Clone, Copy)]
pub struct PairwiseBall {
    radius: f64,
}

impl PairwiseBall {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(PairwiseBall { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl MonotoneOperator for PairwiseBall {
    fn resolvent_into(&self, z: &[f64], _step: Step<'_>, out: &mut [f64]) {
        ball_projection(z, self.radius, out);
    }

    fn resolvent_derivative(&self, z: &[f64], _step: Step<'_>, dir: &[f64], out: &mut [f64]) -> bool {
        for ((p, d), o) in z.chunks_exact(2).zip(dir.chunks_exact(2)).zip(out.chunks_exact_mut(2)) {
            let n = p[0].hypot(p[1]);
            if n <= self.radius {
                o.copy_from_slice(d);
            } else {
                // (r/‖p‖)(I − p̂p̂ᵀ)d
                let (u0, u1) = (p[0] / n, p[1] / n);
                let c = u0 * d[0] + u1 * d[1];
                let s = self.radius / n;
                o[0] = s * (d[0] - c * u0);
                o[1] = s * (d[1] - c * u1);
            }
        }
        true
    }

    fn validate(&self, dim: usize, step: Step<'_>) -> Result<()> {
        check_pairs(dim, step)
    }
}

/// `λ∂‖·‖₁`; the resolvent is componentwise soft thresholding.
#[derive(Debug, Clone, Copy)]
pub struct SoftShrink {
    lambda: f64,
}

impl SoftShrink {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("must be nonnegative, got {lambda}")));
        }
        Ok(SoftShrink { lambda })
    }
}

impl MonotoneOperator for SoftShrink {
    fn resolvent_into(&self, z: &[f64], step: Step<'_>, out: &mut [f64]) {
        for (i, (o, v)) in out.iter_mut().zip(z).enumerate() {
            let t = self.lambda * step.at(i);
            *o = v.signum() * (v.abs() - t).max(0.0);
        }
    }

    fn resolvent_derivative(&self, z: &[f64], step: Step<'_>, dir: &[f64], out: &mut [f64]) -> bool {
        for (i, ((o, v), d)) in out.iter_mut().zip(z).zip(dir).enumerate() {
            *o = if v.abs() > self.lambda * step.at(i) { *d } else { 0.0 };
        }
        true
    }

    fn validate(&self, _dim: usize, _step: Step<'_>) -> Result<()> {
        Ok(())
    }
}

/// `λ∂‖·‖₂,₁` over pixel pairs; the resolvent is group soft shrinkage.
#[derive(Debug, Clone, Copy)]
pub struct GroupShrink {
    lambda: f64,
}

impl GroupShrink {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("must be nonnegative, got {lambda}")));
        }
        Ok(GroupShrink { lambda })
    }
}

impl MonotoneOperator for GroupShrink {
    fn resolvent_into(&self, z: &[f64], step: Step<'_>, out: &mut [f64]) {
        for (p, (zp, op)) in z.chunks_exact(2).zip(out.chunks_exact_mut(2)).enumerate() {
            group_shrink_pair(zp, self.lambda * step.at(2 * p), op);
        }
    }

    fn resolvent_derivative(&self, z: &[f64], step: Step<'_>, dir: &[f64], out: &mut [f64]) -> bool {
        for (p, ((zp, d), o)) in z
            .chunks_exact(2)
            .zip(dir.chunks_exact(2))
            .zip(out.chunks_exact_mut(2))
            .enumerate()
        {
            let t = self.lambda * step.at(2 * p);
            let n = zp[0].hypot(zp[1]);
            if n <= t {
                o[0] = 0.0;
                o[1] = 0.0;
            } else {
                // d − (t/‖p‖)(I − p̂p̂ᵀ)d
                let (u0, u1) = (zp[0] / n, zp[1] / n);
                let c = u0 * d[0] + u1 * d[1];
                let s = t / n;
                o[0] = d[0] - s * (d[0] - c * u0);
                o[1] = d[1] - s * (d[1] - c * u1);
            }
        }
        true
    }

    fn validate(&self, dim: usize, step: Step<'_>) -> Result<()> {
        check_pairs(dim, step)
    }
}

fn check_pairs(dim: usize, step: Step<'_>) -> Result<()> {
    if !dim.is_multiple_of(2) {
        return Err(Error::OddDimension(dim));
    }
    if !step.pairwise_uniform() {
        return Err(Error::invalid(
            "step",
            "pairwise operators need equal steps on both coordinates of a pair",
        ));
    }
    Ok(())
}

fn ball_projection(z: &[f64], radius: f64, out: &mut [f64]) {
    for (p, o) in z.chunks_exact(2).zip(out.chunks_exact_mut(2)) {
        let n = p[0].hypot(p[1]);
        if n > radius {
            let s = radius / n;
            o[0] = p[0] * s;
            o[1] = p[1] * s;
        } else {
            o.copy_from_slice(p);
        }
    }
}

fn group_shrink_pair(p: &[f64], lam: f64, out: &mut [f64]) {
    let n = p[0].hypot(p[1]);
    let s = if n > lam { 1.0 - lam / n } else { 0.0 };
    out[0] = p[0] * s;
    out[1] = p[1] * s;
}

/// Componentwise clamp of `z` into `[lo, hi]`.
pub fn prox_box(z: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    let b = BoxConstraint::new(lo, hi)?;
    let mut out = vec![0.0; z.len()];
    b.resolvent_into(z, Step::Scalar(1.0), &mut out);
    Ok(out)
}

/// Radial projection of every pixel pair onto the disk of radius `mu`.
pub fn project_pairwise_l2_ball(y: &[f64], mu: f64) -> Result<Vec<f64>> {
    if !y.len().is_multiple_of(2) {
        return Err(Error::OddDimension(y.len()));
    }
    let b = PairwiseBall::new(mu)?;
    let mut out = vec![0.0; y.len()];
    b.resolvent_into(y, Step::Scalar(1.0), &mut out);
    Ok(out)
}

/// Per-pair soft shrinkage `p · max(0, 1 − lam/‖p‖₂)`.
pub fn prox_group_l21(v: &[f64], lam: f64) -> Result<Vec<f64>> {
    if !v.len().is_multiple_of(2) {
        return Err(Error::OddDimension(v.len()));
    }
    let g = GroupShrink::new(lam)?;
    let mut out = vec![0.0; v.len()];
    g.resolvent_into(v, Step::Scalar(1.0), &mut out);
    Ok(out)
}

/// Firm nonexpansiveness defect `‖Δx‖² − ⟨Δx, Δz⟩` for one pair of inputs;
/// nonpositive for every resolvent.
pub fn firm_nonexpansive_defect(op: &dyn MonotoneOperator, z1: &[f64], z2: &[f64], tau: f64) -> f64 {
    let j1 = op.resolvent(z1, tau);
    let j2 = op.resolvent(z2, tau);
    let dx: Vec<f64> = j1.iter().zip(&j2).map(|(a, b)| a - b).collect();
    let dz: Vec<f64> = z1.iter().zip(z2).map(|(a, b)| a - b).collect();
    linalg::dot(&dx, &dx) - linalg::dot(&dx, &dz)
}
