//! Resolvents in a low-rank perturbed metric `V = M ± UUᵀ`.
//!
//! With `W = M⁻¹U` and sign `s = ±1`, the point
//! `x(α) = J^M_T(z − M⁻¹q − sWα)` solves `V(z − V⁻¹q − x) ∈ T(x)` exactly
//! when `α` is the root of `l(α) = α + Uᵀ(z − x(α))`. The map `l` is
//! strictly monotone and Lipschitz, so the `r`-dimensional root problem
//! replaces any inversion of `V`. `q = 0` gives the plain resolvent
//! `J^V_T(z)`; `q = Bz` gives the forward-backward step `J^V_T(z − V⁻¹Bz)`.

mod root;

use nalgebra::DMatrix;

pub use root::{
    bisection_root, hybrid_root, newton_root, prop_bound, solve_root, FnRoot, RootConfig, RootMap, RootMethod,
    RootSolveReport,
};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm};
use crate::metric::{Sign, SpdBase};
use crate::ops::{CocoerciveMap, MonotoneOperator, Step};

/// Sign and columns of `U` in `V = M ± UUᵀ`. An empty term means `V = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankTerm {
    sign: Sign,
    dirs: Vec<Vec<f64>>,
}

impl LowRankTerm {
    pub fn none() -> Self {
        LowRankTerm {
            sign: Sign::Plus,
            dirs: Vec::new(),
        }
    }

    /// Validates dimensions and linear independence of the columns
    /// (determinant of the normalized Gram matrix above `1e−12`).
    pub fn new(sign: Sign, dirs: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        for d in &dirs {
            check_dim("low-rank direction", dim, d.len())?;
            linalg::ensure_finite(d)?;
        }
        let r = dirs.len();
        if r > 0 {
            let norms: Vec<f64> = dirs.iter().map(|d| norm(d)).collect();
            if norms.contains(&0.0) {
                return Err(Error::invalid("directions", "zero direction"));
            }
            let gram = DMatrix::from_fn(r, r, |i, j| dot(&dirs[i], &dirs[j]) / (norms[i] * norms[j]));
            if gram.determinant() <= 1e-12 {
                return Err(Error::invalid("directions", "directions are linearly dependent"));
            }
        }
        Ok(LowRankTerm { sign, dirs })
    }

    pub(crate) fn new_unchecked(sign: Sign, dirs: Vec<Vec<f64>>) -> Self {
        LowRankTerm { sign, dirs }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn dirs(&self) -> &[Vec<f64>] {
        &self.dirs
    }

    pub fn rank(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Frobenius norm of `U`.
    pub fn norm(&self) -> f64 {
        self.dirs.iter().map(|d| dot(d, d)).sum::<f64>().sqrt()
    }
}

/// `x(α) = J^M_T(w₀ − sWα)` for a diagonal base metric, together with the
/// root function `l(α) = α + Uᵀ(z − x(α))`.
pub struct ShiftedDiagonalResolvent<'a> {
    op: &'a dyn MonotoneOperator,
    step: Step<'a>,
    z: &'a [f64],
    w0: Vec<f64>,
    u: &'a [Vec<f64>],
    w: Vec<Vec<f64>>,
    sign: f64,
    zeta_hint: Option<f64>,
    slope_bound: Option<f64>,
    scale: f64,
}

impl<'a> ShiftedDiagonalResolvent<'a> {
    /// `shift` is `q` in `w₀ = z − M⁻¹q`; `None` means `q = 0`.
    pub fn new(
        op: &'a dyn MonotoneOperator,
        base: &'a SpdBase,
        term: &'a LowRankTerm,
        z: &'a [f64],
        shift: Option<&[f64]>,
    ) -> Result<Self> {
        let n = base.dim();
        check_dim("resolvent input", n, z.len())?;
        let step = base.inverse_step().ok_or_else(|| {
            Error::invalid("base", "closed-form resolvent calculus needs a diagonal base metric")
        })?;
        op.validate(n, step)?;
        let mut w0 = z.to_vec();
        if let Some(q) = shift {
            check_dim("resolvent shift", n, q.len())?;
            for (i, (wi, qi)) in w0.iter_mut().zip(q).enumerate() {
                *wi -= step.at(i) * qi;
            }
        }
        let w: Vec<Vec<f64>> = term
            .dirs
            .iter()
            .map(|u| u.iter().enumerate().map(|(i, v)| step.at(i) * v).collect())
            .collect();
        let u_norm = term.norm();
        let (zeta_hint, slope_bound) = if term.rank() == 1 {
            // The resolvent at the origin enters the a priori bracket.
            let mut j0 = vec![0.0; n];
            op.resolvent_into(&vec![0.0; n], step, &mut j0);
            let hint = prop_bound(u_norm, norm(z), norm(&j0));
            let uw = dot(&term.dirs[0], &w[0]);
            let slope = match term.sign {
                Sign::Plus => Some(1.0),
                Sign::Minus if uw < 1.0 => Some(1.0 - uw),
                Sign::Minus => None,
            };
            (Some(hint), slope)
        } else {
            (None, None)
        };
        Ok(ShiftedDiagonalResolvent {
            op,
            step,
            z,
            w0,
            u: &term.dirs,
            w,
            sign: term.sign.as_f64(),
            zeta_hint,
            slope_bound,
            scale: 1.0 + u_norm * norm(z),
        })
    }

    fn argument(&self, alpha: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.w0);
        for (wj, aj) in self.w.iter().zip(alpha) {
            linalg::axpy(-self.sign * aj, wj, out);
        }
    }
}

impl RootMap for ShiftedDiagonalResolvent<'_> {
    fn rank(&self) -> usize {
        self.u.len()
    }

    fn point_dim(&self) -> usize {
        self.z.len()
    }

    fn eval(&self, alpha: &[f64], x: &mut [f64], l: &mut [f64]) {
        let mut arg = vec![0.0; self.z.len()];
        self.argument(alpha, &mut arg);
        self.op.resolvent_into(&arg, self.step, x);
        for (j, uj) in self.u.iter().enumerate() {
            let c: f64 = uj.iter().zip(self.z).zip(x.iter()).map(|((u, z), x)| u * (z - x)).sum();
            l[j] = alpha[j] + c;
        }
    }

    fn jacobian(&self, alpha: &[f64], _x: &[f64]) -> Option<DMatrix<f64>> {
        let n = self.z.len();
        let r = self.u.len();
        let mut arg = vec![0.0; n];
        self.argument(alpha, &mut arg);
        let mut dir = vec![0.0; n];
        let mut dx = vec![0.0; n];
        let mut g = DMatrix::identity(r, r);
        for j in 0..r {
            for (d, w) in dir.iter_mut().zip(&self.w[j]) {
                *d = -self.sign * w;
            }
            if !self.op.resolvent_derivative(&arg, self.step, &dir, &mut dx) {
                return None;
            }
            for i in 0..r {
                g[(i, j)] -= dot(&self.u[i], &dx);
            }
        }
        Some(g)
    }

    fn residual_scale(&self) -> f64 {
        self.scale
    }

    fn slope_lower_bound(&self) -> Option<f64> {
        self.slope_bound
    }

    fn zeta_hint(&self) -> Option<f64> {
        self.zeta_hint
    }
}

/// Evaluates `l(α) = α + Uᵀ(z − J^M_T(z − sM⁻¹Uα))`.
pub fn eval_root_l(
    op: &dyn MonotoneOperator,
    base: &SpdBase,
    term: &LowRankTerm,
    z: &[f64],
    alpha: &[f64],
) -> Result<Vec<f64>> {
    check_dim("root argument", term.rank(), alpha.len())?;
    let map = ShiftedDiagonalResolvent::new(op, base, term, z, None)?;
    let mut x = vec![0.0; z.len()];
    let mut l = vec![0.0; term.rank()];
    map.eval(alpha, &mut x, &mut l);
    Ok(l)
}

/// `J^V_T(z)` for `V = M ± UUᵀ` through the root of `l`.
pub fn resolve_perturbed(
    op: &dyn MonotoneOperator,
    base: &SpdBase,
    term: &LowRankTerm,
    z: &[f64],
    cfg: &RootConfig,
) -> Result<(Vec<f64>, RootSolveReport)> {
    resolve_shifted(op, base, term, z, None, cfg)
}

/// The forward-backward step `J^V_T(z − V⁻¹Bz)` given `Bz`, without applying
/// `V⁻¹`.
pub fn fb_step_with_gradient(
    op: &dyn MonotoneOperator,
    base: &SpdBase,
    term: &LowRankTerm,
    z: &[f64],
    bz: &[f64],
    cfg: &RootConfig,
) -> Result<(Vec<f64>, RootSolveReport)> {
    resolve_shifted(op, base, term, z, Some(bz), cfg)
}

/// The forward-backward step `J^V_A(z − V⁻¹Bz)`.
pub fn fb_step_perturbed(
    op: &dyn MonotoneOperator,
    b: &dyn CocoerciveMap,
    base: &SpdBase,
    term: &LowRankTerm,
    z: &[f64],
    cfg: &RootConfig,
) -> Result<(Vec<f64>, RootSolveReport)> {
    check_dim("forward operator", base.dim(), b.dim())?;
    check_dim("forward-backward input", base.dim(), z.len())?;
    let bz = b.apply(z);
    fb_step_with_gradient(op, base, term, z, &bz, cfg)
}

fn resolve_shifted(
    op: &dyn MonotoneOperator,
    base: &SpdBase,
    term: &LowRankTerm,
    z: &[f64],
    shift: Option<&[f64]>,
    cfg: &RootConfig,
) -> Result<(Vec<f64>, RootSolveReport)> {
    let map = ShiftedDiagonalResolvent::new(op, base, term, z, shift)?;
    let mut x = vec![0.0; z.len()];
    if term.is_empty() {
        map.eval(&[], &mut x, &mut []);
        return Ok((x, RootSolveReport::trivial(0)));
    }
    let report = solve_root(&map, cfg, &mut x)?;
    Ok((x, report))
}
