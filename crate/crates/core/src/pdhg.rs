//! Primal-dual hybrid gradient as a forward-backward method in the block
//! metric `M = [[T⁻¹, −Kᵀ], [−K, Σ⁻¹]]`, with quasi-Newton perturbations of
//! that metric resolved without ever applying `M⁻¹`.
//!
//! The saddle problem is `min_x max_y ⟨Kx, y⟩ + g(x) + G(x) − f(y) − F(y)`
//! with proximable `g, f` and smooth `G, F`; iterates are stacked `z = (x, y)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm};
use crate::metric::SpdBase;
use crate::ops::{CocoerciveMap, LinearOperator, MonotoneOperator, Step};
use crate::resolvent::{solve_root, LowRankTerm, RootConfig, RootMap, RootSolveReport};
use crate::splitting::{
    run_inertial, run_relaxed, FbModel, IterateRecord, ObserverControl, SolverConfig, SolverOutcome,
};

/// A positive step: one scalar or one value per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSize {
    Scalar(f64),
    Diagonal(Vec<f64>),
}

impl StepSize {
    pub fn as_step(&self) -> Step<'_> {
        match self {
            StepSize::Scalar(t) => Step::Scalar(*t),
            StepSize::Diagonal(d) => Step::Diagonal(d),
        }
    }

    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        match self {
            StepSize::Scalar(t) => *t,
            StepSize::Diagonal(d) => d[i],
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            StepSize::Scalar(t) => *t,
            StepSize::Diagonal(d) => d.iter().fold(0.0f64, |a, &v| a.max(v)),
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            StepSize::Scalar(t) => *t,
            StepSize::Diagonal(d) => d.iter().fold(f64::INFINITY, |a, &v| a.min(v)),
        }
    }

    fn validate(&self, name: &'static str, dim: usize) -> Result<()> {
        if let StepSize::Diagonal(d) = self {
            check_dim(name, dim, d.len())?;
        }
        let (lo, hi) = (self.min(), self.max());
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(Error::invalid(name, "steps must be positive and finite"));
        }
        Ok(())
    }
}

/// The block metric of a PDHG step.
#[derive(Debug, Clone)]
pub struct PdhgMetric {
    tau: StepSize,
    sigma: StepSize,
    k: Arc<LinearOperator>,
    k_norm: f64,
}

/// Validates `τσ‖K‖² < 1` using the declared norm bound of `K`.
pub fn build_pdhg_metric(tau: StepSize, sigma: StepSize, k: Arc<LinearOperator>) -> Result<PdhgMetric> {
    tau.validate("tau", k.in_dim())?;
    sigma.validate("sigma", k.out_dim())?;
    let k_norm = k.norm_bound();
    let product = tau.max() * sigma.max() * k_norm * k_norm;
    if product >= 1.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "tau * sigma * |K|^2 = {product} must be below 1"
        )));
    }
    Ok(PdhgMetric { tau, sigma, k, k_norm })
}

impl PdhgMetric {
    pub fn nx(&self) -> usize {
        self.k.in_dim()
    }

    pub fn ny(&self) -> usize {
        self.k.out_dim()
    }

    pub fn dim(&self) -> usize {
        self.nx() + self.ny()
    }

    pub fn tau(&self) -> &StepSize {
        &self.tau
    }

    pub fn sigma(&self) -> &StepSize {
        &self.sigma
    }

    pub fn operator(&self) -> &Arc<LinearOperator> {
        &self.k
    }

    pub fn apply_into(&self, z: &[f64], out: &mut [f64]) {
        let nx = self.nx();
        let (x, y) = z.split_at(nx);
        let (ox, oy) = out.split_at_mut(nx);
        self.k.apply_adjoint_into(y, ox);
        for (i, (o, xi)) in ox.iter_mut().zip(x).enumerate() {
            *o = xi / self.tau.at(i) - *o;
        }
        self.k.apply_into(x, oy);
        for (i, (o, yi)) in oy.iter_mut().zip(y).enumerate() {
            *o = yi / self.sigma.at(i) - *o;
        }
    }

    /// `M⁻¹z` by conjugate gradients on the primal Schur complement
    /// `T⁻¹ − KᵀΣK`.
    pub fn apply_inverse(&self, z: &[f64]) -> Result<Vec<f64>> {
        let (nx, ny) = (self.nx(), self.ny());
        let (p, q) = z.split_at(nx);
        let sq: Vec<f64> = q.iter().enumerate().map(|(i, v)| self.sigma.at(i) * v).collect();
        let mut rhs = vec![0.0; nx];
        self.k.apply_adjoint_into(&sq, &mut rhs);
        linalg::axpy(1.0, p, &mut rhs);
        let mut kx = vec![0.0; ny];
        let mut kt = vec![0.0; nx];
        let a = linalg::conjugate_gradient(
            |v, out| {
                self.k.apply_into(v, &mut kx);
                kx.iter_mut().enumerate().for_each(|(i, w)| *w *= self.sigma.at(i));
                self.k.apply_adjoint_into(&kx, &mut kt);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = v[i] / self.tau.at(i) - kt[i];
                }
            },
            &rhs,
            1e-13,
            10 * nx + 100,
        )?;
        let mut out = a.clone();
        let mut ka = vec![0.0; ny];
        self.k.apply_into(&a, &mut ka);
        out.extend(ka.iter().zip(q).enumerate().map(|(i, (k, qi))| self.sigma.at(i) * (qi + k)));
        Ok(out)
    }

    /// `(1 − √(τσ)‖K‖) · min(1/τ, 1/σ)`, a lower bound on the spectrum.
    pub fn rho_min(&self) -> f64 {
        let (t, s) = (self.tau.max(), self.sigma.max());
        (1.0 - (t * s).sqrt() * self.k_norm) * (1.0 / t).min(1.0 / s)
    }

    /// Largest eigenvalue of `[[a, ‖K‖], [‖K‖, b]]` with `a = 1/τ_min`,
    /// `b = 1/σ_min`, an upper bound on `‖M‖`.
    pub fn norm_bound(&self) -> f64 {
        let (a, b) = (1.0 / self.tau.min(), 1.0 / self.sigma.min());
        0.5 * (a + b) + (0.25 * (a - b) * (a - b) + self.k_norm * self.k_norm).sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        linalg::assemble_dense(n, n, |x, y| self.apply_into(x, y))
    }
}

/// Saddle problem data. `g` and `f` are given by their subdifferentials
/// (through their proximal maps); `grad_g`/`grad_f` are `∇G` and `∇F`.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    pub k: Arc<LinearOperator>,
    pub g: Arc<dyn MonotoneOperator>,
    pub f: Arc<dyn MonotoneOperator>,
    pub grad_g: Arc<dyn CocoerciveMap>,
    pub grad_f: Arc<dyn CocoerciveMap>,
}

impl SaddleProblem {
    pub fn new(
        k: Arc<LinearOperator>,
        g: Arc<dyn MonotoneOperator>,
        f: Arc<dyn MonotoneOperator>,
        grad_g: Arc<dyn CocoerciveMap>,
        grad_f: Arc<dyn CocoerciveMap>,
    ) -> Result<Self> {
        check_dim("primal gradient", k.in_dim(), grad_g.dim())?;
        check_dim("dual gradient", k.out_dim(), grad_f.dim())?;
        Ok(SaddleProblem { k, g, f, grad_g, grad_f })
    }

    pub fn nx(&self) -> usize {
        self.k.in_dim()
    }

    pub fn ny(&self) -> usize {
        self.k.out_dim()
    }

    /// Cocoercivity of `B = (∇G, ∇F)`.
    pub fn beta(&self) -> f64 {
        self.grad_g.beta().min(self.grad_f.beta())
    }

    /// Strong monotonicity moduli `(γ_g + γ_G, γ_f + γ_F)` of the primal
    /// and dual parts.
    pub fn moduli(&self) -> (f64, f64) {
        (
            self.g.strong_monotonicity() + self.grad_g.strong_monotonicity(),
            self.f.strong_monotonicity() + self.grad_f.strong_monotonicity(),
        )
    }

    pub fn apply_b_into(&self, z: &[f64], out: &mut [f64]) {
        let nx = self.nx();
        let (x, y) = z.split_at(nx);
        let (ox, oy) = out.split_at_mut(nx);
        self.grad_g.apply_into(x, ox);
        self.grad_f.apply_into(y, oy);
    }
}

/// One classical PDHG step from `(x̄, ȳ)`:
/// `x⁺ = prox_{τg}(x̄ − τ∇G(x̄) − τKᵀȳ)`,
/// `y⁺ = prox_{σf}(ȳ − σ∇F(ȳ) + σK(2x⁺ − x̄))`.
pub fn pdhg_step(sp: &SaddleProblem, metric: &PdhgMetric, z: &[f64]) -> Result<Vec<f64>> {
    check_dim("pdhg iterate", sp.nx() + sp.ny(), z.len())?;
    let mut bz = vec![0.0; z.len()];
    sp.apply_b_into(z, &mut bz);
    let none = LowRankTerm::none();
    let map = PdhgShifted::new(sp, metric, &none, z, &bz)?;
    let mut out = vec![0.0; z.len()];
    map.eval(&[], &mut out, &mut []);
    Ok(out)
}

/// `z⁺(ξ)` for the PDHG step in the metric `M ± UUᵀ`, with root function
/// `l(ξ) = ξ + Uᵀ(z̄ − z⁺(ξ))`:
/// `x⁺ = prox_{τg}(x̄ − τ∇G(x̄) − τKᵀȳ − sτU_xξ)`,
/// `y⁺ = prox_{σf}(ȳ − σ∇F(ȳ) + σK(2x⁺ − x̄) − sσU_yξ)`.
pub struct PdhgShifted<'a> {
    sp: &'a SaddleProblem,
    metric: &'a PdhgMetric,
    zbar: &'a [f64],
    bz: &'a [f64],
    kty: Vec<f64>,
    u: &'a [Vec<f64>],
    sign: f64,
    scale: f64,
    zeta_hint: Option<f64>,
}

impl<'a> PdhgShifted<'a> {
    pub fn new(
        sp: &'a SaddleProblem,
        metric: &'a PdhgMetric,
        term: &'a LowRankTerm,
        zbar: &'a [f64],
        bz: &'a [f64],
    ) -> Result<Self> {
        let (nx, ny) = (sp.nx(), sp.ny());
        check_dim("pdhg metric", nx + ny, metric.dim())?;
        check_dim("pdhg point", nx + ny, zbar.len())?;
        check_dim("pdhg gradient", nx + ny, bz.len())?;
        for d in term.dirs() {
            check_dim("pdhg direction", nx + ny, d.len())?;
        }
        sp.g.validate(nx, metric.tau.as_step())?;
        sp.f.validate(ny, metric.sigma.as_step())?;
        let mut kty = vec![0.0; nx];
        sp.k.apply_adjoint_into(&zbar[nx..], &mut kty);
        let u_norm = term.norm();
        Ok(PdhgShifted {
            sp,
            metric,
            zbar,
            bz,
            kty,
            u: term.dirs(),
            sign: term.sign().as_f64(),
            scale: 1.0 + u_norm * norm(zbar),
            zeta_hint: (term.rank() == 1).then(|| 2.0 * u_norm * norm(zbar)),
        })
    }

    fn primal_argument(&self, xi: &[f64], out: &mut [f64]) {
        let nx = self.sp.nx();
        let tau = &self.metric.tau;
        let (x, g) = (&self.zbar[..nx], &self.bz[..nx]);
        for i in 0..nx {
            out[i] = x[i] - tau.at(i) * g[i] - tau.at(i) * self.kty[i];
        }
        for (u, a) in self.u.iter().zip(xi) {
            let c = self.sign * a;
            for i in 0..nx {
                out[i] -= c * tau.at(i) * u[i];
            }
        }
    }

    /// Dual argument given `kbar = K(2x⁺ − x̄)`.
    fn dual_argument(&self, xi: &[f64], kbar: &[f64], out: &mut [f64]) {
        let nx = self.sp.nx();
        let sigma = &self.metric.sigma;
        let (y, gf) = (&self.zbar[nx..], &self.bz[nx..]);
        for i in 0..out.len() {
            out[i] = y[i] - sigma.at(i) * gf[i] + sigma.at(i) * kbar[i];
        }
        for (u, a) in self.u.iter().zip(xi) {
            let c = self.sign * a;
            for i in 0..out.len() {
                out[i] -= c * sigma.at(i) * u[nx + i];
            }
        }
    }

    fn extrapolated_image(&self, xp: &[f64], out: &mut [f64]) {
        let xbar = &self.zbar[..self.sp.nx()];
        let t: Vec<f64> = xp.iter().zip(xbar).map(|(a, b)| 2.0 * a - b).collect();
        self.sp.k.apply_into(&t, out);
    }
}

impl RootMap for PdhgShifted<'_> {
    fn rank(&self) -> usize {
        self.u.len()
    }

    fn point_dim(&self) -> usize {
        self.zbar.len()
    }

    fn eval(&self, xi: &[f64], z: &mut [f64], l: &mut [f64]) {
        let (nx, ny) = (self.sp.nx(), self.sp.ny());
        let mut arg = vec![0.0; nx.max(ny)];
        self.primal_argument(xi, &mut arg[..nx]);
        let (xp, yp) = z.split_at_mut(nx);
        self.sp.g.resolvent_into(&arg[..nx], self.metric.tau.as_step(), xp);
        let mut kbar = vec![0.0; ny];
        self.extrapolated_image(xp, &mut kbar);
        self.dual_argument(xi, &kbar, &mut arg[..ny]);
        self.sp.f.resolvent_into(&arg[..ny], self.metric.sigma.as_step(), yp);
        for (j, u) in self.u.iter().enumerate() {
            let c: f64 = u.iter().zip(self.zbar).zip(z.iter()).map(|((u, a), b)| u * (a - b)).sum();
            l[j] = xi[j] + c;
        }
    }

    fn jacobian(&self, xi: &[f64], z: &[f64]) -> Option<DMatrix<f64>> {
        let (nx, ny) = (self.sp.nx(), self.sp.ny());
        let r = self.u.len();
        let tau = &self.metric.tau;
        let sigma = &self.metric.sigma;
        let mut argx = vec![0.0; nx];
        self.primal_argument(xi, &mut argx);
        let mut kbar = vec![0.0; ny];
        self.extrapolated_image(&z[..nx], &mut kbar);
        let mut argy = vec![0.0; ny];
        self.dual_argument(xi, &kbar, &mut argy);

        let mut g = DMatrix::identity(r, r);
        let mut dir_x = vec![0.0; nx];
        let mut dx = vec![0.0; nx];
        let mut dir_y = vec![0.0; ny];
        let mut dy = vec![0.0; ny];
        let mut kdx = vec![0.0; ny];
        for j in 0..r {
            let uj = &self.u[j];
            for i in 0..nx {
                dir_x[i] = -self.sign * tau.at(i) * uj[i];
            }
            if !self.sp.g.resolvent_derivative(&argx, tau.as_step(), &dir_x, &mut dx) {
                return None;
            }
            let two_dx: Vec<f64> = dx.iter().map(|v| 2.0 * v).collect();
            self.sp.k.apply_into(&two_dx, &mut kdx);
            for i in 0..ny {
                dir_y[i] = sigma.at(i) * kdx[i] - self.sign * sigma.at(i) * uj[nx + i];
            }
            if !self.sp.f.resolvent_derivative(&argy, sigma.as_step(), &dir_y, &mut dy) {
                return None;
            }
            for i in 0..r {
                let ui = &self.u[i];
                g[(i, j)] -= dot(&ui[..nx], &dx) + dot(&ui[nx..], &dy);
            }
        }
        Some(g)
    }

    fn residual_scale(&self) -> f64 {
        self.scale
    }

    fn slope_lower_bound(&self) -> Option<f64> {
        (self.u.len() == 1 && self.sign > 0.0).then_some(1.0)
    }

    fn zeta_hint(&self) -> Option<f64> {
        self.zeta_hint
    }
}

/// The quasi-Newton PDHG step from `z̄` in the metric `M ± UUᵀ`.
pub fn pdhg_fb_step(
    sp: &SaddleProblem,
    metric: &PdhgMetric,
    term: &LowRankTerm,
    zbar: &[f64],
    cfg: &RootConfig,
) -> Result<(Vec<f64>, RootSolveReport)> {
    let mut bz = vec![0.0; zbar.len()];
    check_dim("pdhg iterate", sp.nx() + sp.ny(), zbar.len())?;
    sp.apply_b_into(zbar, &mut bz);
    let map = PdhgShifted::new(sp, metric, term, zbar, &bz)?;
    let mut out = vec![0.0; zbar.len()];
    let rep = solve_root(&map, cfg, &mut out)?;
    Ok((out, rep))
}

/// A saddle problem with its block metric, usable by the generic solvers.
#[derive(Debug, Clone)]
pub struct PdhgModel<'a> {
    sp: &'a SaddleProblem,
    base: Arc<SpdBase>,
}

impl<'a> PdhgModel<'a> {
    pub fn new(sp: &'a SaddleProblem, metric: PdhgMetric) -> Result<Self> {
        check_dim("pdhg metric", sp.nx() + sp.ny(), metric.dim())?;
        Ok(PdhgModel {
            sp,
            base: Arc::new(SpdBase::Pdhg(metric)),
        })
    }

    fn metric(&self) -> &PdhgMetric {
        match self.base.as_ref() {
            SpdBase::Pdhg(m) => m,
            _ => unreachable!("pdhg model always carries a block metric"),
        }
    }
}

impl FbModel for PdhgModel<'_> {
    fn dim(&self) -> usize {
        self.sp.nx() + self.sp.ny()
    }

    fn base(&self) -> &Arc<SpdBase> {
        &self.base
    }

    fn beta(&self) -> f64 {
        self.sp.beta()
    }

    fn apply_b(&self, z: &[f64], out: &mut [f64]) {
        self.sp.apply_b_into(z, out);
    }

    fn fb_step(
        &self,
        z: &[f64],
        bz: &[f64],
        term: &LowRankTerm,
        cfg: &RootConfig,
        out: &mut [f64],
    ) -> Result<RootSolveReport> {
        let map = PdhgShifted::new(self.sp, self.metric(), term, z, bz)?;
        solve_root(&map, cfg, out)
    }
}

/// Inertial quasi-Newton PDHG; `z0 = (x0, y0)` stacked.
pub fn run_iqn_pdhg<R: ObserverControl>(
    sp: &SaddleProblem,
    metric: PdhgMetric,
    cfg: &SolverConfig,
    z0: &[f64],
    on_iter: impl FnMut(&IterateRecord, &[f64]) -> R,
) -> Result<SolverOutcome> {
    let model = PdhgModel::new(sp, metric)?;
    run_inertial(&model, cfg, z0, on_iter)
}

/// Quasi-Newton PDHG with relaxation; `z0 = (x0, y0)` stacked.
pub fn run_rqn_pdhg<R: ObserverControl>(
    sp: &SaddleProblem,
    metric: PdhgMetric,
    cfg: &SolverConfig,
    z0: &[f64],
    on_iter: impl FnMut(&IterateRecord, &[f64]) -> R,
) -> Result<SolverOutcome> {
    let model = PdhgModel::new(sp, metric)?;
    run_relaxed(&model, cfg, z0, on_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{ZeroMap, ZeroOperator};

    fn scalar_k(v: f64) -> Arc<LinearOperator> {
        Arc::new(LinearOperator::Dense(DMatrix::from_element(1, 1, v)))
    }

    #[test]
    fn block_metric_example() {
        let m = build_pdhg_metric(StepSize::Scalar(0.5), StepSize::Scalar(0.5), scalar_k(1.0)).unwrap();
        let dense = m.to_dense();
        assert_eq!(dense, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        let eig = dense.symmetric_eigenvalues();
        assert!((eig.min() - 1.0).abs() < 1e-12 && (eig.max() - 3.0).abs() < 1e-12);
        assert!(m.rho_min() <= 1.0 + 1e-12);
        assert!(m.norm_bound() >= 3.0 - 1e-12);
    }

    #[test]
    fn block_metric_boundary_rejected() {
        let err = build_pdhg_metric(StepSize::Scalar(1.0), StepSize::Scalar(1.0), scalar_k(1.0)).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite(_)));
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let m = build_pdhg_metric(StepSize::Scalar(0.5), StepSize::Scalar(0.25), scalar_k(0.0)).unwrap();
        assert_eq!(m.to_dense(), DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]));
    }

    #[test]
    fn inverse_matches_dense() {
        let k = Arc::new(LinearOperator::Dense(DMatrix::from_row_slice(
            3,
            2,
            &[1.0, 0.5, -0.3, 0.8, 0.2, -1.0],
        )));
        let m = build_pdhg_metric(StepSize::Scalar(0.3), StepSize::Diagonal(vec![0.4, 0.5, 0.2]), k).unwrap();
        let z = [1.0, -2.0, 0.5, 0.3, -0.7];
        let inv = m.apply_inverse(&z).unwrap();
        let mut back = vec![0.0; 5];
        m.apply_into(&inv, &mut back);
        for (a, b) in back.iter().zip(&z) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn plain_step_example() {
        let sp = SaddleProblem::new(
            scalar_k(1.0),
            Arc::new(ZeroOperator),
            Arc::new(ZeroOperator),
            Arc::new(ZeroMap { dim: 1 }),
            Arc::new(ZeroMap { dim: 1 }),
        )
        .unwrap();
        let m = build_pdhg_metric(StepSize::Scalar(0.5), StepSize::Scalar(0.5), scalar_k(1.0)).unwrap();
        assert_eq!(pdhg_step(&sp, &m, &[1.0, 0.0]).unwrap(), vec![1.0, 0.5]);
        assert_eq!(pdhg_step(&sp, &m, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let (z, rep) = pdhg_fb_step(&sp, &m, &LowRankTerm::none(), &[1.0, 0.0], &RootConfig::default()).unwrap();
        assert_eq!(z, vec![1.0, 0.5]);
        assert_eq!(rep.iterations(), 0);
    }
}
