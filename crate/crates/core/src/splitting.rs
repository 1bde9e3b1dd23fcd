//! Quasi-Newton forward-backward splitting for `0 ∈ Az + Bz`: an inertial
//! variant and a variant with a closed-form relaxation step.

use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm};
use crate::metric::{
    build_sr1_metric, GammaRule, MetricMode, MetricScheduleState, QuasiNewtonMetric, Sign, SpdBase,
};
use crate::ops::{CocoerciveMap, MonotoneOperator};
use crate::resolvent::{fb_step_with_gradient, LowRankTerm, RootConfig, RootSolveReport};

/// `0 ∈ Az + Bz` with maximally monotone `A` and cocoercive `B`.
#[derive(Debug, Clone)]
pub struct InclusionProblem {
    pub a: Arc<dyn MonotoneOperator>,
    pub b: Arc<dyn CocoerciveMap>,
}

impl InclusionProblem {
    pub fn new(a: Arc<dyn MonotoneOperator>, b: Arc<dyn CocoerciveMap>) -> Result<Self> {
        let beta = b.beta();
        if !(beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
        }
        Ok(InclusionProblem { a, b })
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }
}

/// What a solver needs from a problem: the forward map, the base metric,
/// and a forward-backward step in a perturbed metric `M₀ ± UUᵀ`.
pub trait FbModel {
    fn dim(&self) -> usize;

    fn base(&self) -> &Arc<SpdBase>;

    /// Cocoercivity constant of the forward map.
    fn beta(&self) -> f64;

    fn apply_b(&self, z: &[f64], out: &mut [f64]);

    /// Writes `J^V_A(z − V⁻¹Bz)` into `out` given `bz = Bz`.
    fn fb_step(
        &self,
        z: &[f64],
        bz: &[f64],
        term: &LowRankTerm,
        cfg: &RootConfig,
        out: &mut [f64],
    ) -> Result<RootSolveReport>;
}

/// An [`InclusionProblem`] paired with a diagonal base metric.
#[derive(Debug, Clone)]
pub struct DiagonalFbModel<'a> {
    problem: &'a InclusionProblem,
    base: Arc<SpdBase>,
}

impl<'a> DiagonalFbModel<'a> {
    pub fn new(problem: &'a InclusionProblem, base: SpdBase) -> Result<Self> {
        check_dim("base metric", problem.dim(), base.dim())?;
        let step = base
            .inverse_step()
            .ok_or_else(|| Error::invalid("base", "forward-backward model needs a diagonal base metric"))?;
        problem.a.validate(problem.dim(), step)?;
        Ok(DiagonalFbModel {
            problem,
            base: Arc::new(base),
        })
    }
}

impl FbModel for DiagonalFbModel<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn base(&self) -> &Arc<SpdBase> {
        &self.base
    }

    fn beta(&self) -> f64 {
        self.problem.b.beta()
    }

    fn apply_b(&self, z: &[f64], out: &mut [f64]) {
        self.problem.b.apply_into(z, out);
    }

    fn fb_step(
        &self,
        z: &[f64],
        bz: &[f64],
        term: &LowRankTerm,
        cfg: &RootConfig,
        out: &mut [f64],
    ) -> Result<RootSolveReport> {
        let (x, rep) = fb_step_with_gradient(self.problem.a.as_ref(), &self.base, term, z, bz, cfg)?;
        out.copy_from_slice(&x);
        Ok(rep)
    }
}

/// Inertial parameter schedules `α_k`, clamped to `(0, Λ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSchedule {
    /// `α_k = 0`: no inertia.
    Zero,
    Constant(f64),
    /// `α_k = 10 / (k^1.1 · max{d, d²})`.
    Fig1,
    /// `α_k = max{10 / (k^1.1 · max{d, d²}), 1}`, never below one and
    /// therefore not summable.
    Fig2,
    /// `α_k = min{10 / (k^1.1 · max{d, d²}), 1}`.
    Fig2Min,
    /// `α_k = 10 / max{k², k²d²}`.
    Fig3,
}

impl AlphaSchedule {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "zero" | "none" => Ok(AlphaSchedule::Zero),
            "fig1" => Ok(AlphaSchedule::Fig1),
            "fig2" => Ok(AlphaSchedule::Fig2),
            "fig2-min" => Ok(AlphaSchedule::Fig2Min),
            "fig3" => Ok(AlphaSchedule::Fig3),
            other => other
                .strip_prefix("constant:")
                .and_then(|v| v.parse::<f64>().ok())
                .map(AlphaSchedule::Constant)
                .ok_or_else(|| Error::invalid("alpha schedule", format!("unknown kind `{other}`"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            AlphaSchedule::Zero => "zero".into(),
            AlphaSchedule::Constant(a) => format!("constant:{a}"),
            AlphaSchedule::Fig1 => "fig1".into(),
            AlphaSchedule::Fig2 => "fig2".into(),
            AlphaSchedule::Fig2Min => "fig2-min".into(),
            AlphaSchedule::Fig3 => "fig3".into(),
        }
    }
}

/// `α_k` for schedule `kind` at iteration `k ≥ 1` with `d = ‖z_k − z_{k−1}‖`.
/// A zero difference yields the bare rate; results are capped at `lambda`.
pub fn alpha_schedule(kind: AlphaSchedule, k: usize, diff_norm: f64, lambda: f64) -> f64 {
    let k = k.max(1) as f64;
    let d = diff_norm.max(0.0);
    let fig1 = || {
        let m = d.max(d * d);
        if m > 0.0 {
            10.0 / (k.powf(1.1) * m)
        } else {
            10.0 / k.powf(1.1)
        }
    };
    let raw = match kind {
        AlphaSchedule::Zero => return 0.0,
        AlphaSchedule::Constant(a) => a,
        AlphaSchedule::Fig1 => fig1(),
        AlphaSchedule::Fig2 => fig1().max(1.0),
        AlphaSchedule::Fig2Min => fig1().min(1.0),
        AlphaSchedule::Fig3 => 10.0 / (k * k).max(k * k * d * d),
    };
    raw.min(lambda)
}

/// `z̄ = z_k + α(z_k − z_{k−1})`.
pub fn inertial_step(z: &[f64], z_prev: &[f64], alpha: f64) -> Vec<f64> {
    z.iter().zip(z_prev).map(|(a, b)| a + alpha * (a - b)).collect()
}

/// Root-solver tolerance per iteration, standing in for the summable error
/// sequence of the convergence theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootTolerance {
    /// Always the tolerance in [`RootConfig`].
    Constant,
    /// `max(tol0 / k², floor)`.
    Decaying { tol0: f64, floor: f64 },
}

impl RootTolerance {
    pub fn at(&self, k: usize, base: f64) -> f64 {
        match self {
            RootTolerance::Constant => base,
            RootTolerance::Decaying { tol0, floor } => {
                let k = k.max(1) as f64;
                (tol0 / (k * k)).max(*floor)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Inertial,
    Relaxed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub metric: MetricMode,
    pub alpha: AlphaSchedule,
    /// Upper bound `Λ` on `α_k`.
    pub alpha_max: f64,
    pub max_iter: usize,
    /// Stop once `‖z_k − z̃_k‖ / (1 + ‖z_k‖)` falls to this value; zero
    /// disables the test.
    pub stop_tol: f64,
    pub root: RootConfig,
    pub root_tol: RootTolerance,
    /// Reject minus-sign metrics that are not positive definite, keeping
    /// the base metric for that iteration.
    pub check_minus_definiteness: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: Variant::Inertial,
            metric: MetricMode::Sr1(GammaRule::Secant),
            alpha: AlphaSchedule::Zero,
            alpha_max: 10.0,
            max_iter: 1000,
            stop_tol: 1e-9,
            root: RootConfig::default(),
            root_tol: RootTolerance::Decaying {
                tol0: 1e-8,
                floor: 1e-12,
            },
            check_minus_definiteness: true,
        }
    }
}

/// One solver iteration, as streamed to observers.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    /// Iteration index; the record describes the step from `z_k` to `z_{k+1}`.
    pub k: usize,
    /// `‖z_{k+1} − z_k‖`.
    pub diff_norm: f64,
    /// `α_k` (inertial) or `t_k` (relaxed).
    pub step_param: f64,
    /// `‖z̃ − z‖ / (1 + ‖z‖)` for the forward-backward point `z̃`.
    pub fb_residual: f64,
    pub root_iters: usize,
    pub root_residual: f64,
    pub root_tol: f64,
    pub metric_sign: Option<Sign>,
    pub gamma: f64,
    pub elapsed: Duration,
    /// Fingerprint of `z_{k+1}`.
    pub hash: u64,
}

/// What an iteration observer returns: `()` never stops the solver,
/// `ControlFlow::Break(())` stops it after the current iteration.
pub trait ObserverControl {
    fn stop_requested(&self) -> bool;
}

impl ObserverControl for () {
    fn stop_requested(&self) -> bool {
        false
    }
}

impl ObserverControl for ControlFlow<()> {
    fn stop_requested(&self) -> bool {
        self.is_break()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIter,
    Converged,
    /// The iteration observer asked to stop.
    Observer,
    /// The forward-backward point coincided with the iterate.
    Solved,
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub z: Vec<f64>,
    pub records: Vec<IterateRecord>,
    pub stop: StopReason,
    pub metrics: MetricScheduleState,
}

struct MetricBuilder {
    mode: MetricMode,
    check_minus: bool,
    state: MetricScheduleState,
}

impl MetricBuilder {
    fn build(
        &mut self,
        model: &dyn FbModel,
        k: usize,
        s: &[f64],
        y: &[f64],
    ) -> Result<QuasiNewtonMetric> {
        let base = model.base();
        let (metric, rule) = match self.mode {
            MetricMode::Sr1(rule) if k >= 1 => {
                let (mut m, _) = build_sr1_metric(base, k, s, y, rule, model.beta())?;
                if self.check_minus && m.sign == Some(Sign::Minus) && !m.is_unperturbed() {
                    let u = &m.directions[0];
                    let w = base.apply_inverse(u)?;
                    if m.gamma * dot(u, &w) >= 1.0 - 1e-9 {
                        self.state.safeguard_fallbacks += 1;
                        log::debug!("iteration {k}: minus metric not positive definite, keeping base");
                        m = QuasiNewtonMetric::unperturbed(base.clone());
                    }
                }
                (m, Some(rule))
            }
            _ => (QuasiNewtonMetric::unperturbed(base.clone()), None),
        };
        self.state.record(k, &metric, rule);
        Ok(metric)
    }
}

/// Runs the forward-backward step, retrying with the base metric when a
/// minus-sign perturbation leaves the root problem without a bracket.
fn guarded_fb_step(
    model: &dyn FbModel,
    z: &[f64],
    bz: &[f64],
    metric: &mut QuasiNewtonMetric,
    cfg: &RootConfig,
    out: &mut [f64],
    state: &mut MetricScheduleState,
) -> Result<RootSolveReport> {
    let term = metric.low_rank_term();
    match model.fb_step(z, bz, &term, cfg, out) {
        Ok(rep) => Ok(rep),
        Err(e @ (Error::BracketViolation { .. } | Error::RootNotConverged { .. }))
            if metric.sign == Some(Sign::Minus) =>
        {
            log::debug!("minus metric root solve failed ({e}), keeping base");
            state.safeguard_fallbacks += 1;
            *metric = QuasiNewtonMetric::unperturbed(metric.base.clone());
            model.fb_step(z, bz, &LowRankTerm::none(), cfg, out)
        }
        Err(e) => Err(e),
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn validate_start(model: &dyn FbModel, z0: &[f64]) -> Result<()> {
    check_dim("initial iterate", model.dim(), z0.len())?;
    linalg::ensure_finite(z0)
}

/// Inertial quasi-Newton forward-backward splitting.
///
/// Per iteration: the SR1 metric from `(z_k − z_{k−1}, Bz_k − Bz_{k−1})`,
/// the inertial point `z̄_k`, then `z_{k+1} = J^{M_k}_A(z̄_k − M_k⁻¹Bz̄_k)`.
/// `on_iter` sees every record and the new iterate, in order.
pub fn run_inertial<R: ObserverControl>(
    model: &dyn FbModel,
    cfg: &SolverConfig,
    z0: &[f64],
    mut on_iter: impl FnMut(&IterateRecord, &[f64]) -> R,
) -> Result<SolverOutcome> {
    validate_start(model, z0)?;
    let n = model.dim();
    let start = Instant::now();
    let mut z = z0.to_vec();
    let mut z_prev = z0.to_vec();
    let mut bz = vec![0.0; n];
    model.apply_b(&z, &mut bz);
    let mut bz_prev = bz.clone();
    let mut bzbar = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut builder = MetricBuilder {
        mode: cfg.metric,
        check_minus: cfg.check_minus_definiteness,
        state: MetricScheduleState::default(),
    };
    let mut records = Vec::new();
    let mut stop = StopReason::MaxIter;
    for k in 0..cfg.max_iter {
        let s = diff(&z, &z_prev);
        let y = diff(&bz, &bz_prev);
        let mut metric = builder.build(model, k, &s, &y).map_err(|e| e.at_iteration(k))?;
        let d = norm(&s);
        let alpha = if k == 0 { 0.0 } else { alpha_schedule(cfg.alpha, k, d, cfg.alpha_max) };
        let (zbar, bzbar_ref) = if alpha == 0.0 {
            (z.clone(), &bz)
        } else {
            let zb = inertial_step(&z, &z_prev, alpha);
            model.apply_b(&zb, &mut bzbar);
            (zb, &bzbar)
        };
        let mut root = cfg.root.clone();
        root.residual_tol = cfg.root_tol.at(k, cfg.root.residual_tol);
        let rep = guarded_fb_step(model, &zbar, bzbar_ref, &mut metric, &root, &mut next, &mut builder.state)
            .map_err(|e| e.at_iteration(k))?;
        linalg::ensure_finite(&next).map_err(|e| e.at_iteration(k))?;
        let fb_residual = linalg::dist(&next, &zbar) / (1.0 + norm(&zbar));
        std::mem::swap(&mut z_prev, &mut z);
        z.copy_from_slice(&next);
        std::mem::swap(&mut bz_prev, &mut bz);
        model.apply_b(&z, &mut bz);
        let record = IterateRecord {
            k,
            diff_norm: linalg::dist(&z, &z_prev),
            step_param: alpha,
            fb_residual,
            root_iters: rep.iterations(),
            root_residual: rep.residual,
            root_tol: root.residual_tol,
            metric_sign: if metric.is_unperturbed() { None } else { metric.sign },
            gamma: metric.gamma,
            elapsed: start.elapsed(),
            hash: linalg::fingerprint(&z),
        };
        let control = on_iter(&record, &z);
        records.push(record);
        if control.stop_requested() {
            stop = StopReason::Observer;
            break;
        }
        if cfg.stop_tol > 0.0 && fb_residual <= cfg.stop_tol {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(SolverOutcome {
        z,
        records,
        stop,
        metrics: builder.state,
    })
}

/// `t = ⟨d, v⟩ / (2‖v‖²)` with `d = z − z̃` and `v = V d + Bz̃ − Bz`.
pub fn relaxation_coefficient(
    metric: &QuasiNewtonMetric,
    b: &dyn CocoerciveMap,
    z: &[f64],
    z_tilde: &[f64],
) -> Result<f64> {
    check_dim("relaxation iterate", metric.dim(), z.len())?;
    check_dim("relaxation point", metric.dim(), z_tilde.len())?;
    let d = diff(z, z_tilde);
    let bz = b.apply(z);
    let bzt = b.apply(z_tilde);
    let v = relaxation_direction(metric, &d, &bz, &bzt);
    relaxation_step(&d, &v).map(|(t, _)| t)
}

fn relaxation_direction(metric: &QuasiNewtonMetric, d: &[f64], bz: &[f64], bzt: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; d.len()];
    metric.apply_into(d, &mut v);
    for ((vi, a), b) in v.iter_mut().zip(bzt).zip(bz) {
        *vi += a - b;
    }
    v
}

fn relaxation_step(d: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    let vv = dot(v, v);
    if vv == 0.0 || norm(d) == 0.0 {
        return Err(Error::Solved);
    }
    Ok((dot(d, v) / (2.0 * vv), vv))
}

/// Quasi-Newton forward-backward splitting with relaxation:
/// `z̃_k = J^{M_k}_A(z_k − M_k⁻¹Bz_k)`, then `z_{k+1} = z_k − t_k v_k`.
pub fn run_relaxed<R: ObserverControl>(
    model: &dyn FbModel,
    cfg: &SolverConfig,
    z0: &[f64],
    mut on_iter: impl FnMut(&IterateRecord, &[f64]) -> R,
) -> Result<SolverOutcome> {
    validate_start(model, z0)?;
    let n = model.dim();
    let start = Instant::now();
    let mut z = z0.to_vec();
    let mut z_prev = z0.to_vec();
    let mut bz = vec![0.0; n];
    model.apply_b(&z, &mut bz);
    let mut bz_prev = bz.clone();
    let mut zt = vec![0.0; n];
    let mut bzt = vec![0.0; n];
    let mut builder = MetricBuilder {
        mode: cfg.metric,
        check_minus: cfg.check_minus_definiteness,
        state: MetricScheduleState::default(),
    };
    let mut records = Vec::new();
    let mut stop = StopReason::MaxIter;
    for k in 0..cfg.max_iter {
        let s = diff(&z, &z_prev);
        let y = diff(&bz, &bz_prev);
        let mut metric = builder.build(model, k, &s, &y).map_err(|e| e.at_iteration(k))?;
        let mut root = cfg.root.clone();
        root.residual_tol = cfg.root_tol.at(k, cfg.root.residual_tol);
        let rep = guarded_fb_step(model, &z, &bz, &mut metric, &root, &mut zt, &mut builder.state)
            .map_err(|e| e.at_iteration(k))?;
        linalg::ensure_finite(&zt).map_err(|e| e.at_iteration(k))?;
        let d = diff(&z, &zt);
        let fb_residual = norm(&d) / (1.0 + norm(&z));
        model.apply_b(&zt, &mut bzt);
        let v = relaxation_direction(&metric, &d, &bz, &bzt);
        let (t, solved) = match relaxation_step(&d, &v) {
            Ok((t, _)) => (t, false),
            Err(Error::Solved) => (0.0, true),
            Err(e) => return Err(e.at_iteration(k)),
        };
        std::mem::swap(&mut z_prev, &mut z);
        z.copy_from_slice(&z_prev);
        if !solved {
            linalg::axpy(-t, &v, &mut z);
        }
        std::mem::swap(&mut bz_prev, &mut bz);
        model.apply_b(&z, &mut bz);
        let record = IterateRecord {
            k,
            diff_norm: linalg::dist(&z, &z_prev),
            step_param: t,
            fb_residual,
            root_iters: rep.iterations(),
            root_residual: rep.residual,
            root_tol: root.residual_tol,
            metric_sign: if metric.is_unperturbed() { None } else { metric.sign },
            gamma: metric.gamma,
            elapsed: start.elapsed(),
            hash: linalg::fingerprint(&z),
        };
        let control = on_iter(&record, &z);
        records.push(record);
        if solved {
            stop = StopReason::Solved;
            break;
        }
        if control.stop_requested() {
            stop = StopReason::Observer;
            break;
        }
        if cfg.stop_tol > 0.0 && fb_residual <= cfg.stop_tol {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(SolverOutcome {
        z,
        records,
        stop,
        metrics: builder.state,
    })
}

/// Dispatches on [`SolverConfig::variant`].
pub fn run<R: ObserverControl>(
    model: &dyn FbModel,
    cfg: &SolverConfig,
    z0: &[f64],
    on_iter: impl FnMut(&IterateRecord, &[f64]) -> R,
) -> Result<SolverOutcome> {
    match cfg.variant {
        Variant::Inertial => run_inertial(model, cfg, z0, on_iter),
        Variant::Relaxed => run_relaxed(model, cfg, z0, on_iter),
    }
}

/// Inertial solver on an inclusion problem with a diagonal base metric.
pub fn run_inertial_qnfbs(
    problem: &InclusionProblem,
    base: SpdBase,
    cfg: &SolverConfig,
    z0: &[f64],
) -> Result<SolverOutcome> {
    let model = DiagonalFbModel::new(problem, base)?;
    run_inertial(&model, cfg, z0, |_, _| {})
}

/// Relaxed solver on an inclusion problem with a diagonal base metric.
pub fn run_relaxed_qnfbs(
    problem: &InclusionProblem,
    base: SpdBase,
    cfg: &SolverConfig,
    z0: &[f64],
) -> Result<SolverOutcome> {
    let model = DiagonalFbModel::new(problem, base)?;
    run_relaxed(&model, cfg, z0, |_, _| {})
}
