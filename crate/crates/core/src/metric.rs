//! Base metrics, low-rank quasi-Newton perturbations, and the zero-memory
//! SR1 update with its step-scale safeguards.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm};
use crate::ops::Step;
use crate::pdhg::PdhgMetric;

/// Symmetric positive definite base metric `M₀`.
#[derive(Debug, Clone)]
pub enum SpdBase {
    /// `scale · I`. `inv_scale` is stored separately so that a metric built
    /// from a step `τ` applies its inverse as an exact multiplication by `τ`.
    ScaledIdentity { dim: usize, scale: f64, inv_scale: f64 },
    Diagonal { diag: Vec<f64>, inv: Vec<f64> },
    Pdhg(PdhgMetric),
}

impl SpdBase {
    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::NotPositiveDefinite(format!("scale {scale}")));
        }
        Ok(SpdBase::ScaledIdentity {
            dim,
            scale,
            inv_scale: 1.0 / scale,
        })
    }

    /// `M₀ = (1/τ) I`, the metric of a plain forward-backward step of size `τ`.
    pub fn from_step(dim: usize, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
        }
        Ok(SpdBase::ScaledIdentity {
            dim,
            scale: 1.0 / tau,
            inv_scale: tau,
        })
    }

    pub fn diagonal(diag: Vec<f64>) -> Result<Self> {
        linalg::ensure_finite(&diag)?;
        if let Some(d) = diag.iter().find(|d| **d <= 0.0) {
            return Err(Error::NotPositiveDefinite(format!("diagonal entry {d}")));
        }
        let inv = diag.iter().map(|d| 1.0 / d).collect();
        Ok(SpdBase::Diagonal { diag, inv })
    }

    pub fn dim(&self) -> usize {
        match self {
            SpdBase::ScaledIdentity { dim, .. } => *dim,
            SpdBase::Diagonal { diag, .. } => diag.len(),
            SpdBase::Pdhg(m) => m.dim(),
        }
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            SpdBase::ScaledIdentity { scale, .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = scale * v;
                }
            }
            SpdBase::Diagonal { diag, .. } => {
                for ((o, v), d) in out.iter_mut().zip(x).zip(diag) {
                    *o = d * v;
                }
            }
            SpdBase::Pdhg(m) => m.apply_into(x, out),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("base metric input", self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// `M₀⁻¹x`. The block metric is inverted iteratively; solver paths never
    /// need it.
    pub fn apply_inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("base metric inverse input", self.dim(), x.len())?;
        match self {
            SpdBase::ScaledIdentity { inv_scale, .. } => Ok(x.iter().map(|v| inv_scale * v).collect()),
            SpdBase::Diagonal { inv, .. } => Ok(x.iter().zip(inv).map(|(v, i)| i * v).collect()),
            SpdBase::Pdhg(m) => m.apply_inverse(x),
        }
    }

    /// The resolvent step `M₀⁻¹` when the base is diagonal.
    pub fn inverse_step(&self) -> Option<Step<'_>> {
        match self {
            SpdBase::ScaledIdentity { inv_scale, .. } => Some(Step::Scalar(*inv_scale)),
            SpdBase::Diagonal { inv, .. } => Some(Step::Diagonal(inv)),
            SpdBase::Pdhg(_) => None,
        }
    }

    /// Upper bound `C ≥ ‖M₀‖`.
    pub fn norm_bound(&self) -> f64 {
        match self {
            SpdBase::ScaledIdentity { scale, .. } => *scale,
            SpdBase::Diagonal { diag, .. } => diag.iter().fold(0.0f64, |a, &d| a.max(d)),
            SpdBase::Pdhg(m) => m.norm_bound(),
        }
    }

    /// Lower bound `σ` with `M₀ ⪰ σI`.
    pub fn rho_min(&self) -> f64 {
        match self {
            SpdBase::ScaledIdentity { scale, .. } => *scale,
            SpdBase::Diagonal { diag, .. } => diag.iter().fold(f64::INFINITY, |a, &d| a.min(d)),
            SpdBase::Pdhg(m) => m.rho_min(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        linalg::assemble_dense(n, n, |x, y| self.apply_into(x, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `V = M₀ ± γ Σⱼ uⱼuⱼᵀ`.
#[derive(Debug, Clone)]
pub struct QuasiNewtonMetric {
    pub base: Arc<SpdBase>,
    pub sign: Option<Sign>,
    pub gamma: f64,
    pub directions: Vec<Vec<f64>>,
}

impl QuasiNewtonMetric {
    pub fn unperturbed(base: Arc<SpdBase>) -> Self {
        QuasiNewtonMetric {
            base,
            sign: None,
            gamma: 0.0,
            directions: Vec::new(),
        }
    }

    pub fn rank_one(base: Arc<SpdBase>, sign: Sign, gamma: f64, u: Vec<f64>) -> Result<Self> {
        check_dim("metric direction", base.dim(), u.len())?;
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", format!("must be nonnegative, got {gamma}")));
        }
        Ok(QuasiNewtonMetric {
            base,
            sign: Some(sign),
            gamma,
            directions: vec![u],
        })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Whether the perturbation is absent or scaled to zero.
    pub fn is_unperturbed(&self) -> bool {
        self.sign.is_none() || self.gamma == 0.0 || self.directions.is_empty()
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.base.apply_into(x, out);
        if let Some(sign) = self.sign {
            let s = sign.as_f64() * self.gamma;
            for u in &self.directions {
                linalg::axpy(s * dot(u, x), u, out);
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("metric input", self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Sign and scaled directions `U = √γ [u₁ … u_r]`, as consumed by the
    /// resolvent calculus.
    pub fn low_rank_term(&self) -> crate::resolvent::LowRankTerm {
        match self.sign {
            Some(sign) if !self.is_unperturbed() => {
                let r = self.gamma.sqrt();
                crate::resolvent::LowRankTerm::new_unchecked(
                    sign,
                    self.directions.iter().map(|u| u.iter().map(|v| r * v).collect()).collect(),
                )
            }
            _ => crate::resolvent::LowRankTerm::none(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        linalg::assemble_dense(n, n, |x, y| self.apply_into(x, y))
    }

    /// Upper bound on `‖V‖`.
    pub fn norm_bound(&self) -> f64 {
        let extra: f64 = self.directions.iter().map(|u| dot(u, u)).sum::<f64>() * self.gamma;
        match self.sign {
            Some(Sign::Plus) => self.base.norm_bound() + extra,
            _ => self.base.norm_bound(),
        }
    }
}

/// `V x` for a quasi-Newton metric, with a dimension check.
pub fn metric_apply(v: &QuasiNewtonMetric, x: &[f64]) -> Result<Vec<f64>> {
    v.apply(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoUpdateReason {
    ZeroStep,
    DegenerateCurvature,
    ZeroDirection,
    SafeguardFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Osr1Update {
    Direction { sign: Sign, u: Vec<f64> },
    NoUpdate(NoUpdateReason),
}

/// Zero-memory SR1 direction from one secant pair `(s, y)`.
///
/// With `d = y − M₀s`, the update `M₀ ± uuᵀ` with `u = d/√|⟨d,s⟩|` satisfies
/// the secant equation exactly; the sign follows `⟨d,s⟩`.
pub fn osr1_direction(base: &SpdBase, s: &[f64], y: &[f64]) -> Result<Osr1Update> {
    check_dim("secant step", base.dim(), s.len())?;
    check_dim("secant change", base.dim(), y.len())?;
    let ns = norm(s);
    if ns == 0.0 {
        log::debug!("zero secant step, keeping the base metric");
        return Ok(Osr1Update::NoUpdate(NoUpdateReason::ZeroStep));
    }
    let mut d = vec![0.0; s.len()];
    base.apply_into(s, &mut d);
    for (di, yi) in d.iter_mut().zip(y) {
        *di = yi - *di;
    }
    let ds = dot(&d, s);
    let nd = norm(&d);
    if ds.abs() <= 1e-12 * nd * ns || nd == 0.0 {
        return Ok(Osr1Update::NoUpdate(NoUpdateReason::DegenerateCurvature));
    }
    let scale = 1.0 / ds.abs().sqrt();
    d.iter_mut().for_each(|v| *v *= scale);
    let sign = if ds > 0.0 { Sign::Plus } else { Sign::Minus };
    Ok(Osr1Update::Direction { sign, u: d })
}

/// The scale under which `M₀ ± γuuᵀ` satisfies the secant equation.
pub fn secant_gamma() -> f64 {
    1.0
}

fn safeguard_margin(base: &SpdBase, beta: f64) -> Result<f64> {
    let margin = base.rho_min() - 1.0 / beta;
    if margin > 0.0 {
        Ok(margin)
    } else {
        Err(Error::AssumptionViolation(format!(
            "rho_min(M0) - 1/beta = {margin:e} is not positive"
        )))
    }
}

/// Caps `requested` so that a minus-sign metric keeps
/// `V − (1/β)I ⪰ (1 − c)(ρ_min(M₀) − 1/β) I`.
pub fn safeguard_gamma_minus(base: &SpdBase, u: &[f64], beta: f64, c: f64, requested: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::invalid("c", format!("must lie in (0, 1), got {c}")));
    }
    let margin = safeguard_margin(base, beta)?;
    let uu = dot(u, u);
    if uu == 0.0 {
        return Ok(requested.max(0.0));
    }
    Ok(requested.max(0.0).min(c * margin / uu))
}

/// Summable sequence `η_k = η₀ / k^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSchedule {
    pub eta0: f64,
    pub power: f64,
}

impl EtaSchedule {
    pub fn new(eta0: f64) -> Self {
        EtaSchedule { eta0, power: 2.0 }
    }

    pub fn at(&self, k: usize) -> f64 {
        self.eta0 / (k.max(1) as f64).powf(self.power)
    }
}

impl Default for EtaSchedule {
    fn default() -> Self {
        Self::new(1.0)
    }
}

/// `γ_k = min(η_k, ρ_min(M₀ − I/β)) / ‖u‖²`, or `None` when `u = 0`.
pub fn safeguard_gamma_summable(
    k: usize,
    u: &[f64],
    eta: &EtaSchedule,
    base: &SpdBase,
    beta: f64,
) -> Result<Option<f64>> {
    let margin = safeguard_margin(base, beta)?;
    let uu = dot(u, u);
    if uu == 0.0 {
        return Ok(None);
    }
    Ok(Some(eta.at(k).min(margin) / uu))
}

/// How the scale `γ_k` of the rank-one term is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    /// `γ = 1`; the secant equation holds exactly.
    Secant,
    /// Secant scale, capped for the minus sign to keep a margin `1 − c`.
    SafeguardA2 { c: f64 },
    /// `γ_k = min(η_k, ρ_min(M₀ − I/β)) / ‖u‖²`.
    SafeguardA1 { eta: EtaSchedule },
    /// `γ = scale / ‖u‖²`, i.e. a perturbation `± scale · ûûᵀ`.
    Fixed { scale: f64 },
}

/// Whether the solver perturbs its metric at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricMode {
    Off,
    Sr1(GammaRule),
}

/// Builds the iteration-`k` metric from a secant pair under `rule`.
///
/// Returns the metric and, when the base metric was kept, the reason.
pub fn build_sr1_metric(
    base: &Arc<SpdBase>,
    k: usize,
    s: &[f64],
    y: &[f64],
    rule: GammaRule,
    beta: f64,
) -> Result<(QuasiNewtonMetric, Option<NoUpdateReason>)> {
    let (sign, u) = match osr1_direction(base, s, y)? {
        Osr1Update::Direction { sign, u } => (sign, u),
        Osr1Update::NoUpdate(reason) => {
            return Ok((QuasiNewtonMetric::unperturbed(base.clone()), Some(reason)));
        }
    };
    let uu = dot(&u, &u);
    let gamma = match rule {
        GammaRule::Secant => secant_gamma(),
        GammaRule::SafeguardA2 { c } => match sign {
            Sign::Plus => secant_gamma(),
            Sign::Minus => safeguard_gamma_minus(base, &u, beta, c, secant_gamma())?,
        },
        GammaRule::SafeguardA1 { eta } => match safeguard_gamma_summable(k, &u, &eta, base, beta)? {
            Some(g) => g,
            None => {
                return Ok((
                    QuasiNewtonMetric::unperturbed(base.clone()),
                    Some(NoUpdateReason::ZeroDirection),
                ))
            }
        },
        GammaRule::Fixed { scale } => scale / uu,
    };
    if gamma == 0.0 || !gamma.is_finite() {
        return Ok((
            QuasiNewtonMetric::unperturbed(base.clone()),
            Some(NoUpdateReason::ZeroDirection),
        ));
    }
    Ok((QuasiNewtonMetric::rank_one(base.clone(), sign, gamma, u)?, None))
}

/// Running bookkeeping for the metric sequence of one solve.
#[derive(Debug, Clone, Default)]
pub struct MetricScheduleState {
    /// `η_k` values used so far (zero when the rule has no schedule).
    pub eta: Vec<f64>,
    /// Running supremum of the norm bounds of `M_k`.
    pub sup_norm: f64,
    pub updates_plus: usize,
    pub updates_minus: usize,
    pub no_updates: usize,
    /// Minus-sign metrics rejected because the root problem lost its bracket.
    pub safeguard_fallbacks: usize,
}

impl MetricScheduleState {
    pub fn record(&mut self, k: usize, metric: &QuasiNewtonMetric, rule: Option<GammaRule>) {
        let eta = match rule {
            Some(GammaRule::SafeguardA1 { eta }) => eta.at(k),
            _ => 0.0,
        };
        self.eta.push(eta);
        self.sup_norm = self.sup_norm.max(metric.norm_bound());
        match (metric.is_unperturbed(), metric.sign) {
            (false, Some(Sign::Plus)) => self.updates_plus += 1,
            (false, Some(Sign::Minus)) => self.updates_minus += 1,
            _ => self.no_updates += 1,
        }
    }

    pub fn eta_partial_sum(&self) -> f64 {
        self.eta.iter().sum()
    }
}

/// Parameters for [`assumption_report`].
#[derive(Debug, Clone)]
pub struct AssumptionCheck {
    pub beta: f64,
    /// Required margin `c` in `M_k − I/β ⪰ cI`.
    pub margin: f64,
    /// Required bound `C` on `‖M_k‖`.
    pub bound: f64,
    /// Schedule for the chain condition; `None` means `η_k = 0`.
    pub eta: Option<EtaSchedule>,
    /// Random probes per check above the dense threshold.
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionEntry {
    pub k: usize,
    /// Smallest observed eigenvalue (or Rayleigh quotient) of `M_k − I/β`.
    pub margin: f64,
    pub margin_ok: bool,
    pub norm: f64,
    pub bound_ok: bool,
    /// `(1+η_k)M_k ⪰ M_{k+1}`; `None` for the last metric.
    pub chain_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionEntry>,
    pub dense: bool,
}

impl AssumptionReport {
    pub fn margin_violations(&self) -> usize {
        self.entries.iter().filter(|e| !e.margin_ok).count()
    }

    pub fn bound_violations(&self) -> usize {
        self.entries.iter().filter(|e| !e.bound_ok).count()
    }

    pub fn chain_violations(&self) -> usize {
        self.entries.iter().filter(|e| e.chain_ok == Some(false)).count()
    }
}

const DENSE_LIMIT: usize = 64;

/// Checks the metric sequence against the margin, boundedness, and chain
/// conditions. Dense eigenvalue checks are used up to 64 dimensions;
/// above that, Rayleigh quotients on random probes and the perturbation
/// directions stand in. The report never fails a solve.
pub fn assumption_report(history: &[QuasiNewtonMetric], check: &AssumptionCheck) -> AssumptionReport {
    let Some(first) = history.first() else {
        return AssumptionReport {
            entries: Vec::new(),
            dense: true,
        };
    };
    let n = first.dim();
    let dense = n <= DENSE_LIMIT;
    let inv_beta = if check.beta.is_finite() { 1.0 / check.beta } else { 0.0 };
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let probes: Vec<Vec<f64>> = if dense {
        Vec::new()
    } else {
        (0..check.samples)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    };
    let dense_mats: Vec<DMatrix<f64>> = if dense {
        history.iter().map(|m| m.to_dense()).collect()
    } else {
        Vec::new()
    };

    let rayleigh = |apply: &dyn Fn(&[f64], &mut [f64]), extra: &[&[f64]]| -> f64 {
        let mut best = f64::INFINITY;
        let mut out = vec![0.0; n];
        for p in probes.iter().map(|p| p.as_slice()).chain(extra.iter().copied()) {
            let pp = dot(p, p);
            if pp == 0.0 {
                continue;
            }
            apply(p, &mut out);
            best = best.min(dot(p, &out) / pp);
        }
        best
    };

    let mut entries = Vec::with_capacity(history.len());
    for (k, m) in history.iter().enumerate() {
        let (margin, norm_v) = if dense {
            let shifted = &dense_mats[k] - DMatrix::identity(n, n) * inv_beta;
            (linalg::min_eigenvalue(&shifted), linalg::spectral_norm(&dense_mats[k]))
        } else {
            let dirs: Vec<&[f64]> = m.directions.iter().map(|u| u.as_slice()).collect();
            let mg = rayleigh(
                &|x, out| {
                    m.apply_into(x, out);
                    linalg::axpy(-inv_beta, x, out);
                },
                &dirs,
            );
            (mg, m.norm_bound())
        };
        let chain_ok = history.get(k + 1).map(|next| {
            let eta = check.eta.map(|e| e.at(k + 1)).unwrap_or(0.0);
            let scale = 1.0 + m.norm_bound().max(next.norm_bound());
            if dense {
                let diff = &dense_mats[k] * (1.0 + eta) - &dense_mats[k + 1];
                linalg::min_eigenvalue(&diff) >= -tol * scale
            } else {
                let dirs: Vec<&[f64]> = m
                    .directions
                    .iter()
                    .chain(&next.directions)
                    .map(|u| u.as_slice())
                    .collect();
                let q = rayleigh(
                    &|x, out| {
                        m.apply_into(x, out);
                        out.iter_mut().for_each(|v| *v *= 1.0 + eta);
                        let mut t = vec![0.0; n];
                        next.apply_into(x, &mut t);
                        linalg::axpy(-1.0, &t, out);
                    },
                    &dirs,
                );
                q >= -tol * scale
            }
        });
        entries.push(AssumptionEntry {
            k,
            margin,
            margin_ok: margin >= check.margin - tol,
            norm: norm_v,
            bound_ok: norm_v <= check.bound * (1.0 + 1e-12),
            chain_ok,
        });
    }
    AssumptionReport { entries, dense }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Arc<SpdBase> {
        Arc::new(SpdBase::scaled_identity(n, 1.0).unwrap())
    }

    #[test]
    fn osr1_plus_and_minus_examples() {
        let m = identity(2);
        assert_eq!(
            osr1_direction(&m, &[1.0, 0.0], &[2.0, 0.0]).unwrap(),
            Osr1Update::Direction {
                sign: Sign::Plus,
                u: vec![1.0, 0.0]
            }
        );
        match osr1_direction(&m, &[1.0, 0.0], &[0.5, 0.0]).unwrap() {
            Osr1Update::Direction { sign, u } => {
                assert_eq!(sign, Sign::Minus);
                assert!((u[0] + 0.5f64.sqrt()).abs() < 1e-15 && u[1] == 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            osr1_direction(&m, &[1.0, 2.0], &[1.0, 2.0]).unwrap(),
            Osr1Update::NoUpdate(NoUpdateReason::DegenerateCurvature)
        );
        assert_eq!(
            osr1_direction(&m, &[0.0, 0.0], &[1.0, 2.0]).unwrap(),
            Osr1Update::NoUpdate(NoUpdateReason::ZeroStep)
        );
    }

    #[test]
    fn secant_equation_holds_with_unit_gamma() {
        let m = identity(2);
        for y in [[2.0, 0.0], [0.5, 0.0]] {
            let (v, reason) = build_sr1_metric(&m, 1, &[1.0, 0.0], &y, GammaRule::Secant, 1.0).unwrap();
            assert!(reason.is_none());
            let vs = v.apply(&[1.0, 0.0]).unwrap();
            assert!((vs[0] - y[0]).abs() < 1e-15 && vs[1].abs() < 1e-15);
        }
    }

    #[test]
    fn minus_safeguard_caps() {
        let m = SpdBase::scaled_identity(2, 2.0).unwrap();
        assert!((safeguard_gamma_minus(&m, &[1.0, 0.0], 1.0, 0.5, f64::INFINITY).unwrap() - 0.5).abs() < 1e-15);
        assert!((safeguard_gamma_minus(&m, &[2.0, 0.0], 1.0, 0.5, f64::INFINITY).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(safeguard_gamma_minus(&m, &[1.0, 0.0], 1.0, 0.5, 0.0).unwrap(), 0.0);
        let tight = SpdBase::scaled_identity(2, 1.0).unwrap();
        assert!(matches!(
            safeguard_gamma_minus(&tight, &[1.0, 0.0], 1.0, 0.5, 1.0),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn summable_safeguard() {
        let m = SpdBase::scaled_identity(2, 2.0).unwrap();
        let eta = EtaSchedule::new(1.0);
        let g = safeguard_gamma_summable(2, &[1.0, 0.0], &eta, &m, 1.0).unwrap().unwrap();
        assert!((g - 0.25).abs() < 1e-15);
        let far = safeguard_gamma_summable(1_000_000, &[1.0, 0.0], &eta, &m, 1.0).unwrap().unwrap();
        assert!(far < 1e-11);
        assert_eq!(safeguard_gamma_summable(2, &[0.0, 0.0], &eta, &m, 1.0).unwrap(), None);
    }

    #[test]
    fn metric_apply_examples() {
        let m = identity(2);
        let none = QuasiNewtonMetric::unperturbed(m.clone());
        assert_eq!(metric_apply(&none, &[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        let v = QuasiNewtonMetric::rank_one(m, Sign::Plus, 1.0, vec![1.0, 0.0]).unwrap();
        assert_eq!(metric_apply(&v, &[1.0, 1.0]).unwrap(), vec![2.0, 1.0]);
        assert_eq!(metric_apply(&v, &[0.0, 3.0]).unwrap(), vec![0.0, 3.0]);
    }

    #[test]
    fn constant_sequence_satisfies_chain() {
        let m = identity(3);
        let v = QuasiNewtonMetric::rank_one(m, Sign::Plus, 0.5, vec![1.0, 1.0, 0.0]).unwrap();
        let history = vec![v.clone(), v.clone(), v];
        let report = assumption_report(
            &history,
            &AssumptionCheck {
                beta: 2.0,
                margin: 0.1,
                bound: 10.0,
                eta: None,
                samples: 16,
                seed: 1,
            },
        );
        assert!(report.dense);
        assert_eq!(report.chain_violations(), 0);
        assert_eq!(report.margin_violations(), 0);
    }
}
