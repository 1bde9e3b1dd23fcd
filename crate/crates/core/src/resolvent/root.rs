//! Root finding for the strictly monotone maps produced by the resolvent
//! calculus: bisection, semi-smooth Newton, and a safeguarded hybrid.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, norm};

/// A map `α ↦ l(α)` on `ℝʳ` whose evaluation also produces a point `x(α)` of
/// the underlying space (the resolvent output at that `α`).
pub trait RootMap {
    fn rank(&self) -> usize;

    /// Length of the point written by [`RootMap::eval`].
    fn point_dim(&self) -> usize;

    /// Writes `x(α)` into `x` and `l(α)` into `l`.
    fn eval(&self, alpha: &[f64], x: &mut [f64], l: &mut [f64]);

    /// An element of the generalized Jacobian at `α`, given `x = x(α)`.
    fn jacobian(&self, _alpha: &[f64], _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Multiplier applied to the configured residual tolerance.
    fn residual_scale(&self) -> f64 {
        1.0
    }

    /// For `r = 1`: a constant `c > 0` with `l(α') − l(α) ≥ c(α' − α)`.
    fn slope_lower_bound(&self) -> Option<f64> {
        None
    }

    /// For `r = 1`: an a priori half-width of a bracket around the root.
    fn zeta_hint(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    /// No perturbation; the base resolvent was returned directly.
    Trivial,
    Bisection,
    Newton,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootConfig {
    /// Method for `r = 1`; `r > 1` always uses damped Newton.
    pub method: RootMethod,
    /// Absolute residual tolerance, scaled by [`RootMap::residual_scale`].
    pub residual_tol: f64,
    /// Bisection stops once the bracket is narrower than `width_rel · ζ`.
    pub width_rel: f64,
    pub newton_cap: usize,
    pub bisection_cap: usize,
    /// Hybrid switches to Newton once the bracket is at most this wide.
    /// `None` uses the initial bracket width, so Newton starts immediately
    /// from the bracket midpoint.
    pub switch_width: Option<f64>,
    /// Inexact Newton: solve `G d = −l` only up to `η_k‖G‖₂` with
    /// `η_k = η₀/(k+1)²`.
    pub inexact_eta0: Option<f64>,
    /// Use central differences even when a closed-form element exists.
    pub finite_difference: bool,
    pub max_doublings: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            method: RootMethod::Hybrid,
            residual_tol: 1e-10,
            width_rel: 1e-12,
            newton_cap: 50,
            bisection_cap: 200,
            switch_width: None,
            inexact_eta0: None,
            finite_difference: false,
            max_doublings: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSolveReport {
    pub alpha: Vec<f64>,
    pub residual: f64,
    pub bisection_iters: usize,
    pub newton_iters: usize,
    /// Total evaluations of `l`, including bracket checks and line searches.
    pub evaluations: usize,
    /// Times the hybrid driver abandoned a Newton step for bisection.
    pub fallbacks: usize,
    pub method: RootMethod,
    /// Bracket half-width actually used, when one was needed.
    pub zeta: Option<f64>,
}

impl RootSolveReport {
    pub fn iterations(&self) -> usize {
        self.bisection_iters + self.newton_iters
    }

    pub(crate) fn trivial(rank: usize) -> Self {
        RootSolveReport {
            alpha: vec![0.0; rank],
            residual: 0.0,
            bisection_iters: 0,
            newton_iters: 0,
            evaluations: 0,
            fallbacks: 0,
            method: RootMethod::Trivial,
            zeta: None,
        }
    }
}

/// Scalar root function given by closures; the point space is empty.
pub struct FnRoot<F, G = fn(f64) -> f64> {
    f: F,
    slope: Option<G>,
}

impl<F: Fn(f64) -> f64> FnRoot<F> {
    pub fn new(f: F) -> Self {
        FnRoot { f, slope: None }
    }
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> FnRoot<F, G> {
    pub fn with_slope(f: F, slope: G) -> Self {
        FnRoot { f, slope: Some(slope) }
    }
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> RootMap for FnRoot<F, G> {
    fn rank(&self) -> usize {
        1
    }

    fn point_dim(&self) -> usize {
        0
    }

    fn eval(&self, alpha: &[f64], _x: &mut [f64], l: &mut [f64]) {
        l[0] = (self.f)(alpha[0]);
    }

    fn jacobian(&self, alpha: &[f64], _x: &[f64]) -> Option<DMatrix<f64>> {
        self.slope.as_ref().map(|g| DMatrix::from_element(1, 1, g(alpha[0])))
    }
}

/// Evaluation workspace tracking the count of `l` evaluations.
struct Evaluator<'a> {
    map: &'a dyn RootMap,
    evals: usize,
    l: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(map: &'a dyn RootMap) -> Self {
        Evaluator {
            map,
            evals: 0,
            l: vec![0.0; map.rank()],
        }
    }

    fn eval(&mut self, alpha: &[f64], x: &mut [f64]) -> &[f64] {
        self.evals += 1;
        self.map.eval(alpha, x, &mut self.l);
        &self.l
    }

    fn scalar(&mut self, alpha: f64, x: &mut [f64]) -> f64 {
        self.eval(&[alpha], x)[0]
    }

    fn jacobian(&mut self, alpha: &[f64], x: &[f64], cfg: &RootConfig) -> DMatrix<f64> {
        if !cfg.finite_difference {
            if let Some(g) = self.map.jacobian(alpha, x) {
                return g;
            }
        }
        let r = alpha.len();
        let mut g = DMatrix::zeros(r, r);
        let mut scratch = vec![0.0; self.map.point_dim()];
        let mut a = alpha.to_vec();
        let mut lp = vec![0.0; r];
        let mut lm = vec![0.0; r];
        for j in 0..r {
            let h = 1e-6 * (1.0 + alpha[j].abs());
            a[j] = alpha[j] + h;
            self.evals += 1;
            self.map.eval(&a, &mut scratch, &mut lp);
            a[j] = alpha[j] - h;
            self.evals += 1;
            self.map.eval(&a, &mut scratch, &mut lm);
            a[j] = alpha[j];
            for i in 0..r {
                g[(i, j)] = (lp[i] - lm[i]) / (2.0 * h);
            }
        }
        g
    }
}

/// A sign-change bracket `[lo, hi]` with `l(lo) < 0 < l(hi)`.
struct Bracket {
    lo: f64,
    hi: f64,
    zeta: f64,
}

enum BracketOutcome {
    Bracket(Bracket),
    Root { alpha: f64, residual: f64, zeta: f64 },
}

fn establish_bracket(
    ev: &mut Evaluator<'_>,
    zeta: f64,
    tol: f64,
    cfg: &RootConfig,
    x: &mut [f64],
) -> Result<BracketOutcome> {
    // Endpoint evaluations go to a scratch point so `x` keeps whatever the
    // caller evaluated last, unless an endpoint turns out to be the root.
    let mut scratch = vec![0.0; x.len()];
    let mut zeta = if zeta.is_finite() && zeta > 0.0 { zeta } else { 1.0 };
    for _ in 0..=cfg.max_doublings {
        for alpha in [zeta, -zeta] {
            let l = ev.scalar(alpha, &mut scratch);
            if l.abs() <= tol {
                x.copy_from_slice(&scratch);
                return Ok(BracketOutcome::Root {
                    alpha,
                    residual: l.abs(),
                    zeta,
                });
            }
            if !l.is_finite() {
                return Err(Error::NonFinite(0));
            }
            let wrong_side = if alpha > 0.0 { l < 0.0 } else { l > 0.0 };
            if wrong_side {
                break;
            }
            if alpha < 0.0 {
                return Ok(BracketOutcome::Bracket(Bracket { lo: -zeta, hi: zeta, zeta }));
            }
        }
        zeta *= 2.0;
    }
    Err(Error::BracketViolation {
        zeta: zeta / 2.0,
        doublings: cfg.max_doublings,
    })
}

fn require_scalar(map: &dyn RootMap) -> Result<()> {
    if map.rank() != 1 {
        return Err(Error::invalid("rank", format!("scalar root solver needs r = 1, got {}", map.rank())));
    }
    Ok(())
}

/// Bisection on `[−ζ, ζ]` for a strictly increasing scalar `l`.
///
/// Stops when `|l| ≤ tol`, or when successive midpoints differ by less than
/// `width_rel · ζ`. `x` receives the point at the returned root.
pub fn bisection_root(map: &dyn RootMap, zeta: f64, cfg: &RootConfig, x: &mut [f64]) -> Result<RootSolveReport> {
    require_scalar(map)?;
    let tol = cfg.residual_tol * map.residual_scale();
    let mut ev = Evaluator::new(map);
    let br = match establish_bracket(&mut ev, zeta, tol, cfg, x)? {
        BracketOutcome::Root { alpha, residual, zeta } => {
            return Ok(RootSolveReport {
                alpha: vec![alpha],
                residual,
                evaluations: ev.evals,
                zeta: Some(zeta),
                ..RootSolveReport::trivial(1)
            }
            .with_method(RootMethod::Bisection))
        }
        BracketOutcome::Bracket(b) => b,
    };
    let (mut lo, mut hi) = (br.lo, br.hi);
    let width_tol = cfg.width_rel * br.zeta;
    let mut prev = f64::NAN;
    let mut iters = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let l = ev.scalar(mid, x);
        iters += 1;
        let done = l.abs() <= tol || (iters > 1 && (mid - prev).abs() < width_tol) || hi - lo <= width_tol;
        if done || iters >= cfg.bisection_cap {
            if !done {
                log::warn!("bisection hit its cap with residual {:e}", l.abs());
            }
            return Ok(RootSolveReport {
                alpha: vec![mid],
                residual: l.abs(),
                bisection_iters: iters,
                newton_iters: 0,
                evaluations: ev.evals,
                fallbacks: 0,
                method: RootMethod::Bisection,
                zeta: Some(br.zeta),
            });
        }
        if l > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        prev = mid;
    }
}

impl RootSolveReport {
    fn with_method(mut self, method: RootMethod) -> Self {
        self.method = method;
        self
    }
}

/// Solves `G d = −l`, exactly or up to `‖Gd + l‖ ≤ η‖G‖₂`.
fn newton_direction(g: &DMatrix<f64>, l: &[f64], eta: Option<f64>) -> Result<Vec<f64>> {
    let r = l.len();
    let rhs = DVector::from_iterator(r, l.iter().map(|v| -v));
    match eta {
        None => {
            let lu = g.clone().lu();
            let d = lu.solve(&rhs).ok_or(Error::SingularJacobian)?;
            if d.iter().all(|v| v.is_finite()) {
                Ok(d.as_slice().to_vec())
            } else {
                Err(Error::SingularJacobian)
            }
        }
        Some(eta) => {
            // Conjugate gradients on the normal equations, stopped as soon as
            // the linear residual meets the inexactness bound.
            let gn = linalg::spectral_norm(g);
            if gn == 0.0 {
                return Err(Error::SingularJacobian);
            }
            let target = eta * gn;
            let gt = g.transpose();
            let mut d = DVector::zeros(r);
            let mut res = rhs.clone();
            let mut p = &gt * &res;
            let mut s = p.clone();
            let mut ss = s.norm_squared();
            for _ in 0..(4 * r + 4) {
                if res.norm() <= target {
                    break;
                }
                let q = g * &p;
                let qq = q.norm_squared();
                if qq == 0.0 {
                    return Err(Error::SingularJacobian);
                }
                let a = ss / qq;
                d += &p * a;
                res -= &q * a;
                s = &gt * &res;
                let ss_new = s.norm_squared();
                p = &s + &p * (ss_new / ss);
                ss = ss_new;
            }
            Ok(d.as_slice().to_vec())
        }
    }
}

/// Semi-smooth Newton from `alpha0` with backtracking on `‖l‖`.
///
/// Fails with [`Error::SingularJacobian`] when the generalized Jacobian
/// element cannot be inverted and with [`Error::RootNotConverged`] when no
/// step reduces the residual or the iteration cap is reached.
pub fn newton_root(map: &dyn RootMap, alpha0: &[f64], cfg: &RootConfig, x: &mut [f64]) -> Result<RootSolveReport> {
    let r = map.rank();
    if alpha0.len() != r {
        return Err(Error::DimensionMismatch {
            context: "newton start",
            expected: r,
            got: alpha0.len(),
        });
    }
    let tol = cfg.residual_tol * map.residual_scale();
    let mut ev = Evaluator::new(map);
    let mut alpha = alpha0.to_vec();
    let mut l = ev.eval(&alpha, x).to_vec();
    let mut res = norm(&l);
    let mut xc = vec![0.0; x.len()];
    let mut iters = 0;
    while res > tol {
        if iters >= cfg.newton_cap {
            return Err(Error::RootNotConverged {
                residual: res,
                iterations: iters,
            });
        }
        let g = ev.jacobian(&alpha, x, cfg);
        let eta = cfg.inexact_eta0.map(|e0| e0 / ((iters + 1) as f64).powi(2));
        let d = newton_direction(&g, &l, eta)?;
        let mut t = 1.0;
        let mut accepted = None;
        while t >= 1e-10 {
            let cand: Vec<f64> = alpha.iter().zip(&d).map(|(a, di)| a + t * di).collect();
            let lc = ev.eval(&cand, &mut xc).to_vec();
            let rc = norm(&lc);
            if rc <= (1.0 - 1e-4 * t) * res || rc <= tol {
                accepted = Some((cand, lc, rc));
                break;
            }
            t *= 0.5;
        }
        iters += 1;
        let Some((cand, lc, rc)) = accepted else {
            return Err(Error::RootNotConverged {
                residual: res,
                iterations: iters,
            });
        };
        alpha = cand;
        l = lc;
        res = rc;
        x.copy_from_slice(&xc);
    }
    Ok(RootSolveReport {
        alpha,
        residual: res,
        bisection_iters: 0,
        newton_iters: iters,
        evaluations: ev.evals,
        fallbacks: 0,
        method: RootMethod::Newton,
        zeta: None,
    })
}

/// Bisection until the bracket is at most `cfg.switch_width` wide, then
/// Newton steps kept inside the bracket. A Newton step that leaves the
/// bracket, meets a nonpositive slope, or fails to reduce the residual over
/// three steps hands control back to bisection.
pub fn hybrid_root(map: &dyn RootMap, zeta: f64, cfg: &RootConfig, x: &mut [f64]) -> Result<RootSolveReport> {
    hybrid_from(map, zeta, cfg, x, None)
}

fn hybrid_from(
    map: &dyn RootMap,
    zeta: f64,
    cfg: &RootConfig,
    x: &mut [f64],
    start: Option<(f64, f64, usize)>,
) -> Result<RootSolveReport> {
    require_scalar(map)?;
    let tol = cfg.residual_tol * map.residual_scale();
    let mut ev = Evaluator::new(map);
    if let Some((_, _, evals)) = start {
        ev.evals = evals;
    }
    let br = match establish_bracket(&mut ev, zeta, tol, cfg, x)? {
        BracketOutcome::Root { alpha, residual, zeta } => {
            return Ok(RootSolveReport {
                alpha: vec![alpha],
                residual,
                evaluations: ev.evals,
                zeta: Some(zeta),
                ..RootSolveReport::trivial(1)
            }
            .with_method(RootMethod::Hybrid))
        }
        BracketOutcome::Bracket(b) => b,
    };
    let (mut lo, mut hi) = (br.lo, br.hi);
    let width_tol = cfg.width_rel * br.zeta;
    let mut switch = cfg.switch_width.unwrap_or(hi - lo);
    let mut bis = 0usize;
    let mut newt = 0usize;
    let mut fallbacks = 0usize;
    // Current Newton iterate; its point is kept in `x`.
    let mut cur: Option<(f64, f64)> = None;
    if let Some((a, la, _)) = start {
        if a > lo && a < hi {
            cur = Some((a, la));
        }
    }
    let mut history: Vec<f64> = Vec::new();
    let finish = |alpha: f64, residual: f64, bis, newt, fallbacks, evals| RootSolveReport {
        alpha: vec![alpha],
        residual,
        bisection_iters: bis,
        newton_iters: newt,
        evaluations: evals,
        fallbacks,
        method: RootMethod::Hybrid,
        zeta: Some(br.zeta),
    };
    loop {
        if bis >= cfg.bisection_cap || newt >= cfg.newton_cap {
            let residual = cur.map(|c| c.1.abs()).unwrap_or(f64::INFINITY);
            return Err(Error::RootNotConverged {
                residual,
                iterations: bis + newt,
            });
        }
        if hi - lo > switch || cur.is_none() {
            let mid = 0.5 * (lo + hi);
            let l = ev.scalar(mid, x);
            bis += 1;
            if l.abs() <= tol || hi - lo <= 2.0 * width_tol {
                return Ok(finish(mid, l.abs(), bis, newt, fallbacks, ev.evals));
            }
            if l > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            cur = Some((mid, l));
            history.clear();
            continue;
        }
        let (a, la) = cur.expect("newton iterate present");
        let g = ev.jacobian(&[a], x, cfg)[(0, 0)];
        let cand = a - la / g;
        if !(g > 0.0 && g.is_finite()) || !(cand > lo && cand < hi) {
            fallbacks += 1;
            switch = 0.5 * (hi - lo);
            cur = None;
            continue;
        }
        let l = ev.scalar(cand, x);
        newt += 1;
        if l.abs() <= tol {
            return Ok(finish(cand, l.abs(), bis, newt, fallbacks, ev.evals));
        }
        if l > 0.0 {
            hi = cand;
        } else {
            lo = cand;
        }
        history.push(l.abs());
        cur = Some((cand, l));
        if hi - lo <= width_tol {
            return Ok(finish(cand, l.abs(), bis, newt, fallbacks, ev.evals));
        }
        let n = history.len();
        if n >= 4 && history[n - 1] >= history[n - 4] {
            fallbacks += 1;
            switch = 0.5 * (hi - lo);
            cur = None;
            history.clear();
        }
    }
}

/// Solves `l(α) = 0` with the configured method. For `r = 1` the bracket
/// half-width combines the map's a priori hint with `|l(0)|/c` when a slope
/// bound `c` is known, which always contains the root.
pub fn solve_root(map: &dyn RootMap, cfg: &RootConfig, x: &mut [f64]) -> Result<RootSolveReport> {
    let r = map.rank();
    if r == 0 {
        let mut l = [];
        map.eval(&[], x, &mut l);
        return Ok(RootSolveReport::trivial(0));
    }
    if r > 1 {
        return newton_root(map, &vec![0.0; r], cfg, x);
    }
    let tol = cfg.residual_tol * map.residual_scale();
    let mut l0 = [0.0];
    map.eval(&[0.0], x, &mut l0);
    let l0 = l0[0];
    if l0.abs() <= tol {
        return Ok(RootSolveReport {
            residual: l0.abs(),
            evaluations: 1,
            ..RootSolveReport::trivial(1)
        }
        .with_method(cfg.method));
    }
    let mut zeta = map.zeta_hint().unwrap_or(0.0);
    if let Some(c) = map.slope_lower_bound().filter(|c| *c > 0.0) {
        zeta = zeta.max(l0.abs() / c * (1.0 + 1e-9) + f64::MIN_POSITIVE);
    }
    if !(zeta > 0.0 && zeta.is_finite()) {
        zeta = l0.abs().max(1.0);
    }
    let mut rep = match cfg.method {
        RootMethod::Bisection => bisection_root(map, zeta, cfg, x)?,
        RootMethod::Newton => match newton_root(map, &[0.0], cfg, x) {
            Ok(r) => r,
            Err(e) => {
                log::debug!("newton failed ({e}), falling back to bisection");
                let mut r = bisection_root(map, zeta, cfg, x)?;
                r.fallbacks += 1;
                r
            }
        },
        RootMethod::Hybrid | RootMethod::Trivial => hybrid_from(map, zeta, cfg, x, Some((0.0, l0, 0)))?,
    };
    rep.evaluations += 1;
    Ok(rep)
}

/// The a priori bracket half-width `‖u‖(2‖z‖ + ‖J(0)‖)`.
pub fn prop_bound(u_norm: f64, z_norm: f64, j0_norm: f64) -> f64 {
    u_norm * (2.0 * z_norm + j0_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_identity_root() {
        let f = FnRoot::new(|a| a);
        let rep = bisection_root(&f, 1.0, &RootConfig::default(), &mut []).unwrap();
        assert!(rep.alpha[0].abs() < 1e-10);
    }

    #[test]
    fn bisection_iteration_count_matches_halving() {
        // Root at an irrational point so no midpoint hits it exactly.
        let root = 1.0 / 3.0_f64.sqrt();
        let f = FnRoot::new(move |a| a - root);
        let cfg = RootConfig {
            residual_tol: 0.0,
            width_rel: 1e-6,
            ..RootConfig::default()
        };
        let rep = bisection_root(&f, 1.0, &cfg, &mut []).unwrap();
        let expected = (2.0f64 / 1e-6).log2().ceil() as usize;
        assert!(rep.bisection_iters <= expected + 1, "{} vs {}", rep.bisection_iters, expected);
        assert!((rep.alpha[0] - root).abs() < 2e-6);
    }

    #[test]
    fn bisection_doubles_a_short_bracket() {
        let f = FnRoot::new(|a| a - 3.0);
        let rep = bisection_root(&f, 1.0, &RootConfig::default(), &mut []).unwrap();
        assert!((rep.alpha[0] - 3.0).abs() < 1e-9);
        assert!(rep.zeta.unwrap() >= 3.0);
    }

    #[test]
    fn bracket_violation_is_reported() {
        let f = FnRoot::new(|a: f64| a * a + 1.0);
        let err = bisection_root(&f, 1.0, &RootConfig::default(), &mut []).unwrap_err();
        assert!(matches!(err, Error::BracketViolation { doublings: 8, .. }));
    }

    #[test]
    fn newton_linear_in_one_step() {
        let f = FnRoot::with_slope(|a| 3.0 * a, |_| 3.0);
        let rep = newton_root(&f, &[7.0], &RootConfig::default(), &mut []).unwrap();
        assert_eq!(rep.newton_iters, 1);
        assert_eq!(rep.alpha[0], 0.0);
        let at_root = newton_root(&f, &[0.0], &RootConfig::default(), &mut []).unwrap();
        assert_eq!(at_root.newton_iters, 0);
    }

    #[test]
    fn newton_with_finite_differences() {
        let f = FnRoot::new(|a: f64| a + a.powi(3) - 2.0);
        let rep = newton_root(&f, &[0.0], &RootConfig::default(), &mut []).unwrap();
        assert!((rep.alpha[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inexact_newton_still_converges() {
        let f = FnRoot::with_slope(|a: f64| a + a.powi(3) - 2.0, |a: f64| 1.0 + 3.0 * a * a);
        let cfg = RootConfig {
            inexact_eta0: Some(0.1),
            ..RootConfig::default()
        };
        let rep = newton_root(&f, &[0.0], &cfg, &mut []).unwrap();
        assert!((rep.alpha[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hybrid_falls_back_on_flat_segment() {
        // Increasing, with a nearly flat stretch on [0, 1] that sends the
        // Newton step far outside the bracket.
        let l = |a: f64| {
            if a < 0.0 {
                a - 1.0
            } else if a < 1.0 {
                1e-6 * a - 1.0
            } else {
                10.0 * (a - 1.0) + 1e-6 - 1.0
            }
        };
        let slope = |a: f64| {
            if a < 0.0 {
                1.0
            } else if a < 1.0 {
                1e-6
            } else {
                10.0
            }
        };
        let f = FnRoot::with_slope(l, slope);
        let cfg = RootConfig {
            switch_width: Some(16.0),
            ..RootConfig::default()
        };
        let rep = hybrid_root(&f, 8.0, &cfg, &mut []).unwrap();
        assert!(rep.fallbacks >= 1);
        assert!(rep.residual <= 1e-10);
    }

    #[test]
    fn tight_bracket_is_pure_newton() {
        let f = FnRoot::with_slope(|a| 2.0 * a - 0.2, |_| 2.0);
        let rep = hybrid_root(&f, 1.0, &RootConfig::default(), &mut []).unwrap();
        assert_eq!(rep.newton_iters, 1);
        assert_eq!(rep.bisection_iters, 1);
        assert!((rep.alpha[0] - 0.1).abs() < 1e-15);
    }
}
