//! Runs the algorithm roster on one problem and writes per-algorithm logs.

use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use qnsplit::metric::Sign;
use qnsplit::ops::project_pairwise_l2_ball;
use qnsplit::pdhg::PdhgModel;
use qnsplit::splitting::{run, AlphaSchedule, SolverConfig, StopReason, Variant};
use qnsplit_imaging::{dual_value, primal_value, Family, ImageProblem};

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{BenchError, Result};
use crate::rate::fit_linear_rate;
use crate::reference::{cache_dir_from_env, problem_key, reference_gap, Reference};

/// Exact header of every per-algorithm CSV log.
pub const CSV_HEADER: &str = "iter,time_ms,primal,gap,pd_gap,step_param,root_iters,metric_sign,diff_norm";

#[derive(Debug, Serialize)]
struct CsvRow {
    iter: usize,
    time_ms: f64,
    primal: f64,
    gap: f64,
    pd_gap: Option<f64>,
    step_param: f64,
    root_iters: usize,
    metric_sign: &'static str,
    diff_norm: f64,
}

fn sign_label(sign: Option<Sign>) -> &'static str {
    match sign {
        Some(Sign::Plus) => "+",
        Some(Sign::Minus) => "-",
        None => "0",
    }
}

/// Objective values of one iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub primal: f64,
    pub pd_gap: Option<f64>,
}

/// Objective values at `z = (x, y)`. Relaxed iterates need not lie in the
/// constraint sets, so `x` is clamped to the box for deconvolution and `y`
/// projected onto the dual ball for denoising before evaluation; both maps
/// are the identity on resolvent outputs.
pub fn evaluate(p: &ImageProblem, z: &[f64]) -> Result<Evaluation> {
    let (x, y) = p.split(z);
    let primal = if p.family == Family::Deconvolution {
        let clamped: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 255.0)).collect();
        primal_value(p, &clamped)
    } else {
        primal_value(p, x)
    };
    let pd_gap = if p.family == Family::Denoising {
        let feasible = project_pairwise_l2_ball(y, p.mu)?;
        dual_value(p, &feasible).map(|d| primal - d)
    } else {
        None
    };
    Ok(Evaluation { primal, pd_gap })
}

/// Solver settings for one roster entry.
pub fn solver_config(cfg: &ExperimentConfig, alg: Algorithm) -> Result<SolverConfig> {
    Ok(SolverConfig {
        variant: if alg == Algorithm::RqnFbs {
            Variant::Relaxed
        } else {
            Variant::Inertial
        },
        metric: cfg.metric_mode(alg),
        alpha: if alg.uses_inertia() {
            cfg.alpha_schedule()?
        } else {
            AlphaSchedule::Zero
        },
        alpha_max: cfg.alpha_max,
        max_iter: cfg.iterations,
        stop_tol: 0.0,
        check_minus_definiteness: cfg.check_minus_definiteness,
        ..SolverConfig::default()
    })
}

/// Per-iteration history of one algorithm; all arrays have one entry per
/// recorded iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub iters: Vec<usize>,
    pub time_ms: Vec<f64>,
    pub primal: Vec<f64>,
    /// `primal − reference`.
    pub gap: Vec<f64>,
    pub pd_gap: Vec<Option<f64>>,
    /// Fitted `q` of the pd-gap (denoising) or primal gap on the window.
    pub rate: Option<f64>,
    pub stop: String,
    pub updates_plus: usize,
    pub updates_minus: usize,
    pub safeguard_fallbacks: usize,
    /// First iteration at which the configured target gap was reached.
    pub reached_target: Option<usize>,
}

impl AlgorithmRun {
    /// The sequence used for rate fits: pd-gaps when available.
    pub fn fit_sequence(&self) -> Vec<f64> {
        if self.pd_gap.iter().all(Option::is_some) && !self.pd_gap.is_empty() {
            self.pd_gap.iter().map(|g| g.unwrap_or(f64::NAN)).collect()
        } else {
            self.gap.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub family: String,
    pub problem_key: String,
    pub reference: Reference,
    /// Values at the initial point `(b, 0)`.
    pub initial_primal: f64,
    pub initial_gap: f64,
    pub initial_pd_gap: Option<f64>,
    pub rate_window: [usize; 2],
    pub runs: Vec<AlgorithmRun>,
}

impl RunSummary {
    pub fn run(&self, alg: Algorithm) -> Option<&AlgorithmRun> {
        self.runs.iter().find(|r| r.algorithm == alg)
    }
}

fn stop_label(stop: StopReason) -> &'static str {
    match stop {
        StopReason::MaxIter => "max-iter",
        StopReason::Converged => "converged",
        StopReason::Solved => "solved",
        StopReason::Observer => "target-reached",
    }
}

/// Runs one roster entry, writing its CSV log to `csv_path` when given.
pub fn run_algorithm(
    p: &ImageProblem,
    cfg: &ExperimentConfig,
    alg: Algorithm,
    reference: &Reference,
    csv_path: Option<&Path>,
) -> Result<AlgorithmRun> {
    let solver = solver_config(cfg, alg)?;
    let model = PdhgModel::new(&p.saddle, p.metric()?)?;
    let mut rows = Vec::with_capacity(cfg.iterations);
    let mut eval_error = None;
    // Objective evaluation runs inside the solver loop; its cost is kept
    // out of the reported wall time.
    let mut eval_time = Duration::ZERO;
    let z0 = p.initial_point();
    let threshold = match cfg.target_gap {
        Some(t) if t.relative => {
            let init = evaluate(p, &z0)?;
            Some(t.value * init.pd_gap.unwrap_or(init.primal - reference.primal))
        }
        Some(t) => Some(t.value),
        None => None,
    };
    let mut reached_target = None;
    let out = run(&model, &solver, &z0, |rec, z| {
        let t0 = Instant::now();
        let ev = match evaluate(p, z) {
            Ok(ev) => ev,
            Err(e) => {
                eval_error.get_or_insert(e);
                Evaluation {
                    primal: f64::NAN,
                    pd_gap: None,
                }
            }
        };
        let time_ms = if cfg.timing {
            rec.elapsed.saturating_sub(eval_time).as_secs_f64() * 1e3
        } else {
            0.0
        };
        rows.push(CsvRow {
            iter: rec.k + 1,
            time_ms,
            primal: ev.primal,
            gap: ev.primal - reference.primal,
            pd_gap: ev.pd_gap,
            step_param: rec.step_param,
            root_iters: rec.root_iters,
            metric_sign: sign_label(rec.metric_sign),
            diff_norm: rec.diff_norm,
        });
        eval_time += t0.elapsed();
        let tracked = ev.pd_gap.unwrap_or(ev.primal - reference.primal);
        match threshold {
            Some(th) if tracked <= th => {
                reached_target = Some(rec.k + 1);
                ControlFlow::Break(())
            }
            _ => ControlFlow::Continue(()),
        }
    })?;
    if let Some(e) = eval_error {
        return Err(e);
    }
    if let Some(path) = csv_path {
        let mut w = csv::Writer::from_path(path)?;
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    let mut run = AlgorithmRun {
        algorithm: alg,
        iters: rows.iter().map(|r| r.iter).collect(),
        time_ms: rows.iter().map(|r| r.time_ms).collect(),
        primal: rows.iter().map(|r| r.primal).collect(),
        gap: rows.iter().map(|r| r.gap).collect(),
        pd_gap: rows.iter().map(|r| r.pd_gap).collect(),
        rate: None,
        stop: stop_label(out.stop).into(),
        updates_plus: out.metrics.updates_plus,
        updates_minus: out.metrics.updates_minus,
        safeguard_fallbacks: out.metrics.safeguard_fallbacks,
        reached_target,
    };
    let [lo, hi] = cfg.rate_window;
    run.rate = fit_linear_rate(&run.fit_sequence(), (lo, hi));
    Ok(run)
}

/// Path of the CSV log of `alg` under `dir`.
pub fn csv_path(dir: &Path, alg: Algorithm) -> PathBuf {
    dir.join(format!("{}.csv", alg.name()))
}

/// Runs every configured algorithm, using the reference cache named by
/// the environment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    run_experiment_with_cache(cfg, cache_dir_from_env().as_deref())
}

/// Runs every configured algorithm and writes `<alg>.csv` plus
/// `summary.json` to the output directory.
pub fn run_experiment_with_cache(cfg: &ExperimentConfig, cache_dir: Option<&Path>) -> Result<RunSummary> {
    cfg.validate()?;
    let p = cfg.problem.build()?;
    let reference = reference_gap(&p, cfg.reference_iters, cache_dir)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let dir = cfg.output_dir.as_path();
    let one = |alg: Algorithm| run_algorithm(&p, cfg, alg, &reference, Some(&csv_path(dir, alg)));
    let results: Vec<Result<AlgorithmRun>> = if cfg.parallel && cfg.algorithms.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = cfg.algorithms.iter().map(|&alg| s.spawn(move || one(alg))).collect();
            handles
                .into_iter()
                .zip(&cfg.algorithms)
                .map(|(h, alg)| {
                    h.join()
                        .unwrap_or_else(|_| Err(BenchError::Failed(format!("{alg} panicked"))))
                })
                .collect()
        })
    } else {
        cfg.algorithms.iter().map(|&alg| one(alg)).collect()
    };
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let init = evaluate(&p, &p.initial_point())?;
    let summary = RunSummary {
        family: p.family.name().into(),
        problem_key: problem_key(&p, cfg.reference_iters),
        reference,
        initial_primal: init.primal,
        initial_gap: init.primal - reference.primal,
        initial_pd_gap: init.pd_gap,
        rate_window: cfg.rate_window,
        runs,
    };
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}
