//! Declarative experiment descriptions, read from JSON.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use qnsplit::metric::{EtaSchedule, GammaRule, MetricMode};
use qnsplit::splitting::AlphaSchedule;
use qnsplit_imaging::{
    add_gaussian_noise, build_deconvolution, build_denoising, build_infconv, edge_weights, gaussian_kernel,
    pgm::read_pgm, Family, Image, ImageProblem, Kernel, Phantom,
};

use crate::error::{BenchError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// The algorithm roster: plain and inertial forward-backward without a
/// metric, and the three quasi-Newton variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Fbs,
    Ifbs,
    QnFbs,
    RqnFbs,
    IqnFbs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Fbs,
        Algorithm::Ifbs,
        Algorithm::QnFbs,
        Algorithm::RqnFbs,
        Algorithm::IqnFbs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fbs => "fbs",
            Algorithm::Ifbs => "ifbs",
            Algorithm::QnFbs => "qn-fbs",
            Algorithm::RqnFbs => "rqn-fbs",
            Algorithm::IqnFbs => "iqn-fbs",
        }
    }

    pub fn uses_metric(self) -> bool {
        matches!(self, Algorithm::QnFbs | Algorithm::RqnFbs | Algorithm::IqnFbs)
    }

    pub fn uses_inertia(self) -> bool {
        matches!(self, Algorithm::Ifbs | Algorithm::IqnFbs)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchError::config(format!("unknown algorithm `{s}`")))
    }
}

/// Parses a comma-separated algorithm list.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    list.split(',').map(|s| s.trim().parse()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub size: usize,
    pub sigma: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { size: 5, sigma: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// `deconvolution`, `infconv` or `denoising`.
    pub family: String,
    #[serde(default = "default_phantom")]
    pub phantom: String,
    /// Overrides the phantom when set.
    #[serde(default)]
    pub pgm: Option<PathBuf>,
    #[serde(default = "default_size")]
    pub rows: usize,
    #[serde(default = "default_size")]
    pub cols: usize,
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    pub mu: f64,
    pub tau: f64,
    pub sigma: f64,
    /// Blur kernel; required for deconvolution, optional for `infconv`.
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    /// Edge scale `s` of the weights `½ + ½e^{−|∇b|/s}`.
    #[serde(default = "default_weight_scale")]
    pub weight_scale: f64,
}

fn default_phantom() -> String {
    "shapes".into()
}
fn default_size() -> usize {
    64
}
fn default_noise() -> f64 {
    10.0
}
fn default_weight_scale() -> f64 {
    10.0
}

impl ProblemConfig {
    /// Preset parameters of the deconvolution, inf-conv and denoising
    /// experiments.
    pub fn preset(family: Family) -> Self {
        let (mu, tau, sigma, kernel) = match family {
            Family::Deconvolution => (0.001, 0.09, 0.9, Some(KernelConfig::default())),
            Family::InfConv => (0.01, 0.1, 0.1, Some(KernelConfig::default())),
            Family::Denoising => (0.1, 0.1, 0.1, None),
        };
        ProblemConfig {
            family: family.name().into(),
            phantom: default_phantom(),
            pgm: None,
            rows: default_size(),
            cols: default_size(),
            noise_sigma: default_noise(),
            seed: 0,
            mu,
            tau,
            sigma,
            kernel,
            weight_scale: default_weight_scale(),
        }
    }

    pub fn family(&self) -> Result<Family> {
        Family::from_name(&self.family).map_err(|e| BenchError::config(e.to_string()))
    }

    /// Observed image `b`: the phantom (or PGM) plus seeded Gaussian noise.
    pub fn observed_image(&self) -> Result<Image> {
        let clean = match &self.pgm {
            Some(path) => read_pgm(path)?,
            None => Phantom::from_name(&self.phantom)
                .map_err(|e| BenchError::config(e.to_string()))?
                .render(self.rows, self.cols)
                .map_err(|e| BenchError::config(e.to_string()))?,
        };
        if self.noise_sigma == 0.0 {
            return Ok(clean);
        }
        Ok(add_gaussian_noise(&clean, self.noise_sigma, self.seed)?)
    }

    pub fn build(&self) -> Result<ImageProblem> {
        let family = self.family()?;
        let b = self.observed_image()?;
        let kernel = self.kernel.as_ref().map(|k| gaussian_kernel(k.size, k.sigma)).transpose()?;
        let problem = match family {
            Family::Deconvolution => {
                let kernel = kernel.unwrap_or_else(Kernel::delta);
                build_deconvolution(&b, self.mu, self.tau, self.sigma, &kernel)
            }
            Family::InfConv => {
                let w = edge_weights(&b, self.weight_scale)?;
                build_infconv(&b, self.mu, &w, self.tau, self.sigma, kernel.as_ref())
            }
            Family::Denoising => {
                if kernel.is_some() {
                    return Err(BenchError::config("denoising takes no blur kernel"));
                }
                let w = edge_weights(&b, self.weight_scale)?;
                build_denoising(&b, self.mu, &w, self.tau, self.sigma)
            }
        };
        problem.map_err(|e| match e {
            qnsplit_imaging::ImagingError::Core(_) => BenchError::config(e.to_string()),
            other => other.into(),
        })
    }
}

/// Rule for the scale of the rank-one metric term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GammaConfig {
    Secant,
    SafeguardA2 { c: f64 },
    SafeguardA1 { eta0: f64, power: f64 },
    /// `γ = scale / ‖u‖²`.
    Fixed { scale: f64 },
}

impl GammaConfig {
    pub fn rule(self) -> GammaRule {
        match self {
            GammaConfig::Secant => GammaRule::Secant,
            GammaConfig::SafeguardA2 { c } => GammaRule::SafeguardA2 { c },
            GammaConfig::SafeguardA1 { eta0, power } => GammaRule::SafeguardA1 {
                eta: EtaSchedule { eta0, power },
            },
            GammaConfig::Fixed { scale } => GammaRule::Fixed { scale },
        }
    }
}

/// Gap at which an algorithm stops early. The tracked quantity is the
/// pd-gap for denoising and the primal gap otherwise; `relative` scales
/// `value` by the tracked quantity at the initial point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetGap {
    pub value: f64,
    #[serde(default)]
    pub relative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: ProblemConfig,
    pub algorithms: Vec<Algorithm>,
    /// Iteration budget per algorithm.
    pub iterations: usize,
    /// Metric rule of the quasi-Newton variants; `null` disables the
    /// metric for every algorithm.
    pub gamma: Option<GammaConfig>,
    /// Inertial schedule name for `ifbs` and `iqn-fbs`.
    #[serde(default = "default_alpha")]
    pub alpha: String,
    #[serde(default = "default_alpha_max")]
    pub alpha_max: f64,
    #[serde(default = "default_check_minus")]
    pub check_minus_definiteness: bool,
    /// Plain-PDHG iterations behind the reference optimal value.
    #[serde(default = "default_reference_iters")]
    pub reference_iters: usize,
    /// Inclusive iteration window of the linear-rate fit.
    #[serde(default = "default_window")]
    pub rate_window: [usize; 2],
    /// Stop each algorithm once it reaches this gap; `null` runs the full
    /// budget.
    #[serde(default)]
    pub target_gap: Option<TargetGap>,
    /// Record wall time per iteration; when off `time_ms` is written as 0
    /// so output files are byte-for-byte reproducible.
    #[serde(default = "default_true")]
    pub timing: bool,
    /// Run the algorithms on separate threads.
    #[serde(default = "default_true")]
    pub parallel: bool,
    pub output_dir: PathBuf,
}

fn default_alpha() -> String {
    "zero".into()
}
fn default_alpha_max() -> f64 {
    10.0
}
fn default_check_minus() -> bool {
    true
}
fn default_reference_iters() -> usize {
    10_000
}
fn default_window() -> [usize; 2] {
    [50, 500]
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// The preset experiment for `family` with the full roster.
    pub fn preset(family: Family, iterations: usize, output_dir: PathBuf) -> Self {
        let (gamma, alpha) = match family {
            Family::Deconvolution => (5.0, "fig1"),
            Family::InfConv => (2.0, "fig2"),
            Family::Denoising => (2.0, "fig3"),
        };
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            problem: ProblemConfig::preset(family),
            algorithms: Algorithm::ALL.to_vec(),
            iterations,
            gamma: Some(GammaConfig::Fixed { scale: gamma }),
            alpha: alpha.into(),
            alpha_max: default_alpha_max(),
            check_minus_definiteness: true,
            reference_iters: default_reference_iters(),
            rate_window: default_window(),
            target_gap: None,
            timing: true,
            parallel: true,
            output_dir,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| BenchError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(BenchError::config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::config("algorithm list is empty"));
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return Err(BenchError::config("algorithm list has duplicates"));
        }
        if self.iterations == 0 {
            return Err(BenchError::config("iterations must be at least 1"));
        }
        if self.reference_iters == 0 {
            return Err(BenchError::config("reference_iters must be at least 1"));
        }
        let [lo, hi] = self.rate_window;
        if lo == 0 || lo > hi {
            return Err(BenchError::config(format!("rate window [{lo}, {hi}] is empty")));
        }
        if !(self.alpha_max > 0.0 && self.alpha_max.is_finite()) {
            return Err(BenchError::config("alpha_max must be positive and finite"));
        }
        if let Some(t) = self.target_gap {
            if !(t.value > 0.0 && t.value.is_finite()) {
                return Err(BenchError::config("target_gap value must be positive and finite"));
            }
        }
        self.alpha_schedule()?;
        self.problem.family()?;
        Ok(())
    }

    pub fn alpha_schedule(&self) -> Result<AlphaSchedule> {
        AlphaSchedule::from_name(&self.alpha).map_err(|e| BenchError::config(e.to_string()))
    }

    pub fn metric_mode(&self, alg: Algorithm) -> MetricMode {
        match self.gamma {
            Some(g) if alg.uses_metric() => MetricMode::Sr1(g.rule()),
            _ => MetricMode::Off,
        }
    }
}
