//! Run configuration: command-line flags layered over an optional TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use tfcd_core::verification::Coefficients;
use tfcd_core::{Axis, FittedMeshParams};

/// Level list: explicit indices, or the keywords `all` / `final`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelList {
    All,
    Final,
    Values(Vec<usize>),
}

impl FromStr for LevelList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "all" => Ok(Self::All),
            "final" => Ok(Self::Final),
            list => list
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| format!("invalid level '{}' (expected a non-negative integer)", v.trim()))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Self::Values),
        }
    }
}

impl<'de> Deserialize<'de> for LevelList {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<usize>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(Self::Values(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    Temporal,
    Spatial,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Temporal => Axis::Temporal,
            AxisArg::Spatial => Axis::Spatial,
        }
    }
}

/// Options shared by every subcommand. Each field may also appear in the
/// config file under the same name with `-` replaced by `_`.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// TOML file with default values for any of these options.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Built-in manufactured problem: singular, smooth, steady or zero.
    #[arg(long)]
    pub problem: Option<String>,
    /// Fractional order in (0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Grading exponent (>= 1).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Number of time intervals.
    #[arg(long)]
    pub nt: Option<usize>,
    /// Number of graded intervals (defaults to nt, or to a fraction of nt when a split time is set).
    #[arg(long)]
    pub nhat: Option<usize>,
    /// End of the graded section of the time mesh.
    #[arg(long)]
    pub split_time: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub tf: Option<f64>,
    /// Lower bound c in nhat >= c * nt.
    #[arg(long)]
    pub graded_fraction: Option<f64>,
    /// Edge length of the square domain.
    #[arg(long)]
    pub length: Option<f64>,
    /// Spatial intervals along x.
    #[arg(long)]
    pub mx: Option<usize>,
    /// Spatial intervals along y (defaults to mx).
    #[arg(long)]
    pub my: Option<usize>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub mu1: Option<f64>,
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,

    /// solve: time levels to write ("final", "all" or a comma list).
    /// convergence: refinement values of N_t or M (comma list).
    #[arg(long)]
    pub levels: Option<LevelList>,
    /// Refinement axis of a convergence study.
    #[arg(long, value_enum)]
    pub axis: Option<AxisArg>,
    /// Allowed gap between observed and predicted order.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Output file (standard output when absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for the solver.
    #[arg(long, env = "TFCD_THREADS")]
    pub threads: Option<usize>,
    /// Seed of the property sweeps.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Options {
    /// Fills every unset field from `fallback`.
    pub fn or(self, fallback: Options) -> Options {
        Options {
            config: self.config.or(fallback.config),
            problem: self.problem.or(fallback.problem),
            alpha: self.alpha.or(fallback.alpha),
            theta: self.theta.or(fallback.theta),
            nt: self.nt.or(fallback.nt),
            nhat: self.nhat.or(fallback.nhat),
            split_time: self.split_time.or(fallback.split_time),
            tf: self.tf.or(fallback.tf),
            graded_fraction: self.graded_fraction.or(fallback.graded_fraction),
            length: self.length.or(fallback.length),
            mx: self.mx.or(fallback.mx),
            my: self.my.or(fallback.my),
            lambda1: self.lambda1.or(fallback.lambda1),
            lambda2: self.lambda2.or(fallback.lambda2),
            mu1: self.mu1.or(fallback.mu1),
            mu2: self.mu2.or(fallback.mu2),
            gamma: self.gamma.or(fallback.gamma),
            levels: self.levels.or(fallback.levels),
            axis: self.axis.or(fallback.axis),
            tolerance: self.tolerance.or(fallback.tolerance),
            out: self.out.or(fallback.out),
            threads: self.threads.or(fallback.threads),
            seed: self.seed.or(fallback.seed),
        }
    }
}

pub fn read_config_file(path: &Path) -> Result<Options> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workflow {
    Solve,
    Convergence,
    Check,
}

impl fmt::Display for Workflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Solve => "solve",
            Self::Convergence => "convergence",
            Self::Check => "check",
        })
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub workflow: Workflow,
    pub problem: String,
    pub alpha: f64,
    pub theta: f64,
    pub nt: usize,
    pub nhat: usize,
    pub split_time: f64,
    pub final_time: f64,
    pub graded_fraction: f64,
    pub length: f64,
    pub mx: usize,
    pub my: usize,
    pub coefficients: Coefficients,
    pub levels: LevelList,
    pub axis: Axis,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: u64,
}

const PROBLEMS: [&str; 4] = ["singular", "smooth", "steady", "zero"];

impl RunConfig {
    /// Merges flags over the config file (if any) and applies defaults.
    pub fn resolve(workflow: Workflow, flags: Options) -> Result<Self> {
        let opts = match &flags.config {
            Some(path) => {
                let file = read_config_file(path)?;
                flags.or(file)
            }
            None => flags,
        };
        Self::from_options(workflow, opts)
    }

    pub fn from_options(workflow: Workflow, o: Options) -> Result<Self> {
        let axis: Axis = o.axis.unwrap_or(AxisArg::Temporal).into();
        let study = workflow == Workflow::Convergence;
        let final_time = o.tf.unwrap_or(1.0);
        let nt = o
            .nt
            .unwrap_or(if study && axis == Axis::Spatial { 512 } else { 64 });
        let split_time = o.split_time.unwrap_or(final_time);
        let graded_fraction = o.graded_fraction.unwrap_or(0.5);
        let nhat = o.nhat.unwrap_or_else(|| {
            if split_time < final_time {
                ((graded_fraction * nt as f64).ceil() as usize).min(nt.saturating_sub(1))
            } else {
                nt
            }
        });
        let mx = o
            .mx
            .unwrap_or(if study && axis == Axis::Temporal { 64 } else { 16 });
        let levels = o.levels.unwrap_or(match (workflow, axis) {
            (Workflow::Convergence, Axis::Temporal) => LevelList::Values(vec![16, 32, 64, 128]),
            (Workflow::Convergence, Axis::Spatial) => LevelList::Values(vec![4, 8, 16, 32]),
            _ => LevelList::Final,
        });
        let defaults = Coefficients::default();
        let config = Self {
            workflow,
            problem: o.problem.unwrap_or_else(|| "singular".into()),
            alpha: o.alpha.unwrap_or(0.5),
            theta: o.theta.unwrap_or(4.0),
            nt,
            nhat,
            split_time,
            final_time,
            graded_fraction,
            length: o.length.unwrap_or(1.0),
            mx,
            my: o.my.unwrap_or(mx),
            coefficients: Coefficients {
                lambda1: o.lambda1.unwrap_or(defaults.lambda1),
                lambda2: o.lambda2.unwrap_or(defaults.lambda2),
                mu1: o.mu1.unwrap_or(defaults.mu1),
                mu2: o.mu2.unwrap_or(defaults.mu2),
                gamma: o.gamma.unwrap_or(defaults.gamma),
            },
            levels,
            axis,
            tolerance: o.tolerance.unwrap_or(0.3),
            out: o.out,
            threads: o.threads,
            seed: o.seed.unwrap_or(1),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !PROBLEMS.contains(&self.problem.as_str()) {
            bail!("unknown problem '{}'; expected one of {}", self.problem, PROBLEMS.join(", "));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0,1), got {}", self.alpha);
        }
        if !(self.theta >= 1.0) || !self.theta.is_finite() {
            bail!("theta must be >= 1, got {}", self.theta);
        }
        if self.nt == 0 {
            bail!("nt must be at least 1");
        }
        if self.nhat == 0 || self.nhat > self.nt {
            bail!("nhat must satisfy 1 <= nhat <= nt (got nhat = {}, nt = {})", self.nhat, self.nt);
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            bail!("tf must be positive, got {}", self.final_time);
        }
        if !(self.split_time > 0.0 && self.split_time <= self.final_time) {
            bail!("split-time must lie in (0, tf], got {}", self.split_time);
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            bail!("length must be positive, got {}", self.length);
        }
        if self.mx < 2 || self.my < 2 {
            bail!("mx and my must be at least 2 (got mx = {}, my = {})", self.mx, self.my);
        }
        let c = &self.coefficients;
        if !(c.lambda1 > 0.0 && c.lambda2 > 0.0) {
            bail!("lambda1 and lambda2 must be positive");
        }
        let beta = c.mu1 * c.mu1 / (4.0 * c.lambda1) + c.mu2 * c.mu2 / (4.0 * c.lambda2) - c.gamma;
        if beta < 0.0 {
            bail!("coefficients give beta = mu1^2/(4 lambda1) + mu2^2/(4 lambda2) - gamma = {beta} < 0");
        }
        if !(self.tolerance >= 0.0) {
            bail!("tolerance must be non-negative");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        if self.workflow == Workflow::Convergence {
            let LevelList::Values(levels) = &self.levels else {
                bail!("convergence needs an explicit comma-separated list of levels");
            };
            if levels.len() < 2 || levels.windows(2).any(|w| w[1] <= w[0]) {
                bail!("convergence levels must be at least two strictly increasing values");
            }
            if self.axis == Axis::Spatial && levels[0] < 2 {
                bail!("spatial levels must be at least 2");
            }
            if self.axis == Axis::Temporal && levels[0] == 0 {
                bail!("temporal levels must be positive");
            }
            if self.problem == "zero" {
                bail!("the zero problem has no error to study; choose singular, smooth or steady");
            }
        }
        if self.workflow == Workflow::Solve {
            if let LevelList::Values(levels) = &self.levels {
                if let Some(bad) = levels.iter().find(|&&l| l > self.nt) {
                    bail!("time level {bad} exceeds nt = {}", self.nt);
                }
            }
        }
        Ok(())
    }

    pub fn mesh_params(&self) -> FittedMeshParams {
        FittedMeshParams {
            nt: self.nt,
            n_graded: self.nhat,
            theta: self.theta,
            split_time: self.split_time,
            final_time: self.final_time,
            alpha: self.alpha,
            min_graded_fraction: self.graded_fraction,
        }
    }
}
