//! Run configuration: JSON on disk, resolved against command-line flags and
//! per-command defaults before anything runs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use walklab_core::group::DEFAULT_CAP;
use walklab_core::weight::parse_probability;
use walklab_core::{GroupElem, GroupSpec, SparseMeasure, WalkError};

use crate::CliError;

/// Steps up to which exact arithmetic is used for verifications.
pub const EXACT_HORIZON: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureEntry {
    pub elem: String,
    pub prob: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Exact when any probability is written as `p/q`.
    #[default]
    Auto,
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Ratio,
    Root,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HChoice {
    /// `exp(<c, x>)` with `c` the Laplace minimizer (free abelian groups).
    Exponential,
    /// `h = 1` with `rho = 1` (finite groups).
    Constant,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measure: Vec<MeasureEntry>,
    #[serde(default)]
    pub weight_mode: WeightMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Bound on `k` for the union of `S^-k S^k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Radius of the labelled ball on infinite groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<usize>,
    /// Radius of the reporting window for limit measures and h-processes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<usize>,
    /// Prune threshold for float convolution (spectral only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<Estimate>,
    /// Target elements for ratio series.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<HChoice>,
    /// Bernoulli success probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Lower end of the Bernoulli range (`n_max` is the upper end).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    /// Substochastic matrix for `chain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Not embedded in reports, so output bytes do not depend on it.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Period,
    Spectral,
    Ratio,
    LimitMeasure,
    HProcess,
    Bernoulli,
    Chain,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Period => "period",
            Command::Spectral => "spectral",
            Command::Ratio => "ratio",
            Command::LimitMeasure => "limit-measure",
            Command::HProcess => "hprocess",
            Command::Bernoulli => "bernoulli",
            Command::Chain => "chain",
        }
    }

    fn uses_group(self) -> bool {
        !matches!(self, Command::Bernoulli | Command::Chain)
    }
}

/// Flags that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n_max: Option<usize>,
    pub exact: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    /// Applies flags and fills every parameter the command reads, so the
    /// embedded copy documents the run completely.
    pub fn resolve(mut self, cmd: Command, o: &Overrides) -> Result<Self, CliError> {
        if o.n_max.is_some() {
            self.n_max = o.n_max;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        if o.exact {
            self.weight_mode = WeightMode::Exact;
        }
        if self.out.is_none() {
            self.out = Some(PathBuf::from("."));
        }
        if cmd.uses_group() {
            if self.group.is_none() {
                return Err(CliError::Input("`group` is required".into()));
            }
            if self.measure.is_empty() {
                return Err(CliError::Input("`measure` is required".into()));
            }
            if self.weight_mode == WeightMode::Auto {
                let mut rational = false;
                for e in &self.measure {
                    rational |= parse_probability(&e.prob).map_err(CliError::from)?.1;
                }
                self.weight_mode = if rational { WeightMode::Exact } else { WeightMode::Float };
            }
            self.cap.get_or_insert(DEFAULT_CAP);
        } else if self.group.is_some() || !self.measure.is_empty() {
            return Err(CliError::Input(format!("`{}` takes no group or measure", cmd.name())));
        }
        let n_default = match cmd {
            Command::Period => EXACT_HORIZON,
            Command::Spectral | Command::Ratio | Command::LimitMeasure => 1000,
            Command::HProcess => 200,
            Command::Bernoulli => 500,
            Command::Chain => 2000,
        };
        self.n_max.get_or_insert(n_default);
        match cmd {
            Command::Period => {
                self.ball_radius.get_or_insert(8);
            }
            Command::Spectral => {
                self.estimate.get_or_insert(Estimate::Ratio);
            }
            Command::Ratio | Command::LimitMeasure => {
                self.window_radius.get_or_insert(if cmd == Command::Ratio { 2 } else { 10 });
            }
            Command::HProcess => {
                self.window_radius.get_or_insert(3);
                if self.h.is_none() {
                    let finite = self.group.as_ref().is_some_and(|g| g.is_finite());
                    self.h = Some(if finite { HChoice::Constant } else { HChoice::Exponential });
                }
            }
            Command::Bernoulli => {
                let a = self.a.ok_or_else(|| CliError::Input("`a` is required".into()))?;
                if !(a > 0.0 && a < 1.0) {
                    return Err(CliError::Input(format!("a = {a} must lie in (0, 1)")));
                }
                self.epsilon.get_or_insert(0.2);
                self.n_min.get_or_insert(50);
            }
            Command::Chain => {
                if self.matrix.is_none() {
                    return Err(CliError::Input("`matrix` is required".into()));
                }
            }
        }
        if self.prune.is_some() && cmd != Command::Spectral {
            return Err(CliError::Input("`prune` is only supported by `spectral`".into()));
        }
        Ok(self)
    }

    pub fn n_max(&self) -> usize {
        self.n_max.expect("resolved")
    }

    pub fn cap(&self) -> usize {
        self.cap.unwrap_or(DEFAULT_CAP)
    }

    pub fn exact(&self) -> bool {
        self.weight_mode == WeightMode::Exact
    }

    pub fn out_dir(&self) -> &Path {
        self.out.as_deref().expect("resolved")
    }

    pub fn spec(&self) -> Result<Arc<GroupSpec>, CliError> {
        let g = self.group.clone().expect("resolved");
        Ok(Arc::new(g.validated()?))
    }

    pub fn exact_measure(&self, spec: &Arc<GroupSpec>) -> Result<SparseMeasure<BigRational>, CliError> {
        Ok(SparseMeasure::from_text(spec.clone(), &self.pairs())?)
    }

    pub fn float_measure(&self, spec: &Arc<GroupSpec>) -> Result<SparseMeasure<f64>, CliError> {
        Ok(SparseMeasure::from_text(spec.clone(), &self.pairs())?)
    }

    pub fn targets(&self, spec: &GroupSpec) -> Result<Vec<GroupElem>, CliError> {
        if self.x.is_empty() {
            return Ok(vec![spec.identity()]);
        }
        self.x
            .iter()
            .map(|t| spec.parse_elem(t).map_err(CliError::from))
            .collect()
    }

    fn pairs(&self) -> Vec<(&str, &str)> {
        self.measure.iter().map(|e| (e.elem.as_str(), e.prob.as_str())).collect()
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        CliError::Walk(e)
    }
}
