use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{
    check_unique_ids, AgentSpec, Constraint, ConstraintFamily, LinearUtility, Mode, Outcome,
    OutcomeDistribution,
};
use crate::env::{
    Adversary, ConstraintFlipper, IidAdversary, PeriodicAdversary, PhasedAdversary,
    ScriptedAdversary, SubsequenceDef,
};
use crate::forecast::{GridSpec, SolverConfig, SolverMethod};
use crate::{Error, Result};

/// Where each round's prediction comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionSource {
    /// The calibrated forecaster.
    #[default]
    Forecaster,
    /// Independent uniform draws from the cube.
    Uniform,
    /// `1 − E[Y_t]`, coordinate-wise.
    Flipped,
}

/// A finite outcome distribution. Missing probabilities mean uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionConfig {
    pub support: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

impl DistributionConfig {
    pub fn build(&self, dim: usize) -> Result<OutcomeDistribution> {
        let support = self
            .support
            .iter()
            .map(|y| Outcome::with_dim(y.clone(), dim))
            .collect::<Result<Vec<_>>>()?;
        let probs = match &self.probs {
            Some(p) => p.clone(),
            None => vec![1.0 / support.len().max(1) as f64; support.len()],
        };
        OutcomeDistribution::new(support, probs)
    }

    fn diagonal(dim: usize, values: &[f64]) -> Self {
        Self {
            support: values.iter().map(|&v| vec![v; dim]).collect(),
            probs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    /// Last round of the phase (inclusive).
    pub until: usize,
    #[serde(flatten)]
    pub dist: DistributionConfig,
}

/// Adversary presets and their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum AdversaryConfig {
    /// The same distribution every round.
    #[serde(alias = "iid")]
    BenignIid {
        #[serde(default, flatten)]
        dist: Option<DistributionConfig>,
    },
    /// `hot` every `period`-th round, `cold` otherwise.
    Masking {
        #[serde(default = "default_period")]
        period: usize,
        #[serde(default)]
        hot: Option<DistributionConfig>,
        #[serde(default)]
        cold: Option<DistributionConfig>,
    },
    /// Switches between two distributions to keep coordinate `coord` balanced
    /// around one half.
    ConstraintFlipper {
        #[serde(default)]
        coord: usize,
        #[serde(default)]
        high: Option<DistributionConfig>,
        #[serde(default)]
        low: Option<DistributionConfig>,
    },
    /// Piecewise-stationary distributions.
    Phased { phases: Vec<PhaseConfig> },
    /// Rows read from a script file.
    Scripted { path: PathBuf },
}

fn default_period() -> usize {
    2
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig::BenignIid { dist: None }
    }
}

fn masked_point(dim: usize, first: &[f64]) -> DistributionConfig {
    DistributionConfig {
        support: first
            .iter()
            .map(|&v| {
                let mut y = vec![0.5; dim];
                y[0] = v;
                y
            })
            .collect(),
        probs: None,
    }
}

impl AdversaryConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryConfig::BenignIid { .. } => "benign-iid",
            AdversaryConfig::Masking { .. } => "masking",
            AdversaryConfig::ConstraintFlipper { .. } => "constraint-flipper",
            AdversaryConfig::Phased { .. } => "phased",
            AdversaryConfig::Scripted { .. } => "scripted",
        }
    }

    /// Instantiates the adversary. Relative script paths resolve against `base`.
    pub fn build(&self, dim: usize, horizon: usize, base: Option<&Path>) -> Result<Box<dyn Adversary>> {
        Ok(match self {
            AdversaryConfig::BenignIid { dist } => {
                let dist = dist
                    .clone()
                    .unwrap_or_else(|| DistributionConfig::diagonal(dim, &[0.2, 0.5, 0.8]));
                Box::new(IidAdversary::new(dist.build(dim)?, horizon))
            }
            AdversaryConfig::Masking { period, hot, cold } => {
                if *period == 0 {
                    return Err(Error::config("masking period must be at least 1"));
                }
                let hot = hot.clone().unwrap_or_else(|| masked_point(dim, &[0.85, 0.95]));
                let cold = cold.clone().unwrap_or_else(|| masked_point(dim, &[0.05, 0.15]));
                Box::new(PeriodicAdversary::new(*period, hot.build(dim)?, cold.build(dim)?, horizon))
            }
            AdversaryConfig::ConstraintFlipper { coord, high, low } => {
                if *coord >= dim {
                    return Err(Error::config(format!("flipper coordinate {coord} outside dimension {dim}")));
                }
                let high = high.clone().unwrap_or_else(|| DistributionConfig::diagonal(dim, &[0.9]));
                let low = low.clone().unwrap_or_else(|| DistributionConfig::diagonal(dim, &[0.1]));
                Box::new(ConstraintFlipper::new(*coord, high.build(dim)?, low.build(dim)?, horizon))
            }
            AdversaryConfig::Phased { phases } => {
                if phases.is_empty() {
                    return Err(Error::config("phased adversary needs at least one phase"));
                }
                if phases.windows(2).any(|w| w[0].until >= w[1].until) {
                    return Err(Error::config("phase end rounds must increase"));
                }
                let built = phases
                    .iter()
                    .map(|p| Ok((p.until, p.dist.build(dim)?)))
                    .collect::<Result<Vec<_>>>()?;
                Box::new(PhasedAdversary::new(built, horizon))
            }
            AdversaryConfig::Scripted { path } => {
                let resolved = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let script = ScriptedAdversary::load(&resolved)?;
                if script.len() < horizon {
                    return Err(Error::config(format!(
                        "script {} has {} rows but the horizon is {horizon}",
                        resolved.display(),
                        script.len()
                    )));
                }
                Box::new(script)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityConfig {
    pub weights: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintConfig {
    Linear {
        weights: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    Threshold {
        coord: usize,
        thresholds: Vec<f64>,
        #[serde(default = "one")]
        above: f64,
        #[serde(default = "minus_one")]
        below: f64,
    },
    Tabular {
        resolution: usize,
        values: Vec<Vec<f64>>,
    },
}

impl ConstraintConfig {
    fn build(&self) -> Constraint {
        match self.clone() {
            ConstraintConfig::Linear { weights, offsets } => Constraint::Linear { weights, offsets },
            ConstraintConfig::Threshold {
                coord,
                thresholds,
                above,
                below,
            } => Constraint::Threshold {
                coord,
                thresholds,
                above,
                below,
            },
            ConstraintConfig::Tabular { resolution, values } => Constraint::Tabular { resolution, values },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub id: String,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub utility: UtilityConfig,
    pub constraints: Vec<ConstraintConfig>,
}

fn default_mode() -> Mode {
    Mode::Realization
}

impl AgentConfig {
    pub fn build(&self, dim: usize) -> Result<AgentSpec> {
        let utility = LinearUtility::new(self.utility.weights.clone(), self.utility.offsets.clone())?;
        if utility.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: utility.dim(),
            });
        }
        let family = ConstraintFamily::new(
            self.constraints.iter().map(ConstraintConfig::build).collect(),
            utility.num_actions(),
            dim,
        )?;
        AgentSpec::new(self.id.clone(), utility, family, self.mode)
    }
}

/// Deliberate defects used to check that the verification suite notices them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultConfig {
    /// Realization ledgers never eliminate.
    #[serde(default)]
    pub skip_realized_elimination: bool,
    /// The forecaster's expert update uses the wrong sign.
    #[serde(default)]
    pub flip_expert_sign: bool,
}

impl FaultConfig {
    pub fn any(&self) -> bool {
        self.skip_realized_elimination || self.flip_expert_sign
    }
}

fn default_delta() -> f64 {
    0.05
}

fn default_tolerance() -> f64 {
    1e-3
}

/// A complete run description, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: usize,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Largest accepted duality gap of the per-round game.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_solver")]
    pub solver: SolverMethod,
    #[serde(default)]
    pub prediction_source: PredictionSource,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Replaces every elimination threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsequences: Vec<SubsequenceDef>,
    pub agents: Vec<AgentConfig>,
    /// Per-round solver and weight diagnostics in the report.
    #[serde(default)]
    pub diagnostics: bool,
    #[serde(default, skip_serializing_if = "is_default")]
    pub faults: FaultConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn default_solver() -> SolverMethod {
    SolverMethod::Simplex
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// Output locations. Not part of the digest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Also write the columnar transcript.
    #[serde(default)]
    pub transcript: bool,
}

/// Context vectors produced by every built-in adversary are `(t/T, u)`.
pub const CONTEXT_DIM: usize = 2;

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        if let AdversaryConfig::Scripted { path: script } = &mut config.adversary {
            if script.is_relative() {
                if let Some(parent) = path.parent() {
                    *script = parent.join(&*script);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize configuration: {e}")))
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon must be at least 1"));
        }
        if self.dim == 0 {
            return Err(Error::config("dim must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::config("tolerance must be positive"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::config("eta must be positive"));
            }
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::config("tau must be positive"));
            }
        }
        if self.agents.is_empty() {
            return Err(Error::config("at least one agent is required"));
        }
        if self.subsequences.len() > crate::domain::SubsequenceSet::CAPACITY {
            return Err(Error::config("too many subsequences"));
        }
        // Scripted adversaries declare their own context width; it is checked per round.
        let context_dim = match self.adversary {
            AdversaryConfig::Scripted { .. } => usize::MAX,
            _ => CONTEXT_DIM,
        };
        for def in &self.subsequences {
            def.validate(self.horizon, context_dim)?;
        }
        check_unique_ids(&self.agent_specs()?)?;
        Ok(())
    }

    pub fn agent_specs(&self) -> Result<Vec<AgentSpec>> {
        self.agents.iter().map(|a| a.build(self.dim)).collect()
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tolerance,
            method: self.solver,
        }
    }

    /// SHA-256 of the canonical JSON form, output locations excluded.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let bytes = serde_json::to_vec(&canonical).expect("configuration serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// `|S|` per configured subsequence, falling back to `T` where the length
    /// depends on contexts.
    pub fn subsequence_lens(&self) -> Option<Vec<usize>> {
        if self.subsequences.is_empty() {
            return None;
        }
        Some(
            self.subsequences
                .iter()
                .map(|d| d.len_within(self.horizon).unwrap_or(self.horizon))
                .collect(),
        )
    }

    /// Sets a value at a dotted path such as `horizon` or `grid.points_per_coord`.
    pub fn patched(&self, path: &str, value: toml::Value) -> Result<Self> {
        let mut tree = toml::Value::try_from(self)
            .map_err(|e| Error::config(format!("cannot serialize configuration: {e}")))?;
        let mut node = &mut tree;
        let keys: Vec<&str> = path.split('.').collect();
        for (i, key) in keys.iter().enumerate() {
            let last = i + 1 == keys.len();
            node = match node {
                toml::Value::Table(table) => {
                    if last {
                        table.insert((*key).to_string(), value);
                        break;
                    }
                    table
                        .get_mut(*key)
                        .ok_or_else(|| Error::config(format!("unknown key `{key}` in `{path}`")))?
                }
                toml::Value::Array(items) => {
                    let idx: usize = key
                        .parse()
                        .map_err(|_| Error::config(format!("`{key}` in `{path}` is not an index")))?;
                    let len = items.len();
                    let slot = items
                        .get_mut(idx)
                        .ok_or_else(|| Error::config(format!("index {idx} out of range ({len}) in `{path}`")))?;
                    if last {
                        *slot = value;
                        break;
                    }
                    slot
                }
                _ => return Err(Error::config(format!("`{path}` does not name a table entry"))),
            };
        }
        tree.try_into()
            .map_err(|e| Error::config(format!("patched configuration is invalid: {e}")))
    }
}
