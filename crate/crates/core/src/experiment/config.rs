use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::KernelSpec;
use crate::error::{Error, Result};
use crate::learning::Regime;
use crate::network::LinkParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Baseline,
    D2dcfl,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Synthetic,
    Kin40k,
    Standin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Every pair of users shares a link.
    Complete,
    /// Links between users within the proximity radius.
    Proximity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzKind {
    MpEdge,
    Empirical,
}

/// How the weakest user's share is chosen each iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum OmegaPolicy {
    Optimal,
    Full,
    Fixed(f64),
    /// Common compression rate for every offloader.
    EqualGamma(f64),
}

impl FromStr for OmegaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |v: &str| -> Result<f64> {
            let x: f64 = v.trim().parse().map_err(|_| Error::Config(format!("bad number in omega policy {s:?}")))?;
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Config(format!("omega policy value {x} outside [0, 1]")));
            }
            Ok(x)
        };
        match s.split_once('=') {
            None if s == "optimal" => Ok(OmegaPolicy::Optimal),
            None if s == "full" => Ok(OmegaPolicy::Full),
            Some(("fixed", v)) => Ok(OmegaPolicy::Fixed(num(v)?)),
            Some(("equal-gamma", v)) => {
                let g = num(v)?;
                if g == 0.0 {
                    return Err(Error::Config("equal-gamma rate must be positive".into()));
                }
                Ok(OmegaPolicy::EqualGamma(g))
            }
            _ => Err(Error::Config(format!("unknown omega policy {s:?} (optimal, full, fixed=W, equal-gamma=G)"))),
        }
    }
}

impl fmt::Display for OmegaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaPolicy::Optimal => write!(f, "optimal"),
            OmegaPolicy::Full => write!(f, "full"),
            OmegaPolicy::Fixed(w) => write!(f, "fixed={w}"),
            OmegaPolicy::EqualGamma(g) => write!(f, "equal-gamma={g}"),
        }
    }
}

impl TryFrom<String> for OmegaPolicy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<OmegaPolicy> for String {
    fn from(p: OmegaPolicy) -> String {
        p.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilitySettings {
    pub enabled: bool,
    pub v_max: f64,
    pub frame_duration: f64,
    pub frames: usize,
    pub area: [f64; 2],
}

impl Default for MobilitySettings {
    fn default() -> Self {
        Self { enabled: false, v_max: 1.0, frame_duration: 5.0, frames: 20, area: [20.0, 20.0] }
    }
}

/// Full description of one experiment. Every field has a default, so a
/// config file only lists what it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dataset: DatasetKind,
    pub dataset_path: Option<PathBuf>,
    /// Seed for the stand-in dataset, which plays the role of a fixed file.
    pub standin_seed: u64,
    pub users: usize,
    pub points_per_user: usize,
    /// Feature dimension of synthetic data.
    pub d: usize,
    pub sigma: f64,
    pub rho: f64,
    pub a_min: f64,
    pub omega_r: f64,
    pub regime: Option<RegimeName>,
    pub omega_policy: OmegaPolicy,
    /// Extra divider on coded learning rates; defaults per regime.
    pub coded_rate_divider: Option<f64>,
    pub lipschitz: Option<LipschitzKind>,
    /// Fixed rate for uncoded gradients instead of `2/L`.
    pub learning_rate: Option<f64>,
    pub seed: u64,
    pub iterations: usize,
    pub target_error: f64,
    pub target_r2: f64,
    pub r2_window: usize,
    pub topology: Topology,
    pub instant_d2d: bool,
    pub per_link_rate: bool,
    pub penalty: f64,
    pub link: LinkParams,
    pub mobility: MobilitySettings,
    pub kernel: KernelSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeName {
    Synthetic,
    Realistic,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Both,
            dataset: DatasetKind::Synthetic,
            dataset_path: None,
            standin_seed: 0,
            users: 25,
            points_per_user: 10,
            d: 10,
            sigma: 0.01,
            rho: 0.2,
            a_min: 400.0,
            omega_r: 0.0,
            regime: None,
            omega_policy: OmegaPolicy::Optimal,
            coded_rate_divider: None,
            lipschitz: None,
            learning_rate: None,
            seed: 1,
            iterations: 300,
            target_error: 2.2e-3,
            target_r2: 0.9,
            r2_window: 10,
            topology: Topology::Complete,
            instant_d2d: false,
            per_link_rate: false,
            penalty: crate::allocation::DEFAULT_PENALTY,
            link: LinkParams::default(),
            mobility: MobilitySettings::default(),
            kernel: KernelSpec { length_scales: vec![2.5; 8], scale: 1.0, rffm_dim: 128 },
        }
    }
}

pub const SYNTHETIC_CODED_DIVIDER: f64 = 16.0;
pub const REALISTIC_CODED_DIVIDER: f64 = 24.0;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn is_realistic_data(&self) -> bool {
        self.dataset != DatasetKind::Synthetic
    }

    pub fn regime(&self) -> Regime {
        match self.regime {
            Some(RegimeName::Synthetic) => Regime::Synthetic,
            Some(RegimeName::Realistic) => Regime::Realistic,
            None if self.is_realistic_data() => Regime::Realistic,
            None => Regime::Synthetic,
        }
    }

    pub fn coded_divider(&self) -> f64 {
        self.coded_rate_divider.unwrap_or(match self.regime() {
            Regime::Synthetic => SYNTHETIC_CODED_DIVIDER,
            Regime::Realistic => REALISTIC_CODED_DIVIDER,
        })
    }

    pub fn lipschitz_kind(&self) -> LipschitzKind {
        self.lipschitz.unwrap_or(if self.is_realistic_data() { LipschitzKind::Empirical } else { LipschitzKind::MpEdge })
    }

    /// Dimension of the regression model.
    pub fn model_dim(&self) -> usize {
        if self.is_realistic_data() {
            self.kernel.rffm_dim
        } else {
            self.d
        }
    }

    pub fn total_points(&self) -> usize {
        self.users * self.points_per_user
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.users == 0 || self.points_per_user == 0 {
            return bad("users and points_per_user must be positive".into());
        }
        if self.model_dim() < 2 {
            return bad(format!("model dimension must be at least 2, got {}", self.model_dim()));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad(format!("rho must lie in (0, 1], got {}", self.rho));
        }
        if !(self.a_min > 0.0) || !(self.sigma >= 0.0) {
            return bad("a_min must be positive and sigma non-negative".into());
        }
        if !(self.target_error > 0.0 && self.target_error < 1.0) {
            return bad(format!("target_error must lie in (0, 1), got {}", self.target_error));
        }
        if self.coded_rate_divider.is_some_and(|v| !(v > 0.0)) || self.learning_rate.is_some_and(|v| !(v > 0.0)) {
            return bad("coded_rate_divider and learning_rate must be positive".into());
        }
        if self.r2_window == 0 {
            return bad("r2_window must be positive".into());
        }
        if self.is_realistic_data() && self.kernel.length_scales.len() != crate::data::KIN40K_FEATURES {
            return bad(format!("kernel needs {} length scales", crate::data::KIN40K_FEATURES));
        }
        self.link.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.kernel.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.mobility.enabled && (self.mobility.frames == 0 || !(self.mobility.frame_duration > 0.0)) {
            return bad("mobility needs at least one frame of positive length".into());
        }
        Ok(())
    }

    /// `key=value` lines describing the resolved configuration.
    pub fn header_lines(&self) -> Vec<String> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = Vec::new();
        flatten("", &value, &mut out);
        out.push(format!("resolved.regime={:?}", self.regime()).to_lowercase());
        out.push(format!("resolved.coded_rate_divider={}", self.coded_divider()));
        out.push(format!("resolved.lipschitz={:?}", self.lipschitz_kind()).to_lowercase());
        out.push(format!("resolved.model_dim={}", self.model_dim()));
        out
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut Vec<String>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        toml::Value::String(s) => out.push(format!("{prefix}={s}")),
        other => out.push(format!("{prefix}={other}")),
    }
}
