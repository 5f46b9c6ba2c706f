use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Roots,
    Nlambda,
    Spherical,
    Green,
    Martin,
    Limits,
    Measure,
    Furstenberg,
    BcWalk,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Roots => "roots",
            Task::Nlambda => "nlambda",
            Task::Spherical => "spherical",
            Task::Green => "green",
            Task::Martin => "martin",
            Task::Limits => "limits",
            Task::Measure => "measure",
            Task::Furstenberg => "furstenberg",
            Task::BcWalk => "bc-walk",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rational written either as an integer or as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatValue {
    Int(i64),
    Str(String),
}

impl RatValue {
    pub fn to_big(&self) -> Result<BigRational, CliError> {
        match self {
            RatValue::Int(n) => Ok(BigRational::from_integer((*n).into())),
            RatValue::Str(s) => BigRational::from_str(s.trim())
                .map_err(|_| CliError::Config(format!("`{}` is not a rational number", s))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumConfig {
    #[serde(rename = "type")]
    pub kind: String,
    pub rank: usize,
    pub q: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    /// Coweight coordinates of `lambda_k`.
    pub lambda: Vec<i64>,
    pub weight: RatValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    pub generators: Vec<Generator>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub lazy: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    /// Direction word `w = s_{i_1} ... s_{i_k}`.
    #[serde(default)]
    pub word: Vec<usize>,
    #[serde(default, rename = "J")]
    pub j: Vec<usize>,
    #[serde(default)]
    pub c: Vec<RatValue>,
    #[serde(default = "default_schedule")]
    pub schedule: String,
    /// Coweight coordinates of the angular direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<i64>>,
}

fn default_schedule() -> String {
    "linear".into()
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Task parameters; each task reads the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mus: Vec<Vec<i64>>,
    #[serde(default, rename = "J", skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// `zeta / rho`; used when `zeta` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xs: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ys: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Series truncation tolerance for Green functions.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol: default_tol() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// File stem for `<stem>.csv` and `<stem>.json`; defaults to the task name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default)]
    pub seed: u64,
    pub datum: DatumConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecConfig>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))?;
        Self::from_toml(&text)
    }

    pub fn stem(&self) -> String {
        match (&self.output.stem, self.task) {
            (Some(s), _) => s.clone(),
            (None, Some(t)) => t.name().to_string(),
            (None, None) => "run".into(),
        }
    }
}
