use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_MAXITER: usize = 10_000;
pub const DEFAULT_STEPS: usize = 1000;

/// A vector given either as one scalar (broadcast to the objective's
/// dimension) or as explicit components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Scalar(f64),
    List(Vec<f64>),
}

impl VectorSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let values = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(if values.len() == 1 { VectorSpec::Scalar(values[0]) } else { VectorSpec::List(values) })
    }

    pub fn resolve(&self, dim: usize, what: &str) -> Result<Vec<f64>, CliError> {
        match self {
            VectorSpec::Scalar(v) => Ok(vec![*v; dim]),
            VectorSpec::List(v) if v.len() == dim => Ok(v.clone()),
            VectorSpec::List(v) => Err(CliError::Config(format!(
                "{what} has {} components but the objective has dimension {dim}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Number of log-sum-exp terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    /// Shekel term count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<Vec<f64>>,
    /// JSON file holding the quadratic's matrix as an array of rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    /// Linear term of a quadratic, or the coefficients of a linear objective.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
}

/// Everything that determines a run. Written back, fully resolved, as the
/// first line of every output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub objective: ObjectiveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxiter: Option<usize>,
    /// Detection steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<VectorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<VectorSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<VectorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn parse_vector(s: &str) -> Result<VectorSpec, String> {
    VectorSpec::parse(s)
}

/// Comma-separated numbers given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct NumList(pub Vec<f64>);

fn parse_list(s: &str) -> Result<NumList, String> {
    match VectorSpec::parse(s)? {
        VectorSpec::Scalar(v) => Ok(NumList(vec![v])),
        VectorSpec::List(v) => Ok(NumList(v)),
    }
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags given alongside it take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// quadratic, quadratic-nesterov, quadratic-random, lse, styblinski-tang,
    /// shekel, piecewise-cosine, sine-bowl or linear.
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Seed for random objective instances and the detection heuristic.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated diagonal of a quadratic.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub diag: Option<NumList>,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub b: Option<NumList>,

    /// gd, heavy-ball, nesterov or ade.
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub maxiter: Option<usize>,
    /// Number of detection steps.
    #[arg(long)]
    pub n: Option<usize>,
    /// Starting point: one scalar (broadcast) or a comma-separated list.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub x0: Option<VectorSpec>,
    /// Initial velocity. detect derives one from seeded probes when absent;
    /// combined starts at rest.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v0: Option<VectorSpec>,
    /// A start for the combined search; repeat for several.
    #[arg(long = "start", value_parser = parse_vector, allow_hyphen_values = true)]
    pub starts: Vec<VectorSpec>,
    /// Keep every k-th trace row.
    #[arg(long)]
    pub every: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
}

impl Flags {
    /// Config file (if any) with the flags applied on top.
    pub fn merged(&self) -> Result<Config, CliError> {
        let mut c = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        macro_rules! set {
            ($($dst:expr => $src:expr),* $(,)?) => {
                $(if let Some(v) = &$src { $dst = Some(v.clone()); })*
            };
        }
        if let Some(name) = &self.objective {
            if *name != c.objective.name {
                c.objective = ObjectiveConfig { name: name.clone(), ..Default::default() };
            }
        }
        set! {
            c.objective.dim => self.dim,
            c.objective.rho => self.rho,
            c.objective.terms => self.terms,
            c.objective.m => self.m,
            c.objective.matrix => self.matrix,
            c.algorithm => self.algorithm,
            c.h => self.h,
            c.eps => self.eps,
            c.maxiter => self.maxiter,
            c.n => self.n,
            c.x0 => self.x0,
            c.v0 => self.v0,
            c.every => self.every,
            c.seed => self.seed,
            c.gamma => self.gamma,
            c.kappa => self.kappa,
        }
        if let Some(NumList(d)) = &self.diag {
            c.objective.diag = Some(d.clone());
        }
        if let Some(NumList(b)) = &self.b {
            c.objective.b = Some(b.clone());
        }
        if !self.starts.is_empty() {
            c.starts = self.starts.clone();
        }
        if c.objective.name.is_empty() {
            return Err(CliError::Config("no objective given (use --objective or a config file)".into()));
        }
        Ok(c)
    }
}
