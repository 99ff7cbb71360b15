//! Run parameters: command-line flags layered over an optional flat `key = value`
//! file, layered over per-command defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use wishart_rd::bounds::BoundConstants;
use wishart_rd::Prior;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    BaBinary,
    BaGaussian,
    WishartEntropy,
    Quantize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Gaussian,
    Sphere,
}

impl From<PriorArg> for Prior {
    fn from(p: PriorArg) -> Prior {
        match p {
            PriorArg::Gaussian => Prior::GaussianIsotropic,
            PriorArg::Sphere => Prior::SphereUniform,
        }
    }
}

/// Every flag accepted by the subcommands. Unset flags fall back to the config file
/// and then to the subcommand's defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Number of latent vectors (comma-separated list for phase-diagram)
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Latent dimension (comma-separated list for phase-diagram)
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    /// Target distortion
    #[arg(long = "D")]
    pub distortion: Option<f64>,
    /// Edge density or source bias (comma-separated list for phase-diagram)
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Leading constant c
    #[arg(long)]
    pub c: Option<f64>,
    /// Small-d regime split c*
    #[arg(long = "c-star")]
    pub c_star: Option<f64>,
    /// Covering-number constant C0
    #[arg(long = "C0")]
    pub c0: Option<f64>,
    /// Net radius constant c1
    #[arg(long)]
    pub c1: Option<f64>,
    /// Quadratic slack K of the large-d bound
    #[arg(long = "k-slack")]
    pub k_slack: Option<f64>,
    /// Master seed (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials or samples per check
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output format (default csv)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (default: stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// CSV file of grid points
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Verification suite: lemma31, moments_spherical, specfun or all
    #[arg(long)]
    pub suite: Option<String>,
    /// Oracle to run
    #[arg(long, value_enum)]
    pub kind: Option<OracleKind>,
    /// Quantizer grid step
    #[arg(long)]
    pub eta: Option<f64>,
    /// Monte Carlo sample count
    #[arg(long)]
    pub samples: Option<usize>,
    /// Grid points of the discretized Gaussian source
    #[arg(long)]
    pub points: Option<usize>,
    /// Blahut-Arimoto gap tolerance (nats)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Blahut-Arimoto iteration cap
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Latent prior (default gaussian)
    #[arg(long, value_enum)]
    pub prior: Option<PriorArg>,
    /// Record wall-clock runtimes (makes output non-reproducible)
    #[arg(long)]
    pub timing: bool,
    /// Summary JSON path for phase-diagram
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Flat key = value parameter file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parsed `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!("config line {}: expected key = value", lineno + 1)));
        };
        let key = key.trim().trim_start_matches("--").to_owned();
        if out.insert(key.clone(), value.trim().to_owned()).is_some() {
            return Err(CliError::usage(format!("config line {}: duplicate key {key}", lineno + 1)));
        }
    }
    Ok(out)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| CliError::usage(format!("config key {key}: cannot parse {value:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T::Err: Display,
{
    value.split(',').map(|v| parse_value(key, v.trim())).collect()
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true).map_err(|e| CliError::usage(format!("config key {key}: {e}")))
}

impl RunArgs {
    /// Fills unset flags from the `--config` file, if any.
    pub fn merge_config_file(&mut self) -> Result<(), CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(());
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        self.merge(&parse_config(&text)?)
    }

    pub fn merge(&mut self, cfg: &BTreeMap<String, String>) -> Result<(), CliError> {
        for (key, value) in cfg {
            let k = key.as_str();
            match k {
                "n" if self.n.is_none() => self.n = Some(parse_list(k, value)?),
                "d" if self.d.is_none() => self.d = Some(parse_list(k, value)?),
                "D" if self.distortion.is_none() => self.distortion = Some(parse_value(k, value)?),
                "p" if self.p.is_none() => self.p = Some(parse_list(k, value)?),
                "c" if self.c.is_none() => self.c = Some(parse_value(k, value)?),
                "c-star" if self.c_star.is_none() => self.c_star = Some(parse_value(k, value)?),
                "C0" if self.c0.is_none() => self.c0 = Some(parse_value(k, value)?),
                "c1" if self.c1.is_none() => self.c1 = Some(parse_value(k, value)?),
                "k-slack" if self.k_slack.is_none() => self.k_slack = Some(parse_value(k, value)?),
                "seed" if self.seed.is_none() => self.seed = Some(parse_value(k, value)?),
                "trials" if self.trials.is_none() => self.trials = Some(parse_value(k, value)?),
                "threads" if self.threads.is_none() => self.threads = Some(parse_value(k, value)?),
                "format" if self.format.is_none() => self.format = Some(parse_enum(k, value)?),
                "output" if self.output.is_none() => self.output = Some(PathBuf::from(value)),
                "grid" if self.grid.is_none() => self.grid = Some(PathBuf::from(value)),
                "suite" if self.suite.is_none() => self.suite = Some(value.clone()),
                "kind" if self.kind.is_none() => self.kind = Some(parse_enum(k, value)?),
                "eta" if self.eta.is_none() => self.eta = Some(parse_value(k, value)?),
                "samples" if self.samples.is_none() => self.samples = Some(parse_value(k, value)?),
                "points" if self.points.is_none() => self.points = Some(parse_value(k, value)?),
                "tol" if self.tol.is_none() => self.tol = Some(parse_value(k, value)?),
                "max-iter" if self.max_iter.is_none() => self.max_iter = Some(parse_value(k, value)?),
                "prior" if self.prior.is_none() => self.prior = Some(parse_enum(k, value)?),
                "summary" if self.summary.is_none() => self.summary = Some(PathBuf::from(value)),
                "timing" => self.timing |= parse_value::<bool>(k, value)?,
                "n" | "d" | "D" | "p" | "c" | "c-star" | "C0" | "c1" | "k-slack" | "seed" | "trials" | "threads"
                | "format" | "output" | "grid" | "suite" | "kind" | "eta" | "samples" | "points" | "tol"
                | "max-iter" | "prior" | "summary" => {}
                other => return Err(CliError::usage(format!("unknown config key {other:?}"))),
            }
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn prior(&self) -> Prior {
        self.prior.unwrap_or(PriorArg::Gaussian).into()
    }

    pub fn constants(&self) -> Result<BoundConstants, CliError> {
        let base = BoundConstants::default();
        let k = BoundConstants {
            c: self.c.unwrap_or(base.c),
            c_star: self.c_star.unwrap_or(base.c_star),
            c0: self.c0.unwrap_or(base.c0),
            c1: self.c1.unwrap_or(base.c1),
            k_slack: self.k_slack.unwrap_or(base.k_slack),
            comparison_factor: base.comparison_factor,
        };
        k.validate().map_err(CliError::from)?;
        Ok(k)
    }

    /// The single value of a list flag.
    pub fn single<T: Copy>(list: &Option<Vec<T>>, name: &str) -> Result<Option<T>, CliError> {
        match list.as_deref() {
            None => Ok(None),
            Some([v]) => Ok(Some(*v)),
            Some(_) => Err(CliError::usage(format!("--{name} takes a single value for this command"))),
        }
    }

    pub fn required<T: Copy>(list: &Option<Vec<T>>, name: &str) -> Result<T, CliError> {
        Self::single(list, name)?.ok_or_else(|| CliError::usage(format!("--{name} is required")))
    }
}

pub fn require<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("--{name} is required")))
}

/// Reads a CSV grid file into rows keyed by column name.
pub fn read_grid(path: &Path) -> Result<Vec<BTreeMap<String, String>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(format!("cannot read grid {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::usage(format!("grid {}: {e}", path.display())))?
        .clone();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::usage(format!("grid {}: {e}", path.display())))?;
        rows.push(headers.iter().map(str::to_owned).zip(rec.iter().map(str::to_owned)).collect());
    }
    if rows.is_empty() {
        return Err(CliError::usage(format!("grid {} has no rows", path.display())));
    }
    Ok(rows)
}

pub fn grid_value<T: FromStr>(row: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: Display,
{
    match row.get(key).map(String::as_str) {
        None | Some("") => Ok(None),
        Some(v) => parse_value(key, v).map(Some),
    }
}
