use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "snh", version, about = "Stationary states of the Schrödinger-Newton-Hooke system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "command")]
pub enum Command {
    /// Ground state for central amplitude b
    Ground {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        b: f64,
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
    },
    /// State with n sign changes for central amplitude b
    Excited {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
    },
    /// Singular ground states and omega_inf over a dimension range
    Singular {
        /// Single dimension or inclusive range such as 7..20
        #[arg(long)]
        d: DimRange,
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
    },
    /// Ground-state frequency curve omega(b)
    Sweep {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 0.1)]
        b_lo: f64,
        #[arg(long, default_value_t = 1000.0)]
        b_hi: f64,
        #[arg(long, default_value_t = 121)]
        points: usize,
        /// Geometric spacing in b (pass `--log false` for linear)
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        log: bool,
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
    },
    /// Recompute the identity checks of a stored ground or excited result
    Verify {
        file: PathBuf,
    },
    /// Asymptotic fits on a stored sweep or singular table (CSV)
    Fit {
        #[arg(long, value_enum)]
        model: FitKind,
        #[arg(long)]
        input: PathBuf,
        /// Dimension of the sweep (bifurcation and large-b models)
        #[arg(long)]
        d: Option<u32>,
        /// Limiting frequency for the large-b model
        #[arg(long)]
        omega_inf: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long, default_value_t = snh_core::shooting::DEFAULT_C_TOL)]
    pub c_tol: f64,
    /// Worker threads (defaults to the number of cores)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Bifurcation,
    LargeB,
    OmegaInf,
}

/// Inclusive dimension range, written `7..20` or `7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimRange {
    pub lo: u32,
    pub hi: u32,
}

impl DimRange {
    pub fn dims(&self) -> Vec<u32> {
        (self.lo..=self.hi).collect()
    }
}

impl fmt::Display for DimRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for DimRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("bad dimension '{t}': {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let d = parse(s)?;
                (d, d)
            }
        };
        if lo > hi {
            return Err(format!("empty dimension range {s}"));
        }
        Ok(DimRange { lo, hi })
    }
}
