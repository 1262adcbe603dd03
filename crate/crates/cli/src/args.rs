//! Command-line flags, environment variables and the JSON config file.
//!
//! Flags win over `COBOSE_*` variables, which win over the config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "cobose",
    version,
    about = "Normalization factor, bounds and occupation statistics of two-boson composites"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// χ_N and χ_{N+1}/χ_N for one distribution.
    Chi,
    /// χ_{N+1}/χ_N and the mean commutator per N.
    Ratio,
    /// Tight, purity-only and λ₁-only bounds on χ_{N+1}/χ_N.
    Bounds,
    /// Occupation statistics of one Schmidt mode.
    Occupation,
    /// Figure data: extremal spectra (fig2), ratio bounds (fig3), condensate fractions (fig4).
    Figure {
        #[arg(value_enum)]
        which: Figure,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Grouped,
    Recursive,
    Oracle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Args)]
pub struct Flags {
    /// JSON file supplying defaults for any flag below.
    #[arg(long, global = true, env = "COBOSE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Comma-separated Schmidt coefficients; fractions like 1/3 are accepted.
    #[arg(long, global = true, env = "COBOSE_VALUES")]
    pub values: Option<String>,
    /// Weight of infinitely many infinitesimal coefficients, used with --values.
    #[arg(long, global = true, env = "COBOSE_TAIL")]
    pub tail: Option<f64>,
    /// Rescale --values to unit sum instead of rejecting them.
    #[arg(long, global = true, env = "COBOSE_NORMALIZE")]
    pub normalize: bool,
    /// Distribution as a JSON file, or inline JSON starting with '{'.
    #[arg(long, global = true, env = "COBOSE_GROUPS")]
    pub groups: Option<String>,
    #[arg(long, global = true, env = "COBOSE_LAMBDA1")]
    pub lambda1: Option<f64>,
    #[arg(long, global = true, env = "COBOSE_PURITY")]
    pub purity: Option<f64>,
    /// Which distribution to build from --lambda1/--purity: max, min, uniform, peaked, pmin-limit, pmax.
    #[arg(long, global = true, env = "COBOSE_EXTREMAL")]
    pub extremal: Option<String>,
    #[arg(long, global = true, env = "COBOSE_N")]
    pub n: Option<String>,
    /// Logarithmic grid lo:hi:points_per_decade.
    #[arg(long, global = true, env = "COBOSE_N_GRID")]
    pub n_grid: Option<String>,
    /// Linear grid lo:hi:step.
    #[arg(long, global = true, env = "COBOSE_N_LIN")]
    pub n_lin: Option<String>,
    #[arg(long, global = true, value_enum, env = "COBOSE_ENGINE")]
    pub engine: Option<Engine>,
    #[arg(long, global = true, value_enum, env = "COBOSE_FORMAT")]
    pub format: Option<Format>,
    #[arg(long, global = true, env = "COBOSE_OUT")]
    pub out: Option<PathBuf>,
    /// Recompute with a second engine and fail on relative disagreement above 1e-9.
    #[arg(long, global = true, env = "COBOSE_VERIFY")]
    pub verify: bool,
    /// Largest N evaluated through the χ engines.
    #[arg(long, global = true, env = "COBOSE_MAX_N")]
    pub max_n: Option<String>,
    /// Group of the observed mode, 0 = largest coefficient.
    #[arg(long, global = true, env = "COBOSE_MODE_GROUP")]
    pub mode_group: Option<usize>,
    /// Copy within the group.
    #[arg(long, global = true, env = "COBOSE_MODE_INDEX")]
    pub mode_index: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "COBOSE_THREADS")]
    pub threads: Option<usize>,
}

/// The config file: same keys as the long flags, with underscores.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub values: Option<ValueList>,
    pub tail: Option<f64>,
    pub normalize: Option<bool>,
    pub groups: Option<serde_json::Value>,
    pub lambda1: Option<f64>,
    pub purity: Option<f64>,
    pub extremal: Option<String>,
    pub n: Option<u64>,
    pub n_grid: Option<String>,
    pub n_lin: Option<String>,
    pub engine: Option<Engine>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub verify: Option<bool>,
    pub max_n: Option<u64>,
    pub mode_group: Option<usize>,
    pub mode_index: Option<u64>,
    pub threads: Option<usize>,
}

/// `"0.5,0.5"` or `[0.5, 0.5]` or `["1/3", "2/3"]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ValueList {
    Text(String),
    Numbers(Vec<f64>),
    Strings(Vec<String>),
}

impl ValueList {
    fn into_text(self) -> String {
        match self {
            ValueList::Text(s) => s,
            ValueList::Numbers(v) => v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(","),
            ValueList::Strings(v) => v.join(","),
        }
    }
}

impl ConfigFile {
    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::parse(format!("bad config {}: {e}", path.display())))
    }
}

impl Flags {
    /// Fills every unset flag from the config file.
    pub fn layered(mut self) -> CliResult<Flags> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let c = ConfigFile::load(&path)?;
        self.values = self.values.or(c.values.map(ValueList::into_text));
        self.tail = self.tail.or(c.tail);
        self.normalize |= c.normalize.unwrap_or(false);
        self.groups = self.groups.or(c.groups.map(|g| match g {
            serde_json::Value::String(path) => path,
            inline => inline.to_string(),
        }));
        self.lambda1 = self.lambda1.or(c.lambda1);
        self.purity = self.purity.or(c.purity);
        self.extremal = self.extremal.or(c.extremal);
        // A grid set on a higher layer hides a single N from the file, and vice versa.
        let n_set = self.n.is_some() || self.n_grid.is_some() || self.n_lin.is_some();
        if !n_set {
            self.n = c.n.map(|n| n.to_string());
            self.n_grid = c.n_grid;
            self.n_lin = c.n_lin;
        }
        self.engine = self.engine.or(c.engine);
        self.format = self.format.or(c.format);
        self.out = self.out.or(c.out);
        self.verify |= c.verify.unwrap_or(false);
        self.max_n = self.max_n.or(c.max_n.map(|n| n.to_string()));
        self.mode_group = self.mode_group.or(c.mode_group);
        self.mode_index = self.mode_index.or(c.mode_index);
        self.threads = self.threads.or(c.threads);
        Ok(self)
    }
}
