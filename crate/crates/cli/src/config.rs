//! Flag / config-file / default resolution.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Options shared by every subcommand. Everything is optional here so a
/// config file can fill the gaps.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// right-shift, ssrw<d>, triangular or file:<path>
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// delta:<c1,..,cd> or file:<path> [default: delta:0]
    #[arg(long, global = true)]
    pub u0: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Comma-separated, strictly increasing
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<u64>>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Comma-separated, one entry per dimension
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Option<Vec<f64>>,
    /// Total pruned-mass budget, in [0, 1e-6]
    #[arg(long, global = true)]
    pub prune_eps: Option<f64>,
    /// Comma-separated exceedance thresholds
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub use_gamma_centering: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with any of the options above (flags take precedence)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: Option<String>,
    u0: Option<String>,
    n: Option<u64>,
    n_list: Option<Vec<u64>>,
    seed: Option<u64>,
    reps: Option<usize>,
    lambda: Option<Vec<f64>>,
    prune_eps: Option<f64>,
    eps: Option<Vec<f64>>,
    use_gamma_centering: Option<bool>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

/// Fully merged options.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: Option<String>,
    pub u0: String,
    pub n: Option<u64>,
    pub n_list: Option<Vec<u64>>,
    pub seed: u64,
    pub reps: Option<usize>,
    pub lambda: Option<Vec<f64>>,
    pub prune_eps: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub use_gamma_centering: bool,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let cfg = RunConfig {
            model: args.model.clone().or(file.model),
            u0: args.u0.clone().or(file.u0).unwrap_or_else(|| "delta:0".into()),
            n: args.n.or(file.n),
            n_list: args.n_list.clone().or(file.n_list),
            seed: args.seed.or(file.seed).unwrap_or(0),
            reps: args.reps.or(file.reps),
            lambda: args.lambda.clone().or(file.lambda),
            prune_eps: args.prune_eps.or(file.prune_eps),
            eps: args.eps.clone().or(file.eps),
            use_gamma_centering: args.use_gamma_centering || file.use_gamma_centering.unwrap_or(false),
            out: args.out.clone().or(file.out),
            format: args.format.or(file.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(list) = &self.n_list {
            if list.is_empty() {
                return Err(CliError::Validation("--n-list is empty".into()));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Validation("--n-list must be strictly increasing".into()));
            }
        }
        if let Some(eps) = self.prune_eps {
            if !(0.0..=1e-6).contains(&eps) {
                return Err(CliError::Validation(format!("--prune-eps must lie in [0, 1e-6], got {eps}")));
            }
        }
        if let Some(eps) = &self.eps {
            if eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(CliError::Validation("--eps values must be finite and non-negative".into()));
            }
        }
        if let Some(l) = &self.lambda {
            if l.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Validation("--lambda values must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn model_ref(&self) -> Result<&str, CliError> {
        self.model.as_deref().ok_or_else(|| CliError::Validation("--model is required".into()))
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
