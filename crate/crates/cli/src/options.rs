//! Command-line flags and the optional TOML configuration file.
//!
//! Every flag has a file key of the same name (underscores for dashes, `K`
//! for `--K`). Flags override the file; the file overrides built-in defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Matrix size; a comma-separated list for `table1`.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub n: Option<Vec<usize>>,

    #[arg(long, global = true)]
    pub realizations: Option<usize>,

    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Mesh density of the maximum search (default 2N).
    #[arg(long, global = true)]
    pub delta: Option<usize>,

    #[arg(long, global = true)]
    pub top_k: Option<usize>,

    #[arg(long, global = true)]
    pub x_tol: Option<f64>,

    /// Scale constant K of the predicted law.
    #[arg(long = "K", global = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,

    /// Exponents q of the weight, comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub q: Option<Vec<f64>>,

    /// Inverse temperatures for `check-duality`, comma-separated, in (0, 1).
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub beta: Option<Vec<f64>>,

    /// y, y-prime or both.
    #[arg(long, global = true)]
    pub variant: Option<String>,

    /// Real part of the Bromwich contour.
    #[arg(long, global = true)]
    pub contour: Option<f64>,

    #[arg(long, global = true)]
    pub grid_lo: Option<f64>,
    #[arg(long, global = true)]
    pub grid_hi: Option<f64>,
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,

    #[arg(long, global = true)]
    pub histogram_lo: Option<f64>,
    #[arg(long, global = true)]
    pub histogram_hi: Option<f64>,
    #[arg(long, global = true)]
    pub bin_width: Option<f64>,

    /// Existing maxima CSV for `compare` (skips the simulation).
    #[arg(long, global = true)]
    pub maxima: Option<PathBuf>,

    /// Monte-Carlo samples per case for `check-selberg`.
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Bootstrap resamples for the standard errors in `table1`.
    #[arg(long, global = true)]
    pub bootstrap: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    }))
}

macro_rules! merge_fields {
    ($flags:ident, $file:ident; $($f:ident),*) => {
        Options { $($f: $flags.$f.or($file.$f)),* }
    };
}

impl Options {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
    }

    /// Flags win over the file.
    pub fn over(self, file: Options) -> Options {
        let flags = self;
        merge_fields!(flags, file;
            n, realizations, seed, out, workers, delta, top_k, x_tol, k, q, beta, variant,
            contour, grid_lo, grid_hi, grid_step, histogram_lo, histogram_hi, bin_width,
            maxima, samples, bootstrap)
    }

    pub fn single_n(&self, default: usize) -> Result<usize, UsageError> {
        match self.n.as_deref() {
            None => Ok(default),
            Some([n]) => Ok(*n),
            Some(_) => Err(UsageError("this command takes a single --n".into())),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
