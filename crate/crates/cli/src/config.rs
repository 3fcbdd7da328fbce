//! Run configuration: built-in defaults, then a config file, then flags.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use warpband::io::GridSpec;
use warpband::paley_wiener::{RealGrid, DEFAULT_SPECTRAL_NODES, MIN_SPECTRAL_NODES};
use warpband::range_rkhs::DEFAULT_RIDGE;
use warpband::{Error, Result};

pub const CONFIG_FORMAT: &str = "warpband-config/1";
pub const CONFIG_ENV: &str = "WARPBAND_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub format: String,
    pub time_grid: GridSpec,
    /// Odd node count of spectra on `[-a, a]`.
    pub spectral_nodes: usize,
    pub quadrature_tol: f64,
    pub ridge: f64,
    /// Left out of manifests so output trees do not depend on where they live.
    #[serde(skip_serializing)]
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format: CONFIG_FORMAT.into(),
            time_grid: RealGrid::default_time().into(),
            spectral_nodes: DEFAULT_SPECTRAL_NODES,
            quadrature_tol: 1e-10,
            ridge: DEFAULT_RIDGE,
            out_dir: PathBuf::from("warpband-out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// `explicit` wins over the environment variable; neither means defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Self> {
        let path = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => env::var_os(CONFIG_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from),
        };
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(&p)
                    .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if c.format != CONFIG_FORMAT {
            return Err(Error::Format(format!(
                "expected format {CONFIG_FORMAT}, found {}",
                c.format
            )));
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.time_grid.to_grid()?;
        if self.spectral_nodes < MIN_SPECTRAL_NODES || self.spectral_nodes.is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "spectral_nodes must be odd and at least {MIN_SPECTRAL_NODES}, got {}",
                self.spectral_nodes
            )));
        }
        for (name, v) in [
            ("quadrature_tol", self.quadrature_tol),
            ("ridge", self.ridge),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
