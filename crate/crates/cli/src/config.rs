use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Settings shared by every command. Everything except the output directory
/// enters the config hash written into output headers.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub constraint_eps: f64,
    pub ode_step: f64,
    pub fd_delta: f64,
    pub normalize: bool,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            constraint_eps: calabi::space::DEFAULT_CONSTRAINT_EPS,
            ode_step: calabi::connection::DEFAULT_ODE_STEP,
            fd_delta: calabi::connection::DEFAULT_FD_STEP,
            normalize: false,
            seed: 0,
            out_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        for (name, v) in [
            ("--tol", self.constraint_eps),
            ("--step", self.ode_step),
            ("--fd-delta", self.fd_delta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn header(&self) -> Header {
        Header {
            tool: "calabi".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: self.hash(),
            seed: self.seed,
        }
    }

    /// Comment line opening every CSV output.
    pub fn csv_header(&self) -> String {
        let h = self.header();
        format!(
            "# {} {} config={} seed={}",
            h.tool, h.version, h.config_hash, h.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}
