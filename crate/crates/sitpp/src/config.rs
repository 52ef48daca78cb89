//! Run-description I/O: TOML configs, dotted command-line overrides, and the
//! JSON manifest that makes a finished run reproducible.
//!
//! A manifest records the exact [`RunConfig`] (with a content hash), the
//! derived rates and grid spacings, the RNG layout, and the headline results.
//! Feeding a manifest back to [`load_config`] reruns the identical ensemble.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensemble::{BuiltRun, CheckpointStats, EnsembleOutput, RunConfig};
use crate::error::{Result, SitError};
use crate::params::DerivedRates;
use crate::rng;

/// Split one `key=value` override argument.
pub fn parse_override(spec: &str) -> Result<(String, String)> {
    match spec.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => {
            Ok((k.trim().to_string(), v.trim().to_string()))
        }
        _ => Err(SitError::config(format!(
            "override '{spec}' is not of the form key.path=value"
        ))),
    }
}

fn parse_value(s: &str) -> toml::Value {
    if let Ok(b) = s.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = s.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = s.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(s.to_string())
}

fn set_path(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(SitError::config(format!("override key '{key}' has an empty segment")));
    }
    for part in &parts[..parts.len() - 1] {
        let table = node.as_table_mut().ok_or_else(|| {
            SitError::config(format!("override key '{key}': '{part}' is not a table"))
        })?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::map::Map::new()));
    }
    let table = node.as_table_mut().ok_or_else(|| {
        SitError::config(format!("override key '{key}' points into a non-table value"))
    })?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Apply dotted `key.path=value` overrides on top of a config.
///
/// Values are parsed as bool, integer, float, then string, in that order;
/// the final deserialization enforces field names and types, so a typo in
/// the path fails loudly instead of being dropped.
pub fn apply_overrides(config: &RunConfig, pairs: &[(String, String)]) -> Result<RunConfig> {
    let mut value = toml::Value::try_from(config)
        .map_err(|e| SitError::config(format!("cannot serialize config: {e}")))?;
    for (key, raw) in pairs {
        set_path(&mut value, key, parse_value(raw))?;
    }
    value
        .try_into()
        .map_err(|e| SitError::config(format!("override rejected: {e}")))
}

/// RNG layout echoed into the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RngEcho {
    pub algorithm: String,
    pub channel_stride: u64,
    pub meta_trajectory: u64,
}

impl Default for RngEcho {
    fn default() -> Self {
        RngEcho {
            algorithm: "chacha8".to_string(),
            channel_stride: rng::CHANNEL_STRIDE,
            meta_trajectory: rng::META_TRAJ,
        }
    }
}

/// Quantities the run derived from the raw parameters, echoed for the record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedEcho {
    pub rates: DerivedRates,
    pub rho: f64,
    pub atoms_per_cell: f64,
    pub g_rho: f64,
    pub d_tau: f64,
    pub n_bands: usize,
    pub input_area: f64,
    pub input_energy: f64,
}

/// Headline numbers of a finished ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsEcho {
    pub n_traj: usize,
    pub n_completed: usize,
    pub n_diverged: usize,
    pub branch_flips: u64,
    pub s_opt: f64,
    pub s_opt_db: Option<f64>,
    pub z_opt: f64,
    pub absorption: f64,
    pub checkpoints: Vec<CheckpointStats>,
}

impl ResultsEcho {
    pub fn from_output(out: &EnsembleOutput) -> Self {
        ResultsEcho {
            n_traj: out.n_traj,
            n_completed: out.n_completed,
            n_diverged: out.n_diverged,
            branch_flips: out.branch_flips,
            s_opt: out.s_opt,
            s_opt_db: out.s_opt_db,
            z_opt: out.z_opt,
            absorption: out.absorption,
            checkpoints: out.checkpoints.clone(),
        }
    }
}

pub const MANIFEST_FORMAT: &str = "sitpp-manifest";
pub const MANIFEST_VERSION: u32 = 1;

/// Everything needed to rerun and audit one ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    /// Seconds since the Unix epoch at write time.
    pub created_unix: Option<u64>,
    pub config: RunConfig,
    /// SHA-256 of the canonical TOML form of `config`.
    pub config_sha256: String,
    pub rng: RngEcho,
    pub derived: DerivedEcho,
    pub results: Option<ResultsEcho>,
}

/// SHA-256 hex digest of the canonical TOML form of a config.
pub fn config_digest(config: &RunConfig) -> Result<String> {
    let text = toml::to_string(config)
        .map_err(|e| SitError::config(format!("cannot serialize config: {e}")))?;
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    Ok(format!("{:x}", h.finalize()))
}

impl Manifest {
    /// Assemble a manifest for `config`; pass the ensemble output to include
    /// results.
    pub fn new(config: &RunConfig, output: Option<&EnsembleOutput>) -> Result<Self> {
        let built = config.build()?;
        Ok(Manifest {
            format: MANIFEST_FORMAT.to_string(),
            version: MANIFEST_VERSION,
            created_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs()),
            config: config.clone(),
            config_sha256: config_digest(config)?,
            rng: RngEcho::default(),
            derived: derive_echo(config, &built)?,
            results: output.map(ResultsEcho::from_output),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(SitError::config(format!(
                "{} is not a run manifest (format = '{}')",
                path.display(),
                manifest.format
            )));
        }
        if manifest.version != MANIFEST_VERSION {
            return Err(SitError::config(format!(
                "manifest version {} not supported (expected {})",
                manifest.version, MANIFEST_VERSION
            )));
        }
        Ok(manifest)
    }
}

fn derive_echo(config: &RunConfig, built: &BuiltRun) -> Result<DerivedEcho> {
    let rho = built.params.density()?;
    Ok(DerivedEcho {
        rates: built.rates,
        rho,
        atoms_per_cell: built.params.atoms_per_cell()?,
        g_rho: built.params.coupling * rho,
        d_tau: built.grid.d_tau(),
        n_bands: built.propagator.frequency_grid().n_bands(),
        input_area: built.input.area(&built.grid).norm(),
        input_energy: built.input.energy(&built.grid).re,
    })
}

/// Load a run description from either a TOML config or a JSON manifest
/// (selected by file extension). A manifest is integrity-checked against its
/// embedded config hash before the config is handed back.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let is_manifest = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false);
    if is_manifest {
        let manifest = Manifest::load(path)?;
        let digest = config_digest(&manifest.config)?;
        if digest != manifest.config_sha256 {
            return Err(SitError::config(format!(
                "manifest {} was edited: config hash {} does not match recorded {}; \
                 rerun from a TOML config instead",
                path.display(),
                digest,
                manifest.config_sha256
            )));
        }
        Ok(manifest.config)
    } else {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }
}
