//! Run configuration: a TOML file, optionally named by an environment
//! variable, with command-line flags layered on top.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use donor_strain::donor::{DonorTable, GAnisotropySource, ParameterSet};
use donor_strain::strain::ElasticConstants;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "DONOR_STRAIN_CONFIG";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(CliError::Invalid(format!("unknown output format `{s}` (csv, json)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElasticChoice {
    Preset(String),
    Explicit { c11_pa: f64, c12_pa: f64, c44_pa: f64 },
}

impl Default for ElasticChoice {
    fn default() -> Self {
        ElasticChoice::Preset("si".into())
    }
}

impl ElasticChoice {
    pub fn resolve(&self) -> Result<ElasticConstants> {
        Ok(match self {
            ElasticChoice::Preset(name) => ElasticConstants::preset(name)?,
            ElasticChoice::Explicit { c11_pa, c12_pa, c44_pa } => ElasticConstants::new(*c11_pa, *c12_pa, *c44_pa)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Donor constants file; the built-in table when absent.
    pub constants: Option<PathBuf>,
    pub elastic: ElasticChoice,
    pub cross_section_m2: f64,
    pub drive_hz: f64,
    pub format: OutputFormat,
    pub parameter_set: ParameterSet,
    pub g_anisotropy: GAnisotropySource,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            constants: None,
            elastic: ElasticChoice::default(),
            cross_section_m2: 4e-6,
            drive_hz: 9.7e9,
            format: OutputFormat::Csv,
            parameter_set: ParameterSet::Experimental,
            g_anisotropy: GAnisotropySource::Literature,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // relative constants paths are taken from the config file's directory
        if let (Some(c), Some(dir)) = (&cfg.constants, path.parent()) {
            if c.is_relative() {
                cfg.constants = Some(dir.join(c));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.drive_hz > 0.0 && self.drive_hz.is_finite()) {
            return Err(CliError::Config(format!("drive frequency must be > 0, got {}", self.drive_hz)));
        }
        if !(self.cross_section_m2 > 0.0 && self.cross_section_m2.is_finite()) {
            return Err(CliError::Config(format!("cross-section must be > 0, got {}", self.cross_section_m2)));
        }
        if let Some(p) = &self.constants {
            if !p.is_file() {
                return Err(CliError::Config(format!("constants file {} does not exist", p.display())));
            }
        }
        self.elastic.resolve()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }
}

/// Flag values that override the config file when present.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub constants: Option<PathBuf>,
    pub elastic_preset: Option<String>,
    pub c11_pa: Option<f64>,
    pub c12_pa: Option<f64>,
    pub c44_pa: Option<f64>,
    pub cross_section_m2: Option<f64>,
    pub drive_hz: Option<f64>,
    pub format: Option<OutputFormat>,
    pub parameter_set: Option<ParameterSet>,
    pub g_anisotropy: Option<GAnisotropySource>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(c) = &self.constants {
            cfg.constants = Some(c.clone());
        }
        if let Some(p) = &self.elastic_preset {
            cfg.elastic = ElasticChoice::Preset(p.clone());
        }
        match (self.c11_pa, self.c12_pa, self.c44_pa) {
            (Some(c11_pa), Some(c12_pa), Some(c44_pa)) => cfg.elastic = ElasticChoice::Explicit { c11_pa, c12_pa, c44_pa },
            (None, None, None) => {}
            _ => return Err(CliError::Invalid("--c11, --c12 and --c44 must be given together".into())),
        }
        if let Some(v) = self.cross_section_m2 {
            cfg.cross_section_m2 = v;
        }
        if let Some(v) = self.drive_hz {
            cfg.drive_hz = v;
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = self.parameter_set {
            cfg.parameter_set = v;
        }
        if let Some(v) = self.g_anisotropy {
            cfg.g_anisotropy = v;
        }
        Ok(())
    }
}

/// Everything a command needs, resolved once.
#[derive(Clone, Debug)]
pub struct Context {
    pub config: RunConfig,
    pub donors: DonorTable,
    pub elastic: ElasticConstants,
    pub config_hash: String,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let donors = match &config.constants {
            Some(p) => DonorTable::from_path(p)?,
            None => DonorTable::builtin(),
        };
        let elastic = config.elastic.resolve()?;
        let config_hash = config.hash();
        Ok(Context { config, donors, elastic, config_hash })
    }

    /// Config file (explicit path, else the environment variable) plus overrides.
    pub fn load(config_path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let env_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        let mut cfg = match config_path.map(Path::to_path_buf).or(env_path) {
            Some(p) => RunConfig::from_path(&p)?,
            None => RunConfig::default(),
        };
        overrides.apply(&mut cfg)?;
        Self::new(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_hash_are_stable() {
        let a = RunConfig::default();
        assert_eq!(a.hash(), RunConfig::default().hash());
        let b = RunConfig { drive_hz: 9.5e9, ..RunConfig::default() };
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn parses_toml() {
        let c = RunConfig::from_toml_str(
            r#"
            drive_hz = 9.5e9
            format = "json"
            parameter_set = "tight-binding"
            elastic = { c11_pa = 165.7e9, c12_pa = 63.9e9, c44_pa = 79.6e9 }
            "#,
        )
        .unwrap();
        assert_eq!(c.format, OutputFormat::Json);
        assert_eq!(c.parameter_set, ParameterSet::TightBinding);
        assert!(matches!(c.elastic, ElasticChoice::Explicit { .. }));
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn flags_win() {
        let mut c = RunConfig::default();
        let o = Overrides { drive_hz: Some(1e9), format: Some(OutputFormat::Json), ..Default::default() };
        o.apply(&mut c).unwrap();
        assert_eq!(c.drive_hz, 1e9);
        assert_eq!(c.format, OutputFormat::Json);
        let partial = Overrides { c11_pa: Some(1.0), ..Default::default() };
        assert!(partial.apply(&mut c).is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig { drive_hz: 0.0, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { constants: Some("/nonexistent/donors.toml".into()), ..RunConfig::default() }
            .validate()
            .is_err());
        assert!(RunConfig { elastic: ElasticChoice::Preset("Ge".into()), ..RunConfig::default() }.validate().is_err());
    }
}
