use crate::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use tomo_core::distance::SolverConfig;
use tomo_core::experiments::RateConfig;
use tomo_core::geodesics::CertifyConfig;
use tomo_core::geometry::{preset, Basis, ConformalField, DomainSpec, FieldDocument};
use tomo_core::mcmc::PcnConfig;
use tomo_core::statmodel::{sample_prior, PriorSpec};
use tomo_core::TomoError;

/// Where a field comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSource {
    Preset(String),
    /// JSON file holding either a field document or a bare coefficient array.
    CoefficientsFile(PathBuf),
    /// Draw from the truncated prior with this seed.
    PriorSeed(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilitySettings {
    pub pairs: usize,
    pub k: usize,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        Self { pairs: 20, k: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InvertSettings {
    pub n_obs: usize,
    pub chain: PcnConfig,
    /// Per-record shooting instead of interpolation from the truth table.
    pub exact_data: bool,
    pub likelihood_k: usize,
    pub likelihood_rays: usize,
}

impl Default for InvertSettings {
    fn default() -> Self {
        Self { n_obs: 1000, chain: PcnConfig::default(), exact_data: false, likelihood_k: 32, likelihood_rays: 24 }
    }
}

/// One run, read from a single JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub domain: DomainSpec<f64>,
    #[serde(default = "default_field")]
    pub field: FieldSource,
    #[serde(default = "default_modes")]
    pub basis_modes: usize,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Fast-marching spacing for the optional oracle comparison in `forward`.
    #[serde(default)]
    pub grid_h: Option<f64>,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub stability: StabilitySettings,
    #[serde(default)]
    pub invert: InvertSettings,
    #[serde(default)]
    pub rate: RateConfig,
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_field() -> FieldSource {
    FieldSource::Preset("flat".into())
}

fn default_modes() -> usize {
    tomo_core::geometry::DEFAULT_MODES
}

fn default_k() -> usize {
    64
}

impl RunConfig {
    /// Parses and validates; relative paths resolve against the config file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let FieldSource::CoefficientsFile(p) = &mut cfg.field {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: TomoError| CliError::Config(e.to_string());
        self.domain.validate().map_err(cfg)?;
        self.solver.validate().map_err(cfg)?;
        self.certify.validate().map_err(cfg)?;
        self.prior.validate().map_err(cfg)?;
        self.invert.chain.validate().map_err(cfg)?;
        self.rate.validate().map_err(cfg)?;
        if self.master_seed.is_none() {
            return Err(CliError::Config("master_seed is required (or pass --seed)".into()));
        }
        if self.basis_modes == 0 {
            return Err(CliError::Config("basis_modes must be positive".into()));
        }
        if self.k < 32 || self.stability.k < 32 || self.invert.likelihood_k < 32 {
            return Err(CliError::Config("table grids need K >= 32".into()));
        }
        if let Some(h) = self.grid_h {
            if !(h > 0.0 && h <= 1.0 / 128.0) {
                return Err(CliError::Config(format!("grid_h must lie in (0, 1/128], got {h}")));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        if let FieldSource::CoefficientsFile(p) = &self.field {
            if !p.is_file() {
                return Err(CliError::Config(format!("coefficients file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.master_seed.expect("validated")
    }

    pub fn basis(&self) -> Result<Arc<Basis<f64>>, CliError> {
        Ok(Arc::new(Basis::new(self.domain, self.basis_modes)?))
    }

    pub fn build_field(&self, basis: &Arc<Basis<f64>>) -> Result<ConformalField<f64>, CliError> {
        match &self.field {
            FieldSource::Preset(name) => preset(name, basis.clone()).map_err(|e| CliError::Config(e.to_string())),
            FieldSource::CoefficientsFile(p) => {
                let text = std::fs::read_to_string(p)?;
                let coefs = match serde_json::from_str::<FieldDocument>(&text) {
                    Ok(doc) => {
                        if doc.domain != self.domain {
                            return Err(CliError::Config("coefficients file domain differs from the configured domain".into()));
                        }
                        doc.coefficients
                    }
                    Err(_) => serde_json::from_str::<Vec<f64>>(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
                };
                if coefs.len() != basis.len() {
                    return Err(CliError::Config(format!(
                        "{} coefficients for a basis of {} modes",
                        coefs.len(),
                        basis.len()
                    )));
                }
                Ok(ConformalField::new(basis.clone(), coefs)?)
            }
            FieldSource::PriorSeed(s) => Ok(sample_prior(&self.prior, basis, *s)?.field),
        }
    }
}
