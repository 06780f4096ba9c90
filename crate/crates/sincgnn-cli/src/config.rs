use std::path::{Path, PathBuf};

use serde::Deserialize;
use sincgnn::quadrature::QuadMode;
use sincgnn::signal::check_band;
use sincgnn::{Error, KernelParams};

use crate::CliError;

/// Values read from `--config`; any flag given on the command line wins.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dim: Option<usize>,
    pub sigma: Option<f64>,
    pub m_list: Option<Vec<u32>>,
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub n_signals: Option<usize>,
    pub n_terms: Option<usize>,
    pub quad_mode: Option<QuadArg>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum QuadArg {
    #[default]
    Rational,
    Composite,
}

impl From<QuadArg> for QuadMode {
    fn from(q: QuadArg) -> Self {
        match q {
            QuadArg::Rational => QuadMode::SinglePanelRational,
            QuadArg::Composite => QuadMode::Composite,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub sigma: f64,
    pub m_list: Vec<u32>,
    pub beta: f64,
    pub seed: u64,
    pub n_signals: usize,
    pub n_terms: usize,
    pub quad_mode: QuadMode,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Every M even, L_s integral and σ < π/h for each M.
    pub fn validate(&self) -> Result<Vec<KernelParams>, Error> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if self.m_list.is_empty() {
            return Err(Error::Config("m_list is empty".into()));
        }
        if self.n_terms == 0 {
            return Err(Error::Config("a signal needs at least one term".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        let mut out = Vec::with_capacity(self.m_list.len());
        for &m in &self.m_list {
            let p = KernelParams::with_defaults(m, self.beta)?;
            check_band(self.sigma, p.h)?;
            out.push(p);
        }
        Ok(out)
    }
}
