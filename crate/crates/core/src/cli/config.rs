use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridKind, TimeGrid};
use crate::mdd::{make_breit_wigner, make_toy_mdd, MassDistribution};
use crate::quadrature::QuadratureConfig;
use crate::scaling::ScalingOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Toy,
    BreitWigner,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MddSpec {
    pub family: Family,
    pub alpha: f64,
    pub xi0: f64,
    pub m0: f64,
    pub gamma_bar: f64,
    /// `xi,omega` CSV for the tabulated family.
    pub table: Option<PathBuf>,
    /// Metadata sidecar; defaults to the table path with a `.json` extension.
    pub metadata: Option<PathBuf>,
}

impl Default for MddSpec {
    fn default() -> Self {
        MddSpec {
            family: Family::Toy,
            alpha: 0.0,
            xi0: 1.0,
            m0: 1.0,
            gamma_bar: 0.2,
            table: None,
            metadata: None,
        }
    }
}

impl MddSpec {
    pub fn build(&self) -> Result<MassDistribution> {
        let field = |name: &str, msg: String| Error::InvalidInput(format!("mdd.{name}: {msg}"));
        if !(self.xi0 > 0.0 && self.xi0.is_finite()) && self.family != Family::Tabulated {
            return Err(field("xi0", format!("must be > 0 (got {})", self.xi0)));
        }
        match self.family {
            Family::Toy => {
                if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
                    return Err(field("alpha", format!("must be >= 0 (got {})", self.alpha)));
                }
                make_toy_mdd(self.alpha, self.xi0)
            }
            Family::BreitWigner => {
                if !(self.gamma_bar > 0.0 && self.gamma_bar.is_finite()) {
                    return Err(field("gamma_bar", format!("must be > 0 (got {})", self.gamma_bar)));
                }
                if !self.m0.is_finite() {
                    return Err(field("m0", format!("must be finite (got {})", self.m0)));
                }
                make_breit_wigner(self.m0, self.gamma_bar, self.xi0)
            }
            Family::Tabulated => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| field("table", "required for the tabulated family".to_string()))?;
                let metadata = self.metadata.clone().unwrap_or_else(|| table.with_extension("json"));
                MassDistribution::load_table(table, &metadata)
                    .map_err(|e| field("table", format!("{}: {e}", table.display())))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            kind: GridKind::Linear,
            start: 0.0,
            stop: 20.0,
            count: 201,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        if !(self.start >= 0.0) {
            return Err(Error::InvalidInput(format!("grid.start: must be >= 0 (got {})", self.start)));
        }
        if self.count < 1 {
            return Err(Error::InvalidInput("grid.count: must be >= 1".to_string()));
        }
        TimeGrid::build(self.kind, self.start, self.stop, self.count)
            .map_err(|e| Error::InvalidInput(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub rho: Vec<f64>,
    pub normalization_tol: f64,
    pub derivative_tol: f64,
    pub derivative_times: Vec<f64>,
    pub scaling: ScalingOptions,
    pub rate_time: f64,
    pub rate_tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            rho: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            normalization_tol: 1e-10,
            derivative_tol: 1e-6,
            derivative_times: vec![0.1, 1.0, 5.0, 20.0, 50.0],
            scaling: ScalingOptions::default(),
            rate_time: 100.0,
            rate_tolerance: 0.05,
        }
    }
}

/// Everything a command needs. Field names are the JSON config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mdd: MddSpec,
    pub rho: Vec<f64>,
    pub grid: GridSpec,
    pub quadrature: QuadratureConfig,
    pub format: OutputFormat,
    pub out: PathBuf,
    pub mass_scale: Option<f64>,
    pub threads: Option<usize>,
    pub short_time: bool,
    pub verify: VerifyOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mdd: MddSpec::default(),
            rho: vec![0.0],
            grid: GridSpec::default(),
            quadrature: QuadratureConfig::default(),
            format: OutputFormat::Csv,
            out: PathBuf::from("."),
            mass_scale: None,
            threads: None,
            short_time: false,
            verify: VerifyOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))
    }

    /// Checks every field that does not need the density itself.
    pub fn validate(&self) -> Result<()> {
        if self.rho.is_empty() {
            return Err(Error::InvalidInput("rho: at least one value is required".to_string()));
        }
        if let Some(bad) = self.rho.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidInput(format!("rho: values must be >= 0 (got {bad})")));
        }
        if let Some(bad) = self.verify.rho.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidInput(format!("verify.rho: values must be >= 0 (got {bad})")));
        }
        self.grid.build()?;
        self.quadrature
            .validate()
            .map_err(|e| match e {
                Error::InvalidInput(m) => Error::InvalidInput(format!("quadrature.{m}")),
                other => other,
            })?;
        if let Some(m) = self.mass_scale {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidInput(format!("mass_scale: must be > 0 (got {m})")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidInput("threads: must be >= 1".to_string()));
        }
        let s = &self.verify.scaling;
        if !(s.kappa_tolerance > 0.0) || !(s.slope_tolerance > 0.0) {
            return Err(Error::InvalidInput("verify.scaling: tolerances must be > 0".to_string()));
        }
        Ok(())
    }
}
