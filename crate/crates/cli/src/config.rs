//! Run configuration, loaded from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use conic_spectra::analysis::{SolverOptions, SweepConfig};
use conic_spectra::geometry::ModelSpec;
use conic_spectra::sphere_modes::MultiplicityModel;
use conic_spectra::{Error, Result};

/// The schema published alongside the binary.
pub const SCHEMA: &str = include_str!("../schema/run_config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicities {
    #[default]
    Builtin,
    Agnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    pub format: Format,
    pub dir: PathBuf,
    pub svg: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions { format: Format::Csv, dir: PathBuf::from("out"), svg: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub degrees: Vec<usize>,
    pub m1: ModelSpec,
    pub m2: ModelSpec,
    pub epsilons: Vec<f64>,
    pub lambda_max: f64,
    pub k: usize,
    pub solver: SolverOptions,
    pub multiplicities: Multiplicities,
    pub omega: f64,
    pub c_rho: Option<f64>,
    pub upper_margin: f64,
    pub final_rel_err: f64,
    /// Sphere modes enumerated by `modes` and `aps-kernel`.
    pub mu_sq_max: f64,
    pub output: OutputOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SweepConfig::default();
        RunConfig {
            n: s.n,
            degrees: s.degrees,
            m1: s.m1,
            m2: s.m2,
            epsilons: s.epsilons,
            lambda_max: s.lambda_max,
            k: s.k,
            solver: s.solver,
            multiplicities: Multiplicities::Builtin,
            omega: s.omega,
            c_rho: s.c_rho,
            upper_margin: s.upper_margin,
            final_rel_err: s.final_rel_err,
            mu_sq_max: s.kernel_mu_sq_max,
            output: OutputOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Domain(format!("config does not match the schema: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep().validate()?;
        let positive = [
            ("omega", self.omega),
            ("upper_margin", self.upper_margin),
            ("final_rel_err", self.final_rel_err),
            ("mu_sq_max", self.mu_sq_max),
            ("solver.agreement_rtol", self.solver.agreement_rtol),
            ("solver.zero_threshold", self.solver.zero_threshold),
            ("solver.scan_fraction", self.solver.scan_fraction),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(c) = self.c_rho {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Domain(format!("c_rho must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            n: self.n,
            m1: self.m1,
            m2: self.m2,
            epsilons: self.epsilons.clone(),
            degrees: self.degrees.clone(),
            k: self.k,
            lambda_max: self.lambda_max,
            solver: self.solver,
            omega: self.omega,
            c_rho: self.c_rho,
            upper_margin: self.upper_margin,
            final_rel_err: self.final_rel_err,
            kernel_mu_sq_max: self.mu_sq_max,
        }
    }

    pub fn model(&self) -> MultiplicityModel {
        match self.multiplicities {
            Multiplicities::Builtin => MultiplicityModel::Builtin,
            Multiplicities::Agnostic => MultiplicityModel::Agnostic,
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring output options.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputOptions::default();
        let json = serde_json::to_string(&canonical).expect("configs serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
