//! Experiment configuration files: one JSON document per run, schema
//! version `v1`, hashed so artifacts can cite the exact configuration.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gridfield::{AmplitudeLaw, GridField};
use crate::norms::SupMode;
use crate::solver::{EquationSpec, NlSpec, NlTerm, QSpec, SolveConfig};
use crate::symbols::symbol_by_name;
use crate::trigpoly::{FreqVec, FrequencyModule, TrigPoly};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquationConfig {
    /// `"schrodinger"`, `"airy"`, or `"poly:[c1,c2,...]"`.
    pub symbol: String,
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default)]
    pub nl: Vec<NlTerm>,
    pub s: f64,
    #[serde(default)]
    pub reality: bool,
}

impl EquationConfig {
    pub fn build(&self) -> Result<EquationSpec> {
        EquationSpec::new(
            symbol_by_name(&self.symbol)?,
            QSpec {
                coeffs: self.q.clone(),
            },
            NlSpec {
                terms: self.nl.clone(),
            },
            self.s,
            self.reality,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermConfig {
    pub n: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// Initial data description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSpec {
    /// Finite trigonometric polynomial over explicit generators.
    Trig {
        generators: Vec<f64>,
        terms: Vec<TermConfig>,
    },
    /// The same, sampled onto a torus grid (grid-backend runs).
    TrigOnGrid {
        generators: Vec<f64>,
        terms: Vec<TermConfig>,
        l: f64,
        n_points: usize,
    },
    /// Seeded random band-limited grid field.
    RandomBand {
        seed: u64,
        l: f64,
        n_points: usize,
        band: [f64; 2],
        amplitude: AmplitudeLaw,
    },
}

impl DataSpec {
    fn trig_parts(&self) -> Option<(&[f64], &[TermConfig])> {
        match self {
            DataSpec::Trig { generators, terms } => Some((generators, terms)),
            DataSpec::TrigOnGrid {
                generators, terms, ..
            } => Some((generators, terms)),
            DataSpec::RandomBand { .. } => None,
        }
    }

    pub fn build_trig(&self) -> Result<TrigPoly> {
        let (generators, terms) = self.trig_parts().ok_or_else(|| {
            Error::InvalidConfig("random band data has no exact trig representation".into())
        })?;
        let module = Arc::new(FrequencyModule::new(generators.to_vec())?);
        TrigPoly::from_terms(
            module,
            terms
                .iter()
                .map(|t| (FreqVec::new(t.n.clone()), Complex64::new(t.re, t.im))),
        )
    }

    pub fn build_grid(&self) -> Result<GridField> {
        match self {
            DataSpec::Trig { .. } => Err(Error::InvalidConfig(
                "trig data needs grid parameters; use kind = trig_on_grid".into(),
            )),
            DataSpec::TrigOnGrid { l, n_points, .. } => {
                let poly = self.build_trig()?;
                Ok(GridField::from_trigpoly(&poly, *l, *n_points)?.0)
            }
            DataSpec::RandomBand {
                seed,
                l,
                n_points,
                band,
                amplitude,
            } => Ok(GridField::random_bandlimited(
                *seed,
                *l,
                *n_points,
                (band[0], band[1]),
                *amplitude,
            )),
        }
    }
}

fn default_norm_s() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    0.1
}

fn default_sup_mode() -> SupMode {
    SupMode::Lattice
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormsConfig {
    #[serde(default = "default_norm_s")]
    pub s: f64,
    #[serde(default = "default_sup_mode")]
    pub sup_mode: SupMode,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig {
            s: 1.0,
            sup_mode: SupMode::Lattice,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: String,
    #[serde(default)]
    pub prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: "out".into(),
            prefix: "run".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: String,
    pub equation: EquationConfig,
    pub data: DataSpec,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        if cfg.version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported config version '{}', expected '{SCHEMA_VERSION}'",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    /// Hash of the canonical JSON form; embedded in every artifact.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}
