use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{derive_seed, seeded_rng, DEFAULT_CHECKPOINT_RATIO};
use crate::prefmat::{cyclic_copeland, fixtures, random_matrix, read_matrix_csv, PreferenceMatrix};

/// Seed stream reserved for drawing a `random` matrix, disjoint from replicate seeds.
const MATRIX_STREAM: u64 = u64::MAX;

/// Where the preference matrix comes from: a built-in fixture name, a CSV path, or a
/// generator such as `{"cyclic": {"k": 50, "gamma": 0.1}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Named(String),
    Generated(Generated),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Generated {
    Cyclic {
        k: usize,
        gamma: f64,
    },
    Random {
        k: usize,
        #[serde(rename = "minMargin", default = "default_margin")]
        min_margin: f64,
    },
}

fn default_margin() -> f64 {
    0.01
}

fn default_alpha() -> f64 {
    0.51
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Ccb {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        label: Option<String>,
    },
    Scb {
        #[serde(default)]
        label: Option<String>,
    },
    Rucb {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        label: Option<String>,
    },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ccb { .. } => "ccb",
            Self::Scb { .. } => "scb",
            Self::Rucb { .. } => "rucb",
        }
    }

    /// Value written in the `algorithm` column.
    pub fn label(&self) -> &str {
        match self {
            Self::Ccb { label, .. } | Self::Scb { label } | Self::Rucb { label, .. } => {
                label.as_deref().unwrap_or(self.name())
            }
        }
    }
}

fn default_replicates() -> u32 {
    1
}

fn default_ratio() -> f64 {
    DEFAULT_CHECKPOINT_RATIO
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub matrix: MatrixSource,
    pub algorithms: Vec<AlgorithmSpec>,
    pub horizon: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ratio")]
    pub checkpoint_ratio: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.horizon < 1 {
            return bad("horizon must be at least 1".into());
        }
        if self.replicates < 1 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.checkpoint_ratio > 1.0) || !self.checkpoint_ratio.is_finite() {
            return bad(format!(
                "checkpointRatio must exceed 1, got {}",
                self.checkpoint_ratio
            ));
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms given".into());
        }
        let mut labels: Vec<&str> = Vec::new();
        for spec in &self.algorithms {
            match spec {
                AlgorithmSpec::Ccb { alpha, .. } | AlgorithmSpec::Rucb { alpha, .. }
                    if !(*alpha > 0.5) =>
                {
                    return bad(format!(
                        "{}: alpha must exceed 0.5, got {alpha}",
                        spec.name()
                    ));
                }
                AlgorithmSpec::Scb { .. } if self.horizon < 4 => {
                    return bad("scb needs a horizon of at least 4".into());
                }
                _ => {}
            }
            if labels.contains(&spec.label()) {
                return bad(format!("duplicate algorithm label {:?}", spec.label()));
            }
            labels.push(spec.label());
        }
        if let MatrixSource::Named(name) = &self.matrix {
            if name.is_empty() {
                return bad("empty matrix name".into());
            }
        }
        Ok(())
    }

    /// Materializes the matrix. Unknown fixture names are read as CSV paths.
    pub fn load_matrix(&self) -> Result<PreferenceMatrix<f64>> {
        self.matrix.load(self.seed)
    }
}

impl MatrixSource {
    pub fn load(&self, seed: u64) -> Result<PreferenceMatrix<f64>> {
        match self {
            Self::Named(name) => match fixtures::by_name(name) {
                Some(m) => Ok(m),
                None => read_matrix_csv(name),
            },
            Self::Generated(Generated::Cyclic { k, gamma }) => cyclic_copeland(*k, *gamma),
            Self::Generated(Generated::Random { k, min_margin }) => {
                let mut rng = seeded_rng(derive_seed(seed, MATRIX_STREAM));
                random_matrix(*k, &mut rng, *min_margin)
            }
        }
    }

    /// Short identifier recorded in traces.
    pub fn id(&self) -> String {
        match self {
            Self::Named(name) => name.clone(),
            Self::Generated(Generated::Cyclic { k, gamma }) => format!("cyclic({k},{gamma})"),
            Self::Generated(Generated::Random { k, min_margin }) => {
                format!("random({k},{min_margin})")
            }
        }
    }
}
