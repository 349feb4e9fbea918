//! Serializable experiment configurations. Every subcommand resolves its
//! arguments into an [`ExperimentConfig`], which is echoed in the output
//! header and can be fed back through `kamjet run --config`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use kamjet::arithmetic::{Descriptor, IndexNorm, MapDescriptor};
use kamjet::birkhoff::{CoordinateMode, SolveOrder};
use kamjet::jets::JetJson;
use kamjet::kamengine::Schedule;
use kamjet::torusverify::TorusOptions;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact arithmetic in ℚ(√5) (or its complexification).
    #[default]
    Rational,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Directory for CSV tables.
    pub out_dir: PathBuf,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Sigma {
        alpha: Vec<String>,
        k_max: u32,
        norm: IndexNorm,
    },
    Bruno {
        alpha: Vec<String>,
        k_max: u32,
    },
    Lattice {
        alpha: Vec<String>,
        /// Flow time; derived from `lemma` when absent.
        t: Option<f64>,
        /// `(a, ‖i‖)` for the `(ε, t)` pair of the short-vector estimate.
        lemma: Option<(f64, f64)>,
        coeff_bound: i64,
    },
    Density {
        map: MapDescriptor,
        x0: Vec<f64>,
        /// `None` uses `σ` of the image point.
        a: Option<Descriptor>,
        rho: Descriptor,
        r: Vec<f64>,
        samples: u64,
        k_max: u32,
        csv: String,
    },
    Strips {
        alpha: Vec<String>,
        a: Option<Descriptor>,
        rho: Descriptor,
        r: f64,
        k_max: u32,
    },
    Birkhoff {
        input: PathBuf,
        order: u32,
        coords: CoordinateMode,
        solve: SolveOrder,
    },
    Kam {
        problem: PathBuf,
        stages: Option<usize>,
    },
    Torus {
        hamiltonian: PathBuf,
        r: Vec<f64>,
        samples: usize,
        options: TorusOptions,
        csv_prefix: String,
    },
    Report {
        inputs: Vec<PathBuf>,
    },
}

/// A jet given inline or as a path to a text or JSON jet file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JetSource {
    Path(PathBuf),
    Inline(JetJson),
}

/// Input of `kam run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    /// `Σ α_i p_i q_i + R` in Morse coordinates.
    pub hamiltonian: JetSource,
    /// Frequency directions `e_i`; present for the extended scenario.
    #[serde(default)]
    pub basis: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub schedule: Schedule,
}

/// Parse a configuration, accepting either a bare config or any artifact
/// whose first JSON value carries a `config` field.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let value: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(first) => {
            let line = text.lines().next().unwrap_or("");
            serde_json::from_str(line).map_err(|_| CliError::Schema(first.to_string()))?
        }
    };
    let value = match value {
        serde_json::Value::Object(mut m) if m.contains_key("config") => m.remove("config").unwrap(),
        v => v,
    };
    serde_json::from_value(value).map_err(|e| CliError::Schema(e.to_string()))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            mode: Mode::Float,
            seed: 7,
            out_dir: "out".into(),
            command: Command::Sigma { alpha: vec!["1".into(), "1/2+1/2*sqrt5".into()], k_max: 4, norm: IndexNorm::Euclidean },
        }
    }

    #[test]
    fn round_trip_through_header() {
        let cfg = sample();
        let bare = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&bare).unwrap(), cfg);
        let wrapped = format!("{{\"config\":{bare},\"result\":{{}}}}");
        assert_eq!(parse_config(&wrapped).unwrap(), cfg);
        let lines = format!("{{\"config\":{bare}}}\n{{\"stage\":0}}\n");
        assert_eq!(parse_config(&lines).unwrap(), cfg);
    }

    #[test]
    fn empty_and_unknown_are_schema_errors() {
        assert!(matches!(parse_config(""), Err(CliError::Schema(_))));
        assert!(matches!(parse_config("{}"), Err(CliError::Schema(_))));
        let mut v = serde_json::to_value(sample()).unwrap();
        v["extra"] = 1.into();
        assert!(matches!(parse_config(&v.to_string()), Err(CliError::Schema(_))));
    }
}
