//! Pipeline configuration file: one optional section per command. Every
//! field may also be given (or overridden) on the command line.

use std::path::{Path, PathBuf};

use entlearn::datagen::SweepModel;
use entlearn::entmetrics::MetricSpec;
use entlearn::neural::{ArchDescriptor, ArchKind, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub gen_static: GenStaticSection,
    pub gen_dynamic: GenDynamicSection,
    pub gen_sweep: GenSweepSection,
    pub train: TrainSection,
    pub predict: PredictSection,
    pub evaluate: EvaluateSection,
    pub oracle: OracleSection,
    pub gradcheck: GradcheckSection,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenStaticSection {
    pub out: Option<PathBuf>,
    pub n_qubits: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub metric_specs: Option<Vec<MetricSpec>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenDynamicSection {
    pub out: Option<PathBuf>,
    pub n_qubits: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub metric_specs: Option<Vec<MetricSpec>>,
    #[serde(rename = "S")]
    pub n_steps: Option<usize>,
    #[serde(rename = "T_tra")]
    pub t_tra: Option<f64>,
    #[serde(rename = "T_tot")]
    pub t_tot: Option<f64>,
    #[serde(rename = "K_out")]
    pub k_out: Option<usize>,
    pub theta_y: Option<f64>,
    pub theta_z: Option<f64>,
    /// When set, sample `J = -0.5` and this many `g` values spanning [-1, 0]
    /// instead of random quenches.
    pub test_grid: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSweepSection {
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub n_qubits: Option<usize>,
    pub model: Option<SweepModel>,
    #[serde(rename = "J")]
    pub coupling: Option<f64>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    pub metric_specs: Option<Vec<MetricSpec>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub arch: Option<ArchDescriptor>,
    pub config: Option<TrainConfig>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub predictions: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub oracle: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub data: Option<PathBuf>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckSection {
    pub arch: Option<ArchKind>,
    pub seed: Option<u64>,
}

pub fn load(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| entlearn::Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))
}

/// `value` if present, otherwise an error naming the flag and config key.
pub fn require<T>(value: Option<T>, flag: &str, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing {flag} (or `{key}` in the config file)")))
}

/// Writes `{"command": .., "<section>": ..}` next to an output file.
pub fn write_resolved<T: Serialize>(next_to: &Path, command: &str, section: &T) -> Result<PathBuf, CliError> {
    let path = next_to.with_extension("config.json");
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), command.into());
    doc.insert(command.replace('-', "_"), serde_json::to_value(section).map_err(entlearn::Error::from)?);
    let text = serde_json::to_string_pretty(&doc).map_err(entlearn::Error::from)?;
    entlearn::io::write_lines(&path, [text])?;
    Ok(path)
}
