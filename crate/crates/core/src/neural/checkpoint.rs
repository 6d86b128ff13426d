use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Architecture, Model};
use super::tensor::Tensor;
use super::train::TrainConfig;
use crate::datagen::{DatasetHeader, TimeGrid};
use crate::entmetrics::MetricSpec;
use crate::error::{Error, Result};
use crate::io::{read_lines, to_json_line, write_lines};
use crate::measure::MeasurementKind;

pub const CHECKPOINT_FORMAT: &str = "entlearn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub final_train_loss: f64,
    pub final_val_loss: f64,
    pub config: TrainConfig,
}

/// Self-describing trained network: shape, task context and parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub architecture: Architecture,
    pub n_qubits: usize,
    pub metric_specs: Vec<MetricSpec>,
    pub measurement: MeasurementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<TimeGrid>,
    pub tensors: Vec<NamedTensor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingMeta>,
}

impl Checkpoint {
    /// Snapshots `model` together with the dataset context it serves.
    pub fn new(model: &Model, header: &DatasetHeader, training: Option<TrainingMeta>) -> Self {
        let tensors = model
            .parameter_names()
            .into_iter()
            .zip(model.parameters())
            .map(|(name, t)| NamedTensor { name, shape: t.shape.clone(), data: t.data.clone() })
            .collect();
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            architecture: model.architecture().clone(),
            n_qubits: header.n_qubits,
            metric_specs: header.metric_specs.clone(),
            measurement: header.measurement,
            grid: header.grid,
            tensors,
            training,
        }
    }

    pub fn model(&self) -> Result<Model> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint format '{}' v{}",
                self.format, self.version
            )));
        }
        let params = self
            .tensors
            .iter()
            .map(|t| Tensor::new(t.shape.clone(), t.data.clone()))
            .collect::<Result<Vec<_>>>()?;
        let model = Model::from_parameters(&self.architecture, params)?;
        for (want, got) in model.parameter_names().iter().zip(&self.tensors) {
            if want != &got.name {
                return Err(Error::ArchMismatch(format!("tensor '{}' where '{want}' expected", got.name)));
            }
        }
        Ok(model)
    }

    /// Confirms the checkpoint can consume and score samples of `header`.
    pub fn check_dataset(&self, header: &DatasetHeader) -> Result<()> {
        let arch = &self.architecture;
        if arch.input_len() != header.input_dim || arch.output_dim() != header.target_dim {
            return Err(Error::ArchMismatch(format!(
                "model maps {} -> {} values, dataset has {} -> {}",
                arch.input_len(),
                arch.output_dim(),
                header.input_dim,
                header.target_dim
            )));
        }
        if self.n_qubits != header.n_qubits || self.measurement != header.measurement {
            return Err(Error::ArchMismatch(format!(
                "model trained on {} qubits ({:?}), dataset has {} ({:?})",
                self.n_qubits, self.measurement, header.n_qubits, header.measurement
            )));
        }
        if self.metric_specs != header.metric_specs {
            return Err(Error::ArchMismatch("metric specs differ between model and dataset".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_lines(path, [to_json_line(self)?])
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_lines(path)?.join("\n");
        let ck: Checkpoint =
            serde_json::from_str(&text).map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?;
        ck.model().map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?;
        Ok(ck)
    }
}
