use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Model;
use crate::datagen::{
    Dataset, DatasetHeader, DatasetKind, InitialRotation, SampleMeta, SweepRange, TimeGrid, DATASET_FORMAT,
    DATASET_VERSION,
};
use crate::entmetrics::MetricSpec;
use crate::error::{mismatch, Error, Result};
use crate::io::{read_lines, to_json_line, write_lines};
use crate::measure::MeasurementKind;

pub const PREDICTIONS_FORMAT: &str = "entlearn-predictions";
pub const PREDICTIONS_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionsHeader {
    pub format: String,
    pub version: u32,
    pub kind: DatasetKind,
    pub n_qubits: usize,
    pub input_dim: usize,
    pub target_dim: usize,
    pub metric_specs: Vec<MetricSpec>,
    pub measurement: MeasurementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<TimeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialRotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRange>,
    pub n_samples: usize,
}

impl PredictionsHeader {
    /// Header of the dataset the predictions were made on, enough to
    /// regenerate reference samples from their meta.
    pub fn source_header(&self) -> DatasetHeader {
        DatasetHeader {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            kind: self.kind,
            n_qubits: self.n_qubits,
            input_dim: self.input_dim,
            target_dim: self.target_dim,
            metric_specs: self.metric_specs.clone(),
            measurement: self.measurement,
            grid: self.grid,
            initial_state: self.initial_state,
            sweep: self.sweep,
            seed: 0,
            n_samples: self.n_samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub predictions: Vec<f64>,
    pub meta: SampleMeta,
}

/// Model outputs for a dataset, each paired with its sample meta.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub header: PredictionsHeader,
    pub records: Vec<PredictionRecord>,
}

const PREDICT_CHUNK: usize = 512;

/// Outputs for `len` flattened inputs, evaluated in fixed-size chunks.
pub fn predict_inputs(model: &Model, inputs: &[f64], len: usize) -> Result<Vec<f64>> {
    let width = model.architecture().input_len();
    if inputs.len() != len * width {
        return Err(mismatch(format!("{len} samples of width {width} need {} values", len * width)));
    }
    let mut out = Vec::with_capacity(len * model.architecture().output_dim());
    for chunk in inputs.chunks(PREDICT_CHUNK * width) {
        out.extend(model.forward_batch(chunk, chunk.len() / width)?);
    }
    Ok(out)
}

pub fn predict_dataset(model: &Model, ds: &Dataset) -> Result<Predictions> {
    let arch = model.architecture();
    let h = &ds.header;
    if arch.input_len() != h.input_dim || arch.output_dim() != h.target_dim {
        return Err(Error::ArchMismatch(format!(
            "model maps {} -> {} values, dataset has {} -> {}",
            arch.input_len(),
            arch.output_dim(),
            h.input_dim,
            h.target_dim
        )));
    }
    let inputs: Vec<f64> = ds.samples.iter().flat_map(|s| s.inputs.iter().copied()).collect();
    let out = predict_inputs(model, &inputs, ds.len())?;
    let records = ds
        .samples
        .iter()
        .zip(out.chunks(h.target_dim.max(1)))
        .map(|(s, p)| PredictionRecord { predictions: p.to_vec(), meta: s.meta.clone() })
        .collect();
    Ok(Predictions {
        header: PredictionsHeader {
            format: PREDICTIONS_FORMAT.into(),
            version: PREDICTIONS_VERSION,
            kind: h.kind,
            n_qubits: h.n_qubits,
            input_dim: h.input_dim,
            target_dim: h.target_dim,
            metric_specs: h.metric_specs.clone(),
            measurement: h.measurement,
            grid: h.grid,
            initial_state: h.initial_state,
            sweep: h.sweep,
            n_samples: ds.len(),
        },
        records,
    })
}

impl Predictions {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let h = &self.header;
        if h.format != PREDICTIONS_FORMAT || h.version != PREDICTIONS_VERSION {
            return Err(Error::Config(format!("unsupported predictions format '{}' v{}", h.format, h.version)));
        }
        if h.n_samples != self.records.len() {
            return Err(mismatch(format!("header announces {} rows, found {}", h.n_samples, self.records.len())));
        }
        if let Some(i) = self.records.iter().position(|r| r.predictions.len() != h.target_dim) {
            return Err(mismatch(format!("row {i} does not have {} predictions", h.target_dim)));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut lines = vec![to_json_line(&self.header)?];
        for r in &self.records {
            lines.push(to_json_line(r)?);
        }
        write_lines(path, lines)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bad = |msg: String| Error::Format { path: path.to_path_buf(), msg };
        let lines = read_lines(path)?;
        let mut it = lines.iter().filter(|l| !l.trim().is_empty());
        let header: PredictionsHeader =
            serde_json::from_str(it.next().ok_or_else(|| bad("missing header".into()))?)
                .map_err(|e| bad(e.to_string()))?;
        let records = it
            .map(|l| serde_json::from_str(l).map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<PredictionRecord>>>()?;
        let p = Predictions { header, records };
        p.validate().map_err(|e| bad(e.to_string()))?;
        Ok(p)
    }
}
