use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::entmetrics::MetricSpec;
use crate::error::{Error, Result};
use crate::io::{read_lines, to_json_line, write_lines};
use crate::measure::MeasurementKind;

pub const DATASET_FORMAT: &str = "entlearn-dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Static,
    Dynamic,
    Sweep,
}

/// Sampling of the input traces and of the target trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    /// Input steps; row `s` is sampled at `s * tau`, `s = 1..=S`.
    #[serde(rename = "S")]
    pub n_steps: usize,
    pub tau: f64,
    /// Target times `k * T_tot / K_out`, `k = 1..=K_out`.
    #[serde(rename = "K_out")]
    pub k_out: usize,
    #[serde(rename = "T_tra")]
    pub t_tra: f64,
    #[serde(rename = "T_tot")]
    pub t_tot: f64,
}

impl TimeGrid {
    pub fn new(n_steps: usize, t_tra: f64, t_tot: f64, k_out: usize) -> Result<Self> {
        if n_steps == 0 || k_out == 0 {
            return Err(Error::Config("S and K_out must be positive".into()));
        }
        if !(t_tra > 0.0) || !(t_tot >= t_tra) || !t_tot.is_finite() {
            return Err(Error::Config(format!("need 0 < T_tra <= T_tot, got {t_tra}, {t_tot}")));
        }
        Ok(Self { n_steps, tau: t_tra / n_steps as f64, k_out, t_tra, t_tot })
    }

    pub fn input_times(&self) -> Vec<f64> {
        (1..=self.n_steps).map(|s| s as f64 * self.tau).collect()
    }

    pub fn target_times(&self) -> Vec<f64> {
        (1..=self.k_out).map(|k| k as f64 * self.t_tot / self.k_out as f64).collect()
    }

    /// Whether target slot `k` (0-based) lies inside the measured window.
    pub fn in_training_window(&self, k: usize) -> bool {
        ((k + 1) as f64) * self.t_tot <= self.t_tra * self.k_out as f64 * (1.0 + 1e-12)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialRotation {
    pub theta_y: f64,
    pub theta_z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepModel {
    Xxz,
    Xx,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub model: SweepModel,
    #[serde(rename = "J")]
    pub coupling: f64,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    /// Inclusive grid `start + k step`, snapped to 12 decimals.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.stop >= self.start) || !self.stop.is_finite() {
            return Err(Error::Config(format!(
                "invalid sweep {}..{} step {}",
                self.start, self.stop, self.step
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|k| ((self.start + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
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
    pub seed: u64,
    pub n_samples: usize,
}

/// Generator parameters sufficient to rebuild a sample from scratch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SampleMeta {
    /// Random two-local Hamiltonian; coefficients follow the two-local
    /// measurement-set order.
    Model1 {
        index: usize,
        coefficients: Vec<f64>,
        energy: f64,
        gap: f64,
        degenerate: bool,
    },
    /// Ising quench `J sum ZZ + g sum X`.
    Quench {
        index: usize,
        #[serde(rename = "J")]
        coupling: f64,
        g: f64,
    },
    Xxz {
        #[serde(rename = "J")]
        coupling: f64,
        sweep_value: f64,
        energy: f64,
        gap: f64,
        degenerate: bool,
    },
    Xx {
        #[serde(rename = "J")]
        coupling: f64,
        sweep_value: f64,
        energy: f64,
        gap: f64,
        degenerate: bool,
    },
    /// Externally supplied measurements with no generator.
    External {
        #[serde(default)]
        label: String,
    },
}

impl SampleMeta {
    pub fn sweep_value(&self) -> Option<f64> {
        match self {
            SampleMeta::Xxz { sweep_value, .. } | SampleMeta::Xx { sweep_value, .. } => Some(*sweep_value),
            _ => None,
        }
    }

    pub fn energy(&self) -> Option<f64> {
        match self {
            SampleMeta::Model1 { energy, .. }
            | SampleMeta::Xxz { energy, .. }
            | SampleMeta::Xx { energy, .. } => Some(*energy),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub meta: SampleMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.header;
        if h.format != DATASET_FORMAT {
            return Err(Error::Config(format!("unknown dataset format '{}'", h.format)));
        }
        if h.version != DATASET_VERSION {
            return Err(Error::Config(format!("unsupported dataset version {}", h.version)));
        }
        if h.target_dim != expected_target_dim(h) {
            return Err(Error::DimensionMismatch(format!(
                "target_dim {} inconsistent with {} metric specs",
                h.target_dim,
                h.metric_specs.len()
            )));
        }
        if h.n_samples != self.samples.len() {
            return Err(Error::DimensionMismatch(format!(
                "header announces {} samples, found {}",
                h.n_samples,
                self.samples.len()
            )));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.inputs.len() != h.input_dim || s.targets.len() != h.target_dim {
                return Err(Error::DimensionMismatch(format!(
                    "sample {i}: {} inputs / {} targets, header says {} / {}",
                    s.inputs.len(),
                    s.targets.len(),
                    h.input_dim,
                    h.target_dim
                )));
            }
        }
        Ok(())
    }

    pub fn to_lines(&self) -> Result<Vec<String>> {
        let mut lines = Vec::with_capacity(self.samples.len() + 1);
        lines.push(to_json_line(&self.header)?);
        for s in &self.samples {
            lines.push(to_json_line(s)?);
        }
        Ok(lines)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.validate()?;
        write_lines(path, self.to_lines()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let lines = read_lines(path)?;
        let bad = |line: usize, msg: String| Error::Format {
            path: path.to_path_buf(),
            msg: format!("line {line}: {msg}"),
        };
        let mut it = lines.iter().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = it.next().ok_or_else(|| bad(1, "missing header".into()))?;
        let header: DatasetHeader = serde_json::from_str(first).map_err(|e| bad(1, e.to_string()))?;
        let samples = it
            .map(|(i, l)| serde_json::from_str::<Sample>(l).map_err(|e| bad(i + 1, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let ds = Dataset { header, samples };
        ds.validate().map_err(|e| bad(0, e.to_string()))?;
        Ok(ds)
    }
}

pub(crate) fn expected_target_dim(h: &DatasetHeader) -> usize {
    match (h.kind, h.grid) {
        (DatasetKind::Dynamic, Some(g)) => g.k_out * h.metric_specs.len(),
        _ => h.metric_specs.len(),
    }
}
