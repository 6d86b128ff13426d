//! Prediction scoring and figure-data emission.
//!
//! Predictions are scored per metric slot against reference targets taken
//! either from a dataset file or recomputed from each sample's meta. Dynamic
//! trajectories are additionally split at `T_tra` into the measured window
//! and the unseen window.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{regenerate_sample, Dataset, DatasetKind};
use crate::error::{mismatch, Error, Result};
use crate::io::{fmt_f64, to_json_line, write_csv, write_lines};
use crate::neural::Predictions;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotStats {
    pub n: usize,
    pub rmse: f64,
    /// Undefined for fewer than two points or zero variance.
    pub pearson: Option<f64>,
    pub max_abs_error: f64,
}

pub fn rmse(truth: &[f64], pred: &[f64]) -> f64 {
    let sq: f64 = truth.iter().zip(pred).map(|(t, p)| (p - t) * (p - t)).sum();
    (sq / truth.len() as f64).sqrt()
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn slot_stats(truth: &[f64], pred: &[f64]) -> Result<SlotStats> {
    if truth.len() != pred.len() {
        return Err(mismatch(format!("{} references vs {} predictions", truth.len(), pred.len())));
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(SlotStats {
        n: truth.len(),
        rmse: rmse(truth, pred),
        pearson: pearson(truth, pred),
        max_abs_error: truth.iter().zip(pred).map(|(t, p)| (p - t).abs()).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub overall: SlotStats,
    /// Dynamic datasets only: targets with `t <= T_tra`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_window: Option<SlotStats>,
    /// Dynamic datasets only: targets with `t > T_tra`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unseen_window: Option<SlotStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub kind: DatasetKind,
    pub n_samples: usize,
    pub metrics: Vec<MetricReport>,
}

impl EvaluationReport {
    pub fn metric(&self, label: &str) -> Option<&MetricReport> {
        self.metrics.iter().find(|m| m.metric == label)
    }

    /// `label: rmse=.. r=..` for every metric, on one line.
    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .metrics
            .iter()
            .map(|m| {
                let r = m.overall.pearson.map_or("undefined".to_string(), |r| format!("{r:.4}"));
                let mut s = format!("{}: rmse={:.4e} r={r} max_abs={:.4e}", m.metric, m.overall.rmse, m.overall.max_abs_error);
                if let (Some(a), Some(b)) = (&m.training_window, &m.unseen_window) {
                    s.push_str(&format!(" (window rmse {:.4e}, unseen rmse {:.4e})", a.rmse, b.rmse));
                }
                s
            })
            .collect();
        format!("{} samples; {}", self.n_samples, parts.join("; "))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_lines(path, [to_json_line(self)?])
    }
}

/// Position of every target slot: which metric, and for trajectories which
/// time index.
fn slot_layout(pred: &Predictions) -> Vec<(usize, Option<usize>)> {
    let m = pred.header.metric_specs.len();
    match (pred.header.kind, pred.header.grid) {
        (DatasetKind::Dynamic, Some(g)) => (0..g.k_out * m).map(|s| (s % m, Some(s / m))).collect(),
        _ => (0..m).map(|s| (s, None)).collect(),
    }
}

fn check_references(pred: &Predictions, references: &[Vec<f64>]) -> Result<()> {
    if references.len() != pred.len() {
        return Err(mismatch(format!("{} predictions vs {} references", pred.len(), references.len())));
    }
    let dim = pred.header.target_dim;
    if slot_layout(pred).len() != dim {
        return Err(mismatch("target_dim does not match the metric layout"));
    }
    if let Some(i) = references.iter().position(|r| r.len() != dim) {
        return Err(mismatch(format!("reference {i} does not have {dim} values")));
    }
    Ok(())
}

pub fn evaluate_predictions(pred: &Predictions, references: &[Vec<f64>]) -> Result<EvaluationReport> {
    check_references(pred, references)?;
    if pred.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let layout = slot_layout(pred);
    let grid = pred.header.grid.filter(|_| pred.header.kind == DatasetKind::Dynamic);
    let mut metrics = Vec::new();
    for (mi, spec) in pred.header.metric_specs.iter().enumerate() {
        let mut all = (Vec::new(), Vec::new());
        let mut inside = (Vec::new(), Vec::new());
        let mut outside = (Vec::new(), Vec::new());
        for (rec, truth) in pred.records.iter().zip(references) {
            for (slot, &(m, k)) in layout.iter().enumerate() {
                if m != mi {
                    continue;
                }
                let pair = (truth[slot], rec.predictions[slot]);
                all.0.push(pair.0);
                all.1.push(pair.1);
                if let (Some(g), Some(k)) = (grid, k) {
                    let bucket = if g.in_training_window(k) { &mut inside } else { &mut outside };
                    bucket.0.push(pair.0);
                    bucket.1.push(pair.1);
                }
            }
        }
        let window = |v: &(Vec<f64>, Vec<f64>)| (!v.0.is_empty()).then(|| slot_stats(&v.0, &v.1)).transpose();
        metrics.push(MetricReport {
            metric: spec.label(),
            overall: slot_stats(&all.0, &all.1)?,
            training_window: window(&inside)?,
            unseen_window: window(&outside)?,
        });
    }
    Ok(EvaluationReport { kind: pred.header.kind, n_samples: pred.len(), metrics })
}

/// Reference targets from the dataset the predictions were made on.
pub fn dataset_references(pred: &Predictions, ds: &Dataset) -> Result<Vec<Vec<f64>>> {
    if ds.len() != pred.len() || ds.header.target_dim != pred.header.target_dim {
        return Err(mismatch(format!(
            "{} predictions of width {} vs {} references of width {}",
            pred.len(),
            pred.header.target_dim,
            ds.len(),
            ds.header.target_dim
        )));
    }
    if ds.header.metric_specs != pred.header.metric_specs {
        return Err(mismatch("metric specs differ between predictions and references"));
    }
    if let Some(i) = ds.samples.iter().zip(&pred.records).position(|(s, r)| s.meta != r.meta) {
        return Err(mismatch(format!("sample {i} meta differs between predictions and references")));
    }
    Ok(ds.samples.iter().map(|s| s.targets.clone()).collect())
}

/// Reference targets recomputed from each prediction's sample meta.
pub fn oracle_references(pred: &Predictions) -> Result<Vec<Vec<f64>>> {
    let header = pred.header.source_header();
    pred.records
        .par_iter()
        .map(|r| regenerate_sample(&header, &r.meta).map(|(_, t)| t))
        .collect()
}

/// File-name form of a metric label, e.g. `P3[1|2]` -> `P3_1-2`.
pub fn label_slug(label: &str) -> String {
    label.replace('[', "_").replace(']', "").replace('|', "-")
}

/// Writes the scatter, residual and (where applicable) sweep and dynamics
/// CSVs into `dir`; returns the paths written.
pub fn write_figure_data(dir: &Path, pred: &Predictions, references: &[Vec<f64>]) -> Result<Vec<PathBuf>> {
    check_references(pred, references)?;
    let layout = slot_layout(pred);
    let labels: Vec<String> = pred.header.metric_specs.iter().map(|s| s.label()).collect();
    let mut written = Vec::new();

    let mut residuals = Vec::new();
    for (i, (rec, truth)) in pred.records.iter().zip(references).enumerate() {
        for (slot, &(m, _)) in layout.iter().enumerate() {
            let (t, p) = (truth[slot], rec.predictions[slot]);
            residuals.push(vec![
                i.to_string(),
                slot.to_string(),
                labels[m].clone(),
                fmt_f64(t),
                fmt_f64(p),
                fmt_f64(p - t),
            ]);
        }
    }
    let path = dir.join("residuals.csv");
    write_csv(&path, &["sample", "slot", "metric", "true", "predicted", "residual"], &residuals)?;
    written.push(path);

    let times = pred.header.grid.map(|g| (g, g.target_times()));
    for (mi, label) in labels.iter().enumerate() {
        let slug = label_slug(label);
        let mut scatter = Vec::new();
        let mut sweep = Vec::new();
        let mut dynamics = Vec::new();
        for (i, (rec, truth)) in pred.records.iter().zip(references).enumerate() {
            for (slot, &(m, k)) in layout.iter().enumerate() {
                if m != mi {
                    continue;
                }
                let (t, p) = (fmt_f64(truth[slot]), fmt_f64(rec.predictions[slot]));
                scatter.push(vec![t.clone(), p.clone()]);
                if let Some(v) = rec.meta.sweep_value() {
                    sweep.push(vec![fmt_f64(v), t.clone(), p.clone()]);
                }
                if let (Some((g, ts)), Some(k)) = (&times, k) {
                    let window = if g.in_training_window(k) { "train" } else { "unseen" };
                    dynamics.push(vec![i.to_string(), fmt_f64(ts[k]), t, p, window.to_string()]);
                }
            }
        }
        let path = dir.join(format!("scatter_{slug}.csv"));
        write_csv(&path, &["true", "predicted"], &scatter)?;
        written.push(path);
        if !sweep.is_empty() {
            let path = dir.join(format!("sweep_{slug}.csv"));
            write_csv(&path, &["sweep_value", "true", "predicted"], &sweep)?;
            written.push(path);
        }
        if !dynamics.is_empty() {
            let path = dir.join(format!("dynamics_{slug}.csv"));
            write_csv(&path, &["sample", "t", "true", "predicted", "window"], &dynamics)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Index `i` of the largest `|y[i+1] - y[i]|`.
pub fn largest_jump(y: &[f64]) -> Option<usize> {
    y.windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd >= d => best,
            _ => Some((i, d)),
        })
        .map(|(i, _)| i)
}

/// Sum of single-qubit `Z` expectations from a two-local measurement vector.
pub fn total_z_magnetization(inputs: &[f64], n_qubits: usize) -> f64 {
    (0..n_qubits).map(|q| inputs[3 * q + 2]).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCrossing {
    pub left: f64,
    pub right: f64,
    /// Field where the two straight energy lines `E = e + h m` meet.
    pub field: f64,
}

/// Ground-level crossings along a sweep of `H0 + h M`, located from changes
/// of `<M>` between adjacent points `(h, E_0, <M>)`.
pub fn magnetization_crossings(points: &[(f64, f64, f64)]) -> Vec<LevelCrossing> {
    points
        .windows(2)
        .filter(|w| (w[1].2 - w[0].2).abs() > 0.5)
        .map(|w| {
            let ((h1, e1, m1), (h2, e2, m2)) = (w[0], w[1]);
            let (c1, c2) = (e1 - h1 * m1, e2 - h2 * m2);
            LevelCrossing { left: h1, right: h2, field: (c2 - c1) / (m1 - m2) }
        })
        .collect()
}

/// `(sweep value, ground energy, total Z magnetization)` for each sweep sample.
pub fn sweep_magnetization(ds: &Dataset) -> Result<Vec<(f64, f64, f64)>> {
    if ds.header.kind != DatasetKind::Sweep {
        return Err(Error::Config("magnetization profile needs a sweep dataset".into()));
    }
    ds.samples
        .iter()
        .map(|s| match (s.meta.sweep_value(), s.meta.energy()) {
            (Some(v), Some(e)) => Ok((v, e, total_z_magnetization(&s.inputs, ds.header.n_qubits))),
            _ => Err(Error::Config("sweep sample without sweep value or energy".into())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistics_examples() {
        let t = [0.1, 0.5, 0.9, 1.3];
        let same = slot_stats(&t, &t).unwrap();
        assert_eq!(same.rmse, 0.0);
        assert!((same.pearson.unwrap() - 1.0).abs() < 1e-15);
        let shifted: Vec<f64> = t.iter().map(|x| x + 0.1).collect();
        let s = slot_stats(&t, &shifted).unwrap();
        assert!((s.rmse - 0.1).abs() < 1e-12);
        assert!((s.max_abs_error - 0.1).abs() < 1e-12);
        assert!((s.pearson.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[0.0, 1.0], &[1.0, 0.0]), Some(-1.0));
        assert_eq!(pearson(&[1.0], &[1.0]), None);
        assert_eq!(pearson(&[1.0, 1.0], &[0.0, 2.0]), None);
        assert!(slot_stats(&[1.0], &[]).is_err());
    }

    #[test]
    fn jumps_and_crossings() {
        assert_eq!(largest_jump(&[0.0, 0.1, 0.9, 1.0]), Some(1));
        assert_eq!(largest_jump(&[1.0]), None);
        // Two levels: E = -1 + h (m = 1) and E = -h (m = -1) cross at h = 0.5.
        let pts: Vec<(f64, f64, f64)> = [0.0, 0.4, 0.8, 1.2]
            .iter()
            .map(|&h| if -1.0 + h <= -h { (h, -1.0 + h, 1.0) } else { (h, -h, -1.0) })
            .collect();
        let c = magnetization_crossings(&pts);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].left, c[0].right), (0.4, 0.8));
        assert!((c[0].field - 0.5).abs() < 1e-12);
    }

    #[test]
    fn slugs() {
        assert_eq!(label_slug("P3[1|2]"), "P3_1-2");
        assert_eq!(label_slug("S2[12]"), "S2_12");
    }
}
