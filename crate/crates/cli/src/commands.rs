use std::path::Path;

use entlearn::datagen::{
    default_metric_specs, dqpt_test_points, generate_dynamic_dataset, generate_dynamic_dataset_at,
    generate_ground_state_sweep, generate_static_dataset, verify_dataset, Dataset, DynamicConfig, SampleMeta,
    StaticConfig, SweepConfig, SweepModel, SweepRange,
};
use entlearn::entmetrics::MetricSpec;
use entlearn::eval::{
    dataset_references, evaluate_predictions, oracle_references, total_z_magnetization, write_figure_data,
};
use entlearn::io::{fmt_f64, write_csv};
use entlearn::neural::{
    gradcheck_architecture, gradient_check, predict_dataset, train_with, write_training_log, ArchDescriptor,
    ArchKind, Checkpoint, Predictions,
};

use crate::config::{
    require, write_resolved, EvaluateSection, GenDynamicSection, GenStaticSection, GenSweepSection,
    GradcheckSection, OracleSection, PredictSection, TrainSection,
};
use crate::{
    CliError, EvaluateArgs, GenDynamicArgs, GenStaticArgs, GenSweepArgs, GradcheckArgs, OracleArgs, PredictArgs,
    TrainArgs,
};

/// Gradient-check acceptance bound.
const GRADCHECK_TOL: f64 = 1e-5;
/// Oracle consistency bound between stored and recomputed samples.
const ORACLE_TOL: f64 = 1e-9;

fn parse_metrics(text: &str) -> Result<Vec<MetricSpec>, CliError> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<MetricSpec>().map_err(CliError::from))
        .collect()
}

fn metrics_or(flag: Option<String>, cfg: Option<Vec<MetricSpec>>) -> Result<Option<Vec<MetricSpec>>, CliError> {
    match flag {
        Some(text) => parse_metrics(&text).map(Some),
        None => Ok(cfg),
    }
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    Ok(Dataset::read(path)?)
}

pub fn gen_static(a: GenStaticArgs, c: GenStaticSection) -> Result<String, CliError> {
    let n_qubits = a.n_qubits.or(c.n_qubits).unwrap_or(4);
    let resolved = GenStaticSection {
        out: Some(require(a.out.or(c.out), "--out", "gen_static.out")?),
        n_qubits: Some(n_qubits),
        n_samples: Some(a.samples.or(c.n_samples).unwrap_or(20_000)),
        seed: Some(a.seed.or(c.seed).unwrap_or(0)),
        metric_specs: Some(metrics_or(a.metrics, c.metric_specs)?.unwrap_or_else(|| default_metric_specs(n_qubits))),
    };
    let out = resolved.out.clone().unwrap();
    let ds = generate_static_dataset(&StaticConfig {
        n_qubits,
        n_samples: resolved.n_samples.unwrap(),
        metric_specs: resolved.metric_specs.clone().unwrap(),
        seed: resolved.seed.unwrap(),
    })?;
    ds.write(&out)?;
    write_resolved(&out, "gen-static", &resolved)?;
    Ok(format!(
        "wrote {} static samples ({} inputs, {} targets) to {}",
        ds.len(),
        ds.header.input_dim,
        ds.header.target_dim,
        out.display()
    ))
}

pub fn gen_dynamic(a: GenDynamicArgs, c: GenDynamicSection) -> Result<String, CliError> {
    let n_qubits = a.n_qubits.or(c.n_qubits).unwrap_or(4);
    let n_samples = a.samples.or(c.n_samples).unwrap_or(20_000);
    let seed = a.seed.or(c.seed).unwrap_or(0);
    let specs = metrics_or(a.metrics, c.metric_specs)?.unwrap_or_else(|| default_metric_specs(n_qubits));
    let mut cfg = DynamicConfig::with_defaults(n_qubits, n_samples, specs, seed);
    cfg.n_steps = a.steps.or(c.n_steps).unwrap_or(cfg.n_steps);
    cfg.t_tra = a.t_tra.or(c.t_tra).unwrap_or(cfg.t_tra);
    cfg.t_tot = a.t_tot.or(c.t_tot).unwrap_or(cfg.t_tot);
    cfg.k_out = a.k_out.or(c.k_out).unwrap_or(cfg.k_out);
    cfg.theta_y = a.theta_y.or(c.theta_y).unwrap_or(cfg.theta_y);
    cfg.theta_z = a.theta_z.or(c.theta_z).unwrap_or(cfg.theta_z);
    let test_grid = a.test_grid.or(c.test_grid);
    let out = require(a.out.or(c.out), "--out", "gen_dynamic.out")?;
    cfg.grid()?;
    let resolved = GenDynamicSection {
        out: Some(out.clone()),
        n_qubits: Some(n_qubits),
        n_samples: Some(n_samples),
        seed: Some(seed),
        metric_specs: Some(cfg.metric_specs.clone()),
        n_steps: Some(cfg.n_steps),
        t_tra: Some(cfg.t_tra),
        t_tot: Some(cfg.t_tot),
        k_out: Some(cfg.k_out),
        theta_y: Some(cfg.theta_y),
        theta_z: Some(cfg.theta_z),
        test_grid,
    };
    let ds = match test_grid {
        Some(count) => generate_dynamic_dataset_at(&cfg, &dqpt_test_points(count))?,
        None => generate_dynamic_dataset(&cfg)?,
    };
    ds.write(&out)?;
    write_resolved(&out, "gen-dynamic", &resolved)?;
    Ok(format!(
        "wrote {} quench trajectories (S = {}, K_out = {}) to {}",
        ds.len(),
        cfg.n_steps,
        cfg.k_out,
        out.display()
    ))
}

pub fn gen_sweep(a: GenSweepArgs, c: GenSweepSection) -> Result<String, CliError> {
    let model: SweepModel = require(a.model.map(Into::into).or(c.model), "--model", "gen_sweep.model")?;
    let n_qubits = a.n_qubits.or(c.n_qubits).unwrap_or(4);
    let default_coupling = match model {
        SweepModel::Xxz => -0.5,
        SweepModel::Xx => -0.3,
    };
    let range = SweepRange {
        model,
        coupling: a.coupling.or(c.coupling).unwrap_or(default_coupling),
        start: a.start.or(c.start).unwrap_or(-1.0),
        stop: a.stop.or(c.stop).unwrap_or(1.0),
        step: a.step.or(c.step).unwrap_or(0.04),
    };
    let specs = metrics_or(a.metrics, c.metric_specs)?.unwrap_or_else(|| default_metric_specs(n_qubits));
    let out = require(a.out.or(c.out), "--out", "gen_sweep.out")?;
    let csv = a.csv.or(c.csv).unwrap_or_else(|| out.with_extension("csv"));
    let resolved = GenSweepSection {
        out: Some(out.clone()),
        csv: Some(csv.clone()),
        n_qubits: Some(n_qubits),
        model: Some(model),
        coupling: Some(range.coupling),
        start: Some(range.start),
        stop: Some(range.stop),
        step: Some(range.step),
        metric_specs: Some(specs.clone()),
    };
    let ds = generate_ground_state_sweep(&SweepConfig { n_qubits, range, metric_specs: specs.clone() })?;
    ds.write(&out)?;

    let labels: Vec<String> = specs.iter().map(|s| s.label()).collect();
    let mut header = vec!["sweep_value", "energy", "gap", "magnetization_z"];
    header.extend(labels.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = ds
        .samples
        .iter()
        .map(|s| {
            let (gap, energy) = match &s.meta {
                SampleMeta::Xxz { gap, energy, .. } | SampleMeta::Xx { gap, energy, .. } => (*gap, *energy),
                _ => (f64::NAN, f64::NAN),
            };
            let mut row = vec![
                fmt_f64(s.meta.sweep_value().unwrap_or(f64::NAN)),
                fmt_f64(energy),
                fmt_f64(gap),
                fmt_f64(total_z_magnetization(&s.inputs, n_qubits)),
            ];
            row.extend(s.targets.iter().map(|&v| fmt_f64(v)));
            row
        })
        .collect();
    write_csv(&csv, &header, &rows)?;
    write_resolved(&out, "gen-sweep", &resolved)?;
    let name = match model {
        SweepModel::Xxz => "XXZ",
        SweepModel::Xx => "XX",
    };
    Ok(format!("wrote {}-point {name} sweep to {} and {}", ds.len(), out.display(), csv.display()))
}

pub fn train(a: TrainArgs, c: TrainSection) -> Result<String, CliError> {
    let data = require(a.data.or(c.data), "--data", "train.data")?;
    let out = require(a.out.or(c.out), "--out", "train.out")?;
    let log = a.log.or(c.log).unwrap_or_else(|| out.with_extension("log.csv"));
    let mut arch = match (a.arch, c.arch) {
        (Some(kind), Some(cfg)) if ArchKind::from(kind) == cfg.kind => cfg,
        (Some(kind), _) => ArchDescriptor::new(kind.into()),
        (None, Some(cfg)) => cfg,
        (None, None) => return Err(CliError::Usage("missing --arch (or `train.arch` in the config file)".into())),
    };
    if a.hidden.is_some() {
        arch.hidden = a.hidden;
    }
    if a.lstm_hidden.is_some() {
        arch.lstm_hidden = a.lstm_hidden;
    }
    if let Some(act) = a.activation {
        arch.activation = Some(act.into());
    }
    let mut tc = c.config.unwrap_or_default();
    tc.learning_rate = a.lr.unwrap_or(tc.learning_rate);
    tc.batch_size = a.batch_size.unwrap_or(tc.batch_size);
    tc.max_epochs = a.epochs.unwrap_or(tc.max_epochs);
    tc.validation_fraction = a.val_fraction.unwrap_or(tc.validation_fraction);
    tc.patience = a.patience.unwrap_or(tc.patience);
    tc.seed = a.seed.unwrap_or(tc.seed);
    tc.validate()?;

    let ds = read_dataset(&data)?;
    let resolved_arch = arch.resolve(&ds.header)?;
    if ds.is_empty() {
        return Err(entlearn::Error::EmptyDataset.into());
    }
    let progress = a.progress;
    let outcome = train_with(&ds, &arch, &tc, |r| {
        if progress {
            eprintln!("epoch {} train {:.6e} val {:.6e}", r.epoch, r.train_loss, r.val_loss);
        }
    })?;
    outcome.checkpoint.save(&out)?;
    write_training_log(&log, &outcome.log)?;
    let resolved = TrainSection {
        data: Some(data),
        out: Some(out.clone()),
        log: Some(log),
        arch: Some(arch),
        config: Some(tc.clone()),
    };
    write_resolved(&out, "train", &resolved)?;
    let meta = outcome.checkpoint.training.as_ref().expect("train records meta");
    Ok(format!(
        "trained {:?} for {} epochs (best epoch {}, val loss {:.4e}) -> {}",
        resolved_arch.kind(),
        meta.epochs_run,
        meta.best_epoch,
        meta.final_val_loss,
        out.display()
    ))
}

pub fn predict(a: PredictArgs, c: PredictSection) -> Result<String, CliError> {
    let model_path = require(a.model.or(c.model), "--model", "predict.model")?;
    let data = require(a.data.or(c.data), "--data", "predict.data")?;
    let out = require(a.out.or(c.out), "--out", "predict.out")?;
    let ck = Checkpoint::load(&model_path)?;
    let ds = read_dataset(&data)?;
    ck.check_dataset(&ds.header)?;
    let preds = predict_dataset(&ck.model()?, &ds)?;
    preds.write(&out)?;
    let resolved = PredictSection { model: Some(model_path), data: Some(data), out: Some(out.clone()) };
    write_resolved(&out, "predict", &resolved)?;
    Ok(format!("wrote {} predictions to {}", preds.len(), out.display()))
}

pub fn evaluate(a: EvaluateArgs, c: EvaluateSection) -> Result<String, CliError> {
    let pred_path = require(a.predictions.or(c.predictions), "--predictions", "evaluate.predictions")?;
    let out_dir = require(a.out_dir.or(c.out_dir), "--out-dir", "evaluate.out_dir")?;
    let oracle = a.oracle || (a.reference.is_none() && c.oracle.unwrap_or(false));
    let reference = if oracle { None } else { a.reference.or(c.reference) };
    if !oracle && reference.is_none() {
        return Err(CliError::Usage("evaluate needs --reference or --oracle".into()));
    }
    let preds = Predictions::read(&pred_path)?;
    let refs = match &reference {
        Some(path) => dataset_references(&preds, &read_dataset(path)?)?,
        None => oracle_references(&preds)?,
    };
    let report = evaluate_predictions(&preds, &refs)?;
    let report_path = out_dir.join("report.json");
    report.write(&report_path)?;
    write_figure_data(&out_dir, &preds, &refs)?;
    let resolved = EvaluateSection {
        predictions: Some(pred_path),
        reference,
        oracle: Some(oracle),
        out_dir: Some(out_dir.clone()),
    };
    write_resolved(&out_dir.join("evaluate"), "evaluate", &resolved)?;
    Ok(report.summary())
}

pub fn oracle(a: OracleArgs, c: OracleSection) -> Result<String, CliError> {
    let data = require(a.data.or(c.data), "--data", "oracle.data")?;
    let tol = a.tolerance.or(c.tolerance).unwrap_or(ORACLE_TOL);
    let ds = read_dataset(&data)?;
    let check = verify_dataset(&ds)?;
    let line = format!(
        "oracle: {} samples, max input deviation {:.3e}, max target deviation {:.3e} (tolerance {tol:e})",
        check.n_checked, check.max_input_deviation, check.max_target_deviation
    );
    if check.passes(tol) {
        Ok(line)
    } else {
        Err(CliError::Usage(format!("{line}: FAILED")))
    }
}

pub fn gradcheck(a: GradcheckArgs, c: GradcheckSection) -> Result<String, CliError> {
    let kind = a.arch.map(Into::into).or(c.arch).unwrap_or(ArchKind::StaticFcnn);
    let seed = a.seed.or(c.seed).unwrap_or(0);
    let err = gradient_check(&gradcheck_architecture(kind), seed)?;
    let line = format!("gradcheck {kind:?} seed {seed}: max relative error {err:.3e}");
    if err < GRADCHECK_TOL {
        Ok(line)
    } else {
        Err(CliError::Usage(format!("{line} exceeds {GRADCHECK_TOL:e}")))
    }
}
