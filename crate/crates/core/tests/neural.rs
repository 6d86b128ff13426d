use entlearn::datagen::{
    default_metric_specs, generate_dynamic_dataset, generate_static_dataset, Dataset, DynamicConfig, StaticConfig,
};
use entlearn::neural::{
    predict_dataset, predict_inputs, train, train_with, ArchDescriptor, ArchKind, Checkpoint, Predictions,
    TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn static_data(n: usize, seed: u64) -> Dataset {
    generate_static_dataset(&StaticConfig { n_qubits: 3, n_samples: n, metric_specs: default_metric_specs(3), seed })
        .unwrap()
}

fn small_dynamic(n: usize) -> Dataset {
    let mut cfg = DynamicConfig::with_defaults(3, n, default_metric_specs(3), 4);
    cfg.n_steps = 6;
    cfg.k_out = 10;
    generate_dynamic_dataset(&cfg).unwrap()
}

fn static_arch(hidden: Vec<usize>) -> ArchDescriptor {
    ArchDescriptor { hidden: Some(hidden), ..ArchDescriptor::new(ArchKind::StaticFcnn) }
}

#[test]
fn single_sample_is_memorized() {
    let ds = static_data(1, 8);
    let cfg = TrainConfig { max_epochs: 500, batch_size: 1, patience: 500, ..Default::default() };
    let out = train(&ds, &static_arch(vec![16, 16]), &cfg).unwrap();
    let last = out.log.last().unwrap();
    assert!(last.train_loss < 1e-6, "final training loss {}", last.train_loss);
    let model = out.checkpoint.model().unwrap();
    let pred = model.forward(&ds.samples[0].inputs).unwrap();
    for (p, t) in pred.iter().zip(&ds.samples[0].targets) {
        assert!((p - t).abs() < 1e-3, "{p} vs {t}");
    }
}

#[test]
fn training_is_a_function_of_data_config_and_seed() {
    let ds = static_data(60, 2);
    let cfg = TrainConfig { max_epochs: 4, batch_size: 16, seed: 9, ..Default::default() };
    let arch = static_arch(vec![12, 8]);
    let a = train(&ds, &arch, &cfg).unwrap();
    let b = train(&ds, &arch, &cfg).unwrap();
    let tmp = TempDir::new().unwrap();
    a.checkpoint.save(&tmp.path().join("a.json")).unwrap();
    b.checkpoint.save(&tmp.path().join("b.json")).unwrap();
    assert_eq!(std::fs::read(tmp.path().join("a.json")).unwrap(), std::fs::read(tmp.path().join("b.json")).unwrap());
    assert_eq!(a.log, b.log);

    let c = train(&ds, &arch, &TrainConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.checkpoint.tensors, c.checkpoint.tensors);
}

#[test]
fn returned_checkpoint_is_the_best_validation_epoch() {
    let ds = static_data(80, 3);
    let cfg = TrainConfig { max_epochs: 30, batch_size: 8, patience: 3, learning_rate: 0.02, ..Default::default() };
    let mut seen = Vec::new();
    let out = train_with(&ds, &static_arch(vec![24]), &cfg, |r| seen.push(*r)).unwrap();
    assert_eq!(seen, out.log);
    let meta = out.checkpoint.training.as_ref().unwrap();
    let best = out.log.iter().map(|r| r.val_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(meta.final_val_loss, best);
    assert_eq!(out.log[meta.best_epoch - 1].val_loss, best);
    assert!(meta.epochs_run <= meta.best_epoch + cfg.patience);
    assert_eq!(meta.epochs_run, out.log.len());
}

#[test]
fn checkpoint_round_trip_is_bit_identical() {
    for (ds, arch) in [
        (static_data(20, 5), static_arch(vec![10, 6])),
        (
            small_dynamic(6),
            ArchDescriptor { lstm_hidden: Some(5), hidden: Some(vec![7]), ..ArchDescriptor::new(ArchKind::DynamicLstm) },
        ),
    ] {
        let out = train(&ds, &arch, &TrainConfig { max_epochs: 2, batch_size: 4, ..Default::default() }).unwrap();
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("m.json");
        out.checkpoint.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(loaded, out.checkpoint);
        let (before, after) = (out.checkpoint.model().unwrap(), loaded.model().unwrap());
        let width = before.architecture().input_len();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inputs: Vec<f64> = (0..100 * width).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = predict_inputs(&before, &inputs, 100).unwrap();
        let q = predict_inputs(&after, &inputs, 100).unwrap();
        assert_eq!(p.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), q.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}

#[test]
fn empty_dataset_gives_empty_predictions_with_header() {
    let ds = static_data(10, 1);
    let out = train(&ds, &static_arch(vec![4]), &TrainConfig { max_epochs: 1, ..Default::default() }).unwrap();
    let model = out.checkpoint.model().unwrap();
    let mut empty = static_data(0, 1);
    empty.header.n_samples = 0;
    let preds = predict_dataset(&model, &empty).unwrap();
    assert!(preds.is_empty());
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("p.jsonl");
    preds.write(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    let back = Predictions::read(&path).unwrap();
    assert_eq!(back.header.n_samples, 0);
    assert_eq!(back.header.target_dim, 2);

    assert!(train(&empty, &static_arch(vec![4]), &TrainConfig::default()).is_err());
}

#[test]
fn dynamic_predictions_cover_the_whole_output_grid() {
    let ds = small_dynamic(5);
    let arch = ArchDescriptor { lstm_hidden: Some(4), hidden: Some(vec![6]), ..ArchDescriptor::new(ArchKind::DynamicLstm) };
    let out = train(&ds, &arch, &TrainConfig { max_epochs: 1, ..Default::default() }).unwrap();
    let preds = predict_dataset(&out.checkpoint.model().unwrap(), &ds).unwrap();
    assert_eq!(preds.len(), 5);
    for r in &preds.records {
        assert_eq!(r.predictions.len(), 10 * 2);
    }
}

#[test]
fn architecture_must_match_dataset_kind() {
    let cfg = TrainConfig { max_epochs: 1, ..Default::default() };
    assert!(train(&static_data(4, 0), &ArchDescriptor::new(ArchKind::DynamicLstm), &cfg).is_err());
    assert!(train(&small_dynamic(2), &ArchDescriptor::new(ArchKind::StaticFcnn), &cfg).is_err());

    let out = train(&static_data(4, 0), &static_arch(vec![3]), &cfg).unwrap();
    assert!(out.checkpoint.check_dataset(&small_dynamic(2).header).is_err());
    assert!(predict_dataset(&out.checkpoint.model().unwrap(), &small_dynamic(2)).is_err());
}
