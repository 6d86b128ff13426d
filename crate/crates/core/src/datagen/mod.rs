//! Training and evaluation datasets: random two-local ground states, Ising
//! quench trajectories and ground-state sweeps of the XXZ and XX chains.
//!
//! Every sample draws from its own RNG stream keyed by `(seed, index)`, so the
//! output does not depend on how generation is scheduled across threads.

mod format;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use format::{
    Dataset, DatasetHeader, DatasetKind, InitialRotation, Sample, SampleMeta, SweepModel, SweepRange,
    TimeGrid, DATASET_FORMAT, DATASET_VERSION,
};

use crate::entmetrics::{evaluate_metrics, MetricSpec, SubsystemSpec};
use crate::error::{Error, Result};
use crate::measure::{
    measure_expectations, static_measurement_set, time_traces_with, MeasurementKind, MeasurementSet,
};
use crate::qcore::{ground_state, prepare_initial_state, Hamiltonian, Propagator, StateVector};

/// Independent RNG stream for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Random two-local Hamiltonian: one coefficient uniform on [-1, 1] for every
/// operator of the two-local measurement set, in that order.
pub fn sample_model1_hamiltonian<R: Rng>(n_qubits: usize, rng: &mut R) -> Result<Hamiltonian> {
    let set = static_measurement_set(n_qubits)?;
    let coefficients: Vec<f64> = (0..set.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    model1_from_coefficients(&set, &coefficients)
}

fn model1_from_coefficients(set: &MeasurementSet, coefficients: &[f64]) -> Result<Hamiltonian> {
    if coefficients.len() != set.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} operators",
            coefficients.len(),
            set.len()
        )));
    }
    let terms = coefficients.iter().copied().zip(set.operators().iter().cloned()).collect();
    Hamiltonian::new(set.n_qubits(), terms)
}

/// Default targets for an `n`-qubit register: `S2` of the first half and
/// `P3` between the first quarter and the second quarter.
pub fn default_metric_specs(n_qubits: usize) -> Vec<MetricSpec> {
    let half = (n_qubits / 2).max(1);
    let quarter = (n_qubits / 4).max(1);
    let a = SubsystemSpec::new(1..=quarter).expect("nonempty");
    let b = SubsystemSpec::new(quarter + 1..=(2 * quarter).min(n_qubits).max(quarter + 1)).expect("nonempty");
    vec![
        MetricSpec::renyi(2, SubsystemSpec::new(1..=half).expect("nonempty")),
        MetricSpec::pt_moment(3, a, b),
    ]
}

fn check_specs(specs: &[MetricSpec], n_qubits: usize) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Config("at least one metric spec is required".into()));
    }
    specs.iter().try_for_each(|s| s.validate(n_qubits))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticConfig {
    pub n_qubits: usize,
    pub n_samples: usize,
    pub metric_specs: Vec<MetricSpec>,
    pub seed: u64,
}

pub fn generate_static_dataset(cfg: &StaticConfig) -> Result<Dataset> {
    check_specs(&cfg.metric_specs, cfg.n_qubits)?;
    let set = static_measurement_set(cfg.n_qubits)?;
    let samples = (0..cfg.n_samples)
        .into_par_iter()
        .map(|k| static_sample(cfg, &set, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        header: DatasetHeader {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            kind: DatasetKind::Static,
            n_qubits: cfg.n_qubits,
            input_dim: set.len(),
            target_dim: cfg.metric_specs.len(),
            metric_specs: cfg.metric_specs.clone(),
            measurement: MeasurementKind::TwoLocal,
            grid: None,
            initial_state: None,
            sweep: None,
            seed: cfg.seed,
            n_samples: cfg.n_samples,
        },
        samples,
    })
}

fn static_sample(cfg: &StaticConfig, set: &MeasurementSet, index: usize) -> Result<Sample> {
    let mut rng = sample_rng(cfg.seed, index);
    let coefficients: Vec<f64> = (0..set.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let h = model1_from_coefficients(set, &coefficients)?;
    let gs = ground_state(&h)?;
    Ok(Sample {
        inputs: measure_expectations(&gs.state, set)?,
        targets: evaluate_metrics(&gs.state, &cfg.metric_specs)?,
        meta: SampleMeta::Model1 {
            index,
            coefficients,
            energy: gs.energy,
            gap: gs.gap,
            degenerate: gs.degenerate,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicConfig {
    pub n_qubits: usize,
    pub n_samples: usize,
    pub metric_specs: Vec<MetricSpec>,
    #[serde(rename = "S")]
    pub n_steps: usize,
    #[serde(rename = "T_tra")]
    pub t_tra: f64,
    #[serde(rename = "T_tot")]
    pub t_tot: f64,
    #[serde(rename = "K_out")]
    pub k_out: usize,
    pub theta_y: f64,
    pub theta_z: f64,
    pub seed: u64,
}

impl DynamicConfig {
    /// S = 50 on [0, pi], targets on (0, 2 pi] at 100 points, R_z(pi/8) R_y(pi/8).
    pub fn with_defaults(n_qubits: usize, n_samples: usize, metric_specs: Vec<MetricSpec>, seed: u64) -> Self {
        Self {
            n_qubits,
            n_samples,
            metric_specs,
            n_steps: 50,
            t_tra: PI,
            t_tot: 2.0 * PI,
            k_out: 100,
            theta_y: PI / 8.0,
            theta_z: PI / 8.0,
            seed,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.n_steps, self.t_tra, self.t_tot, self.k_out)
    }
}

/// Quench dataset with `(J, g)` drawn uniformly from [-1, 1]^2.
pub fn generate_dynamic_dataset(cfg: &DynamicConfig) -> Result<Dataset> {
    let points: Vec<(usize, f64, f64)> = (0..cfg.n_samples)
        .map(|k| {
            let mut rng = sample_rng(cfg.seed, k);
            let j = rng.random_range(-1.0..=1.0);
            let g = rng.random_range(-1.0..=1.0);
            (k, j, g)
        })
        .collect();
    dynamic_dataset(cfg, &points)
}

/// Quench dataset at explicit `(J, g)` points; `n_samples` is ignored.
pub fn generate_dynamic_dataset_at(cfg: &DynamicConfig, points: &[(f64, f64)]) -> Result<Dataset> {
    let indexed: Vec<_> = points.iter().enumerate().map(|(k, &(j, g))| (k, j, g)).collect();
    dynamic_dataset(cfg, &indexed)
}

/// `J = -0.5` with `count` values of `g` evenly spanning [-1, 0].
pub fn dqpt_test_points(count: usize) -> Vec<(f64, f64)> {
    let denom = count.saturating_sub(1).max(1) as f64;
    (0..count).map(|k| (-0.5, -1.0 + k as f64 / denom)).collect()
}

fn dynamic_dataset(cfg: &DynamicConfig, points: &[(usize, f64, f64)]) -> Result<Dataset> {
    check_specs(&cfg.metric_specs, cfg.n_qubits)?;
    let grid = cfg.grid()?;
    let psi0 = prepare_initial_state(cfg.n_qubits, cfg.theta_y, cfg.theta_z)?;
    let samples = points
        .par_iter()
        .map(|&(index, coupling, g)| {
            let h = Hamiltonian::ising_quench(cfg.n_qubits, coupling, g)?;
            let (inputs, targets) = quench_sample(&h, &psi0, &grid, &cfg.metric_specs)?;
            Ok(Sample { inputs, targets, meta: SampleMeta::Quench { index, coupling, g } })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        header: DatasetHeader {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            kind: DatasetKind::Dynamic,
            n_qubits: cfg.n_qubits,
            input_dim: grid.n_steps * 3 * cfg.n_qubits,
            target_dim: grid.k_out * cfg.metric_specs.len(),
            metric_specs: cfg.metric_specs.clone(),
            measurement: MeasurementKind::SingleQubit,
            grid: Some(grid),
            initial_state: Some(InitialRotation { theta_y: cfg.theta_y, theta_z: cfg.theta_z }),
            sweep: None,
            seed: cfg.seed,
            n_samples: samples.len(),
        },
        samples,
    })
}

/// Flattened trace grid and row-major `K_out x M` metric trajectory.
pub fn quench_sample(
    h: &Hamiltonian,
    psi0: &StateVector,
    grid: &TimeGrid,
    specs: &[MetricSpec],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let prop = Propagator::new(h)?;
    let traces = time_traces_with(&prop, psi0, grid.n_steps, grid.tau)?;
    let traj = prop.trajectory(psi0)?;
    let mut targets = Vec::with_capacity(grid.k_out * specs.len());
    for t in grid.target_times() {
        targets.extend(evaluate_metrics(&traj.at(t)?, specs)?);
    }
    Ok((traces.values, targets))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_qubits: usize,
    pub range: SweepRange,
    pub metric_specs: Vec<MetricSpec>,
}

impl SweepConfig {
    /// Four-qubit sweep from -1 to 1 in steps of 0.04.
    pub fn standard(model: SweepModel, coupling: f64, metric_specs: Vec<MetricSpec>) -> Self {
        Self {
            n_qubits: 4,
            range: SweepRange { model, coupling, start: -1.0, stop: 1.0, step: 0.04 },
            metric_specs,
        }
    }
}

pub fn sweep_hamiltonian(model: SweepModel, n_qubits: usize, coupling: f64, value: f64) -> Result<Hamiltonian> {
    match model {
        SweepModel::Xxz => Hamiltonian::xxz(n_qubits, coupling, value),
        SweepModel::Xx => Hamiltonian::xx(n_qubits, coupling, value),
    }
}

pub fn generate_ground_state_sweep(cfg: &SweepConfig) -> Result<Dataset> {
    check_specs(&cfg.metric_specs, cfg.n_qubits)?;
    let set = static_measurement_set(cfg.n_qubits)?;
    let values = cfg.range.values()?;
    let samples = values
        .par_iter()
        .map(|&v| {
            let h = sweep_hamiltonian(cfg.range.model, cfg.n_qubits, cfg.range.coupling, v)?;
            let gs = ground_state(&h)?;
            let (coupling, energy, gap, degenerate) = (cfg.range.coupling, gs.energy, gs.gap, gs.degenerate);
            let meta = match cfg.range.model {
                SweepModel::Xxz => SampleMeta::Xxz { coupling, sweep_value: v, energy, gap, degenerate },
                SweepModel::Xx => SampleMeta::Xx { coupling, sweep_value: v, energy, gap, degenerate },
            };
            Ok(Sample {
                inputs: measure_expectations(&gs.state, &set)?,
                targets: evaluate_metrics(&gs.state, &cfg.metric_specs)?,
                meta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        header: DatasetHeader {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            kind: DatasetKind::Sweep,
            n_qubits: cfg.n_qubits,
            input_dim: set.len(),
            target_dim: cfg.metric_specs.len(),
            metric_specs: cfg.metric_specs.clone(),
            measurement: MeasurementKind::TwoLocal,
            grid: None,
            initial_state: None,
            sweep: Some(cfg.range),
            seed: 0,
            n_samples: samples.len(),
        },
        samples,
    })
}

/// Inputs and targets rebuilt from a sample's metadata alone.
pub fn regenerate_sample(header: &DatasetHeader, meta: &SampleMeta) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = header.n_qubits;
    let specs = &header.metric_specs;
    match meta {
        SampleMeta::Model1 { coefficients, .. } => {
            let set = static_measurement_set(n)?;
            let gs = ground_state(&model1_from_coefficients(&set, coefficients)?)?;
            Ok((measure_expectations(&gs.state, &set)?, evaluate_metrics(&gs.state, specs)?))
        }
        SampleMeta::Xxz { coupling, sweep_value, .. } | SampleMeta::Xx { coupling, sweep_value, .. } => {
            let model = if matches!(meta, SampleMeta::Xxz { .. }) { SweepModel::Xxz } else { SweepModel::Xx };
            let set = static_measurement_set(n)?;
            let gs = ground_state(&sweep_hamiltonian(model, n, *coupling, *sweep_value)?)?;
            Ok((measure_expectations(&gs.state, &set)?, evaluate_metrics(&gs.state, specs)?))
        }
        SampleMeta::Quench { coupling, g, .. } => {
            let grid = header
                .grid
                .ok_or_else(|| Error::Config("dynamic dataset without time grid".into()))?;
            let rot = header
                .initial_state
                .ok_or_else(|| Error::Config("dynamic dataset without initial state".into()))?;
            let psi0 = prepare_initial_state(n, rot.theta_y, rot.theta_z)?;
            quench_sample(&Hamiltonian::ising_quench(n, *coupling, *g)?, &psi0, &grid, specs)
        }
        SampleMeta::External { .. } => {
            Err(Error::Config("external samples carry no generator parameters".into()))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub n_checked: usize,
    pub max_input_deviation: f64,
    pub max_target_deviation: f64,
}

impl OracleCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_input_deviation <= tol && self.max_target_deviation <= tol
    }
}

/// Regenerates every sample from its metadata and reports the worst deviation.
pub fn verify_dataset(ds: &Dataset) -> Result<OracleCheck> {
    let devs = ds
        .samples
        .par_iter()
        .map(|s| {
            let (inputs, targets) = regenerate_sample(&ds.header, &s.meta)?;
            Ok((max_dev(&inputs, &s.inputs), max_dev(&targets, &s.targets)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(devs.into_iter().fold(
        OracleCheck { n_checked: ds.len(), ..Default::default() },
        |acc, (i, t)| OracleCheck {
            n_checked: acc.n_checked,
            max_input_deviation: acc.max_input_deviation.max(i),
            max_target_deviation: acc.max_target_deviation.max(t),
        },
    ))
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(l: &[usize]) -> SubsystemSpec {
        SubsystemSpec::new(l.iter().copied()).unwrap()
    }

    fn specs4() -> Vec<MetricSpec> {
        vec![MetricSpec::renyi(2, sub(&[1, 2])), MetricSpec::pt_moment(3, sub(&[1]), sub(&[2]))]
    }

    #[test]
    fn model1_term_count_and_determinism() {
        let h = sample_model1_hamiltonian(6, &mut sample_rng(3, 0)).unwrap();
        assert_eq!(h.terms().len(), 63);
        let again = sample_model1_hamiltonian(6, &mut sample_rng(3, 0)).unwrap();
        assert_eq!(h, again);
        let other = sample_model1_hamiltonian(6, &mut sample_rng(3, 1)).unwrap();
        assert_ne!(h, other);
    }

    #[test]
    fn model1_coefficient_statistics() {
        let mut sum = 0.0;
        let mut count = 0usize;
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for k in 0..10_000 {
            let h = sample_model1_hamiltonian(2, &mut sample_rng(99, k)).unwrap();
            for (c, _) in h.terms() {
                sum += c;
                count += 1;
                lo = lo.min(*c);
                hi = hi.max(*c);
            }
        }
        assert!((sum / count as f64).abs() < 0.02);
        assert!(lo >= -1.0 && hi <= 1.0 && lo < -0.99 && hi > 0.99);
    }

    #[test]
    fn default_specs_shape() {
        let s6 = default_metric_specs(6);
        assert_eq!(s6[0].label(), "S2[123]");
        assert_eq!(s6[1].label(), "P3[1|2]");
        let s4 = default_metric_specs(4);
        assert_eq!(s4, specs4());
        for n in 2..=8 {
            for s in default_metric_specs(n) {
                s.validate(n).unwrap();
            }
        }
    }

    #[test]
    fn static_dataset_regenerates() {
        let cfg = StaticConfig { n_qubits: 4, n_samples: 12, metric_specs: specs4(), seed: 5 };
        let ds = generate_static_dataset(&cfg).unwrap();
        assert_eq!(ds.len(), 12);
        assert_eq!(ds.header.input_dim, 39);
        let check = verify_dataset(&ds).unwrap();
        assert!(check.passes(1e-9), "{check:?}");
        for s in &ds.samples {
            assert!(s.inputs.iter().all(|x| (-1.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn empty_static_dataset_is_header_only() {
        let cfg = StaticConfig { n_qubits: 3, n_samples: 0, metric_specs: default_metric_specs(3), seed: 1 };
        let ds = generate_static_dataset(&cfg).unwrap();
        assert_eq!(ds.to_lines().unwrap().len(), 1);
    }

    #[test]
    fn frozen_quench_is_constant() {
        let mut cfg = DynamicConfig::with_defaults(3, 0, default_metric_specs(3), 0);
        cfg.k_out = 10;
        cfg.n_steps = 5;
        let ds = generate_dynamic_dataset_at(&cfg, &[(0.0, 0.0)]).unwrap();
        let t = &ds.samples[0].targets;
        let m = cfg.metric_specs.len();
        for k in 1..cfg.k_out {
            for j in 0..m {
                assert!((t[k * m + j] - t[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dynamic_shapes_and_oracle() {
        let cfg = DynamicConfig::with_defaults(4, 3, specs4(), 11);
        let ds = generate_dynamic_dataset(&cfg).unwrap();
        assert_eq!(ds.header.input_dim, 50 * 12);
        assert_eq!(ds.header.target_dim, 100 * 2);
        assert!(verify_dataset(&ds).unwrap().passes(1e-9));
        for s in &ds.samples {
            for k in 0..100 {
                let s2 = s.targets[2 * k];
                assert!((-1e-12..=2.0 + 1e-12).contains(&s2));
            }
        }
    }

    #[test]
    fn dqpt_grid() {
        let p = dqpt_test_points(20);
        assert_eq!(p.len(), 20);
        assert_eq!(p[0], (-0.5, -1.0));
        assert_eq!(p[19], (-0.5, 0.0));
    }

    #[test]
    fn time_grid_windows() {
        let g = TimeGrid::new(50, PI, 2.0 * PI, 100).unwrap();
        assert!((g.tau - PI / 50.0).abs() < 1e-15);
        let inside = (0..100).filter(|&k| g.in_training_window(k)).count();
        assert_eq!(inside, 50);
        assert!(TimeGrid::new(5, 2.0, 1.0, 3).is_err());
        assert!(TimeGrid::new(5, 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn sweep_grid_is_inclusive() {
        let r = SweepRange { model: SweepModel::Xxz, coupling: -0.5, start: -1.0, stop: 1.0, step: 0.04 };
        let v = r.values().unwrap();
        assert_eq!(v.len(), 51);
        assert_eq!(v[25], 0.0);
        assert_eq!(v[50], 1.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sweep_dataset_regenerates() {
        let mut cfg = SweepConfig::standard(SweepModel::Xx, -0.3, specs4());
        cfg.range.step = 0.25;
        let ds = generate_ground_state_sweep(&cfg).unwrap();
        assert_eq!(ds.len(), 9);
        assert!(verify_dataset(&ds).unwrap().passes(1e-9));
    }

    #[test]
    fn file_round_trip_is_exact() {
        let cfg = StaticConfig { n_qubits: 3, n_samples: 4, metric_specs: default_metric_specs(3), seed: 8 };
        let ds = generate_static_dataset(&cfg).unwrap();
        let dir = std::env::temp_dir().join(format!("entlearn-ds-{}", std::process::id()));
        let path = dir.join("static.jsonl");
        ds.write(&path).unwrap();
        let back = Dataset::read(&path).unwrap();
        assert_eq!(back, ds);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rejects_bad_specs() {
        let cfg = StaticConfig { n_qubits: 2, n_samples: 1, metric_specs: vec![MetricSpec::renyi(2, sub(&[3]))], seed: 0 };
        assert!(generate_static_dataset(&cfg).is_err());
        let cfg = StaticConfig { n_qubits: 2, n_samples: 1, metric_specs: vec![], seed: 0 };
        assert!(generate_static_dataset(&cfg).is_err());
    }
}
