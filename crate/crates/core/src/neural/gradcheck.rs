use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::Activation;
use super::model::{ArchKind, Architecture, Batch, Model};
use super::tensor::Tensor;
use crate::error::{mismatch, Result};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

const BATCH: usize = 8;
const JITTER: f64 = 0.5;

/// Small architectures used by the gradient check; the dynamic one runs the
/// LSTM over five steps. Hidden units use tanh so the loss is smooth at every
/// probe point.
pub fn gradcheck_architecture(kind: ArchKind) -> Architecture {
    match kind {
        ArchKind::StaticFcnn => Architecture::StaticFcnn {
            input_dim: 5,
            hidden: vec![6, 5],
            activation: Activation::Tanh,
            output_dim: 3,
        },
        ArchKind::DynamicLstm => Architecture::DynamicLstm {
            input_dim: 3,
            steps: 5,
            lstm_hidden: 3,
            decoder_hidden: vec![4],
            activation: Activation::Tanh,
            output_dim: 2,
        },
    }
}

/// Max relative error between `analytic` and central differences of the
/// batch loss, over every parameter entry.
pub fn compare_gradients(model: &Model, batch: &Batch, analytic: &[Tensor]) -> Result<f64> {
    let shapes: Vec<&Vec<usize>> = model.parameters().iter().map(|t| &t.shape).collect();
    if analytic.len() != shapes.len() || analytic.iter().zip(&shapes).any(|(a, s)| &a.shape != *s) {
        return Err(mismatch("analytic gradients do not mirror the parameters"));
    }
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (ti, grad) in analytic.iter().enumerate() {
        for k in 0..grad.len() {
            let orig = probe.parameters()[ti].data[k];
            probe.parameters_mut()[ti].data[k] = orig + FD_STEP;
            let up = probe.loss(batch)?;
            probe.parameters_mut()[ti].data[k] = orig - FD_STEP;
            let down = probe.loss(batch)?;
            probe.parameters_mut()[ti].data[k] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let ga = grad.data[k];
            let err = (ga - numeric).abs() / ga.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Random model and batch (inputs and targets uniform on [-1, 1], every
/// parameter jittered off its initial value) checked against central
/// differences.
pub fn gradient_check(arch: &Architecture, seed: u64) -> Result<f64> {
    let mut model = Model::init(arch, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    for t in model.parameters_mut() {
        for v in &mut t.data {
            *v += rng.random_range(-JITTER..JITTER);
        }
    }
    let inputs: Vec<f64> = (0..BATCH * arch.input_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let targets: Vec<f64> = (0..BATCH * arch.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let batch = Batch { inputs: &inputs, targets: &targets, len: BATCH };
    let (grads, _) = model.backward(&batch)?;
    compare_gradients(&model, &batch, &grads)
}
