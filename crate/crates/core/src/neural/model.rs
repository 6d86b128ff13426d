use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::{Activation, DenseLayer};
use super::lstm::LstmCell;
use super::tensor::Tensor;
use crate::datagen::{DatasetHeader, DatasetKind};
use crate::error::{mismatch, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchKind {
    StaticFcnn,
    DynamicLstm,
}

/// Fully resolved network shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    StaticFcnn {
        input_dim: usize,
        hidden: Vec<usize>,
        activation: Activation,
        output_dim: usize,
    },
    /// LSTM over `steps` rows of `input_dim` values; the decoder reads the
    /// final hidden state.
    DynamicLstm {
        input_dim: usize,
        steps: usize,
        lstm_hidden: usize,
        decoder_hidden: Vec<usize>,
        activation: Activation,
        output_dim: usize,
    },
}

impl Architecture {
    pub fn kind(&self) -> ArchKind {
        match self {
            Architecture::StaticFcnn { .. } => ArchKind::StaticFcnn,
            Architecture::DynamicLstm { .. } => ArchKind::DynamicLstm,
        }
    }

    /// Flattened length of one input sample.
    pub fn input_len(&self) -> usize {
        match self {
            Architecture::StaticFcnn { input_dim, .. } => *input_dim,
            Architecture::DynamicLstm { input_dim, steps, .. } => input_dim * steps,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Architecture::StaticFcnn { output_dim, .. } | Architecture::DynamicLstm { output_dim, .. } => {
                *output_dim
            }
        }
    }

    /// `(in, out, activation)` for each dense layer, output layer last.
    fn dense_dims(&self) -> Vec<(usize, usize, Activation)> {
        let (first, hidden, act, out) = match self {
            Architecture::StaticFcnn { input_dim, hidden, activation, output_dim } => {
                (*input_dim, hidden, *activation, *output_dim)
            }
            Architecture::DynamicLstm { lstm_hidden, decoder_hidden, activation, output_dim, .. } => {
                (*lstm_hidden, decoder_hidden, *activation, *output_dim)
            }
        };
        let mut dims = Vec::with_capacity(hidden.len() + 1);
        let mut prev = first;
        for &h in hidden {
            dims.push((prev, h, act));
            prev = h;
        }
        dims.push((prev, out, Activation::Linear));
        dims
    }

    pub fn validate(&self) -> Result<()> {
        let dims_ok = match self {
            Architecture::StaticFcnn { input_dim, hidden, output_dim, .. } => {
                *input_dim > 0 && *output_dim > 0 && hidden.iter().all(|&h| h > 0)
            }
            Architecture::DynamicLstm { input_dim, steps, lstm_hidden, decoder_hidden, output_dim, .. } => {
                *input_dim > 0
                    && *steps > 0
                    && *lstm_hidden > 0
                    && *output_dim > 0
                    && decoder_hidden.iter().all(|&h| h > 0)
            }
        };
        if dims_ok {
            Ok(())
        } else {
            Err(Error::Config(format!("architecture has a zero dimension: {self:?}")))
        }
    }
}

/// User-facing architecture choice; missing sizes take the defaults and
/// input/output sizes come from the dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchDescriptor {
    pub kind: ArchKind,
    /// Hidden dense widths (the decoder for `dynamic_lstm`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lstm_hidden: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<Activation>,
}

impl ArchDescriptor {
    pub fn new(kind: ArchKind) -> Self {
        Self { kind, hidden: None, lstm_hidden: None, activation: None }
    }

    /// Resolves sizes against a dataset header.
    pub fn resolve(&self, header: &DatasetHeader) -> Result<Architecture> {
        let activation = self.activation.unwrap_or(Activation::Relu);
        let arch = match (self.kind, header.kind) {
            (ArchKind::StaticFcnn, DatasetKind::Static | DatasetKind::Sweep) => Architecture::StaticFcnn {
                input_dim: header.input_dim,
                hidden: self.hidden.clone().unwrap_or_else(|| vec![512, 512, 256]),
                activation,
                output_dim: header.target_dim,
            },
            (ArchKind::DynamicLstm, DatasetKind::Dynamic) => {
                let grid = header.grid.ok_or_else(|| Error::Config("dynamic dataset without a time grid".into()))?;
                if grid.n_steps == 0 || !header.input_dim.is_multiple_of(grid.n_steps) {
                    return Err(Error::ArchMismatch(format!(
                        "input_dim {} is not a multiple of S = {}",
                        header.input_dim, grid.n_steps
                    )));
                }
                Architecture::DynamicLstm {
                    input_dim: header.input_dim / grid.n_steps,
                    steps: grid.n_steps,
                    lstm_hidden: self.lstm_hidden.unwrap_or(128),
                    decoder_hidden: self.hidden.clone().unwrap_or_else(|| vec![256]),
                    activation,
                    output_dim: header.target_dim,
                }
            }
            (k, d) => {
                return Err(Error::ArchMismatch(format!("{k:?} architecture cannot train on a {d:?} dataset")))
            }
        };
        arch.validate()?;
        Ok(arch)
    }
}

/// Flattened `(input, target)` pairs: `inputs` is `len x input_len`,
/// `targets` is `len x output_dim`.
#[derive(Clone, Copy, Debug)]
pub struct Batch<'a> {
    pub inputs: &'a [f64],
    pub targets: &'a [f64],
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    arch: Architecture,
    lstm: Option<LstmCell>,
    layers: Vec<DenseLayer>,
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-limit..=limit)).collect();
    Tensor { shape: vec![rows, cols], data }
}

impl Model {
    /// Glorot-uniform weights, zero biases, LSTM forget bias 1.
    pub fn init(arch: &Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lstm = match arch {
            Architecture::DynamicLstm { input_dim, lstm_hidden: h, .. } => {
                let w = glorot(&mut rng, 4 * h, *input_dim);
                let u = glorot(&mut rng, 4 * h, *h);
                let mut b = Tensor::zeros(&[4 * h]);
                b.data[*h..2 * h].fill(1.0);
                Some(LstmCell::new(w, u, b)?)
            }
            Architecture::StaticFcnn { .. } => None,
        };
        let layers = arch
            .dense_dims()
            .into_iter()
            .map(|(i, o, act)| DenseLayer::new(glorot(&mut rng, o, i), Tensor::zeros(&[o]), act))
            .collect::<Result<_>>()?;
        Ok(Self { arch: arch.clone(), lstm, layers })
    }

    /// Builds a model from parameter tensors in [`Model::parameter_names`] order.
    pub fn from_parameters(arch: &Architecture, params: Vec<Tensor>) -> Result<Self> {
        let mut model = Self::init(arch, 0)?;
        let expected: Vec<Vec<usize>> = model.parameters().iter().map(|t| t.shape.clone()).collect();
        if params.len() != expected.len() {
            return Err(Error::ArchMismatch(format!(
                "architecture needs {} tensors, got {}",
                expected.len(),
                params.len()
            )));
        }
        for (i, (p, shape)) in params.iter().zip(&expected).enumerate() {
            if &p.shape != shape || p.data.len() != shape.iter().product::<usize>() {
                return Err(Error::ArchMismatch(format!("tensor {i}: shape {:?}, expected {shape:?}", p.shape)));
            }
            if !p.is_finite() {
                return Err(Error::Config(format!("tensor {i} has non-finite entries")));
            }
        }
        for (dst, src) in model.parameters_mut().into_iter().zip(params) {
            *dst = src;
        }
        Ok(model)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn lstm(&self) -> Option<&LstmCell> {
        self.lstm.as_ref()
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn parameter_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.lstm.is_some() {
            names.extend(["lstm.w", "lstm.u", "lstm.b"].map(String::from));
        }
        for i in 0..self.layers.len() {
            names.push(format!("dense{i}.w"));
            names.push(format!("dense{i}.b"));
        }
        names
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        if let Some(c) = &self.lstm {
            out.extend([&c.w, &c.u, &c.b]);
        }
        for l in &self.layers {
            out.extend([&l.weights, &l.bias]);
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        if let Some(c) = &mut self.lstm {
            out.extend([&mut c.w, &mut c.u, &mut c.b]);
        }
        for l in &mut self.layers {
            out.extend([&mut l.weights, &mut l.bias]);
        }
        out
    }

    pub fn n_parameters(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    fn check_inputs(&self, inputs: &[f64], len: usize) -> Result<()> {
        let want = self.arch.input_len();
        if inputs.len() != len * want {
            return Err(mismatch(format!(
                "{len} samples need {} input values ({want} each), got {}",
                len * want,
                inputs.len()
            )));
        }
        Ok(())
    }

    /// Outputs for `len` samples laid out row-major.
    pub fn forward_batch(&self, inputs: &[f64], len: usize) -> Result<Vec<f64>> {
        self.check_inputs(inputs, len)?;
        if len == 0 {
            return Ok(Vec::new());
        }
        let mut cur = match (&self.lstm, &self.arch) {
            (Some(cell), Architecture::DynamicLstm { steps, .. }) => {
                cell.forward_batch(inputs, len, *steps).final_hidden(cell.hidden_dim()).to_vec()
            }
            _ => inputs.to_vec(),
        };
        for layer in &self.layers {
            cur = layer.forward_batch(&cur, len);
        }
        Ok(cur)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward_batch(input, 1)
    }

    pub fn loss(&self, batch: &Batch) -> Result<f64> {
        self.check_targets(batch)?;
        let pred = self.forward_batch(batch.inputs, batch.len)?;
        mse_loss(&pred, batch.targets)
    }

    fn check_targets(&self, batch: &Batch) -> Result<()> {
        if batch.len == 0 {
            return Err(mismatch("empty batch"));
        }
        if batch.targets.len() != batch.len * self.arch.output_dim() {
            return Err(mismatch(format!(
                "{} samples need {} target values, got {}",
                batch.len,
                batch.len * self.arch.output_dim(),
                batch.targets.len()
            )));
        }
        Ok(())
    }

    /// Mean batch MSE and its exact gradient for every parameter tensor,
    /// in [`Model::parameters`] order.
    pub fn backward(&self, batch: &Batch) -> Result<(Vec<Tensor>, f64)> {
        self.check_inputs(batch.inputs, batch.len)?;
        self.check_targets(batch)?;
        let n = batch.len;
        let lstm_cache = match (&self.lstm, &self.arch) {
            (Some(cell), Architecture::DynamicLstm { steps, .. }) => Some(cell.forward_batch(batch.inputs, n, *steps)),
            _ => None,
        };
        let first: Vec<f64> = match (&self.lstm, &lstm_cache) {
            (Some(cell), Some(cache)) => cache.final_hidden(cell.hidden_dim()).to_vec(),
            _ => batch.inputs.to_vec(),
        };
        let mut acts = vec![first];
        for layer in &self.layers {
            let next = layer.forward_batch(acts.last().unwrap(), n);
            acts.push(next);
        }
        let pred = acts.last().unwrap();
        let loss = mse_loss(pred, batch.targets)?;
        let scale = 2.0 / pred.len() as f64;
        let mut grad: Vec<f64> = pred.iter().zip(batch.targets).map(|(p, t)| scale * (p - t)).collect();

        let mut grads: Vec<Tensor> = self.parameters().into_iter().map(Tensor::zeros_like).collect();
        let offset = if self.lstm.is_some() { 3 } else { 0 };
        let (lstm_grads, dense_grads) = grads.split_at_mut(offset);
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let (gw, gb) = dense_grads[2 * li..2 * li + 2].split_at_mut(1);
            let need_input = li > 0 || self.lstm.is_some();
            let dx = layer.backward_batch(&acts[li], &acts[li + 1], grad, n, &mut gw[0].data, &mut gb[0].data, need_input);
            grad = dx.unwrap_or_default();
        }
        if let (Some(cell), Some(cache)) = (&self.lstm, &lstm_cache) {
            let [gw, gu, gb] = lstm_grads else { unreachable!() };
            cell.backward_batch(batch.inputs, cache, &grad, &mut gw.data, &mut gu.data, &mut gb.data);
        }
        Ok((grads, loss))
    }
}

/// Mean of squared differences.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(mismatch(format!("{} predictions vs {} targets", pred.len(), target.len())));
    }
    if pred.is_empty() {
        return Err(mismatch("mse of empty vectors"));
    }
    Ok(pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64)
}
