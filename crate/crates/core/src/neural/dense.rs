use serde::{Deserialize, Serialize};

use super::tensor::{matmul_nn, matmul_nt, matmul_tn_acc, Tensor};
use crate::error::{mismatch, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activated value `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Linear => 1.0,
        }
    }
}

/// Affine map `act(W x + b)` with `W` stored `out x in`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    pub weights: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        if weights.shape.len() != 2 || bias.shape.len() != 1 || bias.shape[0] != weights.shape[0] {
            return Err(mismatch(format!(
                "dense layer weights {:?} with bias {:?}",
                weights.shape, bias.shape
            )));
        }
        if !weights.is_finite() || !bias.is_finite() {
            return Err(Error::Config("dense layer has non-finite parameters".into()));
        }
        Ok(Self { weights, bias, activation })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.shape[1]
    }

    pub fn out_dim(&self) -> usize {
        self.weights.shape[0]
    }

    /// Activated outputs for a row-major `batch x in_dim` input.
    pub(crate) fn forward_batch(&self, x: &[f64], batch: usize) -> Vec<f64> {
        let (n_in, n_out) = (self.in_dim(), self.out_dim());
        let mut out = vec![0.0; batch * n_out];
        for row in out.chunks_exact_mut(n_out) {
            row.copy_from_slice(&self.bias.data);
        }
        matmul_nt(x, &self.weights.data, batch, n_in, n_out, 1.0, &mut out);
        if self.activation != Activation::Linear {
            for v in &mut out {
                *v = self.activation.apply(*v);
            }
        }
        out
    }

    /// Backpropagates `grad` (w.r.t. the activated output `a`) through the
    /// layer, accumulating into `gw`/`gb`. Returns the input gradient when
    /// `want_input_grad` is set.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn backward_batch(
        &self,
        x: &[f64],
        a: &[f64],
        mut grad: Vec<f64>,
        batch: usize,
        gw: &mut [f64],
        gb: &mut [f64],
        want_input_grad: bool,
    ) -> Option<Vec<f64>> {
        let (n_in, n_out) = (self.in_dim(), self.out_dim());
        if self.activation != Activation::Linear {
            for (g, &av) in grad.iter_mut().zip(a) {
                *g *= self.activation.derivative_from_output(av);
            }
        }
        for row in grad.chunks_exact(n_out) {
            for (acc, g) in gb.iter_mut().zip(row) {
                *acc += g;
            }
        }
        matmul_tn_acc(&grad, x, batch, n_out, n_in, gw);
        want_input_grad.then(|| {
            let mut dx = vec![0.0; batch * n_in];
            matmul_nn(&grad, &self.weights.data, batch, n_out, n_in, 0.0, &mut dx);
            dx
        })
    }
}

/// Applies `layers` in order to a single input vector.
pub fn mlp_forward(layers: &[DenseLayer], x: &[f64]) -> Result<Vec<f64>> {
    let mut cur = x.to_vec();
    for (i, layer) in layers.iter().enumerate() {
        if cur.len() != layer.in_dim() {
            return Err(mismatch(format!(
                "layer {i} expects {} inputs, got {}",
                layer.in_dim(),
                cur.len()
            )));
        }
        cur = layer.forward_batch(&cur, 1);
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn layer(rows: usize, cols: usize, w: Vec<f64>, b: Vec<f64>, act: Activation) -> DenseLayer {
        DenseLayer::new(Tensor::new(vec![rows, cols], w).unwrap(), Tensor::new(vec![rows], b).unwrap(), act)
            .unwrap()
    }

    fn identity(n: usize, act: Activation) -> DenseLayer {
        let w = (0..n * n).map(|i| if i % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
        layer(n, n, w, vec![0.0; n], act)
    }

    #[test]
    fn identity_and_relu() {
        let x = [0.3, -1.5, 2.0];
        assert_eq!(mlp_forward(&[identity(3, Activation::Linear)], &x).unwrap(), x);
        assert_eq!(mlp_forward(&[identity(2, Activation::Relu)], &[-1.0, 2.0]).unwrap(), [0.0, 2.0]);
        let stack = [identity(3, Activation::Linear), identity(3, Activation::Linear)];
        assert_eq!(mlp_forward(&stack, &x).unwrap(), x);
    }

    #[test]
    fn random_layers_match_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rand_vec = |n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (w1, b1, w2, b2, x) = (rand_vec(7 * 5), rand_vec(7), rand_vec(3 * 7), rand_vec(3), rand_vec(5));
        let net = [
            layer(7, 5, w1.clone(), b1.clone(), Activation::Tanh),
            layer(3, 7, w2.clone(), b2.clone(), Activation::Linear),
        ];
        let got = mlp_forward(&net, &x).unwrap();
        let hidden: Vec<f64> =
            (0..7).map(|i| ((0..5).map(|j| w1[i * 5 + j] * x[j]).sum::<f64>() + b1[i]).tanh()).collect();
        for i in 0..3 {
            let want = (0..7).map(|j| w2[i * 7 + j] * hidden[j]).sum::<f64>() + b2[i];
            assert!((got[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_errors() {
        assert!(mlp_forward(&[identity(3, Activation::Linear)], &[1.0, 2.0]).is_err());
        assert!(DenseLayer::new(Tensor::zeros(&[2, 3]), Tensor::zeros(&[3]), Activation::Relu).is_err());
        let bad = Tensor::new(vec![1, 1], vec![f64::NAN]).unwrap();
        assert!(DenseLayer::new(bad, Tensor::zeros(&[1]), Activation::Relu).is_err());
    }
}
