use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{mismatch, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl AdamState {
    /// Zeroed accumulators shaped like `params`.
    pub fn new(config: AdamConfig, params: &[&Tensor]) -> Self {
        let zeros: Vec<Tensor> = params.iter().map(|p| Tensor::zeros_like(p)).collect();
        Self { config, step: 0, m: zeros.clone(), v: zeros }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn update(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.m.len() {
            return Err(mismatch(format!(
                "adam: {} params, {} grads, {} accumulators",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape != g.shape || p.shape != self.m[i].shape {
                return Err(mismatch(format!("adam: tensor {i} shape {:?} vs grad {:?}", p.shape, g.shape)));
            }
        }
        self.step += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = self.config;
        let t = i32::try_from(self.step).unwrap_or(i32::MAX);
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            for (((theta, &gi), mi), vi) in p.data.iter_mut().zip(&g.data).zip(&mut m.data).zip(&mut v.data) {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *theta -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

/// Free-function form of [`AdamState::update`].
pub fn adam_step(state: &mut AdamState, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
    state.update(params, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: f64) -> Tensor {
        Tensor::new(vec![1], vec![x]).unwrap()
    }

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = Tensor::new(vec![2, 2], vec![0.5, -1.0, 2.0, 0.0]).unwrap();
        let before = p.clone();
        let mut st = AdamState::new(AdamConfig::default(), &[&p]);
        for _ in 0..5 {
            adam_step(&mut st, &mut [&mut p], &[Tensor::zeros(&[2, 2])]).unwrap();
        }
        assert_eq!(p, before);
        assert!(st.m[0].data.iter().chain(&st.v[0].data).all(|&x| x == 0.0));
    }

    #[test]
    fn first_step_is_learning_rate() {
        let mut p = scalar(0.0);
        let mut st = AdamState::new(AdamConfig::default(), &[&p]);
        st.update(&mut [&mut p], &[scalar(1.0)]).unwrap();
        assert!((p.data[0] + 0.001 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn descends_quadratic() {
        let mut p = scalar(1.0);
        let mut st = AdamState::new(AdamConfig::default(), &[&p]);
        let mut f = 1.0;
        for _ in 0..10 {
            let g = scalar(2.0 * p.data[0]);
            st.update(&mut [&mut p], &[g]).unwrap();
            let next = p.data[0] * p.data[0];
            assert!(next < f);
            f = next;
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut p = scalar(1.0);
        let mut st = AdamState::new(AdamConfig::default(), &[&p]);
        assert!(st.update(&mut [&mut p], &[Tensor::zeros(&[2])]).is_err());
        assert!(st.update(&mut [&mut p], &[]).is_err());
    }
}
