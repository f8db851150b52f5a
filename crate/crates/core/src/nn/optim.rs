use serde::{Deserialize, Serialize};

use super::{Module, NnError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig { lr: 3e-4, weight_decay: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// AdamW with decoupled weight decay. Moment buffers follow the module's
/// visiting order and are created on the first step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub config: AdamWConfig,
    pub step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl AdamW {
    pub fn new(config: AdamWConfig) -> Self {
        AdamW { config, step: 0, first: Vec::new(), second: Vec::new() }
    }

    /// Applies one update from the accumulated gradients. Parameters are
    /// left untouched if any gradient is non-finite.
    pub fn step<M: Module + ?Sized>(&mut self, module: &mut M) -> Result<(), NnError> {
        let mut bad = None;
        module.visit(&mut |p| {
            if bad.is_none() && p.grad.iter().any(|g| !g.is_finite()) {
                bad = Some(p.name.clone());
            }
        });
        if let Some(name) = bad {
            return Err(NnError::NonFiniteGradient(name));
        }
        if self.first.is_empty() {
            module.visit(&mut |p| {
                self.first.push(vec![0.0; p.len()]);
                self.second.push(vec![0.0; p.len()]);
            });
        }
        self.step += 1;
        let AdamWConfig { lr, weight_decay, beta1, beta2, eps } = self.config;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        let mut k = 0;
        let (first, second) = (&mut self.first, &mut self.second);
        module.visit_mut(&mut |p| {
            let (m, v) = (&mut first[k], &mut second[k]);
            for i in 0..p.value.len() {
                let g = p.grad[i];
                p.value[i] *= 1.0 - lr * weight_decay;
                m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p.value[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
            k += 1;
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Param;

    struct Scalar(Param);

    impl Module for Scalar {
        fn visit(&self, f: &mut dyn FnMut(&Param)) {
            f(&self.0)
        }
        fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
            f(&mut self.0)
        }
    }

    #[test]
    fn single_step_hand_arithmetic() {
        let mut w = Scalar(Param::filled("w", &[1], 1.0));
        w.0.grad[0] = 1.0;
        let mut opt = AdamW::new(AdamWConfig::default());
        opt.step(&mut w).unwrap();
        // decay: 1 - 3e-4*0.01 = 0.999997; m̂ = v̂ = 1; step 3e-4/(1+1e-8)
        let expected = 0.999997 - 3e-4 / (1.0 + 1e-8);
        assert!((w.0.value[0] - expected).abs() < 1e-15, "{}", w.0.value[0]);
        assert_eq!(opt.step, 1);
    }

    #[test]
    fn zero_gradient_zero_decay_is_identity() {
        let mut w = Scalar(Param::filled("w", &[3], 0.7));
        let mut opt = AdamW::new(AdamWConfig { weight_decay: 0.0, ..Default::default() });
        opt.step(&mut w).unwrap();
        assert_eq!(w.0.value, vec![0.7; 3]);
    }

    #[test]
    fn nan_gradient_rejected() {
        let mut w = Scalar(Param::filled("w", &[2], 1.0));
        w.0.grad[1] = f64::NAN;
        let mut opt = AdamW::new(AdamWConfig::default());
        assert!(matches!(opt.step(&mut w), Err(NnError::NonFiniteGradient(n)) if n == "w"));
        assert_eq!(w.0.value, vec![1.0; 2]);
        assert_eq!(opt.step, 0);
    }
}
