use serde::{Deserialize, Serialize};

use super::DiffusionError;

/// Linear β schedule. Arrays are indexed by timestep; index 0 holds the
/// `ᾱ_0 = 1` convention (β_0 = σ_0² = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub steps: usize,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_bar: Vec<f64>,
    pub sigma2: Vec<f64>,
    log_alpha_bar: Vec<f64>,
}

pub fn make_schedule(steps: usize, beta1: f64, beta_t: f64) -> Result<NoiseSchedule, DiffusionError> {
    if steps < 2 {
        return Err(DiffusionError::InvalidRange(format!("T = {steps} < 2")));
    }
    if !(beta1 > 0.0 && beta1 <= beta_t && beta_t < 1.0) {
        return Err(DiffusionError::InvalidRange(format!("need 0 < beta1 ({beta1}) <= betaT ({beta_t}) < 1")));
    }
    let mut beta = vec![0.0; steps + 1];
    let mut alpha = vec![1.0; steps + 1];
    let mut alpha_bar = vec![1.0; steps + 1];
    let mut sigma2 = vec![0.0; steps + 1];
    for t in 1..=steps {
        beta[t] = beta1 + (beta_t - beta1) * (t - 1) as f64 / (steps - 1) as f64;
        alpha[t] = 1.0 - beta[t];
        alpha_bar[t] = alpha_bar[t - 1] * alpha[t];
        sigma2[t] = (1.0 - alpha_bar[t - 1]) / (1.0 - alpha_bar[t]) * beta[t];
    }
    let log_alpha_bar = alpha_bar.iter().map(|a| a.ln()).collect();
    Ok(NoiseSchedule { steps, beta, alpha, alpha_bar, sigma2, log_alpha_bar })
}

impl NoiseSchedule {
    /// `ᾱ(t)` for real `t ∈ [0, T]`, interpolating `log ᾱ` linearly.
    pub fn alpha_bar_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.steps as f64);
        let lo = t.floor() as usize;
        if lo >= self.steps {
            return self.alpha_bar[self.steps];
        }
        let f = t - lo as f64;
        if f == 0.0 {
            return self.alpha_bar[lo];
        }
        ((1.0 - f) * self.log_alpha_bar[lo] + f * self.log_alpha_bar[lo + 1]).exp()
    }

    /// Half log signal-to-noise ratio `λ(t) = log(√ᾱ / √(1−ᾱ))`.
    pub fn lambda(&self, t: f64) -> f64 {
        let ab = self.alpha_bar_at(t);
        0.5 * (ab.ln() - (1.0 - ab).ln())
    }

    /// Inverse of [`lambda`](Self::lambda) on `[1, T]` by bisection.
    pub fn t_of_lambda(&self, lambda: f64) -> f64 {
        let (mut lo, mut hi) = (1.0f64, self.steps as f64);
        if lambda >= self.lambda(lo) {
            return lo;
        }
        if lambda <= self.lambda(hi) {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.lambda(mid) > lambda {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `x_t = √ᾱ_t·x0 + √(1−ᾱ_t)·ε`.
pub fn q_sample(x0: &[f64], t: usize, eps: &[f64], sched: &NoiseSchedule) -> Result<Vec<f64>, DiffusionError> {
    if t == 0 || t > sched.steps {
        return Err(DiffusionError::TimestepOutOfRange { t, max: sched.steps });
    }
    let (a, s) = (sched.alpha_bar[t].sqrt(), (1.0 - sched.alpha_bar[t]).sqrt());
    Ok(x0.iter().zip(eps).map(|(x, e)| a * x + s * e).collect())
}
