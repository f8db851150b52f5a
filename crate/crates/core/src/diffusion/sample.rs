use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DiffusionError, NoisePredictor, NoiseSchedule};
use crate::nn::Class;

/// Classifier-free guidance: `(1+γ)·ε_θ(x,t,c) − γ·ε_θ(x,t,∅)`.
pub fn guided_eps<P: NoisePredictor + ?Sized>(
    model: &P,
    x: &[f64],
    t: f64,
    class: Class,
    gamma: f64,
) -> Result<Vec<f64>, DiffusionError> {
    let cond = model.predict(x, t, class)?;
    if gamma == 0.0 {
        return Ok(cond);
    }
    let uncond = model.predict(x, t, Class::Null)?;
    Ok(cond.iter().zip(&uncond).map(|(c, u)| (1.0 + gamma) * c - gamma * u).collect())
}

fn normal_row<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

/// Ancestral sampling from `x_T ~ N(0, I)`; see [`ancestral_from`].
pub fn ancestral_sample<P: NoisePredictor + ?Sized, R: Rng + ?Sized>(
    model: &P,
    sched: &NoiseSchedule,
    class: Class,
    gamma: f64,
    eta: f64,
    rng: &mut R,
) -> Result<Vec<f64>, DiffusionError> {
    let x_t = normal_row(model.width(), rng);
    ancestral_from(model, sched, class, gamma, eta, x_t, rng)
}

/// Runs `t = T..1` with
/// `x_{t−1} = √ᾱ_{t−1}·x̂0 + √(1−ᾱ_{t−1}−η²σ_t²)·ε̂ + ησ_t·z`,
/// `x̂0 = (x_t − √(1−ᾱ_t)·ε̂)/√ᾱ_t`.
///
/// With `η = 1` this is algebraically the posterior-mean update
/// `(x_t − β_t/√(1−ᾱ_t)·ε̂)/√α_t + σ_t·z`; `η = 0` is the deterministic
/// chain, which coincides with first-order DPM-Solver on the integer grid.
pub fn ancestral_from<P: NoisePredictor + ?Sized, R: Rng + ?Sized>(
    model: &P,
    sched: &NoiseSchedule,
    class: Class,
    gamma: f64,
    eta: f64,
    mut x: Vec<f64>,
    rng: &mut R,
) -> Result<Vec<f64>, DiffusionError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(DiffusionError::InvalidOption(format!("eta = {eta} outside [0, 1]")));
    }
    for t in (1..=sched.steps).rev() {
        let eps = guided_eps(model, &x, t as f64, class, gamma)?;
        let (ab, ab_prev) = (sched.alpha_bar[t], sched.alpha_bar[t - 1]);
        let sigma = eta * sched.sigma2[t].sqrt();
        let dir = (1.0 - ab_prev - sigma * sigma).max(0.0).sqrt();
        let noise = if t > 1 && sigma > 0.0 { normal_row(x.len(), rng) } else { vec![0.0; x.len()] };
        for i in 0..x.len() {
            let x0 = (x[i] - (1.0 - ab).sqrt() * eps[i]) / ab.sqrt();
            x[i] = ab_prev.sqrt() * x0 + dir * eps[i] + sigma * noise[i];
        }
    }
    Ok(x)
}

/// Where the DPM-Solver time grid is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    /// Uniform in half-log-SNR between `t = T` and `t = 1`.
    LogSnr,
    /// Uniform in `t` between `T` and `0`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpmOptions {
    pub steps: usize,
    pub order: usize,
    pub spacing: Spacing,
}

impl Default for DpmOptions {
    fn default() -> Self {
        DpmOptions { steps: 25, order: 2, spacing: Spacing::LogSnr }
    }
}

fn time_grid(sched: &NoiseSchedule, opts: &DpmOptions) -> Vec<f64> {
    let big_t = sched.steps as f64;
    match opts.spacing {
        Spacing::Uniform => (0..=opts.steps).map(|i| big_t - big_t * i as f64 / opts.steps as f64).collect(),
        Spacing::LogSnr => {
            let (l0, l1) = (sched.lambda(big_t), sched.lambda(1.0));
            let mut grid: Vec<f64> = (0..=opts.steps)
                .map(|i| sched.t_of_lambda(l0 + (l1 - l0) * i as f64 / opts.steps as f64))
                .collect();
            grid[0] = big_t;
            grid[opts.steps] = 1.0;
            grid
        }
    }
}

/// DPM-Solver from `x_T ~ N(0, I)`; see [`dpm_solve_from`].
pub fn dpm_solve<P: NoisePredictor + ?Sized, R: Rng + ?Sized>(
    model: &P,
    sched: &NoiseSchedule,
    class: Class,
    gamma: f64,
    opts: &DpmOptions,
    rng: &mut R,
) -> Result<Vec<f64>, DiffusionError> {
    let x_t = normal_row(model.width(), rng);
    dpm_solve_from(model, sched, class, gamma, opts, x_t)
}

/// Integrates the probability-flow ODE with first- or second-order
/// DPM-Solver steps. Order 2 uses the log-SNR midpoint; a step that ends at
/// `t = 0` (infinite log-SNR) falls back to order 1.
pub fn dpm_solve_from<P: NoisePredictor + ?Sized>(
    model: &P,
    sched: &NoiseSchedule,
    class: Class,
    gamma: f64,
    opts: &DpmOptions,
    mut x: Vec<f64>,
) -> Result<Vec<f64>, DiffusionError> {
    if opts.order != 1 && opts.order != 2 {
        return Err(DiffusionError::InvalidOrder(opts.order));
    }
    if opts.steps == 0 {
        return Err(DiffusionError::InvalidOption("steps must be >= 1".into()));
    }
    let grid = time_grid(sched, opts);
    let coeffs = |t: f64| {
        let ab = sched.alpha_bar_at(t);
        (ab.sqrt(), (1.0 - ab).sqrt())
    };
    for w in grid.windows(2) {
        let (t, t_next) = (w[0], w[1]);
        let (a_t, s_t) = coeffs(t);
        let (a_n, s_n) = coeffs(t_next);
        let eps = guided_eps(model, &x, t, class, gamma)?;
        if opts.order == 1 || s_n == 0.0 {
            // √ᾱ_n·x̂0 + √(1−ᾱ_n)·ε̂, the DPM-Solver-1 step written via x̂0
            for i in 0..x.len() {
                let x0 = (x[i] - s_t * eps[i]) / a_t;
                x[i] = a_n * x0 + s_n * eps[i];
            }
            continue;
        }
        let (l_t, l_n) = (sched.lambda(t), sched.lambda(t_next));
        let h = l_n - l_t;
        let s = sched.t_of_lambda(l_t + 0.5 * h);
        let (a_s, s_s) = coeffs(s);
        let u: Vec<f64> =
            x.iter().zip(&eps).map(|(xi, e)| a_s / a_t * xi - s_s * (0.5 * h).exp_m1() * e).collect();
        let eps_s = guided_eps(model, &u, s, class, gamma)?;
        for i in 0..x.len() {
            x[i] = a_n / a_t * x[i] - s_n * h.exp_m1() * eps_s[i];
        }
    }
    Ok(x)
}
