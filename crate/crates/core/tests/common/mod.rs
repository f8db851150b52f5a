#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use faultaug::context::{contribution_order, m_for_variance, VARIANCE_FRACTION};
use faultaug::minilang::{ExecutionRecord, Node, Program, Stmt, StmtKind};
use nalgebra::{DMatrix, SymmetricEigen};

/// Statement → innermost enclosing `if`/`while`.
pub fn enclosing(program: &Program) -> BTreeMap<Stmt, Stmt> {
    fn walk(nodes: &[Node], parent: Option<Stmt>, out: &mut BTreeMap<Stmt, Stmt>) {
        for n in nodes {
            if let Some(p) = parent {
                out.insert(n.index, p);
            }
            match &n.kind {
                StmtKind::If { then_body, else_body, .. } => {
                    walk(then_body, Some(n.index), out);
                    walk(else_body, Some(n.index), out);
                }
                StmtKind::While { body, .. } => walk(body, Some(n.index), out),
                _ => {}
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(&program.body, None, &mut out);
    out
}

/// Dynamic slice recomputed from the executed statement sequence and the
/// program text alone: reaching definitions by backward scan, control
/// parents from the enclosing predicate's latest evaluation.
pub fn brute_force_slice(
    program: &Program,
    record: &ExecutionRecord,
    criterion: Stmt,
    vars: &BTreeSet<String>,
) -> BTreeSet<Stmt> {
    let parents = enclosing(program);
    let seq: Vec<Stmt> = record.trace.iter().map(|o| o.stmt).collect();
    let node = |s: Stmt| program.statement(s).unwrap();
    let latest = |s: Stmt, before: usize| (0..before).rev().find(|&j| seq[j] == s);
    let deps = |i: usize, first: bool| -> Vec<usize> {
        let mut out = Vec::new();
        for v in node(seq[i]).used_vars() {
            if first && !vars.contains(&v) {
                continue;
            }
            if let Some(j) = (0..i).rev().find(|&j| node(seq[j]).defined_var() == Some(v.as_str())) {
                out.push(j);
            }
        }
        let outer = parents.get(&seq[i]).and_then(|&p| latest(p, i));
        let ctrl = match node(seq[i]).kind {
            StmtKind::While { .. } => match (latest(seq[i], i), outer) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
            _ => outer,
        };
        out.extend(ctrl);
        out
    };
    let start = seq.iter().rposition(|&s| s == criterion).unwrap();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([(start, true)]);
    while let Some((i, first)) = queue.pop_front() {
        for j in deps(i, first) {
            if seen.insert(j) {
                queue.push_back((j, false));
            }
        }
    }
    seen.into_iter().map(|i| seq[i]).collect()
}

/// Roots of `λ² − tr·λ + det` for a symmetric 2×2, descending.
pub fn eig2(a: [[f64; 2]; 2]) -> [f64; 2] {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
}

/// Roots of the characteristic cubic of a symmetric 3×3 (trigonometric
/// form), descending.
pub fn eig3(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.total_cmp(x));
        return d;
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [l1, 3.0 * q - l1 - l3, l3]
}

/// Contribution ordering from a general-purpose symmetric eigensolver.
/// `None` when a used eigenvalue is repeated (the loadings then depend on
/// an arbitrary basis of the eigenspace).
pub fn pca_order_oracle(x: &[Vec<u8>], m: Option<usize>) -> Option<(Vec<usize>, Vec<f64>)> {
    let rows = x.len();
    let cols = x[0].len();
    let data = DMatrix::from_fn(rows, cols, |i, j| f64::from(x[i][j]));
    let mean = data.row_mean();
    let centered = DMatrix::from_fn(rows, cols, |i, j| data[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (rows as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut idx: Vec<usize> = (0..cols).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let top = values[0].max(1.0);
    let rank = values.iter().filter(|&&l| l > 1e-10 * top).count();
    let m = m.unwrap_or_else(|| m_for_variance(&values, VARIANCE_FRACTION)).min(rank);
    for k in 0..m {
        if (k + 1 < cols && (values[k] - values[k + 1]).abs() < 1e-8 * top) || (k > 0 && (values[k - 1] - values[k]).abs() < 1e-8 * top) {
            return None;
        }
    }
    let mut contrib = vec![0.0; cols];
    for &i in idx.iter().take(m) {
        for (j, c) in contrib.iter_mut().enumerate() {
            *c += eig.eigenvectors[(j, i)].abs();
        }
    }
    Some((contribution_order(&contrib), contrib))
}

/// `y' = f(λ, y)` by classical RK4 with `n` uniform steps.
pub fn rk4(f: impl Fn(f64, f64) -> f64, mut y: f64, l0: f64, l1: f64, n: usize) -> f64 {
    let h = (l1 - l0) / n as f64;
    for i in 0..n {
        let l = l0 + h * i as f64;
        let k1 = f(l, y);
        let k2 = f(l + h / 2.0, y + h / 2.0 * k1);
        let k3 = f(l + h / 2.0, y + h / 2.0 * k2);
        let k4 = f(l + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

pub mod diffusion {
    use faultaug::diffusion::{ancestral_from, dpm_solve_from, DpmOptions, FnPredictor, NoiseSchedule, Spacing};
    use faultaug::nn::Class;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Largest `|ᾱ_t − ᾱ_{t−1}·α_t|`, and whether ᾱ strictly decreases.
    pub fn alpha_bar_identities(s: &NoiseSchedule) -> (f64, bool) {
        let err = (1..=s.steps).map(|t| (s.alpha_bar[t] - s.alpha_bar[t - 1] * s.alpha[t]).abs()).fold(0.0, f64::max);
        let dec = s.alpha_bar.windows(2).all(|w| w[1] < w[0]);
        (err, dec)
    }

    /// Runs the one-step forward chain to `t` for `n` draws from `x0` and
    /// returns how many standard errors the sample mean and variance sit
    /// from `√ᾱ_t·x0` and `1 − ᾱ_t`.
    pub fn forward_moment_z(s: &NoiseSchedule, t: usize, x0: f64, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let mut x = x0;
                for k in 1..=t {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x = s.alpha[k].sqrt() * x + s.beta[k].sqrt() * z;
                }
                x
            })
            .collect();
        let nf = n as f64;
        let mean = draws.iter().sum::<f64>() / nf;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let (want_mean, want_var) = (s.alpha_bar[t].sqrt() * x0, 1.0 - s.alpha_bar[t]);
        let z_mean = (mean - want_mean).abs() / (want_var / nf).sqrt();
        let z_var = (var - want_var).abs() / (want_var * (2.0 / (nf - 1.0)).sqrt());
        (z_mean, z_var)
    }

    /// A smooth nonlinear stand-in for a trained noise model.
    pub fn nonlinear(width: usize) -> FnPredictor<impl Fn(&[f64], f64, Class) -> Vec<f64>> {
        FnPredictor {
            width,
            f: |x: &[f64], t: f64, c: Class| {
                let shift = if c == Class::Fail { 0.2 } else { -0.1 };
                x.iter().enumerate().map(|(i, v)| 0.6 * v.tanh() + shift * (i as f64 + 1.0) * (t / 1000.0)).collect()
            },
        }
    }

    /// Max abs difference between order-1 DPM on the integer grid and the
    /// deterministic (η = 0) chain.
    pub fn dpm1_vs_deterministic_chain(s: &NoiseSchedule) -> f64 {
        let model = nonlinear(4);
        let x_t = vec![0.3, -1.2, 0.8, 2.0];
        let opts = DpmOptions { steps: s.steps, order: 1, spacing: Spacing::Uniform };
        let a = dpm_solve_from(&model, s, Class::Fail, 2.0, &opts, x_t.clone()).unwrap();
        let b = ancestral_from(&model, s, Class::Fail, 2.0, 0.0, x_t, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    }

    /// `ε̂(x, t) = c·x`: in `y = x/α` the flow is
    /// `dy/dλ = −c·e^{−λ}·√sigmoid(2λ)·y`.
    pub fn linear(width: usize, c: f64) -> FnPredictor<impl Fn(&[f64], f64, Class) -> Vec<f64>> {
        FnPredictor { width, f: move |x: &[f64], _t: f64, _c: Class| x.iter().map(|v| c * v).collect() }
    }

    /// `(solver error vs RK4 oracle, RK4 error vs closed form)` for the
    /// linear model integrated from `t = T` to `t = 1`.
    pub fn linear_model_errors(s: &NoiseSchedule, c: f64, opts: &DpmOptions) -> (f64, f64) {
        let x_t = vec![1.5, -0.7, 0.2, -2.1];
        let got = dpm_solve_from(&linear(4, c), s, Class::Fail, 0.0, opts, x_t.clone()).unwrap();
        let (l0, l1) = (s.lambda(s.steps as f64), s.lambda(1.0));
        let (a0, a1) = (s.alpha_bar[s.steps].sqrt(), s.alpha_bar[1].sqrt());
        let f = |l: f64, y: f64| -c * (-l).exp() * super::sigmoid(2.0 * l).sqrt() * y;
        let (mut solver, mut oracle) = (0.0f64, 0.0f64);
        for (x, g) in x_t.iter().zip(&got) {
            let y = super::rk4(f, x / a0, l0, l1, 20_000);
            let closed = x / a0 * (c * ((-l1).exp().asinh() - (-l0).exp().asinh())).exp();
            solver = solver.max((g - a1 * y).abs());
            oracle = oracle.max((y - closed).abs());
        }
        (solver, oracle)
    }
}
