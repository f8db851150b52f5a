use super::{Class, Denoiser, Module};

/// `|a - n| / max(|a|, |n|, floor)`; the floor keeps near-zero gradients
/// from dominating.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    const FLOOR: f64 = 1e-6;
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

fn perturb<M: Module + ?Sized>(m: &mut M, index: usize, delta: f64) {
    let mut k = 0;
    m.visit_mut(&mut |p| {
        if (k..k + p.len()).contains(&index) {
            p.value[index - k] += delta;
        }
        k += p.len();
    });
}

/// Compares analytic gradients with central differences of step `h` over
/// every parameter. `loss(m, backprop)` returns the scalar loss and, when
/// `backprop` is set, accumulates its gradients into `m`.
pub fn grad_check_module<M: Module + ?Sized>(
    m: &mut M,
    mut loss: impl FnMut(&mut M, bool) -> f64,
    h: f64,
) -> f64 {
    m.zero_grad();
    loss(m, true);
    let mut analytic = Vec::new();
    m.visit(&mut |p| analytic.extend_from_slice(&p.grad));
    let mut worst = 0.0f64;
    for (i, &a) in analytic.iter().enumerate() {
        perturb(m, i, h);
        let up = loss(m, false);
        perturb(m, i, -2.0 * h);
        let down = loss(m, false);
        perturb(m, i, h);
        worst = worst.max(relative_error(a, (up - down) / (2.0 * h)));
    }
    worst
}

/// Max relative gradient error of `0.5·‖ε_θ(x, t, c) − target‖²` for a
/// fixed pseudo-random target.
pub fn grad_check(net: &mut Denoiser, x: &[f64], t: f64, class: Class) -> f64 {
    let target: Vec<f64> = (0..x.len()).map(|i| (1.3 * i as f64 + 0.4).cos()).collect();
    grad_check_module(
        net,
        |net, backprop| {
            let (y, cache) = net.forward(x, t, class).expect("grad check input fits the model");
            let dy: Vec<f64> = y.iter().zip(&target).map(|(a, b)| a - b).collect();
            if backprop {
                net.backward(&cache, &dy);
            }
            0.5 * dy.iter().map(|d| d * d).sum::<f64>()
        },
        1e-5,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{AttentionBlock, Conv1d, Dense, DenoiserConfig, GroupNorm, ResBlock, Tensor1D};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn input(c: usize, w: usize, seed: u64) -> Tensor1D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor1D { channels: c, width: w, data: (0..c * w).map(|_| rng.random_range(-1.5..1.5)).collect() }
    }

    fn sq(y: &Tensor1D) -> (f64, Tensor1D) {
        let d = y.map(|v| v - 0.3);
        (0.5 * d.data.iter().map(|v| v * v).sum::<f64>(), d)
    }

    #[test]
    fn dense_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = Dense::new("d", 3, 2, &mut rng);
        let x = [0.2, -0.7, 1.1];
        let err = grad_check_module(
            &mut d,
            |d, bp| {
                let y = d.forward(&x);
                if bp {
                    d.backward(&x, &[1.0, -2.0]);
                }
                y[0] - 2.0 * y[1]
            },
            1e-5,
        );
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn conv_strided() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut conv = Conv1d::new("c", 2, 3, 3, 2, &mut rng);
        let x = input(2, 8, 3);
        let err = grad_check_module(
            &mut conv,
            |c, bp| {
                let y = c.forward(&x).unwrap();
                let (l, dy) = sq(&y);
                if bp {
                    c.backward(&x, &dy);
                }
                l
            },
            1e-5,
        );
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn group_norm() {
        let mut gn = GroupNorm::new("g", 4, 2).unwrap();
        gn.gamma.value = vec![0.5, 1.5, -1.0, 2.0];
        gn.beta.value = vec![0.1, 0.0, -0.2, 0.3];
        let x = input(4, 5, 4);
        let w = input(4, 5, 5);
        let err = grad_check_module(
            &mut gn,
            |g, bp| {
                let (y, cache) = g.forward(&x).unwrap();
                if bp {
                    g.backward(&cache, &w);
                }
                y.data.iter().zip(&w.data).map(|(a, b)| a * b).sum()
            },
            1e-5,
        );
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn attention() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut blk = AttentionBlock::new("a", 4, 2, &mut rng).unwrap();
        let x = input(4, 6, 7);
        let err = grad_check_module(
            &mut blk,
            |b, bp| {
                let (y, cache) = b.forward(&x).unwrap();
                let (l, dy) = sq(&y);
                if bp {
                    b.backward(&cache, &dy);
                }
                l
            },
            1e-5,
        );
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn res_block_with_skip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut blk = ResBlock::new("r", 4, 6, 5, 2, &mut rng).unwrap();
        let x = input(4, 6, 9);
        let emb = [0.3, -0.2, 0.9, 0.0, -1.0];
        let err = grad_check_module(
            &mut blk,
            |b, bp| {
                let (y, cache) = b.forward(&x, &emb).unwrap();
                let (l, dy) = sq(&y);
                if bp {
                    b.backward(&cache, &emb, &dy);
                }
                l
            },
            1e-5,
        );
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn full_denoiser() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut net = Denoiser::new(DenoiserConfig::tiny(8), &mut rng).unwrap();
        let x: Vec<f64> = (0..8).map(|i| if i % 3 == 0 { 1.0 } else { -0.8 }).collect();
        for class in [Class::Pass, Class::Fail, Class::Null] {
            let err = grad_check(&mut net, &x, 37.0, class);
            assert!(err < 1e-4, "{class:?}: {err}");
        }
    }
}
