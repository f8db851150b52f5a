use faultaug::nn::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-4;
const H: f64 = 1e-5;

fn input(c: usize, w: usize, seed: u64) -> Tensor1D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tensor1D { channels: c, width: w, data: (0..c * w).map(|_| rng.random_range(-1.5..1.5)).collect() }
}

/// Weighted-sum loss with fixed weights, so `dy = w`.
fn weights(like: &Tensor1D, seed: u64) -> Tensor1D {
    input(like.channels, like.width, seed + 1000)
}

fn dot(a: &Tensor1D, b: &Tensor1D) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

/// Central-difference check of an input gradient.
fn input_error(x: &Tensor1D, dx: &Tensor1D, f: impl Fn(&Tensor1D) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x.data.len() {
        let mut up = x.clone();
        up.data[i] += H;
        let mut down = x.clone();
        down.data[i] -= H;
        worst = worst.max(relative_error(dx.data[i], (f(&up) - f(&down)) / (2.0 * H)));
    }
    worst
}

#[test]
fn dense_params_and_inputs() {
    for (i, o) in [(1, 1), (3, 5), (8, 2)] {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let mut d = Dense::new("d", i, o, &mut rng);
        let x: Vec<f64> = (0..i).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..o).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |d: &Dense, x: &[f64]| d.forward(x).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let err = grad_check_module(&mut d, |d, bp| {
            if bp {
                d.backward(&x, &w);
            }
            loss(d, &x)
        }, H);
        assert!(err < TOL, "dense {i}x{o}: {err}");
        let dx = d.backward(&x, &w);
        let xt = Tensor1D::from_row(&x);
        let err = input_error(&xt, &Tensor1D::from_row(&dx), |x| loss(&d, &x.data));
        assert!(err < TOL, "dense input {i}x{o}: {err}");
    }
}

#[test]
fn dense_over_positions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut d = Dense::new("p", 3, 4, &mut rng);
    let x = input(3, 5, 4);
    let w = input(4, 5, 5);
    let err = grad_check_module(&mut d, |d, bp| {
        if bp {
            d.backward_positions(&x, &w);
        }
        dot(&d.forward_positions(&x), &w)
    }, H);
    assert!(err < TOL, "{err}");
    let dx = d.backward_positions(&x, &w);
    assert!(input_error(&x, &dx, |x| dot(&d.forward_positions(x), &w)) < TOL);
}

#[test]
fn conv_shapes() {
    for (cin, cout, k, stride, width) in [(1, 4, 3, 1, 4), (2, 3, 3, 2, 8), (4, 4, 1, 1, 6), (3, 2, 3, 2, 7), (2, 2, 3, 1, 1)] {
        let mut rng = ChaCha8Rng::seed_from_u64(width as u64);
        let mut c = Conv1d::new("c", cin, cout, k, stride, &mut rng);
        let x = input(cin, width, 11);
        let w = weights(&c.forward(&x).unwrap(), 11);
        let err = grad_check_module(&mut c, |c, bp| {
            if bp {
                c.backward(&x, &w);
            }
            dot(&c.forward(&x).unwrap(), &w)
        }, H);
        assert!(err < TOL, "conv {cin}->{cout} k{k} s{stride} w{width}: {err}");
        let dx = c.backward(&x, &w);
        let err = input_error(&x, &dx, |x| dot(&c.forward(x).unwrap(), &w));
        assert!(err < TOL, "conv input {cin}->{cout} k{k} s{stride} w{width}: {err}");
    }
}

#[test]
fn group_norm_shapes() {
    for (c, g, w) in [(2, 1, 3), (4, 2, 5), (8, 8, 2), (8, 4, 6)] {
        let mut gn = GroupNorm::new("g", c, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(c as u64 * 10 + g as u64);
        for v in gn.gamma.value.iter_mut().chain(gn.beta.value.iter_mut()) {
            *v = rng.random_range(-2.0..2.0);
        }
        let x = input(c, w, 21);
        let wt = weights(&x, 21);
        let err = grad_check_module(&mut gn, |gn, bp| {
            let (y, cache) = gn.forward(&x).unwrap();
            if bp {
                gn.backward(&cache, &wt);
            }
            dot(&y, &wt)
        }, H);
        assert!(err < TOL, "groupnorm c{c} g{g} w{w}: {err}");
        let (_, cache) = gn.forward(&x).unwrap();
        let dx = gn.backward(&cache, &wt);
        let err = input_error(&x, &dx, |x| dot(&gn.forward(x).unwrap().0, &wt));
        assert!(err < TOL, "groupnorm input c{c} g{g} w{w}: {err}");
    }
}

#[test]
fn silu_input_gradient() {
    let x = input(2, 7, 31);
    let w = weights(&x, 31);
    let dx = silu_backward(&x, &w);
    assert!(input_error(&x, &dx, |x| dot(&silu(x), &w)) < TOL);
}

#[test]
fn embedding_per_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut emb = Embedding::new(8, 6, 3, &mut rng);
    let w: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    for class in 0..3 {
        for t in [1.0, 250.0, 999.0] {
            let err = grad_check_module(&mut emb, |e, bp| {
                let (y, cache) = e.forward(t, class);
                if bp {
                    e.backward(&cache, &w);
                }
                y.iter().zip(&w).map(|(a, b)| a * b).sum()
            }, H);
            assert!(err < TOL, "embedding class {class} t {t}: {err}");
        }
    }
}

#[test]
fn res_blocks() {
    for (cin, cout, w) in [(4, 4, 5), (2, 4, 4), (4, 8, 3)] {
        let mut rng = ChaCha8Rng::seed_from_u64(51 + cin as u64);
        let mut blk = ResBlock::new("r", cin, cout, 6, 2, &mut rng).unwrap();
        let emb: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = input(cin, w, 52);
        let wt = weights(&blk.forward(&x, &emb).unwrap().0, 52);
        let err = grad_check_module(&mut blk, |b, bp| {
            let (y, cache) = b.forward(&x, &emb).unwrap();
            if bp {
                b.backward(&cache, &emb, &wt);
            }
            dot(&y, &wt)
        }, H);
        assert!(err < TOL, "resblock {cin}->{cout} w{w}: {err}");
        let (_, cache) = blk.forward(&x, &emb).unwrap();
        let (dx, _) = blk.backward(&cache, &emb, &wt);
        let err = input_error(&x, &dx, |x| dot(&blk.forward(x, &emb).unwrap().0, &wt));
        assert!(err < TOL, "resblock input {cin}->{cout} w{w}: {err}");
    }
}

#[test]
fn attention_blocks() {
    for (c, g, w) in [(2, 1, 3), (4, 2, 6), (8, 4, 2)] {
        let mut rng = ChaCha8Rng::seed_from_u64(61 + c as u64);
        let mut blk = AttentionBlock::new("a", c, g, &mut rng).unwrap();
        let x = input(c, w, 62);
        let wt = weights(&x, 62);
        let err = grad_check_module(&mut blk, |b, bp| {
            let (y, cache) = b.forward(&x).unwrap();
            if bp {
                b.backward(&cache, &wt);
            }
            dot(&y, &wt)
        }, H);
        assert!(err < TOL, "attention c{c} g{g} w{w}: {err}");
        let (_, cache) = blk.forward(&x).unwrap();
        let dx = blk.backward(&cache, &wt);
        let err = input_error(&x, &dx, |x| dot(&blk.forward(x).unwrap().0, &wt));
        assert!(err < TOL, "attention input c{c} g{g} w{w}: {err}");
    }
}

#[test]
fn composed_denoiser() {
    for (width, seed) in [(4, 71), (6, 72), (10, 73)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Denoiser::new(DenoiserConfig::tiny(width), &mut rng).unwrap();
        let x: Vec<f64> = (0..width).map(|_| rng.random_range(-1.5..1.5)).collect();
        for (t, class) in [(1.0, Class::Fail), (500.0, Class::Pass), (1000.0, Class::Null)] {
            let err = grad_check(&mut net, &x, t, class);
            assert!(err < TOL, "denoiser width {width} t {t} {class:?}: {err}");
        }
    }
}

