use rand::Rng;
use serde::{Deserialize, Serialize};

use super::blocks::{AttentionBlock, AttentionCache, Embedding, EmbeddingCache, ResBlock, ResBlockCache};
use super::layers::{silu, silu_backward, silu_vec, silu_vec_backward, Conv1d, GroupNorm, GroupNormCache};
use super::{Module, NnError, Param, Tensor1D};

/// Conditioning label. `Null` is the unconditional token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Pass,
    Fail,
    Null,
}

impl Class {
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Class::Pass => 0,
            Class::Fail => 1,
            Class::Null => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiserConfig {
    /// Row width K; even and at least 4.
    pub width: usize,
    pub channels: usize,
    pub groups: usize,
    pub time_dim: usize,
    pub emb_dim: usize,
    pub zero_init_output: bool,
}

impl DenoiserConfig {
    pub fn new(width: usize) -> Self {
        DenoiserConfig { width, channels: 32, groups: 8, time_dim: 32, emb_dim: 64, zero_init_output: true }
    }

    /// Small network for gradient checks.
    pub fn tiny(width: usize) -> Self {
        DenoiserConfig { width, channels: 4, groups: 2, time_dim: 8, emb_dim: 16, zero_init_output: false }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.width < 4 || self.width % 2 != 0 {
            return Err(NnError::ShapeMismatch(format!("width {} must be even and >= 4", self.width)));
        }
        if self.time_dim % 2 != 0 {
            return Err(NnError::ShapeMismatch(format!("time_dim {} must be even", self.time_dim)));
        }
        Ok(())
    }
}

/// One-down/one-up 1-D U-Net predicting the noise in a K-wide row.
///
/// conv_in → Res(C) → Attn ─┬─ down → Res(2C) → Attn → up ─┐
///                          └───────────── skip ───────────┴→ concat → Res(C) → Attn → head
#[derive(Debug, Clone, PartialEq)]
pub struct Denoiser {
    pub config: DenoiserConfig,
    pub embedding: Embedding,
    pub conv_in: Conv1d,
    pub res1: ResBlock,
    pub attn1: AttentionBlock,
    pub down: Conv1d,
    pub res2: ResBlock,
    pub attn2: AttentionBlock,
    pub up: Conv1d,
    pub res3: ResBlock,
    pub attn3: AttentionBlock,
    pub out_gn: GroupNorm,
    pub out_conv: Conv1d,
    pub out_proj: Conv1d,
}

pub struct DenoiserCache {
    emb: Vec<f64>,
    emb_act: Vec<f64>,
    ec: EmbeddingCache,
    x0: Tensor1D,
    rc1: ResBlockCache,
    ac1: AttentionCache,
    s1: Tensor1D,
    rc2: ResBlockCache,
    ac2: AttentionCache,
    u_in: Tensor1D,
    rc3: ResBlockCache,
    ac3: AttentionCache,
    gc: GroupNormCache,
    g: Tensor1D,
    ga: Tensor1D,
    oc: Tensor1D,
    oa: Tensor1D,
}

fn upsample2(x: &Tensor1D) -> Tensor1D {
    let mut y = Tensor1D::zeros(x.channels, x.width * 2);
    for (idx, &v) in x.data.iter().enumerate() {
        y.data[2 * idx] = v;
        y.data[2 * idx + 1] = v;
    }
    y
}

fn upsample2_backward(dy: &Tensor1D) -> Tensor1D {
    let mut dx = Tensor1D::zeros(dy.channels, dy.width / 2);
    for (idx, v) in dx.data.iter_mut().enumerate() {
        *v = dy.data[2 * idx] + dy.data[2 * idx + 1];
    }
    dx
}

fn concat(a: &Tensor1D, b: &Tensor1D) -> Tensor1D {
    let mut data = a.data.clone();
    data.extend_from_slice(&b.data);
    Tensor1D { channels: a.channels + b.channels, width: a.width, data }
}

fn split(x: &Tensor1D, first: usize) -> (Tensor1D, Tensor1D) {
    let cut = first * x.width;
    (
        Tensor1D { channels: first, width: x.width, data: x.data[..cut].to_vec() },
        Tensor1D { channels: x.channels - first, width: x.width, data: x.data[cut..].to_vec() },
    )
}

impl Denoiser {
    pub fn new<R: Rng + ?Sized>(config: DenoiserConfig, rng: &mut R) -> Result<Self, NnError> {
        config.validate()?;
        let (c, g, e) = (config.channels, config.groups, config.emb_dim);
        let embedding = Embedding::new(config.time_dim, e, Class::COUNT, rng);
        let conv_in = Conv1d::new("conv_in", 1, c, 3, 1, rng);
        let res1 = ResBlock::new("res1", c, c, e, g, rng)?;
        let attn1 = AttentionBlock::new("attn1", c, g, rng)?;
        let down = Conv1d::new("down", c, c, 3, 2, rng);
        let res2 = ResBlock::new("res2", c, 2 * c, e, g, rng)?;
        let attn2 = AttentionBlock::new("attn2", 2 * c, g, rng)?;
        let up = Conv1d::new("up", 2 * c, 2 * c, 3, 1, rng);
        let res3 = ResBlock::new("res3", 3 * c, c, e, g, rng)?;
        let attn3 = AttentionBlock::new("attn3", c, g, rng)?;
        let out_gn = GroupNorm::new("out_gn", c, g)?;
        let out_conv = Conv1d::new("out_conv", c, c, 3, 1, rng);
        let out_proj = if config.zero_init_output {
            Conv1d::zeroed("out_proj", c, 1, 1)
        } else {
            Conv1d::new("out_proj", c, 1, 1, 1, rng)
        };
        Ok(Denoiser {
            config,
            embedding,
            conv_in,
            res1,
            attn1,
            down,
            res2,
            attn2,
            up,
            res3,
            attn3,
            out_gn,
            out_conv,
            out_proj,
        })
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn predict(&self, x: &[f64], t: f64, class: Class) -> Result<Vec<f64>, NnError> {
        self.forward(x, t, class).map(|(y, _)| y)
    }

    pub fn forward(&self, x: &[f64], t: f64, class: Class) -> Result<(Vec<f64>, DenoiserCache), NnError> {
        if x.len() != self.config.width {
            return Err(NnError::ShapeMismatch(format!(
                "row width {} does not match model width {}",
                x.len(),
                self.config.width
            )));
        }
        let (emb, ec) = self.embedding.forward(t, class.index());
        let emb_act = silu_vec(&emb);
        let x0 = Tensor1D::from_row(x);
        let h0 = self.conv_in.forward(&x0)?;
        let (r1, rc1) = self.res1.forward(&h0, &emb_act)?;
        let (s1, ac1) = self.attn1.forward(&r1)?;
        let d = self.down.forward(&s1)?;
        let (r2, rc2) = self.res2.forward(&d, &emb_act)?;
        let (a2, ac2) = self.attn2.forward(&r2)?;
        let u_in = upsample2(&a2);
        let u = self.up.forward(&u_in)?;
        let cat = concat(&u, &s1);
        let (r3, rc3) = self.res3.forward(&cat, &emb_act)?;
        let (a3, ac3) = self.attn3.forward(&r3)?;
        let (g, gc) = self.out_gn.forward(&a3)?;
        let ga = silu(&g);
        let oc = self.out_conv.forward(&ga)?;
        let oa = silu(&oc);
        let y = self.out_proj.forward(&oa)?;
        let cache = DenoiserCache { emb, emb_act, ec, x0, rc1, ac1, s1, rc2, ac2, u_in, rc3, ac3, gc, g, ga, oc, oa };
        Ok((y.data, cache))
    }

    /// Accumulates parameter gradients of a loss with output gradient `dy`;
    /// returns the gradient with respect to the input row.
    pub fn backward(&mut self, cache: &DenoiserCache, dy: &[f64]) -> Vec<f64> {
        let c = self.config.channels;
        let dy = Tensor1D::from_row(dy);
        let doa = self.out_proj.backward(&cache.oa, &dy);
        let doc = silu_backward(&cache.oc, &doa);
        let dga = self.out_conv.backward(&cache.ga, &doc);
        let dg = silu_backward(&cache.g, &dga);
        let da3 = self.out_gn.backward(&cache.gc, &dg);
        let dr3 = self.attn3.backward(&cache.ac3, &da3);
        let (dcat, de3) = self.res3.backward(&cache.rc3, &cache.emb_act, &dr3);
        let (du, ds1_skip) = split(&dcat, 2 * c);
        let du_in = self.up.backward(&cache.u_in, &du);
        let da2 = upsample2_backward(&du_in);
        let dr2 = self.attn2.backward(&cache.ac2, &da2);
        let (dd, de2) = self.res2.backward(&cache.rc2, &cache.emb_act, &dr2);
        let mut ds1 = self.down.backward(&cache.s1, &dd);
        ds1.add_assign(&ds1_skip);
        let dr1 = self.attn1.backward(&cache.ac1, &ds1);
        let (dh0, de1) = self.res1.backward(&cache.rc1, &cache.emb_act, &dr1);
        let dx = self.conv_in.backward(&cache.x0, &dh0);
        let de_act: Vec<f64> = (0..de1.len()).map(|i| de1[i] + de2[i] + de3[i]).collect();
        let demb = silu_vec_backward(&cache.emb, &de_act);
        self.embedding.backward(&cache.ec, &demb);
        dx.data
    }

    /// Number of convolution, group-norm, residual and attention layers.
    pub fn layer_counts(&self) -> (usize, usize, usize, usize) {
        let res = [&self.res1, &self.res2, &self.res3];
        let convs = 5 + res.iter().map(|r| 2 + usize::from(r.skip.is_some())).sum::<usize>();
        let norms = 1 + 3 + 2 * res.len();
        (convs, norms, res.len(), 3)
    }
}

impl Module for Denoiser {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.embedding.visit(f);
        self.conv_in.visit(f);
        self.res1.visit(f);
        self.attn1.visit(f);
        self.down.visit(f);
        self.res2.visit(f);
        self.attn2.visit(f);
        self.up.visit(f);
        self.res3.visit(f);
        self.attn3.visit(f);
        self.out_gn.visit(f);
        self.out_conv.visit(f);
        self.out_proj.visit(f);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.embedding.visit_mut(f);
        self.conv_in.visit_mut(f);
        self.res1.visit_mut(f);
        self.attn1.visit_mut(f);
        self.down.visit_mut(f);
        self.res2.visit_mut(f);
        self.attn2.visit_mut(f);
        self.up.visit_mut(f);
        self.res3.visit_mut(f);
        self.attn3.visit_mut(f);
        self.out_gn.visit_mut(f);
        self.out_conv.visit_mut(f);
        self.out_proj.visit_mut(f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_output_projection_gives_zero_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Denoiser::new(DenoiserConfig::new(6), &mut rng).unwrap();
        let y = net.predict(&[1.0, -1.0, 0.3, 2.0, -0.5, 0.0], 500.0, Class::Fail).unwrap();
        assert_eq!(y, vec![0.0; 6]);
    }

    #[test]
    fn odd_or_narrow_width_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(Denoiser::new(DenoiserConfig::new(5), &mut rng), Err(NnError::ShapeMismatch(_))));
        assert!(matches!(Denoiser::new(DenoiserConfig::new(2), &mut rng), Err(NnError::ShapeMismatch(_))));
        let net = Denoiser::new(DenoiserConfig::new(4), &mut rng).unwrap();
        assert!(matches!(net.predict(&[0.0; 5], 1.0, Class::Pass), Err(NnError::ShapeMismatch(_))));
    }

    #[test]
    fn architecture_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Denoiser::new(DenoiserConfig::new(8), &mut rng).unwrap();
        assert_eq!(net.layer_counts(), (13, 10, 3, 3));
        let n = net.param_count();
        assert!((80_000..200_000).contains(&n), "{n}");
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = Denoiser::new(DenoiserConfig::new(8), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = Denoiser::new(DenoiserConfig::new(8), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn class_changes_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Denoiser::new(DenoiserConfig::tiny(8), &mut rng).unwrap();
        let x = [0.5; 8];
        assert_ne!(net.predict(&x, 10.0, Class::Fail).unwrap(), net.predict(&x, 10.0, Class::Null).unwrap());
    }
}
