use rand::Rng;

use super::layers::{silu, silu_backward, silu_vec, silu_vec_backward, Conv1d, Dense, GroupNorm, GroupNormCache};
use super::{Module, NnError, Param, Tensor1D};

/// Sinusoidal embedding of a (possibly fractional) timestep: the first half
/// holds `sin(t·f_i)`, the second `cos(t·f_i)`, with `f_i = 10000^(-i/half)`.
pub fn timestep_embedding(t: f64, dim: usize) -> Vec<f64> {
    let half = dim / 2;
    let mut out = vec![0.0; dim];
    for i in 0..half {
        let freq = (-(10000f64.ln()) * i as f64 / half as f64).exp();
        out[i] = (t * freq).sin();
        out[half + i] = (t * freq).cos();
    }
    out
}

/// Time MLP plus a learned per-class vector (the last class is the null
/// token used for unconditional predictions).
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub time_dim: usize,
    pub dim: usize,
    pub fc1: Dense,
    pub fc2: Dense,
    pub classes: Param,
}

#[derive(Debug, Clone)]
pub struct EmbeddingCache {
    sin: Vec<f64>,
    h1: Vec<f64>,
    a1: Vec<f64>,
    class: usize,
}

impl Embedding {
    pub fn new<R: Rng + ?Sized>(time_dim: usize, dim: usize, n_classes: usize, rng: &mut R) -> Self {
        let mut classes = Param::zeros("emb.class", &[n_classes, dim]);
        for v in &mut classes.value {
            *v = rng.random_range(-1.0..1.0);
        }
        Embedding {
            time_dim,
            dim,
            fc1: Dense::new("emb.fc1", time_dim, dim, rng),
            fc2: Dense::new("emb.fc2", dim, dim, rng),
            classes,
        }
    }

    pub fn forward(&self, t: f64, class: usize) -> (Vec<f64>, EmbeddingCache) {
        let sin = timestep_embedding(t, self.time_dim);
        let h1 = self.fc1.forward(&sin);
        let a1 = silu_vec(&h1);
        let mut e = self.fc2.forward(&a1);
        for (v, c) in e.iter_mut().zip(&self.classes.value[class * self.dim..(class + 1) * self.dim]) {
            *v += c;
        }
        (e, EmbeddingCache { sin, h1, a1, class })
    }

    pub fn backward(&mut self, cache: &EmbeddingCache, de: &[f64]) {
        let base = cache.class * self.dim;
        for (g, d) in self.classes.grad[base..base + self.dim].iter_mut().zip(de) {
            *g += d;
        }
        let da1 = self.fc2.backward(&cache.a1, de);
        let dh1 = silu_vec_backward(&cache.h1, &da1);
        self.fc1.backward(&cache.sin, &dh1);
    }
}

impl Module for Embedding {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.fc1.visit(f);
        self.fc2.visit(f);
        f(&self.classes);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.fc1.visit_mut(f);
        self.fc2.visit_mut(f);
        f(&mut self.classes);
    }
}

/// GN → SiLU → conv, plus a projected embedding, then GN → SiLU → conv,
/// added to the input (through a 1×1 conv when the width changes).
#[derive(Debug, Clone, PartialEq)]
pub struct ResBlock {
    pub gn1: GroupNorm,
    pub conv1: Conv1d,
    pub emb_proj: Dense,
    pub gn2: GroupNorm,
    pub conv2: Conv1d,
    pub skip: Option<Conv1d>,
}

#[derive(Debug, Clone)]
pub struct ResBlockCache {
    x: Tensor1D,
    c1: GroupNormCache,
    h1: Tensor1D,
    a1: Tensor1D,
    c2: GroupNormCache,
    h3: Tensor1D,
    a2: Tensor1D,
}

impl ResBlock {
    pub fn new<R: Rng + ?Sized>(
        name: &str,
        cin: usize,
        cout: usize,
        emb_dim: usize,
        groups: usize,
        rng: &mut R,
    ) -> Result<Self, NnError> {
        Ok(ResBlock {
            gn1: GroupNorm::new(&format!("{name}.gn1"), cin, groups)?,
            conv1: Conv1d::new(&format!("{name}.conv1"), cin, cout, 3, 1, rng),
            emb_proj: Dense::new(&format!("{name}.emb"), emb_dim, cout, rng),
            gn2: GroupNorm::new(&format!("{name}.gn2"), cout, groups)?,
            conv2: Conv1d::new(&format!("{name}.conv2"), cout, cout, 3, 1, rng),
            skip: (cin != cout).then(|| Conv1d::new(&format!("{name}.skip"), cin, cout, 1, 1, rng)),
        })
    }

    /// `emb_act` is `SiLU(emb)`, shared by all blocks.
    pub fn forward(&self, x: &Tensor1D, emb_act: &[f64]) -> Result<(Tensor1D, ResBlockCache), NnError> {
        let (h1, c1) = self.gn1.forward(x)?;
        let a1 = silu(&h1);
        let mut h2 = self.conv1.forward(&a1)?;
        let e = self.emb_proj.forward(emb_act);
        let w = h2.width;
        for (o, ev) in e.iter().enumerate() {
            h2.data[o * w..(o + 1) * w].iter_mut().for_each(|v| *v += ev);
        }
        let (h3, c2) = self.gn2.forward(&h2)?;
        let a2 = silu(&h3);
        let mut out = self.conv2.forward(&a2)?;
        match &self.skip {
            Some(s) => out.add_assign(&s.forward(x)?),
            None => out.add_assign(x),
        }
        Ok((out, ResBlockCache { x: x.clone(), c1, h1, a1, c2, h3, a2 }))
    }

    /// Returns `(dL/dx, dL/d emb_act)`.
    pub fn backward(&mut self, cache: &ResBlockCache, emb_act: &[f64], dout: &Tensor1D) -> (Tensor1D, Vec<f64>) {
        let da2 = self.conv2.backward(&cache.a2, dout);
        let dh3 = silu_backward(&cache.h3, &da2);
        let dh2 = self.gn2.backward(&cache.c2, &dh3);
        let w = dh2.width;
        let de: Vec<f64> = (0..dh2.channels).map(|o| dh2.data[o * w..(o + 1) * w].iter().sum()).collect();
        let demb = self.emb_proj.backward(emb_act, &de);
        let da1 = self.conv1.backward(&cache.a1, &dh2);
        let dh1 = silu_backward(&cache.h1, &da1);
        let mut dx = self.gn1.backward(&cache.c1, &dh1);
        match &mut self.skip {
            Some(s) => dx.add_assign(&s.backward(&cache.x, dout)),
            None => dx.add_assign(dout),
        }
        (dx, demb)
    }
}

impl Module for ResBlock {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.gn1.visit(f);
        self.conv1.visit(f);
        self.emb_proj.visit(f);
        self.gn2.visit(f);
        self.conv2.visit(f);
        if let Some(s) = &self.skip {
            s.visit(f);
        }
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.gn1.visit_mut(f);
        self.conv1.visit_mut(f);
        self.emb_proj.visit_mut(f);
        self.gn2.visit_mut(f);
        self.conv2.visit_mut(f);
        if let Some(s) = &mut self.skip {
            s.visit_mut(f);
        }
    }
}

/// Single-head self-attention across positions with a residual connection.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionBlock {
    pub channels: usize,
    pub gn: GroupNorm,
    pub qkv: Dense,
    pub proj: Dense,
}

#[derive(Debug, Clone)]
pub struct AttentionCache {
    gc: GroupNormCache,
    h: Tensor1D,
    qkv: Tensor1D,
    /// Row-stochastic `[width][width]`.
    pub attn: Vec<Vec<f64>>,
    o: Tensor1D,
}

impl AttentionBlock {
    pub fn new<R: Rng + ?Sized>(name: &str, channels: usize, groups: usize, rng: &mut R) -> Result<Self, NnError> {
        Ok(AttentionBlock {
            channels,
            gn: GroupNorm::new(&format!("{name}.gn"), channels, groups)?,
            qkv: Dense::new(&format!("{name}.qkv"), channels, 3 * channels, rng),
            proj: Dense::new(&format!("{name}.proj"), channels, channels, rng),
        })
    }

    pub fn forward(&self, x: &Tensor1D) -> Result<(Tensor1D, AttentionCache), NnError> {
        let (h, gc) = self.gn.forward(x)?;
        let qkv = self.qkv.forward_positions(&h);
        let (c, w) = (self.channels, x.width);
        let scale = 1.0 / (c as f64).sqrt();
        let (q, k, v) = (&qkv.data[..c * w], &qkv.data[c * w..2 * c * w], &qkv.data[2 * c * w..]);
        let mut attn = vec![vec![0.0; w]; w];
        for (i, row) in attn.iter_mut().enumerate() {
            for (j, s) in row.iter_mut().enumerate() {
                *s = (0..c).map(|ch| q[ch * w + i] * k[ch * w + j]).sum::<f64>() * scale;
            }
            let mx = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for s in row.iter_mut() {
                *s = (*s - mx).exp();
                z += *s;
            }
            row.iter_mut().for_each(|s| *s /= z);
        }
        let mut o = Tensor1D::zeros(c, w);
        for ch in 0..c {
            for (i, row) in attn.iter().enumerate() {
                o.data[ch * w + i] = row.iter().enumerate().map(|(j, a)| a * v[ch * w + j]).sum();
            }
        }
        let mut out = self.proj.forward_positions(&o);
        out.add_assign(x);
        Ok((out, AttentionCache { gc, h, qkv, attn, o }))
    }

    pub fn backward(&mut self, cache: &AttentionCache, dout: &Tensor1D) -> Tensor1D {
        let (c, w) = (self.channels, dout.width);
        let scale = 1.0 / (c as f64).sqrt();
        let d_o = self.proj.backward_positions(&cache.o, dout);
        let qkv = &cache.qkv.data;
        let (q, k, v) = (&qkv[..c * w], &qkv[c * w..2 * c * w], &qkv[2 * c * w..]);
        let mut dqkv = Tensor1D::zeros(3 * c, w);
        let a = &cache.attn;
        for i in 0..w {
            let da: Vec<f64> = (0..w).map(|j| (0..c).map(|ch| d_o.data[ch * w + i] * v[ch * w + j]).sum()).collect();
            let dot: f64 = (0..w).map(|j| a[i][j] * da[j]).sum();
            for j in 0..w {
                let ds = a[i][j] * (da[j] - dot) * scale;
                for ch in 0..c {
                    dqkv.data[ch * w + i] += ds * k[ch * w + j];
                    dqkv.data[(c + ch) * w + j] += ds * q[ch * w + i];
                    dqkv.data[(2 * c + ch) * w + j] += a[i][j] * d_o.data[ch * w + i];
                }
            }
        }
        let dh = self.qkv.backward_positions(&cache.h, &dqkv);
        let mut dx = self.gn.backward(&cache.gc, &dh);
        dx.add_assign(dout);
        dx
    }
}

impl Module for AttentionBlock {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.gn.visit(f);
        self.qkv.visit(f);
        self.proj.visit(f);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.gn.visit_mut(f);
        self.qkv.visit_mut(f);
        self.proj.visit_mut(f);
    }
}
