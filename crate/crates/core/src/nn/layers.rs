use rand::Rng;

use super::{Module, NnError, Param, Tensor1D};

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn silu(x: &Tensor1D) -> Tensor1D {
    x.map(|v| v * sigmoid(v))
}

/// Gradient of SiLU at input `x`.
pub fn silu_backward(x: &Tensor1D, dy: &Tensor1D) -> Tensor1D {
    let data = x
        .data
        .iter()
        .zip(&dy.data)
        .map(|(&v, &g)| {
            let s = sigmoid(v);
            g * s * (1.0 + v * (1.0 - s))
        })
        .collect();
    Tensor1D { channels: x.channels, width: x.width, data }
}

pub(crate) fn silu_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v * sigmoid(v)).collect()
}

pub(crate) fn silu_vec_backward(x: &[f64], dy: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(dy)
        .map(|(&v, &g)| {
            let s = sigmoid(v);
            g * s * (1.0 + v * (1.0 - s))
        })
        .collect()
}

/// `y = W x + b` with `W` stored `[out, in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub w: Param,
    pub b: Param,
}

impl Dense {
    pub fn new<R: Rng + ?Sized>(name: &str, input: usize, output: usize, rng: &mut R) -> Self {
        Dense {
            input,
            output,
            w: Param::fan_in(format!("{name}.w"), &[output, input], input, rng),
            b: Param::fan_in(format!("{name}.b"), &[output], input, rng),
        }
    }

    pub fn zeroed(name: &str, input: usize, output: usize) -> Self {
        Dense {
            input,
            output,
            w: Param::zeros(format!("{name}.w"), &[output, input]),
            b: Param::zeros(format!("{name}.b"), &[output]),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input);
        (0..self.output)
            .map(|o| {
                let row = &self.w.value[o * self.input..(o + 1) * self.input];
                self.b.value[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    pub fn backward(&mut self, x: &[f64], dy: &[f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.input];
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            self.b.grad[o] += g;
            let base = o * self.input;
            for i in 0..self.input {
                self.w.grad[base + i] += g * x[i];
                dx[i] += g * self.w.value[base + i];
            }
        }
        dx
    }

    /// Applies the layer independently at every position of `x`.
    pub fn forward_positions(&self, x: &Tensor1D) -> Tensor1D {
        let w = x.width;
        let mut y = Tensor1D::zeros(self.output, w);
        for o in 0..self.output {
            let out = &mut y.data[o * w..(o + 1) * w];
            out.fill(self.b.value[o]);
            let row = &self.w.value[o * self.input..(o + 1) * self.input];
            for (c, &wv) in row.iter().enumerate() {
                let xin = &x.data[c * w..(c + 1) * w];
                for (acc, &xv) in out.iter_mut().zip(xin) {
                    *acc += wv * xv;
                }
            }
        }
        y
    }

    pub fn backward_positions(&mut self, x: &Tensor1D, dy: &Tensor1D) -> Tensor1D {
        let w = x.width;
        let mut dx = Tensor1D::zeros(self.input, w);
        for o in 0..self.output {
            let g = &dy.data[o * w..(o + 1) * w];
            self.b.grad[o] += g.iter().sum::<f64>();
            let base = o * self.input;
            for c in 0..self.input {
                let xin = &x.data[c * w..(c + 1) * w];
                self.w.grad[base + c] += g.iter().zip(xin).map(|(a, b)| a * b).sum::<f64>();
                let wv = self.w.value[base + c];
                for (d, &gv) in dx.data[c * w..(c + 1) * w].iter_mut().zip(g) {
                    *d += wv * gv;
                }
            }
        }
        dx
    }
}

impl Module for Dense {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        f(&self.w);
        f(&self.b);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        f(&mut self.w);
        f(&mut self.b);
    }
}

/// 1-D convolution with "same" zero padding (`k / 2` each side) and an
/// optional stride; weights are `[out, in, k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    pub cin: usize,
    pub cout: usize,
    pub kernel: usize,
    pub stride: usize,
    pub w: Param,
    pub b: Param,
}

impl Conv1d {
    pub fn new<R: Rng + ?Sized>(
        name: &str,
        cin: usize,
        cout: usize,
        kernel: usize,
        stride: usize,
        rng: &mut R,
    ) -> Self {
        let fan = cin * kernel;
        Conv1d {
            cin,
            cout,
            kernel,
            stride,
            w: Param::fan_in(format!("{name}.w"), &[cout, cin, kernel], fan, rng),
            b: Param::fan_in(format!("{name}.b"), &[cout], fan, rng),
        }
    }

    pub fn zeroed(name: &str, cin: usize, cout: usize, kernel: usize) -> Self {
        Conv1d {
            cin,
            cout,
            kernel,
            stride: 1,
            w: Param::zeros(format!("{name}.w"), &[cout, cin, kernel]),
            b: Param::zeros(format!("{name}.b"), &[cout]),
        }
    }

    pub fn out_width(&self, width: usize) -> usize {
        let pad = self.kernel / 2;
        (width + 2 * pad - self.kernel) / self.stride + 1
    }

    /// Output positions `i` whose tap `j` lands inside the input.
    fn valid_range(&self, j: usize, win: usize, wout: usize) -> std::ops::Range<usize> {
        let (s, pad) = (self.stride, self.kernel / 2);
        let lo = if j >= pad { 0 } else { (pad - j).div_ceil(s) };
        // i*s + j - pad <= win - 1
        let hi = if win + pad > j { ((win + pad - 1 - j) / s + 1).min(wout) } else { 0 };
        lo..hi.max(lo)
    }

    pub fn forward(&self, x: &Tensor1D) -> Result<Tensor1D, NnError> {
        if x.channels != self.cin {
            return Err(NnError::ShapeMismatch(format!(
                "{} expects {} channels, got {}",
                self.w.name, self.cin, x.channels
            )));
        }
        let (win, k, s) = (x.width, self.kernel, self.stride);
        let pad = k / 2;
        let wout = self.out_width(win);
        let ranges: Vec<_> = (0..k).map(|j| self.valid_range(j, win, wout)).collect();
        let mut y = Tensor1D::zeros(self.cout, wout);
        for o in 0..self.cout {
            let out = &mut y.data[o * wout..(o + 1) * wout];
            out.fill(self.b.value[o]);
            for c in 0..self.cin {
                let xin = &x.data[c * win..(c + 1) * win];
                let wk = &self.w.value[(o * self.cin + c) * k..(o * self.cin + c + 1) * k];
                for (j, &wv) in wk.iter().enumerate() {
                    for i in ranges[j].clone() {
                        out[i] += wv * xin[i * s + j - pad];
                    }
                }
            }
        }
        Ok(y)
    }

    pub fn backward(&mut self, x: &Tensor1D, dy: &Tensor1D) -> Tensor1D {
        let (win, k, s) = (x.width, self.kernel, self.stride);
        let pad = k / 2;
        let wout = dy.width;
        let ranges: Vec<_> = (0..k).map(|j| self.valid_range(j, win, wout)).collect();
        let mut dx = Tensor1D::zeros(self.cin, win);
        for o in 0..self.cout {
            let g = &dy.data[o * wout..(o + 1) * wout];
            self.b.grad[o] += g.iter().sum::<f64>();
            for c in 0..self.cin {
                let base = (o * self.cin + c) * k;
                let xin = &x.data[c * win..(c + 1) * win];
                let dxc = &mut dx.data[c * win..(c + 1) * win];
                for j in 0..k {
                    let wv = self.w.value[base + j];
                    let mut acc = 0.0;
                    for i in ranges[j].clone() {
                        let p = i * s + j - pad;
                        acc += g[i] * xin[p];
                        dxc[p] += wv * g[i];
                    }
                    self.w.grad[base + j] += acc;
                }
            }
        }
        dx
    }
}

impl Module for Conv1d {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        f(&self.w);
        f(&self.b);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        f(&mut self.w);
        f(&mut self.b);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupNorm {
    pub channels: usize,
    pub groups: usize,
    pub eps: f64,
    pub gamma: Param,
    pub beta: Param,
}

#[derive(Debug, Clone)]
pub struct GroupNormCache {
    xhat: Tensor1D,
    rstd: Vec<f64>,
}

impl GroupNorm {
    pub fn new(name: &str, channels: usize, groups: usize) -> Result<Self, NnError> {
        if groups == 0 || channels % groups != 0 {
            return Err(NnError::ShapeMismatch(format!(
                "{name}: {channels} channels not divisible into {groups} groups"
            )));
        }
        Ok(GroupNorm {
            channels,
            groups,
            eps: 1e-5,
            gamma: Param::filled(format!("{name}.gamma"), &[channels], 1.0),
            beta: Param::zeros(format!("{name}.beta"), &[channels]),
        })
    }

    pub fn forward(&self, x: &Tensor1D) -> Result<(Tensor1D, GroupNormCache), NnError> {
        if x.channels != self.channels {
            return Err(NnError::ShapeMismatch(format!(
                "{} expects {} channels, got {}",
                self.gamma.name, self.channels, x.channels
            )));
        }
        let w = x.width;
        let cg = self.channels / self.groups;
        let n = (cg * w) as f64;
        let mut xhat = Tensor1D::zeros(x.channels, w);
        let mut y = Tensor1D::zeros(x.channels, w);
        let mut rstd = Vec::with_capacity(self.groups);
        for g in 0..self.groups {
            let span = g * cg * w..(g + 1) * cg * w;
            let seg = &x.data[span.clone()];
            let mean = seg.iter().sum::<f64>() / n;
            let var = seg.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let r = 1.0 / (var + self.eps).sqrt();
            rstd.push(r);
            for idx in span {
                let c = idx / w;
                let h = (x.data[idx] - mean) * r;
                xhat.data[idx] = h;
                y.data[idx] = self.gamma.value[c] * h + self.beta.value[c];
            }
        }
        Ok((y, GroupNormCache { xhat, rstd }))
    }

    pub fn backward(&mut self, cache: &GroupNormCache, dy: &Tensor1D) -> Tensor1D {
        let w = dy.width;
        let cg = self.channels / self.groups;
        let n = (cg * w) as f64;
        let mut dx = Tensor1D::zeros(self.channels, w);
        let mut dxhat = vec![0.0; dy.data.len()];
        for (idx, &g) in dy.data.iter().enumerate() {
            let c = idx / w;
            self.gamma.grad[c] += g * cache.xhat.data[idx];
            self.beta.grad[c] += g;
            dxhat[idx] = g * self.gamma.value[c];
        }
        for g in 0..self.groups {
            let span = g * cg * w..(g + 1) * cg * w;
            let sum: f64 = dxhat[span.clone()].iter().sum();
            let dot: f64 = span.clone().map(|i| dxhat[i] * cache.xhat.data[i]).sum();
            let r = cache.rstd[g];
            for i in span {
                dx.data[i] = r / n * (n * dxhat[i] - sum - cache.xhat.data[i] * dot);
            }
        }
        dx
    }
}

impl Module for GroupNorm {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        f(&self.gamma);
        f(&self.beta);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        f(&mut self.gamma);
        f(&mut self.beta);
    }
}
