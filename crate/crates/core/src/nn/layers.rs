//! Feed-forward layer stacks with hand-written reverse mode.
//!
//! A [`Sequential`] only describes topology; weights live in a flat `params`
//! slice and batch-norm running statistics in a flat `buffers` slice, both
//! owned by the caller. Every forward pass can keep a [`Tape`] that the
//! matching backward pass consumes.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::gemm;
use crate::math;

const KERNEL: usize = 4;
const TAPS: usize = KERNEL * KERNEL;
const BN_EPS: f64 = 1e-5;

/// Per-sample activation shape (channels, rows, columns).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Shape {
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub const fn new(c: usize, h: usize, w: usize) -> Self {
        Self { c, h, w }
    }

    pub const fn vector(len: usize) -> Self {
        Self { c: len, h: 1, w: 1 }
    }

    pub const fn len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn plane(&self) -> usize {
        self.h * self.w
    }
}

/// A batch of `n` samples of one shape, sample-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub n: usize,
    pub shape: Shape,
    pub data: Vec<f64>,
}

impl Batch {
    pub fn new(n: usize, shape: Shape, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * shape.len(), "batch buffer length");
        Self { n, shape, data }
    }

    pub fn zeros(n: usize, shape: Shape) -> Self {
        Self::new(n, shape, vec![0.0; n * shape.len()])
    }

    pub fn single(shape: Shape, data: Vec<f64>) -> Self {
        Self::new(1, shape, data)
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let len = self.shape.len();
        &self.data[i * len..(i + 1) * len]
    }

    pub fn sample_mut(&mut self, i: usize) -> &mut [f64] {
        let len = self.shape.len();
        &mut self.data[i * len..(i + 1) * len]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch norm normalizes with the statistics of the current batch.
    Train,
    /// Batch norm normalizes with the stored running statistics.
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Linear {
        inputs: usize,
        outputs: usize,
        weight: usize,
        bias: usize,
    },
    /// 4×4 kernel, stride 2, padding 1: halves the spatial size.
    Conv {
        cin: usize,
        cout: usize,
        weight: usize,
        bias: usize,
    },
    /// 4×4 kernel, stride 2, padding 1 transposed: doubles the spatial size.
    ConvT {
        cin: usize,
        cout: usize,
        weight: usize,
        bias: usize,
    },
    BatchNorm {
        channels: usize,
        gamma: usize,
        beta: usize,
        running: usize,
    },
    Reshape(Shape),
    Relu,
    LeakyRelu(f64),
    Tanh,
}

enum Cache {
    Input(Vec<f64>),
    Cols(Vec<f64>),
    Output(Vec<f64>),
    Norm {
        xhat: Vec<f64>,
        inv_std: Vec<f64>,
        batch: Option<(Vec<f64>, Vec<f64>)>,
    },
    Nothing,
}

/// Intermediate values recorded by a forward pass.
pub struct Tape {
    n: usize,
    caches: Vec<Cache>,
}

impl Tape {
    pub fn batch_size(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequential {
    input: Shape,
    layers: Vec<Layer>,
    shapes: Vec<Shape>,
    param_len: usize,
    buffer_len: usize,
}

pub struct SequentialBuilder {
    input: Shape,
    current: Shape,
    layers: Vec<Layer>,
    shapes: Vec<Shape>,
    param_len: usize,
    buffer_len: usize,
}

impl SequentialBuilder {
    pub fn new(input: Shape) -> Self {
        Self {
            input,
            current: input,
            layers: Vec::new(),
            shapes: Vec::new(),
            param_len: 0,
            buffer_len: 0,
        }
    }

    fn push(mut self, layer: Layer, out: Shape) -> Self {
        self.layers.push(layer);
        self.shapes.push(out);
        self.current = out;
        self
    }

    fn alloc(&mut self, len: usize) -> usize {
        let at = self.param_len;
        self.param_len += len;
        at
    }

    pub fn linear(mut self, outputs: usize) -> Self {
        let inputs = self.current.len();
        let weight = self.alloc(inputs * outputs);
        let bias = self.alloc(outputs);
        self.push(
            Layer::Linear {
                inputs,
                outputs,
                weight,
                bias,
            },
            Shape::vector(outputs),
        )
    }

    pub fn conv(mut self, cout: usize) -> Self {
        let s = self.current;
        assert!(s.h.is_multiple_of(2) && s.w.is_multiple_of(2), "conv input must have even size");
        let weight = self.alloc(cout * s.c * TAPS);
        let bias = self.alloc(cout);
        self.push(
            Layer::Conv {
                cin: s.c,
                cout,
                weight,
                bias,
            },
            Shape::new(cout, s.h / 2, s.w / 2),
        )
    }

    pub fn conv_t(mut self, cout: usize) -> Self {
        let s = self.current;
        let weight = self.alloc(s.c * cout * TAPS);
        let bias = self.alloc(cout);
        self.push(
            Layer::ConvT {
                cin: s.c,
                cout,
                weight,
                bias,
            },
            Shape::new(cout, s.h * 2, s.w * 2),
        )
    }

    pub fn batch_norm(mut self) -> Self {
        let s = self.current;
        let gamma = self.alloc(s.c);
        let beta = self.alloc(s.c);
        let running = self.buffer_len;
        self.buffer_len += 2 * s.c;
        self.push(
            Layer::BatchNorm {
                channels: s.c,
                gamma,
                beta,
                running,
            },
            s,
        )
    }

    pub fn reshape(self, shape: Shape) -> Self {
        assert_eq!(shape.len(), self.current.len(), "reshape must keep length");
        self.push(Layer::Reshape(shape), shape)
    }

    pub fn relu(self) -> Self {
        let s = self.current;
        self.push(Layer::Relu, s)
    }

    pub fn leaky_relu(self, slope: f64) -> Self {
        let s = self.current;
        self.push(Layer::LeakyRelu(slope), s)
    }

    pub fn tanh(self) -> Self {
        let s = self.current;
        self.push(Layer::Tanh, s)
    }

    pub fn build(self) -> Sequential {
        Sequential {
            input: self.input,
            layers: self.layers,
            shapes: self.shapes,
            param_len: self.param_len,
            buffer_len: self.buffer_len,
        }
    }
}

impl Sequential {
    pub fn input_shape(&self) -> Shape {
        self.input
    }

    pub fn output_shape(&self) -> Shape {
        *self.shapes.last().unwrap_or(&self.input)
    }

    pub fn param_len(&self) -> usize {
        self.param_len
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer_len
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// DCGAN initialization: weights `N(0, 0.02)`, batch-norm scale
    /// `N(1, 0.02)`, zero biases, running statistics at (0, 1).
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let mut params = vec![0.0; self.param_len];
        let mut buffers = vec![0.0; self.buffer_len];
        let normal = Normal::new(0.0, 0.02).unwrap();
        for layer in &self.layers {
            match *layer {
                Layer::Linear {
                    inputs,
                    outputs,
                    weight,
                    ..
                } => fill(&mut params[weight..weight + inputs * outputs], &normal, rng),
                Layer::Conv {
                    cin, cout, weight, ..
                }
                | Layer::ConvT {
                    cin, cout, weight, ..
                } => fill(&mut params[weight..weight + cin * cout * TAPS], &normal, rng),
                Layer::BatchNorm {
                    channels,
                    gamma,
                    running,
                    ..
                } => {
                    for g in &mut params[gamma..gamma + channels] {
                        *g = 1.0 + normal.sample(rng);
                    }
                    for v in &mut buffers[running + channels..running + 2 * channels] {
                        *v = 1.0;
                    }
                }
                _ => {}
            }
        }
        (params, buffers)
    }

    pub fn forward(
        &self,
        params: &[f64],
        buffers: &[f64],
        x: &Batch,
        mode: Mode,
    ) -> (Batch, Tape) {
        self.run(params, buffers, x, mode, true)
    }

    pub fn infer(&self, params: &[f64], buffers: &[f64], x: &Batch) -> Batch {
        self.run(params, buffers, x, Mode::Eval, false).0
    }

    fn run(
        &self,
        params: &[f64],
        buffers: &[f64],
        x: &Batch,
        mode: Mode,
        keep: bool,
    ) -> (Batch, Tape) {
        assert_eq!(x.shape.len(), self.input.len(), "input shape");
        assert_eq!(params.len(), self.param_len, "parameter length");
        let n = x.n;
        let mut cur = Batch::new(n, self.input, x.data.clone());
        let mut caches = Vec::with_capacity(if keep { self.layers.len() } else { 0 });
        for (layer, &out_shape) in self.layers.iter().zip(&self.shapes) {
            let in_shape = cur.shape;
            let (out, cache) = match *layer {
                Layer::Linear {
                    inputs,
                    outputs,
                    weight,
                    bias,
                } => {
                    let mut y = vec![0.0; n * outputs];
                    for i in 0..n {
                        y[i * outputs..(i + 1) * outputs]
                            .copy_from_slice(&params[bias..bias + outputs]);
                    }
                    gemm::abt(
                        &cur.data,
                        &params[weight..weight + inputs * outputs],
                        &mut y,
                        n,
                        inputs,
                        outputs,
                    );
                    (y, Cache::Input(cur.data))
                }
                Layer::Conv {
                    cin,
                    cout,
                    weight,
                    bias,
                } => {
                    let rows = cin * TAPS;
                    let pout = out_shape.plane();
                    let w = &params[weight..weight + cout * rows];
                    let mut y = vec![0.0; n * cout * pout];
                    let mut cols_all = if keep {
                        Vec::with_capacity(n * rows * pout)
                    } else {
                        Vec::new()
                    };
                    let mut cols = vec![0.0; rows * pout];
                    for i in 0..n {
                        im2col(cur.sample(i), in_shape, &mut cols);
                        let yi = &mut y[i * cout * pout..(i + 1) * cout * pout];
                        for co in 0..cout {
                            yi[co * pout..(co + 1) * pout].fill(params[bias + co]);
                        }
                        gemm::ab(w, &cols, yi, cout, rows, pout);
                        if keep {
                            cols_all.extend_from_slice(&cols);
                        }
                    }
                    (y, Cache::Cols(cols_all))
                }
                Layer::ConvT {
                    cin,
                    cout,
                    weight,
                    bias,
                } => {
                    let rows = cout * TAPS;
                    let pin = in_shape.plane();
                    let pout = out_shape.plane();
                    let w = &params[weight..weight + cin * rows];
                    let mut y = vec![0.0; n * cout * pout];
                    let mut cols = vec![0.0; rows * pin];
                    for i in 0..n {
                        cols.fill(0.0);
                        gemm::atb(w, cur.sample(i), &mut cols, rows, cin, pin);
                        let yi = &mut y[i * cout * pout..(i + 1) * cout * pout];
                        col2im(&cols, out_shape, yi);
                        for co in 0..cout {
                            let b = params[bias + co];
                            for v in &mut yi[co * pout..(co + 1) * pout] {
                                *v += b;
                            }
                        }
                    }
                    (y, Cache::Input(cur.data))
                }
                Layer::BatchNorm {
                    channels,
                    gamma,
                    beta,
                    running,
                } => {
                    let plane = in_shape.plane();
                    let (mean, var, batch) = match mode {
                        Mode::Train => {
                            let (m, v) = channel_stats(&cur.data, n, channels, plane);
                            (m.clone(), v.clone(), Some((m, v)))
                        }
                        Mode::Eval => (
                            buffers[running..running + channels].to_vec(),
                            buffers[running + channels..running + 2 * channels].to_vec(),
                            None,
                        ),
                    };
                    let inv_std: Vec<f64> =
                        var.iter().map(|v| 1.0 / math::sqrt(v + BN_EPS)).collect();
                    let mut xhat = cur.data;
                    let mut y = vec![0.0; xhat.len()];
                    for i in 0..n {
                        for c in 0..channels {
                            let at = (i * channels + c) * plane;
                            let (g, b) = (params[gamma + c], params[beta + c]);
                            for p in at..at + plane {
                                let h = (xhat[p] - mean[c]) * inv_std[c];
                                xhat[p] = h;
                                y[p] = g * h + b;
                            }
                        }
                    }
                    (
                        y,
                        Cache::Norm {
                            xhat,
                            inv_std,
                            batch,
                        },
                    )
                }
                Layer::Reshape(_) => (cur.data, Cache::Nothing),
                Layer::Relu => {
                    let y = cur.data.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
                    (y, Cache::Input(cur.data))
                }
                Layer::LeakyRelu(a) => {
                    let y = cur
                        .data
                        .iter()
                        .map(|&v| if v > 0.0 { v } else { a * v })
                        .collect();
                    (y, Cache::Input(cur.data))
                }
                Layer::Tanh => {
                    let y: Vec<f64> = cur.data.iter().map(|&v| math::tanh(v)).collect();
                    let cache = if keep {
                        Cache::Output(y.clone())
                    } else {
                        Cache::Nothing
                    };
                    (y, cache)
                }
            };
            if keep {
                caches.push(cache);
            }
            cur = Batch::new(n, out_shape, out);
        }
        (cur, Tape { n, caches })
    }

    /// Reverse pass. Parameter gradients are accumulated into `grads` when
    /// given; the returned batch is the gradient with respect to the input.
    pub fn backward(
        &self,
        params: &[f64],
        tape: &Tape,
        dy: Batch,
        mut grads: Option<&mut [f64]>,
    ) -> Batch {
        assert_eq!(tape.caches.len(), self.layers.len(), "tape from no-tape pass");
        let n = tape.n;
        assert_eq!(dy.n, n, "gradient batch size");
        let mut g = dy.data;
        for idx in (0..self.layers.len()).rev() {
            let in_shape = if idx == 0 {
                self.input
            } else {
                self.shapes[idx - 1]
            };
            let out_shape = self.shapes[idx];
            g = match (&self.layers[idx], &tape.caches[idx]) {
                (
                    &Layer::Linear {
                        inputs,
                        outputs,
                        weight,
                        bias,
                    },
                    Cache::Input(x),
                ) => {
                    if let Some(gr) = grads.as_deref_mut() {
                        gemm::atb(
                            &g,
                            x,
                            &mut gr[weight..weight + inputs * outputs],
                            outputs,
                            n,
                            inputs,
                        );
                        for i in 0..n {
                            for o in 0..outputs {
                                gr[bias + o] += g[i * outputs + o];
                            }
                        }
                    }
                    let mut dx = vec![0.0; n * inputs];
                    gemm::ab(
                        &g,
                        &params[weight..weight + inputs * outputs],
                        &mut dx,
                        n,
                        outputs,
                        inputs,
                    );
                    dx
                }
                (
                    &Layer::Conv {
                        cin,
                        cout,
                        weight,
                        bias,
                    },
                    Cache::Cols(cols_all),
                ) => {
                    let rows = cin * TAPS;
                    let pout = out_shape.plane();
                    let w = &params[weight..weight + cout * rows];
                    let mut dx = vec![0.0; n * in_shape.len()];
                    let mut dcols = vec![0.0; rows * pout];
                    for i in 0..n {
                        let gi = &g[i * cout * pout..(i + 1) * cout * pout];
                        let cols = &cols_all[i * rows * pout..(i + 1) * rows * pout];
                        if let Some(gr) = grads.as_deref_mut() {
                            gemm::abt(gi, cols, &mut gr[weight..weight + cout * rows], cout, pout, rows);
                            for co in 0..cout {
                                gr[bias + co] += gi[co * pout..(co + 1) * pout].iter().sum::<f64>();
                            }
                        }
                        dcols.fill(0.0);
                        gemm::atb(w, gi, &mut dcols, rows, cout, pout);
                        col2im(
                            &dcols,
                            in_shape,
                            &mut dx[i * in_shape.len()..(i + 1) * in_shape.len()],
                        );
                    }
                    dx
                }
                (
                    &Layer::ConvT {
                        cin,
                        cout,
                        weight,
                        bias,
                    },
                    Cache::Input(x),
                ) => {
                    let rows = cout * TAPS;
                    let pin = in_shape.plane();
                    let pout = out_shape.plane();
                    let w = &params[weight..weight + cin * rows];
                    let mut dx = vec![0.0; n * cin * pin];
                    let mut dcols = vec![0.0; rows * pin];
                    for i in 0..n {
                        let gi = &g[i * cout * pout..(i + 1) * cout * pout];
                        im2col(gi, out_shape, &mut dcols);
                        let xi = &x[i * cin * pin..(i + 1) * cin * pin];
                        if let Some(gr) = grads.as_deref_mut() {
                            gemm::abt(xi, &dcols, &mut gr[weight..weight + cin * rows], cin, pin, rows);
                            for co in 0..cout {
                                gr[bias + co] += gi[co * pout..(co + 1) * pout].iter().sum::<f64>();
                            }
                        }
                        gemm::ab(w, &dcols, &mut dx[i * cin * pin..(i + 1) * cin * pin], cin, rows, pin);
                    }
                    dx
                }
                (
                    &Layer::BatchNorm {
                        channels,
                        gamma,
                        beta,
                        ..
                    },
                    Cache::Norm {
                        xhat,
                        inv_std,
                        batch,
                    },
                ) => {
                    let plane = in_shape.plane();
                    let count = (n * plane) as f64;
                    let mut dx = vec![0.0; g.len()];
                    for c in 0..channels {
                        let gam = params[gamma + c];
                        let mut sum_dy = 0.0;
                        let mut sum_dy_xhat = 0.0;
                        for i in 0..n {
                            let at = (i * channels + c) * plane;
                            for p in at..at + plane {
                                sum_dy += g[p];
                                sum_dy_xhat += g[p] * xhat[p];
                            }
                        }
                        if let Some(gr) = grads.as_deref_mut() {
                            gr[gamma + c] += sum_dy_xhat;
                            gr[beta + c] += sum_dy;
                        }
                        let k = gam * inv_std[c];
                        for i in 0..n {
                            let at = (i * channels + c) * plane;
                            for p in at..at + plane {
                                dx[p] = if batch.is_some() {
                                    k * (g[p] - sum_dy / count - xhat[p] * sum_dy_xhat / count)
                                } else {
                                    k * g[p]
                                };
                            }
                        }
                    }
                    dx
                }
                (Layer::Reshape(_), _) => g,
                (Layer::Relu, Cache::Input(x)) => {
                    for (gv, &xv) in g.iter_mut().zip(x) {
                        if xv <= 0.0 {
                            *gv = 0.0;
                        }
                    }
                    g
                }
                (&Layer::LeakyRelu(a), Cache::Input(x)) => {
                    for (gv, &xv) in g.iter_mut().zip(x) {
                        if xv <= 0.0 {
                            *gv *= a;
                        }
                    }
                    g
                }
                (Layer::Tanh, Cache::Output(y)) => {
                    for (gv, &yv) in g.iter_mut().zip(y) {
                        *gv *= 1.0 - yv * yv;
                    }
                    g
                }
                _ => unreachable!("tape does not match layer"),
            };
        }
        Batch::new(n, self.input, g)
    }

    /// Blends the batch statistics recorded by a training-mode pass into the
    /// running statistics; `momentum = 1` replaces them outright.
    pub fn update_running_stats(&self, buffers: &mut [f64], tape: &Tape, momentum: f64) {
        for (idx, layer) in self.layers.iter().enumerate() {
            if let (
                &Layer::BatchNorm {
                    channels, running, ..
                },
                Some(Cache::Norm {
                    batch: Some((mean, var)),
                    ..
                }),
            ) = (layer, tape.caches.get(idx))
            {
                let count = (tape.n * self.shapes[idx].plane()) as f64;
                let unbias = if count > 1.0 { count / (count - 1.0) } else { 1.0 };
                for c in 0..channels {
                    let rm = &mut buffers[running + c];
                    *rm = (1.0 - momentum) * *rm + momentum * mean[c];
                    let rv = &mut buffers[running + channels + c];
                    *rv = (1.0 - momentum) * *rv + momentum * var[c] * unbias;
                }
            }
        }
    }
}

fn fill<R: Rng + ?Sized>(dst: &mut [f64], dist: &Normal<f64>, rng: &mut R) {
    for v in dst {
        *v = dist.sample(rng);
    }
}

fn channel_stats(x: &[f64], n: usize, channels: usize, plane: usize) -> (Vec<f64>, Vec<f64>) {
    let count = (n * plane) as f64;
    let mut mean = vec![0.0; channels];
    let mut var = vec![0.0; channels];
    for c in 0..channels {
        let mut s = 0.0;
        for i in 0..n {
            let at = (i * channels + c) * plane;
            s += x[at..at + plane].iter().sum::<f64>();
        }
        let m = s / count;
        let mut q = 0.0;
        for i in 0..n {
            let at = (i * channels + c) * plane;
            q += x[at..at + plane].iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        }
        mean[c] = m;
        var[c] = q / count;
    }
    (mean, var)
}

/// Unfolds a `c×h×w` image into `(c·16) × (h/2·w/2)` patch columns for the
/// 4×4 stride-2 pad-1 geometry.
fn im2col(src: &[f64], s: Shape, cols: &mut [f64]) {
    let (ho, wo) = (s.h / 2, s.w / 2);
    let pout = ho * wo;
    for c in 0..s.c {
        let plane = &src[c * s.h * s.w..(c + 1) * s.h * s.w];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &mut cols[((c * KERNEL + ky) * KERNEL + kx) * pout..][..pout];
                for oy in 0..ho {
                    let iy = (2 * oy + ky) as isize - 1;
                    let dst = &mut row[oy * wo..(oy + 1) * wo];
                    if iy < 0 || iy >= s.h as isize {
                        dst.fill(0.0);
                        continue;
                    }
                    let src_row = &plane[iy as usize * s.w..][..s.w];
                    for (ox, d) in dst.iter_mut().enumerate() {
                        let ix = (2 * ox + kx) as isize - 1;
                        *d = if ix < 0 || ix >= s.w as isize {
                            0.0
                        } else {
                            src_row[ix as usize]
                        };
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters patch columns back, accumulating.
fn col2im(cols: &[f64], s: Shape, dst: &mut [f64]) {
    let (ho, wo) = (s.h / 2, s.w / 2);
    let pout = ho * wo;
    for c in 0..s.c {
        let plane = &mut dst[c * s.h * s.w..(c + 1) * s.h * s.w];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &cols[((c * KERNEL + ky) * KERNEL + kx) * pout..][..pout];
                for oy in 0..ho {
                    let iy = (2 * oy + ky) as isize - 1;
                    if iy < 0 || iy >= s.h as isize {
                        continue;
                    }
                    let dst_row = &mut plane[iy as usize * s.w..][..s.w];
                    for (ox, &v) in row[oy * wo..(oy + 1) * wo].iter().enumerate() {
                        let ix = (2 * ox + kx) as isize - 1;
                        if ix >= 0 && ix < s.w as isize {
                            dst_row[ix as usize] += v;
                        }
                    }
                }
            }
        }
    }
}
