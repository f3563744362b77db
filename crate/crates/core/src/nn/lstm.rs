//! Single-layer unidirectional LSTM over batches of sequences.
//!
//! Gate order in the stacked weights is input, forget, cell, output.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::gemm;
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    input: usize,
    hidden: usize,
    offset: usize,
}

/// Hidden state and cell memory carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl RecurrentState {
    pub fn zeros(n: usize, hidden: usize) -> Self {
        Self {
            hidden: vec![0.0; n * hidden],
            cell: vec![0.0; n * hidden],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.hidden.iter().chain(&self.cell).all(|v| v.is_finite())
    }
}

struct Step {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    gates: Vec<f64>,
    c: Vec<f64>,
}

pub struct LstmTape {
    n: usize,
    steps: Vec<Step>,
}

impl Lstm {
    /// Lays the LSTM parameters out starting at `offset` in a shared buffer.
    pub fn new(input: usize, hidden: usize, offset: usize) -> Self {
        Self {
            input,
            hidden,
            offset,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn param_len(&self) -> usize {
        4 * self.hidden * (self.input + self.hidden + 1)
    }

    fn w_ih(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + 4 * self.hidden * self.input
    }

    fn w_hh(&self) -> core::ops::Range<usize> {
        let at = self.w_ih().end;
        at..at + 4 * self.hidden * self.hidden
    }

    fn bias(&self) -> core::ops::Range<usize> {
        let at = self.w_hh().end;
        at..at + 4 * self.hidden
    }

    /// Uniform `±1/√hidden` weights; forget-gate bias starts at 1.
    pub fn init<R: Rng + ?Sized>(&self, params: &mut [f64], rng: &mut R) {
        let bound = 1.0 / math::sqrt(self.hidden as f64);
        for v in &mut params[self.offset..self.offset + self.param_len()] {
            *v = rng.random_range(-bound..bound);
        }
        let b = self.bias();
        params[b.clone()].fill(0.0);
        params[b.start + self.hidden..b.start + 2 * self.hidden].fill(1.0);
    }

    /// Runs the recurrence from `state` over `xs` (each `n × input`),
    /// returning per-step hidden outputs (each `n × hidden`).
    pub fn forward(
        &self,
        params: &[f64],
        xs: &[Vec<f64>],
        n: usize,
        mut state: RecurrentState,
    ) -> (Vec<Vec<f64>>, RecurrentState, LstmTape) {
        let h = self.hidden;
        let mut outs = Vec::with_capacity(xs.len());
        let mut steps = Vec::with_capacity(xs.len());
        for x in xs {
            assert_eq!(x.len(), n * self.input, "lstm input length");
            let mut a = vec![0.0; n * 4 * h];
            for i in 0..n {
                a[i * 4 * h..(i + 1) * 4 * h].copy_from_slice(&params[self.bias()]);
            }
            gemm::abt(x, &params[self.w_ih()], &mut a, n, self.input, 4 * h);
            gemm::abt(&state.hidden, &params[self.w_hh()], &mut a, n, h, 4 * h);
            let mut c = vec![0.0; n * h];
            let mut hid = vec![0.0; n * h];
            for i in 0..n {
                let g = &mut a[i * 4 * h..(i + 1) * 4 * h];
                for j in 0..h {
                    g[j] = math::sigmoid(g[j]);
                    g[h + j] = math::sigmoid(g[h + j]);
                    g[2 * h + j] = math::tanh(g[2 * h + j]);
                    g[3 * h + j] = math::sigmoid(g[3 * h + j]);
                    let cv = g[h + j] * state.cell[i * h + j] + g[j] * g[2 * h + j];
                    c[i * h + j] = cv;
                    hid[i * h + j] = g[3 * h + j] * math::tanh(cv);
                }
            }
            steps.push(Step {
                x: x.clone(),
                h_prev: core::mem::take(&mut state.hidden),
                c_prev: core::mem::take(&mut state.cell),
                gates: a,
                c: c.clone(),
            });
            outs.push(hid.clone());
            state = RecurrentState {
                hidden: hid,
                cell: c,
            };
        }
        (outs, state, LstmTape { n, steps })
    }

    /// Backpropagation through time. `dhs[t]` is the loss gradient with
    /// respect to the step-`t` hidden output; returns input gradients.
    pub fn backward(
        &self,
        params: &[f64],
        tape: &LstmTape,
        dhs: &[Vec<f64>],
        mut grads: Option<&mut [f64]>,
    ) -> Vec<Vec<f64>> {
        let (n, h) = (tape.n, self.hidden);
        let mut dh_next = vec![0.0; n * h];
        let mut dc_next = vec![0.0; n * h];
        let mut dxs = vec![Vec::new(); tape.steps.len()];
        for t in (0..tape.steps.len()).rev() {
            let s = &tape.steps[t];
            let mut da = vec![0.0; n * 4 * h];
            for i in 0..n {
                let g = &s.gates[i * 4 * h..(i + 1) * 4 * h];
                let d = &mut da[i * 4 * h..(i + 1) * 4 * h];
                for j in 0..h {
                    let k = i * h + j;
                    let (ig, fg, cg, og) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                    let tc = math::tanh(s.c[k]);
                    let dh = dhs[t][k] + dh_next[k];
                    let dc = dc_next[k] + dh * og * (1.0 - tc * tc);
                    d[j] = dc * cg * ig * (1.0 - ig);
                    d[h + j] = dc * s.c_prev[k] * fg * (1.0 - fg);
                    d[2 * h + j] = dc * ig * (1.0 - cg * cg);
                    d[3 * h + j] = dh * tc * og * (1.0 - og);
                    dc_next[k] = dc * fg;
                }
            }
            if let Some(gr) = grads.as_deref_mut() {
                gemm::atb(&da, &s.x, &mut gr[self.w_ih()], 4 * h, n, self.input);
                gemm::atb(&da, &s.h_prev, &mut gr[self.w_hh()], 4 * h, n, h);
                let b = self.bias();
                for i in 0..n {
                    for (gb, dv) in gr[b.clone()].iter_mut().zip(&da[i * 4 * h..(i + 1) * 4 * h]) {
                        *gb += dv;
                    }
                }
            }
            let mut dx = vec![0.0; n * self.input];
            gemm::ab(&da, &params[self.w_ih()], &mut dx, n, 4 * h, self.input);
            dh_next.fill(0.0);
            gemm::ab(&da, &params[self.w_hh()], &mut dh_next, n, 4 * h, h);
            dxs[t] = dx;
        }
        dxs
    }
}
