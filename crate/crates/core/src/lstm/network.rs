//! Stacked LSTM with a linear read-out of the last hidden state, with
//! backpropagation through time over a flat parameter vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_width: usize,
    pub hidden_size: usize,
    pub num_layers: usize,
    pub output_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerSpan {
    in_width: usize,
    /// `4H x in_width`, gate blocks in order input, forget, cell, output.
    w_x: usize,
    /// `4H x H`
    w_h: usize,
    /// `4H`
    bias: usize,
}

/// Offsets of every tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    layers: Vec<LayerSpan>,
    /// `O x H`
    w_y: usize,
    b_y: usize,
    total: usize,
}

impl Layout {
    pub fn new(arch: &Architecture) -> Self {
        let h = arch.hidden_size;
        let mut off = 0;
        let mut layers = Vec::with_capacity(arch.num_layers);
        for l in 0..arch.num_layers {
            let in_width = if l == 0 { arch.input_width } else { h };
            let span = LayerSpan {
                in_width,
                w_x: off,
                w_h: off + 4 * h * in_width,
                bias: off + 4 * h * in_width + 4 * h * h,
            };
            off = span.bias + 4 * h;
            layers.push(span);
        }
        let w_y = off;
        let b_y = w_y + arch.output_size * h;
        Layout {
            layers,
            w_y,
            b_y,
            total: b_y + arch.output_size,
        }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Ranges of every gate bias in the recurrent layers.
    pub fn gate_bias_ranges(&self, hidden: usize) -> Vec<std::ops::Range<usize>> {
        self.layers.iter().map(|s| s.bias..s.bias + 4 * hidden).collect()
    }

    pub fn output_bias_range(&self) -> std::ops::Range<usize> {
        self.b_y..self.total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub arch: Architecture,
    layout: Layout,
    pub params: Vec<f64>,
}

/// Activations kept from a forward pass plus backward scratch space.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    steps: usize,
    gates: Vec<Vec<f64>>,
    cell: Vec<Vec<f64>>,
    cell_tanh: Vec<Vec<f64>>,
    hidden: Vec<Vec<f64>>,
    output: Vec<f64>,
    d_hidden: Vec<f64>,
    d_below: Vec<f64>,
    dz: Vec<f64>,
    dh_rec: Vec<f64>,
    dc_rec: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Network {
    pub fn zeros(arch: Architecture) -> Self {
        let layout = Layout::new(&arch);
        Network {
            arch,
            params: vec![0.0; layout.total],
            layout,
        }
    }

    /// Uniform weights in `±1/sqrt(H)` with forget-gate biases set to 1.
    pub fn init<R: Rng>(arch: Architecture, rng: &mut R) -> Self {
        let mut net = Network::zeros(arch);
        let k = 1.0 / (arch.hidden_size as f64).sqrt();
        for p in net.params.iter_mut() {
            *p = rng.random_range(-k..k);
        }
        let h = arch.hidden_size;
        for span in &net.layout.layers {
            for b in &mut net.params[span.bias + h..span.bias + 2 * h] {
                *b = 1.0;
            }
        }
        net
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_params(&self) -> usize {
        self.layout.total
    }

    fn prepare(&self, trace: &mut Trace, steps: usize) {
        let (h, l) = (self.arch.hidden_size, self.arch.num_layers);
        if trace.gates.len() != l || trace.steps != steps || trace.dz.len() != 4 * h {
            trace.steps = steps;
            trace.gates = vec![vec![0.0; steps * 4 * h]; l];
            trace.cell = vec![vec![0.0; steps * h]; l];
            trace.cell_tanh = vec![vec![0.0; steps * h]; l];
            trace.hidden = vec![vec![0.0; steps * h]; l];
            trace.d_hidden = vec![0.0; steps * h];
            let widest = self.layout.layers.iter().map(|s| s.in_width).max().unwrap_or(0);
            trace.d_below = vec![0.0; steps * widest];
            trace.dz = vec![0.0; 4 * h];
            trace.dh_rec = vec![0.0; h];
            trace.dc_rec = vec![0.0; h];
        }
        trace.output.resize(self.arch.output_size, 0.0);
    }

    /// Runs a `steps x input_width` row-major sequence and returns the
    /// read-out of the top layer's final hidden state.
    pub fn forward<'t>(&self, seq: &[f64], trace: &'t mut Trace) -> &'t [f64] {
        let (h, inw) = (self.arch.hidden_size, self.arch.input_width);
        assert_eq!(
            seq.len() % inw,
            0,
            "sequence length is not a multiple of the input width"
        );
        let steps = seq.len() / inw;
        assert!(steps > 0, "empty sequence");
        self.prepare(trace, steps);
        let p = &self.params;
        let mut z = vec![0.0; 4 * h];

        for (l, span) in self.layout.layers.iter().enumerate() {
            let (below, this) = trace.hidden.split_at_mut(l);
            let h_out = &mut this[0];
            let gates = &mut trace.gates[l];
            let cell = &mut trace.cell[l];
            let cell_tanh = &mut trace.cell_tanh[l];
            let w = span.in_width;
            for t in 0..steps {
                let x: &[f64] = if l == 0 {
                    &seq[t * w..(t + 1) * w]
                } else {
                    &below[l - 1][t * h..(t + 1) * h]
                };
                z.copy_from_slice(&p[span.bias..span.bias + 4 * h]);
                for (r, zr) in z.iter_mut().enumerate() {
                    let row = &p[span.w_x + r * w..span.w_x + (r + 1) * w];
                    *zr += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                }
                if t > 0 {
                    let (prev, _) = h_out.split_at(t * h);
                    let h_prev = &prev[(t - 1) * h..];
                    for (r, zr) in z.iter_mut().enumerate() {
                        let row = &p[span.w_h + r * h..span.w_h + (r + 1) * h];
                        *zr += row.iter().zip(h_prev).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
                let g = &mut gates[t * 4 * h..(t + 1) * 4 * h];
                for j in 0..h {
                    let i_g = sigmoid(z[j]);
                    let f_g = sigmoid(z[h + j]);
                    let c_g = z[2 * h + j].tanh();
                    let o_g = sigmoid(z[3 * h + j]);
                    g[j] = i_g;
                    g[h + j] = f_g;
                    g[2 * h + j] = c_g;
                    g[3 * h + j] = o_g;
                    let c_prev = if t > 0 { cell[(t - 1) * h + j] } else { 0.0 };
                    let c = f_g * c_prev + i_g * c_g;
                    let tc = c.tanh();
                    cell[t * h + j] = c;
                    cell_tanh[t * h + j] = tc;
                    h_out[t * h + j] = o_g * tc;
                }
            }
        }

        let top = &trace.hidden[self.arch.num_layers - 1][(steps - 1) * h..steps * h];
        for (o, out) in trace.output.iter_mut().enumerate() {
            let row = &p[self.layout.w_y + o * h..self.layout.w_y + (o + 1) * h];
            *out = p[self.layout.b_y + o] + row.iter().zip(top).map(|(a, b)| a * b).sum::<f64>();
        }
        &trace.output
    }

    /// Accumulates `dL/dparams` into `grad` given `dL/doutput` for the most
    /// recent `forward` on `seq`.
    pub fn backward(&self, seq: &[f64], trace: &mut Trace, d_out: &[f64], grad: &mut [f64]) {
        let h = self.arch.hidden_size;
        let steps = trace.steps;
        let p = &self.params;
        let top = self.arch.num_layers - 1;

        trace.d_hidden.iter_mut().for_each(|v| *v = 0.0);
        {
            let last = &trace.hidden[top][(steps - 1) * h..steps * h];
            for (o, d) in d_out.iter().enumerate() {
                grad[self.layout.b_y + o] += d;
                let w_row = self.layout.w_y + o * h;
                for j in 0..h {
                    grad[w_row + j] += d * last[j];
                    trace.d_hidden[(steps - 1) * h + j] += p[w_row + j] * d;
                }
            }
        }

        for (l, span) in self.layout.layers.iter().enumerate().rev() {
            let w = span.in_width;
            trace.dh_rec.iter_mut().for_each(|v| *v = 0.0);
            trace.dc_rec.iter_mut().for_each(|v| *v = 0.0);
            if l > 0 {
                trace.d_below[..steps * w].iter_mut().for_each(|v| *v = 0.0);
            }
            for t in (0..steps).rev() {
                let g = &trace.gates[l][t * 4 * h..(t + 1) * 4 * h];
                for j in 0..h {
                    let dh = trace.d_hidden[t * h + j] + trace.dh_rec[j];
                    let (i_g, f_g, c_g, o_g) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                    let tc = trace.cell_tanh[l][t * h + j];
                    let c_prev = if t > 0 { trace.cell[l][(t - 1) * h + j] } else { 0.0 };
                    let dc = trace.dc_rec[j] + dh * o_g * (1.0 - tc * tc);
                    trace.dz[j] = dc * c_g * i_g * (1.0 - i_g);
                    trace.dz[h + j] = dc * c_prev * f_g * (1.0 - f_g);
                    trace.dz[2 * h + j] = dc * i_g * (1.0 - c_g * c_g);
                    trace.dz[3 * h + j] = dh * tc * o_g * (1.0 - o_g);
                    trace.dc_rec[j] = dc * f_g;
                }

                let x: &[f64] = if l == 0 {
                    &seq[t * w..(t + 1) * w]
                } else {
                    &trace.hidden[l - 1][t * h..(t + 1) * h]
                };
                trace.dh_rec.iter_mut().for_each(|v| *v = 0.0);
                for r in 0..4 * h {
                    let dz = trace.dz[r];
                    if dz == 0.0 {
                        continue;
                    }
                    grad[span.bias + r] += dz;
                    let gx = &mut grad[span.w_x + r * w..span.w_x + (r + 1) * w];
                    for (gv, xv) in gx.iter_mut().zip(x) {
                        *gv += dz * xv;
                    }
                    if l > 0 {
                        let wx = &p[span.w_x + r * w..span.w_x + (r + 1) * w];
                        let db = &mut trace.d_below[t * w..(t + 1) * w];
                        for (d, wv) in db.iter_mut().zip(wx) {
                            *d += wv * dz;
                        }
                    }
                    let wh = &p[span.w_h + r * h..span.w_h + (r + 1) * h];
                    for (d, wv) in trace.dh_rec.iter_mut().zip(wh) {
                        *d += wv * dz;
                    }
                    if t > 0 {
                        let h_prev = &trace.hidden[l][(t - 1) * h..t * h];
                        let gh = &mut grad[span.w_h + r * h..span.w_h + (r + 1) * h];
                        for (gv, hv) in gh.iter_mut().zip(h_prev) {
                            *gv += dz * hv;
                        }
                    }
                }
            }
            if l > 0 {
                let (d_hidden, d_below) = (&mut trace.d_hidden, &trace.d_below);
                d_hidden[..steps * h].copy_from_slice(&d_below[..steps * h]);
            }
        }
    }

    /// Mean squared error over the outputs for one sequence.
    pub fn loss(&self, seq: &[f64], target: &[f64], trace: &mut Trace) -> f64 {
        let y = self.forward(seq, trace);
        y.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / target.len() as f64
    }

    /// Loss of one sequence; adds `weight * dL/dparams` into `grad`.
    pub fn loss_and_grad(&self, seq: &[f64], target: &[f64], weight: f64, trace: &mut Trace, grad: &mut [f64]) -> f64 {
        let o = target.len() as f64;
        let y = self.forward(seq, trace).to_vec();
        let loss = y.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / o;
        let d_out: Vec<f64> = y.iter().zip(target).map(|(a, b)| weight * 2.0 * (a - b) / o).collect();
        self.backward(seq, trace, &d_out, grad);
        loss
    }
}
