//! A single LSTM cell step, forward and backward.
//!
//! Gate rows are laid out as `[input; forget; candidate; output]`, each of
//! height `hidden`.

use rand::Rng;

use super::tensor::{sigmoid, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w_x: Matrix,
    pub w_h: Matrix,
    /// Column vector of height `4 * hidden`.
    pub b: Matrix,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams {
            w_x: Matrix::zeros(4 * hidden, input),
            w_h: Matrix::zeros(4 * hidden, hidden),
            b: Matrix::zeros(4 * hidden, 1),
        }
    }

    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (hidden as f64).sqrt();
        let mut b = Matrix::uniform(4 * hidden, 1, scale, rng);
        forget_bias(&mut b.data, hidden);
        LstmParams {
            w_x: Matrix::uniform(4 * hidden, input, scale, rng),
            w_h: Matrix::uniform(4 * hidden, hidden, scale, rng),
            b,
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.cols
    }
}

/// Shifts the forget-gate bias up by one so early training keeps memory.
pub fn forget_bias(b: &mut [f64], hidden: usize) {
    for v in &mut b[hidden..2 * hidden] {
        *v += 1.0;
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Clone, Debug)]
pub struct StepCache {
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Post-activation gates `[i; f; g; o]`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

/// Runs one step given the pre-activation `z`, which must already contain
/// every input contribution and the bias but not the recurrent term.
pub fn step(mut z: Vec<f64>, w_h: &Matrix, h_prev: &[f64], c_prev: &[f64]) -> StepCache {
    let hid = w_h.cols;
    w_h.mul_vec_add(h_prev, &mut z);
    for v in &mut z[..2 * hid] {
        *v = sigmoid(*v);
    }
    for v in &mut z[2 * hid..3 * hid] {
        *v = v.tanh();
    }
    for v in &mut z[3 * hid..] {
        *v = sigmoid(*v);
    }
    let mut c = vec![0.0; hid];
    let mut tanh_c = vec![0.0; hid];
    let mut h = vec![0.0; hid];
    for k in 0..hid {
        let (i, f, g, o) = (z[k], z[hid + k], z[2 * hid + k], z[3 * hid + k]);
        c[k] = f * c_prev[k] + i * g;
        tanh_c[k] = c[k].tanh();
        h[k] = o * tanh_c[k];
    }
    StepCache {
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates: z,
        c,
        tanh_c,
        h,
    }
}

/// Backward through one step. `dh` and `dc` are the gradients flowing into
/// this step's outputs. Returns the pre-activation gradient `dz` and the
/// gradient for `c_prev`; the caller turns `dz` into weight and input
/// gradients.
pub fn step_backward(cache: &StepCache, dh: &[f64], dc: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let hid = cache.h.len();
    let g = &cache.gates;
    let mut dz = vec![0.0; 4 * hid];
    let mut dc_prev = vec![0.0; hid];
    for k in 0..hid {
        let (i, f, gg, o) = (g[k], g[hid + k], g[2 * hid + k], g[3 * hid + k]);
        let tc = cache.tanh_c[k];
        let d_o = dh[k] * tc;
        let dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
        let di = dct * gg;
        let dg = dct * i;
        let df = dct * cache.c_prev[k];
        dc_prev[k] = dct * f;
        dz[k] = di * i * (1.0 - i);
        dz[hid + k] = df * f * (1.0 - f);
        dz[2 * hid + k] = dg * (1.0 - gg * gg);
        dz[3 * hid + k] = d_o * o * (1.0 - o);
    }
    (dz, dc_prev)
}
