//! Reusable layers: embedding, LSTM cell and sequence, 1-D convolution,
//! temporal max pooling, and dense heads.
//!
//! Parameters live in plain structs of [`Tensor`]s. Before a forward pass
//! each struct is bound onto a [`Tape`] (`bind`), yielding a mirror struct
//! of [`Var`] handles that the forward functions consume. Layers hold no
//! state of their own, so frozen parameters are safe to share across
//! concurrent forward passes.
//!
//! Weight matrices initialize uniformly in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
//! The forget-gate bias starts at 1.0 to keep gradients flowing over long
//! sequences; all other biases start at zero.

use crate::error::{Error, Result};
use crate::tensor::{Activation, Tape, Tensor, Var};
use rand::Rng;

fn init_matrix<R: Rng>(rows: usize, cols: usize, fan_in: usize, rng: &mut R) -> Tensor {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Tensor::uniform(vec![rows, cols], bound, rng).with_grad()
}

// ── embedding ───────────────────────────────────────────────────────────

/// A trainable event-embedding table of shape `[vocab, d_embed]`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub table: Tensor,
}

impl Embedding {
    pub fn new<R: Rng>(vocab: usize, d_embed: usize, rng: &mut R) -> Self {
        Embedding {
            table: init_matrix(vocab, d_embed, d_embed, rng),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EmbeddingVars {
    pub table: Var,
}

/// Looks every token up in the table, producing `[t, d_embed]`.
pub fn embed(tape: &mut Tape, table: Var, tokens: &[u32]) -> Result<Var> {
    let ids: Vec<usize> = tokens.iter().map(|&t| t as usize).collect();
    tape.gather_rows(table, &ids)
}

// ── LSTM ────────────────────────────────────────────────────────────────

/// Weights of one LSTM layer: four input matrices `[d_in, d_h]`, four
/// recurrent matrices `[d_h, d_h]`, and four `[d_h]` biases.
#[derive(Clone, Debug)]
pub struct LstmParams {
    pub w_xi: Tensor,
    pub w_xf: Tensor,
    pub w_xo: Tensor,
    pub w_xc: Tensor,
    pub w_hi: Tensor,
    pub w_hf: Tensor,
    pub w_ho: Tensor,
    pub w_hc: Tensor,
    pub b_i: Tensor,
    pub b_f: Tensor,
    pub b_o: Tensor,
    pub b_c: Tensor,
}

impl LstmParams {
    pub fn new<R: Rng>(d_in: usize, d_h: usize, rng: &mut R) -> Self {
        LstmParams {
            w_xi: init_matrix(d_in, d_h, d_in, rng),
            w_xf: init_matrix(d_in, d_h, d_in, rng),
            w_xo: init_matrix(d_in, d_h, d_in, rng),
            w_xc: init_matrix(d_in, d_h, d_in, rng),
            w_hi: init_matrix(d_h, d_h, d_h, rng),
            w_hf: init_matrix(d_h, d_h, d_h, rng),
            w_ho: init_matrix(d_h, d_h, d_h, rng),
            w_hc: init_matrix(d_h, d_h, d_h, rng),
            b_i: Tensor::zeros(vec![d_h]).with_grad(),
            b_f: Tensor::full(vec![d_h], 1.0).with_grad(),
            b_o: Tensor::zeros(vec![d_h]).with_grad(),
            b_c: Tensor::zeros(vec![d_h]).with_grad(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LstmVars {
    pub w_xi: Var,
    pub w_xf: Var,
    pub w_xo: Var,
    pub w_xc: Var,
    pub w_hi: Var,
    pub w_hf: Var,
    pub w_ho: Var,
    pub w_hc: Var,
    pub b_i: Var,
    pub b_f: Var,
    pub b_o: Var,
    pub b_c: Var,
    pub d_in: usize,
    pub d_h: usize,
}

/// `activation(h W_h + x W_x + b)` on `[1, d]` rows.
fn gate(
    tape: &mut Tape,
    x: Var,
    h: Var,
    w_x: Var,
    w_h: Var,
    b: Var,
    kind: Activation,
) -> Result<Var> {
    let hx = tape.matmul(h, w_h)?;
    let xx = tape.matmul(x, w_x)?;
    let pre = tape.add(hx, xx)?;
    let pre = tape.add(pre, b)?;
    Ok(tape.activation(pre, kind))
}

/// One LSTM cell update on `[1, d]` row tensors.
fn lstm_step_rows(
    tape: &mut Tape,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    p: &LstmVars,
) -> Result<(Var, Var)> {
    let i = gate(tape, x, h_prev, p.w_xi, p.w_hi, p.b_i, Activation::Sigmoid)?;
    let f = gate(tape, x, h_prev, p.w_xf, p.w_hf, p.b_f, Activation::Sigmoid)?;
    let o = gate(tape, x, h_prev, p.w_xo, p.w_ho, p.b_o, Activation::Sigmoid)?;
    let g = gate(tape, x, h_prev, p.w_xc, p.w_hc, p.b_c, Activation::Tanh)?;
    let fc = tape.mul(f, c_prev)?;
    let ig = tape.mul(i, g)?;
    let c = tape.add(fc, ig)?;
    let tc = tape.tanh(c);
    let h = tape.mul(o, tc)?;
    Ok((h, c))
}

/// One LSTM cell update on rank-1 `[d_in]`/`[d_h]` vectors.
pub fn lstm_step(
    tape: &mut Tape,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    p: &LstmVars,
) -> Result<(Var, Var)> {
    let x = as_row(tape, x, p.d_in, "lstm_step input")?;
    let h_prev = as_row(tape, h_prev, p.d_h, "lstm_step hidden state")?;
    let c_prev = as_row(tape, c_prev, p.d_h, "lstm_step cell state")?;
    let (h, c) = lstm_step_rows(tape, x, h_prev, c_prev, p)?;
    let h = tape.reshape(h, vec![p.d_h])?;
    let c = tape.reshape(c, vec![p.d_h])?;
    Ok((h, c))
}

fn as_row(tape: &mut Tape, v: Var, d: usize, what: &str) -> Result<Var> {
    let shape = tape.shape(v).to_vec();
    match shape.as_slice() {
        [n] if *n == d => tape.reshape(v, vec![1, d]),
        [1, n] if *n == d => Ok(v),
        _ => Err(Error::contract(format!(
            "{what}: expected {d} elements, got shape {shape:?}"
        ))),
    }
}

/// Result of running an LSTM over a full sequence.
pub struct LstmOut {
    /// `[t, d_h]`, row `t` being the hidden state after step `t`.
    pub hidden: Var,
    /// The same rows individually, each `[1, d_h]`.
    pub rows: Vec<Var>,
    /// Hidden state after the final step.
    pub last_h: Var,
    /// Cell state after the final step.
    pub last_c: Var,
}

/// Iterates [`lstm_step`] left to right over `[t, d_in]` rows, starting
/// from zero states.
pub fn lstm_sequence(tape: &mut Tape, xs: Var, p: &LstmVars) -> Result<LstmOut> {
    let shape = tape.shape(xs).to_vec();
    if shape.len() != 2 || shape[1] != p.d_in {
        return Err(Error::shape("lstm_sequence", &shape, &[0, p.d_in]));
    }
    let t_len = shape[0];
    let mut h = tape.zeros(vec![1, p.d_h]);
    let mut c = tape.zeros(vec![1, p.d_h]);
    let mut rows = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let x_t = tape.row(xs, t)?;
        let x_t = tape.reshape(x_t, vec![1, p.d_in])?;
        let (h_t, c_t) = lstm_step_rows(tape, x_t, h, c, p)?;
        rows.push(h_t);
        h = h_t;
        c = c_t;
    }
    let hidden = tape.stack_rows(&rows)?;
    Ok(LstmOut {
        hidden,
        rows,
        last_h: h,
        last_c: c,
    })
}

/// Runs a stack of LSTM layers; layer `l` consumes the full hidden
/// sequence of layer `l - 1`. Returns the top layer's output.
pub fn stacked_lstm(tape: &mut Tape, xs: Var, layers: &[LstmVars]) -> Result<LstmOut> {
    if layers.is_empty() {
        return Err(Error::contract("stacked_lstm: no layers"));
    }
    let mut out = lstm_sequence(tape, xs, &layers[0])?;
    for p in &layers[1..] {
        out = lstm_sequence(tape, out.hidden, p)?;
    }
    Ok(out)
}

// ── pooling and convolution ─────────────────────────────────────────────

/// Per-dimension maximum across timesteps: `[t, d] -> [d]`.
pub fn temporal_max_pool(tape: &mut Tape, h: Var) -> Result<Var> {
    tape.max_pool_time(h)
}

/// 1-D convolution parameters: kernel `[window, c_in, c_out]` plus bias.
#[derive(Clone, Debug)]
pub struct ConvParams {
    pub kernel: Tensor,
    pub bias: Tensor,
    pub stride: usize,
}

impl ConvParams {
    pub fn new<R: Rng>(
        window: usize,
        c_in: usize,
        c_out: usize,
        stride: usize,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / ((window * c_in) as f64).sqrt();
        ConvParams {
            kernel: Tensor::uniform(vec![window, c_in, c_out], bound, rng).with_grad(),
            bias: Tensor::zeros(vec![c_out]).with_grad(),
            stride,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConvVars {
    pub kernel: Var,
    pub bias: Var,
    pub stride: usize,
}

/// Valid 1-D convolution of `[t, c_in]` into `[t_out, c_out]`.
pub fn conv1d(tape: &mut Tape, x: Var, p: &ConvVars) -> Result<Var> {
    tape.conv1d(x, p.kernel, p.bias, p.stride)
}

// ── dense ───────────────────────────────────────────────────────────────

/// Fully connected weights `[d_in, d_out]` plus bias `[d_out]`.
#[derive(Clone, Debug)]
pub struct DenseParams {
    pub w: Tensor,
    pub b: Tensor,
}

impl DenseParams {
    pub fn new<R: Rng>(d_in: usize, d_out: usize, rng: &mut R) -> Self {
        DenseParams {
            w: init_matrix(d_in, d_out, d_in, rng),
            b: Tensor::zeros(vec![d_out]).with_grad(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DenseVars {
    pub w: Var,
    pub b: Var,
}

/// Output nonlinearity of a dense layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenseActivation {
    Relu,
    Sigmoid,
    Softmax,
    None,
}

/// `activation(x W + b)`. Accepts a rank-1 `[d_in]` vector or a rank-2
/// `[n, d_in]` batch of rows and mirrors the input rank on output.
pub fn dense(tape: &mut Tape, x: Var, p: &DenseVars, act: DenseActivation) -> Result<Var> {
    let in_shape = tape.shape(x).to_vec();
    let d_in = tape.shape(p.w)[0];
    let d_out = tape.shape(p.w)[1];
    let (x2, rank1) = match in_shape.as_slice() {
        [n] if *n == d_in => (tape.reshape(x, vec![1, d_in])?, true),
        [_, m] if *m == d_in => (x, false),
        _ => return Err(Error::shape("dense", &in_shape, tape.shape(p.w))),
    };
    let mut y = tape.matmul(x2, p.w)?;
    y = tape.add(y, p.b)?;
    y = match act {
        DenseActivation::Relu => tape.relu(y),
        DenseActivation::Sigmoid => tape.sigmoid(y),
        DenseActivation::Softmax => tape.softmax_rows(y)?,
        DenseActivation::None => y,
    };
    if rank1 {
        y = tape.reshape(y, vec![d_out])?;
    }
    Ok(y)
}
