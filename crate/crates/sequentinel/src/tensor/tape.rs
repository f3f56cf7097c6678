//! The autodiff tape: a Wengert list of recorded operations.
//!
//! Every forward operation appends one node holding its output value and the
//! ids of its inputs. [`Tape::backward`] walks the list in exact reverse
//! insertion order and accumulates adjoints, so gradients arriving along
//! several paths through a shared subexpression add up. A tape is built per
//! forward pass, which lets sequences of any length through without padding.
//!
//! A tape is single-threaded by construction; independent tapes over the
//! same frozen parameter tensors may run on separate threads.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

/// Pointwise nonlinearities with closed-form derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul {
        a: Var,
        b: Var,
    },
    Add {
        a: Var,
        b: Var,
    },
    /// `[n, d]` plus a rank-1 `[d]` bias broadcast over the rows.
    AddRow {
        m: Var,
        bias: Var,
    },
    Mul {
        a: Var,
        b: Var,
    },
    Activation {
        x: Var,
        kind: Activation,
    },
    SoftmaxRows {
        x: Var,
    },
    GatherRows {
        table: Var,
        ids: Vec<usize>,
    },
    StackRows {
        rows: Vec<Var>,
    },
    Row {
        x: Var,
        index: usize,
    },
    /// Per-column max over the time axis; `argmax[j]` is the earliest row
    /// attaining the maximum of column `j`.
    MaxPoolTime {
        x: Var,
        argmax: Vec<usize>,
    },
    Conv1d {
        x: Var,
        kernel: Var,
        bias: Var,
        stride: usize,
    },
    Sum {
        x: Var,
    },
    Scale {
        x: Var,
        factor: f64,
    },
    Reshape {
        x: Var,
    },
    BceLoss {
        p: Var,
        target: f64,
    },
    /// Mean over rows of `-ln softmax(row)[target]`.
    CrossEntropyMeanRows {
        logits: Var,
        targets: Vec<usize>,
    },
}

#[derive(Debug)]
struct Node {
    op: Op,
    shape: Vec<usize>,
    value: Vec<f64>,
    requires_grad: bool,
}

/// Records operations during a forward pass and replays them in reverse.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
}

const BCE_CLAMP: f64 = 1e-12;

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, shape: Vec<usize>, value: Vec<f64>, requires_grad: bool) -> Var {
        debug_assert_eq!(shape.iter().product::<usize>(), value.len());
        self.nodes.push(Node {
            op,
            shape,
            value,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn node(&self, v: Var) -> &Node {
        &self.nodes[v.0]
    }

    fn needs_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.node(v).value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.node(v).shape
    }

    /// Gradient of the last `backward` target with respect to `v`, if any
    /// reached it.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    /// Registers the current value of a tensor as a tape leaf.
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push(
            Op::Leaf,
            t.shape().to_vec(),
            t.data().to_vec(),
            t.requires_grad(),
        )
    }

    /// A non-trainable leaf built from raw parts.
    pub fn constant(&mut self, shape: Vec<usize>, data: Vec<f64>) -> Result<Var> {
        let numel: usize = shape.iter().product();
        if numel != data.len() || shape.iter().any(|&d| d == 0) {
            return Err(Error::contract(format!(
                "constant: shape {shape:?} does not fit {} elements",
                data.len()
            )));
        }
        Ok(self.push(Op::Leaf, shape, data, false))
    }

    pub fn zeros(&mut self, shape: Vec<usize>) -> Var {
        let numel: usize = shape.iter().product();
        self.push(Op::Leaf, shape, vec![0.0; numel], false)
    }

    // ── forward operations ──────────────────────────────────────────────

    /// `[m, k] x [k, n] -> [m, n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::shape("matmul", sa, sb));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let value = matmul_raw(self.value(a), self.value(b), m, k, n);
        let rg = self.needs_grad(a) || self.needs_grad(b);
        Ok(self.push(Op::MatMul { a, b }, vec![m, n], value, rg))
    }

    /// Elementwise sum. Also accepts a rank-1 `[d]` bias against a rank-2
    /// `[n, d]` left operand, broadcast over the rows.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa == sb {
            let value: Vec<f64> = self
                .value(a)
                .iter()
                .zip(self.value(b))
                .map(|(x, y)| x + y)
                .collect();
            let rg = self.needs_grad(a) || self.needs_grad(b);
            return Ok(self.push(Op::Add { a, b }, sa, value, rg));
        }
        if sa.len() == 2 && sb.len() == 1 && sa[1] == sb[0] {
            let (n, d) = (sa[0], sa[1]);
            let mut value = self.value(a).to_vec();
            let bias = self.value(b);
            for r in 0..n {
                for j in 0..d {
                    value[r * d + j] += bias[j];
                }
            }
            let rg = self.needs_grad(a) || self.needs_grad(b);
            return Ok(self.push(Op::AddRow { m: a, bias: b }, sa, value, rg));
        }
        Err(Error::shape("add", &sa, &sb))
    }

    /// Hadamard product of same-shape tensors.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa != sb {
            return Err(Error::shape("mul", &sa, &sb));
        }
        let value: Vec<f64> = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x * y)
            .collect();
        let rg = self.needs_grad(a) || self.needs_grad(b);
        Ok(self.push(Op::Mul { a, b }, sa, value, rg))
    }

    pub fn activation(&mut self, x: Var, kind: Activation) -> Var {
        let shape = self.shape(x).to_vec();
        let value: Vec<f64> = self.value(x).iter().map(|&v| kind.apply(v)).collect();
        let rg = self.needs_grad(x);
        self.push(Op::Activation { x, kind }, shape, value, rg)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.activation(x, Activation::Sigmoid)
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.activation(x, Activation::Tanh)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.activation(x, Activation::Relu)
    }

    /// Row-wise softmax of a rank-2 tensor, computed with max subtraction.
    pub fn softmax_rows(&mut self, x: Var) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if shape.len() != 2 {
            return Err(Error::shape("softmax_rows", &shape, &[0, 0]));
        }
        let (n, d) = (shape[0], shape[1]);
        let xv = self.value(x);
        let mut value = vec![0.0; n * d];
        for r in 0..n {
            let row = &xv[r * d..(r + 1) * d];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for j in 0..d {
                let e = (row[j] - m).exp();
                value[r * d + j] = e;
                sum += e;
            }
            for j in 0..d {
                value[r * d + j] /= sum;
            }
        }
        let rg = self.needs_grad(x);
        Ok(self.push(Op::SoftmaxRows { x }, shape, value, rg))
    }

    /// Looks rows of `table` (`[v, d]`) up by id, producing `[ids.len(), d]`.
    /// Gradients scatter back into the looked-up rows only.
    pub fn gather_rows(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let ts = self.shape(table).to_vec();
        if ts.len() != 2 {
            return Err(Error::shape("gather_rows", &ts, &[0, 0]));
        }
        if ids.is_empty() {
            return Err(Error::contract("gather_rows: empty id list"));
        }
        let (v, d) = (ts[0], ts[1]);
        if let Some(&bad) = ids.iter().find(|&&id| id >= v) {
            return Err(Error::Vocab(format!(
                "token id {bad} out of range for table of {v} rows"
            )));
        }
        let tv = self.value(table);
        let mut value = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            value.extend_from_slice(&tv[id * d..(id + 1) * d]);
        }
        let rg = self.needs_grad(table);
        Ok(self.push(
            Op::GatherRows {
                table,
                ids: ids.to_vec(),
            },
            vec![ids.len(), d],
            value,
            rg,
        ))
    }

    /// Stacks equal-length vectors (shape `[d]` or `[1, d]`) into `[n, d]`.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::contract("stack_rows: no rows"));
        }
        let d = self.node(rows[0]).value.len();
        let mut value = Vec::with_capacity(rows.len() * d);
        let mut rg = false;
        for &r in rows {
            let node = self.node(r);
            if node.value.len() != d {
                return Err(Error::shape("stack_rows", &[d], &node.shape));
            }
            value.extend_from_slice(&node.value);
            rg |= node.requires_grad;
        }
        Ok(self.push(
            Op::StackRows {
                rows: rows.to_vec(),
            },
            vec![rows.len(), d],
            value,
            rg,
        ))
    }

    /// Extracts row `index` of a rank-2 tensor as a rank-1 vector.
    pub fn row(&mut self, x: Var, index: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if shape.len() != 2 || index >= shape[0] {
            return Err(Error::contract(format!(
                "row: index {index} invalid for shape {shape:?}"
            )));
        }
        let d = shape[1];
        let value = self.value(x)[index * d..(index + 1) * d].to_vec();
        let rg = self.needs_grad(x);
        Ok(self.push(Op::Row { x, index }, vec![d], value, rg))
    }

    /// Per-column maximum over the rows of `[t, d]`, yielding `[d]`.
    /// Ties resolve to the earliest row, which also receives the gradient.
    pub fn max_pool_time(&mut self, x: Var) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if shape.len() != 2 {
            return Err(Error::shape("max_pool_time", &shape, &[0, 0]));
        }
        let (t, d) = (shape[0], shape[1]);
        let xv = self.value(x);
        let mut value = vec![f64::NEG_INFINITY; d];
        let mut argmax = vec![0usize; d];
        for r in 0..t {
            for j in 0..d {
                let v = xv[r * d + j];
                if v > value[j] {
                    value[j] = v;
                    argmax[j] = r;
                }
            }
        }
        let rg = self.needs_grad(x);
        Ok(self.push(Op::MaxPoolTime { x, argmax }, vec![d], value, rg))
    }

    /// Valid (no padding) 1-D convolution over `[t, c_in]` with a
    /// `[w, c_in, c_out]` kernel, producing `[t_out, c_out]` where
    /// `t_out = (t - w) / stride + 1`.
    pub fn conv1d(&mut self, x: Var, kernel: Var, bias: Var, stride: usize) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let ks = self.shape(kernel).to_vec();
        let bs = self.shape(bias).to_vec();
        if xs.len() != 2 || ks.len() != 3 || xs[1] != ks[1] {
            return Err(Error::shape("conv1d", &xs, &ks));
        }
        if bs.len() != 1 || bs[0] != ks[2] {
            return Err(Error::shape("conv1d bias", &bs, &ks));
        }
        if stride == 0 {
            return Err(Error::contract("conv1d: stride must be at least 1"));
        }
        let (t, c_in) = (xs[0], xs[1]);
        let (w, c_out) = (ks[0], ks[2]);
        if t < w {
            return Err(Error::shape("conv1d input shorter than window", &xs, &ks));
        }
        let t_out = (t - w) / stride + 1;
        let xv = self.value(x);
        let kv = self.value(kernel);
        let bv = self.value(bias);
        let mut value = vec![0.0; t_out * c_out];
        for u in 0..t_out {
            let out_row = &mut value[u * c_out..(u + 1) * c_out];
            out_row.copy_from_slice(bv);
            for j in 0..w {
                let x_row = (u * stride + j) * c_in;
                for c in 0..c_in {
                    let xval = xv[x_row + c];
                    if xval == 0.0 {
                        continue;
                    }
                    let k_base = (j * c_in + c) * c_out;
                    for o in 0..c_out {
                        out_row[o] += xval * kv[k_base + o];
                    }
                }
            }
        }
        let rg = self.needs_grad(x) || self.needs_grad(kernel) || self.needs_grad(bias);
        Ok(self.push(
            Op::Conv1d {
                x,
                kernel,
                bias,
                stride,
            },
            vec![t_out, c_out],
            value,
            rg,
        ))
    }

    /// Sum of all elements, as a `[1]` scalar.
    pub fn sum(&mut self, x: Var) -> Var {
        let total: f64 = self.value(x).iter().sum();
        let rg = self.needs_grad(x);
        self.push(Op::Sum { x }, vec![1], vec![total], rg)
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let shape = self.shape(x).to_vec();
        let value: Vec<f64> = self.value(x).iter().map(|v| v * factor).collect();
        let rg = self.needs_grad(x);
        self.push(Op::Scale { x, factor }, shape, value, rg)
    }

    /// Same data, new shape. The element count must match.
    pub fn reshape(&mut self, x: Var, shape: Vec<usize>) -> Result<Var> {
        let numel: usize = shape.iter().product();
        if numel != self.value(x).len() || shape.iter().any(|&d| d == 0) {
            return Err(Error::shape("reshape", self.shape(x), &shape));
        }
        let value = self.value(x).to_vec();
        let rg = self.needs_grad(x);
        Ok(self.push(Op::Reshape { x }, shape, value, rg))
    }

    /// Binary cross-entropy of a scalar probability against a 0/1 target.
    /// The probability is clamped to `[1e-12, 1 - 1e-12]` first.
    pub fn bce_loss(&mut self, p: Var, target: f64) -> Result<Var> {
        if self.value(p).len() != 1 {
            return Err(Error::contract(format!(
                "bce_loss: probability must be scalar, got shape {:?}",
                self.shape(p)
            )));
        }
        debug_assert!(target == 0.0 || target == 1.0);
        let pc = self.value(p)[0].clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
        let loss = -(target * pc.ln() + (1.0 - target) * (1.0 - pc).ln());
        let rg = self.needs_grad(p);
        Ok(self.push(Op::BceLoss { p, target }, vec![1], vec![loss], rg))
    }

    /// Mean over the rows of `[n, v]` logits of the categorical
    /// cross-entropy `-ln softmax(row)[target]`.
    pub fn cross_entropy_mean_rows(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let shape = self.shape(logits).to_vec();
        if shape.len() != 2 || shape[0] != targets.len() {
            return Err(Error::contract(format!(
                "cross_entropy_mean_rows: logits {shape:?} vs {} targets",
                targets.len()
            )));
        }
        let (n, v) = (shape[0], shape[1]);
        if let Some(&bad) = targets.iter().find(|&&t| t >= v) {
            return Err(Error::Vocab(format!(
                "target id {bad} out of range for {v} classes"
            )));
        }
        let xv = self.value(logits);
        let mut total = 0.0;
        for (r, &tgt) in targets.iter().enumerate() {
            let row = &xv[r * v..(r + 1) * v];
            total += log_sum_exp(row) - row[tgt];
        }
        let loss = total / n as f64;
        let rg = self.needs_grad(logits);
        Ok(self.push(
            Op::CrossEntropyMeanRows {
                logits,
                targets: targets.to_vec(),
            },
            vec![1],
            vec![loss],
            rg,
        ))
    }

    // ── backward ────────────────────────────────────────────────────────

    /// Computes `d loss / d node` for every node reaching `loss`,
    /// visiting nodes in exact reverse insertion order. Gradients from
    /// multiple paths accumulate by addition.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.value(loss).len() != 1 {
            return Err(Error::contract(format!(
                "backward: loss must be scalar, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            let g = match grads[i].take() {
                Some(g) => g,
                None => continue,
            };
            self.route(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        self.grads = grads;
        Ok(())
    }

    fn accumulate(&self, grads: &mut [Option<Vec<f64>>], v: Var, f: impl FnOnce(&mut [f64])) {
        if !self.needs_grad(v) {
            return;
        }
        let slot = grads[v.0].get_or_insert_with(|| vec![0.0; self.node(v).value.len()]);
        f(slot);
    }

    #[allow(clippy::needless_range_loop)]
    fn route(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        match &self.nodes[i].op {
            Op::Leaf => {}
            Op::MatMul { a, b } => {
                let sa = self.shape(*a);
                let (m, k) = (sa[0], sa[1]);
                let n = self.shape(*b)[1];
                let av = self.value(*a);
                let bv = self.value(*b);
                // dA = dC * B^T
                self.accumulate(grads, *a, |da| {
                    for r in 0..m {
                        for p in 0..k {
                            let mut s = 0.0;
                            for j in 0..n {
                                s += g[r * n + j] * bv[p * n + j];
                            }
                            da[r * k + p] += s;
                        }
                    }
                });
                // dB = A^T * dC
                self.accumulate(grads, *b, |db| {
                    for r in 0..m {
                        for p in 0..k {
                            let a_rp = av[r * k + p];
                            if a_rp == 0.0 {
                                continue;
                            }
                            for j in 0..n {
                                db[p * n + j] += a_rp * g[r * n + j];
                            }
                        }
                    }
                });
            }
            Op::Add { a, b } => {
                self.accumulate(grads, *a, |da| axpy(da, g, 1.0));
                self.accumulate(grads, *b, |db| axpy(db, g, 1.0));
            }
            Op::AddRow { m, bias } => {
                let d = self.shape(*bias)[0];
                let rows = self.value(*m).len() / d;
                self.accumulate(grads, *m, |dm| axpy(dm, g, 1.0));
                self.accumulate(grads, *bias, |db| {
                    for r in 0..rows {
                        for j in 0..d {
                            db[j] += g[r * d + j];
                        }
                    }
                });
            }
            Op::Mul { a, b } => {
                let av = self.value(*a);
                let bv = self.value(*b);
                self.accumulate(grads, *a, |da| {
                    for (idx, da_i) in da.iter_mut().enumerate() {
                        *da_i += g[idx] * bv[idx];
                    }
                });
                self.accumulate(grads, *b, |db| {
                    for (idx, db_i) in db.iter_mut().enumerate() {
                        *db_i += g[idx] * av[idx];
                    }
                });
            }
            Op::Activation { x, kind } => {
                let y = &self.nodes[i].value;
                let xv = self.value(*x);
                let kind = *kind;
                self.accumulate(grads, *x, |dx| {
                    for idx in 0..dx.len() {
                        let d = match kind {
                            Activation::Sigmoid => y[idx] * (1.0 - y[idx]),
                            Activation::Tanh => 1.0 - y[idx] * y[idx],
                            // Derivative at exactly 0 is defined as 0.
                            Activation::Relu => {
                                if xv[idx] > 0.0 {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                        };
                        dx[idx] += g[idx] * d;
                    }
                });
            }
            Op::SoftmaxRows { x } => {
                let y = &self.nodes[i].value;
                let d = self.shape(*x)[1];
                let rows = y.len() / d;
                self.accumulate(grads, *x, |dx| {
                    for r in 0..rows {
                        let base = r * d;
                        let mut dot = 0.0;
                        for j in 0..d {
                            dot += g[base + j] * y[base + j];
                        }
                        for j in 0..d {
                            dx[base + j] += y[base + j] * (g[base + j] - dot);
                        }
                    }
                });
            }
            Op::GatherRows { table, ids } => {
                let d = self.shape(*table)[1];
                self.accumulate(grads, *table, |dt| {
                    for (r, &id) in ids.iter().enumerate() {
                        for j in 0..d {
                            dt[id * d + j] += g[r * d + j];
                        }
                    }
                });
            }
            Op::StackRows { rows } => {
                let d = g.len() / rows.len();
                for (r, &row) in rows.iter().enumerate() {
                    self.accumulate(grads, row, |dr| axpy(dr, &g[r * d..(r + 1) * d], 1.0));
                }
            }
            Op::Row { x, index } => {
                let d = g.len();
                let base = index * d;
                self.accumulate(grads, *x, |dx| {
                    for j in 0..d {
                        dx[base + j] += g[j];
                    }
                });
            }
            Op::MaxPoolTime { x, argmax } => {
                let d = g.len();
                self.accumulate(grads, *x, |dx| {
                    for j in 0..d {
                        dx[argmax[j] * d + j] += g[j];
                    }
                });
            }
            Op::Conv1d {
                x,
                kernel,
                bias,
                stride,
            } => {
                let xs = self.shape(*x);
                let ks = self.shape(*kernel);
                let c_in = xs[1];
                let (w, c_out) = (ks[0], ks[2]);
                let t_out = self.nodes[i].shape[0];
                let xv = self.value(*x);
                let kv = self.value(*kernel);
                let stride = *stride;
                self.accumulate(grads, *x, |dx| {
                    for u in 0..t_out {
                        let g_row = &g[u * c_out..(u + 1) * c_out];
                        for j in 0..w {
                            let x_row = (u * stride + j) * c_in;
                            for c in 0..c_in {
                                let k_base = (j * c_in + c) * c_out;
                                let mut s = 0.0;
                                for o in 0..c_out {
                                    s += g_row[o] * kv[k_base + o];
                                }
                                dx[x_row + c] += s;
                            }
                        }
                    }
                });
                self.accumulate(grads, *kernel, |dk| {
                    for u in 0..t_out {
                        let g_row = &g[u * c_out..(u + 1) * c_out];
                        for j in 0..w {
                            let x_row = (u * stride + j) * c_in;
                            for c in 0..c_in {
                                let xval = xv[x_row + c];
                                if xval == 0.0 {
                                    continue;
                                }
                                let k_base = (j * c_in + c) * c_out;
                                for o in 0..c_out {
                                    dk[k_base + o] += xval * g_row[o];
                                }
                            }
                        }
                    }
                });
                self.accumulate(grads, *bias, |db| {
                    for u in 0..t_out {
                        for o in 0..c_out {
                            db[o] += g[u * c_out + o];
                        }
                    }
                });
            }
            Op::Sum { x } => {
                let gv = g[0];
                self.accumulate(grads, *x, |dx| dx.iter_mut().for_each(|d| *d += gv));
            }
            Op::Scale { x, factor } => {
                let f = *factor;
                self.accumulate(grads, *x, |dx| axpy(dx, g, f));
            }
            Op::Reshape { x } => {
                self.accumulate(grads, *x, |dx| axpy(dx, g, 1.0));
            }
            Op::BceLoss { p, target } => {
                let pc = self.value(*p)[0].clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                let d = (pc - target) / (pc * (1.0 - pc));
                self.accumulate(grads, *p, |dp| dp[0] += g[0] * d);
            }
            Op::CrossEntropyMeanRows { logits, targets } => {
                let v = self.shape(*logits)[1];
                let n = targets.len();
                let xv = self.value(*logits);
                let scale = g[0] / n as f64;
                self.accumulate(grads, *logits, |dl| {
                    for (r, &tgt) in targets.iter().enumerate() {
                        let row = &xv[r * v..(r + 1) * v];
                        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let sum: f64 = row.iter().map(|&x| (x - m).exp()).sum();
                        for j in 0..v {
                            let soft = (row[j] - m).exp() / sum;
                            let indicator = if j == tgt { 1.0 } else { 0.0 };
                            dl[r * v + j] += scale * (soft - indicator);
                        }
                    }
                });
            }
        }
    }
}

fn axpy(dst: &mut [f64], src: &[f64], factor: f64) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d += factor * s;
    }
}

/// `a[m,k] * b[k,n]` in row-major order.
pub(crate) fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for r in 0..m {
        let c_row = &mut c[r * n..(r + 1) * n];
        for p in 0..k {
            let a_rp = a[r * k + p];
            if a_rp == 0.0 {
                continue;
            }
            let b_row = &b[p * n..(p + 1) * n];
            for j in 0..n {
                c_row[j] += a_rp * b_row[j];
            }
        }
    }
    c
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + row.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}
