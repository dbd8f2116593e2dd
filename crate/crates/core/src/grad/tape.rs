use crate::error::{shape_err, Error, Result};
use crate::flow::{mix_channels, pooled_moments, squeeze_apply, Direction};
use crate::linalg::{mat_inverse, Matrix};
use crate::ops::{conv2d, conv2d_backward, relu, relu_backward, ConvGeom};
use crate::tensor::Tensor;
use crate::transfer::EPS_STD;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Operation identifiers, used in diagnostics and fault injection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    Leaf,
    Add,
    Sub,
    Scale,
    Relu,
    Conv2d,
    Actnorm,
    InvConv,
    SliceChannels,
    ConcatChannels,
    Squeeze,
    Adain,
    ChannelMean,
    ChannelStd,
    L2Distance,
    RmsDistance,
    Sum,
    SumSquares,
    Dot,
}

#[derive(Clone, Debug)]
struct PooledStats {
    mean: Vec<f64>,
    std: Vec<f64>,
    clamped: Vec<bool>,
}

impl PooledStats {
    fn of(x: &Tensor) -> Self {
        let (mean, raw) = pooled_moments(x);
        let clamped = raw.iter().map(|&s| s < EPS_STD).collect();
        let std = raw.into_iter().map(|s| s.max(EPS_STD)).collect();
        PooledStats { mean, std, clamped }
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Conv2d {
        x: Var,
        kernel: Var,
        bias: Option<Var>,
        geom: ConvGeom,
    },
    Actnorm {
        x: Var,
        scale: Var,
        bias: Var,
        direction: Direction,
    },
    InvConv {
        x: Var,
        weight: Var,
        direction: Direction,
        /// `W⁻¹`, kept for the inverse direction.
        inverse: Option<Matrix>,
    },
    SliceChannels {
        x: Var,
        start: usize,
    },
    ConcatChannels(Var, Var),
    Squeeze {
        x: Var,
        direction: Direction,
    },
    Adain {
        content: Var,
        style: Var,
        content_stats: PooledStats,
        style_stats: PooledStats,
    },
    ChannelMean(Var),
    ChannelStd {
        x: Var,
        stats: PooledStats,
    },
    L2Distance(Var, Var),
    RmsDistance(Var, Var),
    Sum(Var),
    SumSquares(Var),
    Dot(Var, Var),
}

impl Op {
    fn kind(&self) -> OpKind {
        match self {
            Op::Leaf => OpKind::Leaf,
            Op::Add(..) => OpKind::Add,
            Op::Sub(..) => OpKind::Sub,
            Op::Scale(..) => OpKind::Scale,
            Op::Relu(..) => OpKind::Relu,
            Op::Conv2d { .. } => OpKind::Conv2d,
            Op::Actnorm { .. } => OpKind::Actnorm,
            Op::InvConv { .. } => OpKind::InvConv,
            Op::SliceChannels { .. } => OpKind::SliceChannels,
            Op::ConcatChannels(..) => OpKind::ConcatChannels,
            Op::Squeeze { .. } => OpKind::Squeeze,
            Op::Adain { .. } => OpKind::Adain,
            Op::ChannelMean(..) => OpKind::ChannelMean,
            Op::ChannelStd { .. } => OpKind::ChannelStd,
            Op::L2Distance(..) => OpKind::L2Distance,
            Op::RmsDistance(..) => OpKind::RmsDistance,
            Op::Sum(..) => OpKind::Sum,
            Op::SumSquares(..) => OpKind::SumSquares,
            Op::Dot(..) => OpKind::Dot,
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
    param: Option<usize>,
}

/// Append-only record of a computation for reverse-mode differentiation.
///
/// Nodes are visited in strict reverse append order during [`Tape::backward`].
/// One tape serves one training step.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    fault: Option<OpKind>,
}

fn scalar(v: f64) -> Tensor {
    Tensor::from_raw([1, 1, 1, 1], vec![v])
}

fn per_channel(values: Vec<f64>) -> Tensor {
    let c = values.len();
    Tensor::from_raw([1, c, 1, 1], values)
}

fn check_vec_shape(t: &Tensor, channels: usize, what: &str) -> Result<()> {
    t.expect_shape([1, channels, 1, 1], what)
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Test hook: scales every gradient emitted by `kind` by 1.5.
    #[doc(hidden)]
    pub fn inject_fault(&mut self, kind: OpKind) {
        self.fault = Some(kind);
    }

    fn push(&mut self, op: Op, value: Tensor, inputs: &[Var]) -> Var {
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
            param: None,
        });
        Var(self.nodes.len() - 1)
    }

    /// Trainable leaf; its gradient is reported under `index`.
    pub fn param(&mut self, index: usize, value: Tensor) -> Var {
        self.nodes.push(Node {
            op: Op::Leaf,
            value,
            needs_grad: true,
            param: Some(index),
        });
        Var(self.nodes.len() - 1)
    }

    /// Differentiable leaf that is not a parameter.
    pub fn input(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node {
            op: Op::Leaf,
            value,
            needs_grad: true,
            param: None,
        });
        Var(self.nodes.len() - 1)
    }

    /// Leaf that receives no gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node {
            op: Op::Leaf,
            value,
            needs_grad: false,
            param: None,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Value of a scalar node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.data()[0]
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).add(self.value(b))?;
        Ok(self.push(Op::Add(a, b), v, &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).sub(self.value(b))?;
        Ok(self.push(Op::Sub(a, b), v, &[a, b]))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let v = self.value(a).scale(k);
        self.push(Op::Scale(a, k), v, &[a])
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = relu(self.value(a));
        self.push(Op::Relu(a), v, &[a])
    }

    pub fn conv2d(&mut self, x: Var, kernel: Var, bias: Option<Var>, geom: ConvGeom) -> Result<Var> {
        let v = conv2d(
            self.value(x),
            self.value(kernel),
            bias.map(|b| self.value(b)),
            geom,
        )?;
        let mut inputs = vec![x, kernel];
        inputs.extend(bias);
        Ok(self.push(Op::Conv2d { x, kernel, bias, geom }, v, &inputs))
    }

    pub fn actnorm(&mut self, x: Var, scale: Var, bias: Var, direction: Direction) -> Result<Var> {
        let xv = self.value(x);
        let c = xv.channels();
        check_vec_shape(self.value(scale), c, "actnorm scale")?;
        check_vec_shape(self.value(bias), c, "actnorm bias")?;
        let w = self.value(scale).data();
        if let Some(channel) = w.iter().position(|v| v.abs() < crate::flow::MIN_SCALE) {
            return Err(Error::DegenerateScale { channel, value: w[channel] });
        }
        let bv = self.value(bias).data();
        let mut out = xv.clone();
        for bi in 0..xv.batch() {
            for ci in 0..c {
                let (k, m) = (w[ci], bv[ci]);
                let plane = out.channel_plane_mut(bi, ci);
                match direction {
                    Direction::Forward => plane.iter_mut().for_each(|v| *v = k * *v + m),
                    Direction::Inverse => plane.iter_mut().for_each(|v| *v = (*v - m) / k),
                }
            }
        }
        Ok(self.push(Op::Actnorm { x, scale, bias, direction }, out, &[x, scale, bias]))
    }

    pub fn invconv(&mut self, x: Var, weight: Var, direction: Direction) -> Result<Var> {
        let wt = self.value(weight);
        let c = wt.batch();
        wt.expect_shape([c, c, 1, 1], "invconv weight")?;
        let w = Matrix::from_vec(c, c, wt.data().to_vec())?;
        let (v, inverse) = match direction {
            Direction::Forward => (mix_channels(self.value(x), &w)?, None),
            Direction::Inverse => {
                let inv = mat_inverse(&w)?;
                (mix_channels(self.value(x), &inv)?, Some(inv))
            }
        };
        Ok(self.push(Op::InvConv { x, weight, direction, inverse }, v, &[x, weight]))
    }

    pub fn slice_channels(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        let v = self.value(x).slice_channels(start, len)?;
        Ok(self.push(Op::SliceChannels { x, start }, v, &[x]))
    }

    pub fn concat_channels(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = Tensor::concat_channels(self.value(a), self.value(b))?;
        Ok(self.push(Op::ConcatChannels(a, b), v, &[a, b]))
    }

    pub fn squeeze(&mut self, x: Var, direction: Direction) -> Result<Var> {
        let v = squeeze_apply(self.value(x), direction)?;
        Ok(self.push(Op::Squeeze { x, direction }, v, &[x]))
    }

    /// AdaIN with statistics pooled over batch and space.
    pub fn adain(&mut self, content: Var, style: Var) -> Result<Var> {
        let (cv, sv) = (self.value(content), self.value(style));
        if cv.channels() != sv.channels() {
            return shape_err(format!(
                "adain channel mismatch: content {}, style {}",
                cv.channels(),
                sv.channels()
            ));
        }
        let cs = PooledStats::of(cv);
        let ss = PooledStats::of(sv);
        let mut out = cv.clone();
        for bi in 0..cv.batch() {
            for ci in 0..cv.channels() {
                let (mc, sdc, ms, sds) = (cs.mean[ci], cs.std[ci], ss.mean[ci], ss.std[ci]);
                out.channel_plane_mut(bi, ci)
                    .iter_mut()
                    .for_each(|v| *v = sds * ((*v - mc) / sdc) + ms);
            }
        }
        let op = Op::Adain {
            content,
            style,
            content_stats: cs,
            style_stats: ss,
        };
        Ok(self.push(op, out, &[content, style]))
    }

    /// Per-channel mean as a `[1, c, 1, 1]` tensor.
    pub fn channel_mean(&mut self, x: Var) -> Var {
        let (mean, _) = pooled_moments(self.value(x));
        self.push(Op::ChannelMean(x), per_channel(mean), &[x])
    }

    /// Per-channel population deviation, clamped at `EPS_STD`.
    pub fn channel_std(&mut self, x: Var) -> Var {
        let stats = PooledStats::of(self.value(x));
        let v = per_channel(stats.std.clone());
        self.push(Op::ChannelStd { x, stats }, v, &[x])
    }

    /// `‖a − b‖₂` as a scalar.
    pub fn l2_distance(&mut self, a: Var, b: Var) -> Result<Var> {
        let d = self.value(a).sub(self.value(b))?;
        Ok(self.push(Op::L2Distance(a, b), scalar(d.sum_squares().sqrt()), &[a, b]))
    }

    /// `sqrt(mean((a − b)²))` as a scalar.
    pub fn rms_distance(&mut self, a: Var, b: Var) -> Result<Var> {
        let d = self.value(a).sub(self.value(b))?;
        let n = d.numel().max(1) as f64;
        Ok(self.push(Op::RmsDistance(a, b), scalar((d.sum_squares() / n).sqrt()), &[a, b]))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let v = scalar(self.value(x).sum());
        self.push(Op::Sum(x), v, &[x])
    }

    pub fn sum_squares(&mut self, x: Var) -> Var {
        let v = scalar(self.value(x).sum_squares());
        self.push(Op::SumSquares(x), v, &[x])
    }

    /// `Σ a ⊙ b` as a scalar.
    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).zip_with(self.value(b), |x, y| x * y)?.sum();
        Ok(self.push(Op::Dot(a, b), scalar(v), &[a, b]))
    }

    /// Reverse sweep from a scalar root.
    pub fn backward(&self, root: Var) -> Result<Gradients> {
        let root_value = &self.nodes[root.0].value;
        if root_value.numel() != 1 {
            return Err(Error::Invalid(format!(
                "backward needs a scalar root, got shape {:?}",
                root_value.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[root.0] = Some(Tensor::full(root_value.shape(), 1.0));

        for i in (0..=root.0).rev() {
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            let kind = node.op.kind();
            let contributions = self.local_backward(node, &g)?;
            grads[i] = Some(g);
            for (var, mut grad) in contributions {
                if !self.nodes[var.0].needs_grad {
                    continue;
                }
                if self.fault == Some(kind) {
                    grad = grad.scale(1.5);
                }
                if !grad.is_finite() {
                    return Err(Error::NonFinite(format!("backward of {kind:?} at node {i}")));
                }
                match &mut grads[var.0] {
                    Some(acc) => {
                        for (a, b) in acc.data_mut().iter_mut().zip(grad.data()) {
                            *a += b;
                        }
                    }
                    slot @ None => *slot = Some(grad),
                }
            }
        }

        let params = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.param.map(|p| (p, i)))
            .collect();
        Ok(Gradients { grads, params, shapes: self.nodes.iter().map(|n| n.value.shape()).collect() })
    }

    fn local_backward(&self, node: &Node, g: &Tensor) -> Result<Vec<(Var, Tensor)>> {
        let val = |v: Var| &self.nodes[v.0].value;
        Ok(match &node.op {
            Op::Leaf => vec![],
            Op::Add(a, b) => vec![(*a, g.clone()), (*b, g.clone())],
            Op::Sub(a, b) => vec![(*a, g.clone()), (*b, g.scale(-1.0))],
            Op::Scale(a, k) => vec![(*a, g.scale(*k))],
            Op::Relu(a) => vec![(*a, relu_backward(val(*a), g)?)],
            Op::Conv2d { x, kernel, bias, geom } => {
                let (dx, dk, db) = conv2d_backward(val(*x), val(*kernel), g, *geom)?;
                let mut out = vec![(*x, dx), (*kernel, dk)];
                if let Some(b) = bias {
                    out.push((*b, db));
                }
                out
            }
            Op::Actnorm { x, scale, bias, direction } => {
                let w = val(*scale).data();
                let c = w.len();
                let (mut dw, mut db) = (vec![0.0; c], vec![0.0; c]);
                let mut dx = g.clone();
                let xv = val(*x);
                for bi in 0..g.batch() {
                    for ci in 0..c {
                        let gp = g.channel_plane(bi, ci);
                        match direction {
                            Direction::Forward => {
                                let xp = xv.channel_plane(bi, ci);
                                dw[ci] += gp.iter().zip(xp).map(|(a, b)| a * b).sum::<f64>();
                                db[ci] += gp.iter().sum::<f64>();
                                dx.channel_plane_mut(bi, ci).iter_mut().for_each(|v| *v *= w[ci]);
                            }
                            Direction::Inverse => {
                                let outp = node.value.channel_plane(bi, ci);
                                dw[ci] -= gp.iter().zip(outp).map(|(a, b)| a * b).sum::<f64>() / w[ci];
                                db[ci] -= gp.iter().sum::<f64>() / w[ci];
                                dx.channel_plane_mut(bi, ci).iter_mut().for_each(|v| *v /= w[ci]);
                            }
                        }
                    }
                }
                vec![(*x, dx), (*scale, per_channel(dw)), (*bias, per_channel(db))]
            }
            Op::InvConv { x, weight, direction, inverse } => {
                let c = val(*weight).batch();
                // upstream pulled back through the linear map, and the
                // outer-product partner for the weight gradient
                let (dx, left, right, sign) = match direction {
                    Direction::Forward => {
                        let w = Matrix::from_vec(c, c, val(*weight).data().to_vec())?;
                        let dx = mix_channels(g, &w.transpose())?;
                        (dx, g.clone(), val(*x).clone(), 1.0)
                    }
                    Direction::Inverse => {
                        let inv_t = inverse.as_ref().expect("inverse saved").transpose();
                        let dy = mix_channels(g, &inv_t)?;
                        (dy.clone(), dy, node.value.clone(), -1.0)
                    }
                };
                let mut dw = vec![0.0; c * c];
                for bi in 0..g.batch() {
                    for o in 0..c {
                        let lp = left.channel_plane(bi, o);
                        for i in 0..c {
                            let rp = right.channel_plane(bi, i);
                            dw[o * c + i] += sign * lp.iter().zip(rp).map(|(a, b)| a * b).sum::<f64>();
                        }
                    }
                }
                vec![(*x, dx), (*weight, Tensor::from_raw([c, c, 1, 1], dw))]
            }
            Op::SliceChannels { x, start } => {
                let xv = val(*x);
                let mut dx = Tensor::zeros(xv.shape());
                for bi in 0..g.batch() {
                    for ci in 0..g.channels() {
                        dx.channel_plane_mut(bi, start + ci).copy_from_slice(g.channel_plane(bi, ci));
                    }
                }
                vec![(*x, dx)]
            }
            Op::ConcatChannels(a, b) => {
                let ca = val(*a).channels();
                let cb = val(*b).channels();
                vec![(*a, g.slice_channels(0, ca)?), (*b, g.slice_channels(ca, cb)?)]
            }
            Op::Squeeze { x, direction } => {
                let back = match direction {
                    Direction::Forward => Direction::Inverse,
                    Direction::Inverse => Direction::Forward,
                };
                vec![(*x, squeeze_apply(g, back)?)]
            }
            Op::Adain { content, style, content_stats, style_stats } => {
                let cv = val(*content);
                let sv = val(*style);
                let c = cv.channels();
                let nc = (cv.batch() * cv.plane()) as f64;
                let ns = (sv.batch() * sv.plane()) as f64;
                let mut dc = Tensor::zeros(cv.shape());
                let mut ds = Tensor::zeros(sv.shape());
                for ci in 0..c {
                    let (mc, sdc) = (content_stats.mean[ci], content_stats.std[ci]);
                    let (ms, sds) = (style_stats.mean[ci], style_stats.std[ci]);
                    // gradients of the style moments and of the normalized content
                    let mut d_mean_s = 0.0;
                    let mut d_std_s = 0.0;
                    let mut sum_dxhat = 0.0;
                    let mut sum_dxhat_xhat = 0.0;
                    for bi in 0..cv.batch() {
                        for (gv, xv) in g.channel_plane(bi, ci).iter().zip(cv.channel_plane(bi, ci)) {
                            let xhat = (xv - mc) / sdc;
                            d_mean_s += gv;
                            d_std_s += gv * xhat;
                            sum_dxhat += gv * sds;
                            sum_dxhat_xhat += gv * sds * xhat;
                        }
                    }
                    let mean_dxhat = sum_dxhat / nc;
                    let mean_dxhat_xhat = sum_dxhat_xhat / nc;
                    let std_active = !content_stats.clamped[ci];
                    for bi in 0..cv.batch() {
                        let gp = g.channel_plane(bi, ci).to_vec();
                        let xp = cv.channel_plane(bi, ci).to_vec();
                        for ((d, gv), xv) in dc.channel_plane_mut(bi, ci).iter_mut().zip(&gp).zip(&xp) {
                            let xhat = (xv - mc) / sdc;
                            let dxhat = gv * sds;
                            *d = if std_active {
                                (dxhat - mean_dxhat - xhat * mean_dxhat_xhat) / sdc
                            } else {
                                (dxhat - mean_dxhat) / sdc
                            };
                        }
                    }
                    let style_active = !style_stats.clamped[ci];
                    for bi in 0..sv.batch() {
                        let sp = sv.channel_plane(bi, ci).to_vec();
                        for (d, s) in ds.channel_plane_mut(bi, ci).iter_mut().zip(&sp) {
                            *d = d_mean_s / ns;
                            if style_active {
                                *d += d_std_s * (s - ms) / (ns * sds);
                            }
                        }
                    }
                }
                vec![(*content, dc), (*style, ds)]
            }
            Op::ChannelMean(x) => {
                let xv = val(*x);
                let n = (xv.batch() * xv.plane()) as f64;
                let mut dx = Tensor::zeros(xv.shape());
                for bi in 0..xv.batch() {
                    for ci in 0..xv.channels() {
                        let gc = g.data()[ci] / n;
                        dx.channel_plane_mut(bi, ci).iter_mut().for_each(|v| *v = gc);
                    }
                }
                vec![(*x, dx)]
            }
            Op::ChannelStd { x, stats } => {
                let xv = val(*x);
                let n = (xv.batch() * xv.plane()) as f64;
                let mut dx = Tensor::zeros(xv.shape());
                for ci in 0..xv.channels() {
                    if stats.clamped[ci] {
                        continue;
                    }
                    let k = g.data()[ci] / (n * stats.std[ci]);
                    let m = stats.mean[ci];
                    for bi in 0..xv.batch() {
                        let xp = xv.channel_plane(bi, ci).to_vec();
                        for (d, v) in dx.channel_plane_mut(bi, ci).iter_mut().zip(&xp) {
                            *d = k * (v - m);
                        }
                    }
                }
                vec![(*x, dx)]
            }
            Op::L2Distance(a, b) | Op::RmsDistance(a, b) => {
                let r = node.value.data()[0];
                let diff = val(*a).sub(val(*b))?;
                let denom = match node.op {
                    Op::L2Distance(..) => r,
                    _ => r * diff.numel() as f64,
                };
                let k = if r > 0.0 { g.data()[0] / denom } else { 0.0 };
                let ga = diff.scale(k);
                let gb = ga.scale(-1.0);
                vec![(*a, ga), (*b, gb)]
            }
            Op::Sum(x) => vec![(*x, Tensor::full(val(*x).shape(), g.data()[0]))],
            Op::SumSquares(x) => vec![(*x, val(*x).scale(2.0 * g.data()[0]))],
            Op::Dot(a, b) => {
                let k = g.data()[0];
                vec![(*a, val(*b).scale(k)), (*b, val(*a).scale(k))]
            }
        })
    }
}

/// Result of a reverse sweep.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    params: Vec<(usize, usize)>,
    shapes: Vec<crate::tensor::Shape>,
}

impl Gradients {
    /// Gradient with respect to any recorded value; zeros if it did not
    /// influence the root.
    pub fn wrt(&self, v: Var) -> Tensor {
        self.grads[v.0]
            .clone()
            .unwrap_or_else(|| Tensor::zeros(self.shapes[v.0]))
    }

    /// One gradient per registered parameter, ordered by index. Indices must
    /// be contiguous from zero.
    pub fn param_grads(&self) -> Result<ParamGrads> {
        let count = self.params.iter().map(|&(p, _)| p + 1).max().unwrap_or(0);
        let mut out: Vec<Option<Tensor>> = vec![None; count];
        for &(p, node) in &self.params {
            let g = self.wrt(Var(node));
            match &mut out[p] {
                Some(acc) => {
                    for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                        *a += b;
                    }
                }
                slot @ None => *slot = Some(g),
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(i, g)| g.ok_or_else(|| Error::Invalid(format!("parameter index {i} was never registered"))))
            .collect::<Result<Vec<_>>>()
            .map(ParamGrads)
    }
}

/// Gradient tensors aligned with a parameter list.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrads(pub Vec<Tensor>);

impl ParamGrads {
    pub fn iter(&self) -> impl Iterator<Item = &Tensor> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(Tensor::max_abs).fold(0.0, f64::max)
    }
}
