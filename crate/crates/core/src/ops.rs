//! Convolution and pointwise kernels shared by the flow layers, the loss
//! network and the gradient tape.

use crate::error::{shape_err, Result};
use crate::tensor::Tensor;

/// Geometry of a 2-D convolution with symmetric zero padding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeom {
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    pub const SAME3: ConvGeom = ConvGeom { stride: 1, pad: 1 };
    pub const POINTWISE: ConvGeom = ConvGeom { stride: 1, pad: 0 };

    fn out_extent(&self, input: usize, kernel: usize) -> Option<usize> {
        let padded = input + 2 * self.pad;
        if padded < kernel || self.stride == 0 {
            return None;
        }
        Some((padded - kernel) / self.stride + 1)
    }
}

fn conv_shapes(x: &Tensor, k: &Tensor, geom: ConvGeom) -> Result<[usize; 4]> {
    let [b, cin, h, w] = x.shape();
    let [cout, kcin, kh, kw] = k.shape();
    if kcin != cin {
        return shape_err(format!(
            "conv kernel expects {kcin} input channels, input has {cin}"
        ));
    }
    match (geom.out_extent(h, kh), geom.out_extent(w, kw)) {
        (Some(ho), Some(wo)) => Ok([b, cout, ho, wo]),
        _ => shape_err(format!("kernel {kh}x{kw} does not fit input {h}x{w}")),
    }
}

/// Cross-correlation `y[b,o] = bias[o] + Σ_i k[o,i] ⋆ x[b,i]`.
pub fn conv2d(x: &Tensor, k: &Tensor, bias: Option<&Tensor>, geom: ConvGeom) -> Result<Tensor> {
    let out_shape = conv_shapes(x, k, geom)?;
    let [b, cout, ho, wo] = out_shape;
    let [_, cin, h, w] = x.shape();
    let [_, _, kh, kw] = k.shape();
    if let Some(bias) = bias {
        bias.expect_shape([1, cout, 1, 1], "conv bias")?;
    }
    let xd = x.data();
    let kd = k.data();
    let mut out = vec![0.0; out_shape.iter().product()];
    let pad = geom.pad as isize;
    for bi in 0..b {
        for o in 0..cout {
            let base = bias.map_or(0.0, |t| t.data()[o]);
            let plane = &mut out[(bi * cout + o) * ho * wo..(bi * cout + o + 1) * ho * wo];
            plane.iter_mut().for_each(|v| *v = base);
            for i in 0..cin {
                let xp = &xd[(bi * cin + i) * h * w..(bi * cin + i + 1) * h * w];
                for ky in 0..kh {
                    for kx in 0..kw {
                        let kv = kd[((o * cin + i) * kh + ky) * kw + kx];
                        if kv == 0.0 {
                            continue;
                        }
                        for oy in 0..ho {
                            let iy = (oy * geom.stride) as isize + ky as isize - pad;
                            if iy < 0 || iy >= h as isize {
                                continue;
                            }
                            let row = &xp[iy as usize * w..(iy as usize + 1) * w];
                            let orow = &mut plane[oy * wo..(oy + 1) * wo];
                            for (ox, ov) in orow.iter_mut().enumerate() {
                                let ix = (ox * geom.stride) as isize + kx as isize - pad;
                                if ix >= 0 && ix < w as isize {
                                    *ov += kv * row[ix as usize];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor::from_raw(out_shape, out))
}

/// Gradients of [`conv2d`] with respect to input, kernel and bias.
pub fn conv2d_backward(
    x: &Tensor,
    k: &Tensor,
    grad_out: &Tensor,
    geom: ConvGeom,
) -> Result<(Tensor, Tensor, Tensor)> {
    let out_shape = conv_shapes(x, k, geom)?;
    grad_out.expect_shape(out_shape, "conv upstream gradient")?;
    let [b, cout, ho, wo] = out_shape;
    let [_, cin, h, w] = x.shape();
    let [_, _, kh, kw] = k.shape();
    let xd = x.data();
    let kd = k.data();
    let gd = grad_out.data();
    let mut dx = vec![0.0; x.numel()];
    let mut dk = vec![0.0; k.numel()];
    let mut db = vec![0.0; cout];
    let pad = geom.pad as isize;
    for bi in 0..b {
        for o in 0..cout {
            let gp = &gd[(bi * cout + o) * ho * wo..(bi * cout + o + 1) * ho * wo];
            db[o] += gp.iter().sum::<f64>();
            for i in 0..cin {
                let xoff = (bi * cin + i) * h * w;
                for ky in 0..kh {
                    for kx in 0..kw {
                        let kidx = ((o * cin + i) * kh + ky) * kw + kx;
                        let kv = kd[kidx];
                        let mut acc = 0.0;
                        for oy in 0..ho {
                            let iy = (oy * geom.stride) as isize + ky as isize - pad;
                            if iy < 0 || iy >= h as isize {
                                continue;
                            }
                            for ox in 0..wo {
                                let ix = (ox * geom.stride) as isize + kx as isize - pad;
                                if ix < 0 || ix >= w as isize {
                                    continue;
                                }
                                let g = gp[oy * wo + ox];
                                let xi = xoff + iy as usize * w + ix as usize;
                                acc += g * xd[xi];
                                dx[xi] += g * kv;
                            }
                        }
                        dk[kidx] += acc;
                    }
                }
            }
        }
    }
    Ok((
        Tensor::from_raw(x.shape(), dx),
        Tensor::from_raw(k.shape(), dk),
        Tensor::from_raw([1, cout, 1, 1], db),
    ))
}

/// ReLU; the subgradient at zero is zero.
pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

pub fn relu_backward(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    x.zip_with(grad_out, |v, g| if v > 0.0 { g } else { 0.0 })
}
