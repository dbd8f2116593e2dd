use crate::error::{shape_err, Result};
use crate::tensor::Tensor;

use super::Direction;

/// Space-to-channel reshuffle by a factor of 2.
///
/// Input channel `c` becomes output channels `4c..4c+4`, holding the 2×2
/// block offsets in row-major order: top-left, top-right, bottom-left,
/// bottom-right.
pub fn squeeze_apply(x: &Tensor, direction: Direction) -> Result<Tensor> {
    match direction {
        Direction::Forward => squeeze(x),
        Direction::Inverse => unsqueeze(x),
    }
}

fn squeeze(x: &Tensor) -> Result<Tensor> {
    let [b, c, h, w] = x.shape();
    if h % 2 != 0 || w % 2 != 0 {
        return shape_err(format!("squeeze needs even spatial extents, got {h}x{w}"));
    }
    let (ho, wo) = (h / 2, w / 2);
    let mut out = Tensor::zeros([b, 4 * c, ho, wo]);
    for bi in 0..b {
        for ci in 0..c {
            for dy in 0..2 {
                for dx in 0..2 {
                    let oc = 4 * ci + 2 * dy + dx;
                    for y in 0..ho {
                        for xx in 0..wo {
                            let o = out.offset(bi, oc, y, xx);
                            out.data_mut()[o] = x.at(bi, ci, 2 * y + dy, 2 * xx + dx);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn unsqueeze(x: &Tensor) -> Result<Tensor> {
    let [b, c4, ho, wo] = x.shape();
    if c4 % 4 != 0 {
        return shape_err(format!("unsqueeze needs channels divisible by 4, got {c4}"));
    }
    let c = c4 / 4;
    let mut out = Tensor::zeros([b, c, 2 * ho, 2 * wo]);
    for bi in 0..b {
        for ci in 0..c {
            for dy in 0..2 {
                for dx in 0..2 {
                    let ic = 4 * ci + 2 * dy + dx;
                    for y in 0..ho {
                        for xx in 0..wo {
                            let o = out.offset(bi, ci, 2 * y + dy, 2 * xx + dx);
                            out.data_mut()[o] = x.at(bi, ic, y, xx);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
