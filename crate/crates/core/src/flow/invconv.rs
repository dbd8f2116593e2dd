use rand::Rng;

use crate::error::{shape_err, Result};
use crate::linalg::{mat_inverse, Matrix};
use crate::tensor::Tensor;

use super::Direction;

/// Invertible 1×1 convolution `y = W x` at every spatial position.
#[derive(Clone, Debug, PartialEq)]
pub struct InvConvParams {
    /// `c × c` weight stored as a `[c, c, 1, 1]` kernel.
    pub weight: Tensor,
}

impl InvConvParams {
    pub fn identity(channels: usize) -> Self {
        Self::from_matrix(&Matrix::identity(channels))
    }

    /// Uniformly random orthogonal weight.
    pub fn random_orthogonal<R: Rng + ?Sized>(channels: usize, rng: &mut R) -> Self {
        Self::from_matrix(&Matrix::random_orthogonal(channels, rng))
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        let c = m.rows();
        InvConvParams {
            weight: Tensor::from_raw([c, c, 1, 1], m.data().to_vec()),
        }
    }

    pub fn channels(&self) -> usize {
        self.weight.batch()
    }

    pub fn matrix(&self) -> Matrix {
        let c = self.channels();
        Matrix::from_vec(c, c, self.weight.data().to_vec()).expect("square weight")
    }

    pub fn inverse_matrix(&self) -> Result<Matrix> {
        mat_inverse(&self.matrix())
    }
}

/// Multiplies the channel vector at every position by `m`.
pub(crate) fn mix_channels(x: &Tensor, m: &Matrix) -> Result<Tensor> {
    let [b, c, h, w] = x.shape();
    if m.cols() != c {
        return shape_err(format!("{}x{} channel mix on {c} channels", m.rows(), m.cols()));
    }
    let rows = m.rows();
    let plane = h * w;
    let mut out = vec![0.0; b * rows * plane];
    let xd = x.data();
    for bi in 0..b {
        for o in 0..rows {
            let dst = &mut out[(bi * rows + o) * plane..(bi * rows + o + 1) * plane];
            for i in 0..c {
                let f = m.get(o, i);
                let src = &xd[(bi * c + i) * plane..(bi * c + i + 1) * plane];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += f * s;
                }
            }
        }
    }
    Ok(Tensor::from_raw([b, rows, h, w], out))
}

pub fn invconv_apply(x: &Tensor, p: &InvConvParams, direction: Direction) -> Result<Tensor> {
    if x.channels() != p.channels() {
        return shape_err(format!(
            "invconv has {} channels, input has {}",
            p.channels(),
            x.channels()
        ));
    }
    let y = match direction {
        Direction::Forward => mix_channels(x, &p.matrix())?,
        Direction::Inverse => mix_channels(x, &p.inverse_matrix()?)?,
    };
    y.ensure_finite("invconv")
}
