use crate::error::{shape_err, Error, Result};
use crate::tensor::Tensor;

use super::Direction;

/// Smallest admissible `|scale|`; inversion divides by it.
pub const MIN_SCALE: f64 = 1e-6;
/// Floor applied to per-channel deviations during data-dependent init.
pub const MIN_INIT_STD: f64 = 1e-6;

/// Per-channel affine `y = scale ⊙ x + bias`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActnormParams {
    /// Shape `[1, c, 1, 1]`.
    pub scale: Tensor,
    /// Shape `[1, c, 1, 1]`.
    pub bias: Tensor,
    pub initialized: bool,
}

impl ActnormParams {
    /// Identity parameters awaiting data-dependent initialization.
    pub fn new(channels: usize) -> Self {
        ActnormParams {
            scale: Tensor::full([1, channels, 1, 1], 1.0),
            bias: Tensor::zeros([1, channels, 1, 1]),
            initialized: false,
        }
    }

    pub fn from_values(scale: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        let c = scale.len();
        let p = ActnormParams {
            scale: Tensor::from_vec([1, c, 1, 1], scale)?,
            bias: Tensor::from_vec([1, c, 1, 1], bias)?,
            initialized: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn channels(&self) -> usize {
        self.scale.channels()
    }

    pub fn validate(&self) -> Result<()> {
        for (channel, &value) in self.scale.data().iter().enumerate() {
            if value.abs() < MIN_SCALE {
                return Err(Error::DegenerateScale { channel, value });
            }
        }
        Ok(())
    }
}

pub fn actnorm_apply(x: &Tensor, p: &ActnormParams, direction: Direction) -> Result<Tensor> {
    if x.channels() != p.channels() {
        return shape_err(format!(
            "actnorm has {} channels, input has {}",
            p.channels(),
            x.channels()
        ));
    }
    p.validate()?;
    let mut out = x.clone();
    let [b, c, _, _] = x.shape();
    for bi in 0..b {
        for ci in 0..c {
            let w = p.scale.data()[ci];
            let s = p.bias.data()[ci];
            let plane = out.channel_plane_mut(bi, ci);
            match direction {
                Direction::Forward => plane.iter_mut().for_each(|v| *v = w * *v + s),
                Direction::Inverse => plane.iter_mut().for_each(|v| *v = (*v - s) / w),
            }
        }
    }
    out.ensure_finite("actnorm")
}

/// Outcome of data-dependent initialization.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InitDiagnostic {
    /// Channels whose deviation was below [`MIN_INIT_STD`] and got clamped.
    pub clamped_channels: Vec<usize>,
}

/// Per-channel mean and population deviation over batch and space.
pub(crate) fn pooled_moments(x: &Tensor) -> (Vec<f64>, Vec<f64>) {
    let [b, c, _, _] = x.shape();
    let n = (b * x.plane()) as f64;
    let mut means = vec![0.0; c];
    let mut stds = vec![0.0; c];
    for ci in 0..c {
        let mut s = 0.0;
        for bi in 0..b {
            s += x.channel_plane(bi, ci).iter().sum::<f64>();
        }
        let mean = s / n;
        let mut ss = 0.0;
        for bi in 0..b {
            ss += x
                .channel_plane(bi, ci)
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>();
        }
        means[ci] = mean;
        stds[ci] = (ss / n).sqrt();
    }
    (means, stds)
}

/// Sets `scale = 1/σ` and `bias = -μ/σ` so the batch maps to zero mean and
/// unit deviation per channel.
pub fn actnorm_init(p: &ActnormParams, batch: &Tensor) -> Result<(ActnormParams, InitDiagnostic)> {
    if p.initialized {
        return Err(Error::Invalid("actnorm is already initialized".into()));
    }
    if batch.channels() != p.channels() {
        return shape_err(format!(
            "actnorm has {} channels, batch has {}",
            p.channels(),
            batch.channels()
        ));
    }
    if batch.batch() * batch.plane() == 0 {
        return shape_err("actnorm init needs a nonempty batch");
    }
    let (means, stds) = pooled_moments(batch);
    let mut diag = InitDiagnostic::default();
    let mut scale = Vec::with_capacity(means.len());
    let mut bias = Vec::with_capacity(means.len());
    for (ci, (&mu, &sd)) in means.iter().zip(&stds).enumerate() {
        let sd = if sd < MIN_INIT_STD {
            diag.clamped_channels.push(ci);
            MIN_INIT_STD
        } else {
            sd
        };
        scale.push(1.0 / sd);
        bias.push(-mu / sd);
    }
    Ok((ActnormParams::from_values(scale, bias)?, diag))
}
