use crate::error::{shape_err, Result};
use crate::flow::pooled_moments;
use crate::tensor::Tensor;

/// Floor on per-channel deviations.
pub const EPS_STD: f64 = 1e-6;

/// Per-channel mean and deviation: the AdaIN style factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    /// Population deviation, clamped below at [`EPS_STD`].
    pub std: Vec<f64>,
}

impl FeatureStats {
    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    /// Zero mean, unit deviation.
    pub fn neutral(channels: usize) -> Self {
        FeatureStats {
            mean: vec![0.0; channels],
            std: vec![1.0; channels],
        }
    }

    pub fn max_abs_diff(&self, other: &FeatureStats) -> f64 {
        self.mean
            .iter()
            .zip(&other.mean)
            .chain(self.std.iter().zip(&other.std))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Moments per channel over batch and spatial positions.
pub fn channel_stats(f: &Tensor) -> FeatureStats {
    let (mean, std) = pooled_moments(f);
    FeatureStats {
        mean,
        std: std.into_iter().map(|s| s.max(EPS_STD)).collect(),
    }
}

fn affine_per_channel(f: &Tensor, scale: &[f64], shift: &[f64]) -> Tensor {
    let mut out = f.clone();
    let [b, c, _, _] = f.shape();
    for bi in 0..b {
        for ci in 0..c {
            let (k, m) = (scale[ci], shift[ci]);
            out.channel_plane_mut(bi, ci).iter_mut().for_each(|v| *v = *v * k + m);
        }
    }
    out
}

/// `(f - μ) / σ`.
pub fn adain_content_factor(f: &Tensor) -> Tensor {
    let s = channel_stats(f);
    standardize(f, &s)
}

fn standardize(f: &Tensor, s: &FeatureStats) -> Tensor {
    let mut out = f.clone();
    let [b, c, _, _] = f.shape();
    for bi in 0..b {
        for ci in 0..c {
            let (m, sd) = (s.mean[ci], s.std[ci]);
            out.channel_plane_mut(bi, ci).iter_mut().for_each(|v| *v = (*v - m) / sd);
        }
    }
    out
}

pub fn adain_style_factor(f: &Tensor) -> FeatureStats {
    channel_stats(f)
}

/// `σ · content + μ`.
pub fn adain_recombine(content: &Tensor, style: &FeatureStats) -> Result<Tensor> {
    if content.channels() != style.channels() {
        return shape_err(format!(
            "style factor has {} channels, content factor {}",
            style.channels(),
            content.channels()
        ));
    }
    affine_per_channel(content, &style.std, &style.mean).ensure_finite("adain recombination")
}

/// Adaptive instance normalization: content standardized, then given the
/// style's per-channel mean and deviation.
pub fn adain(f_c: &Tensor, f_s: &Tensor) -> Result<Tensor> {
    if f_c.channels() != f_s.channels() {
        return shape_err(format!(
            "adain channel mismatch: content {}, style {}",
            f_c.channels(),
            f_s.channels()
        ));
    }
    adain_with_stats(f_c, &channel_stats(f_s))
}

pub(crate) fn adain_with_stats(f_c: &Tensor, style: &FeatureStats) -> Result<Tensor> {
    let sc = channel_stats(f_c);
    let mut out = f_c.clone();
    let [b, c, _, _] = f_c.shape();
    for bi in 0..b {
        for ci in 0..c {
            let (mc, sdc) = (sc.mean[ci], sc.std[ci]);
            let (ms, sds) = (style.mean[ci], style.std[ci]);
            out.channel_plane_mut(bi, ci)
                .iter_mut()
                .for_each(|v| *v = sds * ((*v - mc) / sdc) + ms);
        }
    }
    out.ensure_finite("adain")
}
