//! Evaluation metrics: SSIM, Gram loss, content loss and reconstruction
//! error.

use std::fmt;

use crate::error::{shape_err, Result};
use crate::flow::PfnModel;
use crate::tensor::Tensor;
use crate::train::LossNet;

pub use crate::train::recon_error;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_RANGE: f64 = 1.0;

fn gaussian_window(size: usize) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let g: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Local statistics of one channel pair at every valid window position.
struct LocalStats {
    mu_a: f64,
    mu_b: f64,
    var_a: f64,
    var_b: f64,
    cov: f64,
}

fn local_stats(a: &[f64], b: &[f64], h: usize, w: usize) -> Vec<LocalStats> {
    // window shrinks to the largest odd size that fits small images
    let mut size = SSIM_WINDOW.min(h).min(w);
    if size % 2 == 0 {
        size -= 1;
    }
    let g = gaussian_window(size);
    let mut out = Vec::with_capacity((h - size + 1) * (w - size + 1));
    for y0 in 0..=h - size {
        for x0 in 0..=w - size {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (dy, gy) in g.iter().enumerate() {
                for (dx, gx) in g.iter().enumerate() {
                    let k = gy * gx;
                    let i = (y0 + dy) * w + x0 + dx;
                    let (va, vb) = (a[i], b[i]);
                    ma += k * va;
                    mb += k * vb;
                    saa += k * (va * va);
                    sbb += k * (vb * vb);
                    sab += k * (va * vb);
                }
            }
            out.push(LocalStats {
                mu_a: ma,
                mu_b: mb,
                var_a: saa - ma * ma,
                var_b: sbb - mb * mb,
                cov: sab - ma * mb,
            });
        }
    }
    out
}

fn check_pair(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return shape_err(format!("ssim operands differ: {:?} vs {:?}", a.shape(), b.shape()));
    }
    if a.height() == 0 || a.width() == 0 {
        return shape_err("ssim of an empty image");
    }
    Ok(())
}

fn mean_over_channels(a: &Tensor, b: &Tensor, f: impl Fn(&LocalStats) -> f64) -> Result<f64> {
    check_pair(a, b)?;
    let (h, w) = (a.height(), a.width());
    let mut total = 0.0;
    let mut n = 0usize;
    for bi in 0..a.batch() {
        for ci in 0..a.channels() {
            for s in local_stats(a.channel_plane(bi, ci), b.channel_plane(bi, ci), h, w) {
                total += f(&s);
                n += 1;
            }
        }
    }
    Ok(total / n as f64)
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5),
/// `K1 = 0.01`, `K2 = 0.03` and dynamic range 1.
pub fn ssim(a: &Tensor, b: &Tensor) -> Result<f64> {
    let c1 = (SSIM_K1 * SSIM_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_RANGE).powi(2);
    mean_over_channels(a, b, |s| {
        ((2.0 * s.mu_a * s.mu_b + c1) * (2.0 * s.cov + c2))
            / ((s.mu_a * s.mu_a + s.mu_b * s.mu_b + c1) * (s.var_a + s.var_b + c2))
    })
}

/// The contrast-structure factor of SSIM alone, which ignores local means.
pub fn ssim_contrast_structure(a: &Tensor, b: &Tensor) -> Result<f64> {
    let c2 = (SSIM_K2 * SSIM_RANGE).powi(2);
    mean_over_channels(a, b, |s| (2.0 * s.cov + c2) / (s.var_a + s.var_b + c2))
}

/// `φ φᵀ / (c·h·w)` per batch item, concatenated.
fn gram(f: &Tensor) -> Vec<f64> {
    let [b, c, h, w] = f.shape();
    let norm = (c * h * w) as f64;
    let mut out = Vec::with_capacity(b * c * c);
    for bi in 0..b {
        for i in 0..c {
            let pi = f.channel_plane(bi, i);
            for j in 0..c {
                let pj = f.channel_plane(bi, j);
                out.push(pi.iter().zip(pj).map(|(x, y)| x * y).sum::<f64>() / norm);
            }
        }
    }
    out
}

/// Mean over loss-network stages of the mean squared difference between
/// normalized Gram matrices.
pub fn gram_loss(a: &Tensor, b: &Tensor, net: &LossNet) -> Result<f64> {
    let fa = net.features(a)?;
    let fb = net.features(b)?;
    if fa.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (x, y) in fa.iter().zip(&fb) {
        if x.shape() != y.shape() {
            return shape_err(format!("gram features differ: {:?} vs {:?}", x.shape(), y.shape()));
        }
        let (ga, gb) = (gram(x), gram(y));
        total += ga.iter().zip(&gb).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / ga.len() as f64;
    }
    Ok(total / fa.len() as f64)
}

/// Root-mean-square distance between top-stage features of two images.
pub fn content_metric(a: &Tensor, b: &Tensor, net: &LossNet) -> Result<f64> {
    crate::train::content_loss(a, &net.top(b)?, net)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub ssim: f64,
    pub gram_loss: f64,
    pub content_loss: f64,
    pub recon_error: f64,
}

impl MetricReport {
    /// SSIM and content loss against `content`, Gram loss against `style`,
    /// reconstruction error of `content` through `model`.
    pub fn evaluate(model: &PfnModel, net: &LossNet, stylized: &Tensor, content: &Tensor, style: &Tensor) -> Result<Self> {
        Ok(MetricReport {
            ssim: ssim(stylized, content)?,
            gram_loss: gram_loss(stylized, style, net)?,
            content_loss: content_metric(stylized, content, net)?,
            recon_error: recon_error(model, content)?,
        })
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ssim={:.16e}\tgram_loss={:.16e}\tcontent_loss={:.16e}\trecon_error={:.16e}",
            self.ssim, self.gram_loss, self.content_loss, self.recon_error
        )
    }
}
