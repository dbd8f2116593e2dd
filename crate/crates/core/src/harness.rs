//! Experiments: stylization, the repeated-stylization leak test, reverse
//! transfer, content-factor images and the architecture ablation.

use std::fmt;

use crate::error::{Error, Result};
use crate::flow::{PfnConfig, PfnModel};
use crate::metrics::{gram_loss, recon_error, ssim};
use crate::tensor::Tensor;
use crate::train::{train, PairPool, TrainConfig};
use crate::transfer::{adain_content_factor, transfer_apply, wct_content_factor, TransferKind};

pub const DEFAULT_LEAK_ROUNDS: usize = 20;

/// Project both images, transfer in latent space, blend by `alpha`, invert.
/// The result is not clamped.
pub fn stylize(model: &PfnModel, kind: TransferKind, content: &Tensor, style: &Tensor, alpha: f64) -> Result<Tensor> {
    model.check_input(content)?;
    model.check_input(style)?;
    let f_c = model.forward(content)?;
    let f_s = model.forward(style)?;
    model.inverse(&transfer_apply(kind, &f_c, &f_s, alpha)?)
}

fn require_unbiased(kind: TransferKind) -> Result<()> {
    if kind.is_unbiased() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{kind} has no content/style factorization")))
    }
}

/// Per-round similarity to the first stylization.
#[derive(Clone, Debug, PartialEq)]
pub struct LeakReport {
    pub kind: TransferKind,
    /// `ssim[k]` compares round `k + 1` with round 1.
    pub ssim: Vec<f64>,
    /// `drift[k] = ‖out_{k+1} − out_1‖∞`.
    pub drift: Vec<f64>,
    /// Output of the last round.
    pub last: Tensor,
}

impl LeakReport {
    pub fn rounds(&self) -> usize {
        self.drift.len()
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }
}

impl fmt::Display for LeakReport {
    /// Tab-separated with a one-line header.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "round\tssim\tdrift")?;
        for (k, (s, d)) in self.ssim.iter().zip(&self.drift).enumerate() {
            writeln!(f, "{}\t{:.16e}\t{:.16e}", k + 1, s, d)?;
        }
        Ok(())
    }
}

/// Stylizes repeatedly, feeding each output back as the next content with the
/// style fixed.
pub fn leak_test(model: &PfnModel, kind: TransferKind, content: &Tensor, style: &Tensor, rounds: usize) -> Result<LeakReport> {
    if rounds == 0 {
        return Err(Error::Invalid("leak test needs at least one round".into()));
    }
    let first = stylize(model, kind, content, style, 1.0)?;
    let mut report = LeakReport {
        kind,
        ssim: vec![1.0],
        drift: vec![0.0],
        last: first.clone(),
    };
    for _ in 1..rounds {
        let next = stylize(model, kind, &report.last, style, 1.0)?;
        report.ssim.push(ssim(&next, &first)?);
        report.drift.push(next.max_abs_diff(&first));
        report.last = next;
    }
    Ok(report)
}

/// Stylizes `content` with `style`, then stylizes the result with the
/// original content as style. Returns `(stylized, recovered)`.
pub fn reverse_transfer(model: &PfnModel, kind: TransferKind, content: &Tensor, style: &Tensor) -> Result<(Tensor, Tensor)> {
    require_unbiased(kind)?;
    let stylized = stylize(model, kind, content, style, 1.0)?;
    let recovered = stylize(model, kind, &stylized, content, 1.0)?;
    Ok((stylized, recovered))
}

/// Content factor of the latent, recombined with the neutral style factor
/// (zero mean with unit deviation, or identity covariance) and inverted.
pub fn content_factor_image(model: &PfnModel, kind: TransferKind, content: &Tensor) -> Result<Tensor> {
    require_unbiased(kind)?;
    model.check_input(content)?;
    let f = model.forward(content)?;
    let factor = match kind {
        TransferKind::Adain => adain_content_factor(&f),
        _ => wct_content_factor(&f)?,
    };
    model.inverse(&factor)
}

/// Images used to score each ablation row.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    pub contents: Vec<Tensor>,
    pub styles: Vec<Tensor>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub name: String,
    pub latent_channels: usize,
    pub param_count: usize,
    pub recon_error: f64,
    pub ssim: f64,
    pub gram_loss: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl fmt::Display for AblationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "arch\tlatent_channels\tparams\trecon_error\tssim\tgram_loss")?;
        for r in &self.rows {
            writeln!(
                f,
                "{}\t{}\t{}\t{:.16e}\t{:.16e}\t{:.16e}",
                r.name, r.latent_channels, r.param_count, r.recon_error, r.ssim, r.gram_loss
            )?;
        }
        Ok(())
    }
}

/// Trains every configuration with the same seed and data, then scores
/// AdaIN stylization of each eval pair.
pub fn ablation_run(configs: &[PfnConfig], eval: &EvalSet, cfg: &TrainConfig) -> Result<AblationTable> {
    if !configs.is_empty() && (eval.contents.is_empty() || eval.contents.len() != eval.styles.len()) {
        return Err(Error::Invalid("eval set needs equally many content and style images".into()));
    }
    let mut table = AblationTable::default();
    for &config in configs {
        let model = PfnModel::new(config, cfg.seed)?;
        let mut pool = PairPool::new(eval.contents.clone(), eval.styles.clone(), cfg.seed)?;
        let trained = train(model, cfg, &mut pool)?.checkpoint.model;
        let net = cfg.lossnet(config.in_channels);
        let (mut recon, mut ssim_sum, mut gram_sum) = (0.0f64, 0.0, 0.0);
        for (c, s) in eval.contents.iter().zip(&eval.styles) {
            let out = stylize(&trained, TransferKind::Adain, c, s, 1.0)?;
            recon = recon.max(recon_error(&trained, c)?);
            ssim_sum += ssim(&out, c)?;
            gram_sum += gram_loss(&out, s, &net)?;
        }
        let n = eval.contents.len() as f64;
        table.rows.push(AblationRow {
            name: config.name(),
            latent_channels: config.latent_channels(),
            param_count: trained.param_count(),
            recon_error: recon,
            ssim: ssim_sum / n,
            gram_loss: gram_sum / n,
        });
    }
    Ok(table)
}

/// The four architectures compared in the ablation.
pub fn ablation_configs(in_shape: [usize; 3], hidden: usize) -> Vec<PfnConfig> {
    [(8, 2), (8, 1), (16, 1), (4, 4)]
        .into_iter()
        .map(|(f, b)| PfnConfig::new(f, b, in_shape).with_hidden(hidden))
        .collect()
}
