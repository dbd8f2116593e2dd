//! Desk-scale training: content and style losses measured by a frozen random
//! loss network, AdaIN inside the loop, Adam updates.

mod adam;
mod data;
mod loss;
mod lossnet;

pub use adam::{decayed_lr, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use data::{synth_content, synth_style, synthetic_pairs, PairPool, PairSource, SyntheticPairs};
pub use loss::{content_loss, style_loss};
pub use lossnet::{LossNet, Stage, LOSSNET_GEOM, LOSSNET_WIDTHS};

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::flow::PfnModel;
use crate::grad::{backward, register_params, tape_forward, tape_inverse, Tape, Var};
use crate::io::Checkpoint;
use crate::tensor::Tensor;
use crate::transfer::adain;

/// Deviation used when redrawing couplings for the content-loss control.
pub const CONTROL_COUPLING_STD: f64 = 0.2;

/// Mixed into the training seed to derive the loss network seed.
const LOSSNET_SEED_SALT: u64 = 0x4c05_5e7a;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_decay: f64,
    pub lambda_c: f64,
    pub lambda_s: f64,
    pub seed: u64,
    pub crop: usize,
    /// Save a checkpoint every this many steps; 0 disables.
    pub checkpoint_every: usize,
    pub checkpoint_path: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 2000,
            batch_size: 2,
            lr: 1e-4,
            lr_decay: 5e-5,
            lambda_c: 0.1,
            lambda_s: 1.0,
            seed: 0,
            crop: 32,
            checkpoint_every: 0,
            checkpoint_path: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.to_string()));
        if self.batch_size == 0 || self.crop == 0 {
            return bad("batch size and crop must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return bad("learning rate must be positive and decay non-negative");
        }
        if !(self.lambda_c >= 0.0 && self.lambda_s >= 0.0 && self.lambda_c.is_finite() && self.lambda_s.is_finite()) {
            return bad("loss weights must be finite and non-negative");
        }
        if self.checkpoint_every > 0 && self.checkpoint_path.is_none() {
            return bad("checkpoint_every needs a checkpoint path");
        }
        Ok(())
    }

    pub fn lossnet(&self, in_channels: usize) -> LossNet {
        LossNet::new(in_channels, self.seed ^ LOSSNET_SEED_SALT)
    }
}

/// Losses of one step, measured before its update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based.
    pub step: usize,
    pub content: f64,
    pub style: f64,
    pub total: f64,
    /// `‖inverse(forward(x)) − x‖∞` over the step's content batch.
    pub recon_error: f64,
}

impl StepRecord {
    /// `step<TAB>L_c<TAB>L_s<TAB>L_total`, 17 significant digits.
    pub fn log_line(&self) -> String {
        format!("{}\t{:.16e}\t{:.16e}\t{:.16e}", self.step, self.content, self.style, self.total)
    }
}

/// Mean content and style losses of one batch without updating anything.
pub fn evaluate_losses(model: &PfnModel, net: &LossNet, content: &Tensor, style: &Tensor) -> Result<(f64, f64)> {
    let mut tape = Tape::new();
    let params = register_params(&mut tape, model);
    let (lc, ls) = batch_losses(&mut tape, model, &params, net, content, style)?;
    Ok((tape.scalar(lc), tape.scalar(ls)))
}

/// Records the mean content and style losses over the batch, one pair at a
/// time.
fn batch_losses(
    tape: &mut Tape,
    model: &PfnModel,
    params: &[Var],
    net: &LossNet,
    content: &Tensor,
    style: &Tensor,
) -> Result<(Var, Var)> {
    if content.shape() != style.shape() {
        return Err(Error::Shape(format!(
            "content batch {:?} and style batch {:?} differ",
            content.shape(),
            style.shape()
        )));
    }
    let b = content.batch();
    let mut acc: Option<(Var, Var)> = None;
    for i in 0..b {
        let (c, s) = (content.batch_item(i)?, style.batch_item(i)?);
        let target = adain(&net.top(&c)?, &net.top(&s)?)?;
        let style_feats = net.features(&s)?;
        let cv = tape.constant(c);
        let sv = tape.constant(s);
        let fc = tape_forward(tape, model, params, cv)?;
        let fs = tape_forward(tape, model, params, sv)?;
        let fcs = tape.adain(fc, fs)?;
        let image = tape_inverse(tape, model, params, fcs)?;
        let feats = net.features_on_tape(tape, image)?;
        let lc = loss::content_loss_on_tape(tape, &feats, &target)?;
        let ls = loss::style_loss_on_tape(tape, &feats, &style_feats)?;
        acc = Some(match acc {
            None => (lc, ls),
            Some((a, b)) => (tape.add(a, lc)?, tape.add(b, ls)?),
        });
    }
    let (lc, ls) = acc.ok_or_else(|| Error::Invalid("empty batch".into()))?;
    let k = 1.0 / b as f64;
    Ok((tape.scale(lc, k), tape.scale(ls, k)))
}

/// Loss nodes of one batch on a tape.
#[derive(Clone, Copy, Debug)]
pub struct Objective {
    pub content: Var,
    pub style: Var,
    /// `λ_c · content + λ_s · style`.
    pub total: Var,
}

/// Records the training objective with `params` standing for the model's
/// parameters, in [`PfnModel::params`] order.
pub fn objective_on_tape(
    tape: &mut Tape,
    model: &PfnModel,
    params: &[Var],
    net: &LossNet,
    content: &Tensor,
    style: &Tensor,
    cfg: &TrainConfig,
) -> Result<Objective> {
    let (lc, ls) = batch_losses(tape, model, params, net, content, style)?;
    let wc = tape.scale(lc, cfg.lambda_c);
    let ws = tape.scale(ls, cfg.lambda_s);
    let total = tape.add(wc, ws)?;
    Ok(Objective { content: lc, style: ls, total })
}

/// Copy of `model` with every coupling tensor redrawn from `N(0, std²)`.
pub fn rerandomize_couplings(model: &PfnModel, std: f64, seed: u64) -> PfnModel {
    let mut out = model.clone();
    let mut rng = crate::seeded_rng(seed);
    for layer in out.layers_mut() {
        if let crate::flow::FlowLayer::Coupling(p) = layer {
            p.randomize(std, &mut rng);
        }
    }
    out
}

/// `‖inverse(forward(x)) − x‖∞`.
pub fn recon_error(model: &PfnModel, image: &Tensor) -> Result<f64> {
    Ok(model.inverse(&model.forward(image)?)?.max_abs_diff(image))
}

/// One optimization step on a content/style batch. Pending actnorms are
/// initialized from the batch first.
pub fn train_step(
    model: &mut PfnModel,
    net: &LossNet,
    content: &Tensor,
    style: &Tensor,
    cfg: &TrainConfig,
    adam: &mut AdamState,
) -> Result<StepRecord> {
    if !model.is_initialized() {
        model.initialize(&Tensor::stack(&[content.clone(), style.clone()])?)?;
    }
    let recon = recon_error(model, content)?;
    let mut tape = Tape::new();
    let params = register_params(&mut tape, model);
    let Objective { content: lc, style: ls, total } =
        objective_on_tape(&mut tape, model, &params, net, content, style, cfg)?;
    let step = adam.step as usize + 1;
    let record = StepRecord {
        step,
        content: tape.scalar(lc),
        style: tape.scalar(ls),
        total: tape.scalar(total),
        recon_error: recon,
    };
    if !record.total.is_finite() {
        return Err(Error::NonFinite(format!(
            "training loss at step {step} (content {}, style {})",
            record.content, record.style
        )));
    }
    let grads = backward(&tape, total)?;
    let lr = decayed_lr(cfg.lr, cfg.lr_decay, adam.step);
    adam.update(&mut model.params_mut(), &grads, lr)?;
    Ok(record)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub log: Vec<StepRecord>,
}

/// Runs `cfg.iterations` steps, drawing `cfg.batch_size` pairs per step.
pub fn train(model: PfnModel, cfg: &TrainConfig, source: &mut dyn PairSource) -> Result<TrainOutcome> {
    train_with(model, cfg, source, |_, _| Ok(()))
}

/// [`train`] with a callback after every step.
pub fn train_with(
    mut model: PfnModel,
    cfg: &TrainConfig,
    source: &mut dyn PairSource,
    mut on_step: impl FnMut(&StepRecord, &PfnModel) -> Result<()>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let net = cfg.lossnet(model.config().in_channels);
    let mut adam = AdamState::for_params(&model.params());
    let mut log = Vec::with_capacity(cfg.iterations);
    let draw = |source: &mut dyn PairSource| -> Result<(Tensor, Tensor)> {
        let (mut cs, mut ss) = (Vec::new(), Vec::new());
        for _ in 0..cfg.batch_size {
            let (c, s) = source.next_pair(cfg.crop)?;
            cs.push(c);
            ss.push(s);
        }
        Ok((Tensor::stack(&cs)?, Tensor::stack(&ss)?))
    };
    // pending actnorms are initialized from the first batch, which is then
    // also the first training batch
    let mut pending = None;
    if !model.is_initialized() {
        let (c, s) = draw(source)?;
        model.initialize(&Tensor::stack(&[c.clone(), s.clone()])?)?;
        pending = Some((c, s));
    }
    for _ in 0..cfg.iterations {
        let (c, s) = match pending.take() {
            Some(batch) => batch,
            None => draw(source)?,
        };
        let record = train_step(&mut model, &net, &c, &s, cfg, &mut adam)?;
        on_step(&record, &model)?;
        if cfg.checkpoint_every > 0 && record.step % cfg.checkpoint_every == 0 {
            if let Some(path) = &cfg.checkpoint_path {
                Checkpoint::new(model.clone()).save(path)?;
            }
        }
        log.push(record);
    }
    Ok(TrainOutcome {
        checkpoint: Checkpoint::new(model),
        log,
    })
}
