use crate::error::{shape_err, Result};
use crate::grad::{Tape, Var};
use crate::tensor::Tensor;
use crate::transfer::channel_stats;

use super::lossnet::LossNet;

fn rms(a: &Tensor, b: &Tensor) -> Result<f64> {
    let d = a.sub(b)?;
    Ok((d.sum_squares() / d.numel().max(1) as f64).sqrt())
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Root-mean-square distance between the top-stage features of `stylized`
/// and the target feature `t`.
pub fn content_loss(stylized: &Tensor, target: &Tensor, net: &LossNet) -> Result<f64> {
    let f = net.top(stylized)?;
    if f.shape() != target.shape() {
        return shape_err(format!("content target {:?} vs features {:?}", target.shape(), f.shape()));
    }
    rms(&f, target)
}

/// Sum over stages of the L2 distances between channel means and between
/// channel deviations.
pub fn style_loss(stylized: &Tensor, style: &Tensor, net: &LossNet) -> Result<f64> {
    let fa = net.features(stylized)?;
    let fb = net.features(style)?;
    let mut total = 0.0;
    for (a, b) in fa.iter().zip(&fb) {
        let (sa, sb) = (channel_stats(a), channel_stats(b));
        total += l2(&sa.mean, &sb.mean) + l2(&sa.std, &sb.std);
    }
    Ok(total)
}

pub(crate) fn content_loss_on_tape(tape: &mut Tape, features: &[Var], target: &Tensor) -> Result<Var> {
    let top = *features.last().expect("lossnet has stages");
    let t = tape.constant(target.clone());
    tape.rms_distance(top, t)
}

pub(crate) fn style_loss_on_tape(tape: &mut Tape, features: &[Var], style: &[Tensor]) -> Result<Var> {
    let mut total: Option<Var> = None;
    for (f, s) in features.iter().zip(style) {
        let stats = channel_stats(s);
        let c = stats.channels();
        let mu_s = tape.constant(Tensor::from_vec([1, c, 1, 1], stats.mean)?);
        let sd_s = tape.constant(Tensor::from_vec([1, c, 1, 1], stats.std)?);
        let mu = tape.channel_mean(*f);
        let sd = tape.channel_std(*f);
        let dm = tape.l2_distance(mu, mu_s)?;
        let ds = tape.l2_distance(sd, sd_s)?;
        let stage = tape.add(dm, ds)?;
        total = Some(match total {
            Some(t) => tape.add(t, stage)?,
            None => stage,
        });
    }
    Ok(total.expect("lossnet has stages"))
}
