use crate::error::Result;
use crate::flow::{Direction, FlowLayer, PfnModel};
use crate::ops::ConvGeom;

use super::tape::{Tape, Var};

/// Records every model parameter on the tape as a trainable leaf, indexed in
/// [`PfnModel::params`] order.
pub fn register_params(tape: &mut Tape, model: &PfnModel) -> Vec<Var> {
    model
        .params()
        .into_iter()
        .enumerate()
        .map(|(i, t)| tape.param(i, t.clone()))
        .collect()
}

fn layer_on_tape(tape: &mut Tape, layer: &FlowLayer, p: &[Var], x: Var, direction: Direction) -> Result<Var> {
    match layer {
        FlowLayer::Squeeze => tape.squeeze(x, direction),
        FlowLayer::Actnorm(_) => tape.actnorm(x, p[0], p[1], direction),
        FlowLayer::InvConv(_) => tape.invconv(x, p[0], direction),
        FlowLayer::Coupling(cp) => {
            let half = cp.half();
            let xa = tape.slice_channels(x, 0, half)?;
            let xb = tape.slice_channels(x, half, half)?;
            let h1 = tape.conv2d(xa, p[0], Some(p[1]), ConvGeom::SAME3)?;
            let h1 = tape.relu(h1);
            let h2 = tape.conv2d(h1, p[2], Some(p[3]), ConvGeom::POINTWISE)?;
            let h2 = tape.relu(h2);
            let shift = tape.conv2d(h2, p[4], Some(p[5]), ConvGeom::SAME3)?;
            let yb = match direction {
                Direction::Forward => tape.add(xb, shift)?,
                Direction::Inverse => tape.sub(xb, shift)?,
            };
            tape.concat_channels(xa, yb)
        }
    }
}

fn run(tape: &mut Tape, model: &PfnModel, params: &[Var], x: Var, direction: Direction) -> Result<Var> {
    let mut spans = Vec::with_capacity(model.layers().len());
    let mut offset = 0;
    for layer in model.layers() {
        let n = layer.params().len();
        spans.push(offset..offset + n);
        offset += n;
    }
    assert_eq!(offset, params.len(), "parameter list does not match the model");
    let order: Vec<usize> = match direction {
        Direction::Forward => (0..spans.len()).collect(),
        Direction::Inverse => (0..spans.len()).rev().collect(),
    };
    let mut cur = x;
    for i in order {
        cur = layer_on_tape(tape, &model.layers()[i], &params[spans[i].clone()], cur, direction)?;
    }
    Ok(cur)
}

/// Encoder pass recorded on the tape. `params` come from [`register_params`]
/// (or any vars with matching shapes); the model supplies only the layout.
pub fn tape_forward(tape: &mut Tape, model: &PfnModel, params: &[Var], image: Var) -> Result<Var> {
    model.check_ready()?;
    model.check_input(tape.value(image))?;
    run(tape, model, params, image, Direction::Forward)
}

/// Decoder pass recorded on the tape.
pub fn tape_inverse(tape: &mut Tape, model: &PfnModel, params: &[Var], latent: Var) -> Result<Var> {
    model.check_ready()?;
    model.check_latent(tape.value(latent))?;
    run(tape, model, params, latent, Direction::Inverse)
}
