//! Tape-based reverse-mode differentiation for the flow layers, AdaIN and
//! the training losses.

mod check;
mod flow;
mod tape;

pub use check::{
    check_gradients, grad_check, half_squared_norm, CheckOptions, GradCheckReport, TensorCheck, FD_STEP,
    GRAD_CHECK_MAX_FLOWS, GRAD_CHECK_MAX_PIXELS, GRAD_TOL,
};
pub use flow::{register_params, tape_forward, tape_inverse};
pub use tape::{Gradients, OpKind, ParamGrads, Tape, Var};

use crate::error::Result;

/// Gradients of a scalar tape value with respect to every registered
/// parameter.
pub fn backward(tape: &Tape, loss: Var) -> Result<ParamGrads> {
    tape.backward(loss)?.param_grads()
}
