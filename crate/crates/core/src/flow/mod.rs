//! The reversible projection network: actnorm, invertible 1×1 convolution,
//! additive coupling and squeeze, composed into blocks of flows.

mod actnorm;
mod coupling;
mod invconv;
mod model;
mod squeeze;

pub use actnorm::{actnorm_apply, actnorm_init, ActnormParams, InitDiagnostic, MIN_INIT_STD, MIN_SCALE};
pub use coupling::{coupling_apply, nn_forward, CouplingParams, COUPLING_INIT_STD};
pub use invconv::{invconv_apply, InvConvParams};
pub use model::{DEFAULT_HIDDEN, SQUEEZE_FACTOR, pfn_forward, pfn_inverse, ArchName, FlowLayer, LayerKind, PfnConfig, PfnModel};
pub use squeeze::squeeze_apply;

pub(crate) use actnorm::pooled_moments;
pub(crate) use invconv::mix_channels;

/// Which way a reversible layer is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Inverse,
}
