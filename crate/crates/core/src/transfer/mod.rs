//! Feature-space transfer modules.
//!
//! AdaIN and WCT split a feature into a content factor and a style factor and
//! swap the style factor; both preserve the content factor exactly. The
//! patch-replacement module has no such decomposition and serves as a biased
//! contrast.

mod adain;
mod patch;
mod wct;

use std::fmt;
use std::str::FromStr;

pub use adain::{
    adain, adain_content_factor, adain_recombine, adain_style_factor, channel_stats, FeatureStats, EPS_STD,
};
pub use patch::patch_swap;
pub use wct::{cov_factor, wct, wct_content_factor, wct_recombine, CovFactor, EPS_COV_REL};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const DEFAULT_PATCH_SIZE: usize = 3;
pub const DEFAULT_PATCH_STRIDE: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferKind {
    Adain,
    Wct,
    PatchSwap { patch_size: usize, stride: usize },
}

impl TransferKind {
    pub fn patch_swap() -> Self {
        TransferKind::PatchSwap {
            patch_size: DEFAULT_PATCH_SIZE,
            stride: DEFAULT_PATCH_STRIDE,
        }
    }

    /// AdaIN and WCT leave the content factor untouched.
    pub fn is_unbiased(&self) -> bool {
        !matches!(self, TransferKind::PatchSwap { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TransferKind::PatchSwap { patch_size, stride }
                if patch_size == 0 || patch_size % 2 == 0 || stride == 0 =>
            {
                Err(Error::Invalid(format!(
                    "patch size must be odd and positive, stride positive (got {patch_size}, {stride})"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for TransferKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransferKind::Adain => f.write_str("adain"),
            TransferKind::Wct => f.write_str("wct"),
            TransferKind::PatchSwap { .. } => f.write_str("patchswap"),
        }
    }
}

impl FromStr for TransferKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adain" => Ok(TransferKind::Adain),
            "wct" => Ok(TransferKind::Wct),
            "patchswap" | "patch-swap" => Ok(TransferKind::patch_swap()),
            other => Err(Error::Invalid(format!(
                "unknown transfer {other:?}; expected adain, wct or patchswap"
            ))),
        }
    }
}

/// Runs the transfer and blends: `alpha · f_cs + (1 - alpha) · f_c`.
pub fn transfer_apply(kind: TransferKind, f_c: &Tensor, f_s: &Tensor, alpha: f64) -> Result<Tensor> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    kind.validate()?;
    let f_cs = match kind {
        TransferKind::Adain => adain(f_c, f_s)?,
        TransferKind::Wct => wct(f_c, f_s)?,
        TransferKind::PatchSwap { patch_size, stride } => patch_swap(f_c, f_s, patch_size, stride)?,
    };
    if alpha == 1.0 {
        return Ok(f_cs);
    }
    f_cs.zip_with(f_c, |s, c| alpha * s + (1.0 - alpha) * c)
}
