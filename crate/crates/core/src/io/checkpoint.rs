use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::flow::{FlowLayer, PfnConfig, PfnModel};
use crate::tensor::Tensor;

use super::write_atomic;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"PFN1";
pub const CHECKPOINT_VERSION: u32 = 1;

pub const TAG_SQUEEZE: u8 = 0;
pub const TAG_ACTNORM: u8 = 1;
pub const TAG_INVCONV: u8 = 2;
pub const TAG_COUPLING: u8 = 3;
/// Actnorm still awaiting data-dependent initialization.
pub const TAG_ACTNORM_PENDING: u8 = 4;

/// Serialized model: architecture descriptor plus every parameter, bit-exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: PfnModel,
}

fn tag(layer: &FlowLayer) -> u8 {
    match layer {
        FlowLayer::Squeeze => TAG_SQUEEZE,
        FlowLayer::Actnorm(p) if p.initialized => TAG_ACTNORM,
        FlowLayer::Actnorm(_) => TAG_ACTNORM_PENDING,
        FlowLayer::InvConv(_) => TAG_INVCONV,
        FlowLayer::Coupling(_) => TAG_COUPLING,
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Corrupt(format!("truncated while reading {what} at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

impl Checkpoint {
    pub fn new(model: PfnModel) -> Self {
        Checkpoint { model }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let cfg = self.model.config();
        let mut out = Vec::new();
        out.extend_from_slice(&CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        for v in [cfg.n_blocks, cfg.n_flows, cfg.hidden, cfg.in_channels, cfg.in_height, cfg.in_width] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for layer in self.model.layers() {
            let params = layer.params();
            let count: usize = params.iter().map(|t| t.numel()).sum();
            out.push(tag(layer));
            out.extend_from_slice(&(count as u64).to_le_bytes());
            for t in params {
                for v in t.data() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if bytes.len() < 4 {
            return Err(Error::Corrupt("file shorter than the magic".into()));
        }
        let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
        if magic != CHECKPOINT_MAGIC {
            return Err(Error::BadMagic { found: magic });
        }
        let version = r.u32("version")?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::BadVersion { found: version, expected: CHECKPOINT_VERSION });
        }
        let mut f = [0usize; 6];
        for (i, v) in f.iter_mut().enumerate() {
            *v = r.u32(&format!("config field {i}"))? as usize;
        }
        let [n_blocks, n_flows, hidden, c, h, w] = f;
        let config = PfnConfig::new(n_flows, n_blocks, [c, h, w]).with_hidden(hidden);
        let mut model = PfnModel::new(config, 0).map_err(|e| Error::Corrupt(format!("architecture: {e}")))?;
        for (i, layer) in model.layers_mut().iter_mut().enumerate() {
            let found = r.take(1, "layer tag")?[0];
            let expected = tag(layer);
            let pending = match (expected, found) {
                (TAG_ACTNORM_PENDING, TAG_ACTNORM) => false,
                (TAG_ACTNORM_PENDING, TAG_ACTNORM_PENDING) => true,
                (e, f) if e == f => false,
                _ => {
                    return Err(Error::Corrupt(format!("layer {i}: tag {found} where {expected} expected")));
                }
            };
            let count = u64::from_le_bytes(r.take(8, "parameter count")?.try_into().unwrap());
            let want: usize = layer.params().iter().map(|t| t.numel()).sum();
            if count != want as u64 {
                return Err(Error::Corrupt(format!("layer {i}: {count} parameters where {want} expected")));
            }
            for t in layer.params_mut() {
                let n = t.numel();
                let raw = r.take(8 * n, "parameter values")?;
                let values: Vec<f64> = raw
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect();
                *t = Tensor::from_vec(t.shape(), values).map_err(|e| Error::Corrupt(format!("layer {i}: {e}")))?;
            }
            if let FlowLayer::Actnorm(p) = layer {
                p.initialized = !pending;
                p.validate().map_err(|e| Error::Corrupt(format!("layer {i}: {e}")))?;
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Checkpoint { model })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

pub fn save_checkpoint(path: &Path, model: &PfnModel) -> Result<()> {
    Checkpoint::new(model.clone()).save(path)
}

pub fn load_checkpoint(path: &Path) -> Result<PfnModel> {
    Ok(Checkpoint::load(path)?.model)
}
