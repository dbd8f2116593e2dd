//! File formats: binary PPM images, model checkpoints and `key=value`
//! configuration text.

mod checkpoint;
mod config;
mod ppm;

pub use checkpoint::{
    load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION, TAG_ACTNORM,
    TAG_ACTNORM_PENDING, TAG_COUPLING, TAG_INVCONV, TAG_SQUEEZE,
};
pub use config::KeyValues;
pub use ppm::{decode_ppm, encode_ppm, quantize, read_image, write_image, ImageFile};

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}
