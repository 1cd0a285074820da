use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{runtime, validation, Result};

/// Write via a sibling temp file and rename, so readers never see a partial
/// file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp-write");
    let io = |e: std::io::Error| runtime(anyhow::anyhow!("writing {}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

pub fn ensure_out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .map_err(|e| validation(format!("cannot create output dir {}: {e}", path.display())))
}
