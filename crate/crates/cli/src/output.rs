use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// Write `dir/name` through a temp file in the same directory, then rename it
/// into place so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, write: impl FnOnce(&mut BufWriter<&File>) -> Result<()>) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let tmp = NamedTempFile::new_in(dir).with_context(|| format!("cannot create temp file in {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        write(&mut w).with_context(|| format!("writing {name}"))?;
        std::io::Write::flush(&mut w)?;
    }
    tmp.as_file().sync_all()?;
    // Temp files are created owner-only; outputs should look like ordinary files.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    let dest = dir.join(name);
    tmp.persist(&dest).with_context(|| format!("cannot move output into {}", dest.display()))?;
    log::info!("wrote {}", dest.display());
    Ok(())
}
