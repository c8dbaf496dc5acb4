use std::ffi::OsStr;
use std::io::Write;
use std::path::{Path, PathBuf};

use blinkwatch_core::cascade::{load_model, parse_legacy_cascade_xml, CascadeModel, MAGIC};
use blinkwatch_core::imaging::{decode_pgm, GrayImage};
use tempfile::NamedTempFile;

use crate::error::{image_error, model_error, CliError, Result};

/// Loads a native model or an OpenCV cascade XML, told apart by the magic bytes.
pub fn load_cascade(path: &Path) -> Result<CascadeModel> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        load_model(&bytes).map_err(|e| model_error(path, e))
    } else {
        parse_legacy_cascade_xml(&bytes).map_err(|e| model_error(path, e))
    }
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_pgm(&bytes).map_err(|e| image_error(path, e))
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(OsStr::to_str)
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// PGM files in `dir`, sorted by file name. Other entries are skipped, or
/// rejected when `strict`.
pub fn list_pgms(dir: &Path, strict: bool) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        if is_pgm(&path) {
            out.push(path);
        } else if strict {
            return Err(CliError::data(format!("{}: not a PGM file", path.display())));
        } else {
            log::debug!("skipping {}", path.display());
        }
    }
    out.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(out)
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Sends `text` to `out` atomically, or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
