//! File helpers: early path checks and atomic output.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use anyhow::Context;
use bbpekit::Vocabulary;
use tempfile::NamedTempFile;

use crate::{CliError, CliResult};

/// Fail before any work starts if `path` cannot be opened for reading.
pub fn check_input(path: &Path) -> CliResult {
    File::open(path)
        .map(drop)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(CliError::Data)
}

/// Fail before any work starts if `path` could not be created.
pub fn check_output(path: &Path) -> CliResult {
    let dir = parent_dir(path);
    if !dir.is_dir() {
        return Err(CliError::Data(anyhow::anyhow!(
            "output directory {} does not exist",
            dir.display()
        )));
    }
    if path.is_dir() {
        return Err(CliError::Data(anyhow::anyhow!("output {} is a directory", path.display())));
    }
    Ok(())
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, renamed into place once complete.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult {
    let mut tmp = NamedTempFile::new_in(parent_dir(path))
        .with_context(|| format!("cannot create a temporary file next to {}", path.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Send output to `path` atomically, or to standard output.
pub fn emit(path: Option<&Path>, contents: &[u8]) -> CliResult {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn read_bytes(path: Option<&Path>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match path {
        Some(p) => {
            File::open(p)
                .and_then(|f| BufReader::new(f).read_to_end(&mut buf))
                .with_context(|| format!("cannot read {}", p.display()))?;
        }
        None => {
            io::stdin().lock().read_to_end(&mut buf)?;
        }
    }
    Ok(buf)
}

pub fn read_text(path: Option<&Path>) -> CliResult<String> {
    let bytes = read_bytes(path)?;
    let name = path.map_or_else(|| "standard input".to_owned(), |p| p.display().to_string());
    String::from_utf8(bytes)
        .map_err(|e| CliError::Data(anyhow::anyhow!("{name} is not valid UTF-8 (byte {})", e.utf8_error().valid_up_to())))
}

/// Lines of a text file without their terminators.
pub fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    Ok(read_text(Some(path))?.lines().map(str::to_owned).collect())
}

pub fn load_vocab(path: &Path) -> CliResult<Vocabulary> {
    let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    Vocabulary::load(BufReader::new(file))
        .with_context(|| format!("cannot load vocabulary {}", path.display()))
        .map_err(CliError::Data)
}
