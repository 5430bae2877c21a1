use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Writes `contents`, creating parent directories.
pub fn write(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}
