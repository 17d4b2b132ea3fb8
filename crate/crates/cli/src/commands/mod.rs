//! One module per subcommand. Each writes plot-ready CSV into the output
//! directory and returns what it wrote so callers (and tests) can inspect it.

pub mod asymptotic;
pub mod compare;
pub mod empirical;
pub mod ingest;
pub mod optimize;
pub mod rv;
pub mod simulate;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub type CsvOut = csv::Writer<BufWriter<File>>;

/// Creates `dir/name` (and `dir`) for CSV output with LF line endings.
pub fn csv_file(dir: &Path, name: &str) -> CliResult<(CsvOut, PathBuf)> {
    let path = output_path(dir, name)?;
    let file = File::create(&path).map_err(|source| CliError::Output {
        path: path.clone(),
        source,
    })?;
    let writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    Ok((writer, path))
}

pub fn output_path(dir: &Path, name: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(dir.join(name))
}

pub fn finish(mut w: CsvOut, path: &Path) -> CliResult<()> {
    w.flush().map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes an upper bound as `inf` when unbounded.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}
