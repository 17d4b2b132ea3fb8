use std::path::{Path, PathBuf};

use catpool::hypothesis::critical_value_table;

use super::output_path;
use crate::error::{CliError, CliResult};

pub struct RvArgs {
    pub grid: usize,
    pub replications: usize,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

/// Regenerates the critical-value table of the regular-variation test.
pub fn run(args: &RvArgs, out_dir: &Path) -> CliResult<PathBuf> {
    if args.grid < 1000 {
        return Err(CliError::config(format!("rv.grid: need at least 1000, got {}", args.grid)));
    }
    if args.replications < 10_000 {
        return Err(CliError::config(format!(
            "rv.replications: need at least 10000, got {}",
            args.replications
        )));
    }
    if let Some(s) = args.levels.iter().find(|&&s| !(s > 0.0 && s <= 0.5)) {
        return Err(CliError::config(format!("rv.levels: {s} is not in (0, 0.5]")));
    }
    let table = critical_value_table(&args.levels, args.grid, args.replications, args.seed)?;
    let path = match &args.output {
        Some(p) => p.clone(),
        None => output_path(out_dir, "rv_critical_values.txt")?,
    };
    std::fs::write(&path, table.render()).map_err(|source| CliError::Output {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
