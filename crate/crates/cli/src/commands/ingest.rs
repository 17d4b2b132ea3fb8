use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use catpool::ingest::{aggregate_monthly, parse_claims, persist_series, LossSeries, ParsedClaims, Schema, Window};

use super::{csv_file, finish};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct IngestSettings {
    pub input: PathBuf,
    /// Series file; defaults to `series.csv` in the output directory.
    pub output: Option<PathBuf>,
    pub states: Vec<String>,
    pub window: Window,
    pub schema: Schema,
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub parsed: ParsedClaims,
    pub series: Vec<LossSeries>,
    pub series_path: PathBuf,
    pub rejects_path: PathBuf,
}

/// Parses a claim export, aggregates monthly per-state totals and writes the
/// series file plus `rejects.csv` (`line,reason`).
pub fn run(settings: &IngestSettings, out_dir: &Path) -> CliResult<IngestOutcome> {
    if settings.states.is_empty() {
        return Err(CliError::config("ingest.states is empty"));
    }
    let parsed = parse_claims(&settings.input, &settings.schema, Some(&settings.window))?;
    log::info!(
        "{} rows: {} accepted, {} rejected",
        parsed.rows,
        parsed.records.len(),
        parsed.rejects.len()
    );
    let states: BTreeSet<String> = settings.states.iter().map(|s| s.trim().to_uppercase()).collect();
    let series = aggregate_monthly(&parsed.records, &states, &settings.window);

    let series_path = match &settings.output {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
                    path: dir.to_path_buf(),
                    source,
                })?;
            }
            p.clone()
        }
        None => super::output_path(out_dir, "series.csv")?,
    };
    persist_series(&series, &series_path)?;

    let (mut w, rejects_path) = csv_file(out_dir, "rejects.csv")?;
    w.write_record(["line", "reason"])?;
    for r in &parsed.rejects {
        w.write_record([r.line.to_string(), r.reason.clone()])?;
    }
    finish(w, &rejects_path)?;
    Ok(IngestOutcome {
        parsed,
        series,
        series_path,
        rejects_path,
    })
}
