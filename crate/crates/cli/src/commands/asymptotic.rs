use std::path::{Path, PathBuf};

use catpool::pool::{feasible_box, minimal_asymptotic_dr};

use super::{csv_file, finish};
use crate::config::Experiment;
use crate::error::CliResult;

/// Feasible boxes and minimal asymptotic ratios per `ξ` into `asymptotic.csv`.
pub fn run(exp: &Experiment, out_dir: &Path) -> CliResult<PathBuf> {
    let (mut w, path) = csv_file(out_dir, "asymptotic.csv")?;
    w.write_record(["xi", "i", "lambda_lower", "lambda_upper", "dr_min"])?;
    let mut order: Vec<usize> = (0..exp.labels.len()).collect();
    order.sort_by_key(|&i| exp.labels[i]);
    for &xi in &exp.xi_grid {
        let model = exp.model_at(xi)?;
        let bx = feasible_box(&model);
        let dr_min = minimal_asymptotic_dr(&model);
        for &i in &order {
            w.write_record([
                xi.to_string(),
                exp.labels[i].to_string(),
                bx.lower[i].to_string(),
                bx.upper[i].to_string(),
                dr_min[i].to_string(),
            ])?;
        }
    }
    finish(w, &path)?;
    Ok(path)
}
