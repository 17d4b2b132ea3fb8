//! Experiment configuration: a TOML document whose keys every command flag
//! can override.

use std::path::{Path, PathBuf};

use catpool::distributions::FrechetParams;
use catpool::optimize::Algorithm;
use catpool::pool::TailModel;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Quantile levels of the empirical sweep: 0.8 to 0.975 in steps of 0.001.
pub fn default_p_sweep() -> Vec<f64> {
    (800..=975).map(|k| k as f64 / 1000.0).collect()
}

pub const DEFAULT_XI_LEVELS: [f64; 4] = [0.1, 0.3, 0.5, 0.7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LambdaPolicy {
    /// Lower corner of the feasible box.
    BoxLower,
    /// Multipliers given in `lambdas`.
    Explicit,
    /// Found by the configured optimizer.
    Optimize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Participant {
    pub alpha: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub algorithm: Option<String>,
    pub stall_limit: Option<usize>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub problems: Option<usize>,
    pub algorithms: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSection {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub states: Option<Vec<String>>,
    pub start: Option<String>,
    pub end: Option<String>,
    pub delimiter: Option<char>,
    pub date_column: Option<String>,
    pub state_column: Option<String>,
    pub building_column: Option<String>,
    pub contents_column: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSpec {
    pub name: String,
    pub states: Vec<String>,
    /// Use the pooled tail estimate for every member (tail-equivalent pool).
    #[serde(default)]
    pub pooled_tail: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalSection {
    pub data: Option<PathBuf>,
    pub k: Option<usize>,
    pub pools: Option<Vec<PoolSpec>>,
    pub synthetic_m: Option<usize>,
    pub significance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RvSection {
    pub grid: Option<usize>,
    pub replications: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub output_dir: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub m: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
    /// Attachment multipliers used as given.
    pub xi_grid: Option<Vec<f64>>,
    /// Levels `c` turned into `ξ = c^(1/α₁)`.
    pub xi_levels: Option<Vec<f64>>,
    pub lambda_policy: Option<LambdaPolicy>,
    pub lambdas: Option<Vec<f64>>,
    pub participants: Option<Vec<Participant>>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub ingest: IngestSection,
    #[serde(default)]
    pub empirical: EmpiricalSection,
    #[serde(default)]
    pub rv: RvSection,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }
}

/// Participants of the first simulation study: two Fréchet laws with tail
/// index 8.5 and scales 100 and 90.
pub fn default_participants() -> Vec<Participant> {
    vec![
        Participant { alpha: 8.5, scale: 100.0 },
        Participant { alpha: 8.5, scale: 90.0 },
    ]
}

/// Participants of the second simulation study (different tail indices).
pub fn second_study_participants() -> Vec<Participant> {
    vec![
        Participant { alpha: 8.5, scale: 100.0 },
        Participant { alpha: 9.0, scale: 100.0 },
    ]
}

/// A validated simulation setup.
#[derive(Debug, Clone)]
pub struct Experiment {
    /// Laws in model order (heaviest tail first).
    pub params: Vec<FrechetParams>,
    /// `labels[i]` is the 1-based position of model participant `i` in the config.
    pub labels: Vec<usize>,
    /// Model at `ξ = 1`; use `with_xi` per grid point.
    pub model: TailModel,
    pub xi_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub lambda_policy: LambdaPolicy,
    /// Explicit multipliers in model order.
    pub lambdas: Option<Vec<f64>>,
    pub m: usize,
    pub seeds: Vec<u64>,
}

fn check_probabilities(field: &str, ps: &[f64]) -> CliResult<()> {
    if ps.is_empty() {
        return Err(CliError::config(format!("{field} is empty")));
    }
    if let Some(p) = ps.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(CliError::config(format!("{field}: {p} is not in (0, 1)")));
    }
    Ok(())
}

/// Settings shared by the simulation commands after flags override the file.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOverrides {
    pub seeds: Option<Vec<u64>>,
    pub m: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
    pub xi_grid: Option<Vec<f64>>,
    pub xi_levels: Option<Vec<f64>>,
    pub lambda_policy: Option<LambdaPolicy>,
    pub lambdas: Option<Vec<f64>>,
}

pub struct ExperimentDefaults {
    pub participants: Vec<Participant>,
    pub p_grid: Vec<f64>,
    pub xi_levels: Vec<f64>,
    pub m: usize,
    pub seeds: Vec<u64>,
    pub lambda_policy: LambdaPolicy,
}

impl Experiment {
    pub fn resolve(file: &ConfigFile, flags: &ExperimentOverrides, defaults: ExperimentDefaults) -> CliResult<Self> {
        let participants = file.participants.clone().unwrap_or(defaults.participants);
        if participants.is_empty() {
            return Err(CliError::config("participants is empty"));
        }
        let raw: Vec<FrechetParams> = participants
            .iter()
            .enumerate()
            .map(|(i, p)| {
                FrechetParams::new(p.alpha, p.scale)
                    .map_err(|e| CliError::config(format!("participants[{i}]: {e}")))
            })
            .collect::<CliResult<_>>()?;
        let model = TailModel::from_frechet(&raw, 1.0)?;
        let order = model.original_index().to_vec();
        let params: Vec<FrechetParams> = order.iter().map(|&i| raw[i]).collect();
        let alpha1 = model.alphas()[0];

        let m = flags.m.or(file.m).unwrap_or(defaults.m);
        if m < 10 {
            return Err(CliError::config(format!("m: need at least 10 observations, got {m}")));
        }
        let p_grid = flags
            .p_grid
            .clone()
            .or_else(|| file.p_grid.clone())
            .unwrap_or(defaults.p_grid);
        check_probabilities("p_grid", &p_grid)?;

        let xi_grid = match (flags.xi_grid.clone(), flags.xi_levels.clone()) {
            (Some(g), _) => g,
            (None, Some(levels)) => levels.iter().map(|c| c.powf(1.0 / alpha1)).collect(),
            (None, None) => match (&file.xi_grid, &file.xi_levels) {
                (Some(g), _) => g.clone(),
                (None, Some(levels)) => levels.iter().map(|c| c.powf(1.0 / alpha1)).collect(),
                (None, None) => defaults.xi_levels.iter().map(|c| c.powf(1.0 / alpha1)).collect(),
            },
        };
        if xi_grid.is_empty() {
            return Err(CliError::config("xi_grid is empty"));
        }
        if let Some(x) = xi_grid.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(CliError::config(format!("xi_grid: {x} is not positive")));
        }

        let lambda_policy = flags
            .lambda_policy
            .or(file.lambda_policy)
            .unwrap_or(defaults.lambda_policy);
        let lambdas = match flags.lambdas.clone().or_else(|| file.lambdas.clone()) {
            Some(l) => {
                if l.len() != params.len() {
                    return Err(CliError::config(format!(
                        "lambdas: {} values for {} participants",
                        l.len(),
                        params.len()
                    )));
                }
                if let Some(v) = l.iter().find(|&&v| !(v >= 1.0 && v.is_finite())) {
                    return Err(CliError::config(format!("lambdas: {v} is below 1")));
                }
                Some(order.iter().map(|&i| l[i]).collect())
            }
            None => None,
        };
        if lambda_policy == LambdaPolicy::Explicit && lambdas.is_none() {
            return Err(CliError::config("lambdas: required when lambda_policy = explicit"));
        }
        let seeds = flags
            .seeds
            .clone()
            .or_else(|| file.seeds.clone())
            .unwrap_or(defaults.seeds);
        if seeds.is_empty() {
            return Err(CliError::config("seeds is empty"));
        }
        Ok(Self {
            params,
            labels: order.iter().map(|i| i + 1).collect(),
            model,
            xi_grid,
            p_grid,
            lambda_policy,
            lambdas,
            m,
            seeds,
        })
    }

    pub fn model_at(&self, xi: f64) -> CliResult<TailModel> {
        Ok(self.model.with_xi(xi)?)
    }
}

pub fn parse_algorithm(field: &str, name: &str) -> CliResult<Algorithm> {
    name.parse()
        .map_err(|_| CliError::config(format!("{field}: unknown algorithm `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> ExperimentDefaults {
        ExperimentDefaults {
            participants: default_participants(),
            p_grid: vec![0.9],
            xi_levels: DEFAULT_XI_LEVELS.to_vec(),
            m: 1000,
            seeds: vec![1],
            lambda_policy: LambdaPolicy::BoxLower,
        }
    }

    #[test]
    fn sweep_has_176_levels() {
        let s = default_p_sweep();
        assert_eq!(s.len(), 176);
        assert_eq!(s[0], 0.8);
        assert_eq!(*s.last().unwrap(), 0.975);
    }

    #[test]
    fn file_values_and_flag_overrides() {
        let file = ConfigFile::parse(
            r#"
            m = 500
            p_grid = [0.95]
            xi_levels = [0.1]
            seeds = [4, 5]

            [[participants]]
            alpha = 9.0
            scale = 100.0

            [[participants]]
            alpha = 8.5
            scale = 100.0
            "#,
        )
        .unwrap();
        let exp = Experiment::resolve(&file, &ExperimentOverrides::default(), defaults()).unwrap();
        assert_eq!(exp.m, 500);
        assert_eq!(exp.seeds, vec![4, 5]);
        // heavier tail moves to the front
        assert_eq!(exp.labels, vec![2, 1]);
        assert_eq!(exp.params[0].alpha(), 8.5);
        assert!((exp.xi_grid[0] - 0.1f64.powf(1.0 / 8.5)).abs() < 1e-15);

        let flags = ExperimentOverrides {
            m: Some(2000),
            xi_grid: Some(vec![0.5]),
            ..Default::default()
        };
        let exp = Experiment::resolve(&file, &flags, defaults()).unwrap();
        assert_eq!(exp.m, 2000);
        assert_eq!(exp.xi_grid, vec![0.5]);
    }

    #[test]
    fn validation_names_fields() {
        let cases = [
            ("p_grid = [1.5]", "p_grid"),
            ("xi_grid = [0.0]", "xi_grid"),
            ("m = 5", "m:"),
            ("lambda_policy = \"explicit\"", "lambdas"),
        ];
        for (text, field) in cases {
            let file = ConfigFile::parse(text).unwrap();
            let err = Experiment::resolve(&file, &ExperimentOverrides::default(), defaults()).unwrap_err();
            assert!(matches!(err, CliError::Config(ref m) if m.contains(field)), "{text}: {err}");
        }
        assert!(ConfigFile::parse("bogus = 1").is_err());
    }
}
