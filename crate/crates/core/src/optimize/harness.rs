//! Fairness-controlled comparison of optimizers across a problem suite.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{initial_candidates, minimize, Algorithm, OptimizerConfig, OptimizerRun, SearchBox};
use crate::error::{Error, Result};

/// A named objective with its own search box.
pub struct Problem {
    pub name: String,
    pub bounds: SearchBox,
    objective: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        bounds: SearchBox,
        objective: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            bounds,
            objective: Box::new(objective),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }
}

/// Right-continuous empirical distribution function as sorted `(x, F(x))` steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ecdf {
    pub points: Vec<(f64, f64)>,
}

impl Ecdf {
    pub fn new(observations: &[f64]) -> Self {
        let mut xs = observations.to_vec();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (i, x) in xs.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match points.last_mut() {
                Some(last) if last.0 == *x => last.1 = f,
                _ => points.push((*x, f)),
            }
        }
        Self { points }
    }

    /// `(1/J) Σ 1{obs ≤ x}`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.points.partition_point(|p| p.0 <= x) {
            0 => 0.0,
            k => self.points[k - 1].1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub problems: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    /// Wall seconds, `[problem][algorithm]`.
    pub times: Vec<Vec<f64>>,
    /// Attained objective values.
    pub values: Vec<Vec<f64>>,
    /// `|x_jk - min_k x_jk|`.
    pub errors: Vec<Vec<f64>>,
    pub ecdf_time: Vec<Ecdf>,
    pub ecdf_error: Vec<Ecdf>,
    pub runs: Vec<Vec<OptimizerRun>>,
    /// Starting set handed to every algorithm on each problem.
    pub initial_sets: Vec<Vec<Vec<f64>>>,
}

impl ComparisonReport {
    /// Long format: `problem,algorithm,time_seconds,error,value,iterations,converged`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["problem", "algorithm", "time_seconds", "error", "value", "iterations", "converged"])?;
        for (j, name) in self.problems.iter().enumerate() {
            for (k, algo) in self.algorithms.iter().enumerate() {
                let run = &self.runs[j][k];
                w.write_record([
                    name.clone(),
                    algo.to_string(),
                    self.times[j][k].to_string(),
                    self.errors[j][k].to_string(),
                    self.values[j][k].to_string(),
                    run.iterations_used.to_string(),
                    run.converged.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// `algorithm,x,F` rows of the chosen ECDF family.
    pub fn write_ecdf_csv<W: Write>(&self, out: W, ecdfs: &[Ecdf]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["algorithm", "x", "F"])?;
        for (algo, e) in self.algorithms.iter().zip(ecdfs) {
            for (x, f) in &e.points {
                w.write_record([algo.to_string(), x.to_string(), f.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Runs every algorithm on every problem with the seed, starting set, stall
/// rule and iteration cap of `base`; each problem substitutes its own box.
pub fn compare_optimizers(problems: &[Problem], algorithms: &[Algorithm], base: &OptimizerConfig) -> Result<ComparisonReport> {
    if problems.is_empty() {
        return Err(Error::domain("comparison needs at least one problem"));
    }
    if algorithms.len() < 2 {
        return Err(Error::domain("comparison needs at least two algorithms"));
    }
    let cells: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|j| (0..algorithms.len()).map(move |k| (j, k)))
        .collect();
    let results: Vec<Result<OptimizerRun>> = cells
        .par_iter()
        .map(|&(j, k)| {
            let mut cfg = base.clone();
            cfg.bounds = problems[j].bounds.clone();
            cfg.algorithm = algorithms[k];
            let f = |x: &[f64]| problems[j].evaluate(x);
            minimize(&f, &cfg)
        })
        .collect();
    let mut runs: Vec<Vec<OptimizerRun>> = Vec::with_capacity(problems.len());
    let mut it = results.into_iter();
    for _ in problems {
        runs.push((0..algorithms.len()).map(|_| it.next().expect("one run per cell")).collect::<Result<_>>()?);
    }

    let times: Vec<Vec<f64>> = runs.iter().map(|r| r.iter().map(|x| x.wall_time).collect()).collect();
    let values: Vec<Vec<f64>> = runs.iter().map(|r| r.iter().map(|x| x.best_value).collect()).collect();
    let errors: Vec<Vec<f64>> = values
        .iter()
        .map(|row| {
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            row.iter().map(|&x| if x == min { 0.0 } else { (x - min).abs() }).collect()
        })
        .collect();
    let column = |m: &Vec<Vec<f64>>, k: usize| -> Vec<f64> { m.iter().map(|row| row[k]).collect() };
    let ecdf_time = (0..algorithms.len()).map(|k| Ecdf::new(&column(&times, k))).collect();
    let ecdf_error = (0..algorithms.len()).map(|k| Ecdf::new(&column(&errors, k))).collect();
    let initial_sets = problems
        .iter()
        .map(|p| {
            let mut cfg = base.clone();
            cfg.bounds = p.bounds.clone();
            initial_candidates(&cfg.bounds, cfg.seed, cfg.population_size())
        })
        .collect();
    Ok(ComparisonReport {
        problems: problems.iter().map(|p| p.name.clone()).collect(),
        algorithms: algorithms.to_vec(),
        times,
        values,
        errors,
        ecdf_time,
        ecdf_error,
        runs,
        initial_sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_steps() {
        let e = Ecdf::new(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(1.0), 0.25);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(3.0), 1.0);
        assert!(e.points.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    }

    #[test]
    fn comparison_report_shape() {
        let bx = SearchBox::new(vec![-2.0; 2], vec![2.0; 2]).unwrap();
        let problems = vec![
            Problem::new("sphere", bx.clone(), |x: &[f64]| x.iter().map(|v| v * v).sum()),
            Problem::new("shifted", bx.clone(), |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] + 0.5).abs()),
        ];
        let mut base = OptimizerConfig::new(bx, Algorithm::Gsa, 3);
        base.stall_limit = 50;
        base.max_iterations = 400;
        let algos = [Algorithm::Gsa, Algorithm::De, Algorithm::Hs];
        let report = compare_optimizers(&problems, &algos, &base).unwrap();
        for row in &report.errors {
            assert!(row.contains(&0.0));
            assert!(row.iter().all(|&e| e >= 0.0));
        }
        for e in report.ecdf_time.iter().chain(&report.ecdf_error) {
            assert_eq!(e.eval(e.points.last().unwrap().0), 1.0);
        }
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 * 3);
        assert!(report.to_json().unwrap().contains("\"errors\""));
        assert!(compare_optimizers(&problems, &algos[..1], &base).is_err());
    }
}
