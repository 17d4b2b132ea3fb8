//! Box-constrained global optimisation of the practical pooling problem
//! `min Σ_i DR_i(p)` over layer multipliers, and a harness that compares
//! metaheuristics under one shared protocol.
//!
//! Every algorithm starts from the same seeded candidate set, counts
//! iterations the same way (see [`Algorithm`]) and stops once the best value
//! has not improved by more than [`IMPROVEMENT_EPS`] for `stall_limit`
//! consecutive iterations, or at `max_iterations`.

mod abc;
mod de;
mod gsa;
mod harness;
mod hs;
mod local;
mod pso;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use abc::AbcParams;
pub use de::DeParams;
pub use gsa::GsaParams;
pub use harness::{compare_optimizers, ComparisonReport, Ecdf, Problem};
pub use hs::HsParams;
pub use pso::PsoParams;

use crate::distributions::FrechetParams;
use crate::error::{Error, Result};
use crate::montecarlo::{DrReport, FrozenPool};
use crate::pool::{feasible_box, FeasibleBox, TailModel, UpperBound};
use crate::rng::{stream_rng, StreamRng};

/// A drop in the best value smaller than this does not reset the stall count.
pub const IMPROVEMENT_EPS: f64 = 1e-12;

/// Width used in place of an unbounded feasible upper edge.
pub const UNBOUNDED_SPAN: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Generalized simulated annealing; one iteration is one temperature step.
    Gsa,
    /// Differential evolution; one iteration is one generation.
    De,
    /// Artificial bee colony; one iteration is one foraging cycle.
    Abc,
    /// Harmony search; one iteration is one improvisation.
    Hs,
    /// Particle swarm; one iteration is one swarm move.
    Pso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Gsa,
        Algorithm::De,
        Algorithm::Abc,
        Algorithm::Hs,
        Algorithm::Pso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gsa => "GSA",
            Algorithm::De => "DE",
            Algorithm::Abc => "ABC",
            Algorithm::Hs => "HS",
            Algorithm::Pso => "PSO",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::domain(format!("unknown algorithm `{s}`")))
    }
}

/// Finite search rectangle `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::domain("search box bounds must be non-empty and equally long"));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::domain(format!(
                    "coordinate {i}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[1, upper_i]` per coordinate; an unbounded edge becomes
    /// `lower_i + UNBOUNDED_SPAN`.
    pub fn from_feasible(bx: &FeasibleBox) -> Result<Self> {
        let upper = bx
            .lower
            .iter()
            .zip(&bx.upper)
            .map(|(&lo, up)| match up {
                UpperBound::Finite(u) => *u,
                UpperBound::Unbounded => lo + UNBOUNDED_SPAN,
            })
            .collect();
        Self::new(vec![1.0; bx.dim()], upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn span(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    pub fn clamp_in_place(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub(crate) fn uniform_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.lower[i] + rng.random::<f64>() * self.span(i))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    pub gsa: GsaParams,
    pub de: DeParams,
    pub abc: AbcParams,
    pub hs: HsParams,
    pub pso: PsoParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub stall_limit: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub bounds: SearchBox,
    pub algorithm: Algorithm,
    pub algorithm_params: AlgorithmParams,
    /// Size of the shared starting set; `None` means `max(20, 10 · dim)`.
    pub population: Option<usize>,
    pub record_trace: bool,
}

impl OptimizerConfig {
    pub fn new(bounds: SearchBox, algorithm: Algorithm, seed: u64) -> Self {
        Self {
            stall_limit: 500,
            max_iterations: 10_000,
            seed,
            bounds,
            algorithm,
            algorithm_params: AlgorithmParams::default(),
            population: None,
            record_trace: false,
        }
    }

    pub fn population_size(&self) -> usize {
        self.population.unwrap_or_else(|| (10 * self.bounds.dim()).max(20))
    }

    fn validate(&self) -> Result<()> {
        if self.stall_limit == 0 || self.stall_limit >= self.max_iterations {
            return Err(Error::domain(format!(
                "need 0 < stall_limit < max_iterations, got {} and {}",
                self.stall_limit, self.max_iterations
            )));
        }
        if self.population_size() < 4 {
            return Err(Error::domain("the starting set needs at least 4 candidates"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerRun {
    pub algorithm: Algorithm,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub iterations_used: usize,
    pub evaluations: usize,
    /// Stopped by the stall rule rather than the iteration cap.
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// The seeded starting set every algorithm receives for a given config.
pub fn initial_candidates(bounds: &SearchBox, seed: u64, size: usize) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0);
    (0..size).map(|_| bounds.uniform_point(&mut rng)).collect()
}

/// Bookkeeping shared by all algorithms: best-so-far, stall rule, trace.
pub(crate) struct Progress<'a> {
    objective: &'a dyn Fn(&[f64]) -> f64,
    best_x: Vec<f64>,
    best_f: f64,
    anchor: f64,
    stall: usize,
    iterations: usize,
    evaluations: usize,
    stall_limit: usize,
    max_iterations: usize,
    trace: Option<Vec<(usize, f64)>>,
}

impl<'a> Progress<'a> {
    fn new(objective: &'a dyn Fn(&[f64]) -> f64, config: &OptimizerConfig) -> Self {
        Self {
            objective,
            best_x: Vec::new(),
            best_f: f64::INFINITY,
            anchor: f64::INFINITY,
            stall: 0,
            iterations: 0,
            evaluations: 0,
            stall_limit: config.stall_limit,
            max_iterations: config.max_iterations,
            trace: config.record_trace.then(Vec::new),
        }
    }

    /// Evaluates `x`, mapping NaN to `+∞`, and records a new best.
    pub(crate) fn eval(&mut self, x: &[f64]) -> f64 {
        let f = (self.objective)(x);
        let f = if f.is_nan() { f64::INFINITY } else { f };
        self.evaluations += 1;
        if f < self.best_f || self.best_x.is_empty() {
            self.best_f = f;
            self.best_x = x.to_vec();
        }
        f
    }

    /// Evaluates the starting set; the stall rule measures improvement from
    /// its best value.
    pub(crate) fn eval_initial(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        let values = xs.iter().map(|x| self.eval(x)).collect();
        self.anchor = self.best_f;
        values
    }

    pub(crate) fn best(&self) -> (&[f64], f64) {
        (&self.best_x, self.best_f)
    }

    pub(crate) fn iteration(&self) -> usize {
        self.iterations
    }

    pub(crate) fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    /// Closes one iteration; `true` means stop.
    pub(crate) fn end_iteration(&mut self) -> bool {
        self.iterations += 1;
        if self.anchor - self.best_f > IMPROVEMENT_EPS {
            self.anchor = self.best_f;
            self.stall = 0;
        } else {
            self.stall += 1;
        }
        if let Some(t) = self.trace.as_mut() {
            t.push((self.iterations, self.best_f));
        }
        self.stall >= self.stall_limit || self.iterations >= self.max_iterations
    }

    fn finish(self, algorithm: Algorithm, started: Instant) -> OptimizerRun {
        OptimizerRun {
            algorithm,
            converged: self.stall >= self.stall_limit,
            best_point: self.best_x,
            best_value: self.best_f,
            iterations_used: self.iterations,
            evaluations: self.evaluations,
            wall_time: started.elapsed().as_secs_f64(),
            trace: self.trace,
        }
    }
}

/// Runs the configured metaheuristic on `objective` inside `config.bounds`.
pub fn minimize(objective: &dyn Fn(&[f64]) -> f64, config: &OptimizerConfig) -> Result<OptimizerRun> {
    config.validate()?;
    let started = Instant::now();
    let bounds = &config.bounds;
    let init = initial_candidates(bounds, config.seed, config.population_size());
    let mut progress = Progress::new(objective, config);
    let mut rng = stream_rng(config.seed, 1);
    let params = &config.algorithm_params;
    match config.algorithm {
        Algorithm::Gsa => gsa::run(&mut progress, bounds, init, &params.gsa, &mut rng),
        Algorithm::De => de::run(&mut progress, bounds, init, &params.de, &mut rng),
        Algorithm::Abc => abc::run(&mut progress, bounds, init, &params.abc, &mut rng),
        Algorithm::Hs => hs::run(&mut progress, bounds, init, &params.hs, &mut rng),
        Algorithm::Pso => pso::run(&mut progress, bounds, init, &params.pso, &mut rng),
    }
    let run = progress.finish(config.algorithm, started);
    debug_assert!(bounds.contains(&run.best_point));
    log::debug!(
        "{} stopped after {} iterations ({} evaluations), best {}",
        run.algorithm,
        run.iterations_used,
        run.evaluations,
        run.best_value
    );
    Ok(run)
}

/// `λ ↦ Σ_i DR_i(p)` over one frozen simulated sample.
#[derive(Debug, Clone)]
pub struct PoolObjective {
    pool: FrozenPool,
    feasible: FeasibleBox,
}

impl PoolObjective {
    pub fn evaluate(&self, lambdas: &[f64]) -> f64 {
        match self.pool.evaluate(lambdas) {
            Ok(report) => report.total(),
            Err(e) => {
                log::debug!("objective at {lambdas:?} set to +inf: {e}");
                f64::INFINITY
            }
        }
    }

    pub fn report(&self, lambdas: &[f64]) -> Result<DrReport> {
        self.pool.evaluate(lambdas)
    }

    pub fn feasible_box(&self) -> &FeasibleBox {
        &self.feasible
    }

    pub fn search_box(&self) -> Result<SearchBox> {
        SearchBox::from_feasible(&self.feasible)
    }

    pub fn pool(&self) -> &FrozenPool {
        &self.pool
    }
}

/// Freezes `m` draws per participant under `seed` and returns the practical
/// objective. `params` must follow the model's participant order.
pub fn pool_objective(params: Vec<FrechetParams>, m: usize, seed: u64, model: &TailModel, p: f64) -> Result<PoolObjective> {
    let pool = FrozenPool::simulate(model, params, m, seed, p)?;
    Ok(PoolObjective {
        pool,
        feasible: feasible_box(model),
    })
}
