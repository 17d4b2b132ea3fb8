//! Generalized simulated annealing with a Tsallis-Stariolo visiting
//! distribution, generalized Metropolis acceptance and a Nelder-Mead polish
//! whenever a chain improves the best point.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::local::nelder_mead;
use super::{Progress, SearchBox};
use crate::rng::StreamRng;

/// Visits larger than this are redrawn uniformly inside `±TAIL_LIMIT`.
const TAIL_LIMIT: f64 = 1e8;
const MIN_VISIT_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsaParams {
    /// Visiting parameter `q_v` in `(1, 3)`.
    pub visiting: f64,
    /// Acceptance parameter `q_a`, negative.
    pub acceptance: f64,
    pub initial_temp: f64,
    /// Reannealing starts when the temperature falls below
    /// `restart_ratio · initial_temp`.
    pub restart_ratio: f64,
    pub local_search: bool,
    /// Nelder-Mead evaluation budget per polish, per dimension.
    pub local_evals_per_dim: usize,
}

impl Default for GsaParams {
    fn default() -> Self {
        Self {
            visiting: 2.62,
            acceptance: -5.0,
            initial_temp: 5230.0,
            restart_ratio: 2e-5,
            local_search: true,
            local_evals_per_dim: 200,
        }
    }
}

struct Visiting {
    qv: f64,
    factor4_p: f64,
    factor6: f64,
}

impl Visiting {
    fn new(qv: f64) -> Self {
        let factor1 = (qv.ln() / (qv - 1.0)).exp();
        let factor2 = ((4.0 - qv) * (qv - 1.0).ln()).exp();
        let factor3 = ((2.0 - qv) * 2f64.ln() / (qv - 1.0)).exp();
        let factor4_p = std::f64::consts::PI.sqrt() * factor1 * factor2 / (factor3 * (3.0 - qv));
        let factor5 = 1.0 / (qv - 1.0) - 0.5;
        let d1 = 2.0 - factor5;
        let factor6 = std::f64::consts::PI * (1.0 - factor5)
            / (std::f64::consts::PI * (1.0 - factor5)).sin()
            / statrs::function::gamma::ln_gamma(d1).exp();
        Self {
            qv,
            factor4_p,
            factor6,
        }
    }

    /// One heavy-tailed step at `temperature`.
    fn step(&self, temperature: f64, rng: &mut StreamRng) -> f64 {
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        let qv = self.qv;
        let factor1 = (temperature.ln() / (qv - 1.0)).exp();
        let factor4 = self.factor4_p * factor1;
        let sigmax = (-(qv - 1.0) * (self.factor6 / factor4).ln() / (3.0 - qv)).exp();
        let den = ((qv - 1.0) * y.abs().ln() / (3.0 - qv)).exp();
        let v = x * sigmax / den;
        if v > TAIL_LIMIT {
            TAIL_LIMIT * rng.random::<f64>()
        } else if v < -TAIL_LIMIT {
            -TAIL_LIMIT * rng.random::<f64>()
        } else if v.is_nan() {
            0.0
        } else {
            v
        }
    }
}

/// Moves `x[i] + step` back into `[lower, upper)` by wrapping.
fn wrap(bounds: &SearchBox, i: usize, v: f64) -> f64 {
    let lo = bounds.lower()[i];
    let range = bounds.span(i);
    let mut w = ((v - lo) % range + range) % range + lo;
    if (w - lo).abs() < MIN_VISIT_BOUND {
        w += MIN_VISIT_BOUND;
    }
    w.min(bounds.upper()[i])
}

pub(crate) fn run(
    progress: &mut Progress<'_>,
    bounds: &SearchBox,
    init: Vec<Vec<f64>>,
    params: &GsaParams,
    rng: &mut StreamRng,
) {
    let dim = bounds.dim();
    let visiting = Visiting::new(params.visiting);
    let qa = params.acceptance;
    let t1 = ((params.visiting - 1.0) * 2f64.ln()).exp() - 1.0;
    let restart_temp = params.initial_temp * params.restart_ratio;
    let local_budget = params.local_evals_per_dim * dim;

    // Start from the best member of the shared starting set.
    let values = progress.eval_initial(&init);
    let start = (0..init.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("starting set is non-empty");
    let mut current = init[start].clone();
    let mut current_f = values[start];

    let mut step = 0usize;
    loop {
        let s = step as f64 + 2.0;
        let t2 = ((params.visiting - 1.0) * s.ln()).exp() - 1.0;
        let temperature = params.initial_temp * t1 / t2;
        if temperature < restart_temp {
            step = 0;
            current = bounds.uniform_point(rng);
            current_f = progress.eval(&current);
            continue;
        }
        let temperature_step = temperature / (step as f64 + 1.0);
        let best_before = progress.best().1;
        for j in 0..2 * dim {
            let mut candidate = current.clone();
            if j < dim {
                for (i, c) in candidate.iter_mut().enumerate() {
                    *c = wrap(bounds, i, *c + visiting.step(temperature, rng));
                }
            } else {
                let i = j - dim;
                candidate[i] = wrap(bounds, i, candidate[i] + visiting.step(temperature, rng));
            }
            let f = progress.eval(&candidate);
            if f < current_f {
                current = candidate;
                current_f = f;
            } else {
                let r: f64 = rng.random();
                let base = 1.0 - (1.0 - qa) * (f - current_f) / temperature_step;
                let accept = if base <= 0.0 || base.is_nan() {
                    0.0
                } else {
                    (base.ln() / (1.0 - qa)).exp()
                };
                if r <= accept {
                    current = candidate;
                    current_f = f;
                }
            }
        }
        if params.local_search && progress.best().1 < best_before {
            let (bx, bf) = {
                let (x, f) = progress.best();
                (x.to_vec(), f)
            };
            let (x, f) = nelder_mead(progress, bounds, &bx, bf, local_budget);
            if f < current_f {
                current = x;
                current_f = f;
            }
        }
        step += 1;
        if progress.end_iteration() {
            break;
        }
    }
}
