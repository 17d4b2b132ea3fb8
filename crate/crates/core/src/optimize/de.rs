//! Differential evolution, rand/1/bin.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Progress, SearchBox};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    /// Differential weight `F`.
    pub weight: f64,
    /// Crossover rate `CR`.
    pub crossover: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self {
            weight: 0.8,
            crossover: 0.5,
        }
    }
}

fn distinct(rng: &mut StreamRng, np: usize, avoid: &[usize]) -> usize {
    loop {
        let r = rng.random_range(0..np);
        if !avoid.contains(&r) {
            return r;
        }
    }
}

pub(crate) fn run(
    progress: &mut Progress<'_>,
    bounds: &SearchBox,
    mut pop: Vec<Vec<f64>>,
    params: &DeParams,
    rng: &mut StreamRng,
) {
    let np = pop.len();
    let dim = bounds.dim();
    let mut fit = progress.eval_initial(&pop);
    loop {
        for i in 0..np {
            let r1 = distinct(rng, np, &[i]);
            let r2 = distinct(rng, np, &[i, r1]);
            let r3 = distinct(rng, np, &[i, r1, r2]);
            let forced = rng.random_range(0..dim);
            let mut trial = pop[i].clone();
            for k in 0..dim {
                if k == forced || rng.random::<f64>() < params.crossover {
                    let v = pop[r1][k] + params.weight * (pop[r2][k] - pop[r3][k]);
                    // out-of-range components land halfway to the violated edge
                    trial[k] = if v < bounds.lower()[k] {
                        0.5 * (pop[i][k] + bounds.lower()[k])
                    } else if v > bounds.upper()[k] {
                        0.5 * (pop[i][k] + bounds.upper()[k])
                    } else {
                        v
                    };
                }
            }
            let f = progress.eval(&trial);
            if f <= fit[i] {
                pop[i] = trial;
                fit[i] = f;
            }
        }
        if progress.end_iteration() {
            break;
        }
    }
}
