//! Artificial bee colony: employed, onlooker and scout phases per cycle.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Progress, SearchBox};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcParams {
    /// Abandonment limit; `None` means `food_sources · dim`.
    pub limit: Option<usize>,
}

impl Default for AbcParams {
    fn default() -> Self {
        Self { limit: None }
    }
}

fn fitness(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + f)
    } else {
        1.0 + f.abs()
    }
}

struct Colony {
    food: Vec<Vec<f64>>,
    value: Vec<f64>,
    trials: Vec<usize>,
}

impl Colony {
    fn explore(&mut self, i: usize, progress: &mut Progress<'_>, bounds: &SearchBox, rng: &mut StreamRng) {
        let sn = self.food.len();
        let k = loop {
            let k = rng.random_range(0..sn);
            if k != i {
                break k;
            }
        };
        let j = rng.random_range(0..bounds.dim());
        let phi: f64 = rng.random_range(-1.0..=1.0);
        let mut cand = self.food[i].clone();
        cand[j] += phi * (self.food[i][j] - self.food[k][j]);
        bounds.clamp_in_place(&mut cand);
        let f = progress.eval(&cand);
        if fitness(f) > fitness(self.value[i]) {
            self.food[i] = cand;
            self.value[i] = f;
            self.trials[i] = 0;
        } else {
            self.trials[i] += 1;
        }
    }
}

pub(crate) fn run(
    progress: &mut Progress<'_>,
    bounds: &SearchBox,
    food: Vec<Vec<f64>>,
    params: &AbcParams,
    rng: &mut StreamRng,
) {
    let sn = food.len();
    let limit = params.limit.unwrap_or(sn * bounds.dim());
    let value = progress.eval_initial(&food);
    let mut colony = Colony {
        food,
        value,
        trials: vec![0; sn],
    };
    loop {
        for i in 0..sn {
            colony.explore(i, progress, bounds, rng);
        }
        // onlookers pick sources with odds 0.9 w / max w + 0.1
        let weights: Vec<f64> = colony.value.iter().map(|&f| fitness(f)).collect();
        let max_w = weights.iter().copied().fold(0.0, f64::max);
        let mut sent = 0;
        let mut i = 0;
        while sent < sn {
            let odds = if max_w > 0.0 { 0.9 * weights[i] / max_w + 0.1 } else { 1.0 };
            if rng.random::<f64>() < odds {
                colony.explore(i, progress, bounds, rng);
                sent += 1;
            }
            i = (i + 1) % sn;
        }
        if let Some(worn) = (0..sn).filter(|&i| colony.trials[i] > limit).max_by_key(|&i| colony.trials[i]) {
            let x = bounds.uniform_point(rng);
            colony.value[worn] = progress.eval(&x);
            colony.food[worn] = x;
            colony.trials[worn] = 0;
        }
        if progress.end_iteration() {
            break;
        }
    }
}
