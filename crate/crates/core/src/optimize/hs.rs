//! Harmony search with an exponentially narrowing pitch bandwidth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Progress, SearchBox};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsParams {
    /// Harmony memory considering rate.
    pub memory_rate: f64,
    /// Pitch adjusting rate.
    pub pitch_rate: f64,
    /// Bandwidth bounds as fractions of each coordinate's span.
    pub bandwidth_max: f64,
    pub bandwidth_min: f64,
}

impl Default for HsParams {
    fn default() -> Self {
        Self {
            memory_rate: 0.9,
            pitch_rate: 0.3,
            bandwidth_max: 0.05,
            bandwidth_min: 1e-8,
        }
    }
}

pub(crate) fn run(
    progress: &mut Progress<'_>,
    bounds: &SearchBox,
    mut memory: Vec<Vec<f64>>,
    params: &HsParams,
    rng: &mut StreamRng,
) {
    let dim = bounds.dim();
    let hms = memory.len();
    let mut value = progress.eval_initial(&memory);
    let decay = (params.bandwidth_min / params.bandwidth_max).ln() / progress.max_iterations() as f64;
    loop {
        let bw = params.bandwidth_max * (decay * progress.iteration() as f64).exp();
        let mut harmony = vec![0.0; dim];
        for (i, h) in harmony.iter_mut().enumerate() {
            if rng.random::<f64>() < params.memory_rate {
                *h = memory[rng.random_range(0..hms)][i];
                if rng.random::<f64>() < params.pitch_rate {
                    *h += rng.random_range(-1.0..=1.0) * bw * bounds.span(i);
                }
            } else {
                *h = bounds.lower()[i] + rng.random::<f64>() * bounds.span(i);
            }
        }
        bounds.clamp_in_place(&mut harmony);
        let f = progress.eval(&harmony);
        let worst = (0..hms)
            .max_by(|&a, &b| value[a].total_cmp(&value[b]))
            .expect("memory is non-empty");
        if f < value[worst] {
            memory[worst] = harmony;
            value[worst] = f;
        }
        if progress.end_iteration() {
            break;
        }
    }
}
