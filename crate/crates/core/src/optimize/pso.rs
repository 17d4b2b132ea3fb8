//! Global-best particle swarm with the SPSO-2011 inertia and acceleration
//! coefficients.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Progress, SearchBox};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity cap as a fraction of each coordinate's span.
    pub max_velocity: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        let c = 0.5 + 2f64.ln();
        Self {
            inertia: 1.0 / (2.0 * 2f64.ln()),
            cognitive: c,
            social: c,
            max_velocity: 0.5,
        }
    }
}

pub(crate) fn run(
    progress: &mut Progress<'_>,
    bounds: &SearchBox,
    mut pos: Vec<Vec<f64>>,
    params: &PsoParams,
    rng: &mut StreamRng,
) {
    let dim = bounds.dim();
    let vmax: Vec<f64> = (0..dim).map(|i| params.max_velocity * bounds.span(i)).collect();
    let mut vel: Vec<Vec<f64>> = pos
        .iter()
        .map(|_| (0..dim).map(|i| (rng.random::<f64>() - 0.5) * vmax[i]).collect())
        .collect();
    let mut pbest = pos.clone();
    let mut pbest_f = progress.eval_initial(&pos);
    loop {
        let gbest = progress.best().0.to_vec();
        for p in 0..pos.len() {
            for i in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = params.inertia * vel[p][i]
                    + params.cognitive * r1 * (pbest[p][i] - pos[p][i])
                    + params.social * r2 * (gbest[i] - pos[p][i]);
                vel[p][i] = v.clamp(-vmax[i], vmax[i]);
                let x = pos[p][i] + vel[p][i];
                if x < bounds.lower()[i] || x > bounds.upper()[i] {
                    vel[p][i] = 0.0;
                }
                pos[p][i] = x.clamp(bounds.lower()[i], bounds.upper()[i]);
            }
            let f = progress.eval(&pos[p]);
            if f < pbest_f[p] {
                pbest[p] = pos[p].clone();
                pbest_f[p] = f;
            }
        }
        if progress.end_iteration() {
            break;
        }
    }
}
