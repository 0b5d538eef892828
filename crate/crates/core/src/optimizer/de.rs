use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// DE/rand/1/bin settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DEConfig {
    /// Defaults to 15 × dimension.
    pub population: Option<usize>,
    /// Mutation factor F in (0, 2].
    pub mutation: f64,
    /// Crossover rate CR in [0, 1].
    pub crossover: f64,
    pub generations: usize,
    pub seed: u64,
}

impl Default for DEConfig {
    fn default() -> Self {
        DEConfig { population: None, mutation: 0.7, crossover: 0.9, generations: 200, seed: 0 }
    }
}

impl DEConfig {
    pub fn validate(&self, dim: usize) -> Result<usize> {
        if !(self.mutation > 0.0 && self.mutation <= 2.0) {
            return Err(Error::Config("mutation factor must lie in (0, 2]".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(Error::Config("crossover rate must lie in [0, 1]".into()));
        }
        let np = self.population.unwrap_or(15 * dim);
        if np < 4 {
            return Err(Error::Config("population needs at least 4 members".into()));
        }
        Ok(np)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DEOutcome {
    pub best: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Best value after initialization and after each generation.
    pub trace: Vec<f64>,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` inside `bounds`. Members of `initial` replace the first
/// random members of the starting population.
pub fn differential_evolution<F>(f: F, bounds: &[(f64, f64)], cfg: &DEConfig, initial: &[Vec<f64>]) -> Result<DEOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.len();
    if dim == 0 || bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::Config("bounds must be finite and ordered".into()));
    }
    let np = cfg.validate(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let clamp = |x: &mut Vec<f64>| {
        for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| bounds.iter().map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect())
        .collect();
    for (slot, x) in pop.iter_mut().zip(initial) {
        if x.len() != dim {
            return Err(Error::Config("initial member has the wrong dimension".into()));
        }
        *slot = x.clone();
        clamp(slot);
    }
    let mut fit: Vec<f64> = pop.par_iter().map(|x| sanitize(f(x))).collect();
    let mut evaluations = np;
    let best_of = |fit: &[f64]| (0..fit.len()).min_by(|&a, &b| fit[a].total_cmp(&fit[b])).unwrap();
    let mut trace = vec![fit[best_of(&fit)]];

    for _ in 0..cfg.generations {
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.random_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let r1 = pick();
                let r2 = loop {
                    let r = pick();
                    if r != r1 {
                        break r;
                    }
                };
                let r3 = loop {
                    let r = pick();
                    if r != r1 && r != r2 {
                        break r;
                    }
                };
                let jrand = rng.random_range(0..dim);
                let mut trial: Vec<f64> = (0..dim)
                    .map(|j| {
                        if j == jrand || rng.random::<f64>() < cfg.crossover {
                            pop[r1][j] + cfg.mutation * (pop[r2][j] - pop[r3][j])
                        } else {
                            pop[i][j]
                        }
                    })
                    .collect();
                clamp(&mut trial);
                trial
            })
            .collect();
        let values: Vec<f64> = trials.par_iter().map(|x| sanitize(f(x))).collect();
        evaluations += np;
        for (i, (trial, v)) in trials.into_iter().zip(values).enumerate() {
            if v <= fit[i] {
                pop[i] = trial;
                fit[i] = v;
            }
        }
        trace.push(fit[best_of(&fit)]);
    }
    let b = best_of(&fit);
    Ok(DEOutcome { best: pop[b].clone(), value: fit[b], evaluations, trace })
}
