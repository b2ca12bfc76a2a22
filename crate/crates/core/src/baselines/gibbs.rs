use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma};
use rand_pcg::Pcg64;

use super::check_tokens;
use crate::error::{Error, Result};
use crate::model::{Model, ObservationSeq};
use crate::scalar::Scalar;

/// Sampler settings. `burn_in = None` discards the first 10% of sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GibbsOptions {
    pub iterations: usize,
    pub burn_in: Option<usize>,
    pub seed: u64,
    /// Number of batches for the batch-means standard error.
    pub batches: usize,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions {
            iterations: 1_000_000,
            burn_in: None,
            seed: 0,
            batches: 100,
        }
    }
}

impl GibbsOptions {
    pub fn effective_burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.iterations / 10)
    }
}

/// Current point of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsState {
    pub z_assign: Vec<usize>,
    pub theta: Vec<f64>,
    pub counts: Vec<usize>,
    pub rng_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsResult<T> {
    /// Average of `theta` over the kept sweeps.
    pub theta_mean: Vec<T>,
    /// Batch-means standard error of each coordinate of `theta_mean`.
    pub stderr: Vec<T>,
    pub burn_in: usize,
    pub kept: usize,
    pub batches: usize,
    pub state: GibbsState,
}

fn sample_dirichlet(rng: &mut Pcg64, shape: &[f64], out: &mut [f64]) {
    loop {
        for (o, &a) in out.iter_mut().zip(shape) {
            *o = Gamma::new(a, 1.0).expect("positive shape").sample(rng);
        }
        let total: f64 = out.iter().sum();
        if total > 0.0 {
            out.iter_mut().for_each(|x| *x /= total);
            return;
        }
    }
}

fn sample_index(rng: &mut Pcg64, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (z, &w) in weights.iter().enumerate() {
        if u < w {
            return z;
        }
        u -= w;
    }
    // rounding at the upper end: last cause with positive weight
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Alternating sampler: `z_i ~ theta(.) beta(w_i|.)` for every position,
/// then `theta ~ Dir(alpha + [z])`. The chain starts at the prior mean and
/// is driven by `Pcg64::seed_from_u64(seed)`, so a run is bit-reproducible.
pub fn gibbs_sample<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    opts: GibbsOptions,
) -> Result<GibbsResult<T>> {
    check_tokens(model, obs)?;
    let burn_in = opts.effective_burn_in();
    if opts.iterations <= burn_in {
        return Err(Error::Domain(format!(
            "iterations ({}) must exceed burn-in ({burn_in})",
            opts.iterations
        )));
    }
    let kept = opts.iterations - burn_in;
    let batches = opts.batches.min(kept);
    if batches < 2 {
        return Err(Error::Domain("need at least two batches of kept sweeps".into()));
    }
    let batch_len = kept / batches;

    let m = model.num_causes();
    let alpha: Vec<f64> = model.alpha().iter().map(|a| a.to_f64_lossy()).collect();
    let alpha_total: f64 = alpha.iter().sum();
    let rows: Vec<Vec<f64>> = obs
        .tokens()
        .iter()
        .map(|&w| model.beta_row(w).iter().map(|b| b.to_f64_lossy()).collect())
        .collect();

    let mut rng = Pcg64::seed_from_u64(opts.seed);
    let mut state = GibbsState {
        z_assign: vec![0; obs.len()],
        theta: alpha.iter().map(|a| a / alpha_total).collect(),
        counts: vec![0; m],
        rng_seed: opts.seed,
    };
    let mut weights = vec![0.0; m];
    let mut shape = vec![0.0; m];
    let mut sum = vec![0.0; m];
    let mut batch_sum = vec![0.0; m];
    let mut batch_means: Vec<Vec<f64>> = vec![Vec::with_capacity(batches); m];

    for sweep in 0..opts.iterations {
        state.counts.iter_mut().for_each(|c| *c = 0);
        for (i, row) in rows.iter().enumerate() {
            for z in 0..m {
                weights[z] = state.theta[z] * row[z];
            }
            if weights.iter().all(|&w| w == 0.0) {
                // theta underflowed on the whole support of this token
                weights.copy_from_slice(row);
            }
            let z = sample_index(&mut rng, &weights);
            state.z_assign[i] = z;
            state.counts[z] += 1;
        }
        for z in 0..m {
            shape[z] = alpha[z] + state.counts[z] as f64;
        }
        sample_dirichlet(&mut rng, &shape, &mut state.theta);

        if sweep >= burn_in {
            let k = sweep - burn_in;
            for (s, &t) in sum.iter_mut().zip(&state.theta) {
                *s += t;
            }
            if k < batch_len * batches {
                for (s, &t) in batch_sum.iter_mut().zip(&state.theta) {
                    *s += t;
                }
                if (k + 1).is_multiple_of(batch_len) {
                    for z in 0..m {
                        batch_means[z].push(batch_sum[z] / batch_len as f64);
                        batch_sum[z] = 0.0;
                    }
                }
            }
        }
    }

    let theta_mean = sum.iter().map(|&s| T::lit(s / kept as f64)).collect();
    let stderr = batch_means
        .iter()
        .map(|means| {
            let b = means.len() as f64;
            let mu = means.iter().sum::<f64>() / b;
            let var = means.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (b - 1.0);
            T::lit((var / b).sqrt())
        })
        .collect();
    Ok(GibbsResult {
        theta_mean,
        stderr,
        burn_in,
        kept,
        batches,
        state,
    })
}
