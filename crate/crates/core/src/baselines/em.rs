use super::{check_tokens, IterOptions};
use crate::error::Result;
use crate::model::{Model, ObservationSeq};
use crate::scalar::Scalar;

/// Maximum-likelihood point estimate of the mixture weights.
#[derive(Clone, Debug, PartialEq)]
pub struct EMState<T> {
    pub theta: Vec<T>,
    pub iterations: usize,
    /// Log-likelihood at the start and after every update.
    pub log_likelihood: Vec<T>,
}

fn log_likelihood<T: Scalar>(model: &Model<T>, obs: &ObservationSeq, theta: &[T]) -> T {
    obs.tokens()
        .iter()
        .map(|&w| {
            model
                .beta_row(w)
                .iter()
                .zip(theta)
                .map(|(&b, &t)| b * t)
                .sum::<T>()
                .ln()
        })
        .sum()
}

/// EM for `prod_i sum_z beta(w_i|z) theta(z) -> max`, started from the
/// uniform point. Stops once the log-likelihood gains less than `tol`.
pub fn em_max_likelihood<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    opts: IterOptions,
) -> Result<EMState<T>> {
    check_tokens(model, obs)?;
    let m = model.num_causes();
    let n = obs.len();
    let mut theta = vec![T::one() / T::count(m); m];
    let mut trace = vec![log_likelihood(model, obs, &theta)];
    if n == 0 {
        return Ok(EMState {
            theta,
            iterations: 0,
            log_likelihood: trace,
        });
    }
    let tol = T::lit(opts.tol);
    let mut next = vec![T::zero(); m];
    let mut iterations = 0;
    while iterations < opts.max_iters {
        next.iter_mut().for_each(|x| *x = T::zero());
        for &w in obs.tokens() {
            let row = model.beta_row(w);
            let norm: T = row.iter().zip(&theta).map(|(&b, &t)| b * t).sum();
            for z in 0..m {
                next[z] += row[z] * theta[z] / norm;
            }
        }
        for (t, &r) in theta.iter_mut().zip(&next) {
            *t = r / T::count(n);
        }
        iterations += 1;
        let ll = log_likelihood(model, obs, &theta);
        let prev = *trace.last().expect("trace starts non-empty");
        debug_assert!(
            ll >= prev - T::lit(1e-9) * prev.abs().max(T::one()),
            "EM log-likelihood decreased: {prev} -> {ll}"
        );
        trace.push(ll);
        if (ll - prev).abs() < tol {
            break;
        }
    }
    Ok(EMState {
        theta,
        iterations,
        log_likelihood: trace,
    })
}
