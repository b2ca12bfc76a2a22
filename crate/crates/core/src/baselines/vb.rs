use super::{check_tokens, digamma, IterOptions};
use crate::error::{Error, Result};
use crate::model::{Model, ObservationSeq};
use crate::scalar::Scalar;

/// Mean-field surrogate `q(theta | gamma) prod_i q(z_i | phi_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VBState<T> {
    pub gamma: Vec<T>,
    /// `phi[i][z]`, one row of responsibilities per observation.
    pub phi: Vec<Vec<T>>,
    pub iterations: usize,
}

impl<T: Scalar> VBState<T> {
    /// Mean of the Dirichlet surrogate, `gamma / sum(gamma)`.
    pub fn theta_mean(&self) -> Vec<T> {
        let total: T = self.gamma.iter().copied().sum();
        self.gamma.iter().map(|&g| g / total).collect()
    }
}

/// Variational Bayes started from `gamma(z) = alpha(z) + n/m`; alternates
/// `phi_i(z) ~ beta(w_i|z) exp(Psi(gamma(z)) - Psi(sum gamma))` and
/// `gamma(z) = alpha(z) + sum_i phi_i(z)` until the largest change of
/// `gamma` drops below `tol`.
pub fn variational_bayes<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    opts: IterOptions,
) -> Result<(VBState<T>, Vec<T>)> {
    check_tokens(model, obs)?;
    let m = model.num_causes();
    let n = obs.len();
    let alpha = model.alpha();
    let shift = T::count(n) / T::count(m);
    let mut state = VBState {
        gamma: alpha.iter().map(|&a| a + shift).collect(),
        phi: vec![vec![T::zero(); m]; n],
        iterations: 0,
    };
    let tol = T::lit(opts.tol);
    let mut weights = vec![T::zero(); m];
    while state.iterations < opts.max_iters {
        let total: T = state.gamma.iter().copied().sum();
        let psi_total = digamma(total);
        for (w, &g) in weights.iter_mut().zip(&state.gamma) {
            *w = (digamma(g) - psi_total).exp();
        }
        for (i, &tok) in obs.tokens().iter().enumerate() {
            let row = model.beta_row(tok);
            let phi = &mut state.phi[i];
            for z in 0..m {
                phi[z] = row[z] * weights[z];
            }
            let norm: T = phi.iter().copied().sum();
            if norm <= T::zero() || !norm.is_finite() {
                return Err(Error::DegenerateEvidence(format!(
                    "responsibilities of position {i} vanish"
                )));
            }
            phi.iter_mut().for_each(|p| *p /= norm);
        }
        let mut delta = T::zero();
        for z in 0..m {
            let g = alpha[z] + state.phi.iter().map(|row| row[z]).sum::<T>();
            delta = delta.max((g - state.gamma[z]).abs());
            state.gamma[z] = g;
        }
        state.iterations += 1;
        if delta < tol {
            break;
        }
    }
    let mean = state.theta_mean();
    Ok((state, mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(a: f64) -> Model<f64> {
        Model::<f64>::new(vec![a; 3], vec![vec![0.09, 0.05, 0.02], vec![0.02, 0.05, 0.08]]).unwrap()
    }

    #[test]
    fn toy_tables() {
        for (a, want) in [
            (1.0 / 3.0, [0.44553, 0.15111, 0.40336]),
            (1.0, [0.34413, 0.32441, 0.33146]),
        ] {
            let m = toy(a);
            let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
            let (s, mean) = variational_bayes(&m, &obs, IterOptions::default()).unwrap();
            for (g, w) in mean.iter().zip(want) {
                assert!((g - w).abs() < 1e-4, "{g} vs {w}");
            }
            for z in 0..3 {
                let back = m.alpha()[z] + s.phi.iter().map(|r| r[z]).sum::<f64>();
                assert!((back - s.gamma[z]).abs() < 1e-12);
            }
            assert!((s.gamma.iter().sum::<f64>() - 3.0 * a - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_sequence_returns_prior_mean() {
        let m = Model::<f64>::new(vec![1.0, 3.0], vec![vec![0.5, 0.5]]).unwrap();
        let (_, mean) = variational_bayes(&m, &ObservationSeq::default(), IterOptions::default()).unwrap();
        assert_eq!(mean, vec![0.25, 0.75]);
    }
}
