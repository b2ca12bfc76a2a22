//! Exact evidence and posterior means over the full `2^n` subset lattice.
//!
//! The unnormalized evidence `p~(I)` of every subset `I` of the observation
//! positions is the coefficient of `X^I` in
//!
//! ```text
//! prod_{J nonempty} (1 + <beta_J> (|J|-1)! X^J)   mod (X_1^2, ..., X_n^2)
//! ```
//!
//! and the normalized probability is `p~(W) / (|alpha|)_n`. Cost is
//! `O(m 2^n)` for the moments plus `O(3^n)` for the product.

use std::collections::BTreeMap;

use crate::algebra::{DenseCap, SubsetMask, TruncatedPoly};
use crate::error::{Error, Result};
use crate::model::{fill_cause_products, moments, Model, ObservationSeq};
use crate::scalar::{factorials, Scalar};

/// Rising factorial `x (x+1) ... (x+k-1)`, with `(x)_0 = 1`.
pub fn pochhammer<T: Scalar>(x: T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, i| acc * (x + T::count(i)))
}

/// `ln (x)_k` for `x > 0`, summed term by term.
pub fn ln_pochhammer<T: Scalar>(x: T, k: usize) -> T {
    (0..k).map(|i| (x + T::count(i)).ln()).sum()
}

/// Outcome of an exact inference run.
#[derive(Clone, Debug, PartialEq)]
pub struct InferenceResult<T> {
    /// `p~(W)`, the unnormalized evidence of the whole sequence.
    pub ptilde_full: T,
    /// `p(w_1, ..., w_n | alpha, beta)`.
    pub probability: T,
    pub log_probability: T,
    /// Posterior mean `E[theta_z | w]` per cause.
    pub theta_mean: Vec<T>,
    pub method: String,
    pub diagnostics: BTreeMap<String, String>,
}

/// Generating-function product whose coefficient at `I` is `p~(I)`.
///
/// Accepts algebraic-mode models.
pub fn ptilde_all<T: Scalar>(model: &Model<T>, obs: &ObservationSeq) -> Result<TruncatedPoly<T>> {
    ptilde_all_with_cap(model, obs, DenseCap::default())
}

pub fn ptilde_all_with_cap<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    cap: DenseCap,
) -> Result<TruncatedPoly<T>> {
    let n = obs.len();
    cap.check(n)?;
    let table = moments(model, obs)?;
    let gamma = factorials::<T>(n.max(1) - 1);
    let mut poly = TruncatedPoly::one_with_cap(n, cap)?;
    for j in 1..table.values().len() {
        let mask = SubsetMask(j as u64);
        let c = table.values()[j] * gamma[mask.len() - 1];
        if c != T::zero() {
            poly.mul_affine_in_place(mask, c)?;
        }
    }
    Ok(poly)
}

fn normalizer<T: Scalar>(model: &Model<T>, n: usize) -> Result<T> {
    model.require_statistical()?;
    let total = model.alpha_total();
    if total <= T::zero() {
        return Err(Error::Domain("|alpha| must be positive".into()));
    }
    Ok(pochhammer(total, n))
}

/// `p(w | alpha, beta) = p~(W) / (|alpha|)_n`.
pub fn probability<T: Scalar>(model: &Model<T>, obs: &ObservationSeq) -> Result<T> {
    probability_with_cap(model, obs, DenseCap::default())
}

pub fn probability_with_cap<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    cap: DenseCap,
) -> Result<T> {
    let norm = normalizer(model, obs.len())?;
    let poly = ptilde_all_with_cap(model, obs, cap)?;
    Ok(poly.coefficient(obs.full_mask()) / norm)
}

/// Exact posterior means
///
/// ```text
/// E[theta_z | w] = alpha(z) / (n + |alpha|) * sum_J beta_J(z) |J|! p~(W \ J) / p~(W)
/// ```
///
/// computed as one pass over the causes for the moments and a second pass
/// for the sums. Memory stays `O(2^n)` regardless of the number of causes.
pub fn posterior_mean<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
) -> Result<InferenceResult<T>> {
    posterior_mean_with_cap(model, obs, DenseCap::default())
}

pub fn posterior_mean_with_cap<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    cap: DenseCap,
) -> Result<InferenceResult<T>> {
    let n = obs.len();
    let norm = normalizer(model, n)?;
    let poly = ptilde_all_with_cap(model, obs, cap)?;
    let full = obs.full_mask();
    let ptilde_full = poly.coefficient(full);
    if ptilde_full == T::zero() {
        return Err(Error::DegenerateEvidence(
            "observations have probability zero under the model".into(),
        ));
    }

    let fact = factorials::<T>(n);
    // weight[J] = |J|! p~(W \ J) / p~(W)
    let coeffs = poly.coeffs();
    let weight: Vec<T> = (0..coeffs.len())
        .map(|j| {
            let rest = full.index() & !j;
            fact[(j as u64).count_ones() as usize] * coeffs[rest] / ptilde_full
        })
        .collect();

    let denom = T::count(n) + model.alpha_total();
    let mut prod = vec![T::zero(); coeffs.len()];
    let theta_mean = model
        .alpha()
        .iter()
        .enumerate()
        .map(|(z, &a)| {
            fill_cause_products(model, obs, z, &mut prod);
            let s: T = prod.iter().zip(&weight).map(|(&p, &w)| p * w).sum();
            a * s / denom
        })
        .collect();

    let log_probability = ptilde_full.ln() - ln_pochhammer(model.alpha_total(), n);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("n".to_string(), n.to_string());
    diagnostics.insert("causes".to_string(), model.num_causes().to_string());
    Ok(InferenceResult {
        ptilde_full,
        probability: ptilde_full / norm,
        log_probability,
        theta_mean,
        method: "exact".to_string(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(a: f64) -> Model<f64> {
        Model::<f64>::new(
            vec![a; 3],
            vec![vec![0.09, 0.05, 0.02], vec![0.02, 0.05, 0.08]],
        )
        .unwrap()
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(7.5f64, 0), 1.0);
        assert_eq!(pochhammer(2.0f64, 3), 24.0);
        assert_eq!(pochhammer(-1.0f64, 2), 0.0);
        assert!((ln_pochhammer(2.0f64, 3) - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn ptilde_toy() {
        let m = toy(1.0 / 3.0);
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        let p = ptilde_all(&m, &obs).unwrap();
        assert_eq!(p.coefficient(SubsetMask::EMPTY), 1.0);
        // <beta_12> + <beta_1><beta_2>, both terms computed by hand
        let expected = 0.0059 / 3.0 + (0.16 / 3.0) * (0.15 / 3.0);
        assert!((p.coefficient(SubsetMask(3)) - expected).abs() < 1e-15);
        assert!((expected - 0.004633333333333333).abs() < 1e-15);
    }

    #[test]
    fn ptilde_single_position() {
        let m = toy(0.7);
        let obs = ObservationSeq::for_model(vec![1], &m).unwrap();
        let p = ptilde_all(&m, &obs).unwrap();
        assert!((p.coefficient(SubsetMask(1)) - 0.7 * 0.15).abs() < 1e-15);
    }

    #[test]
    fn probability_toy() {
        let m = toy(1.0 / 3.0);
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        let p = probability(&m, &obs).unwrap();
        assert!((p - 0.0023166666666666665).abs() < 1e-15);
        let empty = ObservationSeq::default();
        assert_eq!(probability(&m, &empty).unwrap(), 1.0);
    }

    #[test]
    fn single_cause_is_deterministic() {
        let m = Model::<f64>::new(vec![2.5], vec![vec![0.3], vec![0.6]]).unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1, 1], &m).unwrap();
        let p = probability(&m, &obs).unwrap();
        assert!((p - 0.3 * 0.6 * 0.6).abs() < 1e-15);
        let r = posterior_mean(&m, &obs).unwrap();
        assert!((r.theta_mean[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn posterior_toy_tables() {
        let m = toy(1.0 / 3.0);
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        let r = posterior_mean(&m, &obs).unwrap();
        // exact rationals 138/417, 148/417, 131/417 from rational brute force
        let expected = [0.33093525179856115, 0.354916067146283, 0.31414868105515587];
        for (got, want) in r.theta_mean.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
        assert!((r.probability - r.ptilde_full / 2.0).abs() < 1e-18);
    }

    #[test]
    fn empty_sequence_gives_prior_mean() {
        let m = Model::<f64>::new(vec![1.0, 3.0], vec![vec![0.5, 0.5]]).unwrap();
        let r = posterior_mean(&m, &ObservationSeq::default()).unwrap();
        assert_eq!(r.theta_mean, vec![0.25, 0.75]);
        assert_eq!(r.ptilde_full, 1.0);
    }

    #[test]
    fn impossible_observations() {
        let m = Model::<f64>::new(vec![1.0, 1.0], vec![vec![0.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        assert!(matches!(
            posterior_mean(&m, &obs),
            Err(Error::DegenerateEvidence(_))
        ));
    }

    #[test]
    fn algebraic_mode_is_rejected_for_probabilities() {
        let m = Model::algebraic(vec![-1.0, -1.0], vec![vec![1.0, 1.0]]).unwrap();
        let obs = ObservationSeq::for_model(vec![0, 0], &m).unwrap();
        let p = ptilde_all(&m, &obs).unwrap();
        // (-2) * 1! + (-2)(-2) = 2 = perm [[1,1],[1,1]]
        assert_eq!(p.coefficient(SubsetMask(3)), 2.0);
        assert!(probability(&m, &obs).is_err());
        assert!(posterior_mean(&m, &obs).is_err());
    }

    #[test]
    fn cap_is_respected() {
        let m = Model::<f64>::new(vec![1.0], vec![vec![0.5]]).unwrap();
        let obs = ObservationSeq::for_model(vec![0; 21], &m).unwrap();
        assert!(matches!(ptilde_all(&m, &obs), Err(Error::Capacity { .. })));
        let cap = DenseCap::new(21).unwrap();
        assert!(ptilde_all_with_cap(&m, &obs, cap).is_ok());
    }

    #[test]
    fn f32_path() {
        let m = Model::<f32>::new(
            vec![1.0 / 3.0; 3],
            vec![vec![0.09, 0.05, 0.02], vec![0.02, 0.05, 0.08]],
        )
        .unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        let r = posterior_mean(&m, &obs).unwrap();
        assert!((r.theta_mean[1] - 0.35491607).abs() < 1e-5);
    }
}
