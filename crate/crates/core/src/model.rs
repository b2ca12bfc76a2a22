//! Problem instances: prior weights, emission table and observations.

use crate::algebra::{SubsetMask, HARD_CAP, MAX_POSITIONS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which inputs a model accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Positive prior weights and non-negative emissions.
    Statistical,
    /// Arbitrary real prior weights. Only the generating-function product
    /// accepts such a model.
    Algebraic,
}

/// Dirichlet prior `alpha(z)` over `m` causes and emissions `beta(v|z)` for
/// every vocabulary item `v`.
///
/// No normalization of the emission columns is assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    alpha: Vec<T>,
    // row-major, beta[v * m + z]
    beta: Vec<T>,
    vocab: usize,
    mode: Mode,
}

impl<T: Scalar> Model<T> {
    /// Statistical-mode model; `beta_rows[v][z]` is `beta(v|z)`.
    pub fn new(alpha: Vec<T>, beta_rows: Vec<Vec<T>>) -> Result<Self> {
        Self::build(alpha, beta_rows, Mode::Statistical)
    }

    /// Model whose prior weights may be any reals.
    pub fn algebraic(alpha: Vec<T>, beta_rows: Vec<Vec<T>>) -> Result<Self> {
        Self::build(alpha, beta_rows, Mode::Algebraic)
    }

    fn build(alpha: Vec<T>, beta_rows: Vec<Vec<T>>, mode: Mode) -> Result<Self> {
        let m = alpha.len();
        if m == 0 {
            return Err(Error::InvalidModel("at least one cause is required".into()));
        }
        if beta_rows.is_empty() {
            return Err(Error::InvalidModel("at least one vocabulary item is required".into()));
        }
        let mut beta = Vec::with_capacity(beta_rows.len() * m);
        for (v, row) in beta_rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidModel(format!(
                    "beta row {v} has {} entries, expected {m}",
                    row.len()
                )));
            }
            beta.extend_from_slice(row);
        }
        if alpha.iter().chain(beta.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("non-finite entry".into()));
        }
        if mode == Mode::Statistical {
            if let Some(z) = alpha.iter().position(|&a| a <= T::zero()) {
                return Err(Error::InvalidModel(format!(
                    "alpha[{z}] must be positive"
                )));
            }
            if let Some(k) = beta.iter().position(|&b| b < T::zero()) {
                return Err(Error::InvalidModel(format!(
                    "beta[{}][{}] is negative",
                    k / m,
                    k % m
                )));
            }
        }
        Ok(Model {
            alpha,
            beta,
            vocab: beta_rows.len(),
            mode,
        })
    }

    pub fn num_causes(&self) -> usize {
        self.alpha.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    /// `|alpha|`, summed in cause order.
    pub fn alpha_total(&self) -> T {
        self.alpha.iter().copied().sum()
    }

    #[inline]
    pub fn beta(&self, v: usize, z: usize) -> T {
        self.beta[v * self.alpha.len() + z]
    }

    pub fn beta_row(&self, v: usize) -> &[T] {
        let m = self.alpha.len();
        &self.beta[v * m..(v + 1) * m]
    }

    pub fn require_statistical(&self) -> Result<()> {
        match self.mode {
            Mode::Statistical => Ok(()),
            Mode::Algebraic => Err(Error::Domain(
                "operation requires a statistical-mode model".into(),
            )),
        }
    }

    /// Same emissions, every prior weight multiplied by `factor`.
    pub fn scale_alpha(&self, factor: T) -> Result<Self> {
        let alpha = self.alpha.iter().map(|&a| a * factor).collect();
        Self::build(alpha, self.rows(), self.mode)
    }

    /// Appends a vocabulary item emitted with probability one by cause `z`
    /// and never by any other cause. Returns the new model and the index of
    /// the added item.
    pub fn with_virtual_observation(&self, z: usize) -> Result<(Self, usize)> {
        if z >= self.num_causes() {
            return Err(Error::Domain(format!("cause {z} out of range")));
        }
        let mut rows = self.rows();
        rows.push(
            (0..self.num_causes())
                .map(|k| if k == z { T::one() } else { T::zero() })
                .collect(),
        );
        let model = Self::build(self.alpha.clone(), rows, self.mode)?;
        Ok((model, self.vocab))
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.vocab).map(|v| self.beta_row(v).to_vec()).collect()
    }
}

/// Observed token sequence `w_1, ..., w_n` as vocabulary indices.
///
/// Repeated tokens are allowed; each position gets its own formal variable.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ObservationSeq {
    tokens: Vec<usize>,
}

impl ObservationSeq {
    pub fn new(tokens: Vec<usize>, vocab_size: usize) -> Result<Self> {
        if tokens.len() > MAX_POSITIONS {
            return Err(Error::Capacity {
                n: tokens.len(),
                cap: MAX_POSITIONS,
            });
        }
        if let Some(&t) = tokens.iter().find(|&&t| t >= vocab_size) {
            return Err(Error::InvalidModel(format!(
                "token {t} outside vocabulary of size {vocab_size}"
            )));
        }
        Ok(ObservationSeq { tokens })
    }

    pub fn for_model<T: Scalar>(tokens: Vec<usize>, model: &Model<T>) -> Result<Self> {
        Self::new(tokens, model.vocab_size())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.tokens.len())
    }

    /// Sequence with `token` appended.
    pub fn pushed(&self, token: usize) -> Self {
        let mut tokens = self.tokens.clone();
        tokens.push(token);
        ObservationSeq { tokens }
    }
}

/// `<beta_J> = sum_z alpha(z) prod_{i in J} beta(w_i|z)` for every subset
/// `J` of the observation positions.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> MomentTable<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: SubsetMask) -> T {
        self.values[j.index()]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

fn check_dense(obs: &ObservationSeq) -> Result<()> {
    if obs.len() > HARD_CAP {
        Err(Error::Capacity {
            n: obs.len(),
            cap: HARD_CAP,
        })
    } else {
        Ok(())
    }
}

/// Writes `prod_{i in J} beta(w_i|z)` for every `J` into `out`, which must
/// have length `2^n`.
pub(crate) fn fill_cause_products<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    z: usize,
    out: &mut [T],
) {
    out[0] = T::one();
    let per_token: Vec<T> = obs.tokens().iter().map(|&v| model.beta(v, z)).collect();
    for mask in 1..out.len() {
        let low = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)] * per_token[low];
    }
}

/// Table of `beta_J(z)` over all `2^n` subsets `J`.
pub fn cause_subset_products<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    z: usize,
) -> Result<Vec<T>> {
    if z >= model.num_causes() {
        return Err(Error::Domain(format!("cause {z} out of range")));
    }
    check_dense(obs)?;
    let mut out = vec![T::zero(); 1usize << obs.len()];
    fill_cause_products(model, obs, z, &mut out);
    Ok(out)
}

/// Prior-weighted subset moments, accumulated in ascending cause order.
pub fn moments<T: Scalar>(model: &Model<T>, obs: &ObservationSeq) -> Result<MomentTable<T>> {
    check_dense(obs)?;
    let size = 1usize << obs.len();
    let mut values = vec![T::zero(); size];
    let mut prod = vec![T::zero(); size];
    for (z, &a) in model.alpha().iter().enumerate() {
        fill_cause_products(model, obs, z, &mut prod);
        for (acc, &p) in values.iter_mut().zip(&prod) {
            *acc += a * p;
        }
    }
    Ok(MomentTable {
        n: obs.len(),
        values,
    })
}

/// Positions `i` with `beta(w_i|z) > eps`.
pub fn support<T: Scalar>(model: &Model<T>, obs: &ObservationSeq, z: usize, eps: T) -> SubsetMask {
    obs.tokens()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| model.beta(v, z) > eps)
        .fold(SubsetMask::EMPTY, |acc, (i, _)| acc | SubsetMask::singleton(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Model<f64> {
        Model::new(
            vec![1.0 / 3.0; 3],
            vec![vec![0.09, 0.05, 0.02], vec![0.02, 0.05, 0.08]],
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(Model::<f64>::new(vec![], vec![vec![]]).is_err());
        assert!(Model::new(vec![1.0], vec![]).is_err());
        assert!(Model::new(vec![1.0, 1.0], vec![vec![0.1]]).is_err());
        assert!(Model::new(vec![-1.0], vec![vec![0.1]]).is_err());
        assert!(Model::new(vec![1.0], vec![vec![-0.1]]).is_err());
        assert!(Model::algebraic(vec![-1.0], vec![vec![0.1]]).is_ok());
        assert!(ObservationSeq::new(vec![0, 2], 2).is_err());
        assert!(ObservationSeq::new(vec![0; 65], 1).is_err());
    }

    #[test]
    fn toy_cause_products() {
        let m = toy();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        let p = cause_subset_products(&m, &obs, 0).unwrap();
        assert_eq!(p[0], 1.0);
        assert!((p[1] - 0.09).abs() < 1e-15);
        assert!((p[2] - 0.02).abs() < 1e-15);
        assert!((p[3] - 0.0018).abs() < 1e-15);
    }

    #[test]
    fn zero_emission_annihilates_supersets() {
        let m = Model::new(vec![1.0, 1.0], vec![vec![0.0, 0.3], vec![0.5, 0.5]]).unwrap();
        let obs = ObservationSeq::for_model(vec![1, 0, 1], &m).unwrap();
        let p = cause_subset_products(&m, &obs, 0).unwrap();
        for (mask, &v) in p.iter().enumerate() {
            if mask & 0b010 != 0 {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn toy_moments() {
        let m = toy();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        let t = moments(&m, &obs).unwrap();
        assert!((t.get(SubsetMask::EMPTY) - 1.0).abs() < 1e-15);
        assert!((t.get(SubsetMask(1)) - 0.16 / 3.0).abs() < 1e-15);
        assert!((t.get(SubsetMask(3)) - 0.0059 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn supports() {
        let m = toy();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        for z in 0..3 {
            assert_eq!(support(&m, &obs, z, 0.0), SubsetMask(0b11));
        }
        assert_eq!(support(&m, &obs, 0, 0.5), SubsetMask::EMPTY);
        let block = Model::new(
            vec![1.0, 1.0],
            vec![vec![0.4, 0.0], vec![0.0, 0.7]],
        )
        .unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1, 0], &block).unwrap();
        assert_eq!(support(&block, &obs, 0, 0.0), SubsetMask(0b101));
        assert_eq!(support(&block, &obs, 1, 0.0), SubsetMask(0b010));
    }

    #[test]
    fn virtual_observation_row() {
        let (m, v) = toy().with_virtual_observation(1).unwrap();
        assert_eq!(v, 2);
        assert_eq!(m.beta_row(2), &[0.0, 1.0, 0.0]);
    }
}
