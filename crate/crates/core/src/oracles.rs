//! Brute-force references for the evidence `p~(W)`.
//!
//! Each oracle follows a different route from the production engines:
//! enumeration of cause assignments, the sum over set partitions, and the
//! product of per-cause Taylor factors. They are only meant for small
//! instances and refuse work beyond their budget.

use crate::algebra::{DenseCap, SubsetMask, TruncatedPoly};
use crate::error::{Error, Result};
use crate::model::{Model, ObservationSeq};
use crate::scalar::Scalar;

/// Default number of enumerated terms an oracle may visit.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Largest matrix accepted by [`permanent`].
pub const MAX_PERMANENT: usize = 12;

fn rising<T: Scalar>(x: T, k: usize) -> T {
    let mut acc = T::one();
    for i in 0..k {
        acc *= x + T::count(i);
    }
    acc
}

fn check_budget(needed: Option<u128>, budget: u128) -> Result<()> {
    match needed {
        Some(k) if k <= budget => Ok(()),
        Some(k) => Err(Error::BudgetExceeded { needed: k, budget }),
        None => Err(Error::BudgetExceeded {
            needed: u128::MAX,
            budget,
        }),
    }
}

/// Sum over all cause assignments `z in Z^n` of
/// `prod_i beta(w_i|z_i) * prod_z (alpha(z))_{count of z}`.
pub fn brute_force_ptilde<T: Scalar>(model: &Model<T>, obs: &ObservationSeq) -> Result<T> {
    brute_force_ptilde_with_budget(model, obs, DEFAULT_BUDGET)
}

pub fn brute_force_ptilde_with_budget<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    budget: u128,
) -> Result<T> {
    let m = model.num_causes();
    let n = obs.len();
    check_budget((m as u128).checked_pow(n as u32), budget)?;

    // moments of Gamma(alpha(z), 1): E[theta^k] = (alpha(z))_k
    let gamma_moments: Vec<Vec<T>> = model
        .alpha()
        .iter()
        .map(|&a| (0..=n).map(|k| rising(a, k)).collect())
        .collect();

    let mut assign = vec![0usize; n];
    let mut counts = vec![0usize; m];
    let mut total = T::zero();
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut term = T::one();
        for (i, &z) in assign.iter().enumerate() {
            term *= model.beta(obs.tokens()[i], z);
            counts[z] += 1;
        }
        for (z, &c) in counts.iter().enumerate() {
            term *= gamma_moments[z][c];
        }
        total += term;

        // odometer increment
        let mut i = 0;
        while i < n {
            assign[i] += 1;
            if assign[i] < m {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    Ok(total)
}

/// A partition of a ground set into nonempty disjoint blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartition {
    pub blocks: Vec<SubsetMask>,
}

impl SetPartition {
    pub fn ground(&self) -> SubsetMask {
        self.blocks.iter().fold(SubsetMask::EMPTY, |a, &b| a | b)
    }

    pub fn is_valid_for(&self, ground: SubsetMask) -> bool {
        let mut seen = SubsetMask::EMPTY;
        for &b in &self.blocks {
            if b.is_empty() || !b.is_disjoint(seen) {
                return false;
            }
            seen = seen | b;
        }
        seen == ground
    }
}

/// Enumerates the partitions of `{0, ..., n-1}` through restricted growth
/// strings `a` with `a[0] = 0` and `a[i] <= 1 + max(a[..i])`.
#[derive(Clone, Debug)]
pub struct RestrictedGrowth {
    string: Vec<usize>,
    // prefix_max[i] = max(string[..=i])
    prefix_max: Vec<usize>,
    done: bool,
}

impl RestrictedGrowth {
    pub fn new(n: usize) -> Self {
        RestrictedGrowth {
            string: vec![0; n],
            prefix_max: vec![0; n],
            done: false,
        }
    }

    /// Current string; element `i` is the block label of position `i`.
    pub fn current(&self) -> Option<&[usize]> {
        (!self.done).then_some(&self.string[..])
    }

    /// Moves to the next string in lexicographic order.
    pub fn advance(&mut self) -> bool {
        let n = self.string.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            if self.string[i] <= self.prefix_max[i - 1] {
                self.string[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.string[i]);
                for k in i + 1..n {
                    self.string[k] = 0;
                    self.prefix_max[k] = self.prefix_max[i];
                }
                return true;
            }
        }
        self.done = true;
        false
    }

    /// Blocks of the current string as masks, in label order.
    pub fn blocks(&self) -> Vec<SubsetMask> {
        let k = self.prefix_max.last().map_or(0, |&m| m + 1);
        let mut blocks = vec![SubsetMask::EMPTY; k];
        for (i, &b) in self.string.iter().enumerate() {
            blocks[b] = blocks[b] | SubsetMask::singleton(i);
        }
        blocks
    }
}

/// Iterator over all set partitions of `{0, ..., n-1}`.
pub fn set_partitions(n: usize) -> impl Iterator<Item = SetPartition> {
    let mut rg = RestrictedGrowth::new(n);
    let mut first = true;
    std::iter::from_fn(move || {
        if !first && !rg.advance() {
            return None;
        }
        first = false;
        rg.current()?;
        Some(SetPartition { blocks: rg.blocks() })
    })
}

/// Number of partitions of an `n`-element set; `None` on overflow.
pub fn bell_number(n: usize) -> Option<u128> {
    // Bell triangle
    let mut row: Vec<u128> = vec![1];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last()?);
        for &x in &row {
            let v = next.last()?.checked_add(x)?;
            next.push(v);
        }
        row = next;
    }
    row.first().copied()
}

/// `sum over partitions pi of W of prod_{J in pi} <beta_J> (|J|-1)!`, with
/// every block moment summed directly over the causes.
pub fn partition_ptilde<T: Scalar>(model: &Model<T>, obs: &ObservationSeq) -> Result<T> {
    partition_ptilde_with_budget(model, obs, DEFAULT_BUDGET)
}

pub fn partition_ptilde_with_budget<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    budget: u128,
) -> Result<T> {
    let n = obs.len();
    check_budget(bell_number(n), budget)?;
    let block_moment = |block: &[usize]| -> T {
        let mut s = T::zero();
        for z in 0..model.num_causes() {
            let mut p = model.alpha()[z];
            for &i in block {
                p *= model.beta(obs.tokens()[i], z);
            }
            s += p;
        }
        s
    };
    let mut total = T::zero();
    let mut rg = RestrictedGrowth::new(n);
    let mut members: Vec<Vec<usize>> = Vec::new();
    while let Some(string) = rg.current() {
        members.iter_mut().for_each(Vec::clear);
        for (i, &b) in string.iter().enumerate() {
            if members.len() <= b {
                members.resize_with(b + 1, Vec::new);
            }
            members[b].push(i);
        }
        let mut term = T::one();
        for block in members.iter().filter(|b| !b.is_empty()) {
            let gamma = (1..block.len()).fold(T::one(), |acc, k| acc * T::count(k));
            term *= block_moment(block) * gamma;
        }
        total += term;
        rg.advance();
    }
    Ok(total)
}

/// Coefficient of `X^W` in `prod_z sum_I (alpha(z))_{|I|} beta_I(z) X^I`,
/// each factor being the square-free truncation of `(1 - sum_i beta_i X_i)^{-alpha(z)}`.
pub fn factor_product_ptilde<T: Scalar>(model: &Model<T>, obs: &ObservationSeq) -> Result<T> {
    factor_product_ptilde_with_cap(model, obs, DenseCap::default())
}

pub fn factor_product_ptilde_with_cap<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    cap: DenseCap,
) -> Result<T> {
    let n = obs.len();
    let mut acc = TruncatedPoly::one_with_cap(n, cap)?;
    for (z, &a) in model.alpha().iter().enumerate() {
        let rising_table: Vec<T> = (0..=n).map(|k| rising(a, k)).collect();
        let coeffs = (0..1usize << n)
            .map(|mask| {
                let set = SubsetMask(mask as u64);
                let beta: T = set
                    .iter()
                    .map(|i| model.beta(obs.tokens()[i], z))
                    .fold(T::one(), |x, y| x * y);
                rising_table[set.len()] * beta
            })
            .collect();
        acc = acc.mul(&TruncatedPoly::from_coeffs(coeffs)?)?;
    }
    Ok(acc.coefficient(obs.full_mask()))
}

/// Ryser's inclusion-exclusion permanent with Gray-code updates,
/// `O(2^n n)`.
pub fn permanent<T: Scalar>(matrix: &[Vec<T>]) -> Result<T> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Domain("permanent needs a square matrix".into()));
    }
    if n > MAX_PERMANENT {
        return Err(Error::Capacity {
            n,
            cap: MAX_PERMANENT,
        });
    }
    if n == 0 {
        return Ok(T::one());
    }
    let mut row_sums = vec![T::zero(); n];
    let mut total = T::zero();
    let mut gray = 0usize;
    for k in 1..(1usize << n) {
        let next = k ^ (k >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let adding = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += matrix[i][col];
            } else {
                *s -= matrix[i][col];
            }
        }
        gray = next;
        let prod = row_sums.iter().fold(T::one(), |acc, &x| acc * x);
        if (n - gray.count_ones() as usize).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Model<f64>, ObservationSeq) {
        let m = Model::<f64>::new(
            vec![1.0 / 3.0; 3],
            vec![vec![0.09, 0.05, 0.02], vec![0.02, 0.05, 0.08]],
        )
        .unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1], &m).unwrap();
        (m, obs)
    }

    #[test]
    fn toy_oracles_agree() {
        let (m, obs) = toy();
        let expected = 0.004633333333333333;
        for v in [
            brute_force_ptilde(&m, &obs).unwrap(),
            partition_ptilde(&m, &obs).unwrap(),
            factor_product_ptilde(&m, &obs).unwrap(),
        ] {
            assert!((v - expected).abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn single_cause_and_small_n() {
        let m = Model::<f64>::new(vec![0.7], vec![vec![0.2], vec![0.5]]).unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1, 1], &m).unwrap();
        let expected = 0.2 * 0.5 * 0.5 * (0.7 * 1.7 * 2.7);
        assert!((brute_force_ptilde(&m, &obs).unwrap() - expected).abs() < 1e-15);
        assert!((factor_product_ptilde(&m, &obs).unwrap() - expected).abs() < 1e-15);

        let (m, _) = toy();
        let one = ObservationSeq::for_model(vec![0], &m).unwrap();
        assert!((brute_force_ptilde(&m, &one).unwrap() - 0.16 / 3.0).abs() < 1e-15);
        let empty = ObservationSeq::default();
        assert_eq!(factor_product_ptilde(&m, &empty).unwrap(), 1.0);
        assert_eq!(partition_ptilde(&m, &empty).unwrap(), 1.0);
        assert_eq!(brute_force_ptilde(&m, &empty).unwrap(), 1.0);
    }

    #[test]
    fn partitions_of_three() {
        let parts: Vec<_> = set_partitions(3).collect();
        assert_eq!(parts.len(), 5);
        assert!(parts.iter().all(|p| p.is_valid_for(SubsetMask::full(3))));
        assert!(parts.contains(&SetPartition { blocks: vec![SubsetMask(0b111)] }));
        assert_eq!(set_partitions(0).count(), 1);
        for n in 0..9 {
            assert_eq!(set_partitions(n).count() as u128, bell_number(n).unwrap());
        }
        assert_eq!(bell_number(10), Some(115_975));
    }

    #[test]
    fn partition_sum_for_three_positions() {
        let m = Model::<f64>::new(vec![0.4, 1.1], vec![vec![0.3, 0.6], vec![0.2, 0.1]]).unwrap();
        let obs = ObservationSeq::for_model(vec![0, 1, 0], &m).unwrap();
        let mom = |ix: &[usize]| -> f64 {
            (0..2)
                .map(|z| {
                    m.alpha()[z] * ix.iter().map(|&i| m.beta(obs.tokens()[i], z)).product::<f64>()
                })
                .sum()
        };
        let expected = mom(&[0, 1, 2]) * 2.0
            + mom(&[0, 1]) * mom(&[2])
            + mom(&[0, 2]) * mom(&[1])
            + mom(&[1, 2]) * mom(&[0])
            + mom(&[0]) * mom(&[1]) * mom(&[2]);
        assert!((partition_ptilde(&m, &obs).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn budgets_refuse() {
        let (m, _) = toy();
        let obs = ObservationSeq::for_model(vec![0; 8], &m).unwrap();
        assert!(matches!(
            brute_force_ptilde_with_budget(&m, &obs, 1000),
            Err(Error::BudgetExceeded { needed: 6561, budget: 1000 })
        ));
        assert!(partition_ptilde_with_budget(&m, &obs, 100).is_err());
    }

    #[test]
    fn permanents() {
        assert_eq!(permanent(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap(), 2.0);
        let id: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        assert_eq!(permanent(&id).unwrap(), 1.0);
        // all-ones n x n has permanent n!
        let ones = vec![vec![1.0f64; 5]; 5];
        assert_eq!(permanent(&ones).unwrap(), 120.0);
        let a = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(permanent(&a).unwrap(), 10.0);
        assert!(permanent(&[vec![1.0, 2.0]]).is_err());
        assert!(permanent(&vec![vec![1.0f64; 13]; 13]).is_err());
    }
}
