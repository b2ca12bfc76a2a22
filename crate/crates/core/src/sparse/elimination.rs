use std::collections::{BTreeMap, HashMap};

use crate::algebra::{DenseCap, SubsetMask, TruncatedPoly, HARD_CAP};
use crate::dense::{ln_pochhammer, pochhammer, InferenceResult};
use crate::error::{Error, Result};
use crate::model::{support, Model, ObservationSeq};
use crate::scalar::{factorials, Scalar};

use super::decomposition::TreeDecomposition;

/// `phi`: each contributing subset mapped to the first bag containing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BagAssignment {
    map: BTreeMap<SubsetMask, usize>,
}

impl BagAssignment {
    /// Assigns every mask in `subsets` to the lowest-indexed bag holding it.
    pub fn new<I: IntoIterator<Item = SubsetMask>>(td: &TreeDecomposition, subsets: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for j in subsets {
            let t = td
                .bags()
                .iter()
                .position(|b| j.is_subset_of(*b))
                .ok_or(Error::DecompositionMismatch { subset: j.bits() })?;
            map.insert(j, t);
        }
        Ok(BagAssignment { map })
    }

    pub fn bag_of(&self, j: SubsetMask) -> Option<usize> {
        self.map.get(&j).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, usize)> + '_ {
        self.map.iter().map(|(&j, &t)| (j, t))
    }
}

/// Positions of `vars` in ascending order; `compress` / `expand` translate
/// between global masks and bag-local masks.
#[derive(Clone, Debug)]
struct LocalVars {
    vars: SubsetMask,
    positions: Vec<usize>,
}

impl LocalVars {
    fn new(vars: SubsetMask) -> Self {
        LocalVars {
            vars,
            positions: vars.iter().collect(),
        }
    }

    fn compress(&self, global: SubsetMask) -> SubsetMask {
        debug_assert!(global.is_subset_of(self.vars));
        let mut out = 0u64;
        for (k, &p) in self.positions.iter().enumerate() {
            if global.contains(p) {
                out |= 1 << k;
            }
        }
        SubsetMask(out)
    }

    fn expand(&self, local: SubsetMask) -> SubsetMask {
        local
            .iter()
            .fold(SubsetMask::EMPTY, |acc, k| acc | SubsetMask::singleton(self.positions[k]))
    }
}

/// `beta_J(z)` for every nonempty `J` inside the support `s`, computed by the
/// doubling recurrence over the support's own positions.
fn support_products<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    z: usize,
    s: SubsetMask,
) -> Result<(LocalVars, Vec<T>)> {
    if s.len() > HARD_CAP {
        return Err(Error::Capacity { n: s.len(), cap: HARD_CAP });
    }
    let local = LocalVars::new(s);
    let per: Vec<T> = local
        .positions
        .iter()
        .map(|&i| model.beta(obs.tokens()[i], z))
        .collect();
    let mut prod = vec![T::zero(); 1usize << s.len()];
    prod[0] = T::one();
    for mask in 1..prod.len() {
        prod[mask] = prod[mask & (mask - 1)] * per[mask.trailing_zeros() as usize];
    }
    Ok((local, prod))
}

/// Precomputed per-bag factor products for one model, observation sequence,
/// decomposition and threshold. Coefficients for any number of targets can
/// then be read off by elimination.
#[derive(Clone, Debug)]
pub struct SparsePlan<T> {
    td: TreeDecomposition,
    locals: Vec<LocalVars>,
    base: Vec<TruncatedPoly<T>>,
    assignment: BagAssignment,
    n: usize,
}

impl<T: Scalar> SparsePlan<T> {
    pub fn new(model: &Model<T>, obs: &ObservationSeq, td: &TreeDecomposition, eps: T) -> Result<Self> {
        if eps < T::zero() {
            return Err(Error::Domain("eps must be non-negative".into()));
        }
        let n = obs.len();
        if let Some(&b) = td.bags().iter().find(|b| !b.fits(n)) {
            return Err(Error::Domain(format!("bag {b} exceeds {n} positions")));
        }

        // <beta_J> over subsets of cause supports, summed in cause order
        let mut moments: BTreeMap<SubsetMask, T> = BTreeMap::new();
        for (z, &a) in model.alpha().iter().enumerate() {
            let s = support(model, obs, z, eps);
            if s.is_empty() {
                continue;
            }
            let (local, prod) = support_products(model, obs, z, s)?;
            for (lj, &p) in prod.iter().enumerate().skip(1) {
                *moments
                    .entry(local.expand(SubsetMask(lj as u64)))
                    .or_insert_with(T::zero) += a * p;
            }
        }
        moments.retain(|_, v| *v != T::zero());

        let assignment = BagAssignment::new(td, moments.keys().copied())?;
        let locals: Vec<LocalVars> = td.bags().iter().map(|&b| LocalVars::new(b)).collect();
        let cap = DenseCap::new(HARD_CAP)?;
        let mut base = locals
            .iter()
            .map(|l| TruncatedPoly::one_with_cap(l.positions.len(), cap))
            .collect::<Result<Vec<_>>>()?;

        let gamma = factorials::<T>(n.max(1));
        for (j, t) in assignment.iter() {
            let c = moments[&j] * gamma[j.len() - 1];
            base[t].mul_affine_in_place(locals[t].compress(j), c)?;
        }

        Ok(SparsePlan {
            td: td.clone(),
            locals,
            base,
            assignment,
            n,
        })
    }

    pub fn decomposition(&self) -> &TreeDecomposition {
        &self.td
    }

    pub fn assignment(&self) -> &BagAssignment {
        &self.assignment
    }

    /// `p~(target)` using the decomposition's own post-order.
    pub fn coefficient(&self, target: SubsetMask) -> Result<T> {
        self.coefficient_in_order(target, &self.td.elimination_order())
    }

    /// `p~(target)` eliminating bags in the given order, which must list
    /// children before parents and end at the root.
    ///
    /// Leaving bag `t` for its parent `s` drops the positions `V_t \ V_s`;
    /// by the running-intersection property none of them occurs again, so
    /// monomials are kept only if they already contain the dropped target
    /// positions and none of the dropped non-target ones.
    pub fn coefficient_in_order(&self, target: SubsetMask, order: &[usize]) -> Result<T> {
        if !target.fits(self.n) {
            return Err(Error::Domain(format!(
                "target {target} outside {} positions",
                self.n
            )));
        }
        if !self.td.is_valid_order(order) {
            return Err(Error::Domain("elimination order is not children-first".into()));
        }
        let mut polys = self.base.clone();
        for &t in order {
            let Some(s) = self.td.parent(t) else { continue };
            let (vt, vs) = (self.td.bag(t), self.td.bag(s));
            let lost = vt - vs;
            let lt = &self.locals[t];
            let residue = polys[t]
                .restrict_and_divide(lt.compress(lost & target), lt.compress(lost - target))?;
            let moved = self.transfer(&residue, t, s)?;
            polys[s] = polys[s].mul(&moved)?;
        }
        let root = self.td.root();
        let read = self.locals[root].compress(self.td.bag(root) & target);
        Ok(polys[root].coefficient(read))
    }

    /// Re-expresses a polynomial over bag `t`'s variables (using only the
    /// shared ones) in bag `s`'s variables.
    fn transfer(&self, p: &TruncatedPoly<T>, t: usize, s: usize) -> Result<TruncatedPoly<T>> {
        let (lt, ls) = (&self.locals[t], &self.locals[s]);
        let mut out = TruncatedPoly::zero_with_cap(ls.positions.len(), DenseCap::new(HARD_CAP)?)?;
        for (k, &c) in p.coeffs().iter().enumerate() {
            if c != T::zero() {
                let global = lt.expand(SubsetMask(k as u64));
                out.set_coefficient(ls.compress(global), c)?;
            }
        }
        Ok(out)
    }
}

/// `p~(target)` by tree elimination.
pub fn sparse_coefficient<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    td: &TreeDecomposition,
    target: SubsetMask,
    eps: T,
) -> Result<T> {
    SparsePlan::new(model, obs, td, eps)?.coefficient(target)
}

/// Posterior means where only subsets of each cause's support contribute.
/// The needed `p~(W \ J)` values are memoized by target mask.
pub fn sparse_posterior_mean<T: Scalar>(
    model: &Model<T>,
    obs: &ObservationSeq,
    td: &TreeDecomposition,
    eps: T,
) -> Result<InferenceResult<T>> {
    model.require_statistical()?;
    let total = model.alpha_total();
    if total <= T::zero() {
        return Err(Error::Domain("|alpha| must be positive".into()));
    }
    let plan = SparsePlan::new(model, obs, td, eps)?;
    let n = obs.len();
    let full = obs.full_mask();
    let ptilde_full = plan.coefficient(full)?;
    if ptilde_full == T::zero() {
        return Err(Error::DegenerateEvidence(
            "observations have probability zero under the model".into(),
        ));
    }

    let fact = factorials::<T>(n);
    let mut memo: HashMap<SubsetMask, T> = HashMap::new();
    memo.insert(full, ptilde_full);
    let denom = T::count(n) + total;
    let mut theta_mean = Vec::with_capacity(model.num_causes());
    for (z, &a) in model.alpha().iter().enumerate() {
        let s = support(model, obs, z, eps);
        let (local, prod) = support_products(model, obs, z, s)?;
        let mut acc = T::zero();
        for (lj, &p) in prod.iter().enumerate() {
            let j = local.expand(SubsetMask(lj as u64));
            let rest = full - j;
            let pt = match memo.get(&rest) {
                Some(&v) => v,
                None => {
                    let v = plan.coefficient(rest)?;
                    memo.insert(rest, v);
                    v
                }
            };
            acc += p * fact[j.len()] * pt / ptilde_full;
        }
        theta_mean.push(a * acc / denom);
    }

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("n".to_string(), n.to_string());
    diagnostics.insert("causes".to_string(), model.num_causes().to_string());
    diagnostics.insert("width".to_string(), td.width().to_string());
    diagnostics.insert("bags".to_string(), td.len().to_string());
    diagnostics.insert("contributing_subsets".to_string(), plan.assignment().len().to_string());
    diagnostics.insert("distinct_targets".to_string(), memo.len().to_string());
    diagnostics.insert("eps".to_string(), eps.to_string());
    diagnostics.insert("approximate".to_string(), (eps > T::zero()).to_string());

    Ok(InferenceResult {
        ptilde_full,
        probability: ptilde_full / pochhammer(total, n),
        log_probability: ptilde_full.ln() - ln_pochhammer(total, n),
        theta_mean,
        method: "sparse".to_string(),
        diagnostics,
    })
}
