//! The truncated algebra `R[X_0, ..., X_{n-1}] / (X_0^2, ..., X_{n-1}^2)`.
//!
//! Every element is a dense table of `2^n` coefficients indexed by subset
//! masks in ascending order: bit `i` of the mask stands for the variable of
//! observation position `i`.

use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Widest subset a mask can represent.
pub const MAX_POSITIONS: usize = 64;

/// Hard ceiling for dense `2^n` tables.
pub const HARD_CAP: usize = 24;

/// Dense table cap applied when none is configured.
pub const DEFAULT_CAP: usize = 20;

/// A subset of observation positions `{0, ..., n-1}` stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    /// The full set `{0, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_POSITIONS, "mask width exceeded");
        if n == MAX_POSITIONS {
            SubsetMask(u64::MAX)
        } else {
            SubsetMask((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_POSITIONS, "mask width exceeded");
        SubsetMask(1u64 << i)
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(positions: I) -> Self {
        positions
            .into_iter()
            .fold(Self::EMPTY, |acc, i| acc | Self::singleton(i))
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    /// The mask as a table index.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < MAX_POSITIONS && self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: SubsetMask) -> bool {
        self.0 & other.0 == 0
    }

    /// True when no bit at or above `n` is set.
    #[inline]
    pub fn fits(self, n: usize) -> bool {
        n >= MAX_POSITIONS || self.0 >> n == 0
    }

    #[inline]
    pub fn lowest(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Positions in ascending order.
    pub fn iter(self) -> Positions {
        Positions(self.0)
    }

    /// All submasks, from `self` down to the empty set.
    pub fn submasks(self) -> Submasks {
        Submasks {
            of: self.0,
            next: Some(self.0),
        }
    }
}

impl BitOr for SubsetMask {
    type Output = SubsetMask;
    fn bitor(self, rhs: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 | rhs.0)
    }
}

impl BitAnd for SubsetMask {
    type Output = SubsetMask;
    fn bitand(self, rhs: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 & rhs.0)
    }
}

impl Sub for SubsetMask {
    type Output = SubsetMask;
    fn sub(self, rhs: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 & !rhs.0)
    }
}

impl Not for SubsetMask {
    type Output = SubsetMask;
    fn not(self) -> SubsetMask {
        SubsetMask(!self.0)
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over set bit positions.
#[derive(Clone, Debug)]
pub struct Positions(u64);

impl Iterator for Positions {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Positions {}

/// Descending submask enumeration.
#[derive(Clone, Debug)]
pub struct Submasks {
    of: u64,
    next: Option<u64>,
}

impl Iterator for Submasks {
    type Item = SubsetMask;
    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & self.of)
        };
        Some(SubsetMask(cur))
    }
}

/// Configured limit on the variable count of dense tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DenseCap(usize);

impl DenseCap {
    pub fn new(cap: usize) -> Result<Self> {
        if cap > HARD_CAP {
            return Err(Error::Capacity { n: cap, cap: HARD_CAP });
        }
        Ok(DenseCap(cap))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn check(self, n: usize) -> Result<()> {
        if n > self.0 {
            Err(Error::Capacity { n, cap: self.0 })
        } else {
            Ok(())
        }
    }
}

impl Default for DenseCap {
    fn default() -> Self {
        DenseCap(DEFAULT_CAP)
    }
}

/// Element of the algebra in `n` variables modulo their squares.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPoly<T> {
    n: usize,
    coeff: Vec<T>,
}

impl<T: Scalar> TruncatedPoly<T> {
    /// Multiplicative identity under the default cap.
    pub fn one(n: usize) -> Result<Self> {
        Self::one_with_cap(n, DenseCap::default())
    }

    pub fn one_with_cap(n: usize, cap: DenseCap) -> Result<Self> {
        let mut p = Self::zero_with_cap(n, cap)?;
        p.coeff[0] = T::one();
        Ok(p)
    }

    pub fn zero_with_cap(n: usize, cap: DenseCap) -> Result<Self> {
        cap.check(n)?;
        Ok(TruncatedPoly {
            n,
            coeff: vec![T::zero(); 1usize << n],
        })
    }

    /// Wraps a coefficient table; its length must be a power of two `2^n`
    /// with `n <= HARD_CAP`.
    pub fn from_coeffs(coeff: Vec<T>) -> Result<Self> {
        let len = coeff.len();
        if !len.is_power_of_two() {
            return Err(Error::Domain(format!(
                "coefficient table length {len} is not a power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > HARD_CAP {
            return Err(Error::Capacity { n, cap: HARD_CAP });
        }
        Ok(TruncatedPoly { n, coeff })
    }

    /// `1 + c X^J`.
    pub fn affine(n: usize, j: SubsetMask, c: T) -> Result<Self> {
        let mut p = Self::one_with_cap(n, DenseCap(HARD_CAP))?;
        p.mul_affine_in_place(j, c)?;
        Ok(p)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.n)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeff
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeff
    }

    /// Coefficient of `X^M`; zero for masks outside the variable range.
    #[inline]
    pub fn coefficient(&self, m: SubsetMask) -> T {
        if m.fits(self.n) {
            self.coeff[m.index()]
        } else {
            T::zero()
        }
    }

    pub fn set_coefficient(&mut self, m: SubsetMask, value: T) -> Result<()> {
        self.check_range(m)?;
        self.coeff[m.index()] = value;
        Ok(())
    }

    fn check_range(&self, m: SubsetMask) -> Result<()> {
        if m.fits(self.n) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "mask {m} outside {} variables",
                self.n
            )))
        }
    }

    /// `self * (1 + c X^J)`.
    pub fn mul_affine(&self, j: SubsetMask, c: T) -> Result<Self> {
        let mut out = self.clone();
        out.mul_affine_in_place(j, c)?;
        Ok(out)
    }

    /// In-place `self *= 1 + c X^J`.
    ///
    /// Walks the masks `I` disjoint from `J` in descending order and adds
    /// `c * coeff[I]` into `coeff[I | J]`. Sources never contain `J`, so no
    /// slot is read after it was written.
    pub fn mul_affine_in_place(&mut self, j: SubsetMask, c: T) -> Result<()> {
        if j.is_empty() {
            return Err(Error::Domain(
                "affine factor needs a nonempty subset".into(),
            ));
        }
        self.check_range(j)?;
        let free = self.full_mask() - j;
        let jb = j.index();
        for i in free.submasks() {
            let src = self.coeff[i.index()];
            if src != T::zero() {
                self.coeff[i.index() | jb] += c * src;
            }
        }
        Ok(())
    }

    /// Disjoint-subset convolution, `O(3^n)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Domain(format!(
                "variable counts differ: {} vs {}",
                self.n, other.n
            )));
        }
        let mut out = vec![T::zero(); self.coeff.len()];
        for (a, &pa) in self.coeff.iter().enumerate() {
            if pa == T::zero() {
                continue;
            }
            let free = SubsetMask(!(a as u64)) & self.full_mask();
            for b in free.submasks() {
                let qb = other.coeff[b.index()];
                if qb != T::zero() {
                    out[a | b.index()] += pa * qb;
                }
            }
        }
        Ok(TruncatedPoly { n: self.n, coeff: out })
    }

    /// `self * X^M`.
    pub fn mul_monomial(&self, m: SubsetMask) -> Result<Self> {
        self.check_range(m)?;
        let mut out = vec![T::zero(); self.coeff.len()];
        let free = self.full_mask() - m;
        for i in free.submasks() {
            out[(i | m).index()] = self.coeff[i.index()];
        }
        Ok(TruncatedPoly { n: self.n, coeff: out })
    }

    /// Keeps monomials containing all of `required` and none of `forbidden`,
    /// then divides by `X^required`.
    ///
    /// The result keeps the same variable count; variables in
    /// `required | forbidden` simply no longer occur.
    pub fn restrict_and_divide(&self, required: SubsetMask, forbidden: SubsetMask) -> Result<Self> {
        if !required.is_disjoint(forbidden) {
            return Err(Error::Domain(format!(
                "required {required} and forbidden {forbidden} overlap"
            )));
        }
        self.check_range(required)?;
        self.check_range(forbidden)?;
        let mut out = vec![T::zero(); self.coeff.len()];
        let free = self.full_mask() - required - forbidden;
        for i in free.submasks() {
            out[i.index()] = self.coeff[(i | required).index()];
        }
        Ok(TruncatedPoly { n: self.n, coeff: out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> TruncatedPoly<f64> {
        TruncatedPoly::from_coeffs(c.to_vec()).unwrap()
    }

    #[test]
    fn identity_tables() {
        assert_eq!(TruncatedPoly::<f64>::one(2).unwrap().coeffs(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(TruncatedPoly::<f64>::one(0).unwrap().coeffs(), &[1.0]);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            TruncatedPoly::<f64>::one(25),
            Err(Error::Capacity { n: 25, cap: DEFAULT_CAP })
        ));
        assert!(TruncatedPoly::<f64>::one(21).is_err());
        let raised = DenseCap::new(22).unwrap();
        assert_eq!(TruncatedPoly::<f32>::one_with_cap(1, raised).unwrap().n(), 1);
        assert!(DenseCap::new(25).is_err());
    }

    #[test]
    fn affine_products() {
        let one = TruncatedPoly::<f64>::one(2).unwrap();
        let p = one
            .mul_affine(SubsetMask(0b01), 2.0)
            .unwrap()
            .mul_affine(SubsetMask(0b10), 3.0)
            .unwrap();
        assert_eq!(p.coefficient(SubsetMask(0b11)), 6.0);

        let q = TruncatedPoly::<f64>::one(1)
            .unwrap()
            .mul_affine(SubsetMask(1), 1.0)
            .unwrap()
            .mul_affine(SubsetMask(1), 1.0)
            .unwrap();
        assert_eq!(q.coeffs(), &[1.0, 2.0]);

        let r = one.mul_affine(SubsetMask(0b11), 5.0).unwrap();
        assert_eq!(r.coeffs(), &[1.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn affine_rejects_empty_subset() {
        let one = TruncatedPoly::<f64>::one(2).unwrap();
        assert!(matches!(one.mul_affine(SubsetMask::EMPTY, 1.0), Err(Error::Domain(_))));
        assert!(one.mul_affine(SubsetMask(0b100), 1.0).is_err());
    }

    #[test]
    fn general_product() {
        let p = poly(&[1.0, 2.0, 0.0, 0.0]);
        let q = poly(&[1.0, 0.0, 3.0, 0.0]);
        assert_eq!(p.mul(&q).unwrap().coeffs(), &[1.0, 2.0, 3.0, 6.0]);

        let one = TruncatedPoly::<f64>::one(2).unwrap();
        assert_eq!(p.mul(&one).unwrap(), p);

        // (1 + X0)(1 + X0 + X1) = 1 + 2X0 + X1 + X0X1
        let a = poly(&[1.0, 1.0, 0.0, 0.0]);
        let b = poly(&[1.0, 1.0, 1.0, 0.0]);
        assert_eq!(a.mul(&b).unwrap().coeffs(), &[1.0, 2.0, 1.0, 1.0]);

        let c = TruncatedPoly::<f64>::one(3).unwrap();
        assert!(matches!(a.mul(&c), Err(Error::Domain(_))));
    }

    #[test]
    fn coefficient_lookup() {
        let one = TruncatedPoly::<f64>::one(3).unwrap();
        assert_eq!(one.coefficient(SubsetMask::EMPTY), 1.0);
        assert_eq!(one.coefficient(SubsetMask::from_positions([0, 2])), 0.0);
        let p = poly(&[1.0, 0.0, 0.0, 5.0]);
        assert_eq!(p.coefficient(SubsetMask::from_positions([0, 1])), 5.0);
    }

    #[test]
    fn restriction() {
        let p = poly(&[1.0, 2.0, 3.0, 6.0]);
        let r = p.restrict_and_divide(SubsetMask(0b01), SubsetMask::EMPTY).unwrap();
        assert_eq!(r.coeffs(), &[2.0, 0.0, 6.0, 0.0]);
        let r = p.restrict_and_divide(SubsetMask::EMPTY, SubsetMask(0b10)).unwrap();
        assert_eq!(r.coeffs(), &[1.0, 2.0, 0.0, 0.0]);
        let r = p.restrict_and_divide(SubsetMask(0b11), SubsetMask::EMPTY).unwrap();
        assert_eq!(r.coeffs(), &[6.0, 0.0, 0.0, 0.0]);
        assert!(p.restrict_and_divide(SubsetMask(0b01), SubsetMask(0b11)).is_err());
    }

    #[test]
    fn monomial_shift() {
        let p = poly(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(p.mul_monomial(SubsetMask(0b10)).unwrap().coeffs(), &[0.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn mask_helpers() {
        let m = SubsetMask::from_positions([0, 3, 5]);
        assert_eq!(m.len(), 3);
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![0, 3, 5]);
        assert_eq!(m.submasks().count(), 8);
        assert_eq!(m.submasks().next(), Some(m));
        assert_eq!(m.submasks().last(), Some(SubsetMask::EMPTY));
        assert_eq!(format!("{m}"), "{0,3,5}");
        assert!(m.fits(6) && !m.fits(5));
        assert_eq!(SubsetMask::full(64).len(), 64);
    }
}
