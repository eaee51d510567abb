//! Finite unions of half-open subintervals of `[0, 1]`.
//!
//! Everything downstream (preimages, correlations, cylinder masses) is
//! built on [`IntervalSet`]. Sets are kept in a canonical form: parts
//! sorted, pairwise disjoint, with a strict gap between neighbours, so
//! structural equality is set equality.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric;

/// Numeric type used for interval endpoints.
///
/// `BigRational` is the exact default; `f64` is used for maps whose inverse
/// branches are transcendental (logistic, Chebyshev cubic, Blaschke).
pub trait Endpoint: Clone + PartialOrd + fmt::Debug + Send + Sync + 'static {
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn origin() -> Self;
    fn unit_point() -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn to_rational(&self) -> BigRational;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn parse(s: &str) -> Result<Self>;
    fn render(&self) -> String;

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

impl Endpoint for BigRational {
    const EXACT: bool = true;

    fn origin() -> Self {
        Zero::zero()
    }
    fn unit_point() -> Self {
        One::one()
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_f64(x: f64) -> Self {
        numeric::rational_from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        numeric::to_f64(self)
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn parse(s: &str) -> Result<Self> {
        numeric::parse_real(s)
    }
    fn render(&self) -> String {
        numeric::format_rational(self)
    }
}

impl Endpoint for f64 {
    const EXACT: bool = false;

    fn origin() -> Self {
        0.0
    }
    fn unit_point() -> Self {
        1.0
    }
    fn from_rational(r: &BigRational) -> Self {
        numeric::to_f64(r)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> BigRational {
        numeric::rational_from_f64(*self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn parse(s: &str) -> Result<Self> {
        numeric::parse_real(s).map(|r| numeric::to_f64(&r))
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

/// A non-empty half-open interval `[lo, hi)` inside `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<E = BigRational> {
    pub lo: E,
    pub hi: E,
}

impl<E: Endpoint> Interval<E> {
    /// Returns `None` for degenerate or inverted endpoints.
    pub fn new(lo: E, hi: E) -> Option<Self> {
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval { lo: E::origin(), hi: E::unit_point() }
    }

    pub fn length(&self) -> E {
        self.hi.sub(&self.lo)
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo.to_f64() <= x && x < self.hi.to_f64()
    }

    pub fn contains(&self, x: &E) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi <= other.hi { &self.hi } else { &other.hi };
        Interval::new(lo.clone(), hi.clone())
    }

    pub fn convert<F: Endpoint>(&self) -> Interval<F> {
        Interval {
            lo: F::from_rational(&self.lo.to_rational()),
            hi: F::from_rational(&self.hi.to_rational()),
        }
    }
}

/// Canonical finite union of disjoint half-open intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet<E = BigRational> {
    parts: Vec<Interval<E>>,
}

impl<E: Endpoint> Default for IntervalSet<E> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<E: Endpoint> IntervalSet<E> {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn unit() -> Self {
        IntervalSet { parts: vec![Interval::unit()] }
    }

    /// Single interval `[lo, hi)`; validated like [`normalize`](Self::normalize).
    pub fn interval(lo: E, hi: E) -> Result<Self> {
        Self::normalize(vec![(lo, hi)])
    }

    /// Builds the canonical form of a raw collection of intervals.
    ///
    /// Degenerate pieces (`lo == hi`) are dropped; overlapping and adjacent
    /// pieces are merged.
    pub fn normalize(raw: Vec<(E, E)>) -> Result<Self> {
        let zero = E::origin();
        let one = E::unit_point();
        for (lo, hi) in &raw {
            if lo < &zero || hi > &one || lo > hi {
                return Err(Error::Domain(format!(
                    "interval [{}, {}) is not inside [0, 1]",
                    lo.render(),
                    hi.render()
                )));
            }
        }
        Ok(Self::from_unchecked(raw))
    }

    /// Canonicalizes without the domain check; callers guarantee
    /// `0 <= lo <= hi <= 1`.
    pub(crate) fn from_unchecked(mut raw: Vec<(E, E)>) -> Self {
        raw.retain(|(lo, hi)| lo < hi);
        raw.sort_by(|a, b| a.0.cmp_total(&b.0));
        let mut parts: Vec<Interval<E>> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match parts.last_mut() {
                Some(last) if lo <= last.hi => {
                    if hi > last.hi {
                        last.hi = hi;
                    }
                }
                _ => parts.push(Interval { lo, hi }),
            }
        }
        IntervalSet { parts }
    }

    pub fn parts(&self) -> &[Interval<E>] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Interval<E>> {
        self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// Lebesgue measure.
    pub fn length(&self) -> E {
        self.parts
            .iter()
            .fold(E::origin(), |acc, p| acc.add(&p.length()))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.parts, &other.parts);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if let Some(iv) = a[i].intersect(&b[j]) {
                out.push(iv);
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { parts: out }
    }

    pub fn union(&self, other: &Self) -> Self {
        let raw = self
            .parts
            .iter()
            .chain(other.parts.iter())
            .map(|p| (p.lo.clone(), p.hi.clone()))
            .collect();
        Self::from_unchecked(raw)
    }

    /// `[0, 1)` minus the set.
    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cursor = E::origin();
        for p in &self.parts {
            if let Some(iv) = Interval::new(cursor.clone(), p.lo.clone()) {
                out.push(iv);
            }
            cursor = p.hi.clone();
        }
        if let Some(iv) = Interval::new(cursor, E::unit_point()) {
            out.push(iv);
        }
        IntervalSet { parts: out }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersect(&other.complement())
    }

    pub fn contains(&self, x: &E) -> bool {
        let idx = self.parts.partition_point(|p| &p.lo <= x);
        idx > 0 && self.parts[idx - 1].contains(x)
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let idx = self.parts.partition_point(|p| p.lo.to_f64() <= x);
        idx > 0 && self.parts[idx - 1].contains_f64(x)
    }

    /// Converts endpoints to another representation and re-canonicalizes.
    pub fn convert<F: Endpoint>(&self) -> IntervalSet<F> {
        let raw = self
            .parts
            .iter()
            .map(|p| {
                (
                    F::from_rational(&p.lo.to_rational()),
                    F::from_rational(&p.hi.to_rational()),
                )
            })
            .collect();
        IntervalSet::from_unchecked(raw)
    }

    /// f64 endpoint pairs, for fast membership tests.
    pub fn to_f64_pairs(&self) -> Vec<(f64, f64)> {
        self.parts.iter().map(|p| (p.lo.to_f64(), p.hi.to_f64())).collect()
    }

    /// Parses `"lo1,hi1;lo2,hi2;..."`. The empty string and `"empty"`
    /// denote the empty set.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() || t == "empty" {
            return Ok(Self::empty());
        }
        let mut raw = Vec::new();
        for (k, piece) in t.split(';').enumerate() {
            let (lo, hi) = piece.split_once(',').ok_or_else(|| {
                Error::parse(format!("interval {} of '{t}'", k + 1), "expected 'lo,hi'")
            })?;
            raw.push((E::parse(lo)?, E::parse(hi)?));
        }
        Self::normalize(raw)
    }
}

impl<E: Endpoint> fmt::Display for IntervalSet<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self
            .parts
            .iter()
            .map(|p| format!("{},{}", p.lo.render(), p.hi.render()))
            .collect();
        write!(f, "{}", text.join(";"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use proptest::prelude::*;

    type Set = IntervalSet<BigRational>;

    fn set(pairs: &[(i64, i64, i64, i64)]) -> Set {
        Set::normalize(pairs.iter().map(|&(a, b, c, d)| (rat(a, b), rat(c, d))).collect()).unwrap()
    }

    #[test]
    fn normalize_merges_adjacent_and_overlapping() {
        assert_eq!(set(&[(0, 1, 1, 2), (1, 2, 7, 10)]), set(&[(0, 1, 7, 10)]));
        assert_eq!(set(&[(2, 10, 4, 10), (1, 10, 3, 10)]), set(&[(1, 10, 4, 10)]));
        let e = Set::normalize(vec![]).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.length(), rat(0, 1));
    }

    #[test]
    fn normalize_rejects_out_of_range() {
        assert!(matches!(
            Set::normalize(vec![(rat(-1, 2), rat(1, 2))]),
            Err(Error::Domain(_))
        ));
        assert!(Set::normalize(vec![(rat(1, 2), rat(3, 2))]).is_err());
        assert!(Set::normalize(vec![(rat(3, 4), rat(1, 2))]).is_err());
    }

    #[test]
    fn degenerate_pieces_vanish() {
        assert!(set(&[(1, 2, 1, 2)]).is_empty());
    }

    #[test]
    fn boolean_operations() {
        let a = set(&[(0, 1, 1, 2)]);
        let b = set(&[(1, 4, 3, 4)]);
        assert_eq!(a.intersect(&b), set(&[(1, 4, 1, 2)]));
        assert!(Set::unit().complement().is_empty());
        let c = set(&[(3, 10, 6, 10)]);
        assert_eq!(c.union(&c.complement()), Set::unit());
    }

    #[test]
    fn lengths() {
        assert_eq!(set(&[(0, 1, 1, 3)]).length(), rat(1, 3));
        assert_eq!(set(&[(0, 1, 1, 4), (1, 2, 3, 4)]).length(), rat(1, 2));
    }

    #[test]
    fn text_round_trip() {
        let s = set(&[(0, 1, 1, 4), (1, 2, 3, 4)]);
        assert_eq!(s.to_string(), "0,1/4;1/2,3/4");
        assert_eq!(Set::parse(&s.to_string()).unwrap(), s);
        assert_eq!(Set::parse("0.25,0.5").unwrap(), set(&[(1, 4, 1, 2)]));
        assert!(Set::parse("").unwrap().is_empty());
        assert!(Set::parse("0.1").is_err());
    }

    fn arb_set() -> impl Strategy<Value = Set> {
        prop::collection::vec((0i64..=64, 0i64..=64), 0..8).prop_map(|v| {
            let raw = v
                .into_iter()
                .map(|(a, b)| {
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    (rat(lo, 64), rat(hi, 64))
                })
                .collect();
            Set::normalize(raw).unwrap()
        })
    }

    proptest! {
        #[test]
        fn inclusion_exclusion(a in arb_set(), b in arb_set()) {
            prop_assert_eq!(a.union(&b).length() + a.intersect(&b).length(), a.length() + b.length());
        }

        #[test]
        fn complement_is_involutive(a in arb_set()) {
            prop_assert_eq!(a.complement().complement(), a);
        }

        #[test]
        fn normalize_is_idempotent(a in arb_set()) {
            let raw = a.parts().iter().map(|p| (p.lo.clone(), p.hi.clone())).collect();
            prop_assert_eq!(Set::normalize(raw).unwrap(), a);
        }

        #[test]
        fn de_morgan(a in arb_set(), b in arb_set()) {
            prop_assert_eq!(a.union(&b).complement(), a.complement().intersect(&b.complement()));
            prop_assert_eq!(a.intersect(&b).complement(), a.complement().union(&b.complement()));
        }
    }
}
