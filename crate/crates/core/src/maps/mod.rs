//! Piecewise-monotone interval maps with exact branch data.

mod blaschke;
mod branch;
mod zoo;

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use blaschke::{make_blaschke_circle, BlaschkeData};
pub use branch::{psi, psi_inverse, Branch, BranchForm};
pub use zoo::*;

use crate::error::{Error, Result};
use crate::interval::{Endpoint, Interval, IntervalSet};
use crate::numeric::{self, rat};

/// Limit on the predicted number of pieces produced by iterated preimages.
pub const PREIMAGE_PIECE_LIMIT: u128 = 10_000_000;

/// Infinite families of branches parametrised by a positive integer label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountableFamily {
    /// `1/x - n` on `[1/(n+1), 1/n)`.
    Gauss,
    /// `n(n+1)x - n` on `[1/(n+1), 1/n)`.
    Luroth,
    /// `x - 1 + 3/2^(n+1)` on `[1 - 2^-n, 1 - 2^-(n+1))`, labels from 0.
    Odometer,
}

impl CountableFamily {
    pub fn branch(&self, n: u64) -> Branch {
        match self {
            CountableFamily::Gauss => {
                let domain = Interval { lo: rat(1, n as i64 + 1), hi: rat(1, n as i64) };
                Branch::new(n, domain, Interval::unit(), false, BranchForm::Reciprocal { digit: n })
            }
            CountableFamily::Luroth => {
                let k = BigInt::from(n);
                let slope = BigRational::from_integer(&k * (&k + 1u32));
                let domain = Interval { lo: rat(1, n as i64 + 1), hi: rat(1, n as i64) };
                Branch::affine(n, domain, slope, BigRational::from_integer(-k))
            }
            CountableFamily::Odometer => {
                let p = BigInt::one() << n as usize;
                let lo = BigRational::one() - BigRational::new(BigInt::one(), p.clone());
                let hi = BigRational::one() - BigRational::new(BigInt::one(), &p * 2);
                let offset = BigRational::new(BigInt::from(3), &p * 2) - BigRational::one();
                Branch::affine(n, Interval { lo, hi }, BigRational::one(), offset)
            }
        }
    }

    /// Label of the branch containing `x`, if any.
    pub fn label_at(&self, x: f64) -> Option<u64> {
        if !(0.0..1.0).contains(&x) {
            return None;
        }
        match self {
            CountableFamily::Gauss | CountableFamily::Luroth => {
                if x == 0.0 {
                    return None;
                }
                let n = (1.0 / x).floor();
                if n > 1e18 {
                    None
                } else {
                    Some((n as u64).max(1))
                }
            }
            CountableFamily::Odometer => {
                let n = (-(1.0 - x).log2()).floor();
                if n > 1e18 { None } else { Some(n as u64) }
            }
        }
    }

    pub fn first_label(&self) -> u64 {
        match self {
            CountableFamily::Odometer => 0,
            _ => 1,
        }
    }

    fn eval_f64(&self, x: f64) -> f64 {
        match self {
            CountableFamily::Gauss => {
                if x <= 0.0 {
                    return 0.0;
                }
                let v = 1.0 / x;
                v - v.floor()
            }
            _ => match self.label_at(x) {
                Some(n) => self.branch(n).forward_f64(x),
                None => 0.0,
            },
        }
    }
}

/// Part of a countable map handled by its closed-form family.
#[derive(Clone, Debug)]
pub struct Tail {
    pub family: CountableFamily,
    pub region: Interval<BigRational>,
}

/// A map of `[0, 1)` given by finitely many enumerated monotone branches plus an optional
/// countable tail and an optional region where it is undefined.
#[derive(Clone, Debug)]
pub struct PiecewiseMap {
    pub name: String,
    branches: Vec<Branch>,
    starts: Vec<f64>,
    pub tail: Option<Tail>,
    /// Points with no image, such as the top level of a finite tower stage.
    pub undefined: IntervalSet,
    /// Set by constructors whose branches all preserve Lebesgue measure.
    pub lebesgue_preserving: bool,
    /// Integer base `b` when the map is `x -> bx mod 1`.
    pub integer_base: Option<u32>,
    pub blaschke: Option<Arc<BlaschkeData>>,
}

/// Result of pulling a set back through a map.
#[derive(Clone, Debug)]
pub struct Preimage<E: Endpoint = BigRational> {
    pub set: IntervalSet<E>,
    /// Region whose contribution was not enumerated; its measure bounds the error.
    pub tail: Option<Interval<BigRational>>,
}

impl<E: Endpoint> Preimage<E> {
    /// Lebesgue length of the unenumerated region.
    pub fn tail_bound(&self) -> BigRational {
        self.tail.as_ref().map(|t| t.length()).unwrap_or_else(BigRational::zero)
    }
}

impl PiecewiseMap {
    /// Assembles a map from branches with pairwise disjoint domains.
    pub fn new(name: &str, mut branches: Vec<Branch>) -> Result<Self> {
        branches.sort_by(|a, b| a.domain.lo.cmp(&b.domain.lo));
        for w in branches.windows(2) {
            if w[0].domain.hi > w[1].domain.lo {
                return Err(Error::Parameter(format!(
                    "branch domains overlap near {}",
                    numeric::format_rational(&w[1].domain.lo)
                )));
            }
        }
        for b in &branches {
            if b.domain.lo >= b.domain.hi || b.domain.lo.is_negative() || b.domain.hi > BigRational::one() {
                return Err(Error::Parameter("branch domain must be a non-empty subinterval of [0, 1)".into()));
            }
        }
        let starts = branches.iter().map(|b| b.domain_f64().0).collect();
        Ok(PiecewiseMap {
            name: name.to_string(),
            branches,
            starts,
            tail: None,
            undefined: IntervalSet::empty(),
            lebesgue_preserving: false,
            integer_base: None,
            blaschke: None,
        })
    }

    pub fn with_tail(mut self, family: CountableFamily, region: Interval<BigRational>) -> Self {
        self.tail = Some(Tail { family, region });
        self
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Enumerated branch domains in increasing order.
    pub fn natural_partition(&self) -> Vec<Interval<BigRational>> {
        self.branches.iter().map(|b| b.domain.clone()).collect()
    }

    pub fn is_countable(&self) -> bool {
        self.tail.is_some()
    }

    /// Index of the enumerated branch containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let i = self.starts.partition_point(|&s| s <= x);
        if i == 0 {
            return None;
        }
        let (_, hi) = self.branches[i - 1].domain_f64();
        if x < hi { Some(i - 1) } else { None }
    }

    /// Index of the enumerated branch containing an exact point.
    pub fn locate_exact(&self, x: &BigRational) -> Option<usize> {
        let i = self.branches.partition_point(|b| &b.domain.lo <= x);
        if i == 0 {
            return None;
        }
        if x < &self.branches[i - 1].domain.hi { Some(i - 1) } else { None }
    }

    /// Branch containing `x`, including tail branches.
    pub fn branch_at(&self, x: f64) -> Option<std::borrow::Cow<'_, Branch>> {
        if let Some(i) = self.locate(x) {
            return Some(std::borrow::Cow::Borrowed(&self.branches[i]));
        }
        let t = self.tail.as_ref()?;
        if !t.region.contains_f64(x) {
            return None;
        }
        t.family.label_at(x).map(|n| std::borrow::Cow::Owned(t.family.branch(n)))
    }

    /// Branch carrying a given label, including tail branches.
    pub fn branch_by_label(&self, label: u64) -> Option<std::borrow::Cow<'_, Branch>> {
        if let Some(b) = self.branches.iter().find(|b| b.label == label) {
            return Some(std::borrow::Cow::Borrowed(b));
        }
        let t = self.tail.as_ref()?;
        if label < t.family.first_label() {
            return None;
        }
        let b = t.family.branch(label);
        if b.domain.lo >= t.region.lo && b.domain.hi <= t.region.hi {
            Some(std::borrow::Cow::Owned(b))
        } else {
            None
        }
    }

    /// Whether float64 orbits collapse onto dyadic rationals: integer slopes with dyadic offsets.
    pub fn float_collapses(&self) -> bool {
        self.tail.is_none()
            && self.branches.iter().all(|b| match &b.form {
                BranchForm::Affine { slope, offset } => {
                    slope.is_integer() && slope.abs() >= numeric::int(2) && offset.denom().bits() - 1 == offset.denom().trailing_zeros().unwrap_or(0)
                }
                _ => false,
            })
    }

    /// Branch containing the fixed-point value `X / 2^bits`.
    pub fn branch_at_fixed(&self, x: &BigInt, bits: u32) -> Option<std::borrow::Cow<'_, Branch>> {
        let inside = |b: &Branch| contains_fixed(&b.domain, x, bits);
        let guess = numeric::fixed_to_f64(x, bits);
        if let Some(i) = self.locate(guess) {
            for j in [i as isize, i as isize - 1, i as isize + 1] {
                if j >= 0 && (j as usize) < self.branches.len() && inside(&self.branches[j as usize]) {
                    return Some(std::borrow::Cow::Borrowed(&self.branches[j as usize]));
                }
            }
        }
        for j in 0..self.branches.len() {
            let b = &self.branches[j];
            let (lo, hi) = b.domain_f64();
            if guess >= lo - 1e-9 && guess <= hi + 1e-9 && inside(b) {
                return Some(std::borrow::Cow::Borrowed(b));
            }
        }
        let t = self.tail.as_ref()?;
        if !contains_fixed(&t.region, x, bits) {
            return None;
        }
        let n0 = match t.family {
            CountableFamily::Gauss | CountableFamily::Luroth => {
                if x.is_zero() {
                    return None;
                }
                let n = (BigInt::one() << bits as usize) / x;
                n.to_u64()?
            }
            CountableFamily::Odometer => t.family.label_at(guess.min(1.0 - f64::EPSILON))?,
        };
        for n in [n0, n0.saturating_sub(1), n0 + 1, n0.saturating_sub(2), n0 + 2] {
            if n < t.family.first_label() {
                continue;
            }
            let b = t.family.branch(n);
            if inside(&b) {
                return Some(std::borrow::Cow::Owned(b));
            }
        }
        None
    }

    /// Floating-point evaluation; `None` where the map is undefined.
    pub fn try_eval_f64(&self, x: f64) -> Option<f64> {
        if let Some(i) = self.locate(x) {
            return Some(self.branches[i].forward_f64(x));
        }
        let t = self.tail.as_ref()?;
        if t.region.contains_f64(x) {
            Some(t.family.eval_f64(x))
        } else {
            None
        }
    }

    /// Floating-point evaluation; undefined points map to 0.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.try_eval_f64(x).unwrap_or(0.0)
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, x: &BigRational) -> Result<BigRational> {
        if x.is_negative() || x >= &BigRational::one() {
            return Err(Error::Domain(format!("{} is outside [0, 1)", numeric::format_rational(x))));
        }
        let b = match self.locate_exact(x) {
            Some(i) => std::borrow::Cow::Borrowed(&self.branches[i]),
            None => {
                let t = self.tail.as_ref().ok_or_else(|| {
                    Error::Domain(format!("map undefined at {}", numeric::format_rational(x)))
                })?;
                if x.is_zero() {
                    return Ok(BigRational::zero());
                }
                let n = match t.family {
                    CountableFamily::Odometer => {
                        let mut n = 0u64;
                        let mut edge = BigRational::one() - rat(1, 2);
                        while x >= &edge {
                            n += 1;
                            edge = (BigRational::one() + edge) / numeric::int(2);
                        }
                        n
                    }
                    _ => numeric::floor_int(&x.recip()).to_u64().unwrap_or(u64::MAX),
                };
                std::borrow::Cow::Owned(t.family.branch(n))
            }
        };
        b.forward::<BigRational>(x)
    }

    /// Branch-wise preimage `T^{-1}(S)`.
    pub fn preimage<E: Endpoint>(&self, s: &IntervalSet<E>) -> Result<Preimage<E>> {
        let mut raw: Vec<(E, E)> = Vec::new();
        for b in &self.branches {
            pull_branch(b, s, &mut raw)?;
        }
        Ok(Preimage { set: IntervalSet::from_unchecked(raw), tail: self.tail.as_ref().map(|t| t.region.clone()) })
    }

    /// Preimage through tail branches with labels up to `up_to`, beyond the enumerated ones.
    pub fn preimage_with_tail<E: Endpoint>(&self, s: &IntervalSet<E>, up_to: u64) -> Result<Preimage<E>> {
        let Some(t) = &self.tail else { return self.preimage(s) };
        let mut raw: Vec<(E, E)> = Vec::new();
        for b in &self.branches {
            pull_branch(b, s, &mut raw)?;
        }
        let mut rest = t.region.clone();
        let mut n = t.family.first_label();
        while n <= up_to {
            let b = t.family.branch(n);
            if b.domain.lo >= t.region.lo && b.domain.hi <= t.region.hi {
                pull_branch(&b, s, &mut raw)?;
                if t.family == CountableFamily::Odometer {
                    rest.lo = b.domain.hi.clone();
                } else {
                    rest.hi = rest.hi.clone().min(b.domain.lo.clone());
                }
            }
            n += 1;
        }
        let tail = Interval::new(rest.lo, rest.hi);
        Ok(Preimage { set: IntervalSet::from_unchecked(raw), tail })
    }

    /// `T^{-n}(S)` with a guard on the predicted number of pieces.
    pub fn preimage_iter<E: Endpoint>(&self, s: &IntervalSet<E>, n: usize) -> Result<Preimage<E>> {
        let per_step = self.branches.len().max(1) as u128;
        let mut cur = s.clone();
        let mut tail = None;
        for _ in 0..n {
            let predicted = cur.len() as u128 * per_step;
            if predicted > PREIMAGE_PIECE_LIMIT {
                return Err(Error::Blowup { predicted, limit: PREIMAGE_PIECE_LIMIT });
            }
            let p = self.preimage(&cur)?;
            if p.tail.is_some() {
                tail = p.tail;
            }
            cur = p.set;
        }
        Ok(Preimage { set: cur, tail })
    }
}

/// `lo <= X / 2^bits < hi` evaluated exactly.
pub fn contains_fixed(iv: &Interval<BigRational>, x: &BigInt, bits: u32) -> bool {
    let lo = iv.lo.numer() << bits as usize;
    let hi = iv.hi.numer() << bits as usize;
    x * iv.lo.denom() >= lo && x * iv.hi.denom() < hi
}

fn pull_branch<E: Endpoint>(b: &Branch, s: &IntervalSet<E>, out: &mut Vec<(E, E)>) -> Result<()> {
    let img: Interval<E> = b.image.convert();
    let dlo = E::from_rational(&b.domain.lo);
    let dhi = E::from_rational(&b.domain.hi);
    let parts = s.parts();
    let start = parts.partition_point(|p| p.hi <= img.lo);
    for p in &parts[start..] {
        if p.lo >= img.hi {
            break;
        }
        let Some(q) = p.intersect(&img) else { continue };
        let u = b.inverse(&q.lo)?;
        let v = b.inverse(&q.hi)?;
        let (lo, hi) = if b.increasing { (u, v) } else { (v, u) };
        let lo = if lo < dlo { dlo.clone() } else { lo };
        let hi = if hi > dhi { dhi.clone() } else { hi };
        if lo < hi {
            out.push((lo, hi));
        }
    }
    Ok(())
}
