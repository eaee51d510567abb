//! Cutting-and-stacking towers, their piecewise translation maps and partition entropy.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::maps::{Branch, CountableFamily, PiecewiseMap};
use crate::numeric::{format_rational, rat, to_f64};
use crate::orbit::DigitTape;

/// Largest tower height that `build_tower` will lay out.
pub const MAX_LEVELS: u64 = 10_000_000;
/// Increment threshold for a convergent-trend verdict.
pub const FINITENESS_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TowerKind {
    /// `q_n = 2`, no spacers.
    Vnk,
    /// `q_n = 3`, one spacer on the middle column.
    Chacon,
    /// `q_n = n + 2`, `s_{n,0} = 0`, `s_{n,i} = i - 1`.
    SmorodinskyAdams,
    /// `s_{n,i} = h_n` for every column; the finiteness series diverges.
    Flood { q: u64 },
    /// Explicit per-stage `q_n` and `s_{n,·}`; the last stage repeats.
    Custom { q: Vec<u64>, s: Vec<Vec<u64>> },
}

/// Cut and spacer parameters of a rank-one construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerSpec {
    pub name: String,
    pub kind: TowerKind,
}

impl TowerSpec {
    pub fn vnk() -> Self {
        TowerSpec { name: "vnk".into(), kind: TowerKind::Vnk }
    }

    pub fn chacon() -> Self {
        TowerSpec { name: "chacon".into(), kind: TowerKind::Chacon }
    }

    pub fn smorodinsky_adams() -> Self {
        TowerSpec { name: "sa".into(), kind: TowerKind::SmorodinskyAdams }
    }

    pub fn flood(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::Parameter("flood spec needs q >= 2".into()));
        }
        Ok(TowerSpec { name: format!("flood:q={q}"), kind: TowerKind::Flood { q } })
    }

    pub fn custom(q: Vec<u64>, s: Vec<Vec<u64>>) -> Result<Self> {
        if q.is_empty() || q.iter().any(|&v| v == 0) {
            return Err(Error::Parameter("q_n must be positive and at least one stage is needed".into()));
        }
        if *q.last().unwrap() < 2 {
            return Err(Error::Parameter("the repeated last q_n must exceed 1".into()));
        }
        if s.is_empty() {
            return Err(Error::Parameter("spacer schedule needs at least one stage".into()));
        }
        for n in 0..q.len().max(s.len()) {
            let qn = q[n.min(q.len() - 1)];
            let sn = &s[n.min(s.len() - 1)];
            if sn.len() != qn as usize {
                return Err(Error::Parameter(format!("stage {n}: need {qn} spacer counts, got {}", sn.len())));
            }
        }
        Ok(TowerSpec { name: "custom".into(), kind: TowerKind::Custom { q, s } })
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "vnk" => Ok(Self::vnk()),
            "chacon" => Ok(Self::chacon()),
            "sa" => Ok(Self::smorodinsky_adams()),
            _ => match name.strip_prefix("flood:q=") {
                Some(q) => Self::flood(q.parse().map_err(|_| Error::parse(name, "flood q must be an integer"))?),
                None => Err(Error::parse(name, "unknown rank-one preset (vnk, chacon, sa, flood:q=N)")),
            },
        }
    }

    pub fn q(&self, n: usize) -> u64 {
        match &self.kind {
            TowerKind::Vnk => 2,
            TowerKind::Chacon => 3,
            TowerKind::SmorodinskyAdams => n as u64 + 2,
            TowerKind::Flood { q } => *q,
            TowerKind::Custom { q, .. } => q[n.min(q.len() - 1)],
        }
    }

    /// Spacer counts `s_{n,0..q_n}` given the stage height `h_n`.
    pub fn spacers(&self, n: usize, h: &BigInt) -> Result<Vec<u64>> {
        let q = self.q(n) as usize;
        Ok(match &self.kind {
            TowerKind::Vnk => vec![0; q],
            TowerKind::Chacon => vec![0, 1, 0],
            TowerKind::SmorodinskyAdams => (0..q as u64).map(|i| i.saturating_sub(1)).collect(),
            TowerKind::Flood { .. } => {
                let hv = h.to_u64().ok_or_else(|| Error::Blowup { predicted: u128::MAX, limit: MAX_LEVELS as u128 })?;
                vec![hv; q]
            }
            TowerKind::Custom { s, .. } => s[n.min(s.len() - 1)].clone(),
        })
    }

    /// `h_0..h_stages` by the recurrence `h_{n+1} = q_n h_n + Σ_i s_{n,i}`.
    pub fn heights(&self, stages: usize) -> Result<Vec<BigInt>> {
        let mut h = vec![BigInt::one()];
        for n in 0..stages {
            let s: u64 = self.spacers(n, &h[n])?.iter().sum();
            h.push(&h[n] * self.q(n) + s);
        }
        Ok(h)
    }

    /// `q_0 q_1 ... q_{n-1}`.
    pub fn cut_product(&self, n: usize) -> BigInt {
        (0..n).fold(BigInt::one(), |acc, k| acc * self.q(k))
    }

    /// Closed-form base length when the mass series sums exactly.
    fn closed_form_r(&self) -> Option<BigRational> {
        match self.kind {
            TowerKind::Vnk => Some(BigRational::one()),
            // total mass r (1 + Σ 3^{-(n+1)}) = 3r/2
            TowerKind::Chacon => Some(rat(2, 3)),
            _ => None,
        }
    }
}

/// How the base length `r = λ(F_0)` is fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RPolicy {
    /// Closed form when known, otherwise `r = Q_N / h_N` at the given limit stage.
    Limit { stage: usize },
    Fixed(#[serde(with = "crate::numeric::rational_serde")] BigRational),
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseLength {
    #[serde(with = "crate::numeric::rational_serde")]
    pub r: BigRational,
    /// `1 - r · h_N/Q_N` at the limit stage: mass the construction never places.
    pub residual: f64,
    pub closed_form: bool,
}

pub fn base_length(spec: &TowerSpec, policy: &RPolicy) -> Result<BaseLength> {
    match policy {
        RPolicy::Fixed(r) => {
            if r <= &BigRational::zero() || r > &BigRational::one() {
                return Err(Error::Parameter("base length must lie in (0, 1]".into()));
            }
            Ok(BaseLength { r: r.clone(), residual: f64::NAN, closed_form: false })
        }
        RPolicy::Limit { stage } => {
            if let Some(r) = spec.closed_form_r() {
                return Ok(BaseLength { r, residual: 0.0, closed_form: true });
            }
            let h = spec.heights(*stage)?;
            let q = spec.cut_product(*stage);
            let r = BigRational::new(q, h[*stage].clone());
            Ok(BaseLength { r, residual: 0.0, closed_form: false })
        }
    }
}

/// Stage-`n` Rokhlin tower laid out on `[0, 1)`.
#[derive(Clone, Debug)]
pub struct Tower {
    pub spec: TowerSpec,
    pub stage: usize,
    pub heights: Vec<BigInt>,
    pub r: BigRational,
    /// Level width `r / (q_0 ... q_{n-1})`.
    pub width: BigRational,
    /// Left endpoint of level `k` in units of `width`.
    positions: Vec<u64>,
    /// How many levels of this stage are spacers added at the last cut.
    pub new_spacers: u64,
}

impl Tower {
    pub fn height(&self) -> usize {
        self.positions.len()
    }

    pub fn level(&self, k: usize) -> Interval<BigRational> {
        let lo = &self.width * BigRational::from_integer(self.positions[k].into());
        Interval { hi: &lo + &self.width, lo }
    }

    pub fn levels(&self) -> Vec<Interval<BigRational>> {
        (0..self.height()).map(|k| self.level(k)).collect()
    }

    pub fn base(&self) -> Interval<BigRational> {
        self.level(0)
    }

    /// Total length of all placed levels.
    pub fn placed_length(&self) -> BigRational {
        &self.width * BigRational::from_integer((self.height() as u64).into())
    }

    /// Level index containing `x`, if any.
    pub fn level_of(&self, x: &BigRational) -> Option<usize> {
        let u = x / &self.width;
        let cell = crate::numeric::floor_int(&u).to_u64()?;
        self.index_of_position(cell)
    }

    fn index_of_position(&self, cell: u64) -> Option<usize> {
        // positions form a permutation of 0..height
        if cell >= self.height() as u64 {
            return None;
        }
        self.inverse_positions().get(cell as usize).copied()
    }

    fn inverse_positions(&self) -> Vec<usize> {
        let mut inv = vec![0; self.height()];
        for (k, &p) in self.positions.iter().enumerate() {
            inv[p as usize] = k;
        }
        inv
    }
}

/// Lays out the stage-`stages` tower with exact rational endpoints.
pub fn build_tower(spec: &TowerSpec, stages: usize, policy: &RPolicy) -> Result<Tower> {
    let heights = spec.heights(stages)?;
    if heights[stages] > BigInt::from(MAX_LEVELS) {
        return Err(Error::Blowup {
            predicted: heights[stages].to_u128().unwrap_or(u128::MAX),
            limit: MAX_LEVELS as u128,
        });
    }
    let fin = finiteness_check(spec, stages)?;
    if fin.verdict == FinitenessVerdict::Diverging {
        return Err(Error::Precondition(format!(
            "{}: finiteness series diverges (increment {:.3} at stage {})",
            spec.name,
            fin.increments.last().copied().unwrap_or(f64::NAN),
            stages
        )));
    }
    let base = base_length(spec, policy)?;
    let mut positions: Vec<u64> = vec![0];
    let mut width = base.r.clone();
    let mut new_spacers = 0;
    for n in 0..stages {
        let q = spec.q(n);
        let s = spec.spacers(n, &heights[n])?;
        let h = positions.len() as u64;
        let mut next = Vec::with_capacity(heights[n + 1].to_usize().unwrap_or(0));
        // the occupied region is [0, h·width), so fresh spacers start at h·q in the new units
        let mut free = h * q;
        for (i, &si) in s.iter().enumerate() {
            next.extend(positions.iter().map(|&p| p * q + i as u64));
            for _ in 0..si {
                next.push(free);
                free += 1;
            }
        }
        new_spacers = s.iter().sum();
        positions = next;
        width /= BigRational::from_integer(q.into());
    }
    let tower = Tower { spec: spec.clone(), stage: stages, heights, r: base.r, width, positions, new_spacers };
    if tower.placed_length() > BigRational::one() {
        return Err(Error::Parameter(format!(
            "base length {} places more than unit mass at stage {stages}",
            format_rational(&tower.r)
        )));
    }
    Ok(tower)
}

/// The piecewise translation sending level `k` to level `k+1`, undefined on the top level and the unplaced region.
pub fn tower_to_map(tower: &Tower) -> Result<PiecewiseMap> {
    let h = tower.height();
    let mut pieces: Vec<(u64, i64)> = (0..h.saturating_sub(1))
        .map(|k| (tower.positions[k], tower.positions[k + 1] as i64 - tower.positions[k] as i64))
        .collect();
    pieces.sort_unstable();
    // merge runs of adjacent cells with the same shift
    let mut runs: Vec<(u64, u64, i64)> = Vec::new();
    for (p, d) in pieces {
        match runs.last_mut() {
            Some((_, end, dd)) if *end == p && *dd == d => *end += 1,
            _ => runs.push((p, p + 1, d)),
        }
    }
    let w = &tower.width;
    let branches = runs
        .iter()
        .enumerate()
        .map(|(label, &(a, b, d))| {
            let lo = w * BigRational::from_integer(a.into());
            let hi = w * BigRational::from_integer(b.into());
            Branch::affine(label as u64, Interval { lo, hi }, BigRational::one(), w * BigRational::from_integer(d.into()))
        })
        .collect();
    let mut map = PiecewiseMap::new(&format!("rankone:{}:stage={}", tower.spec.name, tower.stage), branches)?;
    let top = tower.level(h - 1);
    let unplaced = tower.placed_length();
    let mut undefined = IntervalSet::interval(top.lo, top.hi)?;
    if unplaced < BigRational::one() {
        undefined = undefined.union(&IntervalSet::interval(unplaced, BigRational::one())?);
    }
    map.undefined = undefined;
    map.lebesgue_preserving = true;
    Ok(map)
}

/// The full von Neumann–Kakutani map: `k` enumerated branches and the closed-form tail.
pub fn make_vnk(k: u64) -> Result<PiecewiseMap> {
    let branches = (0..k).map(|n| CountableFamily::Odometer.branch(n)).collect();
    let edge = BigRational::one() - BigRational::new(BigInt::one(), BigInt::one() << k as usize);
    let mut map = PiecewiseMap::new("vnk", branches)?.with_tail(CountableFamily::Odometer, Interval { lo: edge, hi: BigRational::one() });
    map.lebesgue_preserving = true;
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinitenessVerdict {
    ConvergentTrend,
    Diverging,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct Finiteness {
    /// `(h_{n+1} - q_n h_n) / h_{n+1}` for `n < stages`.
    pub increments: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: FinitenessVerdict,
}

pub fn finiteness_check(spec: &TowerSpec, stages: usize) -> Result<Finiteness> {
    let h = spec.heights(stages)?;
    let increments: Vec<f64> = (0..stages)
        .map(|n| to_f64(&BigRational::new(&h[n + 1] - &h[n] * spec.q(n), h[n + 1].clone())))
        .collect();
    let mut acc = 0.0;
    let partial_sums = increments.iter().map(|v| { acc += v; acc }).collect();
    let tail = &increments[increments.len().saturating_sub(5)..];
    let verdict = if increments.last().is_some_and(|&v| v < FINITENESS_EPS) {
        FinitenessVerdict::ConvergentTrend
    } else if tail.len() == 5 && tail.iter().all(|&v| v >= 1e-3) && tail[4] >= 0.5 * tail[0] {
        FinitenessVerdict::Diverging
    } else {
        FinitenessVerdict::Undetermined
    };
    Ok(Finiteness { increments, partial_sums, verdict })
}

/// Which atoms of the partition the entropy series counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionConvention {
    /// Intervals first defined at every stage `n >= 0`; their masses sum to 1.
    FromStageZero,
    /// The family indexed from `n = 1` only.
    FromStageOne,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionTerm {
    pub n: usize,
    /// `h_{n+1} - 1 - q_n (h_n - 1)`.
    pub count: String,
    /// `r / (q_0 ... q_n)`.
    pub length: f64,
    pub term: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionEntropy {
    pub value: f64,
    /// Geometric estimate of the truncated remainder; infinite when the series is flagged non-finite.
    pub tail_bound: f64,
    pub terms: Vec<PartitionTerm>,
    pub partial_sums: Vec<f64>,
    pub convention: PartitionConvention,
    pub finite: bool,
}

/// `-Σ_n (h_{n+1} - 1 - q_n(h_n - 1)) ℓ_n log ℓ_n` with `ℓ_n = r/(q_0⋯q_n)`, over `n < stages`.
pub fn partition_entropy(spec: &TowerSpec, stages: usize, r: &BigRational, convention: PartitionConvention) -> Result<PartitionEntropy> {
    if r <= &BigRational::zero() || r > &BigRational::one() {
        return Err(Error::Parameter("base length must lie in (0, 1]".into()));
    }
    let h = spec.heights(stages)?;
    let ln_r = to_f64(r).ln();
    let mut ln_q = 0.0;
    let mut terms = Vec::new();
    let start = match convention {
        PartitionConvention::FromStageZero => 0,
        PartitionConvention::FromStageOne => 1,
    };
    for n in 0..stages {
        ln_q += (spec.q(n) as f64).ln();
        if n < start {
            continue;
        }
        let count = &h[n + 1] - BigInt::one() - (&h[n] - BigInt::one()) * spec.q(n);
        let ln_len = ln_r - ln_q;
        let c = count.to_f64().unwrap_or(f64::INFINITY);
        let len = ln_len.exp();
        terms.push(PartitionTerm { n, count: count.to_string(), length: len, term: -c * len * ln_len });
    }
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = terms.iter().map(|t| { acc += t.term; acc }).collect();
    let fin = finiteness_check(spec, stages)?;
    let finite = fin.verdict != FinitenessVerdict::Diverging;
    let tail_bound = if !finite {
        f64::INFINITY
    } else if terms.len() >= 2 {
        let a = terms[terms.len() - 2].term;
        let b = terms[terms.len() - 1].term;
        let ratio = if a > 0.0 { b / a } else { 1.0 };
        if ratio < 1.0 { b * ratio / (1.0 - ratio) } else { f64::INFINITY }
    } else {
        f64::INFINITY
    };
    Ok(PartitionEntropy { value: acc, tail_bound, terms, partial_sums, convention, finite })
}

/// `|N^{-1} Σ_{j<N} f(T^j x) λ̄^j|` for `λ = e^{2πiα}` and `f = λ^{level}` on the stage-`stage` vNK tower.
pub fn eigenvalue_check_vnk(map: &PiecewiseMap, alpha: &BigRational, stage: usize, window: usize, seed: u64) -> Result<f64> {
    if window == 0 {
        return Err(Error::Parameter("window must be positive".into()));
    }
    let tower = build_tower(&TowerSpec::vnk(), stage, &RPolicy::Limit { stage })?;
    let inv = tower.inverse_positions();
    let a = to_f64(alpha);
    // a 64-bit dyadic starting point keeps the orbit exact
    let mut rng = DigitTape::stream_rng(seed, 0x7e);
    let bits: u64 = rng.random();
    let mut x = BigRational::new(BigInt::from(bits >> 1), BigInt::one() << 63);
    let cells = BigInt::one() << stage;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..window {
        let cell = crate::numeric::floor_int(&(&x * BigRational::from_integer(cells.clone()))).to_u64().unwrap_or(0);
        let level = inv[cell as usize] as f64;
        acc += Complex64::from_polar(1.0, 2.0 * PI * a * (level - j as f64));
        x = map.eval_exact(&x)?;
    }
    Ok((acc / window as f64).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{invariance_residual, lebesgue};
    use num_traits::Signed;

    fn limit(stage: usize) -> RPolicy {
        RPolicy::Limit { stage }
    }

    #[test]
    fn preset_heights() {
        let h: Vec<String> = TowerSpec::chacon().heights(4).unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(h, ["1", "4", "13", "40", "121"]);
        let h: Vec<String> = TowerSpec::vnk().heights(4).unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(h, ["1", "2", "4", "8", "16"]);
        let h: Vec<String> = TowerSpec::smorodinsky_adams().heights(5).unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(h, ["1", "2", "7", "31", "161", "976"]);
    }

    #[test]
    fn vnk_examples() {
        for stage in 1..=3 {
            let m = tower_to_map(&build_tower(&TowerSpec::vnk(), stage, &limit(stage)).unwrap()).unwrap();
            assert_eq!(m.eval_exact(&rat(1, 4)).unwrap(), rat(3, 4));
            if stage >= 2 {
                assert_eq!(m.eval_exact(&rat(5, 8)).unwrap(), rat(3, 8));
            }
        }
    }

    #[test]
    fn vnk_closed_form_at_every_stage() {
        let mut rng = DigitTape::stream_rng(11, 0);
        let full = make_vnk(4).unwrap();
        for k in 1..=8 {
            let m = tower_to_map(&build_tower(&TowerSpec::vnk(), k, &limit(k)).unwrap()).unwrap();
            for _ in 0..50 {
                let n = rng.random_range(0..k);
                let den = BigInt::one() << (n + 1 + 20);
                let x = BigRational::new(BigInt::from(rng.random_range(0..(1u64 << 20))), den);
                let edge = BigRational::one() - BigRational::new(BigInt::one(), BigInt::one() << n);
                let expect = BigRational::new(BigInt::one(), BigInt::one() << (n + 1)) + &x;
                assert_eq!(m.eval_exact(&(&edge + &x)).unwrap(), expect);
                assert_eq!(full.eval_exact(&(&edge + &x)).unwrap(), expect);
            }
        }
    }

    #[test]
    fn levels_disjoint_and_nested() {
        for spec in [TowerSpec::chacon(), TowerSpec::smorodinsky_adams(), TowerSpec::vnk()] {
            let pol = limit(6);
            let t5 = build_tower(&spec, 4, &pol).unwrap();
            let t6 = build_tower(&spec, 5, &pol).unwrap();
            let mut lv = t6.levels();
            lv.sort_by(|a, b| a.lo.cmp(&b.lo));
            assert!(lv.windows(2).all(|w| w[0].hi <= w[1].lo));
            assert!(t6.placed_length() <= BigRational::one());
            // each old level splits into q new levels, all inside it
            for k in 0..t5.height() {
                let old = t5.level(k);
                let inside = t6.levels().iter().filter(|l| l.lo >= old.lo && l.hi <= old.hi).count();
                assert_eq!(inside as u64, spec.q(4));
            }
            let m5 = tower_to_map(&t5).unwrap();
            let m6 = tower_to_map(&t6).unwrap();
            let mut rng = DigitTape::stream_rng(3, 1);
            for _ in 0..200 {
                let x = BigRational::new(BigInt::from(rng.random_range(0..1_000_000u64)), BigInt::from(1_000_000u64));
                if let (Ok(a), Ok(b)) = (m5.eval_exact(&x), m6.eval_exact(&x)) {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn translations_preserve_lebesgue() {
        let lam = lebesgue();
        for stage in 1..=5 {
            let t = build_tower(&TowerSpec::chacon(), stage, &limit(stage)).unwrap();
            let m = tower_to_map(&t).unwrap();
            let base = t.base();
            let outside = IntervalSet::interval(base.lo, base.hi)
                .unwrap()
                .union(&IntervalSet::interval(t.placed_length(), BigRational::one()).unwrap_or_else(|_| IntervalSet::empty()));
            let image = outside.complement();
            let mut rng = DigitTape::stream_rng(5, stage as u64);
            for _ in 0..20 {
                let a = rng.random_range(0..900i64);
                let s = IntervalSet::interval(rat(a, 1000), rat(a + 100, 1000)).unwrap().intersect(&image);
                let r = invariance_residual(&m, &lam, &s).unwrap();
                assert!(r.exact && r.value == 0.0, "{}", r.value);
            }
        }
    }

    #[test]
    fn finiteness_examples() {
        let v = finiteness_check(&TowerSpec::vnk(), 10).unwrap();
        assert!(v.increments.iter().all(|&x| x == 0.0));
        let c = finiteness_check(&TowerSpec::chacon(), 40).unwrap();
        assert!((c.increments[0] - 0.25).abs() < 1e-15);
        assert!((c.increments[1] - 1.0 / 13.0).abs() < 1e-15);
        assert!(*c.increments.last().unwrap() < 1e-9);
        assert_eq!(c.verdict, FinitenessVerdict::ConvergentTrend);
        let f = finiteness_check(&TowerSpec::flood(2).unwrap(), 12).unwrap();
        assert_eq!(f.verdict, FinitenessVerdict::Diverging);
        assert!(build_tower(&TowerSpec::flood(2).unwrap(), 12, &limit(12)).is_err());
    }

    #[test]
    fn partition_entropy_examples() {
        let p = partition_entropy(&TowerSpec::vnk(), 30, &BigRational::one(), PartitionConvention::FromStageZero).unwrap();
        let mut direct = 0.0;
        for (n, s) in p.partial_sums.iter().enumerate() {
            let k = (n + 1) as f64;
            direct += k * 2f64.ln() / 2f64.powi(n as i32 + 1);
            assert!((s - direct).abs() < 1e-12);
        }
        assert!((p.value - 2.0 * 2f64.ln()).abs() < 1e-6);
        let c = partition_entropy(&TowerSpec::chacon(), 10, &rat(2, 3), PartitionConvention::FromStageZero).unwrap();
        assert!(c.terms.iter().all(|t| t.count == "3"));
        let mass: f64 = c.terms.iter().map(|t| 3.0 * t.length).sum();
        assert!((mass - 1.0).abs() < 1e-4);
        let f = partition_entropy(&TowerSpec::flood(2).unwrap(), 12, &rat(1, 100), PartitionConvention::FromStageZero).unwrap();
        assert!(!f.finite && f.tail_bound.is_infinite());
        let one = partition_entropy(&TowerSpec::vnk(), 30, &BigRational::one(), PartitionConvention::FromStageOne).unwrap();
        assert!((p.value - one.value - 0.5 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn vnk_eigenvalues() {
        let m = make_vnk(8).unwrap();
        assert!(eigenvalue_check_vnk(&m, &rat(1, 2), 1, 10_000, 1).unwrap() >= 0.9);
        assert!(eigenvalue_check_vnk(&m, &rat(1, 3), 1, 10_000, 1).unwrap() <= 0.1);
        assert!((eigenvalue_check_vnk(&m, &BigRational::zero(), 1, 1000, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(eigenvalue_check_vnk(&m, &rat(3, 8), 3, 10_000, 2).unwrap() >= 0.9);
    }

    #[test]
    fn custom_spec_validation() {
        assert!(TowerSpec::custom(vec![3], vec![vec![0, 1, 0]]).is_ok());
        assert!(TowerSpec::custom(vec![3], vec![vec![0, 1]]).is_err());
        assert!(TowerSpec::custom(vec![1], vec![vec![0]]).is_err());
        let c = TowerSpec::custom(vec![3], vec![vec![0, 1, 0]]).unwrap();
        assert_eq!(c.heights(4).unwrap(), TowerSpec::chacon().heights(4).unwrap());
        let r = base_length(&TowerSpec::smorodinsky_adams(), &limit(6)).unwrap();
        assert!(r.r.is_positive() && r.r < BigRational::one());
    }
}
