//! Invariant probability measures with closed-form or constructed densities.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Endpoint, IntervalSet};
use crate::maps::{BranchForm, CountableFamily, PiecewiseMap};
use crate::numeric::{floor_int, round_dyadic, to_f64};
use crate::quadrature::gauss_legendre3;

/// Bits kept when orbit points of linear maps are rounded.
const ORBIT_BITS: u32 = 256;

/// Where a density came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    TruncatedSeries,
    Pushforward,
}

#[derive(Clone, Debug)]
enum Kind {
    Lebesgue,
    Gauss,
    Arcsine,
    Poisson { z0: Complex64 },
    /// `values[i]` on `[breaks[i], breaks[i+1])`, with cumulative masses.
    Steps { breaks: Vec<f64>, exact_breaks: Vec<BigRational>, values: Vec<f64>, cumulative: Vec<f64> },
}

/// An absolutely continuous probability measure on `[0, 1)`.
#[derive(Clone, Debug)]
pub struct DensityMeasure {
    pub name: String,
    kind: Kind,
    /// Constant `c >= 1` with `1/c <= density <= c`, when one is known.
    pub comparability: Option<f64>,
    pub provenance: Provenance,
    /// Bound on the sup-norm error of a truncated density.
    pub truncation_bound: f64,
}

pub fn lebesgue() -> DensityMeasure {
    DensityMeasure {
        name: "lebesgue".into(),
        kind: Kind::Lebesgue,
        comparability: Some(1.0),
        provenance: Provenance::ClosedForm,
        truncation_bound: 0.0,
    }
}

pub fn gauss_measure() -> DensityMeasure {
    DensityMeasure {
        name: "gauss".into(),
        kind: Kind::Gauss,
        comparability: Some(2.0 / LN_2),
        provenance: Provenance::ClosedForm,
        truncation_bound: 0.0,
    }
}

pub fn arcsine_measure() -> DensityMeasure {
    DensityMeasure {
        name: "arcsine".into(),
        kind: Kind::Arcsine,
        comparability: None,
        provenance: Provenance::ClosedForm,
        truncation_bound: 0.0,
    }
}

/// Poisson kernel of `z0` in the angle chart.
pub fn blaschke_measure(z0: Complex64) -> Result<DensityMeasure> {
    let r = z0.norm();
    if r >= 1.0 {
        return Err(Error::Parameter("z0 must lie in the open unit disk".into()));
    }
    Ok(DensityMeasure {
        name: "blaschke".into(),
        kind: Kind::Poisson { z0 },
        comparability: Some((1.0 + r) / (1.0 - r)),
        provenance: Provenance::ClosedForm,
        truncation_bound: 0.0,
    })
}

/// Piecewise-constant measure from exact breakpoints `0 = b_0 < ... < b_m = 1` and unnormalised values.
pub fn step_measure(name: &str, exact_breaks: Vec<BigRational>, values: Vec<f64>, provenance: Provenance) -> Result<DensityMeasure> {
    if exact_breaks.len() != values.len() + 1 || values.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Parameter("step density needs m+1 breakpoints and m non-negative values".into()));
    }
    let breaks: Vec<f64> = exact_breaks.iter().map(to_f64).collect();
    let total: f64 = values.iter().enumerate().map(|(i, v)| v * (breaks[i + 1] - breaks[i])).sum();
    if total <= 0.0 {
        return Err(Error::Parameter("step density has zero mass".into()));
    }
    let values: Vec<f64> = values.iter().map(|v| v / total).collect();
    let mut cumulative = vec![0.0];
    for i in 0..values.len() {
        let last = *cumulative.last().unwrap();
        cumulative.push(last + values[i] * (breaks[i + 1] - breaks[i]));
    }
    Ok(DensityMeasure {
        name: name.into(),
        kind: Kind::Steps { breaks, exact_breaks, values, cumulative },
        comparability: None,
        provenance,
        truncation_bound: 0.0,
    })
}

fn beta_orbit_of_one(beta: &BigRational, n: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::one()];
    let mut x = BigRational::one();
    for _ in 1..n {
        let y = beta * &x;
        x = round_dyadic(&(&y - BigRational::from_integer(floor_int(&y))), ORBIT_BITS);
        out.push(x.clone());
        if x.is_zero() {
            break;
        }
    }
    out
}

/// Parry density `h(x) ∝ Σ_{n<N, x < T^n 1} β^{-n}` of the β-transformation.
pub fn parry_beta(beta: &BigRational, n_terms: usize) -> Result<DensityMeasure> {
    if n_terms == 0 {
        return Err(Error::Parameter("need at least one series term".into()));
    }
    if beta.is_integer() {
        return Err(Error::Parameter("integer beta preserves Lebesgue measure; use lebesgue".into()));
    }
    if beta <= &BigRational::one() {
        return Err(Error::Parameter("beta must exceed 1".into()));
    }
    let b = to_f64(beta);
    let orbit = beta_orbit_of_one(beta, n_terms);
    let mut cuts: Vec<BigRational> = orbit.iter().filter(|p| !p.is_zero()).cloned().collect();
    cuts.push(BigRational::zero());
    cuts.sort();
    cuts.dedup();
    let weights: Vec<f64> = (0..orbit.len()).map(|k| b.powi(-(k as i32))).collect();
    let values: Vec<f64> = cuts
        .windows(2)
        .map(|w| orbit.iter().zip(&weights).filter(|(p, _)| **p >= w[1]).map(|(_, wt)| wt).sum())
        .collect();
    let mut m = step_measure("parry", cuts, values, Provenance::TruncatedSeries)?;
    m.comparability = Some(b / (b - 1.0));
    m.truncation_bound = if orbit.last().is_some_and(|p| p.is_zero()) {
        0.0
    } else {
        b.powi(-(n_terms as i32)) / (1.0 - 1.0 / b)
    };
    Ok(m)
}

/// Invariant density of a map with affine branches, by iterating the transfer operator
/// on piecewise-constant densities starting from Lebesgue measure.
pub fn pushforward_density(map: &PiecewiseMap, iterations: usize) -> Result<DensityMeasure> {
    let mut affine = Vec::new();
    for b in map.branches() {
        match &b.form {
            BranchForm::Affine { slope, offset } => affine.push((b, slope.clone(), offset.clone())),
            _ => return Err(Error::Precondition("pushforward needs affine branches".into())),
        }
    }
    if map.tail.is_some() || !map.undefined.is_empty() {
        return Err(Error::Precondition("pushforward needs a finite, everywhere defined map".into()));
    }
    let mut breaks = vec![BigRational::zero(), BigRational::one()];
    let mut values = vec![1.0f64];
    for _ in 0..iterations {
        let mut nb: Vec<BigRational> = vec![BigRational::zero(), BigRational::one()];
        for (b, slope, offset) in &affine {
            nb.push(b.image.lo.clone());
            nb.push(b.image.hi.clone());
            for p in &breaks {
                if p > &b.domain.lo && p < &b.domain.hi {
                    nb.push(round_dyadic(&(slope * p + offset), ORBIT_BITS));
                }
            }
        }
        nb.retain(|p| p >= &BigRational::zero() && p <= &BigRational::one());
        nb.sort();
        nb.dedup();
        let bf: Vec<f64> = breaks.iter().map(to_f64).collect();
        let eval = |x: f64| {
            let i = bf.partition_point(|&s| s <= x).saturating_sub(1).min(values.len() - 1);
            values[i]
        };
        let mut nv = Vec::with_capacity(nb.len() - 1);
        for w in nb.windows(2) {
            let mid = (to_f64(&w[0]) + to_f64(&w[1])) / 2.0;
            let mut acc = 0.0;
            for (b, slope, _) in &affine {
                let (ilo, ihi) = (to_f64(&b.image.lo), to_f64(&b.image.hi));
                if mid >= ilo && mid < ihi {
                    let s = to_f64(slope);
                    acc += eval(b.inverse_f64(mid)) / s.abs();
                }
            }
            nv.push(acc);
        }
        breaks = nb;
        values = nv;
        // merge equal neighbours to keep the mesh small
        let mut mb = vec![breaks[0].clone()];
        let mut mv: Vec<f64> = Vec::new();
        for (i, v) in values.iter().enumerate() {
            if let Some(last) = mv.last() {
                if (last - v).abs() <= 1e-15 * last.abs().max(1.0) {
                    *mb.last_mut().unwrap() = breaks[i + 1].clone();
                    continue;
                }
            }
            mv.push(*v);
            mb.push(breaks[i + 1].clone());
        }
        breaks = mb;
        values = mv;
    }
    let mut m = step_measure("pushforward", breaks, values, Provenance::Pushforward)?;
    m.comparability = None;
    Ok(m)
}

fn asin_diff(lo: f64, len: f64) -> f64 {
    // asin√(lo+len) − asin√lo without cancellation
    let a = (lo + len).min(1.0).sqrt();
    let b = lo.max(0.0).sqrt();
    let s = len / (a * (1.0 - b * b).max(0.0).sqrt() + b * (1.0 - a * a).max(0.0).sqrt());
    if s.is_finite() {
        s.clamp(-1.0, 1.0).asin()
    } else {
        a.asin() - b.asin()
    }
}

fn poisson_lift(z0: Complex64, t: f64) -> f64 {
    let r = z0.norm();
    let phi = z0.arg();
    let u = 2.0 * PI * t - phi;
    let k = (u / (2.0 * PI)).round();
    let v = u - 2.0 * PI * k;
    k + ((1.0 + r) * (v / 2.0).sin()).atan2((1.0 - r) * (v / 2.0).cos()) / PI
}

impl DensityMeasure {
    pub fn density(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Lebesgue => 1.0,
            Kind::Gauss => 1.0 / ((1.0 + x) * LN_2),
            Kind::Arcsine => 1.0 / (PI * (x * (1.0 - x)).sqrt()),
            Kind::Poisson { z0 } => {
                let z = Complex64::from_polar(1.0, 2.0 * PI * x);
                (1.0 - z0.norm_sqr()) / (z - z0).norm_sqr()
            }
            Kind::Steps { breaks, values, .. } => {
                let i = breaks.partition_point(|&s| s <= x).saturating_sub(1).min(values.len() - 1);
                values[i]
            }
        }
    }

    /// Breakpoints of a piecewise-constant density, if any.
    pub fn breakpoints(&self) -> Option<&[BigRational]> {
        match &self.kind {
            Kind::Steps { exact_breaks, .. } => Some(exact_breaks),
            _ => None,
        }
    }

    /// Values of a piecewise-constant density, if any.
    pub fn step_values(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Steps { values, .. } => Some(values),
            _ => None,
        }
    }

    pub fn is_lebesgue(&self) -> bool {
        matches!(self.kind, Kind::Lebesgue)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match &self.kind {
            Kind::Lebesgue => x,
            Kind::Gauss => (1.0 + x).log2(),
            Kind::Arcsine => 2.0 / PI * x.sqrt().asin(),
            Kind::Poisson { z0 } => poisson_lift(*z0, x) - poisson_lift(*z0, 0.0),
            Kind::Steps { breaks, values, cumulative, .. } => {
                if x >= 1.0 {
                    return 1.0;
                }
                let i = breaks.partition_point(|&s| s <= x).saturating_sub(1).min(values.len() - 1);
                cumulative[i] + values[i] * (x - breaks[i])
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.kind {
            Kind::Lebesgue => u,
            Kind::Gauss => u.exp2() - 1.0,
            Kind::Arcsine => {
                let s = (PI * u / 2.0).sin();
                s * s
            }
            Kind::Steps { breaks, values, cumulative, .. } => {
                let i = cumulative.partition_point(|&c| c <= u).saturating_sub(1).min(values.len() - 1);
                if values[i] == 0.0 {
                    return breaks[i];
                }
                (breaks[i] + (u - cumulative[i]) / values[i]).min(breaks[i + 1])
            }
            Kind::Poisson { .. } => {
                let (mut a, mut b) = (0.0, 1.0);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if self.cdf(m) < u {
                        a = m;
                    } else {
                        b = m;
                    }
                    if b - a < 1e-17 {
                        break;
                    }
                }
                0.5 * (a + b)
            }
        }
    }

    /// Mass of `[lo, lo + len)`, accurate in relative terms for tiny `len`.
    pub fn mass(&self, lo: f64, len: f64) -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Lebesgue => len,
            Kind::Gauss => (len / (1.0 + lo)).ln_1p() / LN_2,
            Kind::Arcsine => 2.0 / PI * asin_diff(lo, len),
            Kind::Poisson { .. } => {
                if len < 1e-4 {
                    gauss_legendre3(|t| self.density(t), lo, lo + len)
                } else {
                    self.cdf(lo + len) - self.cdf(lo)
                }
            }
            Kind::Steps { breaks, values, .. } => {
                let hi = lo + len;
                let i = breaks.partition_point(|&s| s <= lo).saturating_sub(1).min(values.len() - 1);
                if hi <= breaks[i + 1] {
                    return values[i] * len;
                }
                self.cdf(hi) - self.cdf(lo)
            }
        }
    }

    /// Mass of an exact interval, computing its length before rounding.
    pub fn mass_exact(&self, lo: &BigRational, hi: &BigRational) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.mass(to_f64(lo), to_f64(&(hi - lo)))
    }

    pub fn measure_of<E: Endpoint>(&self, s: &IntervalSet<E>) -> f64 {
        if E::EXACT {
            s.parts().iter().map(|p| self.mass_exact(&p.lo.to_rational(), &p.hi.to_rational())).sum()
        } else {
            s.parts().iter().map(|p| {
                let (a, b) = (p.lo.to_f64(), p.hi.to_f64());
                self.mass(a, b - a)
            }).sum()
        }
    }

    /// Exact Lebesgue measure, or `None` for other measures.
    pub fn measure_exact(&self, s: &IntervalSet) -> Option<BigRational> {
        match self.kind {
            Kind::Lebesgue => Some(s.length()),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u).min(1.0 - f64::EPSILON / 2.0)
    }

    /// Smallest and largest density value on a grid of `n` midpoints.
    pub fn density_range(&self, n: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..n {
            let d = self.density((i as f64 + 0.5) / n as f64);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }
}

/// `|µ(T^{-1}S) - µ(S)|` together with the mass of the unenumerated tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    pub tail_bound: f64,
    pub exact: bool,
}

impl Residual {
    pub fn within(&self, tol: f64) -> bool {
        self.value <= tol + self.tail_bound
    }
}

/// Closed-form mass of the unenumerated part of `T^{-1}S` for the natural pairs of the
/// countable families: `Σ_{k>K} µ_G(1/(k+S))` telescopes and Lüroth branches scale by `1/(k(k+1))`.
fn family_tail_mass(map: &PiecewiseMap, m: &DensityMeasure, s: &IntervalSet) -> Option<f64> {
    let t = map.tail.as_ref()?;
    if !t.region.lo.is_zero() {
        return None;
    }
    let k1 = to_f64(&t.region.hi.recip());
    match t.family {
        CountableFamily::Gauss if m.name == "gauss" => Some(
            s.to_f64_pairs().iter().map(|&(a, b)| ((b - a) / (k1 + a)).ln_1p() / LN_2).sum(),
        ),
        CountableFamily::Luroth if m.is_lebesgue() => Some(s.to_f64_pairs().iter().map(|&(a, b)| (b - a) / k1).sum()),
        _ => None,
    }
}

pub fn invariance_residual(map: &PiecewiseMap, m: &DensityMeasure, s: &IntervalSet) -> Result<Residual> {
    match map.preimage::<BigRational>(s) {
        Ok(p) => {
            if let (Some(_), Some(extra)) = (&p.tail, family_tail_mass(map, m, s)) {
                let value = (m.measure_of(&p.set) + extra - m.measure_of(s)).abs();
                return Ok(Residual { value, tail_bound: m.measure_of(&map.undefined), exact: false });
            }
            let tail = p.tail.as_ref().map(|t| m.mass_exact(&t.lo, &t.hi)).unwrap_or(0.0);
            let undefined = m.measure_of(&map.undefined);
            if let Some(before) = m.measure_exact(s) {
                if map.lebesgue_preserving || p.tail.is_none() {
                    let after = p.set.length();
                    let d = (after - before).abs();
                    return Ok(Residual { value: to_f64(&d), tail_bound: tail + undefined, exact: true });
                }
            }
            let value = (m.measure_of(&p.set) - m.measure_of(s)).abs();
            Ok(Residual { value, tail_bound: tail + undefined, exact: false })
        }
        Err(Error::Inexact(_)) => {
            let sf: IntervalSet<f64> = s.convert();
            let p = map.preimage::<f64>(&sf)?;
            let tail = p.tail.as_ref().map(|t| m.mass_exact(&t.lo, &t.hi)).unwrap_or(0.0);
            let value = (m.measure_of(&p.set) - m.measure_of(&sf)).abs();
            Ok(Residual { value, tail_bound: tail + m.measure_of(&map.undefined), exact: false })
        }
        Err(e) => Err(e),
    }
}

/// Lebesgue measure when the map preserves it, else the measure constructed for linear maps.
pub fn linear_invariant_measure(beta: &BigRational, gamma: &BigRational, n_terms: usize) -> Result<DensityMeasure> {
    if gamma.is_zero() {
        if beta.is_integer() {
            return Ok(lebesgue());
        }
        return parry_beta(beta, n_terms);
    }
    let map = crate::maps::make_linear_mod1(beta.clone(), gamma.clone())?;
    pushforward_density(&map, n_terms)
}

/// Number of pieces of a step density.
pub fn piece_count(m: &DensityMeasure) -> usize {
    m.step_values().map_or(0, |v| v.len())
}
