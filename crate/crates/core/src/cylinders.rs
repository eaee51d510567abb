//! Itineraries, cylinder sets of refined partitions, and equipartition statistics.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Endpoint, Interval};
use crate::maps::{Branch, PiecewiseMap};
use crate::measures::DensityMeasure;
use crate::orbit::{OrbitEngine, SamplePoint, Strategy};

/// Distance to a branch endpoint below which float itineraries are rejected.
pub const FLOAT_BOUNDARY_EPS: f64 = 1e-14;

/// Sequence of branch labels.
pub type Word = Vec<u64>;

/// A rank-n cylinder with its interval and mass.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder<E: Endpoint = BigRational> {
    pub word: Word,
    pub interval: Option<Interval<E>>,
    pub mass: f64,
}

/// Whether every branch of the map admits exact rational inverses.
pub fn has_exact_inverses(map: &PiecewiseMap) -> bool {
    map.branches().iter().all(|b| b.inverse::<BigRational>(&b.image.lo).is_ok())
}

/// Symbols of `x, Tx, ..., T^{n-1}x` read off a running engine.
pub fn itinerary(engine: &mut OrbitEngine<'_>, map: &PiecewiseMap, n: usize) -> Result<Word> {
    let mut w = Vec::with_capacity(n);
    for j in 0..n {
        if engine.statistical() {
            let x = engine.value()?;
            let b = map.branch_at(x).ok_or_else(|| Error::Domain(format!("{} undefined at {x}", map.name)))?;
            let (lo, hi) = b.domain_f64();
            if (x - lo).abs() < FLOAT_BOUNDARY_EPS || (hi - x).abs() < FLOAT_BOUNDARY_EPS {
                return Err(Error::Boundary { step: j });
            }
            w.push(b.label);
        } else {
            w.push(engine.symbol()?);
        }
        if j + 1 < n {
            engine.step()?;
        }
    }
    Ok(w)
}

fn pull<E: Endpoint>(b: &Branch, j: &Interval<E>) -> Result<Option<Interval<E>>> {
    let img: Interval<E> = b.image.convert();
    let Some(q) = j.intersect(&img) else { return Ok(None) };
    let u = b.inverse(&q.lo)?;
    let v = b.inverse(&q.hi)?;
    let (lo, hi) = if b.increasing { (u, v) } else { (v, u) };
    let dlo = E::from_rational(&b.domain.lo);
    let dhi = E::from_rational(&b.domain.hi);
    let lo = if lo < dlo { dlo } else { lo };
    let hi = if hi > dhi { dhi } else { hi };
    Ok(Interval::new(lo, hi))
}

fn mass_of<E: Endpoint>(mu: &DensityMeasure, iv: &Option<Interval<E>>) -> f64 {
    match iv {
        None => 0.0,
        Some(i) if E::EXACT => mu.mass_exact(&i.lo.to_rational(), &i.hi.to_rational()),
        Some(i) => {
            let (a, b) = (i.lo.to_f64(), i.hi.to_f64());
            mu.mass(a, b - a)
        }
    }
}

/// `v_{w_0} ∘ ... ∘ v_{w_{n-1}}([0, 1))`, possibly empty.
pub fn cylinder_interval<E: Endpoint>(map: &PiecewiseMap, mu: &DensityMeasure, word: &[u64]) -> Result<Cylinder<E>> {
    let mut j = Some(Interval::<E>::unit());
    for &a in word.iter().rev() {
        let b = map
            .branch_by_label(a)
            .ok_or_else(|| Error::Domain(format!("{} has no branch {a}", map.name)))?;
        j = match j {
            Some(iv) => pull(&b, &iv)?,
            None => None,
        };
    }
    let mass = mass_of(mu, &j);
    Ok(Cylinder { word: word.to_vec(), interval: j, mass })
}

/// Rank-n cylinders with mass at least the floor, and the discarded mass.
#[derive(Clone, Debug)]
pub struct Refinement<E: Endpoint = BigRational> {
    pub n: usize,
    pub cylinders: Vec<Cylinder<E>>,
    /// `1 - Σ mass`: pruned and unenumerated cylinders.
    pub tail_mass: f64,
}

fn children<E: Endpoint>(
    map: &PiecewiseMap,
    mu: &DensityMeasure,
    c: &Cylinder<E>,
    floor: f64,
    out: &mut Vec<Cylinder<E>>,
) -> Result<()> {
    let Some(iv) = &c.interval else { return Ok(()) };
    for b in map.branches() {
        push_child(b, mu, c, iv, floor, out)?;
    }
    if let Some(t) = &map.tail {
        let mut n = map.branches().iter().map(|b| b.label + 1).max().unwrap_or(t.family.first_label());
        loop {
            let b = t.family.branch(n);
            if b.domain.lo < t.region.lo || b.domain.hi > t.region.hi {
                break;
            }
            if mu.mass_exact(&b.domain.lo, &b.domain.hi) < floor {
                break;
            }
            if !push_child(&b, mu, c, iv, floor, out)? {
                break;
            }
            n += 1;
        }
    }
    Ok(())
}

fn push_child<E: Endpoint>(
    b: &Branch,
    mu: &DensityMeasure,
    c: &Cylinder<E>,
    iv: &Interval<E>,
    floor: f64,
    out: &mut Vec<Cylinder<E>>,
) -> Result<bool> {
    let j = pull(b, iv)?;
    let mass = mass_of(mu, &j);
    if j.is_none() {
        return Ok(true);
    }
    if mass < floor || mass == 0.0 {
        return Ok(false);
    }
    let mut word = Vec::with_capacity(c.word.len() + 1);
    word.push(b.label);
    word.extend_from_slice(&c.word);
    out.push(Cylinder { word, interval: j, mass });
    Ok(true)
}

fn top_level<E: Endpoint>(map: &PiecewiseMap, mu: &DensityMeasure, floor: f64) -> Result<Vec<Cylinder<E>>> {
    let root = Cylinder { word: vec![], interval: Some(Interval::<E>::unit()), mass: 1.0 };
    let mut out = Vec::new();
    children(map, mu, &root, floor, &mut out)?;
    Ok(out)
}

/// All rank-n cylinders of mass at least `mass_floor`, built by prepending symbols.
pub fn refine<E: Endpoint>(map: &PiecewiseMap, mu: &DensityMeasure, n: usize, mass_floor: f64) -> Result<Refinement<E>> {
    if n == 0 {
        return Err(Error::Parameter("rank must be at least 1".into()));
    }
    let first = top_level::<E>(map, mu, mass_floor)?;
    let subtrees: Result<Vec<Vec<Cylinder<E>>>> = first
        .into_par_iter()
        .map(|c| {
            let mut level = vec![c];
            for _ in 1..n {
                let mut next = Vec::new();
                for c in &level {
                    children(map, mu, c, mass_floor, &mut next)?;
                }
                level = next;
            }
            Ok(level)
        })
        .collect();
    let mut cylinders: Vec<Cylinder<E>> = subtrees?.into_iter().flatten().collect();
    cylinders.sort_by(|a, b| a.word.cmp(&b.word));
    let total: f64 = cylinders.iter().map(|c| c.mass).sum();
    Ok(Refinement { n, cylinders, tail_mass: (1.0 - total).max(0.0) })
}

/// Strategy used for itineraries: exact engines where the map allows them.
pub fn itinerary_strategy(map: &PiecewiseMap, n: usize) -> Strategy {
    if map.integer_base.is_some() {
        return Strategy::DigitStream;
    }
    if map.branches().iter().all(|b| b.has_fixed_form()) {
        let slope = map
            .branches()
            .iter()
            .map(|b| {
                let (lo, hi) = b.domain_f64();
                b.log_abs_derivative(0.5 * (lo + hi)).exp()
            })
            .fold(2.0, f64::max);
        let per_step = if map.tail.is_some() { 12.0 } else { slope.log2() + 1.0 };
        return Strategy::FixedPoint { bits: (128.0 + per_step * n as f64).ceil() as u32 };
    }
    Strategy::Float64
}

/// `-(1/n) log µ(A^n(x))`.
pub fn smb_statistic(map: &PiecewiseMap, mu: &DensityMeasure, strategy: Strategy, point: &SamplePoint, n: usize) -> Result<f64> {
    let mut strategy = strategy;
    for _ in 0..4 {
        let mut e = OrbitEngine::start(map, strategy, point, n)?;
        match itinerary(&mut e, map, n) {
            Ok(w) => {
                let mass = if has_exact_inverses(map) {
                    cylinder_interval::<BigRational>(map, mu, &w)?.mass
                } else {
                    cylinder_interval::<f64>(map, mu, &w)?.mass
                };
                if mass <= 0.0 {
                    return Err(Error::NumericalFailure("cylinder of zero mass on an orbit".into()));
                }
                return Ok(-mass.ln() / n as f64);
            }
            Err(Error::Precision(_)) => match strategy {
                Strategy::FixedPoint { bits } => strategy = Strategy::FixedPoint { bits: bits * 2 },
                _ => break,
            },
            Err(e) => return Err(e),
        }
    }
    Err(Error::Precision("itinerary needs more precision than available".into()))
}

/// How atoms are examined in [`classify_atoms`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomMode {
    /// Enumerate every cylinder heavier than `mass_floor`.
    Enumerate { mass_floor: f64 },
    /// Estimate the bad mass from µ-distributed samples.
    Sample { samples: usize, seed: u64 },
}

/// Good and bad atoms of the rank-n partition.
#[derive(Clone, Debug, Serialize)]
pub struct AtomClassification {
    pub n: usize,
    pub epsilon: f64,
    pub entropy: f64,
    pub mode: AtomMode,
    pub good: usize,
    pub bad: usize,
    pub good_mass: f64,
    /// Mass of bad atoms plus everything not enumerated.
    pub bad_mass: f64,
    pub tail_mass: f64,
    /// Standard error of `bad_mass` in sample mode.
    pub stderr: Option<f64>,
}

fn is_good(mass: f64, n: usize, epsilon: f64, h: f64) -> bool {
    let nf = n as f64;
    mass > (-nf * (h + epsilon)).exp() && mass < (-nf * (h - epsilon)).exp()
}

/// Draws µ-distributed starting points for a map.
pub fn sample_point(map: &PiecewiseMap, mu: &DensityMeasure, seed: u64, index: u64) -> Result<SamplePoint> {
    let base = map.integer_base.unwrap_or(2);
    if mu.is_lebesgue() {
        return Ok(SamplePoint::lebesgue(base, seed, index));
    }
    let mut rng = crate::orbit::DigitTape::stream_rng(seed ^ 0x5eed_5eed, index);
    let x = mu.sample(&mut rng);
    SamplePoint::with_prefix(base, x, seed, index)
}

pub fn classify_atoms(map: &PiecewiseMap, mu: &DensityMeasure, n: usize, epsilon: f64, h: f64, mode: AtomMode) -> Result<AtomClassification> {
    match mode {
        AtomMode::Enumerate { mass_floor } => {
            let (masses, tail) = if has_exact_inverses(map) {
                let r = refine::<BigRational>(map, mu, n, mass_floor)?;
                (r.cylinders.iter().map(|c| c.mass).collect::<Vec<_>>(), r.tail_mass)
            } else {
                let r = refine::<f64>(map, mu, n, mass_floor)?;
                (r.cylinders.iter().map(|c| c.mass).collect::<Vec<_>>(), r.tail_mass)
            };
            let (mut good, mut bad, mut good_mass, mut bad_mass) = (0, 0, 0.0, 0.0);
            for m in masses {
                if is_good(m, n, epsilon, h) {
                    good += 1;
                    good_mass += m;
                } else {
                    bad += 1;
                    bad_mass += m;
                }
            }
            Ok(AtomClassification {
                n,
                epsilon,
                entropy: h,
                mode,
                good,
                bad,
                good_mass,
                bad_mass: bad_mass + tail,
                tail_mass: tail,
                stderr: None,
            })
        }
        AtomMode::Sample { samples, seed } => {
            let strategy = itinerary_strategy(map, n);
            let flags: Vec<Result<bool>> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let mut k = i;
                    loop {
                        let p = sample_point(map, mu, seed, k)?;
                        match smb_statistic(map, mu, strategy, &p, n) {
                            Ok(s) => return Ok(!is_good((-s * n as f64).exp(), n, epsilon, h)),
                            Err(Error::Boundary { .. }) => k += samples as u64,
                            Err(e) => return Err(e),
                        }
                    }
                })
                .collect();
            let mut bad = 0usize;
            for f in flags {
                if f? {
                    bad += 1;
                }
            }
            let p = bad as f64 / samples as f64;
            Ok(AtomClassification {
                n,
                epsilon,
                entropy: h,
                mode,
                good: samples - bad,
                bad,
                good_mass: 1.0 - p,
                bad_mass: p,
                tail_mass: 0.0,
                stderr: Some((p * (1.0 - p) / samples as f64).sqrt()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{make_gauss, make_linear_mod1, make_luroth, make_rotation, make_skew_tent};
    use crate::measures::{gauss_measure, lebesgue};
    use crate::numeric::{int, phi, rat, rational_from_f64};
    use num_traits::{One, Zero};

    fn t2() -> PiecewiseMap {
        make_linear_mod1(int(2), BigRational::zero()).unwrap()
    }

    #[test]
    fn itinerary_examples() {
        let t = t2();
        let p = SamplePoint::rational(2, &rat(7, 10)).unwrap();
        let mut e = OrbitEngine::start(&t, Strategy::DigitStream, &p, 3).unwrap();
        assert_eq!(itinerary(&mut e, &t, 3).unwrap(), vec![1, 0, 1]);
        let g = make_gauss(50).unwrap();
        let p = SamplePoint::rational(2, &(phi() - BigRational::one())).unwrap();
        let mut e = OrbitEngine::start(&g, Strategy::FixedPoint { bits: 256 }, &p, 4).unwrap();
        assert_eq!(itinerary(&mut e, &g, 4).unwrap(), vec![1, 1, 1, 1]);
        let l = make_luroth(40).unwrap();
        let p = SamplePoint::with_prefix(2, 0.4, 0, 0).unwrap();
        let mut e = OrbitEngine::start(&l, Strategy::Float64, &p, 1).unwrap();
        assert_eq!(itinerary(&mut e, &l, 1).unwrap(), vec![2]);
    }

    #[test]
    fn cylinder_examples() {
        let c = cylinder_interval::<BigRational>(&t2(), &lebesgue(), &[1, 0, 1]).unwrap();
        let iv = c.interval.unwrap();
        assert_eq!((iv.lo, iv.hi), (rat(5, 8), rat(6, 8)));
        let g = make_gauss(50).unwrap();
        let c = cylinder_interval::<BigRational>(&g, &gauss_measure(), &[2, 1]).unwrap();
        let iv = c.interval.unwrap();
        assert_eq!((iv.lo, iv.hi), (rat(1, 3), rat(2, 5)));
        let t = make_linear_mod1(rat(5, 2), BigRational::zero()).unwrap();
        let c = cylinder_interval::<BigRational>(&t, &lebesgue(), &[2]).unwrap();
        assert_eq!(c.interval.unwrap().lo, rat(4, 5));
        assert_eq!(t.branches()[2].image.hi, rat(1, 2));
        let c = cylinder_interval::<BigRational>(&t, &lebesgue(), &[2, 2]).unwrap();
        assert!(c.interval.is_none());
    }

    #[test]
    fn refine_examples() {
        let r = refine::<BigRational>(&t2(), &lebesgue(), 3, 0.0).unwrap();
        assert_eq!(r.cylinders.len(), 8);
        assert!(r.cylinders.iter().all(|c| c.mass == 0.125));
        let g = make_gauss(50).unwrap();
        let r = refine::<BigRational>(&g, &gauss_measure(), 2, 1e-3).unwrap();
        assert!(!r.cylinders.is_empty());
        assert!(r.tail_mass > 0.0 && r.tail_mass < 0.2);
        let rot = make_rotation(rational_from_f64(2f64.sqrt() - 1.0)).unwrap();
        let r = refine::<BigRational>(&rot, &lebesgue(), 2, 0.0).unwrap();
        assert!(r.cylinders.len() <= 4);
        assert!((r.cylinders.iter().map(|c| c.mass).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_partitions() {
        let t = make_linear_mod1(rat(5, 2), rat(1, 4)).unwrap();
        let r = refine::<BigRational>(&t, &lebesgue(), 6, 0.0).unwrap();
        let mut ivs: Vec<_> = r.cylinders.iter().map(|c| c.interval.clone().unwrap()).collect();
        ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
        for w in ivs.windows(2) {
            assert!(w[0].hi <= w[1].lo);
        }
        assert!((r.cylinders.iter().map(|c| c.mass).sum::<f64>() + r.tail_mass - 1.0).abs() < 1e-9);
        let bound = 2.5f64.powi(-6);
        assert!(ivs.iter().all(|i| crate::numeric::to_f64(&i.length()) <= bound * (1.0 + 1e-12)));
    }

    #[test]
    fn points_lie_in_their_cylinders() {
        let g = make_gauss(50).unwrap();
        let mu = gauss_measure();
        for seed in 0..20 {
            let p = sample_point(&g, &mu, 3, seed).unwrap();
            let x = p.clone().value_f64().unwrap();
            for n in 1..=12 {
                let mut e = OrbitEngine::start(&g, itinerary_strategy(&g, n), &p, n).unwrap();
                let w = itinerary(&mut e, &g, n).unwrap();
                let c = cylinder_interval::<BigRational>(&g, &mu, &w).unwrap();
                let iv = c.interval.unwrap();
                let xr = rational_from_f64(x);
                // x carries hidden digits past double precision, so allow one ulp
                let slack = rational_from_f64(1e-16);
                assert!(iv.lo <= &xr + &slack && xr < &iv.hi + &slack);
            }
        }
    }

    #[test]
    fn smb_exact_for_integer_bases() {
        for b in [2, 3] {
            let t = make_linear_mod1(int(b), BigRational::zero()).unwrap();
            let p = SamplePoint::lebesgue(b as u32, 11, 0);
            let s = smb_statistic(&t, &lebesgue(), Strategy::DigitStream, &p, 10).unwrap();
            assert!((s - (b as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn atoms_for_doubling_are_all_good() {
        let a = classify_atoms(&t2(), &lebesgue(), 10, 0.01, 2f64.ln(), AtomMode::Enumerate { mass_floor: 0.0 }).unwrap();
        assert_eq!(a.bad_mass, 0.0);
        assert_eq!(a.good, 1024);
    }

    #[test]
    fn skew_tent_bad_mass_decreases() {
        let t = make_skew_tent(rat(3, 10)).unwrap();
        let h = 0.610864302054057;
        let m = AtomMode::Enumerate { mass_floor: 0.0 };
        let a7 = classify_atoms(&t, &lebesgue(), 7, 0.1, h, m).unwrap();
        let a14 = classify_atoms(&t, &lebesgue(), 14, 0.1, h, m).unwrap();
        assert!(a14.bad_mass < 0.5);
        assert!(a14.bad_mass < a7.bad_mass);
    }
}
