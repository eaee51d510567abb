//! Non-uniformity, Weyl sums, sequential times and equal-entropy pairs.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{correlation_at, joint_mixing_curve, l2_joint_test, AverageReport, CorrelationMode, CurvePoint, Observable, WindowSchedule};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::maps::{make_gauss, make_linear_mod1, make_skew_tent, PiecewiseMap};
use crate::measures::{gauss_measure, lebesgue, parry_beta, DensityMeasure};
use crate::numeric::{rat, rational_from_f64, to_f64};
use crate::orbit::DigitTape;

pub const OPEN_QUESTION_VERDICT: &str = "open-question: empirical evidence only";

/// `α = Σ_k b_k 2^{-k}` given by a finite bit string, optionally with a zero block.
#[derive(Clone, Debug)]
pub struct BitAlpha {
    bits: Vec<u8>,
    /// `b_k = 0` for `from <= k < to`.
    pub zero_block: Option<(usize, usize)>,
}

impl BitAlpha {
    /// Random bits from a seeded stream with `b_k = 0` for `from <= k < to`.
    pub fn block_sparse(seed: u64, from: usize, to: usize, total_bits: usize) -> Result<BitAlpha> {
        if from < 1 || to <= from || to > total_bits {
            return Err(Error::Parameter(format!("zero block {from}..{to} does not fit in {total_bits} bits")));
        }
        let mut rng = DigitTape::stream_rng(seed, 0xa1fa);
        let bits = (1..=total_bits).map(|k| if (from..to).contains(&k) { 0 } else { rng.random_range(0..2u8) }).collect();
        Ok(BitAlpha { bits, zero_block: Some((from, to)) })
    }

    pub fn from_bits(bits: Vec<u8>) -> BitAlpha {
        BitAlpha { bits, zero_block: None }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `2^n α mod 1` from the 64 bits after position `n`.
    pub fn shifted(&self, n: usize) -> Result<f64> {
        if n + 64 > self.bits.len() {
            return Err(Error::Precondition(format!("alpha has {} bits, need {}", self.bits.len(), n + 64)));
        }
        let word = self.bits[n..n + 64].iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Ok(word as f64 / 2f64.powi(64))
    }

    pub fn value(&self) -> Result<f64> {
        self.shifted(0)
    }

    /// `(2^n α mod 1)` for `n = 0..count`.
    pub fn doubling_orbit(&self, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|n| self.shifted(n)).collect()
    }
}

/// `|(1/(N-M)) Σ_{n=M}^{N-1} e^{2πih(2^n - 1)α}|`.
pub fn cesaro_modulus(alpha: &BitAlpha, h: i64, window: (usize, usize)) -> Result<f64> {
    let (m, n) = window;
    if n <= m {
        return Err(Error::Parameter("window needs N > M".into()));
    }
    if h == 0 {
        return Ok(1.0);
    }
    let base = Complex64::from_polar(1.0, -2.0 * PI * h as f64 * alpha.value()?);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in m..n {
        acc += Complex64::from_polar(1.0, 2.0 * PI * h as f64 * alpha.shifted(k)?);
    }
    Ok((acc * base / (n - m) as f64).norm())
}

/// Cesàro modulus on a window that lies inside the zero block of `alpha`.
pub fn nonuniform_probe(alpha: &BitAlpha, h: i64, window: (usize, usize)) -> Result<f64> {
    let (m, n) = window;
    let Some((from, to)) = alpha.zero_block else {
        return Err(Error::Precondition("alpha has no zero block".into()));
    };
    if from > m + 1 || to < n + 64 {
        return Err(Error::Precondition(format!(
            "zero block {from}..{to} must cover bits {}..{} for window ({m}, {n})",
            m + 1,
            n + 64
        )));
    }
    cesaro_modulus(alpha, h, window)
}

/// `max_{1<=h<=h_max} |N^{-1} Σ e^{2πih x_n}|`.
pub fn weyl_uniformity(points: &[f64], h_max: u32) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    (1..=h_max)
        .map(|h| {
            let s: Complex64 = points.iter().map(|&x| Complex64::from_polar(1.0, 2.0 * PI * h as f64 * x)).sum();
            s.norm() / points.len() as f64
        })
        .fold(0.0, f64::max)
}

/// Times `a_n` at which one map is sampled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeSchedule {
    /// `a_n = n^p`.
    Power(u32),
    Explicit(Vec<usize>),
}

impl TimeSchedule {
    pub fn at(&self, n: usize) -> Result<usize> {
        match self {
            TimeSchedule::Power(p) => Ok(n.pow(*p)),
            TimeSchedule::Explicit(v) => v
                .get(n)
                .copied()
                .ok_or_else(|| Error::Parameter(format!("explicit schedule has no entry {n}"))),
        }
    }

    fn check(&self, n_max: usize) -> Result<()> {
        match self {
            TimeSchedule::Power(0) => Err(Error::Parameter("schedule must be strictly increasing".into())),
            TimeSchedule::Power(_) => Ok(()),
            TimeSchedule::Explicit(v) => {
                if v.len() <= n_max || v.windows(2).any(|w| w[1] <= w[0]) {
                    Err(Error::Parameter("explicit schedule must be strictly increasing and cover n_max".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// `ν(B ∩ ⋂_i T_i^{-a_n^{(i)}} A_i)` for `n = 0..=n_max` with product target.
#[allow(clippy::too_many_arguments)]
pub fn sequential_mixing_probe(
    maps: &[&PiecewiseMap],
    measures: &[&DensityMeasure],
    base: &IntervalSet,
    targets: &[IntervalSet],
    schedules: &[TimeSchedule],
    n_max: usize,
    mode: CorrelationMode,
    nu: &DensityMeasure,
) -> Result<Vec<CurvePoint>> {
    if schedules.len() != maps.len() || measures.len() != maps.len() {
        return Err(Error::Parameter("need one schedule and one measure per map".into()));
    }
    for s in schedules {
        s.check(n_max)?;
    }
    let target = nu.measure_of(base) * targets.iter().zip(measures).map(|(a, mu)| mu.measure_of(a)).product::<f64>();
    (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let times = schedules.iter().map(|s| s.at(n)).collect::<Result<Vec<_>>>()?;
            let c = correlation_at(maps, base, targets, &times, mode, nu)?;
            Ok(CurvePoint { n, value: c.value, stderr: c.stderr.unwrap_or(c.tail_bound), target })
        })
        .collect()
}

/// `log β = π²/(6 log 2)`: the β-transformation with the entropy of the Gauss map.
pub fn gauss_entropy_beta() -> BigRational {
    rational_from_f64((PI * PI / (6.0 * 2f64.ln())).exp())
}

#[derive(Clone, Debug)]
pub enum EqualEntropyPair {
    BetaGauss { schedule: WindowSchedule, samples: usize, seed: u64, tolerance: f64 },
    Tents { a: BigRational, n_max: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub pair: String,
    pub average: Option<AverageReport>,
    pub curve: Option<Vec<CurvePoint>>,
    pub verdict: String,
}

pub fn equal_entropy_probe(pair: &EqualEntropyPair) -> Result<ProbeReport> {
    let half = IntervalSet::interval(rat(0, 1), rat(1, 2))?;
    let lam = lebesgue();
    match pair {
        EqualEntropyPair::BetaGauss { schedule, samples, seed, tolerance } => {
            let beta = gauss_entropy_beta();
            let tb = make_linear_mod1(beta.clone(), rat(0, 1))?;
            let mb = parry_beta(&beta, 64)?;
            let g = make_gauss(50)?;
            let mg = gauss_measure();
            let obs = [Observable::Indicator(half.clone()), Observable::Indicator(half)];
            let mut rep = l2_joint_test(&[&tb, &g], &[&mb, &mg], &obs, schedule, *samples, *seed, &lam, *tolerance)?;
            rep.verdict = OPEN_QUESTION_VERDICT.into();
            Ok(ProbeReport {
                pair: format!("linear:beta={:.6} vs gauss", to_f64(&beta)),
                average: Some(rep),
                curve: None,
                verdict: OPEN_QUESTION_VERDICT.into(),
            })
        }
        EqualEntropyPair::Tents { a, n_max } => {
            let t1 = make_skew_tent(a.clone())?;
            let t2 = make_skew_tent(rat(1, 1) - a)?;
            let curve = joint_mixing_curve(
                &[&t1, &t2],
                &[&lam, &lam],
                &IntervalSet::unit(),
                &[half.clone(), half],
                *n_max,
                CorrelationMode::Exact,
                &lam,
            )?;
            Ok(ProbeReport {
                pair: format!("tent:a={} vs tent:a={}", crate::numeric::format_rational(a), crate::numeric::format_rational(&(rat(1, 1) - a))),
                average: None,
                curve: Some(curve),
                verdict: OPEN_QUESTION_VERDICT.into(),
            })
        }
    }
}
