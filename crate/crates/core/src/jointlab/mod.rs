//! Cesàro averages of products along several orbits, multi-map correlations and mixing probes.

mod chebyshev;
mod mixing;
mod probes;

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

pub use mixing::{alpha_mixing_estimate, log_linear_slope, property_b_fit, MixingEstimate, MixingPoint, FAMILY_NOTE};
pub use probes::{
    cesaro_modulus, equal_entropy_probe, nonuniform_probe, sequential_mixing_probe, weyl_uniformity, BitAlpha,
    EqualEntropyPair, ProbeReport, TimeSchedule, OPEN_QUESTION_VERDICT, gauss_entropy_beta,
};

use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::maps::PiecewiseMap;
use crate::measures::DensityMeasure;
use crate::numeric::to_f64;
use crate::orbit::{DigitTape, OrbitEngine, SamplePoint, Strategy};

/// Guard on the predicted number of pieces in exact correlations.
pub const EXACT_PIECE_LIMIT: u128 = 10_000_000;

/// A bounded function on `[0, 1)`.
#[derive(Clone, Debug)]
pub enum Observable {
    Indicator(IntervalSet),
    /// `x -> e^{2πihx}`.
    Trig(i64),
    /// Piecewise constant: `values[i]` on `[breaks[i], breaks[i+1])`.
    Table { breaks: Vec<f64>, values: Vec<Complex64> },
}

impl Observable {
    pub fn indicator(s: IntervalSet) -> Observable {
        Observable::Indicator(s)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Observable::Indicator(s) => {
                if s.contains_f64(x) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Observable::Trig(0) => Complex64::new(1.0, 0.0),
            Observable::Trig(h) => Complex64::from_polar(1.0, 2.0 * PI * (*h as f64) * x),
            Observable::Table { breaks, values } => {
                let i = breaks.partition_point(|&b| b <= x).saturating_sub(1).min(values.len() - 1);
                values[i]
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Observable::Indicator(s) => if s.is_empty() { 0.0 } else { 1.0 },
            Observable::Trig(_) => 1.0,
            Observable::Table { values, .. } => values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// `∫ f dµ`.
    pub fn integral(&self, mu: &DensityMeasure) -> Result<Complex64> {
        match self {
            Observable::Indicator(s) => Ok(Complex64::new(mu.measure_of(s), 0.0)),
            Observable::Trig(0) => Ok(Complex64::new(1.0, 0.0)),
            Observable::Trig(h) => {
                if mu.is_lebesgue() {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let w = 2.0 * PI * *h as f64;
                let re = crate::quadrature::integrate(|x| mu.density(x) * (w * x).cos(), 0.0, 1.0, 1e-12)?;
                let im = crate::quadrature::integrate(|x| mu.density(x) * (w * x).sin(), 0.0, 1.0, 1e-12)?;
                Ok(Complex64::new(re.value, im.value))
            }
            Observable::Table { breaks, values } => Ok(values
                .iter()
                .enumerate()
                .map(|(i, v)| v * mu.mass(breaks[i], breaks[i + 1] - breaks[i]))
                .sum()),
        }
    }

    /// Parses `ind:<set>`, `trig:<h>` or `table:<b0>,<b1>,...:<v0>,<v1>,...`.
    pub fn parse(text: &str) -> Result<Observable> {
        let t = text.trim();
        if let Some(rest) = t.strip_prefix("ind:") {
            return Ok(Observable::Indicator(IntervalSet::parse(rest)?));
        }
        if let Some(rest) = t.strip_prefix("trig:") {
            let h = rest.trim().parse().map_err(|_| Error::parse(t, "trig frequency must be an integer"))?;
            return Ok(Observable::Trig(h));
        }
        if let Some(rest) = t.strip_prefix("table:") {
            let (b, v) = rest.split_once(':').ok_or_else(|| Error::parse(t, "table needs breaks:values"))?;
            let breaks: Vec<f64> = b
                .split(',')
                .map(|s| crate::numeric::parse_real(s).map(|r| to_f64(&r)))
                .collect::<Result<_>>()?;
            let values: Vec<Complex64> = v
                .split(',')
                .map(|s| crate::numeric::parse_real(s).map(|r| Complex64::new(to_f64(&r), 0.0)))
                .collect::<Result<_>>()?;
            if breaks.len() != values.len() + 1 || breaks.first() != Some(&0.0) || breaks.last() != Some(&1.0) {
                return Err(Error::parse(t, "table breaks must run from 0 to 1 with one more entry than values"));
            }
            return Ok(Observable::Table { breaks, values });
        }
        Err(Error::parse(t, "expected ind:, trig: or table:"))
    }

    pub fn render(&self) -> String {
        match self {
            Observable::Indicator(s) => format!("ind:{s}"),
            Observable::Trig(h) => format!("trig:{h}"),
            Observable::Table { breaks, values } => format!(
                "table:{}:{}",
                breaks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","),
                values.iter().map(|v| v.re.to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

/// Averaging windows `(M, N)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowSchedule {
    pub windows: Vec<(usize, usize)>,
}

impl WindowSchedule {
    pub fn new(windows: Vec<(usize, usize)>) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::Parameter("schedule needs at least one window".into()));
        }
        for &(m, n) in &windows {
            if n <= m {
                return Err(Error::Parameter(format!("window ({m}, {n}) has N <= M")));
            }
        }
        if windows.windows(2).any(|w| w[1].1 - w[1].0 <= w[0].1 - w[0].0) {
            return Err(Error::Parameter("window lengths must strictly increase".into()));
        }
        Ok(WindowSchedule { windows })
    }

    /// `M = N/10` for `N = 10^3, 10^4, 10^5`.
    pub fn default_uniform() -> Self {
        WindowSchedule { windows: vec![(100, 1_000), (1_000, 10_000), (10_000, 100_000)] }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut windows = Vec::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (m, n) = part.split_once(',').ok_or_else(|| Error::parse(part, "window must be M,N"))?;
            let parse = |s: &str| -> Result<usize> {
                let r = crate::numeric::parse_real(s)?;
                if !r.is_integer() || r < BigRational::from_integer(0.into()) {
                    return Err(Error::parse(s, "window bound must be a non-negative integer"));
                }
                Ok(to_f64(&r) as usize)
            };
            windows.push((parse(m)?, parse(n)?));
        }
        WindowSchedule::new(windows)
    }

    pub fn render(&self) -> String {
        self.windows.iter().map(|(m, n)| format!("{m},{n}")).collect::<Vec<_>>().join(";")
    }
}

/// Starting point of a joint orbit drawn from ν.
pub fn joint_sample_point(maps: &[&PiecewiseMap], nu: &DensityMeasure, seed: u64, index: u64) -> Result<SamplePoint> {
    let base = maps.iter().find_map(|m| m.integer_base).unwrap_or(2);
    if nu.is_lebesgue() {
        return Ok(SamplePoint::lebesgue(base, seed, index));
    }
    let mut rng = DigitTape::stream_rng(seed ^ 0x6a09_e667, index);
    SamplePoint::with_prefix(base, nu.sample(&mut rng), seed, index)
}

/// `(1/(N-M)) Σ_{n=M}^{N-1} Π_i f_i(T_i^n x)`.
pub fn window_average(
    maps: &[&PiecewiseMap],
    observables: &[Observable],
    strategies: &[Strategy],
    point: &SamplePoint,
    window: (usize, usize),
) -> Result<Complex64> {
    let (m, n) = window;
    if maps.len() != observables.len() || maps.len() != strategies.len() || maps.is_empty() {
        return Err(Error::Parameter("need one observable and engine per map".into()));
    }
    if n <= m {
        return Err(Error::Parameter("window needs N > M".into()));
    }
    let mut engines = maps
        .iter()
        .zip(strategies)
        .map(|(map, s)| OrbitEngine::start(map, *s, point, n))
        .collect::<Result<Vec<_>>>()?;
    for e in engines.iter_mut() {
        for _ in 0..m {
            e.step()?;
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in m..n {
        let mut term = Complex64::new(1.0, 0.0);
        for (e, f) in engines.iter_mut().zip(observables) {
            term *= f.eval(e.value()?);
        }
        acc += term;
        if k + 1 < n {
            for e in engines.iter_mut() {
                e.step()?;
            }
        }
    }
    Ok(acc / (n - m) as f64)
}

/// Default engine for each map over a horizon.
pub fn default_strategies(maps: &[&PiecewiseMap], horizon: usize) -> Vec<Strategy> {
    maps.iter().map(|m| Strategy::auto(m, horizon)).collect()
}

/// One window of an L² joint-ergodicity test.
#[derive(Clone, Debug, Serialize)]
pub struct WindowRow {
    pub m: usize,
    pub n: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    /// `sqrt(mean |A_{M,N}(x) - target|^2)`.
    pub deviation: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AverageReport {
    pub rows: Vec<WindowRow>,
    pub target_re: f64,
    pub target_im: f64,
    pub samples: usize,
    pub seed: u64,
    pub engines: Vec<String>,
    pub statistical: bool,
    pub verdict: String,
}

/// Verdict strings used in reports.
pub const VERDICT_ERGODIC: &str = "consistent with joint ergodicity";
pub const VERDICT_NOT_ERGODIC: &str = "not jointly ergodic";
pub const VERDICT_INCONCLUSIVE: &str = "inconclusive";

/// Monte Carlo estimate over `x ~ ν` of every window average and of its L²(ν) distance to `Π ∫ f_i dµ_i`.
#[allow(clippy::too_many_arguments)]
pub fn l2_joint_test(
    maps: &[&PiecewiseMap],
    measures: &[&DensityMeasure],
    observables: &[Observable],
    schedule: &WindowSchedule,
    samples: usize,
    seed: u64,
    nu: &DensityMeasure,
    tolerance: f64,
) -> Result<AverageReport> {
    l2_joint_test_with_engines(maps, measures, observables, schedule, samples, seed, nu, tolerance, None)
}

/// [`l2_joint_test`] with an explicit engine per map instead of the default choice.
#[allow(clippy::too_many_arguments)]
pub fn l2_joint_test_with_engines(
    maps: &[&PiecewiseMap],
    measures: &[&DensityMeasure],
    observables: &[Observable],
    schedule: &WindowSchedule,
    samples: usize,
    seed: u64,
    nu: &DensityMeasure,
    tolerance: f64,
    engines: Option<&[Strategy]>,
) -> Result<AverageReport> {
    if measures.len() != maps.len() {
        return Err(Error::Parameter("need one invariant measure per map".into()));
    }
    if samples < 2 {
        return Err(Error::Parameter("need at least two samples".into()));
    }
    let mut target = Complex64::new(1.0, 0.0);
    for (f, mu) in observables.iter().zip(measures) {
        target *= f.integral(mu)?;
    }
    let horizon = schedule.windows.iter().map(|w| w.1).max().unwrap_or(0);
    let strategies = match engines {
        Some(e) if e.len() == maps.len() => e.to_vec(),
        Some(_) => return Err(Error::Parameter("need one engine per map".into())),
        None => default_strategies(maps, horizon),
    };
    let mut rows = Vec::new();
    for &(m, n) in &schedule.windows {
        let values: Vec<Complex64> = (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let p = joint_sample_point(maps, nu, seed, i)?;
                window_average(maps, observables, &strategies, &p, (m, n))
            })
            .collect::<Result<_>>()?;
        let mean: Complex64 = values.iter().sum::<Complex64>() / samples as f64;
        let sq: Vec<f64> = values.iter().map(|v| (v - target).norm_sqr()).collect();
        let msq = sq.iter().sum::<f64>() / samples as f64;
        let var = sq.iter().map(|s| (s - msq) * (s - msq)).sum::<f64>() / (samples - 1) as f64;
        let deviation = msq.sqrt();
        let se_sq = (var / samples as f64).sqrt();
        let stderr = if deviation > 0.0 { se_sq / (2.0 * deviation) } else { se_sq.sqrt() };
        rows.push(WindowRow { m, n, mean_re: mean.re, mean_im: mean.im, deviation, stderr });
    }
    let last = rows.last().expect("schedule is non-empty");
    let verdict = if last.stderr > tolerance / 2.0 {
        VERDICT_INCONCLUSIVE
    } else if last.deviation <= tolerance {
        VERDICT_ERGODIC
    } else {
        VERDICT_NOT_ERGODIC
    };
    let statistical = strategies.iter().any(|s| !s.is_exact());
    Ok(AverageReport {
        rows,
        target_re: target.re,
        target_im: target.im,
        samples,
        seed,
        engines: strategies.iter().map(|s| s.render()).collect(),
        statistical,
        verdict: verdict.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// `ν(B ∩ T_1^{-n}A_1 ∩ ... ∩ T_k^{-n}A_k)`.
#[derive(Clone, Debug, Serialize)]
pub struct Correlation {
    pub value: f64,
    /// Exact rational value, when ν is Lebesgue and all preimages are exact and complete.
    #[serde(skip)]
    pub exact: Option<BigRational>,
    pub tail_bound: f64,
    pub stderr: Option<f64>,
}

pub fn correlation(
    maps: &[&PiecewiseMap],
    base: &IntervalSet,
    targets: &[IntervalSet],
    n: usize,
    mode: CorrelationMode,
    nu: &DensityMeasure,
) -> Result<Correlation> {
    correlation_at(maps, base, targets, &vec![n; maps.len()], mode, nu)
}

/// `ν(B ∩ T_1^{-t_1}A_1 ∩ ... ∩ T_k^{-t_k}A_k)` with a separate time per map.
pub fn correlation_at(
    maps: &[&PiecewiseMap],
    base: &IntervalSet,
    targets: &[IntervalSet],
    times: &[usize],
    mode: CorrelationMode,
    nu: &DensityMeasure,
) -> Result<Correlation> {
    if maps.len() != targets.len() || maps.len() != times.len() {
        return Err(Error::Parameter("need one target set and one time per map".into()));
    }
    match mode {
        CorrelationMode::Exact => {
            let mut predicted: u128 = base.len() as u128;
            for ((m, a), &n) in maps.iter().zip(targets).zip(times) {
                let p = (a.len() as u128).saturating_mul((m.branches().len() as u128).saturating_pow(n as u32));
                predicted = predicted.max(p);
            }
            if predicted > EXACT_PIECE_LIMIT {
                return Err(Error::Blowup { predicted, limit: EXACT_PIECE_LIMIT });
            }
            let mut set = base.clone();
            let mut tail = 0.0;
            for ((m, a), &n) in maps.iter().zip(targets).zip(times) {
                let p = m.preimage_iter(a, n)?;
                if let Some(t) = &p.tail {
                    tail += nu.mass_exact(&t.lo, &t.hi) * n as f64;
                }
                tail += nu.measure_of(&m.undefined) * n as f64;
                set = set.intersect(&p.set);
            }
            let exact = if tail == 0.0 { nu.measure_exact(&set) } else { None };
            let value = match &exact {
                Some(r) => to_f64(r),
                None => nu.measure_of(&set),
            };
            Ok(Correlation { value, exact, tail_bound: tail, stderr: None })
        }
        CorrelationMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::Parameter("need at least two samples".into()));
            }
            let strategies: Vec<Strategy> = maps.iter().zip(times).map(|(m, &n)| Strategy::auto(m, n)).collect();
            let hits: Vec<f64> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let p = joint_sample_point(maps, nu, seed, i)?;
                    let x = p.clone().value_f64()?;
                    if !base.contains_f64(x) {
                        return Ok(0.0);
                    }
                    for (((m, a), s), &n) in maps.iter().zip(targets).zip(&strategies).zip(times) {
                        let mut e = OrbitEngine::start(m, *s, &p, n)?;
                        for _ in 0..n {
                            e.step()?;
                        }
                        if !a.contains_f64(e.value()?) {
                            return Ok(0.0);
                        }
                    }
                    Ok(1.0)
                })
                .collect::<Result<_>>()?;
            let mean = hits.iter().sum::<f64>() / samples as f64;
            let stderr = (mean * (1.0 - mean) / (samples - 1) as f64).sqrt();
            Ok(Correlation { value: mean, exact: None, tail_bound: 0.0, stderr: Some(stderr) })
        }
    }
}

/// Point of a decay curve.
#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    pub target: f64,
}

/// Correlations for `n = 0..=n_max` with the product target `ν(B) Π µ_i(A_i)`.
pub fn joint_mixing_curve(
    maps: &[&PiecewiseMap],
    measures: &[&DensityMeasure],
    base: &IntervalSet,
    targets: &[IntervalSet],
    n_max: usize,
    mode: CorrelationMode,
    nu: &DensityMeasure,
) -> Result<Vec<CurvePoint>> {
    if measures.len() != maps.len() {
        return Err(Error::Parameter("need one invariant measure per map".into()));
    }
    let target = nu.measure_of(base) * targets.iter().zip(measures).map(|(a, mu)| mu.measure_of(a)).product::<f64>();
    (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let c = correlation(maps, base, targets, n, mode, nu)?;
            Ok(CurvePoint { n, value: c.value, stderr: c.stderr.unwrap_or(c.tail_bound), target })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{make_gauss, make_linear_mod1, make_offset_doubling, make_skew_tent};
    use crate::measures::{gauss_measure, lebesgue};
    use crate::numeric::{int, rat};
    use num_traits::Zero;

    fn half() -> IntervalSet {
        IntervalSet::interval(BigRational::zero(), rat(1, 2)).unwrap()
    }

    fn tb(b: i64) -> PiecewiseMap {
        make_linear_mod1(int(b), BigRational::zero()).unwrap()
    }

    #[test]
    fn window_average_examples() {
        let t = tb(2);
        let p = SamplePoint::rational(2, &rat(1, 3)).unwrap();
        let v = window_average(&[&t], &[Observable::Indicator(half())], &[Strategy::DigitStream], &p, (0, 10)).unwrap();
        assert_eq!(v, Complex64::new(0.5, 0.0));
        let s = make_offset_doubling().unwrap();
        let q = SamplePoint::lebesgue(2, 3, 0);
        let st = default_strategies(&[&t, &s], 200);
        let v = window_average(&[&t, &s], &[Observable::Trig(2), Observable::Trig(-2)], &st, &q, (17, 200)).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        let q = SamplePoint::rational(2, &rat(1, 4)).unwrap();
        let v = window_average(&[&t], &[Observable::Trig(1)], &[Strategy::DigitStream], &q, (0, 1)).unwrap();
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let q = SamplePoint::lebesgue(2, 4, 1);
        let v = window_average(&[&t, &s], &[Observable::Trig(0), Observable::Trig(0)], &st, &q, (0, 50)).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn l2_examples() {
        let t = tb(2);
        let s = make_offset_doubling().unwrap();
        let lam = lebesgue();
        let sched = WindowSchedule::new(vec![(10, 100), (100, 1000)]).unwrap();
        let r = l2_joint_test(&[&t, &s], &[&lam, &lam], &[Observable::Trig(2), Observable::Trig(-2)], &sched, 20, 1, &lam, 0.05).unwrap();
        assert!(r.rows.iter().all(|w| (w.deviation - 1.0).abs() < 1e-10));
        assert_eq!(r.verdict, VERDICT_NOT_ERGODIC);
        let r = l2_joint_test(&[&t], &[&lam], &[Observable::Trig(0)], &sched, 10, 1, &lam, 0.05).unwrap();
        assert!(r.rows.iter().all(|w| w.deviation == 0.0));
        let again = l2_joint_test(&[&t], &[&lam], &[Observable::Trig(0)], &sched, 10, 1, &lam, 0.05).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn correlation_examples() {
        let t2 = tb(2);
        let t3 = tb(3);
        let lam = lebesgue();
        let c = correlation(&[&t2], &half(), &[half()], 1, CorrelationMode::Exact, &lam).unwrap();
        assert_eq!(c.exact, Some(rat(1, 4)));
        let c = correlation(&[&t2, &t3], &half(), &[half(), half()], 4, CorrelationMode::Exact, &lam).unwrap();
        assert!((c.value - 0.125).abs() < 0.01);
        let a = IntervalSet::interval(rat(1, 4), rat(3, 4)).unwrap();
        let c = correlation(&[&t2, &t3], &half(), &[a.clone(), a], 0, CorrelationMode::Exact, &lam).unwrap();
        assert_eq!(c.exact, Some(rat(1, 4)));
        let err = correlation(&[&tb(11)], &half(), &[half()], 8, CorrelationMode::Exact, &lam);
        assert!(matches!(err, Err(Error::Blowup { .. })));
    }

    #[test]
    fn exact_correlation_matches_grid() {
        let t2 = tb(2);
        let t3 = tb(3);
        let lam = lebesgue();
        let c = correlation(&[&t2, &t3], &half(), &[half(), half()], 4, CorrelationMode::Exact, &lam).unwrap();
        let cells = 1_000_000u64;
        let mut hits = 0u64;
        for i in 0..cells {
            // centre (2i+1)/(2 cells); T_b^4 acts on the numerator modulo 2 cells
            let num = 2 * i + 1;
            let den = 2 * cells;
            let in_a = |b: u64| ((b.pow(4) * num) % den) * 2 < den;
            if num * 2 < den && in_a(2) && in_a(3) {
                hits += 1;
            }
        }
        let grid = hits as f64 / cells as f64;
        assert!((c.value - grid).abs() < 2e-6, "{} {}", c.value, grid);
    }

    #[test]
    fn monte_carlo_stationarity() {
        let t = make_skew_tent(rat(3, 10)).unwrap();
        let lam = lebesgue();
        let a = IntervalSet::interval(rat(1, 5), rat(7, 10)).unwrap();
        for n in [1, 5, 20] {
            let c = correlation(&[&t], &IntervalSet::unit(), &[a.clone()], n, CorrelationMode::MonteCarlo { samples: 4000, seed: n as u64 }, &lam).unwrap();
            assert!((c.value - 0.5).abs() <= 3.0 * c.stderr.unwrap(), "{n} {}", c.value);
        }
    }

    #[test]
    fn mixing_curves() {
        let t3 = tb(3);
        let lam = lebesgue();
        let a = IntervalSet::interval(rat(1, 5), rat(7, 10)).unwrap();
        let curve = joint_mixing_curve(&[&t3], &[&lam], &half(), &[a], 10, CorrelationMode::Exact, &lam).unwrap();
        assert!((curve[10].value - curve[10].target).abs() < 0.01);
        let g = make_gauss(50).unwrap();
        let t11 = tb(11);
        let mg = gauss_measure();
        let curve = joint_mixing_curve(
            &[&g, &t11],
            &[&mg, &lam],
            &IntervalSet::unit(),
            &[half(), half()],
            20,
            CorrelationMode::MonteCarlo { samples: 20000, seed: 5 },
            &lam,
        )
        .unwrap();
        let last = curve.last().unwrap();
        assert!((last.value - last.target).abs() <= 2.0 * last.stderr + 1e-3, "{:?}", last);
    }

    #[test]
    fn observable_text_round_trip() {
        for s in ["ind:0,1/2;3/4,1", "trig:-2", "trig:0"] {
            assert_eq!(Observable::parse(s).unwrap().render(), s);
        }
        let t = Observable::parse("table:0,0.5,1:1,-1").unwrap();
        assert_eq!(t.eval(0.7), Complex64::new(-1.0, 0.0));
        assert!(Observable::parse("cos:1").is_err());
        assert_eq!(Observable::Trig(0).eval(0.3), Complex64::new(1.0, 0.0));
        let sched = WindowSchedule::parse("100,1000;1000,10000").unwrap();
        assert_eq!(WindowSchedule::parse(&sched.render()).unwrap(), sched);
        assert!(WindowSchedule::parse("5,3").is_err());
    }
}
