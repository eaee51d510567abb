//! Orbit engines: lazily generated digit streams, certified fixed point, and float64.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::PiecewiseMap;
use crate::numeric::{fixed_to_f64, rational_from_f64};

/// Steps after which float64 orbits of integer-slope maps are refused.
pub const FLOAT_COLLAPSE_STEPS: usize = 40;

/// Minimum number of valid fractional bits kept by the fixed-point engine.
pub const MIN_VALID_BITS: f64 = 64.0;

/// Arithmetic used to advance an orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Float64,
    FixedPoint { bits: u32 },
    DigitStream,
}

impl Strategy {
    /// Exact where possible: digit stream for integer bases, fixed point for float-collapsing maps.
    pub fn auto(map: &PiecewiseMap, horizon: usize) -> Strategy {
        if map.integer_base.is_some() {
            Strategy::DigitStream
        } else if map.float_collapses() {
            let slope = map
                .branches()
                .iter()
                .filter_map(|b| b.constant_slope())
                .map(|s| crate::numeric::to_f64(s).abs())
                .fold(1.0, f64::max);
            Strategy::FixedPoint { bits: fixed_bits_for(slope, horizon) }
        } else {
            Strategy::Float64
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Strategy::Float64)
    }

    pub fn parse(s: &str) -> Result<Strategy> {
        let t = s.trim();
        match t {
            "float64" | "float" => Ok(Strategy::Float64),
            "digits" | "digit-stream" => Ok(Strategy::DigitStream),
            _ => {
                let bits = t
                    .strip_prefix("fixed:")
                    .or_else(|| t.strip_prefix("fixed="))
                    .and_then(|b| b.parse().ok())
                    .ok_or_else(|| Error::parse(t, "expected float64, digits or fixed:<bits>"))?;
                Ok(Strategy::FixedPoint { bits })
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            Strategy::Float64 => "float64".into(),
            Strategy::DigitStream => "digits".into(),
            Strategy::FixedPoint { bits } => format!("fixed:{bits}"),
        }
    }
}

/// Fractional bits that keep 64 valid bits after `steps` iterations with the given slope bound.
pub fn fixed_bits_for(slope_bound: f64, steps: usize) -> u32 {
    (steps as f64 * slope_bound.max(1.0).log2() + MIN_VALID_BITS + 16.0).ceil() as u32
}

#[derive(Clone, Debug)]
enum Source {
    Random(ChaCha8Rng),
    Division { rem: BigInt, den: BigInt, then: Option<ChaCha8Rng> , left: usize },
    Exhausted,
}

/// Base-b expansion of a point, generated on demand.
#[derive(Clone, Debug)]
pub struct DigitTape {
    base: u32,
    digits: Vec<u8>,
    source: Source,
}

impl DigitTape {
    fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        Self::stream_rng(seed, stream)
    }

    /// Independent generator for stream `stream` of `seed`.
    pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        r
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    fn ensure(&mut self, n: usize) -> Result<()> {
        while self.digits.len() < n {
            let b = self.base as u64;
            let d = match &mut self.source {
                Source::Random(r) => r.random_range(0..b) as u8,
                Source::Division { rem, den, then, left } => {
                    if *left == 0 {
                        self.source = match then.take() {
                            Some(r) => Source::Random(r),
                            None => Source::Exhausted,
                        };
                        continue;
                    }
                    *left = left.saturating_sub(1);
                    let scaled = &*rem * b;
                    let (q, r) = scaled.div_rem(den);
                    *rem = r;
                    q.to_u8().unwrap_or(0)
                }
                Source::Exhausted => {
                    return Err(Error::Precision(format!(
                        "digit tape exhausted after {} digits",
                        self.digits.len()
                    )))
                }
            };
            self.digits.push(d);
        }
        Ok(())
    }

    pub fn digit(&mut self, i: usize) -> Result<u32> {
        self.ensure(i + 1)?;
        Ok(self.digits[i] as u32)
    }

    /// Value of the shifted expansion `0.d_off d_{off+1} ...` to double precision.
    pub fn value_at(&mut self, off: usize) -> Result<f64> {
        let k = (60.0 / (self.base as f64).log2()).ceil() as usize + 1;
        self.ensure(off + k)?;
        let b = self.base as f64;
        let mut v = 0.0;
        for &d in self.digits[off..off + k].iter().rev() {
            v = (v + d as f64) / b;
        }
        Ok(v.min(1.0 - f64::EPSILON / 2.0))
    }

    /// `floor(x 2^bits)` of the unshifted expansion, using enough digits to fix every bit.
    pub fn fixed(&mut self, bits: u32) -> Result<BigInt> {
        let b = self.base;
        if b == 2 {
            self.ensure(bits as usize)?;
            let mut x = BigUint::from_radix_be(&self.digits[..bits as usize], 2).unwrap_or_default();
            if bits == 0 {
                x = BigUint::zero();
            }
            return Ok(BigInt::from_biguint(Sign::Plus, x));
        }
        let d = (bits as f64 / (b as f64).log2()).ceil() as usize + 2;
        self.ensure(d)?;
        let n = BigUint::from_radix_be(&self.digits[..d], b).unwrap_or_default();
        let scaled = BigInt::from_biguint(Sign::Plus, n << bits as usize);
        Ok(scaled.div_floor(&BigInt::from(b).pow(d as u32)))
    }

    /// The first `count` digits in another base.
    pub fn convert(&mut self, base: u32, count: usize) -> Result<Vec<u8>> {
        if base == self.base {
            self.ensure(count)?;
            return Ok(self.digits[..count].to_vec());
        }
        let bits = (count as f64 * (base as f64).log2()).ceil() as u32 + 64;
        let x = self.fixed(bits)?;
        let y: BigInt = (x * BigInt::from(base).pow(count as u32)) >> bits as usize;
        let mut digits = y.to_biguint().unwrap_or_default().to_radix_be(base);
        if y.is_zero() {
            digits.clear();
        }
        let mut out = vec![0u8; count.saturating_sub(digits.len())];
        out.extend(digits);
        Ok(out)
    }
}

/// A starting point shared by the engines of several maps.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    tape: DigitTape,
}

impl SamplePoint {
    /// Lebesgue-random point given by i.i.d. uniform base-b digits.
    pub fn lebesgue(base: u32, seed: u64, index: u64) -> SamplePoint {
        SamplePoint {
            tape: DigitTape { base, digits: Vec::new(), source: Source::Random(DigitTape::rng(seed, index)) },
        }
    }

    /// The exact rational `x` in `[0, 1)` with its eventually periodic expansion.
    pub fn rational(base: u32, x: &BigRational) -> Result<SamplePoint> {
        if x.is_negative() || x >= &BigRational::one() {
            return Err(Error::Domain("sample point must lie in [0, 1)".into()));
        }
        Ok(SamplePoint {
            tape: DigitTape {
                base,
                digits: Vec::new(),
                source: Source::Division { rem: x.numer().clone(), den: x.denom().clone(), then: None, left: usize::MAX },
            },
        })
    }

    /// The point `x` to beyond double precision, continued by random digits.
    pub fn with_prefix(base: u32, x: f64, seed: u64, index: u64) -> Result<SamplePoint> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!("sample point {x} outside [0, 1)")));
        }
        let r = rational_from_f64(x);
        let depth = if x > 0.0 { (-x.log2()).max(0.0) } else { 0.0 };
        let left = ((depth + 64.0) / (base as f64).log2()).ceil() as usize;
        Ok(SamplePoint {
            tape: DigitTape {
                base,
                digits: Vec::new(),
                source: Source::Division {
                    rem: r.numer().clone(),
                    den: r.denom().clone(),
                    then: Some(DigitTape::rng(seed, index)),
                    left,
                },
            },
        })
    }

    pub fn base(&self) -> u32 {
        self.tape.base
    }

    pub fn value_f64(&mut self) -> Result<f64> {
        self.tape.value_at(0)
    }

    pub fn tape(&mut self) -> &mut DigitTape {
        &mut self.tape
    }
}

#[derive(Clone, Debug)]
enum State {
    Float { x: f64 },
    Fixed { x: BigInt, bits: u32, log_err: f64 },
    Digits { tape: DigitTape, offset: usize, limit: usize },
}

/// An orbit `x, Tx, T^2 x, ...` of one map.
#[derive(Clone, Debug)]
pub struct OrbitEngine<'m> {
    map: &'m PiecewiseMap,
    state: State,
    steps: usize,
}

impl<'m> OrbitEngine<'m> {
    /// Starts an orbit; `horizon` bounds the number of steps when digits must be converted.
    pub fn start(map: &'m PiecewiseMap, strategy: Strategy, point: &SamplePoint, horizon: usize) -> Result<Self> {
        let mut p = point.clone();
        let state = match strategy {
            Strategy::Float64 => State::Float { x: p.value_f64()? },
            Strategy::FixedPoint { bits } => {
                if map.branches().iter().any(|b| !b.has_fixed_form()) {
                    return Err(Error::Precondition(format!("{} has no fixed-point form", map.name)));
                }
                State::Fixed { x: p.tape.fixed(bits)?, bits, log_err: 0.0 }
            }
            Strategy::DigitStream => {
                let b = map.integer_base.ok_or_else(|| {
                    Error::Precondition(format!("digit stream needs an integer-base map, not {}", map.name))
                })?;
                if b == p.base() {
                    State::Digits { tape: p.tape, offset: 0, limit: usize::MAX }
                } else {
                    let count = horizon + 64;
                    let digits = p.tape.convert(b, count)?;
                    let tape = DigitTape { base: b, digits, source: Source::Exhausted };
                    State::Digits { tape, offset: 0, limit: horizon }
                }
            }
        };
        Ok(OrbitEngine { map, state, steps: 0 })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// True for float64 orbits, whose values are only statistically meaningful.
    pub fn statistical(&self) -> bool {
        matches!(self.state, State::Float { .. })
    }

    /// Current point.
    pub fn value(&mut self) -> Result<f64> {
        match &mut self.state {
            State::Float { x } => Ok(*x),
            State::Fixed { x, bits, .. } => Ok(fixed_to_f64(x, *bits)),
            State::Digits { tape, offset, .. } => tape.value_at(*offset),
        }
    }

    /// Label of the branch containing the current point.
    pub fn symbol(&mut self) -> Result<u64> {
        match &mut self.state {
            State::Float { x } => self
                .map
                .branch_at(*x)
                .map(|b| b.label)
                .ok_or_else(|| Error::Domain(format!("{} undefined at {x}", self.map.name))),
            State::Fixed { x, bits, .. } => self
                .map
                .branch_at_fixed(x, *bits)
                .map(|b| b.label)
                .ok_or_else(|| Error::Domain(format!("{} undefined on fixed orbit", self.map.name))),
            State::Digits { tape, offset, .. } => Ok(tape.digit(*offset)? as u64),
        }
    }

    /// Valid fractional bits remaining (infinite for exact streams).
    pub fn valid_bits(&self) -> f64 {
        match &self.state {
            State::Float { .. } => 53.0,
            State::Fixed { bits, log_err, .. } => *bits as f64 - log_err,
            State::Digits { .. } => f64::INFINITY,
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let map = self.map;
        let step = self.steps;
        match &mut self.state {
            State::Float { x } => {
                if step >= FLOAT_COLLAPSE_STEPS && map.float_collapses() {
                    return Err(Error::Precision(format!(
                        "float64 orbit of {} collapses after {} steps; use digits or fixed point",
                        map.name, FLOAT_COLLAPSE_STEPS
                    )));
                }
                *x = map
                    .try_eval_f64(*x)
                    .ok_or_else(|| Error::Domain(format!("{} undefined at {x}", map.name)))?;
            }
            State::Fixed { x, bits, log_err } => {
                let b = map
                    .branch_at_fixed(x, *bits)
                    .ok_or_else(|| Error::Domain(format!("{} undefined on fixed orbit", map.name)))?;
                let e = BigInt::one() << (log_err.ceil().max(0.0) as usize);
                let lo = &*x - &e;
                let hi = &*x + &e;
                if !crate::maps::contains_fixed(&b.domain, &lo, *bits) || !crate::maps::contains_fixed(&b.domain, &hi, *bits) {
                    return Err(Error::Boundary { step });
                }
                let growth = b.log_abs_derivative(fixed_to_f64(x, *bits)) / std::f64::consts::LN_2;
                let a = *log_err + growth.max(0.0) + 0.01;
                *log_err = if a > 50.0 { a + 1e-12 } else { (a.exp2() + 1.0).log2() };
                if (*bits as f64 - *log_err) < MIN_VALID_BITS {
                    return Err(Error::Precision(format!(
                        "fewer than {MIN_VALID_BITS} valid bits after {} steps with {} bits",
                        step + 1,
                        bits
                    )));
                }
                *x = b.forward_fixed(x, *bits).expect("fixed form checked at start");
            }
            State::Digits { offset, limit, .. } => {
                if *offset >= *limit {
                    return Err(Error::Precision("converted digit horizon exceeded".into()));
                }
                *offset += 1;
            }
        }
        self.steps += 1;
        Ok(())
    }
}

/// Orbit values `x, Tx, ..., T^n x` together with the statistical flag.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub values: Vec<f64>,
    pub statistical: bool,
}

pub fn orbit(map: &PiecewiseMap, strategy: Strategy, point: &SamplePoint, n: usize) -> Result<Orbit> {
    let mut e = OrbitEngine::start(map, strategy, point, n)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(e.value()?);
    for _ in 0..n {
        e.step()?;
        values.push(e.value()?);
    }
    Ok(Orbit { values, statistical: e.statistical() })
}

/// `T^n x` via the chosen engine.
pub fn iterate(map: &PiecewiseMap, strategy: Strategy, point: &SamplePoint, n: usize) -> Result<f64> {
    let mut e = OrbitEngine::start(map, strategy, point, n)?;
    for _ in 0..n {
        e.step()?;
    }
    e.value()
}

/// Exact orbit of a rational point.
pub fn iterate_exact(map: &PiecewiseMap, x: &BigRational, n: usize) -> Result<BigRational> {
    let mut y = x.clone();
    for _ in 0..n {
        y = map.eval_exact(&y)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{make_gauss, make_linear_mod1, make_skew_tent};
    use crate::numeric::{int, rat};

    fn doubling() -> PiecewiseMap {
        make_linear_mod1(int(2), BigRational::zero()).unwrap()
    }

    #[test]
    fn digit_stream_shift_of_one_third() {
        let t = doubling();
        let p = SamplePoint::rational(2, &rat(1, 3)).unwrap();
        let v = iterate(&t, Strategy::DigitStream, &p, 5).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let v = iterate(&t, Strategy::DigitStream, &p, 100_000).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn float_doubling_small_n_and_refusal() {
        let t = doubling();
        let p = SamplePoint::with_prefix(2, 0.1, 1, 0).unwrap();
        let v = iterate(&t, Strategy::Float64, &p, 3).unwrap();
        assert!((v - 0.8).abs() < 1e-12);
        assert!(matches!(iterate(&t, Strategy::Float64, &p, 41), Err(Error::Precision(_))));
        let tent = make_skew_tent(rat(1, 2)).unwrap();
        assert!(matches!(iterate(&tent, Strategy::Float64, &p, 60), Err(Error::Precision(_))));
    }

    #[test]
    fn gauss_golden_fixed_point() {
        let g = make_gauss(50).unwrap();
        let x = (5f64.sqrt() - 1.0) / 2.0;
        let p = SamplePoint::with_prefix(2, x, 0, 0).unwrap();
        let v = iterate(&g, Strategy::Float64, &p, 7).unwrap();
        assert!((v - x).abs() < 1e-9);
        let r = crate::numeric::phi() - BigRational::one();
        let p = SamplePoint::rational(2, &r).unwrap();
        let v = iterate(&g, Strategy::FixedPoint { bits: 256 }, &p, 7).unwrap();
        assert!((v - x).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_refuses_when_bits_run_out() {
        let t = make_linear_mod1(int(3), BigRational::zero()).unwrap();
        let p = SamplePoint::lebesgue(2, 5, 0);
        let bits = fixed_bits_for(3.0, 20);
        assert!(iterate(&t, Strategy::FixedPoint { bits }, &p, 20).is_ok());
        assert!(matches!(iterate(&t, Strategy::FixedPoint { bits: 80 }, &p, 20), Err(Error::Precision(_))));
    }

    #[test]
    fn digit_stream_and_fixed_point_itineraries_agree() {
        for base in [2u32, 3, 11] {
            let t = make_linear_mod1(int(base as i64), BigRational::zero()).unwrap();
            let bits = fixed_bits_for(base as f64, 20);
            for seed in 0..100 {
                let p = SamplePoint::lebesgue(2, seed, 7);
                let mut a = OrbitEngine::start(&t, Strategy::DigitStream, &p, 20).unwrap();
                let mut b = OrbitEngine::start(&t, Strategy::FixedPoint { bits }, &p, 20).unwrap();
                for _ in 0..20 {
                    assert_eq!(a.symbol().unwrap(), b.symbol().unwrap());
                    a.step().unwrap();
                    b.step().unwrap();
                }
            }
        }
    }

    #[test]
    fn base_conversion_matches_value() {
        let mut p = SamplePoint::lebesgue(2, 9, 1);
        let x = p.value_f64().unwrap();
        let d = p.tape().convert(3, 20).unwrap();
        let mut v = 0.0;
        for &k in d.iter().rev() {
            v = (v + k as f64) / 3.0;
        }
        assert!((v - x).abs() < 1e-9);
    }

    #[test]
    fn prefix_reproduces_float() {
        let mut p = SamplePoint::with_prefix(3, 0.123456789, 4, 2).unwrap();
        assert!((p.value_f64().unwrap() - 0.123456789).abs() < 1e-16);
        let q = p.clone();
        let mut q2 = q.clone();
        assert_eq!(p.tape().convert(3, 200).unwrap(), q2.tape().convert(3, 200).unwrap());
    }

    #[test]
    fn strategy_text_round_trip() {
        for s in [Strategy::Float64, Strategy::DigitStream, Strategy::FixedPoint { bits: 300 }] {
            assert_eq!(Strategy::parse(&s.render()).unwrap(), s);
        }
        assert!(Strategy::parse("quad").is_err());
    }
}
