//! Rational helpers, parameter parsing and named constants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Denominator magnitude used for rational approximations of irrational
/// parameters (about 2^-128 accuracy).
const IRRATIONAL_BITS: u64 = 128;

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

/// Exact rational value of a finite f64.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn floor_int(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &BigRational) -> BigRational {
    r - r.floor()
}

/// `floor(r * 2^bits)` as an integer.
pub fn to_fixed(r: &BigRational, bits: u32) -> BigInt {
    let scaled = r.numer() << bits as usize;
    scaled.div_floor(r.denom())
}

pub fn from_fixed(x: &BigInt, bits: u32) -> BigRational {
    BigRational::new(x.clone(), BigInt::one() << bits as usize)
}

/// f64 value of `x / 2^bits` without overflowing intermediate conversions.
pub fn fixed_to_f64(x: &BigInt, bits: u32) -> f64 {
    let len = x.bits();
    if len <= 60 {
        return x.to_f64().unwrap_or(0.0) * 2f64.powi(-(bits as i32));
    }
    let shift = len - 60;
    let top: BigInt = x >> shift as usize;
    top.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32 - bits as i32)
}

/// Golden ratio as a ratio of consecutive Fibonacci numbers.
pub fn phi() -> BigRational {
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    while a.bits() < IRRATIONAL_BITS / 2 + 8 {
        let c = &a + &b;
        b = a;
        a = c;
    }
    BigRational::new(a, b)
}

/// sqrt(2) from Pell convergents.
pub fn sqrt2() -> BigRational {
    let (mut p, mut q) = (BigInt::one(), BigInt::one());
    while q.bits() < IRRATIONAL_BITS / 2 + 8 {
        let np = &p + BigInt::from(2) * &q;
        let nq = &p + &q;
        p = np;
        q = nq;
    }
    BigRational::new(p, q)
}

/// Kolmogorov–Sinai entropy of the Gauss map, pi^2 / (6 ln 2).
pub fn gauss_entropy() -> f64 {
    std::f64::consts::PI.powi(2) / (6.0 * std::f64::consts::LN_2)
}

/// Parses an exact real parameter: integers, decimals, `p/q`, scientific
/// notation, or one of the named constants (`phi`, `sqrt2`, `sqrt2-1`,
/// `pi`, `e`, `hgauss`, `exp_hgauss`).
pub fn parse_real(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let named = match t {
        "phi" => Some(phi()),
        "1/phi" | "phi-1" => Some(phi() - int(1)),
        "sqrt2" => Some(sqrt2()),
        "sqrt2-1" => Some(sqrt2() - int(1)),
        "pi" => Some(rational_from_f64(std::f64::consts::PI)),
        "e" => Some(rational_from_f64(std::f64::consts::E)),
        "hgauss" => Some(rational_from_f64(gauss_entropy())),
        "exp_hgauss" => Some(rational_from_f64(gauss_entropy().exp())),
        _ => None,
    };
    if let Some(v) = named {
        return Ok(v);
    }
    if let Some(rest) = t.strip_prefix('-') {
        return parse_real(rest).map(|v| -v);
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_real(p)?;
        let q = parse_real(q)?;
        if q.is_zero() {
            return Err(Error::parse(s, "zero denominator"));
        }
        return Ok(p / q);
    }
    parse_decimal(t).ok_or_else(|| Error::parse(s, "expected a number, p/q, or a named constant"))
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    if t.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (whole, fraction) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && fraction.is_empty() {
        return None;
    }
    if !whole.chars().chain(fraction.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{fraction}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exponent - fraction.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Canonical text for a rational: `p` or `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounds a rational down onto the dyadic grid `2^-bits`; keeps
/// repeated pushforwards from growing denominators without bound.
pub fn round_dyadic(r: &BigRational, bits: u32) -> BigRational {
    if r.denom().bits() <= bits as u64 {
        return r.clone();
    }
    from_fixed(&to_fixed(r, bits), bits)
}

pub fn abs_diff(a: &BigRational, b: &BigRational) -> BigRational {
    (a - b).abs()
}


/// Serializes rationals as `p/q` strings.
pub mod rational_serde {
    use num_rational::BigRational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(r))
    }
}
