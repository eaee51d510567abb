use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::blaschke::BlaschkeData;
use crate::error::{Error, Result};
use crate::interval::{Endpoint, Interval};
use crate::numeric::{self, to_f64};

/// Closed-form description of one monotone branch.
#[derive(Clone, Debug)]
pub enum BranchForm {
    /// `x -> slope * x + offset`.
    Affine { slope: BigRational, offset: BigRational },
    /// `x -> 1/x - digit`.
    Reciprocal { digit: u64 },
    /// `x -> 4x(1 - x)` restricted to one monotone half.
    Logistic,
    /// `x -> 16x^3 - 24x^2 + 9x` restricted to one monotone third.
    Chebyshev3 { piece: u8 },
    /// Lifted argument of a circle Blaschke product minus its winding level.
    Blaschke { data: Arc<BlaschkeData>, level: i64 },
}

/// One monotone piece of a [`PiecewiseMap`](super::PiecewiseMap).
#[derive(Clone, Debug)]
pub struct Branch {
    /// Symbol used in itineraries and cylinder words.
    pub label: u64,
    pub domain: Interval<BigRational>,
    pub image: Interval<BigRational>,
    pub increasing: bool,
    pub form: BranchForm,
    coef: [f64; 2],
    dom_f: (f64, f64),
}

fn wrap_unit(v: f64) -> f64 {
    if (0.0..1.0).contains(&v) {
        v
    } else {
        let w = v - v.floor();
        if w >= 1.0 {
            0.0
        } else {
            w
        }
    }
}

/// `sin^2(pi x / 2)`.
pub fn psi(x: f64) -> f64 {
    let s = (PI * x / 2.0).sin();
    s * s
}

/// Inverse of [`psi`] on `[0, 1]`.
pub fn psi_inverse(y: f64) -> f64 {
    2.0 / PI * y.clamp(0.0, 1.0).sqrt().asin()
}

impl Branch {
    pub fn new(
        label: u64,
        domain: Interval<BigRational>,
        image: Interval<BigRational>,
        increasing: bool,
        form: BranchForm,
    ) -> Self {
        let coef = match &form {
            BranchForm::Affine { slope, offset } => [to_f64(slope), to_f64(offset)],
            BranchForm::Reciprocal { digit } => [*digit as f64, 0.0],
            _ => [0.0, 0.0],
        };
        let dom_f = (to_f64(&domain.lo), to_f64(&domain.hi));
        Branch { label, domain, image, increasing, form, coef, dom_f }
    }

    /// Affine branch whose image is computed from the domain.
    pub fn affine(label: u64, domain: Interval<BigRational>, slope: BigRational, offset: BigRational) -> Self {
        let a = &slope * &domain.lo + &offset;
        let b = &slope * &domain.hi + &offset;
        let increasing = slope.is_positive();
        let image = if increasing {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        };
        Branch::new(label, domain, image, increasing, BranchForm::Affine { slope, offset })
    }

    pub fn domain_f64(&self) -> (f64, f64) {
        self.dom_f
    }

    /// Constant |slope| for affine branches.
    pub fn constant_slope(&self) -> Option<&BigRational> {
        match &self.form {
            BranchForm::Affine { slope, .. } => Some(slope),
            _ => None,
        }
    }

    /// Forward value in f64; results are folded into `[0, 1)`.
    pub fn forward_f64(&self, x: f64) -> f64 {
        match &self.form {
            BranchForm::Affine { .. } => (self.coef[0] * x + self.coef[1]).clamp(0.0, 1.0),
            BranchForm::Reciprocal { .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    wrap_unit(1.0 / x)
                }
            }
            BranchForm::Logistic => (4.0 * x * (1.0 - x)).clamp(0.0, 1.0),
            BranchForm::Chebyshev3 { .. } => {
                (x * (9.0 + x * (-24.0 + 16.0 * x))).clamp(0.0, 1.0)
            }
            BranchForm::Blaschke { data, level } => {
                wrap_unit(data.lifted_argument(x) - *level as f64)
            }
        }
    }

    /// Forward value in the endpoint representation `E`.
    pub fn forward<E: Endpoint>(&self, x: &E) -> Result<E> {
        match &self.form {
            BranchForm::Affine { slope, offset } => {
                Ok(E::from_rational(slope).mul(x).add(&E::from_rational(offset)))
            }
            BranchForm::Reciprocal { digit } => {
                let d = E::from_rational(&numeric::int(*digit as i64));
                Ok(E::unit_point().div(x).sub(&d))
            }
            BranchForm::Logistic => {
                let four = E::from_rational(&numeric::int(4));
                Ok(four.mul(x).mul(&E::unit_point().sub(x)))
            }
            BranchForm::Chebyshev3 { .. } => {
                let c = |k: i64| E::from_rational(&numeric::int(k));
                let inner = c(-24).add(&c(16).mul(x));
                Ok(x.mul(&c(9).add(&x.mul(&inner))))
            }
            BranchForm::Blaschke { .. } => {
                if E::EXACT {
                    return Err(Error::Inexact("Blaschke branches have no exact forward form".into()));
                }
                Ok(E::from_f64(self.forward_f64(x.to_f64())))
            }
        }
    }

    /// Inverse branch applied to a point of the image.
    pub fn inverse<E: Endpoint>(&self, y: &E) -> Result<E> {
        match &self.form {
            BranchForm::Affine { slope, offset } => {
                Ok(y.sub(&E::from_rational(offset)).div(&E::from_rational(slope)))
            }
            BranchForm::Reciprocal { digit } => {
                let d = E::from_rational(&numeric::int(*digit as i64));
                Ok(E::unit_point().div(&d.add(y)))
            }
            _ => {
                if E::EXACT {
                    return Err(Error::Inexact(
                        "inverse branch is transcendental; use f64 interval sets".into(),
                    ));
                }
                Ok(E::from_f64(self.inverse_f64(y.to_f64())))
            }
        }
    }

    pub fn inverse_f64(&self, y: f64) -> f64 {
        let (lo, hi) = self.dom_f;
        let x = match &self.form {
            BranchForm::Affine { .. } => (y - self.coef[1]) / self.coef[0],
            BranchForm::Reciprocal { .. } => 1.0 / (self.coef[0] + y),
            BranchForm::Logistic => {
                let r = (1.0 - y).max(0.0).sqrt();
                if self.increasing {
                    0.5 * (1.0 - r)
                } else {
                    0.5 * (1.0 + r)
                }
            }
            BranchForm::Chebyshev3 { piece } => {
                // S(psi(t)) = psi(3t) for every t
                let s = psi_inverse(y);
                let t = match piece {
                    0 => s / 3.0,
                    1 => (2.0 - s) / 3.0,
                    _ => (2.0 + s) / 3.0,
                };
                psi(t)
            }
            BranchForm::Blaschke { data, level } => {
                return data.solve_lift(*level as f64 + y, lo, hi);
            }
        };
        x.clamp(lo, hi)
    }

    pub fn log_abs_derivative(&self, x: f64) -> f64 {
        match &self.form {
            BranchForm::Affine { .. } => self.coef[0].abs().ln(),
            BranchForm::Reciprocal { .. } => -2.0 * x.ln(),
            BranchForm::Logistic => (4.0 - 8.0 * x).abs().ln(),
            BranchForm::Chebyshev3 { .. } => (9.0 - 48.0 * x + 48.0 * x * x).abs().ln(),
            BranchForm::Blaschke { data, .. } => data.derivative(x).ln(),
        }
    }

    /// Fixed-point forward evaluation on `x = X / 2^bits`, rounding down.
    pub fn forward_fixed(&self, x: &BigInt, bits: u32) -> Option<BigInt> {
        let unit = BigInt::one() << bits as usize;
        let v = match &self.form {
            BranchForm::Affine { slope, offset } => {
                let (p, q) = (slope.numer(), slope.denom());
                let (r, s) = (offset.numer(), offset.denom());
                let num = p * s * x + r * q * &unit;
                num.div_floor(&(q * s))
            }
            BranchForm::Reciprocal { digit } => {
                if x.is_zero() {
                    return Some(BigInt::zero());
                }
                let inv = (BigInt::one() << (2 * bits) as usize).div_floor(x);
                inv - BigInt::from(*digit) * &unit
            }
            BranchForm::Logistic => (BigInt::from(4) * x * (&unit - x)) >> bits as usize,
            BranchForm::Chebyshev3 { .. } => {
                let x2 = x * x;
                let x3 = &x2 * x;
                let num = BigInt::from(9) * x * (&unit * &unit) - BigInt::from(24) * &x2 * &unit
                    + BigInt::from(16) * x3;
                num >> (2 * bits) as usize
            }
            BranchForm::Blaschke { .. } => return None,
        };
        // rounding can step just outside the branch image
        let v = if v.is_negative() { BigInt::zero() } else { v };
        Some(if v >= unit { &unit - 1 } else { v })
    }

    /// Whether the fixed-point form exists for this branch.
    pub fn has_fixed_form(&self) -> bool {
        !matches!(self.form, BranchForm::Blaschke { .. })
    }
}
