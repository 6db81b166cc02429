//! p-adic numbers with capped relative precision.
//!
//! A nonzero value is `p^val * unit` where the unit is known modulo
//! `p^prec`. Cancellation can leave a result known only to lie in some
//! `p^n Z_p`; such values are [`Padic::Indeterminate`] and any operation
//! that needs their valuation fails with [`PadicError::Precision`] instead
//! of guessing.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::PadicError;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Padic {
    Zero,
    Value { val: i64, unit: u64, prec: u32 },
    /// Some element of `p^abs Z_p`.
    Indeterminate { abs: i64 },
}

/// Arithmetic context: the prime and the relative precision cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicRing {
    p: u64,
    precision: u32,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

impl PadicRing {
    pub fn new(p: u64, precision: u32) -> Result<Self, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        let fits = precision >= 1
            && (p as u128)
                .checked_pow(precision)
                .is_some_and(|m| m < (1u128 << 62));
        if !fits {
            return Err(PadicError::PrecisionOutOfRange { p, precision });
        }
        Ok(Self { p, precision })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub(crate) fn modulus(&self, exponent: u32) -> u64 {
        self.p.pow(exponent)
    }

    /// `p^e` for any integer `e`.
    pub fn p_power(&self, e: i64) -> Padic {
        Padic::Value {
            val: e,
            unit: 1,
            prec: self.precision,
        }
    }

    pub fn one(&self) -> Padic {
        self.p_power(0)
    }

    pub fn from_int(&self, n: i64) -> Padic {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> Padic {
        if n.is_zero() {
            return Padic::Zero;
        }
        let p = BigInt::from(self.p);
        let mut rest = n.clone();
        let mut val = 0;
        loop {
            let (q, r) = rest.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            rest = q;
            val += 1;
        }
        let m = BigInt::from(self.modulus(self.precision));
        let unit = rest.mod_floor(&m).to_u64().expect("reduced below modulus");
        Padic::Value {
            val,
            unit,
            prec: self.precision,
        }
    }

    pub fn from_rational(&self, r: &Rational) -> Result<Padic, PadicError> {
        let num = self.from_bigint(r.numer());
        let den = self.from_bigint(r.denom());
        self.div(num, den)
    }

    /// Smallest absolute precision among the operands; `None` if all exact.
    fn abs_precision(x: &Padic) -> Option<i64> {
        match *x {
            Padic::Zero => None,
            Padic::Value { val, prec, .. } => Some(val + prec as i64),
            Padic::Indeterminate { abs } => Some(abs),
        }
    }

    pub fn add(&self, a: Padic, b: Padic) -> Padic {
        match (a, b) {
            (Padic::Zero, x) | (x, Padic::Zero) => return x,
            _ => {}
        }
        let cap = [Self::abs_precision(&a), Self::abs_precision(&b)]
            .into_iter()
            .flatten()
            .min()
            .expect("both operands nonzero");
        let terms: Vec<(i64, u64)> = [a, b]
            .into_iter()
            .filter_map(|x| match x {
                Padic::Value { val, unit, .. } if val < cap => Some((val, unit)),
                _ => None,
            })
            .collect();
        let Some(low) = terms.iter().map(|t| t.0).min() else {
            return Padic::Indeterminate { abs: cap };
        };
        let width = (cap - low) as u32;
        let m = self.modulus(width) as u128;
        let mut sum: u128 = 0;
        for (val, unit) in terms {
            let shift = (val - low) as u32;
            if shift >= width {
                continue;
            }
            let term = (unit as u128 % m) * (self.modulus(shift) as u128) % m;
            sum = (sum + term) % m;
        }
        self.normalize(low, sum as u64, width)
    }

    /// `p^low * s` with `s` known modulo `p^width`.
    fn normalize(&self, low: i64, mut s: u64, width: u32) -> Padic {
        if s == 0 {
            return Padic::Indeterminate {
                abs: low + width as i64,
            };
        }
        let mut shift = 0;
        while s % self.p == 0 {
            s /= self.p;
            shift += 1;
        }
        let prec = width - shift;
        Padic::Value {
            val: low + shift as i64,
            unit: s % self.modulus(prec),
            prec,
        }
    }

    pub fn neg(&self, a: Padic) -> Padic {
        match a {
            Padic::Value { val, unit, prec } => {
                let m = self.modulus(prec);
                Padic::Value {
                    val,
                    unit: (m - unit % m) % m,
                    prec,
                }
            }
            other => other,
        }
    }

    pub fn sub(&self, a: Padic, b: Padic) -> Padic {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Padic, b: Padic) -> Padic {
        match (a, b) {
            (Padic::Zero, _) | (_, Padic::Zero) => Padic::Zero,
            (Padic::Indeterminate { abs: x }, Padic::Indeterminate { abs: y }) => {
                Padic::Indeterminate { abs: x + y }
            }
            (Padic::Indeterminate { abs }, Padic::Value { val, .. })
            | (Padic::Value { val, .. }, Padic::Indeterminate { abs }) => {
                Padic::Indeterminate { abs: abs + val }
            }
            (
                Padic::Value {
                    val: v1,
                    unit: u1,
                    prec: r1,
                },
                Padic::Value {
                    val: v2,
                    unit: u2,
                    prec: r2,
                },
            ) => {
                let prec = r1.min(r2);
                let m = self.modulus(prec) as u128;
                Padic::Value {
                    val: v1 + v2,
                    unit: ((u1 as u128 % m) * (u2 as u128 % m) % m) as u64,
                    prec,
                }
            }
        }
    }

    pub fn inv(&self, a: Padic) -> Result<Padic, PadicError> {
        match a {
            Padic::Zero => Err(PadicError::DivisionByZero),
            Padic::Indeterminate { .. } => Err(PadicError::Precision),
            Padic::Value { val, unit, prec } => {
                let m = self.modulus(prec);
                Ok(Padic::Value {
                    val: -val,
                    unit: mod_inverse(unit, m),
                    prec,
                })
            }
        }
    }

    pub fn div(&self, a: Padic, b: Padic) -> Result<Padic, PadicError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Valuation, `None` for exact zero.
    pub fn valuation(&self, a: &Padic) -> Result<Option<i64>, PadicError> {
        match *a {
            Padic::Zero => Ok(None),
            Padic::Value { val, .. } => Ok(Some(val)),
            Padic::Indeterminate { .. } => Err(PadicError::Precision),
        }
    }

    /// Whether `a` lies in `p^n Z_p`; decided whenever precision allows.
    pub fn divisible_by(&self, a: &Padic, n: i64) -> Result<bool, PadicError> {
        match *a {
            Padic::Zero => Ok(true),
            Padic::Value { val, .. } => Ok(val >= n),
            Padic::Indeterminate { abs } if abs >= n => Ok(true),
            Padic::Indeterminate { .. } => Err(PadicError::Precision),
        }
    }

    /// Representative in `[0, p^e)` of an element of `Z_p`.
    pub fn residue(&self, a: &Padic, e: u32) -> Result<u64, PadicError> {
        let m = self.modulus(e) as u128;
        match *a {
            Padic::Zero => Ok(0),
            Padic::Indeterminate { abs } if abs >= e as i64 => Ok(0),
            Padic::Indeterminate { .. } => Err(PadicError::Precision),
            Padic::Value { val, .. } if val >= e as i64 => Ok(0),
            Padic::Value { val, .. } if val < 0 => Err(PadicError::NotIntegral),
            Padic::Value { val, unit, prec } => {
                if val + (prec as i64) < e as i64 {
                    return Err(PadicError::Precision);
                }
                let shifted = (unit as u128 % m) * (self.p.pow(val as u32) as u128) % m;
                Ok(shifted as u64)
            }
        }
    }

    /// `|a|_p = p^{-val}` as an exact rational.
    pub fn abs(&self, a: &Padic) -> Result<Rational, PadicError> {
        match self.valuation(a)? {
            None => Ok(Rational::zero()),
            Some(v) => Ok(p_power_rational(self.p, -v)),
        }
    }
}

pub(crate) fn p_power_rational(p: u64, e: i64) -> Rational {
    let base = BigInt::from(p);
    let magnitude = num_traits::pow(base, e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(magnitude)
    } else {
        Rational::new(BigInt::one(), magnitude)
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "unit is invertible");
    old_s.rem_euclid(m as i128) as u64
}
