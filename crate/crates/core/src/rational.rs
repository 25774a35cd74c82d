//! Nonnegative exact fractions, always stored in lowest terms.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Significant digits carried by [`Rational::approx`].
pub const APPROX_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(Ratio<BigUint>);

impl Rational {
    /// `num / den`, reduced. Fails when `den == 0`.
    pub fn new(num: BigUint, den: BigUint) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid("zero denominator"));
        }
        Ok(Rational(Ratio::new(num, den)))
    }

    pub fn from_counts(num: u64, den: u64) -> Result<Self> {
        Self::new(BigUint::from(num), BigUint::from(den))
    }

    /// `num / den` when `den > 0`, zero otherwise. Used for conditional
    /// probabilities whose conditioning event is empty.
    pub fn ratio_or_zero(num: u64, den: u64) -> Self {
        if den == 0 {
            Self::zero()
        } else {
            Self::from_counts(num, den).expect("nonzero denominator")
        }
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational(Ratio::one())
    }

    pub fn from_integer(n: BigUint) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// `1 / self`, or `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    /// `self - other`, or `None` if that would be negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        (self >= other).then(|| Rational(&self.0 - &other.0))
    }

    /// Nearest `f64`; exact for values whose decimal expansion needs at
    /// most 15 significant digits.
    pub fn to_f64(&self) -> f64 {
        self.approx_string(17).parse().expect("well-formed decimal")
    }

    /// Value correctly rounded (half to even) to [`APPROX_DIGITS`]
    /// significant digits.
    pub fn approx(&self) -> f64 {
        self.approx_string(APPROX_DIGITS)
            .parse()
            .expect("well-formed decimal")
    }

    /// Decimal rendering rounded half-to-even to `digits` significant
    /// digits, e.g. `2/7` with 12 digits gives `0.285714285714`.
    pub fn approx_string(&self, digits: usize) -> String {
        assert!(digits > 0);
        let num = self.numer();
        let den = self.denom();
        if num.is_zero() {
            return "0".to_string();
        }
        // Find e with 10^(digits-1) <= num * 10^e / den < 10^digits.
        let lo = BigUint::from(10u32).pow(digits as u32 - 1);
        let hi = &lo * 10u32;
        let mut e: i64 = digits as i64 - 1
            - (num.bits() as i64 - den.bits() as i64) * 30103 / 100000;
        let scaled = |e: i64| -> (BigUint, BigUint) {
            if e >= 0 {
                (num * BigUint::from(10u32).pow(e as u32), den.clone())
            } else {
                (num.clone(), den * BigUint::from(10u32).pow((-e) as u32))
            }
        };
        let (q, r, d) = loop {
            let (n_s, d_s) = scaled(e);
            let (q, r) = n_s.div_rem(&d_s);
            if q < lo {
                e += 1;
            } else if q >= hi {
                e -= 1;
            } else {
                break (q, r, d_s);
            }
        };
        // Round half to even on the remainder.
        let twice = &r * 2u32;
        let mut q = match twice.cmp(&d) {
            Ordering::Less => q,
            Ordering::Greater => q + 1u32,
            Ordering::Equal if q.is_odd() => q + 1u32,
            Ordering::Equal => q,
        };
        if q == hi {
            q = lo.clone();
            e -= 1;
        }
        let mut digits_str = q.to_str_radix(10);
        // value = q * 10^-e
        if e <= 0 {
            digits_str.extend(std::iter::repeat_n('0', (-e) as usize));
            return digits_str;
        }
        let e = e as usize;
        let frac_str = if digits_str.len() > e {
            let split = digits_str.len() - e;
            format!("{}.{}", &digits_str[..split], &digits_str[split..])
        } else {
            format!("0.{}{}", "0".repeat(e - digits_str.len()), digits_str)
        };
        let trimmed = frac_str.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Mul<u64> for &Rational {
    type Output = Rational;
    fn mul(self, rhs: u64) -> Rational {
        Rational(&self.0 * Ratio::from_integer(BigUint::from(rhs)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Parses `a/b` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            BigUint::from_str(t.trim()).map_err(|_| Error::invalid(format!("bad integer {t:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Rational::new(parse(n)?, parse(d)?),
            None => Ok(Rational::from_integer(parse(s)?)),
        }
    }
}

impl ToPrimitive for Rational {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_integer().to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_integer().to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(Rational::to_f64(self))
    }
}
