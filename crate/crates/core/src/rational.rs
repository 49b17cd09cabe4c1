//! Exact rational arithmetic for lengths, speeds, and times.
//!
//! All quantities in this crate are rationals so that the three solvers can
//! be compared for exact equality instead of arguing about float tolerances.
//! Values are kept normalized (positive denominator, reduced by gcd), which
//! keeps the numbers tiny at the instance sizes this crate targets.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// A normalized rational number over `i128`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128,
}

/// Error returned by [`Rational::parse`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number {0:?}")]
pub struct ParseRationalError(pub String);

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    /// Builds `num / den`, normalizing sign and common factors.
    ///
    /// Panics if `den == 0`; callers validate divisors up front.
    pub fn new(num: i128, den: i128) -> Rational {
        assert!(den != 0, "rational with zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn from_int(n: i64) -> Rational {
        Rational {
            num: n as i128,
            den: 1,
        }
    }

    /// Parses `"12"`, `"67.5"`, or an exact fraction `"3/4"`.
    pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
        let s = text.trim();
        let bad = || ParseRationalError(text.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = s.split_once('/') {
            let num: i128 = n.trim().parse().map_err(|_| bad())?;
            let den: i128 = d.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Rational::new(num, den));
        }
        let (sign, digits) = match s.strip_prefix('-') {
            Some(rest) => (-1i128, rest),
            None => (1i128, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        if frac_part.len() > 18 {
            return Err(bad());
        }
        let mut num: i128 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let mut den: i128 = 1;
        for c in frac_part.chars() {
            num = num * 10 + (c as u8 - b'0') as i128;
            den *= 10;
        }
        Ok(Rational::new(sign * num, den))
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn abs(&self) -> Rational {
        Rational {
            num: self.num.abs(),
            den: self.den,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    /// Canonical text form: exact decimal when the denominator divides a
    /// power of ten (`"2.5"`, `"67.5"`, `"10"`), otherwise `"num/den"`.
    pub fn to_canonical_string(&self) -> String {
        if self.den == 1 {
            return self.num.to_string();
        }
        let mut d = self.den;
        let mut twos = 0u32;
        let mut fives = 0u32;
        while d % 2 == 0 {
            d /= 2;
            twos += 1;
        }
        while d % 5 == 0 {
            d /= 5;
            fives += 1;
        }
        if d != 1 {
            return format!("{}/{}", self.num, self.den);
        }
        let digits = twos.max(fives);
        let scale = 10i128.pow(digits);
        let scaled = self.num * (scale / self.den);
        let sign = if scaled < 0 { "-" } else { "" };
        let mag = scaled.abs();
        let int_part = mag / scale;
        let mut frac = format!("{:0width$}", mag % scale, width = digits as usize);
        while frac.ends_with('0') {
            frac.pop();
        }
        format!("{sign}{int_part}.{frac}")
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational::new(self.num * rhs.den + rhs.num * self.den, self.den * rhs.den)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = *self + rhs;
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational::new(self.num * rhs.den - rhs.num * self.den, self.den * rhs.den)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational::new(self.num * rhs.num, self.den * rhs.den)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational::new(self.num * rhs.den, self.den * rhs.num)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + x)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Rational) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Rational) -> Ordering {
        // Denominators are positive, so cross-multiplication preserves order.
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn normalization() {
        assert_eq!(r(2, 4), r(1, 2));
        assert_eq!(r(-2, -4), r(1, 2));
        assert_eq!(r(2, -4), r(-1, 2));
        assert_eq!(r(0, -7), Rational::ZERO);
    }

    #[test]
    fn parse_decimals_and_fractions() {
        assert_eq!(Rational::parse("522.75").unwrap(), r(2091, 4));
        assert_eq!(Rational::parse("10").unwrap(), Rational::from_int(10));
        assert_eq!(Rational::parse("67.5").unwrap(), r(135, 2));
        assert_eq!(Rational::parse(".5").unwrap(), r(1, 2));
        assert_eq!(Rational::parse("-3.25").unwrap(), r(-13, 4));
        assert_eq!(Rational::parse("3/4").unwrap(), r(3, 4));
        assert!(Rational::parse("").is_err());
        assert!(Rational::parse("1.2.3").is_err());
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("abc").is_err());
    }

    #[test]
    fn arithmetic_is_exact() {
        // 60 * 90 / 80 = 67.5 stays exact.
        let t = Rational::from_int(60) * Rational::from_int(90) / Rational::from_int(80);
        assert_eq!(t, r(135, 2));
        assert_eq!(t.to_canonical_string(), "67.5");

        let total = Rational::from_int(110) + r(37, 1) + r(755, 4) + Rational::from_int(187);
        assert_eq!(total, r(2091, 4));
        assert_eq!(total.to_canonical_string(), "522.75");
    }

    #[test]
    fn ordering() {
        assert!(r(1, 3) < r(1, 2));
        assert!(r(-1, 2) < Rational::ZERO);
        let mut v = vec![r(5, 2), r(1, 3), r(7, 3)];
        v.sort();
        assert_eq!(v, vec![r(1, 3), r(7, 3), r(5, 2)]);
    }

    #[test]
    fn canonical_strings() {
        assert_eq!(r(1, 3).to_canonical_string(), "1/3");
        assert_eq!(r(-5, 2).to_canonical_string(), "-2.5");
        assert_eq!(r(1290, 1).to_canonical_string(), "1290");
        assert_eq!(r(1, 4).to_canonical_string(), "0.25");
        // Round-trips through parse.
        for v in [r(2091, 4), r(1, 3), r(-7, 20), Rational::ZERO] {
            assert_eq!(Rational::parse(&v.to_canonical_string()).unwrap(), v);
        }
    }

    #[test]
    fn sum_of_iterator() {
        let s: Rational = [r(1, 2), r(1, 3), r(1, 6)].into_iter().sum();
        assert_eq!(s, Rational::ONE);
    }
}
