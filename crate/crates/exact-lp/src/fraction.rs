//! Exact rational numbers.
//!
//! Values whose numerator and denominator fit in an `i64` are kept inline and
//! combined through `i128` intermediates; anything larger is promoted to
//! `BigInt`. The representation is canonical (lowest terms, positive
//! denominator, small whenever it fits), so structural equality is value
//! equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// den > 0, gcd(|num|, den) = 1, num != i64::MIN.
    Small(i64, i64),
    /// Same invariants, and the value does not fit `Small`.
    Big(Box<(BigInt, BigInt)>),
}

/// An exact rational number in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fraction(Repr);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseFractionError {
    #[error("empty fraction literal")]
    Empty,
    #[error("invalid integer in fraction literal {0:?}")]
    BadInteger(String),
    #[error("zero denominator in fraction literal {0:?}")]
    ZeroDenominator(String),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Fraction {
    pub fn zero() -> Self {
        Fraction(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Fraction(Repr::Small(1, 1))
    }

    pub fn from_integer(n: i64) -> Self {
        if n == i64::MIN {
            return Self::from_big(BigInt::from(n), BigInt::one());
        }
        Fraction(Repr::Small(n, 1))
    }

    /// `num / den`. Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    /// Builds from arbitrary-precision parts. Panics if `den` is zero.
    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let g = num.gcd(&den);
        let (mut n, mut d) = (num / &g, den / &g);
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        match (n.to_i64(), d.to_i64()) {
            (Some(a), Some(b)) if a != i64::MIN => Fraction(Repr::Small(a, b)),
            _ => Fraction(Repr::Big(Box::new((n, d)))),
        }
    }

    /// `2^-exp` as an exact fraction.
    pub fn pow2_recip(exp: u32) -> Self {
        if exp < 63 {
            Fraction(Repr::Small(1, 1i64 << exp))
        } else {
            Self::from_big(BigInt::one(), BigInt::one() << exp as usize)
        }
    }

    fn from_i128(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        if num == 0 {
            return Self::zero();
        }
        let g = gcd_u128(num.unsigned_abs(), den.unsigned_abs());
        // g >= 1 and divides both, so the quotients fit back in i128 unless
        // the input was i128::MIN with g == 1.
        let (mut n, mut d) = match (num.checked_div(g as i128), den.checked_div(g as i128)) {
            (Some(n), Some(d)) if g <= i128::MAX as u128 => (n, d),
            _ => return Self::from_big(BigInt::from(num), BigInt::from(den)),
        };
        if d < 0 {
            match (n.checked_neg(), d.checked_neg()) {
                (Some(a), Some(b)) => {
                    n = a;
                    d = b;
                }
                _ => return Self::from_big(BigInt::from(num), BigInt::from(den)),
            }
        }
        if n > i64::MIN as i128 && n <= i64::MAX as i128 && d <= i64::MAX as i128 {
            Fraction(Repr::Small(n as i64, d as i64))
        } else {
            Fraction(Repr::Big(Box::new((BigInt::from(n), BigInt::from(d)))))
        }
    }

    fn big_parts(&self) -> (BigInt, BigInt) {
        match &self.0 {
            Repr::Small(n, d) => (BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (b.0.clone(), b.1.clone()),
        }
    }

    pub fn numer(&self) -> BigInt {
        self.big_parts().0
    }

    pub fn denom(&self) -> BigInt {
        self.big_parts().1
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.1.is_one(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(n, _) => n.signum() as i32,
            Repr::Big(b) => {
                let n = &b.0;
                if n.is_negative() {
                    -1
                } else if n.is_zero() {
                    0
                } else {
                    1
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Self::from_i128(*d as i128, *n as i128)
            }
            Repr::Big(b) => Self::from_big(b.1.clone(), b.0.clone()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => {
                let (n, d) = (&b.0, &b.1);
                // Scale down so both parts fit comfortably in f64 range.
                let bits = n.bits().max(d.bits());
                let shift = bits.saturating_sub(1000) as usize;
                let nf = (n >> shift).to_f64().unwrap_or(f64::NAN);
                let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
                nf / df
            }
        }
    }

    /// Best rational approximation of `x` with denominator at most `max_den`
    /// (continued-fraction convergents). Returns `None` for non-finite input.
    pub fn approximate(x: f64, max_den: u64) -> Option<Self> {
        if !x.is_finite() || x.abs() > 1e15 {
            return None;
        }
        let neg = x < 0.0;
        let mut r = x.abs();
        let (mut p0, mut q0, mut p1, mut q1): (i128, i128, i128, i128) = (0, 1, 1, 0);
        for _ in 0..64 {
            let a = r.floor();
            let ai = a as i128;
            let p2 = ai * p1 + p0;
            let q2 = ai * q1 + q0;
            if q2 > max_den as i128 {
                break;
            }
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
            let frac = r - a;
            if frac < 1e-12 {
                break;
            }
            r = 1.0 / frac;
        }
        if q1 == 0 {
            return None;
        }
        let f = Self::from_i128(p1, q1);
        Some(if neg { -f } else { f })
    }

    pub fn max(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Default for Fraction {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Fraction {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<i32> for Fraction {
    fn from(n: i32) -> Self {
        Self::from_integer(n as i64)
    }
}

impl From<usize> for Fraction {
    fn from(n: usize) -> Self {
        Self::from_i128(n as i128, 1)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.1.is_one() => write!(f, "{}", b.0),
            Repr::Big(b) => write!(f, "{}/{}", b.0, b.1),
        }
    }
}

impl fmt::Debug for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Fraction {
    type Err = ParseFractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseFractionError::Empty);
        }
        let parse = |part: &str| {
            part.trim()
                .parse::<BigInt>()
                .map_err(|_| ParseFractionError::BadInteger(s.to_string()))
        };
        match s.split_once('/') {
            None => Ok(Self::from_big(parse(s)?, BigInt::one())),
            Some((n, d)) => {
                let d = parse(d)?;
                if d.is_zero() {
                    return Err(ParseFractionError::ZeroDenominator(s.to_string()));
                }
                Ok(Self::from_big(parse(n)?, d))
            }
        }
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => {
                let (a, b) = self.big_parts();
                let (c, d) = other.big_parts();
                (a * d).cmp(&(c * b))
            }
        }
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_impl(x: &Fraction, y: &Fraction, negate_y: bool) -> Fraction {
    if y.is_zero() {
        return x.clone();
    }
    if x.is_zero() {
        return if negate_y { -y } else { y.clone() };
    }
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            let c = if negate_y { -(*c as i128) } else { *c as i128 };
            if b == d {
                return Fraction::from_i128(*a as i128 + c, *b as i128);
            }
            let num = *a as i128 * *d as i128 + c * *b as i128;
            Fraction::from_i128(num, *b as i128 * *d as i128)
        }
        _ => {
            let (a, b) = x.big_parts();
            let (mut c, d) = y.big_parts();
            if negate_y {
                c = -c;
            }
            Fraction::from_big(a * &d + c * &b, b * d)
        }
    }
}

fn mul_impl(x: &Fraction, y: &Fraction) -> Fraction {
    if x.is_zero() || y.is_zero() {
        return Fraction::zero();
    }
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            Fraction::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
        }
        _ => {
            let (a, b) = x.big_parts();
            let (c, d) = y.big_parts();
            Fraction::from_big(a * c, b * d)
        }
    }
}

fn div_impl(x: &Fraction, y: &Fraction) -> Fraction {
    assert!(!y.is_zero(), "division by zero");
    if x.is_zero() {
        return Fraction::zero();
    }
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            Fraction::from_i128(*a as i128 * *d as i128, *b as i128 * *c as i128)
        }
        _ => {
            let (a, b) = x.big_parts();
            let (c, d) = y.big_parts();
            Fraction::from_big(a * d, b * c)
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Fraction> for &Fraction {
            type Output = Fraction;
            fn $method(self, rhs: &Fraction) -> Fraction {
                $body(self, rhs)
            }
        }
        impl $trait<Fraction> for Fraction {
            type Output = Fraction;
            fn $method(self, rhs: Fraction) -> Fraction {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Fraction> for Fraction {
            type Output = Fraction;
            fn $method(self, rhs: &Fraction) -> Fraction {
                $body(&self, rhs)
            }
        }
        impl $trait<Fraction> for &Fraction {
            type Output = Fraction;
            fn $method(self, rhs: Fraction) -> Fraction {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |x, y| add_impl(x, y, false));
forward_binop!(Sub, sub, |x, y| add_impl(x, y, true));
forward_binop!(Mul, mul, mul_impl);
forward_binop!(Div, div, div_impl);

impl Neg for &Fraction {
    type Output = Fraction;
    fn neg(self) -> Fraction {
        match &self.0 {
            Repr::Small(n, d) => Fraction(Repr::Small(-n, *d)),
            Repr::Big(b) => Fraction::from_big(-&b.0, b.1.clone()),
        }
    }
}

impl Neg for Fraction {
    type Output = Fraction;
    fn neg(self) -> Fraction {
        -&self
    }
}

impl AddAssign<&Fraction> for Fraction {
    fn add_assign(&mut self, rhs: &Fraction) {
        *self = add_impl(self, rhs, false);
    }
}

impl AddAssign for Fraction {
    fn add_assign(&mut self, rhs: Fraction) {
        *self = add_impl(self, &rhs, false);
    }
}

impl SubAssign<&Fraction> for Fraction {
    fn sub_assign(&mut self, rhs: &Fraction) {
        *self = add_impl(self, rhs, true);
    }
}

impl SubAssign for Fraction {
    fn sub_assign(&mut self, rhs: Fraction) {
        *self = add_impl(self, &rhs, true);
    }
}

impl MulAssign<&Fraction> for Fraction {
    fn mul_assign(&mut self, rhs: &Fraction) {
        *self = mul_impl(self, rhs);
    }
}

impl Sum for Fraction {
    fn sum<I: Iterator<Item = Fraction>>(iter: I) -> Self {
        iter.fold(Fraction::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Fraction> for Fraction {
    fn sum<I: Iterator<Item = &'a Fraction>>(iter: I) -> Self {
        iter.fold(Fraction::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(n: i64, d: i64) -> Fraction {
        Fraction::new(n, d)
    }

    #[test]
    fn lowest_terms_and_sign() {
        assert_eq!(f(2, 4), f(1, 2));
        assert_eq!(f(3, -6).to_string(), "-1/2");
        assert_eq!(f(0, -5), Fraction::zero());
        assert_eq!(f(8, 4).to_string(), "2");
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("7/8".parse::<Fraction>().unwrap(), f(7, 8));
        assert_eq!("-14/16".parse::<Fraction>().unwrap(), f(-7, 8));
        assert_eq!(" 1 ".parse::<Fraction>().unwrap(), Fraction::one());
        assert!("1/0".parse::<Fraction>().is_err());
        assert!("x".parse::<Fraction>().is_err());
        assert!("".parse::<Fraction>().is_err());
    }

    #[test]
    fn promotes_on_overflow_and_demotes_back() {
        let big = Fraction::from_integer(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq.0, Repr::Big(..)));
        let back = &sq / &big;
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small(..)));
        let tiny = Fraction::new(1, i64::MAX) * Fraction::new(1, i64::MAX);
        assert!(tiny.is_positive());
        assert_eq!(tiny * Fraction::from_integer(i64::MAX), Fraction::new(1, i64::MAX));
    }

    #[test]
    fn i64_min_is_not_small() {
        let m = Fraction::from_integer(i64::MIN);
        assert_eq!(m.to_string(), i64::MIN.to_string());
        assert_eq!(-(-&m), m);
    }

    #[test]
    fn approximate_recovers_small_denominators() {
        assert_eq!(Fraction::approximate(0.875, 1 << 20), Some(f(7, 8)));
        assert_eq!(Fraction::approximate(1.0 / 3.0 + 1e-13, 1 << 20), Some(f(1, 3)));
        assert_eq!(Fraction::approximate(-0.25, 16), Some(f(-1, 4)));
        assert_eq!(Fraction::approximate(f64::NAN, 16), None);
    }

    fn arb() -> impl Strategy<Value = Fraction> {
        prop_oneof![
            (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| Fraction::new(n, d)),
            (any::<i64>(), 1i64..i64::MAX).prop_map(|(n, d)| Fraction::new(n, d)),
        ]
    }

    fn to_big(x: &Fraction) -> (BigInt, BigInt) {
        x.big_parts()
    }

    proptest! {
        #[test]
        fn field_ops_match_bigint_reference(a in arb(), b in arb()) {
            let (an, ad) = to_big(&a);
            let (bn, bd) = to_big(&b);
            prop_assert_eq!(&a + &b, Fraction::from_big(&an * &bd + &bn * &ad, &ad * &bd));
            prop_assert_eq!(&a - &b, Fraction::from_big(&an * &bd - &bn * &ad, &ad * &bd));
            prop_assert_eq!(&a * &b, Fraction::from_big(&an * &bn, &ad * &bd));
            if !b.is_zero() {
                prop_assert_eq!(&a / &b, Fraction::from_big(&an * &bd, &ad * &bn));
            }
            prop_assert_eq!(a.cmp(&b), (&an * &bd).cmp(&(&bn * &ad)));
        }

        #[test]
        fn display_parse_roundtrip(a in arb()) {
            prop_assert_eq!(a.to_string().parse::<Fraction>().unwrap(), a);
        }
    }
}
