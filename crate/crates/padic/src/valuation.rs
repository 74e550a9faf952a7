//! Valuations as extended integers, certified valuation intervals, and the
//! combinatorial valuation formulas for factorials and binomial coefficients.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use std::fmt;
use std::ops::Add;

/// Rendering of an infinite valuation (the zero element) in reports.
pub const INF_VALUATION: &str = "inf_valuation";

/// A p-adic valuation: an integer, or +infinity for zero.
///
/// The derived `Ord` places every `Finite` below `Infinity` and orders finite
/// values as integers, which is exactly the valuation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Val {
    Finite(i64),
    Infinity,
}

impl Val {
    pub fn is_finite(self) -> bool {
        matches!(self, Val::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(v) => Some(v),
            Val::Infinity => None,
        }
    }

    /// Valuation of a product.
    pub fn plus(self, other: Val) -> Val {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Infinity,
        }
    }

    /// Norm exponent `e` with `|x| = p^e`, i.e. the negated valuation.
    pub fn norm_exponent(self) -> Option<i64> {
        self.finite().map(|v| -v)
    }
}

impl Add<i64> for Val {
    type Output = Val;
    fn add(self, rhs: i64) -> Val {
        match self {
            Val::Finite(v) => Val::Finite(v + rhs),
            Val::Infinity => Val::Infinity,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{v}"),
            Val::Infinity => write!(f, "{INF_VALUATION}"),
        }
    }
}

impl Serialize for Val {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Val::Finite(v) => s.serialize_i64(*v),
            Val::Infinity => s.serialize_str(INF_VALUATION),
        }
    }
}

/// Norm exponent `e` with `|X| = p^e`; `None` encodes minus infinity, the
/// zero operator. The infinite case renders with the report token, since a
/// norm exponent of minus infinity is an infinite valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormExponent(pub Option<i64>);

impl NormExponent {
    pub fn from_valuation(v: Val) -> Self {
        NormExponent(v.norm_exponent())
    }
}

impl PartialOrd for NormExponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormExponent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self.0, other.0) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(a), Some(b)) => a.cmp(&b),
        }
    }
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(e) => write!(f, "{e}"),
            None => write!(f, "{INF_VALUATION}"),
        }
    }
}

impl Serialize for NormExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(e) => s.serialize_i64(e),
            None => s.serialize_str(INF_VALUATION),
        }
    }
}

/// A certified two-sided bound `lo <= v(x) <= hi` on a valuation.
///
/// `lo` comes from inspecting computed digits, `hi` from exhibiting a digit
/// that is certified nonzero. An exact valuation has `lo == hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValInterval {
    pub lo: Val,
    pub hi: Val,
}

impl ValInterval {
    pub fn exact(v: Val) -> Self {
        ValInterval { lo: v, hi: v }
    }

    /// Only the lower bound `v(x) >= lo` is known.
    pub fn at_least(lo: Val) -> Self {
        ValInterval {
            lo,
            hi: Val::Infinity,
        }
    }

    pub fn is_exact(self) -> bool {
        self.lo == self.hi
    }

    /// Interval for `min(v(x), v(y))` given intervals for both, as used when
    /// folding entry valuations into a matrix norm.
    pub fn min_with(self, other: ValInterval) -> ValInterval {
        ValInterval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// Interval for `v(x * y)`.
    pub fn plus(self, other: ValInterval) -> ValInterval {
        ValInterval {
            lo: self.lo.plus(other.lo),
            hi: self.hi.plus(other.hi),
        }
    }

    pub fn shift(self, by: i64) -> ValInterval {
        ValInterval {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }
}

impl fmt::Display for ValInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// p-adic valuation of a positive big integer by repeated division.
pub fn big_valuation(n: &BigUint, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    if p == 2 {
        return Some(n.trailing_zeros().unwrap_or(0));
    }
    let p = BigUint::from(p);
    let mut v = 0u64;
    let mut cur = n.clone();
    loop {
        let (q, r) = cur.div_rem(&p);
        if r.is_zero() {
            v += 1;
            cur = q;
        } else {
            return Some(v);
        }
    }
}

/// Valuation of a signed machine integer.
pub fn int_valuation(n: i64, p: u64) -> Val {
    if n == 0 {
        return Val::Infinity;
    }
    let mut v = 0i64;
    let mut cur = (n as i128).unsigned_abs();
    let p = p as u128;
    while cur % p == 0 {
        v += 1;
        cur /= p;
    }
    Val::Finite(v)
}

/// Sum of base-p digits of `m`.
pub fn digit_sum(mut m: u64, p: u64) -> u64 {
    let mut s = 0;
    while m > 0 {
        s += m % p;
        m /= p;
    }
    s
}

/// v_p(m!) by Legendre's formula.
///
/// Both forms are evaluated and cross-asserted: the floor sum
/// `sum_i floor(m / p^i)` and the digit-sum form `(m - s_p(m)) / (p - 1)`.
pub fn legendre_factorial_valuation(m: u64, p: u64) -> u64 {
    let mut sum = 0u64;
    let mut q = m;
    while q > 0 {
        q /= p;
        sum += q;
    }
    let digit_form = (m - digit_sum(m, p)) / (p - 1);
    debug_assert_eq!(sum, digit_form, "Legendre forms disagree at m={m}, p={p}");
    sum
}

/// v_p(C(j, m)) by Kummer's theorem: the number of carries when adding
/// `m` and `j - m` in base p.
///
/// Errors when `m > j`.
pub fn kummer_binomial_valuation(j: u64, m: u64, p: u64) -> Result<u64> {
    if m > j {
        return Err(Error::BinomialIndex { j, m });
    }
    let mut a = m;
    let mut b = j - m;
    let mut carry = 0u64;
    let mut carries = 0u64;
    while a > 0 || b > 0 || carry > 0 {
        let t = a % p + b % p + carry;
        carry = if t >= p { 1 } else { 0 };
        carries += carry;
        a /= p;
        b /= p;
    }
    // Kummer and Legendre must agree: carries = (s(m) + s(j-m) - s(j)) / (p-1).
    debug_assert_eq!(
        carries,
        (digit_sum(m, p) + digit_sum(j - m, p) - digit_sum(j, p)) / (p - 1),
        "Kummer digit identity fails at j={j}, m={m}, p={p}"
    );
    Ok(carries)
}

/// m! as a big integer.
pub fn big_factorial(m: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=m {
        acc *= BigUint::from(i);
    }
    acc
}

/// C(j, m) as a big integer.
pub fn big_binomial(j: u64, m: u64) -> BigUint {
    if m > j {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(j), BigUint::from(m))
}
