//! Shared computation context: the prime and the working precision.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use std::fmt;
use std::sync::Arc;

/// Immutable context shared by every scalar and matrix in a computation:
/// the prime `p` and the working precision `N` (significant base-p digits).
///
/// Cloning is cheap; equality is by `(prime, precision)`.
#[derive(Clone)]
pub struct PadicContext {
    inner: Arc<Inner>,
}

struct Inner {
    prime: u64,
    precision: u32,
    /// p^N, precomputed once.
    modulus: BigUint,
}

impl PadicContext {
    /// Errors if `prime` fails a deterministic primality check or
    /// `precision` is zero.
    pub fn new(prime: u64, precision: u32) -> Result<Self> {
        if !is_prime_u64(prime) {
            return Err(Error::NotPrime(prime));
        }
        if precision == 0 {
            return Err(Error::InvalidPrecision);
        }
        let modulus = BigUint::from(prime).pow(precision);
        Ok(PadicContext {
            inner: Arc::new(Inner {
                prime,
                precision,
                modulus,
            }),
        })
    }

    pub fn prime(&self) -> u64 {
        self.inner.prime
    }

    pub fn precision(&self) -> u32 {
        self.inner.precision
    }

    /// p^N.
    pub fn modulus(&self) -> &BigUint {
        &self.inner.modulus
    }

    /// Bit budget above which exact integer carriers are dropped in favor of
    /// plain residues; keeps exact tracking from inflating costs.
    pub(crate) fn exact_carrier_bit_cap(&self) -> u64 {
        self.inner.modulus.bits() + 64
    }

    pub(crate) fn check_same(&self, other: &PadicContext) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                lhs_p: self.prime(),
                lhs_n: self.precision(),
                rhs_p: other.prime(),
                rhs_n: other.precision(),
            })
        }
    }
}

impl PartialEq for PadicContext {
    fn eq(&self, other: &Self) -> bool {
        self.inner.prime == other.inner.prime && self.inner.precision == other.inner.precision
    }
}

impl Eq for PadicContext {}

impl fmt::Debug for PadicContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PadicContext(p={}, N={})", self.prime(), self.precision())
    }
}

impl fmt::Display for PadicContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q_{} at {} digits", self.prime(), self.precision())
    }
}

/// Deterministic Miller-Rabin for u64. The witness set {2, 3, ..., 37} is
/// sufficient for all 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn primality_check() {
        let primes = [2u64, 3, 5, 7, 11, 13, 97, 101, 7919, 2147483647];
        for p in primes {
            assert!(is_prime_u64(p), "{p} should be prime");
        }
        let composites = [0u64, 1, 4, 6, 9, 15, 91, 561, 4294967295, 2147483649];
        for c in composites {
            assert!(!is_prime_u64(c), "{c} should be composite");
        }
        // Exhaustive against trial division on a small range.
        for n in 0..2000u64 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime_u64(n), trial, "n={n}");
        }
    }

    #[test]
    fn context_construction() {
        let ctx = PadicContext::new(5, 4).unwrap();
        assert_eq!(ctx.prime(), 5);
        assert_eq!(ctx.precision(), 4);
        assert_eq!(ctx.modulus().to_u64().unwrap(), 625);
        assert!(matches!(PadicContext::new(6, 4), Err(Error::NotPrime(6))));
        assert!(matches!(
            PadicContext::new(5, 0),
            Err(Error::InvalidPrecision)
        ));
    }

    #[test]
    fn context_equality_is_by_parameters() {
        let a = PadicContext::new(5, 40).unwrap();
        let b = PadicContext::new(5, 40).unwrap();
        let c = PadicContext::new(5, 41).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.check_same(&b).is_ok());
        assert!(matches!(
            a.check_same(&c),
            Err(Error::ContextMismatch { .. })
        ));
    }
}
