//! Seeded random matrix generation.
//!
//! Matrices are produced as exact rationals first, so both the
//! finite-precision engine and the exact oracle can consume the same input,
//! and every generated entry has a prescribed exact valuation by
//! construction: a power of p times a unit whose numerator and denominator
//! are coprime to p.

use crate::context::PadicContext;
use crate::error::Result;
use crate::matrix::PadicMatrix;
use crate::oracle::{self, RationalMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p^v` as an exact rational, for either sign of `v`.
pub fn rational_p_power(p: u64, v: i64) -> BigRational {
    let pk = BigInt::from(p).pow(v.unsigned_abs() as u32);
    if v >= 0 {
        BigRational::from_integer(pk)
    } else {
        BigRational::new(BigInt::one(), pk)
    }
}

/// A random p-adic unit: numerator and denominator both coprime to p.
pub fn random_unit_rational(rng: &mut ChaCha8Rng, p: u64) -> BigRational {
    let mut num = rng.random_range(1..=1_000_000u64);
    if num % p == 0 {
        num += 1;
    }
    let mut den = rng.random_range(1..=1000u64);
    if den % p == 0 {
        den += 1;
    }
    let sign = if rng.random_bool(0.5) { 1i64 } else { -1 };
    BigRational::new(BigInt::from(sign) * BigInt::from(num), BigInt::from(den))
}

/// A random rational with exact p-adic valuation `v`.
pub fn random_rational_with_valuation(rng: &mut ChaCha8Rng, p: u64, v: i64) -> BigRational {
    random_unit_rational(rng, p) * rational_p_power(p, v)
}

/// Random matrix with every entry in the unit ball (valuations 0..=4,
/// with a 15% chance of an exact zero), hence certifiably power-bounded.
pub fn random_contractive_rational(rng: &mut ChaCha8Rng, p: u64, dim: usize) -> RationalMatrix {
    let entries: Vec<BigRational> = (0..dim * dim)
        .map(|_| {
            if rng.random_bool(0.15) {
                BigRational::zero()
            } else {
                let v = rng.random_range(0..=4i64);
                random_rational_with_valuation(rng, p, v)
            }
        })
        .collect();
    RationalMatrix::from_fn(dim, |r, c| entries[r * dim + c].clone())
}

/// Random matrix that certifiably violates power-boundedness: exactly one
/// entry has negative valuation, so `|A| = p^(-v) > 1` exactly.
pub fn random_noncontractive_rational(rng: &mut ChaCha8Rng, p: u64, dim: usize) -> RationalMatrix {
    let mut entries: Vec<BigRational> = (0..dim * dim)
        .map(|_| {
            if rng.random_bool(0.15) {
                BigRational::zero()
            } else {
                let v = rng.random_range(0..=4i64);
                random_rational_with_valuation(rng, p, v)
            }
        })
        .collect();
    let hot = rng.random_range(0..dim * dim);
    let v = rng.random_range(-3..=-1i64);
    entries[hot] = random_rational_with_valuation(rng, p, v);
    RationalMatrix::from_fn(dim, |r, c| entries[r * dim + c].clone())
}

/// Contractive matrix rendered directly into a context.
pub fn random_contractive(
    ctx: &PadicContext,
    rng: &mut ChaCha8Rng,
    dim: usize,
) -> Result<PadicMatrix> {
    let rm = random_contractive_rational(rng, ctx.prime(), dim);
    oracle::to_padic(&rm, ctx)
}

/// Noncontractive matrix rendered directly into a context.
pub fn random_noncontractive(
    ctx: &PadicContext,
    rng: &mut ChaCha8Rng,
    dim: usize,
) -> Result<PadicMatrix> {
    let rm = random_noncontractive_rational(rng, ctx.prime(), dim);
    oracle::to_padic(&rm, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::rational_valuation;
    use crate::valuation::Val;

    #[test]
    fn generation_is_seed_deterministic() {
        let a = random_contractive_rational(&mut rng_from_seed(7), 5, 3);
        let b = random_contractive_rational(&mut rng_from_seed(7), 5, 3);
        let c = random_contractive_rational(&mut rng_from_seed(8), 5, 3);
        assert_eq!(a.entries(), b.entries());
        assert_ne!(a.entries(), c.entries());
    }

    #[test]
    fn prescribed_valuations_are_exact() {
        let mut rng = rng_from_seed(42);
        for p in [2u64, 3, 5, 7] {
            for v in -4..=4i64 {
                for _ in 0..20 {
                    let q = random_rational_with_valuation(&mut rng, p, v);
                    assert_eq!(rational_valuation(&q, p), Val::Finite(v));
                }
            }
        }
    }

    #[test]
    fn contractive_matrices_sit_in_the_unit_ball() {
        let mut rng = rng_from_seed(11);
        let ctx = PadicContext::new(5, 30).unwrap();
        for dim in 1..=4 {
            let m = random_contractive(&ctx, &mut rng, dim).unwrap();
            assert!(m.norm_valuation().unwrap() >= Val::Finite(0));
        }
    }

    #[test]
    fn noncontractive_matrices_leave_the_unit_ball() {
        let mut rng = rng_from_seed(13);
        let ctx = PadicContext::new(3, 30).unwrap();
        for dim in 1..=4 {
            let m = random_noncontractive(&ctx, &mut rng, dim).unwrap();
            match m.norm_valuation().unwrap() {
                Val::Finite(v) => assert!((-3..=-1).contains(&v), "norm valuation {v}"),
                Val::Infinity => panic!("unexpected zero matrix"),
            }
        }
    }
}
