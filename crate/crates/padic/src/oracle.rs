//! Exact rational reference path.
//!
//! Everything here works over arbitrary-precision rationals with no rounding
//! and no shared arithmetic with the finite-precision engine: resolvents are
//! obtained by Gauss-Jordan elimination and derivatives from the closed form
//! `R^(m) = m! (R A)^m R`, not from series summation. Agreement between the
//! two routes is therefore evidence, not bookkeeping.

use crate::context::PadicContext;
use crate::error::{Error, Result};
use crate::matrix::PadicMatrix;
use crate::scalar::PadicScalar;
use crate::series::SeriesResult;
use crate::valuation::{big_factorial, big_valuation, Val};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

/// Exact p-adic valuation of a rational.
pub fn rational_valuation(q: &BigRational, p: u64) -> Val {
    if q.is_zero() {
        return Val::Infinity;
    }
    let vn = big_valuation(q.numer().magnitude(), p).expect("nonzero") as i64;
    let vd = big_valuation(q.denom().magnitude(), p).expect("nonzero") as i64;
    Val::Finite(vn - vd)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    dim: usize,
    /// Row-major, length dim * dim.
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let dim = rows.len();
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(row.len(), dim));
            }
        }
        Ok(RationalMatrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        RationalMatrix { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| {
            if r == c {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| BigRational::zero())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.entries[r * self.dim + c]
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    fn check_dim(&self, other: &RationalMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        self.check_dim(other)?;
        Ok(RationalMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        self.check_dim(other)?;
        Ok(RationalMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn neg(&self) -> RationalMatrix {
        RationalMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| -a).collect(),
        }
    }

    pub fn scalar_mul(&self, c: &BigRational) -> RationalMatrix {
        RationalMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        self.check_dim(other)?;
        let n = self.dim;
        let out = Self::from_fn(n, |r, c| {
            let mut acc = BigRational::zero();
            for k in 0..n {
                acc += self.get(r, k) * other.get(k, c);
            }
            acc
        });
        Ok(out)
    }

    pub fn pow(&self, e: u64) -> RationalMatrix {
        let mut acc = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same dim");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same dim");
            }
        }
        acc
    }

    /// Exact minimum entry valuation; `Infinity` for the zero matrix. The
    /// ultrametric operator norm is `p` to the negation of this.
    pub fn min_valuation(&self, p: u64) -> Val {
        self.entries
            .iter()
            .map(|q| rational_valuation(q, p))
            .fold(Val::Infinity, |acc, v| acc.min(v))
    }
}

/// Exact inverse by Gauss-Jordan elimination. The pivot in each column is
/// the remaining entry of largest p-adic norm (smallest valuation), ties
/// resolved by lowest row index, which makes the elimination deterministic.
pub fn invert(m: &RationalMatrix, p: u64) -> Result<RationalMatrix> {
    let n = m.dim;
    let mut work = m.clone();
    let mut aug = RationalMatrix::identity(n);
    for col in 0..n {
        let mut pivot_row = None;
        let mut pivot_val = Val::Infinity;
        for r in col..n {
            let v = rational_valuation(work.get(r, col), p);
            if v < pivot_val {
                pivot_val = v;
                pivot_row = Some(r);
            }
        }
        let Some(pr) = pivot_row else {
            return Err(Error::SingularResolvent {
                mu: String::from("unknown"),
            });
        };
        if pr != col {
            for c in 0..n {
                work.entries.swap(col * n + c, pr * n + c);
                aug.entries.swap(col * n + c, pr * n + c);
            }
        }
        let pivot = work.get(col, col).clone();
        for c in 0..n {
            work.entries[col * n + c] /= pivot.clone();
            aug.entries[col * n + c] /= pivot.clone();
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work.get(r, col).clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..n {
                let w = work.get(col, c) * &factor;
                work.entries[r * n + c] -= w;
                let a = aug.get(col, c) * &factor;
                aug.entries[r * n + c] -= a;
            }
        }
    }
    Ok(aug)
}

/// Exact `R(mu, A) = (I - mu A)^{-1}`.
pub fn exact_resolvent(a: &RationalMatrix, mu: &BigRational, p: u64) -> Result<RationalMatrix> {
    let m = RationalMatrix::identity(a.dim).sub(&a.scalar_mul(mu))?;
    invert(&m, p).map_err(|e| match e {
        Error::SingularResolvent { .. } => Error::SingularResolvent { mu: mu.to_string() },
        other => other,
    })
}

/// Exact m-th derivative of `mu -> R(mu, A)` from the closed form
/// `R^(m) = m! (R A)^m R`, which follows inductively from
/// `dR/dmu = R A R`.
pub fn exact_resolvent_derivative(
    a: &RationalMatrix,
    mu: &BigRational,
    m: u64,
    p: u64,
) -> Result<RationalMatrix> {
    let r = exact_resolvent(a, mu, p)?;
    let ra = r.mul(a)?;
    let factorial = BigRational::from_integer(BigInt::from(big_factorial(m)));
    Ok(ra.pow(m).mul(&r)?.scalar_mul(&factorial))
}

/// Round a rational matrix into a p-adic context. Fails only on zero
/// denominators, which a `BigRational` cannot hold anyway.
pub fn to_padic(m: &RationalMatrix, ctx: &PadicContext) -> Result<PadicMatrix> {
    let mut entries = Vec::with_capacity(m.dim * m.dim);
    for q in &m.entries {
        entries.push(PadicScalar::from_rational(ctx, q.numer(), q.denom())?);
    }
    PadicMatrix::from_entries(ctx, m.dim, entries)
}

#[derive(Clone, Debug, Serialize)]
pub struct Crosscheck {
    /// Total error exponent the series evaluation claims for itself.
    pub claimed: Val,
    /// Certified lower bound on the valuation of (engine - oracle).
    pub observed: Val,
    pub pass: bool,
}

/// Compare a series evaluation against the exact value computed by an
/// independent route: the difference must be certifiably at least as small
/// as the claimed total error.
pub fn crosscheck(engine: &SeriesResult, exact: &RationalMatrix) -> Result<Crosscheck> {
    let ctx = engine.value.context();
    if exact.dim() != engine.value.dim() {
        return Err(Error::DimensionMismatch(engine.value.dim(), exact.dim()));
    }
    let rounded = to_padic(exact, ctx)?;
    let diff = engine.value.sub(&rounded)?;
    let claimed = engine.tail_bound_exponent;
    let observed = diff.min_valuation_interval().lo.min(diff.error_floor());
    Ok(Crosscheck {
        claimed,
        observed,
        pass: observed >= claimed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn mat(dim: usize, vals: &[(i64, i64)]) -> RationalMatrix {
        RationalMatrix::from_fn(dim, |r, c| {
            let (n, d) = vals[r * dim + c];
            q(n, d)
        })
    }

    #[test]
    fn invert_known_matrix() {
        // det = 1, inverse is the adjugate.
        let m = mat(2, &[(2, 1), (1, 1), (1, 1), (1, 1)]);
        let inv = invert(&m, 5).unwrap();
        let expected = mat(2, &[(1, 1), (-1, 1), (-1, 1), (2, 1)]);
        assert_eq!(inv, expected);
    }

    #[test]
    fn invert_rejects_singular() {
        let m = mat(2, &[(1, 1), (2, 1), (2, 1), (4, 1)]);
        assert!(matches!(
            invert(&m, 5),
            Err(Error::SingularResolvent { .. })
        ));
    }

    #[test]
    fn scalar_resolvent_frozen_value() {
        // A = [[1/5]], mu = 25: R = 1 / (1 - 5) = -1/4.
        let a = mat(1, &[(1, 5)]);
        let r = exact_resolvent(&a, &q(25, 1), 5).unwrap();
        assert_eq!(r.get(0, 0), &q(-1, 4));
        assert_eq!(rational_valuation(r.get(0, 0), 5), Val::Finite(0));
    }

    #[test]
    fn triangular_resolvent_frozen_value() {
        // A = [[1/5, 1], [0, 1/5]], mu = 25: I - mu A = [[-4, -25], [0, -4]],
        // inverse [[-1/4, 25/16], [0, -1/4]].
        let a = mat(2, &[(1, 5), (1, 1), (0, 1), (1, 5)]);
        let r = exact_resolvent(&a, &q(25, 1), 5).unwrap();
        let expected = mat(2, &[(-1, 4), (25, 16), (0, 1), (-1, 4)]);
        assert_eq!(r, expected);
    }

    #[test]
    fn resolvent_at_singular_mu() {
        // A = [[1/5]], mu = 5 makes I - mu A = 0.
        let a = mat(1, &[(1, 5)]);
        let err = exact_resolvent(&a, &q(5, 1), 5);
        match err {
            Err(Error::SingularResolvent { mu }) => assert_eq!(mu, "5"),
            other => panic!("expected singular resolvent, got {other:?}"),
        }
    }

    #[test]
    fn derivative_frozen_values() {
        // Scalar case: R(mu) = (1 - mu/5)^{-1}, R'(25) = 1/80, R''(25) = -1/800.
        let a = mat(1, &[(1, 5)]);
        let d1 = exact_resolvent_derivative(&a, &q(25, 1), 1, 5).unwrap();
        assert_eq!(d1.get(0, 0), &q(1, 80));
        let d2 = exact_resolvent_derivative(&a, &q(25, 1), 2, 5).unwrap();
        assert_eq!(d2.get(0, 0), &q(-1, 800));
        let d0 = exact_resolvent_derivative(&a, &q(25, 1), 0, 5).unwrap();
        assert_eq!(d0.get(0, 0), &q(-1, 4));
    }

    #[test]
    fn resolvent_identity_exact() {
        // R(mu + h) - R(mu) = h R(mu + h) A R(mu), exactly.
        let a = mat(2, &[(3, 1), (1, 2), (5, 1), (7, 3)]);
        let mu = q(25, 1);
        for h in [q(125, 1), q(625, 1), q(1, 7)] {
            let r1 = exact_resolvent(&a, &(&mu + &h), 5).unwrap();
            let r0 = exact_resolvent(&a, &mu, 5).unwrap();
            let lhs = r1.sub(&r0).unwrap();
            let rhs = r1.mul(&a).unwrap().mul(&r0).unwrap().scalar_mul(&h);
            assert_eq!(lhs, rhs);
        }
    }

    proptest! {
        #[test]
        fn inverse_round_trips(
            vals in proptest::collection::vec((-30i64..30, 1i64..20), 9),
        ) {
            let m = RationalMatrix::from_fn(3, |r, c| {
                let (n, d) = vals[r * 3 + c];
                q(n, d)
            });
            if let Ok(inv) = invert(&m, 3) {
                prop_assert_eq!(m.mul(&inv).unwrap(), RationalMatrix::identity(3));
                prop_assert_eq!(inv.mul(&m).unwrap(), RationalMatrix::identity(3));
            }
        }

        // First derivative is consistent with exact difference quotients:
        // [R(mu + h) - R(mu)] / h = R(mu + h) A R(mu) -> R A R as h -> 0,
        // with the p-adic distance shrinking like |h|.
        #[test]
        fn derivative_is_limit_of_difference_quotients(
            vals in proptest::collection::vec(-6i64..6, 4),
            hexp in 3u32..8,
        ) {
            let p = 5u64;
            let a = RationalMatrix::from_fn(2, |r, c| {
                BigRational::from_integer(BigInt::from(vals[r * 2 + c]))
            });
            let mu = q(5, 1);
            let d1 = match exact_resolvent_derivative(&a, &mu, 1, p) {
                Ok(d) => d,
                Err(_) => return Ok(()),  // resolvent singular at this mu
            };
            let h = BigRational::from_integer(BigInt::from(5i64.pow(hexp)));
            let Ok(r1) = exact_resolvent(&a, &(&mu + &h), p) else { return Ok(()) };
            let r0 = exact_resolvent(&a, &mu, p).unwrap();
            let quotient = r1.sub(&r0).unwrap().scalar_mul(&h.recip());
            let diff = quotient.sub(&d1).unwrap();
            // The gap valuation grows at least linearly in v(h).
            let gap = diff.min_valuation(p);
            prop_assert!(gap >= Val::Finite(hexp as i64 - 3),
                "gap {gap:?} too small for h = 5^{hexp}");
        }
    }
}
