//! Square matrices over Q_p with the sup-norm ultrametric operator norm.
//!
//! For the sup norm on Q_p^n the operator norm of a matrix is the maximum
//! entry norm, i.e. `p^(-v_min)` where `v_min` is the minimum entry
//! valuation. Norm statements therefore reduce to certified integer
//! comparisons of valuations.

use crate::context::PadicContext;
use crate::error::{Error, Result};
use crate::scalar::PadicScalar;
use crate::valuation::{Val, ValInterval};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct PadicMatrix {
    ctx: PadicContext,
    dim: usize,
    /// Row-major, length dim * dim.
    entries: Vec<PadicScalar>,
}

impl PadicMatrix {
    pub fn from_entries(
        ctx: &PadicContext,
        dim: usize,
        entries: Vec<PadicScalar>,
    ) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(entries.len(), dim * dim));
        }
        for e in &entries {
            ctx.check_same(e.context())?;
        }
        Ok(PadicMatrix {
            ctx: ctx.clone(),
            dim,
            entries,
        })
    }

    pub fn from_fn(
        ctx: &PadicContext,
        dim: usize,
        mut f: impl FnMut(usize, usize) -> PadicScalar,
    ) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        PadicMatrix {
            ctx: ctx.clone(),
            dim,
            entries,
        }
    }

    pub fn zero(ctx: &PadicContext, dim: usize) -> Self {
        Self::from_fn(ctx, dim, |_, _| PadicScalar::zero(ctx))
    }

    pub fn identity(ctx: &PadicContext, dim: usize) -> Self {
        Self::from_fn(ctx, dim, |r, c| {
            if r == c {
                PadicScalar::one(ctx)
            } else {
                PadicScalar::zero(ctx)
            }
        })
    }

    pub fn context(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &PadicScalar {
        &self.entries[r * self.dim + c]
    }

    pub fn entries(&self) -> &[PadicScalar] {
        &self.entries
    }

    fn check_compatible(&self, other: &PadicMatrix) -> Result<()> {
        self.ctx.check_same(&other.ctx)?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &PadicMatrix) -> Result<PadicMatrix> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(&self.ctx, self.dim, entries)
    }

    pub fn sub(&self, other: &PadicMatrix) -> Result<PadicMatrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PadicMatrix {
        PadicMatrix {
            ctx: self.ctx.clone(),
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.neg()).collect(),
        }
    }

    pub fn scalar_mul(&self, c: &PadicScalar) -> Result<PadicMatrix> {
        self.ctx.check_same(c.context())?;
        let entries = self
            .entries
            .iter()
            .map(|e| e.mul(c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(&self.ctx, self.dim, entries)
    }

    /// Multiply every entry by the exact scalar p^k.
    pub fn times_p_power(&self, k: i64) -> PadicMatrix {
        PadicMatrix {
            ctx: self.ctx.clone(),
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.times_p_power(k)).collect(),
        }
    }

    pub fn mul(&self, other: &PadicMatrix) -> Result<PadicMatrix> {
        self.check_compatible(other)?;
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = PadicScalar::zero(&self.ctx);
                for k in 0..n {
                    acc = acc.add(&self.get(r, k).mul(other.get(k, c))?)?;
                }
                entries.push(acc);
            }
        }
        Self::from_entries(&self.ctx, n, entries)
    }

    pub fn mul_vector(&self, v: &[PadicScalar]) -> Result<Vec<PadicScalar>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(v.len(), self.dim));
        }
        let mut out = Vec::with_capacity(self.dim);
        for r in 0..self.dim {
            let mut acc = PadicScalar::zero(&self.ctx);
            for k in 0..self.dim {
                acc = acc.add(&self.get(r, k).mul(&v[k])?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Power by repeated squaring; `pow(0)` is the identity.
    pub fn pow(&self, e: u64) -> Result<PadicMatrix> {
        let mut acc = Self::identity(&self.ctx, self.dim);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Certified bounds on the minimum entry valuation. The operator norm is
    /// `p^(-v)` for `v` in this interval; the zero matrix gives the exact
    /// interval at infinity.
    pub fn min_valuation_interval(&self) -> ValInterval {
        self.entries
            .iter()
            .map(|e| e.val_interval())
            .fold(ValInterval::exact(Val::Infinity), |acc, iv| {
                acc.min_with(iv)
            })
    }

    /// Exact valuation of the norm when certified: `Finite(v)` means
    /// `|A| = p^(-v)`, `Infinity` means the zero operator.
    pub fn norm_valuation(&self) -> Result<Val> {
        let iv = self.min_valuation_interval();
        if iv.is_exact() {
            Ok(iv.lo)
        } else {
            Err(Error::Undecidable(format!(
                "matrix norm valuation is only bounded to {iv}"
            )))
        }
    }

    /// Smallest certified absolute-error exponent over the entries.
    pub fn error_floor(&self) -> Val {
        self.entries
            .iter()
            .map(|e| e.abs_error_floor())
            .fold(Val::Infinity, |acc, f| acc.min(f))
    }

    pub fn min_certified_digits(&self) -> u32 {
        self.entries
            .iter()
            .map(|e| e.certified_digits())
            .fold(self.ctx.precision(), |acc, d| acc.min(d))
    }

    /// Entrywise equality to certified precision.
    pub fn agrees(&self, other: &PadicMatrix) -> Result<bool> {
        self.check_compatible(other)?;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if !a.agrees(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Sweep `m = 1..=max_power` and certify on each step whether
    /// `|A^m| <= 1`.
    ///
    /// The sweep is decision-complete for the contraction question: norm
    /// submultiplicativity means `|A| <= 1` already forces `|A^m| <= 1` for
    /// every m, so a true verdict at m = 1 extends to all powers and the
    /// remaining records are independent confirmations; a violation at any
    /// swept power refutes the condition outright.
    ///
    /// Errors with a precision error if some power's norm cannot be decided
    /// at the working precision.
    pub fn power_contraction_check(&self, max_power: u64) -> Result<PowerContractionReport> {
        let mut records = Vec::new();
        let mut worst_digits = self.ctx.precision();
        let mut power = Self::identity(&self.ctx, self.dim);
        let mut verdict = true;
        let mut violation_witness_m = None;
        for m in 1..=max_power {
            power = power.mul(self)?;
            worst_digits = worst_digits.min(power.min_certified_digits());
            let iv = power.min_valuation_interval();
            let within = if iv.lo >= Val::Finite(0) {
                Some(true)
            } else if iv.hi < Val::Finite(0) {
                Some(false)
            } else {
                None
            };
            let Some(within) = within else {
                return Err(Error::Undecidable(format!(
                    "norm of power m={m} is only bounded to {iv}"
                )));
            };
            records.push(PowerNormRecord {
                m,
                val_lo: iv.lo,
                val_hi: iv.hi,
                within_unit_ball: within,
            });
            if !within {
                verdict = false;
                violation_witness_m = Some(m);
                break;
            }
        }
        Ok(PowerContractionReport {
            records,
            verdict,
            violation_witness_m,
            worst_certified_digits: worst_digits,
            note: POWER_CHECK_NOTE.to_string(),
        })
    }
}

const POWER_CHECK_NOTE: &str = "operator norm is submultiplicative, so |A| <= 1 at m=1 already \
certifies |A^m| <= 1 for every m; swept powers are independent confirmations, and any violating \
power refutes the condition outright";

#[derive(Clone, Debug, Serialize)]
pub struct PowerNormRecord {
    pub m: u64,
    /// Lower bound on the minimum entry valuation of A^m.
    pub val_lo: Val,
    /// Upper bound on the minimum entry valuation of A^m.
    pub val_hi: Val,
    pub within_unit_ball: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerContractionReport {
    pub records: Vec<PowerNormRecord>,
    pub verdict: bool,
    pub violation_witness_m: Option<u64>,
    /// Worst certified digit count seen across swept powers.
    pub worst_certified_digits: u32,
    pub note: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn ctx() -> PadicContext {
        PadicContext::new(5, 8).unwrap()
    }

    fn int_matrix(ctx: &PadicContext, dim: usize, vals: &[(i64, i64)]) -> PadicMatrix {
        let entries = vals
            .iter()
            .map(|(n, d)| {
                PadicScalar::from_rational(ctx, &BigInt::from(*n), &BigInt::from(*d)).unwrap()
            })
            .collect();
        PadicMatrix::from_entries(ctx, dim, entries).unwrap()
    }

    #[test]
    fn unipotent_cube() {
        let ctx = ctx();
        let a = int_matrix(&ctx, 2, &[(1, 1), (1, 1), (0, 1), (1, 1)]);
        let a3 = a.pow(3).unwrap();
        let expected = int_matrix(&ctx, 2, &[(1, 1), (3, 1), (0, 1), (1, 1)]);
        assert!(a3.agrees(&expected).unwrap());
        // Entries are exact integers, so the agreement is exact.
        assert_eq!(a3.error_floor(), Val::Infinity);
    }

    #[test]
    fn norm_is_max_entry_norm() {
        let ctx = ctx();
        let a = int_matrix(&ctx, 2, &[(1, 5), (1, 1), (25, 1), (0, 1)]);
        assert_eq!(a.norm_valuation().unwrap(), Val::Finite(-1));
        let id = PadicMatrix::identity(&ctx, 3);
        assert_eq!(id.norm_valuation().unwrap(), Val::Finite(0));
        let z = PadicMatrix::zero(&ctx, 2);
        assert_eq!(z.norm_valuation().unwrap(), Val::Infinity);
    }

    #[test]
    fn power_contraction_verdicts() {
        let ctx = ctx();
        let a = int_matrix(&ctx, 2, &[(1, 1), (1, 1), (0, 1), (1, 1)]);
        let report = a.power_contraction_check(10).unwrap();
        assert!(report.verdict);
        assert_eq!(report.records.len(), 10);
        assert!(report.records.iter().all(|r| r.within_unit_ball));

        let b = int_matrix(&ctx, 2, &[(1, 5), (0, 1), (0, 1), (1, 1)]);
        let report = b.power_contraction_check(10).unwrap();
        assert!(!report.verdict);
        assert_eq!(report.violation_witness_m, Some(1));
    }

    #[test]
    fn dimension_mismatch() {
        let ctx = ctx();
        let a = PadicMatrix::identity(&ctx, 2);
        let b = PadicMatrix::identity(&ctx, 3);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch(2, 3))));
    }

    proptest! {
        // |AB| <= |A| |B|, with exact entries so the valuations are exact.
        #[test]
        fn norm_is_submultiplicative(
            a in proptest::collection::vec(-100i64..100, 9),
            b in proptest::collection::vec(-100i64..100, 9),
        ) {
            let ctx = PadicContext::new(3, 10).unwrap();
            let am = PadicMatrix::from_fn(&ctx, 3, |r, c| PadicScalar::from_integer(&ctx, a[3 * r + c]));
            let bm = PadicMatrix::from_fn(&ctx, 3, |r, c| PadicScalar::from_integer(&ctx, b[3 * r + c]));
            let prod = am.mul(&bm).unwrap();
            let va = am.norm_valuation().unwrap();
            let vb = bm.norm_valuation().unwrap();
            let vp = prod.norm_valuation().unwrap();
            prop_assert!(vp >= va.plus(vb));
        }

        // The sup operator norm is attained on a standard basis vector.
        #[test]
        fn norm_attained_on_basis_vector(
            a in proptest::collection::vec((-200i64..200, 1i64..60), 4),
        ) {
            let ctx = PadicContext::new(5, 10).unwrap();
            let am = PadicMatrix::from_fn(&ctx, 2, |r, c| {
                let (n, d) = a[2 * r + c];
                PadicScalar::from_rational(&ctx, &BigInt::from(n), &BigInt::from(d)).unwrap()
            });
            let norm_val = am.norm_valuation().unwrap();
            let mut best = Val::Infinity;
            for j in 0..2 {
                let e: Vec<_> = (0..2)
                    .map(|i| if i == j {
                        PadicScalar::one(&ctx)
                    } else {
                        PadicScalar::zero(&ctx)
                    })
                    .collect();
                let img = am.mul_vector(&e).unwrap();
                let v = img
                    .iter()
                    .map(|x| x.val_interval().lo)
                    .fold(Val::Infinity, |acc, v| acc.min(v));
                best = best.min(v);
            }
            prop_assert_eq!(best, norm_val);
        }
    }
}
