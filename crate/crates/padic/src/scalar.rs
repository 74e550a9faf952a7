//! Finite-precision elements of Q_p with certified-digit tracking.
//!
//! A scalar is one of three things:
//!
//! * exactly zero,
//! * certifiably small: nothing is known except `|x| <= p^(-floor)`, the
//!   state a full cancellation leaves behind,
//! * a unit form `p^val * unit` whose leading `digits` base-p digits are
//!   certified, so in particular its valuation is exact.
//!
//! Unit forms additionally carry, when cheap, the exact signed integer they
//! denote; this keeps integer inputs exact through ring operations and lets
//! cancellations of exact values collapse to the true zero instead of a
//! residual `O(p^k)` bound.

use crate::context::PadicContext;
use crate::error::{Error, Result};
use crate::valuation::{big_valuation, Val, ValInterval};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Clone, Debug)]
pub struct PadicScalar {
    ctx: PadicContext,
    form: Form,
}

#[derive(Clone, Debug)]
enum Form {
    /// Exactly zero.
    Zero,
    /// Only `|x| <= p^(-floor)` is certified.
    Small { floor: i64 },
    /// `x = p^val * unit + error`, `unit` in `[1, p^N)` coprime to p,
    /// `|error| <= p^(-(val + digits))`, `1 <= digits <= N`.
    /// When `exact` is `Some(u)`, `x` equals `p^val * u` with no error and
    /// `unit = u mod p^N`.
    Unit {
        val: i64,
        unit: BigUint,
        digits: u32,
        exact: Option<BigInt>,
    },
}

impl PadicScalar {
    pub fn zero(ctx: &PadicContext) -> Self {
        PadicScalar {
            ctx: ctx.clone(),
            form: Form::Zero,
        }
    }

    pub fn one(ctx: &PadicContext) -> Self {
        Self::p_power(ctx, 0)
    }

    /// The exact scalar p^k.
    pub fn p_power(ctx: &PadicContext, k: i64) -> Self {
        PadicScalar {
            ctx: ctx.clone(),
            form: Form::Unit {
                val: k,
                unit: BigUint::one(),
                digits: ctx.precision(),
                exact: Some(BigInt::one()),
            },
        }
    }

    pub fn from_integer(ctx: &PadicContext, n: i64) -> Self {
        Self::from_exact_scaled(ctx, 0, &BigInt::from(n))
    }

    /// Round `num / den` into the context at full working precision.
    pub fn from_rational(ctx: &PadicContext, num: &BigInt, den: &BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero(ctx));
        }
        let p = ctx.prime();
        let vn = big_valuation(num.magnitude(), p).expect("nonzero") as i64;
        let vd = big_valuation(den.magnitude(), p).expect("nonzero") as i64;
        let strip = |x: &BigInt, v: i64| -> BigInt {
            x / BigInt::from(BigUint::from(p).pow(u32::try_from(v).expect("valuation fits u32")))
        };
        let nu = strip(num, vn);
        let du = strip(den, vd);
        let val = vn - vd;
        if (&nu % &du).is_zero() {
            return Ok(Self::from_exact_scaled(ctx, val, &(nu / du)));
        }
        let modulus = BigInt::from(ctx.modulus().clone());
        let nu_res = nu.mod_floor(&modulus).magnitude().clone();
        let du_res = du.mod_floor(&modulus).magnitude().clone();
        let inv = du_res
            .modinv(ctx.modulus())
            .expect("denominator unit is coprime to p^N");
        let unit = (nu_res * inv) % ctx.modulus();
        Ok(PadicScalar {
            ctx: ctx.clone(),
            form: Form::Unit {
                val,
                unit,
                digits: ctx.precision(),
                exact: None,
            },
        })
    }

    /// The exact value `p^base * n`.
    fn from_exact_scaled(ctx: &PadicContext, base: i64, n: &BigInt) -> Self {
        if n.is_zero() {
            return Self::zero(ctx);
        }
        let p = ctx.prime();
        let w = big_valuation(n.magnitude(), p).expect("nonzero");
        let shifted: BigInt =
            n / BigInt::from(BigUint::from(p).pow(u32::try_from(w).expect("valuation fits u32")));
        let val = base + w as i64;
        let modulus = BigInt::from(ctx.modulus().clone());
        let unit = shifted.mod_floor(&modulus).magnitude().clone();
        debug_assert!(!unit.is_zero());
        let exact = if shifted.magnitude().bits() <= ctx.exact_carrier_bit_cap() {
            Some(shifted)
        } else {
            None
        };
        PadicScalar {
            ctx: ctx.clone(),
            form: Form::Unit {
                val,
                unit,
                digits: ctx.precision(),
                exact,
            },
        }
    }

    /// Canonicalize a computed residue: `x = p^base * residue + error` with
    /// `residue < p^N` and `|error| <= p^(-floor)`.
    fn normalize(ctx: &PadicContext, base: i64, residue: BigUint, floor: Val) -> Self {
        let n = ctx.precision();
        if residue.is_zero() {
            return match floor {
                Val::Infinity => Self::zero(ctx),
                Val::Finite(f) => PadicScalar {
                    ctx: ctx.clone(),
                    form: Form::Small { floor: f },
                },
            };
        }
        let p = ctx.prime();
        let w = big_valuation(&residue, p).expect("nonzero");
        debug_assert!(w < n as u64, "residue must be reduced mod p^N");
        let unit = residue / BigUint::from(p).pow(w as u32);
        let val = base + w as i64;
        match floor {
            // No error at all: the residue is the whole value.
            Val::Infinity => Self::from_exact_scaled(ctx, val, &BigInt::from(unit)),
            Val::Finite(f) => {
                if f <= val {
                    // The certified error can swamp the leading digit.
                    PadicScalar {
                        ctx: ctx.clone(),
                        form: Form::Small { floor: f },
                    }
                } else {
                    let digits = u32::try_from((f - val).min((n as u64 - w) as i64))
                        .expect("digit count fits u32");
                    PadicScalar {
                        ctx: ctx.clone(),
                        form: Form::Unit {
                            val,
                            unit,
                            digits,
                            exact: None,
                        },
                    }
                }
            }
        }
    }

    pub fn context(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn is_exactly_zero(&self) -> bool {
        matches!(self.form, Form::Zero)
    }

    /// True when the leading digit is certified, so the valuation is exact
    /// and the value is provably nonzero.
    pub fn is_certainly_nonzero(&self) -> bool {
        matches!(self.form, Form::Unit { .. })
    }

    pub fn certified_digits(&self) -> u32 {
        match &self.form {
            Form::Zero => self.ctx.precision(),
            Form::Small { .. } => 0,
            Form::Unit { digits, .. } => *digits,
        }
    }

    /// Certified exponent `a` with `|x_true - x_repr| <= p^(-a)`.
    pub fn abs_error_floor(&self) -> Val {
        match &self.form {
            Form::Zero => Val::Infinity,
            Form::Small { floor } => Val::Finite(*floor),
            Form::Unit {
                exact: Some(_), ..
            } => Val::Infinity,
            Form::Unit { val, digits, .. } => Val::Finite(val + *digits as i64),
        }
    }

    /// Certified bounds on the valuation of the true value.
    pub fn val_interval(&self) -> ValInterval {
        match &self.form {
            Form::Zero => ValInterval::exact(Val::Infinity),
            Form::Small { floor } => ValInterval::at_least(Val::Finite(*floor)),
            Form::Unit { val, .. } => ValInterval::exact(Val::Finite(*val)),
        }
    }

    /// Exact valuation when certified: `Finite(v)` for unit forms,
    /// `Infinity` for the true zero, `None` when only a bound is known.
    pub fn exact_valuation(&self) -> Option<Val> {
        match &self.form {
            Form::Zero => Some(Val::Infinity),
            Form::Small { .. } => None,
            Form::Unit { val, .. } => Some(Val::Finite(*val)),
        }
    }

    /// Lower bound on the valuation (upper bound on the norm).
    pub fn valuation_lower_bound(&self) -> Val {
        self.val_interval().lo
    }

    /// The canonical residue, for inspection.
    pub fn unit_residue(&self) -> Option<&BigUint> {
        match &self.form {
            Form::Unit { unit, .. } => Some(unit),
            _ => None,
        }
    }

    pub fn neg(&self) -> Self {
        let form = match &self.form {
            Form::Zero => Form::Zero,
            Form::Small { floor } => Form::Small { floor: *floor },
            Form::Unit {
                val,
                unit,
                digits,
                exact,
            } => Form::Unit {
                val: *val,
                unit: self.ctx.modulus() - unit,
                digits: *digits,
                exact: exact.as_ref().map(|e| -e),
            },
        };
        PadicScalar {
            ctx: self.ctx.clone(),
            form,
        }
    }

    /// Multiply by the exact scalar p^k; exact in every form.
    pub fn times_p_power(&self, k: i64) -> Self {
        let form = match &self.form {
            Form::Zero => Form::Zero,
            Form::Small { floor } => Form::Small { floor: floor + k },
            Form::Unit {
                val,
                unit,
                digits,
                exact,
            } => Form::Unit {
                val: val + k,
                unit: unit.clone(),
                digits: *digits,
                exact: exact.clone(),
            },
        };
        PadicScalar {
            ctx: self.ctx.clone(),
            form,
        }
    }

    pub fn add(&self, other: &PadicScalar) -> Result<PadicScalar> {
        self.ctx.check_same(&other.ctx)?;
        use Form::*;
        let out = match (&self.form, &other.form) {
            (Zero, _) => other.clone(),
            (_, Zero) => self.clone(),
            (Small { floor: a }, Small { floor: b }) => PadicScalar {
                ctx: self.ctx.clone(),
                form: Small {
                    floor: *a.min(b),
                },
            },
            (Small { floor }, Unit { .. }) => other.add_small(*floor),
            (Unit { .. }, Small { floor }) => self.add_small(*floor),
            (Unit { .. }, Unit { .. }) => self.add_units(other),
        };
        Ok(out)
    }

    pub fn sub(&self, other: &PadicScalar) -> Result<PadicScalar> {
        self.add(&other.neg())
    }

    /// Add an unknown error term bounded by `p^(-floor)` to a unit form.
    fn add_small(&self, floor: i64) -> PadicScalar {
        let Form::Unit {
            val, unit, digits, ..
        } = &self.form
        else {
            unreachable!("add_small is only called on unit forms")
        };
        if floor <= *val {
            return PadicScalar {
                ctx: self.ctx.clone(),
                form: Form::Small { floor },
            };
        }
        let digits = (*digits).min(u32::try_from(floor - val).unwrap_or(u32::MAX));
        PadicScalar {
            ctx: self.ctx.clone(),
            form: Form::Unit {
                val: *val,
                unit: unit.clone(),
                digits,
                exact: None,
            },
        }
    }

    fn add_units(&self, other: &PadicScalar) -> PadicScalar {
        let (x, y) = match (&self.form, &other.form) {
            (Form::Unit { val: vx, .. }, Form::Unit { val: vy, .. }) => {
                if vx <= vy {
                    (self, other)
                } else {
                    (other, self)
                }
            }
            _ => unreachable!("add_units is only called on unit forms"),
        };
        let (Form::Unit {
            val: vx,
            unit: ux,
            exact: ex,
            ..
        }, Form::Unit {
            val: vy,
            unit: uy,
            exact: ey,
            ..
        }) = (&x.form, &y.form)
        else {
            unreachable!()
        };
        let ctx = &self.ctx;
        let n = ctx.precision() as u64;
        let p = ctx.prime();
        let dv = (vy - vx) as u64;

        if let (Some(ex), Some(ey)) = (ex, ey) {
            if dv <= ctx.exact_carrier_bit_cap() {
                let shift = BigInt::from(BigUint::from(p).pow(dv as u32));
                let sum = ex + ey * shift;
                return Self::from_exact_scaled(ctx, *vx, &sum);
            }
        }

        let shifted = if dv >= n {
            BigUint::zero()
        } else {
            (uy * BigUint::from(p).pow(dv as u32)) % ctx.modulus()
        };
        let residue = (ux + shifted) % ctx.modulus();
        let floor = x
            .abs_error_floor()
            .min(y.abs_error_floor())
            .min(Val::Finite(vx + n as i64));
        Self::normalize(ctx, *vx, residue, floor)
    }

    pub fn mul(&self, other: &PadicScalar) -> Result<PadicScalar> {
        self.ctx.check_same(&other.ctx)?;
        use Form::*;
        let ctx = &self.ctx;
        let out = match (&self.form, &other.form) {
            (Zero, _) | (_, Zero) => Self::zero(ctx),
            (Small { floor: a }, Small { floor: b }) => PadicScalar {
                ctx: ctx.clone(),
                form: Small { floor: a + b },
            },
            (Small { floor }, Unit { val, .. }) | (Unit { val, .. }, Small { floor }) => {
                PadicScalar {
                    ctx: ctx.clone(),
                    form: Small { floor: floor + val },
                }
            }
            (
                Unit {
                    val: vx,
                    unit: ux,
                    digits: dx,
                    exact: ex,
                },
                Unit {
                    val: vy,
                    unit: uy,
                    digits: dy,
                    exact: ey,
                },
            ) => {
                if let (Some(ex), Some(ey)) = (ex, ey) {
                    Self::from_exact_scaled(ctx, vx + vy, &(ex * ey))
                } else {
                    PadicScalar {
                        ctx: ctx.clone(),
                        form: Unit {
                            val: vx + vy,
                            unit: (ux * uy) % ctx.modulus(),
                            digits: *dx.min(dy),
                            exact: None,
                        },
                    }
                }
            }
        };
        Ok(out)
    }

    pub fn div(&self, other: &PadicScalar) -> Result<PadicScalar> {
        self.ctx.check_same(&other.ctx)?;
        let ctx = &self.ctx;
        let (vy, uy, dy, ey) = match &other.form {
            Form::Zero => return Err(Error::DivisionByZero),
            Form::Small { .. } => return Err(Error::UncertifiedDivisor),
            Form::Unit {
                val,
                unit,
                digits,
                exact,
            } => (*val, unit, *digits, exact),
        };
        // Division by an exact +-p^k is a valuation shift.
        if let Some(ey) = ey {
            if ey.magnitude().is_one() {
                let shifted = self.times_p_power(-vy);
                return Ok(if ey.is_negative() {
                    shifted.neg()
                } else {
                    shifted
                });
            }
        }
        let out = match &self.form {
            Form::Zero => Self::zero(ctx),
            Form::Small { floor } => PadicScalar {
                ctx: ctx.clone(),
                form: Form::Small { floor: floor - vy },
            },
            Form::Unit {
                val: vx,
                unit: ux,
                digits: dx,
                exact: ex,
            } => {
                if let (Some(ex), Some(ey)) = (ex, ey) {
                    if (ex % ey).is_zero() {
                        return Ok(Self::from_exact_scaled(ctx, vx - vy, &(ex / ey)));
                    }
                }
                let inv = uy
                    .modinv(ctx.modulus())
                    .expect("unit is coprime to p^N");
                PadicScalar {
                    ctx: ctx.clone(),
                    form: Form::Unit {
                        val: vx - vy,
                        unit: (ux * inv) % ctx.modulus(),
                        digits: (*dx).min(dy),
                        exact: None,
                    },
                }
            }
        };
        Ok(out)
    }

    pub fn inv(&self) -> Result<PadicScalar> {
        Self::one(&self.ctx).div(self)
    }

    pub fn pow(&self, e: u64) -> PadicScalar {
        let mut acc = Self::one(&self.ctx);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same context");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same context");
            }
        }
        acc
    }

    /// Equality to certified precision: true unless the difference is
    /// certifiably nonzero. Never a bitwise comparison.
    pub fn agrees(&self, other: &PadicScalar) -> Result<bool> {
        Ok(!self.sub(other)?.is_certainly_nonzero())
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.ctx.prime();
        match &self.form {
            Form::Zero => write!(f, "0"),
            Form::Small { floor } => write!(f, "O({p}^{floor})"),
            Form::Unit {
                val, unit, digits, ..
            } => write!(f, "{p}^{val} * {unit} ({digits} digits)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn ctx5() -> PadicContext {
        PadicContext::new(5, 6).unwrap()
    }

    fn rat(ctx: &PadicContext, num: i64, den: i64) -> PadicScalar {
        PadicScalar::from_rational(ctx, &BigInt::from(num), &BigInt::from(den)).unwrap()
    }

    fn rational_val(q: &BigRational, p: u64) -> Val {
        if q.numer().is_zero() {
            return Val::Infinity;
        }
        let vn = big_valuation(q.numer().magnitude(), p).unwrap() as i64;
        let vd = big_valuation(q.denom().magnitude(), p).unwrap() as i64;
        Val::Finite(vn - vd)
    }

    #[test]
    fn from_rational_frozen_values() {
        let ctx = ctx5();
        // 7/4 is a unit: 4 * 3908 = 15632 = 7 mod 5^6.
        let x = rat(&ctx, 7, 4);
        assert_eq!(x.exact_valuation(), Some(Val::Finite(0)));
        assert_eq!(x.certified_digits(), 6);
        assert_eq!(x.unit_residue().unwrap().to_u64().unwrap(), 3908);

        assert_eq!(rat(&ctx, 5, 1).exact_valuation(), Some(Val::Finite(1)));
        assert_eq!(rat(&ctx, 1, 25).exact_valuation(), Some(Val::Finite(-2)));
        assert_eq!(rat(&ctx, -50, 10).exact_valuation(), Some(Val::Finite(1)));
        assert!(rat(&ctx, 0, 3).is_exactly_zero());
        assert!(matches!(
            PadicScalar::from_rational(&ctx, &BigInt::from(1), &BigInt::from(0)),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn exact_additive_inverse_cancels_to_true_zero() {
        let ctx = ctx5();
        let five = rat(&ctx, 5, 1);
        let sum = five.add(&five.neg()).unwrap();
        assert!(sum.is_exactly_zero());
        assert_eq!(sum.abs_error_floor(), Val::Infinity);
    }

    #[test]
    fn inexact_cancellation_leaves_certified_small() {
        let ctx = ctx5();
        // 1/3 has an infinite expansion, so the cancellation is only
        // certified down to the working precision.
        let x = rat(&ctx, 1, 3);
        let sum = x.add(&x.neg()).unwrap();
        assert!(!sum.is_exactly_zero());
        assert!(!sum.is_certainly_nonzero());
        assert_eq!(sum.abs_error_floor(), Val::Finite(6));
        assert_eq!(sum.certified_digits(), 0);
        assert!(sum.agrees(&PadicScalar::zero(&ctx)).unwrap());
        assert_eq!(sum.to_string(), "O(5^6)");
    }

    #[test]
    fn isoceles_addition_at_distinct_valuations() {
        let ctx = ctx5();
        // v(5) = 1, v(7/4) = 0: the sum has the smaller valuation exactly.
        let sum = rat(&ctx, 5, 1).add(&rat(&ctx, 7, 4)).unwrap();
        assert_eq!(sum.exact_valuation(), Some(Val::Finite(0)));
    }

    #[test]
    fn multiplication_adds_valuations() {
        let ctx = ctx5();
        let prod = rat(&ctx, 5, 1).mul(&rat(&ctx, 1, 25)).unwrap();
        assert_eq!(prod.exact_valuation(), Some(Val::Finite(-1)));
        let q = rat(&ctx, 1, 5).div(&rat(&ctx, 5, 1)).unwrap();
        assert_eq!(q.exact_valuation(), Some(Val::Finite(-2)));
    }

    #[test]
    fn division_guards() {
        let ctx = ctx5();
        let x = rat(&ctx, 1, 3);
        let uncertified = x.sub(&x).unwrap();
        assert!(matches!(
            rat(&ctx, 1, 1).div(&uncertified),
            Err(Error::UncertifiedDivisor)
        ));
        assert!(matches!(
            rat(&ctx, 1, 1).div(&PadicScalar::zero(&ctx)),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn division_by_exact_power_preserves_digits() {
        let ctx = ctx5();
        let x = rat(&ctx, 1, 3);
        let y = x.div(&rat(&ctx, -25, 1)).unwrap();
        assert_eq!(y.exact_valuation(), Some(Val::Finite(-2)));
        assert_eq!(y.certified_digits(), 6);
        // Round trip.
        let back = y.mul(&rat(&ctx, -25, 1)).unwrap();
        assert!(back.agrees(&x).unwrap());
    }

    #[test]
    fn display_diagnostic_form() {
        let ctx = ctx5();
        assert_eq!(PadicScalar::zero(&ctx).to_string(), "0");
        assert_eq!(rat(&ctx, 7, 4).to_string(), "5^0 * 3908 (6 digits)");
        assert_eq!(rat(&ctx, 1, 25).to_string(), "5^-2 * 1 (6 digits)");
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let ctx = ctx5();
        let x = rat(&ctx, 7, 4);
        let mut acc = PadicScalar::one(&ctx);
        for e in 0..8u64 {
            assert!(x.pow(e).agrees(&acc).unwrap(), "e={e}");
            acc = acc.mul(&x).unwrap();
        }
    }

    #[test]
    fn context_mismatch_is_rejected() {
        let a = PadicScalar::one(&PadicContext::new(5, 6).unwrap());
        let b = PadicScalar::one(&PadicContext::new(7, 6).unwrap());
        assert!(matches!(a.add(&b), Err(Error::ContextMismatch { .. })));
    }

    proptest! {
        // Certified valuations must match the exact rational arithmetic.
        #[test]
        fn valuations_track_exact_rationals(
            an in -200i64..200, ad in 1i64..200,
            bn in -200i64..200, bd in 1i64..200,
            p in prop::sample::select(vec![2u64, 3, 5, 7]),
        ) {
            let ctx = PadicContext::new(p, 12).unwrap();
            let qa = BigRational::new(BigInt::from(an), BigInt::from(ad));
            let qb = BigRational::new(BigInt::from(bn), BigInt::from(bd));
            let xa = PadicScalar::from_rational(&ctx, &BigInt::from(an), &BigInt::from(ad)).unwrap();
            let xb = PadicScalar::from_rational(&ctx, &BigInt::from(bn), &BigInt::from(bd)).unwrap();

            let prod = xa.mul(&xb).unwrap();
            let true_prod = rational_val(&(&qa * &qb), p);
            if prod.is_certainly_nonzero() {
                prop_assert_eq!(prod.exact_valuation().unwrap(), true_prod);
            }

            let sum = xa.add(&xb).unwrap();
            let true_sum = rational_val(&(&qa + &qb), p);
            let iv = sum.val_interval();
            prop_assert!(iv.lo <= true_sum && true_sum <= iv.hi,
                "sum interval {} does not contain {}", iv, true_sum);
            // Ultrametric inequality with equality at distinct valuations.
            let va = rational_val(&qa, p);
            let vb = rational_val(&qb, p);
            prop_assert!(true_sum >= va.min(vb));
            if va != vb {
                prop_assert_eq!(true_sum, va.min(vb));
            }
        }

        #[test]
        fn division_round_trips(
            an in -200i64..200, ad in 1i64..200,
            bn in prop::sample::select(vec![-150i64, -7, -2, 1, 3, 9, 50, 125]),
            bd in 1i64..200,
        ) {
            let ctx = PadicContext::new(5, 12).unwrap();
            let xa = PadicScalar::from_rational(&ctx, &BigInt::from(an), &BigInt::from(ad)).unwrap();
            let xb = PadicScalar::from_rational(&ctx, &BigInt::from(bn), &BigInt::from(bd)).unwrap();
            let q = xa.div(&xb).unwrap();
            prop_assert!(q.mul(&xb).unwrap().agrees(&xa).unwrap());
        }
    }
}
