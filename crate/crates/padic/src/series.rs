//! Certified Neumann-series evaluation of the resolvent
//! `R(mu, A) = (I - mu A)^{-1} = sum_j mu^j A^j` and of the operator
//! families built from it: derivatives `R^(m)`, powers `(R - I)^k`, and the
//! converse operators `S_k`.
//!
//! Every evaluation returns its truncation order and a certified total error
//! exponent: the minimum of the analytic ultrametric tail bound (the largest
//! omitted term's norm bound, which in an ultrametric space is the exact
//! tail norm bound, not a heuristic) and the accumulated rounding floor of
//! the finite-precision arithmetic.

use crate::context::PadicContext;
use crate::error::{Error, Result};
use crate::matrix::PadicMatrix;
use crate::scalar::PadicScalar;
use crate::valuation::{
    big_binomial, big_factorial, kummer_binomial_valuation, legendre_factorial_valuation, Val,
};
use num_bigint::BigInt;

/// A series evaluation with certified error accounting.
#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub value: PadicMatrix,
    /// Highest series index included in the sum.
    pub truncation_order: u64,
    /// Certified total error: the true operator differs from `value` by at
    /// most `p^(-tail_bound_exponent)` in operator norm. `Infinity` when the
    /// series terminated exactly.
    pub tail_bound_exponent: Val,
    /// The analytic tail contribution alone.
    pub analytic_tail_exponent: Val,
    /// Certified convergence: the sampled mu lies inside the admissible
    /// ball, so the term norms decrease geometrically.
    pub converged: bool,
}

impl SeriesResult {
    fn exact(value: PadicMatrix, truncation_order: u64) -> Self {
        let floor = value.error_floor();
        SeriesResult {
            value,
            truncation_order,
            tail_bound_exponent: floor,
            analytic_tail_exponent: Val::Infinity,
            converged: true,
        }
    }
}

/// A matrix together with a certified bound on its distance to the true
/// operator it approximates: `|value - true| <= p^(-err)`.
///
/// Products and sums of certified matrices propagate the bound, which is
/// what lets identity checks state their tolerance as a certificate instead
/// of a guess.
#[derive(Clone, Debug)]
pub struct Certified {
    pub value: PadicMatrix,
    pub err: Val,
}

impl Certified {
    /// A directly-constructed matrix: the only error is representation
    /// rounding, tracked per entry.
    pub fn from_value(value: PadicMatrix) -> Self {
        let err = value.error_floor();
        Certified { value, err }
    }

    pub fn from_series(sr: &SeriesResult) -> Self {
        Certified {
            value: sr.value.clone(),
            err: sr.tail_bound_exponent,
        }
    }

    /// Norm-exponent bound on the true operator: `|true| <= p^(-lo)`.
    fn true_val_lo(&self) -> Val {
        self.value.min_valuation_interval().lo.min(self.err)
    }

    pub fn mul(&self, other: &Certified) -> Result<Certified> {
        let value = self.value.mul(&other.value)?;
        let err = value
            .error_floor()
            .min(self.err.plus(other.true_val_lo()))
            .min(self.value.min_valuation_interval().lo.plus(other.err));
        Ok(Certified { value, err })
    }

    pub fn add(&self, other: &Certified) -> Result<Certified> {
        let value = self.value.add(&other.value)?;
        let err = value.error_floor().min(self.err).min(other.err);
        Ok(Certified { value, err })
    }

    pub fn sub(&self, other: &Certified) -> Result<Certified> {
        let value = self.value.sub(&other.value)?;
        let err = value.error_floor().min(self.err).min(other.err);
        Ok(Certified { value, err })
    }

    /// Multiply by a scalar whose valuation is certified (exact inputs such
    /// as mu powers, integer coefficients).
    pub fn scalar_mul(&self, c: &PadicScalar) -> Result<Certified> {
        let value = self.value.scalar_mul(c)?;
        let err = value
            .error_floor()
            .min(self.err.plus(c.val_interval().lo));
        Ok(Certified { value, err })
    }

    /// Power by repeated multiplication; the linear fold keeps the error
    /// composition transparent.
    pub fn pow(&self, e: u64) -> Result<Certified> {
        let ctx = self.value.context();
        let mut acc = Certified {
            value: PadicMatrix::identity(ctx, self.value.dim()),
            err: Val::Infinity,
        };
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

/// Series engine for one `(A, mu)` pair. Powers of `B = mu A` are cached
/// and shared across every series evaluated at this pair, so sweeping k
/// reuses rather than recomputes them.
#[derive(Debug)]
pub struct ResolventEngine {
    ctx: PadicContext,
    a: PadicMatrix,
    mu: PadicScalar,
    /// v(mu); Infinity when mu = 0.
    mu_val: Val,
    /// Norm exponent s with |A| = p^s; None when A = 0.
    s: Option<i64>,
    /// Certified per-term valuation gain d = v(mu) - s >= 1 on the general
    /// path (both A and mu nonzero).
    gain: Option<i64>,
    /// B = mu A, built exactly from the stored mu.
    b: PadicMatrix,
    /// b_powers[j] = B^j.
    b_powers: Vec<PadicMatrix>,
}

/// Smallest admissible valuation for mu: `max(s + 1, 1)` where `|A| = p^s`,
/// and 1 for the zero matrix by convention.
pub fn admissible_radius(a: &PadicMatrix) -> Result<i64> {
    match a.norm_valuation()? {
        Val::Infinity => Ok(1),
        Val::Finite(v) => Ok((-v + 1).max(1)),
    }
}

/// Ceiling division for a positive divisor (signed `div_ceil` is unstable).
fn div_ceil_pos(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    (num + den - 1).div_euclid(den)
}

impl ResolventEngine {
    /// Certifies admissibility of `mu` up front; every series this engine
    /// produces is then genuinely convergent, not just formally summed.
    pub fn new(a: &PadicMatrix, mu: &PadicScalar) -> Result<Self> {
        let ctx = a.context().clone();
        ctx.check_same(mu.context())?;
        let mu_val = mu.exact_valuation().ok_or_else(|| {
            Error::Undecidable("mu valuation is not certified".to_string())
        })?;
        let s = match a.norm_valuation()? {
            Val::Infinity => None,
            Val::Finite(v) => Some(-v),
        };
        let required = admissible_radius(a)?;
        let gain = match (s, mu_val) {
            (Some(s), Val::Finite(v)) => {
                if v < required {
                    return Err(Error::InadmissibleMu {
                        required,
                        got: mu_val,
                    });
                }
                Some(v - s)
            }
            _ => None,
        };
        let b = a.scalar_mul(mu)?;
        Ok(ResolventEngine {
            b_powers: vec![PadicMatrix::identity(&ctx, a.dim())],
            ctx,
            a: a.clone(),
            mu: mu.clone(),
            mu_val,
            s,
            gain,
            b,
        })
    }

    pub fn context(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn matrix(&self) -> &PadicMatrix {
        &self.a
    }

    pub fn mu(&self) -> &PadicScalar {
        &self.mu
    }

    pub fn mu_valuation(&self) -> Val {
        self.mu_val
    }

    /// Norm exponent of A, `None` for the zero matrix.
    pub fn norm_exponent(&self) -> Option<i64> {
        self.s
    }

    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn degenerate(&self) -> bool {
        self.gain.is_none()
    }

    fn mu_is_zero(&self) -> bool {
        self.mu_val == Val::Infinity
    }

    /// (mu A)^j, cached.
    pub fn b_power(&mut self, j: u64) -> Result<&PadicMatrix> {
        let j = j as usize;
        while self.b_powers.len() <= j {
            let next = self
                .b_powers
                .last()
                .expect("powers start at I")
                .mul(&self.b)?;
            self.b_powers.push(next);
        }
        Ok(&self.b_powers[j])
    }

    fn identity_result(&self) -> SeriesResult {
        SeriesResult::exact(PadicMatrix::identity(&self.ctx, self.dim()), 0)
    }

    fn zero_result(&self, order: u64) -> SeriesResult {
        SeriesResult::exact(PadicMatrix::zero(&self.ctx, self.dim()), order)
    }

    fn guard_target(&self, sr: SeriesResult, target: i64) -> Result<SeriesResult> {
        if sr.tail_bound_exponent < Val::Finite(target) {
            return Err(Error::Precision {
                requested: target,
                achievable: sr.tail_bound_exponent,
            });
        }
        Ok(sr)
    }

    /// `R(mu, A) = sum_{j>=0} (mu A)^j`, certified to `p^(-target)`.
    pub fn resolvent(&mut self, target: i64) -> Result<SeriesResult> {
        if self.degenerate() {
            // A = 0 or mu = 0: the series is exactly I.
            return Ok(self.identity_result());
        }
        let d = self.gain.expect("nondegenerate");
        let nt = (div_ceil_pos(target, d) - 1).max(0) as u64;
        let mut sum = self.b_power(0)?.clone();
        let mut included = 0;
        let mut exact_end = false;
        for j in 1..=nt {
            let bp = self.b_power(j)?.clone();
            if bp.min_valuation_interval().lo == Val::Infinity {
                // B^j = 0 exactly, so the series has terminated: the sum is
                // the exact operator, not an approximation.
                exact_end = true;
                break;
            }
            sum = sum.add(&bp)?;
            included = j;
        }
        let analytic = if exact_end {
            Val::Infinity
        } else {
            Val::Finite((nt as i64 + 1) * d)
        };
        let total = analytic.min(sum.error_floor());
        let sr = SeriesResult {
            value: sum,
            truncation_order: if exact_end { included } else { nt },
            tail_bound_exponent: total,
            analytic_tail_exponent: analytic,
            converged: true,
        };
        let sr = self.guard_target(sr, target)?;
        self.residual_check(&sr)?;
        Ok(sr)
    }

    /// Internal invariant: `(I - mu A) * value - I` must be certifiably at
    /// least as small as the claimed total error.
    fn residual_check(&mut self, sr: &SeriesResult) -> Result<()> {
        let i = PadicMatrix::identity(&self.ctx, self.dim());
        let i_minus_b = i.sub(&self.b)?;
        let res = i_minus_b.mul(&sr.value)?.sub(&i)?;
        let needed = sr.tail_bound_exponent.min(res.error_floor());
        let got = res.min_valuation_interval().lo.min(res.error_floor());
        if got < needed {
            return Err(Error::EngineFault(format!(
                "resolvent residual has certified valuation {got} below the claimed bound {needed}"
            )));
        }
        Ok(())
    }

    /// `(R - I)^k` for `k >= 1` from the binomial series
    /// `(R - I)^k = sum_{j >= k-1} C(j, k-1) (mu A)^{j+1}`; `k = 0` gives I.
    pub fn rminusi_power(&mut self, k: u64, target: i64) -> Result<SeriesResult> {
        if k == 0 {
            return Ok(self.identity_result());
        }
        if self.degenerate() {
            // R = I exactly, so every positive power of R - I vanishes.
            return Ok(self.zero_result(0));
        }
        let d = self.gain.expect("nondegenerate");
        let m = k - 1;
        let nt = (div_ceil_pos(target, d) - 2).max(m as i64) as u64;
        let mut sum = PadicMatrix::zero(&self.ctx, self.dim());
        let mut included = m;
        let mut exact_end = false;
        for j in m..=nt {
            let bp = self.b_power(j + 1)?.clone();
            if bp.min_valuation_interval().lo == Val::Infinity {
                exact_end = true;
                break;
            }
            let coeff = PadicScalar::from_rational(
                &self.ctx,
                &BigInt::from(big_binomial(j, m)),
                &BigInt::from(1),
            )?;
            sum = sum.add(&bp.scalar_mul(&coeff)?)?;
            included = j;
        }
        // Omitted terms have valuation >= v_p(C(j, m)) + (j+1) d >= (nt+2) d;
        // a vanished power of B terminates the series exactly.
        let analytic = if exact_end {
            Val::Infinity
        } else {
            Val::Finite((nt as i64 + 2) * d)
        };
        let total = analytic.min(sum.error_floor());
        let sr = SeriesResult {
            value: sum,
            truncation_order: if exact_end { included } else { nt },
            tail_bound_exponent: total,
            analytic_tail_exponent: analytic,
            converged: true,
        };
        self.guard_target(sr, target)
    }

    /// `R^(m)`, the m-th derivative of `mu -> R(mu, A)`, from the series
    /// `sum_{j>=m} m! C(j, m) mu^(j-m) A^j`, certified to `p^(-target)`.
    pub fn resolvent_derivative(&mut self, m: u64, target: i64) -> Result<SeriesResult> {
        if m == 0 {
            return self.resolvent(target);
        }
        if self.a.min_valuation_interval().lo == Val::Infinity {
            // A = 0: R is constant in mu.
            return Ok(self.zero_result(m));
        }
        if self.mu_is_zero() {
            // Only the j = m term survives: R^(m)(0) = m! A^m.
            let fact = PadicScalar::from_rational(
                &self.ctx,
                &BigInt::from(big_factorial(m)),
                &BigInt::from(1),
            )?;
            let value = self.a.pow(m)?.scalar_mul(&fact)?;
            return Ok(SeriesResult::exact(value, m));
        }
        let d = self.gain.expect("nondegenerate");
        let v = self.mu_val.finite().expect("mu nonzero");
        let lm = legendre_factorial_valuation(m, self.ctx.prime()) as i64;
        // Terms are m! C(j, m) mu^{-m} B^j with valuation at least
        // L(m) + kummer(j, m) + j d - m v; require the omitted ones >= target.
        let threshold = target + m as i64 * v - lm;
        let nt = (div_ceil_pos(threshold, d) - 1).max(m as i64) as u64;
        let mu_shift = self.mu.pow(m).inv()?;
        let fact = BigInt::from(big_factorial(m));
        let mut sum = PadicMatrix::zero(&self.ctx, self.dim());
        let mut included = m;
        let mut exact_end = false;
        for j in m..=nt {
            let bp = self.b_power(j)?.clone();
            if bp.min_valuation_interval().lo == Val::Infinity {
                exact_end = true;
                break;
            }
            let coeff_int = &fact * BigInt::from(big_binomial(j, m));
            let coeff = PadicScalar::from_rational(&self.ctx, &coeff_int, &BigInt::from(1))?
                .mul(&mu_shift)?;
            sum = sum.add(&bp.scalar_mul(&coeff)?)?;
            included = j;
            debug_assert!(
                kummer_binomial_valuation(j, m, self.ctx.prime()).is_ok(),
                "binomial indices stay in range"
            );
        }
        let analytic = if exact_end {
            Val::Infinity
        } else {
            Val::Finite(lm + (nt as i64 + 1) * d - m as i64 * v)
        };
        let total = analytic.min(sum.error_floor());
        let sr = SeriesResult {
            value: sum,
            truncation_order: if exact_end { included } else { nt },
            tail_bound_exponent: total,
            analytic_tail_exponent: analytic,
            converged: true,
        };
        self.guard_target(sr, target)
    }

    /// `S_k = mu^{-(k+1)} (R - I)^{k+1} = sum_{j>=k} C(j, k) mu^{j-k} A^{j+1}`,
    /// certified to `p^(-target)`.
    pub fn s_operator(&mut self, k: u64, target: i64) -> Result<SeriesResult> {
        if self.mu_is_zero() {
            // Only the j = k term survives: S_k(0) = A^{k+1}.
            let value = self.a.pow(k + 1)?;
            return Ok(SeriesResult::exact(value, k));
        }
        if self.degenerate() {
            // A = 0 with mu != 0.
            return Ok(self.zero_result(k));
        }
        let v = self.mu_val.finite().expect("mu nonzero");
        let shift = (k as i64 + 1) * v;
        let inner = self.rminusi_power(k + 1, target + shift)?;
        let scale = self.mu.pow(k + 1).inv()?;
        let value = inner.value.scalar_mul(&scale)?;
        let analytic = inner.analytic_tail_exponent + (-shift);
        let total = analytic
            .min(inner.tail_bound_exponent + (-shift))
            .min(value.error_floor());
        let sr = SeriesResult {
            value,
            truncation_order: inner.truncation_order,
            tail_bound_exponent: total,
            analytic_tail_exponent: analytic,
            converged: true,
        };
        self.guard_target(sr, target)
    }
}
