//! Cross-route identity checks.
//!
//! Each check computes the same operator along two independent routes
//! (series summation, matrix powers of other series values, closed-form
//! scalings) and compares them to the certified tolerance that the routes'
//! own error certificates imply. Agreement is decided three ways: within
//! tolerance, certifiably violated, or undecidable at the working precision;
//! the last is never silently treated as a pass.

use crate::error::Result;
use crate::matrix::PadicMatrix;
use crate::scalar::PadicScalar;
use crate::series::{Certified, ResolventEngine};
use crate::valuation::{big_factorial, Val};
use num_bigint::BigInt;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Agreement {
    Agree,
    Disagree,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Both routes are certified within `p^(-certificate)` of the true
    /// operator, so their difference must clear this exponent.
    pub certificate: Val,
    /// Certified lower bound on the valuation of the observed difference.
    pub observed: Val,
    pub outcome: Agreement,
}

/// Compare two certified routes to the same operator.
pub fn compare(name: impl Into<String>, lhs: &Certified, rhs: &Certified) -> Result<IdentityCheck> {
    let diff = lhs.value.sub(&rhs.value)?;
    let certificate = lhs.err.min(rhs.err);
    let mut observed = Val::Infinity;
    let mut disagree = false;
    let mut undecided = false;
    for e in diff.entries() {
        let iv = e.val_interval();
        observed = observed.min(iv.lo);
        if iv.lo >= certificate {
            continue;
        }
        if e.is_certainly_nonzero() {
            // The routes differ by more than their combined certificates.
            disagree = true;
        } else {
            // Rounding noise sits above the tolerance; no verdict possible.
            undecided = true;
        }
    }
    let outcome = if disagree {
        Agreement::Disagree
    } else if undecided {
        Agreement::Undecided
    } else {
        Agreement::Agree
    };
    Ok(IdentityCheck {
        name: name.into(),
        certificate,
        observed,
        outcome,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentitySuite {
    pub rows: Vec<IdentityCheck>,
    pub agreements: usize,
    pub disagreements: usize,
    pub undecided: usize,
}

impl IdentitySuite {
    pub fn all_agree(&self) -> bool {
        self.disagreements == 0 && self.undecided == 0
    }
}

/// Run the full identity suite for one `(A, mu)` pair.
///
/// Checked for each `m = 0..=mmax`:
///  * the chain identity `(R - I)^{m+1} = mu A (R - I)^m R`,
///  * the derivative identity `(R - I)^{m+1} = mu^{m+1}/m! * A R^(m)`,
///    in divided and denominator-cleared form,
///  * the binomial series for `(R - I)^{m+1}` against the literal matrix
///    power of `R - I`.
///
/// Checked for each `k = 0..=kmax`:
///  * the operator `S_k` from its series against `(A R)^{k+1}`,
///  * the factorization `A^{k+1} = (I - mu A)^{k+1} S_k`.
///
/// `inject_discrepancy` corrupts one side of the first comparison by a term
/// just below its certificate; it exists so the detection machinery itself
/// can be negative-tested, and a run with it set must report a disagreement.
pub fn run_identity_suite(
    a: &PadicMatrix,
    mu: &PadicScalar,
    mmax: u64,
    kmax: u64,
    target: i64,
    inject_discrepancy: bool,
) -> Result<IdentitySuite> {
    let mut engine = ResolventEngine::new(a, mu)?;
    let ctx = engine.context().clone();
    let dim = a.dim();
    let identity = PadicMatrix::identity(&ctx, dim);
    let a_cert = Certified::from_value(a.clone());
    let r = Certified::from_series(&engine.resolvent(target)?);
    let r_minus_i = Certified {
        value: r.value.sub(&identity)?,
        err: r.err,
    };
    let i_minus_b = Certified::from_value(identity.sub(&a.scalar_mul(mu)?)?);

    let mut rm = Vec::with_capacity(mmax as usize + 2);
    for m in 0..=mmax + 1 {
        rm.push(Certified::from_series(&engine.rminusi_power(m, target)?));
    }

    let mut rows = Vec::new();
    let mut inject = inject_discrepancy;
    let mut push = |row: IdentityCheck| rows.push(row);

    for m in 0..=mmax {
        let mi = m as usize;
        let lhs = if inject {
            inject = false;
            perturb(&rm[mi + 1])?
        } else {
            rm[mi + 1].clone()
        };

        let chain_rhs = a_cert
            .mul(&rm[mi])?
            .mul(&r)?
            .scalar_mul(mu)?;
        push(compare(format!("chain m={m}"), &lhs, &chain_rhs)?);

        let deriv = Certified::from_series(&engine.resolvent_derivative(m, target)?);
        let fact = PadicScalar::from_rational(
            &ctx,
            &BigInt::from(big_factorial(m)),
            &BigInt::from(1),
        )?;
        let scale = mu.pow(m + 1).div(&fact)?;
        let deriv_rhs = a_cert.mul(&deriv)?.scalar_mul(&scale)?;
        push(compare(format!("derivative m={m}"), &lhs, &deriv_rhs)?);

        let cleared_lhs = lhs.scalar_mul(&fact)?;
        let cleared_rhs = a_cert.mul(&deriv)?.scalar_mul(&mu.pow(m + 1))?;
        push(compare(
            format!("derivative_cleared m={m}"),
            &cleared_lhs,
            &cleared_rhs,
        )?);

        let power_rhs = r_minus_i.pow(m + 1)?;
        push(compare(
            format!("rminusi_series_vs_power m={m}"),
            &rm[mi + 1],
            &power_rhs,
        )?);
    }

    for k in 0..=kmax {
        let s = Certified::from_series(&engine.s_operator(k, target)?);

        let ar_pow = a_cert.mul(&r)?.pow(k + 1)?;
        push(compare(format!("s_operator_forms k={k}"), &s, &ar_pow)?);

        let a_pow = Certified::from_value(a.pow(k + 1)?);
        let fact_rhs = i_minus_b.pow(k + 1)?.mul(&s)?;
        push(compare(
            format!("converse_factorization k={k}"),
            &a_pow,
            &fact_rhs,
        )?);
    }

    let agreements = rows
        .iter()
        .filter(|r| r.outcome == Agreement::Agree)
        .count();
    let disagreements = rows
        .iter()
        .filter(|r| r.outcome == Agreement::Disagree)
        .count();
    let undecided = rows
        .iter()
        .filter(|r| r.outcome == Agreement::Undecided)
        .count();
    Ok(IdentitySuite {
        rows,
        agreements,
        disagreements,
        undecided,
    })
}

/// Add `p^(e)` to one entry, with `e` chosen just below the route's own
/// certificate so the corruption must be flagged as a disagreement.
fn perturb(c: &Certified) -> Result<Certified> {
    let ctx = c.value.context().clone();
    let e = match c.err {
        Val::Finite(t) => t - 1,
        Val::Infinity => 0,
    };
    let bump = PadicMatrix::from_fn(&ctx, c.value.dim(), |r, col| {
        if r == 0 && col == 0 {
            PadicScalar::p_power(&ctx, e)
        } else {
            PadicScalar::zero(&ctx)
        }
    });
    Ok(Certified {
        value: c.value.add(&bump)?,
        err: c.err,
    })
}
