//! The two-sided contraction criterion.
//!
//! Forward: if every power of A stays in the unit ball, then
//! `|(R(mu, A) - I)^k| <= |mu|^k` for all k and all admissible mu.
//! Converse: if that bound holds on a ball of admissible mu, the operators
//! `S_k = mu^{-(k+1)} (R - I)^{k+1}` are contractions, the factorization
//! `A^{k+1} = (I - mu A)^{k+1} S_k` transfers the bound back to powers of
//! A, and letting |mu| shrink collapses the transferred bound to 1.
//!
//! Every comparison is a certified integer comparison of valuations;
//! anything undecidable at the working precision is an error, not a pass.

use crate::error::{Error, Result};
use crate::identities::{compare, Agreement, IdentityCheck};
use crate::matrix::{PadicMatrix, PowerContractionReport};
use crate::scalar::PadicScalar;
use crate::series::{admissible_radius, Certified, ResolventEngine};
use crate::valuation::{kummer_binomial_valuation, NormExponent, Val};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionRecord {
    pub k: u64,
    pub mu_valuation: i64,
    /// Certified norm exponent of `(R - I)^k`. Exact when `lhs_exact` is
    /// set; otherwise the certified bound sufficient for the verdict (an
    /// upper bound on pass rows, a lower bound on fail rows).
    pub lhs_exponent: NormExponent,
    pub lhs_exact: bool,
    /// Norm exponent of `|mu|^k`: exactly `-k * v(mu)`.
    pub rhs_exponent: i64,
    pub pass: bool,
    pub truncation_order: u64,
    /// Total certified error exponent of the series evaluation behind the
    /// record.
    pub certified_exponent: Val,
}

/// One record of the criterion table, using an engine that can be shared
/// across k for the same mu.
pub fn criterion_record(
    engine: &mut ResolventEngine,
    k: u64,
    target: i64,
) -> Result<CriterionRecord> {
    let v = engine
        .mu_valuation()
        .finite()
        .ok_or_else(|| Error::Undecidable("criterion records need mu != 0".to_string()))?;
    let sr = engine.rminusi_power(k, target)?;
    let iv = sr.value.min_valuation_interval();
    let e_tail = sr.tail_bound_exponent;
    let threshold = Val::Finite(k as i64 * v);
    let true_lo = iv.lo.min(e_tail);
    let (pass, lhs_exponent, lhs_exact) = if true_lo >= threshold {
        let exact = iv.is_exact()
            && (iv.lo < e_tail || (iv.lo == Val::Infinity && e_tail == Val::Infinity));
        let reported = if exact { iv.lo } else { true_lo };
        (true, NormExponent::from_valuation(reported), exact)
    } else if iv.hi < threshold && iv.hi < e_tail {
        (false, NormExponent::from_valuation(iv.hi), iv.is_exact())
    } else {
        return Err(Error::Undecidable(format!(
            "criterion comparison at k={k}, v(mu)={v}: value interval {iv}, \
             certificate {e_tail}, threshold {threshold}"
        )));
    };
    Ok(CriterionRecord {
        k,
        mu_valuation: v,
        lhs_exponent,
        lhs_exact,
        rhs_exponent: -(k as i64) * v,
        pass,
        truncation_order: sr.truncation_order,
        certified_exponent: e_tail,
    })
}

/// Standalone record computation for `mu = p^v`; independent records make
/// the table embarrassingly parallel, and the arithmetic is identical to
/// the shared-engine path.
pub fn compute_record(
    a: &PadicMatrix,
    k: u64,
    mu_valuation: i64,
    target: i64,
) -> Result<CriterionRecord> {
    let mu = PadicScalar::p_power(a.context(), mu_valuation);
    let mut engine = ResolventEngine::new(a, &mu)?;
    criterion_record(&mut engine, k, target)
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionWitness {
    pub k: u64,
    pub mu_valuation: i64,
    pub lhs_exponent: NormExponent,
    pub rhs_exponent: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EngineMetadata {
    pub precision: u32,
    pub target_exponent: i64,
    /// Aligned with `records`.
    pub truncation_orders: Vec<u64>,
    /// Aligned with `records`.
    pub certified_exponents: Vec<Val>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub matrix_id: String,
    pub prime: u64,
    pub dim: usize,
    pub records: Vec<CriterionRecord>,
    pub verdict: bool,
    pub witnesses: Vec<CriterionWitness>,
    pub engine_metadata: EngineMetadata,
}

/// Reject any sampled valuation outside the certified convergence ball.
pub fn validate_grid(a: &PadicMatrix, mu_valuations: &[i64]) -> Result<()> {
    let required = admissible_radius(a)?;
    for &v in mu_valuations {
        if v < required {
            return Err(Error::InadmissibleMu {
                required,
                got: Val::Finite(v),
            });
        }
    }
    Ok(())
}

/// Assemble a report from independently computed records: canonical (k, v)
/// order, verdict, witnesses, and metadata. Shared by the serial path and
/// parallel scans so both produce identical reports.
pub fn assemble_report(
    a: &PadicMatrix,
    matrix_id: &str,
    mut records: Vec<CriterionRecord>,
    target: i64,
) -> CriterionReport {
    records.sort_by_key(|r| (r.k, r.mu_valuation));
    let verdict = records.iter().all(|r| r.pass);
    let witnesses = records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| CriterionWitness {
            k: r.k,
            mu_valuation: r.mu_valuation,
            lhs_exponent: r.lhs_exponent,
            rhs_exponent: r.rhs_exponent,
        })
        .collect();
    let engine_metadata = EngineMetadata {
        precision: a.context().precision(),
        target_exponent: target,
        truncation_orders: records.iter().map(|r| r.truncation_order).collect(),
        certified_exponents: records.iter().map(|r| r.certified_exponent).collect(),
    };
    CriterionReport {
        matrix_id: matrix_id.to_string(),
        prime: a.context().prime(),
        dim: a.dim(),
        records,
        verdict,
        witnesses,
        engine_metadata,
    }
}

/// Certified table of `|(R - I)^k| <= |mu|^k` over `k = 1..=kmax` and the
/// sampled valuations, in canonical (k, v) order.
pub fn resolvent_contraction_check(
    a: &PadicMatrix,
    matrix_id: &str,
    mu_valuations: &[i64],
    kmax: u64,
    target: i64,
) -> Result<CriterionReport> {
    validate_grid(a, mu_valuations)?;
    let mut records = Vec::with_capacity(mu_valuations.len() * kmax as usize);
    for &v in mu_valuations {
        let mu = PadicScalar::p_power(a.context(), v);
        let mut engine = ResolventEngine::new(a, &mu)?;
        for k in 1..=kmax {
            records.push(criterion_record(&mut engine, k, target)?);
        }
    }
    Ok(assemble_report(a, matrix_id, records, target))
}

fn a_power_val_lows(a: &PadicMatrix, max_j: u64) -> Result<Vec<Val>> {
    let mut out = Vec::with_capacity(max_j as usize + 1);
    let mut cur = PadicMatrix::identity(a.context(), a.dim());
    out.push(cur.min_valuation_interval().lo);
    for _ in 1..=max_j {
        cur = cur.mul(a)?;
        out.push(cur.min_valuation_interval().lo);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainRow {
    pub k: u64,
    pub mu_valuation: i64,
    pub terms: u64,
    /// Minimum over series terms of
    /// `v_p(C(j, k-1)) + (j+1) v(mu) + v(A^{j+1}) - k v(mu)`.
    pub min_margin: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForwardReport {
    pub power: PowerContractionReport,
    pub hypothesis_holds: bool,
    /// Present when the hypothesis holds.
    pub criterion: Option<CriterionReport>,
    pub chain: Vec<ChainRow>,
    /// True when the hypothesis holds and every certified consequence was
    /// confirmed; vacuously true when the hypothesis fails.
    pub verdict: bool,
}

/// Forward direction: confirm the power hypothesis, then certify the
/// criterion table and, term by term, the estimate chain that proves it:
/// every series term of `(R - I)^k` individually clears the `|mu|^k` bound.
pub fn forward_direction_suite(
    a: &PadicMatrix,
    matrix_id: &str,
    mu_valuations: &[i64],
    kmax: u64,
    max_power: u64,
    target: i64,
) -> Result<ForwardReport> {
    let power = a.power_contraction_check(max_power)?;
    if !power.verdict {
        return Ok(ForwardReport {
            power,
            hypothesis_holds: false,
            criterion: None,
            chain: Vec::new(),
            verdict: true,
        });
    }
    let criterion = resolvent_contraction_check(a, matrix_id, mu_valuations, kmax, target)?;
    let max_j = criterion
        .records
        .iter()
        .map(|r| r.truncation_order + 1)
        .max()
        .unwrap_or(1);
    let aval = a_power_val_lows(a, max_j)?;
    let p = a.context().prime();
    let mut chain = Vec::with_capacity(criterion.records.len());
    let mut verdict = criterion.verdict;
    for rec in &criterion.records {
        let m = rec.k - 1;
        let v = rec.mu_valuation;
        let mut min_margin = i64::MAX;
        let mut terms = 0u64;
        for j in m..=rec.truncation_order {
            let kum = kummer_binomial_valuation(j, m, p)? as i64;
            let Val::Finite(va) = aval[(j + 1) as usize] else {
                continue; // the power vanished; the term contributes nothing
            };
            let margin = kum + (j as i64 + 1) * v + va - rec.k as i64 * v;
            min_margin = min_margin.min(margin);
            terms += 1;
        }
        if terms == 0 {
            min_margin = 0;
        }
        let ok = min_margin >= 0;
        verdict &= ok;
        chain.push(ChainRow {
            k: rec.k,
            mu_valuation: v,
            terms,
            min_margin,
            ok,
        });
    }
    Ok(ForwardReport {
        power,
        hypothesis_holds: true,
        criterion: Some(criterion),
        chain,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SNormRow {
    pub k: u64,
    pub mu_valuation: i64,
    /// Certified lower bound on the valuation of `S_k` entries, error
    /// included: `|S_k| <= p^(-norm_val_lo)`.
    pub norm_val_lo: Val,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerConclusionRow {
    pub power: u64,
    pub val_lo: Val,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub mu_valuation: i64,
    /// Exponent of the transferred bound
    /// `max(1, |mu A|, ..., |mu^{k+1} A^{k+1}|)` at this mu, maximized over
    /// the checked k.
    pub bound_exponent: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConverseReport {
    pub s_norms: Vec<SNormRow>,
    pub factorizations: Vec<IdentityCheck>,
    pub power_conclusions: Vec<PowerConclusionRow>,
    pub sweep: Vec<SweepRow>,
    /// The sweep is non-increasing in v(mu) and reaches exponent 0, which
    /// realizes the limit of shrinking |mu| as a finite certified sweep.
    pub sweep_collapses: bool,
    pub verdict: bool,
}

/// Converse direction: from the resolvent bound, certify that each `S_k` is
/// a contraction, verify the factorization that transfers the bound to
/// `A^{k+1}` (its failure is an engine fault, not a theorem failure), check
/// the transferred conclusion, and collapse the bound along shrinking |mu|.
pub fn converse_direction_suite(
    a: &PadicMatrix,
    mu_valuations: &[i64],
    kmax: u64,
    target: i64,
) -> Result<ConverseReport> {
    let ctx = a.context();
    let identity = PadicMatrix::identity(ctx, a.dim());
    let mut s_norms = Vec::new();
    let mut factorizations = Vec::new();
    for &v in mu_valuations {
        let mu = PadicScalar::p_power(ctx, v);
        let mut engine = ResolventEngine::new(a, &mu)?;
        let i_minus_b = Certified::from_value(identity.sub(&a.scalar_mul(&mu)?)?);
        for k in 0..=kmax {
            let s = engine.s_operator(k, target)?;
            let iv = s.value.min_valuation_interval();
            let lo = iv.lo.min(s.tail_bound_exponent);
            s_norms.push(SNormRow {
                k,
                mu_valuation: v,
                norm_val_lo: lo,
                ok: lo >= Val::Finite(0),
            });
            let s_cert = Certified::from_series(&s);
            let a_pow = Certified::from_value(a.pow(k + 1)?);
            let rhs = i_minus_b.pow(k + 1)?.mul(&s_cert)?;
            let row = compare(format!("converse_factorization k={k} v={v}"), &a_pow, &rhs)?;
            match row.outcome {
                Agreement::Disagree => {
                    return Err(Error::EngineFault(format!(
                        "converse factorization violated at k={k}, v(mu)={v}"
                    )))
                }
                Agreement::Undecided => {
                    return Err(Error::Undecidable(format!(
                        "converse factorization undecidable at k={k}, v(mu)={v}"
                    )))
                }
                Agreement::Agree => factorizations.push(row),
            }
        }
    }

    let aval = a_power_val_lows(a, kmax + 1)?;
    let mut power_conclusions = Vec::new();
    let mut conclusions_ok = true;
    for k in 0..=kmax {
        let lo = aval[(k + 1) as usize];
        let ok = lo >= Val::Finite(0);
        conclusions_ok &= ok;
        power_conclusions.push(PowerConclusionRow {
            power: k + 1,
            val_lo: lo,
            ok,
        });
    }

    let mut sorted: Vec<i64> = mu_valuations.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut sweep = Vec::with_capacity(sorted.len());
    for &v in &sorted {
        let mut bound = 0i64;
        for i in 1..=(kmax + 1) {
            if let Val::Finite(vai) = aval[i as usize] {
                bound = bound.max(-vai - i as i64 * v);
            }
        }
        sweep.push(SweepRow {
            mu_valuation: v,
            bound_exponent: bound,
        });
    }
    let monotone = sweep
        .windows(2)
        .all(|w| w[1].bound_exponent <= w[0].bound_exponent);
    let sweep_collapses = monotone && sweep.last().is_none_or(|r| r.bound_exponent == 0);

    let verdict =
        s_norms.iter().all(|r| r.ok) && conclusions_ok && sweep_collapses;
    Ok(ConverseReport {
        s_norms,
        factorizations,
        power_conclusions,
        sweep,
        sweep_collapses,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ViolationWitness {
    pub k: u64,
    pub mu_valuation: i64,
    pub lhs_exponent: NormExponent,
    pub rhs_exponent: i64,
    /// Dominant-term prediction `s - v(mu)` for the exponent of
    /// `|R - I|`, which the record must reproduce exactly.
    pub predicted_exponent: i64,
}

/// For a matrix with `|A| = p^s > 1` produce a certified witness that the
/// criterion fails at `k = 1`, `v(mu) = s + 1`, where `R - I` is dominated
/// by its leading term `mu A`.
pub fn violation_witness(a: &PadicMatrix, target: i64) -> Result<Option<ViolationWitness>> {
    let s = match a.norm_valuation()? {
        Val::Infinity => return Ok(None),
        Val::Finite(v) => -v,
    };
    if s <= 0 {
        return Ok(None);
    }
    let v = s + 1;
    let rec = compute_record(a, 1, v, target)?;
    if rec.pass {
        return Err(Error::EngineFault(format!(
            "expected a certified violation at k=1, v(mu)={v}"
        )));
    }
    let predicted = s - v;
    if rec.lhs_exponent != NormExponent(Some(predicted)) || !rec.lhs_exact {
        return Err(Error::EngineFault(format!(
            "witness exponent {} differs from the dominant-term prediction {predicted}",
            rec.lhs_exponent
        )));
    }
    Ok(Some(ViolationWitness {
        k: 1,
        mu_valuation: v,
        lhs_exponent: rec.lhs_exponent,
        rhs_exponent: rec.rhs_exponent,
        predicted_exponent: predicted,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremCheck {
    pub power: PowerContractionReport,
    pub criterion: CriterionReport,
    /// The two sides of the equivalence came out the same way. A false
    /// value here is an engine fault, never a property of the matrix.
    pub agreement: bool,
    pub witness: Option<ViolationWitness>,
}

/// Check both sides of the equivalence on one matrix and compare verdicts.
pub fn check_theorem(
    a: &PadicMatrix,
    matrix_id: &str,
    mu_valuations: &[i64],
    kmax: u64,
    max_power: u64,
    target: i64,
) -> Result<TheoremCheck> {
    let power = a.power_contraction_check(max_power)?;
    let criterion = resolvent_contraction_check(a, matrix_id, mu_valuations, kmax, target)?;
    let witness = if power.verdict {
        None
    } else {
        violation_witness(a, target)?
    };
    Ok(TheoremCheck {
        agreement: power.verdict == criterion.verdict,
        power,
        criterion,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::PadicContext;
    use num_bigint::BigInt;

    fn ctxp(p: u64, n: u32) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    fn int_matrix(ctx: &PadicContext, dim: usize, vals: &[i64]) -> PadicMatrix {
        PadicMatrix::from_entries(
            ctx,
            dim,
            vals.iter()
                .map(|&n| PadicScalar::from_integer(ctx, n))
                .collect(),
        )
        .unwrap()
    }

    fn inv5_matrix(ctx: &PadicContext) -> PadicMatrix {
        let e = PadicScalar::from_rational(ctx, &BigInt::from(1), &BigInt::from(5)).unwrap();
        PadicMatrix::from_entries(ctx, 1, vec![e]).unwrap()
    }

    #[test]
    fn contractive_table_passes_everywhere() {
        let ctx = ctxp(5, 80);
        let a = int_matrix(&ctx, 2, &[2, 1, 5, 3]);
        let report = resolvent_contraction_check(&a, "m0", &[1, 2, 3], 6, 44).unwrap();
        assert!(report.verdict);
        assert!(report.witnesses.is_empty());
        assert_eq!(report.records.len(), 18);
        assert_eq!(report.engine_metadata.truncation_orders.len(), 18);
        let mut sorted = report.records.clone();
        sorted.sort_by_key(|r| (r.k, r.mu_valuation));
        for (a_rec, b_rec) in report.records.iter().zip(&sorted) {
            assert_eq!((a_rec.k, a_rec.mu_valuation), (b_rec.k, b_rec.mu_valuation));
        }
        for rec in &report.records {
            assert!(rec.pass);
            assert_eq!(rec.rhs_exponent, -(rec.k as i64) * rec.mu_valuation);
            assert!(rec.lhs_exponent <= NormExponent(Some(rec.rhs_exponent)));
        }
    }

    #[test]
    fn violating_matrix_fails_with_exact_witness() {
        let ctx = ctxp(5, 80);
        let a = inv5_matrix(&ctx);
        let w = violation_witness(&a, 44).unwrap().expect("|A| = 5 > 1");
        assert_eq!(w.k, 1);
        assert_eq!(w.mu_valuation, 2);
        assert_eq!(w.lhs_exponent, NormExponent(Some(-1)));
        assert_eq!(w.rhs_exponent, -2);
        assert_eq!(w.predicted_exponent, -1);

        let report = resolvent_contraction_check(&a, "m1", &[2, 3], 3, 44).unwrap();
        assert!(!report.verdict);
        assert!(!report.witnesses.is_empty());
        for rec in report.records.iter().filter(|r| !r.pass) {
            assert!(rec.lhs_exponent > NormExponent(Some(rec.rhs_exponent)));
        }
        // Every sampled mu fails already at k = 1: |R - I| = |mu||A|.
        for rec in report.records.iter().filter(|r| r.k == 1) {
            assert!(!rec.pass);
            assert!(rec.lhs_exact);
            assert_eq!(rec.lhs_exponent, NormExponent(Some(1 - rec.mu_valuation)));
        }
    }

    #[test]
    fn contraction_has_no_witness() {
        let ctx = ctxp(5, 60);
        let a = int_matrix(&ctx, 2, &[2, 1, 5, 3]);
        assert!(violation_witness(&a, 24).unwrap().is_none());
        assert!(violation_witness(&PadicMatrix::zero(&ctx, 2), 24)
            .unwrap()
            .is_none());
    }

    #[test]
    fn theorem_agrees_in_both_directions() {
        let ctx = ctxp(5, 80);
        let good = int_matrix(&ctx, 2, &[2, 1, 5, 3]);
        let t = check_theorem(&good, "good", &[1, 2, 3], 4, 8, 32).unwrap();
        assert!(t.power.verdict);
        assert!(t.criterion.verdict);
        assert!(t.agreement);
        assert!(t.witness.is_none());

        let bad = inv5_matrix(&ctx);
        let t = check_theorem(&bad, "bad", &[2, 3], 4, 8, 44).unwrap();
        assert!(!t.power.verdict);
        assert!(!t.criterion.verdict);
        assert!(t.agreement);
        let w = t.witness.expect("violation witness");
        assert_eq!(w.lhs_exponent, NormExponent(Some(w.predicted_exponent)));
    }

    #[test]
    fn forward_suite_certifies_the_chain() {
        let ctx = ctxp(5, 80);
        let a = int_matrix(&ctx, 2, &[2, 1, 5, 3]);
        let fwd = forward_direction_suite(&a, "m0", &[1, 2], 4, 8, 24).unwrap();
        assert!(fwd.hypothesis_holds);
        assert!(fwd.verdict);
        assert!(fwd.criterion.is_some());
        assert_eq!(fwd.chain.len(), 8);
        for row in &fwd.chain {
            assert!(row.ok, "chain row k={} v={}", row.k, row.mu_valuation);
            assert!(row.min_margin >= 0);
        }

        let bad = inv5_matrix(&ctx);
        let fwd = forward_direction_suite(&bad, "m1", &[2], 3, 8, 24).unwrap();
        assert!(!fwd.hypothesis_holds);
        assert!(fwd.verdict, "vacuous when the hypothesis fails");
        assert!(fwd.criterion.is_none());
        assert!(fwd.chain.is_empty());
    }

    #[test]
    fn converse_suite_transfers_the_bound() {
        let ctx = ctxp(5, 80);
        let a = int_matrix(&ctx, 2, &[2, 1, 5, 3]);
        let conv = converse_direction_suite(&a, &[1, 2, 3], 3, 44).unwrap();
        assert!(conv.verdict);
        assert!(conv.s_norms.iter().all(|r| r.ok));
        assert_eq!(conv.factorizations.len(), 3 * 4);
        assert!(conv.power_conclusions.iter().all(|r| r.ok));
        assert!(conv.sweep_collapses);
        assert_eq!(conv.sweep.len(), 3);

        let bad = inv5_matrix(&ctx);
        let conv = converse_direction_suite(&bad, &[2, 3], 2, 60).unwrap();
        assert!(!conv.verdict);
        // S_0 = (A R)^1 has norm exponent +1 at every sampled mu.
        assert!(conv.s_norms.iter().any(|r| !r.ok));
        assert!(conv.power_conclusions.iter().any(|r| !r.ok));
    }

    #[test]
    fn nilpotent_rows_report_exact_zero() {
        let ctx = ctxp(5, 40);
        let a = int_matrix(&ctx, 2, &[0, 1, 0, 0]);
        let report = resolvent_contraction_check(&a, "nil", &[1, 2], 4, 24).unwrap();
        assert!(report.verdict);
        for rec in &report.records {
            assert!(rec.pass);
            if rec.k >= 2 {
                // (R - I)^k = (mu A R)^k vanishes identically once k
                // reaches the nilpotency index.
                assert_eq!(rec.lhs_exponent, NormExponent(None));
                assert!(rec.lhs_exact);
                assert_eq!(rec.certified_exponent, Val::Infinity);
            } else {
                assert_eq!(rec.lhs_exponent, NormExponent(Some(-rec.mu_valuation)));
            }
        }
    }

    #[test]
    fn grid_below_the_admissible_radius_is_rejected() {
        let ctx = ctxp(5, 60);
        let a = inv5_matrix(&ctx);
        match resolvent_contraction_check(&a, "m1", &[1, 2], 2, 24) {
            Err(Error::InadmissibleMu { required, got }) => {
                assert_eq!(required, 2);
                assert_eq!(got, Val::Finite(1));
            }
            other => panic!("expected InadmissibleMu, got {:?}", other.map(|r| r.verdict)),
        }
    }

    #[test]
    fn uncertified_inputs_surface_as_errors() {
        let ctx = ctxp(5, 8);
        let third =
            PadicScalar::from_rational(&ctx, &BigInt::from(1), &BigInt::from(3)).unwrap();
        let noise = third.add(&third.neg()).unwrap();

        let a = int_matrix(&ctx, 1, &[2]);
        let err = ResolventEngine::new(&a, &noise).unwrap_err();
        assert!(err.is_precision(), "mu without certified valuation: {err:?}");

        let noisy =
            PadicMatrix::from_entries(&ctx, 1, vec![noise]).unwrap();
        let mu = PadicScalar::p_power(&ctx, 1);
        let err = ResolventEngine::new(&noisy, &mu).unwrap_err();
        assert!(err.is_precision(), "matrix without certified norm: {err:?}");
    }

    #[test]
    fn parallel_and_shared_records_are_identical() {
        let ctx = ctxp(5, 60);
        let a = int_matrix(&ctx, 2, &[2, 1, 5, 3]);
        let mu = PadicScalar::p_power(&ctx, 2);
        let mut engine = ResolventEngine::new(&a, &mu).unwrap();
        for k in 1..=4 {
            let shared = criterion_record(&mut engine, k, 24).unwrap();
            let standalone = compute_record(&a, k, 2, 24).unwrap();
            assert_eq!(
                serde_json::to_string(&shared).unwrap(),
                serde_json::to_string(&standalone).unwrap()
            );
        }
    }
}
