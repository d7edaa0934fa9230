//! Brute-force checks of the moment formulas by exact symbolic expectation.

use std::sync::OnceLock;
use std::time::Instant;

use serde::Serialize;

use sepprob_core::exact::Rational;
use sepprob_core::moments::{degenerate_moment, f2_closed, weighted_degenerate_ratio, DysonIndex};

use crate::expectation::{
    degenerate_weight, degenerate_weight_closed, det_weight, expect_power, ExpectationRule,
    MonomialIntegrator, ProductStats,
};
use crate::poly::ONE;
use crate::rho::{decompose_pt_diff, Field, PtDecomposition};
use crate::SymbolicError;

/// Outcome of one exact comparison.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub check: &'static str,
    pub field: Field,
    pub n: u32,
    pub k: u32,
    pub alpha: String,
    pub lhs: String,
    pub rhs: String,
    #[serde(rename = "match")]
    pub matched: bool,
    pub monomials_nonzero: u64,
    pub monomials_pruned: u64,
    pub pairs_multiplied: u64,
    pub elapsed_s: f64,
}

impl VerificationReport {
    fn new(
        check: &'static str,
        field: Field,
        n: u32,
        k: u32,
        lhs: Rational,
        rhs: Rational,
        stats: ProductStats,
        start: Instant,
    ) -> Self {
        VerificationReport {
            check,
            field,
            n,
            k,
            alpha: field.alpha().to_string(),
            matched: lhs == rhs,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            monomials_nonzero: stats.monomials_nonzero,
            monomials_pruned: stats.monomials_pruned,
            pairs_multiplied: stats.pairs_multiplied,
            elapsed_s: start.elapsed().as_secs_f64(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

/// The decomposition of `|ρ^PT| − |ρ|`, built once per field.
pub fn pt_decomposition(field: Field) -> Result<&'static PtDecomposition, SymbolicError> {
    static REAL: OnceLock<PtDecomposition> = OnceLock::new();
    static COMPLEX: OnceLock<PtDecomposition> = OnceLock::new();
    let cell = match field {
        Field::Real => &REAL,
        Field::Complex => &COMPLEX,
    };
    if let Some(d) = cell.get() {
        return Ok(d);
    }
    let d = decompose_pt_diff(field)?;
    Ok(cell.get_or_init(|| d))
}

fn dyson(field: Field) -> DysonIndex {
    match field {
        Field::Real => DysonIndex::ratio(1, 2),
        Field::Complex => DysonIndex::ratio(1, 1),
    }
    .expect("valid index")
}

fn exact(
    v: Result<sepprob_core::exact::ParamValue, sepprob_core::moments::MomentError>,
) -> Result<Rational, SymbolicError> {
    v.map_err(|e| SymbolicError::Formula(e.to_string()))?
        .into_rational()
        .ok_or_else(|| SymbolicError::Formula("inexact value for rational index".into()))
}

/// `⟨|ρ|^k (|ρ^PT| − |ρ|)^n⟩ / ⟨|ρ|^k⟩` by brute force against the closed form.
pub fn verify_f2(n: u32, k: u32, field: Field) -> Result<VerificationReport, SymbolicError> {
    let start = Instant::now();
    let d = pt_decomposition(field)?;
    let weight = det_weight(k);
    let (raw, stats) = expect_power(&d.diff, n, &weight, ExpectationRule::Full, field)?;
    let norm = MonomialIntegrator::new(field, ExpectationRule::Full).integrate_fresh(&weight);
    let lhs = raw / norm;
    let rhs = exact(f2_closed(n, k, &dyson(field)))?;
    Ok(VerificationReport::new(
        "f2", field, n, k, lhs, rhs, stats, start,
    ))
}

/// `⟨(x1x2x3)^{2k} x4^{2k-2} (|ρ^PT| − |ρ|)^n⟩` against the weighted
/// degenerate formula; `k ≥ 1`.
pub fn verify_degenerate_conjecture(
    n: u32,
    k: u32,
    field: Field,
) -> Result<VerificationReport, SymbolicError> {
    if k == 0 {
        return Err(SymbolicError::InvalidArgument(
            "the weighted check needs k ≥ 1".into(),
        ));
    }
    let start = Instant::now();
    let d = pt_decomposition(field)?;
    let (normalised, stats) = expect_power(&d.diff, n, &ONE, ExpectationRule::WeightedK(k), field)?;
    let weight_mass = MonomialIntegrator::new(field, ExpectationRule::Full)
        .integrate_fresh(&degenerate_weight(k));
    let lhs = normalised * weight_mass;
    let alpha = dyson(field);
    let ratio = weighted_degenerate_ratio(n, k, &alpha)
        .into_rational()
        .ok_or_else(|| SymbolicError::Formula("inexact ratio".into()))?;
    let rhs = degenerate_weight_closed(k, field) * ratio * exact(f2_closed(n, k, &alpha))?;
    Ok(VerificationReport::new(
        "degenerate_conjecture",
        field,
        n,
        k,
        lhs,
        rhs,
        stats,
        start,
    ))
}

/// `⟨f1^n⟩` over minimally degenerate states against the closed form.
pub fn verify_degenerate_corollary(
    n: u32,
    field: Field,
) -> Result<VerificationReport, SymbolicError> {
    let start = Instant::now();
    let d = pt_decomposition(field)?;
    let (lhs, stats) = expect_power(&d.f1, n, &ONE, ExpectationRule::ConditionalX4, field)?;
    let rhs = exact(degenerate_moment(n, &dyson(field)))?;
    Ok(VerificationReport::new(
        "degenerate_corollary",
        field,
        n,
        0,
        lhs,
        rhs,
        stats,
        start,
    ))
}

/// Grid of checks: `verify_f2` for `n ≤ f2_max[field]`, `k ≤ k_max`, and
/// both degenerate checks for `n ≤ degenerate_max`, `k ∈ 1..=k_max`.
#[derive(Clone, Copy, Debug)]
pub struct VerificationGrid {
    pub f2_max_real: u32,
    pub f2_max_complex: u32,
    pub degenerate_max: u32,
    pub k_max: u32,
}

impl Default for VerificationGrid {
    fn default() -> Self {
        VerificationGrid {
            f2_max_real: 3,
            f2_max_complex: 2,
            degenerate_max: 2,
            k_max: 2,
        }
    }
}

impl VerificationGrid {
    /// The four-moment grid for both fields (long-running in complex mode).
    pub fn full() -> Self {
        VerificationGrid {
            f2_max_real: 4,
            f2_max_complex: 4,
            degenerate_max: 4,
            k_max: 2,
        }
    }

    pub fn run(&self, fields: &[Field]) -> Result<Vec<VerificationReport>, SymbolicError> {
        let mut out = Vec::new();
        for &field in fields {
            let f2_max = match field {
                Field::Real => self.f2_max_real,
                Field::Complex => self.f2_max_complex,
            };
            for n in 0..=f2_max {
                for k in 0..=self.k_max {
                    out.push(verify_f2(n, k, field)?);
                }
            }
            for n in 0..=self.degenerate_max {
                for k in 1..=self.k_max.max(1) {
                    out.push(verify_degenerate_conjecture(n, k, field)?);
                }
                out.push(verify_degenerate_corollary(n, field)?);
            }
        }
        Ok(out)
    }
}
