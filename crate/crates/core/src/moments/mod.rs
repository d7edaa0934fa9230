//! Closed-form determinantal moments.
//!
//! Three random variables on two-qubit density matrices are covered:
//! `|ρ^PT|` (optionally weighted by `|ρ|^k`), the difference
//! `|ρ^PT| − |ρ|`, and `|ρ₀^PT|` for minimally degenerate states. All
//! evaluators are exact whenever the Dyson index is rational.

mod closed_forms;
mod io;
mod p_alpha;

pub use closed_forms::{cross_alpha_fit, ClosedFormCase};
pub use io::SCHEMA_VERSION;
pub use p_alpha::{
    f_term, known_probability, p_concise, p_concise_with, PSeries, KNOWN_PROBABILITIES,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{
    binomial, pochhammer, terminating_pfq, terminating_pfq_limit, AffineParam, ExactError,
    ParamValue, Rational,
};
use crate::reconstruct::Interval;

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("Dyson index must be positive, got {0}")]
    InvalidAlpha(String),
    #[error("the degenerate variable is only defined at k = 0 (got k = {0})")]
    DegenerateRequiresK0(u32),
    #[error("n_max must be at least 1")]
    EmptySequence,
    #[error("epsilon must be positive")]
    InvalidEpsilon,
    #[error("P(α) series terms did not settle into geometric decay after {terms} terms")]
    TailNotGeometric { terms: usize },
    #[error("unknown variable {0:?} (expected pt_det, diff or degenerate)")]
    UnknownVariable(String),
    #[error("malformed moment file: {0}")]
    Format(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

pub type Result<T, E = MomentError> = std::result::Result<T, E>;

/// The random-matrix parameter α: 1/2 real, 1 complex, 2 quaternionic.
#[derive(Clone, Debug, PartialEq)]
pub struct DysonIndex(ParamValue);

impl DysonIndex {
    pub fn new(alpha: ParamValue) -> Result<Self> {
        if alpha.signum() != std::cmp::Ordering::Greater {
            return Err(MomentError::InvalidAlpha(alpha.to_string()));
        }
        Ok(DysonIndex(alpha))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        Self::new(ParamValue::ratio(num, den))
    }

    pub fn value(&self) -> &ParamValue {
        &self.0
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.0.as_rational()
    }

    /// α ∈ ½ℤ, where every gamma ratio in `f(α)` reduces to a rational.
    pub fn is_half_integer(&self) -> bool {
        self.as_rational()
            .map(|r| Rational::from(r * 2u32).is_integer())
            .unwrap_or(false)
    }

    /// Same index as a real at `precision_bits`.
    pub fn to_real(&self, precision_bits: u32) -> DysonIndex {
        DysonIndex(ParamValue::Real(self.0.to_real(precision_bits)))
    }

    pub fn shifted(&self, by: i64) -> DysonIndex {
        DysonIndex(&self.0 + ParamValue::int(by))
    }
}

impl FromStr for DysonIndex {
    type Err = MomentError;

    /// Exact fractions only (`"1/2"`, `"2"`).
    fn from_str(s: &str) -> Result<Self> {
        let r = crate::exact::parse_fraction(s)?;
        DysonIndex::new(ParamValue::Exact(r))
    }
}

impl fmt::Display for DysonIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which determinantal variable a moment sequence describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// `|ρ^PT|`, normalised by `⟨|ρ|^k⟩`.
    PtDet,
    /// `|ρ^PT| − |ρ|`, normalised by `⟨|ρ|^k⟩`.
    Diff,
    /// `|ρ₀^PT|` over minimally degenerate states.
    Degenerate,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::PtDet => "pt_det",
            Variable::Diff => "diff",
            Variable::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = MomentError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pt_det" | "ptdet" => Ok(Variable::PtDet),
            "diff" => Ok(Variable::Diff),
            "degenerate" => Ok(Variable::Degenerate),
            other => Err(MomentError::UnknownVariable(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentSpec {
    pub variable: Variable,
    pub alpha: DysonIndex,
    pub k: u32,
}

impl MomentSpec {
    pub fn new(variable: Variable, alpha: DysonIndex, k: u32) -> Result<Self> {
        if variable == Variable::Degenerate && k != 0 {
            return Err(MomentError::DegenerateRequiresK0(k));
        }
        Ok(MomentSpec { variable, alpha, k })
    }

    /// Support of the variable.
    pub fn interval(&self) -> Interval {
        match self.variable {
            Variable::Diff | Variable::Degenerate => Interval::diff_range(),
            Variable::PtDet => Interval::pt_det_range(),
        }
    }

    /// `μ_n` for this variable.
    pub fn moment(&self, n: u32) -> Result<ParamValue> {
        match self.variable {
            Variable::PtDet => moment_ptdet(n, self.k, &self.alpha),
            Variable::Diff => f2_closed(n, self.k, &self.alpha),
            Variable::Degenerate => degenerate_moment(n, &self.alpha),
        }
    }
}

/// Moments `μ_0..μ_N` of one variable. `values[0]` is always 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    pub spec: MomentSpec,
    pub values: Vec<ParamValue>,
    pub interval: Interval,
    /// Moment transforms applied since the sequence was built, oldest first.
    pub transforms: Vec<String>,
}

impl MomentSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn is_exact(&self) -> bool {
        self.values.iter().all(ParamValue::is_exact)
    }
}

fn half() -> ParamValue {
    ParamValue::ratio(1, 2)
}

fn int(n: impl Into<i64>) -> ParamValue {
    ParamValue::int(n.into())
}

fn sign(n: u32) -> ParamValue {
    if n.is_multiple_of(2) {
        ParamValue::one()
    } else {
        ParamValue::int(-1)
    }
}

fn pow2_inv(bits: u32) -> ParamValue {
    ParamValue::Exact(Rational::from(1) >> bits)
}

/// `g(k,n) = (k+1)_n (k+1+α)_n (k+1+2α)_n / (2^{6n} (k+3α+3/2)_n (2k+6α+5/2)_{2n})`.
///
/// `g(0,k) = ⟨|ρ|^k⟩` and `g(0,k) g(k,n) = g(0,k+n)`.
pub fn g_factor(k: u32, n: u32, alpha: &DysonIndex) -> ParamValue {
    let a = alpha.value();
    let k1 = int(k + 1);
    let num = pochhammer(&k1, n) * pochhammer(&(&k1 + a), n) * pochhammer(&(&k1 + a * int(2)), n);
    let den = pochhammer(&(int(k) + a * int(3) + ParamValue::ratio(3, 2)), n)
        * pochhammer(&(int(2 * k) + a * int(6) + ParamValue::ratio(5, 2)), 2 * n);
    num / den * pow2_inv(6 * n)
}

/// The terminating `5F4` factor `h(k,n)` with unit argument.
///
/// Upper parameters `-n, -k, α, α+1/2, -2k-2n-1-5α`, lower
/// `-k-n-α, -k-n-2α, -(k+n)/2, -(k+n-1)/2`. At integer `k` several of those
/// Pochhammer symbols vanish together; the series is read as a rational
/// function of `k` and evaluated in the limit.
pub fn h_factor(k: u32, n: u32, alpha: &DysonIndex) -> Result<ParamValue> {
    let a = alpha.value();
    let nn = int(n);
    let q = |num: i64, den: i64| Rational::from((num, den));
    let upper = [
        AffineParam::constant(-&nn),
        AffineParam::new(ParamValue::zero(), q(-1, 1)),
        AffineParam::constant(a.clone()),
        AffineParam::constant(a + half()),
        AffineParam::new(int(-2 * i64::from(n) - 1) - a * int(5), q(-2, 1)),
    ];
    let lower = [
        AffineParam::new(-&nn - a, q(-1, 1)),
        AffineParam::new(-&nn - a * int(2), q(-1, 1)),
        AffineParam::new(ParamValue::ratio(-i64::from(n), 2), q(-1, 2)),
        AffineParam::new(ParamValue::ratio(1 - i64::from(n), 2), q(-1, 2)),
    ];
    Ok(terminating_pfq_limit(
        &upper,
        &lower,
        &ParamValue::one(),
        &Rational::from(k),
    )?)
}

/// `⟨|ρ^PT|^n |ρ|^k⟩ / ⟨|ρ|^k⟩ = g(k,n) h(k,n)`.
pub fn moment_ptdet(n: u32, k: u32, alpha: &DysonIndex) -> Result<ParamValue> {
    Ok(g_factor(k, n, alpha) * h_factor(k, n, alpha)?)
}

/// `⟨|ρ^PT|^n⟩` from the original two-term `5F4` moment formula.
///
/// That formula is stated for `n ≥ 1`; `n = 0` returns 1.
pub fn moment_ptdet_two_term(n: u32, alpha: &DysonIndex) -> Result<ParamValue> {
    if n == 0 {
        return Ok(ParamValue::one());
    }
    let a = alpha.value();
    let nn = int(n);
    let two_a = a * int(2);
    let common = pochhammer(&(a * int(3) + ParamValue::ratio(3, 2)), n)
        * pochhammer(&(a * int(6) + ParamValue::ratio(5, 2)), 2 * n);

    let first = ParamValue::Exact(Rational::from(crate::exact::factorial(n)))
        * pochhammer(&(a + int(1)), n)
        * pochhammer(&(&two_a + int(1)), n)
        * pow2_inv(6 * n)
        / &common;

    let second_front = pochhammer(&(int(-2 * i64::from(n) - 1) - a * int(5)), n)
        * pochhammer(a, n)
        * pochhammer(&(a + half()), n)
        * pow2_inv(4 * n)
        / &common;
    let upper = [
        ParamValue::ratio(2 - i64::from(n), 2),
        ParamValue::ratio(1 - i64::from(n), 2),
        -&nn,
        a + int(1),
        &two_a + int(1),
    ];
    let lower = [
        int(1) - &nn,
        &nn + int(2) + a * int(5),
        int(1) - &nn - a,
        half() - &nn - a,
    ];
    let series = terminating_pfq(&upper, &lower, &ParamValue::one())?;
    Ok(first + second_front * series)
}

/// The balanced `4F3(-n/2, (1-n)/2, k+1+α, k+1+2α; 1-n-α, 1/2-n-α, n+2k+2+5α; 1)`
/// shared by the difference and degenerate moments.
fn balanced_4f3(n: u32, k: u32, alpha: &DysonIndex) -> Result<ParamValue> {
    let a = alpha.value();
    let nn = int(n);
    let k1 = int(k + 1);
    let upper = [
        ParamValue::ratio(-i64::from(n), 2),
        ParamValue::ratio(1 - i64::from(n), 2),
        &k1 + a,
        &k1 + a * int(2),
    ];
    let lower = [
        int(1) - &nn - a,
        half() - &nn - a,
        &nn + int(2 * k + 2) + a * int(5),
    ];
    Ok(terminating_pfq(&upper, &lower, &ParamValue::one())?)
}

/// `F₂(n,k) = ⟨|ρ|^k (|ρ^PT| − |ρ|)^n⟩ / ⟨|ρ|^k⟩` in closed form: front factor
/// `(-1)^n (α)_n (α+1/2)_n (n+2k+2+5α)_n / (2^{4n} (k+3α+3/2)_n (2k+6α+5/2)_{2n})`
/// times the balanced `4F3`.
pub fn f2_closed(n: u32, k: u32, alpha: &DysonIndex) -> Result<ParamValue> {
    let a = alpha.value();
    let front = sign(n)
        * pochhammer(a, n)
        * pochhammer(&(a + half()), n)
        * pochhammer(&(int(n + 2 * k + 2) + a * int(5)), n)
        * pow2_inv(4 * n)
        / (pochhammer(&(int(k) + a * int(3) + ParamValue::ratio(3, 2)), n)
            * pochhammer(&(int(2 * k) + a * int(6) + ParamValue::ratio(5, 2)), 2 * n));
    Ok(front * balanced_4f3(n, k, alpha)?)
}

/// `F₂(n,k)` by binomial expansion of `(|ρ^PT| − |ρ|)^n` into mixed moments:
/// `g(k,n) Σ_j C(n,j) (-1)^{n-j} h(k+n-j, j)`.
pub fn f2_via_binomial(n: u32, k: u32, alpha: &DysonIndex) -> Result<ParamValue> {
    let mut sum = ParamValue::zero();
    for j in 0..=n {
        let c = ParamValue::Exact(Rational::from(binomial(n, j)));
        let term = c * sign(n - j) * h_factor(k + n - j, j, alpha)?;
        sum = sum + term;
    }
    Ok(g_factor(k, n, alpha) * sum)
}

/// `(2+4k+10α+3n)(3+4k+12α+4n) / ((2+4k+10α+4n)(3+4k+12α))`, the factor
/// relating `|ρ|^k`-weighted degenerate moments to `F₂(n,k)`.
pub fn weighted_degenerate_ratio(n: u32, k: u32, alpha: &DysonIndex) -> ParamValue {
    let a = alpha.value();
    let ten_a = a * int(10);
    let twelve_a = a * int(12);
    let base2 = int(2 + 4 * k) + &ten_a;
    let base3 = int(3 + 4 * k) + &twelve_a;
    let num = (&base2 + int(3 * n)) * (&base3 + int(4 * n));
    let den = (&base2 + int(4 * n)) * base3;
    num / den
}

/// `(10α+3n+2)(12α+4n+3) / ((12α+3)(10α+4n+2))`; equals 1 at `n = 0`.
pub fn degenerate_ratio(n: u32, alpha: &DysonIndex) -> ParamValue {
    weighted_degenerate_ratio(n, 0, alpha)
}

/// `⟨|ρ₀^PT|^n⟩` over minimally degenerate states, from its own closed form
/// (not via [`degenerate_ratio`]).
pub fn degenerate_moment(n: u32, alpha: &DysonIndex) -> Result<ParamValue> {
    let a = alpha.value();
    let ten_a = a * int(10);
    let front = sign(n)
        * pochhammer(a, n)
        * pochhammer(&(a + half()), n)
        * pochhammer(&(int(n + 1) + a * int(5)), n)
        * (int(2 + 3 * n) + &ten_a)
        * pow2_inv(4 * n)
        / (pochhammer(&(a * int(3) + ParamValue::ratio(3, 2)), n)
            * pochhammer(&(a * int(6) + ParamValue::ratio(3, 2)), 2 * n)
            * (int(2 + 2 * n) + &ten_a));
    Ok(front * balanced_4f3(n, 0, alpha)?)
}

/// Moments `0..=n_max` of the requested variable, exact for rational α.
/// Indices are evaluated in parallel and assembled in order.
pub fn build_sequence(spec: &MomentSpec, n_max: u32) -> Result<MomentSequence> {
    if n_max < 1 {
        return Err(MomentError::EmptySequence);
    }
    build_sequence_upto(spec, n_max)
}

/// Like [`build_sequence`] but computed in MPFR arithmetic at
/// `precision_bits`, which is far cheaper than exact rationals at high order.
pub fn build_sequence_real(
    spec: &MomentSpec,
    n_max: u32,
    precision_bits: u32,
) -> Result<MomentSequence> {
    if n_max < 1 {
        return Err(MomentError::EmptySequence);
    }
    let real_spec = MomentSpec {
        alpha: spec.alpha.to_real(precision_bits),
        ..spec.clone()
    };
    let mut seq = build_sequence_upto(&real_spec, n_max)?;
    seq.spec = spec.clone();
    Ok(seq)
}

/// Zero-length-safe builder used by the CLI, where `n_max = 0` yields `[1]`.
pub fn build_sequence_upto(spec: &MomentSpec, n_max: u32) -> Result<MomentSequence> {
    let values = (0..=n_max)
        .into_par_iter()
        .map(|n| spec.moment(n))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence {
        spec: spec.clone(),
        values,
        interval: spec.interval(),
        transforms: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(num: i64, den: i64) -> DysonIndex {
        DysonIndex::ratio(num, den).unwrap()
    }

    fn q(num: i64, den: i64) -> ParamValue {
        ParamValue::ratio(num, den)
    }

    #[test]
    fn g_examples() {
        let a1 = alpha(1, 1);
        assert_eq!(g_factor(3, 0, &a1), ParamValue::one());
        assert_eq!(g_factor(0, 1, &a1), q(1, 3876));
        assert_eq!(
            g_factor(0, 2, &a1),
            g_factor(0, 1, &a1) * g_factor(1, 1, &a1)
        );
    }

    #[test]
    fn g_multiplication_relation() {
        for a in [alpha(1, 2), alpha(1, 1), alpha(7, 3)] {
            for k in 0..=10 {
                for n in 0..=10 {
                    assert_eq!(
                        g_factor(0, k, &a) * g_factor(k, n, &a),
                        g_factor(0, k + n, &a)
                    );
                }
            }
        }
    }

    #[test]
    fn h_examples() {
        let a1 = alpha(1, 1);
        for k in 0..5 {
            assert_eq!(h_factor(k, 0, &a1).unwrap(), ParamValue::one());
        }
        assert_eq!(
            g_factor(0, 1, &a1) * h_factor(0, 1, &a1).unwrap(),
            q(-7, 3876)
        );
    }

    #[test]
    fn ptdet_examples() {
        let a1 = alpha(1, 1);
        assert_eq!(moment_ptdet(0, 3, &a1).unwrap(), ParamValue::one());
        assert_eq!(moment_ptdet(1, 0, &a1).unwrap(), q(-7, 3876));
        assert_eq!(moment_ptdet_two_term(1, &a1).unwrap(), q(-7, 3876));
    }

    #[test]
    fn ptdet_two_routes_agree() {
        for a in [
            alpha(1, 2),
            alpha(1, 1),
            alpha(3, 2),
            alpha(2, 1),
            alpha(5, 2),
        ] {
            for n in 0..=8 {
                assert_eq!(
                    moment_ptdet(n, 0, &a).unwrap(),
                    moment_ptdet_two_term(n, &a).unwrap(),
                    "n={n} alpha={a}"
                );
            }
        }
    }

    #[test]
    fn f2_examples() {
        let a1 = alpha(1, 1);
        assert_eq!(f2_closed(0, 3, &a1).unwrap(), ParamValue::one());
        assert_eq!(f2_closed(1, 0, &a1).unwrap(), q(-2, 969));
        assert_eq!(
            f2_closed(1, 0, &a1).unwrap(),
            moment_ptdet(1, 0, &a1).unwrap() - g_factor(0, 1, &a1)
        );
        assert_eq!(f2_closed(1, 0, &alpha(1, 2)).unwrap(), q(-1, 624));
        assert_eq!(f2_via_binomial(0, 2, &a1).unwrap(), ParamValue::one());
        assert_eq!(f2_via_binomial(1, 0, &a1).unwrap(), q(-2, 969));
        let a32 = alpha(3, 2);
        assert_eq!(
            f2_via_binomial(3, 2, &a32).unwrap(),
            f2_closed(3, 2, &a32).unwrap()
        );
    }

    #[test]
    fn degenerate_examples() {
        assert_eq!(degenerate_ratio(0, &alpha(1, 1)), ParamValue::one());
        assert_eq!(degenerate_ratio(1, &alpha(1, 2)), q(130, 99));
        assert_eq!(degenerate_ratio(1, &alpha(1, 1)), q(19, 16));
        assert_eq!(
            degenerate_moment(0, &alpha(1, 1)).unwrap(),
            ParamValue::one()
        );
        assert_eq!(degenerate_moment(1, &alpha(1, 2)).unwrap(), q(-5, 2376));
        assert_eq!(degenerate_moment(1, &alpha(1, 1)).unwrap(), q(-19, 7752));
    }

    #[test]
    fn degenerate_moment_is_ratio_times_f2() {
        for a in [alpha(1, 2), alpha(1, 1), alpha(2, 1), alpha(7, 3)] {
            for n in 0..=50 {
                let lhs = degenerate_moment(n, &a).unwrap();
                let rhs = f2_closed(n, 0, &a).unwrap() * degenerate_ratio(n, &a);
                assert_eq!(lhs, rhs, "n={n} alpha={a}");
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            MomentSpec::new(Variable::Degenerate, alpha(1, 1), 1),
            Err(MomentError::DegenerateRequiresK0(1))
        ));
        assert!(DysonIndex::ratio(0, 1).is_err());
        assert!(DysonIndex::ratio(-1, 2).is_err());
        assert!("0.5".parse::<DysonIndex>().is_err());
        assert_eq!("1/2".parse::<DysonIndex>().unwrap(), alpha(1, 2));
    }

    #[test]
    fn sequences() {
        let spec = MomentSpec::new(Variable::Diff, alpha(1, 1), 0).unwrap();
        let seq = build_sequence(&spec, 1).unwrap();
        assert_eq!(seq.values, vec![ParamValue::one(), q(-2, 969)]);
        assert_eq!(seq.interval, Interval::diff_range());

        let spec = MomentSpec::new(Variable::Degenerate, alpha(1, 2), 0).unwrap();
        let seq = build_sequence(&spec, 1).unwrap();
        assert_eq!(seq.values, vec![ParamValue::one(), q(-5, 2376)]);

        let spec = MomentSpec::new(Variable::PtDet, alpha(2, 1), 0).unwrap();
        let seq = build_sequence(&spec, 4).unwrap();
        assert_eq!(seq.values[0], ParamValue::one());
        assert_eq!(seq.interval, Interval::pt_det_range());

        assert!(matches!(
            build_sequence(&spec, 0),
            Err(MomentError::EmptySequence)
        ));
        assert_eq!(
            build_sequence_upto(&spec, 0).unwrap().values,
            vec![ParamValue::one()]
        );
    }

    #[test]
    fn real_sequence_tracks_exact() {
        let spec = MomentSpec::new(Variable::Diff, alpha(1, 1), 0).unwrap();
        let exact = build_sequence(&spec, 40).unwrap();
        let real = build_sequence_real(&spec, 40, 300).unwrap();
        for (e, r) in exact.values.iter().zip(&real.values) {
            assert_eq!(r.precision_bits(), Some(300));
            let rel = ((e.to_f64() - r.to_f64()) / e.to_f64()).abs();
            assert!(rel < 1e-14);
        }
    }
}
