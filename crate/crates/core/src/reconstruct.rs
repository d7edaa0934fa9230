//! Legendre-polynomial density reconstruction from a finite moment sequence.
//!
//! A density `f` on `[lo, hi]` is approximated by `Σ_j λ_j P_j(s)` with
//! `s = (2x - lo - hi)/(hi - lo)` and `λ_j = (2j+1)/(hi-lo) E[P_j(s)]`, which
//! matches the first `N+1` moments exactly. Integrals of the expansion give
//! cumulative probabilities, in particular the mass on the positive side of a
//! determinant's range.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{
    binomial, factorial, BigReal, ExactError, Float, Integer, ParamValue, Rational,
};
use crate::moments::{
    build_sequence, build_sequence_real, known_probability, p_concise_with, DysonIndex,
    MomentError, MomentSequence, MomentSpec, Variable,
};

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("interval must satisfy lo < hi (got [{lo}, {hi}])")]
    InvalidInterval { lo: String, hi: String },
    #[error("degree {degree} needs {needed} moments but only {available} are available")]
    NotEnoughMoments {
        degree: usize,
        needed: usize,
        available: usize,
    },
    #[error("moment sequence is not normalised (μ_0 = {0})")]
    NotNormalized(String),
    #[error("integration bounds [{a}, {b}] are not an ordered subinterval of the support")]
    BadBounds { a: String, b: String },
    #[error("working precision too low: rounding error bound {bound:e} exceeds {limit:e}; raise the precision")]
    PrecisionTooLow { bound: f64, limit: f64 },
    #[error("invalid transform parameter: {0}")]
    InvalidTransform(String),
    #[error("transformed sequences differ at n = {n}")]
    MomentMismatch { n: usize },
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

pub type Result<T, E = ReconstructError> = std::result::Result<T, E>;

/// Closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return Err(ReconstructError::InvalidInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Interval { lo, hi })
    }

    /// `[-1/16, 1/432]`, the range of `|ρ^PT| − |ρ|` and of `|ρ₀^PT|`.
    pub fn diff_range() -> Self {
        Interval {
            lo: Rational::from((-1, 16)),
            hi: Rational::from((1, 432)),
        }
    }

    /// `[-1/16, 1/256]`, the range of `|ρ^PT|`.
    pub fn pt_det_range() -> Self {
        Interval {
            lo: Rational::from((-1, 16)),
            hi: Rational::from((1, 256)),
        }
    }

    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// `s(x) = (2x - lo - hi)/(hi - lo)`, mapping the interval onto `[-1, 1]`.
    pub fn to_reference(&self, x: &Rational) -> Rational {
        (Rational::from(x * 2) - &self.lo - &self.hi) / self.width()
    }

    /// `(P, Q, R)` integers with `R > 0` and `s(x) = (P x + Q)/R`.
    fn integer_map(&self) -> (Integer, Integer, Integer) {
        let w = self.width();
        let a = Rational::from(2) / &w;
        let b = -Rational::from(&self.lo + &self.hi) / &w;
        let r = a.denom().clone().lcm(b.denom());
        let p = a.numer() * Integer::from(&r / a.denom());
        let q = b.numer() * Integer::from(&r / b.denom());
        (p, q, r)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Arithmetic used for a fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Exact,
    Bits(u32),
}

/// Degrees above this default to MPFR arithmetic.
pub const EXACT_DEGREE_LIMIT: usize = 400;

impl Precision {
    /// Bits for an MPFR fit at `degree`: `max(256, 4·degree + 256)`.
    /// Legendre coefficients on the reference variable grow like `4^degree`.
    pub fn bits_for_degree(degree: usize) -> u32 {
        (4 * degree as u32 + 256).max(256)
    }

    /// Exact through [`EXACT_DEGREE_LIMIT`], MPFR above.
    pub fn for_degree(degree: usize) -> Self {
        if degree <= EXACT_DEGREE_LIMIT {
            Precision::Exact
        } else {
            Precision::Bits(Self::bits_for_degree(degree))
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Exact => f.write_str("exact"),
            Precision::Bits(b) => write!(f, "{b}"),
        }
    }
}

/// Largest acceptable rounding-error bound on any MPFR-mode integral.
pub const ROUNDING_LIMIT: f64 = 1e-24;

/// Fitted density `Σ_{j=0}^{N} λ_j P_j(s(x))`.
#[derive(Clone, Debug)]
pub struct LegendreExpansion {
    pub interval: Interval,
    pub coefficients: Vec<ParamValue>,
    pub precision: Precision,
    /// Bound on `Σ_j |δλ_j| (hi-lo)/(2j+1)` from rounding; zero when exact.
    pub rounding_bound: f64,
}

/// Legendre coefficients `ℓ_{j,m}` with `2^j P_j(s) = Σ_m ℓ_{j,m} s^m`,
/// nonzero only for `m ≡ j (mod 2)`.
fn legendre_integer_row(j: usize) -> Vec<(usize, Integer)> {
    (0..=j / 2)
        .map(|k| {
            let mut c = binomial(j as u32, k as u32) * binomial((2 * j - 2 * k) as u32, j as u32);
            if k % 2 == 1 {
                c = -c;
            }
            (j - 2 * k, c)
        })
        .collect()
}

/// Monomial coefficients of `P_j(s(t))`, `j = 0..=degree`, with `s` the map
/// from `interval` onto `[-1, 1]`. Row `j` has `j + 1` entries, constant
/// term first.
pub fn shifted_legendre_coefficients(degree: usize, interval: &Interval) -> Vec<Vec<Rational>> {
    let w = interval.width();
    let a = Rational::from(2) / &w;
    let b = -Rational::from(&interval.lo + &interval.hi) / &w;
    let mut rows: Vec<Vec<Rational>> = vec![vec![Rational::from(1)]];
    if degree >= 1 {
        rows.push(vec![b.clone(), a.clone()]);
    }
    for j in 1..degree {
        // (j+1) P_{j+1} = (2j+1) s P_j - j P_{j-1}
        let mut next = vec![Rational::new(); j + 2];
        for (i, c) in rows[j].iter().enumerate() {
            next[i] += Rational::from(c * &b);
            next[i + 1] += Rational::from(c * &a);
        }
        for c in next.iter_mut() {
            *c *= (2 * j + 1) as u32;
        }
        for (i, c) in rows[j - 1].iter().enumerate() {
            next[i] -= Rational::from(c * j as u32);
        }
        for c in next.iter_mut() {
            *c /= (j + 1) as u32;
        }
        rows.push(next);
    }
    rows
}

fn check_input(moments: &MomentSequence, degree: usize) -> Result<()> {
    if moments.values.len() <= degree {
        return Err(ReconstructError::NotEnoughMoments {
            degree,
            needed: degree + 1,
            available: moments.values.len(),
        });
    }
    let mu0 = &moments.values[0];
    let one = ParamValue::one();
    let normalised = match mu0 {
        ParamValue::Exact(r) => *r == 1,
        ParamValue::Real(_) => (mu0 - &one).abs().to_f64() < 1e-30,
    };
    if !normalised {
        return Err(ReconstructError::NotNormalized(mu0.to_string()));
    }
    Ok(())
}

/// Fits the degree-`degree` Legendre expansion to `moments`.
pub fn fit_density(
    moments: &MomentSequence,
    degree: usize,
    precision: Precision,
) -> Result<LegendreExpansion> {
    check_input(moments, degree)?;
    match precision {
        Precision::Exact => fit_exact(moments, degree),
        Precision::Bits(bits) => fit_real(moments, degree, bits),
    }
}

/// Exact fit in integer arithmetic. With `μ_i = M_i / D` and
/// `s = (P x + Q)/R`, `T_m = D R^m E[s^m] = Σ_i C(m,i) P^i Q^{m-i} M_i` is an
/// integer, and so is `2^j D R^j E[P_j(s)] = Σ_m ℓ_{j,m} R^{j-m} T_m`.
fn fit_exact(moments: &MomentSequence, degree: usize) -> Result<LegendreExpansion> {
    let mus: Vec<Rational> = moments.values[..=degree]
        .iter()
        .map(|v| {
            v.as_rational().cloned().ok_or_else(|| {
                ReconstructError::InvalidTransform("exact fit needs exact moments".into())
            })
        })
        .collect::<Result<_>>()?;
    let d = mus
        .iter()
        .fold(Integer::from(1), |acc, m| acc.lcm(m.denom()));
    let scaled: Vec<Integer> = mus
        .iter()
        .map(|m| Integer::from(&d / m.denom()) * m.numer())
        .collect();

    let interval = &moments.interval;
    let (p, q, r) = interval.integer_map();
    let p_pow: Vec<Integer> = powers(&p, degree);
    let q_pow: Vec<Integer> = powers(&q, degree);
    let r_pow: Vec<Integer> = powers(&r, degree);

    let t: Vec<Integer> = (0..=degree)
        .into_par_iter()
        .map(|m| {
            let mut acc = Integer::new();
            for (i, mi) in scaled.iter().enumerate().take(m + 1) {
                let coeff = binomial(m as u32, i as u32) * &p_pow[i] * &q_pow[m - i];
                acc += coeff * mi;
            }
            acc
        })
        .collect();

    let w = interval.width();
    let coefficients: Vec<ParamValue> = (0..=degree)
        .into_par_iter()
        .map(|j| {
            let mut acc = Integer::new();
            for (m, l) in legendre_integer_row(j) {
                acc += l * &r_pow[j - m] * &t[m];
            }
            let scale = Integer::from(&d * &r_pow[j]) << j as u32;
            let expectation = Rational::from((acc, scale));
            ParamValue::Exact(expectation * Rational::from(2 * j + 1) / &w)
        })
        .collect();

    Ok(LegendreExpansion {
        interval: interval.clone(),
        coefficients,
        precision: Precision::Exact,
        rounding_bound: 0.0,
    })
}

fn powers(base: &Integer, n: usize) -> Vec<Integer> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Integer::from(1));
    for i in 0..n {
        out.push(Integer::from(&out[i] * base));
    }
    out
}

/// MPFR fit. Alongside each value a low-precision magnitude sum of the same
/// terms is kept; cancellation is what turns those magnitudes into error, so
/// `magnitude · 2^{-bits}` bounds the rounding damage.
fn fit_real(moments: &MomentSequence, degree: usize, bits: u32) -> Result<LegendreExpansion> {
    const MAG_BITS: u32 = 64;
    let mus: Vec<Float> = moments.values[..=degree]
        .iter()
        .map(|v| v.to_real(bits).into_float())
        .collect();
    let mu_mag: Vec<Float> = mus
        .iter()
        .map(|m| Float::with_val(MAG_BITS, m.abs_ref()))
        .collect();

    let interval = &moments.interval;
    let w = interval.width();
    let a = Float::with_val(bits, Rational::from(2) / &w);
    let b = Float::with_val(bits, -Rational::from(&interval.lo + &interval.hi) / &w);
    let a_pow = float_powers(&a, degree);
    let b_pow = float_powers(&b, degree);
    let a_mag = float_powers(&Float::with_val(MAG_BITS, a.abs_ref()), degree);
    let b_mag = float_powers(&Float::with_val(MAG_BITS, b.abs_ref()), degree);

    // E[s^m] and Σ|terms| per m
    let reference: Vec<(Float, Float)> = (0..=degree)
        .into_par_iter()
        .map(|m| {
            let mut acc = Float::with_val(bits, 0);
            let mut mag = Float::with_val(MAG_BITS, 0);
            for i in 0..=m {
                let c = binomial(m as u32, i as u32);
                acc += Float::with_val(bits, &a_pow[i] * &b_pow[m - i]) * &c * &mus[i];
                mag += Float::with_val(MAG_BITS, &a_mag[i] * &b_mag[m - i]) * &c * &mu_mag[i];
            }
            (acc, mag)
        })
        .collect();

    let w_float = Float::with_val(bits, &w);
    let eps = Float::with_val(MAG_BITS, Float::i_exp(1, -(bits as i32)));
    let results: Vec<(ParamValue, f64)> = (0..=degree)
        .into_par_iter()
        .map(|j| {
            let mut acc = Float::with_val(bits, 0);
            let mut mag = Float::with_val(MAG_BITS, 0);
            for (m, l) in legendre_integer_row(j) {
                acc += Float::with_val(bits, &reference[m].0 * &l);
                mag += Float::with_val(MAG_BITS, &reference[m].1 * &l).abs();
            }
            acc >>= j as u32;
            mag >>= j as u32;
            let lambda = acc * (2 * j + 1) as u32 / &w_float;
            // rounding in λ_j, weighted by the largest integral of P_j over the interval
            let err = Float::with_val(MAG_BITS, &mag * &eps) * ((degree + 2) * 2) as u32;
            (ParamValue::Real(BigReal::new(lambda)), err.to_f64())
        })
        .collect();

    let rounding_bound = results.iter().map(|(_, e)| *e).sum::<f64>();
    if !(rounding_bound <= ROUNDING_LIMIT) {
        return Err(ReconstructError::PrecisionTooLow {
            bound: rounding_bound,
            limit: ROUNDING_LIMIT,
        });
    }
    let coefficients = results.into_iter().map(|(c, _)| c).collect();
    Ok(LegendreExpansion {
        interval: interval.clone(),
        coefficients,
        precision: Precision::Bits(bits),
        rounding_bound,
    })
}

fn float_powers(base: &Float, n: usize) -> Vec<Float> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Float::with_val(base.prec(), 1));
    for i in 0..n {
        out.push(Float::with_val(base.prec(), &out[i] * base));
    }
    out
}

/// `P_0(s), …, P_{n}(s)` by the three-term recurrence.
fn legendre_values(s: &ParamValue, n: usize) -> Vec<ParamValue> {
    let mut out = vec![ParamValue::one()];
    if n >= 1 {
        out.push(s.clone());
    }
    for j in 1..n {
        let next = (ParamValue::int(2 * j as i64 + 1) * s * &out[j]
            - ParamValue::int(j as i64) * &out[j - 1])
            / ParamValue::int(j as i64 + 1);
        out.push(next);
    }
    out
}

/// `∫_{-1}^{1} s^m P_j(s) ds`.
fn monomial_legendre_integral(m: usize, j: usize) -> Rational {
    if m < j || (m - j) % 2 == 1 {
        return Rational::new();
    }
    let half_sum = ((m + j) / 2) as u32;
    let half_diff = ((m - j) / 2) as u32;
    let num = (Integer::from(1) << (j as u32 + 1)) * factorial(m as u32) * factorial(half_sum);
    let den = factorial(half_diff) * factorial((m + j + 1) as u32);
    Rational::from((num, den))
}

impl LegendreExpansion {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    fn reference_point(&self, x: &Rational) -> ParamValue {
        let s = ParamValue::Exact(self.interval.to_reference(x));
        match self.precision {
            Precision::Exact => s,
            Precision::Bits(bits) => s.demote(bits),
        }
    }

    /// `∫ x^n f(x) dx` of the expansion over its interval, through
    /// `∫ s^m P_j(s) ds` rather than the fitting formulas. Reproduces the
    /// input moments for `n ≤ degree`.
    pub fn moment(&self, n: usize) -> ParamValue {
        let w = self.interval.width();
        let c = Rational::from(&self.interval.lo + &self.interval.hi);
        let half_w = Rational::from(&w / 2u32);
        let half_c = Rational::from(&c / 2u32);
        // x = (w/2) s + c/2
        let mut sum = ParamValue::zero();
        for (j, lambda) in self.coefficients.iter().enumerate().take(n + 1) {
            let mut inner = Rational::new();
            for m in j..=n {
                let term = monomial_legendre_integral(m, j);
                if term.cmp0() == Ordering::Equal {
                    continue;
                }
                let coeff = Rational::from(binomial(n as u32, m as u32))
                    * rug::ops::Pow::pow(half_w.clone(), m as u32)
                    * rug::ops::Pow::pow(half_c.clone(), (n - m) as u32);
                inner += coeff * term;
            }
            sum = sum + lambda * ParamValue::Exact(inner * &half_w);
        }
        sum
    }

    /// `∫_a^b f(x) dx`, term by term via
    /// `∫ P_j = (P_{j+1} - P_{j-1})/(2j+1)`. Negative density excursions are
    /// not clipped.
    pub fn prob_between(&self, a: &Rational, b: &Rational) -> Result<ParamValue> {
        if !(self.interval.contains(a) && self.interval.contains(b) && a < b) {
            return Err(ReconstructError::BadBounds {
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        let n = self.degree();
        let antiderivative = |s: &ParamValue| -> Vec<ParamValue> {
            let p = legendre_values(s, n + 1);
            let mut out = vec![s.clone()];
            for j in 1..=n {
                out.push((&p[j + 1] - &p[j - 1]) / ParamValue::int(2 * j as i64 + 1));
            }
            out
        };
        let upper = antiderivative(&self.reference_point(b));
        let lower = antiderivative(&self.reference_point(a));
        let mut sum = ParamValue::zero();
        for (j, lambda) in self.coefficients.iter().enumerate() {
            sum = sum + lambda * (&upper[j] - &lower[j]);
        }
        let half_w = ParamValue::Exact(Rational::from(&self.interval.width() / 2u32));
        Ok(sum * half_w)
    }

    /// Density value at `x`.
    pub fn density(&self, x: &Rational) -> ParamValue {
        let p = legendre_values(&self.reference_point(x), self.degree());
        self.coefficients
            .iter()
            .zip(&p)
            .fold(ParamValue::zero(), |acc, (l, pj)| acc + l * pj)
    }

    /// `points` evenly spaced `(x, f(x))` samples across the interval,
    /// evaluated in MPFR at the precision the degree calls for.
    pub fn density_curve(&self, points: usize) -> Vec<(f64, f64)> {
        let bits = match self.precision {
            Precision::Exact => Precision::bits_for_degree(self.degree()),
            Precision::Bits(b) => b,
        };
        let lambdas: Vec<Float> = self
            .coefficients
            .iter()
            .map(|c| c.to_real(bits).into_float())
            .collect();
        let steps = points.max(2) - 1;
        (0..=steps)
            .into_par_iter()
            .map(|i| {
                let x = &self.interval.lo
                    + self.interval.width() * Rational::from((i as i64, steps as i64));
                let s = Float::with_val(bits, self.interval.to_reference(&x));
                let (mut prev, mut cur) = (Float::with_val(bits, 1), s.clone());
                let mut value = Float::with_val(bits, &lambdas[0]);
                if lambdas.len() > 1 {
                    value += Float::with_val(bits, &lambdas[1] * &cur);
                }
                for (j, lambda) in lambdas.iter().enumerate().skip(2) {
                    let k = (j - 1) as u32;
                    let next = (Float::with_val(bits, &s * &cur) * (2 * k + 1)
                        - Float::with_val(bits, &prev * k))
                        / (k + 1);
                    prev = cur;
                    cur = next;
                    value += Float::with_val(bits, lambda * &cur);
                }
                (x.to_f64(), value.to_f64())
            })
            .collect()
    }

    pub fn write_curve_csv<W: Write>(&self, points: usize, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "density"])?;
        for (x, f) in self.density_curve(points) {
            w.write_record([format!("{x:.12e}"), format!("{f:.12e}")])?;
        }
        w.flush()
    }
}

/// `μ_n ↦ γ/(γ+n) μ_n`: the moments of `M(γ)f`, the density of `XY` with
/// `X ~ f` and `Y ~ Beta(γ, 1)` independent.
pub fn transform_m(moments: &MomentSequence, gamma: &ParamValue) -> Result<MomentSequence> {
    if gamma.signum() != Ordering::Greater {
        return Err(ReconstructError::InvalidTransform(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let values = moments
        .values
        .iter()
        .enumerate()
        .map(|(n, mu)| mu * gamma / (gamma + ParamValue::int(n as i64)))
        .collect();
    let mut out = moments.clone();
    out.values = values;
    out.transforms.push(format!("M(gamma={gamma})"));
    Ok(out)
}

/// `μ_n ↦ (γ+δn)/(γ+n) μ_n`: moments of `δ f + (1-δ) M(γ)f`. `δ = 1` is the
/// identity.
pub fn mixture_transform(
    moments: &MomentSequence,
    gamma: &ParamValue,
    delta: &ParamValue,
) -> Result<MomentSequence> {
    if gamma.signum() != Ordering::Greater {
        return Err(ReconstructError::InvalidTransform(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if delta.signum() != Ordering::Greater || *delta > ParamValue::one() {
        return Err(ReconstructError::InvalidTransform(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let values = moments
        .values
        .iter()
        .enumerate()
        .map(|(n, mu)| {
            let n = ParamValue::int(n as i64);
            mu * (gamma + delta * &n) / (gamma + n)
        })
        .collect();
    let mut out = moments.clone();
    out.values = values;
    out.transforms
        .push(format!("mixture(gamma={gamma}, delta={delta})"));
    Ok(out)
}

/// Result of a separability-probability reconstruction.
#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub alpha: DysonIndex,
    pub variable: Variable,
    pub degree: usize,
    pub precision: Precision,
    pub window: (Rational, Rational),
    pub prob_positive: ParamValue,
    pub p_alpha: ParamValue,
    pub ratio: ParamValue,
    pub rounding_bound: f64,
    pub runtime_ms: u128,
    pub expansion: LegendreExpansion,
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    alpha: String,
    variable: &'a str,
    degree: usize,
    moments_used: usize,
    precision: String,
    window: [String; 2],
    prob_positive: String,
    prob_positive_f64: f64,
    p_alpha: f64,
    ratio: f64,
    ratio_digits: String,
    rounding_bound: f64,
    runtime_ms: u128,
}

impl ReconstructionReport {
    pub fn moments_used(&self) -> usize {
        self.degree + 1
    }

    /// `|ratio - 1/2|`.
    pub fn half_error(&self) -> f64 {
        (self.ratio.to_f64() - 0.5).abs()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let digits = |v: &ParamValue| match v {
            ParamValue::Exact(r) => Float::with_val(128, r).to_string_radix(10, Some(30)),
            ParamValue::Real(x) => x.as_float().to_string_radix(10, Some(30)),
        };
        let record = ReportRecord {
            alpha: self.alpha.to_string(),
            variable: self.variable.name(),
            degree: self.degree,
            moments_used: self.moments_used(),
            precision: self.precision.to_string(),
            window: [self.window.0.to_string(), self.window.1.to_string()],
            prob_positive: digits(&self.prob_positive),
            prob_positive_f64: self.prob_positive.to_f64(),
            p_alpha: self.p_alpha.to_f64(),
            ratio: self.ratio.to_f64(),
            ratio_digits: digits(&self.ratio),
            rounding_bound: self.rounding_bound,
            runtime_ms: self.runtime_ms,
        };
        serde_json::to_value(record).expect("report serialises")
    }
}

/// Epsilon used for the `P(α)` normaliser of a ratio.
const P_ALPHA_EPSILON: f64 = 1e-40;

fn p_alpha_value(alpha: &DysonIndex, precision: Precision) -> Result<ParamValue> {
    if let Some(exact) = known_probability(alpha) {
        return Ok(ParamValue::Exact(exact));
    }
    let bits = match precision {
        Precision::Exact => 256,
        Precision::Bits(b) => b,
    };
    Ok(p_concise_with(alpha, P_ALPHA_EPSILON, bits)?.value)
}

/// The default window `[0, 1/432]`: positive values of the variable.
pub fn positive_window() -> (Rational, Rational) {
    (Rational::new(), Rational::from((1, 432)))
}

/// The extended window `[-1/432, 1/432]`.
pub fn extended_window() -> (Rational, Rational) {
    (Rational::from((-1, 432)), Rational::from((1, 432)))
}

/// Mass of the fitted density on `window`, divided by `P(α)`.
pub fn separability_ratio_over(
    alpha: &DysonIndex,
    variable: Variable,
    degree: usize,
    precision: Precision,
    window: (Rational, Rational),
) -> Result<ReconstructionReport> {
    let start = Instant::now();
    let spec = MomentSpec::new(variable, alpha.clone(), 0)?;
    // degree 0 fits the uniform density; the sequence still needs μ_1
    let n_max = degree.max(1) as u32;
    let moments = match precision {
        Precision::Exact => build_sequence(&spec, n_max)?,
        Precision::Bits(bits) => build_sequence_real(&spec, n_max, bits)?,
    };
    let expansion = fit_density(&moments, degree, precision)?;
    let prob_positive = expansion.prob_between(&window.0, &window.1)?;
    let p_alpha = p_alpha_value(alpha, precision)?;
    let ratio = &prob_positive / &p_alpha;
    Ok(ReconstructionReport {
        alpha: alpha.clone(),
        variable,
        degree,
        precision,
        window,
        prob_positive,
        p_alpha,
        ratio,
        rounding_bound: expansion.rounding_bound,
        runtime_ms: start.elapsed().as_millis(),
        expansion,
    })
}

/// [`separability_ratio_over`] on `[0, 1/432]`.
pub fn separability_ratio(
    alpha: &DysonIndex,
    variable: Variable,
    degree: usize,
    precision: Precision,
) -> Result<ReconstructionReport> {
    separability_ratio_over(alpha, variable, degree, precision, positive_window())
}

/// Comparison of two transformed moment sequences that should coincide.
#[derive(Clone, Debug)]
pub struct EqualProbabilityReport {
    pub alpha: DysonIndex,
    pub degree: usize,
    pub sequences_identical: bool,
    pub prob_u1: ParamValue,
    pub prob_u2: ParamValue,
    pub difference: f64,
}

/// `U₁ = M(3α+3/4)` applied to the degenerate moments and
/// `U₂ = 3/4 f + 1/4 M((1+5α)/2) f` applied to the difference moments have
/// equal moments, hence equal positive mass. Checks the sequences exactly
/// and reconstructs both.
pub fn equal_probability_check(
    alpha: &DysonIndex,
    degree: usize,
    precision: Precision,
) -> Result<EqualProbabilityReport> {
    let (u1, u2) = transformed_pair(alpha, degree as u32)?;
    if let Some(n) = u1.values.iter().zip(&u2.values).position(|(a, b)| a != b) {
        return Err(ReconstructError::MomentMismatch { n });
    }
    let (a, b) = positive_window();
    let prob_u1 = fit_density(&u1, degree, precision)?.prob_between(&a, &b)?;
    let prob_u2 = fit_density(&u2, degree, precision)?.prob_between(&a, &b)?;
    let difference = (&prob_u1 - &prob_u2).abs().to_f64();
    Ok(EqualProbabilityReport {
        alpha: alpha.clone(),
        degree,
        sequences_identical: true,
        prob_u1,
        prob_u2,
        difference,
    })
}

/// Exact `(U₁, U₂)` moment sequences up to `n_max`.
pub fn transformed_pair(
    alpha: &DysonIndex,
    n_max: u32,
) -> Result<(MomentSequence, MomentSequence)> {
    let a = alpha.value();
    let degenerate = build_sequence(
        &MomentSpec::new(Variable::Degenerate, alpha.clone(), 0)?,
        n_max,
    )?;
    let diff = build_sequence(&MomentSpec::new(Variable::Diff, alpha.clone(), 0)?, n_max)?;
    let gamma1 = a * ParamValue::int(3) + ParamValue::ratio(3, 4);
    let gamma2 = (ParamValue::one() + a * ParamValue::int(5)) / ParamValue::int(2);
    let u1 = transform_m(&degenerate, &gamma1)?;
    let u2 = mixture_transform(&diff, &gamma2, &ParamValue::ratio(3, 4))?;
    Ok((u1, u2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    /// Moments of the uniform density on `interval`.
    fn uniform_moments(interval: &Interval, n_max: usize) -> MomentSequence {
        let values = (0..=n_max)
            .map(|n| {
                let e = n as u32 + 1;
                let num = rug::ops::Pow::pow(interval.hi.clone(), e)
                    - rug::ops::Pow::pow(interval.lo.clone(), e);
                ParamValue::Exact(num / interval.width() / e)
            })
            .collect();
        let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(1, 1).unwrap(), 0).unwrap();
        MomentSequence {
            spec,
            values,
            interval: interval.clone(),
            transforms: Vec::new(),
        }
    }

    #[test]
    fn coefficient_table_examples() {
        let unit = Interval::new(q(-1, 1), q(1, 1)).unwrap();
        let rows = shifted_legendre_coefficients(2, &unit);
        assert_eq!(rows[0], vec![q(1, 1)]);
        assert_eq!(rows[1], vec![q(0, 1), q(1, 1)]);
        let zero_one = Interval::new(q(0, 1), q(1, 1)).unwrap();
        let rows = shifted_legendre_coefficients(2, &zero_one);
        assert_eq!(rows[2], vec![q(1, 1), q(-6, 1), q(6, 1)]);
    }

    #[test]
    fn uniform_density_fits_constant() {
        let interval = Interval::diff_range();
        let moments = uniform_moments(&interval, 12);
        let e = fit_density(&moments, 12, Precision::Exact).unwrap();
        assert_eq!(
            e.coefficients[0],
            ParamValue::Exact(Rational::from(1) / interval.width())
        );
        assert!(e.coefficients[1..].iter().all(ParamValue::is_zero));
    }

    #[test]
    fn degree_zero_is_uniform() {
        let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(1, 1).unwrap(), 0).unwrap();
        let seq = build_sequence(&spec, 5).unwrap();
        let e = fit_density(&seq, 0, Precision::Exact).unwrap();
        assert_eq!(e.degree(), 0);
        assert_eq!(
            e.coefficients[0],
            ParamValue::Exact(Rational::from(1) / seq.interval.width())
        );
    }

    #[test]
    fn degree_zero_ratio_is_the_uniform_baseline() {
        let r = separability_ratio(
            &DysonIndex::ratio(1, 1).unwrap(),
            Variable::Diff,
            0,
            Precision::Exact,
        )
        .unwrap();
        // uniform on [-1/16, 1/432]: mass 1/28 on [0, 1/432], divided by 8/33
        assert_eq!(r.prob_positive, ParamValue::Exact(q(1, 28)));
        assert_eq!(r.ratio, ParamValue::Exact(q(33, 224)));
    }

    #[test]
    fn uniform_half_mass() {
        let interval = Interval::new(q(-1, 2), q(1, 2)).unwrap();
        let e = fit_density(&uniform_moments(&interval, 6), 6, Precision::Exact).unwrap();
        assert_eq!(
            e.prob_between(&q(0, 1), &q(1, 2)).unwrap(),
            ParamValue::ratio(1, 2)
        );
    }

    #[test]
    fn exact_fit_matches_coefficient_table_route() {
        let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(1, 2).unwrap(), 0).unwrap();
        let seq = build_sequence(&spec, 25).unwrap();
        let e = fit_density(&seq, 25, Precision::Exact).unwrap();
        let table = shifted_legendre_coefficients(25, &seq.interval);
        for (j, row) in table.iter().enumerate() {
            let mut sum = Rational::new();
            for (i, c) in row.iter().enumerate() {
                sum += Rational::from(c * seq.values[i].as_rational().unwrap());
            }
            let expected = sum * Rational::from(2 * j + 1) / seq.interval.width();
            assert_eq!(e.coefficients[j], ParamValue::Exact(expected), "j={j}");
        }
    }

    #[test]
    fn exact_fit_reproduces_moments_and_mass() {
        let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(1, 1).unwrap(), 0).unwrap();
        let seq = build_sequence(&spec, 40).unwrap();
        let e = fit_density(&seq, 40, Precision::Exact).unwrap();
        for n in 0..=40 {
            assert_eq!(e.moment(n), seq.values[n], "n={n}");
        }
        let full = e.prob_between(&seq.interval.lo, &seq.interval.hi).unwrap();
        assert_eq!(full, ParamValue::one());
    }

    #[test]
    fn real_fit_tracks_exact_fit() {
        let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(1, 1).unwrap(), 0).unwrap();
        let seq = build_sequence(&spec, 60).unwrap();
        let exact = fit_density(&seq, 60, Precision::Exact).unwrap();
        let real = fit_density(&seq, 60, Precision::Bits(Precision::bits_for_degree(60))).unwrap();
        let (a, b) = positive_window();
        let pe = exact.prob_between(&a, &b).unwrap().to_f64();
        let pr = real.prob_between(&a, &b).unwrap().to_f64();
        assert!((pe - pr).abs() < 1e-30);
        assert!(real.rounding_bound > 0.0 && real.rounding_bound < ROUNDING_LIMIT);
    }

    #[test]
    fn too_few_bits_is_reported() {
        let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(1, 1).unwrap(), 0).unwrap();
        let seq = build_sequence(&spec, 200).unwrap();
        assert!(matches!(
            fit_density(&seq, 200, Precision::Bits(64)),
            Err(ReconstructError::PrecisionTooLow { .. })
        ));
    }

    #[test]
    fn input_validation() {
        let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(1, 1).unwrap(), 0).unwrap();
        let seq = build_sequence(&spec, 5).unwrap();
        assert!(matches!(
            fit_density(&seq, 6, Precision::Exact),
            Err(ReconstructError::NotEnoughMoments { .. })
        ));
        let mut bad = seq.clone();
        bad.values[0] = ParamValue::int(2);
        assert!(matches!(
            fit_density(&bad, 3, Precision::Exact),
            Err(ReconstructError::NotNormalized(_))
        ));
        let e = fit_density(&seq, 5, Precision::Exact).unwrap();
        assert!(e.prob_between(&q(0, 1), &q(1, 100)).is_err());
        assert!(e.prob_between(&q(0, 1), &q(0, 1)).is_err());
        assert!(Interval::new(q(1, 1), q(1, 1)).is_err());
    }

    #[test]
    fn transforms() {
        let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(1, 1).unwrap(), 0).unwrap();
        let seq = build_sequence(&spec, 6).unwrap();
        let m = transform_m(&seq, &ParamValue::one()).unwrap();
        assert_eq!(m.values[0], ParamValue::one());
        assert_eq!(m.values[1], &seq.values[1] / ParamValue::int(2));
        let identity = mixture_transform(&seq, &ParamValue::int(3), &ParamValue::one()).unwrap();
        assert_eq!(identity.values, seq.values);
        assert!(transform_m(&seq, &ParamValue::zero()).is_err());
        assert!(mixture_transform(&seq, &ParamValue::one(), &ParamValue::int(2)).is_err());

        // (1+5α)/2, 3/4 gives (2+10α+3n)/(2+10α+4n) μ_n
        let mixed = mixture_transform(&seq, &ParamValue::int(3), &ParamValue::ratio(3, 4)).unwrap();
        for n in 0..=6i64 {
            let factor = ParamValue::ratio(12 + 3 * n, 12 + 4 * n);
            assert_eq!(mixed.values[n as usize], &seq.values[n as usize] * factor);
        }
    }

    #[test]
    fn transformed_pairs_coincide() {
        for (n, d) in [(1, 2), (1, 1), (2, 1), (7, 3)] {
            let (u1, u2) = transformed_pair(&DysonIndex::ratio(n, d).unwrap(), 50).unwrap();
            assert_eq!(u1.values, u2.values, "alpha={n}/{d}");
        }
        let report =
            equal_probability_check(&DysonIndex::ratio(1, 2).unwrap(), 40, Precision::Exact)
                .unwrap();
        assert!(report.sequences_identical);
        assert_eq!(report.difference, 0.0);
    }

    #[test]
    fn low_degree_ratio_is_near_half() {
        let r = separability_ratio(
            &DysonIndex::ratio(1, 1).unwrap(),
            Variable::Diff,
            60,
            Precision::Exact,
        )
        .unwrap();
        assert!(r.half_error() < 0.05, "ratio {}", r.ratio);
        assert_eq!(r.moments_used(), 61);
        let json = r.to_json_value();
        assert_eq!(json["degree"], 60);
        assert_eq!(json["precision"], "exact");
    }
}
