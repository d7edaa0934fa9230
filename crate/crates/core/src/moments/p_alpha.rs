//! Separability probability `P(α)` as a rapidly convergent series.

use crate::exact::{
    gamma_ratio, BigReal, Float, GammaPolicy, ParamValue, Rational, DEFAULT_PRECISION,
};

use super::{DysonIndex, MomentError, Result};

/// Separability probabilities with known rational closed forms, as
/// `(α, P(α))` fraction pairs.
pub const KNOWN_PROBABILITIES: [((i64, i64), (i64, i64)); 5] = [
    ((1, 2), (29, 64)),
    ((1, 1), (8, 33)),
    ((3, 2), (36061, 262144)),
    ((2, 1), (26, 323)),
    ((4, 1), (44482, 4091349)),
];

pub fn known_probability(alpha: &DysonIndex) -> Option<Rational> {
    let a = alpha.as_rational()?;
    KNOWN_PROBABILITIES
        .iter()
        .find(|((n, d), _)| *a == Rational::from((*n, *d)))
        .map(|(_, (n, d))| Rational::from((*n, *d)))
}

const MAX_TERMS: usize = 200;

/// Result of summing the `P(α)` series.
#[derive(Clone, Debug)]
pub struct PSeries {
    pub value: ParamValue,
    /// Number of terms summed.
    pub terms: usize,
    /// Geometric estimate of the omitted tail.
    pub tail_bound: f64,
    /// Largest of the last three successive term ratios.
    pub ratio_estimate: f64,
}

const Q_COEFFS: [i64; 6] = [63000, 410694, 1042015, 1289125, 779750, 185000];

fn q_poly(alpha: &ParamValue) -> ParamValue {
    Q_COEFFS.iter().rev().fold(ParamValue::zero(), |acc, &c| {
        acc * alpha + ParamValue::int(c)
    })
}

/// One series term,
/// `q(α) 2^{-4α-6} Γ(3α+5/2) Γ(5α+2) / (3 Γ(α+1) Γ(2α+3) Γ(5α+13/2))`
/// with `q` a fixed quintic. Exact when the gamma arguments pair up and `4α`
/// is an integer; otherwise an MPFR value at `precision_bits`.
pub fn f_term(alpha: &DysonIndex, precision_bits: u32) -> Result<ParamValue> {
    let a = alpha.value();
    let q = q_poly(a);
    match a.as_rational() {
        Some(r) => {
            let lin = |m: i64, c: (i64, i64)| Rational::from(r * m) + Rational::from(c);
            let gammas = gamma_ratio(
                &[lin(3, (5, 2)), lin(5, (2, 1))],
                &[lin(1, (1, 1)), lin(2, (3, 1)), lin(5, (13, 2))],
                GammaPolicy::Fallback(precision_bits),
            )?;
            let exponent: Rational = Rational::from(r * 4) + 6u32;
            let power = if exponent.is_integer() {
                let bits = exponent
                    .numer()
                    .to_u32()
                    .expect("2-power exponent fits in u32");
                ParamValue::Exact(Rational::from(1) >> bits)
            } else {
                let e = Float::with_val(precision_bits, &exponent);
                ParamValue::Real(BigReal::new(Float::with_val(precision_bits, -e).exp2()))
            };
            Ok(q * gammas * power / ParamValue::int(3))
        }
        None => {
            let x = a.to_real(precision_bits).into_float();
            let prec = x.prec();
            let lin = |m: i64, c: f64| Float::with_val(prec, &x * m) + c;
            let num = lin(3, 2.5).gamma() * lin(5, 2.0).gamma();
            let den = lin(1, 1.0).gamma() * lin(2, 3.0).gamma() * lin(5, 6.5).gamma();
            let power = Float::with_val(prec, -(lin(4, 6.0))).exp2();
            let g = ParamValue::Real(BigReal::new(num / den * power));
            Ok(q * g / ParamValue::int(3))
        }
    }
}

/// `P(α) = Σ_{i≥0} f(α+i)` at the default working precision.
pub fn p_concise(alpha: &DysonIndex, epsilon: f64) -> Result<PSeries> {
    p_concise_with(alpha, epsilon, DEFAULT_PRECISION)
}

/// `P(α)` summed until the geometric tail estimate drops below `epsilon`.
///
/// The tail is bounded by `|last term| · r / (1 - r)`, with `r` the largest
/// of the last three term ratios. This is a heuristic: it assumes the ratios
/// have settled, which they do quickly (towards 27/64).
pub fn p_concise_with(alpha: &DysonIndex, epsilon: f64, precision_bits: u32) -> Result<PSeries> {
    if !(epsilon > 0.0) {
        return Err(MomentError::InvalidEpsilon);
    }
    let mut sum = ParamValue::zero();
    let mut mags: Vec<f64> = Vec::new();
    for i in 0..MAX_TERMS {
        let term = f_term(&alpha.shifted(i as i64), precision_bits)?;
        mags.push(term.to_f64().abs());
        sum = sum + term;
        if mags.len() >= 4 {
            let last = mags.len() - 1;
            let ratio = (last - 2..=last)
                .map(|j| mags[j] / mags[j - 1])
                .fold(0.0_f64, f64::max);
            if ratio < 1.0 {
                let tail = mags[last] * ratio / (1.0 - ratio);
                if tail < epsilon {
                    return Ok(PSeries {
                        value: sum,
                        terms: mags.len(),
                        tail_bound: tail,
                        ratio_estimate: ratio,
                    });
                }
            }
        }
    }
    Err(MomentError::TailNotGeometric { terms: MAX_TERMS })
}
