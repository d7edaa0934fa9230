//! Exact rational and arbitrary-precision numeric kernel.
//!
//! Every closed-form moment in this crate is a finite product of Pochhammer
//! symbols and gamma ratios plus a terminating hypergeometric sum. With a
//! rational Dyson index those reduce to exact rationals; [`ParamValue`] keeps
//! them that way and only demotes to an MPFR float when an operand already is
//! one.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

pub use rug::{Float, Integer, Rational};
use thiserror::Error;

/// Working precision for [`BigReal`] values when a caller does not ask for one.
pub const DEFAULT_PRECISION: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("gamma ratio has unpaired non-integer arguments; no exact reduction exists")]
    UnpairedHalfInteger,
    #[error("series does not terminate: no upper parameter is a nonpositive integer")]
    NonTerminating,
    #[error("lower parameter #{index} vanishes at term {term}, before the series terminates")]
    LowerParamPole { index: usize, term: usize },
    #[error("pole: {0}")]
    Pole(String),
    #[error("gamma argument {0} is a nonpositive integer")]
    GammaPole(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse {0:?} as an exact fraction")]
    Parse(String),
}

pub type Result<T, E = ExactError> = std::result::Result<T, E>;

/// MPFR float tagged with its precision. Binary operations run at the
/// smaller of the two operand precisions.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct BigReal(Float);

impl BigReal {
    pub fn new(value: Float) -> Self {
        BigReal(value)
    }

    pub fn from_rational(r: &Rational, precision_bits: u32) -> Self {
        BigReal(Float::with_val(precision_bits, r))
    }

    pub fn from_f64(x: f64, precision_bits: u32) -> Self {
        BigReal(Float::with_val(precision_bits, x))
    }

    pub fn precision_bits(&self) -> u32 {
        self.0.prec()
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // digits enough to round-trip the precision
        let digits = (f64::from(self.0.prec()) * std::f64::consts::LOG10_2).ceil() as usize + 1;
        write!(f, "{}", self.0.to_string_radix(10, Some(digits)))
    }
}

/// A parameter or result: exact rational, or a precision-tagged real.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Exact(Rational),
    Real(BigReal),
}

impl ParamValue {
    pub fn zero() -> Self {
        ParamValue::Exact(Rational::new())
    }

    pub fn one() -> Self {
        ParamValue::Exact(Rational::from(1))
    }

    pub fn int(n: i64) -> Self {
        ParamValue::Exact(Rational::from(n))
    }

    /// `num/den`; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        ParamValue::Exact(Rational::from((num, den)))
    }

    pub fn real(x: f64, precision_bits: u32) -> Self {
        ParamValue::Real(BigReal::from_f64(x, precision_bits))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ParamValue::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ParamValue::Exact(r) => Some(r),
            ParamValue::Real(_) => None,
        }
    }

    pub fn into_rational(self) -> Option<Rational> {
        match self {
            ParamValue::Exact(r) => Some(r),
            ParamValue::Real(_) => None,
        }
    }

    /// `None` for exact values.
    pub fn precision_bits(&self) -> Option<u32> {
        match self {
            ParamValue::Exact(_) => None,
            ParamValue::Real(b) => Some(b.precision_bits()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ParamValue::Exact(r) => r.to_f64(),
            ParamValue::Real(b) => b.to_f64(),
        }
    }

    pub fn to_real(&self, precision_bits: u32) -> BigReal {
        match self {
            ParamValue::Exact(r) => BigReal::from_rational(r, precision_bits),
            ParamValue::Real(b) => BigReal(Float::with_val(precision_bits, &b.0)),
        }
    }

    /// Demote to a real at `precision_bits`; reals keep their own precision.
    pub fn demote(&self, precision_bits: u32) -> ParamValue {
        match self {
            ParamValue::Exact(r) => ParamValue::Real(BigReal::from_rational(r, precision_bits)),
            real => real.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ParamValue::Exact(r) => r.cmp0() == Ordering::Equal,
            ParamValue::Real(b) => b.0.is_zero(),
        }
    }

    pub fn signum(&self) -> Ordering {
        match self {
            ParamValue::Exact(r) => r.cmp0(),
            ParamValue::Real(b) => b.0.cmp0().unwrap_or(Ordering::Equal),
        }
    }

    /// `Some(m)` when the value is exactly the integer `-m`, `m >= 0`.
    pub fn as_nonpositive_integer(&self) -> Option<u32> {
        let as_int = |r: &Rational| -> Option<u32> {
            if r.is_integer() && r.cmp0() != Ordering::Greater {
                (-r.numer().clone()).to_u32()
            } else {
                None
            }
        };
        match self {
            ParamValue::Exact(r) => as_int(r),
            ParamValue::Real(b) => {
                if b.0.is_integer() && b.0.cmp0() != Some(Ordering::Greater) {
                    b.0.to_rational().and_then(|r| as_int(&r))
                } else {
                    None
                }
            }
        }
    }

    pub fn abs(&self) -> ParamValue {
        match self {
            ParamValue::Exact(r) => ParamValue::Exact(r.clone().abs()),
            ParamValue::Real(b) => ParamValue::Real(BigReal(b.0.clone().abs())),
        }
    }

    pub fn pow(&self, n: u32) -> ParamValue {
        use rug::ops::Pow;
        match self {
            ParamValue::Exact(r) => ParamValue::Exact(Rational::from(r.pow(n))),
            ParamValue::Real(b) => {
                ParamValue::Real(BigReal(Float::with_val(b.0.prec(), (&b.0).pow(n))))
            }
        }
    }

    pub fn checked_div(&self, rhs: &ParamValue) -> Result<ParamValue> {
        if rhs.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(self / rhs)
    }

    pub fn recip(&self) -> Result<ParamValue> {
        ParamValue::one().checked_div(self)
    }

    fn combine(
        &self,
        rhs: &ParamValue,
        exact: impl FnOnce(&Rational, &Rational) -> Rational,
        real: impl FnOnce(&Float, &Float, u32) -> Float,
    ) -> ParamValue {
        match (self, rhs) {
            (ParamValue::Exact(a), ParamValue::Exact(b)) => ParamValue::Exact(exact(a, b)),
            (ParamValue::Real(a), ParamValue::Real(b)) => {
                let prec = a.0.prec().min(b.0.prec());
                ParamValue::Real(BigReal(real(&a.0, &b.0, prec)))
            }
            (ParamValue::Real(a), ParamValue::Exact(b)) => {
                let prec = a.0.prec();
                let b = Float::with_val(prec, b);
                ParamValue::Real(BigReal(real(&a.0, &b, prec)))
            }
            (ParamValue::Exact(a), ParamValue::Real(b)) => {
                let prec = b.0.prec();
                let a = Float::with_val(prec, a);
                ParamValue::Real(BigReal(real(&a, &b.0, prec)))
            }
        }
    }
}

impl From<Rational> for ParamValue {
    fn from(r: Rational) -> Self {
        ParamValue::Exact(r)
    }
}

impl From<&Rational> for ParamValue {
    fn from(r: &Rational) -> Self {
        ParamValue::Exact(r.clone())
    }
}

impl From<i64> for ParamValue {
    fn from(n: i64) -> Self {
        ParamValue::int(n)
    }
}

impl From<BigReal> for ParamValue {
    fn from(b: BigReal) -> Self {
        ParamValue::Real(b)
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Exact(r) => write!(f, "{r}"),
            ParamValue::Real(b) => write!(f, "{b}"),
        }
    }
}

impl PartialOrd for ParamValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ParamValue::Exact(a), ParamValue::Exact(b)) => a.partial_cmp(b),
            (ParamValue::Real(a), ParamValue::Real(b)) => a.0.partial_cmp(&b.0),
            (ParamValue::Real(a), ParamValue::Exact(b)) => a.0.partial_cmp(b),
            (ParamValue::Exact(a), ParamValue::Real(b)) => {
                b.0.partial_cmp(a).map(Ordering::reverse)
            }
        }
    }
}

impl FromStr for ParamValue {
    type Err = ExactError;

    /// Fractions (`"p/q"`, `"-3"`) parse exactly; anything with a decimal
    /// point or exponent parses as a [`BigReal`] at [`DEFAULT_PRECISION`].
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(r) = parse_fraction(s) {
            return Ok(ParamValue::Exact(r));
        }
        let parsed = Float::parse(s).map_err(|_| ExactError::Parse(s.to_string()))?;
        Ok(ParamValue::Real(BigReal(Float::with_val(
            DEFAULT_PRECISION,
            parsed,
        ))))
    }
}

/// Parse `"p/q"` or an integer. Decimals are rejected.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let s = s.trim();
    let ok = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_digit() || c == '/' || c == '-' || c == '+');
    if !ok {
        return Err(ExactError::Parse(s.to_string()));
    }
    s.parse::<Rational>()
        .map_err(|_| ExactError::Parse(s.to_string()))
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $exact:expr, $real:expr) => {
        impl<'a, 'b> $tr<&'b ParamValue> for &'a ParamValue {
            type Output = ParamValue;
            fn $method(self, rhs: &'b ParamValue) -> ParamValue {
                self.combine(rhs, $exact, $real)
            }
        }
        impl $tr<ParamValue> for ParamValue {
            type Output = ParamValue;
            fn $method(self, rhs: ParamValue) -> ParamValue {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $tr<&'b ParamValue> for ParamValue {
            type Output = ParamValue;
            fn $method(self, rhs: &'b ParamValue) -> ParamValue {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<ParamValue> for &'a ParamValue {
            type Output = ParamValue;
            fn $method(self, rhs: ParamValue) -> ParamValue {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| Rational::from(a + b), |a, b, p| {
    Float::with_val(p, a + b)
});
forward_binop!(Sub, sub, |a, b| Rational::from(a - b), |a, b, p| {
    Float::with_val(p, a - b)
});
forward_binop!(Mul, mul, |a, b| Rational::from(a * b), |a, b, p| {
    Float::with_val(p, a * b)
});
forward_binop!(Div, div, |a, b| Rational::from(a / b), |a, b, p| {
    Float::with_val(p, a / b)
});

impl Neg for ParamValue {
    type Output = ParamValue;
    fn neg(self) -> ParamValue {
        match self {
            ParamValue::Exact(r) => ParamValue::Exact(-r),
            ParamValue::Real(b) => ParamValue::Real(BigReal(-b.0)),
        }
    }
}

impl Neg for &ParamValue {
    type Output = ParamValue;
    fn neg(self) -> ParamValue {
        -self.clone()
    }
}

/// Rising factorial `(x)_n = x (x+1) ... (x+n-1)`.
pub fn pochhammer(x: &ParamValue, n: u32) -> ParamValue {
    match x {
        ParamValue::Exact(r) => ParamValue::Exact(pochhammer_rational(r, n)),
        ParamValue::Real(b) => {
            let prec = b.0.prec();
            let mut acc = Float::with_val(prec, 1);
            let mut term = b.0.clone();
            for _ in 0..n {
                acc *= &term;
                term += 1;
            }
            ParamValue::Real(BigReal(acc))
        }
    }
}

/// `(x)_n` over the rationals. Numerator and denominator are accumulated
/// separately and reduced once.
pub fn pochhammer_rational(x: &Rational, n: u32) -> Rational {
    let den = x.denom();
    let mut num_acc = Integer::from(1);
    let mut factor = x.numer().clone();
    for _ in 0..n {
        num_acc *= &factor;
        factor += den;
    }
    let den_acc = Integer::from(rug::ops::Pow::pow(den, n));
    Rational::from((num_acc, den_acc))
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

pub fn binomial(n: u32, k: u32) -> Integer {
    Integer::from(Integer::binomial_u(n, k))
}

/// How [`gamma_ratio`] should behave when no exact reduction exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaPolicy {
    /// Fail with [`ExactError::UnpairedHalfInteger`].
    Exact,
    /// Evaluate with MPFR at this many bits.
    Fallback(u32),
}

/// `∏Γ(numerator) / ∏Γ(denominator)`.
///
/// Arguments sharing a fractional part are paired and the ratio of each pair
/// is a Pochhammer symbol; unmatched integer arguments are factorials. Any
/// unmatched non-integer argument leaves a transcendental `Γ(φ)` behind, and
/// the value is then computed with MPFR (or refused, under
/// [`GammaPolicy::Exact`]).
pub fn gamma_ratio(
    numerator: &[Rational],
    denominator: &[Rational],
    policy: GammaPolicy,
) -> Result<ParamValue> {
    for arg in numerator.iter().chain(denominator) {
        if arg.is_integer() && arg.cmp0() != Ordering::Greater {
            return Err(ExactError::GammaPole(arg.to_string()));
        }
    }

    struct Class {
        fract: Rational,
        num: Vec<Rational>,
        den: Vec<Rational>,
    }
    let mut classes: Vec<Class> = Vec::new();
    let mut place = |arg: &Rational, is_num: bool| {
        let (fract, _) = arg.clone().fract_floor(Integer::new());
        let idx = match classes.iter().position(|c| c.fract == fract) {
            Some(i) => i,
            None => {
                classes.push(Class {
                    fract,
                    num: Vec::new(),
                    den: Vec::new(),
                });
                classes.len() - 1
            }
        };
        if is_num {
            classes[idx].num.push(arg.clone());
        } else {
            classes[idx].den.push(arg.clone());
        }
    };
    numerator.iter().for_each(|a| place(a, true));
    denominator.iter().for_each(|a| place(a, false));

    let reducible = classes
        .iter()
        .all(|c| c.fract.cmp0() == Ordering::Equal || c.num.len() == c.den.len());
    if !reducible {
        return match policy {
            GammaPolicy::Exact => Err(ExactError::UnpairedHalfInteger),
            GammaPolicy::Fallback(prec) => Ok(ParamValue::Real(gamma_ratio_real(
                numerator,
                denominator,
                prec,
            ))),
        };
    }

    let mut acc = Rational::from(1);
    for mut class in classes {
        class.num.sort();
        class.den.sort();
        let paired = class.num.len().min(class.den.len());
        for (a, b) in class.num.iter().zip(&class.den) {
            // Γ(a)/Γ(b) with a - b an integer
            let diff = Rational::from(a - b);
            let steps = diff
                .numer()
                .to_i64()
                .expect("gamma argument gap fits in i64");
            if steps >= 0 {
                acc *= pochhammer_rational(b, steps as u32);
            } else {
                acc /= pochhammer_rational(a, (-steps) as u32);
            }
        }
        // leftovers are positive integers: Γ(m) = (m-1)!
        for a in &class.num[paired..] {
            acc *= factorial(a.numer().to_u32().expect("integer gamma argument") - 1);
        }
        for b in &class.den[paired..] {
            acc /= factorial(b.numer().to_u32().expect("integer gamma argument") - 1);
        }
    }
    Ok(ParamValue::Exact(acc))
}

fn gamma_ratio_real(numerator: &[Rational], denominator: &[Rational], prec: u32) -> BigReal {
    let mut acc = Float::with_val(prec, 1);
    for a in numerator {
        acc *= Float::with_val(prec, a).gamma();
    }
    for b in denominator {
        acc /= Float::with_val(prec, b).gamma();
    }
    BigReal(acc)
}

/// A hypergeometric parameter `constant + slope·t` in a formal variable `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineParam {
    pub constant: ParamValue,
    pub slope: Rational,
}

impl AffineParam {
    pub fn constant(value: ParamValue) -> Self {
        AffineParam {
            constant: value,
            slope: Rational::new(),
        }
    }

    pub fn new(constant: ParamValue, slope: Rational) -> Self {
        AffineParam { constant, slope }
    }

    fn at(&self, t: &Rational) -> ParamValue {
        if self.slope.cmp0() == Ordering::Equal {
            self.constant.clone()
        } else {
            &self.constant + ParamValue::Exact(Rational::from(&self.slope * t))
        }
    }
}

/// Terminating `pFq(upper; lower; z)`.
///
/// Sums `Σ_j ∏(a)_j / (∏(b)_j j!) z^j` up to the smallest `N` for which some
/// upper parameter equals `-N`.
pub fn terminating_pfq(
    upper: &[ParamValue],
    lower: &[ParamValue],
    argument: &ParamValue,
) -> Result<ParamValue> {
    let upper: Vec<_> = upper.iter().cloned().map(AffineParam::constant).collect();
    let lower: Vec<_> = lower.iter().cloned().map(AffineParam::constant).collect();
    terminating_pfq_limit(&upper, &lower, argument, &Rational::new())
}

/// Terminating `pFq` whose parameters are affine in a formal variable `t`,
/// evaluated as `t → at`.
///
/// Termination comes from the `t`-independent upper parameters. A factor
/// `(c + s·t + i)` that vanishes at `t = at` is replaced by its leading
/// coefficient `s`; matched numerator/denominator zeros then cancel, a
/// surplus numerator zero kills the term, and a surplus denominator zero is a
/// genuine pole.
pub fn terminating_pfq_limit(
    upper: &[AffineParam],
    lower: &[AffineParam],
    argument: &ParamValue,
    at: &Rational,
) -> Result<ParamValue> {
    let terminate_at = upper
        .iter()
        .filter(|p| p.slope.cmp0() == Ordering::Equal)
        .filter_map(|p| p.constant.as_nonpositive_integer())
        .min()
        .ok_or(ExactError::NonTerminating)?;

    for (index, p) in lower.iter().enumerate() {
        if p.slope.cmp0() == Ordering::Equal {
            if let Some(m) = p.constant.as_nonpositive_integer() {
                if m < terminate_at {
                    return Err(ExactError::LowerParamPole {
                        index,
                        term: m as usize + 1,
                    });
                }
            }
        }
    }

    let upper_at: Vec<_> = upper.iter().map(|p| (p.at(at), &p.slope)).collect();
    let lower_at: Vec<_> = lower.iter().map(|p| (p.at(at), &p.slope)).collect();

    let mut value = ParamValue::one();
    let mut zero_order: i64 = 0;
    let mut slope_factor = Rational::from(1);
    let mut sum = ParamValue::zero();
    for j in 0..=terminate_at {
        if j > 0 {
            let shift = ParamValue::int(i64::from(j - 1));
            for (a, slope) in &upper_at {
                let f = a + &shift;
                if f.is_zero() {
                    zero_order += 1;
                    slope_factor *= *slope;
                } else {
                    value = value * f;
                }
            }
            for (index, (b, slope)) in lower_at.iter().enumerate() {
                let f = b + &shift;
                if f.is_zero() {
                    if slope.cmp0() == Ordering::Equal {
                        return Err(ExactError::LowerParamPole {
                            index,
                            term: j as usize,
                        });
                    }
                    zero_order -= 1;
                    slope_factor /= *slope;
                } else {
                    value = value / f;
                }
            }
            value = value * argument / ParamValue::int(i64::from(j));
        }
        match zero_order.cmp(&0) {
            Ordering::Greater => {}
            Ordering::Equal => sum = sum + &value * ParamValue::Exact(slope_factor.clone()),
            Ordering::Less => {
                return Err(ExactError::Pole(format!(
                    "term {j} of the series diverges at t = {at}"
                )));
            }
        }
    }
    Ok(sum)
}

/// `Σ_{j=0}^{n} (-n)_j / j! · (-j)_m · (x+j)_m` by direct summation.
pub fn lemma_sum(n: u32, m: u32, x: &Rational) -> Rational {
    let minus_n = Rational::from(-i64::from(n));
    let mut sum = Rational::new();
    for j in 0..=n {
        let minus_j = Rational::from(-i64::from(j));
        let xj = Rational::from(x + j);
        let term = pochhammer_rational(&minus_n, j) / Rational::from(factorial(j))
            * pochhammer_rational(&minus_j, m)
            * pochhammer_rational(&xj, m);
        sum += term;
    }
    sum
}

/// Closed form of [`lemma_sum`] from the Chu–Vandermonde sum:
/// `(-1)^m (x)_{2m}/(x)_n · (-n)_m (-m)_{n-m}` for `m ≤ n`, zero otherwise.
pub fn lemma_closed(n: u32, m: u32, x: &Rational) -> Result<Rational> {
    if m > n {
        return Ok(Rational::new());
    }
    let x_n = pochhammer_rational(x, n);
    if x_n.cmp0() == Ordering::Equal {
        return Err(ExactError::Pole(format!(
            "(x)_n vanishes at x = {x}, n = {n}"
        )));
    }
    let sign = if m.is_multiple_of(2) { 1 } else { -1 };
    let value = pochhammer_rational(x, 2 * m) / x_n
        * pochhammer_rational(&Rational::from(-i64::from(n)), m)
        * pochhammer_rational(&Rational::from(-i64::from(m)), n - m)
        * Rational::from(sign);
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn pv(n: i64, d: i64) -> ParamValue {
        ParamValue::ratio(n, d)
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(&ParamValue::int(3), 4), ParamValue::int(360));
        assert_eq!(pochhammer(&pv(-7, 3), 0), ParamValue::one());
        assert_eq!(pochhammer(&pv(1, 2), 2), pv(3, 4));
        assert_eq!(pochhammer(&ParamValue::int(-2), 3), ParamValue::zero());
    }

    #[test]
    fn pochhammer_real_matches_exact() {
        let exact = pochhammer(&pv(7, 3), 9);
        let real = pochhammer(&ParamValue::real(7.0 / 3.0, 200).demote(200), 9);
        let rel = ((real.to_f64() - exact.to_f64()) / exact.to_f64()).abs();
        assert!(rel < 1e-14, "rel {rel}");
        assert_eq!(real.precision_bits(), Some(200));
    }

    #[test]
    fn gamma_ratio_examples() {
        let g = gamma_ratio(&[q(4, 1)], &[q(9, 1)], GammaPolicy::Exact).unwrap();
        assert_eq!(g, pv(1, 6720));
        let g = gamma_ratio(&[q(11, 2)], &[q(23, 2)], GammaPolicy::Exact).unwrap();
        assert_eq!(g, pv(64, 14549535));
        let g = gamma_ratio(&[q(9, 2)], &[q(3, 2)], GammaPolicy::Exact).unwrap();
        assert_eq!(g, pv(105, 8));
    }

    #[test]
    fn gamma_ratio_unbalanced_integers_stay_exact() {
        // Γ(7)/(Γ(2)Γ(5)) = 720/24
        let g = gamma_ratio(&[q(7, 1)], &[q(2, 1), q(5, 1)], GammaPolicy::Exact).unwrap();
        assert_eq!(g, ParamValue::int(30));
    }

    #[test]
    fn gamma_ratio_unpaired_half_integer() {
        let err = gamma_ratio(&[q(1, 2)], &[q(1, 1)], GammaPolicy::Exact).unwrap_err();
        assert_eq!(err, ExactError::UnpairedHalfInteger);
        let g = gamma_ratio(&[q(1, 2)], &[q(1, 1)], GammaPolicy::Fallback(128)).unwrap();
        assert!((g.to_f64() - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(g.precision_bits(), Some(128));
    }

    #[test]
    fn gamma_ratio_rejects_poles() {
        assert!(matches!(
            gamma_ratio(&[q(0, 1)], &[q(1, 1)], GammaPolicy::Exact),
            Err(ExactError::GammaPole(_))
        ));
    }

    #[test]
    fn gamma_ratio_paired_agrees_with_mpfr() {
        let num = [q(11, 2), q(7, 3), q(13, 1)];
        let den = [q(5, 2), q(19, 3), q(2, 1)];
        let exact = gamma_ratio(&num, &den, GammaPolicy::Exact).unwrap();
        let real = gamma_ratio_real(&num, &den, 512);
        let exact = Float::with_val(512, exact.as_rational().unwrap());
        let diff = Float::with_val(512, &exact - real.as_float());
        let rel = Float::with_val(512, diff / &exact).abs();
        assert!(rel < Float::with_val(512, 1e-100), "rel {rel}");
    }

    #[test]
    fn pfq_examples() {
        let one = ParamValue::one();
        let r = terminating_pfq(&[ParamValue::zero(), pv(3, 7)], &[pv(5, 2)], &one).unwrap();
        assert_eq!(r, one);
        // 2F1(-1, b; c; 1) = 1 - b/c
        let r = terminating_pfq(&[ParamValue::int(-1), pv(3, 7)], &[pv(5, 2)], &one).unwrap();
        assert_eq!(r, ParamValue::Exact(Rational::from(1) - q(3, 7) / q(5, 2)));
        // 4F3(-1/2, 0, k+1+α, k+1+2α; ...) at n = 1
        let r = terminating_pfq(
            &[
                pv(-1, 2),
                ParamValue::zero(),
                ParamValue::int(2),
                ParamValue::int(3),
            ],
            &[ParamValue::int(-1), pv(-1, 2), ParamValue::int(8)],
            &one,
        )
        .unwrap();
        assert_eq!(r, one);
    }

    #[test]
    fn pfq_chu_vandermonde() {
        // 2F1(-n, b; c; 1) = (c-b)_n / (c)_n
        let (b, c) = (q(2, 3), q(11, 5));
        for n in 0..8u32 {
            let r = terminating_pfq(
                &[ParamValue::int(-i64::from(n)), ParamValue::from(&b)],
                &[ParamValue::from(&c)],
                &ParamValue::one(),
            )
            .unwrap();
            let expect =
                pochhammer_rational(&Rational::from(&c - &b), n) / pochhammer_rational(&c, n);
            assert_eq!(r, ParamValue::Exact(expect));
        }
    }

    #[test]
    fn pfq_errors() {
        let one = ParamValue::one();
        assert_eq!(
            terminating_pfq(&[pv(1, 2)], &[ParamValue::int(2)], &one),
            Err(ExactError::NonTerminating)
        );
        assert_eq!(
            terminating_pfq(&[ParamValue::int(-3)], &[ParamValue::int(-1)], &one),
            Err(ExactError::LowerParamPole { index: 0, term: 2 })
        );
        // a lower pole at or past the termination index is harmless
        assert!(terminating_pfq(&[ParamValue::int(-1)], &[ParamValue::int(-1)], &one).is_ok());
    }

    #[test]
    fn pfq_limit_cancels_coincident_zeros() {
        // Σ_j (-1)_j (-t)_j / ((-t/2)_j j!) at t→0 : j=1 term is (-1)(-t)/(-t/2) → -2
        let upper = [
            AffineParam::constant(ParamValue::int(-1)),
            AffineParam::new(ParamValue::zero(), q(-1, 1)),
        ];
        let lower = [AffineParam::new(ParamValue::zero(), q(-1, 2))];
        let r =
            terminating_pfq_limit(&upper, &lower, &ParamValue::one(), &Rational::new()).unwrap();
        assert_eq!(r, ParamValue::int(-1));
        // away from the coincidence it is an ordinary sum: 1 - t/(t/2) = -1 as well
        let r = terminating_pfq_limit(&upper, &lower, &ParamValue::one(), &q(3, 1)).unwrap();
        assert_eq!(r, ParamValue::int(-1));
    }

    #[test]
    fn pfq_limit_reports_surplus_denominator_zero() {
        let upper = [AffineParam::constant(ParamValue::int(-2))];
        let lower = [AffineParam::new(ParamValue::zero(), q(1, 1))];
        assert!(matches!(
            terminating_pfq_limit(&upper, &lower, &ParamValue::one(), &Rational::new()),
            Err(ExactError::Pole(_))
        ));
    }

    #[test]
    fn lemma_examples() {
        let one = q(1, 1);
        assert_eq!(lemma_sum(2, 1, &one), q(-2, 1));
        assert_eq!(lemma_closed(2, 1, &one).unwrap(), q(-2, 1));
        assert_eq!(lemma_sum(2, 3, &q(5, 7)), Rational::new());
        assert_eq!(lemma_closed(2, 3, &q(5, 7)).unwrap(), Rational::new());
        for n in 1..6 {
            assert_eq!(lemma_sum(n, 0, &q(2, 9)), Rational::new());
            assert_eq!(lemma_closed(n, 0, &q(2, 9)).unwrap(), Rational::new());
        }
        assert!(matches!(
            lemma_closed(3, 1, &q(-1, 1)),
            Err(ExactError::Pole(_))
        ));
    }

    #[test]
    fn parse_fraction_rejects_decimals() {
        assert_eq!(parse_fraction("-3/4").unwrap(), q(-3, 4));
        assert_eq!(parse_fraction("2").unwrap(), q(2, 1));
        assert!(parse_fraction("0.5").is_err());
        assert!(parse_fraction("1/0").is_err());
        assert!("0.5"
            .parse::<ParamValue>()
            .unwrap()
            .precision_bits()
            .is_some());
    }

    proptest! {
        #[test]
        fn pochhammer_recurrence(num in -40i64..40, den in 1i64..12, n in 0u32..25) {
            let x = pv(num, den);
            let lhs = pochhammer(&x, n + 1);
            let rhs = pochhammer(&x, n) * (&x + ParamValue::int(i64::from(n)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn pfq_permutation_invariant(
            n in 0i64..6,
            a in (-20i64..20, 1i64..6),
            b in (1i64..20, 1i64..6),
            c in (1i64..20, 1i64..6),
        ) {
            let up = vec![ParamValue::int(-n), pv(a.0, a.1), pv(b.0, b.1)];
            let lo = vec![pv(c.0, c.1), pv(b.0 + 1, b.1)];
            let z = pv(-3, 4);
            let r1 = terminating_pfq(&up, &lo, &z).unwrap();
            let up2 = vec![up[2].clone(), up[0].clone(), up[1].clone()];
            let lo2 = vec![lo[1].clone(), lo[0].clone()];
            let r2 = terminating_pfq(&up2, &lo2, &z).unwrap();
            prop_assert_eq!(r1, r2);
        }
    }
}
