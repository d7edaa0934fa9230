//! Sparse polynomials with rational coefficients in up to 16 variables.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use sepprob_core::exact::Rational;

/// Number of variable slots.
pub const SLOTS: usize = 16;

/// Exponent vector.
pub type Monomial = [u8; SLOTS];

pub const ONE: Monomial = [0; SLOTS];

pub fn monomial_degree(m: &Monomial) -> u32 {
    m.iter().map(|&e| u32::from(e)).sum()
}

pub fn monomial_mul(a: &Monomial, b: &Monomial) -> Monomial {
    std::array::from_fn(|i| a[i].checked_add(b[i]).expect("exponent fits in u8"))
}

fn rational_pow(x: &Rational, e: u8) -> Rational {
    (0..e).fold(Rational::from(1), |acc, _| acc * x)
}

/// Map from exponent vector to coefficient, with no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MultivariatePolynomial {
    terms: HashMap<Monomial, Rational>,
}

impl MultivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(ONE, c)
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut terms = HashMap::new();
        if c != 0 {
            terms.insert(m, c);
        }
        MultivariatePolynomial { terms }
    }

    /// The variable in slot `i`.
    pub fn var(i: usize) -> Self {
        let mut m = ONE;
        m[i] = 1;
        Self::monomial(m, Rational::from(1))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Terms sorted by exponent vector.
    pub fn sorted_terms(&self) -> Vec<(Monomial, Rational)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        v.sort_by_key(|a| a.0);
        v
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    fn accumulate(&mut self, m: Monomial, c: Rational) {
        use std::collections::hash_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if c != 0 {
                    e.insert(c);
                }
            }
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(monomial_degree).max().unwrap_or(0)
    }

    /// Largest exponent of slot `i`.
    pub fn degree_in(&self, i: usize) -> u8 {
        self.terms.keys().map(|m| m[i]).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(monomial_degree);
        match degrees.next() {
            Some(d) => degrees.all(|e| e == d),
            None => true,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if *c == 0 {
            return Self::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, v)| (*m, Rational::from(v * c)))
            .collect();
        MultivariatePolynomial { terms }
    }

    /// Multiplies every term by the monomial `m`.
    pub fn shift(&self, m: &Monomial) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, v)| (monomial_mul(k, m), v.clone()))
            .collect();
        MultivariatePolynomial { terms }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Splits by the exponent of slot `i`: entry `e` holds the terms with
    /// `x_i^e`, with that factor removed.
    pub fn split_by(&self, i: usize) -> Vec<Self> {
        let mut out = vec![Self::zero(); usize::from(self.degree_in(i)) + 1];
        for (m, c) in &self.terms {
            let mut rest = *m;
            rest[i] = 0;
            out[usize::from(m[i])].accumulate(rest, c.clone());
        }
        out
    }

    /// Sets slot `i` to `value` and keeps the other variables.
    pub fn substitute(&self, i: usize, value: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut rest = *m;
            rest[i] = 0;
            let factor = rational_pow(value, m[i]) * c;
            out.accumulate(rest, factor);
        }
        out
    }

    /// Evaluates at a point (missing slots are zero).
    pub fn eval(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::new();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    match point.get(i) {
                        Some(x) => term *= rational_pow(x, e),
                        None => {
                            term = Rational::new();
                            break;
                        }
                    }
                }
            }
            acc += term;
        }
        acc
    }

    /// Applies a permutation of the slots to every monomial.
    pub fn permute_slots(&self, perm: &[usize; SLOTS]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut out = ONE;
                for (i, &e) in m.iter().enumerate() {
                    out[perm[i]] = e;
                }
                (out, c.clone())
            })
            .collect();
        MultivariatePolynomial { terms }
    }
}

impl Add for &MultivariatePolynomial {
    type Output = MultivariatePolynomial;

    fn add(self, rhs: &MultivariatePolynomial) -> MultivariatePolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.accumulate(*m, c.clone());
        }
        out
    }
}

impl Sub for &MultivariatePolynomial {
    type Output = MultivariatePolynomial;

    fn sub(self, rhs: &MultivariatePolynomial) -> MultivariatePolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.accumulate(*m, Rational::from(-c));
        }
        out
    }
}

impl Neg for &MultivariatePolynomial {
    type Output = MultivariatePolynomial;

    fn neg(self) -> MultivariatePolynomial {
        self.scale(&Rational::from(-1))
    }
}

impl Mul for &MultivariatePolynomial {
    type Output = MultivariatePolynomial;

    fn mul(self, rhs: &MultivariatePolynomial) -> MultivariatePolynomial {
        let mut out = MultivariatePolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.accumulate(monomial_mul(ma, mb), Rational::from(ca * cb));
            }
        }
        out
    }
}

impl fmt::Display for MultivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (m, c)) in terms.iter().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            for (i, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*v{i}")?,
                    _ => write!(f, "*v{i}^{e}")?,
                }
            }
        }
        Ok(())
    }
}
