//! Exact Hilbert–Schmidt expectations of monomials in the Cholesky
//! coordinates.
//!
//! The squared moduli of the Cholesky entries are Dirichlet distributed, so
//! a monomial whose exponents are all even (real entries) or pair every
//! `x_j` with its conjugate (complex entries) integrates to a ratio of
//! Pochhammer symbols; every other monomial integrates to zero.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sepprob_core::exact::{pochhammer_rational, Integer, Rational};

use crate::poly::{monomial_degree, monomial_mul, Monomial, MultivariatePolynomial as Poly};
use crate::rho::Field;
use crate::SymbolicError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationRule {
    /// Full-rank states.
    Full,
    /// Minimally degenerate states (`x4 = 0`).
    ConditionalX4,
    /// Normalised expectation under the weight `(x1x2x3)^{2k} x4^{2k-2}`,
    /// `⟨w p⟩ / ⟨w⟩`. At `k = 0` it coincides with [`ExpectationRule::ConditionalX4`].
    WeightedK(u32),
}

impl ExpectationRule {
    /// Pochhammer bases for `x1..x4` and for the total degree.
    fn bases(self, alpha: &Rational) -> ([Rational; 4], Rational) {
        let a = alpha.clone();
        let (shift, x4, den) = match self {
            ExpectationRule::Full => (
                0u32,
                Rational::from(1),
                Rational::from(4u32) + Rational::from(&a * 12u32),
            ),
            ExpectationRule::ConditionalX4 => (
                0,
                Rational::new(),
                Rational::from(3u32) + Rational::from(&a * 12u32),
            ),
            ExpectationRule::WeightedK(k) => (
                k,
                Rational::from(k),
                Rational::from(3 + 4 * k) + Rational::from(&a * 12u32),
            ),
        };
        let base = |m: u32| Rational::from(1 + shift) + Rational::from(&a * m);
        ([base(3), base(2), base(1), x4], den)
    }
}

/// Half-exponents `n_1..n_10` of an admissible monomial, or `None` when
/// the monomial integrates to zero.
pub fn half_exponents(m: &Monomial, field: Field) -> Option<[u32; 10]> {
    let mut out = [0u32; 10];
    for i in 0..4 {
        if !m[i].is_multiple_of(2) {
            return None;
        }
        out[i] = u32::from(m[i] / 2);
    }
    for j in 4..10 {
        match field {
            Field::Real => {
                if !m[j].is_multiple_of(2) || m[j + 6] != 0 {
                    return None;
                }
                out[j] = u32::from(m[j] / 2);
            }
            Field::Complex => {
                if m[j] != m[j + 6] {
                    return None;
                }
                out[j] = u32::from(m[j]);
            }
        }
    }
    Some(out)
}

/// Pochhammer tables for one rule, extended on demand.
#[derive(Clone, Debug)]
pub struct MonomialIntegrator {
    field: Field,
    rule: ExpectationRule,
    bases: [Rational; 5],
    denominator: Rational,
    tables: [Vec<Rational>; 5],
    den_table: Vec<Rational>,
}

impl MonomialIntegrator {
    pub fn new(field: Field, rule: ExpectationRule) -> Self {
        let alpha = field.alpha();
        let (diag, denominator) = rule.bases(&alpha);
        let [b1, b2, b3, b4] = diag;
        MonomialIntegrator {
            field,
            rule,
            bases: [b1, b2, b3, b4, alpha],
            denominator,
            tables: Default::default(),
            den_table: Vec::new(),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rule(&self) -> ExpectationRule {
        self.rule
    }

    /// Precomputes tables up to total half-degree `n`.
    pub fn prepare(&mut self, n: u32) {
        let len = n as usize + 1;
        for (table, base) in self.tables.iter_mut().zip(&self.bases) {
            while table.len() < len {
                table.push(pochhammer_rational(base, table.len() as u32));
            }
        }
        while self.den_table.len() < len {
            self.den_table.push(pochhammer_rational(
                &self.denominator,
                self.den_table.len() as u32,
            ));
        }
    }

    /// `⟨m⟩`; tables must cover the monomial's half-degree.
    pub fn integrate(&self, m: &Monomial) -> Rational {
        let Some(n) = half_exponents(m, self.field) else {
            return Rational::new();
        };
        let total: u32 = n.iter().sum();
        let mut num = Rational::from(1);
        for (i, &e) in n.iter().enumerate() {
            if e > 0 {
                num *= &self.tables[i.min(4)][e as usize];
                if num == 0 {
                    return num;
                }
            }
        }
        num / &self.den_table[total as usize]
    }

    pub fn integrate_fresh(&mut self, m: &Monomial) -> Rational {
        self.prepare(monomial_degree(m) / 2);
        self.integrate(m)
    }
}

/// `⟨p⟩` under `rule`, one monomial at a time (no pruning).
pub fn expectation(p: &Poly, rule: ExpectationRule, field: Field) -> Rational {
    let mut integrator = MonomialIntegrator::new(field, rule);
    integrator.prepare(p.total_degree() / 2);
    p.terms()
        .map(|(m, c)| Rational::from(c * &integrator.integrate(m)))
        .fold(Rational::new(), |a, b| a + b)
}

/// `⟨(x1x2x3x4)^{2k}⟩`, the closed form for `⟨|ρ|^k⟩`.
pub fn det_power_closed(k: u32, field: Field) -> Rational {
    let a = field.alpha();
    let b = |m: u32| Rational::from(1u32) + Rational::from(&a * m);
    let den = Rational::from(4u32) + Rational::from(&a * 12u32);
    pochhammer_rational(&b(3), k)
        * pochhammer_rational(&b(2), k)
        * pochhammer_rational(&b(1), k)
        * pochhammer_rational(&Rational::from(1), k)
        / pochhammer_rational(&den, 4 * k)
}

/// `⟨(x1x2x3)^{2k} x4^{2k-2}⟩` in closed form, for `k ≥ 1`.
pub fn degenerate_weight_closed(k: u32, field: Field) -> Rational {
    assert!(k >= 1, "the weight is integrable only for k ≥ 1");
    let a = field.alpha();
    let b = |m: u32| Rational::from(1u32) + Rational::from(&a * m);
    let den = Rational::from(4u32) + Rational::from(&a * 12u32);
    pochhammer_rational(&b(3), k)
        * pochhammer_rational(&b(2), k)
        * pochhammer_rational(&b(1), k)
        * pochhammer_rational(&Rational::from(1), k - 1)
        / pochhammer_rational(&den, 4 * k - 1)
}

/// `(x1x2x3x4)^{2k}`.
pub fn det_weight(k: u32) -> Monomial {
    let mut m = [0u8; crate::poly::SLOTS];
    m[..4].fill(u8::try_from(2 * k).expect("small k"));
    m
}

/// `(x1x2x3)^{2k} x4^{2k-2}`.
pub fn degenerate_weight(k: u32) -> Monomial {
    let mut m = det_weight(k);
    m[3] -= 2;
    m
}

/// Bookkeeping from [`expect_product`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProductStats {
    /// Distinct monomials of the product with nonzero expectation.
    pub monomials_nonzero: u64,
    /// Distinct admissible monomials whose coefficients cancelled or whose
    /// expectation vanished.
    pub monomials_zero: u64,
    /// Term pairs never multiplied because their product integrates to zero.
    pub monomials_pruned: u64,
    /// Term pairs multiplied.
    pub pairs_multiplied: u64,
}

/// Signature of a monomial under the admissibility test; `a·b` is
/// admissible iff `signature(a) == signature(b)` with `b` negated.
fn signature(m: &Monomial, field: Field, negate: bool) -> [i16; 10] {
    let mut s = [0i16; 10];
    for i in 0..4 {
        s[i] = i16::from(m[i] % 2);
    }
    for j in 4..10 {
        s[j] = match field {
            Field::Real => i16::from(m[j] % 2) + 2 * i16::from(m[j + 6]),
            Field::Complex => {
                let d = i16::from(m[j]) - i16::from(m[j + 6]);
                if negate {
                    -d
                } else {
                    d
                }
            }
        };
    }
    if field == Field::Real && negate {
        // odd slots 10..16 can never pair up; keep them distinct from any match
        for j in 4..10 {
            if m[j + 6] != 0 {
                s[j] = -1;
            }
        }
    }
    s
}

fn integer_terms(p: &Poly) -> Result<(Vec<(Monomial, i128)>, Integer), SymbolicError> {
    let mut scale = Integer::from(1);
    for (_, c) in p.terms() {
        scale.lcm_mut(c.denom());
    }
    let terms = p
        .terms()
        .map(|(m, c)| {
            let v = Rational::from(c * &scale);
            v.numer()
                .to_i128()
                .map(|x| (*m, x))
                .ok_or(SymbolicError::Overflow)
        })
        .collect::<Result<_, _>>()?;
    Ok((terms, scale))
}

/// `⟨a · b · shift⟩` under `rule`, multiplying only the term pairs whose
/// product can have a nonzero expectation.
pub fn expect_product(
    a: &Poly,
    b: &Poly,
    shift: &Monomial,
    rule: ExpectationRule,
    field: Field,
) -> Result<(Rational, ProductStats), SymbolicError> {
    let (a_terms, a_scale) = integer_terms(a)?;
    let (b_terms, b_scale) = integer_terms(b)?;
    if signature(shift, field, false).iter().any(|&x| x != 0) {
        return Err(SymbolicError::InadmissibleWeight);
    }

    let mut buckets: HashMap<[i16; 10], Vec<(Monomial, i128)>> = HashMap::new();
    for (m, c) in &b_terms {
        buckets
            .entry(signature(m, field, true))
            .or_default()
            .push((*m, *c));
    }

    let chunk = (a_terms.len() / (4 * rayon::current_num_threads()).max(1)).max(1);
    let partials: Vec<Result<(HashMap<Monomial, i128>, u64), SymbolicError>> = a_terms
        .par_chunks(chunk)
        .map(|part| {
            let mut acc: HashMap<Monomial, i128> = HashMap::new();
            let mut pairs = 0u64;
            for (ma, ca) in part {
                let Some(bucket) = buckets.get(&signature(ma, field, false)) else {
                    continue;
                };
                let base = monomial_mul(ma, shift);
                for (mb, cb) in bucket {
                    let c = ca.checked_mul(*cb).ok_or(SymbolicError::Overflow)?;
                    let slot = acc.entry(monomial_mul(&base, mb)).or_insert(0);
                    *slot = slot.checked_add(c).ok_or(SymbolicError::Overflow)?;
                }
                pairs += bucket.len() as u64;
            }
            Ok((acc, pairs))
        })
        .collect();

    let mut merged: HashMap<Monomial, i128> = HashMap::new();
    let mut stats = ProductStats::default();
    for part in partials {
        let (acc, pairs) = part?;
        stats.pairs_multiplied += pairs;
        for (m, c) in acc {
            let slot = merged.entry(m).or_insert(0);
            *slot = slot.checked_add(c).ok_or(SymbolicError::Overflow)?;
        }
    }
    stats.monomials_pruned =
        (a_terms.len() as u64) * (b_terms.len() as u64) - stats.pairs_multiplied;

    let mut integrator = MonomialIntegrator::new(field, rule);
    let max_half = merged
        .keys()
        .map(|m| monomial_degree(m) / 2)
        .max()
        .unwrap_or(0);
    integrator.prepare(max_half);
    let entries: Vec<(Monomial, i128)> = merged.into_iter().collect();
    let (sum, nonzero) = entries
        .par_iter()
        .map(|(m, c)| {
            if *c == 0 {
                return (Rational::new(), 0u64);
            }
            let e = integrator.integrate(m);
            let hit = u64::from(e != 0);
            (e * Integer::from(*c), hit)
        })
        .reduce(|| (Rational::new(), 0), |x, y| (x.0 + y.0, x.1 + y.1));
    stats.monomials_nonzero = nonzero;
    stats.monomials_zero = entries.len() as u64 - nonzero;
    Ok((sum / Rational::from(a_scale * b_scale), stats))
}

/// `⟨p^n · shift⟩`, split as `p^⌈n/2⌉ · p^⌊n/2⌋`.
pub fn expect_power(
    p: &Poly,
    n: u32,
    shift: &Monomial,
    rule: ExpectationRule,
    field: Field,
) -> Result<(Rational, ProductStats), SymbolicError> {
    let hi = p.pow(n.div_ceil(2));
    let lo = p.pow(n / 2);
    expect_product(&hi, &lo, shift, rule, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ONE;
    use crate::rho::{build_rho_symbolic, trace};

    fn x(slot: usize, e: u8) -> Monomial {
        let mut m = ONE;
        m[slot] = e;
        m
    }

    #[test]
    fn simple_values() {
        for field in Field::ALL {
            assert_eq!(expectation(&Poly::one(), ExpectationRule::Full, field), 1);
            let x1sq = Poly::monomial(x(0, 2), Rational::from(1));
            assert_eq!(
                expectation(&x1sq, ExpectationRule::Full, field),
                Rational::from((1, 4))
            );
            let x4sq = Poly::monomial(x(3, 2), Rational::from(1));
            assert_eq!(expectation(&x4sq, ExpectationRule::ConditionalX4, field), 0);
            let odd = Poly::monomial(x(5, 1), Rational::from(1));
            assert_eq!(expectation(&odd, ExpectationRule::Full, field), 0);
        }
    }

    #[test]
    fn trace_powers_integrate_to_one() {
        for field in Field::ALL {
            let tr = trace(&build_rho_symbolic(field));
            for m in 0..=4 {
                assert_eq!(
                    expectation(&tr.pow(m), ExpectationRule::Full, field),
                    1,
                    "{field} m={m}"
                );
                assert_eq!(
                    expectation(&tr.pow(m), ExpectationRule::ConditionalX4, field),
                    1
                );
            }
        }
    }

    #[test]
    fn closed_weights_match_monomial_rule() {
        for field in Field::ALL {
            let mut full = MonomialIntegrator::new(field, ExpectationRule::Full);
            for k in 1..=3 {
                assert_eq!(
                    full.integrate_fresh(&det_weight(k)),
                    det_power_closed(k, field)
                );
                assert_eq!(
                    full.integrate_fresh(&degenerate_weight(k)),
                    degenerate_weight_closed(k, field)
                );
            }
            assert_eq!(det_power_closed(0, field), 1);
        }
    }

    #[test]
    fn weighted_rule_is_a_normalised_shift_of_the_full_rule() {
        for field in Field::ALL {
            let mut full = MonomialIntegrator::new(field, ExpectationRule::Full);
            for k in 1..=2 {
                let w = degenerate_weight(k);
                let norm = full.integrate_fresh(&w);
                let mut weighted = MonomialIntegrator::new(field, ExpectationRule::WeightedK(k));
                for m in [
                    x(0, 2),
                    x(3, 4),
                    monomial_mul(&x(4, 2), &x(2, 2)),
                    monomial_mul(&x(9, 2), &x(3, 2)),
                ] {
                    let m = if field == Field::Complex {
                        let mut c = m;
                        for j in 4..10 {
                            c[j] /= 2;
                            c[j + 6] = c[j];
                        }
                        c
                    } else {
                        m
                    };
                    let lhs = weighted.integrate_fresh(&m);
                    let rhs = full.integrate_fresh(&monomial_mul(&m, &w)) / &norm;
                    assert_eq!(lhs, rhs);
                }
            }
            // k → 0 limit
            let mut w0 = MonomialIntegrator::new(field, ExpectationRule::WeightedK(0));
            let mut c = MonomialIntegrator::new(field, ExpectationRule::ConditionalX4);
            for m in [x(0, 4), x(3, 2), x(1, 2)] {
                assert_eq!(w0.integrate_fresh(&m), c.integrate_fresh(&m));
            }
        }
    }

    #[test]
    fn pruned_product_matches_direct_expectation() {
        for field in Field::ALL {
            let rho = build_rho_symbolic(field);
            let p = &(&rho[0][1] * &rho[1][0]) + &rho[2][3];
            let q = &(&rho[2][3] * &rho[3][2]) - &rho[0][2];
            let direct = expectation(&(&p * &q), ExpectationRule::Full, field);
            let (pruned, stats) =
                expect_product(&p, &q, &ONE, ExpectationRule::Full, field).unwrap();
            assert_eq!(direct, pruned);
            assert!(stats.monomials_pruned > 0);
        }
    }
}
