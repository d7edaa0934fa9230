//! Closed forms for low-order `|ρ|^k`-weighted moments of `|ρ^PT| − |ρ|` on
//! 2×3 (qubit-qutrit) systems, as rational functions of `k`.

use std::fmt;
use std::str::FromStr;

use crate::exact::Rational;

use super::MomentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClosedFormCase {
    /// Real Hilbert–Schmidt, first moment.
    RealHsN1,
    /// Complex Hilbert–Schmidt, first moment.
    ComplexHsN1,
    /// Quaternionic Hilbert–Schmidt, first moment.
    QuaternionHsN1,
    RealHsN2,
    ComplexHsN2,
    RealHsN3,
    /// Real Bures, first moment.
    RealBuresN1,
    /// Complex Bures, first moment.
    ComplexBuresN1,
    RealBuresN2,
}

/// `constant · ∏ num_factors / ∏ den_factors`, every factor a polynomial in
/// `k` with integer coefficients listed from the constant term up.
struct Form {
    constant: (i64, i64),
    numerator: &'static [&'static [i64]],
    denominator: &'static [&'static [i64]],
}

const RR1: Form = Form {
    constant: (-5, 96),
    numerator: &[&[2, 1], &[3, 1], &[7, 2]],
    denominator: &[&[4, 1], &[11, 3], &[13, 3], &[23, 6], &[25, 6]],
};

const QQ1: Form = Form {
    constant: (-1, 3),
    numerator: &[&[3, 1], &[5, 1], &[11, 2]],
    denominator: &[&[13, 2], &[19, 3], &[20, 3], &[37, 6], &[41, 6]],
};

const QUAT1: Form = Form {
    constant: (-5, 6),
    numerator: &[&[1194, 521, 70, 3]],
    denominator: &[&[23, 2], &[34, 3], &[35, 3], &[67, 6], &[71, 6]],
};

const RR2: Form = Form {
    constant: (5, 82944),
    numerator: &[&[192132, 302033, 193602, 63561, 10974, 900, 24]],
    denominator: &[
        &[5, 1],
        &[11, 3],
        &[13, 3],
        &[14, 3],
        &[16, 3],
        &[23, 6],
        &[25, 6],
        &[29, 6],
        &[31, 6],
    ],
};

const QQ2: Form = Form {
    constant: (1, 108),
    numerator: &[&[112680, 119856, 51964, 11475, 1315, 69, 1]],
    denominator: &[
        &[15, 2],
        &[19, 3],
        &[20, 3],
        &[22, 3],
        &[23, 3],
        &[37, 6],
        &[41, 6],
        &[43, 6],
        &[47, 6],
    ],
};

const RR3: Form = Form {
    constant: (-35, 663552),
    numerator: &[&[
        3920730, 7669535, 6400915, 2987211, 852799, 152052, 16438, 976, 24,
    ]],
    denominator: &[
        &[6, 1],
        &[11, 3],
        &[13, 3],
        &[14, 3],
        &[16, 3],
        &[17, 3],
        &[19, 3],
        &[23, 6],
        &[25, 6],
        &[29, 6],
        &[31, 6],
        &[35, 6],
        &[37, 6],
    ],
};

const RB1: Form = Form {
    constant: (-1, 128),
    numerator: &[&[173, 245, 112, 16]],
    denominator: &[&[2, 1], &[2, 1], &[3, 2], &[5, 2], &[7, 2]],
};

const QB1: Form = Form {
    constant: (-3, 128),
    numerator: &[&[1005, 998, 320, 32]],
    denominator: &[&[3, 1], &[4, 1], &[5, 1], &[9, 4], &[11, 4]],
};

const RB2: Form = Form {
    constant: (1, 4194304),
    numerator: &[&[
        311220769578,
        660408583199,
        570485963797,
        254319857272,
        65217922488,
        16462195504,
        8000700112,
        3257689088,
        745901568,
        87822336,
        4182016,
    ]],
    denominator: &[
        &[2, 1],
        &[2, 1],
        &[3, 1],
        &[3, 1],
        &[3, 2],
        &[5, 2],
        &[5, 2],
        &[7, 2],
        &[9, 2],
        &[11, 2],
    ],
};

fn eval_poly(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::new(), |acc, c| acc * x + c)
}

fn mul_poly(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Rational::from(x * y);
        }
    }
    out
}

fn to_rational(coeffs: &[i64]) -> Vec<Rational> {
    coeffs.iter().map(|&c| Rational::from(c)).collect()
}

/// Coefficients of `p(x + shift)`.
fn taylor_shift(p: &[Rational], shift: &Rational) -> Vec<Rational> {
    // Horner in polynomial arithmetic: p(x+s) = (...(c_d (x+s) + c_{d-1})(x+s) ...)
    let linear = [shift.clone(), Rational::from(1)];
    let (lead, rest) = p.split_last().expect("nonempty polynomial");
    rest.iter().rev().fold(vec![lead.clone()], |acc, c| {
        let mut next = mul_poly(&acc, &linear);
        next[0] += c;
        next
    })
}

impl ClosedFormCase {
    pub const ALL: [ClosedFormCase; 9] = [
        ClosedFormCase::RealHsN1,
        ClosedFormCase::ComplexHsN1,
        ClosedFormCase::QuaternionHsN1,
        ClosedFormCase::RealHsN2,
        ClosedFormCase::ComplexHsN2,
        ClosedFormCase::RealHsN3,
        ClosedFormCase::RealBuresN1,
        ClosedFormCase::ComplexBuresN1,
        ClosedFormCase::RealBuresN2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosedFormCase::RealHsN1 => "RR_HS_n1",
            ClosedFormCase::ComplexHsN1 => "QQ_HS_n1",
            ClosedFormCase::QuaternionHsN1 => "QUAT_HS_n1",
            ClosedFormCase::RealHsN2 => "RR_HS_n2",
            ClosedFormCase::ComplexHsN2 => "QQ_HS_n2",
            ClosedFormCase::RealHsN3 => "RR_HS_n3",
            ClosedFormCase::RealBuresN1 => "RB_BURES_n1",
            ClosedFormCase::ComplexBuresN1 => "QB_BURES_n1",
            ClosedFormCase::RealBuresN2 => "RB_BURES_n2",
        }
    }

    /// Moment order `n`.
    pub fn order(self) -> u32 {
        match self {
            ClosedFormCase::RealHsN2
            | ClosedFormCase::ComplexHsN2
            | ClosedFormCase::RealBuresN2 => 2,
            ClosedFormCase::RealHsN3 => 3,
            _ => 1,
        }
    }

    /// Dyson index for Hilbert–Schmidt cases; `None` for Bures.
    pub fn alpha(self) -> Option<(i64, i64)> {
        match self {
            ClosedFormCase::RealHsN1 | ClosedFormCase::RealHsN2 | ClosedFormCase::RealHsN3 => {
                Some((1, 2))
            }
            ClosedFormCase::ComplexHsN1 | ClosedFormCase::ComplexHsN2 => Some((1, 1)),
            ClosedFormCase::QuaternionHsN1 => Some((2, 1)),
            _ => None,
        }
    }

    /// The shift `r` for which the numerator, rewritten in `K = k + r`, has
    /// no `K^{d-1}` term.
    pub fn reference_shift(self) -> Rational {
        let (n, d) = match self {
            ClosedFormCase::RealHsN1 => (17, 6),
            ClosedFormCase::ComplexHsN1 => (9, 2),
            ClosedFormCase::QuaternionHsN1 => (70, 9),
            ClosedFormCase::RealHsN2 => (25, 4),
            ClosedFormCase::ComplexHsN2 => (23, 2),
            ClosedFormCase::RealHsN3 => (61, 12),
            ClosedFormCase::RealBuresN1 => (7, 3),
            ClosedFormCase::ComplexBuresN1 => (10, 3),
            ClosedFormCase::RealBuresN2 => (21, 10),
        };
        Rational::from((n, d))
    }

    fn form(self) -> &'static Form {
        match self {
            ClosedFormCase::RealHsN1 => &RR1,
            ClosedFormCase::ComplexHsN1 => &QQ1,
            ClosedFormCase::QuaternionHsN1 => &QUAT1,
            ClosedFormCase::RealHsN2 => &RR2,
            ClosedFormCase::ComplexHsN2 => &QQ2,
            ClosedFormCase::RealHsN3 => &RR3,
            ClosedFormCase::RealBuresN1 => &RB1,
            ClosedFormCase::ComplexBuresN1 => &QB1,
            ClosedFormCase::RealBuresN2 => &RB2,
        }
    }

    /// Expanded numerator polynomial (without the constant prefactor).
    pub fn numerator(self) -> Vec<Rational> {
        self.form()
            .numerator
            .iter()
            .map(|f| to_rational(f))
            .fold(vec![Rational::from(1)], |acc, f| mul_poly(&acc, &f))
    }

    /// `⟨|ρ|^k (|ρ^PT| − |ρ|)^n⟩ / ⟨|ρ|^k⟩` at rational `k`.
    pub fn eval(self, k: &Rational) -> Rational {
        let form = self.form();
        let mut value = Rational::from(form.constant);
        for f in form.numerator {
            value *= eval_poly(&to_rational(f), k);
        }
        for f in form.denominator {
            value /= eval_poly(&to_rational(f), k);
        }
        value
    }

    pub fn eval_at(self, k: u32) -> Rational {
        self.eval(&Rational::from(k))
    }

    /// Whether `r` removes the subleading coefficient of the numerator once it
    /// is re-expressed in `K = k + r`, i.e. `p(K - r)` has no `K^{d-1}` term.
    pub fn shift_root_check(self, r: &Rational) -> bool {
        let p = self.numerator();
        let shifted = taylor_shift(&p, &Rational::from(-r));
        let d = shifted.len() - 1;
        d == 0 || shifted[d - 1].cmp0() == std::cmp::Ordering::Equal
    }

    /// The unique shift satisfying [`Self::shift_root_check`]:
    /// `c_{d-1} / (d · c_d)`.
    pub fn shift_root(self) -> Rational {
        let p = self.numerator();
        let d = p.len() - 1;
        &p[d - 1] / Rational::from(&p[d] * d as u32)
    }
}

impl fmt::Display for ClosedFormCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClosedFormCase {
    type Err = MomentError;

    fn from_str(s: &str) -> Result<Self, MomentError> {
        ClosedFormCase::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| MomentError::UnknownVariable(s.to_string()))
    }
}

/// A single rational function of `(α, k)` that reproduces the real and
/// complex Hilbert–Schmidt first moments:
/// `-4α(α+1)(α+2)(2α+k+1)(4α+k+1)(5α+k+1)(8α+2k+3) / ∏_{c=6}^{11}(30α+6k+c)`.
pub fn cross_alpha_fit(alpha: &Rational, k: &Rational) -> Rational {
    let a = alpha;
    let lin = |ca: i64, ck: i64, c: i64| Rational::from(a * ca) + Rational::from(k * ck) + c;
    let mut num = Rational::from(a * -4) * lin(1, 0, 1) * lin(1, 0, 2);
    num *= lin(2, 1, 1);
    num *= lin(4, 1, 1);
    num *= lin(5, 1, 1);
    num *= lin(8, 2, 3);
    let den = (6..=11).fold(Rational::from(1), |acc, c| acc * lin(30, 6, c));
    num / den
}
