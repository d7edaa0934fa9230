//! Symbolic density matrices `ρ = C* C` over the Cholesky coordinates.
//!
//! Slots 0..4 hold the real diagonal entries `x1..x4` of `C`, slots 4..10
//! the off-diagonal entries `x5..x10` (row by row) and, for complex
//! entries, slots 10..16 their conjugates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use sepprob_core::exact::Rational;

use crate::poly::{MultivariatePolynomial as Poly, SLOTS};
use crate::SymbolicError;

/// Entry field of the symbolic state, fixing the Dyson index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    /// α = 1/2.
    Real,
    /// α = 1.
    Complex,
}

impl Field {
    pub const ALL: [Field; 2] = [Field::Real, Field::Complex];

    pub fn alpha(self) -> Rational {
        match self {
            Field::Real => Rational::from((1, 2)),
            Field::Complex => Rational::from(1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }

    /// Field with Dyson index `alpha`, if it is 1/2 or 1.
    pub fn from_alpha(alpha: &Rational) -> Result<Self, SymbolicError> {
        Field::ALL
            .into_iter()
            .find(|f| f.alpha() == *alpha)
            .ok_or_else(|| SymbolicError::UnsupportedAlpha(alpha.to_string()))
    }

    /// Slot holding the conjugate of slot `s`.
    pub fn conj_slot(self, s: usize) -> usize {
        match (self, s) {
            (Field::Real, _) | (_, 0..=3) => s,
            (Field::Complex, 4..=9) => s + 6,
            (Field::Complex, _) => s - 6,
        }
    }

    /// Number of slots in use.
    pub fn slots(self) -> usize {
        match self {
            Field::Real => 10,
            Field::Complex => SLOTS,
        }
    }

    pub fn conjugate(self, p: &Poly) -> Poly {
        let perm: [usize; SLOTS] = std::array::from_fn(|s| self.conj_slot(s));
        p.permute_slots(&perm)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, SymbolicError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" | "rebit" => Ok(Field::Real),
            "complex" | "qubit" => Ok(Field::Complex),
            other => Err(SymbolicError::UnsupportedField(other.to_string())),
        }
    }
}

pub type PolyMatrix = Vec<Vec<Poly>>;

/// Slot of the diagonal Cholesky entry `x4`.
pub const X4: usize = 3;

/// `(row, col)` of `C` for `x5..x10`.
const OFF_DIAGONAL: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Upper-triangular symbolic Cholesky factor and its entrywise conjugate.
fn cholesky_factor(field: Field) -> (PolyMatrix, PolyMatrix) {
    let mut c = vec![vec![Poly::zero(); 4]; 4];
    let mut cbar = vec![vec![Poly::zero(); 4]; 4];
    for i in 0..4 {
        c[i][i] = Poly::var(i);
        cbar[i][i] = Poly::var(i);
    }
    for (j, &(r, s)) in OFF_DIAGONAL.iter().enumerate() {
        c[r][s] = Poly::var(4 + j);
        cbar[r][s] = Poly::var(field.conj_slot(4 + j));
    }
    (c, cbar)
}

/// `ρ = C* C` with symbolic upper-triangular `C`.
pub fn build_rho_symbolic(field: Field) -> PolyMatrix {
    let (c, cbar) = cholesky_factor(field);
    let mut rho = vec![vec![Poly::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = Poly::zero();
            for k in 0..=i.min(j) {
                acc = &acc + &(&cbar[k][i] * &c[k][j]);
            }
            rho[i][j] = acc;
        }
    }
    rho
}

pub fn trace(m: &PolyMatrix) -> Poly {
    m.iter()
        .enumerate()
        .fold(Poly::zero(), |acc, (i, row)| &acc + &row[i])
}

/// Transpose of each 2×2 block of a 4×4 matrix.
pub fn partial_transpose(m: &PolyMatrix) -> PolyMatrix {
    (0..4)
        .map(|i| {
            (0..4)
                .map(|j| m[2 * (i / 2) + j % 2][2 * (j / 2) + i % 2].clone())
                .collect()
        })
        .collect()
}

fn det_expand(m: &[Vec<Poly>], cols: &[usize]) -> Poly {
    let row = m.len() - cols.len();
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = Poly::zero();
    for (idx, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = &m[row][c] * &det_expand(m, &rest);
        acc = if idx % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

/// Determinant by cofactor expansion. For a self-adjoint matrix the result
/// must be invariant under conjugation of the variables.
pub fn det_poly(m: &PolyMatrix, field: Field) -> Result<Poly, SymbolicError> {
    let n = m.len();
    if n == 0 || n > 4 || m.iter().any(|row| row.len() != n) {
        return Err(SymbolicError::NotSquare(n));
    }
    let cols: Vec<usize> = (0..n).collect();
    let det = det_expand(m, &cols);
    if field.conjugate(&det) != det {
        return Err(SymbolicError::NotReal);
    }
    Ok(det)
}

/// `|ρ^PT| − |ρ| = f1 + x4² f2` with `f1`, `f2` free of `x4`.
#[derive(Clone, Debug)]
pub struct PtDecomposition {
    pub field: Field,
    pub diff: Poly,
    pub f1: Poly,
    pub f2: Poly,
}

pub fn decompose_pt_diff(field: Field) -> Result<PtDecomposition, SymbolicError> {
    let rho = build_rho_symbolic(field);
    let det = det_poly(&rho, field)?;
    let det_pt = det_poly(&partial_transpose(&rho), field)?;
    let diff = &det_pt - &det;
    let mut parts = diff.split_by(X4);
    if parts
        .iter()
        .enumerate()
        .any(|(e, p)| e != 0 && e != 2 && !p.is_zero())
    {
        return Err(SymbolicError::DecompositionFailed);
    }
    parts.resize(3, Poly::zero());
    let f2 = parts.swap_remove(2);
    let f1 = parts.swap_remove(0);
    Ok(PtDecomposition {
        field,
        diff,
        f1,
        f2,
    })
}
