//! The two-parameter X-shaped family
//! `ρ = [[u,0,0,v],[0,1/2-u,0,0],[0,0,1/2-u,0],[v,0,0,u]]`, in exact
//! arithmetic. It reaches both ends of the `|ρ^PT| − |ρ|` range.

use sepprob_core::exact::Rational;

use crate::StatesError;

pub type RationalMatrix = [[Rational; 4]; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct ExampleState {
    pub rho: RationalMatrix,
    pub pt: RationalMatrix,
    pub det_rho: Rational,
    pub det_pt: Rational,
}

impl ExampleState {
    pub fn diff(&self) -> Rational {
        Rational::from(&self.det_pt - &self.det_rho)
    }
}

/// Builds the family member at `(u, v)`; requires `0 ≤ u ≤ 1/2` and
/// `|v| ≤ u`, which is exactly positive semidefiniteness.
pub fn example_family(u: &Rational, v: &Rational) -> Result<ExampleState, StatesError> {
    let half = Rational::from((1, 2));
    if *u < 0 || *u > half || Rational::from(v.abs_ref()) > *u {
        return Err(StatesError::NotPsd(format!("u = {u}, v = {v}")));
    }
    let zero = Rational::new;
    let w = Rational::from(&half - u);
    let rho: RationalMatrix = [
        [u.clone(), zero(), zero(), v.clone()],
        [zero(), w.clone(), zero(), zero()],
        [zero(), zero(), w.clone(), zero()],
        [v.clone(), zero(), zero(), u.clone()],
    ];
    let pt = partial_transpose_exact(&rho);
    Ok(ExampleState {
        det_rho: det_exact(&rho),
        det_pt: det_exact(&pt),
        rho,
        pt,
    })
}

/// Transpose of each 2×2 block in place.
pub fn partial_transpose_exact(rho: &RationalMatrix) -> RationalMatrix {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (a, b, c, d) = (i / 2, i % 2, j / 2, j % 2);
            rho[2 * a + d][2 * c + b].clone()
        })
    })
}

/// Exact determinant by Gaussian elimination.
pub fn det_exact(m: &RationalMatrix) -> Rational {
    let mut a = m.clone();
    let mut det = Rational::from(1);
    for k in 0..4 {
        let Some(p) = (k..4).find(|&i| a[i][k] != 0) else {
            return Rational::new();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let pivot = a[k][k].clone();
        det *= &pivot;
        for i in (k + 1)..4 {
            let factor = Rational::from(&a[i][k] / &pivot);
            for j in k..4 {
                let sub = Rational::from(&factor * &a[k][j]);
                a[i][j] -= sub;
            }
        }
    }
    det
}
