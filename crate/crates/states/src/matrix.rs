//! Fixed-size self-adjoint matrices: products, partial transposes and
//! determinants.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{FieldKind, Scalar};
use crate::StatesError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat<S, const N: usize>(pub [[S; N]; N]);

impl<S: Scalar, const N: usize> Mat<S, N> {
    pub fn zero() -> Self {
        Mat([[S::zero(); N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = S::from_real(1.0);
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..N).map(|i| self.0[i][i].re()).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.0[j][i] = self.0[i][j].conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                for j in 0..N {
                    out.0[i][j] = out.0[i][j] + a * rhs.0[k][j];
                }
            }
        }
        out
    }

    pub fn scale(&self, x: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|e| *e = e.scale(x));
        out
    }

    /// Largest `|a_ij - conj(a_ji)|²`.
    pub fn self_adjoint_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..N {
            for j in 0..N {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm_sqr());
            }
        }
        worst
    }

    /// `C* C` for upper-triangular `C`.
    pub fn gram_upper(c: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in i..N {
                let mut acc = S::zero();
                for k in 0..=i {
                    acc = acc + c.0[k][i].conj() * c.0[k][j];
                }
                out.0[i][j] = acc;
                out.0[j][i] = acc.conj();
            }
        }
        out
    }

    /// `2N×2N` complex matrix representing this one; each entry `z1 + z2 j`
    /// becomes `[[z1, z2], [-z2*, z1*]]`.
    pub fn complex_adjoint(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::from_element(2 * N, 2 * N, Complex64::new(0.0, 0.0));
        for i in 0..N {
            for j in 0..N {
                let (z1, z2) = self.0[i][j].complex_pair();
                out[(2 * i, 2 * j)] = z1;
                out[(2 * i, 2 * j + 1)] = z2;
                out[(2 * i + 1, 2 * j)] = -z2.conj();
                out[(2 * i + 1, 2 * j + 1)] = z1.conj();
            }
        }
        out
    }

    /// Eigenvalues of a self-adjoint matrix, ascending. For quaternion
    /// entries each eigenvalue is listed once.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.complex_adjoint())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        // the complex representation doubles every eigenvalue; real and
        // complex entries embed block-diagonally, so the same applies
        ev.into_iter().step_by(2).collect()
    }
}

/// How off-diagonal entries of a quaternionic block are treated when the
/// block is transposed. For real and complex entries both give the same
/// determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PtConvention {
    /// `(ρ^PT)_{(a,b),(c,d)} = ρ_{(a,d),(c,b)}`.
    Plain,
    /// `(ρ^PT)_{(a,b),(c,d)} = conj(ρ_{(a,d),(c,b)})`.
    Conjugated,
}

impl PtConvention {
    pub const ALL: [PtConvention; 2] = [PtConvention::Plain, PtConvention::Conjugated];

    /// Convention used unless the caller asks otherwise. For quaternions it
    /// is the one whose Monte Carlo moments match the closed forms at α = 2.
    pub fn default_for(field: FieldKind) -> Self {
        match field {
            FieldKind::Real | FieldKind::Complex => PtConvention::Plain,
            FieldKind::Quaternion => crate::calibrate::QUATERNION_CONVENTION,
        }
    }
}

impl std::str::FromStr for PtConvention {
    type Err = StatesError;

    fn from_str(s: &str) -> Result<Self, StatesError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" => Ok(PtConvention::Plain),
            "conjugated" | "conj" => Ok(PtConvention::Conjugated),
            other => Err(StatesError::InvalidArgument(format!(
                "unknown partial-transpose convention {other:?}"
            ))),
        }
    }
}

/// Partial transpose on the second factor of a `dim_a ⊗ dim_b` system,
/// with basis index `a·dim_b + b`.
pub fn partial_transpose<S: Scalar, const N: usize>(
    rho: &Mat<S, N>,
    dim_a: usize,
    dim_b: usize,
    convention: PtConvention,
) -> Result<Mat<S, N>, StatesError> {
    if dim_a * dim_b != N || dim_a < 2 || dim_b < 2 {
        return Err(StatesError::BadBipartition {
            dim: N,
            dim_a,
            dim_b,
        });
    }
    let mut out = Mat::<S, N>::zero();
    for a in 0..dim_a {
        for b in 0..dim_b {
            for c in 0..dim_a {
                for d in 0..dim_b {
                    let v = rho.0[a * dim_b + d][c * dim_b + b];
                    out.0[a * dim_b + b][c * dim_b + d] = match convention {
                        PtConvention::Plain => v,
                        PtConvention::Conjugated => v.conj(),
                    };
                }
            }
        }
    }
    Ok(out)
}

/// Ratio below which a 1×1 pivot is rejected (Bunch–Kaufman constant).
const PIVOT_RATIO: f64 = 0.6404;

/// Determinant of a self-adjoint matrix (the Moore determinant for
/// quaternion entries: the product of its eigenvalues).
///
/// Real and complex entries use Gaussian elimination with partial pivoting.
/// Quaternion entries use `L D L*` elimination with largest-diagonal
/// pivoting; when no diagonal entry is large enough relative to the
/// off-diagonal part, it falls back to the eigenvalues of the complex
/// representation.
pub fn det_self_adjoint<S: Scalar, const N: usize>(m: &Mat<S, N>) -> f64 {
    if S::KIND != FieldKind::Quaternion {
        return lu_det(m);
    }
    ldl_det(m).unwrap_or_else(|| m.eigenvalues().iter().product())
}

/// Gaussian elimination with partial pivoting; commutative entries only.
fn lu_det<S: Scalar, const N: usize>(m: &Mat<S, N>) -> f64 {
    let mut a = m.0;
    let mut det = S::from_real(1.0);
    for k in 0..N {
        let p = (k..N)
            .max_by(|&i, &j| a[i][k].norm_sqr().total_cmp(&a[j][k].norm_sqr()))
            .unwrap_or(k);
        let size = a[p][k].norm_sqr();
        if size == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = det.scale(-1.0);
        }
        let pivot = a[k][k];
        det = det * pivot;
        let inv = pivot.conj().scale(1.0 / size);
        for i in (k + 1)..N {
            let l = a[i][k] * inv;
            for j in (k + 1)..N {
                a[i][j] = a[i][j] - l * a[k][j];
            }
        }
    }
    det.re()
}

fn ldl_det<S: Scalar, const N: usize>(m: &Mat<S, N>) -> Option<f64> {
    let mut a = m.0;
    let mut perm: [usize; N] = std::array::from_fn(|i| i);
    let mut det = 1.0;
    for k in 0..N {
        // pick the largest remaining diagonal
        let mut p = k;
        let mut best = a[perm[k]][perm[k]].re().abs();
        for i in (k + 1)..N {
            let v = a[perm[i]][perm[i]].re().abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        let mut off = 0.0_f64;
        for i in k..N {
            for j in (i + 1)..N {
                off = off.max(a[perm[i]][perm[j]].norm_sqr());
            }
        }
        let off = off.sqrt();
        if best == 0.0 && off == 0.0 {
            return Some(0.0);
        }
        if best < PIVOT_RATIO * off {
            return None;
        }
        perm.swap(k, p);
        let pk = perm[k];
        let d = a[pk][pk].re();
        det *= d;
        for i in (k + 1)..N {
            let pi = perm[i];
            let l = a[pi][pk].scale(1.0 / d);
            for j in (k + 1)..N {
                let pj = perm[j];
                a[pi][pj] = a[pi][pj] - l * a[pk][pj];
            }
        }
    }
    Some(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Quat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian<S: Scalar, const N: usize>(rng: &mut ChaCha8Rng) -> Mat<S, N> {
        let mut m = Mat::<S, N>::zero();
        for i in 0..N {
            m.0[i][i] = S::from_real(S::gaussian(rng).re());
            for j in (i + 1)..N {
                let v = S::gaussian(rng);
                m.0[i][j] = v;
                m.0[j][i] = v.conj();
            }
        }
        m
    }

    #[test]
    fn identity_over_four() {
        let m = Mat::<f64, 4>::identity().scale(0.25);
        assert!((det_self_adjoint(&m) - 1.0 / 256.0).abs() < 1e-18);
    }

    #[test]
    fn ldl_matches_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let q = random_hermitian::<Quat, 4>(&mut rng);
            let ev: f64 = q.eigenvalues().iter().product();
            if let Some(d) = ldl_det(&q) {
                assert!((d - ev).abs() <= 1e-9 * ev.abs().max(1.0), "{d} vs {ev}");
            }
            let c = random_hermitian::<Complex64, 6>(&mut rng);
            let ev: f64 = c.eigenvalues().iter().product();
            let lu = c.complex_adjoint().determinant();
            assert!((det_self_adjoint(&c) - ev).abs() <= 1e-9 * ev.abs().max(1.0));
            assert!((lu.re - ev * ev).abs() <= 1e-8 * (ev * ev).max(1.0));
        }
    }

    #[test]
    fn elimination_matches_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let c = random_hermitian::<Complex64, 4>(&mut rng);
            let ev: f64 = c.eigenvalues().iter().product();
            assert!((lu_det(&c) - ev).abs() <= 1e-9 * ev.abs().max(1.0));
            let r = random_hermitian::<f64, 6>(&mut rng);
            let ev: f64 = r.eigenvalues().iter().product();
            assert!((lu_det(&r) - ev).abs() <= 1e-9 * ev.abs().max(1.0));
        }
    }

    #[test]
    fn fallback_handles_zero_diagonal() {
        let mut m = Mat::<f64, 2>::zero();
        m.0[0][1] = 1.0;
        m.0[1][0] = 1.0;
        assert!(ldl_det(&m).is_none());
        assert!((det_self_adjoint(&m) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let q = random_hermitian::<Quat, 4>(&mut rng);
            for conv in PtConvention::ALL {
                let pt = partial_transpose(&q, 2, 2, conv).unwrap();
                assert!(pt.self_adjoint_defect() < 1e-24);
                assert_eq!(partial_transpose(&pt, 2, 2, conv).unwrap(), q);
            }
            let c = random_hermitian::<Complex64, 6>(&mut rng);
            let pt = partial_transpose(&c, 3, 2, PtConvention::Plain).unwrap();
            assert_eq!(
                partial_transpose(&pt, 3, 2, PtConvention::Plain).unwrap(),
                c
            );
            // transposing the qutrit instead gives the full transpose of pt
            let mut other = Mat::<Complex64, 6>::zero();
            for (a, b, x, d) in qutrit_qubit_indices() {
                other.0[a * 2 + b][x * 2 + d] = c.0[x * 2 + b][a * 2 + d];
            }
            let (d1, d2) = (det_self_adjoint(&pt), det_self_adjoint(&other));
            assert!((d1 - d2).abs() < 1e-9 * d1.abs().max(1.0));
        }
    }

    fn qutrit_qubit_indices() -> impl Iterator<Item = (usize, usize, usize, usize)> {
        (0..3).flat_map(|a| {
            (0..2).flat_map(move |b| (0..3).flat_map(move |x| (0..2).map(move |d| (a, b, x, d))))
        })
    }

    #[test]
    fn bad_bipartition() {
        let m = Mat::<f64, 4>::identity();
        assert!(matches!(
            partial_transpose(&m, 3, 2, PtConvention::Plain),
            Err(StatesError::BadBipartition { .. })
        ));
    }
}
