//! Hilbert–Schmidt random density matrices.
//!
//! The main sampler draws an upper-triangular Cholesky factor `C` and
//! returns `ρ = C* C`. Under the Hilbert–Schmidt measure the squared moduli
//! `y_j = |C_j|²` of the factor entries are Dirichlet distributed, with
//! parameter `1 + (N-1-i)α` for diagonal entry `i` and `α` for every
//! off-diagonal entry; phases are uniform on the unit sphere of the field.
//! Then `|ρ| = ∏ y_ii` directly.

use std::marker::PhantomData;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::field::{FieldKind, Scalar};
use crate::matrix::{det_self_adjoint, partial_transpose, Mat, PtConvention};
use crate::StatesError;

/// One sampled state with its determinants.
#[derive(Clone, Copy, Debug)]
pub struct DensityMatrixSample<S, const N: usize> {
    pub rho: Mat<S, N>,
    pub det_rho: f64,
    pub det_pt: f64,
    /// Drawn from the rank-deficient (`x_N = 0`) ensemble.
    pub is_degenerate: bool,
}

impl<S: Scalar, const N: usize> DensityMatrixSample<S, N> {
    pub fn diff(&self) -> f64 {
        self.det_pt - self.det_rho
    }
}

/// `(dim_a, dim_b)` for the supported sizes: two qubits, or a qutrit ⊗
/// qubit with the qubit transposed.
pub fn bipartition(n: usize) -> Result<(usize, usize), StatesError> {
    match n {
        4 => Ok((2, 2)),
        6 => Ok((3, 2)),
        other => Err(StatesError::BadBipartition {
            dim: other,
            dim_a: 0,
            dim_b: 0,
        }),
    }
}

/// Cholesky/Dirichlet sampler for `N×N` states over the field `S`.
#[derive(Clone, Debug)]
pub struct CholeskySampler<S, const N: usize> {
    gammas: Vec<Gamma<f64>>,
    degenerate: bool,
    _field: PhantomData<S>,
}

impl<S: Scalar, const N: usize> CholeskySampler<S, N> {
    fn build(degenerate: bool) -> Self {
        let alpha = S::KIND.alpha_f64();
        let gammas = Self::parameters_for(alpha, degenerate)
            .into_iter()
            .map(|shape| Gamma::new(shape, 1.0).expect("positive Dirichlet parameter"))
            .collect();
        CholeskySampler {
            gammas,
            degenerate,
            _field: PhantomData,
        }
    }

    /// Dirichlet parameters: diagonal entries first, then the off-diagonal
    /// entries row by row. The degenerate ensemble omits the last diagonal.
    fn parameters_for(alpha: f64, degenerate: bool) -> Vec<f64> {
        let diag = if degenerate { N - 1 } else { N };
        let mut out: Vec<f64> = (0..diag)
            .map(|i| 1.0 + (N - 1 - i) as f64 * alpha)
            .collect();
        out.extend(std::iter::repeat_n(alpha, N * (N - 1) / 2));
        out
    }

    /// Hilbert–Schmidt measure on full-rank states.
    pub fn hilbert_schmidt() -> Self {
        Self::build(false)
    }

    /// Hilbert–Schmidt measure restricted to states with `C_NN = 0`
    /// (minimally degenerate, `|ρ| = 0`). Defined for real and complex
    /// entries only.
    pub fn degenerate() -> Result<Self, StatesError> {
        if S::KIND == FieldKind::Quaternion {
            return Err(StatesError::Unsupported(
                "degenerate sampling is defined for real and complex entries".into(),
            ));
        }
        Ok(Self::build(true))
    }

    pub fn dirichlet_parameters(&self) -> Vec<f64> {
        Self::parameters_for(S::KIND.alpha_f64(), self.degenerate)
    }

    /// Draws `(C, |ρ|)`.
    pub fn sample_factor<R: Rng + ?Sized>(&self, rng: &mut R) -> (Mat<S, N>, f64) {
        let mut y = [0.0_f64; 64];
        let y = &mut y[..self.gammas.len()];
        let mut total = 0.0;
        for (slot, g) in y.iter_mut().zip(&self.gammas) {
            *slot = g.sample(rng);
            total += *slot;
        }
        y.iter_mut().for_each(|v| *v /= total);

        let mut c = Mat::<S, N>::zero();
        let diag = if self.degenerate { N - 1 } else { N };
        let mut det = if self.degenerate { 0.0 } else { 1.0 };
        for i in 0..diag {
            c.0[i][i] = S::from_real(y[i].sqrt());
            if !self.degenerate {
                det *= y[i];
            }
        }
        let mut slot = diag;
        for i in 0..N {
            for j in (i + 1)..N {
                c.0[i][j] = S::random_unit(rng).scale(y[slot].sqrt());
                slot += 1;
            }
        }
        (c, det)
    }

    /// Draws a state and evaluates `|ρ|` and `|ρ^PT|`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        convention: PtConvention,
    ) -> DensityMatrixSample<S, N> {
        let (c, det_rho) = self.sample_factor(rng);
        let rho = Mat::gram_upper(&c);
        let (da, db) = bipartition(N).expect("supported dimension");
        let pt = partial_transpose(&rho, da, db, convention).expect("valid bipartition");
        DensityMatrixSample {
            rho,
            det_rho,
            det_pt: det_self_adjoint(&pt),
            is_degenerate: self.degenerate,
        }
    }
}

/// One Hilbert–Schmidt two-qubit state over `S`.
pub fn sample_cholesky_hs<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> DensityMatrixSample<S, 4> {
    CholeskySampler::<S, 4>::hilbert_schmidt().sample(rng, PtConvention::default_for(S::KIND))
}

/// One minimally degenerate two-qubit state over `S` (real or complex).
pub fn sample_degenerate<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
) -> Result<DensityMatrixSample<S, 4>, StatesError> {
    Ok(CholeskySampler::<S, 4>::degenerate()?.sample(rng, PtConvention::Plain))
}

/// One Hilbert–Schmidt qubit–qutrit state over `S` (real or complex).
pub fn sample_qubit_qutrit<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
) -> Result<DensityMatrixSample<S, 6>, StatesError> {
    if S::KIND == FieldKind::Quaternion {
        return Err(StatesError::Unsupported(
            "6×6 sampling is defined for real and complex entries".into(),
        ));
    }
    Ok(CholeskySampler::<S, 6>::hilbert_schmidt().sample(rng, PtConvention::Plain))
}

/// Induced-measure sampler `ρ = G G* / tr(G G*)` with `G` an `N×K` Gaussian
/// matrix; Hilbert–Schmidt for `K = N` (complex) and `K = N + 1` (real).
#[derive(Clone, Copy, Debug)]
pub struct GinibreSampler<S, const N: usize> {
    columns: usize,
    _field: PhantomData<S>,
}

impl<S: Scalar, const N: usize> GinibreSampler<S, N> {
    pub fn hilbert_schmidt() -> Result<Self, StatesError> {
        let columns = match S::KIND {
            FieldKind::Complex => N,
            FieldKind::Real => N + 1,
            FieldKind::Quaternion => {
                return Err(StatesError::Unsupported(
                    "no Ginibre construction of the quaternionic HS measure".into(),
                ))
            }
        };
        Ok(GinibreSampler {
            columns,
            _field: PhantomData,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DensityMatrixSample<S, N> {
        let mut g = [[S::zero(); 8]; N];
        for row in g.iter_mut() {
            for entry in row.iter_mut().take(self.columns) {
                *entry = S::gaussian(rng);
            }
        }
        let mut rho = Mat::<S, N>::zero();
        for i in 0..N {
            for j in i..N {
                let mut acc = S::zero();
                for k in 0..self.columns {
                    acc = acc + g[i][k] * g[j][k].conj();
                }
                rho.0[i][j] = acc;
                rho.0[j][i] = acc.conj();
            }
        }
        let rho = rho.scale(1.0 / rho.trace());
        let (da, db) = bipartition(N).expect("supported dimension");
        let pt = partial_transpose(&rho, da, db, PtConvention::Plain).expect("valid bipartition");
        DensityMatrixSample {
            rho,
            det_rho: det_self_adjoint(&rho),
            det_pt: det_self_adjoint(&pt),
            is_degenerate: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Quat;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dirichlet_parameters() {
        let s = CholeskySampler::<Complex64, 4>::hilbert_schmidt();
        assert_eq!(
            s.dirichlet_parameters(),
            vec![4.0, 3.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
        );
        let s = CholeskySampler::<f64, 4>::degenerate().unwrap();
        assert_eq!(
            s.dirichlet_parameters(),
            vec![2.5, 2.0, 1.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]
        );
        let s = CholeskySampler::<f64, 6>::hilbert_schmidt();
        let p = s.dirichlet_parameters();
        assert_eq!(p.len(), 21);
        assert_eq!(&p[..6], &[3.5, 3.0, 2.5, 2.0, 1.5, 1.0]);
        assert!(CholeskySampler::<Quat, 4>::degenerate().is_err());
    }

    fn check_state<S: Scalar, const N: usize>(s: &DensityMatrixSample<S, N>, det_max: f64) {
        assert!((s.rho.trace() - 1.0).abs() < 1e-14);
        assert!(s.rho.self_adjoint_defect() < 1e-30);
        let ev = s.rho.eigenvalues();
        assert!(ev[0] > -1e-12);
        assert!(s.det_rho >= 0.0 && s.det_rho <= det_max + 1e-12);
        let direct: f64 = ev.iter().product();
        assert!((direct - s.det_rho).abs() < 1e-12);
    }

    #[test]
    fn samples_are_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            check_state(&sample_cholesky_hs::<f64, _>(&mut rng), 1.0 / 256.0);
            check_state(&sample_cholesky_hs::<Complex64, _>(&mut rng), 1.0 / 256.0);
            check_state(&sample_cholesky_hs::<Quat, _>(&mut rng), 1.0 / 256.0);
            check_state(
                &sample_qubit_qutrit::<Complex64, _>(&mut rng).unwrap(),
                1.0 / 46656.0,
            );
            let d = sample_degenerate::<Complex64, _>(&mut rng).unwrap();
            assert_eq!(d.det_rho, 0.0);
            assert!(d.rho.eigenvalues()[0].abs() < 1e-12);
            let g = GinibreSampler::<f64, 4>::hilbert_schmidt()
                .unwrap()
                .sample(&mut rng);
            check_state(&g, 1.0 / 256.0);
        }
    }

    #[test]
    fn determinant_is_product_of_squared_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let sampler = CholeskySampler::<Quat, 4>::hilbert_schmidt();
        for _ in 0..100 {
            let (c, det) = sampler.sample_factor(&mut rng);
            let rho = Mat::gram_upper(&c);
            assert!((det_self_adjoint(&rho) - det).abs() < 1e-15);
        }
    }
}
