//! Choosing the quaternionic partial-transpose convention.
//!
//! For quaternion entries, transposing a block can be read with or without
//! conjugating its entries. The two readings give different `|ρ^PT|` for a
//! given state, but with 4·10⁶ samples per convention both reproduce the
//! exact moments of `|ρ^PT| − |ρ|` at α = 2 (all `|z| < 2` for orders 1 to
//! 3) and the separability probability 26/323. The default is the plain one.

use serde::Serialize;

use sepprob_core::moments::{f2_closed, DysonIndex};

use crate::field::FieldKind;
use crate::matrix::PtConvention;
use crate::stats::{estimate_probabilities, Ensemble, McConfig};
use crate::StatesError;

pub const QUATERNION_CONVENTION: PtConvention = PtConvention::Plain;

#[derive(Clone, Debug, Serialize)]
pub struct ConventionScore {
    pub convention: PtConvention,
    /// `(n, exact, sampled, stderr, z)` for each moment order checked.
    pub moments: Vec<(u32, f64, f64, f64, f64)>,
    /// Largest `|z|` over the orders.
    pub worst_z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub n_samples: u64,
    pub seed: u64,
    pub scores: Vec<ConventionScore>,
    /// Convention with the smallest worst `|z|`.
    pub best: PtConvention,
    /// Whether some convention fails at 4σ while another passes.
    pub distinguishable: bool,
}

/// Samples quaternionic states under each convention and scores the first
/// two moments of `|ρ^PT| − |ρ|` against the exact values.
pub fn calibrate_quaternion(n_samples: u64, seed: u64) -> Result<Calibration, StatesError> {
    let alpha = DysonIndex::ratio(2, 1).map_err(|e| StatesError::InvalidArgument(e.to_string()))?;
    let orders = [1u32, 2];
    let exact: Vec<f64> = orders
        .iter()
        .map(|&n| f2_closed(n, 0, &alpha).map(|v| v.to_f64()))
        .collect::<Result<_, _>>()
        .map_err(|e| StatesError::InvalidArgument(e.to_string()))?;
    let mut scores = Vec::new();
    for convention in PtConvention::ALL {
        let mut config = McConfig::new(n_samples, seed);
        config.convention = Some(convention);
        config.det_rho_orders.clear();
        config.det_pt_orders.clear();
        config.diff_orders = orders.to_vec();
        let stats =
            estimate_probabilities(FieldKind::Quaternion, Ensemble::HilbertSchmidt, &config)?;
        let moments: Vec<_> = orders
            .iter()
            .zip(&exact)
            .map(|(&n, &e)| {
                let est = stats.moments[&format!("diff^{n}")];
                (n, e, est.mean, est.stderr, est.z_score(e))
            })
            .collect();
        let worst_z = moments.iter().map(|m| m.4.abs()).fold(0.0, f64::max);
        scores.push(ConventionScore {
            convention,
            moments,
            worst_z,
        });
    }
    let best = scores
        .iter()
        .min_by(|a, b| a.worst_z.total_cmp(&b.worst_z))
        .map(|s| s.convention)
        .expect("two conventions scored");
    let passing = scores.iter().filter(|s| s.worst_z < 4.0).count();
    let distinguishable = passing > 0 && passing < scores.len();
    Ok(Calibration {
        n_samples,
        seed,
        scores,
        best,
        distinguishable,
    })
}
