//! Parallel Monte Carlo estimates of separability statistics.
//!
//! Work is split into a fixed number of streams, each with its own ChaCha8
//! stream from one seed, and tallies are merged in stream order. Results
//! therefore depend on the seed and stream count but not on the thread
//! count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{FieldKind, Quat, Scalar};
use crate::matrix::PtConvention;
use crate::sampler::{CholeskySampler, GinibreSampler};
use crate::StatesError;

/// Which random-state construction to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Two-qubit Hilbert–Schmidt states via the Cholesky factor.
    HilbertSchmidt,
    /// Minimally degenerate two-qubit states (`|ρ| = 0`).
    Degenerate,
    /// Qubit–qutrit (6×6) Hilbert–Schmidt states.
    QubitQutrit,
    /// Two-qubit Hilbert–Schmidt states via Gaussian matrices.
    Ginibre,
}

impl Ensemble {
    pub fn name(self) -> &'static str {
        match self {
            Ensemble::HilbertSchmidt => "hilbert_schmidt",
            Ensemble::Degenerate => "degenerate",
            Ensemble::QubitQutrit => "qubit_qutrit",
            Ensemble::Ginibre => "ginibre",
        }
    }

    fn dimension(self) -> usize {
        if self == Ensemble::QubitQutrit {
            6
        } else {
            4
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ensemble {
    type Err = StatesError;

    fn from_str(s: &str) -> Result<Self, StatesError> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "hilbert_schmidt" | "hs" => Ok(Ensemble::HilbertSchmidt),
            "degenerate" => Ok(Ensemble::Degenerate),
            "qubit_qutrit" | "6x6" => Ok(Ensemble::QubitQutrit),
            "ginibre" => Ok(Ensemble::Ginibre),
            other => Err(StatesError::InvalidArgument(format!(
                "unknown ensemble {other:?}"
            ))),
        }
    }
}

/// Default number of independent RNG streams.
pub const DEFAULT_STREAMS: usize = 64;

#[derive(Clone, Debug)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub streams: usize,
    /// `None` picks [`PtConvention::default_for`] the field.
    pub convention: Option<PtConvention>,
    /// Powers `k` for which `⟨|ρ|^k⟩` is estimated.
    pub det_rho_orders: Vec<u32>,
    /// Powers `n` for which `⟨(|ρ^PT| − |ρ|)^n⟩` is estimated.
    pub diff_orders: Vec<u32>,
    /// Powers `n` for which `⟨|ρ^PT|^n⟩` is estimated.
    pub det_pt_orders: Vec<u32>,
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        McConfig {
            n_samples,
            seed,
            streams: DEFAULT_STREAMS,
            convention: None,
            det_rho_orders: vec![1, 2],
            diff_orders: vec![1, 2],
            det_pt_orders: vec![1],
        }
    }
}

/// Mean with its standard error `s/√n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_sums(n: u64, sum: f64, sum_sq: f64) -> Self {
        if n == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr: (var / nf).sqrt(),
        }
    }

    fn proportion(hits: u64, n: u64) -> Self {
        Self::from_sums(n, hits as f64, hits as f64)
    }

    /// `(mean - target) / stderr`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.stderr
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.stderr
    }
}

#[derive(Clone, Copy, Debug)]
struct Bounds {
    diff: (f64, f64),
    det_pt: (f64, f64),
    det_rho: (f64, f64),
    /// Bounds that are conjectural rather than proven.
    conjectural: bool,
}

const RANGE_SLACK: f64 = 1e-12;

fn bounds_for(ensemble: Ensemble) -> Bounds {
    match ensemble {
        Ensemble::QubitQutrit => Bounds {
            diff: (f64::NEG_INFINITY, f64::INFINITY),
            det_pt: (-1.0 / 2916.0, 1.0 / 2916.0),
            det_rho: (0.0, 1.0 / 46656.0),
            conjectural: true,
        },
        _ => Bounds {
            diff: (-1.0 / 16.0, 1.0 / 432.0),
            det_pt: (-1.0 / 16.0, 1.0 / 256.0),
            det_rho: (0.0, 1.0 / 256.0),
            conjectural: false,
        },
    }
}

fn outside(x: f64, (lo, hi): (f64, f64)) -> bool {
    x < lo - RANGE_SLACK || x > hi + RANGE_SLACK
}

#[derive(Clone, Debug)]
struct Tally {
    n: u64,
    separable: u64,
    pt_greater: u64,
    ties: u64,
    range_violations: u64,
    det_pt_min: f64,
    det_pt_max: f64,
    diff_min: f64,
    diff_max: f64,
    det_rho_max: f64,
    sums: Vec<[f64; 2]>,
}

impl Tally {
    fn new(n_moments: usize) -> Self {
        Tally {
            n: 0,
            separable: 0,
            pt_greater: 0,
            ties: 0,
            range_violations: 0,
            det_pt_min: f64::INFINITY,
            det_pt_max: f64::NEG_INFINITY,
            diff_min: f64::INFINITY,
            diff_max: f64::NEG_INFINITY,
            det_rho_max: f64::NEG_INFINITY,
            sums: vec![[0.0; 2]; n_moments],
        }
    }

    fn record(&mut self, det_rho: f64, det_pt: f64, config: &McConfig, bounds: &Bounds) {
        let diff = det_pt - det_rho;
        self.n += 1;
        if det_pt > 0.0 {
            self.separable += 1;
        }
        if diff > 0.0 {
            self.pt_greater += 1;
        }
        if diff.abs() <= 8.0 * f64::EPSILON * det_pt.abs().max(det_rho) {
            self.ties += 1;
        }
        if outside(diff, bounds.diff)
            || outside(det_pt, bounds.det_pt)
            || outside(det_rho, bounds.det_rho)
        {
            self.range_violations += 1;
        }
        self.det_pt_min = self.det_pt_min.min(det_pt);
        self.det_pt_max = self.det_pt_max.max(det_pt);
        self.diff_min = self.diff_min.min(diff);
        self.diff_max = self.diff_max.max(diff);
        self.det_rho_max = self.det_rho_max.max(det_rho);
        let mut slot = 0;
        for (base, orders) in [
            (det_rho, &config.det_rho_orders),
            (diff, &config.diff_orders),
            (det_pt, &config.det_pt_orders),
        ] {
            for &k in orders {
                let v = base.powi(k as i32);
                self.sums[slot][0] += v;
                self.sums[slot][1] += v * v;
                slot += 1;
            }
        }
    }

    fn merge(mut self, other: &Tally) -> Tally {
        self.n += other.n;
        self.separable += other.separable;
        self.pt_greater += other.pt_greater;
        self.ties += other.ties;
        self.range_violations += other.range_violations;
        self.det_pt_min = self.det_pt_min.min(other.det_pt_min);
        self.det_pt_max = self.det_pt_max.max(other.det_pt_max);
        self.diff_min = self.diff_min.min(other.diff_min);
        self.diff_max = self.diff_max.max(other.diff_max);
        self.det_rho_max = self.det_rho_max.max(other.det_rho_max);
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a[0] += b[0];
            a[1] += b[1];
        }
        self
    }
}

/// Aggregated Monte Carlo results.
#[derive(Clone, Debug, Serialize)]
pub struct SampleStats {
    pub field: FieldKind,
    pub ensemble: Ensemble,
    pub n_samples: u64,
    pub seed: u64,
    pub streams: usize,
    pub convention: PtConvention,
    /// Fraction with `|ρ^PT| > 0`.
    pub p_separable: Estimate,
    /// Fraction with `|ρ^PT| > |ρ|`.
    pub p_pt_greater: Estimate,
    /// Among samples with `|ρ^PT| > 0`, the fraction with `|ρ^PT| > |ρ|`.
    pub pt_greater_given_separable: Estimate,
    pub n_separable: u64,
    /// Samples with `|ρ^PT| = |ρ|` to rounding.
    pub ties: u64,
    /// Samples outside the known (or, for 6×6, conjectured) ranges.
    pub range_violations: u64,
    pub ranges_conjectural: bool,
    pub det_pt_range: [f64; 2],
    pub diff_range: [f64; 2],
    pub det_rho_max: f64,
    /// Keys `det_rho^k`, `diff^n`, `det_pt^n`.
    pub moments: BTreeMap<String, Estimate>,
    pub elapsed_s: f64,
}

impl SampleStats {
    pub fn moment(&self, key: &str) -> Option<&Estimate> {
        self.moments.get(key)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("stats serialise");
        v["stderr"] = serde_json::json!(self.p_separable.stderr);
        v["p_separable"] = serde_json::json!(self.p_separable.mean);
        v["p_separable_detail"] =
            serde_json::to_value(self.p_separable).expect("estimate serialises");
        v
    }
}

fn run_streams<F>(config: &McConfig, ensemble: Ensemble, draw: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync,
{
    let bounds = bounds_for(ensemble);
    let n_moments =
        config.det_rho_orders.len() + config.diff_orders.len() + config.det_pt_orders.len();
    let streams = config.streams.max(1);
    let per = config.n_samples / streams as u64;
    let extra = config.n_samples % streams as u64;
    let tallies: Vec<Tally> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(s as u64);
            let count = per + u64::from((s as u64) < extra);
            let mut tally = Tally::new(n_moments);
            for _ in 0..count {
                let (det_rho, det_pt) = draw(&mut rng);
                tally.record(det_rho, det_pt, config, &bounds);
            }
            tally
        })
        .collect();
    tallies
        .iter()
        .fold(Tally::new(n_moments), |acc, t| acc.merge(t))
}

fn check_support(field: FieldKind, ensemble: Ensemble) -> Result<(), StatesError> {
    if field == FieldKind::Quaternion && ensemble != Ensemble::HilbertSchmidt {
        return Err(StatesError::Unsupported(format!(
            "{ensemble} sampling is defined for real and complex entries"
        )));
    }
    Ok(())
}

fn cholesky_draw<S: Scalar, const N: usize>(
    degenerate: bool,
    convention: PtConvention,
) -> Result<impl Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync, StatesError> {
    let sampler = if degenerate {
        CholeskySampler::<S, N>::degenerate()?
    } else {
        CholeskySampler::<S, N>::hilbert_schmidt()
    };
    Ok(move |rng: &mut ChaCha8Rng| {
        let s = sampler.sample(rng, convention);
        (s.det_rho, s.det_pt)
    })
}

fn ginibre_draw<S: Scalar>() -> Result<impl Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync, StatesError> {
    let sampler = GinibreSampler::<S, 4>::hilbert_schmidt()?;
    Ok(move |rng: &mut ChaCha8Rng| {
        let s = sampler.sample(rng);
        (s.det_rho, s.det_pt)
    })
}

macro_rules! dispatch {
    ($field:expr, $ensemble:expr, $conv:expr, |$draw:ident| $body:expr) => {
        match ($field, $ensemble) {
            (FieldKind::Real, Ensemble::HilbertSchmidt) => {
                let $draw = cholesky_draw::<f64, 4>(false, $conv)?;
                $body
            }
            (FieldKind::Complex, Ensemble::HilbertSchmidt) => {
                let $draw = cholesky_draw::<Complex64, 4>(false, $conv)?;
                $body
            }
            (FieldKind::Quaternion, Ensemble::HilbertSchmidt) => {
                let $draw = cholesky_draw::<Quat, 4>(false, $conv)?;
                $body
            }
            (FieldKind::Real, Ensemble::Degenerate) => {
                let $draw = cholesky_draw::<f64, 4>(true, $conv)?;
                $body
            }
            (FieldKind::Complex, Ensemble::Degenerate) => {
                let $draw = cholesky_draw::<Complex64, 4>(true, $conv)?;
                $body
            }
            (FieldKind::Real, Ensemble::QubitQutrit) => {
                let $draw = cholesky_draw::<f64, 6>(false, $conv)?;
                $body
            }
            (FieldKind::Complex, Ensemble::QubitQutrit) => {
                let $draw = cholesky_draw::<Complex64, 6>(false, $conv)?;
                $body
            }
            (FieldKind::Real, Ensemble::Ginibre) => {
                let $draw = ginibre_draw::<f64>()?;
                $body
            }
            (FieldKind::Complex, Ensemble::Ginibre) => {
                let $draw = ginibre_draw::<Complex64>()?;
                $body
            }
            (field, ensemble) => {
                return Err(StatesError::Unsupported(format!(
                    "{ensemble} sampling over {field} entries"
                )))
            }
        }
    };
}

/// Samples `config.n_samples` states and tallies separability, the
/// `|ρ^PT| > |ρ|` event and the requested moments.
pub fn estimate_probabilities(
    field: FieldKind,
    ensemble: Ensemble,
    config: &McConfig,
) -> Result<SampleStats, StatesError> {
    if config.n_samples == 0 {
        return Err(StatesError::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    check_support(field, ensemble)?;
    let convention = config
        .convention
        .unwrap_or_else(|| PtConvention::default_for(field));
    let start = Instant::now();
    let tally = dispatch!(field, ensemble, convention, |draw| run_streams(
        config, ensemble, draw
    ));
    let elapsed_s = start.elapsed().as_secs_f64();

    let mut moments = BTreeMap::new();
    let mut slot = 0;
    for (name, orders) in [
        ("det_rho", &config.det_rho_orders),
        ("diff", &config.diff_orders),
        ("det_pt", &config.det_pt_orders),
    ] {
        for &k in orders {
            let [s, s2] = tally.sums[slot];
            moments.insert(format!("{name}^{k}"), Estimate::from_sums(tally.n, s, s2));
            slot += 1;
        }
    }
    Ok(SampleStats {
        field,
        ensemble,
        n_samples: tally.n,
        seed: config.seed,
        streams: config.streams.max(1),
        convention,
        p_separable: Estimate::proportion(tally.separable, tally.n),
        p_pt_greater: Estimate::proportion(tally.pt_greater, tally.n),
        // |ρ| ≥ 0, so |ρ^PT| > |ρ| already implies |ρ^PT| > 0
        pt_greater_given_separable: Estimate::proportion(tally.pt_greater, tally.separable),
        n_separable: tally.separable,
        ties: tally.ties,
        range_violations: tally.range_violations,
        ranges_conjectural: bounds_for(ensemble).conjectural,
        det_pt_range: [tally.det_pt_min, tally.det_pt_max],
        diff_range: [tally.diff_min, tally.diff_max],
        det_rho_max: tally.det_rho_max,
        moments,
        elapsed_s,
    })
}

/// Whether, among separable samples, `|ρ^PT| > |ρ|` happens half the time.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub field: FieldKind,
    pub n_samples: u64,
    pub n_separable: u64,
    pub fraction: f64,
    /// Binomial standard deviation `√(1/4n)` under the exact value 1/2.
    pub sigma: f64,
    pub z: f64,
    pub ties: u64,
    pub pass: bool,
}

pub fn symmetry_check(
    field: FieldKind,
    n_samples: u64,
    seed: u64,
) -> Result<SymmetryReport, StatesError> {
    let mut config = McConfig::new(n_samples, seed);
    config.det_rho_orders.clear();
    config.diff_orders.clear();
    config.det_pt_orders.clear();
    let stats = estimate_probabilities(field, Ensemble::HilbertSchmidt, &config)?;
    let fraction = stats.pt_greater_given_separable.mean;
    let sigma = (0.25 / stats.n_separable as f64).sqrt();
    let z = (fraction - 0.5) / sigma;
    Ok(SymmetryReport {
        field,
        n_samples: stats.n_samples,
        n_separable: stats.n_separable,
        fraction,
        sigma,
        z,
        ties: stats.ties,
        pass: z.abs() < 4.0 && stats.ties == 0,
    })
}

/// First `count` `(|ρ|, |ρ^PT|)` pairs of stream 0, for plotting.
pub fn sample_determinants(
    field: FieldKind,
    ensemble: Ensemble,
    count: usize,
    seed: u64,
    convention: Option<PtConvention>,
) -> Result<Vec<(f64, f64)>, StatesError> {
    check_support(field, ensemble)?;
    let convention = convention.unwrap_or_else(|| PtConvention::default_for(field));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let out = dispatch!(field, ensemble, convention, |draw| (0..count)
        .map(|_| draw(&mut rng))
        .collect());
    debug_assert_eq!(ensemble.dimension() % 2, 0);
    Ok(out)
}

pub fn write_samples_csv<W: Write>(rows: &[(f64, f64)], out: W) -> Result<(), StatesError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| StatesError::Io(e.to_string());
    w.write_record(["det_rho", "det_pt"]).map_err(io)?;
    for (r, p) in rows {
        w.write_record([format!("{r:.17e}"), format!("{p:.17e}")])
            .map_err(io)?;
    }
    w.flush().map_err(|e| StatesError::Io(e.to_string()))
}
