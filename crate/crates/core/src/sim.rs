//! Monte Carlo kernel for the average error probability of regular lattice
//! decoding, with binomial intervals and diversity-slope fitting.
//!
//! By lattice symmetry every trial transmits the origin; an error is any
//! decoded point other than the origin. This shortcut is only valid for
//! lattices, not for general constellations.
//!
//! Trials are addressed by index and draw their channel and noise from
//! counter-based streams, so any partition of the trial range over workers
//! gives the same counts. The same channel and unit noise are reused at
//! every SNR point.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::channel::{sample_h, sample_noise, NoiseSpec};
use crate::config::{DimensionSplit, SystemConfig};
use crate::dmt::scheme_dims;
use crate::error::{domain, Result};
use crate::lattice::{
    cubic_lattice, ln_vnr, random_lattice, received_basis, scale_for_multiplexing, LatticeSpec, ReducedBasis,
};
use crate::linalg::CMatrix;
use crate::rng::{stream_rng, Stream};
use crate::scheme::{build_scheme, effective_channel, SchemePattern};
use crate::special::q_function;

/// How many times a trial with an undecodable channel is redrawn before it
/// is counted as an error.
pub const MAX_RESAMPLES: u64 = 16;
/// Points with fewer errors are left out of slope fits.
pub const SLOPE_ERROR_FLOOR: u64 = 20;

const PILOT_PHASE: u64 = 1 << 32;

/// Which transmission is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case", tag = "kind"))]
pub enum Scenario {
    /// The dimension-reducing scheme of segment `l`: `K = K_l`, `T = T_l`.
    Scheme { l: usize },
    /// All `M` dimensions every channel use: `K = M`, `T = 1`. Needs `M <= N`.
    FullDimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case", tag = "kind"))]
pub enum LatticeSource {
    Cubic,
    /// Best of `k` unit-covolume Gaussian lattices, chosen by a pilot run.
    RandomBestOf {
        k: usize,
    },
}

/// Trials per point: at least `min_trials`, then more until `min_errors`
/// errors are seen or `max_trials` is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialBudget {
    pub min_trials: u64,
    pub min_errors: u64,
    pub max_trials: u64,
}

impl TrialBudget {
    pub fn fixed(trials: u64) -> Self {
        Self {
            min_trials: trials,
            min_errors: 0,
            max_trials: trials,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_trials == 0 {
            return Err(domain!("trials per point must be >= 1"));
        }
        if self.max_trials < self.min_trials {
            return Err(domain!(
                "max_trials {} is below min_trials {}",
                self.max_trials,
                self.min_trials
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentConfig {
    pub name: String,
    pub system: SystemConfig,
    pub scenario: Scenario,
    pub r: f64,
    pub rho_db: Vec<f64>,
    pub budget: TrialBudget,
    pub lattice: LatticeSource,
    /// Pilot trials per candidate for best-of-`k` selection.
    pub pilot_trials: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        if self.rho_db.is_empty() {
            return Err(domain!("SNR grid is empty"));
        }
        if self.rho_db.iter().any(|v| !v.is_finite()) || self.rho_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain!("SNR grid must be finite and strictly increasing"));
        }
        if let LatticeSource::RandomBestOf { k } = self.lattice {
            if k == 0 {
                return Err(domain!("best-of-k needs k >= 1"));
            }
            if self.pilot_trials == 0 {
                return Err(domain!("best-of-k needs pilot trials >= 1"));
            }
        }
        let geometry = Geometry::new(&self.system, self.scenario)?;
        let k = geometry.split.k_f64();
        if !(0.0..=k).contains(&self.r) {
            return Err(domain!("multiplexing gain {} outside [0, {k}]", self.r));
        }
        Ok(())
    }

    /// Index of the SNR point used for pilot runs.
    pub fn median_point(&self) -> usize {
        (self.rho_db.len() - 1) / 2
    }
}

/// Dimensions and channel map of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub system: SystemConfig,
    pub split: DimensionSplit,
    pub t: usize,
    /// Complex lattice dimension `K T`.
    pub kt: usize,
    pattern: Option<SchemePattern>,
}

impl Geometry {
    pub fn new(system: &SystemConfig, scenario: Scenario) -> Result<Self> {
        match scenario {
            Scenario::Scheme { l } => {
                let dims = scheme_dims(system, l)?;
                Ok(Self {
                    system: *system,
                    split: dims.split(),
                    t: dims.t_l,
                    kt: dims.complex_dim(),
                    pattern: Some(build_scheme(system, l)?),
                })
            }
            Scenario::FullDimension => {
                if system.m() > system.n() {
                    return Err(domain!(
                        "full-dimension transmission needs M <= N, got M={} N={}",
                        system.m(),
                        system.n()
                    ));
                }
                Ok(Self {
                    system: *system,
                    split: DimensionSplit::from_ratio(system.m() as i64, 1)?,
                    t: 1,
                    kt: system.m(),
                    pattern: None,
                })
            }
        }
    }

    pub fn real_dim(&self) -> usize {
        2 * self.kt
    }

    /// Real length of a received block, `2 N T`.
    pub fn received_len(&self) -> usize {
        2 * self.system.n() * self.t
    }

    pub fn effective(&self, h: &CMatrix) -> Result<CMatrix> {
        match &self.pattern {
            Some(p) => effective_channel(h, p),
            None => Ok(h.clone()),
        }
    }
}

/// Candidate `index` of the random lattice ensemble.
pub fn candidate_lattice(seed: u64, dim: usize, index: u64) -> Result<LatticeSpec> {
    random_lattice(dim, &mut stream_rng(seed, Stream::Lattice, 0, index))
}

/// Everything needed to run trials at one SNR.
#[derive(Debug, Clone)]
pub struct PointContext<'a> {
    geometry: &'a Geometry,
    lattice: LatticeSpec,
    noise: NoiseSpec,
    seed: u64,
    phase: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub error: bool,
    pub outage: bool,
    /// Channel redraws needed before decoding succeeded.
    pub resampled: u64,
}

/// Integer counts over a set of trials; adding tallies is order-free.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tally {
    pub trials: u64,
    pub errors: u64,
    pub outages: u64,
    pub resampled: u64,
}

impl Tally {
    pub fn add(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.errors += other.errors;
        self.outages += other.outages;
        self.resampled += other.resampled;
    }

    pub fn record(&mut self, outcome: &TrialOutcome) {
        self.trials += 1;
        self.errors += outcome.error as u64;
        self.outages += outcome.outage as u64;
        self.resampled += outcome.resampled;
    }
}

impl<'a> PointContext<'a> {
    pub fn new(geometry: &'a Geometry, base: &LatticeSpec, r: f64, rho_db: f64, seed: u64) -> Result<Self> {
        let noise = NoiseSpec::from_db(rho_db)?;
        let lattice = scale_for_multiplexing(base, noise.rho, r, &geometry.split, geometry.t)?;
        Ok(Self {
            geometry,
            lattice,
            noise,
            seed,
            phase: 0,
        })
    }

    /// Same context drawing from the pilot streams instead.
    pub fn pilot(mut self) -> Self {
        self.phase = PILOT_PHASE;
        self
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    /// One trial. With `decode == false` only the outage flag is computed.
    pub fn trial(&self, index: u64, decode: bool) -> TrialOutcome {
        let g = self.geometry;
        for attempt in 0..=MAX_RESAMPLES {
            let key = self.phase | attempt;
            let h = sample_h(&g.system, &mut stream_rng(self.seed, Stream::Channel, key, index));
            let Ok(reduced) = g
                .effective(&h)
                .and_then(|heff| received_basis(&heff, &self.lattice))
                .and_then(|b| ReducedBasis::new(&b))
            else {
                continue;
            };
            let ln_mu = ln_vnr(reduced.tri.ln_abs_det(), self.noise.sigma2, g.kt);
            let outage = ln_mu <= 0.0;
            let error = decode && {
                let mut rng = stream_rng(self.seed, Stream::Noise, key, index);
                let y = sample_noise(g.received_len(), &self.noise, &mut rng);
                let c = reduced.project(&y).expect("noise length matches the basis");
                !reduced.tri.zero_is_closest(&c)
            };
            return TrialOutcome {
                error,
                outage,
                resampled: attempt,
            };
        }
        TrialOutcome {
            error: true,
            outage: true,
            resampled: MAX_RESAMPLES + 1,
        }
    }

    pub fn run_range(&self, trials: Range<u64>, decode: bool) -> Tally {
        let mut tally = Tally::default();
        for i in trials {
            tally.record(&self.trial(i, decode));
        }
        tally
    }
}

/// Decides how many batches of a point to use: given the tally of each
/// batch in order, the shortest prefix that reaches the budget.
pub fn batches_needed(budget: &TrialBudget, batch_tallies: &[Tally]) -> Option<usize> {
    let mut total = Tally::default();
    for (i, t) in batch_tallies.iter().enumerate() {
        total.add(t);
        let enough_trials = total.trials >= budget.min_trials;
        if total.trials >= budget.max_trials || (enough_trials && total.errors >= budget.min_errors) {
            return Some(i + 1);
        }
    }
    None
}

/// Trial ranges of batch `b` for a point, `batch_size` trials each, never
/// exceeding `max_trials`.
pub fn batch_range(budget: &TrialBudget, batch_size: u64, b: u64) -> Range<u64> {
    let start = (b * batch_size).min(budget.max_trials);
    let end = ((b + 1) * batch_size).min(budget.max_trials);
    start..end
}

/// 95 % Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PePoint {
    pub rho_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub pe: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub outage_fraction: f64,
    pub resampled: u64,
}

impl PePoint {
    pub fn from_tally(rho_db: f64, tally: &Tally) -> Self {
        let n = tally.trials.max(1) as f64;
        let (ci_low, ci_high) = wilson_interval(tally.errors, tally.trials);
        Self {
            rho_db,
            trials: tally.trials,
            errors: tally.errors,
            pe: tally.errors as f64 / n,
            ci_low,
            ci_high,
            outage_fraction: tally.outages as f64 / n,
            resampled: tally.resampled,
        }
    }

    /// Binomial standard error `sqrt(p (1 - p) / n)` at the given `p`.
    pub fn standard_error(&self, p: f64) -> f64 {
        libm::sqrt(p * (1.0 - p) / self.trials.max(1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    /// Points that entered the fit.
    pub used: usize,
    /// SNR window of the used points, dB.
    pub window_db: (f64, f64),
}

/// Weighted least-squares slope of `-log10(p)` against `log10(rho)` over
/// points with at least `floor` events and `p < 1`. Weights are the inverse
/// delta-method variances `count ln(10)^2 / (1 - p)`. `None` when fewer than
/// two points qualify.
pub fn fit_slope(points: &[(f64, u64, u64)], floor: u64) -> Option<SlopeFit> {
    let ln10 = core::f64::consts::LN_10;
    let usable: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|(_, events, trials)| *events >= floor && events < trials && *trials > 0)
        .map(|&(db, events, trials)| {
            let p = events as f64 / trials as f64;
            (db / 10.0, -libm::log10(p), events as f64 * ln10 * ln10 / (1.0 - p))
        })
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let sw: f64 = usable.iter().map(|u| u.2).sum();
    let xbar = usable.iter().map(|u| u.2 * u.0).sum::<f64>() / sw;
    let ybar = usable.iter().map(|u| u.2 * u.1).sum::<f64>() / sw;
    let sxx: f64 = usable.iter().map(|u| u.2 * (u.0 - xbar) * (u.0 - xbar)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = usable.iter().map(|u| u.2 * (u.0 - xbar) * (u.1 - ybar)).sum();
    let used_db: Vec<f64> = usable.iter().map(|u| u.0 * 10.0).collect();
    Some(SlopeFit {
        slope: sxy / sxx,
        stderr: libm::sqrt(1.0 / sxx),
        used: usable.len(),
        window_db: (
            used_db.iter().copied().fold(f64::INFINITY, f64::min),
            used_db.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ),
    })
}

/// Error-probability slope of a set of points.
pub fn pe_slope(points: &[PePoint]) -> Option<SlopeFit> {
    let raw: Vec<(f64, u64, u64)> = points.iter().map(|p| (p.rho_db, p.errors, p.trials)).collect();
    fit_slope(&raw, SLOPE_ERROR_FLOOR)
}

/// Outage-probability slope of a set of points.
pub fn outage_slope(points: &[PePoint]) -> Option<SlopeFit> {
    let raw: Vec<(f64, u64, u64)> = points
        .iter()
        .map(|p| {
            (
                p.rho_db,
                libm::round(p.outage_fraction * p.trials as f64) as u64,
                p.trials,
            )
        })
        .collect();
    fit_slope(&raw, SLOPE_ERROR_FLOOR)
}

/// Pilot score of one best-of-`k` candidate: fewer errors wins, then the
/// longer shortest vector, then the lower index.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PilotScore {
    pub index: u64,
    pub errors: u64,
    pub shortest_vector: f64,
}

pub fn pick_best(scores: &[PilotScore]) -> Option<PilotScore> {
    scores.iter().copied().min_by(|a, b| {
        a.errors
            .cmp(&b.errors)
            .then(b.shortest_vector.total_cmp(&a.shortest_vector))
            .then(a.index.cmp(&b.index))
    })
}

/// Base (unscaled) lattice for a non-random source.
pub fn base_lattice(geometry: &Geometry, source: LatticeSource) -> Result<Option<LatticeSpec>> {
    match source {
        LatticeSource::Cubic => Ok(Some(cubic_lattice(geometry.real_dim())?)),
        LatticeSource::RandomBestOf { .. } => Ok(None),
    }
}

/// Error probability of `|h| ℤ²` under noise of variance `sigma2` per real
/// dimension, averaged over `|h|² ~ Exp(1)`: the single-antenna reference
/// for a `ℤ²` lattice. Integrates over `ln |h|²` with Simpson's rule.
pub fn siso_fading_pe(sigma2: f64) -> f64 {
    let sigma = libm::sqrt(sigma2);
    let f = |u: f64| {
        let x = libm::exp(u);
        let miss = 2.0 * q_function(libm::sqrt(x) / (2.0 * sigma));
        let pe = 1.0 - (1.0 - miss) * (1.0 - miss);
        pe * x * libm::exp(-x)
    };
    let (lo, hi) = (libm::log(sigma2) - 40.0, libm::log(60.0));
    let steps = 40_000;
    let h = (hi - lo) / steps as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + h * i as f64);
    }
    // mass below lo, where the error probability is essentially 1
    sum * h / 3.0 + (1.0 - libm::exp(-libm::exp(lo)))
}
