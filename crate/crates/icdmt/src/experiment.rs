//! Experiment drivers: SNR sweeps, outage curves and the reduced versus
//! full-dimension comparison.

use std::time::Instant;

use icdmt_core::dmt::{dstar, scheme_dims};
use icdmt_core::lattice::LatticeSpec;
use icdmt_core::sim::{
    base_lattice, candidate_lattice, outage_slope, pe_slope, pick_best, ExperimentConfig, Geometry, LatticeSource,
    PePoint, PilotScore, PointContext, Scenario, SlopeFit, TrialBudget,
};
use icdmt_core::{Rational64, SystemConfig};
use serde::Serialize;

use crate::runner::Runner;
use crate::Result;

/// Lattice used for a sweep, with the pilot scores when it was selected
/// from a random ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeChoice {
    pub source: LatticeSource,
    /// Ensemble index of the chosen candidate.
    pub index: Option<u64>,
    pub pilot_db: Option<f64>,
    pub pilot: Vec<PilotScore>,
    #[serde(serialize_with = "crate::io::serialize_lattice")]
    pub lattice: LatticeSpec,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub wall_time_s: f64,
    pub threads: usize,
}

impl Metadata {
    fn new(start: Instant, runner: &Runner) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: start.elapsed().as_secs_f64(),
            threads: runner.threads(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub experiment: ExperimentConfig,
    pub k: String,
    pub t: usize,
    /// Upper bound `d*_K(r)` for the simulated dimension split.
    pub diversity_cap: f64,
    pub lattice: LatticeChoice,
    pub points: Vec<PePoint>,
    /// Error-probability slope; `None` when fewer than two points clear
    /// the error floor.
    pub slope: Option<SlopeFit>,
    pub outage_slope: Option<SlopeFit>,
    pub metadata: Metadata,
}

impl SimResult {
    pub fn slope_value(&self) -> Option<f64> {
        self.slope.map(|s| s.slope)
    }
}

fn k_string(k: Rational64) -> String {
    k.to_string()
}

/// Picks the lattice for `cfg`. Random candidates are scored by a pilot run
/// at the median SNR on streams disjoint from the sweep's.
pub fn choose_lattice(runner: &Runner, cfg: &ExperimentConfig, geometry: &Geometry) -> Result<LatticeChoice> {
    if let Some(lattice) = base_lattice(geometry, cfg.lattice)? {
        return Ok(LatticeChoice {
            source: cfg.lattice,
            index: None,
            pilot_db: None,
            pilot: Vec::new(),
            lattice,
        });
    }
    let LatticeSource::RandomBestOf { k } = cfg.lattice else {
        unreachable!("non-random sources have a base lattice");
    };
    let pilot_db = cfg.rho_db[cfg.median_point()];
    let mut candidates = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);
    for index in 0..k as u64 {
        let lattice = candidate_lattice(cfg.seed, geometry.real_dim(), index)?;
        let ctx = PointContext::new(geometry, &lattice, cfg.r, pilot_db, cfg.seed)?.pilot();
        let tally = runner.run_fixed(&ctx, cfg.pilot_trials, true);
        let score = PilotScore {
            index,
            errors: tally.errors,
            shortest_vector: lattice.shortest_vector_length()?,
        };
        runner.progress(|| {
            format!(
                "[{}] pilot candidate {index}: {} errors in {} trials, shortest vector {:.4}",
                cfg.name, score.errors, tally.trials, score.shortest_vector
            )
        });
        scores.push(score);
        candidates.push(lattice);
    }
    let best = pick_best(&scores).expect("k >= 1");
    Ok(LatticeChoice {
        source: cfg.lattice,
        index: Some(best.index),
        pilot_db: Some(pilot_db),
        pilot: scores,
        lattice: candidates.swap_remove(best.index as usize),
    })
}

fn run_points(
    runner: &Runner,
    cfg: &ExperimentConfig,
    geometry: &Geometry,
    lattice: &LatticeSpec,
    budget: &TrialBudget,
    decode: bool,
) -> Result<Vec<PePoint>> {
    cfg.rho_db
        .iter()
        .map(|&db| {
            let ctx = PointContext::new(geometry, lattice, cfg.r, db, cfg.seed)?;
            let start = Instant::now();
            let tally = runner.run_point(&ctx, budget, decode);
            let point = PePoint::from_tally(db, &tally);
            runner.progress(|| {
                format!(
                    "[{}] {db} dB: {} errors / {} trials, pe {:.3e}, outage {:.3e} ({:.1} s)",
                    cfg.name,
                    point.errors,
                    point.trials,
                    point.pe,
                    point.outage_fraction,
                    start.elapsed().as_secs_f64()
                )
            });
            Ok(point)
        })
        .collect()
}

fn simulate(runner: &Runner, cfg: &ExperimentConfig, decode: bool) -> Result<SimResult> {
    cfg.validate()?;
    let start = Instant::now();
    let geometry = Geometry::new(&cfg.system, cfg.scenario)?;
    let lattice = choose_lattice(runner, cfg, &geometry)?;
    let budget = if decode {
        cfg.budget
    } else {
        TrialBudget::fixed(cfg.budget.min_trials)
    };
    let points = run_points(runner, cfg, &geometry, &lattice.lattice, &budget, decode)?;
    Ok(SimResult {
        experiment: cfg.clone(),
        k: k_string(geometry.split.k()),
        t: geometry.t,
        diversity_cap: dstar(&cfg.system, &geometry.split, cfg.r)?,
        lattice,
        slope: if decode { pe_slope(&points) } else { None },
        outage_slope: outage_slope(&points),
        points,
        metadata: Metadata::new(start, runner),
    })
}

/// Error probability at every SNR of `cfg` plus the fitted slope.
pub fn sweep(runner: &Runner, cfg: &ExperimentConfig) -> Result<SimResult> {
    simulate(runner, cfg, true)
}

/// Outage fractions only (no decoding), `budget.min_trials` trials per
/// point. The theoretical outage exponent is `diversity_cap`.
pub fn outage_curve(runner: &Runner, cfg: &ExperimentConfig) -> Result<SimResult> {
    simulate(runner, cfg, false)
}

/// Reduced-dimension scheme (`l = 0`) against full-dimension transmission.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub reduced: SimResult,
    pub full_cubic: Option<SimResult>,
    pub full_best: Option<SimResult>,
    /// Both scenarios are the same transmission (`K_0 = M`, `T_0 = 1`); the
    /// full-dimension branches are not run.
    pub coincide: bool,
    /// Reduced slope minus the larger full-dimension slope.
    pub gap: Option<f64>,
}

impl Comparison {
    pub fn branches(&self) -> impl Iterator<Item = &SimResult> {
        std::iter::once(&self.reduced)
            .chain(self.full_cubic.as_ref())
            .chain(self.full_best.as_ref())
    }
}

/// Runs the `l = 0` scheme with `cfg.lattice` and full-dimension
/// transmission with both a cubic lattice and `cfg.lattice`. `cfg.scenario`
/// is ignored. Branch names get `-reduced`, `-full-cubic` and `-full-best`
/// suffixes.
pub fn compare_dimensions(runner: &Runner, cfg: &ExperimentConfig) -> Result<Comparison> {
    let dims = scheme_dims(&cfg.system, 0)?;
    let coincide = dims.t_l == 1 && dims.k_l == Rational64::from_integer(cfg.system.m() as i64);
    let branch = |suffix: &str, scenario: Scenario, lattice: LatticeSource| ExperimentConfig {
        name: format!("{}-{suffix}", cfg.name),
        scenario,
        lattice,
        ..cfg.clone()
    };
    let reduced = sweep(runner, &branch("reduced", Scenario::Scheme { l: 0 }, cfg.lattice))?;
    if coincide {
        return Ok(Comparison {
            reduced,
            full_cubic: None,
            full_best: None,
            coincide,
            gap: Some(0.0),
        });
    }
    let full_cubic = sweep(
        runner,
        &branch("full-cubic", Scenario::FullDimension, LatticeSource::Cubic),
    )?;
    let full_best = match cfg.lattice {
        LatticeSource::Cubic => None,
        source => Some(sweep(runner, &branch("full-best", Scenario::FullDimension, source))?),
    };
    let full_slopes: Option<Vec<f64>> = std::iter::once(&full_cubic)
        .chain(full_best.as_ref())
        .map(SimResult::slope_value)
        .collect();
    let gap = reduced
        .slope_value()
        .zip(full_slopes)
        .map(|(s, full)| s - full.into_iter().fold(f64::NEG_INFINITY, f64::max));
    Ok(Comparison {
        reduced,
        full_cubic: Some(full_cubic),
        full_best,
        coincide,
        gap,
    })
}

/// Default experiment for `system`: `l = 0` scheme, cubic lattice.
pub fn default_config(name: &str, system: SystemConfig) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_owned(),
        system,
        scenario: Scenario::Scheme { l: 0 },
        r: 0.0,
        rho_db: vec![10.0, 15.0, 20.0, 25.0, 30.0],
        budget: TrialBudget {
            min_trials: 100_000,
            min_errors: 200,
            max_trials: 1_000_000,
        },
        lattice: LatticeSource::Cubic,
        pilot_trials: 10_000,
        seed: 1,
    }
}
