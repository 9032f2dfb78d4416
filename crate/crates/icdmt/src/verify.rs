//! Exhaustive and randomised verification suites.

use std::fmt::Debug;

use icdmt_core::config::DimensionSplit;
use icdmt_core::dmt::{dstar_lp_closed, dstar_lp_oracle};
use icdmt_core::rng::{stream_rng, Stream};
use icdmt_core::scheme::{verify_ineq29, verify_lemma1, verify_lemma3, CheckReport, XiMatrix};
use icdmt_core::SystemConfig;
use rand_distr::{Distribution, Exp1, Uniform};
use serde::Serialize;

use crate::Result;

/// Counterexamples kept per suite.
const MAX_DUMPED: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
    /// The first failures, formatted.
    pub counterexamples: Vec<String>,
    /// Largest deviation seen, for suites with a tolerance.
    pub max_deviation: Option<f64>,
    pub tolerance: Option<f64>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            failures: 0,
            counterexamples: Vec::new(),
            max_deviation: None,
            tolerance: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn fail(&mut self, what: impl FnOnce() -> String) {
        self.failures += 1;
        if self.counterexamples.len() < MAX_DUMPED {
            self.counterexamples.push(what());
        }
    }

    fn absorb<V: Debug>(&mut self, context: &str, report: CheckReport<V>) {
        self.checked += report.checked;
        for v in report.violations {
            self.fail(|| format!("{context}: {v:?}"));
        }
    }
}

fn systems(max: usize) -> impl Iterator<Item = SystemConfig> {
    (1..=max).flat_map(move |m| (1..=max).map(move |n| SystemConfig::new(m, n).expect("sizes >= 1")))
}

/// Block-occurrence bound on every column run, all `M, N <= max`, all `l`.
pub fn lemma1(max: usize) -> Result<SuiteReport> {
    let mut out = SuiteReport::new("lemma1");
    for cfg in systems(max) {
        for l in 0..cfg.l_min() {
            out.absorb(&format!("M={} N={} l={l}", cfg.m(), cfg.n()), verify_lemma1(&cfg, l)?);
        }
    }
    Ok(out)
}

/// Occurrence-profile tail bound, all `M, N <= max`, all `l`.
pub fn ineq29(max: usize) -> Result<SuiteReport> {
    let mut out = SuiteReport::new("ineq29");
    for cfg in systems(max) {
        for l in 0..cfg.l_min() {
            out.absorb(&format!("M={} N={} l={l}", cfg.m(), cfg.n()), verify_ineq29(&cfg, l)?);
        }
    }
    Ok(out)
}

/// Random non-negative exponents: a quarter of the entries are zero, the
/// rest exponential with random scale, so ties and boundaries get hit.
pub fn random_xi<R: rand::Rng>(n: usize, m: usize, rng: &mut R) -> XiMatrix {
    let scale = Uniform::new(0.1, 5.0).expect("valid range").sample(rng);
    XiMatrix::from_fn(n, m, |_, _| {
        if rng.random_bool(0.25) {
            0.0
        } else {
            let e: f64 = Exp1.sample(rng);
            scale * e
        }
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Lemma3Options {
    pub samples: usize,
    pub seed: u64,
    /// Plant a negative exponent in the first sample of every system, to
    /// exercise the failure path.
    pub inject_negative: bool,
}

pub fn lemma3(pairs: &[(usize, usize)], opts: Lemma3Options) -> Result<SuiteReport> {
    let mut out = SuiteReport::new("lemma3");
    for &(m, n) in pairs {
        let cfg = SystemConfig::new(m, n)?;
        let mut rng = stream_rng(opts.seed, Stream::Test, (m * 64 + n) as u64, 0);
        for s in 0..opts.samples {
            let mut xi = random_xi(n, m, &mut rng);
            if opts.inject_negative && s == 0 {
                xi.data[0] = -1.0;
            }
            let report = verify_lemma3(&xi, &cfg)?;
            out.checked += 1;
            if !report.passed() {
                out.fail(|| {
                    format!(
                        "M={m} N={n} sample {s}: xi={:?} violations={:?}",
                        xi.data, report.violations
                    )
                });
            }
        }
    }
    Ok(out)
}

/// All `(M, N)` with both sides at most `max`.
pub fn all_pairs(max: usize) -> Vec<(usize, usize)> {
    systems(max).map(|c| (c.m(), c.n())).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct LpOracleOptions {
    /// Spacing of the `K` and `r` grids.
    pub grid: f64,
    /// Oracle step.
    pub step: f64,
    pub tolerance: f64,
}

impl Default for LpOracleOptions {
    fn default() -> Self {
        Self {
            grid: 0.1,
            step: 0.01,
            tolerance: 0.15,
        }
    }
}

/// Closed-form program value against the grid oracle: `K` on a grid in
/// `(0, L]`, `r` on a grid in `[0, K]`, all `M, N <= max`.
pub fn lp_oracle(max: usize, opts: LpOracleOptions) -> Result<SuiteReport> {
    let mut out = SuiteReport::new("lp-oracle");
    out.tolerance = Some(opts.tolerance);
    let mut worst: f64 = 0.0;
    let denom = (1.0 / opts.grid).round() as i64;
    for cfg in systems(max) {
        for kn in 1..=(cfg.l_min() as i64 * denom) {
            let split = DimensionSplit::from_ratio(kn, denom)?;
            for ri in 0..=kn {
                let r = ri as f64 / denom as f64;
                let closed = dstar_lp_closed(&cfg, &split, r)?.d;
                let oracle = dstar_lp_oracle(&cfg, &split, r, opts.step)?;
                let dev = (closed - oracle).abs();
                worst = worst.max(dev);
                out.checked += 1;
                if !(dev <= opts.tolerance) {
                    out.fail(|| {
                        format!(
                            "M={} N={} K={} r={r}: closed {closed} oracle {oracle}",
                            cfg.m(),
                            cfg.n(),
                            split.k()
                        )
                    });
                }
            }
        }
    }
    out.max_deviation = Some(worst);
    Ok(out)
}
