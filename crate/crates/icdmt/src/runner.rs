//! Deterministic parallel trial runner.
//!
//! A point's trials are cut into fixed-size batches. Batches are evaluated
//! in rounds of fixed length on a rayon pool and the stopping rule is
//! applied to the ordered prefix of batch tallies, so the counts reported
//! depend only on the seed and the budget, never on the number of threads.

use icdmt_core::sim::{batch_range, batches_needed, PointContext, Tally, TrialBudget};
use rayon::prelude::*;

use crate::Result;

pub const DEFAULT_BATCH_SIZE: u64 = 10_000;
const ROUND_BATCHES: u64 = 32;

pub struct Runner {
    pool: rayon::ThreadPool,
    threads: usize,
    batch_size: u64,
    verbose: bool,
}

impl Runner {
    /// `threads == 0` uses rayon's default (one per core).
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self {
            threads: pool.current_num_threads(),
            pool,
            batch_size: DEFAULT_BATCH_SIZE,
            verbose: false,
        })
    }

    pub fn with_batch_size(mut self, batch_size: u64) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    /// Print per-point progress to standard error.
    pub fn verbose(mut self, on: bool) -> Self {
        self.verbose = on;
        self
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn batch_size(&self) -> u64 {
        self.batch_size
    }

    pub(crate) fn progress(&self, message: impl FnOnce() -> String) {
        if self.verbose {
            eprintln!("{}", message());
        }
    }

    /// Runs batches until the budget's stopping rule is met.
    pub fn run_point(&self, ctx: &PointContext<'_>, budget: &TrialBudget, decode: bool) -> Tally {
        let mut tallies: Vec<Tally> = Vec::new();
        loop {
            let first = tallies.len() as u64;
            let round: Vec<Tally> = self.pool.install(|| {
                (first..first + ROUND_BATCHES)
                    .into_par_iter()
                    .map(|b| ctx.run_range(batch_range(budget, self.batch_size, b), decode))
                    .collect()
            });
            tallies.extend(round);
            if let Some(used) = batches_needed(budget, &tallies) {
                let mut total = Tally::default();
                for t in &tallies[..used] {
                    total.add(t);
                }
                return total;
            }
        }
    }

    /// Exactly `trials` trials.
    pub fn run_fixed(&self, ctx: &PointContext<'_>, trials: u64, decode: bool) -> Tally {
        self.run_point(ctx, &TrialBudget::fixed(trials), decode)
    }
}
