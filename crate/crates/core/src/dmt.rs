//! Diversity-multiplexing tradeoff bounds for infinite constellations.
//!
//! The upper bound `d*_K(r)` is the value of a small linear program over the
//! singular-value exponents of the channel:
//!
//! ```text
//! minimise   sum_i (|N - M| + 2i - 1) * alpha_i
//! subject to sum_{i=0}^{B-1} alpha_{L-i} + beta * alpha_{L-B} = K - r
//!            alpha_1 >= alpha_2 >= ... >= alpha_L >= 0
//! ```
//!
//! [`dstar_lp_closed`] returns its closed-form solution, [`dstar`] the
//! resulting piecewise formula, and [`dstar_lp_oracle`] a brute-force grid
//! search that shares no code with either.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::config::{DimensionSplit, SystemConfig};
use crate::error::{domain, Error, Result};

/// Slack allowed when a floating-point multiplexing gain is compared against `K`.
const R_SLACK: f64 = 1e-12;

/// Dimensions of the transmission scheme for DMT segment `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeDims {
    pub l: usize,
    /// `K_l = (M-l)(N-l)/(N+M-1-2l) + l`.
    pub k_l: Rational64,
    /// `T_l = N+M-1-2l` channel uses.
    pub t_l: usize,
}

impl SchemeDims {
    /// Complex dimension `K_l * T_l` of the constellation.
    pub fn complex_dim(&self) -> usize {
        (self.k_l * Rational64::from_integer(self.t_l as i64)).to_integer() as usize
    }

    pub fn split(&self) -> DimensionSplit {
        DimensionSplit::new(self.k_l).expect("K_l is positive")
    }
}

/// Singular-value exponents `alpha_1 >= ... >= alpha_L >= 0`, where
/// `lambda_i = rho^(-alpha_i)`. Index 0 holds `alpha_1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlphaVector(pub Vec<f64>);

impl AlphaVector {
    pub fn is_ordered(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&a| a >= 0.0)
    }
}

impl Deref for AlphaVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A point on the `d*_K` curve together with a minimiser of the program.
#[derive(Debug, Clone, PartialEq)]
pub struct DmtPoint {
    pub r: f64,
    pub d: f64,
    pub argmin: AlphaVector,
    /// Second minimiser when `K` sits exactly on a range boundary (both
    /// adjacent closed forms are optimal there).
    pub alternative: Option<AlphaVector>,
}

pub fn scheme_dims(cfg: &SystemConfig, l: usize) -> Result<SchemeDims> {
    let big_l = cfg.l_min();
    if l >= big_l {
        return Err(domain!("segment index l={l} must be < L={big_l}"));
    }
    let (m, n, l) = (cfg.m() as i64, cfg.n() as i64, l as i64);
    let t = n + m - 1 - 2 * l;
    let k = Rational64::new((m - l) * (n - l), t) + Rational64::from_integer(l);
    Ok(SchemeDims {
        l: l as usize,
        k_l: k,
        t_l: t as usize,
    })
}

/// Index `l` of the range `(K_{l-1}, K_l]` that contains `K` (range 0 is `(0, K_0]`).
pub fn segment_of(cfg: &SystemConfig, split: &DimensionSplit) -> Result<usize> {
    split.check_against(cfg)?;
    let k = split.k();
    (0..cfg.l_min())
        .find(|&l| k <= scheme_dims(cfg, l).map(|d| d.k_l).unwrap_or_default())
        .ok_or_else(|| domain!("K={k} is outside (0, L]"))
}

fn check_r(split: &DimensionSplit, r: f64) -> Result<f64> {
    let k = split.k_f64();
    if !(r >= 0.0 && r <= k + R_SLACK) {
        return Err(domain!("multiplexing gain r={r} outside [0, K={k}]"));
    }
    Ok(r.min(k))
}

/// Upper bound `d*_K(r)` on the diversity order of any `KT`-complex
/// dimensional infinite constellation.
pub fn dstar(cfg: &SystemConfig, split: &DimensionSplit, r: f64) -> Result<f64> {
    let r = check_r(split, r)?;
    let l = segment_of(cfg, split)?;
    let k = split.k_f64();
    let gain = ((cfg.m() - l) * (cfg.n() - l)) as f64;
    Ok(gain * (k - r) / (k - l as f64))
}

/// [`dstar`] in exact rational arithmetic.
pub fn dstar_exact(cfg: &SystemConfig, split: &DimensionSplit, r: Rational64) -> Result<Rational64> {
    let k = split.k();
    if r < Rational64::zero() || r > k {
        return Err(domain!("multiplexing gain r={r} outside [0, K={k}]"));
    }
    let l = segment_of(cfg, split)?;
    let gain = Rational64::from_integer(((cfg.m() - l) * (cfg.n() - l)) as i64);
    Ok(gain * (k - r) / (k - Rational64::from_integer(l as i64)))
}

/// Objective weights `|N - M| + 2i - 1`, `i = 1..L`.
pub fn lp_weights(cfg: &SystemConfig) -> Vec<f64> {
    (1..=cfg.l_min()).map(|i| (cfg.abs_diff() + 2 * i - 1) as f64).collect()
}

pub fn lp_objective(cfg: &SystemConfig, alpha: &[f64]) -> f64 {
    lp_weights(cfg).iter().zip(alpha).map(|(w, a)| w * a).sum()
}

/// Left-hand side `sum_{i=0}^{B-1} alpha_{L-i} + beta * alpha_{L-B}` of the
/// equality constraint.
pub fn lp_constraint(split: &DimensionSplit, alpha: &[f64]) -> f64 {
    let big_l = alpha.len();
    let b = split.b();
    let strong: f64 = (0..b).map(|i| alpha[big_l - 1 - i]).sum();
    strong + split.beta_f64() * alpha[big_l - 1 - b]
}

fn closed_form_alpha(big_l: usize, zeros: usize, value: f64) -> AlphaVector {
    let mut alpha = vec![value; big_l];
    for a in alpha.iter_mut().skip(big_l - zeros) {
        *a = 0.0;
    }
    AlphaVector(alpha)
}

/// Closed-form solution of the program: for `K` in range `l` the `l`
/// smallest exponents vanish and the rest equal `(K - r)/(K - l)`.
///
/// On a range boundary `K = K_l` the solution of range `l + 1` is also
/// optimal; it is returned in [`DmtPoint::alternative`]. The primary answer
/// follows the bracketing `K_{l-1} < K <= K_l`, so at `K = K_0` it is the
/// equalised vector `alpha_1 = ... = alpha_L`.
pub fn dstar_lp_closed(cfg: &SystemConfig, split: &DimensionSplit, r: f64) -> Result<DmtPoint> {
    let r = check_r(split, r)?;
    let l = segment_of(cfg, split)?;
    let big_l = cfg.l_min();
    let k = split.k_f64();
    let argmin = closed_form_alpha(big_l, l, (k - r) / (k - l as f64));
    let on_boundary = l + 1 < big_l && split.k() == scheme_dims(cfg, l)?.k_l;
    let alternative = on_boundary.then(|| closed_form_alpha(big_l, l + 1, (k - r) / (k - (l + 1) as f64)));
    Ok(DmtPoint {
        r,
        d: lp_objective(cfg, &argmin),
        argmin,
        alternative,
    })
}

/// Largest `L` accepted by [`dstar_lp_oracle`].
pub const ORACLE_MAX_L: usize = 4;

/// Brute-force minimisation of the program on a grid of spacing `step`.
///
/// Ordered vectors are parametrised by their non-negative increments
/// `delta_i = alpha_i - alpha_{i+1}` (with `alpha_{L+1} = 0`), which turns the
/// ordering into plain non-negativity. For every increment with a non-zero
/// constraint coefficient in turn, all other increments are enumerated on
/// the grid and that one is solved from the equality constraint. Branches
/// that cannot beat the incumbent are cut.
pub fn dstar_lp_oracle(cfg: &SystemConfig, split: &DimensionSplit, r: f64, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(domain!("grid step must be positive, got {step}"));
    }
    let big_l = cfg.l_min();
    if big_l > ORACLE_MAX_L {
        return Err(Error::Unsupported(alloc::format!(
            "grid oracle supports L <= {ORACLE_MAX_L}, got L={big_l}"
        )));
    }
    split.check_against(cfg)?;
    let r = check_r(split, r)?;
    let weights = lp_weights(cfg);
    // alpha_i (0-based i) contains delta_j for every j >= i.
    let cost: Vec<f64> = (0..big_l).map(|j| weights[..=j].iter().sum()).collect();
    let beta = split.beta_f64();
    let b = split.b();
    // Constraint coefficient of alpha_i: 1 for the B smallest, beta for the next.
    let alpha_coef = |i: usize| {
        if i + b >= big_l {
            1.0
        } else if i + b + 1 == big_l {
            beta
        } else {
            0.0
        }
    };
    let coef: Vec<f64> = (0..big_l).map(|j| (0..=j).map(alpha_coef).sum()).collect();
    let budget = split.k_f64() - r;
    // The grid points with a single non-zero increment seed the incumbent.
    let mut best = (0..big_l)
        .filter(|&j| coef[j] > 0.0)
        .map(|j| cost[j] * budget / coef[j])
        .fold(f64::INFINITY, f64::min);
    for pivot in (0..big_l).filter(|&j| coef[j] > 0.0) {
        let mut search = GridSearch {
            cost: &cost,
            coef: &coef,
            pivot,
            budget,
            step,
            best,
            ratio_after: (0..big_l)
                .map(|j| {
                    (j + 1..big_l)
                        .chain(core::iter::once(pivot))
                        .filter(|&i| coef[i] > 0.0)
                        .map(|i| cost[i] / coef[i])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect(),
        };
        search.descend(0, 0.0, 0.0);
        best = search.best;
    }
    Ok(best)
}

struct GridSearch<'a> {
    cost: &'a [f64],
    coef: &'a [f64],
    pivot: usize,
    budget: f64,
    step: f64,
    best: f64,
    /// Cheapest objective per unit of constraint among the pivot and the
    /// increments after `j`: a lower bound on the cost of the unspent budget.
    ratio_after: Vec<f64>,
}

impl GridSearch<'_> {
    fn descend(&mut self, j: usize, used: f64, objective: f64) {
        if j == self.cost.len() {
            let delta = (self.budget - used) / self.coef[self.pivot];
            if delta >= -1e-12 {
                let obj = objective + self.cost[self.pivot] * delta.max(0.0);
                if obj < self.best {
                    self.best = obj;
                }
            }
            return;
        }
        if j == self.pivot {
            self.descend(j + 1, used, objective);
            return;
        }
        let mut steps = 0u64;
        loop {
            let delta = steps as f64 * self.step;
            steps += 1;
            let spent = used + self.coef[j] * delta;
            let obj = objective + self.cost[j] * delta;
            let floor = obj + (self.budget - spent).max(0.0) * self.ratio_after[j];
            if spent > self.budget + 1e-12 || floor >= self.best {
                break;
            }
            self.descend(j + 1, spent, obj);
            if self.coef[j] == 0.0 && self.cost[j] == 0.0 {
                break;
            }
        }
    }
}

/// Optimal DMT of finite constellations: the piecewise-linear curve through
/// `(l, (M-l)(N-l))`, `l = 0..L`.
pub fn optimal_dmt(cfg: &SystemConfig, r: f64) -> Result<f64> {
    let big_l = cfg.l_min();
    if !(r >= 0.0 && r <= big_l as f64 + R_SLACK) {
        return Err(domain!("multiplexing gain r={r} outside [0, L={big_l}]"));
    }
    let r = r.min(big_l as f64);
    let corner = |l: usize| ((cfg.m() - l) * (cfg.n() - l)) as f64;
    let l = (r.floor() as usize).min(big_l - 1);
    let frac = r - l as f64;
    Ok(corner(l) + frac * (corner(l + 1) - corner(l)))
}

/// Diversity order `(M-l)(N-l) - (r-l)(N+M-2l-1)` attained by segment `l`
/// of the transmission scheme, `0 <= r <= K_l`.
pub fn achievable_dmt(cfg: &SystemConfig, l: usize, r: f64) -> Result<f64> {
    let dims = scheme_dims(cfg, l)?;
    let k = dims.k_l.to_f64().unwrap_or(f64::NAN);
    if !(r >= 0.0 && r <= k + R_SLACK) {
        return Err(domain!("multiplexing gain r={r} outside [0, K_l={k}]"));
    }
    let r = r.min(k);
    let corner = ((cfg.m() - l) * (cfg.n() - l)) as f64;
    Ok(corner - (r - l as f64) * (cfg.n() + cfg.m() - 2 * l - 1) as f64)
}
