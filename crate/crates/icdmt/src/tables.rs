//! Text outputs of the non-simulation subcommands.

use std::fmt::Write as _;

use icdmt_core::config::DimensionSplit;
use icdmt_core::dmt::{achievable_dmt, dstar_exact, optimal_dmt, scheme_dims, segment_of};
use icdmt_core::scheme::{block_sets, build_scheme, Cell};
use icdmt_core::spherepack::{bound_constants, lower_bound_ln_pe};
use icdmt_core::{Rational64, SystemConfig};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::{Error, Result};

/// Rounds grid coordinates so `0.1 * 3` prints as `0.3`.
fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// `0, step, 2 step, ...` up to `hi`, with `hi` appended when off-grid.
pub fn grid_to(hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config(format!("grid step must be positive, got {step}")));
    }
    let n = (hi / step + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=n).map(|i| tidy(i as f64 * step)).collect();
    if hi - out[n] > 1e-9 {
        out.push(hi);
    }
    Ok(out)
}

/// Parses `lo:hi:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("expected lo:hi:step, got {spec:?}"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(bad());
    }
    Ok(grid_to(hi - lo, step)?.into_iter().map(|x| tidy(lo + x)).collect())
}

/// `0, step, 2 step, ...` up to `hi` in exact arithmetic, with `hi`
/// appended when off-grid.
pub fn rational_grid_to(hi: Rational64, step: Rational64) -> Result<Vec<Rational64>> {
    if step <= Rational64::zero() {
        return Err(Error::Config(format!("grid step must be positive, got {step}")));
    }
    let n = (hi / step).floor().to_integer();
    let mut out: Vec<Rational64> = (0..=n).map(|i| step * i).collect();
    if out.last() != Some(&hi) {
        out.push(hi);
    }
    Ok(out)
}

/// CSV `K,r,dstar,optimal,achievable` for one dimension split, where
/// `achievable` is the scheme of the segment containing `K`.
pub fn dmt_rows(out: &mut String, cfg: &SystemConfig, split: &DimensionSplit, r_step: Rational64) -> Result<()> {
    let l = segment_of(cfg, split)?;
    for r in rational_grid_to(split.k(), r_step)? {
        let rf = r.to_f64().expect("grid values are finite");
        writeln!(
            out,
            "{},{rf},{},{},{}",
            split.k(),
            dstar_exact(cfg, split, r)?.to_f64().expect("finite"),
            optimal_dmt(cfg, rf)?,
            achievable_dmt(cfg, l, rf)?
        )
        .expect("writing to a string");
    }
    Ok(())
}

pub const DMT_HEADER: &str = "K,r,dstar,optimal,achievable\n";

/// Table for `split`, or for every `K_l` when `split` is `None`.
pub fn dmt_table(cfg: &SystemConfig, split: Option<&DimensionSplit>, r_step: Rational64) -> Result<String> {
    let mut out = String::from(DMT_HEADER);
    match split {
        Some(s) => dmt_rows(&mut out, cfg, s, r_step)?,
        None => {
            for l in 0..cfg.l_min() {
                dmt_rows(&mut out, cfg, &scheme_dims(cfg, l)?.split(), r_step)?;
            }
        }
    }
    Ok(out)
}

/// CSV `mu,ln_bound,bound` of the sphere-packing lower bound.
pub fn bound_table(n: usize, mus: &[f64]) -> Result<String> {
    bound_constants(n)?;
    let mut out = String::from("mu,ln_bound,bound\n");
    for &mu in mus {
        let ln = lower_bound_ln_pe(mu, n)?;
        writeln!(out, "{mu},{ln},{}", ln.exp()).expect("writing to a string");
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeJson {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub k: String,
    pub t: usize,
    pub symbols: usize,
    /// Rows of `x_k` / `0` labels.
    pub grid: Vec<Vec<String>>,
    /// 1-based antenna indices per channel use.
    pub blocks: Vec<Vec<usize>>,
}

pub fn scheme_json(cfg: &SystemConfig, l: usize) -> Result<SchemeJson> {
    let pattern = build_scheme(cfg, l)?;
    let dims = scheme_dims(cfg, l)?;
    Ok(SchemeJson {
        m: cfg.m(),
        n: cfg.n(),
        l,
        k: dims.k_l.to_string(),
        t: dims.t_l,
        symbols: pattern.symbol_count(),
        grid: (0..pattern.m)
            .map(|row| {
                (0..pattern.t)
                    .map(|col| match pattern.cell(row, col) {
                        Cell::Symbol(k) => format!("x_{k}"),
                        Cell::Empty => "0".to_owned(),
                    })
                    .collect()
            })
            .collect(),
        blocks: block_sets(&pattern).blocks,
    })
}

pub fn scheme_text(cfg: &SystemConfig, l: usize) -> Result<String> {
    let pattern = build_scheme(cfg, l)?;
    let dims = scheme_dims(cfg, l)?;
    Ok(format!(
        "M={} N={} l={l} K={} T={} symbols={}\n{pattern}",
        cfg.m(),
        cfg.n(),
        dims.k_l,
        dims.t_l,
        pattern.symbol_count()
    ))
}
