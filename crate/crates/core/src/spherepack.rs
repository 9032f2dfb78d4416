//! Sphere-packing lower bound on the error probability of a lattice of
//! complex dimension `n` as a function of its VNR `mu`:
//!
//! `P_e > C(n)/4 · exp(-mu A(n) + (n - 1) ln mu)` for `mu > 1`, and the
//! outage floor `C(n)/4 · exp(-A(n))` for `mu <= 1`.

use alloc::vec::Vec;

use crate::config::DimensionSplit;
use crate::dmt::lp_constraint;
use crate::error::{domain, Result};
use crate::lattice::ln_vnr;
use crate::special::{ln_gamma, ln_q_function};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub n: usize,
    /// `A(n) = e Γ(n+1)^(1/n)`.
    pub a_const: f64,
    /// `C(n) = e^(n - 3/2) Γ(n+1)^((n-1)/n) / (2 Γ(n))`.
    pub c_const: f64,
    pub ln_a: f64,
    pub ln_c: f64,
}

pub fn bound_constants(n: usize) -> Result<BoundConstants> {
    if n == 0 {
        return Err(domain!("complex dimension must be >= 1"));
    }
    let nf = n as f64;
    let lg = ln_gamma(nf + 1.0);
    let ln_a = 1.0 + lg / nf;
    let ln_c = nf - 1.5 + lg * (nf - 1.0) / nf - libm::log(2.0) - ln_gamma(nf);
    Ok(BoundConstants {
        n,
        a_const: libm::exp(ln_a),
        c_const: libm::exp(ln_c),
        ln_a,
        ln_c,
    })
}

/// Natural log of the bound; never positive.
pub fn lower_bound_ln_pe(mu: f64, n: usize) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(domain!("VNR must be positive, got {mu}"));
    }
    let c = bound_constants(n)?;
    let base = c.ln_c - libm::log(4.0);
    let ln = if mu <= 1.0 {
        base - c.a_const
    } else {
        base - mu * c.a_const + (n as f64 - 1.0) * libm::log(mu)
    };
    Ok(ln.min(0.0))
}

/// The bound itself; underflows to 0 far in the tail, where
/// [`lower_bound_ln_pe`] stays finite.
pub fn lower_bound_pe(mu: f64, n: usize) -> Result<f64> {
    Ok(libm::exp(lower_bound_ln_pe(mu, n)?))
}

/// `mu_rc <= rho^(1 - (r + sum_{i<B} alpha_{L-i} + beta alpha_{L-B}) / K)`,
/// returned as the right-hand side.
pub fn mu_rc_from_alpha(rho: f64, r: f64, split: &DimensionSplit, alpha: &[f64]) -> Result<f64> {
    let k = split.k_f64();
    if !(rho > 1.0) {
        return Err(domain!("rho must exceed 1, got {rho}"));
    }
    if !(0.0..=k).contains(&r) {
        return Err(domain!("multiplexing gain {r} outside [0, {k}]"));
    }
    if alpha.len() <= split.b() {
        return Err(domain!(
            "need at least {} exponents, got {}",
            split.b() + 1,
            alpha.len()
        ));
    }
    let exponent = 1.0 - (r + lp_constraint(split, alpha)) / k;
    Ok(libm::pow(rho, exponent))
}

/// `ln` of the exact error probability of `ℤ^dim` under AWGN with standard
/// deviation `sigma`; finite even when the probability underflows.
pub fn ln_exact_pe_cubic_awgn(sigma: f64, dim: usize) -> Result<f64> {
    if !(sigma > 0.0) || dim == 0 {
        return Err(domain!("need sigma > 0 and dim >= 1, got {sigma}, {dim}"));
    }
    let ln_miss = libm::log(2.0) + ln_q_function(1.0 / (2.0 * sigma));
    let miss = libm::exp(ln_miss);
    if miss >= 1.0 {
        return Ok(0.0);
    }
    let ln_correct_all = dim as f64 * libm::log1p(-miss);
    if ln_correct_all > -1e-300 && miss < 1e-300 {
        // 1 - (1 - m)^d ≈ d m
        return Ok(libm::log(dim as f64) + ln_miss);
    }
    Ok(libm::log(-libm::expm1(ln_correct_all)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMargin {
    /// Complex dimension; the lattice is `ℤ^(2n)`.
    pub n: usize,
    pub sigma: f64,
    pub mu: f64,
    pub ln_exact: f64,
    pub ln_bound: f64,
}

impl BoundMargin {
    /// `ln exact - ln bound`; positive when the ordering holds strictly.
    pub fn margin(&self) -> f64 {
        self.ln_exact - self.ln_bound
    }

    pub fn holds(&self) -> bool {
        self.margin() > 0.0
    }
}

/// Compares the exact `ℤ^(2n)` AWGN error probability with the bound at the
/// lattice's VNR `1 / (2 pi e sigma^2)`, for every pair of `n` and `sigma`.
pub fn bound_vs_exact_check(sigmas: &[f64], ns: &[usize]) -> Result<Vec<BoundMargin>> {
    let mut out = Vec::with_capacity(sigmas.len() * ns.len());
    for &n in ns {
        for &sigma in sigmas {
            let mu = libm::exp(ln_vnr(0.0, sigma * sigma, n));
            out.push(BoundMargin {
                n,
                sigma,
                mu,
                ln_exact: ln_exact_pe_cubic_awgn(sigma, 2 * n)?,
                ln_bound: lower_bound_ln_pe(mu, n)?,
            });
        }
    }
    Ok(out)
}

/// `count` values spaced evenly in `log10` from `lo` to `hi` inclusive.
pub fn log_sweep(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (libm::log10(lo), libm::log10(hi));
    (0..count)
        .map(|i| libm::pow(10.0, a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}
