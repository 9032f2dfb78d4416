//! Antenna configuration and the integer/fractional split of the
//! dimensions-per-channel-use parameter.

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Transmit/receive antenna counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawSystemConfig"))]
pub struct SystemConfig {
    m: usize,
    n: usize,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawSystemConfig {
    m: usize,
    n: usize,
}

#[cfg(feature = "serde")]
impl TryFrom<RawSystemConfig> for SystemConfig {
    type Error = crate::error::Error;

    fn try_from(raw: RawSystemConfig) -> Result<Self> {
        Self::new(raw.m, raw.n)
    }
}

impl SystemConfig {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(domain!("antenna counts must be >= 1, got M={m}, N={n}"));
        }
        Ok(Self { m, n })
    }

    /// Transmit antennas.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Receive antennas.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `min(M, N)`, the number of non-trivial singular values of the channel.
    pub fn l_min(&self) -> usize {
        self.m.min(self.n)
    }

    /// `|N - M|`.
    pub fn abs_diff(&self) -> usize {
        self.m.abs_diff(self.n)
    }
}

/// `K = B + beta` with `B` a non-negative integer and `0 < beta <= 1`.
///
/// An integer `K` maps to `(K - 1, 1)`, not `(K, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionSplit {
    k: Rational64,
    b: usize,
    beta: Rational64,
}

impl DimensionSplit {
    pub fn new(k: Rational64) -> Result<Self> {
        if k <= Rational64::zero() {
            return Err(domain!("K must be positive, got {k}"));
        }
        let b = k.ceil().to_integer() - 1;
        let beta = k - Rational64::from_integer(b);
        Ok(Self { k, b: b as usize, beta })
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(domain!("zero denominator"));
        }
        Self::new(Rational64::new(numer, denom))
    }

    pub fn k(&self) -> Rational64 {
        self.k
    }

    pub fn k_f64(&self) -> f64 {
        self.k.to_f64().unwrap_or(f64::NAN)
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn beta(&self) -> Rational64 {
        self.beta
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta.to_f64().unwrap_or(f64::NAN)
    }

    /// Checks `0 < K <= L` for the given configuration.
    pub fn check_against(&self, cfg: &SystemConfig) -> Result<()> {
        if self.k > Rational64::from_integer(cfg.l_min() as i64) {
            return Err(domain!(
                "K={} exceeds L={} for M={}, N={}",
                self.k,
                cfg.l_min(),
                cfg.m(),
                cfg.n()
            ));
        }
        Ok(())
    }
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"2.5"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| domain!("bad numerator in {s:?}"))?;
        let q: i64 = q.trim().parse().map_err(|_| domain!("bad denominator in {s:?}"))?;
        if q == 0 {
            return Err(domain!("zero denominator in {s:?}"));
        }
        return Ok(Rational64::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| domain!("bad number {s:?}"))?
        };
        if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(domain!("bad number {s:?}"));
        }
        let denom = 10i64.pow(frac.len() as u32);
        let frac_part: i64 = frac.parse().map_err(|_| domain!("bad number {s:?}"))?;
        let magnitude = int_part.abs() * denom + frac_part;
        let numer = if neg { -magnitude } else { magnitude };
        return Ok(Rational64::new(numer, denom));
    }
    let p: i64 = s.parse().map_err(|_| domain!("bad number {s:?}"))?;
    Ok(Rational64::from_integer(p))
}
