//! Quasi-static Rayleigh MIMO channel: `y_t = H x_t + rho^(-1/2) n_t`.
//!
//! Entries of `H` are i.i.d. `CN(0, 1)`; the noise has variance
//! `sigma^2 = rho^(-1) / (2 pi e)` per real dimension.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SystemConfig;
use crate::dmt::{AlphaVector, SchemeDims};
use crate::error::{domain, Error, Result};
use crate::linalg::{block_diagonal, singular_values_ascending, CMatrix};
use crate::scheme::XiMatrix;

const TWO_PI_E: f64 = 2.0 * core::f64::consts::PI * core::f64::consts::E;

/// Relative singular-value floor below which a matrix counts as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// `rho = 10^(dB/10)`.
pub fn rho_from_db(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Draws `H` (N × M) with i.i.d. `CN(0, 1)` entries, filled row by row.
pub fn sample_h<R: RngCore>(cfg: &SystemConfig, rng: &mut R) -> CMatrix {
    let (n, m) = (cfg.n(), cfg.m());
    let scale = core::f64::consts::FRAC_1_SQRT_2;
    let mut values = Vec::with_capacity(n * m);
    for _ in 0..n * m {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        values.push(Complex64::new(re * scale, im * scale));
    }
    CMatrix::from_row_slice(n, m, &values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub rho: f64,
    /// Variance per real dimension.
    pub sigma2: f64,
}

impl NoiseSpec {
    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(domain!("rho must be a finite value > 1, got {rho}"));
        }
        Ok(Self {
            rho,
            sigma2: 1.0 / (rho * TWO_PI_E),
        })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::from_rho(rho_from_db(db))
    }

    /// Noise with an explicit per-dimension variance; `rho` is derived from it.
    pub fn from_sigma2(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(domain!("noise variance must be positive, got {sigma2}"));
        }
        Ok(Self {
            rho: 1.0 / (sigma2 * TWO_PI_E),
            sigma2,
        })
    }

    pub fn sigma(&self) -> f64 {
        libm::sqrt(self.sigma2)
    }
}

/// `nt` i.i.d. real Gaussians of variance `spec.sigma2`.
pub fn sample_noise<R: RngCore>(nt: usize, spec: &NoiseSpec, rng: &mut R) -> Vec<f64> {
    let sigma = spec.sigma();
    (0..nt)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z * sigma
        })
        .collect()
}

/// `H` with its singular values and exponents at a given `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: CMatrix,
    /// `sqrt(lambda_1) <= ... <= sqrt(lambda_L)`.
    pub singular_values: Vec<f64>,
    pub alpha: AlphaVector,
}

impl ChannelRealization {
    pub fn new(h: CMatrix, rho: f64) -> Result<Self> {
        let alpha = alpha_exponents(&h, rho)?;
        let singular_values = singular_values_ascending(&h);
        Ok(Self {
            h,
            singular_values,
            alpha,
        })
    }
}

/// `alpha_i = -ln(lambda_i) / ln(rho)`, `alpha_1 >= ... >= alpha_L`; a zero
/// singular value gives `+inf`.
pub fn alpha_exponents(h: &CMatrix, rho: f64) -> Result<AlphaVector> {
    if !(rho > 1.0) {
        return Err(domain!("rho must exceed 1, got {rho}"));
    }
    let ln_rho = libm::log(rho);
    Ok(AlphaVector(
        singular_values_ascending(h)
            .into_iter()
            .map(|s| -libm::log(s * s) / ln_rho)
            .collect(),
    ))
}

/// `H_ex`: `t` copies of `h` on the diagonal, `(N t) × (M t)`.
pub fn extended_channel(h: &CMatrix, t: usize) -> Result<CMatrix> {
    if t < 1 {
        return Err(domain!("channel uses must be >= 1, got {t}"));
    }
    Ok(block_diagonal(h, t))
}

/// Exponents `eta_i` with `rho^(-eta_i / 2)` the singular values of the
/// effective channel, sorted `eta_1 >= eta_2 >= ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaVector(pub Vec<f64>);

impl EtaVector {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn eta_exponents(h_eff: &CMatrix, rho: f64) -> Result<EtaVector> {
    if !(rho > 1.0) {
        return Err(domain!("rho must exceed 1, got {rho}"));
    }
    if h_eff.nrows() < h_eff.ncols() {
        return Err(Error::RankDeficient);
    }
    let s = singular_values_ascending(h_eff);
    let largest = s.last().copied().unwrap_or(0.0);
    if s.is_empty() || !(s[0] > RANK_TOL * largest) {
        return Err(Error::RankDeficient);
    }
    let ln_rho = libm::log(rho);
    Ok(EtaVector(s.iter().map(|s| -2.0 * libm::log(*s) / ln_rho).collect()))
}

/// Rotated column coordinates `h̃_j = Θ_j^H h_j`.
///
/// Coordinate 1 points along `h_{j-1}`, coordinate 2 along the part of
/// `h_{j-2}` orthogonal to `h_{j-1}`, and so on through the previous
/// `min(j, N) - 1` columns; the remaining coordinates complete the basis
/// by Gram-Schmidt on the standard basis vectors.
pub fn rotated_columns(h: &CMatrix) -> CMatrix {
    let (n, m) = h.shape();
    let mut out = CMatrix::zeros(n, m);
    for j in 0..m {
        let previous = (j + 1).min(n) - 1;
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let candidates = (1..=previous)
            .map(|back| h.column(j - back).iter().copied().collect::<Vec<_>>())
            .chain((0..n).map(|e| {
                let mut v = alloc::vec![Complex64::new(0.0, 0.0); n];
                v[e] = Complex64::new(1.0, 0.0);
                v
            }));
        for mut v in candidates {
            if basis.len() == n {
                break;
            }
            let scale = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
            // Two passes of Gram-Schmidt for numerical orthogonality.
            for _ in 0..2 {
                for q in &basis {
                    let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, qa) in v.iter_mut().zip(q) {
                        *x -= proj * qa;
                    }
                }
            }
            let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
            if norm > 1e-10 * scale.max(1e-300) {
                basis.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        for (i, q) in basis.iter().enumerate() {
            out[(i, j)] = q.iter().zip(h.column(j).iter()).map(|(a, b)| a.conj() * b).sum();
        }
    }
    out
}

/// `ξ_{i,j} = -ln |h̃_{i,j}|^2 / ln rho`, unclipped.
pub fn xi_exponents(h: &CMatrix, rho: f64) -> Result<XiMatrix> {
    if !(rho > 1.0) {
        return Err(domain!("rho must exceed 1, got {rho}"));
    }
    let rotated = rotated_columns(h);
    let ln_rho = libm::log(rho);
    Ok(XiMatrix::from_fn(h.nrows(), h.ncols(), |i, j| {
        -libm::log(rotated[(i, j)].norm_sqr()) / ln_rho
    }))
}

/// Both sides of the trace bracket
/// `rho^(-min ξ) / (K T) <= rho^(-min eta) <= N K T^2 rho^(-min ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBracket {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl TraceBracket {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * self.value.abs();
        self.lower <= self.value + slack && self.value <= self.upper + slack
    }
}

/// Evaluates the trace bracket for one realization. `xi` must come from the
/// same channel as `h_eff` and should not be clipped.
pub fn trace_exponent_bracket(h_eff: &CMatrix, xi: &XiMatrix, rho: f64, dims: &SchemeDims) -> Result<TraceBracket> {
    let eta = eta_exponents(h_eff, rho)?;
    let kt = dims.complex_dim() as f64;
    let t = dims.t_l as f64;
    let strongest_xi = libm::pow(rho, -xi.min());
    Ok(TraceBracket {
        lower: strongest_xi / kt,
        value: libm::pow(rho, -eta.min()),
        upper: xi.n as f64 * kt * t * strongest_xi,
    })
}
