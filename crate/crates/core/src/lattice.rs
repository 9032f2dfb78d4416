//! Real lattices: generators, density and VNR arithmetic, exact closest-point
//! search, and carving finite constellations out of a ball.
//!
//! A lattice of complex dimension `KT` is handled as a `2KT`-dimensional real
//! lattice; complex channels act through [`real_embedding`].

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Dyn, QR};
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::config::DimensionSplit;
use crate::error::{domain, Error, Result};
use crate::linalg::{real_embedding, CMatrix, RMatrix};
use crate::special::{ln_gamma, q_function, unit_ball_volume};

const TWO_PI_E: f64 = 2.0 * core::f64::consts::PI * core::f64::consts::E;

/// Largest dimension accepted by the enumeration routines.
pub const MAX_CVP_DIM: usize = 32;
/// Largest Frobenius condition number accepted by the enumeration routines.
pub const MAX_CONDITION: f64 = 1e12;

/// A full-rank lattice `{G z : z ∈ ℤ^dim}` with basis vectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub dim: usize,
    pub generator: RMatrix,
    /// `|det G|`.
    pub covolume: f64,
}

impl LatticeSpec {
    pub fn new(generator: RMatrix) -> Result<Self> {
        if !generator.is_square() || generator.nrows() == 0 {
            return Err(domain!(
                "generator must be square and non-empty, got {}x{}",
                generator.nrows(),
                generator.ncols()
            ));
        }
        let covolume = generator.determinant().abs();
        if !(covolume > 0.0) || !covolume.is_finite() {
            return Err(Error::RankDeficient);
        }
        Ok(Self {
            dim: generator.nrows(),
            generator,
            covolume,
        })
    }

    /// Points per unit volume, `1 / covolume`.
    pub fn density(&self) -> f64 {
        1.0 / self.covolume
    }

    pub fn point(&self, z: &[i64]) -> Vec<f64> {
        let z = nalgebra::DVector::from_iterator(z.len(), z.iter().map(|v| *v as f64));
        (&self.generator * z).iter().copied().collect()
    }

    /// Length of the shortest non-zero vector.
    pub fn shortest_vector_length(&self) -> Result<f64> {
        let tri = Triangular::from_qr(&self.generator.clone().qr())?;
        let bound = (0..self.dim)
            .map(|j| self.generator.column(j).norm_squared())
            .fold(f64::INFINITY, f64::min);
        let center = vec![0.0; self.dim];
        let mut best = bound;
        tri.enumerate(&center, bound, |z, d| {
            if z.iter().any(|v| *v != 0) && d < best {
                best = d;
            }
            Some(best)
        });
        Ok(libm::sqrt(best))
    }
}

/// `ℤ^dim`.
pub fn cubic_lattice(dim: usize) -> Result<LatticeSpec> {
    if dim == 0 {
        return Err(domain!("lattice dimension must be >= 1"));
    }
    LatticeSpec::new(RMatrix::identity(dim, dim))
}

/// Gaussian generator rescaled to unit covolume. Near-singular draws are
/// discarded and redrawn.
pub fn random_lattice<R: RngCore>(dim: usize, rng: &mut R) -> Result<LatticeSpec> {
    if dim == 0 {
        return Err(domain!("lattice dimension must be >= 1"));
    }
    loop {
        let g = RMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
        let det = g.determinant().abs();
        if !(det > 1e-12) {
            continue;
        }
        let scaled = g * libm::pow(det, -1.0 / dim as f64);
        if let Ok(lat) = LatticeSpec::new(scaled) {
            return Ok(lat);
        }
    }
}

/// Scales the generator by `rho^(-r / 2K)`, which multiplies the density by
/// `rho^(r T)` when `dim = 2 K T`.
pub fn scale_for_multiplexing(
    lat: &LatticeSpec,
    rho: f64,
    r: f64,
    split: &DimensionSplit,
    t: usize,
) -> Result<LatticeSpec> {
    let k = split.k_f64();
    if !(0.0..=k).contains(&r) {
        return Err(domain!("multiplexing gain {r} outside [0, {k}]"));
    }
    if !(rho > 0.0) {
        return Err(domain!("rho must be positive, got {rho}"));
    }
    let kt = split.k() * num_rational::Rational64::from_integer(t as i64);
    if !kt.is_integer() || (2 * kt.to_integer()) as usize != lat.dim {
        return Err(domain!(
            "lattice dimension {} does not equal 2KT = 2*{}*{}",
            lat.dim,
            split.k(),
            t
        ));
    }
    let factor = libm::pow(rho, -r / (2.0 * k));
    Ok(LatticeSpec {
        dim: lat.dim,
        generator: &lat.generator * factor,
        covolume: lat.covolume * libm::pow(rho, -r * t as f64),
    })
}

/// Radius of the `2l`-real-dimensional ball of the given volume.
pub fn effective_radius(volume: f64, l: usize) -> Result<f64> {
    if !(volume > 0.0) || l == 0 {
        return Err(domain!("need volume > 0 and l >= 1, got {volume}, {l}"));
    }
    let lf = l as f64;
    let ln_r2 = (libm::log(volume) + ln_gamma(lf + 1.0)) / lf - libm::log(core::f64::consts::PI);
    Ok(libm::exp(ln_r2 / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VnrReport {
    pub gamma: f64,
    pub sigma2: f64,
    pub mu: f64,
    /// `mu <= 1`.
    pub outage: bool,
}

/// `mu = gamma^(-1/KT) / (2 pi e sigma^2)` for a lattice of complex dimension `kt`.
pub fn vnr(gamma: f64, sigma2: f64, kt: usize) -> Result<VnrReport> {
    if !(gamma > 0.0) || !(sigma2 > 0.0) || kt == 0 {
        return Err(domain!(
            "need gamma > 0, sigma2 > 0, kt >= 1; got {gamma}, {sigma2}, {kt}"
        ));
    }
    let mu = libm::exp(ln_vnr(-libm::log(gamma), sigma2, kt));
    Ok(VnrReport {
        gamma,
        sigma2,
        mu,
        outage: mu <= 1.0,
    })
}

/// `ln mu` from `ln covolume` of a `2 kt`-dimensional lattice.
pub fn ln_vnr(ln_covolume: f64, sigma2: f64, kt: usize) -> f64 {
    ln_covolume / kt as f64 - libm::log(TWO_PI_E * sigma2)
}

/// Upper-triangular factor of a QR decomposition, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangular {
    n: usize,
    r: Vec<f64>,
}

impl Triangular {
    fn from_qr(qr: &QR<f64, Dyn, Dyn>) -> Result<Self> {
        let r = qr.r();
        let n = r.ncols();
        if n == 0 || r.nrows() < n {
            return Err(Error::RankDeficient);
        }
        if n > MAX_CVP_DIM {
            return Err(Error::Unsupported(alloc::format!(
                "enumeration dimension {n} exceeds {MAX_CVP_DIM}"
            )));
        }
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                rows[i * n + j] = r[(i, j)];
            }
        }
        let tri = Self { n, r: rows };
        let cond = tri.condition_estimate();
        if !(cond <= MAX_CONDITION) {
            return Err(if cond.is_finite() {
                Error::IllConditioned(cond)
            } else {
                Error::RankDeficient
            });
        }
        Ok(tri)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `ln |det R|`.
    pub fn ln_abs_det(&self) -> f64 {
        (0..self.n).map(|i| libm::log(self.at(i, i).abs())).sum()
    }

    /// `||R||_F ||R^-1||_F`, an upper bound on the 2-norm condition number
    /// that is at most `n` times too large.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        if (0..n).any(|i| self.at(i, i) == 0.0) {
            return f64::INFINITY;
        }
        let norm: f64 = self.r.iter().map(|v| v * v).sum();
        // Column j of R^-1 by back substitution.
        let mut inv_norm = 0.0;
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            for i in (0..=j).rev() {
                let mut s = if i == j { 1.0 } else { 0.0 };
                for k in i + 1..=j {
                    s -= self.at(i, k) * col[k];
                }
                col[i] = s / self.at(i, i);
            }
            inv_norm += col.iter().map(|v| v * v).sum::<f64>();
        }
        libm::sqrt(norm * inv_norm)
    }

    /// Schnorr-Euchner depth-first enumeration of integer vectors `z` with
    /// `||R z - c||^2 <= bound`, innermost coordinate last. The visitor sees
    /// each leaf with its squared distance and returns the new bound, or
    /// `None` to stop.
    pub fn enumerate(&self, c: &[f64], bound: f64, mut visit: impl FnMut(&[i64], f64) -> Option<f64>) {
        let n = self.n;
        let mut bound = bound;
        let mut z = vec![0i64; n];
        let mut step = vec![0i64; n];
        let mut center = vec![0.0; n];
        // partial[k] is the distance accumulated by levels k..n.
        let mut partial = vec![0.0; n + 1];
        let mut k = n - 1;
        let start = self.start_at(k, c, &z);
        center[k] = start;
        z[k] = libm::round(start) as i64;
        step[k] = if start >= z[k] as f64 { 1 } else { -1 };
        loop {
            let diff = self.at(k, k) * (z[k] as f64 - center[k]);
            let d = partial[k + 1] + diff * diff;
            if d <= bound {
                if k == 0 {
                    match visit(&z, d) {
                        Some(b) => bound = b,
                        None => return,
                    }
                    advance(&mut z[k], &mut step[k]);
                } else {
                    partial[k] = d;
                    k -= 1;
                    let ck = self.start_at(k, c, &z);
                    center[k] = ck;
                    z[k] = libm::round(ck) as i64;
                    step[k] = if ck >= z[k] as f64 { 1 } else { -1 };
                }
            } else {
                if k == n - 1 {
                    return;
                }
                k += 1;
                advance(&mut z[k], &mut step[k]);
            }
        }
    }

    /// Unconstrained minimiser of level `k` given the coordinates above it.
    fn start_at(&self, k: usize, c: &[f64], z: &[i64]) -> f64 {
        let mut s = c[k];
        for j in k + 1..self.n {
            s -= self.at(k, j) * z[j] as f64;
        }
        s / self.at(k, k)
    }

    /// Nearest-plane (Babai) point.
    pub fn babai(&self, c: &[f64]) -> CvpSolution {
        let n = self.n;
        let mut z = vec![0i64; n];
        let mut dist = 0.0;
        for k in (0..n).rev() {
            let ck = self.start_at(k, c, &z);
            z[k] = libm::round(ck) as i64;
            let diff = self.at(k, k) * (z[k] as f64 - ck);
            dist += diff * diff;
        }
        CvpSolution { z, distance_sq: dist }
    }

    /// Exact closest point; ties go to the lexicographically smallest `z`.
    pub fn closest(&self, c: &[f64]) -> CvpSolution {
        let mut best: Option<CvpSolution> = None;
        self.enumerate(c, f64::INFINITY, |z, d| {
            let better = match &best {
                None => true,
                Some(b) => d < b.distance_sq || (d == b.distance_sq && z < b.z.as_slice()),
            };
            if better {
                best = Some(CvpSolution {
                    z: z.to_vec(),
                    distance_sq: d,
                });
            }
            best.as_ref().map(|b| b.distance_sq)
        });
        best.expect("enumeration always reaches the nearest-plane leaf")
    }

    /// Whether the origin is the closest point to `c` under the same
    /// tie-breaking as [`Triangular::closest`]. Stops at the first nonzero
    /// point that beats it.
    pub fn zero_is_closest(&self, c: &[f64]) -> bool {
        let zero_dist: f64 = c.iter().map(|v| v * v).sum();
        let mut zero_wins = true;
        self.enumerate(c, zero_dist, |z, d| {
            if z.iter().all(|v| *v == 0) {
                return Some(zero_dist);
            }
            let beats = d < zero_dist || (d == zero_dist && is_lex_negative(z));
            if beats {
                zero_wins = false;
                None
            } else {
                Some(zero_dist)
            }
        });
        zero_wins
    }

    /// All `z` with `||R z - c||^2 <= bound`.
    pub fn points_within(&self, c: &[f64], bound: f64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        self.enumerate(c, bound, |z, _| {
            out.push(z.to_vec());
            Some(bound)
        });
        out
    }
}

/// Zig-zag around the level centre: `c, c±1, c∓1, c±2, ...`.
fn advance(z: &mut i64, step: &mut i64) {
    *z += *step;
    *step = -*step - step.signum();
}

/// `z < 0` lexicographically.
fn is_lex_negative(z: &[i64]) -> bool {
    z.iter().find(|v| **v != 0).is_some_and(|v| *v < 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvpSolution {
    pub z: Vec<i64>,
    /// Squared distance within the column space of the basis.
    pub distance_sq: f64,
}

/// A basis `B` (possibly tall) reduced to `B = Q R`.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    rows: usize,
    qr: QR<f64, Dyn, Dyn>,
    pub tri: Triangular,
}

impl ReducedBasis {
    pub fn new(basis: &RMatrix) -> Result<Self> {
        if basis.nrows() < basis.ncols() {
            return Err(Error::RankDeficient);
        }
        if basis.ncols() > MAX_CVP_DIM {
            return Err(Error::Unsupported(alloc::format!(
                "enumeration dimension {} exceeds {MAX_CVP_DIM}",
                basis.ncols()
            )));
        }
        let qr = basis.clone().qr();
        let tri = Triangular::from_qr(&qr)?;
        Ok(Self {
            rows: basis.nrows(),
            qr,
            tri,
        })
    }

    /// First `n` coordinates of `Q^T y`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(domain!(
                "received vector has length {}, expected {}",
                y.len(),
                self.rows
            ));
        }
        let mut v = nalgebra::DVector::from_column_slice(y);
        self.qr.q_tr_mul(&mut v);
        Ok(v.iter().take(self.tri.dim()).copied().collect())
    }
}

/// Exact closest lattice point to `y`: integer `z` minimising `||B z - y||`.
pub fn closest_point(basis: &RMatrix, y: &[f64]) -> Result<CvpSolution> {
    let reduced = ReducedBasis::new(basis)?;
    Ok(reduced.tri.closest(&reduced.project(y)?))
}

/// Nearest-plane approximation; fast but not exact.
pub fn babai(basis: &RMatrix, y: &[f64]) -> Result<CvpSolution> {
    let reduced = ReducedBasis::new(basis)?;
    Ok(reduced.tri.babai(&reduced.project(y)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub z: Vec<i64>,
    /// The decoded point differs from the transmitted origin.
    pub error: bool,
}

/// Regular lattice decoding of `y = H_eff G z + noise` with `z = 0` sent.
pub fn decode_receiver(h_eff: &CMatrix, lat: &LatticeSpec, y: &[f64]) -> Result<Decoded> {
    let basis = received_basis(h_eff, lat)?;
    let solution = closest_point(&basis, y)?;
    let error = solution.z.iter().any(|v| *v != 0);
    Ok(Decoded { z: solution.z, error })
}

/// Real basis `real(H_eff) G` of the received lattice.
pub fn received_basis(h_eff: &CMatrix, lat: &LatticeSpec) -> Result<RMatrix> {
    if 2 * h_eff.ncols() != lat.dim {
        return Err(domain!(
            "lattice dimension {} does not match 2 x {} channel inputs",
            lat.dim,
            h_eff.ncols()
        ));
    }
    Ok(real_embedding(h_eff) * &lat.generator)
}

/// Exact error probability of `ℤ^dim` under AWGN of standard deviation
/// `sigma` per dimension.
pub fn exact_pe_cubic_awgn(sigma: f64, dim: usize) -> Result<f64> {
    if !(sigma > 0.0) || dim == 0 {
        return Err(domain!("need sigma > 0 and dim >= 1, got {sigma}, {dim}"));
    }
    let miss = 2.0 * q_function(1.0 / (2.0 * sigma));
    if miss >= 1.0 {
        return Ok(1.0);
    }
    Ok(-libm::expm1(dim as f64 * libm::log1p(-miss)))
}

/// Points of `Λ + u` inside the closed origin-centred ball.
pub fn points_in_ball(lat: &LatticeSpec, translate: &[f64], radius: f64) -> Result<Vec<Vec<f64>>> {
    if translate.len() != lat.dim {
        return Err(domain!(
            "translate has length {}, expected {}",
            translate.len(),
            lat.dim
        ));
    }
    if !(radius >= 0.0) {
        return Err(domain!("radius must be non-negative, got {radius}"));
    }
    let reduced = ReducedBasis::new(&lat.generator)?;
    let neg: Vec<f64> = translate.iter().map(|v| -v).collect();
    let center = reduced.project(&neg)?;
    Ok(reduced
        .tri
        .points_within(&center, radius * radius)
        .into_iter()
        .map(|z| lat.point(&z).into_iter().zip(translate).map(|(p, u)| p + u).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarveResult {
    pub translate: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub count: usize,
    /// `ceil(vol(ball) / covolume)`.
    pub target: usize,
    pub tries: usize,
    /// No translate reached the target; the best one found is returned.
    pub unmet: bool,
}

/// Searches uniform translates `u = G t`, `t ∈ [0, 1)^dim`, for one whose
/// shifted lattice has at least `vol(ball) / covolume` points in the ball.
pub fn carve<R: RngCore>(lat: &LatticeSpec, radius: f64, rng: &mut R, max_tries: usize) -> Result<CarveResult> {
    if max_tries == 0 {
        return Err(domain!("max_tries must be >= 1"));
    }
    let volume = unit_ball_volume(lat.dim) * libm::pow(radius, lat.dim as f64);
    let target = libm::ceil(volume / lat.covolume) as usize;
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let mut best: Option<CarveResult> = None;
    for attempt in 1..=max_tries {
        let t = nalgebra::DVector::from_fn(lat.dim, |_, _| unit.sample(rng));
        let translate: Vec<f64> = (&lat.generator * t).iter().copied().collect();
        let points = points_in_ball(lat, &translate, radius)?;
        let count = points.len();
        let result = CarveResult {
            translate,
            points,
            count,
            target,
            tries: attempt,
            unmet: count < target,
        };
        if !result.unmet {
            return Ok(result);
        }
        if best.as_ref().is_none_or(|b| count > b.count) {
            best = Some(result);
        }
    }
    let mut best = best.expect("at least one try");
    best.tries = max_tries;
    Ok(best)
}
