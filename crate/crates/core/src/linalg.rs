//! Small dense linear-algebra helpers shared by the channel, scheme and
//! lattice modules.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Real embedding of a complex matrix: entry `(i, j)` becomes the 2×2 block
/// `[[re, -im], [im, re]]` at rows `2i..2i+2`, columns `2j..2j+2`. Complex
/// vectors embed as interleaved `(re, im)` pairs.
pub fn real_embedding(c: &CMatrix) -> RMatrix {
    let mut out = RMatrix::zeros(2 * c.nrows(), 2 * c.ncols());
    for j in 0..c.ncols() {
        for i in 0..c.nrows() {
            let z = c[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

/// Interleaved `(re, im)` coordinates of a complex vector.
pub fn real_vector(v: &[Complex64]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Singular values in ascending order.
pub fn singular_values_ascending(c: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = c.clone().singular_values().iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// `max |(U^H U - I)_{ij}|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let gram = u.adjoint() * u;
    let mut worst = 0.0f64;
    for j in 0..gram.ncols() {
        for i in 0..gram.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Haar-distributed unitary matrix (QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal folded back into `Q`).
pub fn random_unitary<R: RngCore>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Unitary DFT matrix of size `n`.
pub fn dft_matrix(n: usize) -> CMatrix {
    let scale = 1.0 / libm::sqrt(n as f64);
    CMatrix::from_fn(n, n, |i, j| {
        let angle = -2.0 * core::f64::consts::PI * (i * j) as f64 / n as f64;
        Complex64::new(libm::cos(angle) * scale, libm::sin(angle) * scale)
    })
}

/// Block-diagonal matrix with `copies` copies of `block`.
pub fn block_diagonal(block: &CMatrix, copies: usize) -> CMatrix {
    let (r, c) = block.shape();
    let mut out = CMatrix::zeros(r * copies, c * copies);
    for t in 0..copies {
        out.view_mut((t * r, t * c), (r, c)).copy_from(block);
    }
    out
}

/// `ln det(C^H C)` from the singular values; `-inf` when rank deficient.
pub fn ln_det_gram(c: &CMatrix) -> f64 {
    singular_values_ascending(c).iter().map(|s| 2.0 * libm::log(*s)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn embedding_preserves_products() {
        let a = CMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64 + 0.5, j as f64 - 1.0));
        let x = [Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.7)];
        let y = &a * nalgebra::DVector::from_column_slice(&x);
        let yr = real_embedding(&a) * nalgebra::DVector::from_vec(real_vector(&x));
        let expected = real_vector(y.as_slice());
        for (u, v) in yr.iter().zip(&expected) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = stream_rng(1, Stream::Test, 0, 0);
        for dim in [1, 2, 5, 12] {
            assert!(unitarity_defect(&random_unitary(dim, &mut rng)) < 1e-12);
        }
        assert!(unitarity_defect(&dft_matrix(12)) < 1e-12);
    }
}
