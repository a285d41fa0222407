//! Seeded random sources. Every randomized routine derives one independent
//! ChaCha stream per unit of work from a master seed, so results do not
//! depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CVector, ComplexMatrix, C64};

/// Independent generator for work item `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform on the complex unit sphere of `C^dim`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / C64::new(norm, 0.0);
        }
    }
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Gaussian matrix of prescribed rank (almost surely), built as a product of
/// `rows x rank` and `rank x cols` Gaussian factors.
pub fn matrix_of_rank<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    rank: usize,
) -> ComplexMatrix {
    let left = gaussian_matrix(rng, rows, rank);
    let right = gaussian_matrix(rng, rank, cols);
    &left * &right
}

/// Haar-ish random unitary from the QR factorization of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n).into_inner();
    ComplexMatrix::from(g.qr().q())
}

/// Complex number with real and imaginary parts uniform in `[-1, 1]`.
pub fn uniform_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}
