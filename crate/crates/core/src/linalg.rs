//! Dense complex matrices, the bilinear trace pairing and the numerical
//! rank / kernel / eigenvalue routines the rest of the crate is built on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{PosmapError, Result};

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical thresholds shared by every rank, kernel and membership decision.
///
/// Singular values below `rank_tol * sigma_max` count as zero; `entry_tol` is
/// used for entrywise comparisons and for cone-boundary slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rank_tol: f64,
    pub entry_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_tol: 1e-9,
            entry_tol: 1e-9,
        }
    }
}

/// A 1-based pair `(i, k)` addressing row `k` of block `i` in a block matrix
/// `M_m(M_n)`. Pairs are flattened lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexPair {
    pub i: usize,
    pub k: usize,
}

impl IndexPair {
    pub fn new(i: usize, k: usize) -> Self {
        IndexPair { i, k }
    }

    /// 0-based flat index `(i-1)*block_size + (k-1)`.
    pub fn flat(&self, block_size: usize) -> usize {
        (self.i - 1) * block_size + (self.k - 1)
    }

    /// All pairs of an `m x n` block layout, in lexicographic order.
    pub fn all(m: usize, n: usize) -> Vec<IndexPair> {
        (1..=m)
            .flat_map(|i| (1..=n).map(move |k| IndexPair::new(i, k)))
            .collect()
    }
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(PosmapError::Argument(format!(
                "matrix must have positive shape, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(PosmapError::Dimension {
                expected: format!("{} entries for {rows}x{cols}", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(rows, cols, &data)))
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Builds a matrix from complex rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    /// Matrix unit `|i><j|` of shape `rows x cols` (0-based indices).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(rows, cols);
        m[(i, j)] = ONE;
        ComplexMatrix(m)
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|u><v|`.
    pub fn outer(u: &CVector, v: &CVector) -> Self {
        ComplexMatrix(u * v.adjoint())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Entry at 0-based position.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Plain transpose, no conjugation.
    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix(self.0.map(|z| z.conj()))
    }

    /// Conjugate transpose `a*`.
    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn try_mul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(PosmapError::Dimension {
                expected: format!("{} rows on the right factor", self.cols()),
                found: format!("{}x{}", other.rows(), other.cols()),
            });
        }
        Ok(ComplexMatrix(&self.0 * &other.0))
    }

    pub fn scale(&self, c: C64) -> Self {
        ComplexMatrix(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in comparison");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.shape() == other.shape() && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// `(a + a*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }
}

impl From<DMatrix<C64>> for ComplexMatrix {
    fn from(m: DMatrix<C64>) -> Self {
        ComplexMatrix(m)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list()
            .entries(
                (0..self.rows())
                    .map(|i| (0..self.cols()).map(|j| self.0[(i, j)]).collect::<Vec<_>>()),
            )
            .finish()
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Bilinear pairing `<a, b> = Tr(a b^T)`: the sum of entrywise products,
/// with no complex conjugation anywhere.
pub fn pairing(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(PosmapError::shapes(a.shape(), b.shape()));
    }
    Ok(a.0.iter().zip(b.0.iter()).map(|(x, y)| x * y).sum())
}

/// Kronecker product; block `(i, j)` of the result is `a_ij * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

pub fn kron_vec(u: &CVector, v: &CVector) -> CVector {
    u.kronecker(v)
}

/// The principal submatrix of `rho` on the rows and columns named by `pairs`,
/// taken in the given order.
pub fn principal_submatrix(
    rho: &ComplexMatrix,
    pairs: &[IndexPair],
    block_size: usize,
) -> Result<ComplexMatrix> {
    if !rho.is_square() {
        return Err(PosmapError::shapes((rho.rows(), rho.rows()), rho.shape()));
    }
    if block_size == 0 || !rho.rows().is_multiple_of(block_size) {
        return Err(PosmapError::Argument(format!(
            "side {} is not divisible by block size {block_size}",
            rho.rows()
        )));
    }
    let blocks = rho.rows() / block_size;
    let mut flat = Vec::with_capacity(pairs.len());
    for p in pairs {
        if p.i == 0 || p.k == 0 || p.i > blocks || p.k > block_size {
            return Err(PosmapError::Index {
                index: format!("({}, {})", p.i, p.k),
                context: format!("{blocks} blocks of size {block_size}"),
            });
        }
        flat.push(p.flat(block_size));
    }
    let n = flat.len();
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        rho.get(flat[a], flat[b])
    }))
}

/// Swaps the tensor factors of `rho` in `M_m ⊗ M_n`, giving an element of
/// `M_n ⊗ M_m`: entry `((i,k),(j,l))` moves to `((k,i),(l,j))`.
pub fn flip(rho: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    let side = m * n;
    if rho.shape() != (side, side) {
        return Err(PosmapError::shapes((side, side), rho.shape()));
    }
    Ok(ComplexMatrix::from_fn(side, side, |row, col| {
        let (k, i) = (row / m, row % m);
        let (l, j) = (col / m, col % m);
        rho.get(i * n + k, j * n + l)
    }))
}

/// Transpose on the second tensor factor of `rho` in `M_m ⊗ M_n`.
pub fn partial_transpose(rho: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    let side = m * n;
    if rho.shape() != (side, side) {
        return Err(PosmapError::shapes((side, side), rho.shape()));
    }
    Ok(ComplexMatrix::from_fn(side, side, |row, col| {
        let (i, k) = (row / n, row % n);
        let (j, l) = (col / n, col % n);
        rho.get(i * n + l, j * n + k)
    }))
}

/// Singular values in descending order together with the matching right
/// singular vectors (columns of `V`). Rows are padded with zeros when the
/// matrix is wide so that a full set of right vectors is always returned;
/// very tall inputs are first reduced to their `R` factor.
fn right_singular_system<T>(a: &DMatrix<T>) -> (Vec<f64>, Vec<DVector<T>>)
where
    T: ComplexField<RealField = f64>,
{
    let (rows, cols) = a.shape();
    let work = if rows < cols {
        let mut padded = DMatrix::<T>::zeros(cols, cols);
        padded.rows_mut(0, rows).copy_from(a);
        padded
    } else if rows > 2 * cols {
        a.clone().qr().r()
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let vectors = order.iter().map(|&k| v_t.row(k).adjoint()).collect();
    (values, vectors)
}

/// Numerical rank and an orthonormal basis of the right null space, using
/// the relative threshold `rank_tol * sigma_max`.
pub fn null_space<T>(a: &DMatrix<T>, rank_tol: f64) -> (usize, Vec<DVector<T>>)
where
    T: ComplexField<RealField = f64>,
{
    let (values, vectors) = right_singular_system(a);
    let smax = values.first().copied().unwrap_or(0.0);
    let rank = if smax > 0.0 {
        values.iter().filter(|&&s| s > rank_tol * smax).count()
    } else {
        0
    };
    (rank, vectors.into_iter().skip(rank).collect())
}

/// Orthonormal basis of the column space of `a` at relative threshold
/// `rank_tol`.
pub fn column_space<T>(a: &DMatrix<T>, rank_tol: f64) -> Vec<DVector<T>>
where
    T: ComplexField<RealField = f64>,
{
    if a.ncols() == 0 {
        return Vec::new();
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > rank_tol * smax)
        .map(|k| u.column(k).into_owned())
        .collect()
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.0.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn numerical_rank(a: &ComplexMatrix, tol: &Tolerance) -> usize {
    null_space(&a.0, tol.rank_tol).0
}

/// Orthonormal basis of the numerical right kernel of `a`.
pub fn kernel_basis(a: &ComplexMatrix, tol: &Tolerance) -> Vec<CVector> {
    null_space(&a.0, tol.rank_tol).1
}

/// Eigenvalues (ascending) and unit eigenvectors of the Hermitian part of `a`.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<(Vec<f64>, Vec<CVector>)> {
    if !a.is_square() {
        return Err(PosmapError::shapes((a.rows(), a.rows()), a.shape()));
    }
    let eig = SymmetricEigen::new(a.hermitian_part().0);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).into_owned())
        .collect();
    Ok((values, vectors))
}

/// Smallest eigenvalue of the Hermitian part of `a` and a unit eigenvector.
pub fn eig_hermitian_min(a: &ComplexMatrix) -> Result<(f64, CVector)> {
    let (values, mut vectors) = eig_hermitian(a)?;
    Ok((values[0], vectors.swap_remove(0)))
}

/// Extends an orthonormal family to an orthonormal basis of `C^dim` by
/// Gram-Schmidt against the standard basis.
pub fn complete_orthonormal(vectors: &[CVector], dim: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = vectors.to_vec();
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[e] = ONE;
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    basis
}

/// Hermitian inner product `<u|v>`.
pub fn inner(u: &CVector, v: &CVector) -> C64 {
    u.dotc(v)
}
