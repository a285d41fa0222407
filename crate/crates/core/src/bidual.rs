//! Numerical bi-dual face of a positive map.
//!
//! For positive `phi: M_m -> M_n`, the bi-dual face `phi''` is cut out of the
//! cone of positive maps by the rank-one `s = |ξ><η|` with
//! `<Ad_s, phi> = 0`. Writing `ζ = ξ ⊗ η̄`, that pairing is `<ζ|C_phi|ζ>`, so
//! the zero variety is the set of product vectors on which the block-positive
//! matrix `C_phi` vanishes.
//!
//! Every block-positive `C_psi` vanishing at such a `ζ = x ⊗ y` has `ζ` as a
//! minimizer over product vectors, so besides `<ζ|C_psi|ζ> = 0` it satisfies
//! the stationarity conditions `(I ⊗ <y|) C_psi |ζ> = 0` and
//! `(<x| ⊗ I) C_psi |ζ> = 0`. All of these are real-linear in the Hermitian
//! matrix `C_psi`; the solution space of the sampled system contains
//! `phi''`, and when it is one-dimensional it is the ray through `C_phi`,
//! which certifies that `phi` is exposed. A larger solution space is only
//! evidence: the face is its intersection with the positive cone.

use nalgebra::{DMatrix, DVector};

use crate::error::{PosmapError, Result};
use crate::linalg::{
    kernel_basis, kron_vec, null_space, CVector, ComplexMatrix, Tolerance, C64, ONE,
};
use crate::maps::MapRep;
use crate::random::{stream_rng, unit_vector, unitary};

/// Residual bound, relative to `max(1, |C_phi|)`, for accepting a sample.
pub const SAMPLE_RESIDUAL_TOL: f64 = 1e-9;
/// Bound, relative to `max(1, |C_psi|)`, for a constraint to count as met.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

const THETA_STEPS: usize = 16;

/// A rank-one `s = |ξ><η|` with `<Ad_s, phi> ≈ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroVarietySample {
    pub xi: CVector,
    pub eta: CVector,
    /// `|<Ad_s, phi>|` at acceptance.
    pub residual: f64,
}

impl ZeroVarietySample {
    pub fn new(xi: CVector, eta: CVector, phi: &MapRep) -> Self {
        let zeta = kron_vec(&xi, &eta.conjugate());
        let residual = zeta.dotc(&phi.choi().mul_vec(&zeta)).norm();
        ZeroVarietySample { xi, eta, residual }
    }

    /// `s = |ξ><η|`, an `m x n` matrix.
    pub fn s(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.xi, &self.eta)
    }

    /// `ζ = ξ ⊗ η̄`, the product vector at which `C_phi` vanishes.
    pub fn product_vector(&self) -> CVector {
        kron_vec(&self.xi, &self.eta.conjugate())
    }
}

fn acceptance_bound(phi: &MapRep) -> f64 {
    SAMPLE_RESIDUAL_TOL * phi.choi().norm().max(1.0)
}

fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

/// Structured members of the variety: matrix units `|i><k|` and the family
/// `[[1, e^{iθ}], [-e^{-iθ}, -1]]` placed on rows `i, j` and columns `k, l`,
/// at `θ = 2πt/16`. Only those actually in the variety are kept.
fn structured_samples(phi: &MapRep, bound: f64) -> Vec<ZeroVarietySample> {
    let (m, n) = phi.dims();
    let mut out = Vec::new();
    for i in 0..m {
        for k in 0..n {
            let sample = ZeroVarietySample::new(basis_vector(m, i), basis_vector(n, k), phi);
            if sample.residual <= bound {
                out.push(sample);
            }
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 0..n {
                for l in (k + 1)..n {
                    for t in 0..THETA_STEPS {
                        let theta = 2.0 * std::f64::consts::PI * t as f64 / THETA_STEPS as f64;
                        let phase = C64::from_polar(1.0, -theta);
                        let mut xi = CVector::zeros(m);
                        xi[i] = C64::new(h, 0.0);
                        xi[j] = -phase * h;
                        let mut eta = CVector::zeros(n);
                        eta[k] = C64::new(h, 0.0);
                        eta[l] = phase * h;
                        let sample = ZeroVarietySample::new(xi, eta, phi);
                        if sample.residual <= bound {
                            out.push(sample);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Samples from one random draw. Even draws work on the input side: for a
/// random unit `u`, every `y` in the kernel of `phi(|u><u|)` gives the zero
/// `ū ⊗ y`. Odd draws do the same through the adjoint: every `x` in the kernel
/// of `phi*(|v><v|)` gives the zero `x ⊗ v̄`. Kernel bases are rotated by a
/// random unitary so no preferred basis leaks into the constraints.
fn draw_samples(
    phi: &MapRep,
    adjoint: &MapRep,
    seed: u64,
    draw: u64,
    tol: &Tolerance,
    bound: f64,
) -> Vec<ZeroVarietySample> {
    let (m, n) = phi.dims();
    let mut rng = stream_rng(seed, draw);
    let input_side = draw.is_multiple_of(2);
    let (source, dim) = if input_side { (phi, m) } else { (adjoint, n) };
    let u = unit_vector(&mut rng, dim);
    let image = source
        .apply(&ComplexMatrix::outer(&u, &u))
        .expect("vector length matches the map");
    let kernel = kernel_basis(&image, tol);
    if kernel.is_empty() {
        return Vec::new();
    }
    let rotation = unitary(&mut rng, kernel.len());
    let mut out = Vec::with_capacity(kernel.len());
    for c in 0..kernel.len() {
        let mut w = CVector::zeros(kernel[0].len());
        for (r, k) in kernel.iter().enumerate() {
            w += k * rotation.get(r, c);
        }
        // ζ = x ⊗ y with s = |x><ȳ|
        let sample = if input_side {
            ZeroVarietySample::new(u.conjugate(), w.conjugate(), phi)
        } else {
            ZeroVarietySample::new(w, u.clone(), phi)
        };
        if sample.residual <= bound {
            out.push(sample);
        }
    }
    out
}

/// Up to `count` samples of the zero variety of a positive `phi`: structured
/// samples first (at most half of `count`), then random draws. An empty
/// result means no zero was found within the draw budget.
pub fn sample_zero_variety(
    phi: &MapRep,
    count: usize,
    seed: u64,
    tol: &Tolerance,
) -> Vec<ZeroVarietySample> {
    let bound = acceptance_bound(phi);
    let mut samples = structured_samples(phi, bound);
    samples.truncate(count / 2);
    let adjoint = phi.adjoint();
    let max_draws = 4 * count as u64 + 200;
    let mut random_found = 0usize;
    let mut draw = 0u64;
    while samples.len() < count && draw < max_draws {
        let batch = draw_samples(phi, &adjoint, seed, draw, tol, bound);
        random_found += batch.len();
        samples.extend(batch);
        draw += 1;
        if draw >= 200 && random_found == 0 {
            break;
        }
    }
    samples.truncate(count);
    samples
}

/// Number of real coordinates of an `side x side` Hermitian matrix.
pub fn hermitian_dim(side: usize) -> usize {
    side * side
}

/// Coordinates of the Hermitian part of `x` in the orthonormal basis
/// `E_pp`, `(E_pq + E_qp)/√2`, `i(E_pq - E_qp)/√2` (`p < q`).
pub fn hermitian_coords(x: &ComplexMatrix) -> DVector<f64> {
    let h = x.hermitian_part();
    let side = h.rows();
    let mut out = Vec::with_capacity(hermitian_dim(side));
    for p in 0..side {
        out.push(h.get(p, p).re);
    }
    let r2 = std::f64::consts::SQRT_2;
    for p in 0..side {
        for q in (p + 1)..side {
            out.push(r2 * h.get(p, q).re);
            out.push(r2 * h.get(p, q).im);
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`hermitian_coords`].
pub fn from_hermitian_coords(coords: &DVector<f64>, side: usize) -> ComplexMatrix {
    assert_eq!(coords.len(), hermitian_dim(side));
    let mut x = ComplexMatrix::zeros(side, side);
    for p in 0..side {
        x.set(p, p, C64::new(coords[p], 0.0));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = side;
    for p in 0..side {
        for q in (p + 1)..side {
            let z = C64::new(coords[idx] * h, coords[idx + 1] * h);
            x.set(p, q, z);
            x.set(q, p, z.conj());
            idx += 2;
        }
    }
    x
}

/// Real and imaginary parts of the functional `X -> <w|X|v>` on Hermitian
/// coordinates.
fn functional_rows(w: &CVector, v: &CVector) -> (Vec<f64>, Vec<f64>) {
    let side = w.len();
    let dim = hermitian_dim(side);
    let mut coeffs: Vec<C64> = Vec::with_capacity(dim);
    for p in 0..side {
        coeffs.push(w[p].conj() * v[p]);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = C64::new(0.0, 1.0);
    for p in 0..side {
        for q in (p + 1)..side {
            let c1 = w[p].conj() * v[q];
            let c2 = w[q].conj() * v[p];
            coeffs.push((c1 + c2) * h);
            coeffs.push(i * (c1 - c2) * h);
        }
    }
    (
        coeffs.iter().map(|z| z.re).collect(),
        coeffs.iter().map(|z| z.im).collect(),
    )
}

/// The real linear system whose solution space contains the bi-dual face.
#[derive(Debug, Clone)]
pub struct FaceConstraintSystem {
    pub map_dims: (usize, usize),
    /// One row per real functional, over the Hermitian coordinates of
    /// `M_m ⊗ M_n`.
    pub constraints: DMatrix<f64>,
    pub sample_count: usize,
}

impl FaceConstraintSystem {
    /// Rows contributed by each sample: the pairing value, then real and
    /// imaginary parts of the `m` first-factor and `n` second-factor
    /// stationarity conditions.
    pub fn rows_per_sample(&self) -> usize {
        let (m, n) = self.map_dims;
        1 + 2 * m + 2 * n
    }

    /// Value of every constraint on the Hermitian part of `x`.
    pub fn evaluate(&self, x: &ComplexMatrix) -> Result<Vec<f64>> {
        let side = self.map_dims.0 * self.map_dims.1;
        if x.shape() != (side, side) {
            return Err(PosmapError::shapes((side, side), x.shape()));
        }
        let coords = hermitian_coords(x);
        Ok((&self.constraints * coords).iter().copied().collect())
    }

    /// Numerical solution space at `rank_tol`, as Hermitian matrices of unit
    /// Frobenius norm.
    pub fn solve(&self, tol: &Tolerance) -> FaceSolution {
        let side = self.map_dims.0 * self.map_dims.1;
        let (_, null) = null_space(&self.constraints, tol.rank_tol);
        FaceSolution {
            dimension: null.len(),
            basis: null
                .iter()
                .map(|v| from_hermitian_coords(v, side))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FaceSolution {
    pub dimension: usize,
    pub basis: Vec<ComplexMatrix>,
}

impl FaceSolution {
    /// Distance from the unit vector along `x` to the solution space, in
    /// Hermitian coordinates (the sine of the angle between them).
    pub fn distance_to(&self, x: &ComplexMatrix) -> f64 {
        let target = hermitian_coords(x);
        let norm = target.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let target = target / norm;
        let mut residual = target.clone();
        for b in &self.basis {
            let bc = hermitian_coords(b);
            residual -= &bc * bc.dot(&target);
        }
        residual.norm()
    }
}

/// Assembles the constraint rows of `samples` for maps `M_m -> M_n`.
pub fn build_constraints(
    samples: &[ZeroVarietySample],
    dims: (usize, usize),
) -> Result<FaceConstraintSystem> {
    let (m, n) = dims;
    if samples.is_empty() {
        return Err(PosmapError::Argument("no zero-variety samples".into()));
    }
    let side = m * n;
    let cols = hermitian_dim(side);
    let per = 1 + 2 * m + 2 * n;
    let mut constraints = DMatrix::<f64>::zeros(samples.len() * per, cols);
    for (s_idx, sample) in samples.iter().enumerate() {
        if sample.xi.len() != m || sample.eta.len() != n {
            return Err(PosmapError::Dimension {
                expected: format!("samples in C^{m} x C^{n}"),
                found: format!("C^{} x C^{}", sample.xi.len(), sample.eta.len()),
            });
        }
        let x = &sample.xi;
        let y = sample.eta.conjugate();
        let zeta = kron_vec(x, &y);
        let mut rows = Vec::with_capacity(per);
        rows.push(functional_rows(&zeta, &zeta).0);
        for j in 0..m {
            let (re, im) = functional_rows(&kron_vec(&basis_vector(m, j), &y), &zeta);
            rows.push(re);
            rows.push(im);
        }
        for k in 0..n {
            let (re, im) = functional_rows(&kron_vec(x, &basis_vector(n, k)), &zeta);
            rows.push(re);
            rows.push(im);
        }
        for (r, row) in rows.into_iter().enumerate() {
            for (c, value) in row.into_iter().enumerate() {
                constraints[(s_idx * per + r, c)] = value;
            }
        }
    }
    Ok(FaceConstraintSystem {
        map_dims: dims,
        constraints,
        sample_count: samples.len(),
    })
}

/// Default sample budget `4 (mn)^2`.
pub fn default_budget(m: usize, n: usize) -> usize {
    4 * (m * n) * (m * n)
}

/// Outcome of a bi-dual probe.
#[derive(Debug, Clone)]
pub struct BidualResult {
    pub dimension: usize,
    pub basis: Vec<ComplexMatrix>,
    pub sample_count: usize,
    pub budget: usize,
    /// No zero of `C_phi` was found; the dimension is that of the whole
    /// Hermitian space.
    pub empty_variety: bool,
}

impl BidualResult {
    /// Dimension one pins the face to the ray through `C_phi`.
    pub fn certifies_exposed(&self) -> bool {
        self.dimension == 1
    }
}

/// Dimension of the sampled bi-dual solution space of a positive `phi`.
pub fn bidual_dimension(
    phi: &MapRep,
    budget: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<BidualResult> {
    let (m, n) = phi.dims();
    let side = m * n;
    let samples = sample_zero_variety(phi, budget, seed, tol);
    if samples.is_empty() {
        let dim = hermitian_dim(side);
        let basis = (0..dim)
            .map(|k| {
                let mut e = DVector::<f64>::zeros(dim);
                e[k] = 1.0;
                from_hermitian_coords(&e, side)
            })
            .collect();
        return Ok(BidualResult {
            dimension: dim,
            basis,
            sample_count: 0,
            budget,
            empty_variety: true,
        });
    }
    let system = build_constraints(&samples, (m, n))?;
    let solution = system.solve(tol);
    Ok(BidualResult {
        dimension: solution.dimension,
        basis: solution.basis,
        sample_count: samples.len(),
        budget,
        empty_variety: false,
    })
}

/// The probe at `budget` and at `2 * budget`.
#[derive(Debug, Clone)]
pub struct StableBidual {
    pub at_budget: BidualResult,
    pub at_double: BidualResult,
}

impl StableBidual {
    pub fn stable(&self) -> bool {
        self.at_budget.dimension == self.at_double.dimension
    }

    pub fn dimension(&self) -> usize {
        self.at_double.dimension
    }
}

pub fn stable_bidual_dimension(
    phi: &MapRep,
    budget: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<StableBidual> {
    Ok(StableBidual {
        at_budget: bidual_dimension(phi, budget, seed, tol)?,
        at_double: bidual_dimension(phi, 2 * budget, seed, tol)?,
    })
}

/// Whether `psi` satisfies every sampled constraint, i.e. lies in the
/// sampled bi-dual of the map the system was built from.
pub fn bidual_membership(psi: &MapRep, system: &FaceConstraintSystem) -> Result<bool> {
    if psi.dims() != system.map_dims {
        return Err(PosmapError::shapes(system.map_dims, psi.dims()));
    }
    let bound = MEMBERSHIP_TOL * psi.choi().norm().max(1.0);
    Ok(system
        .evaluate(psi.choi())?
        .iter()
        .all(|v| v.abs() <= bound))
}

/// Sample for `s = [[1, e^{iθ}], [-e^{-iθ}, -1]] = (1, -e^{-iθ})ᵀ (1, e^{iθ})`,
/// unnormalized.
pub fn theta_sample(theta: f64, phi: &MapRep) -> ZeroVarietySample {
    let phase = C64::from_polar(1.0, -theta);
    let xi = CVector::from_vec(vec![ONE, -phase]);
    let eta = CVector::from_vec(vec![ONE, phase]);
    ZeroVarietySample::new(xi, eta, phi)
}
