//! Linear maps `M_m -> M_n` stored by their Choi matrices.
//!
//! The Choi matrix of `phi` is `sum_{i,j} |i><j| ⊗ phi(|i><j|)`; the `(k,l)`
//! entry of its `(i,j)` block is the `(k,l)` entry of `phi(|i><j|)`. Every
//! other view of a map (its action, adjoint, compositions) is computed from
//! that matrix.

use crate::error::{PosmapError, Result};
use crate::linalg::{
    complete_orthonormal, flip, kron, pairing, CVector, ComplexMatrix, Tolerance, C64, ONE, ZERO,
};

/// A linear map between full matrix algebras, `M_m -> M_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapRep {
    m: usize,
    n: usize,
    choi: ComplexMatrix,
}

impl MapRep {
    /// Wraps a Choi matrix in `M_m ⊗ M_n` as the map it represents.
    pub fn from_choi(m: usize, n: usize, choi: ComplexMatrix) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(PosmapError::Argument(
                "map dimensions must be positive".into(),
            ));
        }
        if choi.shape() != (m * n, m * n) {
            return Err(PosmapError::shapes((m * n, m * n), choi.shape()));
        }
        Ok(MapRep { m, n, choi })
    }

    /// Choi matrix of the linear map `f: M_m -> M_n`, evaluated on the `m^2`
    /// matrix units.
    pub fn choi_of<F>(m: usize, n: usize, f: F) -> Result<Self>
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        if m == 0 || n == 0 {
            return Err(PosmapError::Argument(
                "map dimensions must be positive".into(),
            ));
        }
        let mut choi = ComplexMatrix::zeros(m * n, m * n);
        for i in 0..m {
            for j in 0..m {
                let image = f(&ComplexMatrix::unit(m, m, i, j));
                if image.shape() != (n, n) {
                    return Err(PosmapError::shapes((n, n), image.shape()));
                }
                for k in 0..n {
                    for l in 0..n {
                        choi.set(i * n + k, j * n + l, image.get(k, l));
                    }
                }
            }
        }
        Ok(MapRep { m, n, choi })
    }

    pub fn identity(r: usize) -> Self {
        Self::choi_of(r, r, |a| a.clone()).expect("identity map is well formed")
    }

    pub fn transpose(r: usize) -> Self {
        Self::choi_of(r, r, |a| a.transpose()).expect("transpose map is well formed")
    }

    pub fn zero(m: usize, n: usize) -> Self {
        MapRep {
            m,
            n,
            choi: ComplexMatrix::zeros(m * n, m * n),
        }
    }

    /// `Ad_s : x -> s* x s` for an `m x n` matrix `s`, mapping `M_m -> M_n`.
    ///
    /// The Choi matrix is `sum_{ij} |i><j| ⊗ s*|i><j|s`; for `s = |ξ><η|` it
    /// is the rank-one projection onto `ξ̄ ⊗ η`.
    pub fn ad(s: &ComplexMatrix) -> Self {
        let (m, n) = s.shape();
        let choi = ComplexMatrix::from_fn(m * n, m * n, |row, col| {
            let (i, k) = (row / n, row % n);
            let (j, l) = (col / n, col % n);
            s.get(i, k).conj() * s.get(j, l)
        });
        MapRep { m, n, choi }
    }

    /// `Ad_s ∘ t`, the transpose on `M_m` followed by `Ad_s`.
    pub fn ad_transpose(s: &ComplexMatrix) -> Self {
        compose(&Self::ad(s), &Self::transpose(s.rows())).expect("dimensions agree by construction")
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn output_dim(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn into_choi(self) -> ComplexMatrix {
        self.choi
    }

    /// `phi(|i><j|)` for 0-based `i, j`: the `(i, j)` block of the Choi matrix.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, n, |k, l| self.choi.get(i * n + k, j * n + l))
    }

    /// `phi(a)`: entry `(k,l)` is `<a ⊗ |k><l|, C_phi>`.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.shape() != (self.m, self.m) {
            return Err(PosmapError::shapes((self.m, self.m), a.shape()));
        }
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..self.m {
            for j in 0..self.m {
                let a_ij = a.get(i, j);
                if a_ij == ZERO {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        let v = out.get(k, l) + a_ij * self.choi.get(i * n + k, j * n + l);
                        out.set(k, l, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// The adjoint `phi*: M_n -> M_m` with respect to the bilinear pairing;
    /// its Choi matrix is the flip of `C_phi`.
    pub fn adjoint(&self) -> MapRep {
        MapRep {
            m: self.n,
            n: self.m,
            choi: flip(&self.choi, self.m, self.n).expect("choi shape is an invariant"),
        }
    }

    pub fn scale(&self, c: f64) -> MapRep {
        MapRep {
            m: self.m,
            n: self.n,
            choi: self.choi.scale_real(c),
        }
    }

    pub fn add(&self, other: &MapRep) -> Result<MapRep> {
        if self.dims() != other.dims() {
            return Err(PosmapError::shapes(self.dims(), other.dims()));
        }
        Ok(MapRep {
            m: self.m,
            n: self.n,
            choi: &self.choi + &other.choi,
        })
    }

    /// Hermiticity-preserving maps are exactly those with Hermitian Choi
    /// matrix.
    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        self.choi.is_hermitian(tol)
    }
}

/// `phi2 ∘ phi1`.
pub fn compose(phi2: &MapRep, phi1: &MapRep) -> Result<MapRep> {
    if phi1.n != phi2.m {
        return Err(PosmapError::Dimension {
            expected: format!("inner dimension {} on the outer map", phi1.n),
            found: format!("{}", phi2.m),
        });
    }
    MapRep::choi_of(phi1.m, phi2.n, |a| {
        let mid = phi1.apply(a).expect("shape checked by choi_of");
        phi2.apply(&mid).expect("inner dimensions checked above")
    })
}

/// `λ_{i,j}: M_2 -> M_r`, placing a 2x2 matrix on rows and columns `i, j`
/// (1-based) of an `r x r` matrix.
pub fn lambda_embed(i: usize, j: usize, r: usize) -> Result<MapRep> {
    if i == j {
        return Err(PosmapError::Argument(format!(
            "λ needs i ≠ j, got i = j = {i}"
        )));
    }
    if i == 0 || j == 0 || i > r || j > r {
        return Err(PosmapError::Index {
            index: format!("({i}, {j})"),
            context: format!("M_{r}"),
        });
    }
    let slots = [i - 1, j - 1];
    MapRep::choi_of(2, r, |a| {
        let mut out = ComplexMatrix::zeros(r, r);
        for p in 0..2 {
            for q in 0..2 {
                out.set(slots[p], slots[q], a.get(p, q));
            }
        }
        out
    })
}

/// `(λ_{k,l})*: M_r -> M_2`, extracting the `{k, l}` principal 2x2 block.
pub fn lambda_compress(k: usize, l: usize, r: usize) -> Result<MapRep> {
    Ok(lambda_embed(k, l, r)?.adjoint())
}

/// The corner embedding `S: M_r -> M_n` and compression `T: M_n -> M_r`.
pub fn st_maps(r: usize, n: usize) -> Result<(MapRep, MapRep)> {
    if r == 0 || r > n {
        return Err(PosmapError::Argument(format!(
            "corner maps need 1 <= r <= n, got r = {r}, n = {n}"
        )));
    }
    let s = MapRep::choi_of(r, n, |a| {
        ComplexMatrix::from_fn(n, n, |k, l| if k < r && l < r { a.get(k, l) } else { ZERO })
    })?;
    let t = MapRep::choi_of(n, r, |a| ComplexMatrix::from_fn(r, r, |k, l| a.get(k, l)))?;
    Ok((s, t))
}

/// `σ = sum_{i<=r} |i><i|` in `M_{m x n}`.
pub fn partial_identity(m: usize, n: usize, r: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, n, |i, j| if i == j && i < r { ONE } else { ZERO })
}

/// Factorization `s = u σ v*` with `u`, `v` nonsingular and `σ` a partial
/// identity of the numerical rank.
#[derive(Debug, Clone)]
pub struct SvdReduction {
    pub u: ComplexMatrix,
    pub sigma: ComplexMatrix,
    pub v: ComplexMatrix,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

impl SvdReduction {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &(&self.u * &self.sigma) * &self.v.adjoint()
    }
}

/// Singular value reduction of a nonzero `m x n` matrix. The nonzero singular
/// values are absorbed into the first `r` columns of `u`; `v` is unitary.
pub fn svd_reduce(s: &ComplexMatrix, tol: &Tolerance) -> Result<SvdReduction> {
    let (m, n) = s.shape();
    let svd = s.as_matrix().clone().svd(true, true);
    let u_thin = svd.u.expect("left vectors requested");
    let v_t = svd.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(PosmapError::Degenerate(
            "cannot reduce the zero matrix".into(),
        ));
    }
    let rank = values.iter().filter(|&&x| x > tol.rank_tol * smax).count();

    let left: Vec<CVector> = order[..rank]
        .iter()
        .map(|&k| u_thin.column(k).into_owned())
        .collect();
    let right: Vec<CVector> = order[..rank]
        .iter()
        .map(|&k| v_t.row(k).adjoint())
        .collect();
    let left = complete_orthonormal(&left, m);
    let right = complete_orthonormal(&right, n);

    let u = ComplexMatrix::from_fn(m, m, |i, c| {
        let scale = if c < rank { values[c] } else { 1.0 };
        left[c][i] * scale
    });
    let v = ComplexMatrix::from_fn(n, n, |i, c| right[c][i]);
    Ok(SvdReduction {
        u,
        sigma: partial_identity(m, n, rank),
        v,
        rank,
        singular_values: values,
    })
}

/// `<psi, phi> = <C_psi, C_phi>`.
pub fn pairing_maps(psi: &MapRep, phi: &MapRep) -> Result<C64> {
    if psi.dims() != phi.dims() {
        return Err(PosmapError::shapes(psi.dims(), phi.dims()));
    }
    pairing(&psi.choi, &phi.choi)
}

/// `<rho, phi> = <rho, C_phi>` for `rho` in `M_m ⊗ M_n`.
pub fn pairing_state_map(rho: &ComplexMatrix, phi: &MapRep) -> Result<C64> {
    pairing(rho, &phi.choi)
}

/// `<a ⊗ b, C_phi>`; equals `<b, phi(a)>`.
pub fn pairing_product(a: &ComplexMatrix, b: &ComplexMatrix, phi: &MapRep) -> Result<C64> {
    pairing(&kron(a, b), &phi.choi)
}
