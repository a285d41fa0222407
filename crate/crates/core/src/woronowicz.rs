//! Woronowicz's kernel criterion.
//!
//! For `phi: M_m -> M_n` the hat map `phî: M_m ⊗ C^n -> C^n` sends
//! `a ⊗ η` to `phi(a) η`, and `N_phi` is spanned by the `a ⊗ η` with `a`
//! positive semidefinite and `phi(a) η = 0`. Always `N_phi ⊂ ker phî`; a unital
//! irreducible positive map with `ker phî = N_phi` is exposed.
//!
//! Vectors of `M_m ⊗ C^n` are stored in the basis `E_ij ⊗ e_k` at flat index
//! `(i m + j) n + k`, so `|ξ><ξ| ⊗ η` is the Kronecker product
//! `ξ ⊗ ξ̄ ⊗ η`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{PosmapError, Result};
use crate::linalg::{
    column_space, kernel_basis, kron_vec, null_space, CVector, ComplexMatrix, Tolerance, C64, ONE,
};
use crate::maps::MapRep;
use crate::random::{stream_rng, uniform_complex, unit_vector};

/// Bound on `|phî v|` for a vector to count as a kernel vector.
pub const KERNEL_TOL: f64 = 1e-8;

/// Matrix of `phî` in the basis `E_ij ⊗ e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatMap {
    pub matrix: ComplexMatrix,
    pub dims: (usize, usize),
}

impl HatMap {
    pub fn kernel(&self, tol: &Tolerance) -> Vec<CVector> {
        kernel_basis(&self.matrix, tol)
    }

    pub fn kernel_dim(&self, tol: &Tolerance) -> usize {
        self.kernel(tol).len()
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.matrix.cols() {
            return Err(PosmapError::shapes((self.matrix.cols(), 1), (v.len(), 1)));
        }
        Ok(self.matrix.mul_vec(v))
    }
}

pub fn hat_matrix(phi: &MapRep) -> HatMap {
    let (m, n) = phi.dims();
    let mut matrix = ComplexMatrix::zeros(n, m * m * n);
    for i in 0..m {
        for j in 0..m {
            let image = phi.block(i, j);
            for k in 0..n {
                let col = (i * m + j) * n + k;
                for row in 0..n {
                    matrix.set(row, col, image.get(row, k));
                }
            }
        }
    }
    HatMap {
        matrix,
        dims: (m, n),
    }
}

/// Sampled orthonormal basis of `N_phi`.
#[derive(Debug, Clone)]
pub struct NPhiBasis {
    pub basis: Vec<CVector>,
    pub draws: usize,
    /// The dimension stopped growing before the draw cap was reached.
    pub stabilized: bool,
}

impl NPhiBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Default draw cap `100 m^2 n`.
pub fn default_draw_cap(m: usize, n: usize) -> usize {
    100 * m * m * n
}

fn draw_n_vectors(
    phi: &MapRep,
    adjoint: &MapRep,
    seed: u64,
    draw: u64,
    tol: &Tolerance,
) -> Vec<CVector> {
    let (m, n) = phi.dims();
    let mut rng = stream_rng(seed, draw);
    let xis = if draw.is_multiple_of(2) {
        vec![unit_vector(&mut rng, m)]
    } else {
        // <η|phi(|ξ><ξ|)|η> = <ξ̄|phi*(|η̄><η̄|)|ξ̄>, so kernel vectors of the
        // adjoint image give the ξ for which η is a kernel vector
        let eta = unit_vector(&mut rng, n).conjugate();
        let image = adjoint
            .apply(&ComplexMatrix::outer(&eta, &eta))
            .expect("vector length matches the map");
        let kernel = kernel_basis(&image, tol);
        if kernel.is_empty() {
            return Vec::new();
        }
        let mut x = CVector::zeros(m);
        for k in &kernel {
            x += k * crate::random::gaussian_complex(&mut rng);
        }
        let norm = x.norm();
        vec![(x / C64::new(norm, 0.0)).conjugate()]
    };
    let mut out = Vec::new();
    for xi in xis {
        let a = ComplexMatrix::outer(&xi, &xi);
        let image = phi.apply(&a).expect("vector length matches the map");
        let head = kron_vec(&xi, &xi.conjugate());
        out.extend(
            kernel_basis(&image, tol)
                .iter()
                .map(|eta| kron_vec(&head, eta)),
        );
    }
    out
}

/// Samples `N_phi` of a positive `phi` from rank-one `a = |ξ><ξ|`, which
/// suffice: if `a = Σ λ_i |ξ_i><ξ_i|` is positive and `phi(a) η = 0`, every
/// term `phi(|ξ_i><ξ_i|) η` vanishes by positivity. Even draws take a random
/// `ξ`; odd draws take a random `η` and a `ξ` it annihilates, which reaches
/// the pairs a generic `ξ` misses. Draws stop once the
/// dimension has not grown for `10 m` consecutive draws, or at `draw_cap`.
pub fn n_phi_basis(phi: &MapRep, draw_cap: usize, seed: u64, tol: &Tolerance) -> NPhiBasis {
    let (m, n) = phi.dims();
    let ambient = m * m * n;
    let patience = 10 * m;
    let mut ortho: Vec<CVector> = Vec::new();
    let mut accepted: Vec<CVector> = Vec::new();
    let mut quiet = 0usize;
    let mut draws = 0usize;
    let mut stabilized = false;
    let adjoint = phi.adjoint();
    'outer: while draws < draw_cap {
        let batch_len = patience.min(draw_cap - draws);
        let start = draws as u64;
        let batch: Vec<Vec<CVector>> = (0..batch_len as u64)
            .into_par_iter()
            .map(|d| draw_n_vectors(phi, &adjoint, seed, start + d, tol))
            .collect();
        for vectors in batch {
            draws += 1;
            let mut grew = false;
            for v in vectors {
                let mut w = v.clone();
                for _ in 0..2 {
                    for b in &ortho {
                        let c = b.dotc(&w);
                        w -= b * c;
                    }
                }
                let norm = w.norm();
                if norm > 1e-6 * v.norm() {
                    ortho.push(w / C64::new(norm, 0.0));
                    accepted.push(v);
                    grew = true;
                }
            }
            if grew {
                quiet = 0;
            } else {
                quiet += 1;
            }
            if ortho.len() == ambient || quiet >= patience {
                stabilized = true;
                break 'outer;
            }
        }
    }
    let basis = if accepted.is_empty() {
        Vec::new()
    } else {
        column_space(&DMatrix::from_columns(&accepted), tol.rank_tol)
    };
    NPhiBasis {
        basis,
        draws,
        stabilized,
    }
}

/// Largest distance from a unit vector of one span to the other span, in
/// both directions. Both inputs must be orthonormal.
pub fn subspace_residual(a: &[CVector], b: &[CVector]) -> f64 {
    fn one_way(from: &[CVector], to: &[CVector]) -> f64 {
        from.iter()
            .map(|v| {
                let mut w = v.clone();
                for t in to {
                    let c = t.dotc(&w);
                    w -= t * c;
                }
                w.norm()
            })
            .fold(0.0, f64::max)
    }
    one_way(a, b).max(one_way(b, a))
}

/// Distance from `v` to the span of the orthonormal `basis`.
pub fn distance_to_span(v: &CVector, basis: &[CVector]) -> f64 {
    let mut w = v.clone();
    for b in basis {
        let c = b.dotc(&w);
        w -= b * c;
    }
    w.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `id_r` on `M_r`.
    Identity { r: usize },
    /// The corner embedding `S: M_r -> M_n`.
    EmbedS { r: usize, n: usize },
    /// The corner compression `T: M_m -> M_r`.
    CompressT { m: usize, r: usize },
}

/// Parametrized generators `ξ ⊗ ξ̄ ⊗ η_i` of `N_phi`, with
/// `ξ = (1, α_2, ..., α_p)` and `η_i = (ᾱ_i, 0, ..., -1, ..., 0, β...)`,
/// `-1` in slot `i` and free `β` entries past the corner for `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratingFamily {
    pub kind: FamilyKind,
}

impl GeneratingFamily {
    /// Dimensions `(m, n)` of the map whose `N_phi` the family generates.
    pub fn map_dims(&self) -> (usize, usize) {
        match self.kind {
            FamilyKind::Identity { r } => (r, r),
            FamilyKind::EmbedS { r, n } => (r, n),
            FamilyKind::CompressT { m, r } => (m, r),
        }
    }

    pub fn map(&self) -> MapRep {
        match self.kind {
            FamilyKind::Identity { r } => MapRep::identity(r),
            FamilyKind::EmbedS { r, n } => crate::maps::st_maps(r, n).expect("checked").0,
            FamilyKind::CompressT { m, r } => crate::maps::st_maps(r, m).expect("checked").1,
        }
    }

    fn corner(&self) -> usize {
        match self.kind {
            FamilyKind::Identity { r }
            | FamilyKind::EmbedS { r, .. }
            | FamilyKind::CompressT { r, .. } => r,
        }
    }

    /// Slots `i` (1-based) carrying the `-1`: `2..=r`.
    pub fn slots(&self) -> std::ops::RangeInclusive<usize> {
        2..=self.corner()
    }

    pub fn ambient_dim(&self) -> usize {
        let (m, n) = self.map_dims();
        m * m * n
    }

    /// Number of distinct monomials in the entries of one `V_i` generator,
    /// which is `dim V_i`.
    pub fn monomial_count(&self) -> usize {
        match self.kind {
            FamilyKind::Identity { r } => r * (2 * r - 1),
            FamilyKind::EmbedS { r, n } => r * ((2 + n - r) * r - 1),
            FamilyKind::CompressT { m, .. } => m * (2 * m - 1),
        }
    }

    /// Generator for slot `i` at parameters `alpha = (α_2, ..., α_p)` and
    /// `beta` (the entries past the corner, used only for `S`).
    pub fn instantiate(&self, i: usize, alpha: &[C64], beta: &[C64]) -> Result<CVector> {
        let (m, n) = self.map_dims();
        let r = self.corner();
        if !self.slots().contains(&i) {
            return Err(PosmapError::Index {
                index: i.to_string(),
                context: format!("family slots 2..={r}"),
            });
        }
        let beta_len = match self.kind {
            FamilyKind::EmbedS { r, n } => n - r,
            _ => 0,
        };
        if alpha.len() != m - 1 || beta.len() != beta_len {
            return Err(PosmapError::Argument(format!(
                "expected {} alpha and {} beta parameters, got {} and {}",
                m - 1,
                beta_len,
                alpha.len(),
                beta.len()
            )));
        }
        let mut xi = CVector::zeros(m);
        xi[0] = ONE;
        for (k, a) in alpha.iter().enumerate() {
            xi[k + 1] = *a;
        }
        let mut eta = CVector::zeros(n);
        eta[0] = xi[i - 1].conj();
        eta[i - 1] = -ONE;
        for (k, b) in beta.iter().enumerate() {
            eta[r + k] = *b;
        }
        Ok(kron_vec(&kron_vec(&xi, &xi.conjugate()), &eta))
    }

    /// `count` instantiations of slot `i` at random parameters.
    pub fn instances(&self, i: usize, count: usize, seed: u64) -> Result<Vec<CVector>> {
        let (m, _) = self.map_dims();
        let beta_len = match self.kind {
            FamilyKind::EmbedS { r, n } => n - r,
            _ => 0,
        };
        let mut rng = stream_rng(seed, i as u64);
        (0..count)
            .map(|_| {
                let alpha: Vec<C64> = (1..m).map(|_| uniform_complex(&mut rng)).collect();
                let beta: Vec<C64> = (0..beta_len).map(|_| uniform_complex(&mut rng)).collect();
                self.instantiate(i, &alpha, &beta)
            })
            .collect()
    }

    /// Default instantiation count, three times the ambient dimension.
    pub fn default_probe_count(&self) -> usize {
        3 * self.ambient_dim()
    }

    /// Orthonormal basis of the span of `V_i` sampled at `probe_count` points.
    pub fn slot_span(
        &self,
        i: usize,
        probe_count: usize,
        seed: u64,
        tol: &Tolerance,
    ) -> Result<Vec<CVector>> {
        let vs = self.instances(i, probe_count, seed)?;
        Ok(column_space(&DMatrix::from_columns(&vs), tol.rank_tol))
    }

    /// Orthonormal basis of the joint span of all `V_i`.
    pub fn span(&self, probe_count: usize, seed: u64, tol: &Tolerance) -> Result<Vec<CVector>> {
        let mut vs = Vec::new();
        for i in self.slots() {
            vs.extend(self.instances(i, probe_count, seed)?);
        }
        Ok(column_space(&DMatrix::from_columns(&vs), tol.rank_tol))
    }
}

pub fn explicit_family(kind: FamilyKind) -> Result<GeneratingFamily> {
    let ok = match kind {
        FamilyKind::Identity { r } => r >= 2,
        FamilyKind::EmbedS { r, n } => r >= 2 && r <= n,
        FamilyKind::CompressT { m, r } => r >= 2 && r <= m,
    };
    if !ok {
        return Err(PosmapError::Argument(format!(
            "invalid family dimensions {kind:?}"
        )));
    }
    Ok(GeneratingFamily { kind })
}

/// Dimension of the joint span of the family at `probe_count` points per slot.
pub fn family_span_dim(
    family: &GeneratingFamily,
    probe_count: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<usize> {
    Ok(family.span(probe_count, seed, tol)?.len())
}

/// `ζ_k = Σ_{j<=r} |k j j>` in `C^m ⊗ C^m ⊗ C^n`, with 1-based `k <= m` and
/// `r <= min(m, n)`.
pub fn zeta_vector(k: usize, m: usize, n: usize, r: usize) -> Result<CVector> {
    if k == 0 || k > m {
        return Err(PosmapError::Index {
            index: k.to_string(),
            context: format!("first factor C^{m}"),
        });
    }
    if r > m.min(n) {
        return Err(PosmapError::Argument(format!(
            "r = {r} exceeds min({m}, {n})"
        )));
    }
    let mut v = CVector::zeros(m * m * n);
    for j in 0..r {
        v[((k - 1) * m + j) * n + j] = ONE;
    }
    Ok(v)
}

pub fn is_unital(phi: &MapRep, tol: &Tolerance) -> bool {
    let (m, n) = phi.dims();
    let image = phi
        .apply(&ComplexMatrix::identity(m))
        .expect("identity has the input shape");
    image.approx_eq(&ComplexMatrix::identity(n), tol.entry_tol)
}

/// Dimension of `{X in M_n : X phi(E_ij) = phi(E_ij) X for all i, j}`.
pub fn commutant_dimension(phi: &MapRep, tol: &Tolerance) -> usize {
    let (m, n) = phi.dims();
    let mut system = DMatrix::<C64>::zeros(m * m * n * n, n * n);
    for i in 0..m {
        for j in 0..m {
            let a = phi.block(i, j);
            let base = (i * m + j) * n * n;
            // column (p, q) is the commutator [E_pq, a] flattened row-major
            for p in 0..n {
                for q in 0..n {
                    let col = p * n + q;
                    for l in 0..n {
                        // (E_pq a)[p, l] = a[q, l]
                        system[(base + p * n + l, col)] += a.get(q, l);
                        // (a E_pq)[l, q] = a[l, p]
                        system[(base + l * n + q, col)] -= a.get(l, p);
                    }
                }
            }
        }
    }
    null_space(&system, tol.rank_tol).1.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WoronowiczVerdict {
    /// Unital, irreducible and `ker phî = N_phi`.
    ExposedByTheorem,
    ConditionFails,
    NotUnitalOrIrreducibleButConditionHolds,
}

#[derive(Debug, Clone)]
pub struct WoronowiczReport {
    pub dim_ker_hat: usize,
    pub dim_n: usize,
    pub condition_holds: bool,
    pub unital: bool,
    pub commutant_dim: usize,
    pub irreducible: bool,
    pub verdict: WoronowiczVerdict,
    /// Largest `|phî v|` over the sampled `N_phi` basis.
    pub kernel_residual: f64,
    pub draws: usize,
    pub stabilized: bool,
}

impl WoronowiczReport {
    pub fn gap(&self) -> usize {
        self.dim_ker_hat.saturating_sub(self.dim_n)
    }
}

pub fn woronowicz_verdict(
    phi: &MapRep,
    draw_cap: usize,
    seed: u64,
    tol: &Tolerance,
) -> WoronowiczReport {
    let hat = hat_matrix(phi);
    let dim_ker_hat = hat.kernel_dim(tol);
    let sampled = n_phi_basis(phi, draw_cap, seed, tol);
    let kernel_residual = sampled
        .basis
        .iter()
        .map(|v| hat.matrix.mul_vec(v).norm())
        .fold(0.0, f64::max);
    let condition_holds = sampled.dim() == dim_ker_hat && kernel_residual <= KERNEL_TOL;
    let unital = is_unital(phi, tol);
    let commutant_dim = commutant_dimension(phi, tol);
    let irreducible = commutant_dim == 1;
    let verdict = if !condition_holds {
        WoronowiczVerdict::ConditionFails
    } else if unital && irreducible {
        WoronowiczVerdict::ExposedByTheorem
    } else {
        WoronowiczVerdict::NotUnitalOrIrreducibleButConditionHolds
    };
    WoronowiczReport {
        dim_ker_hat,
        dim_n: sampled.dim(),
        condition_holds,
        unital,
        commutant_dim,
        irreducible,
        verdict,
        kernel_residual,
        draws: sampled.draws,
        stabilized: sampled.stabilized,
    }
}

#[derive(Debug, Clone)]
pub enum Factorization {
    /// `psî = X phî`, so `psi(a) = X phi(a)` for all `a`.
    Factor { x: ComplexMatrix, residual: f64 },
    /// A kernel vector of `phî` that `psî` does not annihilate.
    KernelViolation { vector: CVector, image_norm: f64 },
}

impl Factorization {
    pub fn factor(&self) -> Option<&ComplexMatrix> {
        match self {
            Factorization::Factor { x, .. } => Some(x),
            Factorization::KernelViolation { .. } => None,
        }
    }
}

/// Solves `psî = X phî` after checking `ker phî ⊂ ker psî`.
pub fn factor_through(psi: &MapRep, phi: &MapRep, tol: &Tolerance) -> Result<Factorization> {
    if psi.dims() != phi.dims() {
        return Err(PosmapError::shapes(phi.dims(), psi.dims()));
    }
    let hat_phi = hat_matrix(phi);
    let hat_psi = hat_matrix(psi);
    let scale = hat_psi.matrix.norm().max(1.0);
    for v in hat_phi.kernel(tol) {
        let image_norm = hat_psi.matrix.mul_vec(&v).norm();
        if image_norm > KERNEL_TOL * scale {
            return Ok(Factorization::KernelViolation {
                vector: v,
                image_norm,
            });
        }
    }
    let a = hat_phi.matrix.as_matrix();
    let smax = a.singular_values().iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(PosmapError::Degenerate("phi is the zero map".into()));
    }
    let pinv = a
        .clone()
        .pseudo_inverse(tol.rank_tol * smax)
        .map_err(|e| PosmapError::Degenerate(e.to_string()))?;
    let x = ComplexMatrix::from(hat_psi.matrix.as_matrix() * pinv);
    let residual = (&(&x * &hat_phi.matrix) - &hat_psi.matrix).norm();
    Ok(Factorization::Factor { x, residual })
}

/// `Some(c)` when `x ≈ c I` entrywise within `tol`.
pub fn scalar_value(x: &ComplexMatrix, tol: f64) -> Option<C64> {
    if !x.is_square() {
        return None;
    }
    let n = x.rows();
    let c = x.trace() / n as f64;
    let target = ComplexMatrix::identity(n).scale(c);
    x.approx_eq(&target, tol).then_some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::st_maps;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn hat_columns_are_images() {
        let mut rng = stream_rng(50, 0);
        let s = crate::random::gaussian_matrix(&mut rng, 2, 3);
        let phi = MapRep::ad(&s);
        let hat = hat_matrix(&phi);
        assert_eq!(hat.matrix.shape(), (3, 12));
        let a = ComplexMatrix::unit(2, 2, 1, 0);
        let image = phi.apply(&a).unwrap();
        for k in 0..3 {
            for row in 0..3 {
                assert_eq!(hat.matrix.get(row, 2 * 3 + k), image.get(row, k));
            }
        }
        // linearity on a ⊗ η
        let xi = unit_vector(&mut rng, 2);
        let eta = unit_vector(&mut rng, 3);
        let aa = ComplexMatrix::outer(&xi, &xi);
        let v = kron_vec(&kron_vec(&xi, &xi.conjugate()), &eta);
        let lhs = hat.apply(&v).unwrap();
        let rhs = phi.apply(&aa).unwrap().mul_vec(&eta);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hat_kernel_dimensions() {
        for r in 2..=4 {
            assert_eq!(
                hat_matrix(&MapRep::identity(r)).kernel_dim(&tol()),
                r * r * r - r
            );
        }
        let (s, _) = st_maps(2, 3).unwrap();
        assert_eq!(hat_matrix(&s).kernel_dim(&tol()), 10);
        let (_, t) = st_maps(2, 3).unwrap();
        assert_eq!(hat_matrix(&t).kernel_dim(&tol()), 16);
    }

    #[test]
    fn sampled_n_dimensions() {
        let id2 = n_phi_basis(&MapRep::identity(2), default_draw_cap(2, 2), 1, &tol());
        assert_eq!(id2.dim(), 6);
        assert!(id2.stabilized);
        let (_, t) = st_maps(2, 3).unwrap();
        assert_eq!(n_phi_basis(&t, default_draw_cap(3, 2), 1, &tol()).dim(), 15);
        // T: M_3 -> M_1 annihilates only positive matrices supported off e_1,
        // which a generic ξ never produces
        let (_, t1) = st_maps(1, 3).unwrap();
        assert_eq!(n_phi_basis(&t1, default_draw_cap(3, 1), 1, &tol()).dim(), 4);
    }

    #[test]
    fn n_basis_is_deterministic() {
        let a = n_phi_basis(&MapRep::identity(3), 2000, 9, &tol());
        let b = n_phi_basis(&MapRep::identity(3), 2000, 9, &tol());
        assert_eq!(a.draws, b.draws);
        assert_eq!(a.basis, b.basis);
    }

    #[test]
    fn family_generators_lie_in_n() {
        for kind in [
            FamilyKind::Identity { r: 3 },
            FamilyKind::EmbedS { r: 2, n: 4 },
            FamilyKind::CompressT { m: 4, r: 3 },
        ] {
            let family = explicit_family(kind).unwrap();
            let hat = hat_matrix(&family.map());
            for i in family.slots() {
                for v in family.instances(i, 5, 3).unwrap() {
                    assert!(hat.apply(&v).unwrap().norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn slot_spans_match_monomial_counts() {
        for kind in [
            FamilyKind::Identity { r: 3 },
            FamilyKind::EmbedS { r: 2, n: 3 },
            FamilyKind::CompressT { m: 3, r: 2 },
        ] {
            let family = explicit_family(kind).unwrap();
            let probes = family.default_probe_count();
            for i in family.slots() {
                let d = family.slot_span(i, probes, 4, &tol()).unwrap().len();
                assert_eq!(d, family.monomial_count(), "{kind:?} slot {i}");
            }
        }
        let id3 = explicit_family(FamilyKind::Identity { r: 3 }).unwrap();
        assert_eq!(family_span_dim(&id3, 81, 4, &tol()).unwrap(), 24);
        let t = explicit_family(FamilyKind::CompressT { m: 3, r: 2 }).unwrap();
        assert_eq!(family_span_dim(&t, 54, 4, &tol()).unwrap(), 15);
    }

    #[test]
    fn invalid_families() {
        assert!(explicit_family(FamilyKind::Identity { r: 1 }).is_err());
        assert!(explicit_family(FamilyKind::EmbedS { r: 3, n: 2 }).is_err());
        assert!(explicit_family(FamilyKind::CompressT { m: 2, r: 3 }).is_err());
        let f = explicit_family(FamilyKind::Identity { r: 3 }).unwrap();
        assert!(f.instantiate(1, &[ONE, ONE], &[]).is_err());
        assert!(f.instantiate(2, &[ONE], &[]).is_err());
    }

    #[test]
    fn zeta_vectors_complement_identity_n() {
        let r = 3;
        let n = n_phi_basis(&MapRep::identity(r), default_draw_cap(r, r), 2, &tol());
        let hat = hat_matrix(&MapRep::identity(r));
        for k in 1..=r {
            let z = zeta_vector(k, r, r, r).unwrap();
            for b in &n.basis {
                assert!(b.dotc(&z).norm() < 1e-9);
            }
            // ζ_k is orthogonal to N but outside ker îd
            assert!(hat.apply(&z).unwrap().norm() > 0.5);
        }
        assert!(zeta_vector(0, 3, 3, 3).is_err());
        assert!(zeta_vector(1, 3, 2, 3).is_err());
    }

    #[test]
    fn compression_gap_vectors() {
        let (m, r) = (3, 2);
        let (_, t) = st_maps(r, m).unwrap();
        let hat = hat_matrix(&t);
        let n = n_phi_basis(&t, default_draw_cap(m, r), 2, &tol());
        for k in (r + 1)..=m {
            let z = zeta_vector(k, m, r, r).unwrap();
            assert!(hat.apply(&z).unwrap().norm() < 1e-12);
            assert!((distance_to_span(&z, &n.basis) - z.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn unitality_and_commutants() {
        for r in 2..=4 {
            let id = MapRep::identity(r);
            assert!(is_unital(&id, &tol()));
            assert_eq!(commutant_dimension(&id, &tol()), 1);
        }
        for (r, n) in [(2, 3), (2, 4), (3, 4)] {
            let (s, t) = st_maps(r, n).unwrap();
            assert!(!is_unital(&s, &tol()));
            assert_eq!(commutant_dimension(&s, &tol()), 1 + (n - r) * (n - r));
            assert!(is_unital(&t, &tol()));
            assert_eq!(commutant_dimension(&t, &tol()), 1);
        }
        // transpose has full range, so a trivial commutant
        assert_eq!(commutant_dimension(&MapRep::transpose(3), &tol()), 1);
    }

    #[test]
    fn verdicts() {
        let id = woronowicz_verdict(&MapRep::identity(2), default_draw_cap(2, 2), 42, &tol());
        assert_eq!(id.verdict, WoronowiczVerdict::ExposedByTheorem);
        assert_eq!((id.dim_n, id.dim_ker_hat), (6, 6));

        let (s, t) = st_maps(2, 3).unwrap();
        let rs = woronowicz_verdict(&s, default_draw_cap(2, 3), 42, &tol());
        assert_eq!(
            rs.verdict,
            WoronowiczVerdict::NotUnitalOrIrreducibleButConditionHolds
        );
        assert!(rs.condition_holds && !rs.unital);

        let rt = woronowicz_verdict(&t, default_draw_cap(3, 2), 42, &tol());
        assert_eq!(rt.verdict, WoronowiczVerdict::ConditionFails);
        assert_eq!(rt.gap(), 1);
        assert!(rt.kernel_residual < KERNEL_TOL);
    }

    #[test]
    fn factorizations() {
        let mut rng = stream_rng(51, 0);
        let s = crate::random::gaussian_matrix(&mut rng, 3, 3);
        let phi = MapRep::ad(&s);
        let x = factor_through(&phi, &phi, &tol()).unwrap();
        let x = x.factor().unwrap();
        assert!(x.approx_eq(&ComplexMatrix::identity(3), 1e-9));

        let f = factor_through(&phi.scale(2.5), &phi, &tol()).unwrap();
        let c = scalar_value(f.factor().unwrap(), 1e-9).unwrap();
        assert!((c - C64::new(2.5, 0.0)).norm() < 1e-9);

        match factor_through(&MapRep::transpose(2), &MapRep::identity(2), &tol()).unwrap() {
            Factorization::KernelViolation { vector, image_norm } => {
                assert!(image_norm > 0.1);
                let hat_id = hat_matrix(&MapRep::identity(2));
                assert!(hat_id.apply(&vector).unwrap().norm() < 1e-12);
            }
            other => panic!("expected a kernel violation, got {other:?}"),
        }
        assert!(factor_through(&MapRep::identity(2), &MapRep::identity(3), &tol()).is_err());
    }
}
