//! Membership tests for the cones of positive, completely positive and
//! superpositive maps, plus the closed-form block-positivity criterion for
//! the 4x4 family `ρ_{a,b,α,β}`.

use rayon::prelude::*;

use crate::error::{PosmapError, Result};
use crate::linalg::{
    eig_hermitian_min, kron_vec, partial_transpose, CVector, ComplexMatrix, Tolerance, C64, ZERO,
};
use crate::maps::MapRep;
use crate::random::{stream_rng, unit_vector};

/// The block matrix
///
/// ```text
/// a  0  0  α
/// 0  0  β  0
/// 0  β̄  0  0
/// ᾱ  0  0  b
/// ```
///
/// in `M_2 ⊗ M_2`, i.e. the general block-positive matrix whose `(1,2)` and
/// `(2,1)` diagonal entries vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialWitnessForm {
    pub a: f64,
    pub b: f64,
    pub alpha: C64,
    pub beta: C64,
}

impl SpecialWitnessForm {
    pub fn new(a: f64, b: f64, alpha: C64, beta: C64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(PosmapError::Argument(format!(
                "diagonal corners must be nonnegative, got a = {a}, b = {b}"
            )));
        }
        Ok(SpecialWitnessForm { a, b, alpha, beta })
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let re = |x: f64| C64::new(x, 0.0);
        ComplexMatrix::from_rows(&[
            vec![re(self.a), ZERO, ZERO, self.alpha],
            vec![ZERO, ZERO, self.beta, ZERO],
            vec![ZERO, self.beta.conj(), ZERO, ZERO],
            vec![self.alpha.conj(), ZERO, ZERO, re(self.b)],
        ])
    }

    pub fn to_map(&self) -> MapRep {
        MapRep::from_choi(2, 2, self.to_matrix()).expect("4x4 by construction")
    }

    /// `sqrt(ab) - |α| - |β|`; nonnegative exactly on the block-positive part.
    pub fn slack(&self) -> f64 {
        (self.a * self.b).sqrt() - self.alpha.norm() - self.beta.norm()
    }

    /// A product vector `ξ ⊗ η` on which the quadratic form is negative, when
    /// the slack is negative.
    ///
    /// The vector is `(p, q e^{i(θ-τ)}) ⊗ (1, e^{iτ})`, giving the value
    /// `p²a + q²b + 2pq Re[e^{iθ}(α + β e^{-2iτ})]`; the phases align the
    /// bracket with `-(|α|+|β|)`.
    pub fn violating_product_vector(&self) -> Option<(CVector, CVector)> {
        let c = self.alpha.norm() + self.beta.norm();
        if self.slack() >= 0.0 || c == 0.0 {
            return None;
        }
        let arg_alpha = if self.alpha.norm() > 0.0 {
            self.alpha.arg()
        } else {
            0.0
        };
        let arg_beta = if self.beta.norm() > 0.0 {
            self.beta.arg()
        } else {
            arg_alpha
        };
        let tau = (arg_beta - arg_alpha) / 2.0;
        let theta = std::f64::consts::PI - arg_alpha;
        let (p, q) = if self.a > 0.0 && self.b > 0.0 {
            (self.b.sqrt(), self.a.sqrt())
        } else if self.a == 0.0 {
            (1.0, c / (self.b + 1.0))
        } else {
            (c / (self.a + 1.0), 1.0)
        };
        let xi = CVector::from_vec(vec![C64::new(p, 0.0), C64::from_polar(q, theta - tau)]);
        let eta = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::from_polar(1.0, tau)]);
        let (nx, ny) = (xi.norm(), eta.norm());
        Some((xi / C64::new(nx, 0.0), eta / C64::new(ny, 0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMethod {
    ClosedForm,
    AlternatingMinimization,
    PsdCheck,
    PptCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Product vector `ξ ⊗ η` attaining the reported margin.
    ProductVector { xi: CVector, eta: CVector },
    /// Eigenvector for the reported (negative) eigenvalue.
    Eigenvector(CVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeVerdict {
    pub member: bool,
    pub margin: f64,
    pub certificate: Option<Certificate>,
    pub method: ConeMethod,
}

/// Closed-form block-positivity of `ρ_{a,b,α,β}`: member iff
/// `|α| + |β| <= sqrt(ab)`, inclusive at `entry_tol`.
pub fn block_positive_special(w: &SpecialWitnessForm, tol: &Tolerance) -> ConeVerdict {
    let margin = w.slack();
    let member = margin >= -tol.entry_tol;
    let certificate = if member {
        None
    } else {
        w.violating_product_vector()
            .map(|(xi, eta)| Certificate::ProductVector { xi, eta })
    };
    ConeVerdict {
        member,
        margin,
        certificate,
        method: ConeMethod::ClosedForm,
    }
}

/// Budget for the alternating product-vector descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once a full sweep improves the objective by less than this.
    pub convergence: f64,
    pub seed: u64,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions {
            restarts: 64,
            max_iters: 200,
            convergence: 1e-12,
            seed: 42,
        }
    }
}

/// Smallest value of `<ζ|ρ|ζ>` found over unit product vectors, with the
/// achieving factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMinimum {
    pub value: f64,
    pub xi: CVector,
    pub eta: CVector,
}

/// `(<ξ| ⊗ I) ρ (|ξ> ⊗ I)`, an `n x n` matrix.
pub fn contract_first(rho: &ComplexMatrix, m: usize, n: usize, xi: &CVector) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            let w = xi[i].conj() * xi[j];
            if w == ZERO {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    let v = out.get(k, l) + w * rho.get(i * n + k, j * n + l);
                    out.set(k, l, v);
                }
            }
        }
    }
    out
}

/// `(I ⊗ <η|) ρ (I ⊗ |η>)`, an `m x m` matrix.
pub fn contract_second(rho: &ComplexMatrix, m: usize, n: usize, eta: &CVector) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m, m);
    for k in 0..n {
        for l in 0..n {
            let w = eta[k].conj() * eta[l];
            if w == ZERO {
                continue;
            }
            for i in 0..m {
                for j in 0..m {
                    let v = out.get(i, j) + w * rho.get(i * n + k, j * n + l);
                    out.set(i, j, v);
                }
            }
        }
    }
    out
}

/// Real part of `<ζ|ρ|ζ>`.
pub fn expectation(rho: &ComplexMatrix, zeta: &CVector) -> f64 {
    zeta.dotc(&rho.mul_vec(zeta)).re
}

/// One alternating descent run from `(xi, eta)`.
#[derive(Debug, Clone)]
pub(crate) struct Descent {
    pub value: f64,
    pub xi: CVector,
    pub eta: CVector,
    /// Objective after every half-step.
    #[cfg_attr(not(test), allow(dead_code))]
    pub trace: Vec<f64>,
}

pub(crate) fn descend(
    rho: &ComplexMatrix,
    m: usize,
    n: usize,
    mut xi: CVector,
    mut eta: CVector,
    max_iters: usize,
    convergence: f64,
) -> Descent {
    let mut value = expectation(rho, &kron_vec(&xi, &eta));
    let mut trace = vec![value];
    for _ in 0..max_iters {
        let before = value;
        let (v, e) = eig_hermitian_min(&contract_first(rho, m, n, &xi)).expect("square");
        eta = e;
        trace.push(v);
        let (v, x) = eig_hermitian_min(&contract_second(rho, m, n, &eta)).expect("square");
        xi = x;
        trace.push(v);
        value = v;
        if before - value < convergence {
            break;
        }
    }
    Descent {
        value,
        xi,
        eta,
        trace,
    }
}

fn check_hermitian(rho: &ComplexMatrix, m: usize, n: usize, tol: &Tolerance) -> Result<()> {
    if rho.shape() != (m * n, m * n) {
        return Err(PosmapError::shapes((m * n, m * n), rho.shape()));
    }
    if !rho.is_hermitian(tol.entry_tol * rho.norm().max(1.0)) {
        return Err(PosmapError::Argument("matrix is not Hermitian".into()));
    }
    Ok(())
}

/// Multi-start alternating minimization of `<ξ⊗η|ρ|ξ⊗η>` over unit product
/// vectors. Each half-step fixes one factor and replaces the other by the
/// minimal eigenvector of the contracted matrix, so every run is monotone.
/// The returned value is an upper bound on the true minimum.
pub fn min_product_expectation(
    rho: &ComplexMatrix,
    m: usize,
    n: usize,
    opts: &MinimizerOptions,
    tol: &Tolerance,
) -> Result<ProductMinimum> {
    check_hermitian(rho, m, n, tol)?;
    let rho = rho.hermitian_part();
    let restarts = opts.restarts.max(1);
    let runs: Vec<Descent> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(opts.seed, r as u64);
            let xi = unit_vector(&mut rng, m);
            let eta = unit_vector(&mut rng, n);
            descend(&rho, m, n, xi, eta, opts.max_iters, opts.convergence)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one restart");
    Ok(ProductMinimum {
        value: best.value,
        xi: best.xi,
        eta: best.eta,
    })
}

/// Block-positivity of `rho` in `M_m ⊗ M_n` by alternating minimization.
/// A negative value is a conclusive certificate of non-membership; a
/// nonnegative one is membership at the given restart budget.
pub fn is_block_positive(
    rho: &ComplexMatrix,
    m: usize,
    n: usize,
    opts: &MinimizerOptions,
    tol: &Tolerance,
) -> Result<ConeVerdict> {
    let min = min_product_expectation(rho, m, n, opts, tol)?;
    Ok(ConeVerdict {
        member: min.value >= -tol.entry_tol,
        margin: min.value,
        certificate: Some(Certificate::ProductVector {
            xi: min.xi,
            eta: min.eta,
        }),
        method: ConeMethod::AlternatingMinimization,
    })
}

/// Positivity of `phi`, i.e. block-positivity of its Choi matrix.
pub fn is_positive_map(
    phi: &MapRep,
    opts: &MinimizerOptions,
    tol: &Tolerance,
) -> Result<ConeVerdict> {
    let (m, n) = phi.dims();
    is_block_positive(phi.choi(), m, n, opts, tol)
}

fn psd_verdict(matrix: &ComplexMatrix, method: ConeMethod, tol: &Tolerance) -> ConeVerdict {
    let (value, vector) = eig_hermitian_min(matrix).expect("Choi matrices are square");
    let member = value >= -tol.entry_tol;
    ConeVerdict {
        member,
        margin: value,
        certificate: (!member).then_some(Certificate::Eigenvector(vector)),
        method,
    }
}

/// Complete positivity: the Choi matrix is positive semidefinite.
pub fn is_completely_positive(phi: &MapRep, tol: &Tolerance) -> ConeVerdict {
    psd_verdict(phi.choi(), ConeMethod::PsdCheck, tol)
}

/// Superpositivity for `M_2 -> M_2`, where separability of the Choi matrix is
/// equivalent to it and its partial transpose both being positive
/// semidefinite.
pub fn is_superpositive_2x2(phi: &MapRep, tol: &Tolerance) -> Result<ConeVerdict> {
    let (m, n) = phi.dims();
    if (m, n) != (2, 2) {
        return Err(PosmapError::UnsupportedDimension {
            m,
            n,
            reason: "superpositivity is decided only for M_2 -> M_2".into(),
        });
    }
    let direct = psd_verdict(phi.choi(), ConeMethod::PptCheck, tol);
    let pt = partial_transpose(phi.choi(), 2, 2)?;
    let transposed = psd_verdict(&pt, ConeMethod::PptCheck, tol);
    Ok(if direct.margin <= transposed.margin {
        ConeVerdict {
            member: direct.member && transposed.member,
            ..direct
        }
    } else {
        ConeVerdict {
            member: direct.member && transposed.member,
            ..transposed
        }
    })
}
