//! Acceptance suite: one PASS/FAIL line per criterion, with its tolerance and
//! runtime budget. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use posmap::bidual::{default_budget, stable_bidual_dimension};
use posmap::cone::{is_block_positive, is_positive_map, MinimizerOptions, SpecialWitnessForm};
use posmap::linalg::{flip, kron, pairing};
use posmap::maps::{compose, pairing_maps, partial_identity, st_maps};
use posmap::random::{gaussian_matrix, matrix_of_rank, stream_rng, uniform_complex, unit_vector};
use posmap::woronowicz::{
    commutant_dimension, default_draw_cap, explicit_family, hat_matrix, n_phi_basis,
    subspace_residual, woronowicz_verdict, FamilyKind, WoronowiczVerdict,
};
use posmap::{ComplexMatrix, MapRep, Tolerance, C64};
use posmap_cli::pipeline::pipeline_marciniak;
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let choi = MapRep::identity(2).into_choi();
    let elapsed = start.elapsed();
    let mut expected = ComplexMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        expected.set(i, j, c(1.0, 0.0));
    }
    let err = choi.max_abs_diff(&expected);
    ensure(err <= 1e-12, || format!("max entry error {err:e}"))?;
    ensure(elapsed < Duration::from_millis(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("max entry error {err:e}, {elapsed:?}"))
}

fn criterion_2() -> Check {
    let mut rng = stream_rng(2, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let phi = MapRep::from_choi(m, n, gaussian_matrix(&mut rng, m * n, m * n)).unwrap();
        let a = gaussian_matrix(&mut rng, m, m);
        let b = gaussian_matrix(&mut rng, n, n);
        let lhs = pairing(&kron(&a, &b), phi.choi()).unwrap();
        let rhs = pairing(&b, &phi.apply(&a).unwrap()).unwrap();
        let scaled = (lhs - rhs).norm() / (a.norm() * b.norm() * phi.choi().norm());
        worst = worst.max(scaled);
    }
    ensure(worst <= 1e-9, || format!("worst scaled error {worst:e}"))?;
    Ok(format!("worst scaled error {worst:e} over 100 triples"))
}

/// The 4x4 special form, written out independently of the library.
fn special_entries(a: f64, b: f64, alpha: C64, beta: C64) -> [[C64; 4]; 4] {
    let z = c(0.0, 0.0);
    [
        [c(a, 0.0), z, z, alpha],
        [z, z, beta, z],
        [z, beta.conj(), z, z],
        [alpha.conj(), z, z, c(b, 0.0)],
    ]
}

/// Minimum of `<ξ⊗η|ρ|ξ⊗η>` with `ξ` on a Bloch-sphere grid of step π/200
/// and the exact minimum over `η` from the 2x2 eigenvalue formula.
fn grid_minimum(rho: &[[C64; 4]; 4]) -> f64 {
    let steps_theta = 200;
    let steps_phi = 400;
    let mut best = f64::INFINITY;
    for t in 0..=steps_theta {
        let theta = PI * t as f64 / steps_theta as f64;
        for p in 0..steps_phi {
            let phase = 2.0 * PI * p as f64 / steps_phi as f64;
            let xi = [
                c((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phase),
            ];
            let mut m = [[c(0.0, 0.0); 2]; 2];
            for k in 0..2 {
                for l in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            m[k][l] += xi[i].conj() * xi[j] * rho[2 * i + k][2 * j + l];
                        }
                    }
                }
            }
            let (ma, md, mb) = (m[0][0].re, m[1][1].re, m[0][1]);
            let lambda = (ma + md) / 2.0 - (((ma - md) / 2.0).powi(2) + mb.norm_sqr()).sqrt();
            best = best.min(lambda);
        }
    }
    best
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let mut rng = stream_rng(3, 0);
    let opts = MinimizerOptions::default();
    let mut members = Vec::new();
    let mut outsiders = Vec::new();
    let mut checked = 0;
    while checked < 200 {
        let a = rng.random_range(0.0..2.0);
        let b = rng.random_range(0.0..2.0);
        let alpha = uniform_complex(&mut rng) * 0.6;
        let beta = uniform_complex(&mut rng) * 0.6;
        let w = SpecialWitnessForm::new(a, b, alpha, beta).unwrap();
        if w.slack().abs() < 1e-3 {
            continue;
        }
        checked += 1;
        let closed = w.slack() >= 0.0;
        let numeric = is_block_positive(&w.to_matrix(), 2, 2, &opts, &tol())
            .unwrap()
            .member;
        ensure(closed == numeric, || {
            format!("disagreement at a={a}, b={b}, α={alpha}, β={beta}")
        })?;
        if closed {
            members.push((a, b, alpha, beta));
        } else {
            outsiders.push((a, b, alpha, beta));
        }
    }
    ensure(members.len() >= 20 && outsiders.len() >= 20, || {
        format!("{} members, {} outsiders", members.len(), outsiders.len())
    })?;
    for &(a, b, alpha, beta) in &members[..20] {
        let g = grid_minimum(&special_entries(a, b, alpha, beta));
        ensure(g >= -1e-9, || format!("grid minimum {g} for a member"))?;
    }
    for &(a, b, alpha, beta) in &outsiders[..20] {
        let g = grid_minimum(&special_entries(a, b, alpha, beta));
        ensure(g < 0.0, || format!("grid minimum {g} for a non-member"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "200 agree ({} members, {} not), grid confirms 20 + 20, {elapsed:.2?}",
        members.len(),
        outsiders.len()
    ))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let mut rng = stream_rng(4, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = rng.random_range(0.0..2.0);
        let b = rng.random_range(0.0..2.0);
        let alpha = uniform_complex(&mut rng);
        let beta = uniform_complex(&mut rng);
        let theta = rng.random_range(0.0..2.0 * PI);
        let e = C64::from_polar(1.0, theta);
        let s = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), e], vec![-e.conj(), c(-1.0, 0.0)]]);
        let w = SpecialWitnessForm::new(a, b, alpha, beta).unwrap();
        let p = pairing_maps(&MapRep::ad(&s), &w.to_map()).unwrap();
        let expected = a + b - 2.0 * (alpha + beta * C64::from_polar(1.0, -2.0 * theta)).re;
        worst = worst.max((p - c(expected, 0.0)).norm());
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-10, || format!("worst error {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("worst error {worst:e}, {elapsed:.2?}"))
}

struct DimCase {
    name: String,
    map: MapRep,
    family: FamilyKind,
    n_dim: usize,
    ker_dim: usize,
}

fn dimension_cases() -> Vec<DimCase> {
    let mut cases = Vec::new();
    for r in 2..=5 {
        cases.push(DimCase {
            name: format!("id_{r}"),
            map: MapRep::identity(r),
            family: FamilyKind::Identity { r },
            n_dim: r * r * r - r,
            ker_dim: r * r * r - r,
        });
    }
    for (r, n) in [(2, 3), (2, 4), (3, 4)] {
        cases.push(DimCase {
            name: format!("S r={r} n={n}"),
            map: st_maps(r, n).unwrap().0,
            family: FamilyKind::EmbedS { r, n },
            n_dim: r * r * n - r,
            ker_dim: r * r * n - r,
        });
    }
    for (m, r) in [(3, 2), (4, 2), (4, 3)] {
        cases.push(DimCase {
            name: format!("T m={m} r={r}"),
            map: st_maps(r, m).unwrap().1,
            family: FamilyKind::CompressT { m, r },
            n_dim: m * m * r - m,
            ker_dim: m * m * r - r,
        });
    }
    cases
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for case in dimension_cases() {
        let (m, n) = case.map.dims();
        let sampled = n_phi_basis(&case.map, default_draw_cap(m, n), 5, &tol());
        let ker = hat_matrix(&case.map).kernel_dim(&tol());
        ensure(sampled.dim() == case.n_dim && ker == case.ker_dim, || {
            format!(
                "{}: dim N = {} (want {}), dim ker = {} (want {})",
                case.name,
                sampled.dim(),
                case.n_dim,
                ker,
                case.ker_dim
            )
        })?;
        parts.push(format!("{} {}/{}", case.name, sampled.dim(), ker));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("{}; {elapsed:.2?}", parts.join(", ")))
}

fn criterion_6() -> Check {
    let mut worst = 0.0f64;
    for case in dimension_cases() {
        let (m, n) = case.map.dims();
        let family = explicit_family(case.family).map_err(|e| e.to_string())?;
        for i in family.slots() {
            let d = family
                .slot_span(i, 2 * family.monomial_count(), 6, &tol())
                .unwrap()
                .len();
            ensure(d == family.monomial_count(), || {
                format!(
                    "{} slot {i}: span {d}, monomials {}",
                    case.name,
                    family.monomial_count()
                )
            })?;
        }
        let span = family
            .span(family.default_probe_count(), 6, &tol())
            .unwrap();
        let sampled = n_phi_basis(&case.map, default_draw_cap(m, n), 6, &tol());
        let residual = subspace_residual(&span, &sampled.basis);
        ensure(span.len() == sampled.dim() && residual <= 1e-8, || {
            format!(
                "{}: family span {} vs sampled {}, residual {residual:e}",
                case.name,
                span.len(),
                sampled.dim()
            )
        })?;
        worst = worst.max(residual);
    }
    Ok(format!(
        "worst mutual projection residual {worst:e} over 10 cases"
    ))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let mut maps: Vec<(String, MapRep)> = Vec::new();
    for r in 2..=3 {
        maps.push((format!("id_{r}"), MapRep::identity(r)));
    }
    for m in 1..=3 {
        for n in 1..=3 {
            for r in 1..=m.min(n) {
                let sigma = partial_identity(m, n, r);
                maps.push((format!("ad(σ) {m}x{n} r={r}"), MapRep::ad(&sigma)));
                let with_t = compose(&MapRep::ad(&sigma), &MapRep::transpose(m)).unwrap();
                maps.push((format!("ad(σ)∘t {m}x{n} r={r}"), with_t));
            }
        }
    }
    let count = maps.len();
    for (name, phi) in &maps {
        let (m, n) = phi.dims();
        let s = stable_bidual_dimension(phi, default_budget(m, n), 7, &tol()).unwrap();
        ensure(s.stable() && s.dimension() == 1, || {
            format!(
                "{name}: dimension {} at budget, {} at double",
                s.at_budget.dimension, s.at_double.dimension
            )
        })?;
    }
    let mut rng = stream_rng(7, 1);
    let shapes = [(2, 2), (2, 3), (3, 3), (3, 2)];
    let mut sums = Vec::new();
    for k in 0..20 {
        let (m, n) = shapes[k % shapes.len()];
        let s1 = gaussian_matrix(&mut rng, m, n);
        let s2 = gaussian_matrix(&mut rng, m, n);
        let phi = MapRep::ad(&s1).add(&MapRep::ad(&s2)).unwrap();
        let s = stable_bidual_dimension(&phi, default_budget(m, n), 7, &tol()).unwrap();
        ensure(s.stable() && s.dimension() >= 2, || {
            format!(
                "sum {k} ({m}x{n}): dimension {} at budget, {} at double",
                s.at_budget.dimension, s.at_double.dimension
            )
        })?;
        sums.push(s.dimension());
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{count} maps at dimension 1; sums {:?}; {elapsed:.2?}",
        sums
    ))
}

/// `{c I_r ⊕ D}`: the matrices commuting with every `a ⊕ 0`.
fn block_commutant_basis(r: usize, n: usize) -> Vec<ComplexMatrix> {
    let mut basis = vec![ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j && i < r {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })];
    for p in r..n {
        for q in r..n {
            basis.push(ComplexMatrix::unit(n, n, p, q));
        }
    }
    basis
}

fn criterion_8() -> Check {
    let mut parts = Vec::new();
    for r in 2..=4 {
        let rep = woronowicz_verdict(&MapRep::identity(r), default_draw_cap(r, r), 8, &tol());
        ensure(rep.verdict == WoronowiczVerdict::ExposedByTheorem, || {
            format!("id_{r}: {:?}", rep.verdict)
        })?;
    }
    parts.push("id_2..4 exposed_by_theorem".to_string());
    for (m, r) in [(3, 2), (4, 2), (4, 3)] {
        let t = st_maps(r, m).unwrap().1;
        let rep = woronowicz_verdict(&t, default_draw_cap(m, r), 8, &tol());
        ensure(
            rep.verdict == WoronowiczVerdict::ConditionFails && rep.gap() == m - r,
            || format!("T m={m} r={r}: {:?}, gap {}", rep.verdict, rep.gap()),
        )?;
    }
    parts.push("T gaps m-r".to_string());
    for (r, n) in [(2, 3), (2, 4), (3, 4)] {
        let s = st_maps(r, n).unwrap().0;
        let rep = woronowicz_verdict(&s, default_draw_cap(r, n), 8, &tol());
        ensure(
            rep.verdict == WoronowiczVerdict::NotUnitalOrIrreducibleButConditionHolds
                && rep.condition_holds
                && !rep.unital,
            || format!("S r={r} n={n}: {:?}", rep.verdict),
        )?;
        let oracle = block_commutant_basis(r, n);
        for x in &oracle {
            for i in 0..r {
                for j in 0..r {
                    let a = s.apply(&ComplexMatrix::unit(r, r, i, j)).unwrap();
                    let comm = &(x * &a) - &(&a * x);
                    ensure(comm.norm() < 1e-14, || {
                        "oracle basis fails to commute".into()
                    })?;
                }
            }
        }
        let dim = commutant_dimension(&s, &tol());
        ensure(dim == oracle.len() && dim == 1 + (n - r) * (n - r), || {
            format!("S r={r} n={n}: commutant {dim}, oracle {}", oracle.len())
        })?;
    }
    parts.push("S condition holds, not unital, commutant 1+(n-r)^2".to_string());
    Ok(parts.join("; "))
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let mut rng = stream_rng(9, 0);
    let mut cases = Vec::new();
    for (m, n) in [(2, 2), (2, 3), (3, 3), (3, 4)] {
        for r in 1..=m.min(n) {
            for _ in 0..2 {
                cases.push(matrix_of_rank(&mut rng, m, n, r));
            }
        }
    }
    for (k, s) in cases.iter().enumerate() {
        let first = pipeline_marciniak(s, None, 42, &tol()).map_err(|e| e.to_string())?;
        ensure(
            first.exposed && first.unstable_steps.is_empty() && first.consistent,
            || format!("case {k} ({}x{}): {}", s.rows(), s.cols(), first.summary()),
        )?;
        let second = pipeline_marciniak(s, None, 42, &tol()).map_err(|e| e.to_string())?;
        ensure(
            serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap(),
            || format!("case {k} differs between runs"),
        )?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(600), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} inputs exposed, deterministic; {elapsed:.2?}",
        cases.len()
    ))
}

fn criterion_10() -> Check {
    let mut rng = stream_rng(10, 0);
    let opts = MinimizerOptions::default();
    let mut worst = f64::INFINITY;
    for k in 0..10 {
        let m = 2 + k % 2;
        let n = 2 + (k / 2) % 2;
        let mut phi = MapRep::ad(&gaussian_matrix(&mut rng, m, n));
        phi = phi
            .add(&MapRep::ad_transpose(&gaussian_matrix(&mut rng, m, n)))
            .unwrap();
        phi = phi
            .add(&MapRep::ad(&matrix_of_rank(&mut rng, m, n, 1)).scale(0.5))
            .unwrap();
        let verdict = is_positive_map(&phi, &opts, &tol()).unwrap();
        ensure(verdict.member, || {
            format!("map {k} failed the positivity test")
        })?;
        for _ in 0..50 {
            let xi = unit_vector(&mut rng, m);
            let eta = unit_vector(&mut rng, n);
            let p = pairing_maps(&MapRep::ad(&ComplexMatrix::outer(&xi, &eta)), &phi).unwrap();
            worst = worst.min(p.re);
            ensure(p.re >= -1e-9, || format!("pairing {} for map {k}", p.re))?;
        }
    }
    for _ in 0..100 {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let phi = MapRep::from_choi(m, n, gaussian_matrix(&mut rng, m * n, m * n)).unwrap();
        let back = flip(&flip(phi.choi(), m, n).unwrap(), n, m).unwrap();
        ensure(&back == phi.choi(), || {
            "flip∘flip differs from the identity".into()
        })?;
        let a = gaussian_matrix(&mut rng, m, m);
        let b = gaussian_matrix(&mut rng, n, n);
        let lhs = pairing(&a, &phi.adjoint().apply(&b).unwrap()).unwrap();
        let rhs = pairing(&phi.apply(&a).unwrap(), &b).unwrap();
        ensure((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()), || {
            format!("adjoint identity off by {:e}", (lhs - rhs).norm())
        })?;
    }
    Ok(format!(
        "10 positive maps, 500 pairings (min {worst:.3e}); flip involution and adjoint identity on 100 triples"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Choi fidelity", criterion_1),
        ("Choi pairing identity", criterion_2),
        ("closed form vs minimization vs grid", criterion_3),
        ("pairing formula for the special form", criterion_4),
        ("kernel and N dimension formulas", criterion_5),
        ("explicit families span N", criterion_6),
        ("exposedness certificates", criterion_7),
        ("Woronowicz verdicts", criterion_8),
        ("pipeline end to end", criterion_9),
        ("duality properties", criterion_10),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {id:>2} {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
