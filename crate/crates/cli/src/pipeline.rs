//! The exposedness chain for `Ad_s` and `Ad_s ∘ t`: reduce `s` to a partial
//! identity, certify the reduced map, check the Woronowicz hypotheses for the
//! pieces, and certify `Ad_s` and `Ad_s ∘ t` directly.

use posmap::bidual::{default_budget, stable_bidual_dimension, StableBidual};
use posmap::maps::{st_maps, svd_reduce};
use posmap::woronowicz::{
    default_draw_cap, woronowicz_verdict, WoronowiczReport, WoronowiczVerdict,
};
use posmap::{ComplexMatrix, MapRep, PosmapError, Tolerance};
use serde::Serialize;

use crate::io::MatrixJson;

#[derive(Debug, Clone, Serialize)]
pub struct ReductionStep {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub reconstruction_residual: f64,
    pub u: MatrixJson,
    pub sigma: MatrixJson,
    pub v: MatrixJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct BidualStep {
    pub map: String,
    pub budget: usize,
    pub dimension: usize,
    pub dimension_at_double_budget: usize,
    pub samples: usize,
    pub empty_variety: bool,
    pub stable: bool,
}

impl BidualStep {
    pub fn from_stable(map: &str, budget: usize, s: &StableBidual) -> Self {
        BidualStep {
            map: map.to_string(),
            budget,
            dimension: s.at_budget.dimension,
            dimension_at_double_budget: s.at_double.dimension,
            samples: s.at_budget.sample_count,
            empty_variety: s.at_budget.empty_variety,
            stable: s.stable(),
        }
    }

    pub fn certified(&self) -> bool {
        self.stable && self.dimension == 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WoronowiczStep {
    pub map: String,
    pub dims: (usize, usize),
    pub dim_ker_hat: usize,
    pub dim_n: usize,
    pub condition_holds: bool,
    pub unital: bool,
    pub commutant_dim: usize,
    pub irreducible: bool,
    pub verdict: String,
    pub stabilized: bool,
}

pub fn verdict_name(v: WoronowiczVerdict) -> &'static str {
    match v {
        WoronowiczVerdict::ExposedByTheorem => "exposed_by_theorem",
        WoronowiczVerdict::ConditionFails => "condition_fails",
        WoronowiczVerdict::NotUnitalOrIrreducibleButConditionHolds => {
            "not_unital_or_irreducible_but_condition_holds"
        }
    }
}

impl WoronowiczStep {
    pub fn new(map: &str, dims: (usize, usize), r: &WoronowiczReport) -> Self {
        WoronowiczStep {
            map: map.to_string(),
            dims,
            dim_ker_hat: r.dim_ker_hat,
            dim_n: r.dim_n,
            condition_holds: r.condition_holds,
            unital: r.unital,
            commutant_dim: r.commutant_dim,
            irreducible: r.irreducible,
            verdict: verdict_name(r.verdict).to_string(),
            stabilized: r.stabilized,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub shape: (usize, usize),
    pub reduction: ReductionStep,
    pub reduced_bidual: BidualStep,
    pub identity_woronowicz: WoronowiczStep,
    pub embed_s: WoronowiczStep,
    pub compress_t: WoronowiczStep,
    pub ad_s_bidual: BidualStep,
    pub ad_s_transpose_bidual: BidualStep,
    /// The direct and reduced bi-dual dimensions agree.
    pub consistent: bool,
    pub exposed: bool,
    pub verdict: String,
    pub unstable_steps: Vec<String>,
}

fn bidual_step(
    name: &str,
    phi: &MapRep,
    budget: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<BidualStep, PosmapError> {
    let stable = stable_bidual_dimension(phi, budget, seed, tol)?;
    Ok(BidualStep::from_stable(name, budget, &stable))
}

/// Runs the chain on a nonzero `m x n` matrix `s`. `budget` defaults to
/// `4 (mn)^2` zero-variety samples per bi-dual probe.
pub fn pipeline_marciniak(
    s: &ComplexMatrix,
    budget: Option<usize>,
    seed: u64,
    tol: &Tolerance,
) -> Result<PipelineReport, PosmapError> {
    let (m, n) = s.shape();
    let budget = budget.unwrap_or_else(|| default_budget(m, n));

    let red = svd_reduce(s, tol)?;
    let r = red.rank;
    let reduction = ReductionStep {
        rank: r,
        singular_values: red.singular_values.clone(),
        reconstruction_residual: (&red.reconstruct() - s).norm(),
        u: MatrixJson::from(&red.u),
        sigma: MatrixJson::from(&red.sigma),
        v: MatrixJson::from(&red.v),
    };

    let reduced_bidual = bidual_step("ad(sigma)", &MapRep::ad(&red.sigma), budget, seed, tol)?;

    let id = woronowicz_verdict(&MapRep::identity(r), default_draw_cap(r, r), seed, tol);
    let identity_woronowicz = WoronowiczStep::new("identity", (r, r), &id);

    let (embed, _) = st_maps(r, n)?;
    let (_, compress) = st_maps(r, m)?;
    let embed_s = WoronowiczStep::new(
        "embed_S",
        (r, n),
        &woronowicz_verdict(&embed, default_draw_cap(r, n), seed, tol),
    );
    let compress_t = WoronowiczStep::new(
        "compress_T",
        (m, r),
        &woronowicz_verdict(&compress, default_draw_cap(m, r), seed, tol),
    );

    let ad_s_bidual = bidual_step("ad(s)", &MapRep::ad(s), budget, seed, tol)?;
    let ad_s_transpose_bidual =
        bidual_step("ad(s) o t", &MapRep::ad_transpose(s), budget, seed, tol)?;

    let unstable_steps: Vec<String> = [&reduced_bidual, &ad_s_bidual, &ad_s_transpose_bidual]
        .iter()
        .filter(|b| !b.stable)
        .map(|b| b.map.clone())
        .collect();
    let consistent = reduced_bidual.dimension == ad_s_bidual.dimension;
    let exposed = reduced_bidual.certified()
        && id.verdict == WoronowiczVerdict::ExposedByTheorem
        && ad_s_bidual.certified()
        && ad_s_transpose_bidual.certified();
    let verdict = if exposed {
        format!("exposed (numerical certificate at budget {budget})")
    } else {
        "not certified".to_string()
    };

    Ok(PipelineReport {
        shape: (m, n),
        reduction,
        reduced_bidual,
        identity_woronowicz,
        embed_s,
        compress_t,
        ad_s_bidual,
        ad_s_transpose_bidual,
        consistent,
        exposed,
        verdict,
        unstable_steps,
    })
}

impl PipelineReport {
    pub fn summary(&self) -> String {
        let mut out = Vec::new();
        out.push(format!(
            "(1) reduce: rank {}, reconstruction residual {:.2e}",
            self.reduction.rank, self.reduction.reconstruction_residual
        ));
        out.push(format!(
            "(2) bidual ad(sigma): dimension {} (stable: {})",
            self.reduced_bidual.dimension, self.reduced_bidual.stable
        ));
        out.push(format!(
            "(3) woronowicz identity_{}: {}",
            self.reduction.rank, self.identity_woronowicz.verdict
        ));
        for step in [&self.embed_s, &self.compress_t] {
            out.push(format!(
                "(4) {} {}x{}: unital {}, commutant {}, dim_N = {}, dim_ker = {}, {}",
                step.map,
                step.dims.0,
                step.dims.1,
                step.unital,
                step.commutant_dim,
                step.dim_n,
                step.dim_ker_hat,
                step.verdict
            ));
        }
        for step in [&self.ad_s_bidual, &self.ad_s_transpose_bidual] {
            out.push(format!(
                "(5) bidual {}: dimension {} (stable: {})",
                step.map, step.dimension, step.stable
            ));
        }
        out.push(format!("verdict: {}", self.verdict));
        out.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use posmap::maps::partial_identity;

    #[test]
    fn identity_two_is_exposed() {
        let report =
            pipeline_marciniak(&ComplexMatrix::identity(2), None, 42, &Tolerance::default())
                .unwrap();
        assert!(report.exposed);
        assert!(report.consistent);
        assert_eq!(report.reduced_bidual.dimension, 1);
        assert_eq!(report.identity_woronowicz.verdict, "exposed_by_theorem");
    }

    #[test]
    fn small_corner_reports_failing_condition_for_t() {
        let s = partial_identity(3, 3, 1);
        let report = pipeline_marciniak(&s, None, 42, &Tolerance::default()).unwrap();
        assert!(report.exposed);
        assert_eq!(report.compress_t.verdict, "condition_fails");
        assert!(report.compress_t.dim_ker_hat > report.compress_t.dim_n);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let zero = ComplexMatrix::zeros(2, 2);
        assert!(pipeline_marciniak(&zero, None, 42, &Tolerance::default()).is_err());
    }
}
