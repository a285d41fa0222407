//! Command-line workbench for positive maps between matrix algebras.

pub mod io;
pub mod pipeline;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use posmap::bidual::{default_budget, stable_bidual_dimension};
use posmap::cone::{
    block_positive_special, is_block_positive, is_completely_positive, is_positive_map,
    is_superpositive_2x2, Certificate, ConeMethod, ConeVerdict, MinimizerOptions,
    SpecialWitnessForm,
};
use posmap::maps::{pairing_maps, svd_reduce};
use posmap::woronowicz::{default_draw_cap, woronowicz_verdict};
use posmap::{PosmapError, Tolerance, C64};
use serde_json::{json, Value};
use thiserror::Error;

use crate::io::{parse_json, read_input, ApplyInput, MapSpec, MatrixJson, PairInput};
use crate::pipeline::{pipeline_marciniak, verdict_name, BidualStep, WoronowiczStep};
use crate::report::{complex_json, digest, fmt_complex, fmt_matrix, fmt_num, vector_json, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("{0}")]
    Input(#[from] PosmapError),
    #[error("numerical instability: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "posmap",
    version,
    about = "Positive maps between matrix algebras"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Input JSON file; standard input when omitted.
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    /// Write the machine-readable report here.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    #[arg(long, global = true, env = "POSMAP_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Sample budget (bi-dual probes) or draw cap (Woronowicz sampling).
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[arg(long = "tol-rank", global = true, default_value_t = 1e-9)]
    pub tol_rank: f64,
    #[arg(long = "tol-entry", global = true, default_value_t = 1e-9)]
    pub tol_entry: f64,
    /// Restarts for the product-vector minimization.
    #[arg(long, global = true, default_value_t = 64)]
    pub restarts: usize,
    /// Leave timing out of the report so reruns are byte-identical.
    #[arg(long = "no-timing", global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConeArg {
    Positive,
    Cp,
    Sp,
    Blockpos,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Choi matrix of a map.
    Choi,
    /// Apply a map to a matrix: input {"map": ..., "matrix": ...}.
    Apply,
    /// Pair two maps: input {"left": ..., "right": ...}.
    Pair,
    /// Cone membership of a map, or of the 4x4 special form via --special.
    Check {
        #[arg(long, value_enum)]
        cone: ConeArg,
        /// a,b,alpha,beta for the special form (real values).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        special: Option<Vec<f64>>,
    },
    /// Dimension of the sampled bi-dual face.
    Bidual,
    /// Woronowicz kernel criterion.
    Woronowicz,
    /// SVD reduction of a matrix s to a partial identity.
    Reduce,
    /// Exposedness chain for Ad_s and Ad_s o t.
    PipelineMarciniak,
}

struct Outcome {
    text: String,
    results: Value,
    failure: Option<CliError>,
}

impl Outcome {
    fn ok(text: String, results: Value) -> Self {
        Outcome {
            text,
            results,
            failure: None,
        }
    }
}

fn method_name(m: ConeMethod) -> &'static str {
    match m {
        ConeMethod::ClosedForm => "closed_form",
        ConeMethod::AlternatingMinimization => "alternating_minimization",
        ConeMethod::PsdCheck => "psd_check",
        ConeMethod::PptCheck => "ppt_check",
    }
}

fn verdict_outcome(cone: &str, v: &ConeVerdict) -> Outcome {
    let certificate = match &v.certificate {
        Some(Certificate::ProductVector { xi, eta }) => {
            json!({"product_vector": {"xi": vector_json(xi), "eta": vector_json(eta)}})
        }
        Some(Certificate::Eigenvector(e)) => json!({"eigenvector": vector_json(e)}),
        None => Value::Null,
    };
    let status = if v.member { "member" } else { "not member" };
    Outcome::ok(
        format!("{status}, margin {}", fmt_num(v.margin)),
        json!({
            "cone": cone,
            "member": v.member,
            "margin": v.margin,
            "method": method_name(v.method),
            "certificate": certificate,
        }),
    )
}

fn cone_name(c: ConeArg) -> &'static str {
    match c {
        ConeArg::Positive => "positive",
        ConeArg::Cp => "cp",
        ConeArg::Sp => "sp",
        ConeArg::Blockpos => "blockpos",
    }
}

fn execute(cli: &Cli, input: &str, tol: &Tolerance) -> Result<Outcome, CliError> {
    let map = || -> Result<_, CliError> { parse_json::<MapSpec>(input)?.resolve() };
    Ok(match &cli.command {
        Command::Choi => {
            let phi = map()?;
            let (m, n) = phi.dims();
            Outcome::ok(
                format!("Choi matrix of M_{m} -> M_{n}:\n{}", fmt_matrix(phi.choi())),
                json!({"dims": [m, n], "choi": MatrixJson::from(phi.choi())}),
            )
        }
        Command::Apply => {
            let req: ApplyInput = parse_json(input)?;
            let image = req.map.resolve()?.apply(&req.matrix.to_matrix()?)?;
            Outcome::ok(
                fmt_matrix(&image),
                json!({"image": MatrixJson::from(&image)}),
            )
        }
        Command::Pair => {
            let req: PairInput = parse_json(input)?;
            let p = pairing_maps(&req.left.resolve()?, &req.right.resolve()?)?;
            Outcome::ok(
                format!("pairing = {}", fmt_complex(p)),
                json!({"pairing": complex_json(p)}),
            )
        }
        Command::Check { cone, special } => {
            let opts = MinimizerOptions {
                restarts: cli.restarts,
                seed: cli.seed,
                ..MinimizerOptions::default()
            };
            let name = cone_name(*cone);
            match (cone, special) {
                (ConeArg::Blockpos, Some(values)) => {
                    let [a, b, alpha, beta] = values[..] else {
                        return Err(CliError::Usage(format!(
                            "--special takes a,b,alpha,beta; got {} values",
                            values.len()
                        )));
                    };
                    let w =
                        SpecialWitnessForm::new(a, b, C64::new(alpha, 0.0), C64::new(beta, 0.0))?;
                    verdict_outcome(name, &block_positive_special(&w, tol))
                }
                (_, Some(_)) => {
                    return Err(CliError::Usage("--special requires --cone blockpos".into()))
                }
                (ConeArg::Positive, None) => {
                    verdict_outcome(name, &is_positive_map(&map()?, &opts, tol)?)
                }
                (ConeArg::Blockpos, None) => {
                    let phi = map()?;
                    let (m, n) = phi.dims();
                    verdict_outcome(name, &is_block_positive(phi.choi(), m, n, &opts, tol)?)
                }
                (ConeArg::Cp, None) => verdict_outcome(name, &is_completely_positive(&map()?, tol)),
                (ConeArg::Sp, None) => match is_superpositive_2x2(&map()?, tol) {
                    Ok(v) => verdict_outcome(name, &v),
                    Err(PosmapError::UnsupportedDimension { m, n, reason }) => Outcome::ok(
                        format!("unsupported: {reason}"),
                        json!({"cone": name, "status": "unsupported", "dims": [m, n], "reason": reason}),
                    ),
                    Err(e) => return Err(e.into()),
                },
            }
        }
        Command::Bidual => {
            let phi = map()?;
            let (m, n) = phi.dims();
            let budget = cli.budget.unwrap_or_else(|| default_budget(m, n));
            let stable = stable_bidual_dimension(&phi, budget, cli.seed, tol)?;
            let step = BidualStep::from_stable("input", budget, &stable);
            let certificate = if step.certified() {
                format!("exposed (numerical certificate at budget {budget})")
            } else {
                "not certified".to_string()
            };
            let mut text = format!(
                "bidual dimension {} (budget {budget}, {} samples; {} at budget {})",
                step.dimension,
                step.samples,
                step.dimension_at_double_budget,
                2 * budget
            );
            if step.empty_variety {
                text.push_str("\nno zero of the Choi matrix found: the face is the whole space");
            }
            text.push('\n');
            text.push_str(&certificate);
            let failure = (!step.stable).then(|| {
                CliError::Numerical(format!(
                    "bidual dimension {} at budget {budget} but {} at budget {}",
                    step.dimension,
                    step.dimension_at_double_budget,
                    2 * budget
                ))
            });
            Outcome {
                text,
                results: json!({"bidual": step, "certificate": certificate}),
                failure,
            }
        }
        Command::Woronowicz => {
            let phi = map()?;
            let (m, n) = phi.dims();
            let cap = cli.budget.unwrap_or_else(|| default_draw_cap(m, n));
            let report = woronowicz_verdict(&phi, cap, cli.seed, tol);
            let step = WoronowiczStep::new("input", (m, n), &report);
            Outcome::ok(
                format!(
                    "dim_N = {}, dim_ker = {}, unital {}, commutant {}, verdict {}",
                    report.dim_n,
                    report.dim_ker_hat,
                    report.unital,
                    report.commutant_dim,
                    verdict_name(report.verdict)
                ),
                json!({"woronowicz": step, "draws": report.draws, "kernel_residual": report.kernel_residual}),
            )
        }
        Command::Reduce => {
            let s = parse_json::<MatrixJson>(input)?.to_matrix()?;
            let red = svd_reduce(&s, tol)?;
            let residual = (&red.reconstruct() - &s).norm();
            Outcome::ok(
                format!(
                    "rank {}, singular values [{}], reconstruction residual {:.2e}\nsigma:\n{}",
                    red.rank,
                    red.singular_values
                        .iter()
                        .map(|x| fmt_num(*x))
                        .collect::<Vec<_>>()
                        .join(", "),
                    residual,
                    fmt_matrix(&red.sigma)
                ),
                json!({
                    "rank": red.rank,
                    "singular_values": red.singular_values,
                    "u": MatrixJson::from(&red.u),
                    "sigma": MatrixJson::from(&red.sigma),
                    "v": MatrixJson::from(&red.v),
                    "reconstruction_residual": residual,
                }),
            )
        }
        Command::PipelineMarciniak => {
            let s = parse_json::<MatrixJson>(input)?.to_matrix()?;
            let report = pipeline_marciniak(&s, cli.budget, cli.seed, tol)?;
            let failure = (!report.unstable_steps.is_empty()).then(|| {
                CliError::Numerical(format!(
                    "bi-dual dimension changed between budgets at {}",
                    report.unstable_steps.join(", ")
                ))
            });
            Outcome {
                text: report.summary(),
                results: serde_json::to_value(&report).expect("reports serialize"),
                failure,
            }
        }
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Choi => "choi",
        Command::Apply => "apply",
        Command::Pair => "pair",
        Command::Check { .. } => "check",
        Command::Bidual => "bidual",
        Command::Woronowicz => "woronowicz",
        Command::Reduce => "reduce",
        Command::PipelineMarciniak => "pipeline-marciniak",
    }
}

fn run_cli(cli: &Cli) -> Result<(), CliError> {
    let tol = Tolerance {
        rank_tol: cli.tol_rank,
        entry_tol: cli.tol_entry,
    };
    let (input, extra) = match &cli.command {
        Command::Check {
            cone,
            special: Some(values),
        } => (String::new(), format!("{}:{values:?}", cone_name(*cone))),
        Command::Check { cone, .. } => (
            read_input(cli.input.as_deref())?,
            cone_name(*cone).to_string(),
        ),
        _ => (read_input(cli.input.as_deref())?, String::new()),
    };
    let start = Instant::now();
    let outcome = execute(cli, &input, &tol)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    println!("{}", outcome.text);
    if let Some(path) = &cli.json {
        let name = command_name(&cli.command);
        Report {
            command: name.to_string(),
            inputs_digest: digest(name, &extra, &input),
            results: outcome.results,
            seed: cli.seed,
            tolerances: (&tol).into(),
            timing_ms: (!cli.no_timing).then_some(elapsed),
        }
        .write(path)?;
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
