//! `commspec` command-line front end.
//!
//! Exit status: 0 on success, 1 when `verify` records violations, 2 for
//! malformed or invalid input, 3 for numerical failures. The worker thread
//! count follows `RAYON_NUM_THREADS`; results do not depend on it.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commspec::criterion::{commutator_membership, CriterionInput, CriterionOptions};
use commspec::cutoffs::CutoffPair;
use commspec::functionals::FunctionalReport;
use commspec::ideals::{check_geometric_stability, IdealSpec, SpectrumSource, DEFAULT_PREFIX};
use commspec::io::{
    read_input, singular_model, to_json, write_cesaro_table, write_stability_table, CriterionDoc,
    CutoffDoc, Document, FunctionalDoc, InputDocument, SpectrumDoc, StabilityDoc,
};
use commspec::spectral::{eigenvalue_sequence, singular_sequence};
use commspec::verify::{run_suite, SuiteConfig, SuiteName, SuiteReport, DEFAULT_NODES};
use commspec::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "commspec",
    version,
    about = "Spectral tests for commutator subspaces of operator ideals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Io {
    /// Input JSON: a matrix `{"n", "entries"}` or a spectrum with a `kind`.
    #[arg(short, long)]
    input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues in canonical order and singular values of a matrix.
    Spectrum(Io),
    /// The threshold functionals nu, mu, chi and chi_phi.
    Functional(Io),
    /// Constants of the shipped cutoff pair and the subharmonicity check of h.
    CutoffReport {
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long, default_value_t = 0.5)]
        r_min: f64,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cesaro-mean membership test for the commutator subspace of an ideal.
    Criterion {
        #[command(flatten)]
        io: Io,
        /// `schatten:p=<v>` or `weaklp:p=<v>`.
        #[arg(long)]
        ideal: IdealSpec,
        /// Terms generated for decay laws.
        #[arg(long, default_value_t = DEFAULT_PREFIX)]
        prefix: usize,
        /// Terms of a decay law used for the finite witness model.
        #[arg(long, default_value_t = 200)]
        witness_len: usize,
        /// CSV of `(n, c_n, u_n)`.
        #[arg(long)]
        emit_table: Option<PathBuf>,
    },
    /// Geometric means of the singular values and their dyadic envelope bound.
    Stability {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        ideal: IdealSpec,
        #[arg(long, default_value_t = 100_000)]
        n_max: usize,
        /// CSV of `(n, s_n, t_n, u_n)`.
        #[arg(long)]
        emit_table: Option<PathBuf>,
    },
    /// Randomized inequality suite; `all` runs every non-mutant suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        max_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative slack; each suite has its own default.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Quadrature nodes for circle means.
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
        /// Report file; a one-line summary goes to standard output instead.
        #[arg(long, short = 'o', visible_alias = "output")]
        json: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct SuiteBatch {
    reports: Vec<SuiteReport>,
}

fn emit<T: Serialize>(output: Option<&Path>, command: &str, body: T) -> Result<()> {
    let text = to_json(&Document::new(command, body))?;
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Spectrum(io) => {
            let InputDocument::Matrix(m) = read_input(&io.input)? else {
                return Err(Error::Malformed(
                    "spectrum expects a matrix document".into(),
                ));
            };
            let lambda = eigenvalue_sequence(&m)?;
            let singular = singular_sequence(&m)?;
            emit(
                io.output.as_deref(),
                "spectrum",
                SpectrumDoc::new(&m, &lambda, &singular),
            )?;
        }
        Command::Functional(io) => {
            let lambda = match read_input(&io.input)? {
                InputDocument::Matrix(m) => eigenvalue_sequence(&m)?,
                InputDocument::Spectrum(SpectrumSource::Finite(lambda)) => lambda,
                InputDocument::Spectrum(_) => {
                    return Err(Error::Malformed(
                        "functional expects a matrix or a finite spectrum".into(),
                    ))
                }
            };
            let report = FunctionalReport::new(&lambda, &CutoffPair::new()?)?;
            emit(
                io.output.as_deref(),
                "functional",
                FunctionalDoc::from(&report),
            )?;
        }
        Command::CutoffReport {
            grid,
            r_min,
            r_max,
            output,
        } => {
            let doc = CutoffDoc::new(&CutoffPair::new()?, grid, r_min, r_max)?;
            emit(output.as_deref(), "cutoff-report", doc)?;
        }
        Command::Criterion {
            io,
            ideal,
            prefix,
            witness_len,
            emit_table,
        } => {
            let input = match read_input(&io.input)? {
                InputDocument::Matrix(m) => CriterionInput::Matrix(m),
                InputDocument::Spectrum(source) => CriterionInput::Spectrum(source),
            };
            let options = CriterionOptions {
                prefix_len: prefix,
                witness_len,
            };
            let report = commutator_membership(&input, &ideal, &CutoffPair::new()?, options)?;
            if let Some(path) = &emit_table {
                write_cesaro_table(path, &report)?;
            }
            emit(
                io.output.as_deref(),
                "criterion",
                CriterionDoc::from(&report),
            )?;
        }
        Command::Stability {
            io,
            ideal,
            n_max,
            emit_table,
        } => {
            let s = match read_input(&io.input)? {
                InputDocument::Matrix(m) => singular_sequence(&m)?,
                InputDocument::Spectrum(source) => singular_model(&source)?,
            };
            let report = check_geometric_stability(&s, &ideal, n_max)?;
            if let Some(path) = &emit_table {
                write_stability_table(path, &report)?;
            }
            emit(
                io.output.as_deref(),
                "stability",
                StabilityDoc::new(&ideal.to_string(), &report),
            )?;
        }
        Command::Verify {
            suite,
            trials,
            max_dim,
            seed,
            tolerance,
            nodes,
            json,
        } => {
            let names: Vec<String> = if suite == "all" {
                SuiteName::all()
                    .into_iter()
                    .filter(|name| !name.mutant)
                    .map(|name| name.to_string())
                    .collect()
            } else {
                vec![suite]
            };
            let mut reports = Vec::with_capacity(names.len());
            for name in &names {
                let mut config = SuiteConfig::new(name, trials, max_dim, seed)?;
                config.tolerance = tolerance;
                config.nodes = nodes;
                reports.push(run_suite(&config)?);
            }
            let failed = reports.iter().any(|r| !r.passed());
            if json.is_some() {
                for r in &reports {
                    println!(
                        "{}: {} violations in {} trials ({} informative)",
                        r.suite, r.violation_count, r.trials, r.informative_trials
                    );
                }
            }
            match <[SuiteReport; 1]>::try_from(reports) {
                Ok([report]) => emit(json.as_deref(), "verify", report)?,
                Err(reports) => emit(json.as_deref(), "verify", SuiteBatch { reports })?,
            }
            if failed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoConvergence { .. } | Error::Quadrature { .. } | Error::Invariant(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("commspec: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
