//! `delta-forge`: command-line front end for the delta-forge library.
//!
//! Every subcommand writes one JSON document to standard output (or `--out`).
//! Exit codes: 0 success, 1 mathematical failure (a counterexample or an
//! inconsistent system), 2 input error, 3 precision exhausted.

mod commands;
mod payload;
mod ring;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use delta_forge::sampling::DEFAULT_SEED;
use delta_forge::{Error, Result};
use serde_json::{json, Value};

use ring::RingArgs;

#[derive(Debug, Parser)]
#[command(name = "delta-forge", version, about = "p-derivations, arithmetic jets and delta-cocycles on GL_n")]
pub struct Cli {
    #[command(flatten)]
    pub ring: RingArgs,
    /// Sampling seed; overrides DELTA_FORGE_SEED (default 1729)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the result document here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    /// G_a -> G_a, parameters {"lambda": [...]}
    Ga,
    /// G_m -> G_a, parameters {"lambda": [...]}
    Gm,
    /// The series psi on units; no parameters
    Psi,
    /// a -> mu (1 - a^s), parameters {"mu": elem, "s": int}
    Twisted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SubgroupArg {
    Torus,
    #[value(name = "sl_n", alias = "sl-n")]
    SlN,
    Borel,
    ConjugatedTorus,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Describe the configured ring
    RingInfo,
    /// Apply delta `--order` times to an element
    DeltaEval {
        /// Element (JSON); integer literals are exact
        x: String,
        #[arg(long, default_value_t = 1)]
        order: u32,
    },
    /// Teichmueller lift of a residue in F_{p^m}
    Teich {
        /// Residue: an integer, or m coefficients low-to-high
        residue: String,
    },
    /// Evaluate psi at a unit
    Psi {
        a: String,
        /// Also list the series terms that were summed
        #[arg(long)]
        terms: bool,
    },
    /// Prolong a jet polynomial `--order` times
    JetProlong {
        /// Text such as "x0^2 + 3*x1'" or the serialized JSON form
        poly: String,
        #[arg(long, default_value_t = 1)]
        order: usize,
    },
    /// The jet point nabla^level(a), optionally evaluating a polynomial there
    JetNabla {
        /// Base point: a JSON list of elements, or a single element
        a: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Polynomial to evaluate at the jet point
        #[arg(long)]
        eval: Option<String>,
    },
    /// Check a delta-homomorphism family against its group law
    HomCheck {
        #[arg(long, value_enum)]
        family: Family,
        /// Parameter object (JSON); not needed for psi
        params: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Generate a random classified cocycle {"omega", "v"}
    CocycleMake {
        #[arg(long)]
        n: usize,
        /// omega gets coefficients lambda_0..lambda_degree
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Use omega = 0, leaving a pure coboundary
        #[arg(long)]
        no_omega: bool,
    },
    /// Check the cocycle law on seeded random pairs
    CocycleCheck {
        /// Map description (JSON), e.g. the output of cocycle-make
        map: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Recover (omega, v) from a classified cocycle
    CocycleRecover {
        map: String,
        #[arg(long)]
        n: Option<usize>,
        /// Fresh samples for the roundtrip check
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Number of seeded units at which omega is reported
        #[arg(long, default_value_t = 4)]
        omega_points: usize,
    },
    /// Check that f maps a subgroup into its Lie algebra
    CoherenceCheck {
        map: String,
        #[arg(long, value_enum)]
        subgroup: SubgroupArg,
        /// Constant conjugator for conjugated-torus (JSON matrix); random if omitted
        #[arg(long)]
        u: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Write a matrix as a word of permutations and s-blocks
    Decompose {
        /// Matrix (JSON): {"n", "rows"} or a bare list of rows
        matrix: String,
        /// Permute rows and columns first when a trailing minor is not a unit
        #[arg(long)]
        precondition: bool,
    },
    /// Multiply out a decomposition word
    Reconstruct { word: String },
    /// Run the acceptance suite
    Selftest {
        #[arg(long, value_enum, default_value_t = ProfileArg::Quick)]
        profile: ProfileArg,
    },
}

/// Outcome of a subcommand: the document and whether it reports a failure.
pub struct Outcome {
    pub doc: Value,
    pub pass: bool,
}

impl Outcome {
    pub fn ok(doc: Value) -> Self {
        Outcome { doc, pass: true }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("DELTA_FORGE_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("DELTA_FORGE_SEED={text:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn root_cause(e: &Error) -> &Error {
    match e {
        Error::Sample { source, .. } => root_cause(source),
        other => other,
    }
}

fn exit_code(e: &Error) -> u8 {
    match root_cause(e) {
        Error::PrecisionExhausted { .. } | Error::SingularPivot { .. } => 3,
        Error::InconsistentSystem(_) | Error::SearchExhausted { .. } => 1,
        _ => 2,
    }
}

fn emit(doc: &Value, out: Option<&PathBuf>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(doc).expect("documents serialize") + "\n";
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve_seed(cli.seed).and_then(|seed| commands::run(&cli, seed));
    let (doc, code) = match result {
        Ok(outcome) => (outcome.doc, if outcome.pass { 0 } else { 1 }),
        Err(e) => {
            let cause = root_cause(&e);
            eprintln!("delta-forge: {e}");
            (json!({"error": cause.name(), "message": e.to_string()}), exit_code(&e))
        }
    };
    if let Err(e) = emit(&doc, cli.out.as_ref()) {
        eprintln!("delta-forge: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
