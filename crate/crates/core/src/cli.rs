//! Command-line front end. Every subcommand reads JSON and writes one JSON report.
//!
//! Exit codes: 0 success, 1 domain error, 2 I/O or parse error.

use crate::cone_model::{degree, isolated_rays, simplicity_partition, SpectrahedralCone};
use crate::constructions::{build, ConeExpr};
use crate::decompose::carath_decompose;
use crate::error::Error;
use crate::isomorph::{codim1_signature, cones_isomorphic, rank1_complete, rank1_complete_signs, reconstruct_isomorphism, PartialMatrix};
use crate::pencil_struct::{classify_small, codim2_structure, pencil_decompose, Pencil};
use crate::qcqp_relax::{certify_exactness, solve_relaxation, CertifyOptions, QcqpProblem, SdpStatus};
use crate::symlin::SymMatrix;
use clap::{Parser, Subcommand};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::{Read, Write};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "rog", version, about = "Rank-one-generated spectrahedral cones")]
pub struct Cli {
    /// Seed for every randomized routine.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a cone from a construction tree.
    Build {
        /// Construction tree JSON (`-` for stdin).
        #[arg(long)]
        expr: PathBuf,
    },
    /// Dimension, degree, simplicity and isolated rays of a cone.
    Analyze { cone: PathBuf },
    /// Split a cone element into rank-one atoms.
    Decompose {
        cone: PathBuf,
        /// Symmetric matrix as nested rows.
        x: PathBuf,
    },
    /// Decide isomorphism of two cones, or recover the map between two generator lists.
    Iso {
        first: PathBuf,
        second: PathBuf,
        /// Inputs are generator lists (arrays of vectors) instead of cones.
        #[arg(long)]
        lists: bool,
    },
    /// Label a cone of degree at most four.
    Classify { cone: PathBuf },
    /// Solve the relaxation of a QCQP and certify exactness.
    Qcqp {
        problem: PathBuf,
        /// Rank-one samples used when looking for a relaxation gap.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Rank-one completion of a partially specified matrix.
    Complete {
        partial: PathBuf,
        /// All specified entries are ±1; report the sign completion.
        #[arg(long)]
        signs: bool,
    },
    /// Simultaneous block structure of a pair of forms.
    Pencil {
        pencil: PathBuf,
        /// Report the codimension-two case analysis instead.
        #[arg(long)]
        codim2: bool,
    },
}

#[derive(Debug)]
pub enum Failure {
    /// Valid input the mathematics rejects; carries an optional report.
    Domain(String, Option<Value>),
    Input(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Domain(..) => 1,
            Failure::Input(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) => Failure::Input(e.to_string()),
            other => Failure::Domain(other.to_string(), None),
        }
    }
}

fn read_text(path: &PathBuf) -> Result<String, Failure> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(s)
}

/// Messages serde itself produces for malformed documents; anything else raised while
/// decoding comes from a validating constructor and is a domain error.
const STRUCTURAL: [&str; 7] =
    ["invalid type", "missing field", "unknown field", "unknown variant", "invalid length", "invalid value", "duplicate field"];

fn read_json<T: DeserializeOwned>(path: &PathBuf) -> Result<T, Failure> {
    let text = read_text(path)?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_value(raw).map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        if STRUCTURAL.iter().any(|p| e.to_string().starts_with(p)) {
            Failure::Input(msg)
        } else {
            Failure::Domain(msg, None)
        }
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Input(e.to_string()))
}

fn analyze(k: &SpectrahedralCone) -> Result<Value, Failure> {
    let deg = degree(k).ok();
    let parts = simplicity_partition(k).ok();
    let isolated = isolated_rays(k).ok();
    Ok(json!({
        "n": k.n(),
        "dim": k.dimension(),
        "degree": deg,
        "simple": parts.as_ref().map(|p| p.len() == 1),
        "partition": parts.as_ref().map(|p| p.iter().map(|h| h.dim()).collect::<Vec<_>>()),
        "isolated_rays": isolated,
        "generators": k.generators().len(),
        "certificate_complete": k.certificate_complete(),
        "codim1_signature": codim1_signature(k).map(|(p, q, z)| [p, q, z]),
    }))
}

/// Runs one parsed command and returns its report.
pub fn execute(cli: &Cli) -> Result<Value, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match &cli.command {
        Command::Build { expr } => {
            let e: ConeExpr = read_json(expr)?;
            to_value(&build(&e)?)
        }
        Command::Analyze { cone } => analyze(&read_json(cone)?),
        Command::Decompose { cone, x } => {
            let k: SpectrahedralCone = read_json(cone)?;
            let x: SymMatrix = read_json(x)?;
            let d = carath_decompose(&k, &x)?;
            let mut v = to_value(&d)?;
            v["count"] = json!(d.len());
            Ok(v)
        }
        Command::Iso { first, second, lists } => {
            if *lists {
                let a: Vec<Vec<f64>> = read_json(first)?;
                let b: Vec<Vec<f64>> = read_json(second)?;
                let xs: Vec<DVector<f64>> = a.into_iter().map(DVector::from_vec).collect();
                let ys: Vec<DVector<f64>> = b.into_iter().map(DVector::from_vec).collect();
                to_value(&reconstruct_isomorphism(&xs, &ys)?)
            } else {
                to_value(&cones_isomorphic(&read_json(first)?, &read_json(second)?)?)
            }
        }
        Command::Classify { cone } => to_value(&classify_small(&read_json(cone)?)?),
        Command::Qcqp { problem, samples } => {
            let p: QcqpProblem = read_json(problem)?;
            let sol = solve_relaxation(&p)?;
            let cert = if sol.status == SdpStatus::Optimal {
                Some(certify_exactness(&p, CertifyOptions { samples: *samples }, &mut rng)?)
            } else {
                None
            };
            Ok(json!({ "relaxation": to_value(&sol)?, "certificate": to_value(&cert)? }))
        }
        Command::Complete { partial, signs } => {
            let a: PartialMatrix = read_json(partial)?;
            let c = if *signs { rank1_complete_signs(&a)? } else { rank1_complete(&a) };
            let v = to_value(&c)?;
            if c.is_feasible() {
                Ok(v)
            } else {
                Err(Failure::Domain("no rank-one completion".into(), Some(v)))
            }
        }
        Command::Pencil { pencil, codim2 } => {
            let p: Pencil = read_json(pencil)?;
            if *codim2 {
                to_value(&codim2_structure(&p.q1, &p.q2, &mut rng)?)
            } else {
                to_value(&pencil_decompose(&p, &mut rng)?)
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Failure::Input(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string())),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|v| emit(&cli.out, &v));
    match result {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Domain(msg, report) => {
                    if let Some(v) = report {
                        let _ = emit(&cli.out, v);
                    }
                    eprintln!("rog: {msg}");
                }
                Failure::Input(msg) => eprintln!("rog: {msg}"),
            }
            f.code()
        }
    }
}
