use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use mapcone::hakye::FamilyId;
use serde::Serialize;

use crate::verify::Mutation;

#[derive(Debug, Parser)]
#[command(
    name = "mapcone",
    version,
    about = "Positive maps on 3x3 matrices: Choi calculus, witnesses, local equivalence"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Flags override `MAPCONE_*` variables, which
/// override the defaults.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Write the JSON report here (atomically) in addition to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "MAPCONE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Restarts for the product-vector minimiser and the equivalence search.
    #[arg(long, global = true, default_value_t = 64)]
    pub restarts: usize,
    /// Tolerance on eigenvalues (PPT, witnesses, ranks).
    #[arg(
        long = "tol-eigen",
        global = true,
        env = "MAPCONE_TOL_EIGEN",
        default_value_t = 1e-9
    )]
    pub tol_eigen: f64,
    /// Tolerance for block positivity.
    #[arg(long = "tol-bp", global = true, default_value_t = 1e-8)]
    pub tol_bp: f64,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Choi matrix of the Ha–Kye map.
    Choi {
        #[arg(long)]
        t: f64,
    },
    /// Apply the Ha–Kye map to a 3x3 matrix.
    Apply {
        #[arg(long)]
        t: f64,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Minimise <x⊗y|C|x⊗y> over unit product vectors.
    Blockpos {
        /// 9x9 Choi matrix; defaults to the Ha–Kye map at `--t`.
        #[arg(long = "in", conflicts_with = "t", required_unless_present = "t")]
        input: Option<PathBuf>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Smallest eigenvalue of (id⊗Φ)(I⊗B)ρ(I⊗B)†.
    Witness {
        /// `hakye:<t>`, `identity` or `transpose`.
        #[arg(long)]
        phi: MapSpec,
        /// 3x3 matrix; identity when omitted.
        #[arg(long = "B")]
        b: Option<PathBuf>,
        #[arg(long)]
        rho: PathBuf,
    },
    /// Partial-transpose test of a 9x9 density matrix.
    Ppt {
        #[arg(long)]
        rho: PathBuf,
    },
    /// The four families on which F_t vanishes, with numerical checks.
    Singular {
        #[arg(long)]
        t: f64,
    },
    /// Kernel vector of the compression at a family member.
    Kernel {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        family: FamilyArg,
        /// Three phases, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0, 0.0], allow_hyphen_values = true)]
        phases: Vec<f64>,
    },
    /// Decide whether Φ_{t1} and Φ_{t2} are locally equivalent.
    LocalEquiv {
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: f64,
        /// Add the Levenberg–Marquardt search as corroboration.
        #[arg(long)]
        numeric: bool,
    },
    /// Classify a 3x3 matrix as monomial, proportional-row or generic.
    ModuliClassify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Draw a random separable state with `k` product terms.
    SampleSeparable {
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Run the full invariant battery.
    VerifyPaper {
        #[arg(long, hide = true)]
        mutate: Option<Mutation>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Choi { .. } => "choi",
            Command::Apply { .. } => "apply",
            Command::Blockpos { .. } => "blockpos",
            Command::Witness { .. } => "witness",
            Command::Ppt { .. } => "ppt",
            Command::Singular { .. } => "singular",
            Command::Kernel { .. } => "kernel",
            Command::LocalEquiv { .. } => "local-equiv",
            Command::ModuliClassify { .. } => "moduli-classify",
            Command::SampleSeparable { .. } => "sample-separable",
            Command::VerifyPaper { .. } => "verify-paper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSpec {
    Hakye { t: f64 },
    Identity,
    Transpose,
}

impl FromStr for MapSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(MapSpec::Identity),
            "transpose" => Ok(MapSpec::Transpose),
            _ => {
                let t = s.strip_prefix("hakye:").ok_or_else(|| {
                    format!("unknown map `{s}` (expected hakye:<t>, identity or transpose)")
                })?;
                t.parse()
                    .map(|t| MapSpec::Hakye { t })
                    .map_err(|e| format!("bad parameter in `{s}`: {e}"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FamilyArg(pub FamilyId);

impl FromStr for FamilyArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let id = match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "EQUAL_MODULI" | "EQUAL" => FamilyId::EqualModuli,
            "ZERO_1" => FamilyId::Zero1,
            "ZERO_2" => FamilyId::Zero2,
            "ZERO_3" => FamilyId::Zero3,
            _ => {
                return Err(format!(
                    "unknown family `{s}` (EQUAL_MODULI, ZERO_1, ZERO_2, ZERO_3)"
                ))
            }
        };
        Ok(FamilyArg(id))
    }
}
