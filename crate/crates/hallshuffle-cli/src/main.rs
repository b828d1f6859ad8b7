//! `hallshuffle`: command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification, 2 parse/schema/input
//! errors, 3 feasibility-guard violations.

mod commands;
mod payload;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hallshuffle::ScalarMode;
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "hallshuffle", version, about = "Exact Hall algebras of P^1, Witt-vector L-series and shuffle algebras")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Size of the finite field (default 2).
    #[arg(long, global = true)]
    pub q: Option<u64>,
    /// Truncation order or degree bound.
    #[arg(long, global = true)]
    pub trunc: Option<usize>,
    /// Degree window `lo,hi` (or `lo..hi`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Scalar backend: numeric (v = √q) or symbolic (v a formal symbol).
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Emit JSON for every result.
    #[arg(long, global = true)]
    pub json: bool,
    /// JSON file with defaults for q, trunc, window and mode; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Numeric,
    Symbolic,
}

/// Curve selection shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct CurveArgs {
    /// Genus.
    #[arg(long, default_value_t = 0)]
    pub g: u32,
    /// Zeta numerator coefficients, constant term first, e.g. `1,-1,2`.
    #[arg(long = "P", alias = "p", allow_hyphen_values = true)]
    pub numerator: Option<String>,
    /// Curve as JSON `{"q": 2, "g": 0, "P": [1]}`; overrides --q/--g/--P.
    #[arg(long)]
    pub curve: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Zeta function of a curve: rational form, series, or truncated Euler product.
    Zeta {
        #[command(flatten)]
        curve: CurveArgs,
        /// Print P(t)/((1-t)(1-qt)).
        #[arg(long, conflicts_with = "euler")]
        rational: bool,
        /// Truncated Euler product over places of degree ≤ D.
        #[arg(long, value_name = "D")]
        euler: Option<usize>,
    },
    /// Big Witt vectors.
    #[command(subcommand)]
    Witt(WittCmd),
    /// Hall algebras (local torsion algebra and Coh(P^1)).
    #[command(subcommand)]
    Hall(HallCmd),
    /// Shuffle algebras.
    #[command(subcommand)]
    Shuffle(ShuffleCmd),
    /// Run a verification suite.
    Verify {
        /// witt_bihom, constant_term, eisenstein_feq, psi_lemma, main_p1, green_cross or regularity.
        suite: String,
        /// Longest product (main_p1, regularity).
        #[arg(long)]
        length: Option<usize>,
        /// Character rank bound (witt_bihom).
        #[arg(long)]
        max_rank: Option<usize>,
        /// Include the elapsed time in the report.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum WittCmd {
    /// u ⊞ v (series product).
    Add { inputs: Vec<String> },
    /// u ⊠ v.
    Mul { inputs: Vec<String> },
    /// Dual vector u*.
    Star { input: String },
    /// Euler factor 1/B(t).
    Euler { input: String },
    /// κ: local (1+t)/(1+q^d t) or global ζ(-t)/ζ(-qt).
    Kappa {
        #[command(flatten)]
        curve: CurveArgs,
        /// Place degree for the local κ.
        #[arg(long, default_value_t = 1, conflicts_with = "global")]
        degree: u32,
        /// B_κ = ζ_X(−t)/ζ_X(−qt) for the whole curve.
        #[arg(long)]
        global: bool,
    },
    /// LHom(λ^deg, μ^deg; t) for rank-1 twist characters.
    Lhom {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        mu: String,
        /// Closed form ζ((μ/λ)t) instead of the truncated Euler product.
        #[arg(long)]
        closed: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum HallCmd {
    /// Product in the local Hall algebra A_x (residue field of size q).
    TorsionMul { inputs: Vec<String> },
    /// Product in the Hall algebra of Coh(P^1).
    P1Mul { inputs: Vec<String> },
    /// Comultiplication: local by default, or on Coh(P^1) with --p1.
    Comul {
        input: String,
        /// Comultiply on Coh(P^1) instead of A_x.
        #[arg(long)]
        p1: bool,
        /// Rank split `r1,r2` for bundle terms.
        #[arg(long)]
        split: Option<String>,
    },
    /// Hecke operator T_F (or T*_F with --dual) on a bundle-only element.
    Hecke {
        input: String,
        /// Torsion sheaf F as `{"x": [1]}`.
        #[arg(long)]
        torsion: String,
        /// Apply the dual operator T*_F.
        #[arg(long)]
        dual: bool,
    },
    /// Coefficients of Ψ_f for f(O(d)) = λ^(sign·d), degrees 0..=trunc.
    Psi {
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i64,
    },
    /// The operator M on a rank (1,1) tensor, torsion sum cut at --trunc.
    MOp { input: String },
}

#[derive(Subcommand, Debug)]
pub enum ShuffleCmd {
    /// Shuffle product of two or more elements.
    Mul {
        inputs: Vec<String>,
        #[command(flatten)]
        curve: CurveArgs,
        /// Kernel JSON; defaults to the rank-1 kernel of the curve.
        #[arg(long)]
        kernel: Option<String>,
    },
    /// Symmetric shuffle product through the coboundary λ (or λ̃).
    SymMul {
        inputs: Vec<String>,
        #[command(flatten)]
        curve: CurveArgs,
        /// Kernel JSON; defaults to the rank-1 kernel of the curve.
        #[arg(long)]
        kernel: Option<String>,
        /// Use λ̃ in place of λ.
        #[arg(long)]
        tilde: bool,
    },
    /// Linear relations among shuffle products of generators.
    Relations {
        /// Generators `[[component, degree], ...]`; default: component 0, degrees in --window.
        input: Option<String>,
        #[command(flatten)]
        curve: CurveArgs,
        /// Kernel JSON; defaults to the rank-1 kernel of the curve.
        #[arg(long)]
        kernel: Option<String>,
        /// Longest product.
        #[arg(long, default_value_t = 2)]
        length: usize,
        /// Window `lo,hi` on the total degree of a product.
        #[arg(long, allow_hyphen_values = true)]
        total: Option<String>,
    },
    /// Kernel of a curve.
    Kernel {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_enum, default_value = "rank1")]
        family: FamilyArg,
        /// Order r of the elliptic family.
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Also print the coboundary data λ and λ̃.
        #[arg(long)]
        coboundary: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyArg {
    Rank1,
    Elliptic,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    q: Option<u64>,
    trunc: Option<usize>,
    window: Option<WindowValue>,
    mode: Option<ModeArg>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum WindowValue {
    Pair([i64; 2]),
    Text(String),
}

/// Global settings after merging the config file and flags.
#[derive(Clone, Debug)]
pub struct Settings {
    pub q: u64,
    pub trunc: Option<usize>,
    pub window: Option<(i64, i64)>,
    pub mode: ScalarMode,
    pub json: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed or invalid input; `at` points to the offending field.
    Input { at: String, msg: String },
    Guard(String),
    /// A verification suite ran and failed; the report is the output.
    Failed(String),
    Io(String),
}

impl CliError {
    pub fn input(at: &str, msg: impl Into<String>) -> Self {
        CliError::Input { at: at.to_string(), msg: msg.into() }
    }
    /// Library errors: guard violations keep their own code, everything
    /// else is a problem with the input.
    pub fn lib(at: &str, e: hallshuffle::Error) -> Self {
        match e {
            hallshuffle::Error::Guard { .. } => CliError::Guard(e.to_string()),
            _ => CliError::input(at, e.to_string()),
        }
    }
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Input { .. } | CliError::Io(_) => 2,
            CliError::Guard(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input { at, msg } => write!(f, "error: {at}: {msg}"),
            CliError::Guard(m) => write!(f, "error: {m}"),
            CliError::Failed(_) => write!(f, "verification failed"),
            CliError::Io(m) => write!(f, "error: {m}"),
        }
    }
}

pub fn parse_window(s: &str, at: &str) -> Result<(i64, i64), CliError> {
    let (a, b) = s.split_once("..").or_else(|| s.split_once(',')).ok_or_else(|| CliError::input(at, "expected `lo,hi`"))?;
    let lo = a.trim().parse().map_err(|_| CliError::input(at, format!("bad bound `{a}`")))?;
    let hi = b.trim().parse().map_err(|_| CliError::input(at, format!("bad bound `{b}`")))?;
    if lo > hi {
        return Err(CliError::input(at, "empty window"));
    }
    Ok((lo, hi))
}

fn settings(g: &Global) -> Result<Settings, CliError> {
    let cfg = match &g.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::input("--config", format!("cannot read `{}`: {e}", p.display())))?;
            serde_json::from_str::<ConfigFile>(&text).map_err(|e| CliError::input("--config", e.to_string()))?
        }
        None => ConfigFile::default(),
    };
    let window = match (&g.window, &cfg.window) {
        (Some(w), _) => Some(parse_window(w, "--window")?),
        (None, Some(WindowValue::Pair([lo, hi]))) => Some((*lo, *hi)),
        (None, Some(WindowValue::Text(s))) => Some(parse_window(s, "config.window")?),
        (None, None) => None,
    };
    let q_opt = g.q.or(cfg.q);
    let q = q_opt.unwrap_or(2);
    if q < 2 {
        return Err(CliError::input("--q", "q must be at least 2"));
    }
    let mode = match g.mode.or(cfg.mode).unwrap_or(ModeArg::Numeric) {
        ModeArg::Numeric => ScalarMode::Numeric(q),
        ModeArg::Symbolic => ScalarMode::Symbolic,
    };
    Ok(Settings { q, trunc: g.trunc.or(cfg.trunc), window, mode, json: g.json })
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = settings(&cli.global).and_then(|s| commands::dispatch(&cli.command, &s));
    match result {
        Ok(text) => match emit(&text, &cli.global.output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(e.code())
            }
        },
        Err(CliError::Failed(report)) => {
            let _ = emit(&report, &cli.global.output);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Failed(String::new()).code(), 1);
        assert_eq!(CliError::input("input 1", "bad").code(), 2);
        assert_eq!(CliError::lib("x", hallshuffle::Error::Domain("d".into())).code(), 2);
        assert_eq!(CliError::lib("x", hallshuffle::Error::DivisionByZero).code(), 2);
        let g = CliError::lib("x", hallshuffle::Error::Guard { name: "q", value: 7, limit: 4 });
        assert_eq!(g.code(), 3);
        assert!(g.to_string().contains("7 > 4"));
    }

    #[test]
    fn windows() {
        assert_eq!(parse_window("-2,3", "w").unwrap(), (-2, 3));
        assert_eq!(parse_window("-2..3", "w").unwrap(), (-2, 3));
        assert!(parse_window("3,1", "w").is_err());
        assert!(parse_window("3", "w").is_err());
    }
}
