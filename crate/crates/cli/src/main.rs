mod commands;
mod input;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "lotkit", version, about = "Knot Floer complexes, bordered invariants, involutions and immersed curves")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Search budget for extensions and box tensor products.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Report wall-clock timings. Off by default so output is reproducible.
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Cfk,
    D,
    Da,
    Curve,
    Iota,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Check an object's structure equations and gradings.
    Validate {
        #[arg(value_enum)]
        kind: Kind,
        input: String,
        /// The knot complex an involution acts on.
        #[arg(long)]
        complex: Option<String>,
    },
    /// Cancel unit differentials, printing the reduced object.
    Reduce {
        #[arg(value_enum)]
        kind: Kind,
        input: String,
    },
    #[command(subcommand)]
    Lot(LotCmd),
    /// Box a DA bimodule with a type D structure or another bimodule.
    Box {
        bimodule: String,
        target: String,
        #[arg(long, value_enum, default_value_t = TargetKind::D)]
        target_kind: TargetKind,
        /// Reduce the result.
        #[arg(long)]
        reduce: bool,
    },
    /// Extend a type D structure over the extended torus algebra.
    Extend { input: String },
    #[command(subcommand)]
    Split(SplitCmd),
    #[command(subcommand)]
    Iota(IotaCmd),
    #[command(subcommand)]
    Curve(CurveCmd),
    /// The (m, -1) cable of C_n and the evidence that it is not
    /// involutively simple.
    CableFamily { n: u32, m: u32 },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetKind {
    D,
    Da,
}

#[derive(Subcommand)]
pub enum LotCmd {
    /// Knot complex to the type D structure of the framed knot complement.
    ToD {
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        framing: i64,
    },
    /// Type D structure back to a knot complex.
    ToCfk {
        input: String,
        /// Skip the final reduction.
        #[arg(long)]
        no_reduce: bool,
    },
    /// Go to type D and back, checking the result is isomorphic.
    Roundtrip {
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        framing: i64,
    },
}

#[derive(Subcommand)]
pub enum SplitCmd {
    /// Replace a homotopy idempotent by an honest projection.
    Lift { complex: String, map: String },
    /// Straighten a family of homotopy projections into commuting ones.
    Straighten {
        complex: String,
        #[arg(required = true)]
        maps: Vec<String>,
    },
    /// Compare block patterns of the identity on both sides of the pairing.
    Blocks {
        complex: String,
        /// Generator groups, e.g. `x|a,b,c,d`.
        #[arg(long)]
        parts: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2)]
        framing: i64,
    },
    /// Perturb summand projections by random null-homotopic maps and lift
    /// them back.
    Random {
        complex: String,
        #[arg(long)]
        parts: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
    },
}

#[derive(Subcommand)]
pub enum IotaCmd {
    /// Check that a map is a skew-graded chain map squaring to id + ΦΨ.
    Validate { complex: String, iota: String },
    /// Induced maps on hat homology.
    Hat { complex: String, iota: String },
    /// Generators whose hat classes any involution must fix.
    Isolate {
        complex: String,
        /// Generator groups known to be invariant, e.g. `x|a,b,c,d`.
        #[arg(long)]
        parts: Option<String>,
    },
    /// Whether two generators split off compatibly with ι̂, Φ̂ and Ψ̂.
    Nonsimple {
        complex: String,
        v1: String,
        v2: String,
        /// An explicit involution; otherwise isolation is used.
        #[arg(long)]
        iota: Option<String>,
    },
    /// Search for an involution.
    Solve {
        complex: String,
        #[arg(long, default_value_t = 20)]
        max_basis: usize,
    },
}

#[derive(Subcommand)]
pub enum CurveCmd {
    /// Immersed curve of a type D structure.
    FromD { input: String },
    /// Type D structure of a curve.
    ToD {
        input: String,
        #[arg(long)]
        extended: bool,
    },
    /// The (p, q) cable of a curve.
    Cable {
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
    },
    /// Bigradings of the axis crossings.
    Grade { input: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(rep) => {
            let out = match cli.format {
                Format::Json => rep.render_json(),
                Format::Text => rep.render_text(),
            };
            print!("{out}");
            ExitCode::from(rep.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::error_code(&e))
        }
    }
}
