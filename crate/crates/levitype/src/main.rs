use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levitype::commands::{Command, ProblemSpec, StrategySpec, StructureSource};
use levitype::input::parse_vector;
use levitype::{run_command, CliError};

/// Regular type of real hypersurfaces in almost complex spaces.
#[derive(Parser)]
#[command(name = "levitype", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Levi form values on a complex tangent basis, by both routes.
    Levi(Common),
    /// Levi form inertia and pseudoconvexity class.
    Classify(Common),
    /// Lower bound on the regular type, with witness disk.
    Type(Common),
    /// Type at each --point, in parallel.
    Scan(Common),
    /// Type search followed by the vector-field cross-check.
    Validate(Common),
    /// Type and validation for every built-in example.
    Catalog(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tree,
}

#[derive(Args)]
struct Common {
    /// Defining function, e.g. "2*x2 + abs2(z1)^2".
    #[arg(long)]
    phi: Option<String>,
    /// Complex dimension.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// "standard" or a file of 2n rows of 2n ';'-separated entries.
    #[arg(long = "J", default_value = "standard")]
    j: String,
    /// Seed for a random polynomial perturbation of the standard structure.
    #[arg(long, conflicts_with = "j")]
    perturb: Option<u64>,
    /// Base point as comma-separated rationals; repeatable.
    #[arg(long = "point")]
    points: Vec<String>,
    /// Jet truncation order (default kmax + 2).
    #[arg(long)]
    cap: Option<u32>,
    /// Largest type searched (default cap - 2, or 8).
    #[arg(long)]
    kmax: Option<u32>,
    /// exact, grid:<step> or dirs:<file>.
    #[arg(long, default_value = "exact")]
    strategy: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for scan.
    #[arg(long)]
    threads: Option<usize>,
}

fn spec(command: Command, a: Common) -> Result<(ProblemSpec, Format), CliError> {
    let k_max = a.kmax.unwrap_or_else(|| a.cap.map_or(8, |c| c.saturating_sub(2)));
    let cap = a.cap.unwrap_or(k_max + 2);
    let structure = match (a.perturb, a.j.as_str()) {
        (Some(seed), _) => StructureSource::Perturbed(seed),
        (None, "standard") => StructureSource::Standard,
        (None, path) => StructureSource::File(PathBuf::from(path)),
    };
    let points = a
        .points
        .iter()
        .map(|p| parse_vector(p, 2 * a.n).map_err(|e| CliError::Usage(format!("--point {p}: {e}"))))
        .collect::<Result<_, _>>()?;
    let threads = a
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |t| t.get()));
    let spec = ProblemSpec {
        command,
        n: a.n,
        phi: a.phi,
        structure,
        points,
        cap,
        k_max,
        strategy: StrategySpec::parse(&a.strategy)?,
        threads,
    };
    Ok((spec, a.format))
}

fn main() -> ExitCode {
    let (command, args) = match Cli::parse().command {
        Sub::Levi(a) => (Command::Levi, a),
        Sub::Classify(a) => (Command::Classify, a),
        Sub::Type(a) => (Command::Type, a),
        Sub::Scan(a) => (Command::Scan, a),
        Sub::Validate(a) => (Command::Validate, a),
        Sub::Catalog(a) => (Command::Catalog, a),
    };
    let result = spec(command, args).and_then(|(s, f)| run_command(&s).map(|o| (o, f)));
    match result {
        Ok((out, format)) => {
            let body = match format {
                Format::Text => out.text,
                Format::Tree => serde_json::to_string_pretty(&out.tree).expect("json") + "\n",
            };
            // a closed pipe downstream is not an error
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(out.status as u8)
        }
        Err(e) => {
            eprintln!("levitype: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
