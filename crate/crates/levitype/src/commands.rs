//! Problem specification and command dispatch.

use std::fmt::Write as _;
use std::path::PathBuf;

use levitype_core::catalog::{catalog, perturbed_structure, PerturbationTerm};
use levitype_core::engine::{cross_validate, recenter, type_search, type_search_with, SearchOptions, Strategy, TypeReport};
use levitype_core::geometry::{ACStructure, Hypersurface};
use levitype_core::levi::{classify_point, complex_tangent_basis, format_complex, levi_form_bracket, levi_form_hessian};
use levitype_core::{Error, Rational, TruncatedSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::expr;
use crate::input::{parse_directions_file, parse_structure_file};
use crate::tree;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Levi,
    Classify,
    Type,
    Scan,
    Validate,
    Catalog,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Levi => "levi",
            Command::Classify => "classify",
            Command::Type => "type",
            Command::Scan => "scan",
            Command::Validate => "validate",
            Command::Catalog => "catalog",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureSource {
    Standard,
    File(PathBuf),
    /// `A J_std A^{-1}` with a perturbation drawn from the seed.
    Perturbed(u64),
}

impl StructureSource {
    fn describe(&self) -> String {
        match self {
            StructureSource::Standard => "standard".into(),
            StructureSource::File(p) => format!("file:{}", p.display()),
            StructureSource::Perturbed(s) => format!("perturbed:{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpec {
    Exact,
    Grid(Rational),
    Dirs(PathBuf),
}

impl StrategySpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text == "exact" {
            return Ok(StrategySpec::Exact);
        }
        if let Some(step) = text.strip_prefix("grid:") {
            let step = expr::parse_rational(step)
                .filter(|s| *s > Rational::from_integer(0.into()))
                .ok_or_else(|| CliError::Usage(format!("grid step '{step}' must be a positive rational")))?;
            return Ok(StrategySpec::Grid(step));
        }
        if let Some(path) = text.strip_prefix("dirs:") {
            return Ok(StrategySpec::Dirs(PathBuf::from(path)));
        }
        Err(CliError::Usage(format!(
            "unknown strategy '{text}' (expected exact, grid:<step> or dirs:<file>)"
        )))
    }

    fn describe(&self) -> String {
        match self {
            StrategySpec::Exact => "exact".into(),
            StrategySpec::Grid(s) => format!("grid:{s}"),
            StrategySpec::Dirs(p) => format!("dirs:{}", p.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub command: Command,
    pub n: usize,
    pub phi: Option<String>,
    pub structure: StructureSource,
    /// Base points; the origin when empty.
    pub points: Vec<Vec<Rational>>,
    pub cap: u32,
    pub k_max: u32,
    pub strategy: StrategySpec,
    pub threads: usize,
}

/// Text and tree renderings of one command.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub text: String,
    pub tree: Value,
    /// Exit status for partially failed scans.
    pub status: i32,
}

pub fn perturbation_from_seed(n: usize, seed: u64) -> Vec<PerturbationTerm> {
    let d = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(1..=3);
    (0..count)
        .map(|_| {
            let row = rng.random_range(1..d);
            let mut num = 0i64;
            while num == 0 {
                num = rng.random_range(-3..=3);
            }
            PerturbationTerm {
                row,
                col: rng.random_range(0..row),
                var: rng.random_range(0..d),
                coefficient: Rational::new(num.into(), rng.random_range(1i64..=3).into()),
            }
        })
        .collect()
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// `phi` and `J` as exact polynomials, before recentring.
struct Problem {
    n: usize,
    phi: TruncatedSeries,
    j: Vec<TruncatedSeries>,
}

impl Problem {
    fn load(spec: &ProblemSpec) -> Result<Self, CliError> {
        let n = spec.n;
        if n == 0 {
            return Err(CliError::Usage("--n must be positive".into()));
        }
        if spec.cap < 2 {
            return Err(Error::TruncationDepth {
                needed: 2,
                available: spec.cap as i32,
            }
            .into());
        }
        let text = spec
            .phi
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("{} needs --phi", spec.command.name())))?;
        let phi_expr = expr::parse(text, n).map_err(|source| CliError::Expression {
            what: "--phi".into(),
            source,
        })?;
        let structure = match &spec.structure {
            StructureSource::File(path) => Some(
                parse_structure_file(&read(path)?, n).map_err(|source| CliError::Format {
                    path: path.display().to_string(),
                    source,
                })?,
            ),
            _ => None,
        };
        // the polynomial data must survive translation exactly
        let degree = match &structure {
            Some(s) => s.degree_bound(),
            None if matches!(spec.structure, StructureSource::Perturbed(_)) => 2 * n as u32,
            None => 0,
        };
        let work = spec.cap.max(phi_expr.degree_bound()).max(degree).max(2);
        let phi = phi_expr.to_series(n, work).map_err(|source| CliError::Expression {
            what: "--phi".into(),
            source,
        })?;
        let j = match (&spec.structure, structure) {
            (StructureSource::Perturbed(seed), _) => {
                perturbed_structure(n, work, &perturbation_from_seed(n, *seed))?.entries().to_vec()
            }
            (StructureSource::File(path), Some(s)) => {
                let entries = s.to_series(work).map_err(|source| CliError::Expression {
                    what: path.display().to_string(),
                    source,
                })?;
                ACStructure::new(n, entries)?.entries().to_vec()
            }
            _ => ACStructure::standard(n, work).entries().to_vec(),
        };
        Ok(Problem { n, phi, j })
    }

    fn at(&self, point: &[Rational], cap: u32) -> Result<(Vec<Rational>, Hypersurface, ACStructure), CliError> {
        let r = recenter(self.n, &self.phi, &self.j, point, cap)?;
        Ok((r.point, r.hypersurface, r.structure))
    }
}

fn origin(spec: &ProblemSpec) -> Vec<Rational> {
    vec![Rational::from_integer(0.into()); 2 * spec.n]
}

fn first_point(spec: &ProblemSpec) -> Result<Vec<Rational>, CliError> {
    match spec.points.as_slice() {
        [] => Ok(origin(spec)),
        [p] => Ok(p.clone()),
        _ => Err(CliError::Usage(format!(
            "{} takes a single --point; use scan for several",
            spec.command.name()
        ))),
    }
}

fn search_options(spec: &ProblemSpec) -> Result<SearchOptions, CliError> {
    let strategy = match &spec.strategy {
        StrategySpec::Exact => Strategy::ExactStaged,
        StrategySpec::Grid(step) => Strategy::Grid { step: step.clone() },
        StrategySpec::Dirs(path) => Strategy::Directions(
            parse_directions_file(&read(path)?, 2 * spec.n).map_err(|source| CliError::Format {
                path: path.display().to_string(),
                source,
            })?,
        ),
    };
    Ok(SearchOptions {
        k_max: spec.k_max,
        strategy,
        field_witness: true,
    })
}

fn provenance(spec: &ProblemSpec) -> Value {
    json!({
        "tool": "levitype",
        "version": env!("CARGO_PKG_VERSION"),
        "command": spec.command.name(),
        "n": spec.n,
        "phi": spec.phi,
        "structure": spec.structure.describe(),
        "cap": spec.cap,
        "k_max": spec.k_max,
        "strategy": spec.strategy.describe(),
    })
}

pub fn vec_text(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn type_text(out: &mut String, r: &TypeReport) {
    let qualifier = if r.cap_reached {
        " (cap reached)"
    } else if r.certified_exact {
        " (certified exact)"
    } else {
        " (lower bound)"
    };
    let _ = writeln!(out, "point        {}", vec_text(&r.point));
    let _ = writeln!(out, "levi class   {}", r.levi_class);
    let _ = writeln!(out, "type         >= {}{qualifier}", r.lower_bound);
    if let Some(o) = &r.obstruction {
        let _ = writeln!(out, "obstruction  stage {}: {}", o.stage, o.description);
    }
    for (i, v) in r.witness_x_jet.iter().enumerate() {
        let _ = writeln!(out, "witness u_{}  {}", i + 1, vec_text(v));
    }
}

/// Runs `job` over the points on up to `threads` workers and returns the
/// results in input order.
pub fn map_points<T, F>(points: &[Vec<Rational>], threads: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[Rational]) -> T + Sync,
{
    let workers = threads.clamp(1, points.len().max(1));
    let chunk = points.len().div_ceil(workers).max(1);
    let mut indexed: Vec<(usize, T)> = std::thread::scope(|s| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                let job = &job;
                s.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(i, p)| (c * chunk + i, job(p)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, t)| t).collect()
}

pub fn run_command(spec: &ProblemSpec) -> Result<Outcome, CliError> {
    let mut text = String::new();
    let mut status = 0;
    let result = match spec.command {
        Command::Catalog => run_catalog(spec, &mut text)?,
        Command::Levi => {
            let problem = Problem::load(spec)?;
            let (point, m, j) = problem.at(&first_point(spec)?, spec.cap)?;
            let c = classify_point(&m, &j)?;
            let (_, fields) = complex_tangent_basis(&m, &j)?;
            let mut values = Vec::new();
            let _ = writeln!(text, "point  {}", vec_text(&point));
            for (i, x) in fields.iter().enumerate() {
                let b = levi_form_bracket(&m, &j, x)?;
                let h = levi_form_hessian(&m, &j, x)?;
                let _ = writeln!(
                    text,
                    "L(T{}) = {}  [bracket {}, hessian {}, correction {}]  T{} = {}",
                    i + 1,
                    b.value,
                    b.value,
                    h.value,
                    h.correction_term,
                    i + 1,
                    vec_text(&c.matrix.basis[i])
                );
                values.push(json!({
                    "basis_vector": tree::vector(&c.matrix.basis[i]),
                    "bracket": tree::levi_report(&b),
                    "hessian": tree::levi_report(&h),
                    "routes_agree": b.value == h.value,
                }));
            }
            for (r, row) in c.matrix.entries.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(format_complex).collect();
                let _ = writeln!(text, "Theta[{}] = [{}]", r + 1, cells.join(", "));
            }
            let _ = writeln!(text, "class  {}", c.class);
            json!({ "point": tree::vector(&point), "levi": values, "classification": tree::classification(&c) })
        }
        Command::Classify => {
            let problem = Problem::load(spec)?;
            let (point, m, j) = problem.at(&first_point(spec)?, spec.cap)?;
            let c = classify_point(&m, &j)?;
            let (p, n, z) = c.inertia;
            let _ = writeln!(text, "point    {}", vec_text(&point));
            let _ = writeln!(text, "inertia  (+{p}, -{n}, 0x{z})");
            let _ = writeln!(text, "class    {}", c.class);
            json!({ "point": tree::vector(&point), "classification": tree::classification(&c) })
        }
        Command::Type | Command::Validate => {
            let problem = Problem::load(spec)?;
            let opts = search_options(spec)?;
            let (point, m, j) = problem.at(&first_point(spec)?, spec.cap)?;
            let mut report = type_search_with(&m, &j, &opts)?;
            report.point = point;
            type_text(&mut text, &report);
            let mut value = json!({ "type": tree::type_report(&report) });
            if spec.command == Command::Validate {
                let v = cross_validate(&m, &j, &report)?;
                let _ = writeln!(
                    text,
                    "validate     k={} field {} brackets {} (order {}) levi {} derivatives {}: {}",
                    v.k,
                    v.field_realized,
                    v.brackets_vanish,
                    v.bracket_order,
                    v.levi_vanish,
                    v.derivatives_match,
                    if v.passed() { "pass" } else { "FAIL" }
                );
                value["validation"] = tree::validation(&v);
            }
            value
        }
        Command::Scan => {
            let problem = Problem::load(spec)?;
            let opts = search_options(spec)?;
            let points = if spec.points.is_empty() { vec![origin(spec)] } else { spec.points.clone() };
            let results = map_points(&points, spec.threads, |p| -> Result<TypeReport, CliError> {
                let (point, m, j) = problem.at(p, spec.cap)?;
                let mut r = type_search_with(&m, &j, &opts)?;
                r.point = point;
                Ok(r)
            });
            let mut rows = Vec::new();
            for (p, r) in points.iter().zip(&results) {
                match r {
                    Ok(r) => {
                        let tag = if r.cap_reached { "+" } else if r.certified_exact { "" } else { "?" };
                        let _ = writeln!(text, "{}  type {}{tag}  {}", vec_text(&r.point), r.lower_bound, r.levi_class);
                        rows.push(tree::type_report(r));
                    }
                    Err(e) => {
                        if status == 0 {
                            status = e.exit_code();
                        }
                        let _ = writeln!(text, "{}  error: {e}", vec_text(p));
                        rows.push(json!({ "point": tree::vector(p), "error": e.to_string(), "exit_code": e.exit_code() }));
                    }
                }
            }
            json!({ "reports": rows })
        }
    };
    Ok(Outcome {
        text,
        tree: json!({ "provenance": provenance(spec), "command": spec.command.name(), "result": result }),
        status,
    })
}

fn run_catalog(spec: &ProblemSpec, text: &mut String) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    for entry in catalog() {
        let m = (entry.build)(spec.cap)?;
        let j = ACStructure::standard(entry.n, spec.cap);
        let r = type_search(&m, &j, spec.k_max, Strategy::ExactStaged)?;
        let v = cross_validate(&m, &j, &r)?;
        let tag = if r.cap_reached {
            "cap reached"
        } else if r.certified_exact {
            "certified"
        } else {
            "lower bound"
        };
        let _ = writeln!(
            text,
            "{:<11} {:<28} type {:>2} {:<12} validated k={}",
            entry.name, entry.formula, r.lower_bound, tag, v.k
        );
        rows.push(json!({
            "name": entry.name,
            "phi": entry.formula,
            "n": entry.n,
            "type": tree::type_report(&r),
            "validation": tree::validation(&v),
        }));
    }
    Ok(Value::Array(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(command: Command, phi: &str) -> ProblemSpec {
        ProblemSpec {
            command,
            n: 2,
            phi: Some(phi.into()),
            structure: StructureSource::Standard,
            points: Vec::new(),
            cap: 6,
            k_max: 4,
            strategy: StrategySpec::Exact,
            threads: 2,
        }
    }

    #[test]
    fn classify_sphere() {
        let out = run_command(&spec(Command::Classify, "2*x2 + abs2(z1)")).unwrap();
        assert_eq!(out.tree["result"]["classification"]["class"], "strictly_pseudoconvex");
    }

    #[test]
    fn quartic_type() {
        let mut s = spec(Command::Type, "2*x2 + abs2(z1)^2");
        s.cap = 8;
        s.k_max = 6;
        let out = run_command(&s).unwrap();
        assert_eq!(out.tree["result"]["type"]["lower_bound"], 4);
        assert_eq!(out.tree["result"]["type"]["certified_exact"], true);
    }

    #[test]
    fn harmonic_validates() {
        let out = run_command(&spec(Command::Validate, "2*x2 + Re(z1^2)")).unwrap();
        assert_eq!(out.tree["result"]["validation"]["passed"], true);
        assert_eq!(out.tree["result"]["type"]["cap_reached"], true);
    }

    #[test]
    fn map_points_keeps_order() {
        let pts: Vec<Vec<Rational>> = (0..7).map(|i| vec![Rational::from_integer(i.into())]).collect();
        let out = map_points(&pts, 3, |p| p[0].clone());
        assert_eq!(out, pts.into_iter().map(|p| p[0].clone()).collect::<Vec<_>>());
    }

    #[test]
    fn strategies_parse() {
        assert_eq!(StrategySpec::parse("exact").unwrap(), StrategySpec::Exact);
        assert!(matches!(StrategySpec::parse("grid:1/4").unwrap(), StrategySpec::Grid(_)));
        assert!(StrategySpec::parse("grid:-1").is_err());
        assert!(StrategySpec::parse("simplex").is_err());
    }

    #[test]
    fn perturbed_structures_are_valid() {
        for seed in 0..5 {
            let mut s = spec(Command::Levi, "2*x2 + abs2(z1)");
            s.structure = StructureSource::Perturbed(seed);
            let out = run_command(&s).unwrap();
            assert!(out.tree["result"]["levi"][0]["routes_agree"].as_bool().unwrap());
        }
    }
}
