//! Command-line front end: file ingestion, command dispatch, and
//! human- or machine-readable reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::complex::BasedComplex;
use crate::homology::{euler_characteristic, homology, homology_json, HomologyGroup};
use crate::matching::{
    check_acyclic, greedy_matching, linear_extension, validate_matching, Classification, Matching,
};
use crate::morse::{
    morse_boundary_with_budget, reduce_by_elimination, verify_decomposition, DEFAULT_PATH_BUDGET,
};
use crate::ring::RingSpec;
use crate::simplicial::SimplicialInput;

#[derive(Parser)]
#[command(
    name = "morsel",
    version,
    about = "Reduce free chain complexes with acyclic matchings; certify the result"
)]
struct Cli {
    /// Emit machine-readable JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a chain complex file is well formed and ∂∘∂ = 0
    Validate { complex: PathBuf },
    /// Build a chain complex file from a simplicial facet list
    Convert {
        /// Facet file: one facet per line, whitespace-separated vertex ids
        #[arg(long = "from-simplicial", value_name = "FILE")]
        from_simplicial: PathBuf,
        /// Coefficient ring: Z, Z/<p>, or Q
        #[arg(long, default_value = "Z")]
        ring: String,
    },
    /// Validate a matching against a complex and print the classification
    #[command(group = ArgGroup::new("source").required(true).args(["greedy", "matching"]))]
    Match {
        complex: PathBuf,
        /// Generate a matching greedily
        #[arg(long)]
        greedy: bool,
        /// Matching file: {"pairs": [{"down": ..., "up": ...}, ...]}
        #[arg(long, value_name = "FILE")]
        matching: Option<PathBuf>,
    },
    /// Reduce a complex to its Morse complex
    #[command(group = ArgGroup::new("source").required(true).args(["greedy", "matching"]))]
    Reduce {
        complex: PathBuf,
        #[arg(long)]
        greedy: bool,
        #[arg(long, value_name = "FILE")]
        matching: Option<PathBuf>,
        /// How to compute the Morse boundary
        #[arg(long, value_enum, default_value_t = Method::Elimination)]
        method: Method,
        /// Cap on the number of enumerated alternating paths
        #[arg(long = "path-budget", value_name = "N")]
        path_budget: Option<usize>,
    },
    /// Homology groups (Smith normal form over Z, ranks over fields)
    #[command(group = ArgGroup::new("source").args(["greedy", "matching"]))]
    Homology {
        complex: PathBuf,
        /// Reduce first and check that homology is preserved
        #[arg(long = "compare-with-morse")]
        compare_with_morse: bool,
        #[arg(long)]
        greedy: bool,
        #[arg(long, value_name = "FILE")]
        matching: Option<PathBuf>,
    },
    /// Print a linear extension certifying that a matching is acyclic
    #[command(group = ArgGroup::new("source").required(true).args(["greedy", "matching"]))]
    Extension {
        complex: PathBuf,
        #[arg(long)]
        greedy: bool,
        #[arg(long, value_name = "FILE")]
        matching: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Paths,
    Elimination,
    Both,
}

struct Report {
    json: serde_json::Value,
    human: String,
}

struct Failure {
    message: String,
    json: serde_json::Value,
}

impl Failure {
    fn new(message: impl Into<String>) -> Self {
        let message = message.into();
        Failure { json: json!({ "error": message }), message }
    }

    fn with_json(message: impl Into<String>, mut value: serde_json::Value) -> Self {
        let message = message.into();
        if let Some(map) = value.as_object_mut() {
            map.insert("error".into(), json!(message));
        }
        Failure { message, json: value }
    }
}

/// Runs the CLI on `args` (including the program name), writing the
/// report to `out`. Exit code 0 on success, 1 on validation failure,
/// 2 on usage error.
pub fn run(args: &[String], out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args.iter().map(String::as_str)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(out, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli.command) {
        Ok(report) => {
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report.json).unwrap());
            } else {
                let _ = write!(out, "{}", report.human);
            }
            0
        }
        Err(failure) => {
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&failure.json).unwrap());
            } else {
                let _ = writeln!(out, "error: {}", failure.message);
            }
            1
        }
    }
}

fn dispatch(command: &Command) -> Result<Report, Failure> {
    match command {
        Command::Validate { complex } => cmd_validate(complex),
        Command::Convert { from_simplicial, ring } => cmd_convert(from_simplicial, ring),
        Command::Match { complex, greedy, matching } => {
            cmd_match(complex, *greedy, matching.as_deref())
        }
        Command::Reduce { complex, greedy, matching, method, path_budget } => {
            cmd_reduce(complex, *greedy, matching.as_deref(), *method, *path_budget)
        }
        Command::Homology { complex, compare_with_morse, greedy, matching } => {
            cmd_homology(complex, *compare_with_morse, *greedy, matching.as_deref())
        }
        Command::Extension { complex, greedy, matching } => {
            cmd_extension(complex, *greedy, matching.as_deref())
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(format!("cannot read {}: {e}", path.display())))
}

fn load_complex(path: &Path) -> Result<BasedComplex, Failure> {
    let text = read_file(path)?;
    let complex = BasedComplex::from_json(&text)
        .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
    complex
        .validate()
        .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
    Ok(complex)
}

/// The matching named on the command line: a file, or greedily generated.
fn load_matching(
    c: &BasedComplex,
    greedy: bool,
    matching: Option<&Path>,
) -> Result<(Matching, String), Failure> {
    match matching {
        Some(path) => {
            let text = read_file(path)?;
            let m = Matching::from_json(&text)
                .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
            Ok((m, format!("{}", path.display())))
        }
        None => {
            debug_assert!(greedy, "clap group guarantees a source");
            let _ = greedy;
            Ok((greedy_matching(c), "greedy".to_string()))
        }
    }
}

fn classify(c: &BasedComplex, m: &Matching) -> Result<Classification, Failure> {
    validate_matching(c, m).map_err(|e| Failure::new(format!("invalid matching: {e}")))
}

fn cmd_validate(path: &Path) -> Result<Report, Failure> {
    let complex = load_complex(path)?;
    let counts = complex.cell_counts();
    let human = format!(
        "ok: {} cells over {}, {} per dimension\n",
        complex.cell_count(),
        complex.ring(),
        counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" + "),
    );
    Ok(Report {
        json: json!({
            "command": "validate",
            "ok": true,
            "ring": complex.ring().to_string(),
            "cells": complex.cell_count(),
            "cells_by_dim": counts,
        }),
        human,
    })
}

fn cmd_convert(facets: &Path, ring: &str) -> Result<Report, Failure> {
    let ring: RingSpec = ring.parse().map_err(|e| Failure::new(format!("{e}")))?;
    let input = SimplicialInput::parse(&read_file(facets)?)
        .map_err(|e| Failure::new(format!("{}: {e}", facets.display())))?;
    let complex = input
        .to_complex(&ring)
        .map_err(|e| Failure::new(format!("{}: {e}", facets.display())))?;
    // the output is the complex file itself, in either mode
    Ok(Report { json: complex.to_json_value(), human: format!("{}\n", complex.to_json()) })
}

fn classification_json(c: &BasedComplex, cls: &Classification) -> serde_json::Value {
    let mut entries = serde_json::Map::new();
    for cell in c.cells() {
        let class = cls.class_of(&cell.id).expect("classified");
        entries.insert(cell.id, json!(format!("{class:?}")));
    }
    serde_json::Value::Object(entries)
}

fn classification_human(c: &BasedComplex, cls: &Classification) -> String {
    let mut text = String::new();
    for cell in c.cells() {
        let line = match cls.class_of(&cell.id).expect("classified") {
            crate::matching::CellClass::Up => {
                format!("{}: Up, paired below with {}", cell.id, cls.down_of(&cell.id).unwrap())
            }
            crate::matching::CellClass::Down => {
                format!("{}: Down, paired above with {}", cell.id, cls.up_of(&cell.id).unwrap())
            }
            crate::matching::CellClass::Critical => format!("{}: Critical", cell.id),
        };
        text.push_str(&line);
        text.push('\n');
    }
    text
}

fn cmd_match(path: &Path, greedy: bool, matching: Option<&Path>) -> Result<Report, Failure> {
    let complex = load_complex(path)?;
    let (m, source) = load_matching(&complex, greedy, matching)?;
    let cls = classify(&complex, &m)?;
    let base = json!({
        "command": "match",
        "matching": source,
        "pairs": m.len(),
        "critical": cls.critical().collect::<Vec<_>>(),
        "classification": classification_json(&complex, &cls),
    });
    if let Err(e) = check_acyclic(&complex, &cls) {
        let cycle = match &e {
            crate::matching::MatchingError::CycleFound { cycle } => cycle.clone(),
            _ => Vec::new(),
        };
        let mut value = base;
        if let Some(map) = value.as_object_mut() {
            map.insert("acyclic".into(), json!(false));
            map.insert("cycle".into(), json!(cycle));
        }
        return Err(Failure::with_json(format!("{e}"), value));
    }
    let mut value = base;
    if let Some(map) = value.as_object_mut() {
        map.insert("acyclic".into(), json!(true));
    }
    let human = format!(
        "matching ({source}): {} pairs on {} cells, acyclic\ncritical cells ({}): {}\n{}",
        m.len(),
        complex.cell_count(),
        cls.critical().count(),
        cls.critical().collect::<Vec<_>>().join(" "),
        classification_human(&complex, &cls),
    );
    Ok(Report { json: value, human })
}

fn cmd_reduce(
    path: &Path,
    greedy: bool,
    matching: Option<&Path>,
    method: Method,
    path_budget: Option<usize>,
) -> Result<Report, Failure> {
    let complex = load_complex(path)?;
    let (m, source) = load_matching(&complex, greedy, matching)?;
    let cls = classify(&complex, &m)?;
    check_acyclic(&complex, &cls).map_err(|e| Failure::new(format!("{e}")))?;
    let budget = path_budget.unwrap_or(DEFAULT_PATH_BUDGET);

    let by_paths = match method {
        Method::Paths | Method::Both => Some(
            morse_boundary_with_budget(&complex, &m, budget)
                .map_err(|e| Failure::new(format!("path summation failed: {e}")))?,
        ),
        Method::Elimination => None,
    };
    let by_elimination = match method {
        Method::Elimination | Method::Both => {
            let extension = linear_extension(&complex, &m)
                .map_err(|e| Failure::new(format!("{e}")))?;
            let decomposition = reduce_by_elimination(&complex, &m, &extension)
                .map_err(|e| Failure::new(format!("elimination failed: {e}")))?;
            verify_decomposition(&complex, &decomposition)
                .map_err(|e| Failure::new(format!("decomposition failed verification: {e}")))?;
            Some(decomposition)
        }
        Method::Paths => None,
    };

    let morse = by_elimination
        .as_ref()
        .map(|d| &d.morse)
        .or(by_paths.as_ref())
        .expect("some method ran");
    let mut value = json!({
        "command": "reduce",
        "matching": source,
        "method": format!("{method:?}").to_lowercase(),
        "cells_before": complex.cell_count(),
        "cells_after": morse.complex.cell_count(),
        "morse": morse.complex.to_json_value(),
    });
    let map = value.as_object_mut().expect("object");

    let mut human = format!(
        "reduced {} cells to {} critical cells over {} (matching: {source}, method: {})\n",
        complex.cell_count(),
        morse.complex.cell_count(),
        complex.ring(),
        format!("{method:?}").to_lowercase(),
    );
    if let Some(d) = &by_elimination {
        let decomposition_json = d.to_json_value();
        map.insert("atoms".into(), decomposition_json["atoms"].clone());
        map.insert("change_of_basis".into(), decomposition_json["change_of_basis"].clone());
        map.insert("verified".into(), json!(true));
        human.push_str(&format!("atoms split off: {}\n", d.atoms.len()));
        for atom in &d.atoms {
            human.push_str(&format!("  {} -> {} (dim {})\n", atom.top, atom.bottom, atom.dim));
        }
        human.push_str("decomposition verified: block-diagonal with unit atom blocks\n");
    }
    if let (Some(p), Some(e)) = (&by_paths, &by_elimination) {
        let agree = p.complex == e.morse.complex;
        map.insert("methods_agree".into(), json!(agree));
        if !agree {
            let message = "path summation and elimination disagree on the Morse boundary";
            return Err(Failure::with_json(message, value));
        }
        human.push_str("path summation and elimination agree exactly\n");
    }
    Ok(Report { json: value, human })
}

fn homology_human(groups: &[HomologyGroup]) -> String {
    groups.iter().map(|g| format!("  H_{} = {}\n", g.dim, g)).collect()
}

fn cmd_homology(
    path: &Path,
    compare_with_morse: bool,
    greedy: bool,
    matching: Option<&Path>,
) -> Result<Report, Failure> {
    let complex = load_complex(path)?;
    let groups = homology(&complex).map_err(|e| Failure::new(format!("{e}")))?;
    let euler = euler_characteristic(&complex);
    let mut value = json!({
        "command": "homology",
        "ring": complex.ring().to_string(),
        "homology": homology_json(&groups),
        "euler_characteristic": euler,
    });
    let mut human = format!(
        "homology over {} ({} cells):\n{}euler characteristic: {euler}\n",
        complex.ring(),
        complex.cell_count(),
        homology_human(&groups),
    );

    if compare_with_morse {
        let (m, source) = if !greedy && matching.is_none() {
            (greedy_matching(&complex), "greedy".to_string())
        } else {
            load_matching(&complex, greedy, matching)?
        };
        let cls = classify(&complex, &m)?;
        check_acyclic(&complex, &cls).map_err(|e| Failure::new(format!("{e}")))?;
        let extension =
            linear_extension(&complex, &m).map_err(|e| Failure::new(format!("{e}")))?;
        let decomposition = reduce_by_elimination(&complex, &m, &extension)
            .map_err(|e| Failure::new(format!("elimination failed: {e}")))?;
        let morse_groups = homology(&decomposition.morse.complex)
            .map_err(|e| Failure::new(format!("{e}")))?;
        let equal = groups == morse_groups;
        let map = value.as_object_mut().expect("object");
        map.insert("matching".into(), json!(source));
        map.insert("morse_cells".into(), json!(decomposition.morse.complex.cell_count()));
        map.insert("morse_homology".into(), homology_json(&morse_groups));
        map.insert("equal".into(), json!(equal));
        human.push_str(&format!(
            "morse complex ({source} matching, {} critical cells):\n{}",
            decomposition.morse.complex.cell_count(),
            homology_human(&morse_groups),
        ));
        if !equal {
            return Err(Failure::with_json("homology differs after Morse reduction", value));
        }
        human.push_str("homology preserved by the reduction\n");
    }
    Ok(Report { json: value, human })
}

fn cmd_extension(path: &Path, greedy: bool, matching: Option<&Path>) -> Result<Report, Failure> {
    let complex = load_complex(path)?;
    let (m, source) = load_matching(&complex, greedy, matching)?;
    let cls = classify(&complex, &m)?;
    if let Err(e) = check_acyclic(&complex, &cls) {
        let cycle = match &e {
            crate::matching::MatchingError::CycleFound { cycle } => cycle.clone(),
            _ => Vec::new(),
        };
        return Err(Failure::with_json(
            format!("{e}"),
            json!({"command": "extension", "matching": source, "cycle": cycle}),
        ));
    }
    let extension =
        linear_extension(&complex, &m).map_err(|e| Failure::new(format!("{e}")))?;
    let human = format!("{}\n", extension.order().join(" < "));
    Ok(Report {
        json: json!({
            "command": "extension",
            "matching": source,
            "order": extension.order(),
        }),
        human,
    })
}
