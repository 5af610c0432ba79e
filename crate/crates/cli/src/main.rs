//! `minnet`: command-line front end for minimal constraint networks.
//!
//! Exit codes: 0 success or positive verdict, 1 negative verdict or
//! counterexample, 2 inconclusive (budget), 64 usage error, 65 malformed
//! input, 66 unreadable input file, 74 output or server failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use minnet_core::compile::{extended_minimal_network, minimal_network, Direction, PreferenceSpec};
use minnet_core::decomp::{frontier_route, is_k_decomposable, join_dependency_holds, DecompOutcome};
use minnet_core::gadgets::{
    bivalued_construction, sat_to_network, standardize_domains, symmetry_transform, threecol_network,
    threecol_to_constraint, trivalued_construction,
};
use minnet_core::query::{extremum_lookup, select_solution_with, top_k_solutions_with, Query};
use minnet_core::verify::{
    gaur_minimality, is_minimal, is_supersymmetric, MinimalityOutcome, SchemaMode, SupersymmetryOutcome,
};
use minnet_core::{find_solution, io, solve_all, Error, FindOutcome, PartialAssignment, Value, DEFAULT_BUDGET};
use serde_json::json;

#[derive(Parser)]
#[command(name = "minnet", version, about = "Minimal constraint networks toolkit")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Budget {
    /// Search budget in nodes (backtracking) or decisions plus conflicts (SAT).
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a network into its minimal k-ary network.
    Compile {
        #[arg(long)]
        k: usize,
        /// Keep this many preferred witnesses per tuple (extended output).
        #[arg(long)]
        top: Option<usize>,
        /// Prefer solutions with the smallest value of this variable.
        #[arg(long, conflicts_with = "max")]
        min: Option<String>,
        /// Prefer solutions with the largest value of this variable.
        #[arg(long)]
        max: Option<String>,
        network: PathBuf,
    },
    /// Check whether a network is minimal.
    CheckMinimal {
        /// Check against the complete schema of arity k instead of the given one.
        #[arg(long)]
        k: Option<usize>,
        /// Use the n-partite clique criterion (binary networks only).
        #[arg(long)]
        gaur: bool,
        #[command(flatten)]
        budget: Budget,
        network: PathBuf,
    },
    /// Check whether a DIMACS formula is k-supersymmetric.
    CheckSupersym {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        budget: Budget,
        cnf: PathBuf,
    },
    /// Check whether a relation is k-decomposable or satisfies a join dependency.
    CheckDecomp {
        #[arg(long)]
        k: Option<usize>,
        /// JSON array of scopes; checks the join dependency over them.
        #[arg(long, conflicts_with = "k")]
        schema: Option<PathBuf>,
        /// Skip the fast paths and always run the generic search.
        #[arg(long)]
        generic: bool,
        #[command(flatten)]
        budget: Budget,
        relation: PathBuf,
    },
    /// Run one of the reduction constructions.
    #[command(subcommand)]
    Transform(Transform),
    /// Find a solution, optionally extending pinned values.
    Solve {
        /// Pin a value, as NAME=VALUE. Repeatable.
        #[arg(long = "pin")]
        pins: Vec<String>,
        /// Print every solution as a relation instead.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        budget: Budget,
        network: PathBuf,
    },
    /// Answer a query over a compiled (extended) network.
    Query {
        #[arg(long)]
        network: PathBuf,
        /// Return the top COUNT solutions instead of one.
        #[arg(long)]
        count: Option<usize>,
        /// Report the largest value of this variable among rows meeting the formula.
        #[arg(long, conflicts_with_all = ["min", "count"])]
        max: Option<String>,
        /// Report the smallest value of this variable among rows meeting the formula.
        #[arg(long, conflicts_with = "count")]
        min: Option<String>,
        #[command(flatten)]
        budget: Budget,
        phi: String,
    },
    /// Serve a compiled network over HTTP.
    Serve {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Subcommand)]
enum Transform {
    /// Symmetry transform of a 3-CNF (DIMACS out).
    Sym {
        #[arg(long)]
        k: usize,
        cnf: PathBuf,
    },
    /// Clause network of a CNF (network JSON out).
    Sat2net {
        #[arg(long)]
        k: usize,
        cnf: PathBuf,
    },
    /// Rename every domain to 1..|dom|.
    Std {
        /// Also write the value maps (JSON) here.
        #[arg(long)]
        maps: Option<PathBuf>,
        network: PathBuf,
    },
    /// 3-coloring network of a DIMACS edge graph.
    #[command(name = "3col2net")]
    ThreeColNet {
        #[arg(long, default_value_t = 2)]
        k: usize,
        graph: PathBuf,
    },
    /// Single relation with tuple identifiers from a DIMACS edge graph.
    #[command(name = "3col2rel")]
    ThreeColRel {
        #[arg(long, default_value_t = 2)]
        k: usize,
        graph: PathBuf,
    },
    /// Bi-valued relation from a 3-CNF with three distinct atoms per clause.
    Bival { cnf: PathBuf },
    /// Tri-valued relation from a DIMACS edge graph.
    Trival { graph: PathBuf },
}

/// A failure with its exit code.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(65, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(66, format!("{}: {e}", path.display())))
}

/// Loads with the file name attached to any parse error.
fn load<T>(path: &Path, parse: impl FnOnce(&str) -> minnet_core::Result<T>) -> Result<T, Failure> {
    let text = read(path)?;
    parse(&text).map_err(|e| Failure(65, format!("{}: {e}", path.display())))
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

struct Output {
    text: String,
    code: u8,
}

fn ok(text: String) -> Output {
    Output { text, code: 0 }
}

fn parse_pin(net: &minnet_core::Network, spec: &str) -> Result<(minnet_core::VariableId, Value), Failure> {
    let (name, raw) = spec
        .split_once('=')
        .ok_or_else(|| Failure(64, format!("--pin expects NAME=VALUE, got {spec:?}")))?;
    let var = net
        .var(name)
        .cloned()
        .ok_or_else(|| Failure(64, format!("--pin: unknown variable {name}")))?;
    let value = raw.parse::<i64>().map(Value::Number).unwrap_or_else(|_| Value::sym(raw));
    Ok((var, value))
}

fn run(cli: Cli) -> Result<Output, Failure> {
    match cli.command {
        Command::Compile { k, top, min, max, network } => {
            let net = load(&network, io::network_from_json)?;
            let pref = match (min, max) {
                (Some(v), _) => PreferenceSpec::min(&v),
                (_, Some(v)) => PreferenceSpec::max(&v),
                _ => PreferenceSpec::none(),
            };
            match top {
                Some(top_k) => {
                    let m = extended_minimal_network(&net, k, top_k, &pref)?;
                    Ok(ok(pretty(&io::extended_to_file(&m))))
                }
                None if pref.objective.is_some() => {
                    Err(Failure(64, "--min/--max need --top".into()))
                }
                None => Ok(ok(pretty(&io::network_to_file(&minimal_network(&net, k)?)))),
            }
        }
        Command::CheckMinimal { k, gaur, budget, network } => {
            let net = load(&network, io::network_from_json)?;
            let v = if gaur {
                gaur_minimality(&net)?
            } else {
                let mode = k.map_or(SchemaMode::AsGiven, SchemaMode::CompleteK);
                is_minimal(&net, mode, budget.budget)?
            };
            let code = match v.outcome {
                MinimalityOutcome::Minimal => 0,
                MinimalityOutcome::NotMinimal => 1,
                MinimalityOutcome::InconclusiveBudget => 2,
            };
            let witness = v.witness.as_ref().map(|w| json!({"scope": w.scope, "tuple": w.tuple}));
            Ok(Output {
                text: pretty(&json!({"outcome": v.outcome, "witness": witness, "budget_hit": v.budget_hit})),
                code,
            })
        }
        Command::CheckSupersym { k, budget, cnf } => {
            let c = load(&cnf, io::parse_dimacs_cnf)?;
            let v = is_supersymmetric(&c, k, budget.budget)?;
            let code = match v.outcome {
                SupersymmetryOutcome::Supersymmetric | SupersymmetryOutcome::Unsatisfiable => 0,
                SupersymmetryOutcome::Counterexample => 1,
                SupersymmetryOutcome::InconclusiveBudget => 2,
            };
            let witness = v
                .counterexample
                .as_ref()
                .map(|cx| cx.iter().map(|(a, b)| (a.clone(), *b)).collect::<std::collections::BTreeMap<_, _>>());
            Ok(Output {
                text: pretty(&json!({"outcome": v.outcome, "witness": witness, "budget_hit": v.budget_hit})),
                code,
            })
        }
        Command::CheckDecomp { k, schema, generic, budget, relation } => {
            let rho = load(&relation, io::relation_from_json)?;
            let v = match (k, schema) {
                (_, Some(path)) => {
                    let s = load(&path, |t| io::schema_from_json(t, &rho))?;
                    join_dependency_holds(&rho, &s, budget.budget)?
                }
                (Some(k), None) if generic => is_k_decomposable(&rho, k, budget.budget)?,
                (Some(k), None) => frontier_route(&rho, k, budget.budget)?,
                (None, None) => return Err(Failure(64, "check-decomp needs --k or --schema".into())),
            };
            let code = match v.outcome {
                DecompOutcome::Decomposable => 0,
                DecompOutcome::Counterexample => 1,
                DecompOutcome::InconclusiveBudget => 2,
            };
            Ok(Output {
                text: pretty(&json!({"outcome": v.outcome, "witness": v.t0, "route": v.route, "nodes": v.nodes})),
                code,
            })
        }
        Command::Transform(t) => transform(t),
        Command::Solve { pins, all, budget, network } => {
            let net = load(&network, io::network_from_json)?;
            if all {
                if !pins.is_empty() {
                    return Err(Failure(64, "--all does not take pins".into()));
                }
                let rel = solve_all(&net).ok_or_else(|| Failure(65, "the network has no variables".into()))?;
                let code = if rel.is_empty() { 1 } else { 0 };
                return Ok(Output { text: pretty(&io::relation_to_file(&rel)), code });
            }
            let mut pinned = PartialAssignment::new();
            for p in &pins {
                let (var, value) = parse_pin(&net, p)?;
                pinned.insert(var, value);
            }
            let (outcome, solution, code) = match find_solution(&net, &pinned, budget.budget)? {
                FindOutcome::Found(t) => ("found", Some(t), 0),
                FindOutcome::NoSolution => ("no_solution", None, 1),
                FindOutcome::BudgetExhausted => ("budget_exhausted", None, 2),
            };
            Ok(Output { text: pretty(&json!({"outcome": outcome, "solution": solution})), code })
        }
        Command::Query { network, count, max, min, budget, phi } => {
            let m = load(&network, io::extended_from_json)?;
            let q = Query::parse(&phi).map_err(|e| Failure(64, e.to_string()))?;
            let target = match (max, min) {
                (Some(v), _) => Some((v, Direction::Max)),
                (_, Some(v)) => Some((v, Direction::Min)),
                _ => None,
            };
            if let Some((var, dir)) = target {
                let value = extremum_lookup(&m, &var, dir, &q).map_err(|e| Failure(64, e.to_string()))?;
                let code = if value.is_some() { 0 } else { 1 };
                return Ok(Output { text: pretty(&json!({"value": value})), code });
            }
            let answer = match count {
                Some(n) => top_k_solutions_with(&m, &q, n, budget.budget),
                None => select_solution_with(&m, &q, budget.budget),
            }
            .map_err(|e| match e {
                Error::Query(msg) => Failure(64, msg),
                other => other.into(),
            })?;
            let code = match (answer.satisfiable, answer.budget_exhausted) {
                (true, _) => 0,
                (false, true) => 2,
                (false, false) => 1,
            };
            Ok(Output { text: pretty(&answer), code })
        }
        Command::Serve { network, port, host } => {
            let m = load(&network, io::extended_from_json)?;
            let addr: std::net::SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Failure(64, format!("bad address {host}:{port}: {e}")))?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure(74, e.to_string()))?;
            eprintln!("serving on http://{addr}");
            rt.block_on(minnet_service::serve(m, addr))
                .map_err(|e| Failure(74, e.to_string()))?;
            Ok(ok(String::new()))
        }
    }
}

fn transform(t: Transform) -> Result<Output, Failure> {
    match t {
        Transform::Sym { k, cnf } => {
            let c = load(&cnf, io::parse_dimacs_cnf)?;
            let (out, _) = symmetry_transform(&c, k)?;
            Ok(ok(io::write_dimacs_cnf(&out)))
        }
        Transform::Sat2net { k, cnf } => {
            let c = load(&cnf, io::parse_dimacs_cnf)?;
            Ok(ok(pretty(&io::network_to_file(&sat_to_network(&c, k)?))))
        }
        Transform::Std { maps, network } => {
            let net = load(&network, io::network_from_json)?;
            let (out, value_maps) = standardize_domains(&net)?;
            if let Some(path) = maps {
                let named: std::collections::BTreeMap<&str, &Vec<Value>> = net
                    .variables()
                    .iter()
                    .map(|v| v.name())
                    .zip(&value_maps.0)
                    .collect();
                fs::write(&path, pretty(&named)).map_err(|e| Failure(74, format!("{}: {e}", path.display())))?;
            }
            Ok(ok(pretty(&io::network_to_file(&out))))
        }
        Transform::ThreeColNet { k, graph } => {
            let g = load(&graph, io::parse_dimacs_graph)?;
            Ok(ok(pretty(&io::network_to_file(&threecol_network(&g, k)?))))
        }
        Transform::ThreeColRel { k, graph } => {
            let g = load(&graph, io::parse_dimacs_graph)?;
            Ok(ok(pretty(&io::relation_to_file(&threecol_to_constraint(&g, k)?))))
        }
        Transform::Bival { cnf } => {
            let c = load(&cnf, io::parse_dimacs_cnf)?;
            let (rho, p) = bivalued_construction(&c)?;
            eprintln!("m={} n={} r0={} r={}", p.m, p.n, p.r0, p.r);
            Ok(ok(pretty(&io::relation_to_file(&rho))))
        }
        Transform::Trival { graph } => {
            let g = load(&graph, io::parse_dimacs_graph)?;
            Ok(ok(pretty(&io::relation_to_file(&trivalued_construction(&g)?))))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(Output { text, code }) => {
            let written = match &out {
                Some(path) => fs::write(path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("minnet: cannot write output: {e}");
                return ExitCode::from(74);
            }
            ExitCode::from(code)
        }
        Err(Failure(code, msg)) => {
            eprintln!("minnet: {msg}");
            ExitCode::from(code)
        }
    }
}
