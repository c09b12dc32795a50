//! Command-line front end for the labeling-scheme workbench.
//!
//! Exit codes: 0 success (or positive verdict), 1 definitive negative
//! (non-member, not equivalent, parameter above the bound), 2 budget
//! exceeded, 3 usage or parse error. Searches never conflate "proved
//! absent" with "gave up"; scripts can rely on the distinction.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use implic::diag::{self, DecoderRegistry, IndexPolicy};
use implic::graphs::{self, Graph};
use implic::logic::{self, Formula, Universe};
use implic::schemes::{self, BitScheme, BuiltinDecoder, Labeling, LogicalScheme};
use implic::{Budget, SearchOutcome};

#[derive(Parser)]
#[command(
    name = "implic",
    version,
    about = "Workbench for adjacency labeling schemes with logical label decoders"
)]
struct Cli {
    /// Emit JSON instead of plain text
    #[arg(long, global = true)]
    json: bool,

    /// Evaluation budget for exhaustive searches (default 100000000)
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Seed for sampled outputs; reserved, current commands are fully
    /// deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct FormulaArg {
    /// Formula in the DSL, e.g. "!(x2 < y1 | y2 < x1)"
    #[arg(long)]
    formula: Option<String>,

    /// Read the formula from a file instead
    #[arg(long, value_name = "PATH", conflicts_with = "formula")]
    formula_file: Option<PathBuf>,

    /// Declared free-variable count 2k (inferred when omitted)
    #[arg(long)]
    vars: Option<usize>,
}

impl FormulaArg {
    fn load(&self) -> Result<Formula> {
        let text = match (&self.formula, &self.formula_file) {
            (Some(t), None) => t.clone(),
            (None, Some(p)) => std::fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))?,
            _ => bail!("exactly one of --formula and --formula-file is required"),
        };
        Ok(logic::parse_formula_arity(text.trim(), self.vars)?)
    }
}

#[derive(Args)]
struct GraphArg {
    /// graph6/digraph6 string
    #[arg(long)]
    graph: Option<String>,

    /// File with one graph6/digraph6 line (`#` comments ignored)
    #[arg(long, value_name = "PATH", conflicts_with = "graph")]
    graph_file: Option<PathBuf>,
}

impl GraphArg {
    fn load(&self) -> Result<Graph> {
        match (&self.graph, &self.graph_file) {
            (Some(s), None) => Ok(graphs::parse_graph6(s)?),
            (None, Some(p)) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?;
                let gs = graphs::parse_graph_lines(&text)?;
                match gs.len() {
                    1 => Ok(gs.into_iter().next().unwrap()),
                    k => bail!("expected exactly one graph in the file, found {k}"),
                }
            }
            _ => bail!("exactly one of --graph and --graph-file is required"),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a formula in the capped structure on [N]
    Eval {
        #[command(flatten)]
        formula: FormulaArg,
        /// Universe size N
        #[arg(long)]
        universe: u64,
        /// Comma-separated values for x1..x2k
        #[arg(long)]
        assign: String,
    },
    /// Decide scheme membership of a graph, with a witness labeling
    Member {
        #[command(flatten)]
        formula: FormulaArg,
        /// Built-in bit decoder name (all, none, eq, lt, interval)
        #[arg(long, conflicts_with_all = ["formula", "formula_file"])]
        decoder: Option<String>,
        /// Label length multiplier (bit schemes) or universe exponent
        /// (logical schemes)
        #[arg(long)]
        c: usize,
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Least k such that the graph has a quantifier-free order scheme
    /// with k numbers per vertex
    Lambda {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        kmax: usize,
    },
    /// Least k such that the graph is a k-interval graph
    IntervalNumber {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        kmax: usize,
    },
    /// Compile a quantifier-free order formula to its DAG list
    Compile {
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Convert an unweighted DAG back to a conjunctive clause
    Dag2clause {
        /// DAG text, e.g. "parts: {1,3}{2}{4}; arcs: 2->1"
        #[arg(long)]
        dag: String,
    },
    /// Transitive-closure canonical form of an unweighted DAG
    Canon {
        #[arg(long)]
        dag: String,
    },
    /// Semantic equivalence of two quantifier-free order formulas
    Equiv {
        /// First formula (prefix with @ to read a file)
        a: String,
        /// Second formula (prefix with @ to read a file)
        b: String,
        /// Declared free-variable count for both
        #[arg(long)]
        vars: Option<usize>,
    },
    /// Scheme-union formula on k+1 numbers per vertex
    Union {
        a: String,
        b: String,
        #[arg(long)]
        vars: Option<usize>,
    },
    /// All ordered set partitions of 1..=m
    WeakOrders { m: usize },
    /// Member i of the attached-4-cycles family, as graph6
    Family { i: usize },
    /// Graph enumeration utilities
    Graphs {
        #[command(subcommand)]
        cmd: GraphsCmd,
    },
    /// Diagonalization runs over a decoder registry
    Diag {
        #[command(subcommand)]
        cmd: DiagCmd,
    },
    /// Re-encode graph6/digraph6 lines from a file or stdin
    G6 { file: Option<PathBuf> },
}

#[derive(Subcommand)]
enum GraphsCmd {
    /// One representative per isomorphism class, in canonical-code order
    Enum {
        n: usize,
        #[arg(long)]
        directed: bool,
    },
}

#[derive(Subcommand)]
enum DiagCmd {
    /// Build and verify the diagonalization class up to --nmax
    Build {
        /// Comma-separated built-in decoder names, e.g. all,eq,lt
        #[arg(long)]
        registry: String,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        directed: bool,
        /// Index policy: modulo or strict (no scheme beyond the list)
        #[arg(long, default_value = "modulo")]
        policy: String,
    },
}

const EXIT_NEGATIVE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with successful exit
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn budget_of(cli: &Cli) -> Budget {
    match cli.budget {
        Some(evals) => Budget::with_evals(evals),
        None => Budget::default(),
    }
}

fn formula_from(text: &str, vars: Option<usize>) -> Result<Formula> {
    let body = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => text.to_string(),
    };
    Ok(logic::parse_formula_arity(body.trim(), vars)?)
}

fn labeling_json(l: &Labeling) -> serde_json::Value {
    json!({ "n": l.n(), "k": l.k(), "labels": l.tuples() })
}

fn budget_exceeded(json_mode: bool) -> ExitCode {
    if json_mode {
        println!("{}", json!({ "budget_exceeded": true }));
    } else {
        println!("budget exceeded");
    }
    ExitCode::from(EXIT_BUDGET)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let budget = budget_of(cli);
    match &cli.cmd {
        Cmd::Eval {
            formula,
            universe,
            assign,
        } => {
            let phi = formula.load()?;
            let values: Vec<u64> = assign
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|e| anyhow!("bad assignment: {e}"))?;
            let value = logic::eval(&phi, Universe(*universe), &values)?;
            if cli.json {
                println!("{}", json!({ "value": value }));
            } else {
                println!("{value}");
            }
            Ok(if value {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NEGATIVE)
            })
        }

        Cmd::Member {
            formula,
            decoder,
            c,
            graph,
        } => {
            let g = graph.load()?;
            match decoder {
                Some(name) => {
                    let dec = BuiltinDecoder::from_name(name)
                        .ok_or_else(|| anyhow!("unknown decoder `{name}`"))?;
                    let scheme = BitScheme::new(dec, *c);
                    match schemes::member_bitscheme(&scheme, &g, &budget)? {
                        SearchOutcome::Witness(w) => {
                            let labels: Vec<String> =
                                w.labels().iter().map(|b| b.to_string()).collect();
                            let witness = json!({ "n": w.n(), "c": c, "labels": labels });
                            if cli.json {
                                println!("{}", json!({ "member": true, "witness": witness }));
                            } else {
                                println!("{witness}");
                            }
                            Ok(ExitCode::SUCCESS)
                        }
                        SearchOutcome::Absent => {
                            if cli.json {
                                println!("{}", json!({ "member": false }));
                            } else {
                                println!("non-member (exhaustive)");
                            }
                            Ok(ExitCode::from(EXIT_NEGATIVE))
                        }
                        SearchOutcome::BudgetExceeded => Ok(budget_exceeded(cli.json)),
                    }
                }
                None => {
                    let phi = formula.load()?;
                    let scheme = LogicalScheme::new(phi, *c)?;
                    match schemes::member_logical(&scheme, &g, &budget)? {
                        SearchOutcome::Witness(w) => {
                            let witness = labeling_json(&w);
                            if cli.json {
                                println!("{}", json!({ "member": true, "witness": witness }));
                            } else {
                                println!("{witness}");
                            }
                            Ok(ExitCode::SUCCESS)
                        }
                        SearchOutcome::Absent => {
                            if cli.json {
                                println!("{}", json!({ "member": false }));
                            } else {
                                println!("non-member (exhaustive)");
                            }
                            Ok(ExitCode::from(EXIT_NEGATIVE))
                        }
                        SearchOutcome::BudgetExceeded => Ok(budget_exceeded(cli.json)),
                    }
                }
            }
        }

        Cmd::Lambda { graph, kmax } => {
            let g = graph.load()?;
            match schemes::lambda_foqf(&g, *kmax, &budget)? {
                SearchOutcome::Witness((k, labeling, dags)) => {
                    let dag_texts: Vec<String> = dags.iter().map(|d| d.to_string()).collect();
                    if cli.json {
                        println!(
                            "{}",
                            json!({
                                "k": k,
                                "witness": labeling_json(&labeling),
                                "dags": dag_texts,
                            })
                        );
                    } else {
                        println!("k = {k}");
                        println!("{}", labeling_json(&labeling));
                        for d in dag_texts {
                            println!("{d}");
                        }
                    }
                    Ok(ExitCode::SUCCESS)
                }
                SearchOutcome::Absent => {
                    if cli.json {
                        println!("{}", json!({ "k": null, "exceeds": kmax }));
                    } else {
                        println!("parameter exceeds kmax = {kmax} (exhaustive)");
                    }
                    Ok(ExitCode::from(EXIT_NEGATIVE))
                }
                SearchOutcome::BudgetExceeded => Ok(budget_exceeded(cli.json)),
            }
        }

        Cmd::IntervalNumber { graph, kmax } => {
            let g = graph.load()?;
            match schemes::interval_number(&g, *kmax, &budget)? {
                SearchOutcome::Witness((k, model)) => {
                    if cli.json {
                        println!(
                            "{}",
                            json!({ "k": k, "intervals": model.intervals() })
                        );
                    } else {
                        println!("k = {k}");
                        println!("{}", json!({ "intervals": model.intervals() }));
                    }
                    Ok(ExitCode::SUCCESS)
                }
                SearchOutcome::Absent => {
                    if cli.json {
                        println!("{}", json!({ "k": null, "exceeds": kmax }));
                    } else {
                        println!("interval number exceeds kmax = {kmax} (exhaustive)");
                    }
                    Ok(ExitCode::from(EXIT_NEGATIVE))
                }
                SearchOutcome::BudgetExceeded => Ok(budget_exceeded(cli.json)),
            }
        }

        Cmd::Compile { formula } => {
            let phi = formula.load()?;
            let dags = implic::dags::formula_to_dags(&phi)?;
            let texts: Vec<String> = dags.iter().map(|d| d.to_string()).collect();
            if cli.json {
                println!("{}", json!({ "dags": texts }));
            } else {
                for t in &texts {
                    println!("{t}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Dag2clause { dag } => {
            let d: implic::dags::KDag = dag.parse()?;
            let clause = implic::dags::dag_to_clause(&d)?;
            let text = clause.to_formula().to_string();
            if cli.json {
                println!("{}", json!({ "clause": text }));
            } else {
                println!("{text}");
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Canon { dag } => {
            let d: implic::dags::KDag = dag.parse()?;
            let closed = implic::dags::closure_canon(&d)?;
            if cli.json {
                println!("{}", json!({ "dag": closed.to_string() }));
            } else {
                println!("{closed}");
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Equiv { a, b, vars } => {
            let (fa, fb) = (formula_from(a, *vars)?, formula_from(b, *vars)?);
            let eq = logic::equivalent(&fa, &fb)?;
            if cli.json {
                println!("{}", json!({ "equivalent": eq }));
            } else {
                println!("{}", if eq { "equivalent" } else { "not equivalent" });
            }
            Ok(if eq {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NEGATIVE)
            })
        }

        Cmd::Union { a, b, vars } => {
            let (fa, fb) = (formula_from(a, *vars)?, formula_from(b, *vars)?);
            let u = schemes::union_scheme(&fa, &fb)?;
            if cli.json {
                println!("{}", json!({ "formula": u.to_string(), "vars": u.arity() }));
            } else {
                println!("{u}");
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::WeakOrders { m } => {
            let orders = logic::weak_orders(*m)?;
            if cli.json {
                let texts: Vec<String> = orders.iter().map(|w| w.to_string()).collect();
                println!(
                    "{}",
                    json!({ "m": m, "count": orders.len(), "orders": texts })
                );
            } else {
                for w in &orders {
                    println!("{w}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Family { i } => {
            let g = graphs::family_fig1(*i)?;
            let g6 = graphs::write_graph6(&g)?;
            if cli.json {
                println!(
                    "{}",
                    json!({ "i": i, "n": g.n(), "edges": g.edge_count(), "graph6": g6 })
                );
            } else {
                println!("{g6}");
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Graphs {
            cmd: GraphsCmd::Enum { n, directed },
        } => {
            let stream = graphs::enumerate_graphs(*n, *directed)?;
            let lines: Vec<String> = stream
                .map(|g| graphs::write_graph6(&g))
                .collect::<Result<_, _>>()?;
            if cli.json {
                println!(
                    "{}",
                    json!({ "n": n, "directed": directed, "count": lines.len(), "graphs": lines })
                );
            } else {
                for l in &lines {
                    println!("{l}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Diag {
            cmd:
                DiagCmd::Build {
                    registry,
                    nmax,
                    directed,
                    policy,
                },
        } => {
            let policy = match policy.as_str() {
                "modulo" => IndexPolicy::Modulo,
                "strict" => IndexPolicy::EmptyBeyondRange,
                other => bail!("unknown policy `{other}` (use modulo or strict)"),
            };
            let reg = DecoderRegistry::from_spec(registry, policy)?;
            let (class, build) = diag::build_diag_class(&reg, *nmax, *directed, &budget)?;
            let verify = diag::verify_diagonal(&class, &reg, *directed, &budget)?;
            let entries: Vec<serde_json::Value> = build
                .entries
                .iter()
                .map(|e| {
                    let verdicts = verify
                        .per_size
                        .iter()
                        .find(|v| v.n == e.n)
                        .map(|v| {
                            json!({
                                "outside": clause_json(&v.outside),
                                "least": clause_json(&v.least),
                                "embeds": clause_json(&v.embeds),
                            })
                        })
                        .unwrap_or(serde_json::Value::Null);
                    json!({
                        "n": e.n,
                        "tau": e.tau,
                        "decoder": e.decoder,
                        "outcome": outcome_json(&e.outcome),
                        "verdicts": verdicts,
                    })
                })
                .collect();
            let report = json!({
                "n_max": nmax,
                "directed": directed,
                "registry": registry,
                "policy": if policy == IndexPolicy::Modulo { "modulo" } else { "strict" },
                "entries": entries,
                "all_passed": verify.all_passed,
            });
            println!("{report}");
            Ok(if verify.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NEGATIVE)
            })
        }

        Cmd::G6 { file } => {
            let text = match file {
                Some(p) => std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?,
                None => {
                    let mut buf = String::new();
                    std::io::stdin().read_to_string(&mut buf)?;
                    buf
                }
            };
            let gs = graphs::parse_graph_lines(&text)?;
            let lines: Vec<String> = gs
                .iter()
                .map(graphs::write_graph6)
                .collect::<Result<_, _>>()?;
            if cli.json {
                println!("{}", json!({ "count": lines.len(), "graphs": lines }));
            } else {
                for l in &lines {
                    println!("{l}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn clause_json(status: &diag::ClauseStatus) -> serde_json::Value {
    match status {
        diag::ClauseStatus::Passed => json!("passed"),
        diag::ClauseStatus::Failed(msg) => json!({ "failed": msg }),
        diag::ClauseStatus::BudgetExceeded => json!("budget_exceeded"),
    }
}

fn outcome_json(outcome: &diag::BuildOutcome) -> serde_json::Value {
    match outcome {
        diag::BuildOutcome::Missing { graph6 } => json!({ "missing": graph6 }),
        diag::BuildOutcome::NoneMissing => json!("none_missing"),
        diag::BuildOutcome::BudgetExceeded => json!("budget_exceeded"),
    }
}
