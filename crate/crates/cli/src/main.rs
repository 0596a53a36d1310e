mod error;
mod fixtures;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use hoport_core::dot::to_dot;
use hoport_core::json::{self, to_canonical_string, GraphDoc, RuleDoc, SignatureDoc};
use hoport_core::matcher::{find_morphisms, MatchOptions};
use hoport_core::oracle::brute_force_morphisms;
use hoport_core::rewrite::{enumerate_redexes, normalize, NormalForm, Strategy};
use hoport_core::{PSignature, PortGraph, Rule};
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "hoport", version, about = "Match and rewrite higher-order port graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a signature, graph or rule file is well formed.
    Validate {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Print every morphism from a pattern into a subject.
    Match {
        #[arg(short, long)]
        pattern: PathBuf,
        #[arg(short, long)]
        subject: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        /// Enumerate by brute force instead of the matcher.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = hoport_core::oracle::DEFAULT_LIMIT)]
        oracle_limit: usize,
        #[arg(long)]
        max_solutions: Option<usize>,
        /// Keep one port order per higher-order image.
        #[arg(long)]
        one_bijection: bool,
        #[arg(long)]
        timeout_ms: Option<u64>,
    },
    /// Apply one redex of a rule and print the rewritten graph.
    Apply {
        #[arg(short, long)]
        rule: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        redex: usize,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Rewrite until no rule applies.
    Normalize {
        /// A rule file, or a directory of them.
        #[arg(short = 'R', long)]
        rules: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Leftmost)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Re-emit a file as canonical JSON, or a graph as DOT.
    Export {
        file: PathBuf,
        #[arg(long)]
        dot: bool,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Write the built-in fixture files.
    Fixtures {
        #[arg(env = "HOPORT_FIXTURES", default_value = "fixtures")]
        dir: PathBuf,
    },
    /// Run the HTTP session server.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Load sessions from this file at start and save them on shutdown.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Leftmost,
    Exhaustive,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Leftmost => Strategy::LeftmostFirst,
            StrategyArg::Exhaustive => Strategy::ExhaustiveBfs,
        }
    }
}

enum Kind {
    Signature,
    Graph,
    Rule,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn kind_of(path: &Path, text: &str) -> Result<Kind, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Load {
        path: path.into(),
        source: e.into(),
    })?;
    Ok(if value.get("lhs").is_some() {
        Kind::Rule
    } else if value.get("edges").is_some() {
        Kind::Graph
    } else {
        Kind::Signature
    })
}

fn load_signature(path: &Path) -> Result<Arc<PSignature>, CliError> {
    let sig = json::signature_from_str(&read(path)?).map_err(|source| CliError::Load {
        path: path.into(),
        source,
    })?;
    let problems = sig.validate();
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(ToString::to_string).collect();
        return Err(CliError::BadSignature(text.join("; ")));
    }
    Ok(Arc::new(sig))
}

/// `--sig` if given, else `signature.json` beside `near` or one level up.
fn resolve_signature(explicit: Option<&Path>, near: &Path) -> Result<Arc<PSignature>, CliError> {
    if let Some(path) = explicit {
        return load_signature(path);
    }
    let found = near
        .ancestors()
        .skip(1)
        .take(2)
        .map(|dir| dir.join("signature.json"))
        .find(|p| p.is_file());
    match found {
        Some(path) => load_signature(&path),
        None => Err(CliError::Usage(format!(
            "no signature.json next to {}; pass --sig",
            near.display()
        ))),
    }
}

fn load_graph(path: &Path, sig: &Arc<PSignature>) -> Result<PortGraph, CliError> {
    json::graph_from_str(&read(path)?, sig.clone()).map_err(|source| CliError::Load {
        path: path.into(),
        source,
    })
}

fn load_rule(path: &Path, sig: &Arc<PSignature>) -> Result<Rule, CliError> {
    json::rule_from_str(&read(path)?, sig.clone()).map_err(|source| CliError::Load {
        path: path.into(),
        source,
    })
}

fn load_rules(path: &Path, sig: &Arc<PSignature>) -> Result<Vec<Rule>, CliError> {
    if !path.is_dir() {
        return Ok(vec![load_rule(path, sig)?]);
    }
    let io = |source| CliError::Io {
        path: path.into(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.extension().is_some_and(|e| e == "json") {
            files.push(p);
        }
    }
    files.sort();
    files.iter().map(|p| load_rule(p, sig)).collect()
}

pub(crate) fn normal_form_json(nf: &NormalForm) -> Value {
    json!({ "graph": GraphDoc::of(&nf.graph), "derivation": nf.derivation })
}

fn print(value: &impl serde::Serialize) {
    print!("{}", to_canonical_string(value));
}

fn validate(file: &Path, sig: Option<&Path>) -> Result<(), CliError> {
    let text = read(file)?;
    let report = match kind_of(file, &text)? {
        Kind::Signature => {
            let sig = load_signature(file)?;
            json!({ "kind": "signature", "names": sig.decls().count() })
        }
        Kind::Graph => {
            let sig = resolve_signature(sig, file)?;
            let g = load_graph(file, &sig)?;
            let broken = g.check_invariants();
            if !broken.is_empty() {
                return Err(CliError::BadGraph(broken.join("; ")));
            }
            let warnings: Vec<String> = g.warnings().iter().map(ToString::to_string).collect();
            json!({
                "kind": "graph",
                "nodes": g.node_count(),
                "edges": g.edges().count(),
                "interface": g.interface().len(),
                "warnings": warnings,
            })
        }
        Kind::Rule => {
            let sig = resolve_signature(sig, file)?;
            let rule = load_rule(file, &sig)?;
            json!({ "kind": "rule", "name": rule.name, "interface": rule.interface_map.len() })
        }
    };
    print(&report);
    Ok(())
}

fn export(file: &Path, dot: bool, sig: Option<&Path>) -> Result<(), CliError> {
    let text = read(file)?;
    match kind_of(file, &text)? {
        Kind::Signature if !dot => print(&SignatureDoc::of(&*load_signature(file)?)),
        Kind::Graph => {
            let g = load_graph(file, &resolve_signature(sig, file)?)?;
            if dot {
                print!("{}", to_dot(&g));
            } else {
                print(&GraphDoc::of(&g));
            }
        }
        Kind::Rule if !dot => print(&RuleDoc::of(&load_rule(file, &resolve_signature(sig, file)?)?)),
        _ => return Err(CliError::Usage("--dot needs a graph file".into())),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { file, sig } => validate(&file, sig.as_deref()),
        Command::Match {
            pattern,
            subject,
            sig,
            oracle,
            oracle_limit,
            max_solutions,
            one_bijection,
            timeout_ms,
        } => {
            let sig = resolve_signature(sig.as_deref(), &subject)?;
            let p = load_graph(&pattern, &sig)?;
            let s = load_graph(&subject, &sig)?;
            let found = if oracle {
                brute_force_morphisms(&p, &s, oracle_limit)?
            } else {
                let opts = MatchOptions {
                    max_solutions,
                    enumerate_ho_port_bijections: !one_bijection,
                    timeout_ms,
                };
                find_morphisms(&p, &s, &opts)?
            };
            eprintln!("{}", found.len());
            print(&found);
            Ok(())
        }
        Command::Apply {
            rule,
            graph,
            redex,
            sig,
        } => {
            let sig = resolve_signature(sig.as_deref(), &graph)?;
            let rules = [load_rule(&rule, &sig)?];
            let g = load_graph(&graph, &sig)?;
            let redexes = enumerate_redexes(&rules, &g)?;
            let chosen = redexes.get(redex).ok_or(CliError::NoSuchRedex {
                index: redex,
                count: redexes.len(),
            })?;
            let out = chosen.apply(&rules, &g)?;
            eprintln!(
                "{}: removed {:?}, added {:?}",
                rules[0].name, out.diff.removed, out.diff.added
            );
            print(&GraphDoc::of(&out.graph));
            Ok(())
        }
        Command::Normalize {
            rules,
            graph,
            strategy,
            max_steps,
            sig,
        } => {
            let sig = resolve_signature(sig.as_deref(), &graph)?;
            let rules = load_rules(&rules, &sig)?;
            let g = load_graph(&graph, &sig)?;
            let forms = normalize(&rules, &g, strategy.into(), max_steps)?;
            let forms: Vec<Value> = forms.iter().map(normal_form_json).collect();
            print(&json!({ "normal_forms": forms }));
            Ok(())
        }
        Command::Export { file, dot, sig } => export(&file, dot, sig.as_deref()),
        Command::Fixtures { dir } => {
            let written = fixtures::write(&dir)?;
            print(&json!({ "dir": dir, "files": written }));
            Ok(())
        }
        Command::Serve { addr, snapshot } => {
            let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
                path: PathBuf::from("<runtime>"),
                source,
            })?;
            runtime.block_on(hoport_server::serve(addr, snapshot))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            print(&e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
