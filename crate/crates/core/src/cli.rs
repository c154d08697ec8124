//! Command-line driver.
//!
//! Verdicts are reported through the exit code: 0 holds, 1 fails, 2 bound
//! exceeded or error. Automata are read from `FILE` or `FILE:NAME`; `-`
//! (the default for single-operand commands) reads standard input.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{self, Config, Outcome, Verdict, DEFAULT_BUDGET};
use crate::constraint::Q;
use crate::dot::{to_dot, DotOptions};
use crate::game::{self, GameError, DEFAULT_STRATEGY_BUDGET};
use crate::gen::{random_tioa, GenConfig};
use crate::operators::{self, Operator, OperatorError};
use crate::oracle::{self, Bounds, Digitized, Label, OracleError, BOT, TOP};
use crate::syntax::{parse_spec, print_tioa, ParseError};
use crate::tioa::Tioa;

pub const DEFAULT_TRACE_LIMIT: usize = 100_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {message}")]
    Select { path: String, message: String },
    #[error("invalid rational `{0}`")]
    Rational(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "tiospec", version, about = "Timed I/O automata with invariants and co-invariants")]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    Par,
    And,
    Or,
    Quot,
}

impl From<OpArg> for Operator {
    fn from(o: OpArg) -> Self {
        match o {
            OpArg::Par => Operator::Parallel,
            OpArg::And => Operator::Conjunction,
            OpArg::Or => Operator::Disjunction,
            OpArg::Quot => Operator::Quotient,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Grid granularity, an integer or `p/q`.
    #[arg(long, default_value = "1", value_parser = parse_q)]
    pub delta: Q,
    /// Time horizon, an integer or `p/q`.
    #[arg(long, default_value = "12", value_parser = parse_q)]
    pub horizon: Q,
    /// Maximal number of actions per word.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
}

impl GridArgs {
    fn bounds(&self) -> Bounds {
        Bounds::new(self.delta, self.horizon, self.depth)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate every automaton of a file.
    Validate { file: String },
    /// Combine two automata.
    Compose {
        #[arg(long, value_enum)]
        op: OpArg,
        a: String,
        b: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Swap inputs and outputs, exchanging error and magic behaviour.
    Mirror {
        #[arg(default_value = "-")]
        a: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Digitize and determinize by subset construction.
    Det {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(default_value = "-")]
        a: String,
    },
    /// Is ⊥ unreachable without input completion? Fails with a witness.
    ReachBot {
        #[arg(default_value = "-")]
        a: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Does IMP refine SPEC?
    Refine {
        spec: String,
        imp: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Mutual refinement.
    Equiv {
        a: String,
        b: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Extract the bounded triple-trace structure.
    Traces {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(default_value = "-")]
        a: String,
        /// Write TT/TR/TE as JSON to this file (`-` for stdout).
        #[arg(long = "json-out", value_name = "FILE")]
        json_out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TRACE_LIMIT)]
        limit: usize,
    },
    /// Enumerate the strategies of an automaton.
    Strategies {
        #[arg(default_value = "-")]
        a: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_STRATEGY_BUDGET)]
        budget: usize,
    },
    /// Bounded checks of the strategy-semantics results.
    CheckLemmas {
        /// Check this pair instead of a random corpus.
        #[arg(num_args = 2, value_names = ["P", "Q"])]
        pair: Vec<String>,
        #[arg(long, default_value_t = 20)]
        corpus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
    /// Graphviz rendering.
    Dot {
        #[arg(default_value = "-")]
        a: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also draw the implicit ⊥/⊤ completion.
        #[arg(long)]
        completion: bool,
    },
}

fn parse_q(s: &str) -> Result<Q, String> {
    let q: Q = s.trim().parse().map_err(|_| format!("invalid rational `{s}`"))?;
    if q <= Q::from_integer(0) {
        return Err(format!("`{s}` must be positive"));
    }
    Ok(q)
}

fn read(path: &str) -> Result<String, CliError> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|source| CliError::Io { path: path.into(), source })?;
    Ok(text)
}

/// `FILE` holding one automaton, or `FILE:NAME`.
pub fn load(arg: &str) -> Result<Tioa, CliError> {
    let (path, name) = match arg.rsplit_once(':') {
        Some((p, n)) if !p.is_empty() && !n.contains('/') && !Path::new(arg).exists() => (p, Some(n)),
        _ => (arg, None),
    };
    let spec = parse_spec(&read(path)?).map_err(|source| CliError::Parse { path: path.into(), source })?;
    let select = |message: String| CliError::Select { path: path.into(), message };
    match name {
        Some(n) => spec.get(n).cloned().ok_or_else(|| select(format!("no automaton named `{n}`"))),
        None if spec.automata.len() == 1 => Ok(spec.automata.into_iter().next().unwrap()),
        None => {
            let names: Vec<&str> = spec.automata.iter().map(|a| a.name.as_str()).collect();
            Err(select(format!("expected one automaton, found [{}]; use FILE:NAME", names.join(", "))))
        }
    }
}

fn write_to(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, text)
            .map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        _ => out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn line(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

fn code(o: Outcome) -> i32 {
    match o {
        Outcome::Holds => 0,
        Outcome::Fails => 1,
        Outcome::BoundExceeded => 2,
    }
}

fn verdict(cli: &Cli, what: &str, v: &Verdict, out: &mut dyn Write) -> Result<i32, CliError> {
    if cli.json {
        let mut j = serde_json::to_value(v)?;
        j["check"] = json!(what);
        line(out, serde_json::to_string_pretty(&j)?)?;
    } else {
        line(out, format!("{what}: {v}"))?;
    }
    Ok(code(v.outcome))
}

fn label_name(l: &Label) -> String {
    match l {
        Label::Tick => "δ".into(),
        Label::Action(a) => a.clone(),
    }
}

fn digitized_json(d: &Digitized) -> Value {
    let states: Vec<Value> = (0..d.states.len())
        .map(|s| {
            let class = match s {
                BOT => "bot",
                TOP => "top",
                _ => "plain",
            };
            let members: Vec<String> = d.states[s].iter().map(|c| format!("{c:?}")).collect();
            let edges: BTreeMap<String, Vec<usize>> = d.transitions[s]
                .iter()
                .map(|(l, ts)| (label_name(l), ts.iter().map(|t| t.target).collect()))
                .collect();
            json!({ "id": s, "class": class, "members": members, "transitions": edges })
        })
        .collect();
    json!({
        "inputs": d.inputs,
        "outputs": d.outputs,
        "delta": d.delta.to_string(),
        "horizon": d.horizon.to_string(),
        "exact": d.exact,
        "deterministic": d.is_deterministic(),
        "initial": d.initial,
        "states": states,
    })
}

fn corpus_config() -> GenConfig {
    let mut cfg = GenConfig::new(&["a"], &["b"]);
    cfg.max_locations = 2;
    cfg.max_clocks = 1;
    cfg.max_constant = 2;
    cfg
}

/// Runs one command, writing its report to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Validate { file } => {
            let text = read(file)?;
            let (code, report) = match parse_spec(&text) {
                Ok(spec) => {
                    let names: Vec<Value> = spec
                        .automata
                        .iter()
                        .map(|a| json!({ "name": a.name, "deterministic": operators::check_deterministic(a).is_ok() }))
                        .collect();
                    (0, json!({ "valid": true, "automata": names }))
                }
                Err(e @ ParseError::Invalid { .. }) => {
                    (1, json!({ "valid": false, "error": e.to_string(), "line": e.pos().line, "column": e.pos().column }))
                }
                Err(source) => return Err(CliError::Parse { path: file.clone(), source }),
            };
            if cli.json {
                line(out, serde_json::to_string_pretty(&report)?)?;
            } else if code == 0 {
                for a in report["automata"].as_array().unwrap() {
                    let det = if a["deterministic"] == json!(true) { "deterministic" } else { "nondeterministic" };
                    line(out, format!("{}: ok ({det})", a["name"].as_str().unwrap()))?;
                }
            } else {
                line(out, format!("{file}:{}", report["error"].as_str().unwrap()))?;
            }
            Ok(code)
        }
        Command::Compose { op, a, b, output } => {
            let r = operators::compose((*op).into(), &load(a)?, &load(b)?)?;
            write_to(output, &print_tioa(&r), out)?;
            Ok(0)
        }
        Command::Mirror { a, output } => {
            write_to(output, &print_tioa(&operators::mirror(&load(a)?)?), out)?;
            Ok(0)
        }
        Command::Det { grid, a } => {
            let a = load(a)?;
            let d = oracle::determinize_explicit(&oracle::digitize(&a, &grid.bounds()));
            if cli.json {
                line(out, serde_json::to_string_pretty(&digitized_json(&d))?)?;
            } else {
                line(out, format!("{} states, initial {}, exact {}", d.states.len(), d.initial, d.exact))?;
                for (s, ts) in d.transitions.iter().enumerate() {
                    for (l, t) in ts {
                        let to: Vec<String> = t.iter().map(|t| t.target.to_string()).collect();
                        line(out, format!("{s} -{}-> {}", label_name(l), to.join(",")))?;
                    }
                }
            }
            Ok(0)
        }
        Command::ReachBot { a, budget } => {
            let v = analysis::reach_bot(&load(a)?, *budget);
            // holds means ⊥ is unreachable
            verdict(cli, "bot-free", &v, out)
        }
        Command::Refine { spec, imp, budget, grid } => {
            let config = Config { budget: *budget, bounds: grid.bounds() };
            let v = analysis::refines(&load(spec)?, &load(imp)?, &config)?;
            verdict(cli, "refine", &v, out)
        }
        Command::Equiv { a, b, budget, grid } => {
            let config = Config { budget: *budget, bounds: grid.bounds() };
            let v = analysis::equivalent(&load(a)?, &load(b)?, &config)?;
            verdict(cli, "equiv", &v, out)
        }
        Command::Traces { grid, a, json_out, limit } => {
            let a = load(a)?;
            let bounds = grid.bounds();
            let ts = oracle::extract_triple_traces(&oracle::digitize(&a, &bounds), &bounds);
            let m = ts.materialize(*limit)?;
            if let Some(p) = json_out {
                let mut text = serde_json::to_string_pretty(&ts.to_json(*limit)?)?;
                text.push('\n');
                write_to(&Some(p.clone()), &text, out)?;
            }
            if cli.json {
                let summary = json!({ "tt": m.tt.len(), "tr": m.tr.len(), "te": m.te.len(), "exact": ts.exact });
                line(out, serde_json::to_string_pretty(&summary)?)?;
            } else if json_out.as_deref().is_none_or(|p| p.as_os_str() != "-") {
                line(out, format!("TT {} words, TR {}, TE {} (exact: {})", m.tt.len(), m.tr.len(), m.te.len(), ts.exact))?;
            }
            Ok(0)
        }
        Command::Strategies { a, depth, budget } => {
            let s = game::strategies_of(&load(a)?, *depth, *budget)?;
            if cli.json {
                let all: Vec<Value> = s.iter().map(|g| g.to_json()).collect();
                line(out, serde_json::to_string_pretty(&json!({ "depth": depth, "count": s.len(), "strategies": all }))?)?;
            } else {
                line(out, format!("{} strategies at depth {depth}", s.len()))?;
                for g in &s {
                    line(out, serde_json::to_string(&g.to_json()["root"])?)?;
                }
            }
            Ok(0)
        }
        Command::CheckLemmas { pair, corpus, seed, depth, budget } => {
            let pairs = if pair.is_empty() {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let cfg = corpus_config();
                (0..*corpus)
                    .map(|i| (random_tioa(&mut rng, &format!("p{i}"), &cfg), random_tioa(&mut rng, &format!("q{i}"), &cfg)))
                    .collect()
            } else {
                vec![(load(&pair[0])?, load(&pair[1])?)]
            };
            let mut tally: BTreeMap<String, [usize; 3]> = BTreeMap::new();
            let mut reports = Vec::new();
            let mut worst = 0;
            for (p, q) in &pairs {
                let r = game::check_lemmas(p, q, *depth, *budget)?;
                for l in &r.results {
                    let c = code(l.outcome);
                    tally.entry(l.name.clone()).or_default()[c as usize] += 1;
                    worst = match (worst, c) {
                        (1, _) | (_, 1) => 1,
                        (w, c) => w.max(c),
                    };
                    if !cli.json && (pairs.len() == 1 || l.outcome == Outcome::Fails) {
                        line(out, format!("{} / {}: {} {:?} ({})", p.name, q.name, l.name, l.outcome, l.detail))?;
                    }
                }
                reports.push(json!({ "p": p.name, "q": q.name, "report": r }));
            }
            if cli.json {
                line(out, serde_json::to_string_pretty(&json!({ "depth": depth, "pairs": reports }))?)?;
            } else {
                for (name, [h, f, b]) in &tally {
                    line(out, format!("{name}: {h} hold, {f} fail, {b} bound exceeded"))?;
                }
            }
            Ok(worst)
        }
        Command::Dot { a, output, completion } => {
            let text = to_dot(&load(a)?, DotOptions { completion: *completion });
            write_to(output, &text, out)?;
            Ok(0)
        }
    }
}
