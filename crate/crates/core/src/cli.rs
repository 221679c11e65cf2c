//! Command-line frontend. [`run`] is pure apart from reading input files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Read;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::compaction::{compaction_matrix, compaction_vector, reduce, CompactionError};
use crate::cycle::{
    exhaustive_cycle_search, find_cycle_order, verify_cycle, CycleError, CyclicOrder,
    DEFAULT_EXHAUSTIVE_MAX,
};
use crate::gen::{generate, GenKind, GenSpec};
use crate::metric::{parse_matrix, DistanceMatrix, Label, MatrixFormat};
use crate::rational::Rational;
use crate::realize::{realize, Analysis, RealizationResult, RealizeOptions, Status, Terminal};
use crate::tropical::{sweep, sweep_tilde};

pub const TRACE_VERSION: u32 = 1;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "metreal", version, about = "Realize distance matrices by weighted trees and unicyclic graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Realize a distance matrix by a tree or a genus-1 graph.
    Realize(RealizeArgs),
    /// Check (or search for) a cyclic order realizing the matrix as a cycle.
    CheckCycle(CheckCycleArgs),
    /// Print one compaction and reduction step.
    Compact(CompactArgs),
    /// Evaluate the tropical cycle polynomials.
    Tropical(TropicalArgs),
    /// Generate a random instance.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Summary,
    Json,
    Dot,
    Graphml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Summary,
    Json,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Matrix file, or "-" for stdin.
    #[arg(default_value = "-")]
    pub input: String,
    #[arg(long, value_enum, default_value_t = InputFormat::Csv)]
    pub input_format: InputFormat,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Largest order for the exhaustive cyclic-order search.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_MAX)]
    pub exhaustive_max: usize,
    /// Only run the greedy cyclic-order search.
    #[arg(long)]
    pub no_exhaustive: bool,
}

impl SearchArgs {
    fn options(&self) -> RealizeOptions {
        RealizeOptions {
            exhaustive: !self.no_exhaustive,
            exhaustive_max: self.exhaustive_max,
        }
    }
}

#[derive(Debug, Args)]
pub struct RealizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Summary)]
    pub output: OutputFormat,
    /// Include the per-iteration compaction trace.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct CheckCycleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Cyclic order as comma-separated labels, e.g. 1,4,5,3,2,6.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Summary)]
    pub output: ReportFormat,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct CompactArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Summary)]
    pub output: ReportFormat,
}

#[derive(Debug, Args)]
pub struct TropicalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Cyclic order; searched for when omitted.
    #[arg(long)]
    pub order: Option<String>,
    /// Also evaluate the pendant-weighted polynomials.
    #[arg(long)]
    pub tilde: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Summary)]
    pub output: ReportFormat,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Tree,
    Genus1,
    Cycle,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Number of labels.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub cycle_len: Option<usize>,
    #[arg(long, default_value = "1")]
    pub weight_min: Rational,
    #[arg(long, default_value = "4")]
    pub weight_max: Rational,
    #[arg(long, value_enum, default_value_t = ReportFormat::Summary)]
    pub output: ReportFormat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutput {
    fn ok(stdout: String) -> Self {
        RunOutput {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(message: impl std::fmt::Display) -> Self {
        RunOutput {
            code: EXIT_ERROR,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Parses `args` (program name first) and executes the subcommand.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    RunOutput::ok(text)
                }
                _ => RunOutput {
                    code: EXIT_ERROR,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match cli.command {
        Command::Realize(a) => run_realize(&a, stdin),
        Command::CheckCycle(a) => run_check_cycle(&a, stdin),
        Command::Compact(a) => run_compact(&a, stdin),
        Command::Tropical(a) => run_tropical(&a, stdin),
        Command::Gen(a) => run_gen(&a),
    }
}

fn read_matrix(args: &InputArgs, stdin: &mut dyn Read) -> Result<DistanceMatrix, RunOutput> {
    let text = if args.input == "-" {
        let mut buf = String::new();
        stdin
            .read_to_string(&mut buf)
            .map_err(|e| RunOutput::error(format!("reading stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(&args.input)
            .map_err(|e| RunOutput::error(format!("reading {}: {e}", args.input)))?
    };
    let format = match args.input_format {
        InputFormat::Csv => MatrixFormat::Csv,
        InputFormat::Json => MatrixFormat::Json,
    };
    parse_matrix(&text, format).map_err(RunOutput::error)
}

fn parse_order(text: &str) -> Result<CyclicOrder, RunOutput> {
    let labels = text
        .split(',')
        .map(|t| t.trim().parse::<Label>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RunOutput::error(format!("bad order {text:?}: {e}")))?;
    CyclicOrder::new(labels).map_err(RunOutput::error)
}

fn tuple<T: ToString>(items: &[T]) -> String {
    let parts: Vec<String> = items.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

fn list<T: ToString>(items: &[T]) -> String {
    let parts: Vec<String> = items.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn set_list(groups: &[Vec<Label>]) -> String {
    let parts: Vec<String> = groups
        .iter()
        .map(|g| {
            let inner: Vec<String> = g.iter().map(ToString::to_string).collect();
            format!("{{{}}}", inner.join(","))
        })
        .collect();
    format!("[{}]", parts.join(","))
}

fn run_realize(args: &RealizeArgs, stdin: &mut dyn Read) -> RunOutput {
    let d = match read_matrix(&args.input, stdin) {
        Ok(d) => d,
        Err(out) => return out,
    };
    let result = match realize(&d, &args.search.options()) {
        Ok(r) => r,
        Err(e) => return RunOutput::error(e),
    };
    let code = match result.status {
        Status::Unrealizable => EXIT_NEGATIVE,
        _ => EXIT_OK,
    };
    let mut stderr = String::new();
    for note in &result.diagnostics {
        let _ = writeln!(stderr, "{note}");
    }
    let stdout = match args.output {
        OutputFormat::Summary => {
            let mut out = summary_line(&result);
            if args.trace {
                out.push_str(&trace_text(&result.analysis));
            }
            out
        }
        OutputFormat::Json => {
            let mut doc = result_json(&result);
            if args.trace {
                doc["trace"] = trace_json(&result.analysis);
            }
            format!("{doc}\n")
        }
        OutputFormat::Dot | OutputFormat::Graphml => {
            if args.trace {
                stderr.push_str(&trace_text(&result.analysis));
            }
            match &result.graph {
                Some(g) if args.output == OutputFormat::Dot => g.to_dot(),
                Some(g) => g.to_graphml(),
                None => String::new(),
            }
        }
    };
    RunOutput { code, stdout, stderr }
}

/// `status=genus1 total_weight=12 cycle=[6,11,9,13]`
pub fn summary_line(result: &RealizationResult) -> String {
    let mut line = format!("status={}", result.status);
    if let Some(w) = result.total_weight() {
        let _ = write!(line, " total_weight={w}");
    }
    if let Some(c) = result.cycle() {
        let _ = write!(line, " cycle={}", list(&c));
    }
    line.push('\n');
    line
}

pub fn result_json(result: &RealizationResult) -> Value {
    let mut doc = match &result.graph {
        Some(g) => serde_json::to_value(g.to_document()).expect("document serializes"),
        None => json!({ "nodes": [], "edges": [] }),
    };
    let obj = doc.as_object_mut().expect("object");
    let mut out = serde_json::Map::new();
    out.insert("status".into(), json!(result.status));
    for key in ["nodes", "edges"] {
        out.insert(key.into(), obj.remove(key).unwrap_or(json!([])));
    }
    if let Some(c) = result.cycle() {
        out.insert("cycle".into(), json!(c));
    }
    if let Some(w) = result.total_weight() {
        out.insert("total_weight".into(), json!(w));
    }
    if let Some(cert) = &result.certificate {
        out.insert("certificate".into(), json!(cert));
    }
    out.insert("verified".into(), json!(result.verified));
    if !result.diagnostics.is_empty() {
        out.insert("diagnostics".into(), json!(result.diagnostics));
    }
    Value::Object(out)
}

fn terminal_json(terminal: &Terminal) -> Value {
    match terminal {
        Terminal::Order2 { labels, delta } => {
            json!({ "kind": "order2", "labels": labels, "delta": delta })
        }
        Terminal::StarCase { hub, labels, a } => {
            json!({ "kind": "star", "hub": hub, "labels": labels, "a": a.values() })
        }
        Terminal::CycleCase { matrix } => {
            json!({ "kind": "cycle", "labels": matrix.labels(), "matrix": matrix.as_labeled().rows() })
        }
        Terminal::Stuck { diagnostics } => json!({ "kind": "stuck", "diagnostics": diagnostics }),
    }
}

pub fn trace_json(analysis: &Analysis) -> Value {
    let iterations: Vec<Value> = analysis
        .trace
        .iter()
        .map(|s| {
            let relabel: serde_json::Map<String, Value> = s
                .relabel
                .iter()
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect();
            json!({
                "t": s.t,
                "labels": s.labels,
                "a": s.a.values(),
                "groups": s.groups,
                "singletons": s.singletons,
                "theta": s.theta(),
                "sigma": s.sigma(),
                "rho_before": s.rho_before,
                "rho_after": s.rho_after(),
                "relabel": relabel,
            })
        })
        .collect();
    json!({
        "trace_version": TRACE_VERSION,
        "iterations": iterations,
        "terminal": terminal_json(&analysis.terminal),
        "rho_final": analysis.rho_final,
    })
}

pub fn trace_text(analysis: &Analysis) -> String {
    let mut out = String::new();
    for s in &analysis.trace {
        let _ = writeln!(out, "t={} labels={} a={}", s.t, list(&s.labels), s.a.display_tuple());
        let _ = writeln!(out, "  S={} S'={}", set_list(&s.groups), list(&s.singletons));
        let pairs: Vec<String> = s
            .labels
            .iter()
            .filter_map(|l| s.relabel.get(l).map(|n| format!("{l}->{n}")))
            .collect();
        let _ = writeln!(
            out,
            "  theta={} sigma={} rho={}->{} relabel {}",
            s.theta(),
            s.sigma(),
            s.rho_before,
            s.rho_after(),
            pairs.join(" ")
        );
    }
    let _ = match &analysis.terminal {
        Terminal::Order2 { labels, delta } => {
            writeln!(out, "terminal=order2 labels={} delta={delta}", list(labels))
        }
        Terminal::StarCase { hub, labels, a } => writeln!(
            out,
            "terminal=star hub={hub} labels={} a={}",
            list(labels),
            a.display_tuple()
        ),
        Terminal::CycleCase { matrix } => {
            writeln!(out, "terminal=cycle labels={}", list(matrix.labels()))
        }
        Terminal::Stuck { diagnostics } => {
            writeln!(out, "terminal=stuck {}", diagnostics.join("; "))
        }
    };
    out
}

fn search_order(d: &DistanceMatrix, search: &SearchArgs) -> Result<Option<CyclicOrder>, CycleError> {
    if let Some(order) = find_cycle_order(d) {
        if verify_cycle(d, &order).is_ok() {
            return Ok(Some(order));
        }
    }
    if search.no_exhaustive {
        return Ok(None);
    }
    exhaustive_cycle_search(d, search.exhaustive_max)
}

fn run_check_cycle(args: &CheckCycleArgs, stdin: &mut dyn Read) -> RunOutput {
    let d = match read_matrix(&args.input, stdin) {
        Ok(d) => d,
        Err(out) => return out,
    };
    let order = match &args.order {
        Some(text) => match parse_order(text) {
            Ok(o) => o,
            Err(out) => return out,
        },
        None => match search_order(&d, &args.search) {
            Ok(Some(o)) => o,
            Ok(None) => {
                let stdout = match args.output {
                    ReportFormat::Summary => "no cyclic order found\n".to_string(),
                    ReportFormat::Json => format!("{}\n", json!({ "valid": false })),
                };
                return RunOutput {
                    code: EXIT_NEGATIVE,
                    stdout,
                    stderr: String::new(),
                };
            }
            Err(e) => return RunOutput::error(e),
        },
    };
    match verify_cycle(&d, &order) {
        Ok(cert) => {
            let stdout = match args.output {
                ReportFormat::Summary => format!(
                    "valid order={} weights={} optimal={} total_weight={}\n",
                    cert.order,
                    tuple(&cert.weights),
                    cert.optimal,
                    cert.total_weight()
                ),
                ReportFormat::Json => {
                    let mut v = json!(cert);
                    v["valid"] = json!(true);
                    v["total_weight"] = json!(cert.total_weight());
                    format!("{v}\n")
                }
            };
            RunOutput::ok(stdout)
        }
        Err(CycleError::ConditionFailed(v)) => {
            let stdout = match args.output {
                ReportFormat::Summary => format!(
                    "invalid order={order} i={} s={} partner={} lhs={} forward={} backward={}\n",
                    v.i, v.s, v.partner, v.lhs, v.forward, v.backward
                ),
                ReportFormat::Json => {
                    format!("{}\n", json!({ "valid": false, "order": order, "witness": v }))
                }
            };
            RunOutput {
                code: EXIT_NEGATIVE,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => RunOutput::error(e),
    }
}

fn run_compact(args: &CompactArgs, stdin: &mut dyn Read) -> RunOutput {
    let d = match read_matrix(&args.input, stdin) {
        Ok(d) => d,
        Err(out) => return out,
    };
    let a = match compaction_vector(&d) {
        Ok(a) => a,
        Err(e) => return RunOutput::error(e),
    };
    let m = compaction_matrix(&d, &a);
    let reduced = reduce(&d, &a, d.max_label(), 0);
    match args.output {
        ReportFormat::Summary => {
            let mut out = format!("a={}\n", a.display_tuple());
            let code = match (&m, &reduced) {
                (Ok(m), Ok((r, step))) => {
                    let _ = write!(out, "compaction matrix:\n{m}");
                    let _ = writeln!(out, "S={} S'={}", set_list(&step.groups), list(&step.singletons));
                    let _ = write!(out, "reduction matrix:\n{r}");
                    EXIT_OK
                }
                (Err(e), _) | (_, Err(e)) => {
                    let _ = writeln!(out, "{e}");
                    EXIT_NEGATIVE
                }
            };
            RunOutput {
                code,
                stdout: out,
                stderr: String::new(),
            }
        }
        ReportFormat::Json => {
            let mut v = json!({ "labels": d.labels(), "a": a.values() });
            let code = match (&m, &reduced) {
                (Ok(m), Ok((r, step))) => {
                    v["compaction_matrix"] = json!(m.rows());
                    v["groups"] = json!(step.groups);
                    v["singletons"] = json!(step.singletons);
                    v["reduction_labels"] = json!(r.labels());
                    v["reduction_matrix"] = json!(r.as_labeled().rows());
                    EXIT_OK
                }
                (Err(e), _) | (_, Err(e)) => {
                    v["error"] = json!(e.to_string());
                    EXIT_NEGATIVE
                }
            };
            RunOutput {
                code,
                stdout: format!("{v}\n"),
                stderr: String::new(),
            }
        }
    }
}

fn run_tropical(args: &TropicalArgs, stdin: &mut dyn Read) -> RunOutput {
    let d = match read_matrix(&args.input, stdin) {
        Ok(d) => d,
        Err(out) => return out,
    };
    let order = match &args.order {
        Some(text) => match parse_order(text) {
            Ok(o) => o,
            Err(out) => return out,
        },
        None => match search_order(&d, &args.search) {
            Ok(Some(o)) => o,
            Ok(None) => match CyclicOrder::new(d.labels().to_vec()) {
                Ok(o) => o,
                Err(e) => return RunOutput::error(e),
            },
            Err(e) => return RunOutput::error(e),
        },
    };
    let rows = match sweep(&d, &order) {
        Ok(r) => r,
        Err(e) => return RunOutput::error(e),
    };
    let tilde = if args.tilde {
        let a = match compaction_vector(&d) {
            Ok(a) => a,
            Err(CompactionError::OrderTooSmall(_)) => crate::compaction::CompactionVector::zeros(d.labels()),
            Err(e) => return RunOutput::error(e),
        };
        match sweep_tilde(&d, &a, &order) {
            Ok(r) => Some(r),
            Err(e) => return RunOutput::error(e),
        }
    } else {
        None
    };
    let zero = rows.iter().all(|(_, _, e)| e.is_zero());
    let code = if zero { EXIT_OK } else { EXIT_NEGATIVE };
    let stdout = match args.output {
        ReportFormat::Summary => {
            let mut out = format!("order={order}\n");
            for (k, (i, s, e)) in rows.iter().enumerate() {
                let partner = order.step(order.as_slice().iter().position(|l| l == i).expect("in order"), *s);
                let _ = write!(
                    out,
                    "i={i} s={s} partner={partner} terms={} min={} mult={} zero={}",
                    tuple(&e.terms),
                    e.minimum,
                    e.multiplicity,
                    e.is_zero()
                );
                if let Some(t) = &tilde {
                    let te = &t[k].2;
                    let _ = write!(
                        out,
                        " tilde_terms={} tilde_mult={}",
                        tuple(&te.terms),
                        te.multiplicity
                    );
                }
                out.push('\n');
            }
            let _ = writeln!(out, "tropical_zero={zero}");
            out
        }
        ReportFormat::Json => {
            let evals: Vec<Value> = rows
                .iter()
                .enumerate()
                .map(|(k, (i, s, e))| {
                    let mut v = json!({ "i": i, "s": s, "p": e });
                    if let Some(t) = &tilde {
                        v["p_tilde"] = json!(t[k].2);
                    }
                    v
                })
                .collect();
            format!("{}\n", json!({ "order": order, "evaluations": evals, "tropical_zero": zero }))
        }
    };
    RunOutput {
        code,
        stdout,
        stderr: String::new(),
    }
}

fn run_gen(args: &GenArgs) -> RunOutput {
    let kind = match args.kind {
        KindArg::Tree => GenKind::Tree,
        KindArg::Genus1 => GenKind::Genus1,
        KindArg::Cycle => GenKind::Cycle,
    };
    let mut spec = GenSpec::new(kind, args.n, args.seed)
        .with_weight_range(args.weight_min.clone(), args.weight_max.clone());
    spec.cycle_len = args.cycle_len;
    let inst = match generate(&spec) {
        Ok(i) => i,
        Err(e) => return RunOutput::error(e),
    };
    let mut doc = inst.graph.to_document();
    doc.cycle = inst.cycle.clone();
    let stdout = match args.output {
        ReportFormat::Summary => format!("{}\n\n{}", doc.to_json(), inst.matrix.to_csv()),
        ReportFormat::Json => {
            let matrix: Value = serde_json::from_str(&inst.matrix.to_json()).expect("matrix json");
            format!(
                "{}\n",
                json!({
                    "graph": doc,
                    "matrix": matrix,
                    "unlabeled_degree2": inst.unlabeled_degree2,
                })
            )
        }
    };
    RunOutput::ok(stdout)
}
