//! Command-line front end.

use crate::automata::default_state_cap;
use crate::checker::{
    booleanize, check, mc_prop, mc_prop_value, mc_temp_af, mc_temp_approx, mc_temp_fragment, Answer, CheckError,
    Method, Options, Query, Verdict,
};
use crate::compile::{compile_prop_qf, compile_temp_qf, PredicateSpec};
use crate::formula::{analyze, parse_formula, print_formula, Formula, Fragment};
use crate::kripke::{parse_kripke, WeightedKripke};
use crate::oracle::eval_bounded;
use crate::rational::{fmt_rational, in_unit, parse_rational, Rational};
use crate::values::{value_overapprox, ValueSet};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_CAP: i32 = 4;

pub const NEEDS_EPSILON: &str = "full HyperLTL_temp requires --epsilon (exact MC open)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Auto,
    Prop,
    PropValue,
    TempApprox,
    TempPos,
    TempNeg,
    TempAf,
    Eval,
    Translate,
    Values,
    DumpNba,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Op {
    Ge,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "hyperqual", version, about = "Model checking of quantitative hyperproperties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check or analyse a formula against a weighted Kripke structure
    Check(CheckArgs),
}

#[derive(Debug, clap::Args)]
pub struct CheckArgs {
    /// weighted Kripke structure (.wks)
    #[arg(long, short = 'k')]
    pub kripke: Option<PathBuf>,
    /// formula file (.hq)
    #[arg(long, short = 'f')]
    pub formula: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "ge")]
    pub op: Op,
    /// threshold in [0,1], e.g. 1/2
    #[arg(long, default_value = "1")]
    pub threshold: String,
    /// approximation gap; required by temp-approx
    #[arg(long)]
    pub epsilon: Option<String>,
    /// stem and loop bounds for eval, e.g. 2,3
    #[arg(long)]
    pub bounds: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub output: Output,
    /// state cap for automaton constructions (default: HYPERQUAL_STATE_CAP or 200000)
    #[arg(long)]
    pub state_cap: Option<usize>,
}

/// Validated configuration of one invocation.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub kripke_path: Option<PathBuf>,
    pub formula_path: PathBuf,
    pub mode: Mode,
    pub op: Op,
    pub threshold: Rational,
    pub epsilon: Option<Rational>,
    pub bounds: Option<(usize, usize)>,
    pub output: Output,
    pub state_cap: usize,
}

/// Exit code with the text to print on stdout (`out`) or stderr (`err`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub out: String,
    pub err: String,
}

impl Report {
    fn input_error(msg: impl Into<String>) -> Self {
        Report { code: EXIT_INPUT, out: String::new(), err: msg.into() }
    }
}

impl TryFrom<CheckArgs> for CliConfig {
    type Error = String;

    fn try_from(a: CheckArgs) -> Result<Self, String> {
        let threshold = parse_rational(&a.threshold).map_err(|e| format!("--threshold: {e}"))?;
        if !in_unit(&threshold) {
            return Err(format!("--threshold {} is outside [0,1]", a.threshold));
        }
        let epsilon = match &a.epsilon {
            Some(s) => {
                let e = parse_rational(s).map_err(|e| format!("--epsilon: {e}"))?;
                if e <= crate::rational::zero() {
                    return Err(format!("--epsilon must be positive, got {s}"));
                }
                Some(e)
            }
            None => None,
        };
        if a.mode == Mode::TempApprox && epsilon.is_none() {
            return Err("--mode temp-approx requires --epsilon".into());
        }
        let bounds = match &a.bounds {
            Some(s) => {
                let parts: Vec<&str> = s.split(',').map(str::trim).collect();
                match parts.as_slice() {
                    [x, y] => Some((
                        x.parse().map_err(|_| format!("--bounds: bad stem bound {x}"))?,
                        y.parse().map_err(|_| format!("--bounds: bad loop bound {y}"))?,
                    )),
                    _ => return Err(format!("--bounds expects STEM,LOOP, got {s}")),
                }
            }
            None => None,
        };
        Ok(CliConfig {
            kripke_path: a.kripke,
            formula_path: a.formula,
            mode: a.mode,
            op: a.op,
            threshold,
            epsilon,
            bounds,
            output: a.output,
            state_cap: a.state_cap.unwrap_or_else(default_state_cap),
        })
    }
}

fn load_formula(cfg: &CliConfig) -> Result<Formula, String> {
    let text = std::fs::read_to_string(&cfg.formula_path)
        .map_err(|e| format!("cannot read {}: {e}", cfg.formula_path.display()))?;
    parse_formula(&text).map_err(|e| format!("formula {}: {e}", cfg.formula_path.display()))
}

fn load_kripke(cfg: &CliConfig) -> Result<WeightedKripke, String> {
    let path = cfg.kripke_path.as_ref().ok_or("this mode needs --kripke")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_kripke(&text).map_err(|e| format!("structure {}: {e}", path.display()))
}

fn query(cfg: &CliConfig) -> Query {
    match cfg.op {
        Op::Ge => Query::Ge(cfg.threshold.clone()),
        Op::Le => Query::Le(cfg.threshold.clone()),
    }
}

fn check_error(e: CheckError) -> Report {
    if e == CheckError::NeedsEpsilon {
        return Report::input_error(NEEDS_EPSILON);
    }
    let code = if e.is_cap() { EXIT_CAP } else { EXIT_INPUT };
    Report { code, out: String::new(), err: e.to_string() }
}

fn verdict_report(cfg: &CliConfig, psi: &Formula, v: &Verdict) -> Report {
    let code = match v.answer {
        Answer::Holds => EXIT_HOLDS,
        Answer::Fails => EXIT_FAILS,
        Answer::UnknownWithinEpsilon => EXIT_UNKNOWN,
    };
    let out = match cfg.output {
        Output::Text => format!("{v}"),
        Output::Json => {
            let mut j = v.to_json();
            j["query"] = Value::String(query(cfg).to_string());
            j["fragment"] = Value::String(analyze(psi).fragment.name().into());
            j.to_string()
        }
    };
    Report { code, out, err: String::new() }
}

/// Wraps a non-verdict result (value, formula, automaton) with exit code 0.
fn emit(cfg: &CliConfig, text: String, j: Value) -> Report {
    let out = match cfg.output {
        Output::Text => text,
        Output::Json => j.to_string(),
    };
    Report { code: 0, out, err: String::new() }
}

pub fn run(cfg: &CliConfig) -> Report {
    match run_inner(cfg) {
        Ok(r) | Err(r) => r,
    }
}

fn run_inner(cfg: &CliConfig) -> Result<Report, Report> {
    let psi = load_formula(cfg).map_err(Report::input_error)?;
    let opts = Options { state_cap: cfg.state_cap };
    let q = query(cfg);
    let verdict = |r: Result<Verdict, CheckError>| -> Result<Report, Report> {
        let v = r.map_err(check_error)?;
        Ok(verdict_report(cfg, &psi, &v))
    };
    match cfg.mode {
        Mode::Translate => {
            if let Some(p) = &cfg.kripke_path {
                let k = load_kripke(cfg).map_err(Report::input_error)?;
                if !k.is_boolean() {
                    return Err(Report::input_error(format!("{} has non-Boolean weights", p.display())));
                }
            }
            let pred = match cfg.op {
                Op::Ge => PredicateSpec::Ge(cfg.threshold.clone()),
                Op::Le => PredicateSpec::Le(cfg.threshold.clone()),
            };
            let b = booleanize(&psi, &pred).map_err(check_error)?;
            let text = print_formula(&b);
            Ok(emit(cfg, text.clone(), json!({ "predicate": pred.to_string(), "formula": text })))
        }
        Mode::Values => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            let w = ValueSet::new(k.weights.iter().cloned()).map_err(|e| Report::input_error(e.to_string()))?;
            let vs = value_overapprox(&psi, &w).map_err(|e| Report::input_error(e.to_string()))?;
            let list: Vec<String> = vs.iter().map(fmt_rational).collect();
            Ok(emit(cfg, list.join("\n"), json!({ "values": list })))
        }
        Mode::Eval => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            let (s, l) = cfg.bounds.unwrap_or((2, 2));
            let b = eval_bounded(&psi, &k, s, l).map_err(|e| Report::input_error(e.to_string()))?;
            let class = serde_json::to_value(b.class).unwrap_or(Value::Null);
            let class_name = class.as_str().unwrap_or("").to_string();
            Ok(emit(
                cfg,
                format!("{} ({class_name}, lassos with stem <= {s} and loop <= {l})", fmt_rational(&b.value)),
                json!({ "value": fmt_rational(&b.value), "class": class, "bounds": [s, l] }),
            ))
        }
        Mode::DumpNba => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            let (prefix, matrix) = psi.prefix();
            let vars: Vec<&str> = prefix.iter().map(|(_, v)| *v).collect();
            let nba = if psi.has_discount() {
                let p = match cfg.op {
                    Op::Ge => PredicateSpec::Gt(cfg.threshold.clone()),
                    Op::Le => PredicateSpec::Lt(cfg.threshold.clone()),
                };
                compile_temp_qf(matrix, &k, &vars, &p).map(|t| t.nba)
            } else {
                let p = match cfg.op {
                    Op::Ge => PredicateSpec::Ge(cfg.threshold.clone()),
                    Op::Le => PredicateSpec::Le(cfg.threshold.clone()),
                };
                compile_prop_qf(matrix, &k, &vars, &p)
            }
            .map_err(|e| check_error(e.into()))?;
            Ok(emit(cfg, nba.to_dump(), json!({ "states": nba.num_states(), "nba": nba.to_dump() })))
        }
        Mode::PropValue => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            let v = mc_prop_value(&psi, &k, &opts).map_err(check_error)?;
            let holds = q.holds_for(&v);
            let verdict = Verdict {
                answer: if holds { Answer::Holds } else { Answer::Fails },
                value: Some(v),
                witness: None,
                method: Method::PropValue,
            };
            Ok(verdict_report(cfg, &psi, &verdict))
        }
        Mode::Prop => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            verdict(mc_prop(&psi, &k, &q, &opts))
        }
        Mode::TempApprox => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            let e = cfg.epsilon.clone().ok_or_else(|| Report::input_error(NEEDS_EPSILON))?;
            verdict(mc_temp_approx(&psi, &k, &q, &e, &opts))
        }
        Mode::TempPos | Mode::TempNeg => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            let want = if cfg.mode == Mode::TempPos { Fragment::TempPos } else { Fragment::TempNeg };
            let got = analyze(&psi).fragment;
            let ok = got == want || (want == Fragment::TempPos && got == Fragment::Boolean);
            if !ok {
                return Err(Report::input_error(format!("formula is {}, not {}", got.name(), want.name())));
            }
            verdict(mc_temp_fragment(&psi, &k, &q, &opts))
        }
        Mode::TempAf => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            verdict(mc_temp_af(&psi, &k, &q, &opts))
        }
        Mode::Auto => {
            let k = load_kripke(cfg).map_err(Report::input_error)?;
            verdict(check(&psi, &k, &q, cfg.epsilon.as_ref(), &opts))
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    let Command::Check(a) = cli.command;
    let cfg = match CliConfig::try_from(a) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    };
    let r = run(&cfg);
    if !r.out.is_empty() {
        // a closed pipe (e.g. `| head`) is not an error worth a panic
        let _ = writeln!(std::io::stdout().lock(), "{}", r.out);
    }
    if !r.err.is_empty() {
        eprintln!("error: {}", r.err);
    }
    r.code
}
