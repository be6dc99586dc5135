//! Decision procedures built on the compiled automata.

mod prop;
mod temp;
mod translate;

pub use prop::{mc_prop, mc_prop_value};
pub use temp::{mc_temp_af, mc_temp_approx, mc_temp_fragment};
pub use translate::{alternation_depth, booleanize, booleanize_closure, prenex_normalize};

use crate::automata::{default_state_cap, AcceptedLasso};
use crate::compile::CompileError;
use crate::formula::{analyze, Formula, Fragment};
use crate::kripke::{Lasso, WeightedKripke};
use crate::rational::{fmt_rational, in_unit, Rational};
use crate::values::ValuesError;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Values(#[from] ValuesError),
    #[error("formula is not closed: {0} is free")]
    NotClosed(String),
    #[error("fragment mismatch: {0}")]
    Fragment(String),
    #[error("threshold not supported: {0}")]
    Threshold(String),
    #[error("epsilon must be positive, got {0}")]
    Epsilon(String),
    #[error("outside the positive Boolean closure: {0}")]
    NotClosure(String),
    #[error("internal soundness failure: {0}")]
    Soundness(String),
    #[error("full HyperLTL_temp requires an epsilon (exact MC open)")]
    NeedsEpsilon,
}

impl CheckError {
    /// Whether the failure is a resource cap rather than a bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, CheckError::Compile(CompileError::Automata(crate::automata::AutomataError::StateCap { .. })))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Answer {
    Holds,
    Fails,
    UnknownWithinEpsilon,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Holds => "HOLDS",
            Answer::Fails => "FAILS",
            Answer::UnknownWithinEpsilon => "UNKNOWN_WITHIN_EPSILON",
        })
    }
}

/// Procedure that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// value-set elimination for propositional quality
    PropExact,
    /// value synthesis over the candidate values
    PropValue,
    /// ε-approximate threshold check for temporal quality
    TempApprox,
    /// lattice-gap threshold check for the positive fragment
    TempPositive,
    /// the positive check applied to the dual formula
    TempNegative,
    /// projection check for existential-only prefixes
    TempExistsOnly,
    /// the existential check applied to the dual formula
    TempForallOnly,
    /// answered without automata (threshold at an end of [0,1])
    Trivial,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PropExact => "prop-exact",
            Method::PropValue => "prop-value",
            Method::TempApprox => "temp-approx",
            Method::TempPositive => "temp-positive",
            Method::TempNegative => "temp-negative",
            Method::TempExistsOnly => "temp-exists-only",
            Method::TempForallOnly => "temp-forall-only",
            Method::Trivial => "trivial",
        }
    }
}

/// Threshold query on the value of a closed formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Ge(Rational),
    Le(Rational),
}

impl Query {
    pub fn threshold(&self) -> &Rational {
        match self {
            Query::Ge(v) | Query::Le(v) => v,
        }
    }

    pub fn holds_for(&self, x: &Rational) -> bool {
        match self {
            Query::Ge(v) => x >= v,
            Query::Le(v) => x <= v,
        }
    }

    /// The same question about `1 - value`.
    pub fn mirrored(&self) -> Query {
        match self {
            Query::Ge(v) => Query::Le(crate::rational::one_minus(v)),
            Query::Le(v) => Query::Ge(crate::rational::one_minus(v)),
        }
    }

    fn validate(&self) -> Result<(), CheckError> {
        if in_unit(self.threshold()) {
            Ok(())
        } else {
            Err(CheckError::Threshold(format!("{self} is outside [0,1]")))
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Ge(v) => write!(f, ">= {}", fmt_rational(v)),
            Query::Le(v) => write!(f, "<= {}", fmt_rational(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Options {
    /// state cap for every automaton construction
    pub state_cap: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { state_cap: default_state_cap() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Answer,
    pub value: Option<Rational>,
    /// accepted lasso over the product alphabet, propositions named `p@var`
    pub witness: Option<AcceptedLasso>,
    pub method: Method,
}

pub const VERDICT_SCHEMA: &str = "hyperqual.verdict/1";

impl Verdict {
    pub(crate) fn new(holds: bool, method: Method) -> Self {
        Verdict { answer: if holds { Answer::Holds } else { Answer::Fails }, value: None, witness: None, method }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": VERDICT_SCHEMA,
            "answer": self.answer,
            "value": self.value.as_ref().map(fmt_rational),
            "method": self.method,
            "witness": self.witness.as_ref().map(|w| lasso_json(&w.lasso)),
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (method: {})", self.answer, self.method.name())?;
        if let Some(v) = &self.value {
            write!(f, "\nvalue: {}", fmt_rational(v))?;
        }
        if let Some(w) = &self.witness {
            write!(f, "\nwitness: {}", w.lasso)?;
        }
        Ok(())
    }
}

fn lasso_json(l: &Lasso) -> Value {
    let letters = |ls: &[Vec<Rational>]| -> Vec<Value> {
        ls.iter()
            .map(|letter| {
                let m: serde_json::Map<String, Value> =
                    l.props.iter().zip(letter).map(|(p, w)| (p.clone(), Value::String(fmt_rational(w)))).collect();
                Value::Object(m)
            })
            .collect()
    };
    json!({ "stem": letters(&l.stem), "loop": letters(&l.cycle) })
}

/// Picks the exact procedure for the fragment of `psi` when one applies,
/// otherwise the ε-approximate check.
pub fn check(
    psi: &Formula,
    k: &WeightedKripke,
    query: &Query,
    epsilon: Option<&Rational>,
    opts: &Options,
) -> Result<Verdict, CheckError> {
    let stats = analyze(psi);
    if stats.fragment.is_prop() {
        return mc_prop(psi, k, query, opts);
    }
    if matches!(stats.fragment, Fragment::TempPos | Fragment::TempNeg) {
        match mc_temp_fragment(psi, k, query, opts) {
            Err(CheckError::Threshold(_)) => {}
            r => return r,
        }
    }
    let af = match query {
        Query::Le(_) => stats.exists_only,
        Query::Ge(_) => stats.forall_only,
    };
    if af {
        return mc_temp_af(psi, k, query, opts);
    }
    match epsilon {
        Some(e) => mc_temp_approx(psi, k, query, e, opts),
        None => Err(CheckError::NeedsEpsilon),
    }
}

pub(crate) fn require_closed(f: &Formula) -> Result<(), CheckError> {
    match f.free_vars().into_iter().next() {
        Some(v) => Err(CheckError::NotClosed(v)),
        None => Ok(()),
    }
}
