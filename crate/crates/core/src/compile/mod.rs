//! Compilation of formulas into Büchi automata over `K^n`.

mod elim;
mod ltl;
mod tableau;
mod threshold;

pub(crate) use elim::candidate_values;
pub use elim::{quantifier_elim_prop, quantifier_elim_temp, Eliminator};

use crate::automata::{default_state_cap, AutomataError, Nba};
use crate::formula::Formula;
use crate::kripke::WeightedKripke;
use crate::rational::{fmt_rational, in_unit, Rational};
use crate::values::{ValueSet, ValuesError};
use std::fmt;
use thiserror::Error;
use threshold::{prop_nodes, Atoms, Thresholds};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("formula is not in the propositional-quality logic")]
    NotProp,
    #[error("formula is not in the temporal-quality logic")]
    NotTemp,
    #[error("quantifier inside the matrix")]
    NotQuantifierFree,
    #[error("trace variable {0} is not bound to a component")]
    Unbound(String),
    #[error("invalid predicate: {0}")]
    Predicate(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Values(#[from] ValuesError),
}

/// A decidable set of values in [0,1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredicateSpec {
    InSet(ValueSet),
    Lt(Rational),
    Gt(Rational),
    Ge(Rational),
    Le(Rational),
    Singleton(Rational),
    Interval { lo: Rational, hi: Rational, lo_open: bool, hi_open: bool },
}

impl PredicateSpec {
    pub fn validate(&self) -> Result<(), CompileError> {
        let bad = |x: &Rational| CompileError::Predicate(format!("bound {} outside [0,1]", fmt_rational(x)));
        match self {
            PredicateSpec::InSet(_) => Ok(()),
            PredicateSpec::Lt(v)
            | PredicateSpec::Gt(v)
            | PredicateSpec::Ge(v)
            | PredicateSpec::Le(v)
            | PredicateSpec::Singleton(v) => {
                if in_unit(v) {
                    Ok(())
                } else {
                    Err(bad(v))
                }
            }
            PredicateSpec::Interval { lo, hi, .. } => {
                if !in_unit(lo) {
                    Err(bad(lo))
                } else if !in_unit(hi) {
                    Err(bad(hi))
                } else if lo > hi {
                    Err(CompileError::Predicate("interval bounds out of order".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            PredicateSpec::InSet(s) => s.contains(x),
            PredicateSpec::Lt(v) => x < v,
            PredicateSpec::Gt(v) => x > v,
            PredicateSpec::Ge(v) => x >= v,
            PredicateSpec::Le(v) => x <= v,
            PredicateSpec::Singleton(v) => x == v,
            PredicateSpec::Interval { lo, hi, lo_open, hi_open } => {
                (if *lo_open { x > lo } else { x >= lo }) && (if *hi_open { x < hi } else { x <= hi })
            }
        }
    }
}

impl fmt::Display for PredicateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateSpec::InSet(s) => write!(f, "in {s}"),
            PredicateSpec::Lt(v) => write!(f, "< {}", fmt_rational(v)),
            PredicateSpec::Gt(v) => write!(f, "> {}", fmt_rational(v)),
            PredicateSpec::Ge(v) => write!(f, ">= {}", fmt_rational(v)),
            PredicateSpec::Le(v) => write!(f, "<= {}", fmt_rational(v)),
            PredicateSpec::Singleton(v) => write!(f, "= {}", fmt_rational(v)),
            PredicateSpec::Interval { lo, hi, lo_open, hi_open } => write!(
                f,
                "in {}{}, {}{}",
                if *lo_open { "(" } else { "[" },
                fmt_rational(lo),
                fmt_rational(hi),
                if *hi_open { ")" } else { "]" }
            ),
        }
    }
}

fn atoms<'a>(vars: &'a [&'a str], kn: &'a WeightedKripke) -> Atoms<'a> {
    Atoms { vars, props: &kn.props, weights: &kn.weights }
}

/// Automaton accepting the paths of `K^n` (`n = vars.len()`, component `i`
/// bound to `vars[i]`) on which the value of `f` satisfies `p`.
pub fn compile_prop_qf(f: &Formula, k: &WeightedKripke, vars: &[&str], p: &PredicateSpec) -> Result<Nba, CompileError> {
    compile_prop_qf_with_cap(f, k, vars, p, default_state_cap())
}

pub fn compile_prop_qf_with_cap(
    f: &Formula,
    k: &WeightedKripke,
    vars: &[&str],
    p: &PredicateSpec,
    cap: usize,
) -> Result<Nba, CompileError> {
    p.validate()?;
    if f.has_discount() {
        return Err(CompileError::NotProp);
    }
    let kn = k.self_product(vars.len());
    let mut ir = tableau::Ir::default();
    let root = prop_nodes(f, &atoms(vars, &kn), &mut ir)?;
    Ok(tableau::tableau(&ir, root, &kn, &|x| p.contains(x), cap)?)
}

/// Threshold automaton for a quantifier-free temporal formula together with
/// the unfolding horizon used for its discounted operators.
#[derive(Debug, Clone)]
pub struct TempQf {
    pub nba: Nba,
    pub horizon: usize,
}

/// Threshold automaton for `value > v` / `value < v` over `K^n`. Every path
/// whose value meets the threshold is accepted, and every accepted lasso
/// meets it.
pub fn compile_temp_qf(
    f: &Formula,
    k: &WeightedKripke,
    vars: &[&str],
    p: &PredicateSpec,
) -> Result<TempQf, CompileError> {
    compile_temp_qf_with(f, k, vars, p, 0, true, default_state_cap())
}

/// Like [`compile_temp_qf`], unfolding `slack` steps past the horizon.
/// With `positive == false` the automaton accepts exactly the paths of
/// `K^n` that the positive one rejects.
pub fn compile_temp_qf_with(
    f: &Formula,
    k: &WeightedKripke,
    vars: &[&str],
    p: &PredicateSpec,
    slack: usize,
    positive: bool,
    cap: usize,
) -> Result<TempQf, CompileError> {
    let kn = k.self_product(vars.len());
    let mut t = Thresholds::new(atoms(vars, &kn), slack);
    let (root, horizon) = threshold_root(&mut t, f, p)?;
    let want = if positive { crate::rational::one() } else { crate::rational::zero() };
    let nba = tableau::tableau(&t.ir, root, &kn, &|x| *x == want, cap)?;
    Ok(TempQf { nba, horizon })
}

fn threshold_root(t: &mut Thresholds, f: &Formula, p: &PredicateSpec) -> Result<(usize, usize), CompileError> {
    p.validate()?;
    if f.has_weighted_func() {
        return Err(CompileError::NotTemp);
    }
    match p {
        PredicateSpec::Gt(v) => t.lit(f, false, true, v),
        // value < v  <=>  value(¬f) > 1 - v
        PredicateSpec::Lt(v) => t.lit(f, true, true, &crate::rational::one_minus(v)),
        _ => Err(CompileError::Predicate(format!("temporal threshold automata take strict thresholds, got {p}"))),
    }
}

#[cfg(test)]
mod tests;
