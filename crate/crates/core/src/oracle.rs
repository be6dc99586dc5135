//! Reference semantics on lasso assignments.
//!
//! A lasso assignment has finitely many positions (the longest stem followed
//! by one period of the lcm of the loops), so every subformula is evaluated
//! as a vector indexed by position.

use crate::formula::{big_and, big_or, Discount, Formula, FuncKind};
use crate::kripke::{lasso_enumerate, KripkeError, Lasso, LassoAssignment, WeightedKripke};
use crate::rational::{lcm, one, one_minus, ratio, zero, Rational};
use num_traits::Zero;
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("trace variable {0} is not bound")]
    Unbound(String),
    #[error("quantifier universe is empty")]
    EmptyUniverse,
    #[error("quantifiers may only occur under boolean connectives")]
    QuantifierUnderTemporal,
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

/// Assignment, quantifier universe and suffix offset.
#[derive(Debug, Clone, Default)]
pub struct EvalContext {
    pub assignment: LassoAssignment,
    pub candidate_lassos: Vec<Lasso>,
    pub offset: usize,
}

impl EvalContext {
    pub fn new(assignment: LassoAssignment) -> Self {
        EvalContext { assignment, candidate_lassos: Vec::new(), offset: 0 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Track {
    stem: usize,
    n: usize,
}

impl Track {
    fn succ(&self, i: usize) -> usize {
        if i + 1 == self.n {
            self.stem
        } else {
            i + 1
        }
    }

    fn pos(&self, offset: usize) -> usize {
        if offset < self.n {
            offset
        } else {
            self.stem + (offset - self.stem) % (self.n - self.stem)
        }
    }
}

fn track_for(f: &Formula, asg: &LassoAssignment) -> Result<Track, OracleError> {
    let mut stem = 0;
    let mut period = 1;
    for v in f.free_vars() {
        let l = asg.get(&v).ok_or(OracleError::Unbound(v))?;
        stem = stem.max(l.stem.len());
        period = lcm(period, l.cycle.len());
    }
    Ok(Track { stem, n: stem + period })
}

/// Value of a quantifier-free formula at `ctx.offset`.
pub fn eval_qf(f: &Formula, ctx: &EvalContext) -> Result<Rational, OracleError> {
    if !f.is_quantifier_free() {
        return Err(OracleError::QuantifierUnderTemporal);
    }
    let tr = track_for(f, &ctx.assignment)?;
    let v = vector(f, &ctx.assignment, tr)?;
    Ok(v[tr.pos(ctx.offset)].clone())
}

fn vector(f: &Formula, asg: &LassoAssignment, tr: Track) -> Result<Vec<Rational>, OracleError> {
    let n = tr.n;
    Ok(match f {
        Formula::True => vec![one(); n],
        Formula::False => vec![zero(); n],
        Formula::Atom { prop, var } => {
            let l = asg.get(var).ok_or_else(|| OracleError::Unbound(var.clone()))?;
            match l.props.iter().position(|p| p == prop) {
                Some(j) => (0..n).map(|i| l.letter(i)[j].clone()).collect(),
                None => vec![zero(); n],
            }
        }
        Formula::Func(kind, args) => {
            let vs = args.iter().map(|a| vector(a, asg, tr)).collect::<Result<Vec<_>, _>>()?;
            (0..n)
                .map(|i| {
                    let xs: Vec<Rational> = vs.iter().map(|v| v[i].clone()).collect();
                    kind.apply(&xs)
                })
                .collect()
        }
        Formula::Next(a) => {
            let v = vector(a, asg, tr)?;
            (0..n).map(|i| v[tr.succ(i)].clone()).collect()
        }
        Formula::Until(a, b) => {
            let (a, b) = (vector(a, asg, tr)?, vector(b, asg, tr)?);
            until(&a, &b, tr)
        }
        Formula::Release(a, b) => {
            let (a, b) = (complement(vector(a, asg, tr)?), complement(vector(b, asg, tr)?));
            complement(until(&a, &b, tr))
        }
        Formula::DUntil(d, a, b) => {
            let (a, b) = (vector(a, asg, tr)?, vector(b, asg, tr)?);
            d_until(d, &a, &b, tr)
        }
        Formula::DRelease(d, a, b) => {
            let (a, b) = (complement(vector(a, asg, tr)?), complement(vector(b, asg, tr)?));
            complement(d_until(d, &a, &b, tr))
        }
        Formula::Exists(..) | Formula::Forall(..) => return Err(OracleError::QuantifierUnderTemporal),
    })
}

fn complement(v: Vec<Rational>) -> Vec<Rational> {
    v.iter().map(one_minus).collect()
}

// sup_k min(b@k, min_{j<k} a@j); terms past n steps repeat a position with a
// smaller prefix minimum, so n terms suffice.
fn until(a: &[Rational], b: &[Rational], tr: Track) -> Vec<Rational> {
    (0..tr.n)
        .map(|i| {
            let mut best = zero();
            let mut m = one();
            let mut pos = i;
            for _ in 0..tr.n {
                let term = (&b[pos]).min(&m).clone();
                if term > best {
                    best = term;
                }
                if a[pos] < m {
                    m = a[pos].clone();
                }
                if m <= best {
                    break;
                }
                pos = tr.succ(pos);
            }
            best
        })
        .collect()
}

struct EtaIter<'a> {
    d: &'a Discount,
    k: usize,
    cur: Rational,
}

impl<'a> EtaIter<'a> {
    fn new(d: &'a Discount) -> Self {
        EtaIter { d, k: 0, cur: one() }
    }

    fn advance(&mut self) {
        self.k += 1;
        self.cur = match self.d {
            Discount::Exp(l) => &self.cur * l,
            Discount::Harmonic => ratio(1, self.k as i64 + 1),
        };
    }
}

// sup_k min(η_k·b@k, min_{j<k} η_j·a@j), cut off once η_k or the running
// prefix minimum can no longer beat the best term.
fn d_until(d: &Discount, a: &[Rational], b: &[Rational], tr: Track) -> Vec<Rational> {
    (0..tr.n)
        .map(|i| {
            let mut best = zero();
            let mut m = one();
            let mut pos = i;
            let mut eta = EtaIter::new(d);
            loop {
                if eta.cur <= best {
                    break;
                }
                let term = (&eta.cur * &b[pos]).min(m.clone());
                if term > best {
                    best = term;
                }
                let ea = &eta.cur * &a[pos];
                if ea < m {
                    m = ea;
                }
                if m <= best {
                    break;
                }
                eta.advance();
                // every reachable position has been seen and b vanished on all of them
                if eta.k >= tr.n && best.is_zero() {
                    break;
                }
                pos = tr.succ(pos);
            }
            best
        })
        .collect()
}

/// Pushes quantifiers inward through `|`/`&` where the semantics allows.
pub fn miniscope(f: &Formula) -> Formula {
    match f {
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let exists = matches!(f, Formula::Exists(..));
            let body = miniscope(b);
            if !body.free_vars().contains(v) {
                return body;
            }
            let wrap = |x: Formula| {
                if exists {
                    Formula::Exists(v.clone(), Box::new(x))
                } else {
                    Formula::Forall(v.clone(), Box::new(x))
                }
            };
            let (distributes, splits) =
                if exists { (FuncKind::Or, FuncKind::And) } else { (FuncKind::And, FuncKind::Or) };
            match &body {
                Formula::Func(k, args) if *k == distributes => {
                    Formula::Func(k.clone(), args.iter().map(|a| miniscope(&wrap(a.clone()))).collect())
                }
                Formula::Func(k, args) if *k == splits => {
                    let (dep, indep): (Vec<Formula>, Vec<Formula>) =
                        args.iter().cloned().partition(|a| a.free_vars().contains(v));
                    if indep.is_empty() {
                        return wrap(body.clone());
                    }
                    let joined = if exists { big_and(dep) } else { big_or(dep) };
                    let mut parts = indep;
                    parts.push(miniscope(&wrap(joined)));
                    Formula::Func(k.clone(), parts)
                }
                _ => wrap(body.clone()),
            }
        }
        Formula::Func(..) => f.map_children(miniscope),
        _ => f.clone(),
    }
}

fn eval_closed(f: &Formula, asg: &mut LassoAssignment, universe: &[Lasso]) -> Result<Rational, OracleError> {
    if f.is_quantifier_free() {
        return eval_qf(f, &EvalContext::new(asg.clone()));
    }
    match f {
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let exists = matches!(f, Formula::Exists(..));
            let saved = asg.bindings.iter().position(|(w, _)| w == v).map(|i| asg.bindings.remove(i));
            let mut acc = if exists { zero() } else { one() };
            for l in universe {
                asg.bindings.push((v.clone(), l.clone()));
                let x = eval_closed(b, asg, universe);
                asg.bindings.pop();
                let x = x?;
                if exists && x > acc || !exists && x < acc {
                    acc = x;
                }
                if exists && acc == one() || !exists && acc.is_zero() {
                    break;
                }
            }
            if let Some(s) = saved {
                asg.bindings.push(s);
            }
            Ok(acc)
        }
        Formula::Func(kind, args) => match kind {
            FuncKind::Or | FuncKind::And => {
                let or = *kind == FuncKind::Or;
                let mut acc = if or { zero() } else { one() };
                for a in args {
                    let x = eval_closed(a, asg, universe)?;
                    if or && x > acc || !or && x < acc {
                        acc = x;
                    }
                    if or && acc == one() || !or && acc.is_zero() {
                        break;
                    }
                }
                Ok(acc)
            }
            _ => {
                let xs = args.iter().map(|a| eval_closed(a, asg, universe)).collect::<Result<Vec<_>, _>>()?;
                Ok(kind.apply(&xs))
            }
        },
        _ => Err(OracleError::QuantifierUnderTemporal),
    }
}

/// Value of a closed formula whose quantifiers range over `universe`.
/// Quantifiers may also appear under `|`, `&` and other functions.
pub fn eval_quantified(f: &Formula, universe: &[Lasso]) -> Result<Rational, OracleError> {
    eval_quantified_with(f, &LassoAssignment::new(), universe)
}

/// As [`eval_quantified`], with free variables taken from `asg`.
pub fn eval_quantified_with(f: &Formula, asg: &LassoAssignment, universe: &[Lasso]) -> Result<Rational, OracleError> {
    if universe.is_empty() {
        return Err(OracleError::EmptyUniverse);
    }
    let bound: BTreeSet<String> = asg.bindings.iter().map(|(v, _)| v.clone()).collect();
    if let Some(v) = f.free_vars().into_iter().find(|v| !bound.contains(v)) {
        return Err(OracleError::Unbound(v));
    }
    let mut asg = asg.clone();
    eval_closed(&miniscope(f), &mut asg, universe)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundClass {
    /// No quantifiers: the value is exact.
    Exact,
    /// Existential prefix: never above the true value.
    Lower,
    /// Universal prefix: never below the true value.
    Upper,
    /// Alternating prefix: no guarantee in either direction.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedValue {
    pub value: Rational,
    pub class: BoundClass,
}

/// Evaluates over the lassos of `k` within the given stem/loop bounds.
pub fn eval_bounded(
    f: &Formula,
    k: &WeightedKripke,
    max_stem: usize,
    max_loop: usize,
) -> Result<BoundedValue, OracleError> {
    let universe = lasso_enumerate(k, max_stem, max_loop)?;
    let value = eval_quantified(f, &universe)?;
    let (prefix, _) = f.prefix();
    let class = if prefix.is_empty() {
        BoundClass::Exact
    } else if prefix.iter().all(|(q, _)| *q == crate::formula::Quant::Exists) {
        BoundClass::Lower
    } else if prefix.iter().all(|(q, _)| *q == crate::formula::Quant::Forall) {
        BoundClass::Upper
    } else {
        BoundClass::Estimate
    };
    Ok(BoundedValue { value, class })
}
