//! Translation of propositional-quality formulas over Boolean traces into
//! Boolean HyperLTL, and prenexing of positive Boolean combinations of
//! quantified formulas.

use super::CheckError;
use crate::compile::{CompileError, PredicateSpec};
use crate::formula::{Formula, FuncKind, Quant};
use crate::rational::{one, zero, Rational};
use crate::values::{value_overapprox, ValueSet};
use std::collections::{BTreeSet, HashSet};

type Values = BTreeSet<Rational>;

fn s_not(a: Formula) -> Formula {
    match a {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Func(FuncKind::Not, mut args) => args.pop().unwrap(),
        a => Formula::Func(FuncKind::Not, vec![a]),
    }
}

fn s_junction(kind: FuncKind, parts: Vec<Formula>) -> Formula {
    let (unit, absorb) =
        if kind == FuncKind::And { (Formula::True, Formula::False) } else { (Formula::False, Formula::True) };
    let mut keep: Vec<Formula> = Vec::new();
    for p in parts {
        if p == absorb {
            return absorb;
        }
        if p != unit && !keep.contains(&p) {
            keep.push(p);
        }
    }
    match keep.len() {
        0 => unit,
        1 => keep.pop().unwrap(),
        _ => {
            // binary nesting keeps the printed form parseable
            let mut it = keep.into_iter().rev();
            let last = it.next().unwrap();
            it.fold(last, |acc, p| Formula::Func(kind.clone(), vec![p, acc]))
        }
    }
}

fn s_and(parts: Vec<Formula>) -> Formula {
    s_junction(FuncKind::And, parts)
}

fn s_or(parts: Vec<Formula>) -> Formula {
    s_junction(FuncKind::Or, parts)
}

fn s_until(a: Formula, b: Formula) -> Formula {
    match b {
        Formula::True | Formula::False => b,
        b => Formula::Until(Box::new(a), Box::new(b)),
    }
}

fn s_next(a: Formula) -> Formula {
    match a {
        Formula::True | Formula::False => a,
        a => Formula::Next(Box::new(a)),
    }
}

fn s_quant(q: Quant, v: &str, body: Formula) -> Formula {
    if !body.free_vars().contains(v) {
        return body;
    }
    match q {
        Quant::Exists => Formula::Exists(v.to_string(), Box::new(body)),
        Quant::Forall => Formula::Forall(v.to_string(), Box::new(body)),
    }
}

fn bool_w() -> ValueSet {
    ValueSet::new([zero(), one()]).expect("Boolean weights")
}

fn vals(f: &Formula) -> Result<Values, CheckError> {
    Ok(value_overapprox(f, &bool_w())?.iter().cloned().collect())
}

/// Boolean formula true exactly when the value of `f` lies in `p`, over
/// Boolean traces. The result may have quantifiers below `|`/`&`.
fn bool_of(f: &Formula, p: &Values) -> Result<Formula, CheckError> {
    let v = vals(f)?;
    let s: Values = v.intersection(p).cloned().collect();
    if s.is_empty() {
        return Ok(Formula::False);
    }
    if s == v {
        return Ok(Formula::True);
    }
    let at_least = |x: &Formula, c: &Rational, strict: bool| -> Result<Values, CheckError> {
        Ok(vals(x)?.into_iter().filter(|y| if strict { y > c } else { y >= c }).collect())
    };
    Ok(match f {
        Formula::True | Formula::False => unreachable!("constants have a single value"),
        Formula::Atom { .. } => {
            if s.contains(&one()) {
                f.clone()
            } else {
                s_not(f.clone())
            }
        }
        Formula::Func(kind, args) => {
            let doms: Vec<Vec<Rational>> =
                args.iter().map(|a| Ok(vals(a)?.into_iter().collect())).collect::<Result<_, CheckError>>()?;
            let mut tuples: Vec<Vec<Rational>> = vec![Vec::new()];
            for d in &doms {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        d.iter().map(move |x| {
                            let mut t = t.clone();
                            t.push(x.clone());
                            t
                        })
                    })
                    .collect();
            }
            let mut disj = Vec::new();
            for t in tuples {
                if s.contains(&kind.apply(&t)) {
                    let conj = args
                        .iter()
                        .zip(&t)
                        .map(|(a, d)| bool_of(a, &[d.clone()].into()))
                        .collect::<Result<Vec<_>, _>>()?;
                    disj.push(s_and(conj));
                }
            }
            s_or(disj)
        }
        Formula::Next(a) => s_next(bool_of(a, &s)?),
        Formula::Until(a, b) => {
            let mut disj = Vec::new();
            for c in &s {
                let ge = s_until(bool_of(a, &at_least(a, c, false)?)?, bool_of(b, &at_least(b, c, false)?)?);
                let gt = s_until(bool_of(a, &at_least(a, c, true)?)?, bool_of(b, &at_least(b, c, true)?)?);
                disj.push(s_and(vec![ge, s_not(gt)]));
            }
            s_or(disj)
        }
        Formula::Release(a, b) => {
            let neg = |x: &Formula| Formula::Func(FuncKind::Not, vec![x.clone()]);
            let u = Formula::Until(Box::new(neg(a)), Box::new(neg(b)));
            bool_of(&neg(&u), &s)?
        }
        Formula::DUntil(..) | Formula::DRelease(..) => return Err(CompileError::NotProp.into()),
        Formula::Exists(x, body) | Formula::Forall(x, body) => {
            let universal = matches!(f, Formula::Forall(..));
            let inner = vals(body)?;
            let mut disj = Vec::new();
            for c in &s {
                // attained at some trace, and every trace on the right side of c
                let witness = s_quant(Quant::Exists, x, bool_of(body, &[c.clone()].into())?);
                let side: Values =
                    inner.iter().filter(|y| if universal { *y >= c } else { *y <= c }).cloned().collect();
                let bound = s_quant(Quant::Forall, x, bool_of(body, &side)?);
                disj.push(s_and(vec![witness, bound]));
            }
            s_or(disj)
        }
    })
}

/// Boolean HyperLTL formula in prenex form whose value is 1 exactly when
/// the value of `psi` satisfies `p`, over traces with weights in {0,1}.
pub fn booleanize(psi: &Formula, p: &PredicateSpec) -> Result<Formula, CheckError> {
    prenex_normalize(&booleanize_closure(psi, p)?)
}

/// The translation before prenexing: quantifiers may sit under `|` and `&`.
pub fn booleanize_closure(psi: &Formula, p: &PredicateSpec) -> Result<Formula, CheckError> {
    p.validate()?;
    if psi.has_discount() {
        return Err(CompileError::NotProp.into());
    }
    let v = vals(psi)?;
    let target: Values = v.into_iter().filter(|x| p.contains(x)).collect();
    bool_of(psi, &target)
}

/// Gives every bound variable a name used nowhere else.
fn rename_apart(f: &Formula, used: &mut HashSet<String>) -> Formula {
    match f {
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let mut name = v.clone();
            let mut i = 1;
            while used.contains(&name) {
                name = format!("{v}_{i}");
                i += 1;
            }
            used.insert(name.clone());
            let body = rename_apart(&body.rename_var(v, &name), used);
            if matches!(f, Formula::Exists(..)) {
                Formula::Exists(name, Box::new(body))
            } else {
                Formula::Forall(name, Box::new(body))
            }
        }
        _ => f.map_children(|c| rename_apart(c, used)),
    }
}

type Blocks = Vec<Vec<(Quant, String)>>;

/// Prefix as alternating blocks, the first of quantifier `start` (possibly
/// empty), and the quantifier-free matrix.
fn blocks(f: &Formula, start: Quant) -> Result<(Blocks, Formula), CheckError> {
    if f.is_quantifier_free() {
        return Ok((Vec::new(), f.clone()));
    }
    match f {
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let q = if matches!(f, Formula::Exists(..)) { Quant::Exists } else { Quant::Forall };
            let (mut bl, m) = blocks(body, q)?;
            if bl.is_empty() {
                bl.push(Vec::new());
            }
            bl[0].insert(0, (q, v.clone()));
            if q != start {
                bl.insert(0, Vec::new());
            }
            Ok((bl, m))
        }
        Formula::Func(kind @ (FuncKind::Or | FuncKind::And), args) => {
            let mut merged: Blocks = Vec::new();
            let mut matrices = Vec::new();
            for a in args {
                let (bl, m) = blocks(a, start)?;
                for (i, b) in bl.into_iter().enumerate() {
                    if merged.len() <= i {
                        merged.push(Vec::new());
                    }
                    merged[i].extend(b);
                }
                matrices.push(m);
            }
            Ok((merged, Formula::Func(kind.clone(), matrices)))
        }
        other => Err(CheckError::NotClosure(crate::formula::print_formula(other))),
    }
}

fn flatten(bl: Blocks) -> Vec<(Quant, String)> {
    bl.into_iter().flatten().collect()
}

fn prefix_alternations(prefix: &[(Quant, String)]) -> usize {
    prefix.windows(2).filter(|w| w[0].0 != w[1].0).count()
}

/// Equivalent prenex formula for a positive Boolean combination (`|`, `&`)
/// of quantified formulas, with at most one extra alternation and the same
/// quantifiers.
pub fn prenex_normalize(psi: &Formula) -> Result<Formula, CheckError> {
    let mut used: HashSet<String> = psi.free_vars().into_iter().collect();
    let f = rename_apart(psi, &mut used);
    let (e, me) = blocks(&f, Quant::Exists)?;
    let (a, ma) = blocks(&f, Quant::Forall)?;
    let (e, a) = (flatten(e), flatten(a));
    let (prefix, matrix) = if prefix_alternations(&a) < prefix_alternations(&e) { (a, ma) } else { (e, me) };
    Ok(Formula::with_prefix(&prefix, matrix))
}

/// Largest number of quantifier alternations along a branch of the syntax
/// tree.
pub fn alternation_depth(f: &Formula) -> usize {
    fn go(f: &Formula, last: Option<Quant>) -> usize {
        match f {
            Formula::Exists(_, b) | Formula::Forall(_, b) => {
                let q = if matches!(f, Formula::Exists(..)) { Quant::Exists } else { Quant::Forall };
                let step = usize::from(last.is_some_and(|l| l != q));
                step + go(b, Some(q))
            }
            _ => f.children().into_iter().map(|c| go(c, last)).max().unwrap_or(0),
        }
    }
    go(f, None)
}
