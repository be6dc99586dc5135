//! Formula syntax for the propositional-quality and temporal-quality logics.

mod analyze;
mod dual;
mod parser;
mod printer;

pub use analyze::{analyze, is_boolean, is_positive, FormulaStats, Fragment};
pub use dual::{negate_dual, push_negation};
pub use parser::{parse_formula, parse_formula_open, ParseError};
pub use printer::print_formula;

use crate::rational::{int, one, one_minus, ratio, zero, Rational};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Discount {
    /// η_i = λ^i with 0 < λ < 1.
    Exp(Rational),
    /// η_i = 1/(i+1).
    Harmonic,
}

impl Discount {
    pub fn eta(&self, i: usize) -> Rational {
        match self {
            Discount::Exp(l) => {
                let mut acc = one();
                for _ in 0..i {
                    acc *= l;
                }
                acc
            }
            Discount::Harmonic => ratio(1, i as i64 + 1),
        }
    }

    /// Smallest `i` with `η_i <= c`. Requires `c > 0`.
    pub fn first_at_most(&self, c: &Rational) -> usize {
        assert!(c.is_positive());
        match self {
            Discount::Harmonic => {
                // 1/(i+1) <= c  <=>  i+1 >= 1/c
                let inv = c.recip();
                let ceil = inv.ceil().to_integer();
                let n: usize = ceil.try_into().unwrap_or(usize::MAX);
                n.saturating_sub(1)
            }
            Discount::Exp(l) => {
                let mut i = 0;
                let mut e = one();
                while e > *c {
                    e *= l;
                    i += 1;
                }
                i
            }
        }
    }

    /// Smallest `i` with `η_i < c`. Requires `c > 0`.
    pub fn first_below(&self, c: &Rational) -> usize {
        let i = self.first_at_most(c);
        if self.eta(i) == *c {
            i + 1
        } else {
            i
        }
    }
}

impl fmt::Display for Discount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discount::Exp(l) => write!(f, "exp({})", crate::rational::fmt_rational(l)),
            Discount::Harmonic => write!(f, "harmonic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FuncKind {
    Not,
    Or,
    And,
    Implies,
    Iff,
    /// Weighted average with the given coefficients (one per argument).
    Oplus(Vec<Rational>),
    Scale(Rational),
    ThresholdGt(Rational),
    /// x*y + (1-x)*(1-y).
    Agree,
}

impl FuncKind {
    pub fn apply(&self, xs: &[Rational]) -> Rational {
        match self {
            FuncKind::Not => one_minus(&xs[0]),
            FuncKind::Or => xs.iter().max().cloned().unwrap_or_else(zero),
            FuncKind::And => xs.iter().min().cloned().unwrap_or_else(one),
            FuncKind::Implies => one_minus(&xs[0]).max(xs[1].clone()),
            FuncKind::Iff => {
                let a = one_minus(&xs[0]).max(xs[1].clone());
                let b = one_minus(&xs[1]).max(xs[0].clone());
                a.min(b)
            }
            FuncKind::Oplus(cs) => cs.iter().zip(xs).map(|(c, x)| c * x).sum(),
            FuncKind::Scale(a) => a * &xs[0],
            FuncKind::ThresholdGt(k) => {
                if xs[0] > *k {
                    one()
                } else {
                    zero()
                }
            }
            FuncKind::Agree => &xs[0] * &xs[1] + one_minus(&xs[0]) * one_minus(&xs[1]),
        }
    }

    /// Boolean connectives keep {0,1} closed; the rest are weighted.
    pub fn is_connective(&self) -> bool {
        matches!(self, FuncKind::Not | FuncKind::Or | FuncKind::And | FuncKind::Implies | FuncKind::Iff)
    }

    pub fn arity_ok(&self, n: usize) -> bool {
        match self {
            FuncKind::Not | FuncKind::Scale(_) | FuncKind::ThresholdGt(_) => n == 1,
            FuncKind::Implies | FuncKind::Iff | FuncKind::Agree => n == 2,
            FuncKind::Or | FuncKind::And => n >= 1,
            FuncKind::Oplus(cs) => n == cs.len() && n >= 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quant {
    Exists,
    Forall,
}

impl Quant {
    pub fn dual(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom { prop: String, var: String },
    Func(FuncKind, Vec<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    DUntil(Discount, Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    DRelease(Discount, Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

pub fn atom(prop: &str, var: &str) -> Formula {
    Formula::Atom { prop: prop.to_string(), var: var.to_string() }
}

pub fn not(a: Formula) -> Formula {
    Formula::Func(FuncKind::Not, vec![a])
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Func(FuncKind::Or, vec![a, b])
}

pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::Func(FuncKind::And, vec![a, b])
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Func(FuncKind::Implies, vec![a, b])
}

pub fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Func(FuncKind::Iff, vec![a, b])
}

pub fn next(a: Formula) -> Formula {
    Formula::Next(Box::new(a))
}

pub fn until(a: Formula, b: Formula) -> Formula {
    Formula::Until(Box::new(a), Box::new(b))
}

pub fn release(a: Formula, b: Formula) -> Formula {
    Formula::Release(Box::new(a), Box::new(b))
}

pub fn eventually(a: Formula) -> Formula {
    until(Formula::True, a)
}

pub fn globally(a: Formula) -> Formula {
    release(Formula::False, a)
}

pub fn d_until(eta: Discount, a: Formula, b: Formula) -> Formula {
    Formula::DUntil(eta, Box::new(a), Box::new(b))
}

pub fn d_eventually(eta: Discount, a: Formula) -> Formula {
    d_until(eta, Formula::True, a)
}

pub fn d_globally(eta: Discount, a: Formula) -> Formula {
    Formula::DRelease(eta, Box::new(Formula::False), Box::new(a))
}

pub fn oplus(cs: Vec<Rational>, args: Vec<Formula>) -> Formula {
    Formula::Func(FuncKind::Oplus(cs), args)
}

pub fn exists(var: &str, body: Formula) -> Formula {
    Formula::Exists(var.to_string(), Box::new(body))
}

pub fn forall(var: &str, body: Formula) -> Formula {
    Formula::Forall(var.to_string(), Box::new(body))
}

pub fn big_and(mut parts: Vec<Formula>) -> Formula {
    match parts.len() {
        0 => Formula::True,
        1 => parts.pop().unwrap(),
        _ => Formula::Func(FuncKind::And, parts),
    }
}

pub fn big_or(mut parts: Vec<Formula>) -> Formula {
    match parts.len() {
        0 => Formula::False,
        1 => parts.pop().unwrap(),
        _ => Formula::Func(FuncKind::Or, parts),
    }
}

impl Formula {
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } => vec![],
            Formula::Func(_, args) => args.iter().collect(),
            Formula::Next(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => vec![a],
            Formula::Until(a, b) | Formula::Release(a, b) | Formula::DUntil(_, a, b) | Formula::DRelease(_, a, b) => {
                vec![a, b]
            }
        }
    }

    /// Splits the leading quantifier chain from the matrix.
    pub fn prefix(&self) -> (Vec<(Quant, &str)>, &Formula) {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Formula::Exists(v, b) => {
                    out.push((Quant::Exists, v.as_str()));
                    cur = b;
                }
                Formula::Forall(v, b) => {
                    out.push((Quant::Forall, v.as_str()));
                    cur = b;
                }
                _ => return (out, cur),
            }
        }
    }

    pub fn with_prefix(prefix: &[(Quant, String)], matrix: Formula) -> Formula {
        prefix.iter().rev().fold(matrix, |acc, (q, v)| match q {
            Quant::Exists => Formula::Exists(v.clone(), Box::new(acc)),
            Quant::Forall => Formula::Forall(v.clone(), Box::new(acc)),
        })
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => false,
            _ => self.children().iter().all(|c| c.is_quantifier_free()),
        }
    }

    pub fn atom_count(&self) -> usize {
        match self {
            Formula::Atom { .. } => 1,
            _ => self.children().iter().map(|c| c.atom_count()).sum(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom { var, .. } => {
                if !bound.contains(var) {
                    out.insert(var.clone());
                }
            }
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                bound.push(v.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom { prop, .. } = f {
                out.insert(prop.clone());
            }
        });
        out
    }

    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn has_discount(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f, Formula::DUntil(..) | Formula::DRelease(..)) {
                found = true;
            }
        });
        found
    }

    pub fn has_weighted_func(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if let Formula::Func(k, _) = f {
                if !k.is_connective() {
                    found = true;
                }
            }
        });
        found
    }

    /// Renames free occurrences of `from` to `to`.
    pub fn rename_var(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Atom { prop, var } if var == from => atom(prop, to),
            Formula::Exists(v, _) | Formula::Forall(v, _) if v == from => self.clone(),
            _ => self.map_children(|c| c.rename_var(from, to)),
        }
    }

    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } => self.clone(),
            Formula::Func(k, args) => Formula::Func(k.clone(), args.iter().map(f).collect()),
            Formula::Next(a) => Formula::Next(Box::new(f(a))),
            Formula::Until(a, b) => Formula::Until(Box::new(f(a)), Box::new(f(b))),
            Formula::Release(a, b) => Formula::Release(Box::new(f(a)), Box::new(f(b))),
            Formula::DUntil(e, a, b) => Formula::DUntil(e.clone(), Box::new(f(a)), Box::new(f(b))),
            Formula::DRelease(e, a, b) => Formula::DRelease(e.clone(), Box::new(f(a)), Box::new(f(b))),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(f(a))),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(f(a))),
        }
    }

    /// Collects the discount sequences in use.
    pub fn discounts(&self) -> BTreeSet<Discount> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::DUntil(e, ..) | Formula::DRelease(e, ..) => {
                out.insert(e.clone());
            }
            _ => {}
        });
        out
    }

    /// Nesting depth of discounted operators.
    pub fn discount_depth(&self) -> usize {
        let below = self.children().iter().map(|c| c.discount_depth()).max().unwrap_or(0);
        match self {
            Formula::DUntil(..) | Formula::DRelease(..) => below + 1,
            _ => below,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

/// Checks numeric parameters of function symbols and discounts.
pub(crate) fn check_params(kind: &FuncKind) -> Result<(), String> {
    match kind {
        FuncKind::Oplus(cs) => {
            if cs.iter().any(|c| c.is_negative() || *c > one()) {
                return Err("oplus coefficient outside [0,1]".into());
            }
            let s: Rational = cs.iter().sum();
            if !s.is_one() {
                return Err("oplus coefficients must sum to 1".into());
            }
            Ok(())
        }
        FuncKind::Scale(a) | FuncKind::ThresholdGt(a) => {
            if a.is_negative() || *a > one() {
                Err("parameter outside [0,1]".into())
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

pub(crate) fn check_discount(d: &Discount) -> Result<(), String> {
    match d {
        Discount::Exp(l) if l.is_zero() || l.is_negative() || *l >= int(1) => {
            Err("exp discount factor must lie strictly between 0 and 1".into())
        }
        _ => Ok(()),
    }
}
