//! Finite value sets for the propositional logic and the discounted value
//! lattice used by the exact fragment checks.

use crate::formula::{Discount, Formula, FuncKind};
use crate::rational::{fmt_rational, in_unit, one, zero, Rational};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuesError {
    #[error("value sets are only defined for formulas without discounted operators")]
    Discounted,
    #[error("truncation point must be positive, got {0}")]
    NonPositiveCut(String),
    #[error("value {0} outside the admissible range")]
    OutOfRange(String),
    #[error("no least lattice value above 0: the lattice accumulates at 0")]
    Accumulation,
}

/// A sorted, duplicate-free set of values in [0,1].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ValueSet {
    values: Vec<Rational>,
}

impl ValueSet {
    pub fn new(values: impl IntoIterator<Item = Rational>) -> Result<Self, ValuesError> {
        let set: BTreeSet<Rational> = values.into_iter().collect();
        if let Some(v) = set.iter().find(|v| !in_unit(v)) {
            return Err(ValuesError::OutOfRange(fmt_rational(v)));
        }
        Ok(ValueSet { values: set.into_iter().collect() })
    }

    fn from_set(set: BTreeSet<Rational>) -> Self {
        ValueSet { values: set.into_iter().collect() }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.values.binary_search(v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.values.iter()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.values
    }

    pub fn union(&self, other: &ValueSet) -> ValueSet {
        Self::from_set(self.values.iter().chain(&other.values).cloned().collect())
    }

    pub fn max(&self) -> Option<&Rational> {
        self.values.last()
    }

    pub fn min(&self) -> Option<&Rational> {
        self.values.first()
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(fmt_rational).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn with_bounds(w: &ValueSet) -> BTreeSet<Rational> {
    let mut s: BTreeSet<Rational> = w.iter().cloned().collect();
    s.insert(zero());
    s.insert(one());
    s
}

// Boolean subformulas over weights W take values in W, 1-W and {0,1}.
fn lattice_bases(w: &ValueSet) -> BTreeSet<Rational> {
    let mut s = with_bounds(w);
    s.extend(w.iter().map(crate::rational::one_minus));
    s
}

/// Over-approximation of the values a discount-free formula can take when
/// atoms range over `w`.
pub fn value_overapprox(f: &Formula, w: &ValueSet) -> Result<ValueSet, ValuesError> {
    if f.has_discount() {
        return Err(ValuesError::Discounted);
    }
    Ok(ValueSet::from_set(overapprox(f, w)))
}

fn overapprox(f: &Formula, w: &ValueSet) -> BTreeSet<Rational> {
    match f {
        Formula::True => [one()].into(),
        Formula::False => [zero()].into(),
        Formula::Atom { .. } => with_bounds(w),
        Formula::Next(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => overapprox(a, w),
        Formula::Until(a, b) | Formula::Release(a, b) | Formula::DUntil(_, a, b) | Formula::DRelease(_, a, b) => {
            let mut s = overapprox(a, w);
            s.extend(overapprox(b, w));
            s
        }
        Formula::Func(kind, args) => {
            let sets: Vec<BTreeSet<Rational>> = args.iter().map(|a| overapprox(a, w)).collect();
            image(kind, &sets)
        }
    }
}

fn image(kind: &FuncKind, sets: &[BTreeSet<Rational>]) -> BTreeSet<Rational> {
    let fold = |init: Rational, step: &dyn Fn(&Rational, &Rational, usize) -> Rational| {
        let mut acc: BTreeSet<Rational> = [init].into();
        for (i, s) in sets.iter().enumerate() {
            acc = acc.iter().flat_map(|a| s.iter().map(move |x| (a, x))).map(|(a, x)| step(a, x, i)).collect();
        }
        acc
    };
    match kind {
        FuncKind::Or => fold(zero(), &|a, x, _| a.max(x).clone()),
        FuncKind::And => fold(one(), &|a, x, _| a.min(x).clone()),
        FuncKind::Oplus(cs) => fold(zero(), &|a, x, i| a + &cs[i] * x),
        _ => {
            let mut tuples: Vec<Vec<Rational>> = vec![Vec::new()];
            for s in sets {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        s.iter().map(move |x| {
                            let mut t = t.clone();
                            t.push(x.clone());
                            t
                        })
                    })
                    .collect();
            }
            tuples.iter().map(|t| kind.apply(t)).collect()
        }
    }
}

/// The value lattice generated by weights, nesting depth `k` and the
/// discount sequences `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountedLattice {
    pub k: usize,
    pub h: BTreeSet<Discount>,
    pub w: ValueSet,
}

impl DiscountedLattice {
    pub fn new(k: usize, h: impl IntoIterator<Item = Discount>, w: ValueSet) -> Self {
        DiscountedLattice { k, h: h.into_iter().collect(), w }
    }

    /// Lattice for a formula over a structure with weights `w`.
    pub fn for_formula(f: &Formula, w: &ValueSet) -> Self {
        DiscountedLattice { k: f.discount_depth(), h: f.discounts(), w: w.clone() }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        if x.is_zero() {
            return true;
        }
        x.is_positive() && lattice_truncate(self, x).map(|s| s.contains(x)).unwrap_or(false)
    }
}

/// All lattice values in `[a, 1]`.
pub fn lattice_truncate(l: &DiscountedLattice, a: &Rational) -> Result<ValueSet, ValuesError> {
    if !a.is_positive() {
        return Err(ValuesError::NonPositiveCut(fmt_rational(a)));
    }
    let mut out = BTreeSet::new();
    let mut bases = lattice_bases(&l.w);
    bases.remove(&zero());
    for w in &bases {
        if w >= a {
            out.insert(w.clone());
            grow(l, w, l.k, a, &mut out);
        }
    }
    Ok(ValueSet::from_set(out))
}

fn grow(l: &DiscountedLattice, p: &Rational, depth: usize, a: &Rational, out: &mut BTreeSet<Rational>) {
    if depth == 0 {
        return;
    }
    for eta in &l.h {
        let mut i = 1;
        loop {
            let q = p * eta.eta(i);
            if q < *a {
                break;
            }
            out.insert(q.clone());
            grow(l, &q, depth - 1, a, out);
            i += 1;
        }
    }
}

/// Greatest lattice value strictly below `v`.
pub fn nearest_below(l: &DiscountedLattice, v: &Rational) -> Result<Rational, ValuesError> {
    if !v.is_positive() || *v > one() {
        return Err(ValuesError::OutOfRange(fmt_rational(v)));
    }
    let cut = if l.k >= 1 { l.h.iter().map(|d| d.eta(d.first_below(v))).max() } else { None };
    match cut {
        Some(a) => {
            let set = lattice_truncate(l, &a)?;
            Ok(set.iter().filter(|x| *x < v).max().cloned().unwrap_or(a))
        }
        None => Ok(lattice_bases(&l.w).into_iter().filter(|x| x < v).max().unwrap_or_else(zero)),
    }
}

/// Least lattice value strictly above `v`.
pub fn nearest_above(l: &DiscountedLattice, v: &Rational) -> Result<Rational, ValuesError> {
    if v.is_zero() {
        return Err(ValuesError::Accumulation);
    }
    if v.is_negative() || *v >= one() {
        return Err(ValuesError::OutOfRange(fmt_rational(v)));
    }
    let set = lattice_truncate(l, v)?;
    Ok(set.iter().find(|x| *x > v).cloned().unwrap_or_else(one))
}
