//! Quantifier elimination, one quantifier block at a time.
//!
//! Level `l` of an [`Eliminator`] is the formula below the first `l` blocks,
//! read over the free variables and the variables of those blocks. Each
//! level has a "yes" automaton (value at or above the threshold) and a "no"
//! automaton (the remaining paths of the structure). An existential block
//! projects the inner "yes" automaton, a universal block projects the inner
//! "no" automaton, and the other side is the complement relative to the
//! structure.

use super::tableau::tableau;
use super::threshold::Thresholds;
use super::{atoms, compile_prop_qf_with_cap, CompileError, PredicateSpec};
use crate::automata::{
    complement_over, default_state_cap, intersect, kripke_to_nba, project, reduce, union, Letter, Nba,
};
use crate::formula::{negate_dual, Formula, Quant};
use crate::kripke::WeightedKripke;
use crate::rational::{one, one_minus, zero, Rational};
use crate::values::{value_overapprox, ValueSet};
use std::collections::HashMap;

type Leaf<'a> = Box<dyn FnMut(bool) -> Result<Nba, CompileError> + 'a>;

pub struct Eliminator<'a> {
    k: &'a WeightedKripke,
    blocks: Vec<(Quant, usize)>,
    base: usize,
    leaf: Leaf<'a>,
    cache: HashMap<(usize, bool), Nba>,
    cap: usize,
}

fn blocks_of(prefix: &[(Quant, &str)]) -> Vec<(Quant, usize)> {
    let mut out: Vec<(Quant, usize)> = Vec::new();
    for (q, _) in prefix {
        match out.last_mut() {
            Some((last, n)) if last == q => *n += 1,
            _ => out.push((*q, 1)),
        }
    }
    out
}

fn check_free(f: &Formula, free: &[&str]) -> Result<(), CompileError> {
    match f.free_vars().into_iter().find(|v| !free.contains(&v.as_str())) {
        Some(v) => Err(CompileError::Unbound(v)),
        None => Ok(()),
    }
}

fn all_vars(free: &[&str], prefix: &[(Quant, &str)]) -> Vec<String> {
    free.iter().map(|s| s.to_string()).chain(prefix.iter().map(|(_, v)| v.to_string())).collect()
}

impl<'a> Eliminator<'a> {
    /// Levels for `value(psi) >= c` on a propositional-quality formula.
    pub fn prop(
        psi: &'a Formula,
        k: &'a WeightedKripke,
        free: &[&str],
        c: Rational,
        cap: usize,
    ) -> Result<Self, CompileError> {
        check_free(psi, free)?;
        let (prefix, matrix) = psi.prefix();
        let vars = all_vars(free, &prefix);
        let leaf: Leaf<'a> = Box::new(move |yes| {
            let vs: Vec<&str> = vars.iter().map(String::as_str).collect();
            let p = if yes { PredicateSpec::Ge(c.clone()) } else { PredicateSpec::Lt(c.clone()) };
            compile_prop_qf_with_cap(matrix, k, &vs, &p, cap)
        });
        Ok(Eliminator { k, blocks: blocks_of(&prefix), base: free.len(), leaf, cache: HashMap::new(), cap })
    }

    /// Levels for `value(psi) > v` on a temporal-quality formula; the "yes"
    /// side carries the one-sided threshold contract.
    pub fn temp(
        psi: &'a Formula,
        k: &'a WeightedKripke,
        free: &[&str],
        v: Rational,
        cap: usize,
    ) -> Result<Self, CompileError> {
        check_free(psi, free)?;
        let (prefix, matrix) = psi.prefix();
        let vars = all_vars(free, &prefix);
        let kn = k.self_product(vars.len());
        let vs: Vec<&str> = vars.iter().map(String::as_str).collect();
        let (ir, root) = {
            let mut t = Thresholds::new(atoms(&vs, &kn), 0);
            let (root, _) = super::threshold_root(&mut t, matrix, &PredicateSpec::Gt(v))?;
            (t.ir, root)
        };
        let leaf: Leaf<'a> = Box::new(move |yes| {
            let want = if yes { one() } else { zero() };
            Ok(tableau(&ir, root, &kn, &|x| *x == want, cap)?)
        });
        Ok(Eliminator { k, blocks: blocks_of(&prefix), base: free.len(), leaf, cache: HashMap::new(), cap })
    }

    pub fn levels(&self) -> usize {
        self.blocks.len()
    }

    pub fn components(&self, level: usize) -> usize {
        self.base + self.blocks[..level].iter().map(|(_, n)| n).sum::<usize>()
    }

    pub fn quantifier(&self, level: usize) -> Option<Quant> {
        self.blocks.get(level).map(|(q, _)| *q)
    }

    fn letters(&self, m: usize) -> (Nba, Vec<Letter>) {
        let km = kripke_to_nba(self.k, m);
        let mut letters: Vec<Letter> = km.trans.iter().flatten().map(|(l, _)| l.clone()).collect();
        letters.sort();
        letters.dedup();
        (km, letters)
    }

    /// "yes" (`yes == true`) or "no" automaton of a level.
    pub fn automaton(&mut self, level: usize, yes: bool) -> Result<Nba, CompileError> {
        if let Some(a) = self.cache.get(&(level, yes)) {
            return Ok(a.clone());
        }
        let a = if level == self.blocks.len() {
            (self.leaf)(yes)?
        } else {
            let m = self.components(level);
            let direct = (self.blocks[level].0 == Quant::Exists) == yes;
            if direct {
                let inner = self.automaton(level + 1, yes)?;
                let keep: Vec<String> = inner.alphabet.props[..m * self.k.props.len()].to_vec();
                reduce(&project(&inner, &keep)?)
            } else {
                let other = self.automaton(level, !yes)?;
                let (km, letters) = self.letters(m);
                let c = complement_over(&other, &letters, self.cap)?;
                reduce(&intersect(&c, &km)?)
            }
        };
        self.cache.insert((level, yes), a.clone());
        Ok(a)
    }
}

/// Sorted candidate values of a propositional-quality formula over `k`.
pub(crate) fn candidate_values(psi: &Formula, k: &WeightedKripke) -> Result<ValueSet, CompileError> {
    let w = ValueSet::new(k.weights.iter().cloned())?;
    Ok(value_overapprox(psi, &w)?)
}

/// Automaton over `K^|free|` accepting the assignments of the free
/// variables under which the value of `psi` lies in `p`.
pub fn quantifier_elim_prop(
    psi: &Formula,
    k: &WeightedKripke,
    free: &[&str],
    p: &PredicateSpec,
) -> Result<Nba, CompileError> {
    p.validate()?;
    if psi.has_discount() {
        return Err(CompileError::NotProp);
    }
    let vals = candidate_values(psi, k)?;
    let vs = vals.as_slice();
    let cap = default_state_cap();
    let km = kripke_to_nba(k, free.len());
    let mut out = Nba::empty(km.alphabet.clone());
    let mut i = 0;
    while i < vs.len() {
        if !p.contains(&vs[i]) {
            i += 1;
            continue;
        }
        let lo = i;
        while i < vs.len() && p.contains(&vs[i]) {
            i += 1;
        }
        // values vs[lo..i] form a maximal run inside p
        let mut run = if lo == 0 {
            km.clone()
        } else {
            Eliminator::prop(psi, k, free, vs[lo].clone(), cap)?.automaton(0, true)?
        };
        if i < vs.len() {
            let below = Eliminator::prop(psi, k, free, vs[i].clone(), cap)?.automaton(0, false)?;
            run = reduce(&intersect(&run, &below)?);
        }
        out = union(&out, &run)?;
    }
    Ok(reduce(&out))
}

/// Threshold automaton for a quantified temporal-quality formula with
/// `p = Gt(v)` or `Lt(v)`. Assignments meeting the threshold are accepted;
/// accepted lassos meet its reflexive closure.
pub fn quantifier_elim_temp(
    psi: &Formula,
    k: &WeightedKripke,
    free: &[&str],
    p: &PredicateSpec,
) -> Result<Nba, CompileError> {
    p.validate()?;
    match p {
        PredicateSpec::Gt(v) => Eliminator::temp(psi, k, free, v.clone(), default_state_cap())?.automaton(0, true),
        PredicateSpec::Lt(v) => {
            let dual = negate_dual(psi);
            let mut e = Eliminator::temp(&dual, k, free, one_minus(v), default_state_cap())?;
            e.automaton(0, true)
        }
        _ => Err(CompileError::Predicate(format!("temporal threshold automata take strict thresholds, got {p}"))),
    }
}
