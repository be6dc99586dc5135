//! Obligation-set automata for Boolean letter-level formulas.
//!
//! When every node of the IR is 0/1 valued, the formula is an LTL formula
//! over the letters. It is put in negation normal form and each automaton
//! state keeps the set of formulas that must hold from the current position.

use super::tableau::{Ir, Node};
use crate::automata::{reduce, Alphabet, AutomataError, Letter, Nba};
use crate::formula::FuncKind;
use crate::kripke::WeightedKripke;
use crate::rational::{one, zero};
use std::collections::{BTreeSet, HashMap, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum L {
    True,
    False,
    /// true when the proposition carries a weight index whose entry is set
    Lit(usize, Vec<bool>),
    And(Vec<usize>),
    Or(Vec<usize>),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Store {
    nodes: Vec<L>,
    ids: HashMap<L, usize>,
}

impl Store {
    fn add(&mut self, n: L) -> usize {
        if let Some(&i) = self.ids.get(&n) {
            return i;
        }
        self.nodes.push(n.clone());
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// NNF of node `i` of `ir` (negated when `neg`).
    fn nnf(&mut self, ir: &Ir, i: usize, neg: bool, memo: &mut HashMap<(usize, bool), usize>) -> usize {
        if let Some(&r) = memo.get(&(i, neg)) {
            return r;
        }
        let r = match &ir.nodes[i] {
            Node::Const(c) => {
                if (*c == one()) != neg {
                    self.add(L::True)
                } else {
                    self.add(L::False)
                }
            }
            Node::Leaf { prop, table } => self.add(L::Lit(*prop, table.iter().map(|w| (*w == one()) != neg).collect())),
            Node::Func(FuncKind::Not, args) => self.nnf(ir, args[0], !neg, memo),
            Node::Func(kind, args) => {
                let xs: Vec<usize> = args.iter().map(|&a| self.nnf(ir, a, neg, memo)).collect();
                if (*kind == FuncKind::And) != neg {
                    self.add(L::And(xs))
                } else {
                    self.add(L::Or(xs))
                }
            }
            Node::Next(c) => {
                let x = self.nnf(ir, *c, neg, memo);
                self.add(L::Next(x))
            }
            Node::Until(a, b) => {
                let (x, y) = (self.nnf(ir, *a, neg, memo), self.nnf(ir, *b, neg, memo));
                if neg {
                    self.add(L::Release(x, y))
                } else {
                    self.add(L::Until(x, y))
                }
            }
        };
        memo.insert((i, neg), r);
        r
    }
}

/// Whether every node of `ir` is 0/1 valued and built from not/or/and.
pub(crate) fn is_boolean(ir: &Ir) -> bool {
    ir.nodes.iter().all(|n| match n {
        Node::Const(c) => *c == zero() || *c == one(),
        Node::Leaf { table, .. } => table.iter().all(|w| *w == zero() || *w == one()),
        Node::Func(k, _) => matches!(k, FuncKind::Not | FuncKind::Or | FuncKind::And),
        Node::Next(_) | Node::Until(..) => true,
    })
}

/// One way of meeting a set of obligations at a position.
struct Expansion {
    next: BTreeSet<usize>,
    /// untils postponed at this position
    deferred: BTreeSet<usize>,
}

struct Expander<'a> {
    s: &'a Store,
    letter: &'a [u8],
    out: Vec<Expansion>,
}

impl Expander<'_> {
    fn run(
        &mut self,
        mut todo: Vec<usize>,
        mut done: BTreeSet<usize>,
        mut next: BTreeSet<usize>,
        mut deferred: BTreeSet<usize>,
    ) {
        while let Some(f) = todo.pop() {
            if !done.insert(f) {
                continue;
            }
            match &self.s.nodes[f] {
                L::True => {}
                L::False => return,
                L::Lit(p, table) => {
                    if !table[self.letter[*p] as usize] {
                        return;
                    }
                }
                L::And(xs) => todo.extend(xs),
                L::Or(xs) => {
                    for &x in xs {
                        let mut t = todo.clone();
                        t.push(x);
                        self.run(t, done.clone(), next.clone(), deferred.clone());
                    }
                    return;
                }
                L::Next(x) => {
                    next.insert(*x);
                }
                &L::Until(a, b) => {
                    let mut t = todo.clone();
                    t.push(b);
                    self.run(t, done.clone(), next.clone(), deferred.clone());
                    todo.push(a);
                    next.insert(f);
                    deferred.insert(f);
                }
                &L::Release(a, b) => {
                    let mut t = todo.clone();
                    t.push(a);
                    t.push(b);
                    self.run(t, done.clone(), next.clone(), deferred.clone());
                    todo.push(b);
                    next.insert(f);
                }
            }
        }
        self.out.push(Expansion { next, deferred });
    }
}

/// Drops expansions that ask for more than another one.
fn minimize(mut xs: Vec<Expansion>) -> Vec<Expansion> {
    xs.sort_by_key(|e| (e.next.len() + e.deferred.len(), e.next.clone(), e.deferred.clone()));
    let mut keep: Vec<Expansion> = Vec::new();
    for e in xs {
        if !keep.iter().any(|k| k.next.is_subset(&e.next) && k.deferred.is_subset(&e.deferred)) {
            keep.push(e);
        }
    }
    keep
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    state: usize,
    obligations: BTreeSet<usize>,
    counter: u16,
}

/// Automaton over the alphabet of `kn` accepting the paths of `kn` on
/// which the Boolean node `root` is 1 (`positive`) or 0.
pub(crate) fn boolean_tableau(
    ir: &Ir,
    root: usize,
    kn: &WeightedKripke,
    positive: bool,
    cap: usize,
) -> Result<Nba, AutomataError> {
    let mut s = Store::default();
    let start = s.nnf(ir, root, !positive, &mut HashMap::new());
    let untils: Vec<usize> = (0..s.nodes.len()).filter(|&i| matches!(s.nodes[i], L::Until(..))).collect();
    let m = untils.len() as u16;
    let alphabet = Alphabet::new(kn.props.clone(), kn.weights.clone());
    let letters: Vec<Letter> =
        (0..kn.num_states()).map(|q| alphabet.encode(&kn.labels[q]).expect("labels use declared weights")).collect();

    let mut out = Nba::empty(alphabet);
    let mut ids: HashMap<Key, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &q in &kn.initial {
        let key = Key { state: q, obligations: [start].into(), counter: 0 };
        if !ids.contains_key(&key) {
            let id = out.add_state(m == 0);
            ids.insert(key.clone(), id);
            queue.push_back(key.clone());
        }
        out.initial.push(ids[&key]);
    }
    let mut expansions: HashMap<(usize, BTreeSet<usize>), Vec<Expansion>> = HashMap::new();
    while let Some(key) = queue.pop_front() {
        let id = ids[&key];
        let letter = &letters[key.state];
        let exps = expansions.entry((key.state, key.obligations.clone())).or_insert_with(|| {
            let mut e = Expander { s: &s, letter, out: Vec::new() };
            e.run(key.obligations.iter().copied().collect(), BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
            minimize(e.out)
        });
        let mut edges = Vec::new();
        for e in exps.iter() {
            let mut c = if key.counter == m { 0 } else { key.counter };
            while c < m && !e.deferred.contains(&untils[c as usize]) {
                c += 1;
            }
            for &t in &kn.succ[key.state] {
                let nk = Key { state: t, obligations: e.next.clone(), counter: c };
                let tid = match ids.get(&nk) {
                    Some(&x) => x,
                    None => {
                        if out.num_states() >= cap {
                            return Err(AutomataError::StateCap { cap, stage: "value automaton".into() });
                        }
                        let x = out.add_state(c == m);
                        ids.insert(nk.clone(), x);
                        queue.push_back(nk);
                        x
                    }
                };
                edges.push((letter.clone(), tid));
            }
        }
        edges.sort();
        edges.dedup();
        out.trans[id] = edges;
    }
    Ok(reduce(&out))
}
