//! Nondeterministic Büchi automata over letters `props -> W`.

mod complement;
mod reduce;

pub use complement::{complement, complement_over, complement_with_cap};
pub use reduce::{reduce, trim};

use crate::kripke::{Lasso, WeightedKripke};
use crate::rational::{fmt_rational, Rational};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

pub const DEFAULT_STATE_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("unknown proposition {0}")]
    UnknownProp(String),
    #[error("state cap of {cap} exceeded during {stage}")]
    StateCap { cap: usize, stage: String },
}

/// Complementation state cap, overridable through `HYPERQUAL_STATE_CAP`.
pub fn default_state_cap() -> usize {
    std::env::var("HYPERQUAL_STATE_CAP").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_STATE_CAP)
}

/// A letter stores, per proposition, the index of its weight.
pub type Letter = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    pub props: Vec<String>,
    pub weights: Vec<Rational>,
}

impl Alphabet {
    pub fn new(props: Vec<String>, mut weights: Vec<Rational>) -> Self {
        weights.sort();
        weights.dedup();
        assert!(weights.len() <= u8::MAX as usize + 1);
        Alphabet { props, weights }
    }

    /// |W|^|AP|, saturating.
    pub fn size(&self) -> usize {
        let mut n: usize = 1;
        for _ in &self.props {
            n = n.saturating_mul(self.weights.len());
        }
        n
    }

    pub fn letters(&self) -> Vec<Letter> {
        let mut out = vec![Vec::new()];
        for _ in &self.props {
            out = out
                .into_iter()
                .flat_map(|l: Letter| {
                    (0..self.weights.len()).map(move |w| {
                        let mut l = l.clone();
                        l.push(w as u8);
                        l
                    })
                })
                .collect();
        }
        out
    }

    pub fn encode(&self, values: &[Rational]) -> Option<Letter> {
        values.iter().map(|v| self.weights.binary_search(v).ok().map(|i| i as u8)).collect()
    }

    pub fn decode(&self, l: &[u8]) -> Vec<Rational> {
        l.iter().map(|&i| self.weights[i as usize].clone()).collect()
    }

    pub fn format_letter(&self, l: &[u8]) -> String {
        self.props
            .iter()
            .zip(l)
            .map(|(p, &i)| format!("{p}={}", fmt_rational(&self.weights[i as usize])))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Encodes position `i` of a lasso, matching propositions by name.
    pub fn lasso_letter(&self, l: &Lasso, i: usize) -> Option<Letter> {
        let values: Vec<Rational> = self.props.iter().map(|p| l.value(i, p)).collect();
        self.encode(&values)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nba {
    pub alphabet: Alphabet,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
    pub trans: Vec<Vec<(Letter, usize)>>,
}

/// An accepted lasso with the accepting run that witnesses it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptedLasso {
    pub lasso: Lasso,
    pub run_stem: Vec<usize>,
    pub run_loop: Vec<usize>,
}

impl Nba {
    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    pub fn empty(alphabet: Alphabet) -> Nba {
        Nba { alphabet, initial: vec![], accepting: vec![], trans: vec![] }
    }

    /// One accepting state looping on every letter of `letters`.
    pub fn universal_over(alphabet: Alphabet, letters: &[Letter]) -> Nba {
        let trans = vec![letters.iter().map(|l| (l.clone(), 0)).collect()];
        Nba { alphabet, initial: vec![0], accepting: vec![true], trans }
    }

    pub fn universal(alphabet: Alphabet) -> Nba {
        let letters = alphabet.letters();
        Self::universal_over(alphabet, &letters)
    }

    pub fn add_state(&mut self, accepting: bool) -> usize {
        self.accepting.push(accepting);
        self.trans.push(Vec::new());
        self.accepting.len() - 1
    }

    pub fn is_deterministic(&self) -> bool {
        self.initial.len() <= 1
            && self.trans.iter().all(|ts| {
                let mut seen = HashSet::new();
                ts.iter().all(|(l, _)| seen.insert(l))
            })
    }

    /// Letters that occur on some transition.
    pub fn used_letters(&self) -> Vec<Letter> {
        let set: HashSet<&Letter> = self.trans.iter().flatten().map(|(l, _)| l).collect();
        let mut v: Vec<Letter> = set.into_iter().cloned().collect();
        v.sort();
        v
    }

    fn graph(&self) -> Vec<Vec<usize>> {
        self.trans.iter().map(|ts| ts.iter().map(|(_, t)| *t).collect()).collect()
    }

    pub fn is_empty(&self) -> bool {
        accepting_cycle(&self.graph(), &self.initial, &self.accepting).is_none()
    }

    /// An accepted lasso, if any.
    pub fn witness(&self) -> Option<AcceptedLasso> {
        let g = self.graph();
        let (stem, cycle) = accepting_cycle(&g, &self.initial, &self.accepting)?;
        let letter_between = |a: usize, b: usize| -> Vec<Rational> {
            let (l, _) = self.trans[a].iter().find(|(_, t)| *t == b).unwrap();
            self.alphabet.decode(l)
        };
        let mut stem_letters = Vec::new();
        for w in stem.windows(2) {
            stem_letters.push(letter_between(w[0], w[1]));
        }
        if let (Some(&last), Some(&first)) = (stem.last(), cycle.first()) {
            stem_letters.push(letter_between(last, first));
        }
        let mut cycle_letters = Vec::new();
        for i in 0..cycle.len() {
            cycle_letters.push(letter_between(cycle[i], cycle[(i + 1) % cycle.len()]));
        }
        Some(AcceptedLasso {
            lasso: Lasso::new(self.alphabet.props.clone(), stem_letters, cycle_letters),
            run_stem: stem,
            run_loop: cycle,
        })
    }

    /// Checks that `w` describes an accepting run on its lasso.
    pub fn validate_run(&self, w: &AcceptedLasso) -> bool {
        let l = &w.lasso;
        if w.run_stem.len() != l.stem.len() || w.run_loop.len() != l.cycle.len() {
            return false;
        }
        let run: Vec<usize> = w.run_stem.iter().chain(&w.run_loop).copied().collect();
        if run.iter().any(|&q| q >= self.num_states()) || !self.initial.contains(&run[0]) {
            return false;
        }
        for i in 0..run.len() {
            let next = run[l.next_pos(i)];
            let letter = match self.alphabet.lasso_letter(l, i) {
                Some(x) => x,
                None => return false,
            };
            if !self.trans[run[i]].iter().any(|(a, t)| *a == letter && *t == next) {
                return false;
            }
        }
        w.run_loop.iter().any(|&q| self.accepting[q])
    }

    /// Membership of a lasso word.
    pub fn accepts(&self, l: &Lasso) -> bool {
        let n = l.len();
        let letters: Vec<Option<Letter>> = (0..n).map(|i| self.alphabet.lasso_letter(l, i)).collect();
        let m = self.num_states();
        let mut g = vec![Vec::new(); m * n];
        for q in 0..m {
            for (i, letter) in letters.iter().enumerate() {
                let Some(letter) = letter else { continue };
                let j = l.next_pos(i);
                for (a, t) in &self.trans[q] {
                    if a == letter {
                        g[q * n + i].push(t * n + j);
                    }
                }
            }
        }
        let init: Vec<usize> = self.initial.iter().map(|&q| q * n).collect();
        let acc: Vec<bool> = (0..m * n).map(|x| self.accepting[x / n]).collect();
        accepting_cycle(&g, &init, &acc).is_some()
    }

    /// Renders the `.nba` debug format.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let ws: Vec<String> = self.alphabet.weights.iter().map(fmt_rational).collect();
        let _ = writeln!(out, "props: {}", self.alphabet.props.join(", "));
        let _ = writeln!(out, "weights: {}", ws.join(", "));
        let _ = writeln!(out, "states: {}", self.num_states());
        let ini: Vec<String> = self.initial.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(out, "initial: {}", ini.join(" "));
        let acc: Vec<String> = (0..self.num_states()).filter(|&q| self.accepting[q]).map(|q| q.to_string()).collect();
        let _ = writeln!(out, "accepting: {}", acc.join(" "));
        let _ = writeln!(out, "trans:");
        for (q, ts) in self.trans.iter().enumerate() {
            for (l, t) in ts {
                let _ = writeln!(out, "  {q} -> {t} : {}", self.alphabet.format_letter(l));
            }
        }
        out
    }
}

/// Structure `K^n` as an automaton: states are product states, every state
/// is accepting, and leaving a state reads its label.
pub fn kripke_to_nba(k: &WeightedKripke, n: usize) -> Nba {
    let kn = k.self_product(n);
    let alphabet = Alphabet::new(kn.props.clone(), k.weights.clone());
    let trans = (0..kn.num_states())
        .map(|s| {
            let l = alphabet.encode(&kn.labels[s]).expect("labels use declared weights");
            kn.succ[s].iter().map(|&t| (l.clone(), t)).collect()
        })
        .collect();
    Nba { alphabet, initial: kn.initial.clone(), accepting: vec![true; kn.num_states()], trans }
}

fn index_by_letter(ts: &[(Letter, usize)]) -> HashMap<&Letter, Vec<usize>> {
    let mut m: HashMap<&Letter, Vec<usize>> = HashMap::new();
    for (l, t) in ts {
        m.entry(l).or_default().push(*t);
    }
    m
}

/// Product automaton accepting `L(a) ∩ L(b)`.
pub fn intersect(a: &Nba, b: &Nba) -> Result<Nba, AutomataError> {
    if a.alphabet != b.alphabet {
        return Err(AutomataError::AlphabetMismatch);
    }
    let b_all = b.accepting.iter().all(|&x| x);
    let a_all = a.accepting.iter().all(|&x| x);
    let b_index: Vec<HashMap<&Letter, Vec<usize>>> = b.trans.iter().map(|t| index_by_letter(t)).collect();
    // phase 0 waits for an accepting state of a, phase 1 for one of b
    let two_phase = !a_all && !b_all;
    let mut out = Nba::empty(a.alphabet.clone());
    let mut ids: HashMap<(usize, usize, u8), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let accepting_of = |p: usize, q: usize, ph: u8| -> bool {
        if a_all {
            b.accepting[q]
        } else if b_all {
            a.accepting[p]
        } else {
            ph == 0 && a.accepting[p]
        }
    };
    for &p in &a.initial {
        for &q in &b.initial {
            let key = (p, q, 0);
            if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(key) {
                let id = out.add_state(accepting_of(p, q, 0));
                e.insert(id);
                out.initial.push(id);
                queue.push_back(key);
            }
        }
    }
    while let Some((p, q, ph)) = queue.pop_front() {
        let id = ids[&(p, q, ph)];
        let nph = if !two_phase {
            0
        } else if ph == 0 && a.accepting[p] {
            1
        } else if ph == 1 && b.accepting[q] {
            0
        } else {
            ph
        };
        let mut edges = Vec::new();
        for (l, p2) in &a.trans[p] {
            if let Some(qs) = b_index[q].get(l) {
                for &q2 in qs {
                    let key = (*p2, q2, nph);
                    let tid = match ids.get(&key) {
                        Some(&t) => t,
                        None => {
                            let t = out.add_state(accepting_of(*p2, q2, nph));
                            ids.insert(key, t);
                            queue.push_back(key);
                            t
                        }
                    };
                    edges.push((l.clone(), tid));
                }
            }
        }
        out.trans[id] = edges;
    }
    Ok(out)
}

/// Disjoint union.
pub fn union(a: &Nba, b: &Nba) -> Result<Nba, AutomataError> {
    if a.alphabet != b.alphabet {
        return Err(AutomataError::AlphabetMismatch);
    }
    let off = a.num_states();
    let mut out = a.clone();
    out.accepting.extend(&b.accepting);
    out.initial.extend(b.initial.iter().map(|q| q + off));
    for ts in &b.trans {
        out.trans.push(ts.iter().map(|(l, t)| (l.clone(), t + off)).collect());
    }
    Ok(out)
}

/// Restricts letters to the propositions in `keep` (alphabet order is kept).
pub fn project(a: &Nba, keep: &[String]) -> Result<Nba, AutomataError> {
    if let Some(p) = keep.iter().find(|p| !a.alphabet.props.contains(p)) {
        return Err(AutomataError::UnknownProp(p.clone()));
    }
    let idx: Vec<usize> = (0..a.alphabet.props.len()).filter(|&i| keep.contains(&a.alphabet.props[i])).collect();
    let alphabet =
        Alphabet::new(idx.iter().map(|&i| a.alphabet.props[i].clone()).collect(), a.alphabet.weights.clone());
    let trans = a
        .trans
        .iter()
        .map(|ts| {
            let mut seen = HashSet::new();
            ts.iter()
                .map(|(l, t)| (idx.iter().map(|&i| l[i]).collect::<Letter>(), *t))
                .filter(|e| seen.insert(e.clone()))
                .collect()
        })
        .collect();
    Ok(Nba { alphabet, initial: a.initial.clone(), accepting: a.accepting.clone(), trans })
}

/// Keeps only transitions whose letter is in `letters`.
pub fn restrict_letters(a: &Nba, letters: &[Letter]) -> Nba {
    let set: HashSet<&Letter> = letters.iter().collect();
    let mut out = a.clone();
    for ts in &mut out.trans {
        ts.retain(|(l, _)| set.contains(l));
    }
    out
}

/// Strongly connected components (iterative Tarjan). Returns the component
/// index of every node reachable from `roots` (`usize::MAX` otherwise).
pub(crate) fn sccs(g: &[Vec<usize>], roots: &[usize]) -> (Vec<usize>, usize) {
    let n = g.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut ncomp = 0;
    for &r in roots {
        if index[r] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(r, 0)];
        index[r] = next_index;
        low[r] = next_index;
        next_index += 1;
        stack.push(r);
        on_stack[r] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < g[v].len() {
                let w = g[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    (comp, ncomp)
}

/// Whether component `c` contains a cycle.
pub(crate) fn nontrivial(g: &[Vec<usize>], comp: &[usize], members: &[usize]) -> bool {
    members.len() > 1 || members.iter().any(|&v| g[v].iter().any(|&w| w == v && comp[w] == comp[v]))
}

fn bfs_path(
    g: &[Vec<usize>],
    from: &[usize],
    target: impl Fn(usize) -> bool,
    allowed: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut prev = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in from {
        if prev.insert(s, usize::MAX).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if target(v) {
            let mut path = vec![v];
            let mut cur = v;
            while prev[&cur] != usize::MAX {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &g[v] {
            if allowed(w) && !prev.contains_key(&w) {
                prev.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Finds a reachable accepting cycle. Returns `(stem, cycle)` node lists:
/// the stem leads from an initial node to `cycle[0]` (exclusive), and the
/// cycle returns to `cycle[0]`.
pub(crate) fn accepting_cycle(g: &[Vec<usize>], init: &[usize], acc: &[bool]) -> Option<(Vec<usize>, Vec<usize>)> {
    let (comp, ncomp) = sccs(g, init);
    let mut members = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        if c != usize::MAX {
            members[c].push(v);
        }
    }
    let good: Vec<bool> =
        (0..ncomp).map(|c| members[c].iter().any(|&v| acc[v]) && nontrivial(g, &comp, &members[c])).collect();
    let target = (0..g.len()).find(|&v| comp[v] != usize::MAX && acc[v] && good[comp[v]])?;
    let stem_path = bfs_path(g, init, |v| v == target, |_| true)?;
    let c = comp[target];
    // cycle: one step out of target, then back inside the component
    let starts: Vec<usize> = g[target].iter().copied().filter(|&w| comp[w] == c).collect();
    let back = bfs_path(g, &starts, |v| v == target, |w| comp[w] == c)?;
    let mut cycle = vec![target];
    cycle.extend(&back[..back.len() - 1]);
    let mut stem = stem_path;
    stem.pop();
    Some((stem, cycle))
}
