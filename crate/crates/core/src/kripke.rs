//! Weighted Kripke structures, lassos and trace-assignment encodings.

use crate::rational::{fmt_rational, in_unit, lcm, parse_rational, zero, Rational};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("state {0} has no successor")]
    NoSuccessor(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("duplicate state {0}")]
    DuplicateState(String),
    #[error("weight {weight} of {prop} in state {state} is not declared in weights")]
    UndeclaredWeight { state: String, prop: String, weight: String },
    #[error("weight {0} outside [0,1]")]
    WeightRange(String),
    #[error("weights must contain 0")]
    MissingZero,
    #[error("initial state set is empty")]
    EmptyInitial,
    #[error("unknown proposition {0}")]
    UnknownProp(String),
    #[error("max_loop must be >= 1")]
    LoopBound,
}

/// A finite structure whose states label each proposition with a weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedKripke {
    pub props: Vec<String>,
    /// The declared weight set W, sorted ascending.
    pub weights: Vec<Rational>,
    pub states: Vec<String>,
    pub initial: Vec<usize>,
    pub succ: Vec<Vec<usize>>,
    /// `labels[s][j]` is the weight of `props[j]` in state `s`.
    pub labels: Vec<Vec<Rational>>,
}

impl WeightedKripke {
    pub fn new(
        props: Vec<String>,
        weights: Vec<Rational>,
        states: Vec<String>,
        initial: Vec<usize>,
        succ: Vec<Vec<usize>>,
        labels: Vec<Vec<Rational>>,
    ) -> Result<Self, KripkeError> {
        let mut weights = weights;
        weights.sort();
        weights.dedup();
        if let Some(w) = weights.iter().find(|w| !in_unit(w)) {
            return Err(KripkeError::WeightRange(fmt_rational(w)));
        }
        if !weights.iter().any(|w| w.is_zero()) {
            return Err(KripkeError::MissingZero);
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s) {
                return Err(KripkeError::DuplicateState(s.clone()));
            }
        }
        if initial.is_empty() {
            return Err(KripkeError::EmptyInitial);
        }
        for (s, out) in succ.iter().enumerate() {
            if out.is_empty() {
                return Err(KripkeError::NoSuccessor(states[s].clone()));
            }
        }
        for (s, row) in labels.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                if weights.binary_search(w).is_err() {
                    return Err(KripkeError::UndeclaredWeight {
                        state: states[s].clone(),
                        prop: props[j].clone(),
                        weight: fmt_rational(w),
                    });
                }
            }
        }
        let mut k = WeightedKripke { props, weights, states, initial, succ, labels };
        for out in &mut k.succ {
            out.sort_unstable();
            out.dedup();
        }
        k.initial.sort_unstable();
        k.initial.dedup();
        Ok(k)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn prop_index(&self, p: &str) -> Option<usize> {
        self.props.iter().position(|q| q == p)
    }

    pub fn is_boolean(&self) -> bool {
        self.labels.iter().flatten().all(|w| w.is_zero() || *w == crate::rational::one())
    }

    /// Synchronous product of `n` copies; proposition `p` of copy `i` is
    /// named `p@i` (1-based).
    pub fn self_product(&self, n: usize) -> WeightedKripke {
        let mut props = Vec::new();
        for i in 1..=n {
            for p in &self.props {
                props.push(format!("{p}@{i}"));
            }
        }
        let m = self.num_states();
        let total = m.pow(n as u32);
        let decode = |mut x: usize| -> Vec<usize> {
            let mut v = vec![0; n];
            for slot in v.iter_mut().rev() {
                *slot = x % m;
                x /= m;
            }
            v
        };
        let encode = |v: &[usize]| v.iter().fold(0, |acc, &s| acc * m + s);
        let mut states = Vec::with_capacity(total);
        let mut succ = Vec::with_capacity(total);
        let mut labels = Vec::with_capacity(total);
        for x in 0..total {
            let tuple = decode(x);
            let names: Vec<&str> = tuple.iter().map(|&s| self.states[s].as_str()).collect();
            states.push(format!("({})", names.join(",")));
            labels.push(tuple.iter().flat_map(|&s| self.labels[s].iter().cloned()).collect());
            let mut out = vec![Vec::new()];
            for &s in &tuple {
                out = out
                    .into_iter()
                    .flat_map(|pre: Vec<usize>| {
                        self.succ[s].iter().map(move |&t| {
                            let mut v = pre.clone();
                            v.push(t);
                            v
                        })
                    })
                    .collect();
            }
            succ.push(out.iter().map(|v| encode(v)).collect());
        }
        let mut initial = vec![Vec::new()];
        for _ in 0..n {
            initial = initial
                .into_iter()
                .flat_map(|pre: Vec<usize>| {
                    self.initial.iter().map(move |&t| {
                        let mut v = pre.clone();
                        v.push(t);
                        v
                    })
                })
                .collect();
        }
        let initial = initial.iter().map(|v| encode(v)).collect();
        WeightedKripke::new(props, self.weights.clone(), states, initial, succ, labels)
            .expect("product of a valid structure is valid")
    }

    /// Letter of state `s` as a lasso letter over `props`.
    pub fn letter(&self, s: usize) -> Vec<Rational> {
        self.labels[s].clone()
    }

    fn letter_for(&self, s: usize, props: &[String]) -> Vec<Rational> {
        props.iter().map(|p| self.prop_index(p).map(|j| self.labels[s][j].clone()).unwrap_or_else(zero)).collect()
    }

    /// Whether the lasso word is the labelling of some path of the structure.
    pub fn has_lasso(&self, l: &Lasso) -> bool {
        let n = l.len();
        let m = self.num_states();
        let letters: Vec<Vec<Rational>> = (0..m).map(|s| self.letter_for(s, &l.props)).collect();
        let ok = |s: usize, i: usize| letters[s] == l.stem_or_cycle(i);
        let idx = |s: usize, i: usize| s * n + i;
        let mut alive: Vec<bool> = (0..m * n).map(|x| ok(x / n, x % n)).collect();
        loop {
            let mut changed = false;
            for s in 0..m {
                for i in 0..n {
                    if !alive[idx(s, i)] {
                        continue;
                    }
                    let j = l.next_pos(i);
                    if !self.succ[s].iter().any(|&t| alive[idx(t, j)]) {
                        alive[idx(s, i)] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.initial.iter().any(|&s| alive[idx(s, 0)])
    }

    /// Renders the structure in the `.wks` text format.
    pub fn to_wks(&self) -> String {
        let mut out = String::new();
        let ws: Vec<String> = self.weights.iter().map(fmt_rational).collect();
        out.push_str(&format!("weights: {}\n", ws.join(", ")));
        if !self.props.is_empty() {
            out.push_str(&format!("props: {}\n", self.props.join(", ")));
        }
        out.push_str(&format!("states: {}\n", self.states.join(", ")));
        let init: Vec<&str> = self.initial.iter().map(|&s| self.states[s].as_str()).collect();
        out.push_str(&format!("init: {}\n", init.join(", ")));
        out.push_str("trans:\n");
        for (s, outs) in self.succ.iter().enumerate() {
            let ts: Vec<&str> = outs.iter().map(|&t| self.states[t].as_str()).collect();
            out.push_str(&format!("  {} -> {}\n", self.states[s], ts.join(", ")));
        }
        out.push_str("labels:\n");
        for (s, row) in self.labels.iter().enumerate() {
            out.push_str("  ");
            out.push_str(&self.states[s]);
            for (j, w) in row.iter().enumerate() {
                if !w.is_zero() {
                    out.push_str(&format!(" {}={}", self.props[j], fmt_rational(w)));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn split_items(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|x| !x.is_empty())
}

/// Parses the `.wks` format.
pub fn parse_kripke(text: &str) -> Result<WeightedKripke, KripkeError> {
    let mut sections: BTreeMap<&str, Vec<(usize, &str)>> = BTreeMap::new();
    let mut current: Option<&str> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let header =
            ["weights:", "states:", "init:", "trans:", "labels:", "props:"].iter().find(|h| line.starts_with(**h));
        if let Some(h) = header {
            let name = &h[..h.len() - 1];
            if sections.contains_key(name) {
                return Err(KripkeError::Syntax { line: line_no, msg: format!("section {name} appears twice") });
            }
            sections.insert(name, Vec::new());
            current = Some(name);
            let rest = line[h.len()..].trim();
            if !rest.is_empty() {
                sections.get_mut(name).unwrap().push((line_no, rest));
            }
        } else if let Some(c) = current {
            sections.get_mut(c).unwrap().push((line_no, line));
        } else {
            return Err(KripkeError::Syntax { line: line_no, msg: "content before any section".into() });
        }
    }
    let need = |name: &str| -> Result<(), KripkeError> {
        if sections.contains_key(name) {
            Ok(())
        } else {
            Err(KripkeError::Syntax { line: 0, msg: format!("missing section {name}:") })
        }
    };
    for s in ["weights", "states", "init", "trans"] {
        need(s)?;
    }
    let empty = Vec::new();
    let get = |name: &str| sections.get(name).unwrap_or(&empty);

    let mut weights = Vec::new();
    for (ln, l) in get("weights") {
        for item in split_items(l) {
            weights.push(parse_rational(item).map_err(|e| KripkeError::Syntax { line: *ln, msg: e.to_string() })?);
        }
    }
    let mut states: Vec<String> = Vec::new();
    for (_, l) in get("states") {
        states.extend(split_items(l).map(String::from));
    }
    let index: HashMap<String, usize> = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let lookup = |s: &str| index.get(s).copied().ok_or_else(|| KripkeError::UnknownState(s.into()));

    let mut initial = Vec::new();
    for (_, l) in get("init") {
        for item in split_items(l) {
            initial.push(lookup(item)?);
        }
    }
    let mut succ = vec![Vec::new(); states.len()];
    for (ln, l) in get("trans") {
        let (a, b) = l
            .split_once("->")
            .ok_or_else(|| KripkeError::Syntax { line: *ln, msg: "expected `state -> state[, state...]`".into() })?;
        let a = lookup(a.trim())?;
        for t in split_items(b) {
            succ[a].push(lookup(t)?);
        }
    }
    let declared: Option<Vec<String>> =
        sections.get("props").map(|ls| ls.iter().flat_map(|(_, l)| split_items(l).map(String::from)).collect());
    let mut raw_labels: Vec<Vec<(String, Rational)>> = vec![Vec::new(); states.len()];
    for (ln, l) in get("labels") {
        let mut items = l.split_whitespace();
        let s = lookup(items.next().unwrap())?;
        for item in items {
            let item = item.trim_end_matches(',');
            if item.is_empty() {
                continue;
            }
            let (p, w) = item.split_once('=').ok_or_else(|| KripkeError::Syntax {
                line: *ln,
                msg: format!("expected prop=weight, found `{item}`"),
            })?;
            let w = parse_rational(w).map_err(|e| KripkeError::Syntax { line: *ln, msg: e.to_string() })?;
            raw_labels[s].push((p.to_string(), w));
        }
    }
    let props = match declared {
        Some(ps) => {
            for row in &raw_labels {
                if let Some((p, _)) = row.iter().find(|(p, _)| !ps.contains(p)) {
                    return Err(KripkeError::UnknownProp(p.clone()));
                }
            }
            ps
        }
        None => raw_labels.iter().flatten().map(|(p, _)| p.clone()).collect::<BTreeSet<_>>().into_iter().collect(),
    };
    let labels = raw_labels
        .iter()
        .map(|row| {
            props
                .iter()
                .map(|p| row.iter().rev().find(|(q, _)| q == p).map(|(_, w)| w.clone()).unwrap_or_else(zero))
                .collect()
        })
        .collect();
    WeightedKripke::new(props, weights, states, initial, succ, labels)
}

impl fmt::Display for WeightedKripke {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_wks())
    }
}

/// An ultimately periodic word `stem · cycle^ω` over letters `props -> W`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lasso {
    pub props: Vec<String>,
    pub stem: Vec<Vec<Rational>>,
    pub cycle: Vec<Vec<Rational>>,
}

impl Lasso {
    pub fn new(props: Vec<String>, stem: Vec<Vec<Rational>>, cycle: Vec<Vec<Rational>>) -> Self {
        assert!(!cycle.is_empty(), "lasso loop must be nonempty");
        Lasso { props, stem, cycle }
    }

    /// Number of distinct positions (stem plus one loop iteration).
    pub fn len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position following `i` in the finite position graph.
    pub fn next_pos(&self, i: usize) -> usize {
        if i + 1 == self.len() {
            self.stem.len()
        } else {
            i + 1
        }
    }

    fn stem_or_cycle(&self, i: usize) -> Vec<Rational> {
        self.letter(i).to_vec()
    }

    /// Letter at position `i` of the infinite word.
    pub fn letter(&self, i: usize) -> &[Rational] {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    pub fn value(&self, i: usize, prop: &str) -> Rational {
        match self.props.iter().position(|p| p == prop) {
            Some(j) => self.letter(i)[j].clone(),
            None => zero(),
        }
    }

    pub fn unfold(&self, n: usize) -> Vec<Vec<Rational>> {
        (0..n).map(|i| self.letter(i).to_vec()).collect()
    }

    /// Shortest stem and primitive loop denoting the same word.
    pub fn normalize(&self) -> Lasso {
        let k = self.cycle.len();
        let period =
            (1..=k).find(|d| k.is_multiple_of(*d) && (0..k).all(|i| self.cycle[i] == self.cycle[i % d])).unwrap();
        let mut stem = self.stem.clone();
        let mut cycle: Vec<_> = self.cycle[..period].to_vec();
        while let Some(last) = stem.last() {
            if *last == cycle[cycle.len() - 1] {
                stem.pop();
                cycle.rotate_right(1);
            } else {
                break;
            }
        }
        Lasso { props: self.props.clone(), stem, cycle }
    }

    /// Word equality, independent of representation.
    pub fn same_word(&self, other: &Lasso) -> bool {
        if self.props != other.props {
            return false;
        }
        let n = self.stem.len().max(other.stem.len()) + 2 * lcm(self.cycle.len(), other.cycle.len());
        self.unfold(n) == other.unfold(n)
    }

    /// Keeps only the listed propositions (missing ones read as 0).
    pub fn restrict(&self, keep: &[String]) -> Lasso {
        let pick = |letter: &Vec<Rational>| -> Vec<Rational> {
            keep.iter()
                .map(|p| match self.props.iter().position(|q| q == p) {
                    Some(j) => letter[j].clone(),
                    None => zero(),
                })
                .collect()
        };
        Lasso {
            props: keep.to_vec(),
            stem: self.stem.iter().map(pick).collect(),
            cycle: self.cycle.iter().map(pick).collect(),
        }
    }

    pub fn rename(&self, f: impl Fn(&str) -> String) -> Lasso {
        Lasso { props: self.props.iter().map(|p| f(p)).collect(), stem: self.stem.clone(), cycle: self.cycle.clone() }
    }
}

fn fmt_letter(props: &[String], letter: &[Rational]) -> String {
    let parts: Vec<String> = props.iter().zip(letter).map(|(p, w)| format!("{p}={}", fmt_rational(w))).collect();
    format!("({})", parts.join(","))
}

impl fmt::Display for Lasso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stem: Vec<String> = self.stem.iter().map(|l| fmt_letter(&self.props, l)).collect();
        let cycle: Vec<String> = self.cycle.iter().map(|l| fmt_letter(&self.props, l)).collect();
        write!(f, "{} | {}", stem.join(" "), cycle.join(" "))
    }
}

/// Ordered binding of trace variables to lassos.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LassoAssignment {
    pub bindings: Vec<(String, Lasso)>,
}

impl LassoAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, var: &str, l: Lasso) {
        self.bindings.retain(|(v, _)| v != var);
        self.bindings.push((var.to_string(), l));
    }

    pub fn with(mut self, var: &str, l: Lasso) -> Self {
        self.bind(var, l);
        self
    }

    pub fn get(&self, var: &str) -> Option<&Lasso> {
        self.bindings.iter().find(|(v, _)| v == var).map(|(_, l)| l)
    }
}

/// Zips the bound lassos into one lasso over `p@i` (binding `i`, 1-based).
pub fn encode_assignment(a: &LassoAssignment) -> Lasso {
    let mut props = Vec::new();
    for (i, (_, l)) in a.bindings.iter().enumerate() {
        for p in &l.props {
            props.push(format!("{p}@{}", i + 1));
        }
    }
    let stem_len = a.bindings.iter().map(|(_, l)| l.stem.len()).max().unwrap_or(0);
    let cycle_len = a.bindings.iter().map(|(_, l)| l.cycle.len()).fold(1, lcm);
    let letter = |k: usize| -> Vec<Rational> { a.bindings.iter().flat_map(|(_, l)| l.letter(k).to_vec()).collect() };
    Lasso {
        props,
        stem: (0..stem_len).map(letter).collect(),
        cycle: (stem_len..stem_len + cycle_len).map(letter).collect(),
    }
}

/// All lassos of `k` with a stem of at most `max_stem` and a loop of at most
/// `max_loop` states, normalized and without duplicates.
pub fn lasso_enumerate(k: &WeightedKripke, max_stem: usize, max_loop: usize) -> Result<Vec<Lasso>, KripkeError> {
    if max_loop == 0 {
        return Err(KripkeError::LoopBound);
    }
    let mut out = BTreeSet::new();
    let mut path = Vec::new();
    for &s in &k.initial {
        path.push(s);
        extend_paths(k, &mut path, max_stem, max_loop, &mut out);
        path.pop();
    }
    Ok(out.into_iter().collect())
}

fn extend_paths(
    k: &WeightedKripke,
    path: &mut Vec<usize>,
    max_stem: usize,
    max_loop: usize,
    out: &mut BTreeSet<Lasso>,
) {
    let last = *path.last().unwrap();
    // close a loop back to any position within the loop bound
    for (start, &s) in path.iter().enumerate() {
        let loop_len = path.len() - start;
        if start <= max_stem && loop_len <= max_loop && k.succ[last].contains(&s) {
            let stem = path[..start].iter().map(|&q| k.letter(q)).collect();
            let cycle = path[start..].iter().map(|&q| k.letter(q)).collect();
            out.insert(Lasso::new(k.props.clone(), stem, cycle).normalize());
        }
    }
    if path.len() < max_stem + max_loop {
        for &t in &k.succ[last] {
            path.push(t);
            extend_paths(k, path, max_stem, max_loop, out);
            path.pop();
        }
    }
}

/// Parses lasso definitions of the form `name = (p=1,q=0) (p=0) | (p=1)`.
/// Propositions missing from a letter read as 0.
pub fn parse_lassos(text: &str) -> Result<Vec<(String, Lasso)>, KripkeError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| KripkeError::Syntax { line: line_no, msg: msg.into() };
        let (name, body) = line.split_once('=').ok_or_else(|| err("expected `name = stem | loop`"))?;
        let (stem, cycle) = body.split_once('|').ok_or_else(|| err("missing `|` before the loop"))?;
        let parse_letters = |s: &str| -> Result<Vec<BTreeMap<String, Rational>>, KripkeError> {
            let mut letters = Vec::new();
            let mut rest = s.trim();
            while !rest.is_empty() {
                if !rest.starts_with('(') {
                    return Err(err("expected `(` to start a letter"));
                }
                let close = rest.find(')').ok_or_else(|| err("unclosed letter"))?;
                let mut letter = BTreeMap::new();
                for item in rest[1..close].split(',').map(str::trim).filter(|x| !x.is_empty()) {
                    let (p, w) = item.split_once('=').ok_or_else(|| err("expected prop=weight"))?;
                    let w = parse_rational(w).map_err(|e| err(&e.to_string()))?;
                    if !in_unit(&w) {
                        return Err(KripkeError::WeightRange(fmt_rational(&w)));
                    }
                    letter.insert(p.trim().to_string(), w);
                }
                letters.push(letter);
                rest = rest[close + 1..].trim_start();
            }
            Ok(letters)
        };
        let stem = parse_letters(stem)?;
        let cycle = parse_letters(cycle)?;
        if cycle.is_empty() {
            return Err(err("loop must be nonempty"));
        }
        let props: Vec<String> =
            stem.iter().chain(&cycle).flat_map(|l| l.keys().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
        let dense = |l: &BTreeMap<String, Rational>| -> Vec<Rational> {
            props.iter().map(|p| l.get(p).cloned().unwrap_or_else(zero)).collect()
        };
        let lasso = Lasso::new(props.clone(), stem.iter().map(dense).collect(), cycle.iter().map(dense).collect());
        out.push((name.trim().to_string(), lasso));
    }
    Ok(out)
}
