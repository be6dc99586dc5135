//! Letter-level formulas and their value-annotation automata.
//!
//! A state of the automaton is a product state of `K^n` together with the
//! obligations the previous position put on the current one. Reading the
//! state's label, the automaton guesses the values of the `X` and `U` nodes,
//! which fixes the value of every node at this position.

use crate::automata::{reduce, Alphabet, AutomataError, Letter, Nba};
use crate::formula::FuncKind;
use crate::kripke::WeightedKripke;
use crate::rational::{one, zero, Rational};
use std::collections::{BTreeSet, HashMap, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Const(Rational),
    /// Proposition `prop` of the alphabet; `table[w]` is the node's value when
    /// the proposition carries weight index `w`.
    Leaf {
        prop: usize,
        table: Vec<Rational>,
    },
    Func(FuncKind, Vec<usize>),
    Next(usize),
    Until(usize, usize),
}

/// Hash-consed node store; children always precede their parents.
#[derive(Debug, Default, Clone)]
pub(crate) struct Ir {
    pub nodes: Vec<Node>,
    ids: HashMap<Node, usize>,
}

impl Ir {
    pub fn add(&mut self, n: Node) -> usize {
        if let Some(&i) = self.ids.get(&n) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(n.clone());
        self.ids.insert(n, i);
        i
    }

    fn as_const(&self, i: usize) -> Option<&Rational> {
        match &self.nodes[i] {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn konst(&mut self, c: Rational) -> usize {
        self.add(Node::Const(c))
    }

    pub fn boolean(&mut self, b: bool) -> usize {
        self.konst(if b { one() } else { zero() })
    }

    /// Function node with constant folding.
    pub fn func(&mut self, kind: FuncKind, args: Vec<usize>) -> usize {
        let consts: Option<Vec<Rational>> = args.iter().map(|&a| self.as_const(a).cloned()).collect();
        if let Some(cs) = consts {
            return self.konst(kind.apply(&cs));
        }
        match kind {
            FuncKind::Or | FuncKind::And => {
                let (unit, absorb) = if kind == FuncKind::Or { (zero(), one()) } else { (one(), zero()) };
                let mut keep = Vec::new();
                for a in args {
                    match self.as_const(a) {
                        Some(c) if *c == absorb => return self.konst(absorb),
                        Some(c) if *c == unit => {}
                        _ => {
                            if !keep.contains(&a) {
                                keep.push(a);
                            }
                        }
                    }
                }
                match keep.len() {
                    0 => self.konst(unit),
                    1 => keep[0],
                    _ => self.add(Node::Func(kind, keep)),
                }
            }
            FuncKind::Not => {
                if let Node::Func(FuncKind::Not, inner) = &self.nodes[args[0]] {
                    return inner[0];
                }
                self.add(Node::Func(kind, args))
            }
            _ => self.add(Node::Func(kind, args)),
        }
    }

    pub fn not(&mut self, a: usize) -> usize {
        self.func(FuncKind::Not, vec![a])
    }

    pub fn or(&mut self, a: usize, b: usize) -> usize {
        self.func(FuncKind::Or, vec![a, b])
    }

    pub fn and(&mut self, a: usize, b: usize) -> usize {
        self.func(FuncKind::And, vec![a, b])
    }

    pub fn next(&mut self, a: usize) -> usize {
        match self.as_const(a) {
            Some(_) => a,
            None => self.add(Node::Next(a)),
        }
    }

    pub fn until(&mut self, a: usize, b: usize) -> usize {
        // a constant right operand is attained at position 0
        if self.as_const(b).is_some() {
            return b;
        }
        self.add(Node::Until(a, b))
    }

    /// Copy containing only the nodes below `root`; returns the new root.
    pub fn restrict(&self, root: usize) -> (Ir, usize) {
        let mut live = vec![false; self.nodes.len()];
        live[root] = true;
        for i in (0..=root).rev() {
            if !live[i] {
                continue;
            }
            let kids: Vec<usize> = match &self.nodes[i] {
                Node::Func(_, args) => args.clone(),
                Node::Next(c) => vec![*c],
                Node::Until(a, b) => vec![*a, *b],
                _ => vec![],
            };
            for k in kids {
                live[k] = true;
            }
        }
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut out = Ir::default();
        for i in 0..=root {
            if live[i] {
                let n = match &self.nodes[i] {
                    Node::Func(k, args) => Node::Func(k.clone(), args.iter().map(|&a| map[a]).collect()),
                    Node::Next(c) => Node::Next(map[*c]),
                    Node::Until(a, b) => Node::Until(map[*a], map[*b]),
                    n => n.clone(),
                };
                map[i] = out.add(n);
            }
        }
        (out, map[root])
    }

    fn domains(&self, weights: &[Rational]) -> Vec<Vec<Rational>> {
        let mut out: Vec<Vec<Rational>> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let set: BTreeSet<Rational> = match n {
                Node::Const(c) => [c.clone()].into(),
                Node::Leaf { table, .. } => table.iter().take(weights.len()).cloned().collect(),
                Node::Next(c) => out[*c].iter().cloned().collect(),
                Node::Until(a, b) => out[*a].iter().chain(&out[*b]).cloned().collect(),
                Node::Func(kind, args) => {
                    let sets: Vec<&Vec<Rational>> = args.iter().map(|&a| &out[a]).collect();
                    func_image(kind, &sets)
                }
            };
            out.push(set.into_iter().collect());
        }
        out
    }
}

fn func_image(kind: &FuncKind, sets: &[&Vec<Rational>]) -> BTreeSet<Rational> {
    match kind {
        FuncKind::Or | FuncKind::And => sets.iter().flat_map(|s| s.iter().cloned()).collect(),
        FuncKind::Oplus(cs) => {
            let mut acc: BTreeSet<Rational> = [zero()].into();
            for (c, s) in cs.iter().zip(sets) {
                acc = acc.iter().flat_map(|a| s.iter().map(move |x| a + c * x)).collect();
            }
            acc
        }
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

/// Constraint on a value index, inherited from the previous position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Con {
    Any,
    Eq(u16),
    Ge(u16),
    Le(u16),
    /// bit `x` set when value index `x` is allowed
    Set(u64),
}

impl Con {
    fn allows(self, x: u16) -> bool {
        match self {
            Con::Any => true,
            Con::Set(m) => x < 64 && (m >> x) & 1 == 1,
            Con::Eq(y) => x == y,
            Con::Ge(y) => x >= y,
            Con::Le(y) => x <= y,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    state: usize,
    cons: Vec<Con>,
    counter: u16,
    initial: bool,
}

struct Builder<'a> {
    ir: &'a Ir,
    root: usize,
    dom: Vec<Vec<Rational>>,
    /// temporal slot of each `X`/`U` node
    slot: Vec<Option<usize>>,
    /// for a node that is the operand of an `X` node, that node's slot
    xchild: Vec<Option<usize>>,
    untils: Vec<usize>,
    nslots: usize,
    accept: &'a dyn Fn(&Rational) -> bool,
}

impl Builder<'_> {
    fn index(&self, node: usize, v: &Rational) -> u16 {
        self.dom[node].binary_search(v).expect("value within node domain") as u16
    }

    /// All consistent annotations at a position with the given letter.
    fn annotations(&self, letter: &[u8], cons: &[Con], initial: bool) -> Vec<Vec<u16>> {
        let mut out = Vec::new();
        let mut vals = Vec::with_capacity(self.ir.nodes.len());
        self.extend(letter, cons, initial, &mut vals, &mut out);
        out
    }

    fn extend(&self, letter: &[u8], cons: &[Con], initial: bool, vals: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        let i = vals.len();
        if i == self.ir.nodes.len() {
            if !initial || (self.accept)(&self.dom[self.root][vals[self.root] as usize]) {
                out.push(vals.clone());
            }
            return;
        }
        let val = |j: usize, vals: &Vec<u16>| self.dom[j][vals[j] as usize].clone();
        let candidates: Vec<u16> = match &self.ir.nodes[i] {
            Node::Const(c) => vec![self.index(i, c)],
            Node::Leaf { prop, table } => vec![self.index(i, &table[letter[*prop] as usize])],
            Node::Func(kind, args) => {
                let xs: Vec<Rational> = args.iter().map(|&a| val(a, vals)).collect();
                vec![self.index(i, &kind.apply(&xs))]
            }
            Node::Next(c) => (0..self.dom[*c].len() as u16).collect(),
            Node::Until(a, b) => {
                let (va, vb) = (val(*a, vals), val(*b, vals));
                let con = cons[self.slot[i].unwrap()];
                (0..self.dom[i].len() as u16)
                    .filter(|&x| con.allows(x))
                    .filter(|&x| {
                        let u = &self.dom[i][x as usize];
                        *u >= vb && (*u == vb || va >= *u)
                    })
                    .collect()
            }
        };
        for x in candidates {
            if let Some(s) = self.xchild[i] {
                if !cons[s].allows(x) {
                    continue;
                }
            }
            vals.push(x);
            self.extend(letter, cons, initial, vals, out);
            vals.pop();
        }
    }

    fn successor_cons(&self, vals: &[u16]) -> Vec<Con> {
        let mut cons = vec![Con::Any; self.nslots];
        for (i, n) in self.ir.nodes.iter().enumerate() {
            match n {
                Node::Next(_) => cons[self.slot[i].unwrap()] = Con::Eq(vals[i]),
                Node::Until(a, b) => {
                    let u = &self.dom[i][vals[i] as usize];
                    let va = &self.dom[*a][vals[*a] as usize];
                    let vb = &self.dom[*b][vals[*b] as usize];
                    let c = if u > vb {
                        if va > u {
                            Con::Eq(vals[i])
                        } else {
                            Con::Ge(vals[i])
                        }
                    } else if va <= vb {
                        Con::Any
                    } else {
                        Con::Le(vals[i])
                    };
                    cons[self.slot[i].unwrap()] = c;
                }
                _ => {}
            }
        }
        cons
    }

    fn fulfilled(&self, vals: &[u16], j: usize) -> bool {
        let u = self.untils[j];
        let Node::Until(_, b) = self.ir.nodes[u] else { unreachable!() };
        self.dom[u][vals[u] as usize] == self.dom[b][vals[b] as usize]
    }
}

/// Automaton over the alphabet of `kn` accepting the paths of `kn` whose
/// root value satisfies `accept`.
pub(crate) fn tableau(
    ir: &Ir,
    root: usize,
    kn: &WeightedKripke,
    accept: &dyn Fn(&Rational) -> bool,
    cap: usize,
) -> Result<Nba, AutomataError> {
    let (ir, root) = ir.restrict(root);
    let ir = &ir;
    let (on_zero, on_one) = (accept(&zero()), accept(&one()));
    if on_zero != on_one && super::ltl::is_boolean(ir) {
        return super::ltl::boolean_tableau(ir, root, kn, on_one, cap);
    }
    let alphabet = Alphabet::new(kn.props.clone(), kn.weights.clone());
    let dom = ir.domains(&alphabet.weights);
    let mut slot = vec![None; ir.nodes.len()];
    let mut xchild = vec![None; ir.nodes.len()];
    let mut untils = Vec::new();
    let mut next_slot = 0;
    for (i, n) in ir.nodes.iter().enumerate() {
        match n {
            Node::Next(c) => {
                slot[i] = Some(next_slot);
                xchild[*c] = Some(next_slot);
                next_slot += 1;
            }
            Node::Until(..) => {
                slot[i] = Some(next_slot);
                untils.push(i);
                next_slot += 1;
            }
            _ => {}
        }
    }
    let b = Builder { ir, root, dom, slot, xchild, untils, nslots: next_slot, accept };
    let m = b.untils.len() as u16;
    let letters: Vec<Letter> =
        (0..kn.num_states()).map(|s| alphabet.encode(&kn.labels[s]).expect("labels use declared weights")).collect();

    let mut out = Nba::empty(alphabet);
    let mut ids: HashMap<Key, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in &kn.initial {
        let key = Key { state: s, cons: vec![Con::Any; next_slot], counter: 0, initial: true };
        let id = out.add_state(m == 0);
        ids.insert(key.clone(), id);
        out.initial.push(id);
        queue.push_back(key);
    }
    // (slot, size of the operand's domain) of every X node
    let xslots: Vec<(usize, usize)> = ir
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match n {
            Node::Next(c) => Some((b.slot[i].unwrap(), b.dom[*c].len())),
            _ => None,
        })
        .collect();
    while let Some(key) = queue.pop_front() {
        let id = ids[&key];
        let letter = &letters[key.state];
        let mut edges = Vec::new();
        // annotations that differ only in their X guesses lead to the same
        // successors up to the X obligations, which are merged into sets
        let mut groups: HashMap<(Vec<Con>, u16), Vec<Vec<Con>>> = HashMap::new();
        for vals in b.annotations(letter, &key.cons, key.initial) {
            let mut cons = b.successor_cons(&vals);
            let mut c = if key.counter == m { 0 } else { key.counter };
            while c < m && b.fulfilled(&vals, c as usize) {
                c += 1;
            }
            let xs: Vec<Con> = xslots
                .iter()
                .map(|&(s, size)| match cons[s] {
                    Con::Eq(v) if size <= 64 => Con::Set(1 << v),
                    other => other,
                })
                .collect();
            for &(s, _) in &xslots {
                cons[s] = Con::Any;
            }
            groups.entry((cons, c)).or_default().push(xs);
        }
        let mut groups: Vec<_> = groups.into_iter().collect();
        groups.sort_by(|a, b| format!("{:?}", a.0).cmp(&format!("{:?}", b.0)));
        for ((base, c), xss) in groups {
            for cube in merge_cubes(xss, &xslots) {
                let mut cons = base.clone();
                for (&(s, _), con) in xslots.iter().zip(cube) {
                    cons[s] = con;
                }
                for &t in &kn.succ[key.state] {
                    let nk = Key { state: t, cons: cons.clone(), counter: c, initial: false };
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
        }
        edges.sort();
        edges.dedup();
        out.trans[id] = edges;
    }
    Ok(reduce(&out))
}

/// Unions cubes that agree everywhere but in one coordinate; a full set
/// becomes `Any`.
fn merge_cubes(mut cubes: Vec<Vec<Con>>, slots: &[(usize, usize)]) -> Vec<Vec<Con>> {
    cubes.sort_by_key(|c| format!("{c:?}"));
    cubes.dedup();
    let full = |size: usize| if size >= 64 { u64::MAX } else { (1u64 << size) - 1 };
    for (j, &(_, size)) in slots.iter().enumerate() {
        if size > 64 {
            continue;
        }
        let mut merged: Vec<(Vec<Con>, u64)> = Vec::new();
        let mut index: HashMap<Vec<Con>, usize> = HashMap::new();
        let mut rest = Vec::new();
        for c in cubes {
            let mask = match c[j] {
                Con::Set(m) => m,
                Con::Any => full(size),
                _ => {
                    rest.push(c);
                    continue;
                }
            };
            let mut other = c.clone();
            other[j] = Con::Any;
            match index.get(&other) {
                Some(&i) => merged[i].1 |= mask,
                None => {
                    index.insert(other.clone(), merged.len());
                    merged.push((other, mask));
                }
            }
        }
        cubes = rest;
        for (mut c, mask) in merged {
            c[j] = if mask == full(size) { Con::Any } else { Con::Set(mask) };
            cubes.push(c);
        }
    }
    cubes
}
