//! Büchi complementation. Special cases (single letter, deterministic,
//! safety, weak) avoid the general rank-based construction.

use super::{default_state_cap, nontrivial, reduce, restrict_letters, sccs, AutomataError, Letter, Nba};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

/// Complement over the full alphabet with the default state cap.
pub fn complement(a: &Nba) -> Result<Nba, AutomataError> {
    complement_with_cap(a, default_state_cap())
}

pub fn complement_with_cap(a: &Nba, cap: usize) -> Result<Nba, AutomataError> {
    let letters = a.alphabet.letters();
    complement_over(a, &letters, cap)
}

/// Automaton for `letters^ω \ L(a)`.
pub fn complement_over(a: &Nba, letters: &[Letter], cap: usize) -> Result<Nba, AutomataError> {
    let r = reduce(&restrict_letters(a, letters));
    if r.initial.is_empty() {
        return Ok(Nba::universal_over(a.alphabet.clone(), letters));
    }
    if letters.len() == 1 {
        // the only word is accepted
        return Ok(Nba::empty(a.alphabet.clone()));
    }
    if r.is_deterministic() {
        return Ok(dba(&r, letters));
    }
    if r.accepting.iter().all(|&x| x) {
        return explore(&r, letters, cap, "safety complement", Subset::initial(&r), Subset::step);
    }
    if is_weak(&r) {
        return explore(&r, letters, cap, "breakpoint complement", Breakpoint::initial(&r), Breakpoint::step);
    }
    explore(&r, letters, cap, "rank-based complement", Ranked::initial(&r), Ranked::step)
}

fn successors(a: &Nba) -> Vec<HashMap<Letter, Vec<usize>>> {
    a.trans
        .iter()
        .map(|ts| {
            let mut m: HashMap<Letter, Vec<usize>> = HashMap::new();
            for (l, t) in ts {
                m.entry(l.clone()).or_default().push(*t);
            }
            m
        })
        .collect()
}

fn post(succ: &[HashMap<Letter, Vec<usize>>], set: &BTreeSet<usize>, l: &Letter) -> BTreeSet<usize> {
    set.iter().filter_map(|&q| succ[q].get(l)).flatten().copied().collect()
}

fn is_weak(a: &Nba) -> bool {
    let g: Vec<Vec<usize>> = a.trans.iter().map(|ts| ts.iter().map(|(_, t)| *t).collect()).collect();
    let all: Vec<usize> = (0..a.num_states()).collect();
    let (comp, ncomp) = sccs(&g, &all);
    let mut members = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    members
        .iter()
        .all(|m| !nontrivial(&g, &comp, m) || m.iter().all(|&v| a.accepting[v]) || m.iter().all(|&v| !a.accepting[v]))
}

fn dba(a: &Nba, letters: &[Letter]) -> Nba {
    let succ = successors(a);
    let n = a.num_states();
    let sink = n;
    let next = |q: usize, l: &Letter| -> usize {
        if q == sink {
            sink
        } else {
            succ[q].get(l).map(|v| v[0]).unwrap_or(sink)
        }
    };
    let rejecting = |q: usize| q == sink || !a.accepting[q];
    // copy 0 at [0, n], copy 1 at [n+1, 2n+1]; copy 1 stays among rejecting states
    let mut out = Nba::empty(a.alphabet.clone());
    for _ in 0..=n {
        out.add_state(false);
    }
    for q in 0..=n {
        out.add_state(rejecting(q));
    }
    for q in 0..=n {
        for l in letters {
            let t = next(q, l);
            out.trans[q].push((l.clone(), t));
            if rejecting(t) {
                out.trans[q].push((l.clone(), n + 1 + t));
                if rejecting(q) {
                    out.trans[n + 1 + q].push((l.clone(), n + 1 + t));
                }
            }
        }
    }
    out.initial = vec![a.initial[0]];
    super::trim(&out)
}

fn explore<S: Clone + Eq + Hash>(
    a: &Nba,
    letters: &[Letter],
    cap: usize,
    stage: &str,
    init: (S, bool),
    step: fn(&Ctx, &S, &Letter) -> Vec<(S, bool)>,
) -> Result<Nba, AutomataError> {
    let ctx = Ctx { a, succ: successors(a), max_rank: 2 * a.accepting.iter().filter(|&&x| !x).count() };
    let mut out = Nba::empty(a.alphabet.clone());
    let mut ids: HashMap<S, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let id0 = out.add_state(init.1);
    ids.insert(init.0.clone(), id0);
    out.initial.push(id0);
    queue.push_back(init.0);
    while let Some(s) = queue.pop_front() {
        let id = ids[&s];
        let mut edges = Vec::new();
        for l in letters {
            for (t, acc) in step(&ctx, &s, l) {
                let tid = match ids.get(&t) {
                    Some(&x) => x,
                    None => {
                        if out.num_states() >= cap {
                            return Err(AutomataError::StateCap { cap, stage: stage.to_string() });
                        }
                        let x = out.add_state(acc);
                        ids.insert(t.clone(), x);
                        queue.push_back(t);
                        x
                    }
                };
                edges.push((l.clone(), tid));
            }
        }
        out.trans[id] = edges;
    }
    Ok(super::trim(&out))
}

struct Ctx<'a> {
    a: &'a Nba,
    succ: Vec<HashMap<Letter, Vec<usize>>>,
    max_rank: usize,
}

/// Subset construction; a word is rejected once no run survives.
struct Subset;

impl Subset {
    fn initial(a: &Nba) -> (BTreeSet<usize>, bool) {
        (a.initial.iter().copied().collect(), false)
    }

    fn step(c: &Ctx, s: &BTreeSet<usize>, l: &Letter) -> Vec<(BTreeSet<usize>, bool)> {
        let t = post(&c.succ, s, l);
        let acc = t.is_empty();
        vec![(t, acc)]
    }
}

/// Breakpoint construction for weak automata: `o` holds the runs that have
/// not left the accepting states since the last breakpoint.
struct Breakpoint;

impl Breakpoint {
    fn initial(a: &Nba) -> ((BTreeSet<usize>, BTreeSet<usize>), bool) {
        let s: BTreeSet<usize> = a.initial.iter().copied().collect();
        let o: BTreeSet<usize> = s.iter().copied().filter(|&q| a.accepting[q]).collect();
        let acc = o.is_empty();
        ((s, o), acc)
    }

    fn step(
        c: &Ctx,
        (s, o): &(BTreeSet<usize>, BTreeSet<usize>),
        l: &Letter,
    ) -> Vec<((BTreeSet<usize>, BTreeSet<usize>), bool)> {
        let s2 = post(&c.succ, s, l);
        let base = if o.is_empty() { s2.clone() } else { post(&c.succ, o, l) };
        let o2: BTreeSet<usize> = base.into_iter().filter(|&q| c.a.accepting[q]).collect();
        let acc = o2.is_empty();
        vec![((s2, o2), acc)]
    }
}

/// Rank-based construction restricted to tight level rankings: a subset
/// phase guesses the point from which an odd ranking is tight.
#[derive(Clone, PartialEq, Eq, Hash)]
enum Ranked {
    Guess(BTreeSet<usize>),
    Rank { f: Vec<(usize, u16)>, o: BTreeSet<usize> },
}

impl Ranked {
    fn initial(a: &Nba) -> (Ranked, bool) {
        (Ranked::Guess(a.initial.iter().copied().collect()), false)
    }

    fn step(c: &Ctx, s: &Ranked, l: &Letter) -> Vec<(Ranked, bool)> {
        match s {
            Ranked::Guess(set) => {
                let t = post(&c.succ, set, l);
                let mut out = vec![(Ranked::Guess(t.clone()), false)];
                let bounds: Vec<(usize, u16)> = t.iter().map(|&q| (q, c.max_rank as u16)).collect();
                for f in tight_rankings(c, &bounds) {
                    let o: BTreeSet<usize> = f.iter().filter(|(_, r)| r % 2 == 0).map(|(q, _)| *q).collect();
                    let acc = o.is_empty();
                    out.push((Ranked::Rank { f, o }, acc));
                }
                out
            }
            Ranked::Rank { f, o } => {
                let mut bound: HashMap<usize, u16> = HashMap::new();
                for (q, r) in f {
                    if let Some(ts) = c.succ[*q].get(l) {
                        for &t in ts {
                            let e = bound.entry(t).or_insert(*r);
                            *e = (*e).min(*r);
                        }
                    }
                }
                let mut bounds: Vec<(usize, u16)> = bound.into_iter().collect();
                bounds.sort_unstable();
                let o_post: BTreeSet<usize> = if o.is_empty() { BTreeSet::new() } else { post(&c.succ, o, l) };
                tight_rankings(c, &bounds)
                    .into_iter()
                    .map(|f2| {
                        let o2: BTreeSet<usize> = if o.is_empty() {
                            f2.iter().filter(|(_, r)| r % 2 == 0).map(|(q, _)| *q).collect()
                        } else {
                            f2.iter().filter(|(q, r)| r % 2 == 0 && o_post.contains(q)).map(|(q, _)| *q).collect()
                        };
                        let acc = o2.is_empty();
                        (Ranked::Rank { f: f2, o: o2 }, acc)
                    })
                    .collect()
            }
        }
    }
}

/// Level rankings below the given bounds whose accepting states carry even
/// ranks and whose odd ranks are exactly 1, 3, ..., max (max odd).
fn tight_rankings(c: &Ctx, bounds: &[(usize, u16)]) -> Vec<Vec<(usize, u16)>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(bounds.len());
    fn rec(c: &Ctx, bounds: &[(usize, u16)], i: usize, cur: &mut Vec<(usize, u16)>, out: &mut Vec<Vec<(usize, u16)>>) {
        if i == bounds.len() {
            if cur.is_empty() {
                // all runs have died
                out.push(Vec::new());
                return;
            }
            let max = cur.iter().map(|(_, r)| *r).max().unwrap_or(0);
            if max % 2 == 1 {
                let odd: BTreeSet<u16> = cur.iter().map(|(_, r)| *r).filter(|r| r % 2 == 1).collect();
                if odd.len() == (max as usize).div_ceil(2) {
                    out.push(cur.clone());
                }
            }
            return;
        }
        let (q, b) = bounds[i];
        // a tight ranking over m states never exceeds 2m - 1
        let limit = b.min((2 * bounds.len()).saturating_sub(1) as u16);
        for r in 0..=limit {
            if c.a.accepting[q] && r % 2 == 1 {
                continue;
            }
            cur.push((q, r));
            rec(c, bounds, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(c, bounds, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::tests::{bool_alphabet, random_lasso, random_nba};
    use crate::automata::{intersect, Alphabet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn universal_and_empty() {
        let al = bool_alphabet(&["p"]);
        assert!(complement(&Nba::universal(al.clone())).unwrap().is_empty());
        let c = complement(&Nba::empty(al.clone())).unwrap();
        let w = random_lasso(&mut ChaCha8Rng::seed_from_u64(1), &al, 2, 2);
        assert!(c.accepts(&w));
    }

    #[test]
    fn infinitely_many_p() {
        // GF p is not weak and not deterministic after reduction in general
        let al = bool_alphabet(&["p"]);
        let mut a = Nba::empty(al.clone());
        a.add_state(false);
        a.add_state(true);
        a.initial.push(0);
        for q in 0..2 {
            a.trans[q].push((vec![0], 0));
            a.trans[q].push((vec![1], 1));
        }
        let c = complement(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let w = random_lasso(&mut rng, &al, 3, 3);
            assert_ne!(a.accepts(&w), c.accepts(&w), "{w}");
        }
        assert!(intersect(&a, &c).unwrap().is_empty());
    }

    #[test]
    fn random_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let al = Alphabet::new(vec!["p".into(), "q".into()], bool_alphabet(&[]).weights);
        for i in 0..30 {
            let a = random_nba(&mut rng, 3 + i % 2, &al, 0.2);
            let c = complement(&a).unwrap();
            for _ in 0..100 {
                let w = random_lasso(&mut rng, &al, 3, 3);
                assert_ne!(a.accepts(&w), c.accepts(&w));
            }
        }
    }

    #[test]
    fn each_construction_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let al = bool_alphabet(&["p"]);
        let letters = al.letters();
        for i in 0..60 {
            let mut a = random_nba(&mut rng, 2 + i % 3, &al, 0.35);
            if i % 3 == 0 {
                a.accepting.iter_mut().for_each(|x| *x = true);
            }
            let r = reduce(&a);
            if r.initial.is_empty() {
                continue;
            }
            let mut cs = vec![explore(&r, &letters, 100_000, "t", Ranked::initial(&r), Ranked::step).unwrap()];
            if is_weak(&r) {
                cs.push(explore(&r, &letters, 100_000, "t", Breakpoint::initial(&r), Breakpoint::step).unwrap());
            }
            if r.accepting.iter().all(|&x| x) {
                cs.push(explore(&r, &letters, 100_000, "t", Subset::initial(&r), Subset::step).unwrap());
            }
            if r.is_deterministic() {
                cs.push(dba(&r, &letters));
            }
            for _ in 0..80 {
                let w = random_lasso(&mut rng, &al, 3, 4);
                for c in &cs {
                    assert_ne!(a.accepts(&w), c.accepts(&w), "{w}");
                }
            }
        }
    }

    #[test]
    fn cap_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let al = bool_alphabet(&["p", "q"]);
        let mut hit = false;
        for _ in 0..20 {
            let a = random_nba(&mut rng, 4, &al, 0.3);
            if let Err(AutomataError::StateCap { cap, .. }) = complement_with_cap(&a, 3) {
                assert_eq!(cap, 3);
                hit = true;
            }
        }
        assert!(hit);
    }
}
