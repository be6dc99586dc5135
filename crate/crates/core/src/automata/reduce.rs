use super::{nontrivial, sccs, Letter, Nba};
use std::collections::{HashMap, HashSet, VecDeque};

const SIMULATION_LIMIT: usize = 600;

/// Keeps the states that are reachable and can reach an accepting cycle.
pub fn trim(a: &Nba) -> Nba {
    let g: Vec<Vec<usize>> = a.trans.iter().map(|ts| ts.iter().map(|(_, t)| *t).collect()).collect();
    let (comp, ncomp) = sccs(&g, &a.initial);
    let mut members = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        if c != usize::MAX {
            members[c].push(v);
        }
    }
    let n = a.num_states();
    let mut keep = vec![false; n];
    let mut rev = vec![Vec::new(); n];
    for (v, ws) in g.iter().enumerate() {
        for &w in ws {
            rev[w].push(v);
        }
    }
    let mut queue = VecDeque::new();
    for m in members.iter().take(ncomp) {
        if m.iter().any(|&v| a.accepting[v]) && nontrivial(&g, &comp, m) {
            for &v in m {
                keep[v] = true;
                queue.push_back(v);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &rev[v] {
            if !keep[u] && comp[u] != usize::MAX {
                keep[u] = true;
                queue.push_back(u);
            }
        }
    }
    let map: Vec<Option<usize>> = {
        let mut next = 0;
        keep.iter()
            .map(|&k| {
                if k {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let mut out = Nba::empty(a.alphabet.clone());
    for q in 0..n {
        if keep[q] {
            out.add_state(a.accepting[q]);
        }
    }
    for q in 0..n {
        if let Some(nq) = map[q] {
            out.trans[nq] = a.trans[q].iter().filter_map(|(l, t)| map[*t].map(|nt| (l.clone(), nt))).collect();
        }
    }
    out.initial = a.initial.iter().filter_map(|&q| map[q]).collect();
    out.initial.sort_unstable();
    out.initial.dedup();
    out
}

/// `sim[q][p]`: p directly simulates q.
fn direct_simulation(a: &Nba) -> Vec<Vec<bool>> {
    let n = a.num_states();
    let by_letter: Vec<HashMap<&Letter, Vec<usize>>> = a
        .trans
        .iter()
        .map(|ts| {
            let mut m: HashMap<&Letter, Vec<usize>> = HashMap::new();
            for (l, t) in ts {
                m.entry(l).or_default().push(*t);
            }
            m
        })
        .collect();
    let mut sim = vec![vec![false; n]; n];
    for q in 0..n {
        for p in 0..n {
            sim[q][p] =
                (!a.accepting[q] || a.accepting[p]) && by_letter[q].keys().all(|l| by_letter[p].contains_key(l));
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..n {
            for p in 0..n {
                if !sim[q][p] || q == p {
                    continue;
                }
                let ok = by_letter[q].iter().all(|(l, qs)| {
                    let ps = &by_letter[p][l];
                    qs.iter().all(|&q2| ps.iter().any(|&p2| sim[q2][p2]))
                });
                if !ok {
                    sim[q][p] = false;
                    changed = true;
                }
            }
        }
    }
    sim
}

/// Trims, merges simulation-equivalent states and drops transitions to
/// simulated siblings.
pub fn reduce(a: &Nba) -> Nba {
    let t = trim(a);
    let n = t.num_states();
    if n == 0 || n > SIMULATION_LIMIT {
        return t;
    }
    let sim = direct_simulation(&t);
    let mut class = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for q in 0..n {
        if class[q] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(q);
        for p in q..n {
            if class[p] == usize::MAX && sim[q][p] && sim[p][q] {
                class[p] = id;
            }
        }
    }
    let mut out = Nba::empty(t.alphabet.clone());
    for &r in &reps {
        out.add_state(t.accepting[r]);
    }
    for (c, &r) in reps.iter().enumerate() {
        let mut edges: Vec<(Letter, usize)> = Vec::new();
        let mut seen = HashSet::new();
        for (l, q) in &t.trans[r] {
            let target = class[*q];
            if seen.insert((l.clone(), target)) {
                edges.push((l.clone(), target));
            }
        }
        // drop (l, x) when (l, y) exists with y strictly simulating x
        let rep_sim = |x: usize, y: usize| sim[reps[x]][reps[y]];
        let pruned: Vec<(Letter, usize)> = edges
            .iter()
            .filter(|(l, x)| !edges.iter().any(|(l2, y)| l2 == l && y != x && rep_sim(*x, *y) && !rep_sim(*y, *x)))
            .cloned()
            .collect();
        out.trans[c] = pruned;
    }
    let mut init: Vec<usize> = t.initial.iter().map(|&q| class[q]).collect();
    init.sort_unstable();
    init.dedup();
    let pruned_init: Vec<usize> = init
        .iter()
        .copied()
        .filter(|&x| !init.iter().any(|&y| y != x && sim[reps[x]][reps[y]] && !sim[reps[y]][reps[x]]))
        .collect();
    out.initial = pruned_init;
    trim(&out)
}
