//! Seeded generators shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use hyperqual::automata::{Alphabet, Nba};
use hyperqual::formula::{
    and, atom, d_eventually, d_globally, d_until, eventually, exists, forall, globally, next, not, oplus, or, release,
    until, Discount, Formula, FuncKind, Quant,
};
use hyperqual::kripke::{parse_kripke, Lasso, LassoAssignment, WeightedKripke};
use hyperqual::rational::{fmt_rational, int, ratio, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

pub const PROPS: [&str; 2] = ["p", "q"];

pub fn complete_bool() -> WeightedKripke {
    parse_kripke("weights: 0, 1\nstates: a, b\ninit: a, b\ntrans:\n a -> a, b\n b -> a, b\nlabels:\n a p=0\n b p=1\n")
        .unwrap()
}

/// One state per valuation of `props` over {0,1}, all connected.
pub fn all_valuations(props: &[&str]) -> WeightedKripke {
    let n = 1usize << props.len();
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut text = format!("weights: 0, 1\nstates: {}\ninit: {}\ntrans:\n", names.join(", "), names.join(", "));
    for s in &names {
        text += &format!(" {s} -> {}\n", names.join(", "));
    }
    text += "labels:\n";
    for (i, s) in names.iter().enumerate() {
        let on: Vec<String> =
            props.iter().enumerate().filter(|(j, _)| i >> j & 1 == 1).map(|(_, p)| format!("{p}=1")).collect();
        if !on.is_empty() {
            text += &format!(" {s} {}\n", on.join(", "));
        }
    }
    parse_kripke(&text).unwrap()
}

/// Random total structure over `props` with labels drawn from `weights`.
pub fn random_kripke(rng: &mut impl Rng, states: usize, weights: &[Rational], props: &[&str]) -> WeightedKripke {
    let names: Vec<String> = (0..states).map(|i| format!("s{i}")).collect();
    let ws: Vec<String> = weights.iter().map(fmt_rational).collect();
    let mut init: Vec<&String> = names.iter().filter(|_| rng.gen_bool(0.5)).collect();
    if init.is_empty() {
        init.push(&names[0]);
    }
    let init: Vec<&str> = init.iter().map(|s| s.as_str()).collect();
    let mut text =
        format!("weights: {}\nstates: {}\ninit: {}\ntrans:\n", ws.join(", "), names.join(", "), init.join(", "));
    for s in &names {
        let mut succ: Vec<&str> = names.iter().filter(|_| rng.gen_bool(0.5)).map(String::as_str).collect();
        if succ.is_empty() {
            succ.push(names.choose(rng).unwrap());
        }
        text += &format!(" {s} -> {}\n", succ.join(", "));
    }
    text += "labels:\n";
    for s in &names {
        let labels: Vec<String> = props.iter().map(|p| format!("{p}={}", ws.choose(rng).unwrap())).collect();
        text += &format!(" {s} {}\n", labels.join(", "));
    }
    parse_kripke(&text).unwrap()
}

fn random_weight(rng: &mut impl Rng) -> Rational {
    let d = rng.gen_range(2..=4);
    ratio(rng.gen_range(1..d), d)
}

/// Quantifier-free propositional-quality formula with at most `atoms`
/// atom occurrences (and at least one).
pub fn random_qf(rng: &mut impl Rng, vars: &[&str], atoms: usize) -> Formula {
    let leaf =
        |rng: &mut dyn rand::RngCore| atom(PROPS[rng.gen_range(0..PROPS.len())], vars[rng.gen_range(0..vars.len())]);
    if atoms <= 1 {
        return match rng.gen_range(0..5) {
            0 => not(leaf(rng)),
            1 => next(leaf(rng)),
            2 => Formula::Func(FuncKind::Scale(random_weight(rng)), vec![leaf(rng)]),
            _ => leaf(rng),
        };
    }
    if rng.gen_bool(0.2) {
        let sub = random_qf(rng, vars, atoms);
        return match rng.gen_range(0..3) {
            0 => not(sub),
            1 => next(sub),
            _ => Formula::Func(FuncKind::ThresholdGt(ratio(rng.gen_range(0..3), 3)), vec![sub]),
        };
    }
    let left = rng.gen_range(1..atoms);
    let right = rng.gen_range(1..=atoms - left);
    let a = random_qf(rng, vars, left);
    let b = random_qf(rng, vars, right);
    match rng.gen_range(0..8) {
        0 => or(a, b),
        1 => and(a, b),
        2 | 3 => {
            let c = random_weight(rng);
            oplus(vec![c.clone(), int(1) - c], vec![a, b])
        }
        4 => Formula::Func(FuncKind::Agree, vec![a, b]),
        5 => until(a, b),
        6 => release(a, b),
        _ => Formula::Func(FuncKind::Implies, vec![a, b]),
    }
}

pub const VARS: [&str; 2] = ["x", "y"];

pub fn random_prefix(rng: &mut impl Rng, depth: usize) -> Vec<(Quant, String)> {
    (0..depth).map(|i| (if rng.gen_bool(0.5) { Quant::Exists } else { Quant::Forall }, VARS[i].to_string())).collect()
}

/// Closed prenex propositional-quality formula with 1..=`max_depth`
/// quantifiers and at most `atoms` atom occurrences.
pub fn random_closed(rng: &mut impl Rng, max_depth: usize, atoms: usize) -> Formula {
    let depth = rng.gen_range(1..=max_depth);
    let prefix = random_prefix(rng, depth);
    let vars: Vec<&str> = prefix.iter().map(|(_, v)| v.as_str()).collect();
    let n = rng.gen_range(1..=atoms);
    Formula::with_prefix(&prefix, random_qf(rng, &vars, n))
}

pub fn quantifier_counts(f: &Formula) -> (usize, usize) {
    let mut n = (0, 0);
    f.visit(&mut |g| match g {
        Formula::Exists(..) => n.0 += 1,
        Formula::Forall(..) => n.1 += 1,
        _ => {}
    });
    n
}

pub fn exists_all(vars: &[&str], body: Formula) -> Formula {
    vars.iter().rev().fold(body, |b, v| exists(v, b))
}

pub fn forall_all(vars: &[&str], body: Formula) -> Formula {
    vars.iter().rev().fold(body, |b, v| forall(v, b))
}

pub fn bool_alphabet(props: &[&str]) -> Alphabet {
    Alphabet::new(props.iter().map(|s| s.to_string()).collect(), vec![int(0), int(1)])
}

pub fn random_nba(rng: &mut impl Rng, states: usize, alphabet: &Alphabet, density: f64) -> Nba {
    let letters = alphabet.letters();
    let mut a = Nba::empty(alphabet.clone());
    for _ in 0..states {
        a.add_state(rng.gen_bool(0.4));
    }
    a.initial.push(0);
    if states > 1 && rng.gen_bool(0.3) {
        a.initial.push(1);
    }
    for q in 0..states {
        for l in &letters {
            for t in 0..states {
                if rng.gen_bool(density) {
                    a.trans[q].push((l.clone(), t));
                }
            }
        }
    }
    a
}

pub fn random_lasso(rng: &mut impl Rng, alphabet: &Alphabet, max_stem: usize, max_loop: usize) -> Lasso {
    let letters = alphabet.letters();
    let s = rng.gen_range(0..=max_stem);
    let c = rng.gen_range(1..=max_loop);
    let word: Vec<Vec<Rational>> = (0..s + c).map(|_| alphabet.decode(letters.choose(rng).unwrap())).collect();
    Lasso::new(alphabet.props.clone(), word[..s].to_vec(), word[s..].to_vec())
}

/// Every assignment of `vars` to lassos of `universe`.
pub fn assignments(universe: &[Lasso], vars: &[&str]) -> Vec<LassoAssignment> {
    let mut out = vec![LassoAssignment::new()];
    for v in vars {
        out = out.into_iter().flat_map(|a| universe.iter().map(move |l| a.clone().with(v, l.clone()))).collect();
    }
    out
}

pub fn random_discount(rng: &mut impl Rng) -> Discount {
    if rng.gen_bool(0.7) {
        Discount::Exp(ratio(1, rng.gen_range(2..=3)))
    } else {
        Discount::Harmonic
    }
}

/// Quantifier-free temporal-quality formula over `p`.
pub fn random_temp_qf(rng: &mut impl Rng, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return atom("p", vars[rng.gen_range(0..vars.len())]);
    }
    let sub = |rng: &mut _| random_temp_qf(rng, vars, depth - 1);
    match rng.gen_range(0..9) {
        0 => not(sub(rng)),
        1 => or(sub(rng), sub(rng)),
        2 => and(sub(rng), sub(rng)),
        3 => next(sub(rng)),
        4 => until(sub(rng), sub(rng)),
        5 => {
            let eta = random_discount(rng);
            d_until(eta, sub(rng), sub(rng))
        }
        6 => {
            let eta = random_discount(rng);
            d_eventually(eta, sub(rng))
        }
        7 => {
            let eta = random_discount(rng);
            d_globally(eta, sub(rng))
        }
        _ => globally(eventually(sub(rng))),
    }
}

/// Temporal-quality formula with negation only on atoms and no release,
/// discounted or not.
pub fn random_pos_temp_qf(rng: &mut impl Rng, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        let a = atom("p", vars[rng.gen_range(0..vars.len())]);
        return if rng.gen_bool(0.3) { not(a) } else { a };
    }
    let sub = |rng: &mut _| random_pos_temp_qf(rng, vars, depth - 1);
    match rng.gen_range(0..5) {
        0 => or(sub(rng), sub(rng)),
        1 => and(sub(rng), sub(rng)),
        2 => next(sub(rng)),
        3 => {
            let eta = random_discount(rng);
            d_until(eta, sub(rng), sub(rng))
        }
        _ => {
            let eta = random_discount(rng);
            d_eventually(eta, sub(rng))
        }
    }
}
