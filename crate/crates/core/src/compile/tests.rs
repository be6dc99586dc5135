use super::*;
use crate::formula::{
    and, atom, d_eventually, d_globally, d_until, eventually, globally, next, not, oplus, or, parse_formula,
    parse_formula_open, release, until, Discount,
};
use crate::kripke::{encode_assignment, lasso_enumerate, parse_kripke, Lasso, LassoAssignment};
use crate::oracle::{eval_qf, EvalContext};
use crate::rational::{int, ratio};
use crate::values::ValueSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complete() -> WeightedKripke {
    parse_kripke("weights: 0,1\nstates: a, b\ninit: a, b\ntrans:\n a -> a, b\n b -> a, b\nlabels:\n a p=1\n b p=0\n")
        .unwrap()
}

/// `p` first holds at depth 2 on every path.
fn depth2() -> WeightedKripke {
    parse_kripke(
        "weights: 0,1\nstates: s0, s1, s2\ninit: s0\ntrans:\n s0 -> s1\n s1 -> s2\n s2 -> s2\nlabels:\n s2 p=1\n",
    )
    .unwrap()
}

fn tuples(k: &WeightedKripke, vars: &[&str], bounds: (usize, usize)) -> Vec<LassoAssignment> {
    let ls = lasso_enumerate(k, bounds.0, bounds.1).unwrap();
    let mut out = vec![LassoAssignment::new()];
    for v in vars {
        out = out.into_iter().flat_map(|a| ls.iter().map(move |l| a.clone().with(v, l.clone()))).collect();
    }
    out
}

fn value(f: &Formula, a: &LassoAssignment) -> Rational {
    eval_qf(f, &EvalContext::new(a.clone())).unwrap()
}

fn random_prop(rng: &mut impl Rng, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..6) {
            0 => Formula::True,
            1 => Formula::False,
            _ => atom(["p", "q"][rng.gen_range(0..2)], vars[rng.gen_range(0..vars.len())]),
        };
    }
    let sub = |rng: &mut _| random_prop(rng, vars, depth - 1);
    match rng.gen_range(0..7) {
        0 => not(sub(rng)),
        1 => or(sub(rng), sub(rng)),
        2 => and(sub(rng), sub(rng)),
        3 => oplus(vec![ratio(1, 2), ratio(1, 2)], vec![sub(rng), sub(rng)]),
        4 => next(sub(rng)),
        5 => until(sub(rng), sub(rng)),
        _ => release(sub(rng), sub(rng)),
    }
}

fn random_temp(rng: &mut impl Rng, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return atom("p", vars[rng.gen_range(0..vars.len())]);
    }
    let eta = if rng.gen_bool(0.7) { Discount::Exp(ratio(1, 2)) } else { Discount::Harmonic };
    let sub = |rng: &mut _| random_temp(rng, vars, depth - 1);
    match rng.gen_range(0..9) {
        0 => not(sub(rng)),
        1 => or(sub(rng), sub(rng)),
        2 => and(sub(rng), sub(rng)),
        3 => next(sub(rng)),
        4 => until(sub(rng), sub(rng)),
        5 => d_until(eta, sub(rng), sub(rng)),
        6 => d_eventually(eta, sub(rng)),
        7 => d_globally(eta, sub(rng)),
        _ => globally(eventually(sub(rng))),
    }
}

fn small_structures() -> Vec<WeightedKripke> {
    vec![
        complete(),
        parse_kripke("weights: 0,1\nstates: a\ninit: a\ntrans: a -> a\nlabels: a p=1\n").unwrap(),
        parse_kripke(
            "weights: 0,1/2,1\nstates: a, b\ninit: a\ntrans:\n a -> b\n b -> a, b\nlabels:\n a p=1/2\n b p=1, q=1/2\n",
        )
        .unwrap(),
    ]
}

#[test]
fn atom_reads_first_letter() {
    let k = complete();
    let a = compile_prop_qf(&atom("p", "x"), &k, &["x"], &PredicateSpec::Singleton(int(1))).unwrap();
    for t in tuples(&k, &["x"], (2, 2)) {
        let l = encode_assignment(&t);
        assert_eq!(a.accepts(&l), l.letter(0)[0] == int(1), "{l}");
    }
}

#[test]
fn oplus_half_detects_disagreement() {
    let k = complete();
    let f = oplus(vec![ratio(1, 2), ratio(1, 2)], vec![atom("p", "x"), atom("p", "y")]);
    let a = compile_prop_qf(&f, &k, &["x", "y"], &PredicateSpec::Singleton(ratio(1, 2))).unwrap();
    for t in tuples(&k, &["x", "y"], (1, 2)) {
        let l = encode_assignment(&t);
        assert_eq!(a.accepts(&l), l.letter(0)[0] != l.letter(0)[1]);
    }
}

#[test]
fn prop_automata_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in small_structures() {
        for round in 0..25 {
            let vars: &[&str] = if round % 2 == 0 { &["x"] } else { &["x", "y"] };
            let f = random_prop(&mut rng, vars, 3);
            let w = ValueSet::new(k.weights.iter().cloned()).unwrap();
            let vals = crate::values::value_overapprox(&f, &w).unwrap();
            let c = vals.as_slice()[rng.gen_range(0..vals.len())].clone();
            let preds = [PredicateSpec::Ge(c.clone()), PredicateSpec::Singleton(c.clone()), PredicateSpec::Lt(c)];
            for p in preds {
                let a = compile_prop_qf(&f, &k, vars, &p).unwrap();
                for t in tuples(&k, vars, (2, 2)) {
                    let v = value(&f, &t);
                    assert_eq!(a.accepts(&encode_assignment(&t)), p.contains(&v), "{f} {p} value {v}");
                }
            }
        }
    }
}

#[test]
fn discounted_eventually_horizon() {
    let k = complete();
    let f = parse_formula_open("F[exp(1/2)] p@x", &["x"]).unwrap();
    let q = compile_temp_qf(&f, &k, &["x"], &PredicateSpec::Gt(ratio(1, 4))).unwrap();
    assert_eq!(q.horizon, 2);
    let all = tuples(&k, &["x"], (2, 2));
    assert!(all.len() >= 8);
    for t in all {
        let l = encode_assignment(&t);
        let early = l.letter(0)[0] == int(1) || l.letter(1)[0] == int(1);
        assert_eq!(q.nba.accepts(&l), early, "{l}");
        assert_eq!(early, value(&f, &t) > ratio(1, 4));
    }
}

#[test]
fn boolean_formula_threshold_half() {
    let k = complete();
    let f = parse_formula_open("G F p@x", &["x"]).unwrap();
    let q = compile_temp_qf(&f, &k, &["x"], &PredicateSpec::Gt(ratio(1, 2))).unwrap();
    for t in tuples(&k, &["x"], (2, 2)) {
        assert_eq!(q.nba.accepts(&encode_assignment(&t)), value(&f, &t) == int(1));
    }
}

#[test]
fn lasso_values_are_positive_for_example_formula() {
    let k = complete();
    let f = parse_formula_open("G F[exp(1/2)] p@x | F G !p@x", &["x"]).unwrap();
    let q = compile_temp_qf(&f, &k, &["x"], &PredicateSpec::Gt(int(0))).unwrap();
    let full = crate::automata::kripke_to_nba(&k, 1);
    let rest = crate::automata::complement(&q.nba).unwrap();
    assert!(crate::automata::intersect(&rest, &full).unwrap().is_empty());
}

#[test]
fn temp_automata_match_oracle_on_lassos() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let thresholds = [int(0), ratio(1, 8), ratio(1, 4), ratio(1, 3), ratio(1, 2), ratio(3, 4)];
    for k in small_structures() {
        for round in 0..20 {
            let vars: &[&str] = if round % 3 == 0 { &["x", "y"] } else { &["x"] };
            let f = random_temp(&mut rng, vars, 3);
            let v = thresholds[rng.gen_range(0..thresholds.len())].clone();
            for (p, holds) in [
                (
                    PredicateSpec::Gt(v.clone()),
                    Box::new(|x: &Rational, v: &Rational| x > v) as Box<dyn Fn(&_, &_) -> bool>,
                ),
                (PredicateSpec::Lt(v.clone()), Box::new(|x: &Rational, v: &Rational| x < v)),
            ] {
                let q = compile_temp_qf(&f, &k, vars, &p).unwrap();
                let doubled = compile_temp_qf_with(&f, &k, vars, &p, q.horizon + 1, true, 100_000).unwrap();
                for t in tuples(&k, vars, (2, 2)) {
                    let l = encode_assignment(&t);
                    let x = value(&f, &t);
                    assert_eq!(q.nba.accepts(&l), holds(&x, &v), "{f} {p} value {x} on {l}");
                    assert_eq!(doubled.nba.accepts(&l), q.nba.accepts(&l));
                }
            }
        }
    }
}

#[test]
fn negative_side_is_relative_complement() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let k = complete();
    for _ in 0..15 {
        let f = random_temp(&mut rng, &["x"], 3);
        let p = PredicateSpec::Gt(ratio(1, 4));
        let yes = compile_temp_qf_with(&f, &k, &["x"], &p, 0, true, 100_000).unwrap().nba;
        let no = compile_temp_qf_with(&f, &k, &["x"], &p, 0, false, 100_000).unwrap().nba;
        assert!(crate::automata::intersect(&yes, &no).unwrap().is_empty());
        let both = crate::automata::union(&yes, &no).unwrap();
        let full = crate::automata::kripke_to_nba(&k, 1);
        let gap = crate::automata::intersect(&full, &crate::automata::complement(&both).unwrap()).unwrap();
        assert!(gap.is_empty(), "{f}");
    }
}

#[test]
fn non_strict_temporal_thresholds_rejected() {
    let f = parse_formula_open("F[exp(1/2)] p@x", &["x"]).unwrap();
    let e = compile_temp_qf(&f, &complete(), &["x"], &PredicateSpec::Ge(ratio(1, 2)));
    assert!(matches!(e, Err(CompileError::Predicate(_))));
}

fn example_a1() -> Formula {
    parse_formula("exists x. forall y. oplus[1/2,1/2](!p@x, p@y)").unwrap()
}

#[test]
fn example_a1_lower_bound_and_value() {
    let k = complete();
    let psi = example_a1();
    let low = PredicateSpec::Interval { lo: int(0), hi: ratio(1, 2), lo_open: false, hi_open: true };
    assert!(quantifier_elim_prop(&psi, &k, &[], &low).unwrap().is_empty());
    assert!(!quantifier_elim_prop(&psi, &k, &[], &PredicateSpec::Singleton(ratio(1, 2))).unwrap().is_empty());
    let one_state = parse_kripke("weights: 0,1\nstates: a\ninit: a\ntrans: a -> a\n").unwrap();
    assert!(quantifier_elim_prop(&psi, &one_state, &[], &low).unwrap().is_empty());
}

#[test]
fn exactly_one_value_is_realized() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in small_structures() {
        for _ in 0..6 {
            let body = random_prop(&mut rng, &["x", "y"], 2);
            let psi = match rng.gen_range(0..4) {
                0 => parse_formula(&format!("exists x. forall y. {body}")).unwrap(),
                1 => parse_formula(&format!("forall x. exists y. {body}")).unwrap(),
                2 => parse_formula(&format!("forall x. forall y. {body}")).unwrap(),
                _ => parse_formula(&format!("exists x. exists y. {body}")).unwrap(),
            };
            let vals = crate::compile::elim::candidate_values(&psi, &k).unwrap();
            let hits: Vec<&Rational> = vals
                .iter()
                .filter(|c| {
                    !quantifier_elim_prop(&psi, &k, &[], &PredicateSpec::Singleton((*c).clone())).unwrap().is_empty()
                })
                .collect();
            assert_eq!(hits.len(), 1, "{psi}");
        }
    }
}

#[test]
fn open_formula_elimination() {
    // forall y. (p@x -> X p@y): holds for x iff p@x fails or every successor-step trace has p
    let k = complete();
    let psi = parse_formula_open("forall y. (p@x -> X p@y)", &["x"]).unwrap();
    let a = quantifier_elim_prop(&psi, &k, &["x"], &PredicateSpec::Singleton(int(1))).unwrap();
    for t in tuples(&k, &["x"], (2, 2)) {
        let l = encode_assignment(&t);
        assert_eq!(a.accepts(&l), l.letter(0)[0] == int(0));
    }
}

#[test]
fn discounted_exists_thresholds() {
    let k = depth2();
    let psi = parse_formula("exists x. F[exp(1/2)] p@x").unwrap();
    assert!(quantifier_elim_temp(&psi, &k, &[], &PredicateSpec::Gt(ratio(1, 4))).unwrap().is_empty());
    assert!(!quantifier_elim_temp(&psi, &k, &[], &PredicateSpec::Gt(ratio(1, 8))).unwrap().is_empty());
}

#[test]
fn one_sided_acceptance_without_lassos() {
    // the value is 0, but the threshold automaton for > 0 accepts
    let psi = parse_formula("forall x. G F[exp(1/2)] p@x | F G !p@x").unwrap();
    let a = quantifier_elim_temp(&psi, &complete(), &[], &PredicateSpec::Gt(int(0))).unwrap();
    assert!(!a.is_empty());
}

#[test]
fn temporal_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let k = complete();
    for _ in 0..10 {
        let body = random_temp(&mut rng, &["x"], 2);
        let psi = parse_formula(&format!("forall x. {body}")).unwrap();
        let v = ratio(rng.gen_range(1..4), 4);
        let lt = quantifier_elim_temp(&psi, &k, &[], &PredicateSpec::Lt(v.clone())).unwrap();
        let dual = crate::formula::negate_dual(&psi);
        let gt = quantifier_elim_temp(&dual, &k, &[], &PredicateSpec::Gt(crate::rational::one_minus(&v))).unwrap();
        assert_eq!(lt.is_empty(), gt.is_empty());
    }
}

#[allow(dead_code)]
fn lasso(bits: &[i64], cycle: &[i64]) -> Lasso {
    Lasso::new(
        vec!["p".into()],
        bits.iter().map(|b| vec![int(*b)]).collect(),
        cycle.iter().map(|b| vec![int(*b)]).collect(),
    )
}
