//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

mod common;

use common::*;
use hyperqual::automata::{complement, intersect, project, union};
use hyperqual::checker::{
    alternation_depth, booleanize, booleanize_closure, check, mc_prop, mc_prop_value, mc_temp_approx, mc_temp_fragment,
    Answer, Options, Query,
};
use hyperqual::compile::{compile_temp_qf, quantifier_elim_temp, PredicateSpec};
use hyperqual::formula::{analyze, negate_dual, parse_formula, parse_formula_open, print_formula};
use hyperqual::kripke::{encode_assignment, lasso_enumerate, parse_kripke, Lasso, LassoAssignment, WeightedKripke};
use hyperqual::oracle::{eval_bounded, eval_qf, eval_quantified, eval_quantified_with, BoundClass, EvalContext};
use hyperqual::rational::{fmt_rational, int, one, one_minus, ratio, Rational};
use hyperqual::values::{nearest_above, value_overapprox, DiscountedLattice, ValueSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn opts() -> Options {
    Options::default()
}

fn weight_sets() -> [Vec<Rational>; 2] {
    [vec![int(0), int(1)], vec![int(0), ratio(1, 2), int(1)]]
}

fn value_set_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut formulas, mut checked) = (0, 0usize);
    for i in 0..220 {
        let ws = &weight_sets()[i % 2];
        let w = ValueSet::new(ws.iter().cloned()).unwrap();
        let psi = random_closed(&mut rng, 2, 5);
        let vals = ok(value_overapprox(&psi, &w), "value_overapprox")?;
        let bound = ws.len().pow(psi.atom_count() as u32);
        ensure!(vals.len() <= bound, "|V| = {} > {bound} for {}", vals.len(), print_formula(&psi));

        let k = {
            let n = rng.gen_range(1..=2);
            random_kripke(&mut rng, n, ws, &PROPS)
        };
        let universe = ok(lasso_enumerate(&k, 1, 2), "lassos")?;
        let (prefix, matrix) = psi.prefix();
        let vars: Vec<&str> = prefix.iter().map(|(_, v)| *v).collect();
        for a in assignments(&universe, &vars) {
            let v = ok(eval_qf(matrix, &EvalContext::new(a)), "eval_qf")?;
            ensure!(vals.contains(&v), "matrix value {} outside V for {}", fmt_rational(&v), print_formula(&psi));
            checked += 1;
        }
        // any nonempty trace set, not only the full universe
        for _ in 0..3 {
            let n = rng.gen_range(1..=universe.len());
            let sub: Vec<Lasso> = universe.choose_multiple(&mut rng, n).cloned().collect();
            let v = ok(eval_quantified(&psi, &sub), "eval_quantified")?;
            ensure!(vals.contains(&v), "value {} outside V for {}", fmt_rational(&v), print_formula(&psi));
            checked += 1;
        }
        formulas += 1;
    }
    Ok(format!("{formulas} formulas, {checked} oracle values, 0 violations"))
}

fn example_a1() -> Outcome {
    let psi = parse_formula("exists x. forall y. oplus[1/2,1/2](!p@x, p@y)").unwrap();
    let v = ok(mc_prop_value(&psi, &complete_bool(), &opts()), "mc_prop_value")?;
    ensure!(v == ratio(1, 2), "value on the complete structure is {}", fmt_rational(&v));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let k = {
            let n = rng.gen_range(1..=3);
            random_kripke(&mut rng, n, &[int(0), int(1)], &["p"])
        };
        let r = ok(mc_prop(&psi, &k, &Query::Ge(ratio(1, 2)), &opts()), "mc_prop")?;
        ensure!(r.answer == Answer::Holds, "GE(1/2) is {} on\n{}", r.answer, k.to_wks());
    }

    let inner = parse_formula_open("forall y. oplus[1/2,1/2](!p@x, p@y)", &["x"]).unwrap();
    let high = Lasso::new(vec!["p".into()], vec![], vec![vec![int(1)]]);
    let low = Lasso::new(vec!["p".into()], vec![], vec![vec![int(0)]]);
    let v = ok(eval_quantified_with(&inner, &LassoAssignment::new().with("x", high), &[low]), "eval")?;
    ensure!(v == int(0), "inner value {} instead of 0", fmt_rational(&v));
    let w = value_overapprox(&psi, &ValueSet::new([int(0), int(1)]).unwrap()).unwrap();
    ensure!(w.contains(&int(0)), "0 missing from the over-approximation");
    Ok("value 1/2, GE(1/2) HOLDS on 20 structures, inner value 0".into())
}

fn prop_pipeline() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut pinned, mut one_sided, mut alternating, mut bounded_equal) = (0, 0, 0, 0);
    let total = 120;
    for i in 0..total {
        let ws = &weight_sets()[i % 2];
        let k = {
            let n = rng.gen_range(1..=2);
            random_kripke(&mut rng, n, ws, &PROPS)
        };
        let psi = random_closed(&mut rng, 2, 3);
        let s = k.num_states();
        let b = ok(eval_bounded(&psi, &k, s, s * s), "eval_bounded")?;
        let v = ok(mc_prop_value(&psi, &k, &opts()), "mc_prop_value")?;
        let w = ValueSet::new(ws.iter().cloned()).unwrap();
        let vals = value_overapprox(&psi, &w).unwrap();
        let show = || format!("{} on\n{}", print_formula(&psi), k.to_wks());
        ensure!(vals.contains(&v), "value {} outside V: {}", fmt_rational(&v), show());
        let dual = ok(mc_prop_value(&negate_dual(&psi), &k, &opts()), "dual")?;
        ensure!(dual == one_minus(&v), "dual value {} vs {}: {}", fmt_rational(&dual), fmt_rational(&v), show());
        let pins = match b.class {
            BoundClass::Exact => true,
            BoundClass::Lower => {
                ensure!(
                    v >= b.value,
                    "value {} below lower bound {}: {}",
                    fmt_rational(&v),
                    fmt_rational(&b.value),
                    show()
                );
                vals.max() == Some(&b.value)
            }
            BoundClass::Upper => {
                ensure!(
                    v <= b.value,
                    "value {} above upper bound {}: {}",
                    fmt_rational(&v),
                    fmt_rational(&b.value),
                    show()
                );
                vals.min() == Some(&b.value)
            }
            BoundClass::Estimate => {
                alternating += 1;
                false
            }
        };
        if pins {
            ensure!(v == b.value, "pinned value {} vs {}: {}", fmt_rational(&b.value), fmt_rational(&v), show());
            pinned += 1;
        } else if b.class != BoundClass::Estimate {
            one_sided += 1;
        }
        if v == b.value {
            bounded_equal += 1;
        }
    }
    Ok(format!(
        "{total} formulas: {pinned} pinned and equal, {one_sided} one-sided bounds respected, \
         {alternating} alternating consistent; bounded oracle equal on {bounded_equal}"
    ))
}

fn no_lasso_suite() -> Outcome {
    let k = complete_bool();
    let phi = parse_formula_open("G F[exp(1/2)] p@x | F G !p@x", &["x"]).unwrap();
    let lassos = ok(lasso_enumerate(&k, 3, 3), "lassos")?;
    for l in &lassos {
        let v = ok(eval_qf(&phi, &EvalContext::new(LassoAssignment::new().with("x", l.clone()))), "eval")?;
        ensure!(v > int(0), "lasso {l} has value 0");
    }
    let psi = parse_formula("forall x. G F[exp(1/2)] p@x | F G !p@x").unwrap();
    let r = ok(mc_temp_approx(&psi, &k, &Query::Ge(ratio(1, 2)), &ratio(1, 4), &opts()), "approx")?;
    ensure!(r.answer == Answer::Fails, "approx GE(1/2) answered {}", r.answer);

    // the naive pipeline: complement, intersect with K, project, complement
    let gt0 = ok(compile_temp_qf(&phi, &k, &["x"], &PredicateSpec::Gt(int(0))), "compile")?;
    for l in &lassos {
        let t = LassoAssignment::new().with("x", l.clone());
        ensure!(gt0.nba.accepts(&encode_assignment(&t)), "A>0 rejects lasso {l}");
    }
    let rest = ok(complement(&gt0.nba), "complement")?;
    ensure!(rest.is_empty(), "complement of A>0 is nonempty");
    let again = ok(complement(&ok(project(&rest, &[]), "project")?), "complement")?;
    ensure!(!again.is_empty(), "naive automaton is empty");
    let naive = ok(quantifier_elim_temp(&psi, &k, &[], &PredicateSpec::Gt(int(0))), "elim")?;
    ensure!(!naive.is_empty(), "eliminator for > 0 is empty");
    Ok(format!("{} lassos all positive, approx FAILS, naive > 0 automaton nonempty", lassos.len()))
}

/// Every pair of traces agrees on `a` up to depth `d` and some pair first
/// differs there.
fn divergence_structure(d: usize) -> WeightedKripke {
    let chain: Vec<String> = (0..d).map(|i| format!("c{i}")).collect();
    let mut text = format!("weights: 0, 1\nstates: {}, u, v\ninit: c0\ntrans:\n", chain.join(", "));
    for i in 0..d - 1 {
        text += &format!(" c{i} -> c{}\n", i + 1);
    }
    text += &format!(" c{} -> u, v\n u -> u\n v -> v\nlabels:\n u a=1\n", d - 1);
    parse_kripke(&text).unwrap()
}

fn fragment_exactness() -> Outcome {
    let div = parse_formula("low a; exists x. exists y. loweq(x,y) & F[exp(1/2)] !loweq(x,y)").unwrap();
    let od = parse_formula("low a; forall x. forall y. (loweq(x,y) -> G[exp(1/2)] loweq(x,y))").unwrap();
    let lattice = DiscountedLattice::for_formula(&div, &ValueSet::new([int(0), int(1)]).unwrap());
    let mut line = Vec::new();
    for d in 1..=3 {
        let k = divergence_structure(d);
        let eta = ratio(1, 1 << d);
        let b = ok(eval_bounded(&div, &k, d + 2, d + 2), "oracle")?;
        ensure!(b.value == eta, "d={d}: oracle {} vs {}", fmt_rational(&b.value), fmt_rational(&eta));
        let at = ok(mc_temp_fragment(&div, &k, &Query::Ge(eta.clone()), &opts()), "fragment")?;
        ensure!(at.answer == Answer::Holds, "d={d}: GE(eta_d) is {}", at.answer);
        let above = ok(nearest_above(&lattice, &eta), "nearest_above")?;
        let r = ok(mc_temp_fragment(&div, &k, &Query::Ge(above.clone()), &opts()), "fragment")?;
        ensure!(r.answer == Answer::Fails, "d={d}: GE({}) is {}", fmt_rational(&above), r.answer);
        for v in [one_minus(&eta), one_minus(&above), ratio(1, 2), ratio(7, 8), ratio(15, 16)] {
            let lhs = ok(check(&od, &k, &Query::Ge(v.clone()), None, &opts()), "od")?;
            let rhs = ok(check(&div, &k, &Query::Le(one_minus(&v)), None, &opts()), "div")?;
            ensure!(lhs.answer == rhs.answer, "d={d}, v={}: GE {} vs LE {}", fmt_rational(&v), lhs.answer, rhs.answer);
        }
        line.push(format!("d={d}: {}", fmt_rational(&eta)));
    }
    Ok(line.join(", "))
}

fn automata_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut autos, mut samples, mut witnesses) = (0, 0, 0);
    for i in 0..60 {
        let al = if i % 2 == 0 { bool_alphabet(&["p"]) } else { bool_alphabet(&["p", "q"]) };
        let a = {
            let n = rng.gen_range(1..=4);
            random_nba(&mut rng, n, &al, 0.3)
        };
        let b = {
            let n = rng.gen_range(1..=4);
            random_nba(&mut rng, n, &al, 0.3)
        };
        let c = ok(complement(&a), "complement")?;
        let meet = ok(intersect(&a, &b), "intersect")?;
        let join = ok(union(&a, &b), "union")?;
        for _ in 0..120 {
            let l = random_lasso(&mut rng, &al, 3, 3);
            let (x, y) = (a.accepts(&l), b.accepts(&l));
            ensure!(x != c.accepts(&l), "complement overlaps or misses {l}");
            ensure!(meet.accepts(&l) == (x && y), "intersection wrong on {l}");
            ensure!(join.accepts(&l) == (x || y), "union wrong on {l}");
            samples += 1;
        }
        for n in [&a, &b, &c, &meet, &join] {
            match n.witness() {
                Some(w) => {
                    ensure!(!n.is_empty(), "witness for an empty automaton");
                    ensure!(n.validate_run(&w) && n.accepts(&w.lasso), "invalid witness {}", w.lasso);
                    witnesses += 1;
                }
                None => ensure!(n.is_empty(), "no witness for a nonempty automaton"),
            }
        }
        autos += 1;
    }
    Ok(format!("{autos} automata, {samples} lassos, {witnesses} witnesses validated"))
}

fn booleanize_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let universe = ok(lasso_enumerate(&all_valuations(&PROPS), 1, 2), "lassos")?;
    let w = ValueSet::new([int(0), int(1)]).unwrap();
    let total = 110;
    for _ in 0..total {
        let psi = random_closed(&mut rng, 2, 3);
        let vals = value_overapprox(&psi, &w).unwrap();
        let chosen: Vec<Rational> = vals.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        let p = PredicateSpec::InSet(ValueSet::new(chosen).unwrap());
        let closure = ok(booleanize_closure(&psi, &p), "closure")?;
        let b = ok(booleanize(&psi, &p), "booleanize")?;
        let show = || format!("{} with {p}", print_formula(&psi));
        ensure!(!b.has_weighted_func(), "weighted function left: {}", show());
        ensure!(quantifier_counts(&b) == quantifier_counts(&closure), "quantifier count changed: {}", show());
        let alt = analyze(&b).alternation_count;
        ensure!(alt <= alternation_depth(&closure) + 1, "{alt} alternations after prenexing: {}", show());
        let v = ok(eval_quantified(&psi, &universe), "oracle")?;
        let bv = ok(eval_quantified(&b, &universe), "oracle")?;
        ensure!(bv == int(0) || bv == one(), "non-Boolean value {}: {}", fmt_rational(&bv), show());
        ensure!(
            (bv == one()) == p.contains(&v),
            "value {} but Bool gives {}: {}",
            fmt_rational(&v),
            fmt_rational(&bv),
            show()
        );
    }
    Ok(format!("{total} formulas over {} lassos, 0 mismatches", universe.len()))
}

fn refusal() -> Outcome {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let (k, f) = (dir.join("k.wks"), dir.join("mixed.hq"));
    std::fs::write(&k, complete_bool().to_wks()).map_err(|e| e.to_string())?;
    std::fs::write(&f, "forall x. exists y. F[exp(1/2)] p@x & !F[exp(1/2)] p@y\n").map_err(|e| e.to_string())?;
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_hyperqual"))
            .args(["check", "-k"])
            .arg(&k)
            .arg("-f")
            .arg(&f)
            .args(["--op", "ge", "--threshold", "1/2"])
            .args(extra)
            .output()
            .unwrap()
    };
    for extra in [&[][..], &["--mode", "temp-approx"][..]] {
        let out = run(extra);
        ensure!(out.status.code() == Some(2), "exit {:?} for {extra:?}", out.status.code());
        let err = String::from_utf8_lossy(&out.stderr);
        ensure!(err.contains("requires --epsilon"), "stderr: {err}");
    }
    let out = run(&["--epsilon", "1/8"]);
    ensure!(matches!(out.status.code(), Some(0 | 1 | 3)), "with epsilon: exit {:?}", out.status.code());
    Ok("exit 2 without --epsilon, answer with it".into())
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 8] = [
        ("value-set law", 30, value_set_law),
        ("value-set gap example", 10, example_a1),
        ("prop pipeline vs oracle", 180, prop_pipeline),
        ("no-lasso suite", 30, no_lasso_suite),
        ("fragment exactness", 60, fragment_exactness),
        ("automata algebra", 60, automata_algebra),
        ("booleanize equivalence", 120, booleanize_equivalence),
        ("refusal without epsilon", 30, refusal),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let took = start.elapsed();
        if outcome.is_ok() && took > Duration::from_secs(*limit) {
            outcome = Err(format!("took {took:.1?}, limit {limit}s"));
        }
        match outcome {
            Ok(detail) => println!("PASS {}. {name} ({took:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name} ({took:.2?}): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
