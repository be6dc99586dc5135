use super::{require_closed, CheckError, Method, Options, Query, Verdict};
use crate::compile::Eliminator;
use crate::formula::{analyze, negate_dual, Formula, Fragment, Quant};
use crate::kripke::WeightedKripke;
use crate::rational::{fmt_rational, one, one_minus, zero, Rational};
use crate::values::{nearest_above, nearest_below, DiscountedLattice, ValueSet};
use num_traits::Zero;

/// Whether the "value > v" automaton of a closed formula is nonempty. An
/// empty automaton means value <= v and a nonempty one means value >= v.
fn above(psi: &Formula, k: &WeightedKripke, v: &Rational, opts: &Options) -> Result<bool, CheckError> {
    let mut e = Eliminator::temp(psi, k, &[], v.clone(), opts.state_cap)?;
    Ok(!e.automaton(0, true)?.is_empty())
}

/// Whether the "value < v" automaton is nonempty, through the dual formula.
fn below(psi: &Formula, k: &WeightedKripke, v: &Rational, opts: &Options) -> Result<bool, CheckError> {
    above(&negate_dual(psi), k, &one_minus(v), opts)
}

fn trivial(query: &Query) -> Option<Verdict> {
    match query {
        Query::Ge(v) if v.is_zero() => Some(Verdict::new(true, Method::Trivial)),
        Query::Le(v) if *v == one() => Some(Verdict::new(true, Method::Trivial)),
        _ => None,
    }
}

/// ε-approximate threshold check for a closed temporal-quality formula.
///
/// The answer is HOLDS whenever the value is at least `v + ε` and FAILS
/// whenever it is at most `v - ε`; a certified answer is always correct.
pub fn mc_temp_approx(
    psi: &Formula,
    k: &WeightedKripke,
    query: &Query,
    epsilon: &Rational,
    opts: &Options,
) -> Result<Verdict, CheckError> {
    require_closed(psi)?;
    query.validate()?;
    if *epsilon <= zero() {
        return Err(CheckError::Epsilon(fmt_rational(epsilon)));
    }
    if let Some(v) = trivial(query) {
        return Ok(v);
    }
    let half = epsilon / Rational::from_integer(2.into());
    let answer = match query {
        Query::Ge(v) => {
            if !below(psi, k, v, opts)? {
                Some(true)
            } else {
                let w = v - &half;
                if w >= zero() && !above(psi, k, &w, opts)? {
                    Some(false)
                } else {
                    None
                }
            }
        }
        Query::Le(v) => {
            if !above(psi, k, v, opts)? {
                Some(true)
            } else {
                let w = v + &half;
                if w <= one() && !below(psi, k, &w, opts)? {
                    Some(false)
                } else {
                    None
                }
            }
        }
    };
    Ok(match answer {
        Some(h) => Verdict::new(h, Method::TempApprox),
        None => Verdict {
            answer: super::Answer::UnknownWithinEpsilon,
            value: None,
            witness: None,
            method: Method::TempApprox,
        },
    })
}

fn lattice(psi: &Formula, k: &WeightedKripke) -> Result<DiscountedLattice, CheckError> {
    let w = ValueSet::new(k.weights.iter().cloned())?;
    Ok(DiscountedLattice::for_formula(psi, &w))
}

/// Exact check on a positive formula, using the gap below (or above) the
/// threshold in the value lattice.
fn positive(psi: &Formula, k: &WeightedKripke, query: &Query, opts: &Options) -> Result<bool, CheckError> {
    let l = lattice(psi, k)?;
    let two = Rational::from_integer(2.into());
    match query {
        Query::Ge(v) => {
            let mid = (nearest_below(&l, v)? + v) / &two;
            Ok(!below(psi, k, &mid, opts)?)
        }
        Query::Le(v) => {
            let mid = (nearest_above(&l, v)? + v) / &two;
            Ok(!above(psi, k, &mid, opts)?)
        }
    }
}

/// Exact threshold check for the positive and negative fragments.
pub fn mc_temp_fragment(
    psi: &Formula,
    k: &WeightedKripke,
    query: &Query,
    opts: &Options,
) -> Result<Verdict, CheckError> {
    require_closed(psi)?;
    query.validate()?;
    let fragment = analyze(psi).fragment;
    let negative = match fragment {
        Fragment::Boolean | Fragment::TempPos => false,
        Fragment::TempNeg => true,
        other => return Err(CheckError::Fragment(format!("{} is neither TEMP_POS nor TEMP_NEG", other.name()))),
    };
    if let Some(v) = trivial(query) {
        return Ok(v);
    }
    let (f, q) = if negative { (negate_dual(psi), query.mirrored()) } else { (psi.clone(), query.clone()) };
    if let Query::Le(v) = &q {
        if v.is_zero() {
            return Err(CheckError::Threshold(format!(
                "{query} has no exact check in the {} fragment",
                fragment.name()
            )));
        }
    }
    let holds = positive(&f, k, &q, opts)?;
    Ok(Verdict::new(holds, if negative { Method::TempNegative } else { Method::TempPositive }))
}

/// Exact check for alternation-free prefixes: `<= v` for existential
/// prefixes and `>= v` for universal ones. A FAILS verdict carries the
/// offending assignment as witness.
pub fn mc_temp_af(psi: &Formula, k: &WeightedKripke, query: &Query, opts: &Options) -> Result<Verdict, CheckError> {
    require_closed(psi)?;
    query.validate()?;
    let stats = analyze(psi);
    let (f, v, method) = match query {
        Query::Le(v) if stats.exists_only => (psi.clone(), v.clone(), Method::TempExistsOnly),
        Query::Ge(v) if stats.forall_only => (negate_dual(psi), one_minus(v), Method::TempForallOnly),
        _ => {
            return Err(CheckError::Fragment(format!(
                "{query} needs an {} prefix; use the approximate check instead",
                if matches!(query, Query::Le(_)) { "existential-only" } else { "universal-only" }
            )))
        }
    };
    if let Some(t) = trivial(query) {
        return Ok(t);
    }
    let (prefix, _) = f.prefix();
    debug_assert!(prefix.iter().all(|(q, _)| *q == Quant::Exists));
    let vars: Vec<String> = prefix.iter().map(|(_, x)| x.to_string()).collect();
    let mut e = Eliminator::temp(&f, k, &[], v, opts.state_cap)?;
    let inner = e.automaton(e.levels(), true)?;
    let mut verdict = Verdict::new(inner.is_empty(), method);
    if let Some(mut w) = inner.witness() {
        w.lasso = w.lasso.rename(|p| match p.rsplit_once('@') {
            Some((name, i)) => match i.parse::<usize>() {
                Ok(i) if i >= 1 && i <= vars.len() => format!("{name}@{}", vars[i - 1]),
                _ => p.to_string(),
            },
            None => p.to_string(),
        });
        verdict.witness = Some(w);
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::Answer;
    use crate::formula::parse_formula;
    use crate::kripke::{parse_kripke, LassoAssignment};
    use crate::oracle::{eval_qf, EvalContext};
    use crate::rational::{int, ratio};

    fn opts() -> Options {
        Options::default()
    }

    fn complete() -> WeightedKripke {
        parse_kripke(
            "weights: 0,1\nstates: a, b\ninit: a, b\ntrans:\n a -> a, b\n b -> a, b\nlabels:\n a p=1\n b p=0\n",
        )
        .unwrap()
    }

    fn depth2() -> WeightedKripke {
        parse_kripke(
            "weights: 0,1\nstates: s0, s1, s2\ninit: s0\ntrans:\n s0 -> s1\n s1 -> s2\n s2 -> s2\nlabels:\n s2 p=1\n",
        )
        .unwrap()
    }

    #[test]
    fn approx_on_discounted_eventually() {
        let psi = parse_formula("exists x. F[exp(1/2)] p@x").unwrap();
        let k = depth2();
        let run = |q: Query| mc_temp_approx(&psi, &k, &q, &ratio(1, 16), &opts()).unwrap().answer;
        assert_eq!(run(Query::Ge(ratio(1, 8))), Answer::Holds);
        assert_eq!(run(Query::Ge(ratio(1, 4))), Answer::Holds);
        assert_eq!(run(Query::Ge(ratio(1, 2))), Answer::Fails);
        assert_eq!(run(Query::Le(ratio(1, 4))), Answer::Holds);
        assert_eq!(run(Query::Le(ratio(1, 8))), Answer::Fails);
    }

    #[test]
    fn approx_no_lasso_formula_fails() {
        let psi = parse_formula("forall x. G F[exp(1/2)] p@x | F G !p@x").unwrap();
        let v = mc_temp_approx(&psi, &complete(), &Query::Ge(ratio(1, 2)), &ratio(1, 4), &opts()).unwrap();
        assert_eq!(v.answer, Answer::Fails);
    }

    #[test]
    fn approx_rejects_bad_epsilon() {
        let psi = parse_formula("true").unwrap();
        assert!(matches!(
            mc_temp_approx(&psi, &complete(), &Query::Ge(ratio(1, 2)), &int(0), &opts()),
            Err(CheckError::Epsilon(_))
        ));
        let v = mc_temp_approx(&psi, &complete(), &Query::Ge(ratio(1, 2)), &ratio(1, 8), &opts()).unwrap();
        assert_eq!(v.answer, Answer::Holds);
    }

    #[test]
    fn fragment_positive_and_negative() {
        let k = depth2();
        let pos = parse_formula("exists x. F[exp(1/2)] p@x").unwrap();
        let run = |f: &Formula, q: Query| mc_temp_fragment(f, &k, &q, &opts()).unwrap();
        assert_eq!(run(&pos, Query::Ge(ratio(1, 4))).answer, Answer::Holds);
        assert_eq!(run(&pos, Query::Ge(ratio(1, 2))).answer, Answer::Fails);
        assert_eq!(run(&pos, Query::Le(ratio(1, 4))).answer, Answer::Holds);
        assert_eq!(run(&pos, Query::Le(ratio(1, 5))).answer, Answer::Fails);
        assert_eq!(run(&pos, Query::Ge(ratio(1, 4))).method, Method::TempPositive);
        let neg = negate_dual(&pos);
        assert_eq!(run(&neg, Query::Le(ratio(3, 4))).answer, Answer::Holds);
        assert_eq!(run(&neg, Query::Le(ratio(1, 2))).answer, Answer::Fails);
        assert_eq!(run(&neg, Query::Le(ratio(1, 2))).method, Method::TempNegative);
        assert!(matches!(mc_temp_fragment(&pos, &k, &Query::Le(int(0)), &opts()), Err(CheckError::Threshold(_))));
        assert!(matches!(mc_temp_fragment(&neg, &k, &Query::Ge(int(1)), &opts()), Err(CheckError::Threshold(_))));
    }

    #[test]
    fn fragment_mismatch() {
        let f = parse_formula("forall x. exists y. G[exp(1/2)] p@x & F[exp(1/2)] p@y | !F[exp(1/2)] p@x").unwrap();
        assert!(matches!(
            mc_temp_fragment(&f, &complete(), &Query::Ge(ratio(1, 2)), &opts()),
            Err(CheckError::Fragment(_))
        ));
    }

    #[test]
    fn alternation_free_with_witness() {
        let k = depth2();
        let psi = parse_formula("exists x. F[exp(1/2)] p@x").unwrap();
        assert_eq!(mc_temp_af(&psi, &k, &Query::Le(ratio(1, 4)), &opts()).unwrap().answer, Answer::Holds);
        let v = mc_temp_af(&psi, &k, &Query::Le(ratio(1, 8)), &opts()).unwrap();
        assert_eq!(v.answer, Answer::Fails);
        let w = v.witness.unwrap().lasso;
        assert_eq!(w.props, vec!["p@x".to_string()]);
        let t = w.rename(|_| "p".into());
        let val = eval_qf(
            &crate::formula::parse_formula_open("F[exp(1/2)] p@x", &["x"]).unwrap(),
            &EvalContext::new(LassoAssignment::new().with("x", t)),
        )
        .unwrap();
        assert!(val > ratio(1, 8));
        assert!(matches!(mc_temp_af(&psi, &k, &Query::Ge(ratio(1, 8)), &opts()), Err(CheckError::Fragment(_))));
    }

    #[test]
    fn alternation_free_universal() {
        let k = complete();
        let t = parse_formula("forall x. true").unwrap();
        assert_eq!(mc_temp_af(&t, &k, &Query::Ge(int(1)), &opts()).unwrap().answer, Answer::Holds);
        let psi = parse_formula("forall x. G[exp(1/2)] p@x").unwrap();
        let v = mc_temp_af(&psi, &k, &Query::Ge(ratio(1, 2)), &opts()).unwrap();
        assert_eq!(v.answer, Answer::Fails);
        assert!(v.witness.is_some());
        let one_state = parse_kripke("weights: 0,1\nstates: a\ninit: a\ntrans:\n a -> a\nlabels:\n a p=1\n").unwrap();
        assert_eq!(mc_temp_af(&psi, &one_state, &Query::Ge(int(1)), &opts()).unwrap().answer, Answer::Holds);
    }
}
