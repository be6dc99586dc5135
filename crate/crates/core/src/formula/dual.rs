use super::{Formula, FuncKind};

/// Returns a formula whose value is `1 - value(f)` under every assignment,
/// with negations pushed down to atoms and to the non-self-dual functions.
pub fn negate_dual(f: &Formula) -> Formula {
    use Formula::*;
    let b = |x: Formula| Box::new(x);
    match f {
        True => False,
        False => True,
        Atom { .. } => Func(FuncKind::Not, vec![f.clone()]),
        Func(kind, args) => match kind {
            FuncKind::Not => push_negation(&args[0]),
            FuncKind::Or => Func(FuncKind::And, args.iter().map(negate_dual).collect()),
            FuncKind::And => Func(FuncKind::Or, args.iter().map(negate_dual).collect()),
            FuncKind::Implies => Func(FuncKind::And, vec![push_negation(&args[0]), negate_dual(&args[1])]),
            FuncKind::Iff => {
                let (x, y) = (&args[0], &args[1]);
                Func(
                    FuncKind::Or,
                    vec![
                        Func(FuncKind::And, vec![push_negation(x), negate_dual(y)]),
                        Func(FuncKind::And, vec![push_negation(y), negate_dual(x)]),
                    ],
                )
            }
            FuncKind::Oplus(_) => Func(kind.clone(), args.iter().map(negate_dual).collect()),
            FuncKind::Agree => Func(FuncKind::Agree, vec![negate_dual(&args[0]), push_negation(&args[1])]),
            FuncKind::Scale(_) | FuncKind::ThresholdGt(_) => Func(FuncKind::Not, vec![push_negation(f)]),
        },
        Next(a) => Next(b(negate_dual(a))),
        Until(x, y) => Release(b(negate_dual(x)), b(negate_dual(y))),
        Release(x, y) => Until(b(negate_dual(x)), b(negate_dual(y))),
        DUntil(e, x, y) => DRelease(e.clone(), b(negate_dual(x)), b(negate_dual(y))),
        DRelease(e, x, y) => DUntil(e.clone(), b(negate_dual(x)), b(negate_dual(y))),
        Exists(v, a) => Forall(v.clone(), b(negate_dual(a))),
        Forall(v, a) => Exists(v.clone(), b(negate_dual(a))),
    }
}

/// Negation normal form: every `Not` ends up directly above an atom or a
/// scale/threshold application.
pub fn push_negation(f: &Formula) -> Formula {
    match f {
        Formula::Func(FuncKind::Not, args) => negate_dual(&args[0]),
        _ => f.map_children(push_negation),
    }
}
