use super::{Formula, FuncKind};
use crate::rational::fmt_rational;

/// Renders a formula in the `.hq` concrete syntax. Binary operators are fully
/// parenthesized so that parsing the output yields the same tree.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    let (prefix, matrix) = f.prefix();
    for (q, v) in prefix {
        out.push_str(match q {
            super::Quant::Exists => "exists ",
            super::Quant::Forall => "forall ",
        });
        out.push_str(v);
        out.push_str(". ");
    }
    out.push_str(&operand(matrix));
    out
}

fn params(xs: &[crate::rational::Rational]) -> String {
    xs.iter().map(fmt_rational).collect::<Vec<_>>().join(",")
}

fn list(args: &[Formula]) -> String {
    args.iter().map(operand).collect::<Vec<_>>().join(", ")
}

fn operand(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Atom { prop, var } => format!("{prop}@{var}"),
        Formula::Func(k, args) => match (k, args.len()) {
            (FuncKind::Not, 1) => format!("!{}", operand(&args[0])),
            (FuncKind::Or, n) if n >= 2 => infix(" | ", args),
            (FuncKind::And, n) if n >= 2 => infix(" & ", args),
            (FuncKind::Or, _) => format!("or({})", list(args)),
            (FuncKind::And, _) => format!("and({})", list(args)),
            (FuncKind::Implies, _) => infix(" -> ", args),
            (FuncKind::Iff, _) => infix(" <-> ", args),
            (FuncKind::Oplus(cs), _) => format!("oplus[{}]({})", params(cs), list(args)),
            (FuncKind::Scale(a), _) => format!("scale[{}]({})", fmt_rational(a), list(args)),
            (FuncKind::ThresholdGt(k), _) => format!("thr[{}]({})", fmt_rational(k), list(args)),
            (FuncKind::Agree, _) => format!("agree({})", list(args)),
            (FuncKind::Not, _) => format!("not({})", list(args)),
        },
        Formula::Next(a) => format!("X {}", operand(a)),
        Formula::Until(a, b) if **a == Formula::True => format!("F {}", operand(b)),
        Formula::Release(a, b) if **a == Formula::False => format!("G {}", operand(b)),
        Formula::DUntil(e, a, b) if **a == Formula::True => format!("F[{e}] {}", operand(b)),
        Formula::DRelease(e, a, b) if **a == Formula::False => format!("G[{e}] {}", operand(b)),
        Formula::Until(a, b) => format!("({} U {})", operand(a), operand(b)),
        Formula::Release(a, b) => format!("({} R {})", operand(a), operand(b)),
        Formula::DUntil(e, a, b) => format!("({} U[{e}] {})", operand(a), operand(b)),
        Formula::DRelease(e, a, b) => format!("({} R[{e}] {})", operand(a), operand(b)),
        Formula::Exists(..) | Formula::Forall(..) => format!("({})", print_formula(f)),
    }
}

fn infix(op: &str, args: &[Formula]) -> String {
    format!("({})", args.iter().map(operand).collect::<Vec<_>>().join(op))
}
