use super::{negate_dual, Discount, Formula, FuncKind, Quant};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Fragment {
    Boolean,
    Prop,
    TempPos,
    TempNeg,
    TempExistsOnly,
    TempForallOnly,
    TempFull,
}

impl Fragment {
    pub fn name(self) -> &'static str {
        match self {
            Fragment::Boolean => "BOOLEAN",
            Fragment::Prop => "PROP",
            Fragment::TempPos => "TEMP_POS",
            Fragment::TempNeg => "TEMP_NEG",
            Fragment::TempExistsOnly => "TEMP_EXISTS_ONLY",
            Fragment::TempForallOnly => "TEMP_FORALL_ONLY",
            Fragment::TempFull => "TEMP_FULL",
        }
    }

    /// Formulas without discounted operators.
    pub fn is_prop(self) -> bool {
        matches!(self, Fragment::Boolean | Fragment::Prop)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaStats {
    pub atom_count: usize,
    pub quantifier_depth: usize,
    pub alternation_count: usize,
    pub discount_depth: usize,
    pub discount_seqs: BTreeSet<Discount>,
    pub fragment: Fragment,
    pub exists_only: bool,
    pub forall_only: bool,
}

/// No discounted operators and no weighted function symbols.
pub fn is_boolean(f: &Formula) -> bool {
    !f.has_discount() && !f.has_weighted_func()
}

/// Membership in the positive grammar: Boolean LTL leaves closed under
/// `|`, `&`, `X`, `U` and `U_η`.
pub fn is_positive(f: &Formula) -> bool {
    if is_boolean(f) {
        return true;
    }
    match f {
        Formula::Func(FuncKind::Or | FuncKind::And, args) => args.iter().all(is_positive),
        Formula::Func(FuncKind::Implies, args) => is_boolean(&args[0]) && is_positive(&args[1]),
        Formula::Next(a) => is_positive(a),
        Formula::Until(a, b) | Formula::DUntil(_, a, b) => is_positive(a) && is_positive(b),
        _ => false,
    }
}

pub fn alternations(prefix: &[(Quant, &str)]) -> usize {
    prefix.windows(2).filter(|w| w[0].0 != w[1].0).count()
}

pub fn analyze(f: &Formula) -> FormulaStats {
    let (prefix, matrix) = f.prefix();
    let exists_only = prefix.iter().all(|(q, _)| *q == Quant::Exists);
    let forall_only = prefix.iter().all(|(q, _)| *q == Quant::Forall);
    let discounted = f.has_discount();
    let fragment = if !discounted {
        if f.has_weighted_func() {
            Fragment::Prop
        } else {
            Fragment::Boolean
        }
    } else if is_positive(matrix) {
        Fragment::TempPos
    } else if is_positive(&negate_dual(matrix)) {
        Fragment::TempNeg
    } else if exists_only {
        Fragment::TempExistsOnly
    } else if forall_only {
        Fragment::TempForallOnly
    } else {
        Fragment::TempFull
    };
    FormulaStats {
        atom_count: f.atom_count(),
        quantifier_depth: prefix.len(),
        alternation_count: alternations(&prefix),
        discount_depth: f.discount_depth(),
        discount_seqs: f.discounts(),
        fragment,
        exists_only,
        forall_only,
    }
}
