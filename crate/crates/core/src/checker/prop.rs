use super::{require_closed, CheckError, Method, Options, Query, Verdict};
use crate::compile::{candidate_values, CompileError, Eliminator};
use crate::formula::Formula;
use crate::kripke::WeightedKripke;
use crate::rational::{fmt_rational, Rational};

fn check_prop(psi: &Formula) -> Result<(), CheckError> {
    require_closed(psi)?;
    if psi.has_discount() {
        return Err(CompileError::NotProp.into());
    }
    Ok(())
}

/// Whether `value(psi) >= c` (`yes`) or `value(psi) < c` (`!yes`).
fn side(psi: &Formula, k: &WeightedKripke, c: &Rational, yes: bool, opts: &Options) -> Result<bool, CheckError> {
    let mut e = Eliminator::prop(psi, k, &[], c.clone(), opts.state_cap)?;
    Ok(!e.automaton(0, yes)?.is_empty())
}

/// Exact threshold check for a closed propositional-quality formula.
pub fn mc_prop(psi: &Formula, k: &WeightedKripke, query: &Query, opts: &Options) -> Result<Verdict, CheckError> {
    check_prop(psi)?;
    query.validate()?;
    let vals = candidate_values(psi, k)?;
    let holds = match query {
        Query::Ge(v) => match vals.iter().find(|x| *x >= v) {
            None => false,
            Some(c) => !side(psi, k, c, false, opts)?,
        },
        Query::Le(v) => match vals.iter().find(|x| *x > v) {
            None => true,
            Some(c) => !side(psi, k, c, true, opts)?,
        },
    };
    Ok(Verdict::new(holds, Method::PropExact))
}

/// The exact value of a closed propositional-quality formula.
pub fn mc_prop_value(psi: &Formula, k: &WeightedKripke, opts: &Options) -> Result<Rational, CheckError> {
    check_prop(psi)?;
    let vals = candidate_values(psi, k)?;
    let vs = vals.as_slice();
    let mut found = None;
    for c in vs.iter().rev() {
        if side(psi, k, c, true, opts)? {
            found = Some(c.clone());
            break;
        }
    }
    let value = found.ok_or_else(|| CheckError::Soundness("no candidate value is realized".into()))?;
    if cfg!(debug_assertions) {
        // each candidate c is realized iff value >= c and not value >= next(c)
        let mut realized = Vec::new();
        for (i, c) in vs.iter().enumerate() {
            let at_least = side(psi, k, c, true, opts)?;
            let below_next = match vs.get(i + 1) {
                Some(n) => side(psi, k, n, false, opts)?,
                None => true,
            };
            if at_least && below_next {
                realized.push(fmt_rational(c));
            }
        }
        if realized != [fmt_rational(&value)] {
            return Err(CheckError::Soundness(format!(
                "candidates realized: [{}], descending search gave {}",
                realized.join(", "),
                fmt_rational(&value)
            )));
        }
    }
    Ok(value)
}
