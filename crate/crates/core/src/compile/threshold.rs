//! Translation of formulas into letter-level nodes.
//!
//! Propositional-quality formulas translate value for value. Temporal-quality
//! formulas translate into Boolean nodes for `value > v` (or `value >= v`);
//! each discounted until is unfolded through `X` while the discount factor
//! can still push the value over the threshold.

use super::tableau::{Ir, Node};
use super::CompileError;
use crate::formula::{Discount, Formula, FuncKind};
use crate::rational::{one, one_minus, zero, Rational};
use num_traits::{Signed, Zero};
use std::collections::HashMap;

/// Resolves `prop@var` to an alphabet index; `None` for propositions the
/// structure does not declare (they read as 0).
pub(crate) struct Atoms<'a> {
    pub vars: &'a [&'a str],
    pub props: &'a [String],
    pub weights: &'a [Rational],
}

impl Atoms<'_> {
    fn lookup(&self, prop: &str, var: &str) -> Result<Option<usize>, CompileError> {
        let comp = self.vars.iter().position(|v| *v == var).ok_or_else(|| CompileError::Unbound(var.to_string()))?;
        let name = format!("{prop}@{}", comp + 1);
        Ok(self.props.iter().position(|p| *p == name))
    }
}

pub(crate) fn prop_nodes(f: &Formula, atoms: &Atoms, ir: &mut Ir) -> Result<usize, CompileError> {
    Ok(match f {
        Formula::True => ir.konst(one()),
        Formula::False => ir.konst(zero()),
        Formula::Atom { prop, var } => match atoms.lookup(prop, var)? {
            Some(i) => ir.add(Node::Leaf { prop: i, table: atoms.weights.to_vec() }),
            None => ir.konst(zero()),
        },
        Formula::Func(kind, args) => {
            let xs = args.iter().map(|a| prop_nodes(a, atoms, ir)).collect::<Result<Vec<_>, _>>()?;
            ir.func(kind.clone(), xs)
        }
        Formula::Next(a) => {
            let x = prop_nodes(a, atoms, ir)?;
            ir.next(x)
        }
        Formula::Until(a, b) => {
            let (x, y) = (prop_nodes(a, atoms, ir)?, prop_nodes(b, atoms, ir)?);
            ir.until(x, y)
        }
        Formula::Release(a, b) => {
            let (x, y) = (prop_nodes(a, atoms, ir)?, prop_nodes(b, atoms, ir)?);
            let (nx, ny) = (ir.not(x), ir.not(y));
            let u = ir.until(nx, ny);
            ir.not(u)
        }
        Formula::DUntil(..) | Formula::DRelease(..) => return Err(CompileError::NotProp),
        Formula::Exists(..) | Formula::Forall(..) => return Err(CompileError::NotQuantifierFree),
    })
}

/// Builder for the Boolean node of `value ⋈ v`, with `⋈` being `>` when
/// `strict` and `>=` otherwise.
pub(crate) struct Thresholds<'a> {
    pub atoms: Atoms<'a>,
    pub ir: Ir,
    /// extra unfolding steps past the necessary horizon
    pub slack: usize,
    memo: HashMap<(usize, bool, Rational), (usize, usize)>,
}

fn holds(x: &Rational, strict: bool, v: &Rational) -> bool {
    if strict {
        x > v
    } else {
        x >= v
    }
}

impl<'a> Thresholds<'a> {
    pub fn new(atoms: Atoms<'a>, slack: usize) -> Self {
        Thresholds { atoms, ir: Ir::default(), slack, memo: HashMap::new() }
    }

    /// Node for `value(f) ⋈ v` (or of `value(¬f) ⋈ v` when `neg`), with the
    /// largest unfolding depth used below it.
    pub fn lit(&mut self, f: &Formula, neg: bool, strict: bool, v: &Rational) -> Result<(usize, usize), CompileError> {
        if neg {
            let (x, h) = self.thr(f, !strict, &one_minus(v))?;
            Ok((self.ir.not(x), h))
        } else {
            self.thr(f, strict, v)
        }
    }

    fn thr(&mut self, f: &Formula, strict: bool, v: &Rational) -> Result<(usize, usize), CompileError> {
        if holds(&zero(), strict, v) {
            return Ok((self.ir.boolean(true), 0));
        }
        if !holds(&one(), strict, v) {
            return Ok((self.ir.boolean(false), 0));
        }
        let key = (f as *const Formula as usize, strict, v.clone());
        if let Some(&r) = self.memo.get(&key) {
            return Ok(r);
        }
        let r = self.thr_uncached(f, strict, v)?;
        self.memo.insert(key, r);
        Ok(r)
    }

    fn thr_uncached(&mut self, f: &Formula, strict: bool, v: &Rational) -> Result<(usize, usize), CompileError> {
        Ok(match f {
            Formula::True => (self.ir.boolean(holds(&one(), strict, v)), 0),
            Formula::False => (self.ir.boolean(holds(&zero(), strict, v)), 0),
            Formula::Atom { prop, var } => match self.atoms.lookup(prop, var)? {
                Some(i) => {
                    let table =
                        self.atoms.weights.iter().map(|w| if holds(w, strict, v) { one() } else { zero() }).collect();
                    (self.ir.add(Node::Leaf { prop: i, table }), 0)
                }
                None => (self.ir.boolean(holds(&zero(), strict, v)), 0),
            },
            Formula::Func(kind, args) => match kind {
                FuncKind::Not => self.lit(&args[0], true, strict, v)?,
                FuncKind::Or | FuncKind::And => {
                    let mut xs = Vec::new();
                    let mut h = 0;
                    for a in args {
                        let (x, ha) = self.thr(a, strict, v)?;
                        xs.push(x);
                        h = h.max(ha);
                    }
                    (self.ir.func(kind.clone(), xs), h)
                }
                FuncKind::Implies => self.implication(&args[0], &args[1], strict, v)?,
                FuncKind::Iff => {
                    let (x, hx) = self.implication(&args[0], &args[1], strict, v)?;
                    let (y, hy) = self.implication(&args[1], &args[0], strict, v)?;
                    (self.ir.and(x, y), hx.max(hy))
                }
                _ => return Err(CompileError::NotTemp),
            },
            Formula::Next(a) => {
                let (x, h) = self.thr(a, strict, v)?;
                (self.ir.next(x), h)
            }
            Formula::Until(a, b) => {
                let (x, hx) = self.thr(a, strict, v)?;
                let (y, hy) = self.thr(b, strict, v)?;
                (self.ir.until(x, y), hx.max(hy))
            }
            Formula::Release(a, b) => {
                // a R b = ¬(¬a U ¬b)
                let (x, hx) = self.thr(a, strict, v)?;
                let (y, hy) = self.thr(b, strict, v)?;
                let (nx, ny) = (self.ir.not(x), self.ir.not(y));
                let u = self.ir.until(nx, ny);
                (self.ir.not(u), hx.max(hy))
            }
            Formula::DUntil(eta, a, b) => self.discounted(eta, a, b, false, strict, v)?,
            Formula::DRelease(eta, a, b) => {
                let (x, h) = self.discounted(eta, a, b, true, !strict, &one_minus(v))?;
                (self.ir.not(x), h)
            }
            Formula::Exists(..) | Formula::Forall(..) => return Err(CompileError::NotQuantifierFree),
        })
    }

    /// `max(1 - a, b) ⋈ v`.
    fn implication(
        &mut self,
        a: &Formula,
        b: &Formula,
        strict: bool,
        v: &Rational,
    ) -> Result<(usize, usize), CompileError> {
        let (x, hx) = self.lit(a, true, strict, v)?;
        let (y, hy) = self.thr(b, strict, v)?;
        Ok((self.ir.or(x, y), hx.max(hy)))
    }

    /// `a U_η b ⋈ v`, with both operands negated when `neg`.
    fn discounted(
        &mut self,
        eta: &Discount,
        a: &Formula,
        b: &Formula,
        neg: bool,
        strict: bool,
        v: &Rational,
    ) -> Result<(usize, usize), CompileError> {
        if holds(&zero(), strict, v) {
            return Ok((self.ir.boolean(true), 0));
        }
        if v.is_zero() {
            // η_i > 0, so the scaling does not matter for `> 0`
            let (x, hx) = self.lit(a, neg, true, v)?;
            let (y, hy) = self.lit(b, neg, true, v)?;
            return Ok((self.ir.until(x, y), hx.max(hy)));
        }
        debug_assert!(v.is_positive());
        let horizon = if strict { eta.first_at_most(v) } else { eta.first_below(v) };
        let mut acc = self.ir.boolean(false);
        let mut inner = 0;
        for i in (0..horizon + self.slack).rev() {
            let w = v / eta.eta(i);
            let (x, hx) = self.lit(a, neg, strict, &w)?;
            let (y, hy) = self.lit(b, neg, strict, &w)?;
            inner = inner.max(hx).max(hy);
            let nxt = self.ir.next(acc);
            let cont = self.ir.and(x, nxt);
            acc = self.ir.or(y, cont);
        }
        Ok((acc, horizon + inner))
    }
}
