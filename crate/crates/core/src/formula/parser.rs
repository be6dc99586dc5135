use super::{
    atom, big_and, check_discount, check_params, d_globally, d_until, globally, iff, next, not, release, until,
    Discount, Formula, FuncKind,
};
use crate::rational::{parse_rational, ratio, Rational};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("{line}:{col}: quantifier not in prefix position")]
    QuantifierNotPrefix { line: usize, col: usize },
    #[error("{line}:{col}: {msg}")]
    Parameter { line: usize, col: usize, msg: String },
    #[error("variable {0} is bound twice")]
    DuplicateBinder(String),
    #[error("weighted functions cannot be combined with discounted operators")]
    MixedLogic,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    At,
    Bang,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Semi,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, n: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned { tok, line: l0, col: c0 });
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '[' => push(Tok::LBrack, 1, &mut i, &mut col),
            ']' => push(Tok::RBrack, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '@' => push(Tok::At, 1, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                push(Tok::DArrow, 3, &mut i, &mut col)
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && matches!(chars[j], '.' | '/') && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let s: String = chars[start..j].iter().collect();
                push(Tok::Num(s), j - start, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let s: String = chars[start..j].iter().collect();
                push(Tok::Ident(s), j - start, &mut i, &mut col);
            }
            other => return Err(ParseError::Syntax { line, col, msg: format!("unexpected character `{other}`") }),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Default)]
struct Decls {
    low: Vec<String>,
    high: Vec<String>,
    dummy: Option<String>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    decls: Decls,
}

const RESERVED: &[&str] = &["forall", "exists", "true", "false", "X", "F", "G", "U", "R"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn param_err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Parameter { line, col, msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        match self.peek().clone() {
            Tok::Num(s) => {
                let (line, col) = self.here();
                self.bump();
                parse_rational(&s).map_err(|e| ParseError::Syntax { line, col, msg: e.to_string() })
            }
            _ => self.err("expected a rational number"),
        }
    }

    fn declarations(&mut self) -> Result<(), ParseError> {
        loop {
            let kw = match self.peek() {
                Tok::Ident(s) if matches!(s.as_str(), "low" | "high" | "dummy") => s.clone(),
                _ => return Ok(()),
            };
            if !matches!(self.peek_at(1), Tok::Ident(_)) {
                return Ok(());
            }
            self.bump();
            let mut names = vec![self.ident("proposition name")?];
            while *self.peek() == Tok::Comma {
                self.bump();
                names.push(self.ident("proposition name")?);
            }
            self.expect(Tok::Semi, "`;` after declaration")?;
            match kw.as_str() {
                "low" => self.decls.low.extend(names),
                "high" => self.decls.high.extend(names),
                _ => {
                    if names.len() != 1 {
                        return self.err("dummy declares exactly one proposition");
                    }
                    self.decls.dummy = names.pop();
                }
            }
        }
    }

    fn top(&mut self) -> Result<Formula, ParseError> {
        self.declarations()?;
        let mut prefix = Vec::new();
        while self.is_kw("forall") || self.is_kw("exists") {
            let q = self.ident("quantifier")?;
            let v = self.ident("trace variable")?;
            self.expect(Tok::Dot, "`.` after quantified variable")?;
            prefix.push((q, v));
        }
        let body = self.implies()?;
        if *self.peek() != Tok::Eof {
            return self.err("unexpected trailing input");
        }
        Ok(prefix.into_iter().rev().fold(body, |acc, (q, v)| {
            if q == "forall" {
                Formula::Forall(v, Box::new(acc))
            } else {
                Formula::Exists(v, Box::new(acc))
            }
        }))
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.iff()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::Func(FuncKind::Implies, vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.or()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.or()?;
            lhs = iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let first = self.and()?;
        let mut parts = vec![first];
        while *self.peek() == Tok::Bar {
            self.bump();
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Func(FuncKind::Or, parts) })
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let first = self.until()?;
        let mut parts = vec![first];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.until()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Func(FuncKind::And, parts) })
    }

    fn bracket_discount(&mut self) -> Result<Option<Discount>, ParseError> {
        if *self.peek() != Tok::LBrack {
            return Ok(None);
        }
        self.bump();
        let d = self.discount()?;
        self.expect(Tok::RBrack, "`]` after discount")?;
        Ok(Some(d))
    }

    fn discount(&mut self) -> Result<Discount, ParseError> {
        let name = self.ident("discount (exp(..) or harmonic)")?;
        let d = match name.as_str() {
            "harmonic" => Discount::Harmonic,
            "exp" => {
                self.expect(Tok::LParen, "`(`")?;
                let l = self.rational()?;
                self.expect(Tok::RParen, "`)`")?;
                Discount::Exp(l)
            }
            _ => return self.err(format!("unknown discount `{name}`")),
        };
        if let Err(m) = check_discount(&d) {
            return self.param_err(m);
        }
        Ok(d)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.is_kw("U") || self.is_kw("R") {
            let is_u = self.is_kw("U");
            self.bump();
            let d = self.bracket_discount()?;
            let rhs = self.until()?;
            return Ok(match (is_u, d) {
                (true, None) => until(lhs, rhs),
                (false, None) => release(lhs, rhs),
                (true, Some(d)) => d_until(d, lhs, rhs),
                (false, Some(d)) => Formula::DRelease(d, Box::new(lhs), Box::new(rhs)),
            });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(not(self.unary()?))
            }
            Tok::Ident(s) if s == "X" && *self.peek_at(1) != Tok::At => {
                self.bump();
                Ok(next(self.unary()?))
            }
            Tok::Ident(s) if (s == "F" || s == "G") && *self.peek_at(1) != Tok::At => {
                self.bump();
                let d = self.bracket_discount()?;
                let body = self.unary()?;
                Ok(match (s.as_str(), d) {
                    ("F", None) => until(Formula::True, body),
                    ("G", None) => globally(body),
                    ("F", Some(d)) => d_until(d, Formula::True, body),
                    (_, Some(d)) => d_globally(d, body),
                    _ => unreachable!(),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.implies()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) => {
                if s == "forall" || s == "exists" {
                    let (line, col) = self.here();
                    return Err(ParseError::QuantifierNotPrefix { line, col });
                }
                if s == "true" {
                    self.bump();
                    return Ok(Formula::True);
                }
                if s == "false" {
                    self.bump();
                    return Ok(Formula::False);
                }
                if *self.peek_at(1) == Tok::At {
                    self.bump();
                    self.bump();
                    let v = self.ident("trace variable after `@`")?;
                    return Ok(atom(&s, &v));
                }
                if RESERVED.contains(&s.as_str()) {
                    return self.err(format!("unexpected keyword `{s}`"));
                }
                self.call(s)
            }
            _ => self.err("expected a formula"),
        }
    }

    fn name_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.ident("proposition name")?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.ident("proposition name")?);
        }
        Ok(out)
    }

    fn args(&mut self) -> Result<Vec<Formula>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = vec![self.implies()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.implies()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(out)
    }

    fn var_args(&mut self, n: usize) -> Result<Vec<String>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = vec![self.ident("trace variable")?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.ident("trace variable")?);
        }
        self.expect(Tok::RParen, "`)`")?;
        if out.len() != n {
            return self.err(format!("expected {n} trace variables"));
        }
        Ok(out)
    }

    fn call(&mut self, name: String) -> Result<Formula, ParseError> {
        self.bump();
        match name.as_str() {
            "loweq" | "ratio" | "same" => {
                let props = if *self.peek() == Tok::LBrack {
                    self.bump();
                    let l = self.name_list()?;
                    self.expect(Tok::RBrack, "`]`")?;
                    l
                } else if name == "same" {
                    let mut all: BTreeSet<String> = self.decls.low.iter().cloned().collect();
                    all.extend(self.decls.high.iter().cloned());
                    all.into_iter().collect()
                } else {
                    self.decls.low.clone()
                };
                if props.is_empty() {
                    return self.err(format!("{name} needs a `low` declaration or [props]"));
                }
                let vs = self.var_args(2)?;
                let eqs: Vec<Formula> = props.iter().map(|p| iff(atom(p, &vs[0]), atom(p, &vs[1]))).collect();
                Ok(match name.as_str() {
                    "loweq" => big_and(eqs),
                    "same" => globally(big_and(eqs)),
                    _ => {
                        let n = eqs.len() as i64;
                        Formula::Func(FuncKind::Oplus(vec![ratio(1, n); eqs.len()]), eqs)
                    }
                })
            }
            "dummy" => {
                let (lam, highs) = if *self.peek() == Tok::LBrack {
                    self.bump();
                    let l = self.name_list()?;
                    self.expect(Tok::RBrack, "`]`")?;
                    (l[0].clone(), l[1..].to_vec())
                } else {
                    match &self.decls.dummy {
                        Some(d) => (d.clone(), self.decls.high.clone()),
                        None => return self.err("dummy needs a `dummy` declaration or [props]"),
                    }
                };
                let v = self.var_args(1)?.pop().unwrap();
                let mut parts = vec![atom(&lam, &v)];
                for h in highs.iter().filter(|h| **h != lam) {
                    parts.push(not(atom(h, &v)));
                }
                Ok(big_and(parts))
            }
            _ => {
                let params = if *self.peek() == Tok::LBrack {
                    self.bump();
                    let mut ps = vec![self.rational()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        ps.push(self.rational()?);
                    }
                    self.expect(Tok::RBrack, "`]`")?;
                    ps
                } else {
                    Vec::new()
                };
                let args = self.args()?;
                let kind = match (name.as_str(), params.len()) {
                    ("not", 0) => FuncKind::Not,
                    ("or", 0) => FuncKind::Or,
                    ("and", 0) => FuncKind::And,
                    ("implies", 0) => FuncKind::Implies,
                    ("iff", 0) => FuncKind::Iff,
                    ("agree", 0) => FuncKind::Agree,
                    ("oplus", 0) => FuncKind::Oplus(vec![ratio(1, args.len() as i64); args.len()]),
                    ("oplus", _) => FuncKind::Oplus(params),
                    ("scale", 1) => FuncKind::Scale(params[0].clone()),
                    ("thr", 1) | ("threshold", 1) => FuncKind::ThresholdGt(params[0].clone()),
                    _ => return self.err(format!("unknown function `{name}` or bad parameters")),
                };
                if !kind.arity_ok(args.len()) {
                    return self.err(format!("wrong number of arguments for `{name}`"));
                }
                if let Err(m) = check_params(&kind) {
                    return self.param_err(m);
                }
                Ok(Formula::Func(kind, args))
            }
        }
    }
}

/// Parses a closed formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_open(text, &[])
}

/// Parses a formula whose free trace variables must be among `free`.
pub fn parse_formula_open(text: &str, free: &[&str]) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, decls: Decls::default() };
    let f = p.top()?;
    let (prefix, _) = f.prefix();
    let mut seen = BTreeSet::new();
    for (_, v) in &prefix {
        if !seen.insert(v.to_string()) || free.contains(v) {
            return Err(ParseError::DuplicateBinder(v.to_string()));
        }
    }
    if let Some(v) = f.free_vars().into_iter().find(|v| !free.contains(&v.as_str())) {
        return Err(ParseError::Unbound(v));
    }
    if f.has_discount() && f.has_weighted_func() {
        return Err(ParseError::MixedLogic);
    }
    Ok(f)
}
