//! Text formats: polynomial expressions and sectioned documents.
//!
//! Expressions use `+ - * ^`, parentheses, integer literals and rational
//! literals `a/b`. Multiplication is always explicit. Beyond plain
//! variables an expression may contain `$name` parameters and calls
//! `f(arg, ...)`, which are resolved by the evaluation environment.
//!
//! Documents are line based:
//!
//! ```text
//! kind = presentation
//! [vars]
//! k1:1, k2:2
//! [relations]
//! k1^2 - k2
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::groebner::Ideal;
use crate::invariants::{GroupAction, SignedPermutation};
use crate::poly::{Context, Polynomial, Rational, VarTable};
use crate::ringpres::{GeneratorPair, Morphism, Presentation};

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    pub(crate) fn error(self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    pub(crate) fn shift(self, chars: usize) -> Pos {
        Pos {
            line: self.line,
            column: self.column + chars,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Param(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(text: &str, start: Pos) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = start.shift(i);
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[s..i].iter().collect();
            out.push((Tok::Int(digits.parse().unwrap()), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let s = i;
            if c == '$' {
                i += 1;
            }
            let body = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[body..i].iter().collect();
            if name.is_empty() {
                return Err(pos.error("expected a parameter name after `$`"));
            }
            if i < chars.len() && !chars[i].is_ascii() {
                return Err(start.shift(i).error(format!("non-ASCII character `{}` in identifier", chars[i])));
            }
            out.push((if s == body { Tok::Ident(name) } else { Tok::Param(name) }, pos));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => return Err(pos.error(format!("unexpected character `{c}`"))),
        };
        out.push((tok, pos));
        i += 1;
    }
    out.push((Tok::End, start.shift(chars.len())));
    Ok(out)
}

/// Parsed expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Name(String, Pos),
    Param(String, Pos),
    Call(String, Vec<Expr>, Pos),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.pos().error(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    return Err(self
                        .pos()
                        .error("division is only allowed inside a rational literal a/b"))
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump().0 {
            Tok::Int(n) => {
                let e = n
                    .to_u32()
                    .filter(|&e| e > 0)
                    .ok_or_else(|| pos.error("exponent must be a positive integer"))?;
                Ok(Expr::Pow(Box::new(base), e))
            }
            _ => Err(pos.error("exponent must be a positive integer literal")),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Int(n) => {
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump().0 {
                        Tok::Int(d) if !d.is_zero() => Ok(Expr::Num(Rational::new(n, d))),
                        Tok::Int(_) => Err(dpos.error("zero denominator")),
                        _ => Err(dpos.error("division is only allowed inside a rational literal a/b")),
                    }
                } else {
                    Ok(Expr::Num(Rational::from_integer(n)))
                }
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if *self.peek() == Tok::Comma {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "`)` closing the argument list")?;
                    Ok(Expr::Call(name, args, pos))
                } else {
                    Ok(Expr::Name(name, pos))
                }
            }
            Tok::Param(name) => Ok(Expr::Param(name, pos)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::End => Err(pos.error("unexpected end of expression")),
            other => Err(pos.error(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse an expression whose first character sits at `start`.
pub fn parse_expr_at(text: &str, start: Pos) -> Result<Expr> {
    let toks = lex(text, start)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::Ident(_) | Tok::Int(_) | Tok::LParen | Tok::Param(_) => {
            Err(p.pos().error("missing operator (implicit multiplication is not allowed)"))
        }
        _ => Err(p.pos().error("unexpected trailing input")),
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    parse_expr_at(text, Pos { line: 1, column: 1 })
}

/// Name resolution for [`Expr::eval`].
pub trait Env {
    /// Table that constants and results live in.
    fn context(&self) -> &Context;
    fn name(&self, name: &str, pos: Pos) -> Result<Polynomial>;
    fn param(&self, name: &str, pos: Pos) -> Result<Rational> {
        Err(pos.error(format!("unknown parameter `${name}`")))
    }
    fn call(&self, name: &str, _args: &[Expr], pos: Pos) -> Result<Polynomial> {
        Err(pos.error(format!("unknown function `{name}`")))
    }
}

/// Plain variables of a table.
pub struct VarEnv<'a>(pub &'a Context);

impl Env for VarEnv<'_> {
    fn context(&self) -> &Context {
        self.0
    }

    fn name(&self, name: &str, pos: Pos) -> Result<Polynomial> {
        Polynomial::var(self.0, name).map_err(|_| pos.error(format!("unknown identifier `{name}`")))
    }
}

impl Expr {
    pub fn eval(&self, env: &dyn Env) -> Result<Polynomial> {
        Ok(match self {
            Expr::Num(c) => Polynomial::constant(env.context(), c.clone()),
            Expr::Name(n, pos) => env.name(n, *pos)?,
            Expr::Param(n, pos) => Polynomial::constant(env.context(), env.param(n, *pos)?),
            Expr::Call(f, args, pos) => env.call(f, args, *pos)?,
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Add(a, b) => a.eval(env)?.checked_add(&b.eval(env)?)?,
            Expr::Sub(a, b) => a.eval(env)?.checked_sub(&b.eval(env)?)?,
            Expr::Mul(a, b) => a.eval(env)?.checked_mul(&b.eval(env)?)?,
            Expr::Pow(a, e) => a.eval(env)?.pow(*e),
        })
    }

    /// Identifiers occurring outside call heads, in first-occurrence order.
    pub fn names(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Num(_) | Expr::Param(..) => {}
                Expr::Name(n, _) => {
                    if !out.contains(n) {
                        out.push(n.clone())
                    }
                }
                Expr::Call(_, args, _) => args.iter().for_each(|a| walk(a, out)),
                Expr::Neg(a) | Expr::Pow(a, _) => walk(a, out),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                    walk(a, out);
                    walk(b, out)
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

/// Parse a polynomial over the variables of `ctx`.
pub fn parse_polynomial(text: &str, ctx: &Context) -> Result<Polynomial> {
    parse_expr(text)?.eval(&VarEnv(ctx))
}

/// One line of a section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: Option<String>,
    pub value: String,
    /// Position of the first character of `value`.
    pub pos: Pos,
}

impl Entry {
    pub fn expr(&self) -> Result<Expr> {
        parse_expr_at(&self.value, self.pos)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub pos: Pos,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key.as_deref() == Some(key))
    }

    pub fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key)
            .ok_or_else(|| self.pos.error(format!("section [{}] lacks `{key}`", self.name)))
    }

    /// Key-value entries in order; a bare line is an error.
    pub fn keyed(&self) -> Result<Vec<(&str, &Entry)>> {
        self.entries
            .iter()
            .map(|e| match &e.key {
                Some(k) => Ok((k.as_str(), e)),
                None => Err(e.pos.error(format!("expected `name = value` in [{}]", self.name))),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocKind {
    Polynomial,
    Ideal,
    Presentation,
    Morphism,
    Action,
    Stratum,
    Claims,
    Square,
}

impl DocKind {
    pub fn from_extension(ext: &str) -> Option<Self> {
        Some(match ext {
            "poly" => DocKind::Polynomial,
            "ideal" => DocKind::Ideal,
            "pres" => DocKind::Presentation,
            "morph" => DocKind::Morphism,
            "action" => DocKind::Action,
            "stratum" => DocKind::Stratum,
            "claims" => DocKind::Claims,
            "square" => DocKind::Square,
            _ => return None,
        })
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            DocKind::Polynomial => &["vars", "polynomial"],
            DocKind::Ideal => &["vars"],
            DocKind::Presentation => &["vars"],
            DocKind::Morphism => &["source", "target", "images"],
            DocKind::Action => &["vars", "group"],
            DocKind::Stratum => &["stratum", "psi", "group", "classes", "top_chern"],
            DocKind::Claims => &["claim"],
            DocKind::Square => &["closed", "open", "restriction", "pairs"],
        }
    }
}

impl fmt::Display for DocKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocKind::Polynomial => "polynomial",
            DocKind::Ideal => "ideal",
            DocKind::Presentation => "presentation",
            DocKind::Morphism => "morphism",
            DocKind::Action => "action",
            DocKind::Stratum => "stratum",
            DocKind::Claims => "claims",
            DocKind::Square => "square",
        })
    }
}

impl std::str::FromStr for DocKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "polynomial" => DocKind::Polynomial,
            "ideal" => DocKind::Ideal,
            "presentation" => DocKind::Presentation,
            "morphism" => DocKind::Morphism,
            "action" => DocKind::Action,
            "stratum" => DocKind::Stratum,
            "claims" => DocKind::Claims,
            "square" => DocKind::Square,
            _ => return Err(Error::invalid(format!("unknown document kind `{s}`"))),
        })
    }
}

/// A parsed document: its kind and its sections in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub kind: DocKind,
    pub sections: Vec<Section>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Parse a document; the kind comes from a `kind = ...` line or, failing
/// that, from `hint`, or else from the sections present.
pub fn parse_document_with_hint(text: &str, hint: Option<DocKind>) -> Result<Document> {
    let mut kind: Option<DocKind> = None;
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap();
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.chars().take_while(|c| c.is_whitespace()).count();
        let pos = Pos {
            line: line_no,
            column: lead + 1,
        };
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') {
                return Err(pos.error("unterminated section header"));
            }
            let name = trimmed[1..trimmed.len() - 1].trim().to_string();
            if !is_ident(&name) {
                return Err(pos.error(format!("bad section name `{name}`")));
            }
            if name != "claim" && sections.iter().any(|s| s.name == name) {
                return Err(pos.error(format!("duplicate section [{name}]")));
            }
            sections.push(Section {
                name,
                pos,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value, vcol) = match trimmed.find('=') {
            Some(eq) if is_ident(trimmed[..eq].trim()) => {
                let after = &trimmed[eq + 1..];
                let skip = after.chars().take_while(|c| c.is_whitespace()).count();
                let vcol = lead + trimmed[..eq + 1].chars().count() + skip + 1;
                (
                    Some(trimmed[..eq].trim().to_string()),
                    after.trim().to_string(),
                    vcol,
                )
            }
            _ => (None, trimmed.to_string(), lead + 1),
        };
        let vpos = Pos {
            line: line_no,
            column: vcol,
        };
        match sections.last_mut() {
            None => {
                if key.as_deref() != Some("kind") {
                    return Err(pos.error("expected `kind = ...` or a section header"));
                }
                if kind.is_some() {
                    return Err(pos.error("duplicate key `kind`"));
                }
                kind = Some(value.parse().map_err(|e: Error| vpos.error(e.to_string()))?);
            }
            Some(sec) => {
                if let Some(k) = &key {
                    if sec.get(k).is_some() {
                        return Err(pos.error(format!("duplicate key `{k}` in [{}]", sec.name)));
                    }
                }
                sec.entries.push(Entry {
                    key,
                    value,
                    pos: vpos,
                });
            }
        }
    }
    let has = |n: &str| sections.iter().any(|s| s.name == n);
    let kind = kind.or(hint).or_else(|| {
        [
            ("claim", DocKind::Claims),
            ("pairs", DocKind::Square),
            ("psi", DocKind::Stratum),
            ("images", DocKind::Morphism),
            ("group", DocKind::Action),
            ("polynomial", DocKind::Polynomial),
            ("generators", DocKind::Ideal),
            ("relations", DocKind::Presentation),
        ]
        .into_iter()
        .find(|(n, _)| has(n))
        .map(|(_, k)| k)
    });
    let kind = kind.ok_or_else(|| Pos { line: 1, column: 1 }.error("cannot tell the document kind"))?;
    for req in kind.required() {
        if !has(req) {
            let end = Pos {
                line: text.lines().count().max(1),
                column: 1,
            };
            return Err(end.error(format!("{kind} document lacks section [{req}]")));
        }
    }
    Ok(Document { kind, sections })
}

pub fn parse_document(text: &str) -> Result<Document> {
    parse_document_with_hint(text, None)
}

/// Parse a comma-separated variable list with optional `:weight` suffixes.
pub fn parse_var_list(entries: &[&Entry]) -> Result<Vec<(String, u32, Pos)>> {
    let mut out = Vec::new();
    for e in entries {
        let text = match &e.key {
            Some(k) => format!("{k} = {}", e.value),
            None => e.value.clone(),
        };
        let mut col = 0;
        for item in text.split(',') {
            let pos = e.pos.shift(col + item.chars().take_while(|c| c.is_whitespace()).count());
            col += item.chars().count() + 1;
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (name, weight) = match item.split_once(':') {
                Some((n, w)) => {
                    let w: u32 = w
                        .trim()
                        .parse()
                        .ok()
                        .filter(|&w| w >= 1)
                        .ok_or_else(|| pos.error(format!("bad weight in `{item}`")))?;
                    (n.trim(), w)
                }
                None => (item, 1),
            };
            if !is_ident(name) || name.contains('.') {
                return Err(pos.error(format!("bad variable name `{name}`")));
            }
            out.push((name.to_string(), weight, pos));
        }
    }
    Ok(out)
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Section> {
        self.section(name).ok_or_else(|| {
            Pos { line: 1, column: 1 }.error(format!("missing section [{name}]"))
        })
    }

    pub fn sections_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.name == name)
    }

    fn expect_kind(&self, kind: DocKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::invalid(format!("expected a {kind} document, got {}", self.kind)));
        }
        Ok(())
    }

    /// Variable table from `section`, with weights overridden by `weights_section`.
    pub fn var_table(&self, section: &str, weights_section: Option<&str>) -> Result<Context> {
        let sec = self.require(section)?;
        let mut vars = parse_var_list(&sec.entries.iter().collect::<Vec<_>>())?;
        if let Some(ws) = weights_section.and_then(|w| self.section(w)) {
            for (k, e) in ws.keyed()? {
                let w: u32 = e
                    .value
                    .parse()
                    .ok()
                    .filter(|&w| w >= 1)
                    .ok_or_else(|| e.pos.error(format!("bad weight `{}`", e.value)))?;
                let slot = vars
                    .iter_mut()
                    .find(|v| v.0 == k)
                    .ok_or_else(|| e.pos.error(format!("weight for undeclared variable `{k}`")))?;
                slot.1 = w;
            }
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|u| u.0 == v.0) {
                return Err(v.2.error(format!("duplicate variable `{}`", v.0)));
            }
        }
        Ok(VarTable::with_weights(vars.into_iter().map(|(n, w, _)| (n, w)))?.shared())
    }

    /// One polynomial per bare line of `section` (absent section: none).
    pub fn polynomials(&self, section: &str, ctx: &Context) -> Result<Vec<Polynomial>> {
        match self.section(section) {
            None => Ok(Vec::new()),
            Some(sec) => sec
                .entries
                .iter()
                .map(|e| {
                    if e.key.is_some() {
                        return Err(e.pos.error("expected a polynomial, not `name = value`"));
                    }
                    e.expr()?.eval(&VarEnv(ctx))
                })
                .collect(),
        }
    }

    pub fn to_polynomial(&self) -> Result<Polynomial> {
        self.expect_kind(DocKind::Polynomial)?;
        let ctx = self.var_table("vars", Some("weights"))?;
        let sec = self.require("polynomial")?;
        let polys = self.polynomials("polynomial", &ctx)?;
        match polys.len() {
            1 => Ok(polys.into_iter().next().unwrap()),
            n => Err(sec.pos.error(format!("expected one polynomial, found {n}"))),
        }
    }

    pub fn to_ideal(&self) -> Result<Ideal> {
        self.expect_kind(DocKind::Ideal)?;
        let ctx = self.var_table("vars", Some("weights"))?;
        Ideal::new(&ctx, self.polynomials("generators", &ctx)?)
    }

    pub fn to_presentation(&self) -> Result<Presentation> {
        self.expect_kind(DocKind::Presentation)?;
        let ctx = self.var_table("vars", Some("weights"))?;
        let label = self
            .section("presentation")
            .and_then(|s| s.get("label"))
            .map(|e| e.value.clone())
            .unwrap_or_else(|| "P".into());
        Presentation::new(label, &ctx, self.polynomials("relations", &ctx)?)
    }

    pub fn to_morphism(&self) -> Result<Morphism> {
        self.expect_kind(DocKind::Morphism)?;
        let sctx = self.var_table("source", None)?;
        let tctx = self.var_table("target", None)?;
        let source = Presentation::new("source", &sctx, self.polynomials("source_relations", &sctx)?)?;
        let target = Presentation::new("target", &tctx, self.polynomials("target_relations", &tctx)?)?;
        let sec = self.require("images")?;
        let mut images: BTreeMap<String, Polynomial> = BTreeMap::new();
        for (k, e) in sec.keyed()? {
            if !sctx.contains(k) {
                return Err(e.pos.error(format!("image for unknown source generator `{k}`")));
            }
            images.insert(k.to_string(), e.expr()?.eval(&VarEnv(&tctx))?);
        }
        let imgs = sctx
            .names()
            .iter()
            .map(|n| {
                images
                    .remove(n)
                    .ok_or_else(|| sec.pos.error(format!("no image for `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Morphism::new(&source, &target, imgs)
    }

    pub fn to_action(&self) -> Result<GroupAction> {
        self.expect_kind(DocKind::Action)?;
        let ctx = self.var_table("vars", None)?;
        parse_group(self.require("group")?, &ctx)
    }
}

/// Variables of a table plus named shorthands.
struct DefsEnv<'a> {
    ctx: &'a Context,
    defs: BTreeMap<String, Polynomial>,
}

impl Env for DefsEnv<'_> {
    fn context(&self) -> &Context {
        self.ctx
    }

    fn name(&self, name: &str, pos: Pos) -> Result<Polynomial> {
        match self.defs.get(name) {
            Some(p) => Ok(p.clone()),
            None => VarEnv(self.ctx).name(name, pos),
        }
    }
}

/// A cospan `A → D ← C` with `D = A/(top)` and candidate generator pairs.
#[derive(Clone, Debug)]
pub struct SquareSpec {
    pub p: Morphism,
    pub q: Morphism,
    pub pairs: Vec<GeneratorPair>,
}

impl Document {
    /// Sections: `[closed]`, `[closed_relations]`, `[defs]` (shorthands in the
    /// closed variables), `[top]` (`c = ...`, may be absent), `[open]`,
    /// `[open_relations]`, `[restriction]` (`open_var = closed expr`) and
    /// `[pairs]` (`name = closed | open`).
    pub fn to_square(&self) -> Result<SquareSpec> {
        self.expect_kind(DocKind::Square)?;
        let a_ctx = self.var_table("closed", None)?;
        let c_ctx = self.var_table("open", None)?;
        let mut env = DefsEnv {
            ctx: &a_ctx,
            defs: BTreeMap::new(),
        };
        if let Some(sec) = self.section("defs") {
            for (k, e) in sec.keyed()? {
                let v = e.expr()?.eval(&env)?;
                env.defs.insert(k.to_string(), v);
            }
        }
        let a = Presentation::new("A", &a_ctx, self.polynomials("closed_relations", &a_ctx)?)?;
        let c = Presentation::new("C", &c_ctx, self.polynomials("open_relations", &c_ctx)?)?;
        let mut top = Vec::new();
        if let Some(sec) = self.section("top") {
            for (_, e) in sec.keyed()? {
                top.push(e.expr()?.eval(&env)?);
            }
        }
        let d = a.quotient("D", &top)?;
        let sec = self.require("restriction")?;
        let mut res: BTreeMap<String, Polynomial> = BTreeMap::new();
        for (k, e) in sec.keyed()? {
            if !c_ctx.contains(k) {
                return Err(e.pos.error(format!("restriction of unknown open generator `{k}`")));
            }
            res.insert(k.to_string(), e.expr()?.eval(&env)?);
        }
        let images = c_ctx
            .names()
            .iter()
            .map(|n| res.remove(n).ok_or_else(|| sec.pos.error(format!("no restriction for `{n}`"))))
            .collect::<Result<Vec<_>>>()?;
        let p = Morphism::new(&a, &d, (0..a_ctx.len()).map(|i| Polynomial::var_at(&a_ctx, i)).collect())?;
        let q = Morphism::new(&c, &d, images)?;
        let mut pairs = Vec::new();
        for (k, e) in self.require("pairs")?.keyed()? {
            let (closed, open) = e
                .value
                .split_once('|')
                .ok_or_else(|| e.pos.error("expected `closed | open`"))?;
            let lead = closed.chars().take_while(|c| c.is_whitespace()).count();
            let closed_p = parse_expr_at(closed.trim(), e.pos.shift(lead))?.eval(&env)?;
            let off = closed.chars().count() + 1 + open.chars().take_while(|c| c.is_whitespace()).count();
            let open_p = parse_expr_at(open.trim(), e.pos.shift(off))?.eval(&VarEnv(&c_ctx))?;
            pairs.push(GeneratorPair::new(k, closed_p, open_p));
        }
        Ok(SquareSpec { p, q, pairs })
    }
}

/// Parse one group element line `label: a -> b, b -> -a`; unlisted
/// variables are fixed.
pub fn parse_signed_permutation(entry: &Entry, ctx: &Context) -> Result<SignedPermutation> {
    let text = &entry.value;
    let (body, offset) = match text.find(':') {
        Some(i) => (&text[i + 1..], text[..i + 1].chars().count()),
        None => (text.as_str(), 0),
    };
    let n = ctx.len();
    let mut images: Vec<Option<(usize, bool)>> = vec![None; n];
    let mut col = offset;
    for item in body.split(',') {
        let pos = entry.pos.shift(col + item.chars().take_while(|c| c.is_whitespace()).count());
        col += item.chars().count() + 1;
        let (from, to) = item
            .split_once("->")
            .ok_or_else(|| pos.error("expected `var -> [-]var`"))?;
        let from = from.trim();
        let to = to.trim();
        let (neg, to) = match to.strip_prefix('-') {
            Some(rest) => (true, rest.trim()),
            None => (false, to),
        };
        let i = ctx
            .index_of(from)
            .ok_or_else(|| pos.error(format!("unknown variable `{from}`")))?;
        let j = ctx
            .index_of(to)
            .ok_or_else(|| pos.error(format!("unknown variable `{to}`")))?;
        if images[i].is_some() {
            return Err(pos.error(format!("`{from}` mapped twice")));
        }
        images[i] = Some((j, neg));
    }
    let full = images
        .into_iter()
        .enumerate()
        .map(|(i, im)| im.unwrap_or((i, false)))
        .collect();
    SignedPermutation::new(full).map_err(|e| entry.pos.error(e.to_string()))
}

/// Group generated by the element lines of a section.
pub fn parse_group(sec: &Section, ctx: &Context) -> Result<GroupAction> {
    let gens = sec
        .entries
        .iter()
        .map(|e| parse_signed_permutation(e, ctx))
        .collect::<Result<Vec<_>>>()?;
    GroupAction::generated_by(ctx, &gens)
}

fn print_vars(ctx: &VarTable) -> String {
    ctx.names()
        .iter()
        .zip(ctx.weights())
        .map(|(n, w)| format!("{n}:{w}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical text of a polynomial.
pub fn print_polynomial(p: &Polynomial) -> String {
    p.to_string()
}

pub fn print_polynomial_document(p: &Polynomial) -> String {
    format!(
        "kind = polynomial\n[vars]\n{}\n[polynomial]\n{p}\n",
        print_vars(p.context())
    )
}

pub fn print_ideal(i: &Ideal) -> String {
    let mut s = format!("kind = ideal\n[vars]\n{}\n[generators]\n", print_vars(i.context()));
    for g in i.generators() {
        s.push_str(&format!("{g}\n"));
    }
    s
}

pub fn print_presentation(p: &Presentation) -> String {
    let mut s = format!(
        "kind = presentation\n[presentation]\nlabel = {}\n[vars]\n{}\n[relations]\n",
        p.label(),
        print_vars(p.context())
    );
    for g in p.relations().generators() {
        s.push_str(&format!("{g}\n"));
    }
    s
}

pub fn print_morphism(m: &Morphism) -> String {
    let mut s = format!(
        "kind = morphism\n[source]\n{}\n[source_relations]\n",
        print_vars(m.source().context())
    );
    for g in m.source().relations().generators() {
        s.push_str(&format!("{g}\n"));
    }
    s.push_str(&format!("[target]\n{}\n[target_relations]\n", print_vars(m.target().context())));
    for g in m.target().relations().generators() {
        s.push_str(&format!("{g}\n"));
    }
    s.push_str("[images]\n");
    for (n, img) in m.source().context().names().iter().zip(m.images()) {
        s.push_str(&format!("{n} = {img}\n"));
    }
    s
}

/// Helper for doc tests and callers that want a one-off table.
pub fn table(vars: &str) -> Result<Context> {
    let e = Entry {
        key: None,
        value: vars.to_string(),
        pos: Pos { line: 1, column: 1 },
    };
    let vars = parse_var_list(&[&e])?;
    Ok(VarTable::with_weights(vars.into_iter().map(|(n, w, _)| (n, w)))?.shared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    #[test]
    fn parses_paper_polynomials() {
        let u = table("u1, u2, u3:2, u4:2, u5:2").unwrap();
        let p = parse_polynomial("2*u3*u4 + 2*u1*u2*u5 - u2^2*u3 - u1^2*u4 - 2*u5^2", &u).unwrap();
        assert_eq!(p.num_terms(), 5);
        let t = table("t1, t2, r_psi").unwrap();
        assert!(parse_polynomial("0", &t).unwrap().is_zero());
        let eta = parse_polynomial("1/2*(t1 - t2)*(2*r_psi - t1 + t2)", &t).unwrap();
        let expect = parse_polynomial("t1*r_psi - t2*r_psi - 1/2*t1^2 + t1*t2 - 1/2*t2^2", &t).unwrap();
        assert_eq!(eta, expect);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let x = table("x, y").unwrap();
        let p = parse_polynomial("-x^2 + 2*x*y^2", &x).unwrap();
        assert_eq!(p.to_string(), "2*x*y^2 - x^2");
        let q = parse_polynomial("-(x + y)*2", &x).unwrap();
        assert_eq!(q.to_string(), "-2*x - 2*y");
        assert_eq!(parse_polynomial("2/4*x", &x).unwrap(), Polynomial::var(&x, "x").unwrap().scale(&ratio(1, 2)));
    }

    #[test]
    fn diagnostics() {
        let x = table("x, y").unwrap();
        let err = |s: &str| parse_polynomial(s, &x).unwrap_err();
        assert_eq!(
            err("x + z"),
            Error::Parse { line: 1, column: 5, message: "unknown identifier `z`".into() }
        );
        assert!(matches!(err("2x"), Error::Parse { column: 2, .. }));
        assert!(matches!(err("x/y"), Error::Parse { column: 2, .. }));
        assert!(matches!(err("x^0"), Error::Parse { .. }));
        assert!(matches!(err("x^y"), Error::Parse { .. }));
        assert!(matches!(err("(x + y"), Error::Parse { .. }));
        assert!(matches!(err("x + ÿ"), Error::Parse { .. }));
        assert!(matches!(err("1/0"), Error::Parse { .. }));
    }

    #[test]
    fn documents() {
        let text = "kind = ideal\n[vars]\nt1, t2\n[generators]\nt1 + t2\nt1^2 + t2^2\n";
        let doc = parse_document(text).unwrap();
        let i = doc.to_ideal().unwrap();
        assert_eq!(i.generators().len(), 2);
        let empty = parse_document("kind = ideal\n[vars]\nx\n").unwrap().to_ideal().unwrap();
        assert!(empty.generators().is_empty());

        let err = parse_document("kind = presentation\n[vars]\nx\n[vars]\ny\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
        let err = parse_document("[images]\na = 1\na = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse_document("kind = morphism\n[source]\nx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn morphism_document() {
        let text = "kind = morphism\n[source]\nk2:2\n[target]\nk1:1, k2:2\n[target_relations]\nk1\n[images]\nk2 = k2\n";
        let m = parse_document(text).unwrap().to_morphism().unwrap();
        assert!(m.check().unwrap().well_defined);
        let again = parse_document(&print_morphism(&m)).unwrap().to_morphism().unwrap();
        assert_eq!(print_morphism(&again), print_morphism(&m));
    }

    #[test]
    fn actions() {
        let text = "kind = action\n[vars]\nr_psi, t1, t2\n[group]\ntau: r_psi -> -r_psi, t1 -> t2, t2 -> t1\n";
        let g = parse_document(text).unwrap().to_action().unwrap();
        assert_eq!(g.order(), 2);
        let bad = "kind = action\n[vars]\na, b\n[group]\ng: a -> b\n";
        assert!(parse_document(bad).unwrap().to_action().is_err());
    }

    #[test]
    fn presentation_round_trip() {
        let text = "kind = presentation\n[presentation]\nlabel = B\n[vars]\nk1:1, k2:2, g2:2, q:4\n[relations]\nq^2 + 2*k2*g2^2*k1^2 - 8*k2*g2^3 + g2^2*k1^4 - 4*g2^3*k1^2\n";
        let p = parse_document(text).unwrap().to_presentation().unwrap();
        let printed = print_presentation(&p);
        let again = parse_document(&printed).unwrap().to_presentation().unwrap();
        assert_eq!(print_presentation(&again), printed);
        assert!(again.same_as(&p).unwrap());
    }
}
