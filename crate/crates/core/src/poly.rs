//! Sparse multivariate polynomials over the rationals.
//!
//! A [`Polynomial`] is tied to a shared [`VarTable`] that fixes variable
//! names, their declaration order and their (positive) grading weights.
//! Terms are stored in descending weighted-grevlex order, which is also the
//! order used for printing, so two equal polynomials always print identically.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Exact rational coefficients.
pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Ordered, named and weighted variables of a polynomial ring.
#[derive(Clone, Debug)]
pub struct VarTable {
    names: Vec<String>,
    weights: Vec<u32>,
    index: HashMap<String, usize>,
}

/// Shared handle on a variable table.
pub type Context = Arc<VarTable>;

impl PartialEq for VarTable {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.weights == other.weights
    }
}

impl Eq for VarTable {}

impl Hash for VarTable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.names.hash(state);
        self.weights.hash(state);
    }
}

impl VarTable {
    /// Variables with unit weights.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::with_weights(names.into_iter().map(|n| (n, 1)))
    }

    pub fn with_weights<S: Into<String>>(vars: impl IntoIterator<Item = (S, u32)>) -> Result<Self> {
        let mut names = Vec::new();
        let mut weights = Vec::new();
        let mut index = HashMap::new();
        for (name, weight) in vars {
            let name = name.into();
            if weight == 0 {
                return Err(Error::InvalidWeight { name, weight: 0 });
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::DuplicateVariable(name));
            }
            names.push(name);
            weights.push(weight);
        }
        Ok(VarTable {
            names,
            weights,
            index,
        })
    }

    pub fn shared(self) -> Context {
        Arc::new(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.weights[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Variables of `self` followed by those of `other`.
    pub fn concat(&self, other: &VarTable) -> Result<VarTable> {
        Self::with_weights(
            self.names
                .iter()
                .cloned()
                .zip(self.weights.iter().copied())
                .chain(other.names.iter().cloned().zip(other.weights.iter().copied())),
        )
    }

    /// The sub-table of the named variables, in declaration order of `self`.
    pub fn restrict(&self, keep: &[usize]) -> VarTable {
        let keep: BTreeSet<usize> = keep.iter().copied().collect();
        Self::with_weights(
            keep.iter()
                .map(|&i| (self.names[i].clone(), self.weights[i])),
        )
        .expect("sub-table of a valid table")
    }
}

impl fmt::Display for VarTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, w)) in self.names.iter().zip(&self.weights).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}:{w}")?;
        }
        Ok(())
    }
}

/// Exponent vector aligned with a [`VarTable`].
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Monomial(SmallVec<[u16; 16]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> u32 {
        self.0
            .iter()
            .zip(weights)
            .map(|(&e, &w)| e as u32 * w)
            .sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if self.divides(other) {
            Some(Monomial(
                other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect(),
            ))
        } else {
            None
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        )
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| a == 0 || b == 0)
    }

    /// One bit per variable with positive exponent (variables past 64 share the top bit).
    pub fn support_mask(&self) -> u64 {
        let mut mask = 0u64;
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                mask |= 1 << i.min(63);
            }
        }
        mask
    }

    pub(crate) fn set(&mut self, i: usize, e: u16) {
        self.0[i] = e;
    }
}

/// A monomial order. Graded orders use the weighted degree of the
/// variable table the order is applied to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    Lex,
    GrLex,
    GrevLex,
    /// Variables `[0, split)` compared by `first`; ties broken on the rest by `second`.
    Block {
        split: usize,
        first: Box<MonomialOrder>,
        second: Box<MonomialOrder>,
    },
}

impl MonomialOrder {
    /// Standard elimination order: grevlex on the first `split` variables, then grevlex.
    pub fn elimination(split: usize) -> Self {
        MonomialOrder::Block {
            split,
            first: Box::new(MonomialOrder::GrevLex),
            second: Box::new(MonomialOrder::GrevLex),
        }
    }

    /// Whether the order is compatible with the weighted grading.
    pub fn is_graded(&self) -> bool {
        matches!(self, MonomialOrder::GrLex | MonomialOrder::GrevLex)
    }

    pub fn compile(&self, ctx: &VarTable) -> OrderCmp {
        let mut blocks = Vec::new();
        compile_into(self, 0, ctx.len(), &mut blocks);
        OrderCmp {
            blocks,
            weights: ctx.weights().to_vec(),
        }
    }
}

impl fmt::Display for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonomialOrder::Lex => write!(f, "lex"),
            MonomialOrder::GrLex => write!(f, "grlex"),
            MonomialOrder::GrevLex => write!(f, "grevlex"),
            MonomialOrder::Block {
                split,
                first,
                second,
            } => write!(f, "block({split}; {first}, {second})"),
        }
    }
}

impl std::str::FromStr for MonomialOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(MonomialOrder::Lex),
            "grlex" => Ok(MonomialOrder::GrLex),
            "grevlex" => Ok(MonomialOrder::GrevLex),
            other => Err(Error::invalid(format!("unknown monomial order `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BlockKind {
    Lex,
    GrLex,
    GrevLex,
}

#[derive(Clone, Debug)]
struct Block {
    start: usize,
    end: usize,
    kind: BlockKind,
}

fn compile_into(order: &MonomialOrder, start: usize, end: usize, out: &mut Vec<Block>) {
    match order {
        MonomialOrder::Lex => out.push(Block {
            start,
            end,
            kind: BlockKind::Lex,
        }),
        MonomialOrder::GrLex => out.push(Block {
            start,
            end,
            kind: BlockKind::GrLex,
        }),
        MonomialOrder::GrevLex => out.push(Block {
            start,
            end,
            kind: BlockKind::GrevLex,
        }),
        MonomialOrder::Block {
            split,
            first,
            second,
        } => {
            let mid = (start + split).min(end);
            compile_into(first, start, mid, out);
            compile_into(second, mid, end, out);
        }
    }
}

/// Sort key produced by [`OrderCmp::key`].
pub(crate) type OrderKey = SmallVec<[i32; 24]>;

/// A monomial order bound to concrete weights.
#[derive(Clone, Debug)]
pub struct OrderCmp {
    blocks: Vec<Block>,
    weights: Vec<u32>,
}

impl OrderCmp {
    /// A key whose lexicographic order agrees with [`OrderCmp::cmp`].
    pub(crate) fn key(&self, m: &Monomial) -> OrderKey {
        let e = m.exponents();
        let mut key = OrderKey::new();
        for block in &self.blocks {
            let range = block.start..block.end;
            match block.kind {
                BlockKind::Lex => key.extend(e[range].iter().map(|&x| x as i32)),
                BlockKind::GrLex => {
                    key.push(wdeg(&e[range.clone()], &self.weights[range.clone()]) as i32);
                    key.extend(e[range].iter().map(|&x| x as i32));
                }
                BlockKind::GrevLex => {
                    key.push(wdeg(&e[range.clone()], &self.weights[range.clone()]) as i32);
                    key.extend(e[range].iter().rev().map(|&x| -(x as i32)));
                }
            }
        }
        key
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let (a, b) = (a.exponents(), b.exponents());
        for block in &self.blocks {
            let range = block.start..block.end;
            let ord = match block.kind {
                BlockKind::Lex => lex_cmp(&a[range.clone()], &b[range]),
                BlockKind::GrLex => {
                    let da = wdeg(&a[range.clone()], &self.weights[range.clone()]);
                    let db = wdeg(&b[range.clone()], &self.weights[range.clone()]);
                    da.cmp(&db)
                        .then_with(|| lex_cmp(&a[range.clone()], &b[range]))
                }
                BlockKind::GrevLex => {
                    let da = wdeg(&a[range.clone()], &self.weights[range.clone()]);
                    let db = wdeg(&b[range.clone()], &self.weights[range.clone()]);
                    da.cmp(&db).then_with(|| {
                        for i in range.rev() {
                            if a[i] != b[i] {
                                return b[i].cmp(&a[i]);
                            }
                        }
                        Ordering::Equal
                    })
                }
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

fn wdeg(e: &[u16], w: &[u32]) -> u32 {
    e.iter().zip(w).map(|(&e, &w)| e as u32 * w).sum()
}

fn lex_cmp(a: &[u16], b: &[u16]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x.cmp(y);
        }
    }
    Ordering::Equal
}

pub(crate) type Term = (Monomial, Rational);

/// Sort descending under `ord`, merge equal monomials and drop zeros.
pub(crate) fn normalize_terms(mut terms: Vec<Term>, ord: &OrderCmp) -> Vec<Term> {
    terms.sort_by(|a, b| ord.cmp(&b.0, &a.0));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for (m, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == m => last.1 += c,
            _ => {
                if let Some(last) = out.last() {
                    if last.1.is_zero() {
                        out.pop();
                    }
                }
                out.push((m, c));
            }
        }
    }
    if out.last().is_some_and(|t| t.1.is_zero()) {
        out.pop();
    }
    out
}

/// `a + scale * mult * b` for descending-sorted term lists.
pub(crate) fn merge_axpy(
    a: &[Term],
    b: &[Term],
    scale: &Rational,
    mult: Option<&Monomial>,
    ord: &OrderCmp,
) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut i = 0;
    let mut bi = b.iter().map(|(m, c)| {
        let m = match mult {
            Some(x) => m.mul(x),
            None => m.clone(),
        };
        (m, c * scale)
    });
    let mut next_b = bi.next();
    while i < a.len() || next_b.is_some() {
        match (a.get(i), next_b.as_ref()) {
            (Some(ta), Some(tb)) => match ord.cmp(&ta.0, &tb.0) {
                Ordering::Greater => {
                    out.push(ta.clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(next_b.take().unwrap());
                    next_b = bi.next();
                }
                Ordering::Equal => {
                    let c = &ta.1 + &tb.1;
                    if !c.is_zero() {
                        out.push((ta.0.clone(), c));
                    }
                    i += 1;
                    next_b = bi.next();
                }
            },
            (Some(ta), None) => {
                out.push(ta.clone());
                i += 1;
            }
            (None, Some(_)) => {
                out.push(next_b.take().unwrap());
                next_b = bi.next();
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Result of [`Polynomial::weighted_degree`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightedDegree {
    /// The zero polynomial, homogeneous of every degree.
    Zero,
    Homogeneous(u32),
    /// The distinct weighted degrees that occur, ascending.
    Inhomogeneous(Vec<u32>),
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Clone, Debug)]
pub struct Polynomial {
    ctx: Context,
    terms: Vec<Term>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl Hash for Polynomial {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

pub(crate) fn canonical_order(ctx: &VarTable) -> OrderCmp {
    MonomialOrder::GrevLex.compile(ctx)
}

impl Polynomial {
    pub fn zero(ctx: &Context) -> Self {
        Polynomial {
            ctx: ctx.clone(),
            terms: Vec::new(),
        }
    }

    pub fn one(ctx: &Context) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn constant(ctx: &Context, c: Rational) -> Self {
        let terms = if c.is_zero() {
            Vec::new()
        } else {
            vec![(Monomial::one(ctx.len()), c)]
        };
        Polynomial {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn var(ctx: &Context, name: &str) -> Result<Self> {
        let i = ctx
            .index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        Ok(Self::var_at(ctx, i))
    }

    pub fn var_at(ctx: &Context, i: usize) -> Self {
        Polynomial {
            ctx: ctx.clone(),
            terms: vec![(Monomial::var(ctx.len(), i), Rational::one())],
        }
    }

    pub fn monomial(ctx: &Context, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.len(), ctx.len(), "monomial length must match the context");
        let terms = if c.is_zero() { Vec::new() } else { vec![(m, c)] };
        Polynomial {
            ctx: ctx.clone(),
            terms,
        }
    }

    /// Build from arbitrary terms; like monomials are combined.
    pub fn from_terms(ctx: &Context, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let terms: Vec<Term> = terms.into_iter().collect();
        for (m, _) in &terms {
            assert_eq!(m.len(), ctx.len(), "monomial length must match the context");
        }
        Polynomial {
            ctx: ctx.clone(),
            terms: normalize_terms(terms, &canonical_order(ctx)),
        }
    }

    /// Terms already sorted descending in canonical order with no zeros.
    pub(crate) fn from_sorted_terms(ctx: &Context, terms: Vec<Term>) -> Self {
        Polynomial {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn same_context(&self, other: &Polynomial) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    /// Constant term (zero if absent).
    pub fn constant_term(&self) -> Rational {
        self.terms
            .iter()
            .find(|(m, _)| m.is_one())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Indices of variables that occur.
    pub fn support(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    s.insert(i);
                }
            }
        }
        s
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.degree()).max()
    }

    fn check(&self, other: &Polynomial) -> Result<()> {
        if self.same_context(other) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        let ord = canonical_order(&self.ctx);
        Ok(Self::from_sorted_terms(
            &self.ctx,
            merge_axpy(&self.terms, &other.terms, &Rational::one(), None, &ord),
        ))
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        let ord = canonical_order(&self.ctx);
        Ok(Self::from_sorted_terms(
            &self.ctx,
            merge_axpy(&self.terms, &other.terms, &-Rational::one(), None, &ord),
        ))
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.ctx));
        }
        let mut acc: HashMap<Monomial, Rational> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Ok(Self::from_sorted_terms(
            &self.ctx,
            normalize_terms(acc.into_iter().collect(), &canonical_order(&self.ctx)),
        ))
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(t, a)| (t.mul(m), a * c))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Leading term under `ord`.
    pub fn leading_term(&self, ord: &MonomialOrder) -> Result<(Monomial, Rational)> {
        let cmp = ord.compile(&self.ctx);
        self.terms
            .iter()
            .max_by(|a, b| cmp.cmp(&a.0, &b.0))
            .cloned()
            .ok_or(Error::ZeroPolynomial("leading term"))
    }

    /// Scale so that the leading coefficient in canonical order is one.
    pub fn monic(&self) -> Polynomial {
        match self.terms.first() {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    /// Scale to coprime integer coefficients with a positive leading coefficient.
    pub fn primitive(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        use num_integer::Integer;
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        for (_, c) in &self.terms {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
        let mut f = Rational::new(den, num);
        if self.terms[0].1.is_negative() {
            f = -f;
        }
        self.scale(&f)
    }

    pub fn weighted_degree(&self) -> WeightedDegree {
        let degs: BTreeSet<u32> = self
            .terms
            .iter()
            .map(|(m, _)| m.weighted_degree(self.ctx.weights()))
            .collect();
        match degs.len() {
            0 => WeightedDegree::Zero,
            1 => WeightedDegree::Homogeneous(*degs.iter().next().unwrap()),
            _ => WeightedDegree::Inhomogeneous(degs.into_iter().collect()),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        !matches!(self.weighted_degree(), WeightedDegree::Inhomogeneous(_))
    }

    /// Largest weighted degree of a term.
    pub fn max_weighted_degree(&self) -> Option<u32> {
        self.terms
            .iter()
            .map(|(m, _)| m.weighted_degree(self.ctx.weights()))
            .max()
    }

    /// The part of weighted degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Polynomial {
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.weighted_degree(self.ctx.weights()) == d)
                .cloned()
                .collect(),
        }
    }

    /// Image under the ring map sending variable `i` to `images[i]`.
    ///
    /// All images must share one context. Variables that do not occur in
    /// `self` may map to anything.
    pub fn substitute_indexed(&self, target: &Context, images: &[Polynomial]) -> Result<Polynomial> {
        assert_eq!(images.len(), self.ctx.len());
        for img in images {
            if !(Arc::ptr_eq(img.context(), target) || **img.context() == **target) {
                return Err(Error::ContextMismatch);
            }
        }
        let mut powers: Vec<Vec<Polynomial>> = vec![Vec::new(); images.len()];
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut prod = Polynomial::constant(target, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[i];
                if cache.is_empty() {
                    cache.push(Polynomial::one(target));
                }
                while cache.len() <= e as usize {
                    let next = &cache[cache.len() - 1] * &images[i];
                    cache.push(next);
                }
                prod = &prod * &cache[e as usize];
                if prod.is_zero() {
                    break;
                }
            }
            for (tm, tc) in prod.terms {
                *acc.entry(tm).or_insert_with(Rational::zero) += tc;
            }
        }
        Ok(Polynomial::from_sorted_terms(
            target,
            normalize_terms(acc.into_iter().collect(), &canonical_order(target)),
        ))
    }

    /// Image under a named assignment. Every variable occurring in `self`
    /// must be assigned and all images must share one context.
    pub fn substitute(&self, assignment: &BTreeMap<String, Polynomial>) -> Result<Polynomial> {
        let target = match assignment.values().next() {
            Some(p) => p.context().clone(),
            None => {
                if self.support().is_empty() {
                    return Ok(self.clone());
                }
                let i = *self.support().iter().next().unwrap();
                return Err(Error::UnassignedVariable(self.ctx.name(i).to_string()));
            }
        };
        let support = self.support();
        let mut images = Vec::with_capacity(self.ctx.len());
        for (i, name) in self.ctx.names().iter().enumerate() {
            match assignment.get(name) {
                Some(p) => images.push(p.clone()),
                None if support.contains(&i) => {
                    return Err(Error::UnassignedVariable(name.clone()))
                }
                None => images.push(Polynomial::zero(&target)),
            }
        }
        self.substitute_indexed(&target, &images)
    }

    /// Reinterpret in a table that contains every variable occurring in `self` (matched by name).
    pub fn embed(&self, target: &Context) -> Result<Polynomial> {
        if Arc::ptr_eq(&self.ctx, target) || *self.ctx == **target {
            return Ok(Polynomial {
                ctx: target.clone(),
                terms: self.terms.clone(),
            });
        }
        let mut map = Vec::with_capacity(self.ctx.len());
        let support = self.support();
        for (i, name) in self.ctx.names().iter().enumerate() {
            match target.index_of(name) {
                Some(j) => map.push(Some(j)),
                None if support.contains(&i) => return Err(Error::UnknownVariable(name.clone())),
                None => map.push(None),
            }
        }
        Ok(self.remap(target, &map))
    }

    /// Rename variables: variable `i` becomes variable `map[i]` of `target`.
    /// Variables mapped to `None` must not occur.
    pub(crate) fn remap(&self, target: &Context, map: &[Option<usize>]) -> Polynomial {
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = Monomial::one(target.len());
                for (i, &x) in m.exponents().iter().enumerate() {
                    if x > 0 {
                        e.set(map[i].expect("variable without image"), x);
                    }
                }
                (e, c.clone())
            })
            .collect();
        Polynomial::from_terms(target, terms)
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.ctx.len());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    /// Exact quotient `self / divisor`; fails unless the division is exact.
    pub fn exact_div(&self, divisor: &Polynomial) -> Result<Polynomial> {
        self.check(divisor)?;
        if divisor.is_zero() {
            return Err(Error::ZeroPolynomial("division"));
        }
        let ord = canonical_order(&self.ctx);
        let (lm, lc) = divisor.terms[0].clone();
        let lc_inv = lc.recip();
        let mut rem = self.terms.clone();
        let mut quot: Vec<Term> = Vec::new();
        while let Some((m, c)) = rem.first().cloned() {
            let q = lm.quotient_of(&m).ok_or_else(|| {
                Error::invalid(format!("`{}` is not divisible by `{}`", self, divisor))
            })?;
            let qc = &c * &lc_inv;
            rem = merge_axpy(&rem, &divisor.terms, &-qc.clone(), Some(&q), &ord);
            quot.push((q, qc));
        }
        Ok(Polynomial::from_terms(&self.ctx, quot))
    }

    /// Coefficients, each paired with the monomial it multiplies.
    pub fn coefficient_of(&self, m: &Monomial) -> Rational {
        self.terms
            .iter()
            .find(|(t, _)| t == m)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("polynomial context mismatch")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs).expect("polynomial context mismatch")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("polynomial context mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

pub(crate) fn fmt_monomial(m: &Monomial, ctx: &VarTable, f: &mut impl fmt::Write) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_char('*')?;
        }
        first = false;
        f.write_str(ctx.name(i))?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// Canonical text: descending weighted grevlex, `a/b` coefficients in lowest terms.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                fmt_monomial(m, &self.ctx, f)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(names: &[&str]) -> Context {
        VarTable::new(names.iter().copied()).unwrap().shared()
    }

    fn v(c: &Context, n: &str) -> Polynomial {
        Polynomial::var(c, n).unwrap()
    }

    #[test]
    fn cancellation_and_distributivity() {
        let c = ctx(&["t1", "t2", "r_psi"]);
        let (t1, t2, r) = (v(&c, "t1"), v(&c, "t2"), v(&c, "r_psi"));
        let sum = &(&t1 + &t2) + &(&t1 - &t2);
        assert_eq!(sum, t1.scale(&rat(2)));
        let prod = &(&t1 - &r) * &(&t2 + &r);
        assert_eq!(prod.to_string(), "t1*t2 + t1*r_psi - t2*r_psi - r_psi^2");
        assert!((&(&t1 + &t2) * &Polynomial::zero(&c)).is_zero());
    }

    #[test]
    fn context_mismatch_is_rejected() {
        let a = ctx(&["x"]);
        let b = ctx(&["y"]);
        assert_eq!(
            v(&a, "x").checked_add(&v(&b, "y")),
            Err(Error::ContextMismatch)
        );
    }

    #[test]
    fn weighted_degrees() {
        let c = VarTable::with_weights([("k1", 1), ("k2", 2), ("r", 4), ("g3pp", 3), ("t", 5)])
            .unwrap()
            .shared();
        assert_eq!(
            Polynomial::one(&c).weighted_degree(),
            WeightedDegree::Homogeneous(0)
        );
        let f = &v(&c, "r").pow(2) - &(&v(&c, "g3pp") * &v(&c, "t"));
        assert_eq!(f.weighted_degree(), WeightedDegree::Homogeneous(8));
        let g = &v(&c, "k1") + &v(&c, "k2");
        assert_eq!(g.weighted_degree(), WeightedDegree::Inhomogeneous(vec![1, 2]));
    }

    #[test]
    fn leading_terms() {
        let c = ctx(&["t1", "t2"]);
        let f = &v(&c, "t1") + &v(&c, "t2");
        let (m, k) = f.leading_term(&MonomialOrder::Lex).unwrap();
        assert_eq!(m.exponents(), &[1, 0]);
        assert_eq!(k, rat(1));
        let g = &v(&c, "t1").pow(2) + &v(&c, "t2").pow(2);
        assert_eq!(g.leading_term(&MonomialOrder::Lex).unwrap().0.exponents(), &[2, 0]);
        assert!(Polynomial::zero(&c).leading_term(&MonomialOrder::Lex).is_err());
    }

    #[test]
    fn grevlex_golden_leading_term() {
        // unit weights: the degree-3 terms compete and grevlex prefers the one
        // with the smallest exponent in the last variable
        let c = ctx(&["u1", "u2", "u3", "u4", "u5"]);
        let u = |n: &str| v(&c, n);
        let f = &(&(&(&(&u("u3") * &u("u4")).scale(&rat(2))
            + &(&(&u("u1") * &u("u2")) * &u("u5")).scale(&rat(2)))
            - &(&u("u2").pow(2) * &u("u3")))
            - &(&u("u1").pow(2) * &u("u4")))
            - &u("u5").pow(2).scale(&rat(2));
        let (m, k) = f.leading_term(&MonomialOrder::GrevLex).unwrap();
        assert_eq!(m.exponents(), &[0, 2, 1, 0, 0]);
        assert_eq!(k, rat(-1));
    }

    #[test]
    fn substitution_of_gamma2() {
        let u = ctx(&["u1", "u2", "u3", "u4"]);
        let t = ctx(&["t1", "t2", "r_psi"]);
        let (t1, t2, r) = (v(&t, "t1"), v(&t, "t2"), v(&t, "r_psi"));
        let f = &(&(&v(&u, "u1").pow(2) - &v(&u, "u2")).scale(&ratio(1, 2)) + &v(&u, "u3"))
            - &v(&u, "u4");
        let mut a = BTreeMap::new();
        a.insert("u1".into(), &t1 + &t2);
        a.insert("u2".into(), &t1.pow(2) + &t2.pow(2));
        a.insert("u3".into(), &r * &(&t1 - &t2));
        a.insert("u4".into(), r.pow(2));
        let img = f.substitute(&a).unwrap();
        assert_eq!(img, &(&t1 - &r) * &(&t2 + &r));

        let mut partial = a.clone();
        partial.remove("u4");
        assert_eq!(
            f.substitute(&partial),
            Err(Error::UnassignedVariable("u4".into()))
        );
    }

    #[test]
    fn identity_substitution() {
        let c = ctx(&["x", "y"]);
        let f = &v(&c, "x").pow(3) - &(&v(&c, "x") * &v(&c, "y")).scale(&ratio(2, 3));
        let id: Vec<_> = (0..2).map(|i| Polynomial::var_at(&c, i)).collect();
        assert_eq!(f.substitute_indexed(&c, &id).unwrap(), f);
    }

    #[test]
    fn exact_division() {
        let c = ctx(&["x", "y"]);
        let (x, y) = (v(&c, "x"), v(&c, "y"));
        let f = &(&x + &y) * &(&x - &y.scale(&rat(3)));
        assert_eq!(f.exact_div(&(&x + &y)).unwrap(), &x - &y.scale(&rat(3)));
        assert!(f.exact_div(&x).is_err());
    }

    #[test]
    fn printing() {
        let c = ctx(&["t1", "t2"]);
        let f = &v(&c, "t2") + &v(&c, "t1");
        assert_eq!(f.to_string(), "t1 + t2");
        let g = v(&c, "t1").scale(&ratio(2, 4));
        assert_eq!(g.to_string(), "1/2*t1");
        assert_eq!(Polynomial::constant(&c, ratio(-1, 2)).to_string(), "-1/2");
        assert_eq!(Polynomial::zero(&c).to_string(), "0");
    }
}
