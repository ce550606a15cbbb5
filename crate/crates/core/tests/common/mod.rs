//! Generators, independent oracles and property checks shared by the
//! proptest suite and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chowring::invariants::Character;
use chowring::parser::print_polynomial;
use chowring::{
    map_kernel, parse_polynomial, ratio, Context, GroebnerBasis, GroupAction, Ideal, Monomial, MonomialOrder,
    Polynomial, Rational, SignedPermutation, VarTable,
};
use num_traits::Zero;
use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::TestCaseError;

pub const NAMES: [&str; 3] = ["x", "y", "z"];

pub fn vars(n: usize) -> Context {
    VarTable::new(NAMES[..n].iter().copied()).unwrap().shared()
}

pub fn weighted(weights: &[u32]) -> Context {
    VarTable::with_weights(NAMES.iter().copied().zip(weights.iter().copied()))
        .unwrap()
        .shared()
}

/// Exponent vectors in `weights.len()` variables of weighted degree exactly `d`.
pub fn exponents(weights: &[u32], d: u32) -> Vec<Vec<u16>> {
    fn go(weights: &[u32], d: u32, prefix: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if prefix.len() == weights.len() {
            if d == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let w = weights[prefix.len()];
        for e in 0..=d / w {
            prefix.push(e as u16);
            go(weights, d - e * w, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(weights, d, &mut Vec::new(), &mut out);
    out
}

/// Terms chosen by index among the monomials of one degree.
pub type Picks = Vec<(Index, i64, i64)>;

pub fn picks(max_terms: usize) -> impl Strategy<Value = Picks> {
    prop::collection::vec((any::<Index>(), -6i64..=6, 1i64..=3), 1..=max_terms)
}

/// Homogeneous polynomial of degree `d` under the context weights.
pub fn homogeneous(ctx: &Context, d: u32, p: &Picks) -> Polynomial {
    let monos = exponents(ctx.weights(), d);
    Polynomial::from_terms(
        ctx,
        p.iter()
            .map(|(i, c, q)| (Monomial::from_exponents(i.get(&monos)), ratio(*c, *q))),
    )
}

/// Arbitrary terms of total degree at most `max_deg`.
pub type Raw = Vec<(Vec<u16>, i64, i64)>;

pub fn raw(n: usize, max_deg: u16, max_terms: usize) -> impl Strategy<Value = Raw> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_deg, n), -6i64..=6, 1i64..=3),
        0..=max_terms,
    )
    .prop_map(move |terms| {
        terms
            .into_iter()
            .map(|(mut e, c, q)| {
                while e.iter().sum::<u16>() > max_deg {
                    let k = (0..e.len()).max_by_key(|&k| e[k]).unwrap();
                    e[k] -= 1;
                }
                (e, c, q)
            })
            .collect()
    })
}

pub fn build(ctx: &Context, raw: &Raw) -> Polynomial {
    Polynomial::from_terms(
        ctx,
        raw.iter()
            .map(|(e, c, q)| (Monomial::from_exponents(e), ratio(*c, *q))),
    )
}

/// Row-reduced span of polynomials, by plain Gaussian elimination on
/// coefficient vectors indexed by exponent.
#[derive(Default)]
pub struct Span {
    rows: Vec<(Vec<u16>, BTreeMap<Vec<u16>, Rational>)>,
}

fn coefficients(p: &Polynomial) -> BTreeMap<Vec<u16>, Rational> {
    p.terms()
        .iter()
        .map(|(m, c)| (m.exponents().to_vec(), c.clone()))
        .collect()
}

impl Span {
    fn reduce(&self, mut row: BTreeMap<Vec<u16>, Rational>) -> BTreeMap<Vec<u16>, Rational> {
        for (pivot, prow) in &self.rows {
            if let Some(c) = row.get(pivot).cloned() {
                for (k, v) in prow {
                    let e = row.entry(k.clone()).or_insert_with(Rational::zero);
                    *e -= &c * v;
                    if e.is_zero() {
                        row.remove(k);
                    }
                }
            }
        }
        row
    }

    pub fn insert(&mut self, p: &Polynomial) -> bool {
        let row = self.reduce(coefficients(p));
        let Some((pivot, lead)) = row.iter().next().map(|(k, v)| (k.clone(), v.clone())) else {
            return false;
        };
        let row: BTreeMap<_, _> = row.into_iter().map(|(k, v)| (k, v / &lead)).collect();
        for (_, other) in self.rows.iter_mut() {
            if let Some(c) = other.get(&pivot).cloned() {
                for (k, v) in &row {
                    let e = other.entry(k.clone()).or_insert_with(Rational::zero);
                    *e -= &c * v;
                    if e.is_zero() {
                        other.remove(k);
                    }
                }
            }
        }
        self.rows.push((pivot, row));
        true
    }

    pub fn contains(&self, p: &Polynomial) -> bool {
        self.reduce(coefficients(p)).is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

pub fn rank(polys: &[Polynomial]) -> usize {
    let mut s = Span::default();
    for p in polys {
        s.insert(p);
    }
    s.rank()
}

fn total_degree(p: &Polynomial) -> u32 {
    p.total_degree().unwrap_or(0)
}

/// Whether `f = Σ a_i g_i` is solvable with every `deg(a_i g_i) <= bound`.
pub fn truncated_member(f: &Polynomial, gens: &[Polynomial], bound: u32) -> bool {
    let ctx = f.context();
    let ones = vec![1; ctx.len()];
    let mut span = Span::default();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        let dg = total_degree(g);
        for d in 0..=bound.saturating_sub(dg) {
            if dg + d > bound {
                break;
            }
            for e in exponents(&ones, d) {
                span.insert(&g.mul_monomial(&Monomial::from_exponents(&e), &ratio(1, 1)));
            }
        }
    }
    span.contains(f)
}

/// Homogeneous membership in degree `d`: `f` lies in the span of the
/// products `m·g_i` of degree `d`. Exact for homogeneous ideals.
pub fn graded_member(f: &Polynomial, gens: &[Polynomial], d: u32) -> bool {
    let ctx = f.context();
    let mut span = Span::default();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        let dg = g.max_weighted_degree().unwrap();
        if dg > d {
            continue;
        }
        for e in exponents(ctx.weights(), d - dg) {
            span.insert(&g.mul_monomial(&Monomial::from_exponents(&e), &ratio(1, 1)));
        }
    }
    span.contains(f)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

// ---------------------------------------------------------------- polyarith

pub fn ring_axioms(a: &Raw, b: &Raw, c: &Raw) -> Result<(), TestCaseError> {
    let ctx = vars(3);
    let (a, b, c) = (build(&ctx, a), build(&ctx, b), build(&ctx, c));
    let zero = Polynomial::zero(&ctx);
    let one = Polynomial::one(&ctx);
    check(&(&a + &b) + &c == &a + &(&b + &c), || "addition not associative".into())?;
    check(&a + &b == &b + &a, || "addition not commutative".into())?;
    check(&(&a * &b) * &c == &a * &(&b * &c), || "multiplication not associative".into())?;
    check(&a * &b == &b * &a, || "multiplication not commutative".into())?;
    check(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), || "not distributive".into())?;
    check(&a + &zero == a && &a * &one == a, || "identities".into())?;
    check((&a - &a).is_zero(), || "a - a".into())?;
    check(&a * &zero == zero, || "a * 0".into())
}

pub fn degree_additive(da: u32, pa: &Picks, db: u32, pb: &Picks) -> Result<(), TestCaseError> {
    let ctx = weighted(&[1, 2, 3]);
    let (f, g) = (homogeneous(&ctx, da, pa), homogeneous(&ctx, db, pb));
    if f.is_zero() || g.is_zero() {
        return Ok(());
    }
    check(f.is_homogeneous() && g.is_homogeneous(), || "inputs not homogeneous".into())?;
    let prod = &f * &g;
    check(
        prod.weighted_degree() == chowring::poly::WeightedDegree::Homogeneous(da + db),
        || format!("degree of ({f})*({g}) is {:?}", prod.weighted_degree()),
    )
}

/// `f(A)(B) = f(B∘A)` for `A: x,y,z → Q[a,b]` and `B: a,b → Q[c,d]`.
pub fn substitution_composes(f: &Raw, a: &[Raw; 3], b: &[Raw; 2]) -> Result<(), TestCaseError> {
    let src = vars(3);
    let mid = VarTable::new(["a", "b"]).unwrap().shared();
    let dst = VarTable::new(["c", "d"]).unwrap().shared();
    let f = build(&src, f);
    let a_img: Vec<Polynomial> = a.iter().map(|r| build(&mid, &r.iter().map(|(e, c, q)| (e[..2].to_vec(), *c, *q)).collect())).collect();
    let b_img: Vec<Polynomial> = b.iter().map(|r| build(&dst, &r.iter().map(|(e, c, q)| (e[..2].to_vec(), *c, *q)).collect())).collect();
    let named = |ctx: &Context, imgs: &[Polynomial]| -> BTreeMap<String, Polynomial> {
        ctx.names().iter().cloned().zip(imgs.iter().cloned()).collect()
    };
    let a_map = named(&src, &a_img);
    let b_map = named(&mid, &b_img);
    let composed: Vec<Polynomial> = a_img.iter().map(|p| p.substitute(&b_map).unwrap()).collect();
    let lhs = f.substitute(&a_map).unwrap().substitute(&b_map).unwrap();
    let rhs = f.substitute(&named(&src, &composed)).unwrap();
    check(lhs == rhs, || format!("{lhs} != {rhs}"))
}

// ---------------------------------------------------------------- exprparser

pub fn print_parse_round_trip(f: &Raw) -> Result<(), TestCaseError> {
    let ctx = vars(3);
    let f = build(&ctx, f);
    let text = print_polynomial(&f);
    let back = parse_polynomial(&text, &ctx).map_err(|e| TestCaseError::fail(format!("`{text}`: {e}")))?;
    check(back == f, || format!("`{text}` parsed to `{back}`"))?;
    check(print_polynomial(&back) == text, || "printing not stable".into())
}

/// Parsing arbitrary text returns a value or a positioned diagnostic.
pub fn parse_is_total(text: &str) -> Result<(), TestCaseError> {
    let ctx = vars(3);
    match parse_polynomial(text, &ctx) {
        Ok(_) => Ok(()),
        Err(chowring::Error::Parse { line, column, .. }) => {
            check(line >= 1 && column >= 1, || format!("position {line}:{column}"))
        }
        Err(chowring::Error::UnknownVariable(_)) => Ok(()),
        Err(e) => Err(TestCaseError::fail(format!("unpositioned error for `{text}`: {e}"))),
    }
}

// ---------------------------------------------------------------- groebner

/// Random ideal data: generator degrees and terms in `n` variables.
#[derive(Clone, Debug)]
pub struct IdealCase {
    pub n: usize,
    pub gens: Vec<(u32, Picks)>,
    pub degree: u32,
    pub multipliers: Vec<Picks>,
    pub noise: Option<Picks>,
}

pub fn ideal_case() -> impl Strategy<Value = IdealCase> {
    (
        2usize..=3,
        prop::collection::vec((1u32..=4, picks(3)), 1..=3),
        1u32..=5,
        prop::collection::vec(picks(3), 3),
        prop::option::of(picks(2)),
    )
        .prop_map(|(n, gens, degree, multipliers, noise)| IdealCase {
            n,
            gens,
            degree,
            multipliers,
            noise,
        })
}

impl IdealCase {
    pub fn generators(&self, ctx: &Context) -> Vec<Polynomial> {
        self.gens.iter().map(|(d, p)| homogeneous(ctx, *d, p)).collect()
    }

    /// A homogeneous element of degree `degree`: a combination of the
    /// generators, plus noise when present.
    pub fn element(&self, ctx: &Context, gens: &[Polynomial]) -> Polynomial {
        let mut f = Polynomial::zero(ctx);
        for ((dg, _), (g, m)) in self.gens.iter().zip(gens.iter().zip(&self.multipliers)) {
            if *dg <= self.degree {
                f = &f + &(&homogeneous(ctx, self.degree - dg, m) * g);
            }
        }
        if let Some(noise) = &self.noise {
            f = &f + &homogeneous(ctx, self.degree, noise);
        }
        f
    }
}

/// Gröbner membership under grevlex and lex agrees with the degree-`d`
/// linear-algebra oracle for homogeneous ideals.
pub fn homogeneous_membership(case: &IdealCase) -> Result<(), TestCaseError> {
    let ctx = vars(case.n);
    let gens = case.generators(&ctx);
    let f = case.element(&ctx, &gens);
    let ideal = Ideal::new(&ctx, gens.clone()).unwrap();
    let oracle = graded_member(&f, &gens, case.degree);
    let grevlex = ideal.contains(&f).unwrap();
    let lex = ideal.normal_form(&f, &MonomialOrder::Lex).unwrap().is_zero();
    check(oracle == grevlex && grevlex == lex, || {
        format!("f = {f} in {gens:?}: oracle {oracle}, grevlex {grevlex}, lex {lex}")
    })?;
    if case.noise.is_none() {
        check(grevlex, || format!("constructed member {f} rejected"))?;
    }
    Ok(())
}

/// Inhomogeneous ideals: a solvable truncated system certifies membership,
/// and lex and grevlex agree.
#[derive(Clone, Debug)]
pub struct InhomCase {
    pub n: usize,
    pub gens: Vec<Raw>,
    pub multipliers: Vec<Raw>,
    pub noise: Option<Raw>,
}

pub fn inhom_case() -> impl Strategy<Value = InhomCase> {
    (
        2usize..=3,
        prop::collection::vec(raw(3, 4, 3), 1..=3),
        prop::collection::vec(raw(3, 2, 2), 3),
        prop::option::of(raw(3, 3, 2)),
    )
        .prop_map(|(n, gens, multipliers, noise)| {
            let cut = |r: Raw| -> Raw { r.into_iter().map(|(e, c, q)| (e[..n].to_vec(), c, q)).collect() };
            InhomCase {
                n,
                gens: gens.into_iter().map(cut).collect(),
                multipliers: multipliers.into_iter().map(cut).collect(),
                noise: noise.map(cut),
            }
        })
}

pub fn inhomogeneous_membership(case: &InhomCase) -> Result<(), TestCaseError> {
    let ctx = vars(case.n);
    let gens: Vec<Polynomial> = case.gens.iter().map(|r| build(&ctx, r)).collect();
    let mut f = Polynomial::zero(&ctx);
    for (g, m) in gens.iter().zip(&case.multipliers) {
        f = &f + &(&build(&ctx, m) * g);
    }
    if let Some(noise) = &case.noise {
        f = &f + &build(&ctx, noise);
    }
    let ideal = Ideal::new(&ctx, gens.clone()).unwrap();
    let grevlex = ideal.contains(&f).unwrap();
    let lex = ideal.normal_form(&f, &MonomialOrder::Lex).unwrap().is_zero();
    check(grevlex == lex, || format!("f = {f} in {gens:?}: grevlex {grevlex}, lex {lex}"))?;
    if truncated_member(&f, &gens, total_degree(&f) + 2) {
        check(grevlex, || format!("oracle certifies {f} but the basis rejects it"))?;
    }
    if case.noise.is_none() {
        check(grevlex, || format!("constructed member {f} rejected"))?;
    }
    Ok(())
}

/// Buchberger on its own output returns the same reduced basis.
pub fn groebner_idempotent(case: &InhomCase, order: &MonomialOrder) -> Result<(), TestCaseError> {
    let ctx = vars(case.n);
    let gens: Vec<Polynomial> = case.gens.iter().map(|r| build(&ctx, r)).collect();
    let gb = GroebnerBasis::compute(&ctx, &gens, order);
    let again = GroebnerBasis::compute(&ctx, gb.polynomials(), order);
    check(gb.polynomials() == again.polynomials(), || {
        format!("{:?} became {:?}", gb.polynomials(), again.polynomials())
    })
}

/// `f·h ∈ I` for every generator `h` of `(I : f)`, and `I ⊆ (I : f)`.
pub fn colon_containment(case: &IdealCase) -> Result<(), TestCaseError> {
    let ctx = vars(case.n);
    let gens = case.generators(&ctx);
    let ideal = Ideal::new(&ctx, gens).unwrap();
    let f = homogeneous(&ctx, 1, &case.multipliers[0]);
    if f.is_zero() {
        return Ok(());
    }
    let colon = ideal.quotient(&f).unwrap();
    for h in colon.generators() {
        check(ideal.contains(&(&f * h)).unwrap(), || format!("f*{h} not in I"))?;
    }
    check(colon.contains_ideal(&ideal).unwrap(), || "I not inside (I : f)".into())
}

/// `I ∩ J ⊆ I, J` and `I·J ⊆ I ∩ J`.
pub fn intersection_containment(i: &IdealCase, j: &IdealCase) -> Result<(), TestCaseError> {
    let ctx = vars(3);
    let a = Ideal::new(&ctx, i.generators(&ctx)).unwrap();
    let b = Ideal::new(&ctx, j.generators(&ctx)).unwrap();
    let both = a.intersect(&b).unwrap();
    for g in both.generators() {
        check(a.contains(g).unwrap() && b.contains(g).unwrap(), || format!("{g} escapes"))?;
    }
    for x in a.generators() {
        for y in b.generators() {
            check(both.contains(&(x * y)).unwrap(), || format!("({x})*({y}) not in the intersection"))?;
        }
    }
    Ok(())
}

/// Every kernel generator maps to zero modulo the target ideal.
pub fn kernel_maps_to_zero(target: &IdealCase, images: &[Picks; 3]) -> Result<(), TestCaseError> {
    let ctx = vars(2);
    let tgt = IdealCase { n: 2, ..target.clone() };
    let ideal = Ideal::new(&ctx, tgt.generators(&ctx)).unwrap();
    let src = weighted(&[1, 2, 2]);
    let imgs: Vec<Polynomial> = images
        .iter()
        .zip([1, 2, 2])
        .map(|(p, d)| homogeneous(&ctx, d, p))
        .collect();
    let kernel = map_kernel(&src, &[], &ideal, &imgs).unwrap();
    for g in kernel.generators() {
        let img = g.substitute_indexed(&ctx, &imgs).unwrap();
        check(ideal.contains(&img).unwrap(), || format!("kernel element {g} maps to {img}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- invariants

#[derive(Clone, Debug)]
pub struct ActionCase {
    pub n: usize,
    pub gens: Vec<(Vec<usize>, Vec<bool>)>,
    pub f: Raw,
}

pub fn action_case() -> impl Strategy<Value = ActionCase> {
    (1usize..=3).prop_flat_map(|n| {
        let perm = (Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), prop::collection::vec(any::<bool>(), n));
        (Just(n), prop::collection::vec(perm, 1..=2), raw(n, 3, 4))
            .prop_map(|(n, gens, f)| ActionCase { n, gens, f })
    })
}

impl ActionCase {
    pub fn action(&self) -> GroupAction {
        let ctx = vars(self.n);
        let gens: Vec<SignedPermutation> = self
            .gens
            .iter()
            .map(|(p, s)| SignedPermutation::new(p.iter().copied().zip(s.iter().copied()).collect()).unwrap())
            .collect();
        GroupAction::generated_by(&ctx, &gens).unwrap()
    }
}

/// Projector laws of the Reynolds operator and the transfer.
pub fn reynolds_laws(case: &ActionCase) -> Result<(), TestCaseError> {
    let g = case.action();
    let f = build(g.context(), &case.f);
    let r = g.reynolds(&f).unwrap();
    check(g.reynolds(&r).unwrap() == r, || format!("R(R({f})) != R({f})"))?;
    for e in g.elements() {
        check(g.act(e, &r).unwrap() == r, || format!("R({f}) moved by an element"))?;
    }
    let order = Rational::from_integer(g.order().into());
    check(g.transfer(&f).unwrap() == r.scale(&order), || "transfer != |G| R".into())?;
    if g.order() == 2 {
        let triv = g.isotypic_component(&f, Character::Trivial).unwrap();
        let sign = g.isotypic_component(&f, Character::Sign).unwrap();
        check(&triv + &sign == f, || format!("isotypic parts of {f} do not add up"))?;
        check(g.is_invariant(&triv).unwrap(), || "trivial part not invariant".into())?;
    }
    Ok(())
}

/// Generators are invariant, and their degree-`d` products span the
/// invariants of degree `d` for `d <= |G| + 2`.
pub fn generators_span_invariants(g: &GroupAction) -> Result<(), String> {
    let gens = g.algebra_generators().map_err(|e| e.to_string())?;
    for x in &gens {
        if !g.is_invariant(x).unwrap() {
            return Err(format!("generator {x} is not invariant"));
        }
    }
    let weights: Vec<u32> = gens.iter().map(|x| x.max_weighted_degree().unwrap()).collect();
    let ctx = g.context();
    for d in 1..=g.order() as u32 + 2 {
        let mut products = Vec::new();
        for e in exponents(&weights, d) {
            let mut p = Polynomial::one(ctx);
            for (x, k) in gens.iter().zip(&e) {
                p = &p * &x.pow(*k as u32);
            }
            products.push(p);
        }
        let basis = g.invariant_basis(d);
        let mut span = Span::default();
        for p in &products {
            span.insert(p);
        }
        if span.rank() != basis.len() || !basis.iter().all(|b| span.contains(b)) {
            return Err(format!(
                "degree {d}: products span {} dimensions, invariants have {}",
                span.rank(),
                basis.len()
            ));
        }
    }
    Ok(())
}

/// The group actions used by the strata.
pub fn paper_actions() -> Vec<(&'static str, GroupAction)> {
    let swap = vars(2);
    let chain = VarTable::new(["r", "t1", "t2"]).unwrap().shared();
    let star = vars(3);
    let four = VarTable::new(["v1", "v2", "v3", "v4"]).unwrap().shared();
    let sp = |v: Vec<(usize, bool)>| SignedPermutation::new(v).unwrap();
    vec![
        (
            "swap of two branches",
            GroupAction::generated_by(&swap, &[sp(vec![(1, false), (0, false)])]).unwrap(),
        ),
        (
            "reversal of a chain of three",
            GroupAction::generated_by(&chain, &[sp(vec![(0, true), (2, false), (1, false)])]).unwrap(),
        ),
        ("S3 on three branches", GroupAction::symmetric(&star)),
        (
            "reversal of a chain of four",
            GroupAction::generated_by(&four, &[sp(vec![(1, false), (0, false), (3, false), (2, false)])]).unwrap(),
        ),
    ]
}
