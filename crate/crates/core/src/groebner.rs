//! Gröbner bases and the ideal operations built on them.
//!
//! [`GroebnerBasis::compute`] runs Buchberger's algorithm with the sugar
//! selection strategy and the Gebauer–Möller pair criteria, then returns the
//! reduced monic basis. Everything else (membership, elimination, kernels of
//! ring maps, colon ideals, intersections, subalgebra membership) reduces to
//! basis computations in an enlarged ring with a block order.

use std::collections::{btree_map, BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{
    canonical_order, normalize_terms, Context, Monomial, MonomialOrder, OrderCmp, OrderKey,
    Polynomial, Rational, Term, VarTable, WeightedDegree,
};

/// Term with an integer coefficient; the engine works fraction-free on
/// primitive polynomials with positive leading coefficient.
type ITerm = (Monomial, BigInt);

struct Elem {
    terms: Vec<ITerm>,
    mask: u64,
    sugar: u32,
}

impl Elem {
    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }
}

/// Clear denominators of rational terms (sorted under the engine order).
fn integer_terms(terms: &[Term]) -> Vec<ITerm> {
    let mut den = BigInt::one();
    for (_, c) in terms {
        den = den.lcm(c.denom());
    }
    let out = terms
        .iter()
        .map(|(m, c)| (m.clone(), c.numer() * (&den / c.denom())))
        .collect();
    primitive(out)
}

fn content(terms: &[ITerm]) -> BigInt {
    let mut g = BigInt::zero();
    for (_, c) in terms {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Divide by the content and make the leading coefficient positive.
fn primitive(mut terms: Vec<ITerm>) -> Vec<ITerm> {
    let mut g = content(&terms);
    if terms.first().is_some_and(|t| t.1.is_negative()) {
        g = -g;
    }
    if !g.is_one() && !g.is_zero() {
        for t in terms.iter_mut() {
            t.1 /= &g;
        }
    }
    terms
}

fn monic(terms: &[ITerm]) -> Vec<Term> {
    let lc = &terms[0].1;
    terms
        .iter()
        .map(|(m, c)| (m.clone(), Rational::new(c.clone(), lc.clone())))
        .collect()
}

/// Fraction-free full reduction. Returns `(r, scale)` with `r ≡ scale·f`
/// modulo the reducers found by `find`, and updates `sugar`.
fn pseudo_reduce<'e>(
    f: Vec<ITerm>,
    ord: &OrderCmp,
    weights: &[u32],
    sugar: &mut u32,
    find: impl Fn(&Monomial, u64) -> Option<(&'e [ITerm], u32)>,
) -> (Vec<ITerm>, Rational) {
    let mut scale = Rational::one();
    let mut done: Vec<ITerm> = Vec::new();
    let mut p: BTreeMap<OrderKey, ITerm> = f.into_iter().map(|t| (ord.key(&t.0), t)).collect();
    let mut growth = 0u32;
    while let Some((_, (m, c))) = p.pop_last() {
        let Some((g, gsugar)) = find(&m, m.support_mask()) else {
            done.push((m, c));
            continue;
        };
        let a = &g[0].1;
        let d = c.gcd(a);
        let ap = a / &d;
        let cp = &c / &d;
        if !ap.is_one() {
            for v in p.values_mut() {
                v.1 *= &ap;
            }
            for t in done.iter_mut() {
                t.1 *= &ap;
            }
            scale *= Rational::from_integer(ap);
            growth += 1;
        }
        let q = g[0].0.quotient_of(&m).unwrap();
        *sugar = (*sugar).max(gsugar + q.weighted_degree(weights));
        for (gm, gc) in &g[1..] {
            let mm = gm.mul(&q);
            let delta = gc * &cp;
            match p.entry(ord.key(&mm)) {
                btree_map::Entry::Vacant(v) => {
                    v.insert((mm, -delta));
                }
                btree_map::Entry::Occupied(mut o) => {
                    o.get_mut().1 -= delta;
                    if o.get().1.is_zero() {
                        o.remove();
                    }
                }
            }
        }
        // keep coefficients small once the remainder has been rescaled often
        if growth >= 8 {
            growth = 0;
            let mut g = content(&done);
            for t in p.values() {
                if g.is_one() {
                    break;
                }
                g = g.gcd(&t.1);
            }
            if !g.is_one() && !g.is_zero() {
                for v in p.values_mut() {
                    v.1 /= &g;
                }
                for t in done.iter_mut() {
                    t.1 /= &g;
                }
                scale /= Rational::from_integer(g);
            }
        }
    }
    (done, scale)
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    sugar: u32,
}

struct Engine<'a> {
    ord: &'a OrderCmp,
    weights: &'a [u32],
    elems: Vec<Elem>,
    active: Vec<usize>,
    pairs: Vec<Pair>,
    /// Select pairs by smallest lcm alone. Sugar degrees say little under
    /// pure lex and let intermediate degrees run away.
    normal: bool,
}

impl<'a> Engine<'a> {
    fn new(ord: &'a OrderCmp, weights: &'a [u32]) -> Self {
        Engine {
            ord,
            weights,
            elems: Vec::new(),
            active: Vec::new(),
            pairs: Vec::new(),
            normal: false,
        }
    }

    /// Full reduction by the active elements; the result is primitive.
    fn reduce(&self, f: Vec<ITerm>, mut sugar: u32) -> (Vec<ITerm>, u32) {
        let (r, _) = pseudo_reduce(f, self.ord, self.weights, &mut sugar, |m, mask| {
            self.active
                .iter()
                .map(|&k| &self.elems[k])
                .find(|e| e.mask & !mask == 0 && e.lm().divides(m))
                .map(|e| (e.terms.as_slice(), e.sugar))
        });
        (primitive(r), sugar)
    }

    fn spoly(&self, pair: &Pair) -> Vec<ITerm> {
        let (f, g) = (&self.elems[pair.i], &self.elems[pair.j]);
        let qf = f.lm().quotient_of(&pair.lcm).unwrap();
        let qg = g.lm().quotient_of(&pair.lcm).unwrap();
        let d = f.terms[0].1.gcd(&g.terms[0].1);
        let cf = &g.terms[0].1 / &d;
        let cg = &f.terms[0].1 / &d;
        let mut acc: BTreeMap<OrderKey, ITerm> = BTreeMap::new();
        for (terms, q, c, sign) in [(&f.terms, &qf, &cf, false), (&g.terms, &qg, &cg, true)] {
            for (m, k) in &terms[1..] {
                let mm = m.mul(q);
                let mut v = k * c;
                if sign {
                    v = -v;
                }
                match acc.entry(self.ord.key(&mm)) {
                    btree_map::Entry::Vacant(e) => {
                        e.insert((mm, v));
                    }
                    btree_map::Entry::Occupied(mut o) => {
                        o.get_mut().1 += v;
                        if o.get().1.is_zero() {
                            o.remove();
                        }
                    }
                }
            }
        }
        acc.into_values().rev().collect()
    }

    fn pair_sugar(&self, i: usize, j: usize, lcm: &Monomial) -> u32 {
        let w = self.weights;
        let (f, g) = (&self.elems[i], &self.elems[j]);
        let sf = f.sugar as i64 - f.lm().weighted_degree(w) as i64;
        let sg = g.sugar as i64 - g.lm().weighted_degree(w) as i64;
        (sf.max(sg) + lcm.weighted_degree(w) as i64).max(0) as u32
    }

    /// Gebauer–Möller update with the new element `h`.
    fn update(&mut self, h: usize) {
        let hlm = self.elems[h].lm().clone();
        let mut cands: Vec<(usize, Monomial, bool)> = self
            .active
            .iter()
            .map(|&g| {
                let glm = self.elems[g].lm();
                (g, hlm.lcm(glm), hlm.is_coprime(glm))
            })
            .collect();

        // chain criterion among the new pairs
        let mut keep: Vec<(usize, Monomial, bool)> = Vec::new();
        for idx in 0..cands.len() {
            let (g, ref lcm, coprime) = cands[idx];
            let dominated = |other: &(usize, Monomial, bool)| other.1.divides(lcm);
            let redundant = !coprime
                && (cands[idx + 1..].iter().any(dominated) || keep.iter().any(dominated));
            if !redundant {
                keep.push((g, lcm.clone(), coprime));
            }
        }
        cands.clear();
        // drop product-criterion pairs
        let mut new_pairs: Vec<Pair> = Vec::new();
        for (g, lcm, coprime) in keep {
            if coprime {
                continue;
            }
            let sugar = self.pair_sugar(g, h, &lcm);
            new_pairs.push(Pair {
                i: g,
                j: h,
                lcm,
                sugar,
            });
        }

        // prune old pairs
        let elems = &self.elems;
        self.pairs.retain(|p| {
            if !hlm.divides(&p.lcm) {
                return true;
            }
            let li = hlm.lcm(elems[p.i].lm());
            let lj = hlm.lcm(elems[p.j].lm());
            li == p.lcm || lj == p.lcm
        });
        self.pairs.extend(new_pairs);

        self.active.retain(|&g| !hlm.divides(elems[g].lm()));
        self.active.push(h);
    }

    fn add(&mut self, terms: Vec<ITerm>, sugar: u32) {
        let mask = terms[0].0.support_mask();
        self.elems.push(Elem { terms, mask, sugar });
        let h = self.elems.len() - 1;
        self.update(h);
    }

    fn next_pair(&mut self) -> Option<Pair> {
        if self.pairs.is_empty() {
            return None;
        }
        let mut best = 0;
        for k in 1..self.pairs.len() {
            let (a, b) = (&self.pairs[k], &self.pairs[best]);
            let smaller_lcm = self.ord.cmp(&a.lcm, &b.lcm) == std::cmp::Ordering::Less;
            if (self.normal && smaller_lcm) || (!self.normal && (a.sugar < b.sugar || (a.sugar == b.sugar && smaller_lcm)))
            {
                best = k;
            }
        }
        Some(self.pairs.swap_remove(best))
    }

    /// Process pairs until none of sugar at most `bound` remains (all if `None`).
    /// Returns `false` if the unit ideal was reached.
    fn run(&mut self, bound: Option<u32>) -> bool {
        loop {
            if let Some(b) = bound {
                if !self.pairs.iter().any(|p| p.sugar <= b) {
                    return true;
                }
            }
            let Some(pair) = self.next_pair() else { return true };
            let s = self.spoly(&pair);
            let (r, sugar) = self.reduce(s, pair.sugar);
            if r.is_empty() {
                continue;
            }
            if r[0].0.is_one() {
                return false;
            }
            self.add(r, sugar);
        }
    }
}

/// Reduced, monic Gröbner basis under a fixed order.
#[derive(Debug)]
pub struct GroebnerBasis {
    ctx: Context,
    order: MonomialOrder,
    cmp: OrderCmp,
    /// Terms sorted descending under `cmp`; basis sorted by ascending leading monomial.
    elems: Vec<Vec<Term>>,
    /// The same elements, primitive with integer coefficients.
    ielems: Vec<Vec<ITerm>>,
    masks: Vec<u64>,
    polys: Vec<Polynomial>,
}

impl GroebnerBasis {
    pub fn compute(ctx: &Context, gens: &[Polynomial], order: &MonomialOrder) -> Self {
        let cmp = order.compile(ctx);
        let weights = ctx.weights().to_vec();
        let mut input: Vec<(Vec<ITerm>, u32)> = gens
            .iter()
            .filter(|g| !g.is_zero())
            .map(|g| {
                let sugar = g.max_weighted_degree().unwrap_or(0);
                (integer_terms(&normalize_terms(g.terms().to_vec(), &cmp)), sugar)
            })
            .collect();
        input.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| cmp.cmp(&a.0[0].0, &b.0[0].0)));

        let mut eng = Engine::new(&cmp, &weights);
        eng.normal = *order == MonomialOrder::Lex;
        let mut unit = false;
        for (terms, sugar) in input {
            let (r, s) = eng.reduce(terms, sugar);
            if r.is_empty() {
                continue;
            }
            if r[0].0.is_one() {
                unit = true;
                break;
            }
            eng.add(r, s);
        }
        if !unit {
            unit = !eng.run(None);
        }

        let elems: Vec<Vec<ITerm>> = if unit {
            vec![vec![(Monomial::one(ctx.len()), BigInt::one())]]
        } else {
            interreduce(
                eng.active.iter().map(|&k| eng.elems[k].terms.clone()).collect(),
                &cmp,
                &weights,
            )
        };
        Self::from_reduced(ctx, order, cmp, elems)
    }

    fn from_reduced(ctx: &Context, order: &MonomialOrder, cmp: OrderCmp, mut ielems: Vec<Vec<ITerm>>) -> Self {
        ielems.sort_by(|a, b| cmp.cmp(&a[0].0, &b[0].0));
        let elems: Vec<Vec<Term>> = ielems.iter().map(|e| monic(e)).collect();
        let masks = elems.iter().map(|e| e[0].0.support_mask()).collect();
        let canon = canonical_order(ctx);
        let polys = elems
            .iter()
            .map(|e| Polynomial::from_sorted_terms(ctx, normalize_terms(e.clone(), &canon)))
            .collect();
        GroebnerBasis {
            ctx: ctx.clone(),
            order: order.clone(),
            cmp,
            elems,
            ielems,
            masks,
            polys,
        }
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    /// Basis elements in canonical storage, sorted by ascending leading monomial.
    pub fn polynomials(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.elems.len() == 1 && self.elems[0][0].0.is_one()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.elems.iter().map(|e| e[0].0.clone()).collect()
    }

    fn find_reducer(&self, m: &Monomial) -> Option<usize> {
        let mask = m.support_mask();
        (0..self.elems.len())
            .find(|&k| self.masks[k] & !mask == 0 && self.elems[k][0].0.divides(m))
    }

    /// Remainder of `f` modulo the basis.
    pub fn reduce(&self, f: &Polynomial) -> Result<Polynomial> {
        if !f.same_context(&Polynomial::zero(&self.ctx)) {
            return Err(Error::ContextMismatch);
        }
        if f.is_zero() {
            return Ok(f.clone());
        }
        let terms = normalize_terms(f.terms().to_vec(), &self.cmp);
        // integer form of f is f * (lcm of denominators) / content
        let int = integer_terms(&terms);
        let factor = Rational::new(int[0].1.clone(), 1.into()) / &terms[0].1;
        let mut sugar = 0;
        let (r, scale) = pseudo_reduce(int, &self.cmp, self.ctx.weights(), &mut sugar, |m, mask| {
            (0..self.ielems.len())
                .find(|&k| self.masks[k] & !mask == 0 && self.ielems[k][0].0.divides(m))
                .map(|k| (self.ielems[k].as_slice(), 0))
        });
        let back = (factor * scale).recip();
        let done: Vec<Term> = r
            .into_iter()
            .map(|(m, c)| (m, Rational::from_integer(c) * &back))
            .collect();
        Ok(Polynomial::from_terms(&self.ctx, done))
    }

    pub fn contains(&self, f: &Polynomial) -> Result<bool> {
        Ok(self.reduce(f)?.is_zero())
    }

    /// Whether `m` is a standard monomial (divisible by no leading monomial).
    pub fn is_standard(&self, m: &Monomial) -> bool {
        self.find_reducer(m).is_none()
    }

    /// Standard monomials of weighted degree `d`, descending in canonical order.
    pub fn standard_monomials_of_degree(&self, d: u32) -> Vec<Monomial> {
        let mut out: Vec<Monomial> = monomials_of_weighted_degree(self.ctx.weights(), d)
            .into_iter()
            .filter(|m| self.is_standard(m))
            .collect();
        let canon = canonical_order(&self.ctx);
        out.sort_by(|a, b| canon.cmp(b, a));
        out
    }

    /// Number of standard monomials if finite.
    pub fn standard_monomial_count(&self) -> Option<u64> {
        if self.is_unit() {
            return Some(0);
        }
        let n = self.ctx.len();
        let mut bounds = vec![None; n];
        for lm in self.leading_monomials() {
            let support: Vec<usize> = (0..n).filter(|&i| lm.exponents()[i] > 0).collect();
            if support.len() == 1 {
                let i = support[0];
                let e = lm.exponents()[i];
                bounds[i] = Some(bounds[i].map_or(e, |b: u16| b.min(e)));
            }
        }
        if bounds.iter().any(|b| b.is_none()) {
            return None;
        }
        let bounds: Vec<u16> = bounds.into_iter().map(|b| b.unwrap()).collect();
        let mut count = 0u64;
        let mut m = Monomial::one(n);
        count_box(self, &bounds, 0, &mut m, &mut count);
        Some(count)
    }
}

fn count_box(gb: &GroebnerBasis, bounds: &[u16], i: usize, m: &mut Monomial, count: &mut u64) {
    if i == bounds.len() {
        if gb.is_standard(m) {
            *count += 1;
        }
        return;
    }
    for e in 0..bounds[i] {
        m.set(i, e);
        if e > 0 && !gb.is_standard(m) {
            break;
        }
        count_box(gb, bounds, i + 1, m, count);
    }
    m.set(i, 0);
}

/// All exponent vectors of the given weighted degree.
pub fn monomials_of_weighted_degree(weights: &[u32], d: u32) -> Vec<Monomial> {
    fn rec(weights: &[u32], i: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if i == weights.len() {
            if left == 0 {
                out.push(Monomial::from_exponents(cur));
            }
            return;
        }
        let w = weights[i];
        let mut e = 0;
        while e * w <= left {
            cur[i] = e as u16;
            rec(weights, i + 1, left - e * w, cur, out);
            e += 1;
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u16; weights.len()];
    rec(weights, 0, d, &mut cur, &mut out);
    out
}

/// Minimize and tail-reduce a Gröbner basis.
fn interreduce(mut elems: Vec<Vec<ITerm>>, cmp: &OrderCmp, weights: &[u32]) -> Vec<Vec<ITerm>> {
    elems.sort_by(|a, b| cmp.cmp(&a[0].0, &b[0].0));
    let mut minimal: Vec<Vec<ITerm>> = Vec::new();
    for e in elems {
        if !minimal.iter().any(|m| m[0].0.divides(&e[0].0)) {
            minimal.retain(|m| !e[0].0.divides(&m[0].0));
            minimal.push(e);
        }
    }
    let masks: Vec<u64> = minimal.iter().map(|e| e[0].0.support_mask()).collect();
    let mut out = Vec::with_capacity(minimal.len());
    for (idx, e) in minimal.iter().enumerate() {
        let mut sugar = 0;
        let (tail, scale) = pseudo_reduce(e[1..].to_vec(), cmp, weights, &mut sugar, |m, mask| {
            (0..minimal.len())
                .find(|&k| k != idx && masks[k] & !mask == 0 && minimal[k][0].0.divides(m))
                .map(|k| (minimal[k].as_slice(), 0))
        });
        // scale·tail' = tail, so the element becomes lc·scale·x^lm + tail'
        let lead = Rational::from_integer(e[0].1.clone()) * scale;
        let mut terms = vec![(e[0].0.clone(), lead.numer().clone())];
        let d = lead.denom().clone();
        terms.extend(tail.into_iter().map(|(m, c)| (m, c * &d)));
        out.push(primitive(terms));
    }
    out
}

/// Ideal of a polynomial ring, with memoized Gröbner bases per order.
pub struct Ideal {
    ctx: Context,
    gens: Vec<Polynomial>,
    cache: Mutex<HashMap<MonomialOrder, Arc<GroebnerBasis>>>,
}

impl Clone for Ideal {
    fn clone(&self) -> Self {
        Ideal {
            ctx: self.ctx.clone(),
            gens: self.gens.clone(),
            cache: Mutex::new(self.cache.lock().unwrap().clone()),
        }
    }
}

impl std::fmt::Debug for Ideal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ideal")
            .field("vars", &self.ctx.names())
            .field("gens", &self.gens.iter().map(|g| g.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

/// Outcome of a non-zero-divisor test.
#[derive(Clone, Debug)]
pub struct NzdCheck {
    pub is_nonzerodivisor: bool,
    /// The colon ideal `(I : f)`.
    pub colon: Ideal,
    /// An element of `(I : f)` outside `I`, when one exists.
    pub witness: Option<Polynomial>,
}

/// Outcome of a zero-dimensionality test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroDimension {
    pub zero_dimensional: bool,
    pub standard_monomials: Option<u64>,
}

impl Ideal {
    pub fn new(ctx: &Context, gens: Vec<Polynomial>) -> Result<Self> {
        for g in &gens {
            if !g.same_context(&Polynomial::zero(ctx)) {
                return Err(Error::ContextMismatch);
            }
        }
        let gens = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Ok(Ideal {
            ctx: ctx.clone(),
            gens,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// An ideal together with its reduced grevlex basis.
    fn with_basis(ctx: &Context, gens: Vec<Polynomial>, basis: GroebnerBasis) -> Self {
        let mut cache = HashMap::new();
        cache.insert(MonomialOrder::GrevLex, Arc::new(basis));
        Ideal {
            ctx: ctx.clone(),
            gens,
            cache: Mutex::new(cache),
        }
    }

    pub fn zero(ctx: &Context) -> Self {
        Ideal::new(ctx, Vec::new()).unwrap()
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    /// Reduced Gröbner basis under `order`, computed once and then memoized.
    pub fn groebner(&self, order: &MonomialOrder) -> Arc<GroebnerBasis> {
        if let Some(gb) = self.cache.lock().unwrap().get(order) {
            return gb.clone();
        }
        let gb = Arc::new(GroebnerBasis::compute(&self.ctx, &self.gens, order));
        self.cache
            .lock()
            .unwrap()
            .entry(order.clone())
            .or_insert(gb)
            .clone()
    }

    /// Grevlex basis, the default for membership and equality.
    pub fn basis(&self) -> Arc<GroebnerBasis> {
        self.groebner(&MonomialOrder::GrevLex)
    }

    pub fn normal_form(&self, f: &Polynomial, order: &MonomialOrder) -> Result<Polynomial> {
        self.groebner(order).reduce(f)
    }

    pub fn reduce(&self, f: &Polynomial) -> Result<Polynomial> {
        self.basis().reduce(f)
    }

    pub fn contains(&self, f: &Polynomial) -> Result<bool> {
        self.basis().contains(f)
    }

    pub fn contains_ideal(&self, other: &Ideal) -> Result<bool> {
        for g in &other.gens {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_proper(&self) -> bool {
        !self.basis().is_unit()
    }

    /// Same ideal: reduced grevlex bases coincide.
    pub fn equals(&self, other: &Ideal) -> Result<bool> {
        if *self.ctx != *other.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(self.basis().polynomials() == other.basis().polynomials())
    }

    pub fn sum(&self, other: &Ideal) -> Result<Ideal> {
        if *self.ctx != *other.ctx {
            return Err(Error::ContextMismatch);
        }
        Ideal::new(
            &self.ctx,
            self.gens.iter().chain(&other.gens).cloned().collect(),
        )
    }

    pub fn with_generators(&self, extra: &[Polynomial]) -> Result<Ideal> {
        Ideal::new(&self.ctx, self.gens.iter().chain(extra).cloned().collect())
    }

    pub fn product(&self, other: &Ideal) -> Result<Ideal> {
        let mut gens = Vec::new();
        for a in &self.gens {
            for b in &other.gens {
                gens.push(a.checked_mul(b)?);
            }
        }
        Ideal::new(&self.ctx, gens)
    }

    /// Move to a table containing all variables by name.
    pub fn embed(&self, target: &Context) -> Result<Ideal> {
        Ideal::new(
            target,
            self.gens
                .iter()
                .map(|g| g.embed(target))
                .collect::<Result<_>>()?,
        )
    }

    /// `I ∩ Q[kept variables]`, returned over the table of kept variables.
    pub fn eliminate(&self, drop: &[&str]) -> Result<Ideal> {
        let mut drop_idx = Vec::new();
        for name in drop {
            drop_idx.push(
                self.ctx
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownVariable(name.to_string()))?,
            );
        }
        let keep: Vec<usize> = (0..self.ctx.len())
            .filter(|i| !drop_idx.contains(i))
            .collect();
        let kept_ctx = self.ctx.restrict(&keep).shared();
        Ok(eliminate_indices(&self.ctx, &self.gens, &drop_idx, &keep, &kept_ctx))
    }

    /// `(I : f)`.
    pub fn quotient(&self, f: &Polynomial) -> Result<Ideal> {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial("colon ideal"));
        }
        let principal = Ideal::new(&self.ctx, vec![f.clone()])?;
        let meet = self.intersect(&principal)?;
        let gens = meet
            .basis()
            .polynomials()
            .iter()
            .map(|g| g.exact_div(f))
            .collect::<Result<Vec<_>>>()?;
        Ideal::new(&self.ctx, gens)
    }

    /// Whether `f` is a non-zero-divisor modulo `I`, i.e. `(I : f) = I`.
    pub fn nonzerodivisor(&self, f: &Polynomial) -> Result<NzdCheck> {
        if self.contains(f)? {
            return Err(Error::ZeroInQuotient(f.to_string()));
        }
        let colon = self.quotient(f)?;
        let mut witness = None;
        for g in colon.basis().polynomials() {
            if !self.contains(g)? {
                witness = Some(g.clone());
                break;
            }
        }
        Ok(NzdCheck {
            is_nonzerodivisor: witness.is_none(),
            colon,
            witness,
        })
    }

    /// `I ∩ J` by eliminating `w` from `w·I + (1 - w)·J`.
    pub fn intersect(&self, other: &Ideal) -> Result<Ideal> {
        if *self.ctx != *other.ctx {
            return Err(Error::ContextMismatch);
        }
        let n = self.ctx.len();
        let aux = VarTable::with_weights(
            std::iter::once(("#w".to_string(), 1))
                .chain(self.ctx.names().iter().cloned().zip(self.ctx.weights().iter().copied())),
        )?
        .shared();
        let shift: Vec<Option<usize>> = (0..n).map(|i| Some(i + 1)).collect();
        let w = Polynomial::var_at(&aux, 0);
        let one_minus_w = &Polynomial::one(&aux) - &w;
        let mut gens = Vec::new();
        for g in &self.gens {
            gens.push(&w * &g.remap(&aux, &shift));
        }
        for g in &other.gens {
            gens.push(&one_minus_w * &g.remap(&aux, &shift));
        }
        let keep: Vec<usize> = (1..=n).collect();
        Ok(eliminate_indices(&aux, &gens, &[0], &keep, &self.ctx))
    }

    pub fn zero_dimensional(&self) -> ZeroDimension {
        let count = self.basis().standard_monomial_count();
        ZeroDimension {
            zero_dimensional: count.is_some(),
            standard_monomials: count,
        }
    }

    /// A minimal generating set, taken from the reduced basis in order of
    /// increasing degree. Weighted-homogeneous ideals use one incremental
    /// basis truncated at each degree; others fall back to pairwise tests.
    pub fn minimal_generators(&self) -> Result<Vec<Polynomial>> {
        let mut basis: Vec<Polynomial> = self.basis().polynomials().to_vec();
        basis.sort_by_key(|g| g.max_weighted_degree().unwrap_or(0));
        let homogeneous = basis
            .iter()
            .all(|g| matches!(g.weighted_degree(), WeightedDegree::Homogeneous(_)));
        let kept = if homogeneous {
            minimal_homogeneous(&self.ctx, &basis)
        } else {
            self.minimal_by_membership(basis)?
        };
        Ok(kept.into_iter().map(|g| g.primitive()).collect())
    }

    fn minimal_by_membership(&self, basis: Vec<Polynomial>) -> Result<Vec<Polynomial>> {
        let mut kept: Vec<Polynomial> = Vec::new();
        for g in basis {
            let sub = Ideal::new(&self.ctx, kept.clone())?;
            if !sub.contains(&g)? {
                kept.push(g);
            }
        }
        let mut i = kept.len();
        while i > 0 {
            i -= 1;
            let others: Vec<Polynomial> = kept
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, g)| g.clone())
                .collect();
            if Ideal::new(&self.ctx, others)?.contains(&kept[i])? {
                kept.remove(i);
            }
        }
        Ok(kept)
    }
}

/// Minimal generators of a homogeneous ideal from a generating set sorted by
/// degree: a generator of degree `d` is kept when it does not reduce to zero
/// modulo the basis of the kept ones truncated at degree `d`.
fn minimal_homogeneous(ctx: &Context, sorted: &[Polynomial]) -> Vec<Polynomial> {
    let cmp = MonomialOrder::GrevLex.compile(ctx);
    let weights = ctx.weights().to_vec();
    let mut eng = Engine::new(&cmp, &weights);
    let mut kept = Vec::new();
    for g in sorted {
        let d = g.max_weighted_degree().unwrap_or(0);
        eng.run(Some(d));
        let (r, sugar) = eng.reduce(integer_terms(&normalize_terms(g.terms().to_vec(), &cmp)), d);
        if !r.is_empty() {
            kept.push(g.clone());
            eng.add(r, sugar);
        }
    }
    kept
}

/// Eliminate the `drop` variables of `ctx` from `gens`, returning the
/// result in `kept_ctx` (whose variables are `keep`, in order).
fn eliminate_indices(
    ctx: &Context,
    gens: &[Polynomial],
    drop: &[usize],
    keep: &[usize],
    kept_ctx: &Context,
) -> Ideal {
    // permute so the dropped block comes first
    let perm: Vec<usize> = drop.iter().chain(keep).copied().collect();
    let perm_ctx = VarTable::with_weights(
        perm.iter()
            .map(|&i| (ctx.name(i).to_string(), ctx.weight(i))),
    )
    .expect("permutation of a valid table")
    .shared();
    let mut to_perm = vec![None; ctx.len()];
    for (new, &old) in perm.iter().enumerate() {
        to_perm[old] = Some(new);
    }
    let pgens: Vec<Polynomial> = gens.iter().map(|g| g.remap(&perm_ctx, &to_perm)).collect();
    let order = MonomialOrder::elimination(drop.len());
    let gb = GroebnerBasis::compute(&perm_ctx, &pgens, &order);
    let back: Vec<Option<usize>> = (0..perm.len())
        .map(|k| if k < drop.len() { None } else { Some(k - drop.len()) })
        .collect();
    let kept: Vec<Polynomial> = gb
        .polynomials()
        .iter()
        .filter(|g| g.support().iter().all(|&i| i >= drop.len()))
        .map(|g| g.remap(kept_ctx, &back))
        .collect();
    // the kept part of the reduced block basis is the reduced grevlex basis
    // of the elimination ideal
    let cmp = MonomialOrder::GrevLex.compile(kept_ctx);
    let ielems = kept
        .iter()
        .map(|g| integer_terms(&normalize_terms(g.terms().to_vec(), &cmp)))
        .collect();
    let basis = GroebnerBasis::from_reduced(kept_ctx, &MonomialOrder::GrevLex, cmp, ielems);
    Ideal::with_basis(kept_ctx, kept, basis)
}

/// Graph ideal of the map `y_i ↦ images[i]` over `Q[x]/target`, in the ring
/// with the target variables first and the source variables second.
struct GraphIdeal {
    ctx: Context,
    nx: usize,
    gens: Vec<Polynomial>,
}

fn graph_ideal(source: &Context, target: &Ideal, images: &[Polynomial]) -> Result<GraphIdeal> {
    if images.len() != source.len() {
        return Err(Error::invalid(format!(
            "{} images for {} source variables",
            images.len(),
            source.len()
        )));
    }
    let tctx = target.context();
    for img in images {
        if !img.same_context(&Polynomial::zero(tctx)) {
            return Err(Error::ContextMismatch);
        }
    }
    let nx = tctx.len();
    let combined = VarTable::with_weights(
        tctx.names()
            .iter()
            .zip(tctx.weights())
            .map(|(n, &w)| (format!("x#{n}"), w))
            .chain(
                source
                    .names()
                    .iter()
                    .zip(source.weights())
                    .map(|(n, &w)| (format!("y#{n}"), w)),
            ),
    )?
    .shared();
    let xmap: Vec<Option<usize>> = (0..nx).map(Some).collect();
    let mut gens: Vec<Polynomial> = target
        .generators()
        .iter()
        .map(|g| g.remap(&combined, &xmap))
        .collect();
    for (i, img) in images.iter().enumerate() {
        let y = Polynomial::var_at(&combined, nx + i);
        gens.push(&y - &img.remap(&combined, &xmap));
    }
    Ok(GraphIdeal {
        ctx: combined,
        nx,
        gens,
    })
}

/// Kernel of the ring map `Q[y]/source_relations → Q[x]/target`, `y_i ↦ images[i]`,
/// as an ideal of `Q[y]` (it contains `source_relations`).
pub fn map_kernel(
    source: &Context,
    source_relations: &[Polynomial],
    target: &Ideal,
    images: &[Polynomial],
) -> Result<Ideal> {
    let graph = graph_ideal(source, target, images)?;
    let drop: Vec<usize> = (0..graph.nx).collect();
    let keep: Vec<usize> = (graph.nx..graph.ctx.len()).collect();
    let kernel = eliminate_indices(&graph.ctx, &graph.gens, &drop, &keep, source);
    let mut inside = true;
    for r in source_relations {
        if !r.same_context(&Polynomial::zero(source)) {
            return Err(Error::ContextMismatch);
        }
        inside = inside && kernel.contains(r)?;
    }
    if inside {
        return Ok(kernel);
    }
    let mut gens = kernel.gens;
    gens.extend(source_relations.iter().cloned());
    Ideal::new(source, gens)
}

/// Repeated membership tests in the subalgebra `Q[g_1, …, g_n]` of `Q[x]/I`.
///
/// Tag variables come after the original variables; a polynomial lies in the
/// subalgebra exactly when its normal form under the elimination order
/// involves tag variables only.
pub struct SubalgebraMembership {
    tags: Context,
    nx: usize,
    gb: GroebnerBasis,
    x_map: Vec<Option<usize>>,
    back: Vec<Option<usize>>,
}

impl SubalgebraMembership {
    /// Tags named `y1, y2, …` weighted by the degrees of the generators.
    pub fn new(gens: &[Polynomial]) -> Result<Self> {
        let ctx = gens
            .first()
            .map(|g| g.context().clone())
            .ok_or_else(|| Error::invalid("subalgebra needs at least one generator"))?;
        let tags = VarTable::with_weights(gens.iter().enumerate().map(|(i, g)| {
            (
                format!("y{}", i + 1),
                g.max_weighted_degree().unwrap_or(1).max(1),
            )
        }))?
        .shared();
        Self::with_tags(&Ideal::zero(&ctx), gens, &tags)
    }

    /// Membership in the image of `Q[tags] → Q[x]/ambient`.
    pub fn with_tags(ambient: &Ideal, gens: &[Polynomial], tags: &Context) -> Result<Self> {
        let graph = graph_ideal(tags, ambient, gens)?;
        let nx = graph.nx;
        let gb = GroebnerBasis::compute(&graph.ctx, &graph.gens, &MonomialOrder::elimination(nx));
        Ok(SubalgebraMembership {
            tags: tags.clone(),
            nx,
            x_map: (0..nx).map(Some).collect(),
            back: (0..graph.ctx.len())
                .map(|k| if k < nx { None } else { Some(k - nx) })
                .collect(),
            gb,
        })
    }

    pub fn tags(&self) -> &Context {
        &self.tags
    }

    /// `P` with `f = P(g_1, …, g_n)`, or `None` if `f` is not in the subalgebra.
    pub fn express(&self, f: &Polynomial) -> Result<Option<Polynomial>> {
        if f.context().len() != self.nx {
            return Err(Error::ContextMismatch);
        }
        let lifted = f.remap(self.gb.context(), &self.x_map);
        let nf = self.gb.reduce(&lifted)?;
        if nf.support().iter().any(|&i| i < self.nx) {
            return Ok(None);
        }
        Ok(Some(nf.remap(&self.tags, &self.back)))
    }

    /// Kernel of `Q[tags] → Q[x]/ambient`, i.e. the relations among the generators.
    pub fn relations(&self) -> Result<Ideal> {
        let gens = self
            .gb
            .polynomials()
            .iter()
            .filter(|g| g.support().iter().all(|&i| i >= self.nx))
            .map(|g| g.remap(&self.tags, &self.back))
            .collect();
        Ideal::new(&self.tags, gens)
    }
}

/// `P` with `f = P(gens)` over tag variables `y1, y2, …`, if it exists.
pub fn subalgebra_member(f: &Polynomial, gens: &[Polynomial]) -> Result<Option<Polynomial>> {
    SubalgebraMembership::new(gens)?.express(f)
}

/// Rewrite a named assignment as images aligned with `source`.
pub fn images_from_assignment(
    source: &Context,
    target: &Context,
    assignment: &BTreeMap<String, Polynomial>,
) -> Result<Vec<Polynomial>> {
    source
        .names()
        .iter()
        .map(|n| {
            let p = assignment
                .get(n)
                .cloned()
                .ok_or_else(|| Error::UnassignedVariable(n.clone()))?;
            if !p.same_context(&Polynomial::zero(target)) {
                return Err(Error::ContextMismatch);
            }
            Ok(p)
        })
        .collect()
}
