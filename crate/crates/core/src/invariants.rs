//! Finite groups of signed variable permutations acting on polynomial rings.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::groebner::{map_kernel, monomials_of_weighted_degree, Ideal, SubalgebraMembership};
use crate::linalg::{Coordinates, Echelon};
use crate::poly::{canonical_order, rat, ratio, Context, Monomial, Polynomial, Rational, VarTable};

/// Variable `i` maps to `sign[i] * x_{target[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPermutation {
    target: Vec<usize>,
    negate: Vec<bool>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        SignedPermutation {
            target: (0..n).collect(),
            negate: vec![false; n],
        }
    }

    /// From `(target, negate)` per variable; fails unless a bijection.
    pub fn new(images: Vec<(usize, bool)>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &(j, _) in &images {
            if j >= n || seen[j] {
                return Err(Error::NotAGroup("images are not a permutation".into()));
            }
            seen[j] = true;
        }
        let (target, negate) = images.into_iter().unzip();
        Ok(SignedPermutation { target, negate })
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.target.iter().enumerate().all(|(i, &j)| i == j) && !self.negate.iter().any(|&s| s)
    }

    pub fn image(&self, i: usize) -> (usize, bool) {
        (self.target[i], self.negate[i])
    }

    /// `self ∘ other`: first `other`, then `self`, as substitutions.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        // x_i -> s_i x_{o(i)} -> s_i s'_{o(i)} x_{self(o(i))}
        let n = self.len();
        let mut target = vec![0; n];
        let mut negate = vec![false; n];
        for i in 0..n {
            let (j, s1) = other.image(i);
            let (k, s2) = self.image(j);
            target[i] = k;
            negate[i] = s1 ^ s2;
        }
        SignedPermutation { target, negate }
    }

    pub fn inverse(&self) -> SignedPermutation {
        let n = self.len();
        let mut target = vec![0; n];
        let mut negate = vec![false; n];
        for i in 0..n {
            let (j, s) = self.image(i);
            target[j] = i;
            negate[j] = s;
        }
        SignedPermutation { target, negate }
    }

    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let n = self.len();
        let terms: Vec<(Monomial, Rational)> = f
            .terms()
            .iter()
            .map(|(m, c)| {
                let mut e = vec![0u16; n];
                let mut odd = false;
                for (i, &x) in m.exponents().iter().enumerate() {
                    if x > 0 {
                        e[self.target[i]] += x;
                        odd ^= self.negate[i] && x % 2 == 1;
                    }
                }
                (Monomial::from_exponents(&e), if odd { -c.clone() } else { c.clone() })
            })
            .collect();
        Polynomial::from_terms(f.context(), terms)
    }

    pub fn display<'a>(&'a self, ctx: &'a VarTable) -> impl fmt::Display + 'a {
        struct D<'a>(&'a SignedPermutation, &'a VarTable);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                for i in 0..self.0.len() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    let (j, s) = self.0.image(i);
                    let sign = if s { "-" } else { "" };
                    write!(f, "{} -> {sign}{}", self.1.name(i), self.1.name(j))?;
                }
                Ok(())
            }
        }
        D(self, ctx)
    }
}

/// Characters of an order-2 group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Character {
    Trivial,
    Sign,
}

/// A finite group of signed permutations, stored element by element.
#[derive(Clone, Debug)]
pub struct GroupAction {
    ctx: Context,
    /// Identity first, then in closure order.
    elements: Vec<SignedPermutation>,
}

impl GroupAction {
    /// The group generated by `gens`.
    pub fn generated_by(ctx: &Context, gens: &[SignedPermutation]) -> Result<Self> {
        let n = ctx.len();
        for g in gens {
            if g.len() != n {
                return Err(Error::NotAGroup(format!(
                    "element acts on {} variables, table has {n}",
                    g.len()
                )));
            }
        }
        let mut elements = vec![SignedPermutation::identity(n)];
        let mut seen: BTreeSet<SignedPermutation> = elements.iter().cloned().collect();
        let mut i = 0;
        while i < elements.len() {
            for g in gens {
                let h = g.compose(&elements[i]);
                if seen.insert(h.clone()) {
                    elements.push(h);
                }
            }
            i += 1;
        }
        Ok(GroupAction {
            ctx: ctx.clone(),
            elements,
        })
    }

    /// From an explicit element list, checking closure and inverses.
    pub fn from_elements(ctx: &Context, elements: Vec<SignedPermutation>) -> Result<Self> {
        let set: BTreeSet<&SignedPermutation> = elements.iter().collect();
        if set.len() != elements.len() {
            return Err(Error::NotAGroup("repeated element".into()));
        }
        if !elements.iter().any(|g| g.is_identity()) {
            return Err(Error::NotAGroup("identity missing".into()));
        }
        for g in &elements {
            if g.len() != ctx.len() {
                return Err(Error::NotAGroup("element of wrong size".into()));
            }
            if !set.contains(&g.inverse()) {
                return Err(Error::NotAGroup(format!(
                    "inverse of {} missing",
                    g.display(ctx)
                )));
            }
            for h in &elements {
                if !set.contains(&g.compose(h)) {
                    return Err(Error::NotAGroup("not closed under composition".into()));
                }
            }
        }
        let mut elements = elements;
        elements.sort_by_key(|g| !g.is_identity());
        Ok(GroupAction {
            ctx: ctx.clone(),
            elements,
        })
    }

    /// The symmetric group permuting all variables.
    pub fn symmetric(ctx: &Context) -> Self {
        let n = ctx.len();
        let mut gens = Vec::new();
        if n > 1 {
            let mut swap: Vec<(usize, bool)> = (0..n).map(|i| (i, false)).collect();
            swap.swap(0, 1);
            gens.push(SignedPermutation::new(swap).unwrap());
            gens.push(SignedPermutation::new((0..n).map(|i| ((i + 1) % n, false)).collect()).unwrap());
        }
        Self::generated_by(ctx, &gens).unwrap()
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn elements(&self) -> &[SignedPermutation] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn act(&self, g: &SignedPermutation, f: &Polynomial) -> Result<Polynomial> {
        self.check(f)?;
        Ok(g.apply(f))
    }

    fn check(&self, f: &Polynomial) -> Result<()> {
        if **f.context() != *self.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    /// `Σ_g g·f`.
    pub fn transfer(&self, f: &Polynomial) -> Result<Polynomial> {
        self.check(f)?;
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for g in &self.elements {
            for (m, c) in g.apply(f).terms() {
                *acc.entry(m.clone()).or_insert_with(|| rat(0)) += c;
            }
        }
        Ok(Polynomial::from_terms(&self.ctx, acc))
    }

    /// `(1/|G|) Σ_g g·f`.
    pub fn reynolds(&self, f: &Polynomial) -> Result<Polynomial> {
        Ok(self
            .transfer(f)?
            .scale(&ratio(1, self.order() as i64)))
    }

    /// First element that moves `f`, if any.
    pub fn moving_element(&self, f: &Polynomial) -> Result<Option<&SignedPermutation>> {
        self.check(f)?;
        Ok(self.elements.iter().find(|g| g.apply(f) != *f))
    }

    pub fn is_invariant(&self, f: &Polynomial) -> Result<bool> {
        Ok(self.moving_element(f)?.is_none())
    }

    /// Error naming the violating element unless `f` is invariant.
    pub fn require_invariant(&self, f: &Polynomial) -> Result<()> {
        match self.moving_element(f)? {
            None => Ok(()),
            Some(g) => Err(Error::NotInvariant {
                poly: f.to_string(),
                element: g.display(&self.ctx).to_string(),
            }),
        }
    }

    /// `(f + χ(τ)·τf)/2` for a group `{1, τ}`.
    pub fn isotypic_component(&self, f: &Polynomial, chi: Character) -> Result<Polynomial> {
        self.check(f)?;
        if self.order() != 2 {
            return Err(Error::invalid(format!(
                "isotypic projection needs a group of order 2, got {}",
                self.order()
            )));
        }
        let tau = g_nontrivial(&self.elements);
        let image = tau.apply(f);
        let sum = match chi {
            Character::Trivial => f + &image,
            Character::Sign => f - &image,
        };
        Ok(sum.scale(&ratio(1, 2)))
    }

    /// A basis of the invariants of weighted degree `d`: Reynolds images of
    /// the degree-`d` monomials in descending canonical order, keeping those
    /// independent of the earlier ones, scaled to primitive form.
    pub fn invariant_basis(&self, d: u32) -> Vec<Polynomial> {
        let canon = canonical_order(&self.ctx);
        let mut monos = monomials_of_weighted_degree(self.ctx.weights(), d);
        monos.sort_by(|a, b| canon.cmp(b, a));
        let mut coords = Coordinates::new();
        let mut ech = Echelon::new();
        let mut out = Vec::new();
        let mut seen: BTreeSet<Vec<u16>> = BTreeSet::new();
        for m in monos {
            // monomials in one orbit give proportional images
            if seen.contains(m.exponents()) {
                continue;
            }
            let mono = Polynomial::monomial(&self.ctx, m.clone(), rat(1));
            for g in &self.elements {
                if let Some((gm, _)) = g.apply(&mono).terms().first() {
                    seen.insert(gm.exponents().to_vec());
                }
            }
            let r = self.reynolds(&mono).unwrap();
            if ech.insert(coords.row(&r, 0)) {
                out.push(r.primitive());
            }
        }
        out
    }

    /// Generators of the invariant ring: a sweep over degrees up to `|G|`
    /// that keeps basis elements outside the subalgebra of those kept so far.
    pub fn algebra_generators(&self) -> Result<Vec<Polynomial>> {
        let mut chosen: Vec<Polynomial> = Vec::new();
        let mut membership: Option<SubalgebraMembership> = None;
        let top = self.order() as u32 * self.ctx.weights().iter().copied().max().unwrap_or(1);
        for d in 1..=top {
            for b in self.invariant_basis(d) {
                let inside = match &membership {
                    Some(sm) => sm.express(&b)?.is_some(),
                    None => false,
                };
                if !inside {
                    chosen.push(b);
                    membership = Some(SubalgebraMembership::new(&chosen)?);
                }
            }
        }
        Ok(chosen)
    }

    /// Relations among invariant generators, named by `tags`, plus a check
    /// that they generate: graded dimensions of the tag algebra and of the
    /// invariant ring agree through degree `bound`.
    pub fn invariant_presentation(
        &self,
        gens: &[Polynomial],
        tags: &Context,
        bound: u32,
    ) -> Result<InvariantPresentation> {
        for g in gens {
            self.require_invariant(g)?;
        }
        let relations = map_kernel(tags, &[], &Ideal::zero(&self.ctx), gens)?;
        let gb = relations.basis();
        let dimensions = (1..=bound)
            .map(|d| {
                (
                    d,
                    gb.standard_monomials_of_degree(d).len(),
                    self.invariant_basis(d).len(),
                )
            })
            .collect();
        Ok(InvariantPresentation {
            relations,
            dimensions,
        })
    }
}

fn g_nontrivial(elements: &[SignedPermutation]) -> &SignedPermutation {
    elements.iter().find(|g| !g.is_identity()).unwrap()
}

/// Relations among invariant generators and the graded generation check.
#[derive(Clone, Debug)]
pub struct InvariantPresentation {
    pub relations: Ideal,
    /// `(degree, dim of generated part, dim of invariants)`.
    pub dimensions: Vec<(u32, usize, usize)>,
}

impl InvariantPresentation {
    pub fn generates(&self) -> bool {
        self.dimensions.iter().all(|&(_, a, b)| a == b)
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

    fn swap_group(c: &Context) -> GroupAction {
        GroupAction::symmetric(c)
    }

    fn tau5(c: &Context) -> GroupAction {
        // (r, t1, t2) -> (-r, t2, t1)
        let g = SignedPermutation::new(vec![(0, true), (2, false), (1, false)]).unwrap();
        GroupAction::generated_by(c, &[g]).unwrap()
    }

    fn tau6(c: &Context) -> GroupAction {
        let g = SignedPermutation::new(vec![(1, false), (0, false), (3, false), (2, false)]).unwrap();
        GroupAction::generated_by(c, &[g]).unwrap()
    }

    #[test]
    fn actions() {
        let c = ctx(&["r_psi", "t1", "t2"]);
        let g = tau5(&c);
        assert_eq!(g.order(), 2);
        let u3 = &v(&c, "r_psi") * &(&v(&c, "t1") - &v(&c, "t2"));
        assert!(g.is_invariant(&u3).unwrap());
        let w = ctx(&["w1", "w2", "w3"]);
        let s3 = GroupAction::symmetric(&w);
        assert_eq!(s3.order(), 6);
        let cyc = SignedPermutation::new(vec![(1, false), (2, false), (0, false)]).unwrap();
        assert_eq!(s3.act(&cyc, &v(&w, "w1")).unwrap(), v(&w, "w2"));
    }

    #[test]
    fn reynolds_and_transfer() {
        let c = ctx(&["t1", "t2"]);
        let g = swap_group(&c);
        let (t1, t2) = (v(&c, "t1"), v(&c, "t2"));
        assert_eq!(g.reynolds(&t1).unwrap(), (&t1 + &t2).scale(&ratio(1, 2)));
        assert_eq!(g.transfer(&(&t1 + &t2).scale(&ratio(1, 2))).unwrap(), &t1 + &t2);

        let c5 = ctx(&["r_psi", "t1", "t2"]);
        let g5 = tau5(&c5);
        assert!(g5.reynolds(&v(&c5, "r_psi")).unwrap().is_zero());
        let d = &v(&c5, "t1") - &v(&c5, "t2");
        let rep = (&d * &(&v(&c5, "r_psi").scale(&rat(2)) - &d)).scale(&ratio(1, 2));
        assert_eq!(g5.transfer(&rep).unwrap(), &d * &(&v(&c5, "r_psi").scale(&rat(2)) - &d));

        let c6 = ctx(&["v1", "v2", "v3", "v4"]);
        let r = tau6(&c6).reynolds(&(&v(&c6, "v1") * &v(&c6, "v4"))).unwrap();
        assert_eq!(r.to_string(), "1/2*v2*v3 + 1/2*v1*v4");
    }

    #[test]
    fn bases() {
        let c6 = ctx(&["v1", "v2", "v3", "v4"]);
        let g = tau6(&c6);
        let b1: Vec<String> = g.invariant_basis(1).iter().map(|p| p.to_string()).collect();
        assert_eq!(b1, vec!["v1 + v2", "v3 + v4"]);
        assert_eq!(g.invariant_basis(2).len(), 6);
        let c5 = ctx(&["r_psi", "t1", "t2"]);
        let b: Vec<String> = tau5(&c5).invariant_basis(1).iter().map(|p| p.to_string()).collect();
        assert_eq!(b, vec!["t1 + t2"]);
    }

    #[test]
    fn isotypic() {
        let c = ctx(&["t1", "t2"]);
        let g = swap_group(&c);
        let (t1, t2) = (v(&c, "t1"), v(&c, "t2"));
        assert_eq!(
            g.isotypic_component(&t1, Character::Sign).unwrap(),
            (&t1 - &t2).scale(&ratio(1, 2))
        );
        assert!(g.isotypic_component(&(&t1 + &t2), Character::Sign).unwrap().is_zero());
        assert!(g.isotypic_component(&(&t1 - &t2), Character::Trivial).unwrap().is_zero());
        let w = ctx(&["w1", "w2", "w3"]);
        assert!(GroupAction::symmetric(&w)
            .isotypic_component(&v(&w, "w1"), Character::Sign)
            .is_err());
    }

    #[test]
    fn group_validation() {
        let c = ctx(&["a", "b"]);
        let swap = SignedPermutation::new(vec![(1, false), (0, false)]).unwrap();
        assert!(GroupAction::from_elements(&c, vec![swap.clone()]).is_err());
        assert!(GroupAction::from_elements(&c, vec![SignedPermutation::identity(2), swap]).is_ok());
        assert!(SignedPermutation::new(vec![(0, false), (0, false)]).is_err());
    }

    #[test]
    fn generators_and_presentations() {
        let c = ctx(&["t1", "t2"]);
        let gens = swap_group(&c).algebra_generators().unwrap();
        assert_eq!(gens.len(), 2);

        let c6 = ctx(&["v1", "v2", "v3", "v4"]);
        let g6 = tau6(&c6);
        assert_eq!(g6.algebra_generators().unwrap().len(), 5);
        let c5 = ctx(&["r_psi", "t1", "t2"]);
        assert_eq!(tau5(&c5).algebra_generators().unwrap().len(), 4);

        let w = ctx(&["w1", "w2", "w3"]);
        let s3 = GroupAction::symmetric(&w);
        let p: Vec<Polynomial> = (1..=3)
            .map(|k| (1..=3).map(|i| v(&w, &format!("w{i}")).pow(k)).fold(Polynomial::zero(&w), |a, b| a + b))
            .collect();
        let tags = VarTable::with_weights([("p1", 1), ("p2", 2), ("p3", 3)]).unwrap().shared();
        let pres = s3.invariant_presentation(&p, &tags, 6).unwrap();
        assert!(pres.relations.generators().is_empty());
        assert!(pres.generates());
        assert!(s3.invariant_presentation(&[v(&w, "w1")], &ctx(&["y1"]), 1).is_err());
    }
}
