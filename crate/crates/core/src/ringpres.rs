//! Finitely presented graded algebras, morphisms between them, and fiber
//! products built from generator pairs.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::groebner::{map_kernel, monomials_of_weighted_degree, GroebnerBasis, Ideal};
use crate::linalg::{concat, Coordinates, Echelon};
use crate::poly::{Context, Monomial, Polynomial, VarTable, WeightedDegree};
use std::sync::Arc;

/// `Q[vars]/relations` with weighted-homogeneous relations.
#[derive(Clone, Debug)]
pub struct Presentation {
    label: String,
    relations: Ideal,
}

impl Presentation {
    pub fn new(label: impl Into<String>, ctx: &Context, relations: Vec<Polynomial>) -> Result<Self> {
        let p = Presentation {
            label: label.into(),
            relations: Ideal::new(ctx, relations)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_ideal(label: impl Into<String>, relations: Ideal) -> Result<Self> {
        let p = Presentation {
            label: label.into(),
            relations,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn free(label: impl Into<String>, ctx: &Context) -> Self {
        Presentation {
            label: label.into(),
            relations: Ideal::zero(ctx),
        }
    }

    /// Homogeneous relations and a proper ideal.
    pub fn validate(&self) -> Result<()> {
        for r in self.relations.generators() {
            if let WeightedDegree::Inhomogeneous(degrees) = r.weighted_degree() {
                return Err(Error::Inhomogeneous {
                    relation: r.to_string(),
                    degrees,
                });
            }
        }
        if !self.relations.is_proper() {
            return Err(Error::UnitIdeal(self.label.clone()));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn context(&self) -> &Context {
        self.relations.context()
    }

    pub fn relations(&self) -> &Ideal {
        &self.relations
    }

    pub fn basis(&self) -> Arc<GroebnerBasis> {
        self.relations.basis()
    }

    pub fn normal_form(&self, f: &Polynomial) -> Result<Polynomial> {
        self.relations.reduce(f)
    }

    pub fn is_zero(&self, f: &Polynomial) -> Result<bool> {
        self.relations.contains(f)
    }

    /// Number of standard monomials of weighted degree `d`.
    pub fn graded_dimension(&self, d: u32) -> usize {
        self.basis().standard_monomials_of_degree(d).len()
    }

    /// Same ring: identical variables and equal relation ideals.
    pub fn same_as(&self, other: &Presentation) -> Result<bool> {
        if **self.context() != **other.context() {
            return Ok(false);
        }
        self.relations.equals(&other.relations)
    }

    pub fn quotient(&self, label: impl Into<String>, extra: &[Polynomial]) -> Result<Presentation> {
        Presentation::from_ideal(label, self.relations.with_generators(extra)?)
    }

    /// Minimal generators of the relation ideal, for display.
    pub fn minimal_relations(&self) -> Result<Vec<Polynomial>> {
        self.relations.minimal_generators()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[{}]", self.context())?;
        let rels = self
            .minimal_relations()
            .unwrap_or_else(|_| self.relations.generators().to_vec());
        if !rels.is_empty() {
            write!(f, " / (")?;
            for (i, r) in rels.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{r}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Ring map given by one image per source generator.
#[derive(Clone, Debug)]
pub struct Morphism {
    source: Presentation,
    target: Presentation,
    images: Vec<Polynomial>,
}

/// Outcome of [`Morphism::check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismCheck {
    pub well_defined: bool,
    /// First relation whose image is nonzero, with that image's normal form.
    pub failure: Option<(Polynomial, Polynomial)>,
}

impl Morphism {
    pub fn new(source: &Presentation, target: &Presentation, images: Vec<Polynomial>) -> Result<Self> {
        let sctx = source.context();
        if images.len() != sctx.len() {
            return Err(Error::invalid(format!(
                "{} images for {} generators of {}",
                images.len(),
                sctx.len(),
                source.label()
            )));
        }
        for (i, img) in images.iter().enumerate() {
            if **img.context() != **target.context() {
                return Err(Error::ContextMismatch);
            }
            match img.weighted_degree() {
                WeightedDegree::Zero => {}
                WeightedDegree::Homogeneous(d) if d == sctx.weight(i) => {}
                other => {
                    return Err(Error::invalid(format!(
                        "image of `{}` has degree {:?}, expected {}",
                        sctx.name(i),
                        other,
                        sctx.weight(i)
                    )))
                }
            }
        }
        Ok(Morphism {
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    pub fn source(&self) -> &Presentation {
        &self.source
    }

    pub fn target(&self) -> &Presentation {
        &self.target
    }

    pub fn images(&self) -> &[Polynomial] {
        &self.images
    }

    /// Normal form of the image of `f` in the target.
    pub fn apply(&self, f: &Polynomial) -> Result<Polynomial> {
        let img = f.substitute_indexed(self.target.context(), &self.images)?;
        self.target.normal_form(&img)
    }

    /// Every source relation maps into the target ideal.
    pub fn check(&self) -> Result<MorphismCheck> {
        for r in self.source.relations().generators() {
            let nf = self.apply(r)?;
            if !nf.is_zero() {
                return Ok(MorphismCheck {
                    well_defined: false,
                    failure: Some((r.clone(), nf)),
                });
            }
        }
        Ok(MorphismCheck {
            well_defined: true,
            failure: None,
        })
    }

    /// Kernel as an ideal of the source polynomial ring.
    pub fn kernel(&self) -> Result<Ideal> {
        map_kernel(
            self.source.context(),
            self.source.relations().generators(),
            self.target.relations(),
            &self.images,
        )
    }
}

/// A candidate generator `(a, c)` of `A ×_D C`.
#[derive(Clone, Debug)]
pub struct GeneratorPair {
    pub name: String,
    pub closed: Polynomial,
    pub open: Polynomial,
}

impl GeneratorPair {
    pub fn new(name: impl Into<String>, closed: Polynomial, open: Polynomial) -> Self {
        GeneratorPair {
            name: name.into(),
            closed,
            open,
        }
    }

    fn weight(&self) -> Result<u32> {
        let deg = |p: &Polynomial| match p.weighted_degree() {
            WeightedDegree::Zero => Ok(None),
            WeightedDegree::Homogeneous(d) => Ok(Some(d)),
            WeightedDegree::Inhomogeneous(degrees) => Err(Error::Inhomogeneous {
                relation: p.to_string(),
                degrees,
            }),
        };
        match (deg(&self.closed)?, deg(&self.open)?) {
            (Some(a), Some(c)) if a != c => Err(Error::invalid(format!(
                "pair `{}` mixes degrees {a} and {c}",
                self.name
            ))),
            (Some(a), _) | (None, Some(a)) if a > 0 => Ok(a),
            _ => Err(Error::invalid(format!(
                "pair `{}` has no positive degree",
                self.name
            ))),
        }
    }
}

/// Check that `p: A → D` and `q: C → D` share `D` and are well defined.
fn check_cospan(p: &Morphism, q: &Morphism) -> Result<()> {
    if **p.target().context() != **q.target().context() {
        return Err(Error::ContextMismatch);
    }
    for m in [p, q] {
        if let Some((rel, nf)) = m.check()?.failure {
            return Err(Error::invalid(format!(
                "map {} -> {} sends relation `{rel}` to `{nf}`",
                m.source().label(),
                m.target().label()
            )));
        }
    }
    Ok(())
}

fn check_pairs(p: &Morphism, q: &Morphism, pairs: &[GeneratorPair]) -> Result<Context> {
    let mut vars = Vec::new();
    for pair in pairs {
        if **pair.closed.context() != **p.source().context()
            || **pair.open.context() != **q.source().context()
        {
            return Err(Error::ContextMismatch);
        }
        let diff = &p.apply(&pair.closed)? - &q.apply(&pair.open)?;
        if !diff.is_zero() {
            return Err(Error::IncompatiblePair {
                name: pair.name.clone(),
                difference: diff.to_string(),
            });
        }
        vars.push((pair.name.clone(), pair.weight()?));
    }
    Ok(VarTable::with_weights(vars)?.shared())
}

/// `A ×_D C` presented on generator pairs.
#[derive(Clone, Debug)]
pub struct FiberSquare {
    pub p: Morphism,
    pub q: Morphism,
    pub pairs: Vec<GeneratorPair>,
    pub result: Presentation,
    pub proj_closed: Morphism,
    pub proj_open: Morphism,
    pub kernel_closed: Ideal,
    pub kernel_open: Ideal,
}

/// Dimensions in one degree of a graded certification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeCertificate {
    pub degree: u32,
    /// Span of the degree-`d` monomials in the pairs.
    pub generated: usize,
    /// Dimension of `{(a, c) : p(a) = q(c)}` in degree `d`.
    pub pairs: usize,
    /// Graded dimension of the presented ring, when one is at hand.
    pub presentation: Option<usize>,
}

impl DegreeCertificate {
    pub fn certified(&self) -> bool {
        self.generated == self.pairs && self.presentation.is_none_or(|n| n == self.pairs)
    }
}

/// Memoized normal forms of images of monomials under a ring map.
struct MonomialImages<'a> {
    images: &'a [Polynomial],
    target: &'a GroebnerBasis,
    memo: HashMap<Monomial, Polynomial>,
}

impl<'a> MonomialImages<'a> {
    fn new(images: &'a [Polynomial], target: &'a GroebnerBasis) -> Self {
        MonomialImages {
            images,
            target,
            memo: HashMap::new(),
        }
    }

    fn get(&mut self, m: &Monomial) -> Polynomial {
        if let Some(p) = self.memo.get(m) {
            return p.clone();
        }
        let ctx = self.target.context();
        let out = match m.exponents().iter().position(|&e| e > 0) {
            None => self.target.reduce(&Polynomial::one(ctx)).unwrap(),
            Some(i) => {
                let mut rest = m.clone();
                rest.set(i, m.exponents()[i] - 1);
                let r = self.get(&rest);
                self.target.reduce(&(&r * &self.images[i])).unwrap()
            }
        };
        self.memo.insert(m.clone(), out.clone());
        out
    }
}

/// Per-degree comparison of the span of monomials in `pairs` against the
/// full space of compatible pairs, for degrees `1..=dmax`.
pub fn graded_surjectivity(
    p: &Morphism,
    q: &Morphism,
    pairs: &[GeneratorPair],
    dmax: u32,
) -> Result<Vec<DegreeCertificate>> {
    check_cospan(p, q)?;
    let tags = check_pairs(p, q, pairs)?;
    let a_gb = p.source().basis();
    let c_gb = q.source().basis();
    let d_gb = p.target().basis();
    let closed: Vec<Polynomial> = pairs.iter().map(|x| x.closed.clone()).collect();
    let open: Vec<Polynomial> = pairs.iter().map(|x| x.open.clone()).collect();
    let mut tag_a = MonomialImages::new(&closed, &a_gb);
    let mut tag_c = MonomialImages::new(&open, &c_gb);
    let mut a_d = MonomialImages::new(p.images(), &d_gb);
    let mut c_d = MonomialImages::new(q.images(), &d_gb);

    let mut out = Vec::new();
    for d in 1..=dmax {
        // pairs space: dim A_d + dim C_d - rank(p(A_d) + q(C_d))
        let a_std = a_gb.standard_monomials_of_degree(d);
        let c_std = c_gb.standard_monomials_of_degree(d);
        let mut coords = Coordinates::new();
        let mut ech = Echelon::new();
        for m in &a_std {
            ech.insert(coords.row(&a_d.get(m), 0));
        }
        for m in &c_std {
            ech.insert(coords.row(&c_d.get(m), 0));
        }
        let pair_dim = a_std.len() + c_std.len() - ech.rank();

        let mut ca = Coordinates::new();
        let mut cc = Coordinates::new();
        let mut rows = Vec::new();
        for m in monomials_of_weighted_degree(tags.weights(), d) {
            rows.push((ca.row(&tag_a.get(&m), 0), cc.row(&tag_c.get(&m), 0)));
        }
        let offset = ca.len();
        let mut span = Echelon::new();
        for (ra, rc) in rows {
            span.insert(concat(ra, rc, offset));
        }
        out.push(DegreeCertificate {
            degree: d,
            generated: span.rank(),
            pairs: pair_dim,
            presentation: None,
        });
    }
    Ok(out)
}

/// Fiber product of `p: A → D` and `q: C → D` on the given generator pairs.
/// Relations are the intersection of the kernels of the two projections.
pub fn fiber_product(
    label: impl Into<String>,
    p: &Morphism,
    q: &Morphism,
    pairs: Vec<GeneratorPair>,
) -> Result<FiberSquare> {
    check_cospan(p, q)?;
    let tags = check_pairs(p, q, &pairs)?;
    let closed: Vec<Polynomial> = pairs.iter().map(|x| x.closed.clone()).collect();
    let open: Vec<Polynomial> = pairs.iter().map(|x| x.open.clone()).collect();
    let kernel_closed = map_kernel(&tags, &[], p.source().relations(), &closed)?;
    let kernel_open = map_kernel(&tags, &[], q.source().relations(), &open)?;
    let relations = kernel_closed.intersect(&kernel_open)?;
    let result = Presentation::from_ideal(label, relations)?;
    let proj_closed = Morphism::new(&result, p.source(), closed)?;
    let proj_open = Morphism::new(&result, q.source(), open)?;
    Ok(FiberSquare {
        p: p.clone(),
        q: q.clone(),
        pairs,
        result,
        proj_closed,
        proj_open,
        kernel_closed,
        kernel_open,
    })
}

impl FiberSquare {
    /// Graded surjectivity through `dmax`, with the result's own dimensions.
    pub fn certify(&self, dmax: u32) -> Result<Vec<DegreeCertificate>> {
        let mut certs = graded_surjectivity(&self.p, &self.q, &self.pairs, dmax)?;
        for c in certs.iter_mut() {
            c.presentation = Some(self.result.graded_dimension(c.degree));
        }
        Ok(certs)
    }

    /// Quotient of the result by the preimage of `(I1, I2)`, with `I1` in the
    /// closed factor and `I2` in the open one.
    pub fn apply_quotient(
        &self,
        label: impl Into<String>,
        closed_extra: &[Polynomial],
        open_extra: &[Polynomial],
    ) -> Result<Presentation> {
        if closed_extra.is_empty() && open_extra.is_empty() {
            let mut r = self.result.clone();
            r.label = label.into();
            return Ok(r);
        }
        let tags = self.result.context();
        let a = self.p.source().relations().with_generators(closed_extra)?;
        let c = self.q.source().relations().with_generators(open_extra)?;
        let kc = map_kernel(tags, &[], &a, self.proj_closed.images())?;
        let ko = map_kernel(tags, &[], &c, self.proj_open.images())?;
        Presentation::from_ideal(label, kc.intersect(&ko)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(vars: &[(&str, u32)]) -> Context {
        VarTable::with_weights(vars.iter().copied()).unwrap().shared()
    }

    fn v(c: &Context, n: &str) -> Polynomial {
        Polynomial::var(c, n).unwrap()
    }

    #[test]
    fn validation() {
        let k = table(&[("k1", 1), ("k2", 2)]);
        assert!(Presentation::new("A", &k, vec![]).is_ok());
        let err = Presentation::new("A", &k, vec![&v(&k, "k1") + &v(&k, "k2")]).unwrap_err();
        assert_eq!(
            err,
            Error::Inhomogeneous {
                relation: "k2 + k1".into(),
                degrees: vec![1, 2]
            }
        );
        assert!(matches!(
            Presentation::new("A", &k, vec![Polynomial::one(&k)]),
            Err(Error::UnitIdeal(_))
        ));
    }

    #[test]
    fn dimensions() {
        let k = table(&[("k1", 1), ("k2", 2)]);
        assert_eq!(Presentation::free("A", &k).graded_dimension(2), 2);
        let k2 = table(&[("k2", 2)]);
        assert_eq!(Presentation::free("C", &k2).graded_dimension(3), 0);
    }

    fn stage_one() -> (Morphism, Morphism, Vec<GeneratorPair>) {
        let k = table(&[("k1", 1), ("k2", 2)]);
        let k2 = table(&[("k2", 2)]);
        let a = Presentation::free("A", &k);
        let d = Presentation::new("D", &k, vec![v(&k, "k1")]).unwrap();
        let c = Presentation::free("C", &k2);
        let p = Morphism::new(&a, &d, vec![v(&k, "k1"), v(&k, "k2")]).unwrap();
        let q = Morphism::new(&c, &d, vec![v(&k, "k2")]).unwrap();
        let pairs = vec![
            GeneratorPair::new("k1", v(&k, "k1"), Polynomial::zero(&k2)),
            GeneratorPair::new("k2", v(&k, "k2"), v(&k2, "k2")),
        ];
        (p, q, pairs)
    }

    #[test]
    fn morphism_checks() {
        let (_, q, _) = stage_one();
        assert!(q.check().unwrap().well_defined);
        let k = table(&[("k1", 1), ("k2", 2)]);
        let a = Presentation::free("A", &k);
        let id = Morphism::new(&a, &a, vec![v(&k, "k1"), v(&k, "k2")]).unwrap();
        assert!(id.check().unwrap().well_defined);
        let x = table(&[("x", 1)]);
        let quot = Presentation::new("B", &x, vec![v(&x, "x").pow(2)]).unwrap();
        let free = Presentation::free("F", &x);
        let bad = Morphism::new(&quot, &free, vec![v(&x, "x")]).unwrap();
        let check = bad.check().unwrap();
        assert!(!check.well_defined);
        assert_eq!(check.failure.unwrap().1, v(&x, "x").pow(2));
    }

    #[test]
    fn base_fiber_product() {
        let (p, q, pairs) = stage_one();
        let sq = fiber_product("B", &p, &q, pairs).unwrap();
        assert!(sq.result.relations().generators().is_empty());
        assert_eq!(sq.result.context().names(), &["k1".to_string(), "k2".to_string()]);
        for c in sq.certify(6).unwrap() {
            assert!(c.certified(), "{c:?}");
        }
        let same = sq.apply_quotient("B", &[], &[]).unwrap();
        assert!(same.same_as(&sq.result).unwrap());
    }

    #[test]
    fn incompatible_and_degenerate() {
        let (p, q, mut pairs) = stage_one();
        let k2 = q.source().context().clone();
        pairs[0].open = Polynomial::zero(&k2);
        pairs[1].open = v(&k2, "k2").scale(&crate::poly::rat(2));
        assert!(matches!(
            fiber_product("B", &p, &q, pairs),
            Err(Error::IncompatiblePair { .. })
        ));
        let certs = graded_surjectivity(&p, &q, &[], 2).unwrap();
        assert!(!certs[0].certified());
        assert_eq!(certs[0].degree, 1);
    }

    #[test]
    fn identity_square() {
        let k = table(&[("k1", 1), ("k2", 2)]);
        let a = Presentation::free("A", &k);
        let id = Morphism::new(&a, &a, vec![v(&k, "k1"), v(&k, "k2")]).unwrap();
        let pairs = vec![
            GeneratorPair::new("k1", v(&k, "k1"), v(&k, "k1")),
            GeneratorPair::new("k2", v(&k, "k2"), v(&k, "k2")),
        ];
        let sq = fiber_product("A", &id, &id, pairs).unwrap();
        assert!(sq.result.relations().generators().is_empty());
    }
}
