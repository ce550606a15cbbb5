//! Exact polynomial algebra for presenting cohomology rings of moduli stacks
//! by gluing strata.

pub mod cli;
pub mod error;
pub mod groebner;
pub mod invariants;
pub mod linalg;
pub mod parser;
pub mod pipeline;
pub mod poly;
pub mod ringpres;

pub use error::{Error, Result};
pub use groebner::{map_kernel, subalgebra_member, GroebnerBasis, Ideal, SubalgebraMembership};
pub use invariants::{Character, GroupAction, SignedPermutation};
pub use parser::{parse_document, parse_expr, parse_polynomial, DocKind, Document, Expr};
pub use poly::{rat, ratio, Context, Monomial, MonomialOrder, Polynomial, Rational, VarTable};
pub use ringpres::{fiber_product, graded_surjectivity, FiberSquare, GeneratorPair, Morphism, Presentation};
