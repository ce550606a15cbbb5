//! Python bindings: polynomials over named rings, ideals, group actions and
//! the verification pipeline.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::path::Path;

use chowring::parser::{self, Entry, Pos};
use chowring::pipeline::{self, PipelineData, ReportFormat, SignConvention};
use chowring::{Context, MonomialOrder, Polynomial, Rational};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn value_error(e: chowring::Error) -> PyErr {
    match e {
        chowring::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn order(name: &str) -> PyResult<MonomialOrder> {
    name.parse().map_err(value_error)
}

fn format(name: &str) -> PyResult<ReportFormat> {
    name.parse().map_err(value_error)
}

fn to_fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

/// A polynomial ring on weighted variables, e.g. `Ring("k1:1, k2:2")`.
#[pyclass(module = "chowring", frozen, from_py_object)]
#[derive(Clone)]
struct Ring {
    ctx: Context,
}

#[pymethods]
impl Ring {
    #[new]
    fn new(vars: &str) -> PyResult<Self> {
        Ok(Ring {
            ctx: parser::table(vars).map_err(value_error)?,
        })
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.ctx.names().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<u32> {
        self.ctx.weights().to_vec()
    }

    fn poly(&self, text: &str) -> PyResult<Poly> {
        Ok(Poly {
            p: chowring::parse_polynomial(text, &self.ctx).map_err(value_error)?,
        })
    }

    fn var(&self, name: &str) -> PyResult<Poly> {
        Ok(Poly {
            p: Polynomial::var(&self.ctx, name).map_err(value_error)?,
        })
    }

    /// The ideal generated by polynomials or polynomial strings.
    fn ideal(&self, gens: Vec<Operand>) -> PyResult<Ideal> {
        let gens = gens
            .into_iter()
            .map(|g| g.into_poly(&self.ctx))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Ideal {
            i: chowring::Ideal::new(&self.ctx, gens).map_err(value_error)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Ring(\"{}\")", self.ctx)
    }
}

/// Polynomial argument: a `Poly`, an integer or text in the ring's variables.
#[derive(FromPyObject)]
enum Operand {
    Poly(Poly),
    Int(i64),
    Text(String),
}

impl Operand {
    fn into_poly(self, ctx: &Context) -> PyResult<Polynomial> {
        match self {
            Operand::Poly(p) => p.p.embed(ctx).map_err(value_error),
            Operand::Int(n) => Ok(Polynomial::constant(ctx, chowring::rat(n))),
            Operand::Text(s) => chowring::parse_polynomial(&s, ctx).map_err(value_error),
        }
    }
}

/// An exact polynomial with rational coefficients.
#[pyclass(module = "chowring", frozen, from_py_object)]
#[derive(Clone)]
struct Poly {
    p: Polynomial,
}

impl Poly {
    fn other(&self, o: Operand) -> PyResult<Polynomial> {
        o.into_poly(self.p.context())
    }
}

#[pymethods]
impl Poly {
    fn __str__(&self) -> String {
        self.p.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly(\"{}\")", self.p)
    }

    fn __add__(&self, o: Operand) -> PyResult<Poly> {
        Ok(Poly { p: &self.p + &self.other(o)? })
    }

    fn __radd__(&self, o: Operand) -> PyResult<Poly> {
        self.__add__(o)
    }

    fn __sub__(&self, o: Operand) -> PyResult<Poly> {
        Ok(Poly { p: &self.p - &self.other(o)? })
    }

    fn __rsub__(&self, o: Operand) -> PyResult<Poly> {
        Ok(Poly { p: &self.other(o)? - &self.p })
    }

    fn __mul__(&self, o: Operand) -> PyResult<Poly> {
        Ok(Poly { p: &self.p * &self.other(o)? })
    }

    fn __rmul__(&self, o: Operand) -> PyResult<Poly> {
        self.__mul__(o)
    }

    fn __neg__(&self) -> Poly {
        Poly { p: -&self.p }
    }

    fn __pow__(&self, e: u32, modulo: Option<Py<PyAny>>) -> PyResult<Poly> {
        if modulo.is_some() {
            return Err(PyValueError::new_err("modular powers are not supported"));
        }
        Ok(Poly { p: self.p.pow(e) })
    }

    fn __eq__(&self, o: Operand) -> bool {
        self.other(o).is_ok_and(|q| q == self.p)
    }

    fn __hash__(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.p.hash(&mut h);
        h.finish()
    }

    fn is_zero(&self) -> bool {
        self.p.is_zero()
    }

    fn is_homogeneous(&self) -> bool {
        self.p.is_homogeneous()
    }

    /// Weighted degree if homogeneous and nonzero, else `None`.
    fn degree(&self) -> Option<u32> {
        match self.p.weighted_degree() {
            chowring::poly::WeightedDegree::Homogeneous(d) => Some(d),
            _ => None,
        }
    }

    #[getter]
    fn ring(&self) -> Ring {
        Ring {
            ctx: self.p.context().clone(),
        }
    }

    /// Substitute `{name: poly}`; every image must live in one ring.
    fn substitute(&self, assignment: BTreeMap<String, Poly>) -> PyResult<Poly> {
        let map = assignment.into_iter().map(|(k, v)| (k, v.p)).collect();
        Ok(Poly {
            p: self.p.substitute(&map).map_err(value_error)?,
        })
    }

    /// Value at a point given as ints, `Fraction`s or strings like `"1/2"`.
    fn evaluate<'py>(&self, py: Python<'py>, point: Vec<Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let values = point
            .iter()
            .map(|x| {
                let s = x.str()?.to_string();
                s.trim()
                    .parse::<Rational>()
                    .map_err(|_| PyValueError::new_err(format!("not a rational number: {s}")))
            })
            .collect::<PyResult<Vec<_>>>()?;
        if values.len() != self.p.context().len() {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates, got {}",
                self.p.context().len(),
                values.len()
            )));
        }
        to_fraction(py, &self.p.evaluate(&values))
    }
}

/// An ideal of a polynomial ring.
#[pyclass(module = "chowring", frozen)]
struct Ideal {
    i: chowring::Ideal,
}

fn wrap(polys: &[Polynomial]) -> Vec<Poly> {
    polys.iter().map(|p| Poly { p: p.clone() }).collect()
}

#[pymethods]
impl Ideal {
    #[getter]
    fn generators(&self) -> Vec<Poly> {
        wrap(self.i.generators())
    }

    #[pyo3(signature = (order = "grevlex"))]
    fn groebner(&self, order: &str) -> PyResult<Vec<Poly>> {
        Ok(wrap(self.i.groebner(&self::order(order)?).polynomials()))
    }

    #[pyo3(signature = (f, order = "grevlex"))]
    fn normal_form(&self, f: Operand, order: &str) -> PyResult<Poly> {
        let f = f.into_poly(self.i.context())?;
        Ok(Poly {
            p: self.i.normal_form(&f, &self::order(order)?).map_err(value_error)?,
        })
    }

    fn __contains__(&self, f: Operand) -> PyResult<bool> {
        let f = f.into_poly(self.i.context())?;
        self.i.contains(&f).map_err(value_error)
    }

    fn contains(&self, f: Operand) -> PyResult<bool> {
        self.__contains__(f)
    }

    fn equals(&self, other: &Ideal) -> PyResult<bool> {
        self.i.equals(&other.i).map_err(value_error)
    }

    fn intersect(&self, other: &Ideal) -> PyResult<Ideal> {
        Ok(Ideal {
            i: self.i.intersect(&other.i).map_err(value_error)?,
        })
    }

    fn quotient(&self, f: Operand) -> PyResult<Ideal> {
        let f = f.into_poly(self.i.context())?;
        Ok(Ideal {
            i: self.i.quotient(&f).map_err(value_error)?,
        })
    }

    fn eliminate(&self, drop: Vec<String>) -> PyResult<Ideal> {
        let drop: Vec<&str> = drop.iter().map(String::as_str).collect();
        Ok(Ideal {
            i: self.i.eliminate(&drop).map_err(value_error)?,
        })
    }

    /// `(is_nzd, colon generators, witness or None)`.
    fn nonzerodivisor(&self, f: Operand) -> PyResult<(bool, Vec<Poly>, Option<Poly>)> {
        let f = f.into_poly(self.i.context())?;
        let c = self.i.nonzerodivisor(&f).map_err(value_error)?;
        Ok((
            c.is_nonzerodivisor,
            wrap(c.colon.generators()),
            c.witness.map(|p| Poly { p }),
        ))
    }

    /// `(zero_dimensional, number of standard monomials or None)`.
    fn zero_dimensional(&self) -> (bool, Option<u64>) {
        let z = self.i.zero_dimensional();
        (z.zero_dimensional, z.standard_monomials)
    }

    fn minimal_generators(&self) -> PyResult<Vec<Poly>> {
        Ok(wrap(&self.i.minimal_generators().map_err(value_error)?))
    }

    fn __repr__(&self) -> String {
        let gens: Vec<String> = self.i.generators().iter().map(|g| g.to_string()).collect();
        format!("Ideal([{}])", gens.join(", "))
    }
}

/// Kernel of `source → target ring / ideal`, variable `i` to `images[i]`.
#[pyfunction]
#[pyo3(name = "map_kernel")]
fn py_map_kernel(source: &Ring, target: &Ideal, images: Vec<Operand>) -> PyResult<Ideal> {
    let imgs = images
        .into_iter()
        .map(|g| g.into_poly(target.i.context()))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(Ideal {
        i: chowring::map_kernel(&source.ctx, &[], &target.i, &imgs).map_err(value_error)?,
    })
}

/// `P` with `f = P(y1, y2, ...)` evaluated at `gens`, or `None`.
#[pyfunction]
#[pyo3(name = "subalgebra_member")]
fn py_subalgebra_member(f: &Poly, gens: Vec<Poly>) -> PyResult<Option<Poly>> {
    let gens: Vec<Polynomial> = gens.into_iter().map(|g| g.p).collect();
    Ok(chowring::subalgebra_member(&f.p, &gens)
        .map_err(value_error)?
        .map(|p| Poly { p }))
}

/// A finite group of signed permutations, from lines like `"t1 -> t2, t2 -> t1"`.
#[pyclass(module = "chowring", frozen)]
struct GroupAction {
    g: chowring::GroupAction,
}

#[pymethods]
impl GroupAction {
    #[new]
    fn new(ring: &Ring, generators: Vec<String>) -> PyResult<Self> {
        let gens = generators
            .into_iter()
            .map(|value| {
                let e = Entry {
                    key: None,
                    value,
                    pos: Pos { line: 1, column: 1 },
                };
                parser::parse_signed_permutation(&e, &ring.ctx)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(value_error)?;
        Ok(GroupAction {
            g: chowring::GroupAction::generated_by(&ring.ctx, &gens).map_err(value_error)?,
        })
    }

    #[getter]
    fn order(&self) -> usize {
        self.g.order()
    }

    fn reynolds(&self, f: Operand) -> PyResult<Poly> {
        let f = f.into_poly(self.g.context())?;
        Ok(Poly {
            p: self.g.reynolds(&f).map_err(value_error)?,
        })
    }

    fn transfer(&self, f: Operand) -> PyResult<Poly> {
        let f = f.into_poly(self.g.context())?;
        Ok(Poly {
            p: self.g.transfer(&f).map_err(value_error)?,
        })
    }

    fn is_invariant(&self, f: Operand) -> PyResult<bool> {
        let f = f.into_poly(self.g.context())?;
        self.g.is_invariant(&f).map_err(value_error)
    }

    fn invariant_basis(&self, degree: u32) -> Vec<Poly> {
        wrap(&self.g.invariant_basis(degree))
    }

    fn algebra_generators(&self) -> PyResult<Vec<Poly>> {
        Ok(wrap(&self.g.algebra_generators().map_err(value_error)?))
    }
}

/// Fiber product of a `.square` file: `(relations, [(degree, generated,
/// pairs, presentation)])`.
#[pyfunction]
#[pyo3(signature = (path, dmax = 12))]
fn fiber(path: &str, dmax: u32) -> PyResult<(Vec<Poly>, Vec<(u32, usize, usize, Option<usize>)>)> {
    let doc = pipeline::load_document(Path::new(path)).map_err(value_error)?;
    let sq = doc.to_square().map_err(value_error)?;
    let fp = chowring::fiber_product("A", &sq.p, &sq.q, sq.pairs).map_err(value_error)?;
    let rels = fp.result.minimal_relations().map_err(value_error)?;
    let certs = fp
        .certify(dmax)
        .map_err(value_error)?
        .into_iter()
        .map(|c| (c.degree, c.generated, c.pairs, c.presentation))
        .collect();
    Ok((wrap(&rels), certs))
}

fn load(strata: &str, claims: &str) -> PyResult<(PipelineData, Vec<pipeline::Claim>)> {
    let data = PipelineData::load(Path::new(strata)).map_err(value_error)?;
    let claims = pipeline::load_claims_file(Path::new(claims)).map_err(value_error)?;
    Ok((data, claims))
}

/// Run the pipeline and check every claim; returns the report text.
#[pyfunction]
#[pyo3(signature = (strata, claims, convention = "-1,-1,-1", dmax = 12, format = "machine"))]
fn verify_paper(py: Python<'_>, strata: &str, claims: &str, convention: &str, dmax: u32, format: &str) -> PyResult<String> {
    let (data, claims) = load(strata, claims)?;
    let conv: SignConvention = convention.parse().map_err(value_error)?;
    let fmt = self::format(format)?;
    Ok(py.detach(|| pipeline::emit_report(&pipeline::verify_paper(&data, &claims, conv, dmax), fmt)))
}

/// Claim outcomes under every sign convention; returns the report text.
#[pyfunction]
#[pyo3(signature = (strata, claims, dmax = 12, format = "machine"))]
fn convention_search(py: Python<'_>, strata: &str, claims: &str, dmax: u32, format: &str) -> PyResult<String> {
    let (data, claims) = load(strata, claims)?;
    let fmt = self::format(format)?;
    Ok(py.detach(|| pipeline::emit_search(&pipeline::convention_search(&data, &claims, dmax), fmt)))
}

#[pymodule]
#[pyo3(name = "chowring")]
fn chowring_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Ring>()?;
    m.add_class::<Poly>()?;
    m.add_class::<Ideal>()?;
    m.add_class::<GroupAction>()?;
    m.add_function(wrap_pyfunction!(py_map_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(py_subalgebra_member, m)?)?;
    m.add_function(wrap_pyfunction!(fiber, m)?)?;
    m.add_function(wrap_pyfunction!(verify_paper, m)?)?;
    m.add_function(wrap_pyfunction!(convention_search, m)?)?;
    Ok(())
}
