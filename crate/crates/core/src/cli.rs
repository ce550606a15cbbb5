//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when verification finds a failing claim (the
//! report is still written), 2 on bad input.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groebner::{Ideal, SubalgebraMembership};
use crate::parser::{parse_polynomial, print_polynomial, DocKind, Document};
use crate::pipeline::{
    convention_search, emit_report, emit_search, load_claims_file, load_document, verify_paper,
    with_path, PipelineData, ReportFormat, SignConvention, Status,
};
use crate::poly::{Context, MonomialOrder, Polynomial};
use crate::ringpres::{fiber_product, Presentation};

#[derive(Parser, Debug)]
#[command(name = "chowring", version, about = "Exact polynomial algebra and Chow ring verification")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Debug)]
struct Flags {
    /// Monomial order for bases and normal forms.
    #[arg(long, global = true, default_value = "grevlex")]
    order: MonomialOrder,
    /// Sign convention for the psi-classes, e.g. `-1,-1,-1`.
    #[arg(long, global = true, default_value = "-1,-1,-1", allow_hyphen_values = true)]
    convention: SignConvention,
    /// Highest degree for graded checks.
    #[arg(long, global = true, default_value_t = 12)]
    dmax: u32,
    /// `text` or `machine` (JSON).
    #[arg(long, global = true, default_value = "text")]
    format: ReportFormat,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced Groebner basis of an ideal.
    Gb { ideal: PathBuf },
    /// Normal form of a polynomial modulo an ideal or presentation.
    Nf {
        input: PathBuf,
        #[arg(long)]
        poly: String,
    },
    /// Ideal membership.
    Member {
        input: PathBuf,
        #[arg(long)]
        poly: String,
    },
    /// Elimination ideal.
    Elim {
        ideal: PathBuf,
        /// Comma-separated variables to eliminate.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Kernel of a ring map.
    Kernel { morphism: PathBuf },
    /// Colon ideal `(I : f)`.
    Colon {
        input: PathBuf,
        #[arg(long)]
        poly: String,
    },
    /// Non-zero-divisor test with a colon-ideal witness.
    Nzd {
        input: PathBuf,
        #[arg(long)]
        element: String,
    },
    /// Intersection of two ideals over the same variables.
    Intersect { first: PathBuf, second: PathBuf },
    /// Subalgebra membership; the ideal's generators span the subalgebra.
    Subalg {
        ideal: PathBuf,
        #[arg(long)]
        poly: String,
    },
    /// Reynolds operator of a group action.
    Reynolds {
        action: PathBuf,
        #[arg(long)]
        poly: String,
    },
    /// Generators of the invariant ring.
    Invgen { action: PathBuf },
    /// Presentation of the invariant ring on its generators.
    Invpres { action: PathBuf },
    /// Fiber product of a square, with its graded certificate.
    Fiber { square: PathBuf },
    /// Graded dimensions of a presented ring.
    Dims { presentation: PathBuf },
    /// Run the stage pipeline and check every claim.
    VerifyPaper {
        strata: PathBuf,
        claims: PathBuf,
        /// Run all sign conventions and report the comparison.
        #[arg(long)]
        search: bool,
    },
}

/// Text and machine renderings of one result.
struct Output {
    text: String,
    machine: Value,
    discrepancy: bool,
}

impl Output {
    fn new(text: String, machine: Value) -> Self {
        Output {
            text,
            machine,
            discrepancy: false,
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let rendered = match cli.flags.format {
                ReportFormat::Text => out.text,
                ReportFormat::Machine => out.machine.as_str().map(str::to_string).unwrap_or_else(|| {
                    let mut s = serde_json::to_string_pretty(&out.machine).expect("serializable");
                    s.push('\n');
                    s
                }),
            };
            if let Err(e) = write_output(cli.flags.out.as_deref(), &rendered) {
                eprintln!("error: {e}");
                return 2;
            }
            i32::from(out.discrepancy)
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    let flags = &cli.flags;
    match &cli.command {
        Command::Gb { ideal } => {
            let ideal = load_ideal(ideal)?;
            let gb = ideal.groebner(&flags.order);
            let mut polys = gb.polynomials().to_vec();
            polys.reverse();
            Ok(poly_list(&polys))
        }
        Command::Nf { input, poly } => {
            let ideal = load_ideal(input)?;
            let f = parse_in(poly, ideal.context())?;
            let nf = ideal.normal_form(&f, &flags.order)?;
            Ok(single(&nf))
        }
        Command::Member { input, poly } => {
            let ideal = load_ideal(input)?;
            let f = parse_in(poly, ideal.context())?;
            let inside = ideal.contains(&f)?;
            Ok(Output::new(format!("{inside}\n"), json!({ "member": inside })))
        }
        Command::Elim { ideal, vars } => {
            let ideal = load_ideal(ideal)?;
            let drop: Vec<&str> = vars.iter().map(String::as_str).collect();
            let out = ideal.eliminate(&drop)?;
            Ok(poly_list(&out.minimal_generators()?))
        }
        Command::Kernel { morphism } => {
            let m = with_path(morphism, document(morphism)?.to_morphism())?;
            Ok(poly_list(&m.kernel()?.minimal_generators()?))
        }
        Command::Colon { input, poly } => {
            let ideal = load_ideal(input)?;
            let f = parse_in(poly, ideal.context())?;
            Ok(poly_list(&ideal.quotient(&f)?.minimal_generators()?))
        }
        Command::Nzd { input, element } => {
            let ideal = load_ideal(input)?;
            let f = parse_in(element, ideal.context())?;
            let check = ideal.nonzerodivisor(&f)?;
            let colon: Vec<String> = check.colon.minimal_generators()?.iter().map(print_polynomial).collect();
            let witness = check.witness.as_ref().map(print_polynomial);
            let mut text = format!("{}\ncolon: {{{}}}\n", check.is_nonzerodivisor, colon.join(", "));
            if let Some(w) = &witness {
                text.push_str(&format!("witness: {w}\n"));
            }
            Ok(Output::new(
                text,
                json!({ "nonzerodivisor": check.is_nonzerodivisor, "colon": colon, "witness": witness }),
            ))
        }
        Command::Intersect { first, second } => {
            let a = load_ideal(first)?;
            let b = load_ideal(second)?;
            let b = b.embed(a.context())?;
            Ok(poly_list(&a.intersect(&b)?.minimal_generators()?))
        }
        Command::Subalg { ideal, poly } => {
            let ideal = load_ideal(ideal)?;
            let f = parse_in(poly, ideal.context())?;
            let sm = SubalgebraMembership::new(ideal.generators())?;
            let expr = sm.express(&f)?;
            let names: Vec<String> = sm
                .tags()
                .names()
                .iter()
                .zip(ideal.generators())
                .map(|(y, g)| format!("{y} = {}", print_polynomial(g)))
                .collect();
            let text = match &expr {
                Some(p) => format!("{}\n{}\n", print_polynomial(p), names.join("\n")),
                None => "not in the subalgebra\n".to_string(),
            };
            Ok(Output::new(
                text,
                json!({ "member": expr.is_some(), "expression": expr.as_ref().map(print_polynomial), "tags": names }),
            ))
        }
        Command::Reynolds { action, poly } => {
            let g = with_path(action, document(action)?.to_action())?;
            let f = parse_in(poly, g.context())?;
            Ok(single(&g.reynolds(&f)?))
        }
        Command::Invgen { action } => {
            let g = with_path(action, document(action)?.to_action())?;
            Ok(poly_list(&g.algebra_generators()?))
        }
        Command::Invpres { action } => {
            let g = with_path(action, document(action)?.to_action())?;
            let gens = g.algebra_generators()?;
            let sm = SubalgebraMembership::new(&gens)?;
            let pres = g.invariant_presentation(&gens, sm.tags(), flags.dmax)?;
            let rels: Vec<String> = pres.relations.minimal_generators()?.iter().map(print_polynomial).collect();
            let tags: Vec<String> = sm
                .tags()
                .names()
                .iter()
                .zip(&gens)
                .map(|(y, p)| format!("{y} = {}", print_polynomial(p)))
                .collect();
            let mut text = String::new();
            for t in &tags {
                text.push_str(&format!("{t}\n"));
            }
            text.push_str(&format!("relations: {{{}}}\n", rels.join(", ")));
            text.push_str(&format!("generates through degree {}: {}\n", flags.dmax, pres.generates()));
            let dims: Vec<Value> = pres
                .dimensions
                .iter()
                .map(|&(d, a, b)| json!({ "degree": d, "generated": a, "invariants": b }))
                .collect();
            let mut out = Output::new(
                text,
                json!({ "generators": tags, "relations": rels, "generates": pres.generates(), "dimensions": dims }),
            );
            out.discrepancy = !pres.generates();
            Ok(out)
        }
        Command::Fiber { square } => {
            let spec = with_path(square, document(square)?.to_square())?;
            let fs = fiber_product("fiber", &spec.p, &spec.q, spec.pairs)?;
            let certs = fs.certify(flags.dmax)?;
            let rels: Vec<String> = fs.result.minimal_relations()?.iter().map(print_polynomial).collect();
            let mut text = format!("{}\nrelations: {{{}}}\n", fs.result.context().names().join(", "), rels.join(", "));
            let mut rows = Vec::new();
            for c in &certs {
                text.push_str(&format!(
                    "degree {:>2}: generated {} pairs {} presentation {} {}\n",
                    c.degree,
                    c.generated,
                    c.pairs,
                    c.presentation.unwrap_or(0),
                    if c.certified() { "ok" } else { "FAIL" }
                ));
                rows.push(json!({
                    "degree": c.degree, "generated": c.generated, "pairs": c.pairs,
                    "presentation": c.presentation, "certified": c.certified(),
                }));
            }
            let mut out = Output::new(
                text,
                json!({ "generators": fs.result.context().names(), "relations": rels, "certificate": rows }),
            );
            out.discrepancy = !certs.iter().all(|c| c.certified());
            Ok(out)
        }
        Command::Dims { presentation } => {
            let p = load_presentation(presentation)?;
            let dims: Vec<usize> = (0..=flags.dmax).map(|d| p.graded_dimension(d)).collect();
            let text = dims
                .iter()
                .enumerate()
                .map(|(d, n)| format!("{d}: {n}\n"))
                .collect();
            Ok(Output::new(text, json!({ "dimensions": dims })))
        }
        Command::VerifyPaper { strata, claims, search } => {
            let data = PipelineData::load(strata)?;
            let claims = load_claims_file(claims)?;
            if *search {
                let s = convention_search(&data, &claims, flags.dmax);
                let mut out = Output::new(
                    emit_search(&s, ReportFormat::Text),
                    Value::String(emit_search(&s, ReportFormat::Machine)),
                );
                out.discrepancy = !s.consistent;
                return Ok(out);
            }
            let report = verify_paper(&data, &claims, flags.convention, flags.dmax);
            let failing = report.claims.iter().any(|c| c.status == Status::Fail) || report.aborted.is_some();
            let mut out = Output::new(
                emit_report(&report, ReportFormat::Text),
                Value::String(emit_report(&report, ReportFormat::Machine)),
            );
            out.discrepancy = failing;
            Ok(out)
        }
    }
}

fn document(path: &Path) -> Result<Document> {
    load_document(path)
}

/// An ideal from an `.ideal` document, or the relations of a presentation.
fn load_ideal(path: &Path) -> Result<Ideal> {
    let doc = document(path)?;
    let ideal = match doc.kind {
        DocKind::Presentation => doc.to_presentation().map(|p| p.relations().clone()),
        _ => doc.to_ideal(),
    };
    with_path(path, ideal)
}

fn load_presentation(path: &Path) -> Result<Presentation> {
    let doc = document(path)?;
    let pres = match doc.kind {
        DocKind::Ideal => doc.to_ideal().and_then(|i| Presentation::from_ideal("P", i)),
        _ => doc.to_presentation(),
    };
    with_path(path, pres)
}

fn parse_in(text: &str, ctx: &Context) -> Result<Polynomial> {
    parse_polynomial(text, ctx)
}

fn single(p: &Polynomial) -> Output {
    let s = print_polynomial(p);
    Output::new(format!("{s}\n"), json!({ "polynomial": s }))
}

fn poly_list(ps: &[Polynomial]) -> Output {
    let items: Vec<String> = ps.iter().map(print_polynomial).collect();
    Output::new(format!("{{{}}}\n", items.join(", ")), json!({ "polynomials": items }))
}
