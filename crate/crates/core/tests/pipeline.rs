use std::path::Path;
use std::sync::OnceLock;

use chowring::parser::{parse_document, DocKind};
use chowring::pipeline::{
    convention_search, emit_report, load_claims_file, run_pipeline, verify_paper, Claim, PipelineData, ReportFormat,
    SignConvention, Status,
};
use chowring::{fiber_product, map_kernel, parse_polynomial, GroupAction, Polynomial, SignedPermutation, VarTable};
use proptest::prelude::*;

fn root() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn data() -> &'static PipelineData {
    static DATA: OnceLock<PipelineData> = OnceLock::new();
    DATA.get_or_init(|| PipelineData::load(&root().join("data/strata")).unwrap())
}

fn claims() -> &'static [Claim] {
    static CLAIMS: OnceLock<Vec<Claim>> = OnceLock::new();
    CLAIMS.get_or_init(|| load_claims_file(&root().join("data/claims.claims")).unwrap())
}

#[test]
fn class_forms_are_invariant_under_every_convention() {
    for conv in SignConvention::all() {
        let run = run_pipeline(data(), conv, 12);
        for spec in &data().strata {
            let Some(sd) = run.stage_data.get(&spec.stage) else { continue };
            for f in &sd.forms {
                assert!(spec.group.is_invariant(f).unwrap(), "{conv}: {}: {f} moves", spec.stage);
            }
        }
    }
}

#[test]
fn eta_pushforward_is_the_transfer_of_its_representative() {
    let ctx = VarTable::new(["r", "t1", "t2"]).unwrap().shared();
    let tau = SignedPermutation::new(vec![(0, true), (2, false), (1, false)]).unwrap();
    let g = GroupAction::generated_by(&ctx, &[tau]).unwrap();
    let rep = parse_polynomial("1/2*(t1 - t2)*(2*r - t1 + t2)", &ctx).unwrap();
    let expected = parse_polynomial("(t1 - t2)*(2*r - t1 + t2)", &ctx).unwrap();
    assert_eq!(g.transfer(&rep).unwrap(), expected);
}

#[test]
fn default_run_is_homogeneous_and_complete() {
    let run = run_pipeline(data(), SignConvention::default(), 12);
    assert!(run.aborted.is_none(), "{:?}", run.aborted);
    let result = run.result.as_ref().unwrap();
    let names: Vec<&str> = result.context().names().iter().map(String::as_str).collect();
    assert_eq!(names, ["k1", "k2", "g2", "g3p", "g3pp", "q", "r", "s", "t", "u"]);
    assert_eq!(result.context().weights(), [1, 2, 2, 3, 3, 4, 4, 5, 5, 6]);
    for r in result.minimal_relations().unwrap() {
        assert!(r.is_homogeneous(), "{r}");
    }
    for stage in &run.stages {
        for row in &stage.certificates {
            assert!(row.certified, "{} degree {}", stage.stage, row.degree);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let a = verify_paper(data(), claims(), SignConvention::default(), 12);
    let b = verify_paper(data(), claims(), SignConvention::default(), 12);
    assert_eq!(
        emit_report(&a, ReportFormat::Machine),
        emit_report(&b, ReportFormat::Machine)
    );
    assert_eq!(emit_report(&a, ReportFormat::Text), emit_report(&b, ReportFormat::Text));
}

#[test]
fn rows_fail_only_with_a_corrected_form() {
    let report = verify_paper(data(), claims(), SignConvention::default(), 12);
    let rows: Vec<_> = report.claims.iter().filter(|c| c.id.starts_with("final.row")).collect();
    assert_eq!(rows.len(), 11);
    for row in rows {
        assert!(row.status == Status::Pass || row.corrected.is_some(), "{}", row.id);
    }
}

fn square(name: &str) -> chowring::parser::SquareSpec {
    let path = root().join("data/squares").join(name);
    let doc = parse_document(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(doc.kind, DocKind::Square);
    doc.to_square().unwrap()
}

#[test]
fn fiber_square_laws() {
    let sq = square("stage3a.square");
    let fp = fiber_product("A", &sq.p, &sq.q, sq.pairs.clone()).unwrap();
    assert!(fp.proj_closed.check().unwrap().well_defined);
    assert!(fp.proj_open.check().unwrap().well_defined);
    for pair in &fp.pairs {
        assert_eq!(
            sq.p.apply(&pair.closed).unwrap(),
            sq.q.apply(&pair.open).unwrap(),
            "square does not commute on {}",
            pair.name
        );
    }
    let tags = fp.result.context();
    let kc = map_kernel(tags, &[], sq.p.source().relations(), fp.proj_closed.images()).unwrap();
    let ko = map_kernel(tags, &[], sq.q.source().relations(), fp.proj_open.images()).unwrap();
    assert!(kc.intersect(&ko).unwrap().equals(fp.result.relations()).unwrap());
    for c in fp.certify(12).unwrap() {
        assert!(c.certified(), "degree {}", c.degree);
        assert_eq!(c.presentation, Some(c.pairs));
    }
    let same = fp.apply_quotient("A", &[], &[]).unwrap();
    assert_eq!(same.basis().polynomials(), fp.result.basis().polynomials());
}

#[test]
fn displayed_restriction_kernel() {
    let sq = square("stage3a.square");
    let ctx = sq.q.source().context().clone();
    let expected = ["q + g2*(k1^2 - 4*g2)", "k2 + 2*g2 - k1^2"]
        .iter()
        .map(|s| parse_polynomial(s, &ctx).unwrap())
        .collect::<Vec<Polynomial>>();
    let kernel = sq.q.kernel().unwrap();
    assert!(kernel
        .equals(&chowring::Ideal::new(&ctx, expected).unwrap())
        .unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Adding a claim never changes the outcomes of the others, so pass
    /// counts move by at most the new claim and consistency can only be lost.
    #[test]
    fn convention_search_is_monotone(mask in prop::collection::vec(any::<bool>(), 69), extra in any::<prop::sample::Index>()) {
        let all = claims();
        let base: Vec<Claim> = all.iter().zip(&mask).filter(|(_, &m)| m).map(|(c, _)| c.clone()).collect();
        let mut more = base.clone();
        more.push(extra.get(all).clone());
        let a = convention_search(data(), &base, 12);
        let b = convention_search(data(), &more, 12);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            prop_assert_eq!(ra.convention, rb.convention);
            prop_assert!(rb.passed == ra.passed || rb.passed == ra.passed + 1);
            for f in &ra.failed {
                prop_assert!(rb.failed.contains(f));
            }
        }
        prop_assert!(!b.consistent || a.consistent);
    }
}
