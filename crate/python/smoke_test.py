"""Smoke test for the chowring Python bindings. Run from the repository root."""

import json
from fractions import Fraction
from pathlib import Path

import chowring

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def main():
    R = chowring.Ring("t1, t2")
    t1, t2 = R.var("t1"), R.var("t2")
    f = (t1 + t2) ** 2 - 2 * t1 * t2
    assert f == R.poly("t1^2 + t2^2"), f
    assert f.is_homogeneous() and f.degree() == 2
    assert f.evaluate([1, Fraction(1, 2)]) == Fraction(5, 4)
    assert f.substitute({"t1": t2, "t2": t1}) == f

    I = R.ideal(["t1 + t2", "t1*t2"])
    assert sorted(str(g) for g in I.groebner("lex")) == ["t1 + t2", "t2^2"]
    assert "t1^3 + t2^3" in I
    assert I.normal_form("t1*t2 + t1", "lex") == -t2
    assert I.zero_dimensional() == (True, 2)

    swap = chowring.GroupAction(R, ["t1 -> t2, t2 -> t1"])
    assert swap.order == 2
    assert swap.reynolds("t1") == R.poly("1/2*t1 + 1/2*t2")
    assert swap.is_invariant(f)
    gens = swap.algebra_generators()
    assert chowring.subalgebra_member(R.poly("t1^3 + t2^3"), gens) is not None
    assert chowring.subalgebra_member(t1, gens) is None

    S = chowring.Ring("u1, u2")
    K = chowring.map_kernel(S, R.ideal([]), ["t1 + t2", "t1*t2"])
    assert K.generators == [] or all(g.is_zero() for g in K.generators)

    nzd, colon, witness = R.ideal(["t1*t2"]).nonzerodivisor("t1")
    assert not nzd and witness is not None

    rels, certs = chowring.fiber(str(DATA / "squares" / "stage3a.square"), 8)
    assert rels and all(g == p and pres == p for _, g, p, pres in certs)

    report = json.loads(
        chowring.verify_paper(str(DATA / "strata"), str(DATA / "claims.claims"))
    )
    statuses = [c["status"] for c in report["claims"]]
    print(f"claims: {len(statuses)}, passing: {statuses.count('PASS')}")

    try:
        R.poly("t1 +* t2")
    except ValueError as e:
        assert "1:" in str(e)
    else:
        raise AssertionError("parse error not raised")

    print("smoke test ok")


if __name__ == "__main__":
    main()
