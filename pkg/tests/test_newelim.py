import json
import math
import random

import pytest
import sympy
from hypothesis import given, strategies as st

from fermat223.curves import get_curve, reduce_mod_q
from fermat223.ecpoint import trace
from fermat223.modarith import prime_divisors
from fermat223.newelim import (BS1_LEVELS, KRAUS2_LEVELS, NORM_PRODUCT, SEMISTABILITY,
                               EliminationVerdict, MissingEigenvalueError, NewformRecord,
                               admissible_primes, deciding_verdict, eliminate_j_invariant,
                               eliminate_norm_product, eliminate_semistability,
                               elimination_report, hecke_bound, load_newforms, norm_product,
                               survivor_names, verdicts)

X = sympy.Symbol("x")


def form(level, label):
    return next(r for r in load_newforms(level) if r.label == label)


def oracle_norm_product(l, rec):
    """Norm over Q(c_l) of the full product, by resultants."""
    g = sympy.Poly(list(rec.eigenvalues[l]), X)
    factors = [X - l - 1, X + l + 1] + [X - 2 * r for r in range(-math.isqrt(l), math.isqrt(l) + 1)]
    val = 1
    for f in factors:
        val *= sympy.resultant(g.as_expr(), f, X)
    return abs(int(val)) * (l if rec.degree != 1 else 1)


def test_hecke_bound():
    assert hecke_bound(588) == 224
    assert hecke_bound(1764) == 672
    assert hecke_bound(1176) == 448
    assert hecke_bound(3528) == 1344
    assert hecke_bound(1) == 0
    with pytest.raises(ValueError):
        hecke_bound(0)


def test_fixture_counts():
    recs = load_newforms()
    assert {lv: sum(1 for r in recs if r.level == lv) for lv in (588, 1176, 1764, 3528)} == \
        {588: 6, 1176: 15, 1764: 13, 3528: 39}


def test_fixture_eigenvalues_cover_the_bound():
    for rec in load_newforms():
        assert set(admissible_primes(rec)) <= set(rec.eigenvalues), rec.name


def test_known_eigenvalues():
    assert form(1764, "f1").rational_eigenvalue(5) == -3
    assert form(1764, "f4").rational_eigenvalue(13) == -5
    assert form(1764, "f4").rational_eigenvalue(19) == 1
    assert form(1764, "f6").rational_eigenvalue(13) == 5
    assert form(1764, "f12").eigenvalues[5] == (1, 0, -2)
    assert form(1764, "f12").eigenvalues[13] == (1, 0, -18)
    assert form(1764, "f13").eigenvalues[5][-1] != 0
    with pytest.raises(ValueError):
        form(1764, "f12").rational_eigenvalue(5)


def test_norm_product_example():
    n = norm_product(5, form(1764, "f12"))
    assert n == 9063040
    assert set(prime_divisors(n)) == {2, 5, 7, 17}


def test_norm_product_against_resultant_oracle():
    rng = random.Random(3)
    recs = load_newforms()
    for rec in rng.sample(recs, 25):
        for l in rng.sample(admissible_primes(rec), 4):
            got = norm_product(l, rec)
            want = oracle_norm_product(l, rec)
            if len(rec.eigenvalues[l]) - 1 == rec.degree or rec.degree == 1:
                assert got == want, (rec.name, l)
            else:
                assert (got == 0) == (want == 0)
                assert set(prime_divisors(got or 1)) == set(prime_divisors(want or 1))


def test_norm_product_errors():
    rec = form(588, "f1")
    with pytest.raises(ValueError):
        norm_product(7, rec)
    with pytest.raises(MissingEigenvalueError):
        norm_product(10007, rec)


def test_eigenvalues_match_attached_curve_traces():
    rng = random.Random(11)
    for rec in load_newforms():
        if rec.degree != 1 or not rec.curve:
            continue
        E = get_curve(rec.curve)
        ls = [l for l in rec.eigenvalues if rec.level % l]
        for l in rng.sample(ls, min(20, len(ls))):
            assert rec.rational_eigenvalue(l) == trace(reduce_mod_q(E, l)), (rec.name, l)


def test_g1_exceptional_primes():
    v = eliminate_norm_product(form(1176, "g1"))
    assert v.eliminable and v.exceptional == {7, 11}
    assert v.eliminates(13) and not v.eliminates(11)


def test_norm_product_vanishing_everywhere():
    v = eliminate_norm_product(form(588, "f3"))
    assert not v.eliminable


def test_j_invariant_rules():
    # Kraus2 levels count only 7 in the j denominator; BS1 levels count 3 or 7
    base = form(588, "f2")
    assert eliminate_j_invariant(base).eliminable
    rec3 = NewformRecord(588, "x", 1, {}, jden_v3=2, jden_v7=0)
    assert not eliminate_j_invariant(rec3).applicable
    rec3b = NewformRecord(1764, "x", 1, {}, jden_v3=2, jden_v7=0)
    assert eliminate_j_invariant(rec3b).eliminable
    assert not eliminate_j_invariant(NewformRecord(1764, "x", 2, {})).applicable


def test_semistability_rule():
    assert not eliminate_semistability(NewformRecord(588, "x", 1, {}, defect7=4)).eliminable
    assert eliminate_semistability(NewformRecord(588, "x", 1, {}, defect7=2)).eliminable
    assert eliminate_semistability(NewformRecord(588, "x", 1, {}, defect7=2), frey_defect=2).eliminable is False
    assert not eliminate_semistability(NewformRecord(588, "x", 2, {})).applicable


def test_deciding_verdict_first_method_wins():
    vs = [EliminationVerdict(NORM_PRODUCT, True, frozenset({11})),
          EliminationVerdict(SEMISTABILITY, True, from_p=11)]
    d = deciding_verdict(vs)
    assert d.method == NORM_PRODUCT and not d.eliminates(11)
    assert deciding_verdict([EliminationVerdict(NORM_PRODUCT, False)]) is None


def test_survivors_kraus2_levels():
    assert survivor_names(KRAUS2_LEVELS, 13) == {"588C", "588E", "1176G", "1176H"}
    assert survivor_names(KRAUS2_LEVELS, 11) == {"588C", "588E", "1176G", "1176H", "1176A", "1176F"}


def test_survivors_1764():
    assert survivor_names(1764, 19) == {"f4", "f6"}
    names = {s.record.cremona_class for s in elimination_report(1764, 19)}
    assert names == {"1764C", "1764A"}


def test_survivors_monotone_in_p():
    # past the largest exceptional prime the survivor set can only shrink
    prev = None
    for p in (11, 13, 17, 19, 23, 29, 31, 37):
        cur = survivor_names(KRAUS2_LEVELS + BS1_LEVELS, p)
        if prev is not None and p > 19:
            assert cur <= prev
        prev = cur
    assert survivor_names(KRAUS2_LEVELS, 23) == {"588C", "588E", "1176G", "1176H"}


def test_record_validation():
    with pytest.raises(ValueError):
        NewformRecord.from_record({"level": 588, "label": "z", "degree": 2,
                                   "eigenvalues": [[5, [2, 0, -2]]]})
    with pytest.raises(ValueError):
        NewformRecord.from_record({"level": 588, "label": "z", "degree": 2,
                                   "eigenvalues": [[5, [1, 0, 0, -2]]]})
    r = NewformRecord.from_record({"level": 588, "label": "z", "degree": 1,
                                   "eigenvalues": [[5, [1, 2]]]})
    assert r.rational_eigenvalue(5) == -2


def test_verdict_order():
    assert [v.method for v in verdicts(form(588, "f1"))] == \
        ["norm-product", "j-invariant", "semistability"]


@given(st.integers(1, 10**5))
def test_hecke_bound_formula(N):
    mu = N
    for p in prime_divisors(N) if N > 1 else ():
        mu = mu * (p + 1) / p
    assert hecke_bound(N) == math.floor(mu / 6 + 1e-9)
