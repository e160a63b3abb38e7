import json

import pytest
from hypothesis import given, settings, strategies as st

from fermat223 import kraus
from fermat223.curves import get_curve
from fermat223.kraus import (SweepPolicy, a_set, b_set, candidate_sizes, criterion_basic,
                             criterion_p19, criterion_refined, evaluate, find_k,
                             machine_dump, machine_load, s_sets, s_union, sweep,
                             unit_power_is_one)
from fermat223.modarith import is_prime

# k per p = 11..59 for the basic criterion; None where no even k <= 500 works
BASIC_588C1 = [6, None, 6, 10, 2, 2, 12, 6, 18, 22, 6, 2, 12]
BASIC_1176G1 = [2, 12, None, 22, 2, 2, 22, 16, 2, 4, 6, 2, 14]
PS = [p for p in range(11, 60) if is_prime(p)]


# ---- independent reference implementation (pure Python, brute force) ----

def ref_trace(a, q):
    a1, a2, a3, a4, a6 = a
    n = 1
    sq = [0] * q
    for y in range(q):
        sq[y * y % q] += 1
    for x in range(q):
        # complete the square: (2y + a1 x + a3)^2 = 4 rhs + (a1 x + a3)^2
        b = (a1 * x + a3) % q
        disc = (4 * (x**3 + a2 * x * x + a4 * x + a6) + b * b) % q
        n += sq[disc]
    return q + 1 - n


def ref_is_square(t, q):
    return t == 0 or pow(t, (q - 1) // 2, q) == 1


def ref_sqrt(t, q):
    return min(y for y in range(q) if y * y % q == t)


def ref_criterion(p, k, F_coeffs, num, den, m):
    q = k * p + 1
    if not is_prime(q):
        return False
    aF = ref_trace(F_coeffs, q)
    if (aF * aF - 4) % p == 0:
        return False
    for xi in range(1, q):
        if pow(xi, k, q) != 1:
            continue
        t = (1 - num * xi) * pow(den, -1, q) % q
        if not ref_is_square(t, q):
            continue
        d = ref_sqrt(t, q)
        aE = ref_trace((0, m * d, 0, -m * xi, 0), q)
        if (aE * aE - aF * aF) % p == 0:
            return False
    return True


@pytest.mark.parametrize("p", [11, 13, 17, 19, 23])
@pytest.mark.parametrize("label", ["588C1", "1176G1"])
def test_basic_matches_reference(p, label):
    coeffs = get_curve(label).coefficients
    for k in range(2, 40, 2):
        assert criterion_basic(p, k, label) == ref_criterion(p, k, coeffs, 108, 189, 7), (p, k)


def test_p19_matches_reference():
    coeffs = get_curve("F1764").coefficients
    for k in range(2, 40, 2):
        assert criterion_p19(k) == ref_criterion(19, k, coeffs, 4, 21, 21), k


def test_a_set_brute_force():
    for p, k in [(11, 6), (23, 2), (31, 12), (43, 22), (59, 12), (17, 6)]:
        q = k * p + 1
        ref = [x for x in range(1, q) if pow(x, k, q) == 1
               and ref_is_square((1 - 108 * x) * pow(189, -1, q) % q, q)]
        got = a_set(p, k)
        assert [c.xi.value for c in got] == ref
        for c in got:
            assert c.delta.value ** 2 % q == (1 - 108 * c.xi.value) * pow(189, -1, q) % q


def test_b_set_size_at_k34():
    assert len(b_set(34)) == 15


@pytest.mark.parametrize("label,col", [("588C1", BASIC_588C1), ("1176G1", BASIC_1176G1)])
def test_basic_table(label, col):
    assert [find_k(p, label) for p in PS] == col


def test_1176a1_at_11():
    assert find_k(11, "1176A1") == 2


def test_refined_17_374():
    ev = evaluate("refined", 17, 374, "1176G1")
    assert ev.passed
    assert candidate_sizes("refined", 17, 374)["S_union"] == 18
    assert candidate_sizes("refined", 17, 374)["A"] == 176
    assert criterion_refined(17, 374, "1176G1")


def test_p19_least_k():
    assert find_k(19, "F1764", "p19") == 34


def test_refined_s_sets_brute_force():
    p, k = 17, 374
    q = k * p + 1
    r = kraus.sqrt21(q)
    mu = {x for x in range(1, q) if pow(x, k, q) == 1}
    i3 = pow(3, -1, q)
    S = sorted(d for d in range(q)
               if (i3 + r * d) * pow(3 + r, -1, q) % q in mu
               and (i3 - r * d) * pow(3 - r, -1, q) % q in mu)
    got, _ = s_sets(p, k)
    assert [c.d for c in got] == S


def test_root_swap_exchanges_sets():
    for p, k in [(17, 374), (13, 12), (13, 78)]:
        q = k * p + 1
        if not is_prime(q) or kraus.jacobi(21, q) != 1:
            continue
        r = kraus.sqrt21(q)
        S, Sp = s_sets(p, k, r)
        T, Tp = s_sets(p, k, q - r)
        assert {c.d for c in S} == {(-c.d) % q for c in Tp}
        assert {c.d for c in Sp} == {(-c.d) % q for c in T}
        # the curves only see delta^2, so the union's xi values agree
        assert sorted(c.x for c in s_union(p, k, r)) == sorted(c.x for c in s_union(p, k, q - r))


def test_unit_power_root_independent():
    for q in [6359, 103, 1021, 2003]:
        if not is_prime(q) or kraus.jacobi(21, q) != 1:
            continue
        r = kraus.sqrt21(q)
        for k in range(1, 60):
            assert unit_power_is_one(q, k, r) == unit_power_is_one(q, k, q - r)


def test_non_prime_q_fails_condition_one():
    ev = evaluate("basic", 11, 4, "588C1")     # 45 is composite
    assert not ev.passed and ev.failed == "(1)"
    with pytest.raises(ValueError):
        a_set(11, 4)


def test_negative_control_13_basic():
    assert find_k(13, "588C1", "basic", 500, "even") is None


def test_failure_diagnostic_names_condition():
    ev = evaluate("basic", 13, 12, "588C1")
    assert not ev.passed and ev.failed in {"(2)", "(3)"}
    assert "FAIL at condition" in ev.describe()


def test_p19_only_at_19():
    with pytest.raises(ValueError):
        evaluate("p19", 23, 2)
    with pytest.raises(ValueError):
        evaluate("bogus", 11, 2)


def test_find_k_parity_validation():
    with pytest.raises(ValueError):
        find_k(11, "588C1", parity="odd")


def test_cross_check_mode():
    kraus.set_cross_check(True)
    kraus.trace_of_label.cache_clear()
    try:
        assert find_k(17, "1176G1", "refined", 400, "all") == 374
        assert find_k(29, "588C1") == 2
    finally:
        kraus.set_cross_check(False)
        kraus.trace_of_label.cache_clear()


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([11, 13, 17, 23, 29, 31]), st.integers(1, 60))
def test_basic_k_parity(p, k):
    # q = kp + 1 is even for odd k, so only even k can ever pass
    if k % 2:
        assert not criterion_basic(p, k, "588C1")


def _run(lo, hi, path=None):
    pol = SweepPolicy(refined_k_max=400)
    return list(sweep(lo, hi, policy=pol, checkpoint=path))


def test_sweep_checkpoint_resume(tmp_path):
    ck = tmp_path / "ck.txt"
    full = _run(11, 40, ck)
    text = ck.read_text().splitlines()
    # simulate a kill: keep half the lines and a torn last line
    ck.write_text("\n".join(text[: len(text) // 2]) + "\n" + text[len(text) // 2][:5])
    resumed = _run(11, 40, ck)
    assert machine_dump(full) == machine_dump(resumed)
    assert machine_dump(_run(11, 40)) == machine_dump(full)


def test_sweep_results():
    reps = _run(11, 24)
    assert kraus.unexpected_unresolved(reps) == []
    assert kraus.unresolved(reps) == [(13, "588C1")]
    final = kraus.final_results(reps)
    assert final[(17, "1176G1")].variant == "refined" and final[(17, "1176G1")].k == 374
    assert final[(19, "F1764")].k == 34
    table = kraus.k_table(reps)
    assert "k (588C1)" in table


def test_machine_round_trip():
    reps = _run(11, 20)
    text = machine_dump(reps, {"pmin": 11})
    back, meta = machine_load(text)
    assert machine_dump(back, meta) == text
    assert meta == {"pmin": 11}
    json.loads(text)


def test_checkpoint_line_parse():
    rep = kraus.CriterionReport(13, "588C1", "basic", None, None)
    assert kraus.parse_checkpoint_line(rep.checkpoint_line()).k is None
    assert kraus.parse_checkpoint_line("garbage") is None
    assert kraus.parse_checkpoint_line("13,588C1,nope,2,27") is None
