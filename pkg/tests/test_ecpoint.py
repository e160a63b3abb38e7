import random

import pytest
from hypothesis import given, settings, strategies as st

from fermat223 import ecpoint
from fermat223.curves import get_curve, reduce_mod_q
from fermat223.ecpoint import (INFINITY, AmbiguousOrderError, CurveFq, PointFq,
                               SingularCurveError, add_points, count_points,
                               enumerate_points, multiply_point, negate_point, trace,
                               trace_bsgs, trace_naive, twist)
from fermat223.modarith import FqContext, is_prime

# Frozen from PARI/GP ellap (see tools/gen_fixtures.py for the workflow).
PARI_REGISTRY = {
    "588C1": {107: -14, 647: 48, 1019: -54, 6359: 24, 100003: -160, 999983: -1272,
              1000000007: 46272},
    "1176G1": {107: 8, 647: 8, 1019: 24, 6359: -48, 100003: 172, 999983: -888,
               1000000007: -39976},
    "F1764": {107: 0, 647: 0, 1019: 0, 6359: 0, 100003: 632, 999983: 0, 1000000007: 0},
    "1176A1": {107: -12, 647: -18, 1019: 16, 6359: 6, 100003: 64, 999983: -1984,
               1000000007: -10542},
}

# (q, A, B, a_q) for y^2 = x^3 + A x + B, also from ellap
PARI_SHORT = [
    (2767, 612, 1972, 71), (3407, 2593, 1466, 72), (3359, 2155, 1452, -60),
    (2671, 2233, 1786, -37), (3319, 1814, 1771, 101), (3163, 968, 245, -36),
    (993341, 739358, 329463, 279), (946801, 329789, 823863, -549),
    (800707, 792888, 442479, 1057), (734837, 78015, 351951, 962),
    (750401, 116316, 400362, 510), (626783, 12562, 50388, 326),
    (934098353, 297367027, 420802024, 2578), (666370801, 466543017, 409247796, -30320),
    (633398639, 142150236, 153507826, -6394), (829401863, 389197229, 61207353, 15192),
    (939204089, 907069802, 742176615, 22368), (680619809, 61550838, 218928178, 12174),
    (556436789269, 295637334672, 98230955941, -583518),
    (1089841322491, 110547657347, 394273508547, -225331),
    (837546848053, 120259511658, 634627899010, 1546138),
    (569896725089, 9507566813, 232645082809, -1254797),
    (895733109833, 252073286196, 310842045438, 1337449),
    (781686016591, 103716540664, 646742798427, -746674),
]

PRIMES_BSGS = [q for q in range(230, 20000) if is_prime(q)]


def brute_trace(curve):
    return curve.q + 1 - len(enumerate_points(curve))


@pytest.mark.parametrize("label", sorted(PARI_REGISTRY))
def test_registry_traces_match_pari(label):
    for q, a in PARI_REGISTRY[label].items():
        assert trace(reduce_mod_q(get_curve(label), q)) == a, (label, q)


@pytest.mark.parametrize("q,A,B,a", PARI_SHORT)
def test_short_traces_match_pari(q, A, B, a):
    assert trace(CurveFq.short(FqContext(q), A, B)) == a


def test_spec_example_588c1():
    assert trace_naive(reduce_mod_q(get_curve("588C1"), 107)) == -14


def test_twist_negates():
    E = reduce_mod_q(get_curve("588C1"), 1019)
    assert trace(twist(E)) == 54
    assert trace(twist(twist(E))) == trace(E)


def test_naive_agrees_with_enumeration():
    rng = random.Random(7)
    for q in (5, 7, 11, 13, 101, 107, 229):
        for _ in range(5):
            while True:
                a = [rng.randrange(q) for _ in range(5)]
                try:
                    E = CurveFq(FqContext(q), a)
                    break
                except SingularCurveError:
                    pass
            assert trace_naive(E) == brute_trace(E)


def test_singular_rejected():
    with pytest.raises(SingularCurveError):
        CurveFq(FqContext(7), (0, 0, 0, 0, 0))
    with pytest.raises(SingularCurveError):
        CurveFq.short(FqContext(11), 0, 0)


def test_bsgs_refuses_small_q():
    with pytest.raises(ValueError):
        trace_bsgs(CurveFq.short(FqContext(229), 1, 1))


def test_bsgs_budget_exhaustion_is_reported():
    # a single point cannot always pin the order; budget 0 never can
    E = CurveFq.short(FqContext(100003), 1, 1)
    with pytest.raises(AmbiguousOrderError):
        trace_bsgs(E, max_points=0)


def test_naive_threshold_guard():
    E = CurveFq.short(FqContext(100003), 1, 1)
    with pytest.raises(ValueError):
        trace_naive(E, threshold=1000)
    with pytest.raises(ValueError):
        ecpoint.set_naive_threshold(-1)


def test_threshold_does_not_change_answer():
    E = CurveFq.short(FqContext(6359), 17, 3)
    assert trace(E, threshold=10) == trace(E, threshold=10**5)


def test_bsgs_equals_naive_on_a_thousand_random_pairs():
    rng = random.Random(20231014)
    n = 0
    while n < 1000:
        q = rng.choice(PRIMES_BSGS) if n < 700 else _random_prime(rng, 20000, 10**6)
        A, B = rng.randrange(q), rng.randrange(q)
        if (4 * A**3 + 27 * B * B) % q == 0:
            continue
        E = CurveFq.short(FqContext(q), A, B)
        assert trace_bsgs(E, seed=n) == trace_naive(E, threshold=q + 1), (q, A, B)
        n += 1


def _random_prime(rng, lo, hi):
    while True:
        q = rng.randrange(lo, hi)
        if is_prime(q):
            return q


@settings(max_examples=200)
@given(st.sampled_from(PRIMES_BSGS + [10**6 + 3, 999983]), st.integers(min_value=0),
       st.integers(min_value=0), st.integers(min_value=0, max_value=5))
def test_hasse_and_twist_properties(q, A, B, seed):
    A, B = A % q, B % q
    if (4 * A**3 + 27 * B * B) % q == 0:
        return
    E = CurveFq.short(FqContext(q), A, B)
    a = trace_bsgs(E, seed=seed)
    assert a * a <= 4 * q
    assert trace_bsgs(twist(E), seed=seed) == -a
    assert count_points(E) == q + 1 - trace(E)


def _points(q, rng, n=6):
    while True:
        a = [rng.randrange(q) for _ in range(5)]
        try:
            E = CurveFq(FqContext(q), a)
            break
        except SingularCurveError:
            pass
    pts = enumerate_points(E)
    return E, pts, [rng.choice(pts) for _ in range(n)]


@settings(max_examples=60)
@given(st.sampled_from([5, 7, 11, 13, 17, 19, 23, 31, 37, 101]), st.integers(0, 10**6))
def test_group_law(q, seed):
    rng = random.Random(seed)
    E, pts, (P, Q, R, *_) = _points(q, rng)
    N = len(pts)
    assert add_points(E, P, INFINITY) == P
    assert add_points(E, P, negate_point(E, P)) == INFINITY
    assert add_points(E, P, Q) == add_points(E, Q, P)
    assert add_points(E, add_points(E, P, Q), R) == add_points(E, P, add_points(E, Q, R))
    assert E.is_on_curve(add_points(E, P, Q))
    assert multiply_point(E, N, P) == INFINITY


def test_add_points_rejects_foreign_point():
    F = FqContext(7)
    E = CurveFq.short(F, 1, 1)
    with pytest.raises(ValueError):
        add_points(E, PointFq(F(0), F(2)), INFINITY)
