import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fermat223.modarith import (FqContext, FqElement, factorize, is_prime, jacobi,
                                kth_roots_of_unity, pow_mod, primes_in_range,
                                primitive_root, sqrt_int, sqrt_mod)

SMALL_PRIMES = [p for p in range(3, 2000) if all(p % d for d in range(2, math.isqrt(p) + 1))]


def sieve(n):
    s = np.ones(n, dtype=bool)
    s[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if s[i]:
            s[i * i::i] = False
    return s


def test_pow_mod_examples():
    F = FqContext(1019)
    assert pow_mod(F(2), 10) == 5
    assert pow_mod(F(17), 0) == 1
    assert pow_mod(F(3), 1018) == 1


def test_jacobi_examples():
    assert jacobi(3, 7) == -1
    assert jacobi(2, 7) == 1
    assert jacobi(0, 7) == 0
    assert jacobi(21, 6359) == 1


def test_sqrt_examples():
    F7 = FqContext(7)
    assert sqrt_mod(F7(0)) == 0
    assert sqrt_mod(F7(2)) == 3
    assert sqrt_mod(F7(3)) is None


def test_is_prime_examples():
    assert is_prime(67) and is_prime(6359)
    assert not is_prime(341)
    assert not is_prime(1) and not is_prime(0) and is_prime(2)


def test_is_prime_exhaustive_below_a_million():
    ref = sieve(10**6)
    got = np.array([is_prime(n) for n in range(10**6)])
    assert (got == ref).all()


@pytest.mark.parametrize("n,expected", [
    (3215031751, False),             # strong pseudoprime to bases 2, 3, 5, 7
    (3825123056546413051, False),    # strong pseudoprime to the first nine primes
    (318665857834031151167461, False),
    (2**61 - 1, True),
    (2**64 - 59, True),              # largest 64-bit prime
    (18446744073709551617, False),   # F6 = 274177 * 67280421310721
])
def test_is_prime_hard_cases(n, expected):
    assert is_prime(n) is expected


def test_factorize_known():
    assert factorize(588) == ((2, 2), (3, 1), (7, 2))
    assert factorize(2**64 + 1) == ((274177, 1), (67280421310721, 1))
    assert factorize(6358) == ((2, 1), (11, 1), (17, 2))


def test_roots_of_unity_examples():
    assert sorted(int(x) for x in kth_roots_of_unity(FqContext(7), 2)) == [1, 6]
    assert sorted(int(x) for x in kth_roots_of_unity(FqContext(23), 2)) == [1, 22]
    F = FqContext(67)
    mu = kth_roots_of_unity(F, 6)
    brute = {x for x in range(1, 67) if pow(x, 6, 67) == 1}
    assert {int(x) for x in mu} == brute and len(brute) == 6


def test_roots_of_unity_rejects_non_divisor():
    with pytest.raises(ValueError):
        kth_roots_of_unity(FqContext(23), 5)


def test_primes_in_range():
    assert list(primes_in_range(11, 20)) == [11, 13, 17, 19]
    assert list(primes_in_range(2, 3)) == [2]
    assert sum(1 for _ in primes_in_range(2, 10**6)) == 78498
    # segment boundaries must not drop or duplicate primes
    assert list(primes_in_range(10**6, 10**6 + 2000, segment=97)) == \
        [n for n in range(10**6, 10**6 + 2000) if is_prime(n)]


def test_context_validation():
    with pytest.raises(ValueError):
        FqContext(15)
    with pytest.raises(ValueError):
        FqContext(2)
    with pytest.raises(ValueError):
        FqContext((1 << 63) + 29)


def test_primitive_root_generates():
    for q in (7, 23, 107, 6359, 1000003):
        g = primitive_root(q)
        assert all(pow(g, (q - 1) // r, q) != 1 for r, _ in factorize(q - 1))


@given(st.sampled_from(SMALL_PRIMES), st.integers(), st.integers())
def test_jacobi_multiplicative(q, a, b):
    assert jacobi(a * b, q) == jacobi(a, q) * jacobi(b, q)


@given(st.sampled_from(SMALL_PRIMES + [10**9 + 7, 2**61 - 1]), st.integers(min_value=0))
def test_sqrt_matches_jacobi(q, a):
    r = sqrt_int(a, q)
    if jacobi(a, q) >= 0:
        assert r is not None and r * r % q == a % q and r <= q - r
    else:
        assert r is None


@given(st.sampled_from(SMALL_PRIMES), st.integers(min_value=1, max_value=200))
def test_roots_of_unity_group(q, k):
    k = math.gcd(k, q - 1)
    F = FqContext(q)
    mu = {int(x) for x in kth_roots_of_unity(F, k)}
    assert len(mu) == k
    assert all(pow(x, k, q) == 1 for x in mu)
    assert all(x * y % q in mu for x in mu for y in list(mu)[:5])
    assert all(pow(x, -1, q) in mu for x in mu)


@given(st.sampled_from(SMALL_PRIMES), st.integers(min_value=1), st.integers(min_value=0, max_value=10**6),
       st.integers(min_value=0, max_value=10**6))
def test_pow_additive(q, b, e1, e2):
    F = FqContext(q)
    x = F(b)
    assert pow_mod(x, e1 + e2) == pow_mod(x, e1) * pow_mod(x, e2)


@given(st.sampled_from(SMALL_PRIMES), st.integers(), st.integers())
def test_field_ops(q, a, b):
    F = FqContext(q)
    x, y = F(a), F(b)
    assert int(x + y) == (a + b) % q
    assert int(x - y) == (a - b) % q
    assert int(x * y) == a * b % q
    if b % q:
        assert (x / y) * y == x
        assert y * y.inverse() == 1
    assert isinstance(-x, FqElement)


def test_mixed_contexts_rejected():
    with pytest.raises(ValueError):
        FqContext(7)(1) + FqContext(11)(1)
