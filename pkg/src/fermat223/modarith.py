"""Prime-field arithmetic for moduli below 2**63.

Everything above the curve layer reduces to a handful of primitives here:
modular powers, Jacobi symbols, square roots, deterministic primality,
roots of unity and a segmented prime sieve.  Values are plain Python ints
internally; :class:`FqElement` is a thin wrapper for callers who want the
modulus carried along.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator

MAX_MODULUS = 1 << 63

# Deterministic Miller-Rabin: the first thirteen primes are a proven witness
# set for every n < 3.3 * 10**24, which covers the full 64-bit range.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _mr_bases(n):
    # smaller proven witness sets (Jaeschke) for the common small sizes
    if n < 3_215_031_751:
        return (2, 3, 5, 7)
    if n < 341_550_071_728_321:
        return (2, 3, 5, 7, 11, 13, 17)
    return _MR_BASES


def is_prime(n: int) -> bool:
    """Deterministic primality test, exact for all n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _mr_bases(n):
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``|n|`` as sorted ``(prime, exponent)`` pairs.

    Trial division by primes below 1000, then Brent's variant of Pollard rho
    on the cofactor.  ``factorize(1) == ()``; zero is rejected.
    """
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    for p in _trial_primes():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        rng = random.Random(n)
        stack = [n]
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if is_prime(m):
                out[m] = out.get(m, 0) + 1
                continue
            r = math.isqrt(m)
            if r * r == m:
                stack += [r, r]
                continue
            d = _pollard_brent(m, rng)
            stack += [d, m // d]
    return tuple(sorted(out.items()))


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in factorize(n)]


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(primes_in_range(2, 1000))


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise ValueError(f"Jacobi symbol needs an odd positive modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def sqrt_int(a: int, q: int) -> int | None:
    """Least non-negative r with r*r == a (mod q), or None (q an odd prime)."""
    a %= q
    if a == 0:
        return 0
    if pow(a, (q - 1) // 2, q) != 1:
        return None
    if q % 4 == 3:
        r = pow(a, (q + 1) // 4, q)
    else:
        r = _tonelli_shanks(a, q)
    return min(r, q - r)


def _tonelli_shanks(a: int, q: int) -> int:
    s, m = 0, q - 1
    while m % 2 == 0:
        m //= 2
        s += 1
    z = _nonresidue(q)
    c = pow(z, m, q)
    x = pow(a, (m + 1) // 2, q)
    t = pow(a, m, q)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % q
            i += 1
        b = pow(c, 1 << (s - i - 1), q)
        x = x * b % q
        c = b * b % q
        t = t * c % q
        s = i
    return x


@lru_cache(maxsize=256)
def _nonresidue(q: int) -> int:
    z = 2
    while jacobi(z, q) != -1:
        z += 1
    return z


@lru_cache(maxsize=1024)
def primitive_root(q: int) -> int:
    """Least generator of the multiplicative group mod the prime q."""
    if q == 2:
        return 1
    order = q - 1
    cofactors = [order // p for p in prime_divisors(order)]
    g = 2
    while any(pow(g, c, q) == 1 for c in cofactors):
        g += 1
    return g


@lru_cache(maxsize=256)
def roots_of_unity_int(q: int, k: int) -> tuple[int, ...]:
    """Sorted tuple of the k-th roots of unity mod the prime q (k | q-1)."""
    if k <= 0 or (q - 1) % k:
        raise ValueError(f"k={k} does not divide q-1={q - 1}")
    z = pow(primitive_root(q), (q - 1) // k, q)
    out = [1] * k
    for i in range(1, k):
        out[i] = out[i - 1] * z % q
    return tuple(sorted(out))


@dataclass(frozen=True)
class FqContext:
    """The prime field F_q; shareable and immutable once built."""

    q: int

    def __post_init__(self):
        q = self.q
        if not isinstance(q, int) or q < 3 or q >= MAX_MODULUS or not is_prime(q):
            raise ValueError(f"modulus must be an odd prime below 2**63, got {q!r}")

    def __call__(self, value: int) -> "FqElement":
        return FqElement(value % self.q, self)

    @cached_property
    def generator(self) -> int:
        return primitive_root(self.q)

    @cached_property
    def nonresidue(self) -> int:
        return _nonresidue(self.q)

    def zero(self) -> "FqElement":
        return FqElement(0, self)

    def one(self) -> "FqElement":
        return FqElement(1, self)


class FqElement:
    """A residue in [0, q) together with its field."""

    __slots__ = ("value", "ctx")

    def __init__(self, value: int, ctx: FqContext):
        if not 0 <= value < ctx.q:
            raise ValueError(f"{value} is not a canonical residue mod {ctx.q}")
        self.value = value
        self.ctx = ctx

    def _coerce(self, other) -> int:
        if isinstance(other, FqElement):
            if other.ctx.q != self.ctx.q:
                raise ValueError("elements of different fields")
            return other.value
        if isinstance(other, int):
            return other % self.ctx.q
        return NotImplemented

    def _new(self, v: int) -> "FqElement":
        return FqElement(v % self.ctx.q, self.ctx)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.value)

    def inverse(self) -> "FqElement":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in F_q")
        return self._new(pow(self.value, -1, self.ctx.q))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * FqElement(o, self.ctx).inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.inverse() * o

    def __pow__(self, e: int):
        return pow_mod(self, e)

    def __eq__(self, other):
        if isinstance(other, FqElement):
            return self.ctx.q == other.ctx.q and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.ctx.q
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.ctx.q))

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __repr__(self):
        return f"FqElement({self.value} mod {self.ctx.q})"


def pow_mod(base: FqElement, exponent: int) -> FqElement:
    """base**exponent in F_q, with 0**0 == 1."""
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    return FqElement(pow(base.value, exponent, base.ctx.q), base.ctx)


def sqrt_mod(a: FqElement) -> FqElement | None:
    """Least non-negative square root of ``a`` (i.e. min(r, q - r)), or None."""
    r = sqrt_int(a.value, a.ctx.q)
    return None if r is None else FqElement(r, a.ctx)


def kth_roots_of_unity(ctx: FqContext, k: int) -> list[FqElement]:
    """All xi with xi**k == 1, sorted by residue.  Requires k | q - 1."""
    return [FqElement(v, ctx) for v in roots_of_unity_int(ctx.q, k)]


def primes_in_range(lo: int, hi: int, segment: int = 1 << 18) -> Iterator[int]:
    """Primes p with lo <= p < hi, from a segmented Eratosthenes sieve."""
    if lo > hi:
        raise ValueError("empty range: lo > hi")
    lo = max(lo, 2)
    if hi <= lo:
        return
    root = math.isqrt(hi - 1)
    base = _simple_sieve(root)
    for start in range(lo, hi, segment):
        stop = min(start + segment, hi)
        seg = bytearray([1]) * (stop - start)
        for p in base:
            if p * p >= stop:
                break
            first = max(p * p, (start + p - 1) // p * p)
            seg[first - start::p] = bytes(len(range(first - start, stop - start, p)))
        for i, flag in enumerate(seg):
            if flag:
                yield start + i


def _simple_sieve(n: int) -> list[int]:
    if n < 2:
        return []
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if flags[i]:
            flags[i * i::i] = bytes(len(range(i * i, n + 1, i)))
    return [i for i, f in enumerate(flags) if f]
