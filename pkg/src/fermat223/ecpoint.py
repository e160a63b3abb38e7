"""Elliptic curves over F_q and their Frobenius traces.

Two independent trace engines live here.  ``trace_naive`` sums the quadratic
character over all of F_q and doubles as the test oracle; ``trace_bsgs`` is
Shanks-Mestre baby-step/giant-step, O(q^(1/4)) group operations per curve.
``trace`` picks one by a threshold on q.

Group arithmetic used by BSGS runs on plain int tuples over the short model
y^2 = x^3 + A x + B, computed once at construction.  The public PointFq /
add_points API works on the long Weierstrass model the curve was built from.
"""
from __future__ import annotations

import math
import random
from functools import lru_cache

import numpy as np

from .modarith import FqContext, FqElement, factorize, jacobi, sqrt_int

DEFAULT_NAIVE_THRESHOLD = 10**5
_threshold = DEFAULT_NAIVE_THRESHOLD
# int64 safety for the vectorised sum: x*x must stay below 2**63
_NAIVE_HARD_LIMIT = 3_000_000_000
BSGS_MIN_Q = 229
BSGS_MAX_POINTS = 64


class SingularCurveError(ValueError):
    pass


class AmbiguousOrderError(RuntimeError):
    """BSGS could not pin down #E(F_q) within its point budget."""


def set_naive_threshold(value: int) -> None:
    """Set the q below which ``trace`` uses the character sum."""
    global _threshold
    if value < 0 or value > _NAIVE_HARD_LIMIT:
        raise ValueError(f"threshold must lie in [0, {_NAIVE_HARD_LIMIT}]")
    _threshold = int(value)


def naive_threshold() -> int:
    return _threshold


class CurveFq:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over F_q, q > 3."""

    __slots__ = ("ctx", "a", "A", "B", "_b2", "_b4", "_b6")

    def __init__(self, ctx: FqContext, coefficients):
        q = ctx.q
        if len(coefficients) != 5:
            raise ValueError("need five coefficients [a1, a2, a3, a4, a6]")
        a1, a2, a3, a4, a6 = (int(c) % q for c in coefficients)
        self.ctx = ctx
        self.a = (a1, a2, a3, a4, a6)
        b2 = (a1 * a1 + 4 * a2) % q
        b4 = (2 * a4 + a1 * a3) % q
        b6 = (a3 * a3 + 4 * a6) % q
        b8 = (a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4) % q
        disc = (-b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6) % q
        if disc == 0:
            raise SingularCurveError(f"singular curve {list(self.a)} over F_{q}")
        c4 = (b2 * b2 - 24 * b4) % q
        c6 = (-b2**3 + 36 * b2 * b4 - 216 * b6) % q
        # Y = 216 y + 108 (a1 x + a3), X = 36 x + 3 b2 gives Y^2 = X^3 - 27c4 X - 54c6;
        # rescale by u = 6 to land on y^2 = x^3 - c4/48 x - c6/864.
        self.A = -c4 * pow(48, -1, q) % q
        self.B = -c6 * pow(864, -1, q) % q
        self._b2, self._b4, self._b6 = b2, b4, b6

    @classmethod
    def short(cls, ctx: FqContext, A: int, B: int) -> "CurveFq":
        return cls(ctx, (0, 0, 0, A, B))

    @property
    def q(self) -> int:
        return self.ctx.q

    def discriminant(self) -> int:
        q = self.q
        return -16 * (4 * self.A**3 + 27 * self.B**2) % q

    def j_invariant(self) -> int:
        q = self.q
        A3 = 4 * self.A**3 % q
        return 1728 * A3 * pow((A3 + 27 * self.B**2) % q, -1, q) % q

    def is_on_curve(self, P: "PointFq") -> bool:
        if P.is_infinity:
            return True
        if P.x.ctx.q != self.q:
            return False
        a1, a2, a3, a4, a6 = self.a
        x, y = P.x.value, P.y.value
        return (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % self.q == 0

    def __repr__(self):
        return f"CurveFq({list(self.a)} over F_{self.q})"

    def __eq__(self, other):
        return isinstance(other, CurveFq) and self.q == other.q and self.a == other.a

    def __hash__(self):
        return hash((self.q, self.a))


class PointFq:
    """A point on a long Weierstrass model; ``PointFq()`` is infinity."""

    __slots__ = ("x", "y")

    def __init__(self, x: FqElement | None = None, y: FqElement | None = None):
        if (x is None) != (y is None):
            raise ValueError("give both coordinates or neither")
        self.x, self.y = x, y

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __eq__(self, other):
        if not isinstance(other, PointFq):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return "PointFq(inf)" if self.is_infinity else f"PointFq({self.x.value}, {self.y.value})"


INFINITY = PointFq()


def negate_point(curve: CurveFq, P: PointFq) -> PointFq:
    if P.is_infinity:
        return P
    a1, _, a3, _, _ = curve.a
    return PointFq(P.x, -P.y - a1 * P.x.value - a3)


def add_points(curve: CurveFq, P: PointFq, Q: PointFq, check: bool = True) -> PointFq:
    """Chord-tangent sum on the long Weierstrass model of ``curve``."""
    if check and not (curve.is_on_curve(P) and curve.is_on_curve(Q)):
        raise ValueError("point not on curve")
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    q = curve.q
    a1, a2, a3, a4, _ = curve.a
    x1, y1, x2, y2 = P.x.value, P.y.value, Q.x.value, Q.y.value
    if x1 == x2:
        if (y1 + y2 + a1 * x2 + a3) % q == 0:
            return INFINITY
        num = 3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1
        den = 2 * y1 + a1 * x1 + a3
    else:
        num = y2 - y1
        den = x2 - x1
    lam = num * pow(den % q, -1, q) % q
    nu = (y1 - lam * x1) % q
    x3 = (lam * lam + a1 * lam - a2 - x1 - x2) % q
    y3 = (-(lam + a1) * x3 - nu - a3) % q
    return PointFq(FqElement(x3, curve.ctx), FqElement(y3, curve.ctx))


def multiply_point(curve: CurveFq, n: int, P: PointFq) -> PointFq:
    if n < 0:
        return multiply_point(curve, -n, negate_point(curve, P))
    R = INFINITY
    while n:
        if n & 1:
            R = add_points(curve, R, P, check=False)
        P = add_points(curve, P, P, check=False)
        n >>= 1
    return R


def twist(curve: CurveFq, d: int | None = None) -> CurveFq:
    """Quadratic twist y^2 = x^3 + d^2 A x + d^3 B; default d is the least nonresidue."""
    q = curve.q
    if d is None:
        d = curve.ctx.nonresidue
    d %= q
    if d == 0:
        raise ValueError("twist parameter must be a unit")
    return CurveFq.short(curve.ctx, d * d * curve.A, d**3 * curve.B)


# ---- naive engine --------------------------------------------------------

@lru_cache(maxsize=4)
def _naive_tables(q: int):
    x = np.arange(q, dtype=np.int64)
    x3 = x * x % q * x % q
    chi = np.full(q, -1, dtype=np.int8)
    r = np.arange(1, (q + 1) // 2, dtype=np.int64)
    chi[r * r % q] = 1
    chi[0] = 0
    return x, x3, chi


def trace_naive(curve: CurveFq, threshold: int | None = None) -> int:
    """a_q = -sum_x chi(x^3 + A x + B), vectorised over all of F_q."""
    q = curve.q
    limit = _threshold if threshold is None else threshold
    if q >= limit or q >= _NAIVE_HARD_LIMIT:
        raise ValueError(f"q={q} is above the naive threshold {limit}; use trace_bsgs")
    x, x3, chi = _naive_tables(q)
    f = (x3 + curve.A * x + curve.B) % q
    return -int(chi[f].sum(dtype=np.int64))


# ---- baby-step/giant-step engine ----------------------------------------
# Points are None (infinity) or (x, y) int tuples on y^2 = x^3 + A x + B.

def _add(P, Q, A, q):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % q == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, q) % q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
    x3 = (lam * lam - x1 - x2) % q
    return x3, (lam * (x1 - x3) - y1) % q


def _mul(n, P, A, q):
    if n < 0:
        n = -n
        P = None if P is None else (P[0], -P[1] % q)
    R = None
    while n:
        if n & 1:
            R = _add(R, P, A, q)
        P = _add(P, P, A, q)
        n >>= 1
    return R


def _random_point(A, B, q, rng):
    while True:
        x = rng.randrange(q)
        y = sqrt_int((x * x * x + A * x + B) % q, q)
        if y is not None:
            return x, (y if rng.random() < 0.5 else -y % q)


def _point_order(P, A, q, lo, hi):
    """Exact order of P, given that some multiple in [lo, hi] kills it."""
    width = hi - lo
    s = math.isqrt(width) + 1
    baby = {}
    R = None
    for j in range(s):
        # store -jP so that (lo + i s) P == -jP means (lo + i s + j) P == O
        key = None if R is None else (R[0], -R[1] % q)
        baby.setdefault(key, j)
        R = _add(R, P, A, q)
    step = _mul(s, P, A, q)
    G = _mul(lo, P, A, q)
    m = None
    for i in range(width // s + 2):
        j = baby.get(G)
        if j is not None:
            m = lo + i * s + j
            break
        G = _add(G, step, A, q)
    if m is None:
        raise AmbiguousOrderError(f"no multiple of the point vanishes in [{lo}, {hi}] mod {q}")
    order = m
    for p, _ in factorize(m):
        while order % p == 0 and _mul(order // p, P, A, q) is None:
            order //= p
    return order


def _crt(r1, m1, r2, m2):
    g = math.gcd(m1, m2)
    if (r2 - r1) % g:
        return None
    l = m1 // g * m2
    t = (r2 - r1) // g * pow(m1 // g, -1, m2 // g) % (m2 // g)
    return (r1 + m1 * t) % l, l


def trace_bsgs(curve: CurveFq, seed: int = 0, max_points: int = BSGS_MAX_POINTS) -> int:
    """Shanks-Mestre: pin #E by point orders on E and on its twist."""
    q = curve.q
    if q <= BSGS_MIN_Q:
        raise ValueError(f"trace_bsgs needs q > {BSGS_MIN_Q}, got {q}")
    A, B = curve.A, curve.B
    d = curve.ctx.nonresidue
    At, Bt = d * d * A % q, d**3 * B % q
    bound = math.isqrt(4 * q)
    lo, hi = q + 1 - bound, q + 1 + bound
    rng = random.Random(f"{seed}:{q}:{A}:{B}")
    L1 = L2 = 1
    for n in range(max_points):
        if n % 2 == 0:
            L1 = math.lcm(L1, _point_order(_random_point(A, B, q, rng), A, q, lo, hi))
        else:
            L2 = math.lcm(L2, _point_order(_random_point(At, Bt, q, rng), At, q, lo, hi))
        # N = #E satisfies N = 0 mod L1 and 2(q+1) - N = 0 mod L2
        sol = _crt(0, L1, 2 * (q + 1) % L2, L2)
        if sol is None:
            raise AmbiguousOrderError(f"inconsistent point orders over F_{q}")
        r, L = sol
        first = lo + (r - lo) % L
        if first > hi:
            raise AmbiguousOrderError(f"no group order in the Hasse interval over F_{q}")
        if first + L > hi:
            return q + 1 - first
    raise AmbiguousOrderError(
        f"group order over F_{q} still ambiguous after {max_points} points")


def trace(curve: CurveFq, threshold: int | None = None) -> int:
    """Signed a_q; character sum below the threshold, BSGS above it."""
    q = curve.q
    limit = _threshold if threshold is None else threshold
    if q < limit or q <= BSGS_MIN_Q:
        a = trace_naive(curve, threshold=max(limit, BSGS_MIN_Q + 1))
    else:
        a = trace_bsgs(curve)
    if a * a > 4 * q:
        raise ArithmeticError(f"Hasse bound violated: a={a}, q={q}")
    return a


def count_points(curve: CurveFq) -> int:
    return curve.q + 1 - trace(curve)


def enumerate_points(curve: CurveFq) -> list[PointFq]:
    """Every point of the long model, by brute force over F_q x F_q rows."""
    q = curve.q
    ctx = curve.ctx
    a1, a2, a3, a4, a6 = curve.a
    out = [INFINITY]
    for x in range(q):
        # y^2 + (a1 x + a3) y - rhs = 0
        b = (a1 * x + a3) % q
        c = -(x**3 + a2 * x * x + a4 * x + a6) % q
        disc = (b * b - 4 * c) % q
        if jacobi(disc, q) == -1:
            continue
        r = sqrt_int(disc, q)
        inv2 = pow(2, -1, q)
        ys = {(-b + r) * inv2 % q, (-b - r) * inv2 % q}
        out.extend(PointFq(FqElement(x, ctx), FqElement(y, ctx)) for y in sorted(ys))
    return out
