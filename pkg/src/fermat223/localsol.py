"""Local solubility of y^2 = f(x) over Q_p, and a sieve for rational points.

The local test walks residue classes x = a (mod p^n).  On a class, f(a + p^n t)
is expanded in t; if its constant term strictly dominates the rest, the
valuation and leading unit of f on the whole class are known and the class is
either refuted (odd valuation, or a unit that is a nonsquare) or certified to
contain points.  Otherwise the class is split into p subclasses.  Points with
v(x) < 0 are handled on the reciprocal chart u = 1/x, y' = u^(D/2) y with
D the degree rounded up to an even number, where u = 0 gives the points at
infinity of the smooth model.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .modarith import is_prime, jacobi

DEFAULT_BUDGET = 64
EMPTY, NONEMPTY, UNDECIDED = "empty", "nonempty", "undecided"


@dataclass(frozen=True)
class HyperModel:
    f: tuple            # integer coefficients, low degree first
    p: int
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        f = _trim(self.f)
        if not any(f):
            raise ValueError("f must be nonzero")
        if len(f) - 1 > 8:
            raise ValueError("degree above 8 is not supported")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.budget < 1:
            raise ValueError("precision budget must be at least 1")
        object.__setattr__(self, "f", tuple(f))

    @property
    def degree(self) -> int:
        return len(self.f) - 1


@dataclass
class LocalResult:
    status: str
    witness: tuple | None = None   # (chart, x0, y0); chart in affine/reciprocal/infinity
    depth: int = 0                 # deepest class level examined
    undecided_classes: list = field(default_factory=list)

    def __bool__(self):
        return self.status == NONEMPTY


def _trim(f):
    f = [int(c) for c in f]
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def _val(n: int, p: int) -> float:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def poly_eval(f, x):
    acc = 0
    for c in reversed(f):
        acc = acc * x + c
    return acc


def shifted(f, a: int, h: int) -> list[int]:
    """Coefficients of f(a + h t) in t."""
    # Taylor shift by a via synthetic division, then scale t -> h t
    g = list(f)
    n = len(g)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            g[j] += a * g[j + 1]
    return [c * h**i for i, c in enumerate(g)]


def reciprocal(f) -> list[int]:
    """u^D f(1/u) with D = deg f rounded up to even."""
    f = _trim(f)
    D = len(f) - 1 + (len(f) - 1) % 2
    return list(reversed(f + [0] * (D + 1 - len(f))))


def is_unit_square(u: int, p: int) -> bool:
    """Is the p-adic unit u a square in Z_p (u given to at least 3 bits at p=2)?"""
    if p == 2:
        return u % 8 == 1
    return jacobi(u, p) == 1


def is_qp_square(n, p: int) -> bool:
    """Exact test for a rational number being a square in Q_p (0 counts)."""
    n = Fraction(n)
    if n == 0:
        return True
    num, den = n.numerator, n.denominator
    v = _val(num, p) - _val(den, p)
    if v % 2:
        return False
    u = num // p ** int(_val(num, p)) * (den // p ** int(_val(den, p)))
    return is_unit_square(u, p)


def sqrt_unit_mod(u: int, p: int, prec: int) -> int:
    """s with s^2 = u mod p^prec for a square unit u (Hensel lifting)."""
    if p == 2:
        if u % 8 != 1:
            raise ValueError("not a 2-adic square unit")
        s, k = 1, 3
        while k < prec:
            # s^2 = u mod 2^k -> lift to mod 2^(k+1)
            if (s * s - u) % 2 ** (k + 1):
                s += 2 ** (k - 1)
            k += 1
        return s % 2**prec
    s = next(x for x in range(1, p) if (x * x - u) % p == 0)
    mod = p
    while mod < p**prec:
        mod = min(mod * mod, p**prec)
        s = (s - (s * s - u) * pow(2 * s, -1, mod)) % mod
    return s


def _hensel_witness(f, x0: int, p: int):
    """y0 with v(f(x0) - y0^2) > 2 v(2 y0), or None."""
    fx = poly_eval(f, x0)
    if fx == 0:
        return 0
    v = int(_val(fx, p))
    if v % 2:
        return None
    u = fx // p**v
    if not is_unit_square(u, p):
        return None
    s = sqrt_unit_mod(u % p ** (v + 8), p, 8)
    return s * p ** (v // 2)


def hensel_certified(f, x0: int, y0: int, p: int) -> bool:
    """The exact criterion v(f(x0) - y0^2) > 2 v(2 y0) (or an exact root with y0 = 0)."""
    fx = poly_eval(f, x0)
    if y0 == 0:
        return fx == 0
    return _val(fx - y0 * y0, p) > 2 * _val(2 * y0, p)


def _search_chart(f, p, start, budget):
    """Breadth-first walk over classes (a mod p^n), so a class that never
    settles (a p-adic root of f) cannot hide shallow points.
    Returns (status, x0, depth, undecided)."""
    deepest = 0
    open_classes = []
    queue = deque(start)
    while queue:
        a, n = queue.popleft()
        deepest = max(deepest, n)
        g = shifted(f, a, p**n)
        c0 = g[0]
        rest = min((_val(c, p) for c in g[1:]), default=math.inf)
        v0 = _val(c0, p)
        if v0 < rest:
            if v0 % 2:
                continue
            # f = p^v0 (u + p^(rest - v0) * ...) on the class
            gap = rest - v0
            need = 3 if p == 2 else 1
            if gap >= need:
                u = c0 // p ** int(v0)
                if is_unit_square(u, p):
                    return NONEMPTY, a, deepest, []
                continue
        if n >= budget:
            open_classes.append((a, n))
            continue
        h = p**n
        queue.extend((a + j * h, n + 1) for j in range(p))
    if open_classes:
        return UNDECIDED, None, deepest, open_classes
    return EMPTY, None, deepest, []


def _exact_root(f):
    """A rational root of f, if any; those give points with y = 0."""
    f = _trim(f)
    if f[0] == 0:
        return Fraction(0)
    lead, const = f[-1], f[0]
    divs = lambda n: [d for d in range(1, abs(n) + 1) if n % d == 0]  # noqa: E731
    if abs(const) > 10**6 or abs(lead) > 10**6:
        return None
    for num in divs(const):
        for den in divs(lead):
            for s in (1, -1):
                x = Fraction(s * num, den)
                if sum(c * x**i for i, c in enumerate(f)) == 0:
                    return x
    return None


def has_qp_points(model: HyperModel) -> LocalResult:
    """Decide whether y^2 = f(x) has a point over Q_p, up to the precision budget."""
    f, p, budget = list(model.f), model.p, model.budget
    st, x0, d1, und1 = _search_chart(f, p, [(a, 1) for a in range(p)], budget)
    if st == NONEMPTY:
        return LocalResult(NONEMPTY, ("affine", x0, _hensel_witness(f, x0, p)), d1)
    # a root in Z_p keeps its class open forever; integer roots are caught here
    root = _exact_root(f)
    if root is not None and root.denominator == 1:
        return LocalResult(NONEMPTY, ("affine", int(root), 0), d1)
    # points at infinity of the smooth model
    if model.degree % 2 == 1:
        return LocalResult(NONEMPTY, ("infinity", None, None), d1)
    if is_qp_square(f[-1], p):
        return LocalResult(NONEMPTY, ("infinity", None, None), d1)
    h = reciprocal(f)
    st2, u0, d2, und2 = _search_chart(h, p, [(0, 1)], budget)
    if st2 == NONEMPTY:
        return LocalResult(NONEMPTY, ("reciprocal", u0, _hensel_witness(h, u0, p)), max(d1, d2))
    und = [("affine", a, n) for a, n in und1] + [("reciprocal", a, n) for a, n in und2]
    if und:
        return LocalResult(UNDECIDED, None, max(d1, d2), und)
    return LocalResult(EMPTY, None, max(d1, d2))


def verify_empty(f, p: int, depth: int, lifts: int = 4) -> bool:
    """Independent check of an 'empty' verdict: for every x mod p^depth (and
    every u in pZ mod p^depth on the reciprocal chart) a few integer lifts are
    evaluated exactly and none may give a p-adic square."""
    f = _trim(f)
    h = reciprocal(f)
    mod = p**depth
    for x in range(mod):
        for j in range(lifts):
            if is_qp_square(poly_eval(f, x + j * mod), p):
                return False
    for u in range(0, mod, p):
        for j in range(lifts):
            if is_qp_square(poly_eval(h, u + j * mod), p):
                return False
    return True


# ---- rational points --------------------------------------------------------

# 2^6, 3^2 * 7, 5 * 13 and then primes; each cuts the candidates roughly in half
_SIEVE_MODULI = (64, 63, 65, 11, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73)
_DENSE = 4  # moduli applied to the full grid before compressing to survivors


def _homogeneous(f):
    f = _trim(f)
    D = len(f) - 1 + (len(f) - 1) % 2
    return f + [0] * (D + 1 - len(f)), D


def _residue_table(F, D, m: int) -> np.ndarray:
    """T[b mod m, a mod m] = (F(a, b) is a square mod m)."""
    sq = np.zeros(m, dtype=bool)
    r = np.arange(m, dtype=np.int64)
    sq[r * r % m] = True
    a = r[None, :]
    b = r[:, None]
    acc = np.zeros((m, m), dtype=np.int64)
    bp = [np.ones_like(b)]
    for _ in range(D):
        bp.append(bp[-1] * b % m)
    for i in range(D, -1, -1):
        acc = (acc * a + (F[i] % m) * bp[D - i]) % m
    return sq[acc]


def search_rational_points(f, bound: int, block: int = 256) -> list[tuple[Fraction, Fraction]]:
    """Affine points (x, y), y >= 0, with x = a/b in lowest terms, |a|, b <= bound.

    b^D f(a/b) is an integer and a square exactly when f(a/b) is; candidates
    are sieved with residue tables before the exact isqrt test.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    F, D = _homogeneous(f)
    tables = [(m, _residue_table(F, D, m)) for m in _SIEVE_MODULI]
    a = np.arange(-bound, bound + 1, dtype=np.int64)
    a_mod = [a % m for m, _ in tables]
    out = []
    for b0 in range(1, bound + 1, block):
        bs = np.arange(b0, min(b0 + block, bound + 1), dtype=np.int64)
        keep = np.ones((len(bs), len(a)), dtype=bool)
        for (m, tab), am in zip(tables[:_DENSE], a_mod):
            keep &= tab[(bs % m)[:, None], am[None, :]]
        bi, ai = np.nonzero(keep)
        for (m, tab), am in zip(tables[_DENSE:], a_mod[_DENSE:]):
            ok = tab[bs[bi] % m, am[ai]]
            bi, ai = bi[ok], ai[ok]
        for bb, aa in zip(bs[bi].tolist(), a[ai].tolist()):
            if math.gcd(aa, bb) != 1:
                continue
            val = sum(c * aa**i * bb ** (D - i) for i, c in enumerate(F))
            if val < 0:
                continue
            r = math.isqrt(val)
            if r * r == val:
                out.append((Fraction(aa, bb), Fraction(r, bb ** (D // 2))))
    return sorted(out)


# ---- the curves used by the y^8 and p = 7 arguments ------------------------

def d_models() -> dict[str, list[int]]:
    """D1: y^2 = x^7 + 2^12 3^7 7^7 and D2: y^2 = x^7 + 2^12 3^11 7^7."""
    return {"D1": [2**12 * 3**7 * 7**7] + [0] * 6 + [1],
            "D2": [2**12 * 3**11 * 7**7] + [0] * 6 + [1]}


def certify_genus2(p: int = 2, budget: int = DEFAULT_BUDGET) -> dict[str, LocalResult]:
    from .families import genus2_models
    return {name: has_qp_points(HyperModel(tuple(f), p, budget))
            for name, f in genus2_models().items()}
