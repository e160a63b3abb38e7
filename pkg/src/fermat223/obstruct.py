"""Local symbols and congruence obstructions.

Hilbert symbols at every place of Q, the product formula as a self-test,
the residue-class computations mod 106 and mod 168, the symplectic-type
formula at a prime l = 3 (mod 4), and the two elementary finite checks
(mod 7 for the first descent equation, mod 8 for the class-number-one
fields Q(sqrt(-a))).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .ecpoint import CurveFq, enumerate_points, trace_naive
from .modarith import FqContext, factorize, jacobi, sqrt_int

INFINITY = "inf"
S_107_EXPECTED = frozenset({11, 26, 34, 53, 70, 87, 90, 101})
CLASSES_106_EXPECTED = frozenset({3, 55})
CLASSES_168_EXPECTED = frozenset({47, 65, 113, 139, 143, 167})
MOD8_FIELDS = (7, 11, 19, 43, 67, 163)


def _frac(x) -> Fraction:
    f = Fraction(x)
    if f == 0:
        raise ValueError("Hilbert symbol arguments must be nonzero")
    return f


def _split(x: Fraction, q: int):
    """(v_q(x), unit part num*den with q removed); the unit's class is all we need."""
    n, d = x.numerator, x.denominator
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    while d % q == 0:
        d //= q
        v -= 1
    return v, n * d


def hilbert_odd(a, b, q: int) -> int:
    """(a, b)_q for an odd prime q."""
    if q % 2 == 0:
        raise ValueError("hilbert_odd needs an odd prime")
    alpha, u = _split(_frac(a), q)
    beta, v = _split(_frac(b), q)
    sign = -1 if (alpha * beta * (q - 1) // 2) % 2 else 1
    return sign * jacobi(u, q) ** (beta % 2) * jacobi(v, q) ** (alpha % 2)


def hilbert_two(a, b) -> int:
    """(a, b)_2 from the unit residues mod 8."""
    alpha, u = _split(_frac(a), 2)
    beta, v = _split(_frac(b), 2)
    u %= 8
    v %= 8
    eps = lambda w: (w - 1) // 2 % 2  # noqa: E731
    omg = lambda w: (w * w - 1) // 8 % 2  # noqa: E731
    e = eps(u) * eps(v) + alpha * omg(v) + beta * omg(u)
    return -1 if e % 2 else 1


def hilbert_real(a, b) -> int:
    return -1 if _frac(a) < 0 and _frac(b) < 0 else 1


def hilbert(a, b, place) -> int:
    if place == INFINITY:
        return hilbert_real(a, b)
    if place == 2:
        return hilbert_two(a, b)
    return hilbert_odd(a, b, place)


def relevant_places(a, b) -> list:
    ps = {2}
    for x in (_frac(a), _frac(b)):
        for n in (x.numerator, x.denominator):
            if abs(n) > 1:
                ps.update(p for p, _ in factorize(n))
    return [INFINITY] + sorted(ps)


def hilbert_product(a, b) -> int:
    out = 1
    for place in relevant_places(a, b):
        out *= hilbert(a, b, place)
    return out


def product_formula_check(a, b) -> bool:
    """Product of (a, b)_v over all places is +1.  Always true; a self-test."""
    return hilbert_product(a, b) == 1


def local_symbol_product(C, B, r=Fraction(-107, 189), s=Fraction(-4, 7)) -> int:
    """(r, s(C - B^2))_2 times (r, s(C - B^2))_q over odd q with v_q(r) or v_q(s) odd.

    The default r, s rewrite 7A^2 - B^(2p)/27 = -4C^p as
    A^2 + (107/189) B^(2p) = -(4/7)(C^p - B^(2p)).
    """
    r, s = _frac(r), _frac(s)
    w = s * (Fraction(C) - Fraction(B) ** 2)
    if w == 0:
        raise ValueError("C - B^2 must be nonzero")
    out = hilbert_two(r, w)
    odd = set()
    for x in (r, s):
        for n in (x.numerator, x.denominator):
            if abs(n) > 1:
                odd.update(p for p, _ in factorize(n) if p != 2 and _split(x, p)[0] % 2)
    for q in sorted(odd):
        out *= hilbert_odd(r, w, q)
    return out


# ---- F_107 computations ----------------------------------------------------

def _is_square_or_zero(a: int, q: int) -> bool:
    return jacobi(a, q) >= 0


def _trace_107(curve: CurveFq, engine: str) -> int:
    if engine == "naive":
        return trace_naive(curve, threshold=curve.q + 1)
    if engine == "enumerate":
        return curve.q + 1 - len(enumerate_points(curve))
    raise ValueError(f"unknown engine {engine!r}")


def derive_s_mod_107(engine: str = "naive", targets=(14, 8)) -> set[int]:
    """zeta in F_107^x with (1 - 108 zeta)/189 a square and |a_107(E_zeta)| in targets.

    E_zeta: Y^2 = X^3 + 7 delta X^2 - 7 zeta X with delta^2 = (1 - 108 zeta)/189.
    """
    q = 107
    ctx = FqContext(q)
    inv189 = pow(189, -1, q)
    out = set()
    for z in range(1, q):
        t = (1 - 108 * z) * inv189 % q
        d = sqrt_int(t, q)
        if d is None:
            continue
        a = _trace_107(CurveFq(ctx, (0, 7 * d, 0, -7 * z, 0)), engine)
        if abs(a) in targets:
            out.add(z)
    return out


def _power_table_pow(q, r):
    return {z: pow(z, r, q) for z in range(1, q)}


def _power_table_log(q, r):
    # independent route: discrete logs via a generator
    from .modarith import primitive_root
    g = primitive_root(q)
    out = {}
    x = 1
    for i in range(q - 1):
        out[x] = pow(g, i * r % (q - 1), q)
        x = x * g % q
    return out


def exponent_classes_mod_106(S=None, route: str = "pow") -> set[int]:
    """r mod 106, coprime to 106, such that -7(zeta - 1) is a nonsquare
    mod 107 for every zeta with zeta^r in S.  Zero counts as a square."""
    q = 107
    S = set(S_107_EXPECTED if S is None else S)
    table = _power_table_pow if route == "pow" else _power_table_log
    out = set()
    for r in range(1, 106):
        if math.gcd(r, 106) != 1:
            continue
        zr = table(q, r)
        if all(not _is_square_or_zero(-7 * (z - 1), q) for z in range(1, q) if zr[z] in S):
            out.add(r)
    return out


def legendre_conditions_168(r: int) -> tuple[int, int, int]:
    """((7/p), (2/p), (-3/p)) for any prime p = r mod 168, by reciprocity."""
    two = 1 if r % 8 in (1, 7) else -1
    minus3 = 1 if r % 3 == 1 else -1
    # (7/p) = (p/7) (-1)^((p-1)/2)
    p7 = 1 if r % 7 in (1, 2, 4) else -1
    seven = p7 if r % 4 == 1 else -p7
    return seven, two, minus3


def symplectic_classes_mod_168() -> set[int]:
    return {r for r in range(168) if math.gcd(r, 168) == 1
            and legendre_conditions_168(r) == (1, 1, -1)}


# ---- symplectic criterion -------------------------------------------------

@dataclass(frozen=True)
class SymplecticInput:
    l: int
    p: int
    v: int          # v_l(Delta)
    v_prime: int    # v_l(Delta')
    dt: int         # Delta / l^v, or its residue mod l
    dt_prime: int


def symplectic_exponents(inp: SymplecticInput) -> tuple[int, int]:
    r = 0 if (inp.v - inp.v_prime) % 4 == 0 else 1
    t = 1 if jacobi(inp.dt, inp.l) * jacobi(inp.dt_prime, inp.l) == -1 else 0
    return r, t


def symplectic_criterion(inp: SymplecticInput) -> bool:
    """True iff (l/p)^r (2/p)^t = 1, i.e. the p-torsion isomorphism is symplectic."""
    if inp.l % 4 != 3:
        raise ValueError(f"l = {inp.l} is not 3 mod 4")
    if inp.p < 5:
        raise ValueError("p must be at least 5")
    if inp.dt % inp.l == 0 or inp.dt_prime % inp.l == 0:
        raise ValueError("reduced discriminants must be units at l")
    r, t = symplectic_exponents(inp)
    return jacobi(inp.l, inp.p) ** r * jacobi(2, inp.p) ** t == 1


def frey2_data_at_7(p: int) -> tuple[int, int]:
    """(v_7, reduced discriminant mod 7) of the Frey curve when 7 does not divide ab.

    Delta = 2^4 3^(2p-3) 7^3 (ab)^(2p); (ab)^(2p) is a square, so only
    2^4 3^(2p-3) matters for the residue character.
    """
    return 3, (16 * pow(3, 2 * p - 3, 7)) % 7


# ---- elementary obstructions ----------------------------------------------

def mod7_obstruction(p: int) -> bool:
    """No w in F_7^x with w^p = 2 and w - 1 a square mod 7."""
    if p < 2:
        raise ValueError("p must be prime")
    for w in range(1, 7):
        if pow(w, p, 7) == 2 and _is_square_or_zero(w - 1, 7):
            return False
    return True


def mod8_obstruction(a: int) -> bool:
    """Both u(u^2 - 3a v^2) and v(3u^2 - a v^2) vanish mod 8 for all odd u, v."""
    if a not in MOD8_FIELDS:
        raise ValueError(f"a must be one of {MOD8_FIELDS}")
    odd = (1, 3, 5, 7)
    return all(u * (u * u - 3 * a * v * v) % 8 == 0 and v * (3 * u * u - a * v * v) % 8 == 0
               for u in odd for v in odd)
