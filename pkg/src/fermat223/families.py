"""Sparse bivariate integer polynomials and the solution-family identities.

The families are read from ``data/families.txt`` (checksummed) and checked
to be exact polynomial identities.  ``genus2_models`` rebuilds the sextics of
the y^8 case from the y-components of the two families.
"""
from __future__ import annotations

import ast
import hashlib
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .curves import FixtureError, data_dir

FAMILY_TAGS = ("fam1", "fam2", "app-v1", "app-v2")
CLASS_NUMBER_ONE_A = (7, 11, 19, 43, 67, 163)


class BivarPoly:
    """Polynomial in s, t with integer coefficients; {(i, j): c} for c s^i t^j."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: int(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, c: int) -> "BivarPoly":
        return cls({(0, 0): c})

    @classmethod
    def s(cls) -> "BivarPoly":
        return cls({(1, 0): 1})

    @classmethod
    def t(cls) -> "BivarPoly":
        return cls({(0, 1): 1})

    def _lift(self, other):
        if isinstance(other, BivarPoly):
            return other
        if isinstance(other, int):
            return BivarPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return BivarPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
        return BivarPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = BivarPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def eval(self, s0, t0):
        return sum(c * s0**i * t0**j for (i, j), c in self.terms.items())

    def coefficient(self, i: int, j: int) -> int:
        return self.terms.get((i, j), 0)

    def dehomogenize(self) -> list[int]:
        """Coefficients (low to high) of p(X, 1)."""
        if not self.terms:
            return [0]
        deg = max(i for i, _ in self.terms)
        out = [0] * (deg + 1)
        for (i, _), c in self.terms.items():
            out[i] += c
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j), c in sorted(self.terms.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
            mono = "*".join(x for x in (f"s^{i}" if i > 1 else "s" if i else "",
                                         f"t^{j}" if j > 1 else "t" if j else "") if x)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def parse_poly(text: str) -> BivarPoly:
    """Parse an integer polynomial in s, t written in Python syntax."""
    tree = ast.parse(text.strip(), mode="eval")
    return _eval_node(tree.body)


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return BivarPoly.const(node.value)
    if isinstance(node, ast.Name) and node.id in ("s", "t"):
        return BivarPoly.s() if node.id == "s" else BivarPoly.t()
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                raise ValueError("exponents must be integer literals")
            return _eval_node(node.left) ** node.right.value
        left, right = _eval_node(node.left), _eval_node(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
    raise ValueError(f"unsupported syntax in polynomial: {ast.dump(node)}")


@dataclass
class FamilyTriple:
    tag: str
    polys: dict          # variable name -> BivarPoly (sign +)
    signed: tuple        # variables that carry a +-

    def variables(self):
        return list(self.polys)


def family_file() -> Path:
    return data_dir() / "families.txt"


@lru_cache(maxsize=4)
def _load(path: str) -> dict:
    if not Path(path).exists():
        raise FixtureError(f"fixture file {path} not found")
    raw = Path(path).read_bytes()
    side = Path(path).with_suffix(".sha256")
    if side.exists() and side.read_text().split()[0] != hashlib.sha256(raw).hexdigest():
        raise FixtureError(f"{path}: checksum mismatch")
    fams: dict = {}
    for line in raw.decode().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        tag, var, sign, expr = line.split(None, 3)
        fam = fams.setdefault(tag, FamilyTriple(tag, {}, ()))
        fam.polys[var] = parse_poly(expr)
        if sign == "pm":
            fam.signed = fam.signed + (var,)
        elif sign != "+":
            raise FixtureError(f"bad sign field {sign!r} in {path}")
    missing = [t for t in FAMILY_TAGS if t not in fams]
    if missing:
        raise FixtureError(f"families missing from {path}: {missing}")
    return fams


def load_families(path=None) -> dict[str, FamilyTriple]:
    return _load(str(path or family_file()))


def quartic_residual(x: BivarPoly, y: BivarPoly, z: BivarPoly) -> BivarPoly:
    return 7 * x**2 + y**4 - 4 * z**3


def companion_residual(X: BivarPoly, Y: BivarPoly, Z: BivarPoly) -> BivarPoly:
    return -(Z**2) + 7 * Y**2 - 3 * X**4


def sign_choices(fam: FamilyTriple):
    """Every assignment of signs to the +- variables, as dicts var -> +-1."""
    for signs in itertools.product((1, -1), repeat=len(fam.signed)):
        yield dict(zip(fam.signed, signs))


def valid_sign_pairings(fam: FamilyTriple) -> list[dict]:
    """The sign assignments for which the family's identity holds."""
    residual = quartic_residual if fam.tag.startswith("fam") else companion_residual
    names = ("x", "y", "z") if fam.tag.startswith("fam") else ("X", "Y", "Z")
    out = []
    for choice in sign_choices(fam):
        args = [fam.polys[n] * choice.get(n, 1) for n in names]
        if residual(*args).is_zero():
            out.append(choice)
    return out


def verify_theorem31(fam: FamilyTriple) -> bool:
    """7x^2 + y^4 - 4z^3 is identically zero (for every sign choice)."""
    if fam.tag not in ("fam1", "fam2"):
        raise ValueError(f"{fam.tag} is not one of the 7x^2 + y^4 = 4z^3 families")
    return len(valid_sign_pairings(fam)) == 2 ** len(fam.signed)


def verify_appendix_a(fam: FamilyTriple) -> bool:
    """-Z^2 + 7Y^2 - 3X^4 is identically zero (for every sign choice)."""
    if fam.tag not in ("app-v1", "app-v2"):
        raise ValueError(f"{fam.tag} is not one of the 7Y^2 = 3X^4 + Z^2 families")
    return len(valid_sign_pairings(fam)) == 2 ** len(fam.signed)


def verify_all(path=None) -> dict[str, bool]:
    fams = load_families(path)
    return {"fam1": verify_theorem31(fams["fam1"]),
            "fam2": verify_theorem31(fams["fam2"]),
            "app-v1": verify_appendix_a(fams["app-v1"]),
            "app-v2": verify_appendix_a(fams["app-v2"])}


def lemma21_map(u: int, v: int, a: int = 7, swap: bool = False):
    """(x, y^n, z) = (v(3u^2 - a v^2)/4, u(u^2 - 3a v^2)/4, (u^2 + a v^2)/4),
    a solution of a x^2 + (y^n)^2 = 4z^3 read off from ((u + v sqrt(-a))/2)^3.

    ``swap`` exchanges the first two components, giving x^2 + a (y^n)^2 = 4z^3.
    """
    if u % 2 == 0 or v % 2 == 0:
        raise ValueError("u and v must be odd")
    if a not in CLASS_NUMBER_ONE_A:
        raise ValueError(f"a must be one of {CLASS_NUMBER_ONE_A}")
    x = Fraction(v * (3 * u * u - a * v * v), 4)
    yn = Fraction(u * (u * u - 3 * a * v * v), 4)
    z = Fraction(u * u + a * v * v, 4)
    assert x.denominator == yn.denominator == z.denominator == 1
    if swap:
        x, yn = yn, x
    return int(x), int(yn), int(z)


def genus2_models(path=None) -> dict[str, list[int]]:
    """C1..C4 as sextic coefficient lists (low to high): +-y(X, 1) of each family."""
    fams = load_families(path)
    c1 = fams["fam1"].polys["y"].dehomogenize()
    c3 = fams["fam2"].polys["y"].dehomogenize()
    return {"C1": c1, "C2": [-c for c in c1], "C3": c3, "C4": [-c for c in c3]}
