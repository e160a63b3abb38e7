"""Newform elimination: the norm-product test, the j-invariant test and the
semistability-defect test, applied to the bundled eigenvalue fixtures.

Eigenvalues are stored as monic minimal polynomials over Z (high degree
first).  For c a root of g with deg g = d', Norm(c - a) over Q(c) equals
(-1)^d' g(a); over the full coefficient field it is a power of that, which
changes multiplicities but not prime support, so g(a) is all we need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .curves import data_dir, read_jsonl
from .modarith import is_prime, prime_divisors

KRAUS2_LEVELS = (588, 1176)
BS1_LEVELS = (1764, 3528)
FREY_DEFECT_7 = 4
J_TEST_FROM = 11         # the j-invariant and defect arguments need p >= 11
NORM_DROP = frozenset({2, 3, 5})
NORM_PRODUCT, J_INVARIANT, SEMISTABILITY = "norm-product", "j-invariant", "semistability"


class MissingEigenvalueError(KeyError):
    pass


@dataclass(frozen=True)
class NewformRecord:
    level: int
    label: str
    degree: int
    eigenvalues: dict            # l -> tuple of minpoly coefficients, high degree first
    cremona_class: str | None = None
    curve: str | None = None
    jden_v3: int | None = None
    jden_v7: int | None = None
    defect7: int | None = None
    two_torsion: bool | None = None
    numbering: str = ""
    field: str = "x"

    @classmethod
    def from_record(cls, rec: dict) -> "NewformRecord":
        eig = {}
        for l, g in rec["eigenvalues"]:
            g = tuple(int(c) for c in g)
            if g[0] != 1:
                raise ValueError(f"{rec['label']}: minimal polynomial at {l} is not monic")
            if rec["degree"] % (len(g) - 1):
                raise ValueError(f"{rec['label']}: degree of c_{l} does not divide {rec['degree']}")
            eig[int(l)] = g
        return cls(int(rec["level"]), rec["label"], int(rec["degree"]), eig,
                   rec.get("cremona_class"), rec.get("curve"), rec.get("jden_v3"),
                   rec.get("jden_v7"), rec.get("defect7"), rec.get("two_torsion"),
                   rec.get("numbering", ""), rec.get("field", "x"))

    @property
    def name(self) -> str:
        return f"{self.level}{self.label}"

    def display(self) -> str:
        return f"{self.label} ({self.cremona_class})" if self.cremona_class else self.label

    def rational_eigenvalue(self, l: int) -> int:
        g = self.eigenvalues[l]
        if len(g) != 2:
            raise ValueError(f"c_{l} of {self.name} is not rational")
        return -g[1]


@dataclass
class EliminationVerdict:
    method: str
    eliminable: bool
    exceptional: frozenset = frozenset()
    applicable: bool = True
    from_p: int = 7
    detail: str = ""

    def eliminates(self, p: int) -> bool:
        return (self.applicable and self.eliminable and p >= self.from_p
                and p not in self.exceptional)


def hecke_bound(N: int) -> int:
    """floor(mu/6) with mu = N prod_{p | N} (1 + 1/p)."""
    if N < 1:
        raise ValueError("level must be positive")
    mu = Fraction(N)
    for p in prime_divisors(N) if N > 1 else ():
        mu *= 1 + Fraction(1, p)
    return math.floor(mu / 6)


def _minpoly_at(g, a: int) -> int:
    acc = 0
    for c in g:
        acc = acc * a + c
    return acc


def norm_product(l: int, rec: NewformRecord) -> int:
    """|Norm(c_l - l - 1) Norm(c_l + l + 1) prod_r Norm(c_l - 2r)|, times l for degree > 1."""
    if rec.level % l == 0:
        raise ValueError(f"{l} divides the level {rec.level}")
    if l not in rec.eigenvalues:
        raise MissingEigenvalueError(f"no eigenvalue c_{l} for {rec.name}")
    g = rec.eigenvalues[l]
    prod = _minpoly_at(g, l + 1) * _minpoly_at(g, -l - 1)
    if rec.degree != 1:
        prod *= l
    s = math.isqrt(l)
    for r in range(-s, s + 1):
        prod *= _minpoly_at(g, 2 * r)
    return abs(prod)


def admissible_primes(rec: NewformRecord) -> list[int]:
    bound = hecke_bound(rec.level)
    return [l for l in range(2, bound + 1) if is_prime(l) and rec.level % l]


def eliminate_norm_product(rec: NewformRecord, primes=None) -> EliminationVerdict:
    ls = admissible_primes(rec) if primes is None else list(primes)
    if not rec.eigenvalues:
        raise ValueError(f"{rec.name} has an empty eigenvalue table")
    supports = []
    used = []
    for l in ls:
        if l not in rec.eigenvalues:
            continue
        n = norm_product(l, rec)
        if n:
            supports.append(set(prime_divisors(n)))
            used.append(l)
    if not supports:
        return EliminationVerdict(NORM_PRODUCT, False, detail="every norm product vanishes")
    pf = supports[0] - NORM_DROP
    for s in supports[1:]:
        pf &= s
    return EliminationVerdict(NORM_PRODUCT, True, frozenset(pf),
                              detail=f"{len(used)} primes l used")


def eliminate_j_invariant(rec: NewformRecord) -> EliminationVerdict:
    """Non-integral j at the primes that matter for the level's Frey curve.

    For the levels 588 and 1176 only a 7 in the denominator counts (the Frey
    curve there is multiplicative at 3); for 1764 and 3528 a 3 or a 7 does.
    """
    if rec.jden_v7 is None or rec.jden_v3 is None:
        return EliminationVerdict(J_INVARIANT, False, applicable=False,
                                  detail="no attached curve")
    if rec.level in KRAUS2_LEVELS:
        ok = rec.jden_v7 > 0
    else:
        ok = rec.jden_v3 > 0 or rec.jden_v7 > 0
    return EliminationVerdict(J_INVARIANT, ok, from_p=J_TEST_FROM,
                              applicable=ok,
                              detail=f"v3={rec.jden_v3} v7={rec.jden_v7} in the j denominator")


def eliminate_semistability(rec: NewformRecord, frey_defect: int = FREY_DEFECT_7) -> EliminationVerdict:
    if rec.defect7 is None:
        return EliminationVerdict(SEMISTABILITY, False, applicable=False,
                                  detail="no defect data")
    ok = rec.defect7 != frey_defect
    return EliminationVerdict(SEMISTABILITY, ok, from_p=J_TEST_FROM,
                              detail=f"defect {rec.defect7} vs {frey_defect}")


METHODS = (NORM_PRODUCT, J_INVARIANT, SEMISTABILITY)


def verdicts(rec: NewformRecord) -> list[EliminationVerdict]:
    """All three verdicts, in the order they are tried.

    Both Frey curves have v_7(Delta) = 3 when 7 does not divide ab, so the
    defect to compare against is 4 at every level.
    """
    return [eliminate_norm_product(rec), eliminate_j_invariant(rec),
            eliminate_semistability(rec)]


def deciding_verdict(vs: list[EliminationVerdict]) -> EliminationVerdict | None:
    """The first method that eliminates the form for all but finitely many p.

    That method alone decides the form: a norm-product exceptional prime stays
    exceptional even if a later test would also apply there.
    """
    return next((v for v in vs if v.applicable and v.eliminable), None)


def newform_file() -> Path:
    return data_dir() / "newforms.jsonl"


@lru_cache(maxsize=4)
def _load(path: str) -> tuple:
    return tuple(NewformRecord.from_record(r) for r in read_jsonl(Path(path)))


def load_newforms(level: int | None = None, path=None) -> list[NewformRecord]:
    recs = _load(str(path or newform_file()))
    return [r for r in recs if level is None or r.level == level]


@dataclass
class Survivor:
    record: NewformRecord
    verdicts: list = field(default_factory=list)

    @property
    def key(self) -> str:
        return self.record.cremona_class or f"{self.record.level}{self.record.label}"


def elimination_report(levels, p: int, path=None) -> list[Survivor]:
    """Forms at the given levels that no method eliminates at exponent p."""
    if isinstance(levels, int):
        levels = (levels,)
    out = []
    for level in levels:
        for rec in load_newforms(level, path):
            vs = verdicts(rec)
            d = deciding_verdict(vs)
            if d is None or not d.eliminates(p):
                out.append(Survivor(rec, vs))
    return out


def survivor_names(levels, p: int, path=None) -> set[str]:
    """Cremona classes at 588/1176, Stein labels at 1764/3528."""
    names = set()
    for s in elimination_report(levels, p, path):
        rec = s.record
        names.add(rec.cremona_class if rec.level in KRAUS2_LEVELS and rec.cremona_class
                  else rec.label)
    return names
