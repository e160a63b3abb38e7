"""Rational elliptic curves used by the criteria: the bundled registry,
Frey curve constructors, and reduction mod q.

The registry is read from ``data/curves.jsonl`` (one JSON object per line).
The directory can be redirected with the ``FERMAT223_DATA`` environment
variable.  Every record is re-checked at load: the discriminant is recomputed
from the model, and the stored valuations and conductor support must agree.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import urllib.request
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .ecpoint import CurveFq
from .modarith import FqContext, factorize

DATA_ENV = "FERMAT223_DATA"
FIXTURE_FIELDS = ("label", "coefficients", "conductor", "disc",
                  "v2", "v3", "v7", "jden_v3", "jden_v7")
REQUIRED_LABELS = ("588C1", "588E1", "1176A1", "1176F1", "1176G1", "1176H1",
                   "F1764", "G1764")
# a_l(F)^2 = a_l(partner)^2 for all l, so the criteria only need the first
TWIST_PARTNERS = {"588E1": "588C1", "1176F1": "1176A1", "1176H1": "1176G1"}


class FixtureError(RuntimeError):
    pass


class BadReductionError(ValueError):
    pass


def data_dir() -> Path:
    env = os.environ.get(DATA_ENV)
    return Path(env) if env else Path(__file__).resolve().parent / "data"


def valuation(n: int, p: int) -> int:
    n = abs(n)
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def weierstrass_invariants(a):
    """(b2, b4, b6, b8, c4, c6, disc) of an integral long model."""
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return b2, b4, b6, b8, c4, c6, disc


def semistability_defect(v: int) -> int:
    """Denominator of v/12 in lowest terms."""
    if v < 0:
        raise ValueError("valuation must be non-negative")
    return 12 // math.gcd(v, 12)


@dataclass(frozen=True)
class RationalCurve:
    label: str
    coefficients: tuple
    conductor: int | None
    disc: int
    v2: int
    v3: int
    v7: int
    jden_v3: int
    jden_v7: int
    provenance: str = "computed"
    note: str | None = None

    @classmethod
    def from_model(cls, label, coefficients, conductor=None, provenance="computed", note=None):
        a = tuple(int(c) for c in coefficients)
        _, _, _, _, c4, _, disc = weierstrass_invariants(a)
        if disc == 0:
            raise ValueError(f"{label}: singular model {list(a)}")
        g = math.gcd(c4**3, disc)
        jden = abs(disc) // g
        return cls(label, a, conductor, disc,
                   _val0(disc, 2), _val0(disc, 3), _val0(disc, 7),
                   _val0(jden, 3), _val0(jden, 7), provenance, note)

    def reduced_disc(self, l: int) -> int:
        """Delta / l^v_l(Delta)."""
        return self.disc // l ** valuation(self.disc, l)

    def valuation_at(self, l: int) -> int:
        return valuation(self.disc, l)

    def j_invariant(self) -> Fraction:
        return Fraction(weierstrass_invariants(self.coefficients)[4] ** 3, self.disc)

    def to_record(self) -> dict:
        rec = {"label": self.label, "coefficients": list(self.coefficients),
               "conductor": self.conductor, "disc": self.disc,
               "v2": self.v2, "v3": self.v3, "v7": self.v7,
               "jden_v3": self.jden_v3, "jden_v7": self.jden_v7,
               "provenance": self.provenance}
        if self.note:
            rec["note"] = self.note
        return rec


def _val0(n, p):
    return valuation(n, p) if n else 0


def validate_record(rec: dict) -> RationalCurve:
    missing = [f for f in FIXTURE_FIELDS if f not in rec]
    if missing:
        raise FixtureError(f"record {rec.get('label', '?')}: missing fields {missing}")
    label = rec["label"]
    c = RationalCurve.from_model(label, rec["coefficients"], rec["conductor"],
                                 rec.get("provenance", "fixture"), rec.get("note"))
    for f in ("disc", "v2", "v3", "v7", "jden_v3", "jden_v7"):
        if getattr(c, f) != rec[f]:
            raise FixtureError(f"{label}: stored {f}={rec[f]} but model gives {getattr(c, f)}")
    bad = {p for p, _ in factorize(c.disc)}
    if bad != {p for p, _ in factorize(c.conductor)}:
        raise FixtureError(f"{label}: discriminant support {sorted(bad)} "
                           f"does not match conductor {c.conductor}")
    return c


def read_jsonl(path: Path, check_sum: bool = True) -> list[dict]:
    if not path.exists():
        raise FixtureError(f"fixture file {path} not found")
    raw = path.read_bytes()
    side = path.with_suffix(".sha256")
    if check_sum and side.exists():
        want = side.read_text().split()[0]
        got = hashlib.sha256(raw).hexdigest()
        if want != got:
            raise FixtureError(f"{path}: checksum mismatch ({got[:12]} != {want[:12]})")
    return [json.loads(line) for line in raw.decode().splitlines() if line.strip()]


@lru_cache(maxsize=8)
def _registry(path: str) -> dict:
    out = {}
    for rec in read_jsonl(Path(path)):
        c = validate_record(rec)
        out[c.label] = c
    for label in REQUIRED_LABELS:
        if label not in out:
            raise FixtureError(f"curve {label} missing from {path}")
    return out


def builtin_registry(path: str | Path | None = None) -> dict[str, RationalCurve]:
    """Label -> RationalCurve for every curve in the fixture file."""
    p = Path(path) if path else data_dir() / "curves.jsonl"
    return dict(_registry(str(p)))


def get_curve(label: str, path=None) -> RationalCurve:
    reg = builtin_registry(path)
    try:
        return reg[label]
    except KeyError:
        raise KeyError(f"unknown curve {label!r}; registry has {sorted(reg)}") from None


def reduce_mod_q(curve: RationalCurve, q: int) -> CurveFq:
    bad = curve.conductor if curve.conductor else curve.disc
    if bad % q == 0:
        raise BadReductionError(f"{curve.label} has bad reduction at {q}")
    return CurveFq(FqContext(q), curve.coefficients)


# ---- Frey curves -------------------------------------------------------

@dataclass(frozen=True)
class FreyCurve:
    a: int
    b: int
    c: int
    p: int
    variant: str  # "kraus2" or "bs1"
    model: RationalCurve = field(repr=False, compare=False)

    def expected_disc(self) -> int:
        """Discriminant predicted when (a, b, c) actually solves the equation."""
        ab = (self.a * self.b) ** (2 * self.p)
        if self.variant == "kraus2":
            return 2**4 * 3 ** (2 * self.p - 3) * 7**3 * ab
        return 2**4 * 3**3 * 7**3 * ab

    def satisfies_equation(self) -> bool:
        a, b, c, p = self.a, self.b, self.c, self.p
        if self.variant == "kraus2":
            return 3 ** (2 * p - 3) * a ** (2 * p) - 4 * b**p == 7 * c * c
        return a ** (2 * p) - 4 * b**p == 21 * c * c


def _check_frey_args(a, b, c, p):
    if any(x % 2 == 0 for x in (a, b, c)):
        raise ValueError("a, b, c must all be odd")
    if math.gcd(a, b) != 1 or math.gcd(a, c) != 1 or math.gcd(b, c) != 1:
        raise ValueError("a, b, c must be pairwise coprime")
    if p < 3:
        raise ValueError("exponent p must be an odd prime")


def frey_kraus2(a: int, b: int, c: int, p: int) -> FreyCurve:
    """Y^2 = X^3 + 7c X^2 - 7 b^p X."""
    _check_frey_args(a, b, c, p)
    model = RationalCurve.from_model(f"Frey2({a},{b},{c};{p})", (0, 7 * c, 0, -7 * b**p, 0))
    return FreyCurve(a, b, c, p, "kraus2", model)


def frey_bs1(a: int, b: int, c: int, p: int) -> FreyCurve:
    """Y^2 = X^3 + 21c X^2 - 21 b^p X."""
    _check_frey_args(a, b, c, p)
    model = RationalCurve.from_model(f"Frey1({a},{b},{c};{p})", (0, 21 * c, 0, -21 * b**p, 0))
    return FreyCurve(a, b, c, p, "bs1", model)


# ---- optional refresh from LMFDB -----------------------------------------

LMFDB_API = "https://www.lmfdb.org/api/ec_curvedata/"


def fetch_lmfdb(label: str, timeout: float = 30.0) -> dict:
    """Fetch one curve by Cremona label and return a fixture record.

    Network helper for regenerating fixtures by hand; nothing in the package
    or its tests calls it.
    """
    url = f"{LMFDB_API}?Clabel={label.lower()}&_format=json&_fields=ainvs,conductor"
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        data = json.load(resp)["data"]
    if not data:
        raise KeyError(f"LMFDB has no curve {label}")
    row = data[0]
    c = RationalCurve.from_model(label, row["ainvs"], int(row["conductor"]), "lmfdb")
    return c.to_record()
