"""Kraus-type criteria for 3^(2p-3) x^(2p) - 4 y^p = 7 z^2 and the p = 19
companion alpha^38 - 4 beta^19 = 21 v^2, plus the k-search and the sweep.

All three criteria share one shape: for q = kp + 1 prime, compare a_q(F)^2
mod p against a_q(E)^2 for a family of auxiliary curves E over F_q indexed
by k-th roots of unity.  They differ only in which family is used:

  basic    xi in mu_k with (1 - 108 xi)/189 a square; E: y^2 = x^3 + 7 d x^2 - 7 xi x
  refined  delta in S u S' (built from sqrt(21)); E: y^2 = x^3 + 7 delta x^2 - 7 xi_delta x
  p19      xi in mu_k with (1 - 4 xi)/21 a square; E: y^2 = x^3 + 21 d x^2 - 21 xi x
"""
from __future__ import annotations

import json
import multiprocessing as mp
import time
from dataclasses import dataclass, field, asdict
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import ecpoint
from .curves import TWIST_PARTNERS, get_curve, reduce_mod_q
from .ecpoint import CurveFq, trace_bsgs, trace_naive
from .modarith import (FqContext, FqElement, is_prime, jacobi, primes_in_range,
                       roots_of_unity_int, sqrt_int)

VARIANTS = ("basic", "refined", "p19")
BASIC_CURVES = ("588C1", "1176G1")
P11_EXTRA = ("1176A1",)
P19_CURVE = "F1764"
# documented exceptions: no k exists for these under any implemented criterion
EXPECTED_UNRESOLVED = {(13, "588C1")}
DOCUMENTED_EXCEPTIONS = (7, 13)


@dataclass
class XiCandidate:
    xi: FqElement
    delta: FqElement
    curve: CurveFq


@dataclass
class DeltaCandidate:
    q: int
    d: int
    x: int
    tag: str  # "S", "S'" or "S,S'"

    # built on demand: most candidates are never compared

    @property
    def delta(self) -> FqElement:
        return FqElement(self.d, FqContext(self.q))

    @property
    def xi(self) -> FqElement:
        return FqElement(self.x, FqContext(self.q))

    @property
    def curve(self) -> CurveFq:
        return CurveFq(FqContext(self.q), (0, 7 * self.d, 0, -7 * self.x, 0))


@dataclass
class Evaluation:
    """Outcome of one criterion at one k, with the failing condition if any."""

    passed: bool
    variant: str
    p: int
    k: int
    q: int
    failed: str | None = None
    a_F: int | None = None
    sizes: dict = field(default_factory=dict)
    witness: int | None = None

    def describe(self) -> str:
        head = f"{self.variant} p={self.p} k={self.k} q={self.q}: "
        sizes = "".join(f" |{k}|={v}" for k, v in sorted(self.sizes.items()))
        if self.passed:
            return head + "PASS" + sizes
        msg = head + f"FAIL at condition {self.failed}"
        if self.witness is not None:
            msg += f" (witness {self.witness})"
        return msg + sizes


@dataclass
class CriterionReport:
    p: int
    label: str
    variant: str
    k: int | None
    q: int | None
    sizes: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def checkpoint_line(self) -> str:
        kk = "UNRESOLVED" if self.k is None else str(self.k)
        qq = "-" if self.q is None else str(self.q)
        return f"{self.p},{self.label},{self.variant},{kk},{qq}"

    def to_dict(self) -> dict:
        # wall time is left out so machine output stays byte-stable
        d = asdict(self)
        d.pop("elapsed")
        return d


# ---- traces --------------------------------------------------------------

_cross_check = False


def set_cross_check(flag: bool) -> None:
    """Test mode: every auxiliary trace is computed by both engines."""
    global _cross_check
    _cross_check = bool(flag)


def _trace(curve: CurveFq) -> int:
    a = ecpoint.trace(curve)
    if _cross_check and curve.q > ecpoint.BSGS_MIN_Q and curve.q < 10**6:
        b = trace_bsgs(curve) if curve.q < ecpoint.naive_threshold() else \
            trace_naive(curve, threshold=curve.q + 1)
        if a != b:
            raise AssertionError(f"trace engines disagree on {curve}: {a} vs {b}")
    return a


@lru_cache(maxsize=65536)
def trace_of_label(label: str, q: int) -> int:
    """a_q of a registry curve, memoised per (label, q)."""
    return _trace(reduce_mod_q(get_curve(label), q))


def _label_of(F) -> str:
    return F if isinstance(F, str) else F.label


# ---- candidate sets ------------------------------------------------------

def _require_prime_q(p, k):
    q = k * p + 1
    if not is_prime(q):
        raise ValueError(f"q = {k}*{p}+1 = {q} is not prime")
    return q


def _iter_square_family(q, k, num, den, a2_mult, a4_mult):
    """xi in mu_k with (1 - num*xi)/den a square, and the matching curves."""
    ctx = FqContext(q)
    inv = pow(den, -1, q)
    e = (q - 1) // 2
    for xi in roots_of_unity_int(q, k):
        t = (1 - num * xi) * inv % q
        if t and pow(t, e, q) != 1:
            continue
        d = sqrt_int(t, q)
        curve = CurveFq(ctx, (0, a2_mult * d, 0, -a4_mult * xi, 0))
        yield XiCandidate(FqElement(xi, ctx), FqElement(d, ctx), curve)


def a_set(p: int, k: int) -> list[XiCandidate]:
    """A_{k,q}: xi in mu_k with (1 - 108 xi)/189 a square in F_q."""
    q = _require_prime_q(p, k)
    return list(_iter_square_family(q, k, 108, 189, 7, 7))


def b_set(k: int, p: int = 19) -> list[XiCandidate]:
    """B_{k,q}: xi in mu_k with (1 - 4 xi)/21 a square in F_q."""
    q = _require_prime_q(p, k)
    return list(_iter_square_family(q, k, 4, 21, 21, 21))


def sqrt21(q: int) -> int:
    r = sqrt_int(21, q)
    if r is None or r == 0:
        raise ValueError(f"21 is not a nonzero square mod {q}: q does not split")
    return r


def _mu_k_array(q: int, k: int) -> np.ndarray:
    """Sorted mu_k as int64 (requires q < 3e9 for exact products)."""
    return np.array(roots_of_unity_int(q, k), dtype=np.int64)


def _s_deltas(q, k, r, first, second):
    """delta with (1/3 + r d)/first and (1/3 - r d)/second both in mu_k.

    Solving the first condition for d gives one delta per zeta in mu_k, so
    the scan costs O(k) instead of O(q).
    """
    inv3 = pow(3, -1, q)
    ir = pow(r, -1, q)
    isec = pow(second, -1, q)
    if q < 3_000_000_000:
        mu = _mu_k_array(q, k)
        d = ((first * mu - inv3) % q) * ir % q
        z2 = ((inv3 - r * d) % q) * isec % q
        pos = np.searchsorted(mu, z2)
        pos[pos >= len(mu)] = 0
        return sorted(int(x) for x in d[mu[pos] == z2])
    mu = roots_of_unity_int(q, k)
    mus = set(mu)
    out = []
    for z in mu:
        d = (first * z - inv3) * ir % q
        if (inv3 - r * d) * isec % q in mus:
            out.append(d)
    return sorted(out)


def s_sets(p: int, k: int, r21: int | None = None):
    """(S_{k,q}, S'_{k,q}) as lists of DeltaCandidate, sorted by delta.

    ``r21`` defaults to the least square root of 21 mod q; the other root
    swaps the two sets.
    """
    q = _require_prime_q(p, k)
    r = sqrt21(q) if r21 is None else r21 % q
    if r * r % q != 21:
        raise ValueError(f"{r21} is not a square root of 21 mod {q}")
    S = _s_deltas(q, k, r, 3 + r, 3 - r)
    Sp = _s_deltas(q, k, r, 3 - r, 3 + r)
    return _delta_candidates(q, S, "S"), _delta_candidates(q, Sp, "S'")


def _xi_delta(q, d):
    return (1 - 189 * d * d) * pow(108, -1, q) % q


def _delta_candidates(q, deltas, tag):
    i108 = pow(108, -1, q)
    return [DeltaCandidate(q, d, (1 - 189 * d * d) * i108 % q, tag) for d in deltas]


def s_union(p: int, k: int, r21: int | None = None) -> list[DeltaCandidate]:
    S, Sp = s_sets(p, k, r21)
    by_delta = {}
    for c in S + Sp:
        if c.d in by_delta:
            by_delta[c.d].tag = "S,S'"
        else:
            by_delta[c.d] = DeltaCandidate(c.q, c.d, c.x, c.tag)
    return [by_delta[d] for d in sorted(by_delta)]


def unit_power_is_one(q: int, k: int, r21: int | None = None) -> bool:
    """((5 + r21)/2)^k == 1 in F_q, i.e. q | Norm(((5+sqrt21)/2)^k - 1) for split q."""
    r = sqrt21(q) if r21 is None else r21 % q
    e = (5 + r) * pow(2, -1, q) % q
    return pow(e, k, q) == 1


# ---- criteria ------------------------------------------------------------

def _compare(ev: Evaluation, curves: Iterable, key) -> Evaluation:
    target = ev.a_F * ev.a_F % ev.p
    for cand in curves:
        a = _trace(cand.curve)
        if a * a % ev.p == target:
            ev.failed = "(3)" if ev.variant != "refined" else "(5)"
            ev.witness = key(cand)
            return ev
    ev.passed = True
    return ev


def evaluate_basic(p: int, k: int, F="588C1") -> Evaluation:
    q = k * p + 1
    ev = Evaluation(False, "basic", p, k, q)
    if not is_prime(q):
        ev.failed = "(1)"
        return ev
    ev.a_F = trace_of_label(_label_of(F), q)
    if ev.a_F * ev.a_F % p == 4 % p:
        ev.failed = "(2)"
        return ev
    return _compare(ev, _iter_square_family(q, k, 108, 189, 7, 7), lambda c: c.xi.value)


def evaluate_refined(p: int, k: int, F="588C1") -> Evaluation:
    q = k * p + 1
    ev = Evaluation(False, "refined", p, k, q)
    if not is_prime(q):
        ev.failed = "(1)"
        return ev
    if jacobi(21, q) != 1:
        ev.failed = "(2)"
        return ev
    if not unit_power_is_one(q, k):
        ev.failed = "(3)"
        return ev
    ev.a_F = trace_of_label(_label_of(F), q)
    if ev.a_F * ev.a_F % p == 4 % p:
        ev.failed = "(4)"
        return ev
    cands = s_union(p, k)
    ev.sizes = {"S_union": len(cands)}
    return _compare(ev, cands, lambda c: c.d)


def evaluate_p19(k: int, p: int = 19, F=P19_CURVE) -> Evaluation:
    q = k * p + 1
    ev = Evaluation(False, "p19", p, k, q)
    if not is_prime(q):
        ev.failed = "(1)"
        return ev
    ev.a_F = trace_of_label(_label_of(F), q)
    if ev.a_F * ev.a_F % p == 4 % p:
        ev.failed = "(2)"
        return ev
    return _compare(ev, _iter_square_family(q, k, 4, 21, 21, 21), lambda c: c.xi.value)


def criterion_basic(p: int, k: int, F="588C1") -> bool:
    return evaluate_basic(p, k, F).passed


def criterion_refined(p: int, k: int, F="588C1") -> bool:
    return evaluate_refined(p, k, F).passed


def criterion_p19(k: int) -> bool:
    return evaluate_p19(k).passed


def evaluate(variant: str, p: int, k: int, F=None) -> Evaluation:
    if variant == "basic":
        return evaluate_basic(p, k, F or "588C1")
    if variant == "refined":
        return evaluate_refined(p, k, F or "588C1")
    if variant == "p19":
        if p != 19:
            raise ValueError("the p19 variant is only defined for p = 19")
        return evaluate_p19(k, p, F or P19_CURVE)
    raise ValueError(f"unknown variant {variant!r}")


def candidate_sizes(variant: str, p: int, k: int) -> dict:
    """Sizes of the candidate sets at (p, k), for reports."""
    if not is_prime(k * p + 1):
        return {}
    if variant == "p19":
        return {"B": len(b_set(k, p))}
    sizes = {"A": len(a_set(p, k))}
    if variant == "refined" and jacobi(21, k * p + 1) == 1:
        S, Sp = s_sets(p, k)
        sizes.update({"S": len(S), "S_prime": len(Sp), "S_union": len(s_union(p, k))})
    return sizes


def find_k(p: int, F, variant: str = "basic", k_max: int = 500, parity: str = "even") -> int | None:
    """Least k <= k_max (respecting parity) for which the criterion holds."""
    if parity not in ("even", "all"):
        raise ValueError("parity must be 'even' or 'all'")
    start, step = (2, 2) if parity == "even" else (1, 1)
    for k in range(start, k_max + 1, step):
        # q = kp + 1 is even for odd p and odd k: skip without evaluating
        q = k * p + 1
        if q % 2 == 0 and q != 2:
            continue
        if evaluate(variant, p, k, F).passed:
            return k
    return None


# ---- sweep ---------------------------------------------------------------

@dataclass
class SweepPolicy:
    basic_k_max: int = 500
    basic_parity: str = "even"
    refined_k_max: int = 10**5
    refined_parity: str = "all"
    refined_fallback: bool = True
    p19_k_max: int = 500
    p19_parity: str = "even"
    p19: bool = True

    def variants_for(self, p: int, label: str) -> list[str]:
        if label == P19_CURVE:
            return ["p19"]
        out = ["basic"]
        if self.refined_fallback and p > 11:
            out.append("refined")
        return out


def curves_for(p: int, labels: Iterable[str] | None = None, policy: SweepPolicy | None = None):
    policy = policy or SweepPolicy()
    if labels is None:
        labels = list(BASIC_CURVES) + (list(P11_EXTRA) if p == 11 else [])
    labels = [l for l in labels if l not in TWIST_PARTNERS]
    if p == 19 and policy.p19:
        labels = labels + [P19_CURVE]
    return labels


def run_one(p: int, label: str, policy: SweepPolicy) -> list[CriterionReport]:
    """Every criterion attempt for (p, label) in policy order, stopping at success."""
    out = []
    for variant in policy.variants_for(p, label):
        t0 = time.perf_counter()
        k_max = getattr(policy, f"{variant}_k_max")
        parity = getattr(policy, f"{variant}_parity")
        k = find_k(p, label, variant, k_max, parity)
        sizes = candidate_sizes(variant, p, k) if k is not None else {}
        rep = CriterionReport(p, label, variant, k, None if k is None else k * p + 1,
                              sizes, time.perf_counter() - t0)
        out.append(rep)
        if k is not None:
            break
    return out


def _worker_init(threshold):
    ecpoint.set_naive_threshold(threshold)


def _worker(args):
    p, label, policy = args
    return p, label, run_one(p, label, policy)


def parse_checkpoint_line(line: str) -> CriterionReport | None:
    parts = line.strip().split(",")
    if len(parts) != 5:
        return None
    try:
        p = int(parts[0])
        k = None if parts[3] == "UNRESOLVED" else int(parts[3])
        q = None if parts[4] == "-" else int(parts[4])
    except ValueError:
        return None
    if parts[2] not in VARIANTS:
        return None
    return CriterionReport(p, parts[1], parts[2], k, q)


def load_checkpoint(path: Path) -> dict:
    """(p, label) -> reports already on disk; torn or malformed lines are ignored."""
    done: dict = {}
    if path and Path(path).exists():
        for line in Path(path).read_text().splitlines():
            rep = parse_checkpoint_line(line)
            if rep is not None:
                done.setdefault((rep.p, rep.label), []).append(rep)
    return done


def _complete(reps, p, label, policy):
    if any(r.k is not None for r in reps):
        return True
    return {r.variant for r in reps} >= set(policy.variants_for(p, label))


def sweep(p_lo: int, p_hi: int, labels=None, policy: SweepPolicy | None = None,
          checkpoint: str | Path | None = None, workers: int = 1) -> Iterator[CriterionReport]:
    """Reports for every prime p in [p_lo, p_hi), in p order, resuming from ``checkpoint``."""
    policy = policy or SweepPolicy()
    done = load_checkpoint(checkpoint) if checkpoint else {}
    tasks = []
    for p in primes_in_range(p_lo, p_hi):
        for label in curves_for(p, labels, policy):
            tasks.append((p, label))
    todo = [(p, l, policy) for p, l in tasks
            if not ((p, l) in done and _complete(done[(p, l)], p, l, policy))]
    fh = None
    if checkpoint:
        try:
            fh = open(checkpoint, "a")
        except OSError as exc:
            raise SystemExit(f"cannot open checkpoint {checkpoint}: {exc}") from None

    def results():
        if workers <= 1 or len(todo) <= 1:
            for t in todo:
                yield _worker(t)
        else:
            ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp
            with ctx.Pool(workers, _worker_init, (ecpoint.naive_threshold(),)) as pool:
                yield from pool.imap(_worker, todo, chunksize=1)

    fresh = {}
    it = results()
    try:
        for p, label in tasks:
            key = (p, label)
            if key in done and _complete(done[key], p, label, policy):
                for rep in done[key]:
                    rep.sizes = candidate_sizes(rep.variant, p, rep.k) if rep.k else {}
                    yield rep
                continue
            if key not in fresh:
                got_p, got_l, reps = next(it)
                fresh[(got_p, got_l)] = reps
            reps = fresh.pop(key)
            if fh:
                try:
                    fh.write("".join(r.checkpoint_line() + "\n" for r in reps))
                    fh.flush()
                except OSError as exc:
                    raise SystemExit(f"checkpoint write failed: {exc}") from None
            yield from reps
    finally:
        if fh:
            fh.close()


# ---- reports -------------------------------------------------------------

def final_results(reports: Iterable[CriterionReport]) -> dict:
    """(p, label) -> the last report, i.e. the resolving one if any."""
    out = {}
    for r in reports:
        out[(r.p, r.label)] = r
    return out


def unresolved(reports: Iterable[CriterionReport]) -> list[tuple[int, str]]:
    return sorted(key for key, r in final_results(reports).items() if r.k is None)


def unexpected_unresolved(reports) -> list[tuple[int, str]]:
    return [u for u in unresolved(reports) if u not in EXPECTED_UNRESOLVED]


def k_table(reports: list[CriterionReport], labels=BASIC_CURVES) -> str:
    """Basic-criterion k per curve (rows) and p (columns); '-' where none <= cap."""
    basic = {(r.p, r.label): r.k for r in reports if r.variant == "basic"}
    ps = sorted({r.p for r in reports if r.label in labels})
    cells = [["p"] + [str(p) for p in ps]]
    for label in labels:
        cells.append([f"k ({label})"] + [
            "-" if basic.get((p, label)) is None else str(basic[(p, label)]) for p in ps])
    widths = [max(len(row[i]) for row in cells) for i in range(len(cells[0]))]
    lines = [" | ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    extra = [r for r in reports if r.label not in labels or r.variant != "basic"]
    for r in extra:
        kk = "UNRESOLVED" if r.k is None else f"k={r.k} (q={r.q})"
        lines.append(f"{r.variant} {r.label} p={r.p}: {kk}")
    return "\n".join(lines)


def machine_dump(reports: list[CriterionReport], meta: dict | None = None) -> str:
    doc = {"meta": meta or {}, "reports": [r.to_dict() for r in reports]}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def machine_load(text: str) -> tuple[list[CriterionReport], dict]:
    doc = json.loads(text)
    reps = [CriterionReport(**d) for d in doc["reports"]]
    return reps, doc["meta"]
