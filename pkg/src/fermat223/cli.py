"""Command-line entry point: ``fermat223 <subcommand> ...``.

Exit status: 0 when every check matches its expected value, 1 on a mismatch
or an unexpected UNRESOLVED prime, 2 on bad input (unknown label, bad config, missing or corrupt fixtures).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import ecpoint, kraus
from .curves import DATA_ENV, TWIST_PARTNERS, FixtureError, get_curve

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# ---- config ------------------------------------------------------------------

def load_config(path: str) -> dict:
    """JSON, or TOML when a TOML reader is importable.  Keys are option names
    with dashes or underscores, e.g. {"pmax": 1000, "workers": 8}."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if p.suffix == ".toml":
        try:
            import tomllib
        except ImportError:
            try:
                import tomli as tomllib
            except ImportError:
                raise InputError("TOML config needs Python 3.11+ or tomli; use JSON") from None
        data = tomllib.loads(text)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Config-file values override command-line flags."""
    if not getattr(args, "config", None):
        return args
    for key, value in load_config(args.config).items():
        if key in ("command", "config", "func"):
            continue
        if not hasattr(args, key):
            raise InputError(f"config key {key!r} is not an option of '{args.command}'")
        setattr(args, key, value)
    return args


def validate(args):
    if getattr(args, "workers", 1) < 1:
        raise InputError("workers must be at least 1")
    if hasattr(args, "pmin") and args.pmin >= args.pmax:
        raise InputError(f"empty prime range [{args.pmin}, {args.pmax})")
    if getattr(args, "data_dir", None):
        os.environ[DATA_ENV] = str(args.data_dir)
    if getattr(args, "threshold", None):
        ecpoint.set_naive_threshold(int(args.threshold))


def emit(args, machine: dict, table: str):
    if args.format == "machine":
        sys.stdout.write(json.dumps(machine, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        print(table)


def round_trip(text: str) -> dict:
    return json.loads(text)


# ---- sweep ---------------------------------------------------------------------

def _policy(args) -> kraus.SweepPolicy:
    return kraus.SweepPolicy(basic_k_max=args.basic_k_max, basic_parity=args.basic_parity,
                             refined_k_max=args.refined_k_max,
                             refined_parity=args.refined_parity,
                             refined_fallback=not args.no_refined,
                             p19_k_max=args.p19_k_max, p19=not args.no_p19)


def expected_exceptions(policy: kraus.SweepPolicy) -> set:
    out = set(kraus.EXPECTED_UNRESOLVED)
    if not policy.refined_fallback:
        out.add((17, "1176G1"))
    return out


def cmd_sweep(args) -> int:
    policy = _policy(args)
    labels = args.curves.split(",") if args.curves else None
    if labels:
        for l in labels:
            get_curve(l)
    reps = list(kraus.sweep(args.pmin, args.pmax, labels, policy, args.checkpoint, args.workers))
    left = [u for u in kraus.unresolved(reps) if u not in expected_exceptions(policy)]
    meta = {"pmin": args.pmin, "pmax": args.pmax, "unexpected_unresolved": left,
            "skipped_twists": dict(sorted(TWIST_PARTNERS.items()))}
    lines = [kraus.k_table(reps)]
    lines.append("twist partners skipped (same a_q^2): "
                 + ", ".join(f"{a} ~ {b}" for a, b in sorted(TWIST_PARTNERS.items())))
    if any(p in kraus.DOCUMENTED_EXCEPTIONS for p, _ in kraus.unresolved(reps)):
        lines.append("p = 13 with 588C1 is a documented exception: no k found by any criterion")
    if left:
        lines.append("UNRESOLVED: " + " ".join(f"{p}/{l}" for p, l in left))
    if args.format == "machine":
        sys.stdout.write(kraus.machine_dump(reps, meta))
    else:
        print("\n".join(lines))
    return EXIT_MISMATCH if left else EXIT_OK


# ---- check ----------------------------------------------------------------------

def cmd_check(args) -> int:
    variant = "p19" if args.p19 else "refined" if args.refined else "basic"
    label = args.curve or (kraus.P19_CURVE if variant == "p19" else "588C1")
    get_curve(label)
    if variant == "p19" and args.p != 19:
        raise InputError("--p19 needs -p 19")
    if args.k is None:
        k_max = {"basic": 500, "refined": 10**5, "p19": 500}[variant] if args.k_max is None else args.k_max
        parity = args.parity or ("all" if variant == "refined" else "even")
        k = kraus.find_k(args.p, label, variant, k_max, parity)
        if k is None:
            emit(args, {"p": args.p, "label": label, "variant": variant, "k": None},
                 f"{variant} p={args.p} {label}: no k <= {k_max} ({parity}) -> UNRESOLVED")
            return EXIT_MISMATCH
    else:
        k = args.k
    ev = kraus.evaluate(variant, args.p, k, label)
    sizes = kraus.candidate_sizes(variant, args.p, k)
    ev.sizes = {**sizes, **ev.sizes}
    machine = {"p": args.p, "k": k, "q": ev.q, "label": label, "variant": variant,
               "passed": ev.passed, "failed": ev.failed, "a_F": ev.a_F,
               "witness": ev.witness, "sizes": ev.sizes}
    emit(args, machine, f"{label} " + ev.describe())
    return EXIT_OK if ev.passed else EXIT_MISMATCH


# ---- families / obstructions / localsol / eliminate --------------------------------

def _report(args, checks: list[tuple[str, object, object]], extra: str = "") -> int:
    """checks: (name, got, expected); prints PASS/FAIL lines, exit on first divergence."""
    rows = []
    first_bad = None
    for name, got, want in checks:
        ok = got == want
        rows.append({"name": name, "got": _plain(got), "expected": _plain(want), "ok": ok})
        if not ok and first_bad is None:
            first_bad = name
    table = "\n".join(f"{'PASS' if r['ok'] else 'FAIL'} {r['name']}: {r['got']}"
                      + ("" if r["ok"] else f" (expected {r['expected']})") for r in rows)
    if extra:
        table += "\n" + extra
    if first_bad:
        table += f"\nfirst divergence: {first_bad}"
    emit(args, {"checks": rows, "first_divergence": first_bad}, table)
    return EXIT_MISMATCH if first_bad else EXIT_OK


def _plain(x):
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in sorted(x.items())}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def cmd_families(args) -> int:
    from . import families
    res = families.verify_all()
    fams = families.load_families()
    extra = "\n".join(f"{tag}: valid sign choices {families.valid_sign_pairings(fams[tag])}"
                      for tag in families.FAMILY_TAGS)
    return _report(args, [(tag, ok, True) for tag, ok in res.items()], extra)


def cmd_obstructions(args) -> int:
    from . import obstruct as ob
    S = ob.derive_s_mod_107()
    checks = [("S mod 107", set(S), set(ob.S_107_EXPECTED)),
              ("classes mod 106", ob.exponent_classes_mod_106(S), set(ob.CLASSES_106_EXPECTED)),
              ("classes mod 168", ob.symplectic_classes_mod_168(), set(ob.CLASSES_168_EXPECTED))]
    extra = (f"mod 7 check blocks p = {[p for p in (5, 7, 11, 13, 17, 19) if ob.mod7_obstruction(p)]}; "
             f"mod 8 check holds for a = {[a for a in ob.MOD8_FIELDS if ob.mod8_obstruction(a)]}")
    return _report(args, checks, extra)


def cmd_localsol(args) -> int:
    from . import localsol
    res = localsol.certify_genus2(args.prime, args.budget)
    checks = []
    for name, r in res.items():
        want = localsol.EMPTY if args.prime == 2 else r.status
        checks.append((f"{name} over Q_{args.prime}", r.status, want))
    extra = ""
    if args.search_bound:
        found = {n: localsol.search_rational_points(f, args.search_bound)
                 for n, f in localsol.d_models().items()}
        for n, pts in found.items():
            checks.append((f"{n} affine points, height <= {args.search_bound}",
                           [str(x) for x, _ in pts], []))
    if args.prime != 2:
        extra = "(only p = 2 has expected values; other primes are reported as found)"
    return _report(args, checks, extra)


GOLDEN_ELIMINATION = [
    ((588, 1176), 13, {"588C", "588E", "1176G", "1176H"}),
    ((588, 1176), 11, {"588C", "588E", "1176G", "1176H", "1176A", "1176F"}),
    ((1764,), 19, {"f4", "f6"}),
]


def cmd_eliminate(args) -> int:
    from . import newelim
    if args.level:
        levels = tuple(args.level)
        p = args.p or 13
        golden = [g for g in GOLDEN_ELIMINATION if g[0] == levels and g[1] == p]
        if not golden:
            surv = newelim.elimination_report(levels, p)
            rows = [{"level": s.record.level, "label": s.record.label,
                     "class": s.record.cremona_class,
                     "verdicts": [[v.method, v.eliminable, sorted(v.exceptional)] for v in s.verdicts]}
                    for s in surv]
            table = "\n".join(f"{r['level']} {r['label']} {r['class'] or ''}".rstrip() for r in rows)
            emit(args, {"levels": list(levels), "p": p, "survivors": rows},
                 table or "no survivors")
            return EXIT_OK
    else:
        golden = GOLDEN_ELIMINATION
    checks = [(f"levels {'+'.join(map(str, lv))} at p = {p}", newelim.survivor_names(lv, p), want)
              for lv, p, want in golden]
    return _report(args, checks)


# ---- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fermat223",
                                 description="Checks for 7x^2 + y^(2p) = 4z^3.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON/TOML file whose values override flags")
    common.add_argument("--format", choices=("table", "machine"), default="table")
    common.add_argument("--data-dir", help=f"fixture directory (also ${DATA_ENV})")
    common.add_argument("--threshold", type=int, default=None,
                        help="q below which traces are counted naively")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", parents=[common], help="k-search over a range of primes")
    sp.add_argument("--pmin", type=int, default=11)
    sp.add_argument("--pmax", type=int, default=60, help="exclusive upper bound")
    sp.add_argument("--curves", help="comma-separated labels (default 588C1,1176G1)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--checkpoint")
    sp.add_argument("--basic-k-max", type=int, default=500)
    sp.add_argument("--basic-parity", choices=("even", "all"), default="even")
    sp.add_argument("--refined-k-max", type=int, default=10**5)
    sp.add_argument("--refined-parity", choices=("even", "all"), default="all")
    sp.add_argument("--p19-k-max", type=int, default=500)
    sp.add_argument("--no-refined", action="store_true", help="basic criterion only")
    sp.add_argument("--no-p19", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    cp = sub.add_parser("check", parents=[common], help="one criterion at one (p, k)")
    cp.add_argument("-p", type=int, required=True)
    cp.add_argument("--curve")
    g = cp.add_mutually_exclusive_group()
    g.add_argument("--refined", action="store_true")
    g.add_argument("--p19", action="store_true")
    cp.add_argument("-k", type=int, help="omit to search for the least k")
    cp.add_argument("--k-max", type=int)
    cp.add_argument("--parity", choices=("even", "all"))
    cp.set_defaults(func=cmd_check)

    sub.add_parser("families", parents=[common], help="verify the parametric families") \
        .set_defaults(func=cmd_families)
    sub.add_parser("obstructions", parents=[common], help="residue-class obstructions") \
        .set_defaults(func=cmd_obstructions)

    lp = sub.add_parser("localsol", parents=[common], help="local solubility of C1..C4")
    lp.add_argument("--prime", type=int, default=2)
    lp.add_argument("--budget", type=int, default=64)
    lp.add_argument("--search-bound", type=int, default=0,
                    help="also search D1, D2 for affine points up to this height")
    lp.set_defaults(func=cmd_localsol)

    ep = sub.add_parser("eliminate", parents=[common], help="newform elimination survivors")
    ep.add_argument("--level", type=int, action="append", help="repeatable; default: golden runs")
    ep.add_argument("-p", type=int)
    ep.set_defaults(func=cmd_eliminate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        apply_config(args)
        validate(args)
        return args.func(args)
    except (InputError, FixtureError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
