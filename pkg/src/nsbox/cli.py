"""Command-line interface.

Every command prints JSON on standard output. ``-`` reads standard input.
Exit codes: 0 success (including negative verdicts), 1 domain or I/O error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

from . import __version__
from .cache import Cache
from .core import Behaviour, Setting, from_json, parse_catalog
from .errors import NsboxError
from .localset import DEFAULT_VERTEX_CAP, BellFunctional, is_local, normalize_certificate
from .measures import (
    bell_value,
    chsh,
    comm_cost_avg,
    comm_cost_worst,
    detector_model,
    epr2,
    eta_star,
    monotonicity_suite,
    relative_entropy_nl,
    robustness,
)
from .measures.communication import DEFAULT_STRATEGY_CAP
from .measures.detection import DEFAULT_PRECISION
from .measures.result import jsonable
from .measures.suite import ALL_OPS, SUITE_MEASURES
from .wccpi import DEFAULT_WIRING_CAP, LocalWiring, apply_wiring, coarse_grain, compare

log = logging.getLogger("nsbox")

MEASURES = ("chsh", "bell", "epr2", "robustness", "neff", "comm_avg", "comm_worst", "relent")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise NsboxError(f"{path}: not valid JSON ({exc})") from None


def _load_behaviour(path: str) -> Behaviour:
    return from_json(_load_json(path))


def _emit(obj, compact: bool = False):
    if compact:
        sys.stdout.write(json.dumps(obj) + "\n")
    else:
        sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _fraction(text: str) -> Fraction:
    text = text.strip()
    if text.startswith("2^"):
        return Fraction(2) ** int(text[2:])
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _setting(text: str) -> Setting:
    try:
        return Setting.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_coarse_grain(spec: str, p: Behaviour) -> Behaviour:
    """``PARTY[@INPUT]:SET>REP`` joined by ``;``, 1-based, e.g. ``A:1,3>1;B@2:2,3>2``."""
    out = p
    for part in filter(None, (s.strip() for s in spec.split(";"))):
        try:
            head, body = part.split(":")
            members, rep = body.split(">")
            party, _, inp = head.partition("@")
            members = [int(v) - 1 for v in members.split(",")]
            rep = int(rep) - 1
        except ValueError:
            raise NsboxError(f"cannot parse coarse graining {part!r}; expected PARTY[@INPUT]:SET>REP") from None
        if party not in ("A", "B"):
            raise NsboxError(f"party must be A or B, got {party!r}")
        m = out.setting.mA if party == "A" else out.setting.mB
        inputs = [int(inp) - 1] if inp else list(range(m))
        sets = [members if x in inputs else None for x in range(m)]
        reps = [rep if x in inputs else None for x in range(m)]
        out = coarse_grain(out, party, sets, reps)
    return out


# -- commands ---------------------------------------------------------------

def cmd_validate(args, cache):
    try:
        p = _load_behaviour(args.file)
    except NsboxError as exc:
        _emit({"valid": False, "error": type(exc).__name__, "message": str(exc)})
        return 0
    if args.canonical:
        _emit(p.to_json(), compact=True)
    else:
        _emit({"valid": True, "setting": str(p.setting), "support": p.support_size()})
    return 0


def cmd_catalog(args, cache):
    _emit(parse_catalog(args.name, args.setting).to_json(), compact=True)
    return 0


def cmd_is_local(args, cache):
    p = _load_behaviour(args.file)
    cache.vertex_table(p.setting, args.vertex_cap)
    verdict = is_local(p, args.vertex_cap, certificate=args.certificate)
    if verdict.is_local:
        _emit({"local": True, "weights": jsonable(verdict.weights)})
        return 0
    func = verdict.functional
    if args.normalize:
        func = normalize_certificate(func, p, args.normalize, args.vertex_cap)
    _emit({"local": False, "functional": func.to_json(), "value": str(func.value(p)),
           "violation": str(func.value(p) - func.S)})
    return 0


def cmd_compare(args, cache):
    p1 = _load_behaviour(args.file1)
    p2 = _load_behaviour(args.file2)
    cache.vertex_table(p1.setting, args.vertex_cap)
    cache.wirings(p1.setting, args.wiring_cap)
    v = compare(p1, p2, args.wiring_cap, args.vertex_cap)
    out = {"holds": v.holds}
    if v.holds:
        out["local_weights"] = jsonable(v.local_weights)
        out["wiring_weights"] = [{"wiring": w.to_json(), "weight": str(q)} for w, q in v.wiring_weights.items()]
    else:
        s, t = v.farkas
        out["separating"] = {"s": [str(x) for x in s], "t": str(t)}
    _emit(out)
    return 0


def cmd_transform(args, cache):
    p = _load_behaviour(args.file)
    if args.wiring:
        w = LocalWiring.from_json(_load_json(args.wiring), p.setting)
        out = apply_wiring(w, p)
    elif args.coarse_grain:
        out = _parse_coarse_grain(args.coarse_grain, p)
    else:
        out = detector_model(p, args.eta)
    _emit(out.to_json(), compact=True)
    return 0


def cmd_measure(args, cache):
    p = _load_behaviour(args.file)
    cache.vertex_table(p.setting, args.vertex_cap)
    mid = args.id
    if mid == "chsh":
        res = chsh(p, args.mode, args.wiring_cap)
    elif mid == "bell":
        if not args.functional:
            raise NsboxError("measure bell needs --functional FILE")
        func = BellFunctional.from_json(_load_json(args.functional), p.setting)
        res = bell_value(p, func, args.mode, args.wiring_cap)
    elif mid == "epr2":
        res = epr2(p, args.vertex_cap)
    elif mid == "robustness":
        res = robustness(p, args.vertex_cap)
    elif mid == "neff":
        s = p.setting
        cache.vertex_table(Setting(s.mA, s.mB, s.dA + 1, s.dB + 1), args.vertex_cap)
        res = eta_star(p, args.precision, args.vertex_cap)
    elif mid == "comm_avg":
        res = comm_cost_avg(p, args.strategy_cap)
    elif mid == "comm_worst":
        res = comm_cost_worst(p, args.strategy_cap)
    else:
        res = relative_entropy_nl(p, args.gap_tol, cap=args.vertex_cap)
    _emit(res.to_json())
    return 0


def cmd_suite(args, cache):
    ops = tuple(args.ops.split(",")) if args.ops else None
    report = monotonicity_suite(args.id, args.trials, args.seed, ops=ops, setting=args.setting)
    if args.figure:
        from .plotting import suite_figure

        suite_figure(report, args.figure)
    out = report.to_json()
    if not args.pairs:
        out.pop("pairs")
    _emit(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsbox", description="Exact tools for no-signaling boxes and their nonlocality")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--dump-tableaus", action="store_true", help="log every simplex tableau (very verbose)")
    parser.add_argument("--no-cache", action="store_true", help="do not read or write the enumeration cache")
    parser.add_argument("--vertex-cap", type=int, default=DEFAULT_VERTEX_CAP, help="max deterministic points")
    parser.add_argument("--wiring-cap", type=int, default=DEFAULT_WIRING_CAP, help="max enumerated wirings")
    parser.add_argument("--strategy-cap", type=int, default=DEFAULT_STRATEGY_CAP,
                        help="max communication strategies")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a behaviour file")
    p.add_argument("file")
    p.add_argument("--canonical", action="store_true", help="print the canonical behaviour instead of a report")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("catalog", help="write a named behaviour: uniform, det:F/G, pr:K, isotropic:L")
    p.add_argument("name")
    p.add_argument("--setting", type=_setting, help="mA,mB,dA,dB")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("is-local", help="locality verdict with a certificate")
    p.add_argument("file")
    p.add_argument("--certificate", choices=("strongest", "farkas"), default="strongest")
    p.add_argument("--normalize", choices=("default", "chsh"), help="rescale the Bell functional")
    p.set_defaults(func=cmd_is_local)

    p = sub.add_parser("compare", help="decide whether FILE1 can be turned into FILE2")
    p.add_argument("file1")
    p.add_argument("file2")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("transform", help="apply a free operation")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--wiring", metavar="W.json", help="wiring file with 1-based gA, hA, gB, hB")
    g.add_argument("--coarse-grain", metavar="SPEC", help="e.g. 'A:1,3>1;B:1,3>1' (1-based)")
    g.add_argument("--eta", type=_fraction, help="detector efficiency model")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("measure", help="evaluate a nonlocality measure")
    p.add_argument("id", choices=MEASURES)
    p.add_argument("file")
    p.add_argument("--mode", choices=("relabelings", "all_wirings"), default="relabelings")
    p.add_argument("--functional", help="Bell functional JSON for 'bell'")
    p.add_argument("--precision", type=_fraction, default=DEFAULT_PRECISION, help="bracket width for neff, e.g. 2^-20")
    p.add_argument("--gap-tol", type=float, default=1e-9, help="duality gap for relent")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("suite", help="search for increases of a measure under free operations")
    p.add_argument("id", choices=sorted(SUITE_MEASURES))
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ops", help="comma-separated subset of " + ",".join(ALL_OPS))
    p.add_argument("--setting", type=_setting)
    p.add_argument("--figure", metavar="PATH", help="also render before/after scatter to PATH")
    p.add_argument("--pairs", action="store_true", help="include every (before, after) pair")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.dump_tableaus:
        logging.getLogger("nsbox.ratlp").setLevel(logging.DEBUG)
    cache = Cache(enabled=not args.no_cache)
    try:
        return args.func(args, cache)
    except (NsboxError, ValueError, KeyError, OSError) as exc:
        print(f"nsbox: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
