"""Command-line front end.

Subcommands: ``hj find-line``, ``hj number``, ``points``, ``rank``,
``verify``.  JSON is the canonical output format (CSV is available for
point lists); identical flags and seeds produce byte-identical output.
Exit codes: 0 success, 1 usage or input error, 2 resource limit exceeded,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from .errors import HJPointsError, ResourceLimitError
from .fields import format_element, parse_element, parse_field_tag
from .hyperelliptic import (
    SplitHyperellipticCurve,
    certificate_from_dict,
    certificate_to_dict,
    enumerate_points,
    verify_certificate,
)
from .lines import Coloring, find_monochromatic_line, hj_number_exact, line_cells, read_coloring
from .rank import EllipticCurveQ, build_independent_family, family_from_dict, family_to_dict, verify_family

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RESOURCE = 2
EXIT_VERIFY = 3


@dataclass(frozen=True)
class RunConfig:
    """Resolved run options; equal configs yield byte-identical output."""

    fmt: str = "json"
    seed: int = 0
    n_max: int = 6


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this CLI reserves 2 for
    resource limits, so remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _normalize_argv(argv):
    """Merge '--roots -1,0,1' into '--roots=-1,0,1' so argparse does not
    mistake the negative value for an option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--roots" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--roots={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hjpoints", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    hj = sub.add_parser("hj", help="combinatorial-line commands")
    hj_sub = hj.add_subparsers(dest="hj_command", required=True, parser_class=_Parser)

    find = hj_sub.add_parser("find-line", help="find a monochromatic line in a coloring")
    find.add_argument("--m", type=int, required=True, help="alphabet size")
    find.add_argument("--k", type=int, required=True, help="number of colors")
    src = find.add_mutually_exclusive_group(required=True)
    src.add_argument("--coloring", metavar="FILE", help="coloring file to search")
    src.add_argument("--random", action="store_true", help="search a seeded random coloring")
    find.add_argument("--seed", type=int, default=0, help="seed for --random (default 0)")
    find.add_argument("--n", type=int, help="grid dimension (required with --random)")
    find.add_argument("--format", choices=("json", "text"), default="json")

    number = hj_sub.add_parser("number", help="exact line-forcing threshold for tiny parameters")
    number.add_argument("--m", type=int, required=True)
    number.add_argument("--k", type=int, required=True)
    number.add_argument("--n-cap", type=int, required=True, help="largest dimension to try")
    number.add_argument("--format", choices=("json", "text"), default="json")

    points = sub.add_parser("points", help="enumerate certified curve points")
    points.add_argument("--field", required=True, help="fp:<p> or qp:<p>:<k>")
    points.add_argument("--roots", required=True, help="comma-separated curve roots")
    points.add_argument("--count", type=int, required=True, help="certificates to collect")
    points.add_argument("--n-max", type=int, default=6, help="largest grid dimension (default 6)")
    points.add_argument("--format", choices=("json", "csv", "text"), default="json")

    rank = sub.add_parser("rank", help="build an independent-point family")
    rank.add_argument("--roots", required=True, help="three comma-separated integer roots")
    rank.add_argument("--count", type=int, required=True, help="points to build")
    rank.add_argument("--format", choices=("json", "text"), default="json")

    verify = sub.add_parser("verify", help="re-check certificates from a file")
    verify.add_argument("--certificate", metavar="FILE", required=True)
    verify.add_argument("--format", choices=("json", "text"), default="json")

    return parser


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _cmd_hj_find_line(args) -> int:
    if args.coloring is not None:
        with open(args.coloring, encoding="utf-8") as fh:
            coloring = read_coloring(fh.read())
        if coloring.m != args.m or coloring.k != args.k:
            print(
                f"hjpoints: error: file is an m={coloring.m}, k={coloring.k} coloring",
                file=sys.stderr,
            )
            return EXIT_USAGE
        if args.n is not None and args.n != coloring.n:
            print("hjpoints: error: --n conflicts with the file header", file=sys.stderr)
            return EXIT_USAGE
    else:
        if args.n is None:
            print("hjpoints: error: --random requires --n", file=sys.stderr)
            return EXIT_USAGE
        rng = random.Random(args.seed)
        table = [rng.randrange(args.k) for _ in range(args.m**args.n)]
        coloring = Coloring(args.m, args.n, args.k, table=table)

    found = find_monochromatic_line(coloring)
    out = {"m": coloring.m, "n": coloring.n, "k": coloring.k, "found": found is not None}
    if args.random:
        out["seed"] = args.seed
    if found is not None:
        template, color = found
        out["template"] = template.to_string()
        out["color"] = color
        out["cells"] = [list(cell) for cell in line_cells(template, coloring.m)]
    if args.format == "text":
        print(f"line {out['template']} color {out['color']}" if found else "no line")
    else:
        _emit(out)
    return EXIT_OK


def _cmd_hj_number(args) -> int:
    value = hj_number_exact(args.m, args.k, args.n_cap)
    if args.format == "text":
        print("none" if value is None else value)
    else:
        _emit({"m": args.m, "k": args.k, "n_cap": args.n_cap, "hj_number": value})
    return EXIT_OK


def _parse_roots(field, text):
    return tuple(parse_element(field, tok) for tok in text.split(","))


def _cmd_points(args) -> int:
    field = parse_field_tag(args.field)
    curve = SplitHyperellipticCurve(field, _parse_roots(field, args.roots))
    result = enumerate_points(curve, limit=args.count, n_max=args.n_max)
    certs = [certificate_to_dict(curve, cert) for cert in result.certificates]
    if args.format == "csv":
        for record in certs:
            print(f"{record['x']},{record['y']}")
        return EXIT_OK
    summary = {
        "successes": result.successes,
        "failures": result.failures,
        "skipped": result.skipped,
        "duplicates": result.duplicates,
        "distinct_x": len(result.certificates),
    }
    if args.format == "text":
        for record in certs:
            print(f"x={record['x']} y={record['y']} N={record['N']} template={record['template']}")
        print(f"successes={summary['successes']} failures={summary['failures']} skipped={summary['skipped']}")
        return EXIT_OK
    _emit(
        {
            "field": str(field),
            "roots": [format_element(field, a) for a in curve.roots],
            "n_max": args.n_max,
            "count": args.count,
            "certificates": certs,
            "summary": summary,
        }
    )
    return EXIT_OK


def _cmd_rank(args) -> int:
    roots = tuple(int(tok) for tok in args.roots.split(","))
    curve = EllipticCurveQ(roots)
    family = build_independent_family(curve, args.count)
    out = family_to_dict(family)
    if args.format == "text":
        for entry in out["points"]:
            print(
                f"p={entry['p_steer']} c={entry['c']} d={entry['d']} "
                f"B={entry['torsion_bound']['B']}"
            )
    else:
        _emit(out)
    return EXIT_OK if family.complete else EXIT_RESOURCE


def _verify_payload(payload):
    """Dispatch on file shape: points output, rank family, bare certificate,
    or a list of certificates.  Returns (checked, failures)."""
    failures = []
    if isinstance(payload, dict) and "points" in payload and "roots" in payload:
        family = family_from_dict(payload)
        ok, reason = verify_family(family.curve, family)
        if not ok:
            failures.append({"index": 0, "reason": reason})
        return len(family.records), failures
    if isinstance(payload, dict) and "certificates" in payload:
        records = payload["certificates"]
    elif isinstance(payload, list):
        records = payload
    else:
        records = [payload]
    for idx, record in enumerate(records):
        curve, cert = certificate_from_dict(record)
        ok, reason = verify_certificate(curve, cert)
        if not ok:
            failures.append({"index": idx, "reason": reason})
    return len(records), failures


def _cmd_verify(args) -> int:
    with open(args.certificate, encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        checked, failures = _verify_payload(payload)
    except (KeyError, ValueError, TypeError) as exc:
        print(f"hjpoints: error: malformed certificate file ({exc})", file=sys.stderr)
        return EXIT_USAGE
    out = {"checked": checked, "ok": not failures}
    if failures:
        out["failures"] = failures
    if args.format == "text":
        print("ok" if not failures else "\n".join(f["reason"] for f in failures))
    else:
        _emit(out)
    return EXIT_OK if not failures else EXIT_VERIFY


def run(argv) -> int:
    """Parse argv and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(_normalize_argv(list(argv)))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "hj":
            if args.hj_command == "find-line":
                return _cmd_hj_find_line(args)
            return _cmd_hj_number(args)
        if args.command == "points":
            return _cmd_points(args)
        if args.command == "rank":
            return _cmd_rank(args)
        return _cmd_verify(args)
    except ResourceLimitError as exc:
        print(f"hjpoints: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (HJPointsError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"hjpoints: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
