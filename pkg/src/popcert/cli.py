"""Command-line front end.

Exit codes: 0 when the verdict is polynomial, 1 when it is maybe,
2 on any error (unreadable input, bad flags, failed recheck).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Optional

from .dp import estimate_graph, to_dot, tpwidp, widp
from .pipeline import (
    AnalysisConfig,
    Certificate,
    MalformedCertificate,
    VERDICT_POLYNOMIAL,
    analyze,
    certificate_from_text,
    certificate_to_text,
    check_polytime,
    empirical_validate,
    recheck,
    sorted_info_from,
)
from .trs import ParseError, parse_trs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="popcert",
        description="Certify polynomial innermost runtime of rewrite systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="analyze a rewrite system file")
    a.add_argument("file", help="rewrite system in (VAR)(RULES) format")
    a.add_argument("--mode", choices=("direct", "dp", "dg"), default="dg")
    a.add_argument(
        "--tpwidp",
        action="store_true",
        help="use type preserving pairs (keeps represented contexts)",
    )
    a.add_argument(
        "--solver",
        default="internal",
        metavar="internal|ext:<path>",
        help="SAT backend for the parameter search",
    )
    a.add_argument("--timeout-ms", type=int, default=60_000, metavar="N")
    a.add_argument("--path-timeout-ms", type=int, default=5_000, metavar="N")
    a.add_argument(
        "--check-polytime",
        action="store_true",
        help="verify the sorted-signature side conditions and add the claim",
    )
    a.add_argument(
        "--empirical",
        type=int,
        metavar="N",
        help="measure derivation lengths on basic terms up to size N",
    )
    a.add_argument("--cert-out", metavar="FILE", help="write the certificate")
    a.add_argument(
        "--recheck",
        metavar="CERT",
        help="replay a stored certificate against the input instead of analyzing",
    )
    a.add_argument("--dot", metavar="FILE", help="write the estimated graph")
    return parser


def _solver_config(text: str) -> tuple[str, Optional[str]]:
    if text == "internal":
        return "internal", None
    if text.startswith("ext:") and len(text) > 4:
        return "external", text[4:]
    raise ValueError(f"bad --solver value {text!r}; use internal or ext:<path>")


def _print_certificate(cert: Certificate) -> None:
    print(f"verdict: {cert.verdict}")
    kind = "tpwidp" if cert.tp_pairs else "widp"
    print(f"mode: {cert.mode} ({kind} pairs)")
    for record in cert.paths:
        usable = " ".join(str(i) for i in record.usables) or "none"
        print(f"path {record.label()}: oriented, usable rules {usable}")
    for note in cert.diagnostics:
        print(f"note: {note}")


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.file, encoding="utf-8") as handle:
            trs = parse_trs(handle.read())
    except OSError as e:
        print(f"popcert: {e}", file=sys.stderr)
        return 2
    except ParseError as e:
        print(f"popcert: {args.file}: {e}", file=sys.stderr)
        return 2

    if args.recheck:
        try:
            with open(args.recheck, encoding="utf-8") as handle:
                cert = certificate_from_text(handle.read())
        except OSError as e:
            print(f"popcert: {e}", file=sys.stderr)
            return 2
        except MalformedCertificate as e:
            print(f"popcert: {args.recheck}: {e}", file=sys.stderr)
            return 2
        try:
            ok = recheck(cert, trs)
        except MalformedCertificate as e:
            print(f"popcert: {args.recheck}: {e}", file=sys.stderr)
            return 2
        if not ok:
            print("recheck: failed")
            return 2
        print("recheck: ok")
        print(f"verdict: {cert.verdict}")
        return 0 if cert.verdict == VERDICT_POLYNOMIAL else 1

    try:
        backend, solver_path = _solver_config(args.solver)
    except ValueError as e:
        print(f"popcert: {e}", file=sys.stderr)
        return 2
    cfg = AnalysisConfig(
        mode=args.mode,
        tp_pairs=args.tpwidp,
        backend=backend,
        solver_path=solver_path,
        path_timeout_s=args.path_timeout_ms / 1000,
        timeout_s=args.timeout_ms / 1000,
    )
    cert = analyze(trs, cfg)
    _print_certificate(cert)

    if args.check_polytime:
        report = check_polytime(trs, sorted_info_from(trs), cert)
        if report.added:
            cert = dataclasses.replace(cert, polytime=True)
            print("polytime: claim added")
        else:
            print("polytime: not applicable")
            for reason in report.reasons:
                print(f"  reason: {reason}")

    if args.empirical is not None:
        report = empirical_validate(trs, cert, max_size=args.empirical)
        cert = dataclasses.replace(cert, empirical=report)
        print(
            f"empirical: exponent {report.exponent:.2f}, "
            f"superpoly {'yes' if report.superpoly else 'no'}"
        )
        for note in report.notes:
            print(f"  note: {note}")

    if args.dot:
        pairs = tpwidp(trs) if args.tpwidp else widp(trs)
        graph = estimate_graph(pairs, trs)
        try:
            with open(args.dot, "w", encoding="utf-8") as handle:
                handle.write(to_dot(graph))
        except OSError as e:
            print(f"popcert: {e}", file=sys.stderr)
            return 2

    if args.cert_out:
        try:
            with open(args.cert_out, "w", encoding="utf-8") as handle:
                handle.write(certificate_to_text(cert))
        except OSError as e:
            print(f"popcert: {e}", file=sys.stderr)
            return 2

    return 0 if cert.verdict == VERDICT_POLYNOMIAL else 1


if __name__ == "__main__":
    raise SystemExit(main())
