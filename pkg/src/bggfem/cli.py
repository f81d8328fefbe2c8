"""Command-line front end: ``bggfem mesh gen|info`` and ``bggfem certify``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .homology import COMPLEX_KINDS
from .mesh import GENERATORS, MeshError, generate_mesh, write_mesh
from .operators import AssemblyError
from .report import (
    FAULTS,
    RunConfig,
    certify,
    load_mesh_source,
    report_passed,
    resolve_kinds,
    to_csv,
    to_json,
)

EXIT_OK, EXIT_CERT_FAIL, EXIT_PARSE, EXIT_ASSEMBLY = 0, 1, 2, 3

log = logging.getLogger("bggfem")


def _counts_line(cx) -> str:
    return " ".join(f"{k}={v}" for k, v in cx.counts().items())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bggfem", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    mesh = sub.add_parser("mesh", help="generate or inspect meshes")
    msub = mesh.add_subparsers(dest="action", required=True)
    gen = msub.add_parser("gen", help="write a generated mesh")
    gen.add_argument("--kind", required=True, choices=sorted(GENERATORS))
    gen.add_argument("--res", type=int, default=1)
    gen.add_argument("-o", "--output", required=True)
    info = msub.add_parser("info", help="print simplex counts")
    info.add_argument("source", help="mesh file or gen:<kind>:<res>")

    cert = sub.add_parser("certify", help="assemble complexes and certify them")
    cert.add_argument("--mesh", required=True, help="mesh file or gen:<kind>:<res>")
    cert.add_argument("--kinds", required=True, help=f"comma list or 'all'; known: {', '.join(COMPLEX_KINDS)}")
    cert.add_argument("--seed", type=int, default=0)
    cert.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    cert.add_argument("-o", "--output")
    cert.add_argument("--fault", choices=FAULTS)
    cert.add_argument("--oracle-trials", type=int, default=20)
    cert.add_argument("--oracle-max-cells", type=int)
    return p


def _configure_logging() -> None:
    level = os.environ.get("BGG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_mesh(args) -> int:
    try:
        if args.action == "gen":
            cx = generate_mesh(args.kind, args.res)
            write_mesh(cx, args.output)
        else:
            cx = load_mesh_source(args.source)
    except (MeshError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    print(f"{cx.name}: dim={cx.dim} {_counts_line(cx)}")
    return EXIT_OK


def _cmd_certify(args) -> int:
    try:
        cx = load_mesh_source(args.mesh)
        config = RunConfig(
            "certify",
            args.mesh,
            resolve_kinds(args.kinds, cx.dim),
            args.seed,
            args.fmt,
            args.output,
            args.fault,
            args.oracle_trials,
            args.oracle_max_cells,
        )
    except (MeshError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        reports = certify(config, cx)
    except AssemblyError as exc:
        print(f"assembly error: {exc}", file=sys.stderr)
        return EXIT_ASSEMBLY
    _write(to_json(reports) if config.fmt == "json" else to_csv(reports), config.output)
    ok = all(report_passed(r) for r in reports)
    for r in reports:
        log.info("%s on %s: %s", r["kind"], r["mesh"]["source"], "pass" if report_passed(r) else "FAIL")
    return EXIT_OK if ok else EXIT_CERT_FAIL


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if args.command == "mesh":
        return _cmd_mesh(args)
    return _cmd_certify(args)


if __name__ == "__main__":
    sys.exit(main())
