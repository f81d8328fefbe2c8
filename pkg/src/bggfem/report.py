"""Certification runs and machine-readable reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .homology import COMPLEX_KINDS, complex_kind
from .mesh import SimplicialComplex, generate_mesh, load_mesh
from .operators import ComplexAssembly, assemble_complex
from .spaces import AtomKind
from .verification import (
    DUAL_PARTNER,
    bubble_split,
    certify_cohomology,
    check_aux_diagrams,
    check_duality,
    run_oracle,
)

log = logging.getLogger(__name__)

FAULTS = ("flip-sign", "perturb-entry")
REPORT_KEYS = ("mesh", "kind", "dims", "composites", "cohomology", "duality", "oracle", "runtime_s")

# the oracle integrates high-degree cutoff polynomials; beyond these sizes it is skipped
DEFAULT_ORACLE_MAX_CELLS = {2: 512, 3: 256}


@dataclass
class RunConfig:
    command: str
    mesh_source: str = ""
    kinds: list[str] = field(default_factory=list)
    seed: int = 0
    fmt: str = "json"
    output: str | None = None
    fault: str | None = None
    oracle_trials: int = 20
    oracle_max_cells: int | None = None

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.fmt not in ("json", "csv"):
            raise ValueError(f"unknown format '{self.fmt}'")
        if self.fault is not None and self.fault not in FAULTS:
            raise ValueError(f"unknown fault '{self.fault}', choose from {', '.join(FAULTS)}")
        if self.command == "certify" and not self.kinds:
            raise ValueError("certify needs at least one complex kind")


def load_mesh_source(source: str) -> SimplicialComplex:
    """A mesh file path, or ``gen:<kind>:<resolution>`` for a generated mesh."""
    if source.startswith("gen:"):
        parts = source.split(":")
        if len(parts) != 3:
            raise ValueError(f"generated mesh source must look like gen:<kind>:<res>, got '{source}'")
        try:
            res = int(parts[2])
        except ValueError:
            raise ValueError(f"resolution must be an integer, got '{parts[2]}'") from None
        return generate_mesh(parts[1], res)
    return load_mesh(source)


def resolve_kinds(text: str, dim: int) -> list[str]:
    if text == "all":
        return [k for k, v in COMPLEX_KINDS.items() if v.dim == dim]
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    for k in kinds:
        if complex_kind(k).dim != dim:
            raise ValueError(f"{k} needs a {complex_kind(k).dim}D mesh, got {dim}D")
    return kinds


def inject_fault(asm: ComplexAssembly, fault: str, seed: int) -> tuple[ComplexAssembly, dict]:
    """Corrupt one nonzero entry of the first nonempty operator."""
    for k, op in enumerate(asm.ops):
        if op.nnz:
            keys = sorted(op.entries())
            r, c = random.Random(seed).choice(keys)
            old = op[r, c]
            new = -old if fault == "flip-sign" else old + 1
            ops = list(asm.ops)
            ops[k] = op.with_entry(r, c, new)
            return asm.with_ops(ops), {"fault": fault, "op": k, "entry": [r, c], "applied": True}
    return asm, {"fault": fault, "applied": False}


def _mesh_info(cx: SimplicialComplex, source: str) -> dict:
    return {"source": source, "name": cx.name, "dim": cx.dim, "counts": cx.counts()}


def duality_section(asm: ComplexAssembly, cx: SimplicialComplex) -> dict:
    info = complex_kind(asm.kind)
    if info.family == "aux":
        return check_aux_diagrams(cx, info.bc, asm)
    partner = DUAL_PARTNER[asm.kind]
    if info.family == "hessian":
        verdict = check_duality(asm, assemble_complex(partner, cx))
        return {"partner": partner, **verdict.to_dict()}
    if asm.kind in ("divdiv-3d", "divdiv0-3d"):
        trimmed_kind = asm.kind.replace("-3d", "-trimmed-3d")
        trimmed = assemble_complex(trimmed_kind, cx)
        verdict = check_duality(assemble_complex(partner, cx), trimmed)
        restricts = restricts_to_trimmed(asm, trimmed)
        split = bubble_split(asm, trimmed)
        return {
            "partner": partner,
            "trimmed": verdict.to_dict(),
            "restricts_to_trimmed": restricts,
            "bubble_split": split,
            "pass": verdict.passed and restricts and split["pass"],
        }
    verdict = check_duality(assemble_complex(partner, cx), asm)
    return {"partner": partner, **verdict.to_dict()}


def restricts_to_trimmed(full: ComplexAssembly, trimmed: ComplexAssembly) -> bool:
    """Full operators agree with the trimmed ones off the bubble slots, and bubbles stay isolated."""
    bubble = (AtomKind.MCS_BUBBLE, AtomKind.TDNNS_BUBBLE)
    keep = [[i for i, a in enumerate(s.atoms) if a.kind not in bubble] for s in full.spaces]
    drop = [[i for i, a in enumerate(s.atoms) if a.kind in bubble] for s in full.spaces]
    for k, op in enumerate(full.ops):
        if op.select(keep[k + 1], keep[k]) != trimmed.ops[k]:
            return False
    devgrad_bubbles = full.ops[0].select(drop[1], None)
    divdiv_bubbles = full.ops[2].select(None, drop[2])
    return devgrad_bubbles.nnz == 0 and divdiv_bubbles.nnz == 0


def _oracle_section(asm: ComplexAssembly, cx: SimplicialComplex, trials: int, seed: int, max_cells: int | None) -> dict:
    limit = DEFAULT_ORACLE_MAX_CELLS[cx.dim] if max_cells is None else max_cells
    if trials <= 0:
        return {"trials": 0, "operators": [], "skipped": "disabled", "pass": True}
    if cx.count(cx.dim) > limit:
        reason = f"mesh has {cx.count(cx.dim)} cells, above the oracle limit of {limit}"
        return {"trials": trials, "operators": [], "skipped": reason, "pass": True}
    verdicts = run_oracle(asm, trials, seed)
    return {
        "trials": trials,
        "operators": [v.to_dict() for v in verdicts],
        "skipped": "",
        "pass": all(v.passed for v in verdicts),
    }


def certify_kind(
    kind: str,
    cx: SimplicialComplex,
    source: str = "",
    seed: int = 0,
    oracle_trials: int = 20,
    oracle_max_cells: int | None = None,
    fault: str | None = None,
) -> dict:
    t0 = time.perf_counter()
    asm = assemble_complex(kind, cx, check=False)
    if fault:
        asm, info = inject_fault(asm, fault, seed)
        log.warning("injected fault: %s", info)
    coh = certify_cohomology(asm, cx, oracle=True)
    composites = {"zero": coh.composites, "pass": all(coh.composites)}
    report = {
        "mesh": _mesh_info(cx, source or cx.name),
        "kind": kind,
        "dims": asm.dims,
        "composites": composites,
        "cohomology": [r.to_dict() for r in coh.rows],
        "duality": duality_section(asm, cx),
        "oracle": _oracle_section(asm, cx, oracle_trials, seed, oracle_max_cells),
    }
    report["runtime_s"] = round(time.perf_counter() - t0, 3)
    return report


def report_passed(report: dict) -> bool:
    return (
        report["composites"]["pass"]
        and all(r["pass"] for r in report["cohomology"])
        and report["duality"]["pass"]
        and report["oracle"]["pass"]
    )


def certify(config: RunConfig, cx: SimplicialComplex | None = None) -> list[dict]:
    cx = cx or load_mesh_source(config.mesh_source)
    return [
        certify_kind(
            k,
            cx,
            config.mesh_source,
            config.seed,
            config.oracle_trials,
            config.oracle_max_cells,
            config.fault,
        )
        for k in config.kinds
    ]


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def to_json(reports: list[dict]) -> str:
    return json.dumps(reports, indent=2, sort_keys=True, default=_jsonable) + "\n"


CSV_FIELDS = ("mesh", "kind", "k", "dim", "rank_in", "rank_out", "computed", "expected", "pass")


def to_csv(reports: list[dict]) -> str:
    """Only the cohomology tables, one row per (kind, degree)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rep in reports:
        for row in rep["cohomology"]:
            w.writerow([rep["mesh"]["source"], rep["kind"]] + [row[f] for f in CSV_FIELDS[2:]])
    return buf.getvalue()


def strip_runtime(reports: list[dict]) -> list[dict]:
    return [{k: v for k, v in r.items() if k != "runtime_s"} for r in reports]
