"""Simplicial complexes of bounded polyhedral domains.

Simplices are strictly increasing tuples of vertex indices. All signs are
taken with respect to that canonical ordering, so incidence is a purely
combinatorial function of the vertex indices.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .linalg import ExactMatrix, det

Coord = tuple[Fraction, ...]
Simplex = tuple[int, ...]


class MeshError(ValueError):
    """Base class for problems with mesh input."""


class MeshParseError(MeshError):
    pass


class TopologyError(MeshError):
    pass


class DimensionError(MeshError):
    pass


class OrientationVariant(enum.Enum):
    RELATIVE = "relative"
    STANDARD = "standard"


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    dim: int
    vertices: tuple[Coord, ...]
    simplices: tuple[tuple[Simplex, ...], ...]
    boundary_flag: tuple[tuple[bool, ...], ...]
    # sign of det(x1 - x0, ..., xn - x0) for each top cell in canonical order
    cell_sign: tuple[int, ...]
    name: str = field(default="")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.vertices == other.vertices
            and self.simplices == other.simplices
            and self.boundary_flag == other.boundary_flag
        )

    def __hash__(self) -> int:
        return hash((self.dim, self.vertices, self.simplices))

    def count(self, k: int) -> int:
        return len(self.simplices[k])

    @cached_property
    def _index(self) -> tuple[dict[Simplex, int], ...]:
        return tuple({s: i for i, s in enumerate(level)} for level in self.simplices)

    def index(self, simplex: Sequence[int]) -> int:
        s = tuple(simplex)
        return self._index[len(s) - 1][s]

    def is_boundary(self, simplex: Sequence[int]) -> bool:
        s = tuple(simplex)
        return self.boundary_flag[len(s) - 1][self.index(s)]

    def interior(self, k: int) -> list[Simplex]:
        return [s for s, b in zip(self.simplices[k], self.boundary_flag[k]) if not b]

    def chain_basis(self, k: int, variant: OrientationVariant) -> list[Simplex]:
        """Simplices spanning the k-chains: interior ones for relative chains."""
        if variant is OrientationVariant.RELATIVE:
            return self.interior(k)
        return list(self.simplices[k])

    @cached_property
    def _cofaces(self) -> tuple[dict[Simplex, tuple[Simplex, ...]], ...]:
        out: list[dict[Simplex, list[Simplex]]] = [dict() for _ in range(self.dim)]
        for k in range(1, self.dim + 1):
            table = out[k - 1]
            for s in self.simplices[k]:
                for f in itertools.combinations(s, k):
                    table.setdefault(f, []).append(s)
        return tuple({f: tuple(v) for f, v in t.items()} for t in out)

    def cofaces(self, simplex: Sequence[int]) -> tuple[Simplex, ...]:
        """Simplices of one dimension higher that contain ``simplex``."""
        s = tuple(simplex)
        if len(s) - 1 >= self.dim:
            return ()
        return self._cofaces[len(s) - 1].get(s, ())

    @cached_property
    def _vertex_cells(self) -> dict[int, tuple[Simplex, ...]]:
        out: dict[int, list[Simplex]] = {}
        for c in self.simplices[self.dim]:
            for v in c:
                out.setdefault(v, []).append(c)
        return {v: tuple(cs) for v, cs in out.items()}

    def cells_containing(self, simplex: Sequence[int]) -> tuple[Simplex, ...]:
        s = set(simplex)
        first = next(iter(s))
        return tuple(c for c in self._vertex_cells.get(first, ()) if s.issubset(c))

    def coords(self, simplex: Sequence[int]) -> list[Coord]:
        return [self.vertices[v] for v in simplex]

    @cached_property
    def _cell_sign_map(self) -> dict[Simplex, int]:
        return dict(zip(self.simplices[self.dim], self.cell_sign))

    def orientation_of(self, cell: Simplex) -> int:
        return self._cell_sign_map[tuple(cell)]

    def counts(self) -> dict[str, int]:
        names = ["V", "E", "F", "K"][: self.dim + 1]
        out: dict[str, int] = {}
        for k, n in enumerate(names):
            out[n] = self.count(k)
            out[n + "0"] = sum(1 for b in self.boundary_flag[k] if not b)
        return out


def face_sign(tau: Sequence[int], sigma: Sequence[int]) -> int:
    """(-1)^j when tau is sigma with its j-th vertex (1-based) removed, else 0."""
    if len(tau) != len(sigma) - 1:
        raise DimensionError("tau must have one vertex fewer than sigma")
    tau = tuple(tau)
    for j, v in enumerate(sigma):
        if tuple(w for w in sigma if w != v) == tau:
            return -1 if j % 2 == 0 else 1
    return 0


def orientation_sign(
    cx: SimplicialComplex,
    tau: Sequence[int],
    sigma: Sequence[int],
    variant: OrientationVariant = OrientationVariant.STANDARD,
) -> int:
    """Incidence number O(tau, sigma); zero on boundary tau for relative chains."""
    s = face_sign(tau, sigma)
    if s and variant is OrientationVariant.RELATIVE and cx.is_boundary(tau):
        return 0
    return s


def boundary_matrix(
    cx: SimplicialComplex,
    k: int,
    variant: OrientationVariant = OrientationVariant.STANDARD,
    coeff_dim: int = 1,
) -> ExactMatrix:
    """Matrix of the boundary map C_k -> C_{k-1}, tensored with a coeff_dim space.

    Rows and columns are ordered by (simplex, coefficient index).
    """
    if not 1 <= k <= cx.dim:
        raise DimensionError(f"degree {k} outside 1..{cx.dim}")
    if coeff_dim < 1:
        raise ValueError("coeff_dim must be positive")
    cols = cx.chain_basis(k, variant)
    rows = cx.chain_basis(k - 1, variant)
    row_of = {s: i for i, s in enumerate(rows)}
    entries = {}
    for j, s in enumerate(cols):
        for tau in itertools.combinations(s, k):
            i = row_of.get(tau)
            if i is None:
                continue
            sign = face_sign(tau, s)
            for a in range(coeff_dim):
                entries[(i * coeff_dim + a, j * coeff_dim + a)] = Fraction(sign)
    return ExactMatrix(len(rows) * coeff_dim, len(cols) * coeff_dim, entries)


def signed_volume_det(points: Sequence[Sequence[Fraction]]) -> Fraction:
    x0 = points[0]
    return det([[Fraction(p[i]) - Fraction(x0[i]) for i in range(len(x0))] for p in points[1:]])


def build_complex(
    dim: int,
    vertices: Sequence[Sequence],
    cells: Iterable[Sequence[int]],
    name: str = "",
) -> SimplicialComplex:
    """Close a list of top cells under faces and classify the boundary."""
    if dim not in (2, 3):
        raise DimensionError(f"unsupported dimension {dim}")
    verts = tuple(tuple(Fraction(c) for c in v) for v in vertices)
    for v in verts:
        if len(v) != dim:
            raise DimensionError(f"vertex {v} does not have {dim} coordinates")
    nverts = len(verts)
    top: list[Simplex] = []
    signs: list[int] = []
    seen: set[Simplex] = set()
    for raw in cells:
        raw = tuple(int(i) for i in raw)
        if len(raw) != dim + 1:
            raise DimensionError(f"cell {raw} does not have {dim + 1} vertices")
        for i in raw:
            if not 0 <= i < nverts:
                raise TopologyError(f"cell {raw} references vertex {i} outside 0..{nverts - 1}")
        if len(set(raw)) != len(raw):
            raise TopologyError(f"cell {raw} repeats a vertex")
        c = tuple(sorted(raw))
        if c in seen:
            raise TopologyError(f"cell {raw} listed twice")
        vol = signed_volume_det([verts[i] for i in c])
        if vol == 0:
            raise TopologyError(f"cell {raw} has zero volume")
        seen.add(c)
        top.append(c)
        signs.append(1 if vol > 0 else -1)
    if not top:
        raise TopologyError("mesh has no cells")
    order = sorted(range(len(top)), key=lambda i: top[i])
    top = [top[i] for i in order]
    signs = [signs[i] for i in order]

    used = sorted({v for c in top for v in c})
    if len(used) != nverts:
        missing = sorted(set(range(nverts)) - set(used))
        raise TopologyError(f"vertices {missing} belong to no cell")
    _check_connected(top)

    levels: list[set[Simplex]] = [set() for _ in range(dim + 1)]
    for c in top:
        for k in range(dim + 1):
            levels[k].update(itertools.combinations(c, k + 1))
    simplices = tuple(tuple(sorted(level)) for level in levels)

    facet_count: dict[Simplex, int] = {}
    for c in top:
        for f in itertools.combinations(c, dim):
            facet_count[f] = facet_count.get(f, 0) + 1
    if any(n > 2 for n in facet_count.values()):
        raise TopologyError("a facet is shared by more than two cells")
    bfacets = {f for f, n in facet_count.items() if n == 1}
    bflags: list[tuple[bool, ...]] = []
    for k in range(dim + 1):
        if k == dim:
            bflags.append(tuple(False for _ in simplices[k]))
        elif k == dim - 1:
            bflags.append(tuple(s in bfacets for s in simplices[k]))
        else:
            on_bdry: set[Simplex] = set()
            for f in bfacets:
                on_bdry.update(itertools.combinations(f, k + 1))
            bflags.append(tuple(s in on_bdry for s in simplices[k]))
    return SimplicialComplex(dim, verts, simplices, tuple(bflags), tuple(signs), name)


def _check_connected(cells: list[Simplex]) -> None:
    parent = list(range(len(cells)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[int, int] = {}
    for i, c in enumerate(cells):
        for v in c:
            if v in owner:
                parent[find(i)] = find(owner[v])
            else:
                owner[v] = i
    if len({find(i) for i in range(len(cells))}) != 1:
        raise TopologyError("cells do not form a connected domain")


_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def _parse_rational(tok: str, lineno: int) -> Fraction:
    if not _RATIONAL.match(tok):
        raise MeshParseError(f"line {lineno}: '{tok}' is not an integer or p/q rational")
    num, _, den = tok.partition("/")
    if den and int(den) == 0:
        raise MeshParseError(f"line {lineno}: zero denominator in '{tok}'")
    return Fraction(int(num), int(den) if den else 1)


def parse_mesh(text: str, name: str = "") -> SimplicialComplex:
    lines: list[tuple[int, list[str]]] = []
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((n, body.split()))
    it = iter(lines)

    def header(word: str) -> int:
        try:
            n, toks = next(it)
        except StopIteration:
            raise MeshParseError(f"missing '{word}' line") from None
        if len(toks) != 2 or toks[0] != word or not toks[1].isdigit():
            raise MeshParseError(f"line {n}: expected '{word} <count>'")
        return int(toks[1])

    dim = header("dim")
    if dim not in (2, 3):
        raise DimensionError(f"unsupported dimension {dim}")
    nv = header("vertices")
    verts = []
    for _ in range(nv):
        try:
            n, toks = next(it)
        except StopIteration:
            raise MeshParseError("file ends inside the vertex block") from None
        if len(toks) != dim:
            raise DimensionError(f"line {n}: expected {dim} coordinates, got {len(toks)}")
        verts.append(tuple(_parse_rational(t, n) for t in toks))
    nc = header("cells")
    cells = []
    for _ in range(nc):
        try:
            n, toks = next(it)
        except StopIteration:
            raise MeshParseError("file ends inside the cell block") from None
        if len(toks) != dim + 1:
            raise DimensionError(f"line {n}: expected {dim + 1} vertex indices, got {len(toks)}")
        if not all(t.isdigit() for t in toks):
            raise MeshParseError(f"line {n}: vertex indices must be non-negative integers")
        cells.append(tuple(int(t) for t in toks))
    extra = next(it, None)
    if extra is not None:
        raise MeshParseError(f"line {extra[0]}: unexpected trailing content")
    return build_complex(dim, verts, cells, name)


def load_mesh(path: str | Path) -> SimplicialComplex:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise MeshParseError(f"{p}: not valid UTF-8") from exc
    return parse_mesh(text, name=p.stem)


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_mesh(cx: SimplicialComplex) -> str:
    out = [f"dim {cx.dim}", f"vertices {len(cx.vertices)}"]
    out += [" ".join(_fmt(c) for c in v) for v in cx.vertices]
    out.append(f"cells {cx.count(cx.dim)}")
    out += [" ".join(str(i) for i in c) for c in cx.simplices[cx.dim]]
    return "\n".join(out) + "\n"


def write_mesh(cx: SimplicialComplex, path: str | Path) -> None:
    Path(path).write_text(format_mesh(cx), encoding="utf-8")


GENERATORS = (
    "triangle",
    "two-tets",
    "tetrahedron",
    "square",
    "criss-cross-square",
    "square-with-hole",
    "cube",
    "cube-with-tunnel",
    "cube-with-cavity",
)


_SINGLETONS = {
    "triangle": (2, [(0, 0), (1, 0), (0, 1)], [(0, 1, 2)]),
    "tetrahedron": (3, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], [(0, 1, 2, 3)]),
    # two tetrahedra glued along the face opposite vertices 0 and 4
    "two-tets": (
        3,
        [(0, 0, -1), (1, 0, 0), (0, 1, 0), (-1, -1, 0), (0, 0, 1)],
        [(0, 1, 2, 3), (1, 2, 3, 4)],
    ),
}


def _hole_range(n: int, kind: str) -> range:
    if n < 3:
        raise MeshError(f"{kind} needs resolution >= 3 to carve a hole, got {n}")
    lo = max(1, n // 4)
    return range(lo, n - lo)


def generate_mesh(kind: str, resolution: int) -> SimplicialComplex:
    """Deterministic structured meshes of the unit square or cube."""
    if kind not in GENERATORS:
        raise MeshError(f"unknown generator '{kind}'; choose from {', '.join(GENERATORS)}")
    if not isinstance(resolution, int) or resolution < 1:
        raise MeshError(f"resolution must be a positive integer, got {resolution!r}")
    n = resolution
    name = f"{kind}-{n}"
    if kind in _SINGLETONS:
        if n != 1:
            raise MeshError(f"{kind} only exists at resolution 1")
        dim, verts, cells = _SINGLETONS[kind]
        return build_complex(dim, verts, cells, name)
    if kind in ("square", "criss-cross-square", "square-with-hole"):
        skip: set[tuple[int, ...]] = set()
        if kind == "square-with-hole":
            r = _hole_range(n, kind)
            skip = {(i, j) for i in r for j in r}
        cells_xy = [(i, j) for i in range(n) for j in range(n) if (i, j) not in skip]
        return _grid_mesh(2, n, cells_xy, crisscross=kind != "square", name=name)
    skip = set()
    if kind == "cube-with-tunnel":
        r = _hole_range(n, kind)
        skip = {(i, j, k) for i in r for j in r for k in range(n)}
    elif kind == "cube-with-cavity":
        r = _hole_range(n, kind)
        skip = {(i, j, k) for i in r for j in r for k in r}
    cubes = [c for c in itertools.product(range(n), repeat=3) if c not in skip]
    return _grid_mesh(3, n, cubes, crisscross=False, name=name)


def _grid_mesh(dim: int, n: int, boxes, crisscross: bool, name: str) -> SimplicialComplex:
    # points are keyed by integer coordinates scaled by 2n so box centres are lattice points
    raw_cells: list[tuple[tuple[int, ...], ...]] = []
    for box in boxes:
        corner = tuple(2 * b for b in box)
        if dim == 2 and crisscross:
            i, j = corner
            p = [(i, j), (i + 2, j), (i + 2, j + 2), (i, j + 2)]
            c = (i + 1, j + 1)
            raw_cells += [(p[a], p[(a + 1) % 4], c) for a in range(4)]
        elif dim == 2:
            i, j = corner
            raw_cells += [
                ((i, j), (i + 2, j), (i + 2, j + 2)),
                ((i, j), (i + 2, j + 2), (i, j + 2)),
            ]
        else:
            for perm in itertools.permutations(range(3)):
                pts = [corner]
                cur = list(corner)
                for ax in perm:
                    cur[ax] += 2
                    pts.append(tuple(cur))
                raw_cells.append(tuple(pts))
    keys = sorted({p for c in raw_cells for p in c}, key=lambda p: tuple(reversed(p)))
    idx = {p: i for i, p in enumerate(keys)}
    verts = [tuple(Fraction(c, 2 * n) for c in p) for p in keys]
    cells = [tuple(idx[p] for p in c) for c in raw_cells]
    return build_complex(dim, verts, cells, name)
