"""Basis atoms of the discrete spaces and local element kernels.

Direction payloads are never normalized: ``t_e = x_b - x_a`` for a sorted
edge ``(a, b)``, ``n_e`` is ``t_e`` rotated by +90 degrees in 2D, ``n_f`` is
the cross product of the two edge vectors leaving the first vertex of a
sorted face, and the edge normal pair is ``n_+ = t_e x a``, ``n_- = t_e x n_+``
with ``a`` the first coordinate axis not parallel to ``t_e``.

Every simplex delta pairs by mean value over its simplex, e.g.
``<delta_f[n n^T], sigma> = mean_f n.sigma.n``. Degrees of freedom of the
function spaces use the same normalization, which makes the dual pairings
identity matrices.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

from .linalg import ExactMatrix, inverse, kernel_basis, rank
from .mesh import SimplicialComplex, Simplex, signed_volume_det

Vec = tuple[Fraction, ...]
Mat = tuple[tuple[Fraction, ...], ...]


class GeometryError(ValueError):
    pass


class AtomKind(enum.Enum):
    LAGRANGE_HAT = "LagrangeHat"
    VEC_LAGRANGE_HAT = "VecLagrangeHat"
    FACE_NN_DELTA = "FaceNNDelta"
    EDGE_NT_DELTA = "EdgeNTDelta"
    EDGE_NN_DELTA = "EdgeNNDelta"
    VERTEX_VEC_DELTA = "VertexVecDelta"
    VERTEX_SCALAR_DELTA = "VertexScalarDelta"
    BROKEN_P1 = "BrokenP1"
    AUX_FACE = "AuxFaceDist"
    AUX_EDGE = "AuxEdgeDist"
    AUX_VERTEX = "AuxVertexDist"
    REGGE_NN = "ReggeNN"
    TDNNS_FACE = "TDNNSFace"
    TDNNS_BUBBLE = "TDNNSBubble"
    MCS_EDGE = "MCSEdge"
    MCS_BUBBLE = "MCSBubble"
    P1_TRACE = "P1Trace"


@dataclass(frozen=True)
class BasisAtom:
    kind: AtomKind
    simplex: Simplex
    slot: int = 0
    payload: Vec | None = None

    def label(self) -> str:
        return f"{self.kind.value}{list(self.simplex)}:{self.slot}"


@dataclass(frozen=True)
class SpaceBasis:
    space_id: str
    atoms: tuple[BasisAtom, ...]

    @property
    def dim(self) -> int:
        return len(self.atoms)

    @cached_property
    def _pos(self) -> dict[tuple[AtomKind, Simplex, int], int]:
        return {(a.kind, a.simplex, a.slot): i for i, a in enumerate(self.atoms)}

    def position(self, kind: AtomKind, simplex: Simplex, slot: int = 0) -> int | None:
        return self._pos.get((kind, tuple(simplex), slot))

    def __len__(self) -> int:
        return len(self.atoms)


# geometry


def sub(a: Sequence, b: Sequence) -> Vec:
    return tuple(Fraction(x) - Fraction(y) for x, y in zip(a, b))


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((Fraction(x) * y for x, y in zip(a, b)), Fraction(0))


def cross(a: Sequence, b: Sequence) -> Vec:
    return (
        Fraction(a[1] * b[2] - a[2] * b[1]),
        Fraction(a[2] * b[0] - a[0] * b[2]),
        Fraction(a[0] * b[1] - a[1] * b[0]),
    )


def perp(v: Sequence) -> Vec:
    """Rotation by +90 degrees: [x, y] -> [-y, x]."""
    return (-Fraction(v[1]), Fraction(v[0]))


def axis(n: int, i: int) -> Vec:
    return tuple(Fraction(int(j == i)) for j in range(n))


def edge_tangent(cx: SimplicialComplex, e: Simplex) -> Vec:
    return sub(cx.vertices[e[1]], cx.vertices[e[0]])


def edge_normal(cx: SimplicialComplex, e: Simplex) -> Vec:
    if cx.dim != 2:
        raise GeometryError("a single edge normal only exists in 2D")
    return perp(edge_tangent(cx, e))


def face_normal_of(points: Sequence[Sequence]) -> Vec:
    return cross(sub(points[1], points[0]), sub(points[2], points[0]))


def face_normal(cx: SimplicialComplex, f: Simplex) -> Vec:
    return face_normal_of(cx.coords(f))


def normal_pair(t: Sequence) -> tuple[Vec, Vec]:
    for i in range(3):
        n_plus = cross(t, axis(3, i))
        if any(n_plus):
            return n_plus, cross(t, n_plus)
    raise GeometryError("zero-length edge")


def edge_normal_pair(cx: SimplicialComplex, e: Simplex) -> tuple[Vec, Vec]:
    return normal_pair(edge_tangent(cx, e))


def facet_normal(cx: SimplicialComplex, facet: Simplex) -> Vec:
    return edge_normal(cx, facet) if cx.dim == 2 else face_normal(cx, facet)


def outward_sign(cx: SimplicialComplex, facet: Simplex, cell: Simplex) -> int:
    """+1 when the facet's normal payload points out of ``cell``."""
    (opp,) = set(cell) - set(facet)
    d = dot(facet_normal(cx, facet), sub(cx.vertices[facet[0]], cx.vertices[opp]))
    return 1 if d > 0 else -1


def hat_gradients(points: Sequence[Sequence]) -> list[Vec]:
    """Gradients of the barycentric coordinates of a nondegenerate simplex."""
    n = len(points) - 1
    J = [list(sub(points[i + 1], points[0])) for i in range(n)]
    try:
        Jinv = inverse(J)
    except ZeroDivisionError:
        raise GeometryError("degenerate cell") from None
    grads = [tuple(Jinv[r][i] for r in range(n)) for i in range(n)]
    g0 = tuple(-sum((g[r] for g in grads), Fraction(0)) for r in range(n))
    return [g0] + grads


def hat_gradient(cx: SimplicialComplex, cell: Simplex, vertex: int) -> Vec:
    return _cell_gradients(cx, cell)[cell.index(vertex)]


def _cell_gradients(cx: SimplicialComplex, cell: Simplex) -> list[Vec]:
    return _grads_cached(tuple(cx.coords(cell)))


@lru_cache(maxsize=None)
def _grads_cached(points: tuple) -> list[Vec]:
    return hat_gradients(points)


# small dense matrix helpers (3x3 or 2x2 nested tuples)


def mat(rows) -> Mat:
    return tuple(tuple(Fraction(v) for v in r) for r in rows)


def mzero(n: int) -> Mat:
    return tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))


def madd(A: Mat, B: Mat, b: Fraction = Fraction(1)) -> Mat:
    return tuple(tuple(x + b * y for x, y in zip(ra, rb)) for ra, rb in zip(A, B))


def mscale(A: Mat, c) -> Mat:
    return tuple(tuple(Fraction(c) * x for x in r) for r in A)


def transpose(A: Mat) -> Mat:
    return tuple(zip(*A))


def sym(A: Mat) -> Mat:
    return mscale(madd(A, transpose(A)), Fraction(1, 2))


def frob(A: Mat, B: Mat) -> Fraction:
    return sum((x * y for ra, rb in zip(A, B) for x, y in zip(ra, rb)), Fraction(0))


def bilinear(u: Sequence, A: Mat, v: Sequence) -> Fraction:
    return sum((Fraction(u[i]) * A[i][j] * v[j] for i in range(len(u)) for j in range(len(v))), Fraction(0))


def outer(u: Sequence, v: Sequence) -> Mat:
    return tuple(tuple(Fraction(a) * b for b in v) for a in u)


def trace(A: Mat) -> Fraction:
    return sum((A[i][i] for i in range(len(A))), Fraction(0))


def dev(A: Mat) -> Mat:
    n = len(A)
    t = trace(A) / n
    return tuple(tuple(A[i][j] - (t if i == j else 0) for j in range(n)) for i in range(n))


def sym_basis(n: int) -> list[Mat]:
    out = [outer(axis(n, i), axis(n, i)) for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        out.append(madd(outer(axis(n, i), axis(n, j)), outer(axis(n, j), axis(n, i))))
    return out


def sym_coords(A: Mat) -> list[Fraction]:
    n = len(A)
    return [A[i][i] for i in range(n)] + [A[i][j] for i, j in itertools.combinations(range(n), 2)]


def traceless_basis(n: int) -> list[Mat]:
    out = [outer(axis(n, i), axis(n, j)) for i in range(n) for j in range(n) if i != j]
    for i in range(n - 1):
        out.append(madd(outer(axis(n, i), axis(n, i)), outer(axis(n, i + 1), axis(n, i + 1)), Fraction(-1)))
    return out


def traceless_coords(A: Mat) -> list[Fraction]:
    n = len(A)
    off = [A[i][j] for i in range(n) for j in range(n) if i != j]
    # diag(d) = sum c_i (E_ii - E_{i+1,i+1}) gives c_i = d_0 + ... + d_i
    diag, acc = [], Fraction(0)
    for i in range(n - 1):
        acc += A[i][i]
        diag.append(acc)
    return off + diag


# affine matrix fields sigma(x) = A0 + sum_k x_k A[k+1]


@dataclass(frozen=True)
class AffineMatrixField:
    parts: tuple[Mat, ...]

    def at(self, x: Sequence) -> Mat:
        out = self.parts[0]
        for k, xk in enumerate(x):
            out = madd(out, self.parts[k + 1], Fraction(xk))
        return out

    def __add__(self, other: "AffineMatrixField") -> "AffineMatrixField":
        return AffineMatrixField(tuple(madd(a, b) for a, b in zip(self.parts, other.parts)))

    def scaled(self, c) -> "AffineMatrixField":
        return AffineMatrixField(tuple(mscale(a, c) for a in self.parts))

    def curl(self) -> Mat:
        """Row-wise curl; constant because the field is affine."""
        d = self.parts[1:]  # d[k][i][j] = d sigma_ij / d x_k
        return tuple(
            (
                d[1][i][2] - d[2][i][1],
                d[2][i][0] - d[0][i][2],
                d[0][i][1] - d[1][i][0],
            )
            for i in range(3)
        )

    @classmethod
    def constant(cls, A: Mat) -> "AffineMatrixField":
        n = len(A)
        return cls((A,) + tuple(mzero(n) for _ in range(n)))


def combine_fields(fields: Sequence[AffineMatrixField], coeffs: Sequence[Fraction]) -> AffineMatrixField:
    n = len(fields[0].parts[0])
    out = AffineMatrixField(tuple(mzero(n) for _ in range(n + 1)))
    for f, c in zip(fields, coeffs):
        if c:
            out = out + f.scaled(c)
    return out


def x_cross(S: Mat) -> AffineMatrixField:
    """The field x -> x x S, applying the cross product with x to each column of S."""
    parts = [mzero(3)]
    for k in range(3):
        # (e_k x S)_{ij} = sum_l eps_{ikl} S_{lj}
        parts.append(
            tuple(
                tuple(sum((_eps(i, k, l) * S[l][j] for l in range(3)), Fraction(0)) for j in range(3))
                for i in range(3)
            )
        )
    return AffineMatrixField(tuple(parts))


def _eps(i: int, j: int, k: int) -> int:
    return (i - j) * (j - k) * (k - i) // 2


# local kernels


def _check_tet(points: Sequence[Sequence]) -> list[Vec]:
    pts = [tuple(Fraction(c) for c in p) for p in points]
    if len(pts) != 4 or any(len(p) != 3 for p in pts):
        raise GeometryError("need four points in R^3")
    if signed_volume_det(pts) == 0:
        raise GeometryError("degenerate cell (zero volume)")
    return pts


CELL_EDGES_3D = tuple(itertools.combinations(range(4), 2))
CELL_FACES_3D = tuple(itertools.combinations(range(4), 3))
CELL_EDGES_2D = tuple(itertools.combinations(range(3), 2))


def u1_local_shape_basis(points: Sequence[Sequence]) -> list[AffineMatrixField]:
    """Eight constant traceless fields followed by x x S for the six symmetric S."""
    _check_tet(points)
    return [AffineMatrixField.constant(T) for T in traceless_basis(3)] + [x_cross(S) for S in sym_basis(3)]


@lru_cache(maxsize=None)
def _bubbles_cached(points: tuple) -> tuple[Mat, Mat]:
    pts = _check_tet(points)
    normals = [face_normal_of([pts[i] for i in f]) for f in CELL_FACES_3D]
    basis = sym_basis(3)
    rows = [[bilinear(n, S, n) for S in basis] for n in normals]
    ker = kernel_basis(ExactMatrix.from_dense(rows))
    if len(ker) != 2:
        raise GeometryError(f"normal-normal kernel has dimension {len(ker)}, expected 2")
    out = []
    for v in ker:
        B = mzero(3)
        for c, S in zip(v, basis):
            B = madd(B, S, c)
        out.append(B)
    return tuple(out)


def tdnns_bubble_basis(points: Sequence[Sequence]) -> list[Mat]:
    """Basis of symmetric matrices with vanishing normal-normal part on all four faces."""
    return list(_bubbles_cached(tuple(tuple(Fraction(c) for c in p) for p in points)))


def _u1_dof_rows(pts: list[Vec]) -> list:
    bubbles = _bubbles_cached(tuple(pts))
    funcs = []
    for a, b in CELL_EDGES_3D:
        t = sub(pts[b], pts[a])
        mid = tuple((x + y) / 2 for x, y in zip(pts[a], pts[b]))
        for n in normal_pair(t):
            funcs.append(lambda f, n=n, t=t, mid=mid: bilinear(n, f.at(mid), t))
    for B in bubbles:
        funcs.append(lambda f, B=B: frob(f.curl(), B))
    return funcs


def u1_dof_matrix(points: Sequence[Sequence]) -> ExactMatrix:
    """14x14 matrix of edge moments (12) and curl-bubble moments (2) on the shape basis."""
    pts = _check_tet(points)
    shapes = u1_local_shape_basis(pts)
    return ExactMatrix.from_dense([[dof(f) for f in shapes] for dof in _u1_dof_rows(pts)])


@lru_cache(maxsize=None)
def u1_dual_fields(points: tuple) -> tuple[AffineMatrixField, ...]:
    """Local fields dual to the 14 degrees of freedom, in dof order."""
    pts = _check_tet(points)
    shapes = u1_local_shape_basis(pts)
    D = u1_dof_matrix(pts).to_dense()
    try:
        Dinv = inverse(D)
    except ZeroDivisionError:
        raise GeometryError("degrees of freedom are not unisolvent on this cell") from None
    return tuple(combine_fields(shapes, [Dinv[i][j] for i in range(14)]) for j in range(14))


def tdnns_dof_matrix(points: Sequence[Sequence]) -> ExactMatrix:
    """6x6 matrix of face normal-normal moments and bubble moments on the symmetric basis."""
    pts = _check_tet(points)
    bubbles = _bubbles_cached(tuple(pts))
    normals = [face_normal_of([pts[i] for i in f]) for f in CELL_FACES_3D]
    basis = sym_basis(3)
    rows = [[bilinear(n, S, n) for S in basis] for n in normals]
    rows += [[frob(S, B) for S in basis] for B in bubbles]
    return ExactMatrix.from_dense(rows)


@lru_cache(maxsize=None)
def tdnns_dual_fields(points: tuple) -> tuple[Mat, ...]:
    pts = _check_tet(points)
    Dinv = inverse(tdnns_dof_matrix(pts).to_dense())
    basis = sym_basis(3)
    out = []
    for j in range(6):
        M = mzero(3)
        for i, S in enumerate(basis):
            M = madd(M, S, Dinv[i][j])
        out.append(M)
    return tuple(out)


@lru_cache(maxsize=None)
def regge_dual_fields(points: tuple) -> tuple[Mat, ...]:
    """Constant symmetric 2x2 fields dual to the three edge normal-normal moments."""
    pts = [tuple(Fraction(c) for c in p) for p in points]
    if signed_volume_det(pts) == 0:
        raise GeometryError("degenerate cell (zero area)")
    basis = sym_basis(2)
    normals = [perp(sub(pts[b], pts[a])) for a, b in CELL_EDGES_2D]
    Dinv = inverse([[bilinear(n, S, n) for S in basis] for n in normals])
    out = []
    for j in range(3):
        M = mzero(2)
        for i, S in enumerate(basis):
            M = madd(M, S, Dinv[i][j])
        out.append(M)
    return tuple(out)


def local_sequence_ranks(points: Sequence[Sequence]) -> tuple[int, int]:
    """Ranks of dev grad (P1 vectors -> local U1) and sym curl (local U1 -> S)."""
    dg, sc = local_sequence_matrices(points)
    return rank(dg), rank(sc)


def local_sequence_matrices(points: Sequence[Sequence]) -> tuple[ExactMatrix, ExactMatrix]:
    pts = _check_tet(points)
    shapes = u1_local_shape_basis(pts)
    # columns of dev grad: linear vector fields x_k e_a (constants map to zero but are kept)
    dg_cols = []
    for a in range(3):
        for k in range(-1, 3):
            G = mzero(3) if k < 0 else outer(axis(3, a), axis(3, k))
            dg_cols.append(traceless_coords(dev(G)) + [Fraction(0)] * 6)
    devgrad = ExactMatrix.from_dense([list(r) for r in zip(*dg_cols)])
    symcurl = ExactMatrix.from_dense([list(r) for r in zip(*[sym_coords(sym(f.curl())) for f in shapes])])
    return devgrad, symcurl


# space enumeration

_SPACE_RE = re.compile(r"^(V|Vm|U|Uhat|T)(\d)(_0)?$")


def parse_space_id(space_id: str) -> tuple[str, int, bool]:
    m = _SPACE_RE.match(space_id)
    if not m:
        raise ValueError(f"unknown space id '{space_id}'")
    return m.group(1), int(m.group(2)), m.group(3) is not None


def _pick(cx: SimplicialComplex, k: int, interior: bool) -> list[Simplex]:
    return cx.interior(k) if interior else list(cx.simplices[k])


def build_space(space_id: str, cx: SimplicialComplex) -> SpaceBasis:
    """Enumerate the basis of a discrete space.

    Ids: ``V<k>`` distributional Hessian spaces, ``Vm<k>`` auxiliary spaces,
    ``U<k>`` divdiv spaces, ``Uhat<k>`` their trimmed versions, ``T<k>`` the
    restricted-polynomial chain spaces (top cells at k = 0). A ``_0`` suffix
    selects the boundary-condition variant.
    """
    if space_id == "zero":
        return SpaceBasis("zero", ())
    fam, k, bc = parse_space_id(space_id)
    n = cx.dim
    if k > n:
        raise ValueError(f"space {space_id} does not exist on a {n}D mesh")
    A = AtomKind
    atoms: list[BasisAtom] = []
    if fam == "V":
        if k == 0:
            atoms = [BasisAtom(A.LAGRANGE_HAT, (v,)) for (v,) in _pick(cx, 0, bc)]
        elif k == n:
            atoms = [
                BasisAtom(A.VERTEX_VEC_DELTA, (v,), a, axis(n, a)) for (v,) in _pick(cx, 0, not bc) for a in range(n)
            ]
        elif n == 2:
            atoms = [BasisAtom(A.EDGE_NN_DELTA, e, 0, edge_normal(cx, e)) for e in _pick(cx, 1, not bc)]
        elif k == 1:
            atoms = [BasisAtom(A.FACE_NN_DELTA, f, 0, face_normal(cx, f)) for f in _pick(cx, 2, not bc)]
        else:
            for e in _pick(cx, 1, not bc):
                for s, nv in enumerate(edge_normal_pair(cx, e)):
                    atoms.append(BasisAtom(A.EDGE_NT_DELTA, e, s, nv))
    elif fam == "Vm":
        kinds = {n - 2: A.AUX_FACE, 1: A.AUX_EDGE, 0: A.AUX_VERTEX}
        if k == 0:
            simplices = list(cx.simplices[n])
            kind = A.BROKEN_P1
        else:
            simplices = _pick(cx, n - k, not bc)
            kind = kinds[n - k] if n - k != 2 else A.AUX_FACE
        atoms = [BasisAtom(kind, s, p, axis(n + 1, p)) for s in simplices for p in range(n + 1)]
    elif fam in ("U", "Uhat"):
        trimmed = fam == "Uhat"
        if trimmed and not (n == 3 and k in (1, 2)):
            raise ValueError(f"trimmed space {space_id} only exists for k = 1, 2 in 3D")
        if k == 0:
            atoms = [
                BasisAtom(A.VEC_LAGRANGE_HAT, (v,), a, axis(n, a)) for (v,) in _pick(cx, 0, bc) for a in range(n)
            ]
        elif k == n:
            atoms = [BasisAtom(A.VERTEX_SCALAR_DELTA, (v,)) for (v,) in _pick(cx, 0, not bc)]
        elif n == 2:
            atoms = [BasisAtom(A.REGGE_NN, e, 0, edge_normal(cx, e)) for e in _pick(cx, 1, bc)]
        elif k == 1:
            for e in _pick(cx, 1, bc):
                for s, nv in enumerate(edge_normal_pair(cx, e)):
                    atoms.append(BasisAtom(A.MCS_EDGE, e, s, nv))
            if not trimmed:
                atoms += [BasisAtom(A.MCS_BUBBLE, c, s) for c in cx.simplices[3] for s in range(2)]
        else:
            atoms = [BasisAtom(A.TDNNS_FACE, f, 0, face_normal(cx, f)) for f in _pick(cx, 2, bc)]
            if not trimmed:
                atoms += [BasisAtom(A.TDNNS_BUBBLE, c, s) for c in cx.simplices[3] for s in range(2)]
    else:  # T
        simplices = list(cx.simplices[n]) if k == 0 else _pick(cx, n - k, not bc)
        atoms = [BasisAtom(A.P1_TRACE, s, a) for s in simplices for a in range(n - k + 1)]
    return SpaceBasis(space_id, tuple(atoms))
