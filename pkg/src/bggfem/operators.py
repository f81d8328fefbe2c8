"""Assembly of the differential operators, vertical maps and dual pairings.

All matrices map coefficient vectors in the source basis to coefficient
vectors in the target basis (columns = source atoms). Boundary-condition
variants use every simplex for the distribution spaces and only interior
simplices for the function spaces; plain variants do the opposite.
"""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .homology import complex_kind, restriction_to
from .linalg import ExactMatrix, compose, is_zero
from .mesh import OrientationVariant, SimplicialComplex, Simplex, boundary_matrix, face_sign
from .spaces import (
    CELL_EDGES_2D,
    CELL_EDGES_3D,
    CELL_FACES_3D,
    AtomKind,
    SpaceBasis,
    bilinear,
    build_space,
    cross,
    dot,
    edge_normal_pair,
    edge_tangent,
    face_normal,
    frob,
    hat_gradient,
    outward_sign,
    perp,
    regge_dual_fields,
    sym,
    tdnns_bubble_basis,
    tdnns_dual_fields,
    u1_dual_fields,
)

log = logging.getLogger(__name__)

A = AtomKind


class AssemblyError(RuntimeError):
    pass


@dataclass
class ComplexAssembly:
    kind: str
    mesh: SimplicialComplex
    spaces: list[SpaceBasis]
    ops: list[ExactMatrix]
    labels: dict[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.ops) != len(self.spaces) - 1:
            raise AssemblyError("need exactly one operator between consecutive spaces")
        for k, op in enumerate(self.ops):
            want = (self.spaces[k + 1].dim, self.spaces[k].dim)
            if op.shape != want:
                raise AssemblyError(f"{self.kind}: op {k} has shape {op.shape}, expected {want}")

    @property
    def dims(self) -> list[int]:
        return [s.dim for s in self.spaces]

    def composites(self) -> list[bool]:
        """Zero verdict for each composite ops[k+1] @ ops[k]."""
        return [is_zero(compose(self.ops[k + 1], self.ops[k])) for k in range(len(self.ops) - 1)]

    def with_ops(self, ops: list[ExactMatrix]) -> "ComplexAssembly":
        return ComplexAssembly(self.kind, self.mesh, self.spaces, list(ops), dict(self.labels))


def _sid(base: str, bc: bool) -> str:
    return base + "_0" if bc else base


def _matrix(tgt: SpaceBasis, src: SpaceBasis, entries: dict) -> ExactMatrix:
    return ExactMatrix(tgt.dim, src.dim, {k: v for k, v in entries.items() if v})


def _vertex_sign(x: int, e: Simplex) -> int:
    return face_sign((x,), e)


# distributional Hessian complexes


def hessian_matrix(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    """Jumps of normal derivatives of hats, as normal-normal deltas on facets."""
    scale_factor = 1 if cx.dim == 2 else 2
    entries: dict = defaultdict(Fraction)
    for i, atom in enumerate(tgt.atoms):
        facet, nv = atom.simplex, atom.payload
        scale = scale_factor * dot(nv, nv)
        for K in cx.cofaces(facet):
            s = outward_sign(cx, facet, K)
            for v in K:
                j = src.position(A.LAGRANGE_HAT, (v,))
                if j is not None:
                    entries[(i, j)] -= s * dot(hat_gradient(cx, K, v), nv) / scale
    return _matrix(tgt, src, entries)


def assemble_hess_2d(cx: SimplicialComplex, bc: bool = False) -> ExactMatrix:
    _need(cx, 2)
    return hessian_matrix(cx, build_space(_sid("V0", bc), cx), build_space(_sid("V1", bc), cx))


def rot_matrix_2d(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    entries: dict = defaultdict(Fraction)
    for j, atom in enumerate(src.atoms):
        e, nv = atom.simplex, atom.payload
        for x in e:
            for a in range(2):
                i = tgt.position(A.VERTEX_VEC_DELTA, (x,), a)
                if i is not None:
                    entries[(i, j)] += _vertex_sign(x, e) * nv[a]
    return _matrix(tgt, src, entries)


def assemble_rot_2d(cx: SimplicialComplex, bc: bool = False) -> ExactMatrix:
    _need(cx, 2)
    return rot_matrix_2d(cx, build_space(_sid("V1", bc), cx), build_space(_sid("V2", bc), cx))


def normal_plane_coords(cx: SimplicialComplex, e: Simplex, m) -> tuple[Fraction, Fraction]:
    """Coordinates of a vector normal to ``e`` in the (n_+, n_-) payload basis."""
    n_plus, n_minus = edge_normal_pair(cx, e)
    a, b = dot(m, n_plus) / dot(n_plus, n_plus), dot(m, n_minus) / dot(n_minus, n_minus)
    if dot(m, edge_tangent(cx, e)) != 0:
        raise AssemblyError(f"vector is not normal to edge {e}")
    return a, b


def curl_matrix_3d(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    entries: dict = defaultdict(Fraction)
    for j, atom in enumerate(src.atoms):
        f, nv = atom.simplex, atom.payload
        for e in itertools.combinations(f, 2):
            sign = -2 * face_sign(e, f)
            for slot, c in enumerate(normal_plane_coords(cx, e, nv)):
                i = tgt.position(A.EDGE_NT_DELTA, e, slot)
                if i is not None:
                    entries[(i, j)] += sign * c
    return _matrix(tgt, src, entries)


def div_matrix_3d(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    entries: dict = defaultdict(Fraction)
    for j, atom in enumerate(src.atoms):
        e, m = atom.simplex, atom.payload
        for x in e:
            for a in range(3):
                i = tgt.position(A.VERTEX_VEC_DELTA, (x,), a)
                if i is not None:
                    entries[(i, j)] += _vertex_sign(x, e) * m[a]
    return _matrix(tgt, src, entries)


def assemble_hessian_3d(cx: SimplicialComplex, bc: bool = False) -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    _need(cx, 3)
    V = [build_space(_sid(f"V{k}", bc), cx) for k in range(4)]
    return hessian_matrix(cx, V[0], V[1]), curl_matrix_3d(cx, V[1], V[2]), div_matrix_3d(cx, V[2], V[3])


# divdiv complexes


def _tangential_difference(v: int, e: Simplex) -> int:
    """lambda_v(x_b) - lambda_v(x_a) for the sorted edge e = (a, b)."""
    return (v == e[1]) - (v == e[0])


def symcurl_matrix_2d(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    entries: dict = {}
    for i, atom in enumerate(tgt.atoms):
        e, nv = atom.simplex, atom.payload
        for v in e:
            for a in range(2):
                j = src.position(A.VEC_LAGRANGE_HAT, (v,), a)
                if j is not None:
                    entries[(i, j)] = nv[a] * _tangential_difference(v, e)
    return _matrix(tgt, src, entries)


def divdiv_matrix_2d(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    """Vertex deltas from the jumps of t.sigma.n across edges of piecewise constant fields."""
    entries: dict = defaultdict(Fraction)
    for j, atom in enumerate(src.atoms):
        e = atom.simplex
        for K in cx.cofaces(e):
            local = CELL_EDGES_2D.index((K.index(e[0]), K.index(e[1])))
            S = regge_dual_fields(tuple(cx.coords(K)))[local]
            for la, lb in CELL_EDGES_2D:
                ee = (K[la], K[lb])
                t = edge_tangent(cx, ee)
                val = outward_sign(cx, ee, K) * bilinear(t, S, perp(t)) / dot(t, t)
                for x in ee:
                    i = tgt.position(A.VERTEX_SCALAR_DELTA, (x,))
                    if i is not None:
                        entries[(i, j)] -= _vertex_sign(x, ee) * val
    return _matrix(tgt, src, entries)


def assemble_divdiv_2d(cx: SimplicialComplex, bc: bool = False) -> tuple[ExactMatrix, ExactMatrix]:
    _need(cx, 2)
    U = [build_space(_sid(f"U{k}", bc), cx) for k in range(3)]
    return symcurl_matrix_2d(cx, U[0], U[1]), divdiv_matrix_2d(cx, U[1], U[2])


def devgrad_matrix_3d(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    # curl dev grad of a linear field vanishes, so bubble rows stay zero
    entries: dict = {}
    for i, atom in enumerate(tgt.atoms):
        if atom.kind is not A.MCS_EDGE:
            continue
        e, nv = atom.simplex, atom.payload
        for v in e:
            for a in range(3):
                j = src.position(A.VEC_LAGRANGE_HAT, (v,), a)
                if j is not None:
                    entries[(i, j)] = nv[a] * _tangential_difference(v, e)
    return _matrix(tgt, src, entries)


def _u1_support(cx: SimplicialComplex, atom) -> list[tuple[Simplex, int]]:
    if atom.kind is A.MCS_EDGE:
        e = atom.simplex
        out = []
        for K in cx.cells_containing(e):
            local = CELL_EDGES_3D.index((K.index(e[0]), K.index(e[1])))
            out.append((K, 2 * local + atom.slot))
        return out
    return [(atom.simplex, 12 + atom.slot)]


def _u2_support(cx: SimplicialComplex, atom) -> list[tuple[Simplex, int]]:
    if atom.kind is A.TDNNS_FACE:
        f = atom.simplex
        return [(K, CELL_FACES_3D.index(tuple(K.index(v) for v in f))) for K in cx.cofaces(f)]
    return [(atom.simplex, 4 + atom.slot)]


def symcurl_matrix_3d(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    """Cellwise sym curl of U1 fields, read off in face normal-normal and bubble moments."""
    entries: dict = {}
    for j, atom in enumerate(src.atoms):
        face_vals: dict[Simplex, Fraction] = {}
        for K, local in _u1_support(cx, atom):
            pts = tuple(cx.coords(K))
            C = sym(u1_dual_fields(pts)[local].curl())
            for lf in CELL_FACES_3D:
                f = tuple(K[i] for i in lf)
                val = bilinear(face_normal(cx, f), C, face_normal(cx, f))
                if face_vals.setdefault(f, val) != val:
                    raise AssemblyError(f"normal-normal moment of sym curl differs across face {f}")
            for s, B in enumerate(tdnns_bubble_basis(pts)):
                i = tgt.position(A.TDNNS_BUBBLE, K, s)
                if i is not None:
                    entries[(i, j)] = frob(C, B)
        for f, val in face_vals.items():
            i = tgt.position(A.TDNNS_FACE, f)
            if i is not None:
                entries[(i, j)] = val
            elif val:
                raise AssemblyError(f"sym curl leaves the space: nonzero moment on face {f}")
    return _matrix(tgt, src, entries)


def hat_divdiv_matrix_3d(cx: SimplicialComplex, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    """Vertex deltas from the tangential part of sigma.n on faces tested with hat gradients."""
    entries: dict = defaultdict(Fraction)
    for j, atom in enumerate(src.atoms):
        for K, local in _u2_support(cx, atom):
            S = tdnns_dual_fields(tuple(cx.coords(K)))[local]
            for lf in CELL_FACES_3D:
                f = tuple(K[i] for i in lf)
                n = face_normal(cx, f)
                nsn = cross(n, tuple(dot(row, n) for row in S))
                w = outward_sign(cx, f, K) / (2 * dot(n, n))
                for v in f:
                    i = tgt.position(A.VERTEX_SCALAR_DELTA, (v,))
                    if i is not None:
                        entries[(i, j)] += w * dot(nsn, cross(n, hat_gradient(cx, K, v)))
    return _matrix(tgt, src, entries)


def assemble_divdiv_3d(
    cx: SimplicialComplex, bc: bool = False, trimmed: bool = False
) -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    _need(cx, 3)
    U = _divdiv_3d_spaces(cx, bc, trimmed)
    return (
        devgrad_matrix_3d(cx, U[0], U[1]),
        symcurl_matrix_3d(cx, U[1], U[2]),
        hat_divdiv_matrix_3d(cx, U[2], U[3]),
    )


def _divdiv_3d_spaces(cx: SimplicialComplex, bc: bool, trimmed: bool) -> list[SpaceBasis]:
    mid = "Uhat" if trimmed else "U"
    ids = ["U0", f"{mid}1", f"{mid}2", "U3"]
    return [build_space(_sid(s, bc), cx) for s in ids]


# auxiliary complexes, restriction-boundary complexes and vertical maps

AUX_SIGNS = {2: (1, -1), 3: (-1, -1, -1)}
KAPPA_SIGNS = {2: (-1, -1, 1), 3: (-1, 1, -1, 1)}
_AUX_KIND = {0: A.AUX_VERTEX, 1: A.AUX_EDGE, 2: A.AUX_FACE}


def _aux_kind(cx: SimplicialComplex, k: int) -> AtomKind:
    return A.BROKEN_P1 if k == 0 else _AUX_KIND[cx.dim - k]


def _variant(bc: bool) -> OrientationVariant:
    return OrientationVariant.STANDARD if bc else OrientationVariant.RELATIVE


def aux_matrix(cx: SimplicialComplex, k: int, src: SpaceBasis, tgt: SpaceBasis) -> ExactMatrix:
    """Operator V_-^k -> V_-^{k+1}: signed incidence times identity on the polynomial index."""
    c = AUX_SIGNS[cx.dim][k]
    kind = _aux_kind(cx, k + 1)
    entries: dict = {}
    for j, atom in enumerate(src.atoms):
        sigma = atom.simplex
        eps = cx.orientation_of(sigma) if k == 0 else 1
        for tau in itertools.combinations(sigma, len(sigma) - 1):
            i = tgt.position(kind, tau, atom.slot)
            if i is not None:
                entries[(i, j)] = Fraction(c * eps * face_sign(tau, sigma))
    return _matrix(tgt, src, entries)


def assemble_aux_complex(cx: SimplicialComplex, dim: int, bc: bool = False) -> "ComplexAssembly":
    _need(cx, dim)
    spaces = [build_space(_sid(f"Vm{k}", bc), cx) for k in range(dim + 1)]
    ops = [aux_matrix(cx, k, spaces[k], spaces[k + 1]) for k in range(dim)]
    kind = f"aux{'0' if bc else ''}-{dim}d"
    return ComplexAssembly(kind, cx, spaces, ops, {k: f"aux D{k}" for k in range(dim)})


def assemble_coefficient_chains(cx: SimplicialComplex, bc: bool = False) -> ComplexAssembly:
    """Simplicial chains with P1 coefficients, top cells first, boundary maps as operators."""
    n = cx.dim
    variant = _variant(bc)
    # chains are indexed by (simplex, monomial) exactly like the auxiliary atoms
    spaces = [SpaceBasis(f"C{n - k}", build_space(_sid(f"Vm{k}", bc), cx).atoms) for k in range(n + 1)]
    ops = [boundary_matrix(cx, n - k, variant, coeff_dim=n + 1) for k in range(n)]
    return ComplexAssembly(f"chains{'0' if bc else ''}-{n}d", cx, spaces, ops)


def assemble_kappa_maps(cx: SimplicialComplex, bc: bool = False) -> list[ExactMatrix]:
    """Signed identifications of the auxiliary spaces with P1-coefficient chains."""
    n = cx.dim
    out = []
    for k in range(n + 1):
        V = build_space(_sid(f"Vm{k}", bc), cx)
        c = KAPPA_SIGNS[n][k]
        vals = [c * (cx.orientation_of(a.simplex) if k == 0 else 1) for a in V.atoms]
        out.append(ExactMatrix.diagonal(vals))
    return out


def assemble_tilde_complex(cx: SimplicialComplex, bc: bool = False) -> ComplexAssembly:
    from .homology import tilde_boundary_matrix

    n = cx.dim
    spaces = [build_space(_sid(f"T{k}", bc), cx) for k in range(n + 1)]
    ops = [tilde_boundary_matrix(cx, n - k, _variant(bc)) for k in range(n)]
    return ComplexAssembly(f"tilde{'0' if bc else ''}-{n}d", cx, spaces, ops)


def assemble_g_maps(cx: SimplicialComplex, dim: int, bc: bool = False) -> list[ExactMatrix]:
    """g^k: V_-^k -> sum of P1 restricted to subsimplices, i.e. restriction after kappa."""
    _need(cx, dim)
    out = []
    for k in range(dim + 1):
        src = build_space(_sid(f"Vm{k}", bc), cx)
        tgt = build_space(_sid(f"T{k}", bc), cx)
        c = KAPPA_SIGNS[dim][k]
        entries: dict = {}
        cache: dict[Simplex, list] = {}
        for j, atom in enumerate(src.atoms):
            tau = atom.simplex
            R = cache.setdefault(tau, restriction_to(cx, tau))
            sign = c * (cx.orientation_of(tau) if k == 0 else 1)
            for a, row in enumerate(R):
                if row[atom.slot]:
                    entries[(tgt.position(A.P1_TRACE, tau, a), j)] = sign * row[atom.slot]
        out.append(_matrix(tgt, src, entries))
    return out


def _affine_coeffs(vec, base) -> list[Fraction]:
    """Global monomial coefficients of x -> vec . (x - base)."""
    return [-dot(vec, base)] + [Fraction(v) for v in vec]


INCLUSION_SCALE = {2: {1: -1, 2: 1}, 3: {1: -2, 2: -1, 3: 1}}


def assemble_inclusions(cx: SimplicialComplex, bc: bool = False) -> list[ExactMatrix]:
    """iota^k: V^k -> V_-^k for k >= 1, writing each delta as an auxiliary distribution.

    Degree 0 is the zero space, so the first map is empty.
    """
    n = cx.dim
    out = [ExactMatrix.zeros(build_space(_sid("Vm0", bc), cx).dim, 0)]
    for k in range(1, n + 1):
        src = build_space(_sid(f"V{k}", bc), cx)
        tgt = build_space(_sid(f"Vm{k}", bc), cx)
        kind = _aux_kind(cx, k)
        c = INCLUSION_SCALE[n][k]
        entries: dict = {}
        for j, atom in enumerate(src.atoms):
            s = atom.simplex
            base = cx.vertices[s[0]]
            for p, coef in enumerate(_affine_coeffs(atom.payload, base)):
                if coef:
                    entries[(tgt.position(kind, s, p), j)] = c * coef
        out.append(_matrix(tgt, src, entries))
    return out


def hessian_tail(cx: SimplicialComplex, bc: bool = False) -> ComplexAssembly:
    """The Hessian complex with its degree-0 space replaced by zero."""
    full = assemble_complex(_hess_kind(cx.dim, bc), cx, check=False)
    zero = SpaceBasis("zero", ())
    ops = [ExactMatrix.zeros(full.spaces[1].dim, 0)] + full.ops[1:]
    return ComplexAssembly(full.kind + "-tail", cx, [zero] + full.spaces[1:], ops)


def _hess_kind(dim: int, bc: bool) -> str:
    return f"hessian{'0' if bc else ''}-{dim}d"


# pairings


def _pair_atoms(cx: SimplicialComplex, v, u) -> Fraction:
    kv, ku = v.kind, u.kind
    if kv is A.LAGRANGE_HAT and ku is A.VERTEX_SCALAR_DELTA:
        return Fraction(int(v.simplex == u.simplex))
    if kv is A.VERTEX_VEC_DELTA and ku is A.VEC_LAGRANGE_HAT:
        return Fraction(int(v.simplex == u.simplex and v.slot == u.slot))
    if kv is A.EDGE_NN_DELTA and ku is A.REGGE_NN:
        e = v.simplex
        for K in cx.cofaces(e):
            if set(u.simplex) <= set(K):
                local = CELL_EDGES_2D.index((K.index(u.simplex[0]), K.index(u.simplex[1])))
                S = regge_dual_fields(tuple(cx.coords(K)))[local]
                return bilinear(v.payload, S, v.payload)
            return Fraction(0)
        return Fraction(0)
    if kv is A.FACE_NN_DELTA and ku in (A.TDNNS_FACE, A.TDNNS_BUBBLE):
        f = v.simplex
        for K, local in _u2_support(cx, u):
            if set(f) <= set(K):
                S = tdnns_dual_fields(tuple(cx.coords(K)))[local]
                return bilinear(v.payload, S, v.payload)
        return Fraction(0)
    if kv is A.EDGE_NT_DELTA and ku in (A.MCS_EDGE, A.MCS_BUBBLE):
        e = v.simplex
        t = edge_tangent(cx, e)
        mid = tuple((a + b) / 2 for a, b in zip(*cx.coords(e)))
        for K, local in _u1_support(cx, u):
            if set(e) <= set(K):
                field_ = u1_dual_fields(tuple(cx.coords(K)))[local]
                return bilinear(v.payload, field_.at(mid), t)
        return Fraction(0)
    raise AssemblyError(f"no pairing between {kv.value} and {ku.value}")


SANCTIONED_PAIRS = {
    2: {("V0", "U2"), ("V1", "U1"), ("V2", "U0")},
    3: {("V0", "U3"), ("V1", "Uhat2"), ("V2", "Uhat1"), ("V3", "U0"), ("V1", "U2"), ("V2", "U1")},
}


def assemble_pairing(cx: SimplicialComplex, V: SpaceBasis, U: SpaceBasis) -> ExactMatrix:
    """Matrix of <v_i, u_j> for a distribution space against its dual function space.

    Exactly one side must carry the boundary condition.
    """
    v_base, v_bc = V.space_id.removesuffix("_0"), V.space_id.endswith("_0")
    u_base, u_bc = U.space_id.removesuffix("_0"), U.space_id.endswith("_0")
    if (v_base, u_base) not in SANCTIONED_PAIRS.get(cx.dim, set()) or v_bc == u_bc:
        raise AssemblyError(f"{V.space_id} and {U.space_id} are not a dual pair")
    entries = {}
    for i, v in enumerate(V.atoms):
        for j, u in enumerate(U.atoms):
            if set(v.simplex) & set(u.simplex) or u.kind in (A.TDNNS_BUBBLE, A.MCS_BUBBLE):
                val = _pair_atoms(cx, v, u)
                if val:
                    entries[(i, j)] = val
    return ExactMatrix(V.dim, U.dim, entries)


# whole complexes


def _need(cx: SimplicialComplex, dim: int) -> None:
    if cx.dim != dim:
        raise AssemblyError(f"operator needs a {dim}D mesh, got {cx.dim}D")


def assemble_complex(kind: str, cx: SimplicialComplex, check: bool = True) -> ComplexAssembly:
    """Assemble one of the fourteen complexes; with ``check`` every composite must vanish."""
    try:
        info = complex_kind(kind)
    except ValueError as exc:
        raise AssemblyError(str(exc)) from None
    _need(cx, info.dim)
    bc, n = info.bc, info.dim
    if info.family == "hessian":
        spaces = [build_space(_sid(f"V{k}", bc), cx) for k in range(n + 1)]
        if n == 2:
            ops = [hessian_matrix(cx, spaces[0], spaces[1]), rot_matrix_2d(cx, spaces[1], spaces[2])]
            labels = {0: "hess", 1: "rot"}
        else:
            ops = [
                hessian_matrix(cx, spaces[0], spaces[1]),
                curl_matrix_3d(cx, spaces[1], spaces[2]),
                div_matrix_3d(cx, spaces[2], spaces[3]),
            ]
            labels = {0: "hess", 1: "curl", 2: "div"}
    elif info.family in ("divdiv", "divdiv-trimmed"):
        if n == 2:
            spaces = [build_space(_sid(f"U{k}", bc), cx) for k in range(3)]
            ops = [symcurl_matrix_2d(cx, spaces[0], spaces[1]), divdiv_matrix_2d(cx, spaces[1], spaces[2])]
            labels = {0: "symcurl", 1: "divdiv"}
        else:
            spaces = _divdiv_3d_spaces(cx, bc, info.family == "divdiv-trimmed")
            ops = [
                devgrad_matrix_3d(cx, spaces[0], spaces[1]),
                symcurl_matrix_3d(cx, spaces[1], spaces[2]),
                hat_divdiv_matrix_3d(cx, spaces[2], spaces[3]),
            ]
            labels = {0: "devgrad", 1: "symcurl", 2: "hat divdiv"}
    else:
        asm = assemble_aux_complex(cx, n, bc)
        spaces, ops, labels = asm.spaces, asm.ops, asm.labels
    asm = ComplexAssembly(kind, cx, spaces, ops, labels)
    if check and not all(asm.composites()):
        raise AssemblyError(f"{kind}: composite of consecutive operators is not zero")
    log.debug("assembled %s on %s: dims %s", kind, cx.name, asm.dims)
    return asm
