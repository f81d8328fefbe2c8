"""Simplicial homology over the rationals and the restriction-boundary complex.

Homology of relative chains (interior simplices only) and of ordinary chains
is computed by rank-nullity. Via the de Rham and Lefschetz correspondences,
relative homology in degree n-k gives the k-th de Rham Betti number of the
domain, and ordinary homology in degree n-k gives the compactly supported one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .linalg import ExactMatrix, inverse, rank, sequence_cohomology, smith_normal_form
from .mesh import OrientationVariant, SimplicialComplex, Simplex, boundary_matrix, face_sign

BettiVector = tuple[int, ...]

# per-component coefficients of (1, x, y[, z])
AffineVec = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class CoefficientSpace:
    id: str
    basis: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)


def _p1_basis(n: int) -> tuple[tuple[int, ...], ...]:
    # exponent tuples: 1, x, y(, z)
    return tuple(tuple(int(i == j) for i in range(n)) if j >= 0 else (0,) * n for j in range(-1, n))


def _rt_basis(n: int) -> tuple[AffineVec, ...]:
    consts = tuple(
        tuple(tuple([int(i == a)] + [0] * n) for i in range(n)) for a in range(n)
    )
    radial = tuple(tuple([0] + [int(i == j) for j in range(n)]) for i in range(n))
    return consts + (radial,)


Z = CoefficientSpace("Z", ((),))
P1_2D = CoefficientSpace("P1_2D", _p1_basis(2))
P1_3D = CoefficientSpace("P1_3D", _p1_basis(3))
RT_2D = CoefficientSpace("RT_2D", _rt_basis(2))
RT_3D = CoefficientSpace("RT_3D", _rt_basis(3))


def coefficient_space(family: str, dim: int) -> CoefficientSpace:
    if family in ("hessian", "aux"):
        return P1_2D if dim == 2 else P1_3D
    if family in ("divdiv", "divdiv-trimmed"):
        return RT_2D if dim == 2 else RT_3D
    raise ValueError(f"no coefficient space for family '{family}'")


def _chain_dims(cx: SimplicialComplex, variant: OrientationVariant) -> list[int]:
    return [len(cx.chain_basis(k, variant)) for k in range(cx.dim + 1)]


def homology_dims(cx: SimplicialComplex, variant: OrientationVariant) -> BettiVector:
    """dim H_k = dim C_k - rank d_k - rank d_{k+1}, for k = 0..dim."""
    ranks = [rank(boundary_matrix(cx, k, variant)) for k in range(1, cx.dim + 1)]
    return _betti(_chain_dims(cx, variant), ranks)


def homology_dims_snf(cx: SimplicialComplex, variant: OrientationVariant) -> BettiVector:
    """Same numbers from Smith normal forms of the integer boundary matrices."""
    ranks = [len(smith_normal_form(boundary_matrix(cx, k, variant))) for k in range(1, cx.dim + 1)]
    return _betti(_chain_dims(cx, variant), ranks)


def _betti(dims: list[int], ranks: list[int]) -> BettiVector:
    r = [0] + ranks + [0]
    return tuple(dims[k] - r[k] - r[k + 1] for k in range(len(dims)))


def derham_betti(cx: SimplicialComplex, compact: bool = False, oracle: bool = False) -> BettiVector:
    """Betti numbers of de Rham cohomology (compact=True: compactly supported)."""
    variant = OrientationVariant.STANDARD if compact else OrientationVariant.RELATIVE
    h = homology_dims_snf(cx, variant) if oracle else homology_dims(cx, variant)
    return tuple(reversed(h))


@dataclass(frozen=True)
class ComplexKind:
    name: str
    dim: int
    family: str  # hessian, divdiv, aux, divdiv-trimmed
    bc: bool


COMPLEX_KINDS: dict[str, ComplexKind] = {
    k.name: k
    for k in [
        ComplexKind("hessian-2d", 2, "hessian", False),
        ComplexKind("hessian0-2d", 2, "hessian", True),
        ComplexKind("divdiv-2d", 2, "divdiv", False),
        ComplexKind("divdiv0-2d", 2, "divdiv", True),
        ComplexKind("hessian-3d", 3, "hessian", False),
        ComplexKind("hessian0-3d", 3, "hessian", True),
        ComplexKind("divdiv-3d", 3, "divdiv", False),
        ComplexKind("divdiv0-3d", 3, "divdiv", True),
        ComplexKind("aux-2d", 2, "aux", False),
        ComplexKind("aux0-2d", 2, "aux", True),
        ComplexKind("aux-3d", 3, "aux", False),
        ComplexKind("aux0-3d", 3, "aux", True),
        ComplexKind("divdiv-trimmed-3d", 3, "divdiv-trimmed", False),
        ComplexKind("divdiv0-trimmed-3d", 3, "divdiv-trimmed", True),
    ]
}

MAIN_KINDS = tuple(k for k, v in COMPLEX_KINDS.items() if v.family in ("hessian", "divdiv"))


def complex_kind(name: str) -> ComplexKind:
    try:
        return COMPLEX_KINDS[name]
    except KeyError:
        raise ValueError(f"unknown complex kind '{name}'") from None


def expected_cohomology(kind: str, cx: SimplicialComplex, oracle: bool = False) -> list[int]:
    """Betti numbers (compactly supported for BC kinds) times the coefficient dimension."""
    k = complex_kind(kind)
    if k.dim != cx.dim:
        raise ValueError(f"{kind} needs a {k.dim}D mesh, got {cx.dim}D")
    c = coefficient_space(k.family, k.dim).dim
    return [b * c for b in derham_betti(cx, compact=k.bc, oracle=oracle)]


# restriction of affine polynomials to subsimplices


def _monomial_values(point, n: int) -> list[Fraction]:
    return [Fraction(1)] + [Fraction(point[i]) for i in range(n)]


@lru_cache(maxsize=None)
def _local_basis_cached(coords: tuple, n: int) -> tuple[int, ...]:
    chosen: list[int] = []
    rows: list[list[Fraction]] = []
    for m in range(n + 1):
        col = [_monomial_values(p, n)[m] for p in coords]
        trial = rows + [col]
        if rank(ExactMatrix.from_dense(trial)) == len(trial):
            chosen.append(m)
            rows = trial
        if len(chosen) == len(coords):
            break
    return tuple(chosen)


def local_p1_basis(cx: SimplicialComplex, simplex: Simplex) -> tuple[int, ...]:
    """Indices into (1, x, y[, z]) forming a basis of P1 restricted to ``simplex``."""
    return _local_basis_cached(tuple(cx.coords(simplex)), cx.dim)


def restriction_to(cx: SimplicialComplex, simplex: Simplex) -> list[list[Fraction]]:
    """Matrix taking global monomial coefficients to local basis coordinates on ``simplex``."""
    n = cx.dim
    pts = cx.coords(simplex)
    basis = local_p1_basis(cx, simplex)
    vand = [[_monomial_values(p, n)[b] for b in basis] for p in pts]
    vinv = inverse(vand)
    evals = [_monomial_values(p, n) for p in pts]
    return [
        [sum((vinv[a][j] * evals[j][m] for j in range(len(pts))), Fraction(0)) for m in range(n + 1)]
        for a in range(len(basis))
    ]


def restriction_between(cx: SimplicialComplex, sigma: Simplex, tau: Simplex) -> list[list[Fraction]]:
    """Local coordinates on sigma -> local coordinates on its face tau."""
    n = cx.dim
    src = local_p1_basis(cx, sigma)
    pts = cx.coords(tau)
    basis = local_p1_basis(cx, tau)
    vinv = inverse([[_monomial_values(p, n)[b] for b in basis] for p in pts])
    vals = [[_monomial_values(p, n)[b] for b in src] for p in pts]
    return [
        [sum((vinv[a][j] * vals[j][s] for j in range(len(pts))), Fraction(0)) for s in range(len(src))]
        for a in range(len(basis))
    ]


def p1_chain_index(cx: SimplicialComplex, k: int, variant: OrientationVariant) -> list[tuple[Simplex, int]]:
    """Ordered (simplex, local basis position) pairs spanning the sum of P1(sigma)."""
    return [(s, a) for s in cx.chain_basis(k, variant) for a in range(k + 1)]


def tilde_boundary_matrix(cx: SimplicialComplex, k: int, variant: OrientationVariant) -> ExactMatrix:
    """Boundary sign composed with restriction: sum P1(k-simplices) -> sum P1((k-1)-simplices)."""
    if not 1 <= k <= cx.dim:
        raise ValueError(f"degree {k} outside 1..{cx.dim}")
    cols = p1_chain_index(cx, k, variant)
    rows = p1_chain_index(cx, k - 1, variant)
    row_of = {key: i for i, key in enumerate(rows)}
    col_of = {key: j for j, key in enumerate(cols)}
    entries: dict[tuple[int, int], Fraction] = {}
    for sigma in cx.chain_basis(k, variant):
        for tau in itertools.combinations(sigma, k):
            if (tau, 0) not in row_of:
                continue
            sign = face_sign(tau, sigma)
            R = restriction_between(cx, sigma, tau)
            for a, row in enumerate(R):
                for b, v in enumerate(row):
                    if v:
                        entries[(row_of[(tau, a)], col_of[(sigma, b)])] = sign * v
    return ExactMatrix(len(rows), len(cols), entries)


def tilde_complex(cx: SimplicialComplex, variant: OrientationVariant) -> tuple[list[int], list[ExactMatrix]]:
    """Spaces and maps of the restriction-boundary complex, top cells first."""
    dims = [len(p1_chain_index(cx, k, variant)) for k in range(cx.dim, -1, -1)]
    ops = [tilde_boundary_matrix(cx, k, variant) for k in range(cx.dim, 0, -1)]
    return dims, ops


def tilde_cohomology(cx: SimplicialComplex, variant: OrientationVariant) -> list[int]:
    dims, ops = tilde_complex(cx, variant)
    return sequence_cohomology(dims, ops)


@dataclass(frozen=True)
class PatchComplex:
    """Chain complex on the simplices through one vertex, top cells first."""

    vertex: int
    simplices: tuple[tuple[Simplex, ...], ...]
    ops: tuple[ExactMatrix, ...]

    @property
    def dims(self) -> list[int]:
        return [len(s) for s in self.simplices]

    def homology(self) -> list[int]:
        return sequence_cohomology(self.dims, list(self.ops))


def vertex_patch_split(cx: SimplicialComplex, variant: OrientationVariant) -> list[PatchComplex]:
    """One patch complex per vertex; their direct sum matches the restriction-boundary complex."""
    out = []
    n = cx.dim
    for v in range(len(cx.vertices)):
        levels = []
        for k in range(n, -1, -1):
            levels.append(tuple(s for s in cx.chain_basis(k, variant) if v in s))
        ops = []
        for j in range(n):
            src, dst = levels[j], levels[j + 1]
            row_of = {s: i for i, s in enumerate(dst)}
            entries = {}
            for c, s in enumerate(src):
                for t in itertools.combinations(s, len(s) - 1):
                    if t in row_of:
                        entries[(row_of[t], c)] = face_sign(t, s)
            ops.append(ExactMatrix(len(dst), len(src), entries))
        out.append(PatchComplex(v, tuple(levels), tuple(ops)))
    return out
