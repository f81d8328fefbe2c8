import random
from fractions import Fraction

import pytest

from bggfem.linalg import ExactMatrix, is_zero, rank
from bggfem.mesh import build_complex
from bggfem.operators import (
    AssemblyError,
    assemble_complex,
    assemble_hess_2d,
    assemble_pairing,
)
from bggfem.spaces import bilinear, build_space
from bggfem.verification import cohomology_dims

from _suite import SUITE, SUITE_2D, SMALL_3D, assembled, kinds_for, mesh, suite_id


def _apply(M: ExactMatrix, x):
    out = [Fraction(0)] * M.shape[0]
    for (i, j), v in M.entries().items():
        out[i] += v * x[j]
    return out


def _affine(cx, a, b):
    return [a + sum(bi * xi for bi, xi in zip(b, v)) for v in cx.vertices]


@pytest.mark.parametrize("item", SUITE, ids=suite_id)
def test_hessian_kills_affine_functions(item):
    cx = mesh(*item)
    kind = f"hessian-{cx.dim}d"
    H = assembled(kind, *item).ops[0]
    b = [Fraction(i + 2, 3) for i in range(cx.dim)]
    assert all(v == 0 for v in _apply(H, _affine(cx, Fraction(5), b)))
    # a quadratic has a nonzero distributional Hessian whenever an interior facet exists
    quad = [v[0] * v[1] for v in cx.vertices]
    assert any(_apply(H, quad)) == (H.shape[0] > 0)


def test_single_triangle_shapes():
    asm = assembled("hessian-2d", "triangle")
    assert asm.dims == [3, 0, 0]
    assert asm.ops[0].shape == (0, 3)
    assert assembled("hessian-3d", "tetrahedron").dims == [4, 0, 0, 0]
    assert all(op.nnz == 0 for op in assembled("hessian-3d", "tetrahedron").ops)


def test_square_hessian_single_row():
    H = assemble_hess_2d(mesh("square"))
    assert H.shape == (1, 4)
    assert rank(H) == 1
    # the two diagonal vertices enter with one sign and the off-diagonal ones with the other
    row = [H[0, j] for j in range(4)]
    assert row[0] == row[3] and row[1] == row[2] and row[0] == -row[1] != 0


@pytest.mark.parametrize("item", SUITE_2D, ids=suite_id)
def test_divdiv_2d_kills_constant_fields(item):
    cx = mesh(*item)
    asm = assembled("divdiv-2d", *item)
    for S in ([[1, 0], [0, 1]], [[2, Fraction(1, 3)], [Fraction(1, 3), -1]]):
        S = [[Fraction(x) for x in r] for r in S]
        coeffs = [bilinear(a.payload, S, a.payload) for a in asm.spaces[1].atoms]
        assert all(v == 0 for v in _apply(asm.ops[1], coeffs))


@pytest.mark.parametrize("kind", kinds_for(2) + kinds_for(3))
def test_wrong_dimension_rejected(kind):
    other = mesh("tetrahedron") if kind.endswith("2d") else mesh("square")
    with pytest.raises(AssemblyError):
        assemble_complex(kind, other)


def test_unknown_kind_rejected():
    with pytest.raises(AssemblyError):
        assemble_complex("elasticity-2d", mesh("square"))


@pytest.mark.parametrize("item", SUITE_2D[1:] + SMALL_3D[1:], ids=suite_id)
def test_pairings_are_identity(item):
    cx = mesh(*item)
    n = cx.dim
    pairs = [("V0_0", f"U{n}"), (f"V{n}", "U0_0"), ("V1_0", "U1" if n == 2 else "Uhat2")]
    if n == 3:
        pairs.append(("V2", "Uhat1_0"))
    for v, u in pairs:
        P = assemble_pairing(cx, build_space(v, cx), build_space(u, cx))
        assert P == ExactMatrix.identity(P.shape[0])


def test_unsanctioned_pairings_raise():
    cx = mesh("square")
    with pytest.raises(AssemblyError):
        assemble_pairing(cx, build_space("V0", cx), build_space("U1", cx))
    with pytest.raises(AssemblyError):
        assemble_pairing(cx, build_space("V0", cx), build_space("U2", cx))  # neither side has the condition


def _mapped(cx, f):
    return build_complex(cx.dim, [f(v) for v in cx.vertices], cx.simplices[cx.dim], cx.name)


def _pattern(asm):
    return [sorted(op.entries()) for op in asm.ops]


@pytest.mark.parametrize("item", [("square-with-hole", 4), ("cube", 1), ("two-tets", 1)], ids=suite_id)
def test_similarity_invariance(item):
    cx = mesh(*item)
    shift = [Fraction(1, 2), Fraction(-3), Fraction(7, 5)][: cx.dim]
    moved = _mapped(cx, lambda v: [3 * x + s for x, s in zip(v, shift)])
    for kind in kinds_for(cx.dim):
        a, b = assemble_complex(kind, cx), assemble_complex(kind, moved)
        assert a.dims == b.dims
        assert _pattern(a) == _pattern(b)
        assert cohomology_dims(a) == cohomology_dims(b)


def test_random_diagonal_rescaling_keeps_cohomology():
    rng = random.Random(3)
    asm = assembled("divdiv-3d", "cube", 1)
    scales = [[Fraction(rng.choice([-3, -1, 2, 5]), rng.randint(1, 4)) for _ in range(d)] for d in asm.dims]
    ops = []
    for k, op in enumerate(asm.ops):
        ent = {(i, j): v * scales[k + 1][i] / scales[k][j] for (i, j), v in op.entries().items()}
        ops.append(ExactMatrix(op.shape[0], op.shape[1], ent))
    scaled = asm.with_ops(ops)
    assert all(scaled.composites())
    assert cohomology_dims(scaled) == cohomology_dims(asm)


@pytest.mark.parametrize(
    "mesh_kind,resolutions",
    [("square", (1, 2)), ("criss-cross-square", (1, 2)), ("square-with-hole", (3, 4)), ("cube", (1, 2))],
)
def test_refinement_invariance(mesh_kind, resolutions):
    for kind in kinds_for(mesh(mesh_kind, resolutions[0]).dim):
        coh = {tuple(cohomology_dims(assembled(kind, mesh_kind, r))) for r in resolutions}
        assert len(coh) == 1, kind


def test_composite_check_catches_broken_operator():
    asm = assembled("hessian-2d", "criss-cross-square")
    (i, j), v = next(iter(sorted(asm.ops[0].entries().items())))
    broken = asm.with_ops([asm.ops[0].with_entry(i, j, -v), asm.ops[1]])
    assert not all(broken.composites())
    assert is_zero(ExactMatrix(2, 3, {}))
