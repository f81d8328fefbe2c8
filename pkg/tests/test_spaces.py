import random
from fractions import Fraction

import pytest

from bggfem.linalg import rank
from bggfem.mesh import build_complex
from bggfem.spaces import (
    AtomKind,
    GeometryError,
    build_space,
    local_sequence_ranks,
    parse_space_id,
    tdnns_bubble_basis,
    u1_dof_matrix,
    u1_local_shape_basis,
)

from _suite import SUITE, SUITE_3D, mesh, random_tet, suite_id

REFERENCE_TET = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]


def _interior(cx, k):
    return len(cx.interior(k))


@pytest.mark.parametrize("item", SUITE_3D, ids=suite_id)
def test_3d_dimension_formulas(item):
    cx = mesh(*item)
    F, K = cx.count(2), cx.count(3)
    assert build_space("V1", cx).dim == _interior(cx, 2)
    assert build_space("V2", cx).dim == 2 * _interior(cx, 1)
    assert build_space("U2", cx).dim == F + 2 * K
    assert build_space("Uhat2", cx).dim == F
    assert build_space("U1", cx).dim == 2 * cx.count(1) + 2 * K
    assert build_space("V3", cx).dim == 3 * _interior(cx, 0)


def test_small_3d_examples():
    assert build_space("V1", mesh("two-tets")).dim == 1
    assert build_space("V2", mesh("two-tets")).dim == 0
    assert build_space("V1", mesh("tetrahedron")).dim == 0
    assert build_space("U1", mesh("tetrahedron")).dim == 14


@pytest.mark.parametrize("item", SUITE, ids=suite_id)
def test_boundary_variants_swap_interior_and_all(item):
    cx = mesh(*item)
    n = cx.dim
    assert build_space("V0", cx).dim == cx.count(0)
    assert build_space("V0_0", cx).dim == _interior(cx, 0)
    assert build_space(f"V{n}_0", cx).dim == n * cx.count(0)
    assert build_space("U0_0", cx).dim == n * _interior(cx, 0)
    assert build_space(f"U{n}", cx).dim == _interior(cx, 0)
    assert build_space(f"U{n}_0", cx).dim == cx.count(0)
    for k in range(n + 1):
        assert build_space(f"Vm{k}", cx).dim % (n + 1) == 0


def test_2d_examples():
    sq = mesh("square")
    assert build_space("V1", sq).dim == 1
    assert build_space("V1_0", sq).dim == 5
    assert build_space("U1", sq).dim == 5
    assert build_space("U1_0", sq).dim == 1
    assert [a.kind for a in build_space("U1", sq).atoms] == [AtomKind.REGGE_NN] * 5


def test_local_u1_is_fourteen_dimensional():
    assert len(u1_local_shape_basis(REFERENCE_TET)) == 14


def test_reference_tet_unisolvent():
    assert rank(u1_dof_matrix(REFERENCE_TET)) == 14
    assert len(tdnns_bubble_basis(REFERENCE_TET)) == 2
    assert local_sequence_ranks(REFERENCE_TET) == (8, 6)


def test_random_tets_unisolvent():
    rng = random.Random(7)
    for _ in range(25):
        pts = random_tet(rng)
        assert rank(u1_dof_matrix(pts)) == 14
        assert len(tdnns_bubble_basis(pts)) == 2


def test_bubbles_have_no_face_normal_part():
    from bggfem.spaces import bilinear, face_normal_of

    pts = [(Fraction(1, 3), 0, 0), (2, 1, 0), (0, 3, 1), (1, 1, 4)]
    for B in tdnns_bubble_basis(pts):
        for f in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
            n = face_normal_of([pts[i] for i in f])
            assert bilinear(n, B, n) == 0


def test_degenerate_tet_rejected():
    flat = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)]
    with pytest.raises(GeometryError):
        u1_dof_matrix(flat)
    with pytest.raises(GeometryError):
        tdnns_bubble_basis(flat)
    with pytest.raises(GeometryError):
        u1_dof_matrix(REFERENCE_TET[:3])


def test_space_ids():
    assert parse_space_id("V1") == ("V", 1, False)
    assert parse_space_id("Uhat2_0") == ("Uhat", 2, True)
    for bad in ("W1", "V", "U1_1", "v0"):
        with pytest.raises(ValueError):
            parse_space_id(bad)
    with pytest.raises(ValueError):
        build_space("V3", mesh("square"))
    with pytest.raises(ValueError):
        build_space("Uhat1", mesh("square"))
    assert build_space("zero", mesh("square")).dim == 0


def test_positions_follow_atom_order():
    V = build_space("V2_0", mesh("cube"))
    for i, a in enumerate(V.atoms):
        assert V.position(a.kind, a.simplex, a.slot) == i
    assert V.position(AtomKind.LAGRANGE_HAT, (0,)) is None


def test_payload_normals_are_perpendicular():
    cx = build_complex(3, REFERENCE_TET + [(1, 1, 1)], [(0, 1, 2, 3), (1, 2, 3, 4)])
    for a in build_space("V2_0", cx).atoms:
        p, q = cx.coords(a.simplex)
        t = [y - x for x, y in zip(p, q)]
        assert sum(x * y for x, y in zip(a.payload, t)) == 0
