import itertools
import random

import pytest

from bggfem.homology import homology_dims_snf
from bggfem.linalg import compose, is_zero
from bggfem.mesh import (
    DimensionError,
    MeshError,
    MeshParseError,
    OrientationVariant,
    TopologyError,
    boundary_matrix,
    build_complex,
    face_sign,
    format_mesh,
    generate_mesh,
    load_mesh,
    orientation_sign,
    parse_mesh,
)

from _suite import SUITE, mesh, suite_id

STD, REL = OrientationVariant.STANDARD, OrientationVariant.RELATIVE

TRIANGLE = """dim 2
vertices 3
0 0
1 0
0 1
cells 1
0 1 2
"""

SQUARE = """# unit square split along a diagonal
dim 2
vertices 4
0 0
1 0
1 1
0 1
cells 2
0 1 2
0 2 3
"""


def test_single_triangle_file(tmp_path):
    p = tmp_path / "tri.txt"
    p.write_text(TRIANGLE)
    cx = load_mesh(p)
    assert cx.counts() == {"V": 3, "V0": 0, "E": 3, "E0": 0, "F": 1, "F0": 1}
    assert all(cx.is_boundary(e) for e in cx.simplices[1])


def test_two_triangle_square_has_one_interior_edge():
    cx = parse_mesh(SQUARE)
    assert cx.count(1) == 5
    assert cx.interior(1) == [(0, 2)]


def test_out_of_range_vertex_is_a_topology_error():
    text = SQUARE.replace("0 2 3", "0 2 9")
    with pytest.raises(TopologyError):
        parse_mesh(text)


@pytest.mark.parametrize(
    "text, err",
    [
        ("dim 4\n", DimensionError),
        ("dim 2\nvertices 1\n0 0 0\n", DimensionError),
        ("dim 2\nvertices 3\n0 0\n1 0\n0 1.5\ncells 1\n0 1 2\n", MeshParseError),
        ("dim 2\nvertices 3\n0 0\n1 0\n0 1/0\ncells 1\n0 1 2\n", MeshParseError),
        ("dim 2\nvertices 3\n0 0\n1 0\n2 0\ncells 1\n0 1 2\n", TopologyError),
        ("dim 2\nvertices 3\n0 0\n1 0\n0 1\n", MeshParseError),
        (TRIANGLE + "extra\n", MeshParseError),
        ("dim 2\nvertices 4\n0 0\n1 0\n0 1\n5 5\ncells 1\n0 1 2\n", TopologyError),
    ],
)
def test_malformed_files(text, err):
    with pytest.raises(err):
        parse_mesh(text)


def test_rational_coordinates_roundtrip():
    cx = parse_mesh("dim 2\nvertices 3\n-1/3 0\n2/7 0\n0 5/2\ncells 1\n2 0 1\n")
    again = parse_mesh(format_mesh(cx))
    assert again == cx
    assert cx.vertices[0][0].denominator == 3


def test_criss_cross_counts():
    cx = generate_mesh("criss-cross-square", 1)
    c = cx.counts()
    assert (c["V"], c["E"], c["E0"], c["F"], c["V0"]) == (5, 8, 4, 4, 1)


def test_square_with_hole_relative_homology():
    cx = generate_mesh("square-with-hole", 4)
    assert homology_dims_snf(cx, REL) == (0, 1, 1)


def test_kuhn_cube():
    cx = generate_mesh("cube", 1)
    assert cx.count(0) == 8 and cx.count(3) == 6
    assert all(cx.orientation_of(c) in (1, -1) for c in cx.simplices[3])


@pytest.mark.parametrize("kind", ["triangle", "square", "cube-with-tunnel", "nope"])
def test_generator_argument_errors(kind):
    with pytest.raises(MeshError):
        generate_mesh(kind, 0 if kind != "triangle" else 2)


def test_orientation_sign_examples():
    cx = mesh("square", 1)
    e = (0, 3)
    assert cx.interior(1) == [e]
    assert orientation_sign(cx, (3,), e) == -1
    assert orientation_sign(cx, (0,), e) == 1
    assert orientation_sign(cx, (1,), e) == 0
    cell = (0, 1, 3)
    assert orientation_sign(cx, (1, 3), cell, STD) == -1
    assert orientation_sign(cx, (1, 3), cell, REL) == 0
    assert orientation_sign(cx, (0, 3), cell, REL) == 1


def test_orientation_is_independent_of_input_order():
    verts = [(0, 0), (1, 0), (0, 1)]
    signs = set()
    for perm in itertools.permutations(range(3)):
        cx = build_complex(2, verts, [perm])
        signs.add(tuple(face_sign(t, cx.simplices[2][0]) for t in cx.simplices[1]))
        # geometric orientation flips with odd permutations of the same coordinates
        moved = build_complex(2, [verts[i] for i in perm], [(0, 1, 2)])
        parity = sum(1 for i, j in itertools.combinations(perm, 2) if i > j) % 2
        assert moved.orientation_of((0, 1, 2)) == (-1 if parity else 1)
    assert len(signs) == 1


@pytest.mark.parametrize("item", SUITE, ids=suite_id)
def test_boundary_squares_to_zero(item):
    cx = mesh(*item)
    for variant in (STD, REL):
        for k in range(2, cx.dim + 1):
            assert is_zero(compose(boundary_matrix(cx, k - 1, variant), boundary_matrix(cx, k, variant)))
        for c in (1, 3):
            B = boundary_matrix(cx, cx.dim, variant, coeff_dim=c)
            assert B.shape[1] == c * cx.count(cx.dim)


@pytest.mark.parametrize("item", SUITE, ids=suite_id)
def test_boundary_classification(item):
    cx = mesh(*item)
    n = cx.dim
    incident = {f: 0 for f in cx.simplices[n - 1]}
    for c in cx.simplices[n]:
        for f in itertools.combinations(c, n):
            incident[f] += 1
    assert sum(cx.boundary_flag[n - 1]) == sum(1 for v in incident.values() if v == 1)


@pytest.mark.parametrize("item", SUITE, ids=suite_id)
def test_generator_is_deterministic(item):
    a, b = generate_mesh(*item), generate_mesh(*item)
    assert a == b and format_mesh(a) == format_mesh(b)


def test_random_relabelling_gives_isomorphic_counts():
    cx = mesh("cube", 1)
    rng = random.Random(3)
    perm = list(range(cx.count(0)))
    rng.shuffle(perm)
    inv = {p: i for i, p in enumerate(perm)}
    verts = [cx.vertices[perm[i]] for i in range(len(perm))]
    cells = [tuple(inv[v] for v in c) for c in cx.simplices[3]]
    other = build_complex(3, verts, cells)
    assert other.counts() == cx.counts()
