"""Shared mesh suite and cached assemblies for the tests."""

from functools import lru_cache

from bggfem.homology import COMPLEX_KINDS
from bggfem.mesh import generate_mesh
from bggfem.operators import assemble_complex

SUITE_2D = [("triangle", 1), ("square", 1), ("criss-cross-square", 1), ("square-with-hole", 4)]
SUITE_3D = [
    ("tetrahedron", 1),
    ("two-tets", 1),
    ("cube", 1),
    ("cube", 2),
    ("cube-with-tunnel", 3),
    ("cube-with-cavity", 3),
]
SUITE = SUITE_2D + SUITE_3D
SMALL_3D = [("tetrahedron", 1), ("two-tets", 1), ("cube", 1)]


def suite_id(item) -> str:
    return f"{item[0]}-{item[1]}"


@lru_cache(maxsize=None)
def mesh(kind: str, res: int = 1):
    return generate_mesh(kind, res)


@lru_cache(maxsize=None)
def assembled(kind: str, mesh_kind: str, res: int = 1):
    return assemble_complex(kind, mesh(mesh_kind, res))


def kinds_for(dim: int) -> list[str]:
    return [k for k, v in COMPLEX_KINDS.items() if v.dim == dim]


# acceptance verdict lines, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def random_tet(rng, span: int = 12):
    """Four random rational points in general position."""
    from fractions import Fraction

    from bggfem.mesh import signed_volume_det

    while True:
        pts = [tuple(Fraction(rng.randint(-span, span), rng.randint(1, 5)) for _ in range(3)) for _ in range(4)]
        if signed_volume_det(pts) != 0:
            return pts
