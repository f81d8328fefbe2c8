import pytest

from bggfem.operators import assemble_complex
from bggfem.report import inject_fault
from bggfem.verification import (
    AUX_REASON,
    DUAL_PARTNER,
    adjointness_oracle,
    bubble_split,
    certify_cohomology,
    check_aux_diagrams,
    check_complex,
    check_diagram,
    check_duality,
    cohomology_dims,
    harmonic_dims,
    run_oracle,
)

from _suite import assembled, mesh


def test_complex_examples():
    assert check_complex(assembled("hessian-2d", "criss-cross-square"))
    assert check_complex(assembled("divdiv-3d", "cube", 1))


def test_flipped_rot_breaks_the_complex():
    asm = assembled("hessian-2d", "criss-cross-square")
    rot = asm.ops[1]
    (i, j), v = sorted(rot.entries().items())[0]
    broken = asm.with_ops([asm.ops[0], rot.with_entry(i, j, -v)])
    assert not check_complex(broken)
    report = certify_cohomology(broken)
    assert not report.passed


@pytest.mark.parametrize(
    "kind,mesh_kind,res,expected",
    [
        ("hessian-2d", "square", 1, [3, 0, 0]),
        ("hessian0-2d", "square", 1, [0, 0, 3]),
        ("divdiv-2d", "square-with-hole", 4, [3, 3, 0]),
        ("divdiv0-2d", "square-with-hole", 4, [0, 3, 3]),
        ("hessian-3d", "cube", 1, [4, 0, 0, 0]),
        ("divdiv-3d", "cube-with-tunnel", 3, [4, 4, 0, 0]),
        ("divdiv0-3d", "cube-with-cavity", 3, [0, 4, 0, 4]),
        ("divdiv-trimmed-3d", "cube-with-cavity", 3, [4, 0, 4, 0]),
    ],
)
def test_cohomology_examples(kind, mesh_kind, res, expected):
    asm = assembled(kind, mesh_kind, res)
    assert cohomology_dims(asm) == expected
    report = certify_cohomology(asm, oracle=True)
    assert report.passed and report.expected == expected and report.euler_consistent


def test_oracle_passes_on_hessian_and_div():
    for v in run_oracle(assembled("hessian-2d", "square"), 20, seed=1):
        assert v.status == "pass" and v.trials == 20
    verdict = adjointness_oracle(assembled("hessian-3d", "cube", 1), 2, 5, seed=4)
    assert verdict.operator == "div" and verdict.status == "pass"


def test_oracle_skips_are_explained():
    verdicts = run_oracle(assembled("divdiv-3d", "two-tets"), 2)
    assert [v.status for v in verdicts] == ["pass", "skipped", "skipped"]
    assert all(v.reason for v in verdicts[1:])
    aux = run_oracle(assembled("aux-2d", "square"), 1)
    assert {v.reason for v in aux} == {AUX_REASON}


@pytest.mark.parametrize("fault", ["flip-sign", "perturb-entry"])
def test_oracle_detects_single_entry_faults(fault):
    asm = assembled("hessian-2d", "criss-cross-square")
    broken, info = inject_fault(asm, fault, seed=2)
    assert info["applied"] and info["op"] == 0
    verdict = adjointness_oracle(broken, 0, 5)
    assert verdict.status == "fail" and verdict.failures == 5


def test_oracle_with_boundary_conditions_runs_without_cutoff():
    asm = assembled("divdiv0-2d", "criss-cross-square")
    assert all(v.passed for v in run_oracle(asm, 3))


def test_duality_examples():
    V, U = assembled("hessian-2d", "square-with-hole", 4), assembled("divdiv0-2d", "square-with-hole", 4)
    verdict = check_duality(V, U)
    assert verdict.passed
    assert verdict.harmonic_v == cohomology_dims(V)
    assert verdict.harmonic_u == [0, 3, 3]
    V3, U3 = assembled("hessian0-3d", "cube", 1), assembled("divdiv-trimmed-3d", "cube", 1)
    assert check_duality(V3, U3).passed
    assert DUAL_PARTNER["divdiv0-3d"] == "hessian-3d"


def test_duality_detects_a_broken_operator():
    V, U = assembled("hessian0-2d", "criss-cross-square"), assembled("divdiv-2d", "criss-cross-square")
    broken, _ = inject_fault(U, "perturb-entry", 0)
    verdict = check_duality(V, broken)
    assert not all(verdict.identities)


def test_duality_shape_mismatch():
    with pytest.raises(ValueError):
        check_duality(assembled("hessian-2d", "square"), assembled("hessian-3d", "tetrahedron"))


def test_harmonic_dims_match_cohomology_on_every_small_mesh():
    for kind, m in (("hessian0-2d", "criss-cross-square"), ("divdiv-3d", "two-tets"), ("aux-3d", "cube")):
        asm = assembled(kind, m)
        assert harmonic_dims(asm) == cohomology_dims(asm)


def test_bubble_split():
    full = assembled("divdiv0-3d", "cube", 1)
    trimmed = assembled("divdiv0-trimmed-3d", "cube", 1)
    assert bubble_split(full, trimmed)["pass"]


@pytest.mark.parametrize("bc", [False, True])
def test_aux_diagrams(bc):
    out = check_aux_diagrams(mesh("square-with-hole", 4), bc)
    assert out["pass"] and all(out["kappa"]["squares"]) and all(out["g"]["columns"])


def test_diagram_argument_checks():
    a = assembled("hessian-2d", "square")
    with pytest.raises(ValueError):
        check_diagram([a, a], [])
    with pytest.raises(ValueError):
        check_diagram([a, assemble_complex("hessian-3d", mesh("tetrahedron"))], [[]])
