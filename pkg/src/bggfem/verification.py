"""Certification of assembled complexes.

Cohomology by rank-nullity, commuting diagrams and short exact columns by
exact matrix identities, duality through pairing matrices, and an
independent adjointness oracle that integrates random polynomial test
fields exactly against every basis atom.
"""

from __future__ import annotations

import itertools
import logging
import random
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import factorial, gcd
from typing import Callable

from .homology import complex_kind, expected_cohomology, tilde_cohomology
from .linalg import ExactMatrix, compose, rank, sequence_cohomology, vstack
from .mesh import OrientationVariant, SimplicialComplex, signed_volume_det
from .operators import (
    ComplexAssembly,
    _u1_support,
    assemble_coefficient_chains,
    assemble_complex,
    assemble_g_maps,
    assemble_inclusions,
    assemble_kappa_maps,
    assemble_pairing,
    assemble_tilde_complex,
    hessian_tail,
)
from .polynomial import CompiledPoly, Poly, moment_table, monomials
from .spaces import AtomKind, facet_normal, hat_gradient, regge_dual_fields, u1_dual_fields, CELL_EDGES_2D

log = logging.getLogger(__name__)
A = AtomKind


# complex property and cohomology


def check_complex(asm: ComplexAssembly) -> bool:
    return all(asm.composites())


def cohomology_dims(asm: ComplexAssembly) -> list[int]:
    return sequence_cohomology(asm.dims, asm.ops)


@dataclass
class DegreeRow:
    k: int
    dim: int
    rank_in: int
    rank_out: int
    computed: int
    expected: int

    @property
    def passed(self) -> bool:
        return self.computed == self.expected

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d


@dataclass
class CohomologyReport:
    kind: str
    mesh: str
    rows: list[DegreeRow]
    composites: list[bool]
    runtime_s: float = 0.0

    @property
    def computed(self) -> list[int]:
        return [r.computed for r in self.rows]

    @property
    def expected(self) -> list[int]:
        return [r.expected for r in self.rows]

    @property
    def euler_consistent(self) -> bool:
        return sum((-1) ** r.k * r.computed for r in self.rows) == sum((-1) ** r.k * r.dim for r in self.rows)

    @property
    def passed(self) -> bool:
        return all(self.composites) and all(r.passed for r in self.rows) and self.euler_consistent


def certify_cohomology(asm: ComplexAssembly, cx: SimplicialComplex | None = None, oracle: bool = False) -> CohomologyReport:
    """Compare rank-nullity cohomology with Betti numbers times the coefficient dimension.

    ``oracle=True`` takes the Betti numbers from Smith normal forms instead of ranks.
    """
    t0 = time.perf_counter()
    cx = cx or asm.mesh
    ranks = [rank(op) for op in asm.ops]
    expected = expected_cohomology(asm.kind, cx, oracle=oracle)
    rows = []
    for k, d in enumerate(asm.dims):
        r_in = ranks[k - 1] if k > 0 else 0
        r_out = ranks[k] if k < len(ranks) else 0
        rows.append(DegreeRow(k, d, r_in, r_out, d - r_in - r_out, expected[k]))
    return CohomologyReport(asm.kind, cx.name, rows, asm.composites(), time.perf_counter() - t0)


# diagrams


@dataclass
class DiagramVerdict:
    squares: list[bool]
    columns: list[bool] = field(default_factory=list)
    euler: bool = True

    @property
    def passed(self) -> bool:
        return all(self.squares) and all(self.columns) and self.euler

    def to_dict(self) -> dict:
        return {"squares": self.squares, "columns": self.columns, "euler": self.euler, "pass": self.passed}


def check_diagram(rows: list[ComplexAssembly], verticals: list[list[ExactMatrix]], short_exact: bool = False) -> DiagramVerdict:
    """Commutation of every square; with ``short_exact`` each three-term column is checked too."""
    if len(verticals) != len(rows) - 1:
        raise ValueError("need one list of vertical maps between consecutive rows")
    squares = []
    for r, maps in enumerate(verticals):
        top, bottom = rows[r], rows[r + 1]
        if len(maps) != len(top.spaces) or len(bottom.spaces) != len(top.spaces):
            raise ValueError("rows and vertical maps have different lengths")
        for k, m in enumerate(maps):
            if m.shape != (bottom.spaces[k].dim, top.spaces[k].dim):
                raise ValueError(f"vertical map {r},{k} has shape {m.shape}")
        for k, op in enumerate(top.ops):
            squares.append(compose(maps[k + 1], op) == compose(bottom.ops[k], maps[k]))
    columns = []
    euler = True
    if short_exact:
        if len(rows) != 3:
            raise ValueError("short exact columns need exactly three rows")
        iota, g = verticals
        for k in range(len(rows[0].spaces)):
            r_i, r_g = rank(iota[k]), rank(g[k])
            columns.append(
                (g[k] @ iota[k]).nnz == 0
                and r_i == rows[0].spaces[k].dim
                and r_g == rows[2].spaces[k].dim
                and rows[1].spaces[k].dim == r_i + r_g
            )
        chis = [sum((-1) ** k * h for k, h in enumerate(cohomology_dims(row))) for row in rows]
        euler = chis[0] - chis[1] + chis[2] == 0
    return DiagramVerdict(squares, columns, euler)


def _variant(bc: bool) -> OrientationVariant:
    return OrientationVariant.STANDARD if bc else OrientationVariant.RELATIVE


def check_aux_diagrams(cx: SimplicialComplex, bc: bool, aux: ComplexAssembly | None = None) -> dict:
    """kappa squares, short exact g columns and the restriction-boundary cohomology."""
    aux = aux or assemble_complex(f"aux{'0' if bc else ''}-{cx.dim}d", cx)
    chains = assemble_coefficient_chains(cx, bc)
    kappa = check_diagram([aux, chains], [assemble_kappa_maps(cx, bc)])
    rows = [hessian_tail(cx, bc), aux, assemble_tilde_complex(cx, bc)]
    g = check_diagram(rows, [assemble_inclusions(cx, bc), assemble_g_maps(cx, cx.dim, bc)], short_exact=True)
    lagrange = len(cx.vertices) if not bc else len(cx.interior(0))
    tilde = tilde_cohomology(cx, _variant(bc)) == [lagrange] + [0] * cx.dim
    return {
        "kappa": kappa.to_dict(),
        "g": g.to_dict(),
        "tilde_cohomology": tilde,
        "pass": kappa.passed and g.passed and tilde,
    }


# duality

DUAL_PARTNER = {
    "hessian0-2d": "divdiv-2d",
    "hessian-2d": "divdiv0-2d",
    "hessian0-3d": "divdiv-trimmed-3d",
    "hessian-3d": "divdiv0-trimmed-3d",
}
DUAL_PARTNER.update({v: k for k, v in list(DUAL_PARTNER.items())})
DUAL_PARTNER.update({"divdiv-3d": "hessian0-3d", "divdiv0-3d": "hessian-3d"})

# <D_V v, u> = c_k <v, D_U u> for v in V^k
ADJOINT_SIGNS = {2: (1, -1), 3: (1, 1, -1)}


def harmonic_dims(asm: ComplexAssembly) -> list[int]:
    """Dimensions of {x : D_out x = 0, D_in^T x = 0} with coefficient inner products."""
    out = []
    for k, d in enumerate(asm.dims):
        blocks = []
        if k < len(asm.ops):
            blocks.append(asm.ops[k])
        if k > 0:
            blocks.append(asm.ops[k - 1].T)
        out.append(d - (rank(vstack(blocks)) if blocks else 0))
    return out


@dataclass
class DualityVerdict:
    pairings: list[bool]
    identities: list[bool]
    harmonic_v: list[int]
    harmonic_u: list[int]

    @property
    def harmonic_match(self) -> bool:
        n = len(self.harmonic_v) - 1
        return all(self.harmonic_v[k] == self.harmonic_u[n - k] for k in range(n + 1))

    @property
    def passed(self) -> bool:
        return all(self.pairings) and all(self.identities) and self.harmonic_match

    def to_dict(self) -> dict:
        return {
            "pairings_nondegenerate": self.pairings,
            "identities": self.identities,
            "harmonic_v": self.harmonic_v,
            "harmonic_u": self.harmonic_u,
            "harmonic_match": self.harmonic_match,
            "pass": self.passed,
        }


def check_duality(V: ComplexAssembly, U: ComplexAssembly) -> DualityVerdict:
    """Nondegenerate pairings, transposition identities and matching harmonic dimensions."""
    cx = V.mesh
    n = cx.dim
    if len(V.spaces) != n + 1 or len(U.spaces) != n + 1:
        raise ValueError("complexes must have dim + 1 spaces")
    P = [assemble_pairing(cx, V.spaces[k], U.spaces[n - k]) for k in range(n + 1)]
    pairings = [p.shape[0] == p.shape[1] and rank(p) == p.shape[0] for p in P]
    signs = ADJOINT_SIGNS[n]
    identities = []
    for k in range(n):
        lhs = V.ops[k].T @ P[k + 1]
        rhs = (P[k] @ U.ops[n - k - 1]).scale(signs[k])
        identities.append(lhs == rhs)
    return DualityVerdict(pairings, identities, harmonic_dims(V), harmonic_dims(U))


def bubble_split(full: ComplexAssembly, trimmed: ComplexAssembly) -> dict:
    """Checks that removing bubble slots leaves the cohomology unchanged."""
    src, tgt = full.spaces[1], full.spaces[2]
    cols = [j for j, a in enumerate(src.atoms) if a.kind is A.MCS_BUBBLE]
    rows = [i for i, a in enumerate(tgt.atoms) if a.kind is A.TDNNS_BUBBLE]
    block = full.ops[1].select(rows, cols)
    ncells = full.mesh.count(3)
    same = cohomology_dims(full) == cohomology_dims(trimmed)
    full_rank = rank(block) == 2 * ncells
    return {"bubble_block_rank_full": full_rank, "same_cohomology_as_trimmed": same, "pass": same and full_rank}


# adjointness oracle


class TestField:
    """Polynomial scalar, vector or matrix field, stored by component index."""

    def __init__(self, nvars: int, shape: tuple[int, ...], comps: dict[tuple, Poly]):
        self.nvars = nvars
        self.shape = shape
        self.comps = comps

    def __getitem__(self, idx) -> Poly:
        return self.comps.get(idx, Poly(self.nvars))

    def times(self, p: Poly) -> "TestField":
        done: dict[int, Poly] = {}
        comps = {}
        for k, v in self.comps.items():
            # symmetric fields share component objects
            if id(v) not in done:
                done[id(v)] = v * p
            comps[k] = done[id(v)]
        return TestField(self.nvars, self.shape, comps)

    def indices(self):
        return list(itertools.product(*[range(s) for s in self.shape]))


def random_field(rng: random.Random, n: int, shape: tuple[int, ...], symmetric: bool = False, degree: int = 3) -> TestField:
    mons = list(monomials(n, degree))

    def rand_poly() -> Poly:
        return Poly(n, {e: Fraction(rng.randint(-3, 3)) for e in mons})

    comps: dict[tuple, Poly] = {}
    for idx in itertools.product(*[range(s) for s in shape]):
        if symmetric and len(idx) == 2 and idx[0] > idx[1]:
            comps[idx] = comps[(idx[1], idx[0])]
        else:
            comps[idx] = rand_poly()
    return TestField(n, shape, comps)


def _plane(normal, point) -> tuple[Fraction, ...]:
    coeffs = [-sum(Fraction(a) * b for a, b in zip(normal, point))] + [Fraction(a) for a in normal]
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    ints = [c // g for c in ints]
    lead = next(c for c in ints[1:] if c)
    return tuple(Fraction(c if lead > 0 else -c) for c in ints)


def boundary_cutoff(cx: SimplicialComplex) -> Poly:
    """Square of the product of the distinct affine functions vanishing on boundary facets."""
    n = cx.dim
    planes = set()
    for facet, b in zip(cx.simplices[n - 1], cx.boundary_flag[n - 1]):
        if b:
            planes.add(_plane(facet_normal(cx, facet), cx.vertices[facet[0]]))
    out = Poly.const(n, 1)
    for pl in sorted(planes):
        out = out * Poly.affine(pl)
    return out * out


# continuous adjoints, written on TestField


def _divdiv(f: TestField) -> TestField:
    n = f.nvars
    p = Poly(n)
    for i in range(n):
        for j in range(n):
            p = p + f[(i, j)].diff(i).diff(j)
    return TestField(n, (), {(): p})


def _hess(f: TestField) -> TestField:
    n = f.nvars
    return TestField(n, (n, n), {(i, j): f[()].diff(i).diff(j) for i in range(n) for j in range(n)})


def _sym(comps: dict, n: int) -> TestField:
    half = Fraction(1, 2)
    return TestField(
        n, (n, n), {(i, j): (comps[(i, j)] + comps[(j, i)]) * half for i in range(n) for j in range(n)}
    )


def _sym_rot_adjoint_2d(f: TestField) -> TestField:
    # rows (d_y q_i, -d_x q_i)
    comps = {}
    for i in range(2):
        comps[(i, 0)] = f[(i,)].diff(1)
        comps[(i, 1)] = -f[(i,)].diff(0)
    return _sym(comps, 2)


def _sym_curl_3d(f: TestField) -> TestField:
    comps = {}
    for i in range(3):
        comps[(i, 0)] = f[(i, 2)].diff(1) - f[(i, 1)].diff(2)
        comps[(i, 1)] = f[(i, 0)].diff(2) - f[(i, 2)].diff(0)
        comps[(i, 2)] = f[(i, 1)].diff(0) - f[(i, 0)].diff(1)
    return _sym(comps, 3)


def _neg_grad(f: TestField) -> TestField:
    n = f.nvars
    return TestField(n, (n, n), {(i, j): -f[(i,)].diff(j) for i in range(n) for j in range(n)})


def _neg_rot_2d(f: TestField) -> TestField:
    return TestField(2, (2,), {(i,): f[(i, 0)].diff(1) - f[(i, 1)].diff(0) for i in range(2)})


def _neg_div_dev_3d(f: TestField) -> TestField:
    tr = (f[(0, 0)] + f[(1, 1)] + f[(2, 2)]) * Fraction(1, 3)
    out = {}
    for i in range(3):
        p = Poly(3)
        for j in range(3):
            d = f[(i, j)] - tr if i == j else f[(i, j)]
            p = p - d.diff(j)
        out[(i,)] = p
    return TestField(3, (3,), out)


# (label, dim) -> (test field shape, symmetric, adjoint)
ADJOINTS: dict[tuple[str, int], tuple[Callable[[int], tuple[int, ...]], bool, Callable[[TestField], TestField]]] = {
    ("hess", 2): (lambda n: (n, n), True, _divdiv),
    ("hess", 3): (lambda n: (n, n), True, _divdiv),
    ("rot", 2): (lambda n: (n,), False, _sym_rot_adjoint_2d),
    ("curl", 3): (lambda n: (n, n), False, _sym_curl_3d),
    ("div", 3): (lambda n: (n,), False, _neg_grad),
    ("symcurl", 2): (lambda n: (n, n), True, _neg_rot_2d),
    ("divdiv", 2): (lambda n: (), False, _hess),
    ("devgrad", 3): (lambda n: (n, n), False, _neg_div_dev_3d),
}

AUX_REASON = "coefficient-valued chain operator; checked exactly against simplicial boundaries by the kappa diagram"

NO_ADJOINT_REASON = {
    ("symcurl", 3): "U1 is not conforming, so cellwise sym curl is not the distributional one; covered by the duality identity",
    ("hat divdiv", 3): "defined through hat gradients rather than distributionally; covered by the duality identity",
}


class _Pairer:
    """Evaluates <atom, field> exactly through cached monomial moment tables."""

    def __init__(self, cx: SimplicialComplex, f: TestField, min_degree: int = 0):
        self.cx = cx
        self.f = f
        self.idx = f.indices()
        self.polys = [CompiledPoly(f[i]) for i in self.idx]
        # a generous degree lets every group share one moment table per simplex
        self.degree = max([min_degree] + [p.degree for p in self.polys if p.terms])
        self.pos = {i: k for k, i in enumerate(self.idx)}
        self._cell: dict = {}
        self._mean: dict = {}

    def cell_integrals(self, K) -> tuple[list[Fraction], list[list[Fraction]]]:
        """Integrals over K of each component and of x_k times each component."""
        if K not in self._cell:
            pts = self.cx.coords(K)
            n = self.cx.dim
            vol = abs(signed_volume_det(pts)) / factorial(n)
            table = moment_table(pts, self.degree + 1)
            plain = [vol * table.mean(p) for p in self.polys]
            moments = [[vol * table.shifted_mean(p, k) for k in range(n)] for p in self.polys]
            self._cell[K] = (plain, moments)
        return self._cell[K]

    def mean(self, simplex) -> list[Fraction]:
        if simplex not in self._mean:
            table = moment_table(self.cx.coords(simplex), self.degree)
            self._mean[simplex] = [table.mean(p) for p in self.polys]
        return self._mean[simplex]

    def _affine_integral(self, K, comp, c0, grad) -> Fraction:
        plain, moments = self.cell_integrals(K)
        c = self.pos[comp]
        return c0 * plain[c] + sum((g * m for g, m in zip(grad, moments[c])), Fraction(0))

    def _contract(self, simplex, u, v) -> Fraction:
        vals = self.mean(simplex)
        n = self.cx.dim
        return sum((u[i] * v[j] * vals[self.pos[(i, j)]] for i in range(n) for j in range(n)), Fraction(0))

    def pair(self, atom) -> Fraction:
        cx = self.cx
        k = atom.kind
        if k in (A.LAGRANGE_HAT, A.VEC_LAGRANGE_HAT):
            (v,) = atom.simplex
            comp = () if k is A.LAGRANGE_HAT else (atom.slot,)
            total = Fraction(0)
            for K in cx.cells_containing((v,)):
                g = hat_gradient(cx, K, v)
                c0 = 1 - sum((a * b for a, b in zip(g, cx.vertices[v])), Fraction(0))
                total += self._affine_integral(K, comp, c0, g)
            return total
        if k is A.VERTEX_SCALAR_DELTA:
            return self.mean(atom.simplex)[self.pos[()]]
        if k is A.VERTEX_VEC_DELTA:
            return self.mean(atom.simplex)[self.pos[(atom.slot,)]]
        if k in (A.EDGE_NN_DELTA, A.FACE_NN_DELTA):
            return self._contract(atom.simplex, atom.payload, atom.payload)
        if k is A.EDGE_NT_DELTA:
            e = atom.simplex
            t = [b - a for a, b in zip(*cx.coords(e))]
            return self._contract(e, atom.payload, t)
        if k is A.REGGE_NN:
            e = atom.simplex
            total = Fraction(0)
            for K in cx.cofaces(e):
                local = CELL_EDGES_2D.index((K.index(e[0]), K.index(e[1])))
                S = regge_dual_fields(tuple(cx.coords(K)))[local]
                plain, _ = self.cell_integrals(K)
                total += sum((S[i][j] * plain[self.pos[(i, j)]] for i in range(2) for j in range(2)), Fraction(0))
            return total
        if k in (A.MCS_EDGE, A.MCS_BUBBLE):
            total = Fraction(0)
            for K, local in _u1_support(cx, atom):
                parts = u1_dual_fields(tuple(cx.coords(K)))[local].parts
                plain, moments = self.cell_integrals(K)
                for i in range(3):
                    for j in range(3):
                        c = self.pos[(i, j)]
                        total += parts[0][i][j] * plain[c]
                        total += sum((parts[m + 1][i][j] * moments[c][m] for m in range(3)), Fraction(0))
            return total
        raise ValueError(f"oracle cannot pair {k.value}")


@dataclass
class OracleVerdict:
    operator: str
    status: str  # pass, fail, skipped
    trials: int = 0
    failures: int = 0
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_dict(self) -> dict:
        return asdict(self)


def adjointness_oracle(
    asm: ComplexAssembly,
    index: int,
    n_trials: int = 20,
    seed: int = 0,
    cutoff: bool | None = None,
    degree: int = 3,
) -> OracleVerdict:
    """Checks <D u, phi> = <u, D* phi> for every source atom u and random test fields phi.

    Plain variants multiply phi by the squared boundary cutoff so that phi and
    its gradient vanish on the boundary; boundary-condition variants are
    tested against unrestricted fields unless ``cutoff`` says otherwise.
    """
    cx = asm.mesh
    n = cx.dim
    label = asm.labels.get(index, f"op{index}")
    key = (label, n)
    if key not in ADJOINTS:
        reason = NO_ADJOINT_REASON.get(key, "no continuous adjoint for this operator")
        if label.startswith("aux"):
            reason = AUX_REASON
        return OracleVerdict(label, "skipped", reason=reason)
    shape_of, symmetric, adjoint = ADJOINTS[key]
    if cutoff is None:
        cutoff = not complex_kind(asm.kind).bc
    D = asm.ops[index]
    src, tgt = asm.spaces[index], asm.spaces[index + 1]
    col_entries = D.col_dicts()

    chi = boundary_cutoff(cx) if cutoff else None
    # one moment table per simplex serves the field and its adjoint
    top_degree = degree + (chi.degree() if chi else 0) + 1

    rng = random.Random(f"{seed}:{asm.kind}:{index}:{cx.name}")
    failures = 0
    for _ in range(n_trials):
        phi = random_field(rng, n, shape_of(n), symmetric, degree)
        if chi is not None:
            phi = phi.times(chi)
        p_tgt = _Pairer(cx, phi, top_degree)
        p_src = _Pairer(cx, adjoint(phi), top_degree)
        a_tgt: dict[int, Fraction] = {}
        for j, atom in enumerate(src.atoms):
            lhs = Fraction(0)
            for i, v in col_entries[j].items():
                if i not in a_tgt:
                    a_tgt[i] = p_tgt.pair(tgt.atoms[i])
                lhs += v * a_tgt[i]
            if lhs != p_src.pair(atom):
                failures += 1
                log.info("oracle mismatch: %s column %d (%s)", label, j, atom.label())
                break
    return OracleVerdict(label, "pass" if failures == 0 else "fail", n_trials, failures)


def run_oracle(asm: ComplexAssembly, n_trials: int = 20, seed: int = 0) -> list[OracleVerdict]:
    return [adjointness_oracle(asm, k, n_trials, seed) for k in range(len(asm.ops))]
