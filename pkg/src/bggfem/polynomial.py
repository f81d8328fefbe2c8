"""Sparse multivariate polynomials with exact rational coefficients.

Only what the element kernels and the quadrature oracle need: ring
operations, partial derivatives, point evaluation and exact means over
simplices of any dimension embedded in R^n.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, gcd
from operator import add, mul
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]


def _integer_terms(terms: Mapping[Exponent, Fraction]) -> tuple[int, list[tuple[Exponent, int]]]:
    den = 1
    for c in terms.values():
        den = den * c.denominator // gcd(den, c.denominator)
    return den, [(e, c.numerator * (den // c.denominator)) for e, c in terms.items()]


class Poly:
    """Polynomial in ``nvars`` variables stored as ``{exponent: coefficient}``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, Fraction] | None = None):
        self.nvars = nvars
        self.terms: dict[Exponent, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if c:
                    self.terms[e] = Fraction(c)

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def affine(cls, coeffs: Sequence) -> "Poly":
        """``coeffs = (c0, c1, ..., cn)`` for ``c0 + c1 x1 + ... + cn xn``."""
        n = len(coeffs) - 1
        p = cls.const(n, coeffs[0])
        for i in range(n):
            if coeffs[i + 1]:
                e = [0] * n
                e[i] = 1
                p.terms[tuple(e)] = Fraction(coeffs[i + 1])
        return p

    def copy(self) -> "Poly":
        out = Poly(self.nvars)
        out.terms = dict(self.terms)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        out = self.copy()
        for e, c in other.terms.items():
            v = out.terms.get(e, 0) + c
            if v:
                out.terms[e] = v
            else:
                out.terms.pop(e, None)
        return out

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        out = Poly(self.nvars)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = Fraction(other)
            out = Poly(self.nvars)
            if c:
                out.terms = {e: v * c for e, v in self.terms.items()}
            return out
        # multiply over common denominators in integers, one Fraction per output term
        d1, t1 = _integer_terms(self.terms)
        d2, t2 = _integer_terms(other.terms)
        acc: dict[Exponent, int] = {}
        for e1, c1 in t1:
            for e2, c2 in t2:
                e = tuple(map(add, e1, e2))
                acc[e] = acc.get(e, 0) + c1 * c2
        den = d1 * d2
        out = Poly(self.nvars)
        out.terms = {e: Fraction(v, den) for e, v in acc.items() if v}
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"Poly({self.nvars}, {self.terms!r})"

    def diff(self, i: int) -> "Poly":
        out: dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return Poly(self.nvars, out)

    def __call__(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for xi, k in zip(point, e):
                if k:
                    v *= Fraction(xi) ** k
            total += v
        return total

    def substitute_affine(self, maps: Sequence["Poly"]) -> "Poly":
        """Compose with ``x_i = maps[i]`` where each map is a polynomial in new variables."""
        m = maps[0].nvars
        powers: list[list[Poly]] = [[Poly.const(m, 1)] for _ in maps]
        out = Poly(m)
        for e, c in self.terms.items():
            term = Poly.const(m, c)
            for i, k in enumerate(e):
                if k:
                    pw = powers[i]
                    while len(pw) <= k:
                        pw.append(pw[-1] * maps[i])
                    term = term * pw[k]
            out = out + term
        return out


@lru_cache(maxsize=None)
def _reference_moment(exponent: Exponent) -> Fraction:
    # integral of s^a over the unit simplex {s_i >= 0, sum s_i <= 1}
    k = len(exponent)
    num = 1
    for a in exponent:
        num *= factorial(a)
    return Fraction(num, factorial(sum(exponent) + k))


def simplex_mean(p: Poly, vertices: Sequence[Sequence]) -> Fraction:
    """Exact mean value of ``p`` over the simplex spanned by ``vertices``."""
    k = len(vertices) - 1
    if k == 0:
        return p(vertices[0])
    x0 = [Fraction(c) for c in vertices[0]]
    edges = [[Fraction(c) - a for c, a in zip(v, x0)] for v in vertices[1:]]
    maps = [Poly.affine([x0[i]] + [edges[j][i] for j in range(k)]) for i in range(p.nvars)]
    q = p.substitute_affine(maps)
    total = sum((c * _reference_moment(e) for e, c in q.terms.items()), Fraction(0))
    return total * factorial(k)


def poly_matrix_zero(nvars: int, rows: int, cols: int) -> list[list[Poly]]:
    return [[Poly(nvars) for _ in range(cols)] for _ in range(rows)]


def monomials(nvars: int, degree: int) -> Iterable[Exponent]:
    """All exponents of total degree at most ``degree`` in graded order."""
    def rec(n: int, d: int) -> Iterable[Exponent]:
        if n == 0:
            yield ()
            return
        for a in range(d + 1):
            for rest in rec(n - 1, d - a):
                yield (a,) + rest

    for d in range(degree + 1):
        for e in rec(nvars, d):
            if sum(e) == d:
                yield e


class CompiledPoly:
    """Integer-coefficient form of a polynomial for fast exact point evaluation."""

    __slots__ = ("nvars", "denom", "degree", "terms")

    def __init__(self, p: Poly):
        self.nvars = p.nvars
        den = 1
        for c in p.terms.values():
            den = den * c.denominator // gcd(den, c.denominator)
        self.denom = den
        self.degree = p.degree()
        self.terms = [(e, int(c * den), sum(e)) for e, c in p.terms.items()]


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for a in range(total + 1):
        for rest in _compositions(total - a, parts - 1):
            yield (a,) + rest


@lru_cache(maxsize=None)
def grundmann_moller_levels(n: int, s: int) -> tuple[tuple[Fraction, int, tuple[tuple[int, ...], ...]], ...]:
    """Levels (weight, denominator, barycentric numerators) of the rule exact to degree 2s + 1.

    Weights are normalized to sum to one, so the rule computes means.
    """
    d = 2 * s + 1
    levels = []
    for i in range(s + 1):
        w = Fraction((-1) ** i * (d + n - 2 * i) ** d, 2 ** (2 * s) * factorial(i) * factorial(d + n - i))
        pts = tuple(tuple(2 * b + 1 for b in beta) for beta in _compositions(s - i, n + 1))
        levels.append((w, d + n - 2 * i, pts))
    total = sum(w * len(pts) for w, _, pts in levels)
    return tuple((w / total, den, pts) for w, den, pts in levels)


def grundmann_moller(n: int, s: int) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """Barycentric nodes and mean-value weights, one entry per node."""
    return [
        (tuple(Fraction(a, den) for a in nums), w) for w, den, pts in grundmann_moller_levels(n, s) for nums in pts
    ]


class PolyBatch:
    """Several polynomials evaluated together at integer-scaled points.

    ``evaluate_int(X, q)`` returns integers S_j with p_j(X / q) = S_j / (denom_j * q^degree).
    """

    def __init__(self, polys: Sequence[CompiledPoly]):
        self.polys = list(polys)
        self.degree = max((p.degree for p in self.polys), default=0)
        nvars = self.polys[0].nvars if self.polys else 0
        # every monomial up to the degree, each built from a parent by one multiplication
        order = list(monomials(nvars, self.degree))
        pos = {e: i for i, e in enumerate(order)}
        self.recipe = []
        for e in order[1:]:
            v = next(i for i, a in enumerate(e) if a)
            parent = list(e)
            parent[v] -= 1
            self.recipe.append((pos[tuple(parent)], v))
        self.qexp = [self.degree - sum(e) for e in order]
        self.rows = []
        for p in self.polys:
            self.rows.append(([pos[e] for e, _, _ in p.terms], [c for _, c, _ in p.terms]))
        self.denoms = [p.denom for p in self.polys]

    def evaluate_int(self, X: Sequence[int], q: int) -> list[int]:
        qpow = [1]
        for _ in range(self.degree):
            qpow.append(qpow[-1] * q)
        W = [1]
        for parent, v in self.recipe:
            W.append(W[parent] * X[v])
        H = [w * qpow[k] for w, k in zip(W, self.qexp)]
        return [sum(map(mul, coefs, [H[i] for i in idx])) for idx, coefs in self.rows]


def quadrature_means(
    polys: "Sequence[CompiledPoly] | PolyBatch", vertices: Sequence[Sequence], extra: int = 0
) -> list[Fraction]:
    """Exact means over a simplex of each polynomial, by a rule of sufficient degree.

    With ``extra = 1`` the means of ``x_k * p`` are appended for every coordinate
    k after the plain means, ordered poly-major.
    """
    k = len(vertices) - 1
    n = len(vertices[0])
    batch = polys if isinstance(polys, PolyBatch) else PolyBatch(polys)
    d = batch.degree
    verts = [[Fraction(c) for c in v] for v in vertices]
    Q = 1
    for v in verts:
        for c in v:
            Q = Q * c.denominator // gcd(Q, c.denominator)
    V = [[int(c * Q) for c in v] for v in verts]
    if k == 0:
        levels = ((Fraction(1), 1, ((1,),)),)
    else:
        levels = grundmann_moller_levels(k, (d + extra) // 2)
    m = len(batch.polys)
    plain = [Fraction(0)] * m
    moments = [[Fraction(0)] * n for _ in range(m)]
    for w, den, pts in levels:
        q = den * Q
        sums = [0] * m
        msums = [[0] * n for _ in range(m)]
        for nums in pts:
            X = [sum(a * V[j][c] for j, a in enumerate(nums)) for c in range(n)]
            for j, S in enumerate(batch.evaluate_int(X, q)):
                sums[j] += S
                if extra:
                    row = msums[j]
                    for c in range(n):
                        row[c] += S * X[c]
        qd = q**d
        for j in range(m):
            plain[j] += w * Fraction(sums[j], batch.denoms[j] * qd)
            if extra:
                for c in range(n):
                    moments[j][c] += w * Fraction(msums[j][c], batch.denoms[j] * qd * q)
    if not extra:
        return plain
    out = list(plain)
    for row in moments:
        out.extend(row)
    return out


class MomentTable:
    """Exact means over one simplex of every monomial up to ``degree``, over a common denominator."""

    __slots__ = ("degree", "num", "den")

    def __init__(self, vertices: Sequence[Sequence], degree: int):
        # mean of x^e = e! k! / (|e| + k)! * [t^e] prod_j 1 / (1 - t.v_j), Dirichlet moments
        k = len(vertices) - 1
        n = len(vertices[0])
        verts = [[Fraction(c) for c in v] for v in vertices]
        Q = 1
        for v in verts:
            for c in v:
                Q = Q * c.denominator // gcd(Q, c.denominator)
        V = [[int(c * Q) for c in v] for v in verts]
        exps = list(monomials(n, degree))
        units = [tuple(int(i == a) for i in range(n)) for a in range(n)]
        zero = (0,) * n
        series = {e: int(e == zero) for e in exps}
        for v in V:
            # divide the series by 1 - t.v; exps lists every e - unit_a before e
            out: dict[Exponent, int] = {}
            for e in exps:
                val = series[e]
                for a in range(n):
                    if e[a] and v[a]:
                        val += v[a] * out[tuple(x - u for x, u in zip(e, units[a]))]
                out[e] = val
            series = out
        top = factorial(degree + k)
        self.degree = degree
        self.den = top * Q**degree
        self.num = {}
        for e in exps:
            d = sum(e)
            ef = 1
            for x in e:
                ef *= factorial(x)
            self.num[e] = ef * factorial(k) * series[e] * (top // factorial(d + k)) * Q ** (degree - d)

    def mean(self, p: CompiledPoly) -> Fraction:
        num = self.num
        return Fraction(sum(c * num[e] for e, c, _ in p.terms), p.denom * self.den)

    def shifted_mean(self, p: CompiledPoly, k: int) -> Fraction:
        """Mean of x_k * p."""
        num = self.num
        s = sum(c * num[e[:k] + (e[k] + 1,) + e[k + 1 :]] for e, c, _ in p.terms)
        return Fraction(s, p.denom * self.den)


_MOMENT_CACHE: dict[tuple, MomentTable] = {}
_MOMENT_CACHE_LIMIT = 50000


def moment_table(vertices: Sequence[Sequence], degree: int) -> MomentTable:
    """Cached moment table, rebuilt at a higher degree when needed."""
    key = tuple(tuple(Fraction(c) for c in v) for v in vertices)
    table = _MOMENT_CACHE.get(key)
    if table is None or table.degree < degree:
        if len(_MOMENT_CACHE) >= _MOMENT_CACHE_LIMIT:
            _MOMENT_CACHE.clear()
        table = MomentTable(vertices, max(degree, table.degree if table else 0))
        _MOMENT_CACHE[key] = table
    return table
