"""Exact sparse matrices over the rationals.

Ranks use fraction-free elimination on integer rows: each row is scaled to
a primitive integer vector, pivots are chosen by smallest row index and then
smallest column index, and rows are reduced by cross-multiplication followed
by division through the content. No floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Iterator, Mapping, Sequence


class ShapeError(ValueError):
    pass


class ExactMatrix:
    """Immutable sparse matrix; ``entries`` maps (row, col) to a nonzero Fraction."""

    __slots__ = ("rows", "cols", "_entries")

    def __init__(self, rows: int, cols: int, entries: Mapping[tuple[int, int], object] | None = None):
        if rows < 0 or cols < 0:
            raise ShapeError("negative shape")
        self.rows = rows
        self.cols = cols
        clean: dict[tuple[int, int], Fraction] = {}
        for (r, c), v in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise ShapeError(f"entry ({r}, {c}) outside {rows}x{cols}")
            v = Fraction(v)
            if v:
                clean[(r, c)] = v
        self._entries = clean

    @classmethod
    def from_triplets(cls, rows: int, cols: int, triplets: Iterable[tuple[int, int, object]]) -> "ExactMatrix":
        """Build from (row, col, value) triplets; repeated positions are summed."""
        acc: dict[tuple[int, int], Fraction] = {}
        for r, c, v in triplets:
            acc[(r, c)] = acc.get((r, c), Fraction(0)) + Fraction(v)
        return cls(rows, cols, acc)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[object]], cols: int | None = None) -> "ExactMatrix":
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        return cls(rows, cols, {(i, j): v for i, row in enumerate(data) for j, v in enumerate(row)})

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols)

    @classmethod
    def diagonal(cls, values: Sequence[object]) -> "ExactMatrix":
        return cls(len(values), len(values), {(i, i): v for i, v in enumerate(values)})

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self._entries)

    def items(self) -> Iterator[tuple[tuple[int, int], Fraction]]:
        return iter(self._entries.items())

    def entries(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._entries)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        r, c = key
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(key)
        return self._entries.get((r, c), Fraction(0))

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (r, c), v in self._entries.items():
            out[r][c] = v
        return out

    def row_dicts(self) -> list[dict[int, Fraction]]:
        out: list[dict[int, Fraction]] = [dict() for _ in range(self.rows)]
        for (r, c), v in self._entries.items():
            out[r][c] = v
        return out

    def col_dicts(self) -> list[dict[int, Fraction]]:
        out: list[dict[int, Fraction]] = [dict() for _ in range(self.cols)]
        for (r, c), v in self._entries.items():
            out[c][r] = v
        return out

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self._entries.items()})

    @property
    def T(self) -> "ExactMatrix":
        return self.transpose()

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        return compose(self, other)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        acc = dict(self._entries)
        for k, v in other._entries.items():
            acc[k] = acc.get(k, Fraction(0)) + v
        return ExactMatrix(self.rows, self.cols, acc)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, {k: -v for k, v in self._entries.items()})

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def scale(self, factor: object) -> "ExactMatrix":
        f = Fraction(factor)
        return ExactMatrix(self.rows, self.cols, {k: v * f for k, v in self._entries.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, frozenset(self._entries.items())))

    def __repr__(self) -> str:
        return f"ExactMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    def select(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "ExactMatrix":
        """Submatrix with the given row and column index lists (in that order)."""
        rmap = {r: i for i, r in enumerate(rows)} if rows is not None else None
        cmap = {c: j for j, c in enumerate(cols)} if cols is not None else None
        out = {}
        for (r, c), v in self._entries.items():
            i = r if rmap is None else rmap.get(r)
            j = c if cmap is None else cmap.get(c)
            if i is not None and j is not None:
                out[(i, j)] = v
        return ExactMatrix(
            self.rows if rows is None else len(rows),
            self.cols if cols is None else len(cols),
            out,
        )

    def with_entry(self, r: int, c: int, value: object) -> "ExactMatrix":
        acc = dict(self._entries)
        acc[(r, c)] = Fraction(value)
        return ExactMatrix(self.rows, self.cols, acc)

    def apply(self, vec: Sequence[object]) -> list[Fraction]:
        if len(vec) != self.cols:
            raise ShapeError("vector length does not match column count")
        out = [Fraction(0)] * self.rows
        for (r, c), v in self._entries.items():
            out[r] += v * vec[c]
        return out

    def apply_left(self, vec: Sequence[object]) -> list[Fraction]:
        """Row vector times matrix."""
        if len(vec) != self.rows:
            raise ShapeError("vector length does not match row count")
        out = [Fraction(0)] * self.cols
        for (r, c), v in self._entries.items():
            out[c] += vec[r] * v
        return out


def vstack(blocks: Sequence[ExactMatrix]) -> ExactMatrix:
    cols = blocks[0].cols
    out = {}
    off = 0
    for b in blocks:
        if b.cols != cols:
            raise ShapeError("vstack needs equal column counts")
        for (r, c), v in b.items():
            out[(r + off, c)] = v
        off += b.rows
    return ExactMatrix(off, cols, out)


def hstack(blocks: Sequence[ExactMatrix]) -> ExactMatrix:
    return vstack([b.transpose() for b in blocks]).transpose()


def compose(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    """Exact product A @ B."""
    if A.cols != B.rows:
        raise ShapeError(f"cannot compose {A.shape} with {B.shape}")
    brows = B.row_dicts()
    acc: dict[tuple[int, int], Fraction] = {}
    for (r, k), a in A.items():
        for c, b in brows[k].items():
            key = (r, c)
            acc[key] = acc.get(key, Fraction(0)) + a * b
    return ExactMatrix(A.rows, B.cols, acc)


def is_zero(M: ExactMatrix) -> bool:
    return M.nnz == 0


def _integer_rows(M: ExactMatrix) -> list[dict[int, int]]:
    rows = []
    for d in M.row_dicts():
        if not d:
            rows.append({})
            continue
        den = lcm(*(v.denominator for v in d.values()))
        ints = {c: int(v * den) for c, v in d.items()}
        g = 0
        for v in ints.values():
            g = gcd(g, v)
        rows.append({c: v // g for c, v in ints.items()})
    return rows


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    return {c: v // g for c, v in row.items()} if g > 1 else row


def row_echelon(M: ExactMatrix) -> dict[int, dict[int, int]]:
    """Pivot rows keyed by leading column, from fraction-free elimination."""
    pivots: dict[int, dict[int, int]] = {}
    for row in _integer_rows(M):
        while row:
            lead = min(row)
            piv = pivots.get(lead)
            if piv is None:
                if row[lead] < 0:
                    row = {c: -v for c, v in row.items()}
                pivots[lead] = row
                break
            a, b = row[lead], piv[lead]
            g = gcd(a, b)
            fa, fb = b // g, a // g
            new = {c: v * fa for c, v in row.items()}
            for c, v in piv.items():
                w = new.get(c, 0) - fb * v
                if w:
                    new[c] = w
                else:
                    new.pop(c, None)
            row = _primitive(new)
    return pivots


def rank(M: ExactMatrix) -> int:
    """Exact rank over the rationals."""
    if M.rows == 0 or M.cols == 0 or M.nnz == 0:
        return 0
    # eliminate along the shorter side
    if M.cols < M.rows:
        M = M.transpose()
    return len(row_echelon(M))


def kernel_dim(M: ExactMatrix) -> int:
    return M.cols - rank(M)


def is_nondegenerate(P: ExactMatrix) -> bool:
    if P.rows != P.cols:
        raise ShapeError(f"nondegeneracy needs a square matrix, got {P.shape}")
    return rank(P) == P.rows


def kernel_basis(M: ExactMatrix) -> list[list[Fraction]]:
    """Basis of the right null space; free columns in increasing order."""
    pivots = _rref(M.to_dense(), M.cols)
    pivot_cols = [c for c, _ in pivots]
    free = [c for c in range(M.cols) if c not in set(pivot_cols)]
    basis = []
    for f in free:
        v = [Fraction(0)] * M.cols
        v[f] = Fraction(1)
        for c, row in pivots:
            v[c] = -row[f]
        basis.append(v)
    return basis


def _rref(rows: list[list[Fraction]], ncols: int) -> list[tuple[int, list[Fraction]]]:
    A = [list(r) for r in rows]
    out: list[tuple[int, list[Fraction]]] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    for i in range(r):
        lead = next(c for c in range(ncols) if A[i][c] != 0)
        out.append((lead, A[i]))
    return out


def det(rows: Sequence[Sequence[object]]) -> Fraction:
    """Determinant of a small dense square matrix by exact elimination."""
    A = [[Fraction(v) for v in r] for r in rows]
    n = len(A)
    if any(len(r) != n for r in A):
        raise ShapeError("determinant needs a square matrix")
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        for i in range(c + 1, n):
            if A[i][c]:
                f = A[i][c] / A[c][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return d


def inverse(rows: Sequence[Sequence[object]]) -> list[list[Fraction]]:
    """Inverse of a small dense matrix; raises ZeroDivisionError if singular."""
    n = len(rows)
    A = [[Fraction(v) for v in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("matrix is singular")
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [v * inv for v in A[c]]
        for i in range(n):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return [r[n:] for r in A]


def solve(rows: Sequence[Sequence[object]], rhs: Sequence[object]) -> list[Fraction]:
    inv = inverse(rows)
    return [sum((a * Fraction(b) for a, b in zip(r, rhs)), Fraction(0)) for r in inv]


def smith_normal_form(M: ExactMatrix) -> list[int]:
    """Nonzero invariant factors of an integer matrix, in nondecreasing order.

    Independent of :func:`rank`: unit pivots are removed by unimodular row
    operations on a sparse integer copy; whatever remains is reduced by the
    textbook dense algorithm (Euclid on the corner entry plus a divisibility fix).
    """
    if any(v.denominator != 1 for _, v in M.items()):
        raise ValueError("Smith normal form needs an integer matrix")
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for (r, c), v in M.items():
        rows.setdefault(r, {})[c] = int(v)
        cols.setdefault(c, set()).add(r)
    units = 0
    while True:
        piv = None
        for r in sorted(rows):
            for c in sorted(rows[r]):
                if abs(rows[r][c]) == 1:
                    piv = (r, c)
                    break
            if piv:
                break
        if piv is None:
            break
        p, q = piv
        prow = rows.pop(p)
        u = prow[q]
        for c in prow:
            cols[c].discard(p)
        for i in list(cols[q]):
            row = rows[i]
            f = row[q] * u
            for c, v in prow.items():
                w = row.get(c, 0) - f * v
                if w:
                    if c not in row:
                        cols[c].add(i)
                    row[c] = w
                elif c in row:
                    del row[c]
                    cols[c].discard(i)
            if not row:
                del rows[i]
        del cols[q]
        units += 1
    rest_r = sorted(rows)
    rest_c = sorted({c for r in rest_r for c in rows[r]})
    dense = [[rows[r].get(c, 0) for c in rest_c] for r in rest_r]
    return [1] * units + sorted(_dense_snf(dense))


def _dense_snf(A: list[list[int]]) -> list[int]:
    m = len(A)
    n = len(A[0]) if m else 0
    diag: list[int] = []
    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        A[t], A[pi] = A[pi], A[t]
        for row in A:
            row[t], row[pj] = row[pj], row[t]
        while True:
            clean = True
            for i in range(t + 1, m):
                q = A[i][t] // A[t][t]
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                clean = clean and not A[i][t]
            for j in range(t + 1, n):
                q = A[t][j] // A[t][t]
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                clean = clean and not A[t][j]
            if clean:
                bad = next(
                    ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % A[t][t]),
                    None,
                )
                if bad is None:
                    break
                A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
                continue
            cands = [(abs(A[i][t]), i, t) for i in range(t, m) if A[i][t]]
            cands += [(abs(A[t][j]), t, j) for j in range(t, n) if A[t][j]]
            _, pi, pj = min(cands)
            A[t], A[pi] = A[pi], A[t]
            for row in A:
                row[t], row[pj] = row[pj], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def sequence_cohomology(dims: Sequence[int], ops: Sequence[ExactMatrix]) -> list[int]:
    """Rank-nullity cohomology of spaces dims[k] joined by ops[k]: dims[k] -> dims[k+1]."""
    if len(ops) != len(dims) - 1:
        raise ShapeError("need exactly one map between consecutive spaces")
    for k, op in enumerate(ops):
        if op.shape != (dims[k + 1], dims[k]):
            raise ShapeError(f"map {k} has shape {op.shape}, expected {(dims[k + 1], dims[k])}")
    r = [0] + [rank(op) for op in ops] + [0]
    return [dims[k] - r[k] - r[k + 1] for k in range(len(dims))]
