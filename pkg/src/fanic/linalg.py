"""Exact sparse linear algebra over Q.

Vectors are dicts ``{index: coefficient}`` with no explicit zeros.
Coefficients are ``int`` or ``gmpy2.mpq`` (``Fraction`` input also works); pivots equal to
``±1`` keep integer data integral, which is the common case here.
"""

from __future__ import annotations

import heapq
from typing import Iterable, Iterator

from gmpy2 import mpq

Vec = dict


class DimensionMismatch(ValueError):
    pass


def vadd(u: Vec, v: Vec, c=1) -> Vec:
    """In place ``u += c*v``."""
    for k, x in v.items():
        y = u.get(k, 0) + c * x
        if y:
            u[k] = y
        else:
            u.pop(k, None)
    return u


def vscale(v: Vec, c) -> Vec:
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


def _div(x, p):
    if p == 1:
        return x
    if p == -1:
        return -x
    return mpq(x) / p


class SparseMap:
    """Linear map stored column-wise: ``cols[j]`` is the image of basis vector j."""

    __slots__ = ("nrows", "cols")

    def __init__(self, nrows: int, cols: list[Vec]):
        self.nrows = nrows
        self.cols = cols

    @property
    def ncols(self) -> int:
        return len(self.cols)

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "SparseMap":
        return cls(nrows, [{} for _ in range(ncols)])

    @classmethod
    def identity(cls, n: int) -> "SparseMap":
        return cls(n, [{j: 1} for j in range(n)])

    @classmethod
    def from_dense(cls, rows: list[list]) -> "SparseMap":
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        cols = [{i: rows[i][j] for i in range(nrows) if rows[i][j]} for j in range(ncols)]
        return cls(nrows, cols)

    def to_dense(self) -> list[list]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, x in col.items():
                out[i][j] = x
        return out

    def apply(self, v: Vec) -> Vec:
        out: Vec = {}
        for j, x in v.items():
            vadd(out, self.cols[j], x)
        return out

    def __matmul__(self, other: "SparseMap") -> "SparseMap":
        if other.nrows != self.ncols:
            raise DimensionMismatch(f"{self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        return SparseMap(self.nrows, [self.apply(c) for c in other.cols])

    def __add__(self, other: "SparseMap") -> "SparseMap":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise DimensionMismatch("shape mismatch in addition")
        return SparseMap(self.nrows, [vadd(dict(a), b) for a, b in zip(self.cols, other.cols)])

    def __neg__(self) -> "SparseMap":
        return self.scaled(-1)

    def __sub__(self, other: "SparseMap") -> "SparseMap":
        return self + (-other)

    def scaled(self, c) -> "SparseMap":
        return SparseMap(self.nrows, [vscale(col, c) for col in self.cols])

    def is_zero(self) -> bool:
        return not any(self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMap):
            return NotImplemented
        return self.nrows == other.nrows and self.cols == other.cols

    def restrict(self, src: list[int], dst: list[int]) -> "SparseMap":
        """Block with columns ``src`` and rows ``dst`` (re-indexed)."""
        pos = {g: k for k, g in enumerate(dst)}
        cols = []
        for j in src:
            cols.append({pos[i]: x for i, x in self.cols[j].items() if i in pos})
        return SparseMap(len(dst), cols)

    def __repr__(self) -> str:
        return f"SparseMap({self.nrows}x{self.ncols}, nnz={sum(map(len, self.cols))})"


class Echelon:
    """Row-echelon basis of a subspace of Q^n.

    Each stored row has leading coefficient 1 at its pivot, the smallest
    index in its support.  With ``track=True`` every row carries a tag
    vector recording how it was combined from the inserted vectors, which
    gives coordinates and kernels.
    """

    def __init__(self, track: bool = False):
        self.rows: dict[int, Vec] = {}
        self.track = track
        self.tags: dict[int, Vec] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v: Vec, tag: Vec | None = None) -> tuple[Vec, Vec | None]:
        """Normal form of ``v`` modulo the span; support avoids all pivots."""
        rows = self.rows
        v = dict(v)
        if tag is not None:
            tag = dict(tag)
        heap = [k for k in v if k in rows]
        heapq.heapify(heap)
        while heap:
            k = heapq.heappop(heap)
            c = v.get(k)
            if not c:
                continue
            for j, x in rows[k].items():
                y = v.get(j, 0) - c * x
                if y:
                    if j not in v and j in rows:
                        heapq.heappush(heap, j)
                    v[j] = y
                else:
                    v.pop(j, None)
            if tag is not None:
                vadd(tag, self.tags[k], -c)
        return v, tag

    def add(self, v: Vec, tag: Vec | None = None) -> bool:
        """Insert ``v``; returns True when the span grew."""
        v, tag = self.reduce(v, tag)
        if not v:
            self.residual = tag
            return False
        p = min(v)
        c = v[p]
        if c != 1:
            v = {k: _div(x, c) for k, x in v.items()}
            if tag is not None:
                tag = {k: _div(x, c) for k, x in tag.items()}
        self.rows[p] = v
        if self.track:
            self.tags[p] = tag if tag is not None else {}
        self.residual = None
        return True

    def contains(self, v: Vec) -> bool:
        return not self.reduce(v)[0]

    def pivots(self) -> list[int]:
        return sorted(self.rows)

    def basis(self) -> list[Vec]:
        return [self.rows[p] for p in sorted(self.rows)]

    def copy(self) -> "Echelon":
        e = Echelon(self.track)
        e.rows = dict(self.rows)
        e.tags = dict(self.tags)
        return e


def rank(m: SparseMap) -> int:
    e = Echelon()
    for col in m.cols:
        if col:
            e.add(col)
    return len(e)


def kernel(m: SparseMap) -> list[Vec]:
    """Basis of the null space, as vectors over the column indices."""
    e = Echelon(track=True)
    out = []
    for j, col in enumerate(m.cols):
        if not e.add(col, {j: 1}):
            out.append(e.residual)
    return out


def image_basis(m: SparseMap) -> Echelon:
    e = Echelon()
    for col in m.cols:
        if col:
            e.add(col)
    return e


def span(vectors: Iterable[Vec]) -> Echelon:
    e = Echelon()
    for v in vectors:
        e.add(v)
    return e


def subspace_sum(a: Echelon, b: Echelon) -> Echelon:
    e = a.copy()
    e.track = False
    for v in b.basis():
        e.add(v)
    return e


def intersection(a: Echelon, b: Echelon) -> Echelon:
    """Intersection of two subspaces, read off from dependencies of A then B."""
    av, bv = a.basis(), b.basis()
    e = Echelon(track=True)
    for k, v in enumerate(av):
        e.add(v, {("a", k): 1})
    out = Echelon()
    for i, v in enumerate(bv):
        if not e.add(v, {("b", i): 1}):
            # 0 = sum over tags; the A-part is minus the B-part
            w: Vec = {}
            for (side, k), c in e.residual.items():
                if side == "a":
                    vadd(w, av[k], -c)
            out.add(w)
    return out


def quotient_basis(sub: Echelon, n: int) -> list[int]:
    """Coordinates spanning a complement of ``sub`` in Q^n (non-pivot indices)."""
    piv = sub.rows
    return [i for i in range(n) if i not in piv]


def solve_columns(m: SparseMap, targets: list[Vec]) -> list[Vec] | None:
    """Find x with m x = t for every target; None if some target is unreachable."""
    e = Echelon(track=True)
    for j, col in enumerate(m.cols):
        e.add(col, {j: 1})
    out = []
    for t in targets:
        r, tag = e.reduce(t, {})
        if r:
            return None
        out.append(vscale(tag, -1))
    return out


def dense_solve(rows: list[list], rhs: list) -> list | None:
    """Solve a small dense system exactly; returns one solution or None."""
    n = len(rows)
    m = len(rows[0]) if rows else 0
    a = [[mpq(x) for x in r] + [mpq(b)] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, n) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(n):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_cols.append(c)
        r += 1
    if any(a[i][m] for i in range(r, n)):
        return None
    x = [mpq(0)] * m
    for i, c in enumerate(piv_cols):
        x[c] = a[i][m]
    return x


def dense_rank(rows: list[list]) -> int:
    cols = len(rows[0]) if rows else 0
    return rank(SparseMap.from_dense(rows)) if cols else 0


def det(rows: list[list]) -> mpq:
    n = len(rows)
    a = [[mpq(x) for x in r] for r in rows]
    d = mpq(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return mpq(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        d *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d


def nullspace(rows: list[list], ncols: int) -> list[list[mpq]]:
    """Rational basis of {x : rows @ x = 0}."""
    m = SparseMap(len(rows), [{i: rows[i][j] for i in range(len(rows)) if rows[i][j]} for j in range(ncols)])
    out = []
    for v in kernel(m):
        out.append([mpq(v.get(j, 0)) for j in range(ncols)])
    return out


def iter_blocks(keys: Iterable) -> Iterator:
    yield from sorted(set(keys))


def solve_affine(equations: Iterable[tuple[Vec, object]], nvars: int) -> list | None:
    """One solution of the sparse system {Σ a_k x_k = c}; free variables are set to 0.

    Returns None when the system is inconsistent.
    """
    const = nvars
    e = Echelon()
    for row, c in equations:
        v = dict(row)
        if c:
            v[const] = -c
        red, _ = e.reduce(v)
        if not red:
            continue
        if min(red) == const:
            return None
        e.add(red)
    x: list = [0] * nvars
    for p in sorted(e.rows, reverse=True):
        row = e.rows[p]
        val = -row.get(const, 0)
        for k, a in row.items():
            if k != p and k != const:
                val -= a * x[k]
        x[p] = val
    return x
