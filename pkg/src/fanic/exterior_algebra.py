"""Graded exterior algebras A(σ) = ⋀N(σ)_Q and finite modules over them.

A ``Module`` is a finite-dimensional bigraded Q-vector space with an explicit
cell basis and one action matrix per vector of its frame (a Z-basis of
N(σ)).  Left multiplication by a frame vector lowers the second degree j by
one.  Modules are immutable once built.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Hashable, Sequence

from .lattice_fan import Frame
from .linalg import Echelon, SparseMap, Vec, vadd, vscale

Monomial = tuple[int, ...]


@lru_cache(maxsize=None)
def monomials(n: int) -> tuple[Monomial, ...]:
    """All sorted index subsets of range(n), by (size, lex)."""
    return tuple(c for k in range(n + 1) for c in itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def monomial_index(n: int) -> dict[Monomial, int]:
    return {m: i for i, m in enumerate(monomials(n))}


def wedge(u: Monomial, v: Monomial) -> tuple[int, Monomial] | None:
    """e_u ∧ e_v as (sign, sorted monomial), or None when it vanishes."""
    if set(u) & set(v):
        return None
    seq = list(u) + list(v)
    inversions = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return (-1) ** inversions, tuple(sorted(seq))


class ModuleError(ValueError):
    pass


class Module:
    """Finite bigraded module over the exterior algebra of ``frame``."""

    def __init__(self, frame: Frame, labels: list[Hashable], bideg: list[tuple[int, int]],
                 act: list[SparseMap]):
        if len(act) != frame.dim:
            raise ModuleError("one action matrix per frame vector is required")
        self.frame = frame
        self.labels = labels
        self.bideg = bideg
        self.act = act
        self._vec_cache: dict = {}

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def act_vec(self, v: Sequence) -> SparseMap:
        """Left multiplication by an arbitrary n ∈ N(σ)_Q."""
        key = tuple(v)
        hit = self._vec_cache.get(key)
        if hit is not None:
            return hit
        c = self.frame.coords(v)
        if c is None:
            raise ModuleError(f"{key} does not lie in the lattice of this module")
        nz = [k for k, x in enumerate(c) if x]
        if len(nz) == 1 and c[nz[0]] == 1:
            self._vec_cache[key] = self.act[nz[0]]
            return self.act[nz[0]]
        out = SparseMap.zero(len(self), len(self))
        for k, x in enumerate(c):
            if x:
                out = out + self.act[k].scaled(x)
        self._vec_cache[key] = out
        return out

    def by_degree(self) -> dict[tuple[int, int], list[int]]:
        out: dict[tuple[int, int], list[int]] = {}
        for i, d in enumerate(self.bideg):
            out.setdefault(d, []).append(i)
        return out

    def dims(self) -> dict[tuple[int, int], int]:
        return {k: len(v) for k, v in self.by_degree().items()}

    def validate(self) -> None:
        """Degree behaviour, anticommutativity and nilpotence of the action."""
        for m in self.act:
            for j, col in enumerate(m.cols):
                i0, j0 = self.bideg[j]
                for t in col:
                    if self.bideg[t] != (i0, j0 - 1):
                        raise ModuleError(f"action does not lower j at cell {self.labels[j]}")
        for a, b in itertools.combinations_with_replacement(range(len(self.act)), 2):
            s = self.act[a] @ self.act[b]
            if a != b:
                s = s + self.act[b] @ self.act[a]
            if not s.is_zero():
                raise ModuleError("action matrices do not anticommute")

    def __repr__(self):
        return f"<Module dim {len(self)} over A of rank {self.frame.dim}>"


def zero_module(frame: Frame) -> Module:
    return Module(frame, [], [], [SparseMap.zero(0, 0) for _ in range(frame.dim)])


class FreeModule(Module):
    """⊕_g A(frame)·g with cells (g, T) standing for e_T·g."""

    def __init__(self, frame: Frame, gens: list[tuple[Hashable, tuple[int, int]]]):
        s = frame.dim
        monos = monomials(s)
        midx = monomial_index(s)
        labels, bideg = [], []
        for g, (i, j) in gens:
            for T in monos:
                labels.append((g, T))
                bideg.append((i, j - len(T)))
        nm = len(monos)
        act = []
        for k in range(s):
            cols = []
            for gi in range(len(gens)):
                for T in monos:
                    w = wedge((k,), T)
                    cols.append({} if w is None else {gi * nm + midx[w[1]]: w[0]})
            act.append(SparseMap(len(labels), cols))
        super().__init__(frame, labels, bideg, act)
        self.gens = gens
        self.gen_index = {g: n for n, (g, _) in enumerate(gens)}

    def cell(self, gen: Hashable, T: Monomial = ()) -> int:
        return self.gen_index[gen] * len(monomials(self.frame.dim)) + monomial_index(self.frame.dim)[T]


def act_monomial(target: Module, vectors: Sequence[Sequence[int]], T: Monomial, x: Vec) -> Vec:
    """(v_{t1} ∧ … ∧ v_{tk}) · x for T = (t1 < … < tk), acting on ``target``."""
    for t in reversed(T):
        x = target.act_vec(vectors[t]).apply(x)
        if not x:
            break
    return x


def free_map(src: FreeModule, target: Module, images: Sequence[Vec]) -> SparseMap:
    """The A(src)-linear map sending generator n to images[n]."""
    rows = src.frame.rows
    monos = monomials(src.frame.dim)
    cols = []
    for n in range(len(src.gens)):
        for T in monos:
            cols.append(act_monomial(target, rows, T, images[n]))
    return SparseMap(len(target), cols)


class InducedModule(Module):
    """M_{A(ρ)} = A(ρ) ⊗_{A(σ)} M with cells (T, m) meaning c_T ⊗ m.

    The complement c is taken greedily from the target frame; the cell
    (∅, m) is the image of m under the natural inclusion.
    """

    def __init__(self, base: Module, frame: Frame):
        src = base.frame
        comp: list[tuple[int, ...]] = []
        e = Echelon()
        for v in src.rows:
            e.add({j: x for j, x in enumerate(v) if x})
        for v in frame.rows:
            if e.add({j: x for j, x in enumerate(v) if x}):
                comp.append(v)
        if len(src.rows) + len(comp) != frame.dim or not all(frame.contains(v) for v in src.rows):
            raise ModuleError("source lattice is not contained in the target lattice")
        self.base = base
        self.complement = comp
        nc = len(comp)
        monos = monomials(nc)
        midx = monomial_index(nc)
        n = len(base)
        labels = [(T, base.labels[m]) for T in monos for m in range(n)]
        bideg = [(base.bideg[m][0], base.bideg[m][1] - len(T)) for T in monos for m in range(n)]
        mixed = Frame(list(src.rows) + comp, frame.r)
        act = []
        for v in frame.rows:
            c = mixed.coords(v)
            cols: list[Vec] = [{} for _ in range(len(labels))]
            for ti, T in enumerate(monos):
                sign_T = -1 if len(T) % 2 else 1
                for m in range(n):
                    out: Vec = {}
                    # frame part of N(σ): (−1)^{|T|} c_T ⊗ b·m
                    for k in range(src.dim):
                        if c[k]:
                            for mm, x in base.act[k].cols[m].items():
                                vadd(out, {ti * n + mm: x}, sign_T * c[k])
                    # complement part: c_l ∧ c_T ⊗ m
                    for l in range(nc):
                        b = c[src.dim + l]
                        if b:
                            w = wedge((l,), T)
                            if w is not None:
                                vadd(out, {midx[w[1]] * n + m: w[0]}, b)
                    cols[ti * n + m] = out
            act.append(SparseMap(len(labels), cols))
        super().__init__(frame, labels, bideg, act)
        self.cmonos = monos

    def embed(self, m: int) -> int:
        """Index of the cell (∅, m)."""
        return m


_induce_cache: dict = {}


def induce(base: Module, frame: Frame) -> Module:
    """Extension of scalars to the exterior algebra of ``frame`` (cached)."""
    if base.frame is frame:
        return base
    key = (id(base), frame)
    hit = _induce_cache.get(key)
    if hit is not None and hit[0] is base:
        return hit[1]
    ind = InducedModule(base, frame)
    _induce_cache[key] = (base, ind)
    return ind


def clear_caches() -> None:
    _induce_cache.clear()


def extend_scalars(ind: Module, g: SparseMap, target: Module) -> SparseMap:
    """For g: M → X A(σ)-linear, the A(ρ)-linear c_T ⊗ m ↦ c_T · g(m).

    ``ind`` is induce(M, ρ-frame) (or M itself when the frames agree) and X is
    a module over an algebra containing A(ρ).
    """
    if not isinstance(ind, InducedModule):
        return g
    n = len(ind.base)
    cols = []
    for T in ind.cmonos:
        for m in range(n):
            cols.append(act_monomial(target, ind.complement, T, g.cols[m]) if T else dict(g.cols[m]))
    return SparseMap(len(target), cols)


def induce_hom(f: SparseMap, src: Module, dst: Module, frame: Frame) -> SparseMap:
    """f ⊗ id between induced modules sharing a frame (A(σ)-linear f: src → dst)."""
    si, di = induce(src, frame), induce(dst, frame)
    if si is src:
        return f
    emb = SparseMap(len(di), [{di.embed(i) if isinstance(di, InducedModule) else i: x
                                for i, x in col.items()} for col in f.cols])
    return extend_scalars(si, emb, di)


class DirectSum(Module):
    """Block sum of modules over a common frame; ``offsets[k]`` locates summand k."""

    def __init__(self, frame: Frame, parts: list[Module], keys: list[Hashable] | None = None):
        self.parts = parts
        self.keys = keys if keys is not None else list(range(len(parts)))
        self.offsets = []
        labels, bideg = [], []
        for key, p in zip(self.keys, parts):
            if p.frame is not frame:
                raise ModuleError("summands must share the frame")
            self.offsets.append(len(labels))
            labels.extend((key, lab) for lab in p.labels)
            bideg.extend(p.bideg)
        act = []
        for k in range(frame.dim):
            cols = []
            for off, p in zip(self.offsets, parts):
                for col in p.act[k].cols:
                    cols.append({off + i: x for i, x in col.items()})
            act.append(SparseMap(len(labels), cols))
        super().__init__(frame, labels, bideg, act)

    def shift(self, k: int, v: Vec) -> Vec:
        off = self.offsets[k]
        return {off + i: x for i, x in v.items()}

    def block(self, k: int) -> range:
        return range(self.offsets[k], self.offsets[k] + len(self.parts[k]))


def embed_cols(g: SparseMap, nrows: int, offset: int) -> SparseMap:
    return SparseMap(nrows, [{offset + i: x for i, x in c.items()} for c in g.cols])


def scale_map(g: SparseMap, c) -> SparseMap:
    return SparseMap(g.nrows, [vscale(col, c) for col in g.cols])
