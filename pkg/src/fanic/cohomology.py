"""Bigraded cochain complexes, Betti tables, the Γ functor and induced maps."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import comb
from typing import TYPE_CHECKING

from .exterior_algebra import DirectSum, Module, extend_scalars, induce, induce_hom
from .lattice_fan import Fan, Frame
from .linalg import Echelon, SparseMap, kernel, rank, vadd

if TYPE_CHECKING:
    from .gem_complex import GemMap, GemObject


class NotAComplex(ValueError):
    pass


class NotChainMap(ValueError):
    pass


Bidegree = tuple[int, int]


class BigradedComplex:
    """Cells with bidegrees (p, q) and a differential raising p by one."""

    def __init__(self, bideg: list[Bidegree], d: SparseMap, labels: list | None = None,
                 check: bool = True):
        self.bideg = list(bideg)
        self.d = d
        self.labels = labels
        self.blocks: dict[Bidegree, list[int]] = {}
        for i, b in enumerate(self.bideg):
            self.blocks.setdefault(b, []).append(i)
        if check:
            self.validate()

    def __len__(self) -> int:
        return len(self.bideg)

    def validate(self) -> None:
        for j, col in enumerate(self.d.cols):
            p, q = self.bideg[j]
            for i in col:
                if self.bideg[i] != (p + 1, q):
                    raise NotAComplex(f"differential is not of degree (1,0) at cell {j}")
        if not (self.d @ self.d).is_zero():
            raise NotAComplex("d∘d ≠ 0")

    def block(self, p: int, q: int) -> list[int]:
        return self.blocks.get((p, q), [])

    def d_block(self, p: int, q: int) -> SparseMap:
        return self.d.restrict(self.block(p, q), self.block(p + 1, q))

    def dims(self) -> dict[Bidegree, int]:
        return {k: len(v) for k, v in sorted(self.blocks.items())}

    def betti(self, jobs: int = 1) -> "BettiTable":
        return betti(self, jobs)


class BettiTable(dict):
    """(p, q) ↦ dim H^p_q, storing nonzero entries only."""

    def rows(self) -> list[tuple[int, int, int]]:
        return [(p, q, d) for (p, q), d in sorted(self.items()) if d]

    def to_tsv(self) -> str:
        return "".join(f"{p}\t{q}\t{d}\n" for p, q, d in self.rows())

    def to_json(self) -> str:
        return json.dumps({"betti": [list(r) for r in self.rows()]})

    def get_dim(self, p: int, q: int) -> int:
        return self.get((p, q), 0)

    def slice(self, q: int) -> dict[int, int]:
        return {p: d for (p, qq), d in self.items() if qq == q and d}


def _block_rank(m: SparseMap) -> int:
    return rank(m)


def betti(c: BigradedComplex, jobs: int = 1) -> BettiTable:
    keys = sorted(c.blocks)
    mats = [c.d_block(p, q) for p, q in keys]
    if jobs > 1 and len(mats) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            ranks = list(ex.map(_block_rank, mats))
    else:
        ranks = [rank(m) for m in mats]
    rk = dict(zip(keys, ranks))
    out = BettiTable()
    for (p, q) in keys:
        h = len(c.blocks[(p, q)]) - rk[(p, q)] - rk.get((p - 1, q), 0)
        if h:
            out[(p, q)] = h
    return out


def euler_oracle_top(fan: Fan, q: int) -> int:
    """Σ_p (−1)^p f_p · C(r−p, −q): the alternating sum forced for Γ(ic_t)."""
    if q > 0:
        return 0
    r = fan.rank
    return sum((-1) ** p * f * comb(r - p, -q) for p, f in enumerate(fan.f_vector) if r - p >= -q)


def euler_characteristic(table: BettiTable, q: int) -> int:
    return sum((-1) ** p * d for (p, qq), d in table.items() if qq == q)


# ---------------------------------------------------------------------------
# Γ


def full_frame(r: int) -> Frame:
    return Frame([tuple(int(i == j) for j in range(r)) for i in range(r)], r)


class Gamma(BigradedComplex):
    """Γ(L) = ⊕_σ L(σ)_A, with the cone summands kept addressable."""

    def __init__(self, L: "GemObject", check: bool = True):
        fan = L.fan
        frame = full_frame(fan.rank)
        cones = [s for s in range(len(fan)) if len(L.mods[s])]
        parts = [induce(L.mods[s], frame) for s in cones]
        total = DirectSum(frame, parts, cones)
        pos = {s: k for k, s in enumerate(cones)}
        cols: list[dict] = [{} for _ in range(len(total))]
        for (s, t), g in L.d.items():
            if s not in pos or t not in pos or g.is_zero():
                continue
            a, b = pos[s], pos[t]
            inc = SparseMap(len(total), [{total.offsets[b] + i: x for i, x in col.items()} for col in g.cols])
            ext = extend_scalars(parts[a], inc, total)
            off = total.offsets[a]
            for k, col in enumerate(ext.cols):
                if col:
                    vadd(cols[off + k], col)
        self.L = L
        self.module = total
        self.cones = cones
        self.parts = parts
        super().__init__(list(total.bideg), SparseMap(len(total), cols), total.labels, check)


def gamma(L: "GemObject", check: bool = True) -> Gamma:
    return Gamma(L, check)


def gamma_map(h: "GemMap", src: Gamma | None = None, dst: Gamma | None = None) -> tuple[Gamma, Gamma, SparseMap]:
    """Γ(h) between Γ(source) and Γ(target)."""
    src = src or gamma(h.source)
    dst = dst or gamma(h.target)
    frame = full_frame(h.source.fan.rank)
    cols: list[dict] = [{} for _ in range(len(src))]
    spos = {s: k for k, s in enumerate(src.cones)}
    tpos = {s: k for k, s in enumerate(dst.cones)}
    for s, f in h.comps.items():
        if s not in spos or s not in tpos:
            continue
        m = induce_hom(f, h.source.mods[s], h.target.mods[s], frame)
        so, to = src.module.offsets[spos[s]], dst.module.offsets[tpos[s]]
        for k, col in enumerate(m.cols):
            cols[so + k] = {to + i: x for i, x in col.items()}
    return src, dst, SparseMap(len(dst), cols)


def check_chain_map(src: BigradedComplex, dst: BigradedComplex, h: SparseMap) -> None:
    if dst.d @ h != h @ src.d:
        raise NotChainMap("map does not commute with the differentials")
    for j, col in enumerate(h.cols):
        for i in col:
            if dst.bideg[i] != src.bideg[j]:
                raise NotChainMap("map does not preserve bidegree")


def cohomology_basis(c: BigradedComplex, p: int, q: int) -> tuple[list[dict], Echelon]:
    """Cycle representatives of H^p_q (global indices) and the echelon they extend."""
    blk = c.block(p, q)
    z_local = kernel(c.d_block(p, q))
    e = Echelon(track=True)
    for i, col in enumerate(c.d_block(p - 1, q).cols):
        if col:
            e.add({blk[k]: x for k, x in col.items()}, {("b", i): 1})
    reps = []
    for z in z_local:
        v = {blk[k]: x for k, x in z.items()}
        if e.add(v, {("h", len(reps)): 1}):
            reps.append(v)
    return reps, e


def cohomology_map_matrix(src: BigradedComplex, dst: BigradedComplex, h: SparseMap,
                          p: int, q: int) -> list[list[Fraction]]:
    """Matrix of H^p_q(src) → H^p_q(dst) in cycle-lifted echelon bases."""
    reps_s, _ = cohomology_basis(src, p, q)
    reps_t, e = cohomology_basis(dst, p, q)
    out = [[Fraction(0)] * len(reps_s) for _ in reps_t]
    for k, z in enumerate(reps_s):
        w = h.apply(z)
        if not (dst.d.apply(w) == {}):
            raise NotChainMap(f"image of a cycle is not a cycle at {(p, q)}")
        res, tag = e.reduce(w, {})
        if res:
            raise NotChainMap("image not in span of cycles")  # cannot happen for cycles
        for key, x in tag.items():
            if key[0] == "h":
                out[key[1]][k] = -x
    return out


def matrix_rank(m: list[list]) -> int:
    if not m or not m[0]:
        return 0
    return rank(SparseMap.from_dense(m))


def induced_cohomology_map(h: "GemMap", p: int, q: int) -> list[list[Fraction]]:
    src, dst, m = gamma_map(h)
    check_chain_map(src, dst, m)
    return cohomology_map_matrix(src, dst, m, p, q)


def module_complex(module: Module, d: SparseMap, check: bool = True) -> BigradedComplex:
    return BigradedComplex(list(module.bideg), d, list(module.labels), check)
