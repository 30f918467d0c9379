"""Fan-indexed complexes of graded exterior modules and the maps between them.

A ``GemObject`` assigns to each cone σ of a fan a module L(σ) over A(σ) and
to each face pair σ ≺ τ (σ = τ allowed) an A(σ)-linear map d(σ/τ) of
bidegree (1, 0), subject to Σ_{τ∈F[σ,ρ]} d(τ/ρ)·d(σ/τ) = 0.

The constructions here follow one pattern: build the barycentric resolution
SdP from flag monomials, generate the truncation kernel k_p inside it, and
read ic_p = SdP/k_p off cone by cone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .cohomology import BigradedComplex, module_complex
from .exterior_algebra import (DirectSum, FreeModule, Module, extend_scalars,
                               induce, induce_hom, zero_module)
from .lattice_fan import Fan, Subdivision, orientation_sign, quotient_fan
from .linalg import Echelon, SparseMap, Vec, dense_solve, kernel, solve_columns, vadd, vscale


class GemError(ValueError):
    pass


class AxiomViolation(GemError):
    pass


class NotLocallyStarClosed(GemError):
    pass


class ElementNotHomogeneous(GemError):
    pass


class PerversityDomainMismatch(GemError):
    pass


class PerversityInequalityViolated(GemError):
    pass


class NotPointwiseOrdered(GemError):
    pass


class FanMismatch(GemError):
    pass


class NotBarycentric(GemError):
    pass


class KernelNotPreserved(GemError):
    """φ_{Σ/Δ} sends part of f_*k_q(Σ) outside k_p(Δ); ``witness`` is (σ, ρ, element)."""

    def __init__(self, msg: str, witness: tuple):
        super().__init__(msg)
        self.witness = witness


def _cache(fan: Fan) -> dict:
    return fan.__dict__.setdefault("_gem_cache", {})


# ---------------------------------------------------------------------------
# perversities


class Perversity:
    """An integer on every nonzero cone of a fan."""

    def __init__(self, fan: Fan, values: dict[int, int], name: str | None = None):
        want = set(range(1, len(fan)))
        if set(values) != want:
            raise PerversityDomainMismatch("perversity must be defined on exactly the nonzero cones")
        self.fan = fan
        self.values = dict(values)
        self.name = name

    def __call__(self, cone: int) -> int:
        return self.values[cone]

    @property
    def key(self) -> tuple:
        return tuple(self.values[i] for i in range(1, len(self.fan)))

    def __le__(self, other: "Perversity") -> bool:
        return all(self.values[i] <= other.values[i] for i in self.values)

    @classmethod
    def top(cls, fan: Fan) -> "Perversity":
        return cls(fan, {i: fan.dim(i) - 1 for i in range(1, len(fan))}, "top")

    @classmethod
    def bottom(cls, fan: Fan) -> "Perversity":
        return cls(fan, {i: 1 - fan.dim(i) for i in range(1, len(fan))}, "bottom")

    @classmethod
    def middle(cls, fan: Fan) -> "Perversity":
        return cls(fan, {i: 0 for i in range(1, len(fan))}, "middle")

    @classmethod
    def named(cls, fan: Fan, name: str) -> "Perversity":
        try:
            return {"top": cls.top, "bottom": cls.bottom, "middle": cls.middle}[name](fan)
        except KeyError:
            raise PerversityDomainMismatch(f"unknown perversity {name!r}") from None

    @classmethod
    def from_dims(cls, fan: Fan, by_dim: dict[int, int]) -> "Perversity":
        try:
            return cls(fan, {i: by_dim[fan.dim(i)] for i in range(1, len(fan))})
        except KeyError as exc:
            raise PerversityDomainMismatch(f"no value for cones of dimension {exc}") from None

    @classmethod
    def from_cones(cls, fan: Fan, by_rays: dict[tuple[int, ...], int]) -> "Perversity":
        vals = {}
        for key, v in by_rays.items():
            k = frozenset(key)
            if k not in fan.index or not k:
                raise PerversityDomainMismatch(f"{list(key)} is not a nonzero cone")
            vals[fan.index[k]] = v
        return cls(fan, vals)

    def __repr__(self):
        return f"Perversity({self.name or self.key})"


# ---------------------------------------------------------------------------
# objects and maps


class GemObject:
    """A CGEM object on ``fan``; missing entries of ``d`` are zero maps."""

    def __init__(self, fan: Fan, mods: list[Module], d: dict[tuple[int, int], SparseMap],
                 name: str = "", check: bool = False):
        if len(mods) != len(fan):
            raise GemError("one module per cone is required")
        self.fan = fan
        self.mods = mods
        self.d = {k: v for k, v in d.items() if not v.is_zero()}
        self.name = name
        if check:
            self.validate()

    def dmap(self, s: int, t: int) -> SparseMap:
        g = self.d.get((s, t))
        if g is None:
            return SparseMap.zero(len(self.mods[t]), len(self.mods[s]))
        return g

    def total_dim(self) -> int:
        return sum(len(m) for m in self.mods)

    def axiom_defects(self) -> list[tuple[int, int]]:
        """Pairs σ ≺ ρ where condition (5) fails (empty when the axiom holds)."""
        fan = self.fan
        bad = []
        for rho in range(len(fan)):
            for s in fan.faces_of(rho):
                total = SparseMap.zero(len(self.mods[rho]), len(self.mods[s]))
                hit = False
                for t in fan.interval(s, rho):
                    a, b = self.d.get((s, t)), self.d.get((t, rho))
                    if a is not None and b is not None:
                        total = total + b @ a
                        hit = True
                if hit and not total.is_zero():
                    bad.append((s, rho))
        return bad

    def validate(self) -> None:
        fan = self.fan
        for i, m in enumerate(self.mods):
            if m.frame is not fan.cones[i].frame:
                raise GemError(f"module at cone {i} is not over A(σ)")
            m.validate()
        for (s, t), g in self.d.items():
            if s not in fan.faces_of(t):
                raise GemError(f"map d({s}/{t}) between non-faces")
            src, dst = self.mods[s], self.mods[t]
            for j, col in enumerate(g.cols):
                p, q = src.bideg[j]
                if any(dst.bideg[i] != (p + 1, q) for i in col):
                    raise GemError(f"d({s}/{t}) is not of bidegree (1,0)")
            for b in src.frame.rows:
                if dst.act_vec(b) @ g != g @ src.act_vec(b):
                    raise GemError(f"d({s}/{t}) is not A(σ)-linear")
        bad = self.axiom_defects()
        if bad:
            raise AxiomViolation(f"condition (5) fails for face pairs {bad[:5]}")

    def restrict(self, cones: Iterable[int], name: str = "") -> "GemObject":
        """Same object with modules outside ``cones`` replaced by zero."""
        keep = set(cones)
        fan = self.fan
        mods = [m if i in keep else zero_module(fan.cones[i].frame) for i, m in enumerate(self.mods)]
        d = {k: v for k, v in self.d.items() if k[0] in keep and k[1] in keep}
        return GemObject(fan, mods, d, name or f"{self.name}|")

    def cone_complex(self, s: int) -> BigradedComplex:
        """L(σ) as a complex with its internal coboundary d(σ/σ)."""
        return module_complex(self.mods[s], self.dmap(s, s))

    def __repr__(self):
        return f"<GemObject {self.name} on {self.fan}, dim {self.total_dim()}>"


class GemMap:
    """An unmixed homomorphism: one A(σ)-linear matrix per cone."""

    def __init__(self, source: GemObject, target: GemObject, comps: dict[int, SparseMap],
                 name: str = "", check: bool = False):
        if source.fan is not target.fan:
            raise FanMismatch("source and target live on different fans")
        self.source = source
        self.target = target
        self.comps = comps
        self.name = name
        if check:
            self.validate()

    def comp(self, s: int) -> SparseMap:
        g = self.comps.get(s)
        if g is None:
            return SparseMap.zero(len(self.target.mods[s]), len(self.source.mods[s]))
        return g

    def validate(self) -> None:
        L, K, fan = self.source, self.target, self.source.fan
        for s in range(len(fan)):
            f = self.comp(s)
            for j, col in enumerate(f.cols):
                if any(K.mods[s].bideg[i] != L.mods[s].bideg[j] for i in col):
                    raise GemError(f"map at cone {s} does not preserve bidegree")
            for b in fan.cones[s].frame.rows:
                if K.mods[s].act_vec(b) @ f != f @ L.mods[s].act_vec(b):
                    raise GemError(f"map at cone {s} is not A(σ)-linear")
        for t in range(len(fan)):
            for s in fan.faces_of(t):
                if K.dmap(s, t) @ self.comp(s) != self.comp(t) @ L.dmap(s, t):
                    raise GemError(f"map does not commute with d({s}/{t})")

    def __matmul__(self, other: "GemMap") -> "GemMap":
        comps = {s: self.comp(s) @ other.comp(s) for s in range(len(self.source.fan))}
        return GemMap(other.source, self.target, comps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GemMap):
            return NotImplemented
        return all(self.comp(s) == other.comp(s) for s in range(len(self.source.fan)))

    def is_quasi_isomorphism(self) -> bool:
        from .cohomology import cohomology_map_matrix, matrix_rank, betti
        for s in range(len(self.source.fan)):
            a, b = self.source.cone_complex(s), self.target.cone_complex(s)
            ha, hb = betti(a), betti(b)
            if ha != hb:
                return False
            for (p, q), dim in ha.items():
                if matrix_rank(cohomology_map_matrix(a, b, self.comp(s), p, q)) != dim:
                    return False
        return True


# ---------------------------------------------------------------------------
# E(Φ)


def is_locally_star_closed(fan: Fan, cones: Iterable[int]) -> bool:
    phi = set(cones)
    for rho in phi:
        for s in fan.faces_of(rho):
            if s in phi and any(t not in phi for t in fan.interval(s, rho)):
                return False
    return True


def build_E(fan: Fan, cones: Iterable[int]) -> BigradedComplex:
    """E(Φ)⊗Q: one cell per cone (its det generator) in degree dim σ."""
    phi = sorted(set(cones), key=lambda i: (fan.dim(i), i))
    if not is_locally_star_closed(fan, phi):
        raise NotLocallyStarClosed("cone set is not locally star closed")
    pos = {c: k for k, c in enumerate(phi)}
    cols = []
    for s in phi:
        col = {}
        for t in fan.cofaces[s]:
            if t in pos and fan.dim(t) == fan.dim(s) + 1:
                col[pos[t]] = fan.incidence(s, t)
        cols.append(col)
    return BigradedComplex([(fan.dim(c), 0) for c in phi], SparseMap(len(phi), cols), phi)


# ---------------------------------------------------------------------------
# P(Δ)


def build_P(fan: Fan) -> GemObject:
    cache = _cache(fan)
    if "P" in cache:
        return cache["P"]
    mods = [FreeModule(c.frame, [("det", (c.dim, 0))]) for c in fan.cones]
    d = {}
    for s, t in fan.face_pairs:
        if fan.dim(t) == fan.dim(s) + 1:
            d[(s, t)] = _free(mods[s], mods[t], [{0: fan.incidence(s, t)}])
    P = GemObject(fan, mods, d, "P")
    cache["P"] = P
    return P


def _free(src: FreeModule, dst: Module, images: Sequence[Vec]) -> SparseMap:
    from .exterior_algebra import free_map
    return free_map(src, dst, images)


# ---------------------------------------------------------------------------
# flag algebra and SdP


class FlagAlgebra:
    """B(Φ): exterior algebra on y(σ), σ∈Φ, modulo y(σ)y(τ) for incomparable σ, τ.

    Flags are tuples of cone indices sorted by dimension; z(α) is the ordered
    product of the y's along α.
    """

    def __init__(self, fan: Fan, cones: Iterable[int]):
        self.fan = fan
        self.cones = sorted(set(cones), key=lambda i: (fan.dim(i), i))
        if 0 in self.cones:
            raise GemError("the zero cone carries no generator")
        self.flags = fan.flags(self.cones)
        self.index = {a: k for k, a in enumerate(self.flags)}

    def degree_dims(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for a in self.flags:
            out[len(a)] = out.get(len(a), 0) + 1
        return out

    def mul(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
        """z(a)·z(b) = sign · z(sorted) or None when zero."""
        return flag_product(self.fan, a, b)

    def Y(self) -> list[tuple[int, ...]]:
        return [(c,) for c in self.cones]


def flag_product(fan: Fan, a: tuple[int, ...], b: tuple[int, ...]):
    seq = list(a) + list(b)
    if len(set(seq)) != len(seq):
        return None
    for x, y in itertools.combinations(seq, 2):
        if not (fan.is_face(x, y) or fan.is_face(y, x)):
            return None
    key = [fan.dim(c) for c in seq]
    inv = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if key[i] > key[j])
    return (-1) ** inv, tuple(sorted(seq, key=lambda c: fan.dim(c)))


def sd_flags(fan: Fan, rho: int) -> list[tuple[int, ...]]:
    """Generators of SdP(ρ): flags β of Δ∖{0} ending at ρ (β = () for ρ = 0)."""
    if rho == 0:
        return [()]
    inner = [c for c in fan.faces_of(rho) if c not in (0, rho)]
    return [a + (rho,) for a in fan.flags(inner)]


def build_SdP(fan: Fan) -> GemObject:
    """SdP(ρ) = B(ρ)⊗A(ρ) with d(ρ/ρ) = Y(F(0,ρ))· and d(ρ/μ) = y(μ)·."""
    cache = _cache(fan)
    if "SdP" in cache:
        return cache["SdP"]
    mods = []
    for rho, c in enumerate(fan.cones):
        gens = [(b, (len(b), 0)) for b in sd_flags(fan, rho)]
        mods.append(FreeModule(c.frame, gens))
    d = {}
    for rho in range(len(fan)):
        src = mods[rho]
        inner = [c for c in fan.faces_of(rho) if c not in (0, rho)]
        imgs = []
        for b, _ in src.gens:
            v: Vec = {}
            for t in inner:
                pr = flag_product(fan, (t,), b)
                if pr is not None:
                    vadd(v, {src.cell(pr[1]): pr[0]})
            imgs.append(v)
        d[(rho, rho)] = _free(src, src, imgs)
        for mu in fan.cofaces[rho]:
            if mu == rho:
                continue
            dst = mods[mu]
            imgs = []
            for b, _ in src.gens:
                sign, flag = flag_product(fan, (mu,), b)
                imgs.append({dst.cell(flag): sign})
            d[(rho, mu)] = _free(src, dst, imgs)
    L = GemObject(fan, mods, d, "SdP")
    cache["SdP"] = L
    return L


# ---------------------------------------------------------------------------
# face functors


@dataclass
class ModuleComplex:
    """A complex of modules over one A(ρ), with its cone summands recorded."""

    module: DirectSum
    d: SparseMap
    cones: list[int]

    def complex(self) -> BigradedComplex:
        return module_complex(self.module, self.d)


def _face_sum(L: GemObject, rho: int, cones: list[int]) -> ModuleComplex:
    frame = L.fan.cones[rho].frame
    parts = [induce(L.mods[s], frame) for s in cones]
    M = DirectSum(frame, parts, cones)
    cols: list[Vec] = [{} for _ in range(len(M))]
    for a, s in enumerate(cones):
        for b, t in enumerate(cones):
            g = L.d.get((s, t))
            if g is None:
                continue
            inc = SparseMap(len(M), [M.shift(b, col) for col in g.cols])
            ext = extend_scalars(parts[a], inc, M)
            off = M.offsets[a]
            for k, col in enumerate(ext.cols):
                if col:
                    vadd(cols[off + k], col)
    return ModuleComplex(M, SparseMap(len(M), cols), cones)


def i_circ(L: GemObject, rho: int) -> ModuleComplex:
    """i_ρ∘(L) = ⊕_{σ∈F[0,ρ)} L(σ)_{A(ρ)}."""
    return _face_sum(L, rho, [s for s in L.fan.faces_of(rho) if s != rho])


def i_star(L: GemObject, rho: int) -> ModuleComplex:
    """i_ρ*(L) = ⊕_{σ∈F(ρ)} L(σ)_{A(ρ)}, the mapping cone of φ(L,ρ)."""
    return _face_sum(L, rho, list(L.fan.faces_of(rho)))


def phi(L: GemObject, rho: int, ic: ModuleComplex | None = None) -> SparseMap:
    """φ(L,ρ): i_ρ∘(L) → L(ρ)[1], assembled from the induced d(σ/ρ)."""
    ic = ic or i_circ(L, rho)
    target = L.mods[rho]
    cols: list[Vec] = []
    for a, s in enumerate(ic.cones):
        g = L.dmap(s, rho)
        cols.extend(extend_scalars(ic.module.parts[a], g, target).cols)
    return SparseMap(len(target), cols)


# ---------------------------------------------------------------------------
# subcomplexes and quotients


class GradedEchelon:
    """Subspace of a module, kept as one echelon form per bidegree."""

    def __init__(self, module: Module, track: bool = False):
        self.module = module
        self.parts: dict[tuple[int, int], Echelon] = {}
        self.track = track

    def _degree(self, v: Vec) -> tuple[int, int]:
        degs = {self.module.bideg[i] for i in v}
        if len(degs) != 1:
            raise ElementNotHomogeneous(f"element spans bidegrees {sorted(degs)}")
        return degs.pop()

    def add(self, v: Vec) -> bool:
        if not v:
            return False
        deg = self._degree(v)
        e = self.parts.setdefault(deg, Echelon())
        return e.add(v)

    def reduce(self, v: Vec) -> Vec:
        by: dict[tuple[int, int], Vec] = {}
        for i, x in v.items():
            by.setdefault(self.module.bideg[i], {})[i] = x
        out: Vec = {}
        for deg, w in by.items():
            e = self.parts.get(deg)
            out.update(e.reduce(w)[0] if e else w)
        return out

    def contains(self, v: Vec) -> bool:
        return not self.reduce(v)

    def basis(self) -> list[Vec]:
        return [row for deg in sorted(self.parts) for row in self.parts[deg].basis()]

    def pivots(self) -> set[int]:
        return {p for e in self.parts.values() for p in e.rows}

    def __len__(self) -> int:
        return sum(len(e) for e in self.parts.values())

    def dims(self) -> dict[tuple[int, int], int]:
        return {k: len(e) for k, e in sorted(self.parts.items()) if len(e)}


class Subcomplex:
    """A family of graded subspaces K(σ) ⊆ L(σ) closed under the structure maps."""

    def __init__(self, L: GemObject, spaces: list[GradedEchelon]):
        self.L = L
        self.spaces = spaces

    def dims(self) -> list[int]:
        return [len(s) for s in self.spaces]

    def contains(self, other: "Subcomplex") -> bool:
        return all(all(a.contains(v) for v in b.basis()) for a, b in zip(self.spaces, other.spaces))

    def __eq__(self, other) -> bool:
        return isinstance(other, Subcomplex) and self.dims() == other.dims() and self.contains(other)

    def is_closed(self) -> bool:
        L = self.L
        for s, sp in enumerate(self.spaces):
            for v in sp.basis():
                for a in L.mods[s].act:
                    if not sp.contains(a.apply(v)):
                        return False
                for t in L.fan.cofaces[s]:
                    g = L.d.get((s, t))
                    if g is not None and not self.spaces[t].contains(g.apply(v)):
                        return False
        return True

    def quotient(self, name: str = "") -> tuple[GemObject, GemMap]:
        """L/K per cone, with the unmixed projection L → L/K."""
        L = self.L
        keep, qmaps, mods = [], [], []
        for s, sp in enumerate(self.spaces):
            M = L.mods[s]
            piv = sp.pivots()
            kept = [i for i in range(len(M)) if i not in piv]
            pos = {g: k for k, g in enumerate(kept)}
            keep.append((kept, pos))

            def proj(v, sp=sp, pos=pos):
                return {pos[i]: x for i, x in sp.reduce(v).items()}

            qmaps.append(proj)
            act = [SparseMap(len(kept), [proj(a.cols[i]) for i in kept]) for a in M.act]
            mods.append(Module(M.frame, [M.labels[i] for i in kept], [M.bideg[i] for i in kept], act))
        d = {}
        for (s, t), g in L.d.items():
            kept = keep[s][0]
            d[(s, t)] = SparseMap(len(mods[t]), [qmaps[t](g.cols[i]) for i in kept])
        Q = GemObject(L.fan, mods, d, name or f"{L.name}/K")
        comps = {s: SparseMap(len(mods[s]), [qmaps[s]({i: 1}) for i in range(len(L.mods[s]))])
                 for s in range(len(L.fan))}
        Q.lifts = [k[0] for k in keep]  # kept cell → cell of L
        Q.reducers = qmaps
        return Q, GemMap(L, Q, comps, "projection")

    def as_object(self, name: str = "") -> tuple[GemObject, GemMap]:
        """K as a GemObject, with its inclusion into L."""
        L = self.L
        mods, coords, bases = [], [], []
        for s, sp in enumerate(self.spaces):
            M = L.mods[s]
            basis = sp.basis()
            bases.append(basis)
            e = Echelon(track=True)
            for k, v in enumerate(basis):
                e.add(v, {k: 1})

            def coord(v, e=e):
                res, tag = e.reduce(v, {})
                if res:
                    raise GemError("vector escapes the subcomplex")
                return vscale(tag, -1)

            coords.append(coord)
            act = [SparseMap(len(basis), [coord(a.apply(v)) for v in basis]) for a in M.act]
            bideg = [M.bideg[min(v)] for v in basis]
            mods.append(Module(M.frame, [("k", k) for k in range(len(basis))], bideg, act))
        d = {}
        for (s, t), g in L.d.items():
            d[(s, t)] = SparseMap(len(mods[t]), [coords[t](g.apply(v)) for v in bases[s]])
        K = GemObject(L.fan, mods, d, name or f"sub({L.name})")
        inc = GemMap(K, L, {s: SparseMap(len(L.mods[s]), [dict(v) for v in bases[s]])
                            for s in range(len(L.fan))}, "inclusion")
        return K, inc


def generate_subcomplex(L: GemObject, S: dict[int, Iterable[Vec]],
                        order: Sequence[int] | None = None) -> Subcomplex:
    """⟨S⟩: cone by cone in nondecreasing dimension, add the images of the faces'
    subspaces and S(ρ), then close under A(ρ) and d(ρ/ρ)."""
    fan = L.fan
    if order is None:
        order = sorted(range(len(fan)), key=lambda i: (fan.dim(i), i))
    spaces: list[GradedEchelon | None] = [None] * len(fan)
    for rho in order:
        M = L.mods[rho]
        e = GradedEchelon(M)
        queue: list[Vec] = []
        for s in fan.faces_of(rho):
            if s == rho:
                continue
            if spaces[s] is None:
                raise GemError("cone order must list faces first")
            g = L.d.get((s, rho))
            if g is None:
                continue
            for v in spaces[s].basis():
                w = g.apply(v)
                if w and e.add(w):
                    queue.append(w)
        for v in S.get(rho, ()):
            if v and e.add(v):
                queue.append(v)
        dd = L.d.get((rho, rho))
        while queue:
            v = queue.pop()
            for a in M.act:
                w = a.apply(v)
                if w and e.add(w):
                    queue.append(w)
            if dd is not None:
                w = dd.apply(v)
                if w and e.add(w):
                    queue.append(w)
        spaces[rho] = e
    return Subcomplex(L, spaces)


def truncation_generators(L: GemObject, p: Perversity) -> dict[int, list[Vec]]:
    """All cells of SdP(σ)^i_j with i + j ≤ p(σ), σ ≠ 0."""
    out = {}
    for s in range(1, len(L.fan)):
        out[s] = [{k: 1} for k, (i, j) in enumerate(L.mods[s].bideg) if i + j <= p(s)]
    return out


@dataclass
class IntersectionComplex:
    ic: GemObject
    projection: GemMap
    kernel: Subcomplex
    perversity: Perversity


def build_ic(fan: Fan, p: Perversity | str) -> IntersectionComplex:
    """ic_p(Δ) = SdP(Δ)/k_p(Δ) with the quotient map φ(Δ,p)."""
    if isinstance(p, str):
        p = Perversity.named(fan, p)
    if p.fan is not fan:
        raise PerversityDomainMismatch("perversity belongs to another fan")
    cache = _cache(fan)
    key = ("ic", p.key)
    if key in cache:
        return cache[key]
    L = build_SdP(fan)
    k = generate_subcomplex(L, truncation_generators(L, p))
    ic, proj = k.quotient(f"ic_{p.name or 'p'}")
    out = IntersectionComplex(ic, proj, k, p)
    cache[key] = out
    return out


def build_ic_top_description(fan: Fan) -> GemObject:
    """det(σ)⊗Ā(σ) in degree r_σ: one cell per cone, A(σ) acting by zero."""
    cache = _cache(fan)
    if "ic_top_desc" in cache:
        return cache["ic_top_desc"]
    mods = []
    for c in fan.cones:
        mods.append(Module(c.frame, [("det",)], [(c.dim, 0)],
                           [SparseMap(1, [{}]) for _ in range(c.frame.dim)]))
    d = {}
    for s, t in fan.face_pairs:
        if fan.dim(t) == fan.dim(s) + 1:
            d[(s, t)] = SparseMap(1, [{0: fan.incidence(s, t)}])
    out = GemObject(fan, mods, d, "det⊗Ā")
    cache["ic_top_desc"] = out
    return out


def top_comparison(fan: Fan) -> tuple[GemMap, list[Echelon]]:
    """The map P(Δ) → ic_t(Δ) through lifts along ψ, and its per-cone kernels.

    Lifts det(σ)⊗e_T to ±z(α)y(σ)⊗e_T for the first full flag α; well defined
    because ker ψ ⊆ k_t.
    """
    P = build_P(fan)
    top = build_ic(fan, Perversity.top(fan))
    ps = psi(fan)
    comps, kernels = {}, []
    for s in range(len(fan)):
        src = top.projection.source.mods[s]
        full = next(k for k, (b, _) in enumerate(src.gens) if len(b) == fan.dim(s))
        sign = ps.comp(s).cols[src.cell(src.gens[full][0])][0]
        cols = []
        for T_cell in range(len(P.mods[s])):
            _, T = P.mods[s].labels[T_cell]
            lift = {src.cell(src.gens[full][0], T): sign}
            cols.append(top.projection.comp(s).apply(lift))
        m = SparseMap(len(top.ic.mods[s]), cols)
        comps[s] = m
        e = Echelon()
        for v in kernel(m):
            e.add(v)
        kernels.append(e)
    return GemMap(P, top.ic, comps, "P→ic_t"), kernels


# ---------------------------------------------------------------------------
# ψ, direct images, λ, δ


def barycenter_sign(fan: Fan, flag: Sequence[int], cone: int, points: dict[int, Sequence] | None = None) -> int:
    """Sign of a(σ1)∧…∧a(σk) against the canonical generator of det(cone)."""
    vecs = [points[c] if points else fan.cones[c].barycenter() for c in flag]
    return orientation_sign(fan.cones[cone].frame, vecs)


def psi(fan: Fan) -> GemMap:
    """ψ_Δ: SdP(Δ) → P(Δ), nonzero only on full flags."""
    cache = _cache(fan)
    if "psi" in cache:
        return cache["psi"]
    L, P = build_SdP(fan), build_P(fan)
    comps = {}
    for rho in range(len(fan)):
        src = L.mods[rho]
        r = fan.dim(rho)
        imgs = []
        for b, _ in src.gens:
            if len(b) == r:
                imgs.append({0: barycenter_sign(fan, b, rho)} if r else {0: 1})
            else:
                imgs.append({})
        comps[rho] = _free(src, P.mods[rho], imgs)
    out = GemMap(L, P, comps, "psi")
    cache["psi"] = out
    return out


def direct_image(f: Subdivision, L: GemObject) -> GemObject:
    """(f_*L)(ρ) = ⊕_{σ∈f⁻¹(ρ)} L(σ)_{A(ρ)}."""
    if L.fan is not f.source:
        raise FanMismatch("object does not live on the subdivision source")
    target = f.target
    fibers = [f.fiber(rho) for rho in range(len(target))]
    mods = []
    for rho, fib in enumerate(fibers):
        frame = target.cones[rho].frame
        mods.append(DirectSum(frame, [induce(L.mods[s], frame) for s in fib], fib))
    d: dict[tuple[int, int], SparseMap] = {}
    for mu in range(len(target)):
        for rho in target.faces_of(mu):
            src, dst = mods[rho], mods[mu]
            cols: list[Vec] = [{} for _ in range(len(src))]
            hit = False
            for a, s in enumerate(fibers[rho]):
                for b, t in enumerate(fibers[mu]):
                    g = L.d.get((s, t))
                    if g is None:
                        continue
                    inc = SparseMap(len(dst), [dst.shift(b, col) for col in g.cols])
                    ext = extend_scalars(src.parts[a], inc, dst)
                    off = src.offsets[a]
                    for k, col in enumerate(ext.cols):
                        if col:
                            vadd(cols[off + k], col)
                            hit = True
            if hit:
                d[(rho, mu)] = SparseMap(len(dst), cols)
    out = GemObject(target, mods, d, f"f_*{L.name}")
    out.fibers = fibers
    return out


def direct_image_map(f: Subdivision, h: GemMap, src: GemObject | None = None,
                     dst: GemObject | None = None) -> GemMap:
    src = src or direct_image(f, h.source)
    dst = dst or direct_image(f, h.target)
    comps = {}
    for rho in range(len(f.target)):
        frame = f.target.cones[rho].frame
        cols: list[Vec] = []
        for a, s in enumerate(src.fibers[rho]):
            m = induce_hom(h.comp(s), h.source.mods[s], h.target.mods[s], frame)
            cols.extend(dst.mods[rho].shift(a, col) for col in m.cols)
        comps[rho] = SparseMap(len(dst.mods[rho]), cols)
    return GemMap(src, dst, comps, f"f_*{h.name}")


def _require_barycentric(f: Subdivision) -> None:
    if f.flag_of is None:
        raise NotBarycentric("subdivision does not come from barycentric_subdivision")


def lambda_map(fan: Fan, f: Subdivision) -> GemMap:
    """λ_Δ: SdP(Δ) ≅ f_*P(Σ), z(β)y(ρ) ↦ z′(β,ρ)."""
    _require_barycentric(f)
    if f.target is not fan:
        raise FanMismatch("subdivision does not refine this fan")
    cache = _cache(fan)
    key = ("lambda", id(f))
    if key in cache:
        return cache[key][1]
    L = build_SdP(fan)
    FP = direct_image(f, build_P(f.source))
    sigma = f.source
    cone_of_flag = {flag: s for s, flag in enumerate(f.flag_of)}
    comps = {}
    for rho in range(len(fan)):
        src = L.mods[rho]
        dst = FP.mods[rho]
        imgs = []
        for b, _ in src.gens:
            s = cone_of_flag[b]
            a = dst.keys.index(s)
            sign = orientation_sign(sigma.cones[s].frame, [f.barycenters[c] for c in b]) if b else 1
            imgs.append(dst.shift(a, {0: sign}))
        comps[rho] = _free(src, dst, imgs)
    out = GemMap(L, FP, comps, "lambda")
    cache[key] = (f, out)
    return out


def comparison_map(f: Subdivision) -> GemMap:
    """φ_{Σ/Δ} = λ⁻¹ · f_*(ψ_Σ): f_*SdP(Σ) → SdP(Δ)."""
    fan = f.target
    cache = _cache(fan)
    key = ("phi_sd", id(f))
    if key in cache:
        return cache[key][1]
    lam = lambda_map(fan, f)
    fpsi = direct_image_map(f, psi(f.source), dst=lam.target)
    comps = {}
    for rho in range(len(fan)):
        sol = solve_columns(lam.comp(rho), fpsi.comp(rho).cols)
        if sol is None:
            raise GemError("λ is not surjective")
        comps[rho] = SparseMap(len(lam.source.mods[rho]), sol)
    out = GemMap(fpsi.source, lam.source, comps, "phi_Sigma/Delta")
    cache[key] = (f, out)
    return out


def delta(f: Subdivision, p: Perversity, q: Perversity) -> GemMap:
    """δ_{Σ/Δ}: f_*ic_q(Σ) → ic_p(Δ), induced by φ_{Σ/Δ} on quotients."""
    _require_barycentric(f)
    fan, sigma = f.target, f.source
    for s in range(1, len(sigma)):
        if q(s) > p(f.cone_map[s]):
            raise PerversityInequalityViolated(f"q({s}) > p(f({s}))")
    ph = comparison_map(f)
    icD, icS = build_ic(fan, p), build_ic(sigma, q)
    src = direct_image(f, icS.ic)
    comps = {}
    for rho in range(len(fan)):
        tgt = icD.ic.mods[rho]
        red = icD.ic.reducers[rho]
        kD = icD.kernel.spaces[rho]
        fpsrc = ph.source.mods[rho]
        cols: list[Vec] = []
        for a, s in enumerate(src.fibers[rho]):
            off = fpsrc.offsets[a]
            # well defined: generators of k_q(Σ)(σ) land in k_p(Δ)(ρ)
            for v in icS.kernel.spaces[s].basis():
                img = ph.comp(rho).apply({off + i: x for i, x in v.items()})
                if not kD.contains(img):
                    labels = {str(fpsrc.parts[a].labels[i]): str(x) for i, x in v.items()}
                    raise KernelNotPreserved(
                        f"φ_Σ/Δ does not carry k_q(Σ)({s}) into k_p(Δ)({rho})", (s, rho, labels))
            g = SparseMap(len(tgt), [red(ph.comp(rho).cols[off + c]) for c in icS.ic.lifts[s]])
            cols.extend(extend_scalars(src.mods[rho].parts[a], g, tgt).cols)
        comps[rho] = SparseMap(len(tgt), cols)
    return GemMap(src, icD.ic, comps, "delta")


def bar_delta_top(f: Subdivision) -> GemMap:
    """f_*(det⊗Ā)(Δ′) → (det⊗Ā)(Δ): identity on equal-dimension cones, zero otherwise."""
    src = direct_image(f, build_ic_top_description(f.source))
    tgt = build_ic_top_description(f.target)
    comps = {}
    for rho in range(len(f.target)):
        cols: list[Vec] = []
        for a, s in enumerate(src.fibers[rho]):
            part = src.mods[rho].parts[a]
            same = f.source.dim(s) == f.target.dim(rho)
            if same and f.source.cones[s].span_basis != f.target.cones[rho].span_basis:
                raise GemError("equal-dimensional cones with different lattices")
            cols.extend([{0: 1}] if same else [{} for _ in part.labels])
        comps[rho] = SparseMap(1, cols)
    return GemMap(src, tgt, comps, "bar_delta")


def natural_map(fan: Fan, p: Perversity, p2: Perversity) -> GemMap:
    """ic_p → ic_{p′} for p ≤ p′ (both are quotients of SdP)."""
    if not p <= p2:
        raise NotPointwiseOrdered("perversities are not pointwise ordered")
    a, b = build_ic(fan, p), build_ic(fan, p2)
    if not b.kernel.contains(a.kernel):
        raise NotPointwiseOrdered("k_p is not contained in k_p′")
    comps = {s: SparseMap(len(b.ic.mods[s]), [b.ic.reducers[s]({c: 1}) for c in a.ic.lifts[s]])
             for s in range(len(fan))}
    return GemMap(a.ic, b.ic, comps, "natural")


def natural_map_between_perversities(fan: Fan, p: Perversity, p2: Perversity) -> GemMap:
    return natural_map(fan, p, p2)


# ---------------------------------------------------------------------------
# quotient fans


def shift_sign(n: int) -> int:
    """Differential sign of the shift K[n]."""
    return -1 if n % 2 else 1


def h_quotient_iso(fan: Fan, eta: int) -> GemMap:
    """h(Δ,η,w): (det⊗Ā) on the star of η ≅ ε_η((det⊗Ā)(Δ[η]))[−r_η], with w = det(η).

    Both sides are rebuilt on Δ (zero off the star) so the result is an
    ordinary unmixed map; its per-cone entries are the signs of q^w.
    """
    qf = quotient_fan(fan, eta)
    Q = qf.fan
    top = build_ic_top_description(fan)
    star = set(qf.star)
    src = top.restrict(star, "ic_t|star")
    r_eta = fan.dim(eta)
    w = list(fan.cones[eta].span_basis)
    tmods = []
    for i, c in enumerate(fan.cones):
        if i in star:
            tmods.append(Module(c.frame, [("det'",)], [(c.dim, 0)], [SparseMap(1, [{}]) for _ in range(c.frame.dim)]))
        else:
            tmods.append(zero_module(c.frame))
    td = {}
    for s in star:
        for t in fan.cofaces[s]:
            if t != s and fan.dim(t) == fan.dim(s) + 1:
                td[(s, t)] = SparseMap(1, [{0: shift_sign(r_eta) * Q.incidence(qf.to_quotient[s], qf.to_quotient[t])}])
    tgt = GemObject(fan, tmods, td, "shifted quotient")
    proj = qf.proj
    comps = {}
    for s in star:
        qc = Q.cones[qf.to_quotient[s]]
        lifts = []
        for y in qc.span_basis:
            x = dense_solve([list(row) for row in proj], list(y))
            lifts.append(x)
        sign = orientation_sign(fan.cones[s].frame, w + lifts)
        comps[s] = SparseMap(1, [{0: sign}])
    return GemMap(src, tgt, comps, "h")


# ---------------------------------------------------------------------------
# unmixed extension


def extend_unmixed(target: GemObject, f0: SparseMap, order: Sequence[int] | None = None) -> GemMap:
    """The unique unmixed map SdP(Δ) → target with prescribed component at 0.

    Each f(π) is forced by φ(target,π)·i_π∘(f) = f(π)·φ(SdP,π), since
    φ(SdP,π) is invertible.
    """
    fan = target.fan
    L = build_SdP(fan)
    if order is None:
        order = sorted(range(len(fan)), key=lambda i: (fan.dim(i), i))
    comps: dict[int, SparseMap] = {0: f0}
    for pi in order:
        if pi == 0:
            continue
        ic_src = i_circ(L, pi)
        ic_tgt = i_circ(target, pi)
        frame = fan.cones[pi].frame
        blocks = []
        for a, s in enumerate(ic_src.cones):
            if s not in comps:
                raise GemError("order must list faces first")
            blocks.append(induce_hom(comps[s], L.mods[s], target.mods[s], frame))
        cols = []
        for a, m in enumerate(blocks):
            cols.extend(ic_tgt.module.shift(a, col) for col in m.cols)
        i_f = SparseMap(len(ic_tgt.module), cols)
        phi_src = phi(L, pi, ic_src)
        phi_tgt = phi(target, pi, ic_tgt)
        units = [{c: 1} for c in range(len(L.mods[pi]))]
        pre = solve_columns(phi_src, units)
        if pre is None:
            raise GemError(f"φ(SdP,{pi}) is not surjective")
        comps[pi] = SparseMap(len(target.mods[pi]), [phi_tgt.apply(i_f.apply(u)) for u in pre])
    return GemMap(L, target, comps, "extension")


# ---------------------------------------------------------------------------
# chain maps by linear solving


def solve_unmixed_map(source: GemObject, target: GemObject, prescribed: dict[int, SparseMap],
                      name: str = "solved") -> GemMap | None:
    """Some unmixed GemMap source → target with the given components, or None.

    Unknowns are the bidegree-preserving matrix entries at every cone; the
    equations are A(σ)-linearity and commutation with every d(σ/τ).
    """
    from .linalg import solve_affine
    fan = source.fan
    var: dict[tuple[int, int, int], int] = {}
    for s in range(len(fan)):
        if s in prescribed:
            continue
        tb = target.mods[s].by_degree()
        for j, deg in enumerate(source.mods[s].bideg):
            for i in tb.get(deg, ()):
                var[(s, i, j)] = len(var)

    def entry(s: int, i: int, j: int, coef, out: Vec, const: list):
        if s in prescribed:
            x = prescribed[s].cols[j].get(i, 0)
            if x:
                const[0] -= coef * x
        else:
            k = var.get((s, i, j))
            if k is not None:
                vadd(out, {k: coef})

    eqs: list[tuple[Vec, object]] = []

    def add_commutation(a_tgt: SparseMap, s_a: int, s_b: int, b_src: SparseMap, nrows: int, ncols: int):
        """Equations a_tgt·X_{s_a} − X_{s_b}·b_src = 0 (an nrows × ncols matrix)."""
        acc: dict[tuple[int, int], tuple[Vec, list]] = {}
        src_a = source.mods[s_a]
        tgt_b = target.mods[s_b]
        # a_tgt · X_{s_a}: entry (r, c) = Σ_i a[r,i] X[i,c]
        tb = target.mods[s_a].by_degree()
        for c in range(ncols):
            deg = src_a.bideg[c]
            for i in tb.get(deg, ()):
                for r, x in a_tgt.cols[i].items():
                    v, k = acc.setdefault((r, c), ({}, [0]))
                    entry(s_a, i, c, x, v, k)
        # X_{s_b} · b_src: entry (r, c) = Σ_j X[r,j] b[j,c]
        for c, col in enumerate(b_src.cols):
            for j, x in col.items():
                deg = source.mods[s_b].bideg[j]
                for r in tgt_b.by_degree().get(deg, ()):
                    v, k = acc.setdefault((r, c), ({}, [0]))
                    entry(s_b, r, j, -x, v, k)
        for v, k in acc.values():
            if v or k[0]:
                eqs.append((v, k[0]))

    for s in range(len(fan)):
        S, T = source.mods[s], target.mods[s]
        for a_s, a_t in zip(S.act, T.act):
            add_commutation(a_t, s, s, a_s, len(T), len(S))
    for (s, t) in set(source.d) | set(target.d):
        add_commutation(target.dmap(s, t), s, t, source.dmap(s, t),
                        len(target.mods[t]), len(source.mods[s]))
    x = solve_affine(eqs, len(var))
    if x is None:
        return None
    comps = {}
    for s in range(len(fan)):
        if s in prescribed:
            comps[s] = prescribed[s]
            continue
        cols: list[Vec] = [{} for _ in range(len(source.mods[s]))]
        comps[s] = SparseMap(len(target.mods[s]), cols)
    for (s, i, j), k in var.items():
        if x[k]:
            comps[s].cols[j][i] = x[k]
    return GemMap(source, target, comps, name)
