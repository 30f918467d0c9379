"""Named checks that verify statements about ic complexes on concrete fans.

Each check either passes, fails with a finite witness, or reports that the
fan does not satisfy its hypothesis.  Reports serialize to JSON lines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

from .cohomology import (BettiTable, betti, check_chain_map, cohomology_map_matrix,
                         euler_characteristic, euler_oracle_top, gamma, gamma_map, matrix_rank)
from .gem_complex import (GemMap, KernelNotPreserved, Perversity, build_E, build_P,
                          build_SdP, build_ic, delta, i_circ, i_star, natural_map, phi, psi,
                          top_comparison)
from .lattice_fan import (Fan, NotABoundaryFan, barycentric_subdivision, boundary_cone,
                          complete_above_boundary, cone_fan, minimal_cone, primitive)
from .linalg import SparseMap, rank


class HypothesisNotMet(Exception):
    pass


class UnknownCheck(KeyError):
    pass


@dataclass
class CheckReport:
    check: str
    fan: str
    status: str  # "pass", "fail" or "hypothesis-not-met"
    witness: dict | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> str:
        doc = {"check": self.check, "fan": self.fan, "status": self.status}
        if self.witness is not None:
            doc["witness"] = self.witness
        if self.detail:
            doc["detail"] = self.detail
        return json.dumps(doc, sort_keys=True, default=str)


class Failure(Exception):
    """Raised inside a check with the witness of a violated statement."""

    def __init__(self, witness: dict):
        super().__init__(str(witness))
        self.witness = witness


# ---------------------------------------------------------------------------
# helpers


def gamma_betti(fan: Fan, p: Perversity | str, jobs: int = 1) -> BettiTable:
    if isinstance(p, str):
        p = Perversity.named(fan, p)
    cache = fan.__dict__.setdefault("_gem_cache", {})
    key = ("gamma_betti", p.key)
    if key not in cache:
        cache[key] = betti(gamma(build_ic(fan, p).ic, check=False), jobs)
    return cache[key]


def require(cond: bool, msg: str) -> None:
    if not cond:
        raise HypothesisNotMet(msg)


def require_boundary(fan: Fan):
    try:
        return boundary_cone(fan)
    except NotABoundaryFan as exc:
        raise HypothesisNotMet(f"not the boundary fan of a full cone: {exc}") from None


def support_within(table: BettiTable, allowed: Callable[[int, int], bool], **extra) -> None:
    for (p, q), d in sorted(table.items()):
        if d and not allowed(p, q):
            raise Failure({"bidegree": [p, q], "dim": d, **extra})


def cohomology_ranks(h: GemMap, jobs: int = 1):
    src, dst, m = gamma_map(h)
    check_chain_map(src, dst, m)
    hs, hd = betti(src, jobs), betti(dst, jobs)
    ranks = {k: matrix_rank(cohomology_map_matrix(src, dst, m, *k)) for k in sorted(set(hs) | set(hd))}
    return hs, hd, ranks


def per_cone_quasi_iso(h: GemMap, label: str) -> None:
    L, K = h.source, h.target
    for s in range(len(L.fan)):
        a, b = L.cone_complex(s), K.cone_complex(s)
        ha, hb = betti(a), betti(b)
        for key in sorted(set(ha) | set(hb)):
            r = matrix_rank(cohomology_map_matrix(a, b, h.comp(s), *key))
            if not (ha.get(key, 0) == hb.get(key, 0) == r):
                raise Failure({"map": label, "cone": s, "bidegree": list(key),
                               "source_dim": ha.get(key, 0), "target_dim": hb.get(key, 0), "rank": r})


def star_complement_cases(fan: Fan):
    """(Δ̃, γ) pairs with Δ̃ simplicial complete and γ a ray.

    A simplicial complete fan gives one pair per ray; a boundary fan F(π)∖{π}
    gives the barycentric subdivision of its completion with γ through a(π).
    """
    if fan.is_complete and fan.is_simplicial:
        return [(fan, g) for g in fan.cones_of_dim(1)]
    if fan.rank >= 1:
        try:
            pi = boundary_cone(fan)
        except NotABoundaryFan:
            pi = None
        if pi is not None:
            full, _, _ = complete_above_boundary(pi)
            sd = barycentric_subdivision(full).source
            eta = sd.index[frozenset([sd.rays.index(primitive(pi.barycenter()))])]
            return [(sd, eta)]
    raise HypothesisNotMet("needs a simplicial complete fan or a boundary fan F(π)∖{π}")


def _rays(fan: Fan, s: int) -> list[list[int]]:
    return [list(fan.rays[k]) for k in sorted(fan.ray_sets[s])]


def complement_subfan(full: Fan, gamma_ray: int) -> tuple[Fan, list[int]]:
    star = set(full.star(gamma_ray))
    return full.subfan(i for i in range(len(full)) if i not in star)


# ---------------------------------------------------------------------------
# checks


def check_lem1_2(fan: Fan, jobs: int) -> None:
    for rho in range(1, len(fan)):
        h = betti(build_E(fan, fan.faces_of(rho)))
        if h:
            (p, q), d = next(iter(sorted(h.items())))
            raise Failure({"part": 1, "cone": rho, "degree": p, "dim": d})
    for rho in range(1, len(fan)):
        local = cone_fan(fan.cones[rho])
        top = len(local) - 1
        for sub in (local, barycentric_subdivision(local).source):
            inner = [s for s in range(len(sub))
                     if _minimal_in(local, sub, s) == top]
            for eta in range(len(sub)):
                phi_set = [s for s in inner if sub.is_face(eta, s)]
                if not phi_set:
                    continue
                h = dict(betti(build_E(sub, phi_set)))
                want = {(fan.dim(rho), 0): 1}
                if h != want:
                    raise Failure({"part": 2, "cone": rho, "eta": eta, "cohomology": sorted(h.items())})


def _minimal_in(target: Fan, sub: Fan, s: int) -> int:
    return minimal_cone(target, sub.cones[s].barycenter())


def check_lem1_4(fan: Fan, jobs: int) -> None:
    L = build_SdP(fan)
    for rho in range(1, len(fan)):
        ic = i_circ(L, rho)
        m = phi(L, rho, ic)
        n = len(L.mods[rho])
        if m.ncols != n or rank(m) != n:
            raise Failure({"cone": rho, "rows": n, "cols": m.ncols, "rank": rank(m)})
        for j, col in enumerate(m.cols):
            i0, j0 = ic.module.bideg[j]
            for i in col:
                if L.mods[rho].bideg[i] != (i0 + 1, j0):
                    raise Failure({"cone": rho, "cell": j, "reason": "degree"})
        if L.dmap(rho, rho) @ m + m @ ic.d != SparseMap.zero(n, m.ncols):
            raise Failure({"cone": rho, "reason": "not a map into the shift"})


def check_lem1_5(fan: Fan, jobs: int) -> None:
    per_cone_quasi_iso(psi(fan), "psi")
    P = build_P(fan)
    for rho in range(1, len(fan)):
        h = betti(i_star(P, rho).complex())
        if h:
            (p, q), d = next(iter(sorted(h.items())))
            raise Failure({"cone": rho, "complex": "i_star(P)", "bidegree": [p, q], "dim": d})


def check_lem1_9(fan: Fan, jobs: int) -> None:
    top = build_ic(fan, "top").ic
    comp, kernels = top_comparison(fan)
    comp.validate()
    P = build_P(fan)
    for s in range(len(fan)):
        dims = top.mods[s].dims()
        if dims != {(fan.dim(s), 0): 1}:
            raise Failure({"cone": s, "ic_t_dims": sorted(dims.items())})
        m = comp.comp(s)
        for c, (_, T) in enumerate(P.mods[s].labels):
            if bool(T) != (not m.cols[c]):
                raise Failure({"cone": s, "cell": list(T), "reason": "kernel differs from det⊗N(σ)A(σ)"})


def check_lem1_10(fan: Fan, jobs: int) -> None:
    r = fan.rank
    support_within(gamma_betti(fan, "top", jobs), lambda p, q: p <= q + r)


def check_thm2_1(fan: Fan, jobs: int) -> None:
    require_boundary(fan)
    h = gamma_betti(fan, "middle", jobs)
    r = fan.rank
    for (p, q), d in sorted(h.items()):
        e = h.get((r - 1 - p, -r - q), 0)
        if d != e:
            raise Failure({"bidegree": [p, q], "dim": d, "dual_bidegree": [r - 1 - p, -r - q], "dual_dim": e})


def check_thm2_8(fan: Fan, jobs: int) -> None:
    f = barycentric_subdivision(fan)
    hd = gamma_betti(fan, "middle", jobs)
    hs = gamma_betti(f.source, "middle", jobs)
    for key, d in sorted(hd.items()):
        if d > hs.get(key, 0):
            raise Failure({"bidegree": list(key), "dim_delta": d, "dim_sigma": hs.get(key, 0)})
    try:
        dmap = delta(f, Perversity.middle(fan), Perversity.middle(f.source))
    except KernelNotPreserved as exc:
        s, rho, element = exc.witness
        raise Failure({"reason": "phi_Sigma/Delta does not preserve the truncation kernels",
                       "sigma_cone": s, "sigma_rays": _rays(f.source, s),
                       "delta_cone": rho, "delta_rays": _rays(fan, rho), "element": element}) from None
    _, target, ranks = cohomology_ranks(dmap, jobs)
    for key, d in sorted(target.items()):
        if ranks.get(key, 0) != d:
            raise Failure({"bidegree": list(key), "target_dim": d, "rank": ranks.get(key, 0)})


def check_lem3_1(fan: Fan, jobs: int) -> None:
    top = build_ic(fan, "top").ic
    for pi in range(1, len(fan)):
        if not fan.cones[pi].is_simplicial:
            continue
        r = fan.dim(pi)
        h1 = dict(betti(top.cone_complex(pi)))
        if h1 != {(r, 0): 1}:
            raise Failure({"cone": pi, "complex": "ic_t(pi)", "cohomology": sorted(h1.items())})
        h2 = dict(betti(i_star(top, pi).complex()))
        if h2 != {(0, -r): 1}:
            raise Failure({"cone": pi, "complex": "i_star", "cohomology": sorted(h2.items())})


def check_thm3_2(fan: Fan, jobs: int) -> None:
    require(fan.is_simplicial, "fan is not simplicial")
    b, m, t = Perversity.bottom(fan), Perversity.middle(fan), Perversity.top(fan)
    for lo, hi, label in ((b, t, "b->t"), (b, m, "b->m"), (m, t, "m->t")):
        per_cone_quasi_iso(natural_map(fan, lo, hi), label)


def check_thm3_3(fan: Fan, jobs: int) -> None:
    require(fan.is_simplicial and fan.is_complete, "needs a simplicial complete fan")
    r = fan.rank
    support_within(gamma_betti(fan, "top", jobs), lambda p, q: p == q + r)


def _star_inclusion(fan: Fan, eta: int) -> GemMap:
    ic = build_ic(fan, "top").ic
    star = set(fan.star(eta))
    sub = ic.restrict(star, "ic_t|star")
    comps = {s: SparseMap.identity(len(ic.mods[s])) for s in star}
    return GemMap(sub, ic, comps, "star inclusion")


def check_thm3_5(fan: Fan, jobs: int) -> None:
    require(fan.is_simplicial and fan.is_complete, "needs a simplicial complete fan")
    for eta in range(len(fan)):
        hs, _, ranks = cohomology_ranks(_star_inclusion(fan, eta), jobs)
        for key, d in sorted(hs.items()):
            if ranks.get(key, 0) != d:
                raise Failure({"eta": eta, "bidegree": list(key), "source_dim": d, "rank": ranks.get(key, 0)})


def check_thm3_6(fan: Fan, jobs: int) -> None:
    for full, g in star_complement_cases(fan):
        sub, _ = complement_subfan(full, g)
        r = full.rank
        support_within(gamma_betti(sub, "top", jobs), lambda p, q: p == q + r, gamma=g)


def check_lem3_7(fan: Fan, jobs: int) -> None:
    for full, g in star_complement_cases(fan):
        ic = build_ic(full, "top").ic
        star = set(full.star(g))
        keep = [s for s in range(len(full)) if s not in star]
        rest = ic.restrict(keep, "ic_t|complement")
        h = GemMap(ic, rest, {s: SparseMap.identity(len(ic.mods[s])) for s in keep}, "restriction")
        _, target, ranks = cohomology_ranks(h, jobs)
        r = full.rank
        for (p, q), d in sorted(target.items()):
            if p == q + r and ranks.get((p, q), 0) != d:
                raise Failure({"gamma": g, "bidegree": [p, q], "target_dim": d, "rank": ranks.get((p, q), 0)})


def check_thm4_1(fan: Fan, jobs: int) -> None:
    require(fan.is_complete, "fan is not complete")
    r = fan.rank
    support_within(gamma_betti(fan, "middle", jobs), lambda p, q: p == q + r)


def check_thm4_2(fan: Fan, jobs: int) -> None:
    pi = require_boundary(fan)
    full, part, _ = complete_above_boundary(pi)
    sd_full = barycentric_subdivision(full).source
    eta = sd_full.index[frozenset([sd_full.rays.index(primitive(pi.barycenter()))])]
    star = set(sd_full.star(eta))
    outside = {frozenset(sd_full.rays[k] for k in sd_full.ray_sets[s])
               for s in range(len(sd_full)) if s not in star}
    sd_part = barycentric_subdivision(part).source
    mine = {frozenset(sd_part.rays[k] for k in s) for s in sd_part.ray_sets}
    if outside != mine:
        raise Failure({"reason": "Σ̃ minus the star of γ is not a barycentric subdivision of Δ"})
    r = fan.rank
    support_within(gamma_betti(part, "middle", jobs), lambda p, q: p == q + r)


def second_diagonal(r: int) -> Callable[[int, int], bool]:
    return lambda p, q: (p + q >= 0 and p == q + r - 1) or (p + q <= -1 and p == q + r)


def check_thm4_3(fan: Fan, jobs: int) -> None:
    require_boundary(fan)
    support_within(gamma_betti(fan, "middle", jobs), second_diagonal(fan.rank))


def check_cor4_4(fan: Fan, jobs: int) -> None:
    ic = build_ic(fan, "middle").ic
    for rho in range(1, len(fan)):
        h = betti(i_circ(ic, rho).complex())
        support_within(h, second_diagonal(fan.dim(rho)), cone=rho)


def check_cor4_5(fan: Fan, jobs: int) -> None:
    ic = build_ic(fan, "middle").ic
    for rho in range(1, len(fan)):
        r = fan.dim(rho)
        support_within(betti(ic.cone_complex(rho)), lambda i, j: i + j >= 1 and i == j + r,
                       cone=rho, complex="ic(rho)")
        support_within(betti(i_star(ic, rho).complex()), lambda i, j: i + j <= -1 and i == j + r,
                       cone=rho, complex="i_star")


def check_euler(fan: Fan, jobs: int) -> None:
    h = gamma_betti(fan, "top", jobs)
    qs = set(range(-fan.rank, 1)) | {q for _, q in h}
    for q in sorted(qs):
        a, b = euler_characteristic(h, q), euler_oracle_top(fan, q)
        if a != b:
            raise Failure({"q": q, "euler": a, "oracle": b})


REGISTRY: dict[str, tuple[Callable[[Fan, int], None], str]] = {
    "lem1.2": (check_lem1_2, "E(F(ρ)) is acyclic; E(Φ) has cohomology det(ρ) in degree r_ρ only"),
    "lem1.4": (check_lem1_4, "φ(SdP,ρ) is an isomorphism onto SdP(ρ)[1]"),
    "lem1.5": (check_lem1_5, "ψ is a per-cone quasi-isomorphism; i_ρ*(P) is acyclic"),
    "lem1.9": (check_lem1_9, "ic_t(σ) = det(σ)⊗Ā(σ) and Ker = det(σ)⊗N(σ)A(σ)"),
    "lem1.10": (check_lem1_10, "H^p(Γ(ic_t))_q = 0 for p > q + r"),
    "thm2.1": (check_thm2_1, "duality symmetry of Γ(ic) on boundary fans"),
    "thm2.8": (check_thm2_8, "decomposition: H(Γ(ic(Σ))) → H(Γ(ic(Δ))) is surjective"),
    "lem3.1": (check_lem3_1, "local cohomology of ic_t at simplicial cones"),
    "thm3.2": (check_thm3_2, "ic_p ≃ ic_t on simplicial fans for b ≤ p ≤ t"),
    "thm3.3": (check_thm3_3, "diagonal vanishing of Γ(ic_t) on simplicial complete fans"),
    "thm3.5": (check_thm3_5, "star inclusions are injective on cohomology"),
    "thm3.6": (check_thm3_6, "diagonal vanishing after removing the star of a ray"),
    "lem3.7": (check_lem3_7, "restriction to the star complement is surjective on the diagonal"),
    "thm4.1": (check_thm4_1, "first diagonal theorem for complete fans"),
    "thm4.2": (check_thm4_2, "diagonal vanishing on Δ̃ minus the full cone"),
    "thm4.3": (check_thm4_3, "second diagonal theorem for boundary fans"),
    "cor4.4": (check_cor4_4, "support of i_ρ*(ic(F(ρ)∖{ρ}))"),
    "cor4.5": (check_cor4_5, "local support conditions of ic"),
    "euler": (check_euler, "alternating sums of Γ(ic_t) match the f-vector oracle"),
}


def names() -> list[str]:
    return list(REGISTRY)


def check(name: str, fan: Fan, jobs: int = 1, label: str | None = None) -> CheckReport:
    if name not in REGISTRY:
        raise UnknownCheck(name)
    label = label or fan.name or "fan"
    func = REGISTRY[name][0]
    try:
        func(fan, jobs)
    except HypothesisNotMet as exc:
        return CheckReport(name, label, "hypothesis-not-met", None, str(exc))
    except Failure as exc:
        return CheckReport(name, label, "fail", exc.witness)
    return CheckReport(name, label, "pass")


def check_all(fan: Fan, jobs: int = 1, label: str | None = None) -> list[CheckReport]:
    return [check(n, fan, jobs, label) for n in REGISTRY]
