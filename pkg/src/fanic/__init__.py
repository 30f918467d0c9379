"""Exact combinatorial intersection cohomology of rational polyhedral fans."""

from .cohomology import BettiTable, betti, gamma
from .gem_complex import GemMap, GemObject, Perversity, build_ic
from .lattice_fan import Cone, Fan, barycentric_subdivision, fan_from_json
from .theorem_harness import CheckReport, HypothesisNotMet, check, check_all

__all__ = ["BettiTable", "betti", "gamma", "GemMap", "GemObject", "Perversity", "build_ic",
           "Cone", "Fan", "barycentric_subdivision", "fan_from_json", "CheckReport",
           "HypothesisNotMet", "check", "check_all"]
