"""Command-line front end.

Exit codes: 0 success, 1 check failure, 2 usage or parse error,
3 semantic input error, 4 I/O error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import corpus
from .gem_complex import GemError, Perversity, PerversityDomainMismatch
from .lattice_fan import (Fan, FanError, NotABoundaryFan, barycentric_subdivision, boundary_cone,
                          fan_from_cones)
from .theorem_harness import REGISTRY, UnknownCheck, check, gamma_betti

EXIT_FAIL, EXIT_PARSE, EXIT_SEMANTIC, EXIT_IO = 1, 2, 3, 4
FORMAT = "fanic/1"


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise CliError(EXIT_PARSE, f"{path}: expected a JSON object")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise CliError(EXIT_PARSE, f"{path}: unsupported format {fmt!r}")
    return doc


def load_fan(path: str) -> Fan:
    doc = _read_json(path)
    try:
        rank = doc["rank"]
        rays, cones = doc["rays"], doc["cones"]
        ok = (isinstance(rank, int) and rank >= 0 and isinstance(rays, list) and isinstance(cones, list)
              and all(isinstance(v, list) and all(isinstance(x, int) for x in v) for v in rays)
              and all(isinstance(c, list) and all(isinstance(i, int) for i in c) for c in cones))
    except KeyError as exc:
        raise CliError(EXIT_PARSE, f"{path}: missing field {exc}") from None
    if not ok:
        raise CliError(EXIT_PARSE, f"{path}: rank, rays and cones must be integers and integer lists")
    try:
        fan = fan_from_cones(rank, rays, cones, name=doc.get("name"))
    except FanError as exc:
        raise CliError(EXIT_SEMANTIC, f"{path}: invalid fan: {exc}") from None
    if not fan.name:
        fan.name = Path(path).stem
    return fan


def load_perversity(fan: Fan, source: str) -> Perversity:
    """A named perversity, or a file with "dims" {dim: value} or "cones" [{rays, value}].

    Ray indices refer to the order of rays in the fan file.
    """
    if source in ("top", "middle", "bottom"):
        return Perversity.named(fan, source)
    doc = _read_json(source)
    try:
        if "dims" in doc:
            return Perversity.from_dims(fan, {int(k): int(v) for k, v in doc["dims"].items()})
        if "cones" in doc:
            pos = fan.input_ray_index
            return Perversity.from_cones(
                fan, {tuple(sorted(pos[int(i)] for i in c["rays"])): int(c["value"]) for c in doc["cones"]})
    except PerversityDomainMismatch:
        raise
    except (AttributeError, IndexError, KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"{source}: malformed perversity: {exc}") from None
    raise CliError(EXIT_PARSE, f"{source}: perversity needs a 'dims' or 'cones' field")


def _write(path: str, doc: dict) -> None:
    try:
        Path(path).write_text(json.dumps(doc, indent=1) + "\n")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


class Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except CliError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.code)
        except (PerversityDomainMismatch, NotABoundaryFan, FanError, GemError) as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(EXIT_SEMANTIC)


jobs_option = click.option("--jobs", "-j", default=1, show_default=True, type=click.IntRange(1),
                           help="Worker processes for rank computations.")


@click.group(cls=Group)
def main():
    """Combinatorial intersection cohomology of rational polyhedral fans."""


@main.command()
@click.argument("fan_file")
def info(fan_file):
    """Rank, f-vector, completeness and simpliciality of a fan."""
    fan = load_fan(fan_file)
    f = ",".join(str(x) for x in fan.f_vector)
    parts = [f"rank {fan.rank}", f"f = ({f})",
             "complete" if fan.is_complete else "not complete",
             "simplicial" if fan.is_simplicial else "not simplicial"]
    click.echo(", ".join(parts))


@main.command()
@click.argument("fan_file")
@click.option("--perversity", "-p", default="middle", show_default=True,
              help="top, middle, bottom, or a perversity JSON file.")
@click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv", show_default=True)
@jobs_option
def betti(fan_file, perversity, fmt, jobs):
    """Betti table (p, q, dim H^p_q) of Γ(ic_p) of a fan."""
    fan = load_fan(fan_file)
    table = gamma_betti(fan, load_perversity(fan, perversity), jobs)
    click.echo(table.to_tsv() if fmt == "tsv" else table.to_json(), nl=fmt == "json")


@main.command("check")
@click.argument("fan_file")
@click.argument("name", required=False)
@click.option("--all", "run_all", is_flag=True, help="Run every registered check.")
@click.option("--list", "list_only", is_flag=True, help="List registered checks and exit.")
@jobs_option
def check_cmd(fan_file, name, run_all, list_only, jobs):
    """Run a theorem check; prints one JSON line per report."""
    if list_only:
        for n, (_, desc) in REGISTRY.items():
            click.echo(f"{n}\t{desc}")
        return
    if bool(name) == run_all:
        raise CliError(EXIT_PARSE, "give exactly one of a check name or --all")
    fan = load_fan(fan_file)
    names = list(REGISTRY) if run_all else [name]
    failed = False
    for n in names:
        try:
            rep = check(n, fan, jobs)
        except UnknownCheck:
            raise CliError(EXIT_PARSE, f"UnknownCheck: {n!r}; try --list") from None
        click.echo(rep.to_json())
        failed |= rep.status == "fail"
        if not run_all and rep.status == "hypothesis-not-met":
            failed = True
    if failed:
        sys.exit(EXIT_FAIL)


@main.command()
@click.argument("fan_file")
@click.option("--barycentric", is_flag=True, default=True, help="Barycentric subdivision (the only kind).")
@click.option("--output", "-o", required=True, help="Output fan file; the cone map goes to <stem>.map.json.")
def subdivide(fan_file, barycentric, output):
    """Write the barycentric subdivision of a fan and its cone map."""
    fan = load_fan(fan_file)
    f = barycentric_subdivision(fan)
    f.source.name = f"Sd({fan.name})"
    sigma = f.source
    pairs = [[sorted(sigma.ray_sets[s]), sorted(fan.ray_sets[t])] for s, t in enumerate(f.cone_map)]
    out = Path(output)
    _write(str(out), sigma.to_json())
    _write(str(out.with_name(out.stem + ".map.json")), {"format": FORMAT, "pairs": pairs})


@main.command()
@click.argument("fan_file")
@click.option("--ell", "-l", "ell", required=True, type=int)
@jobs_option
def gslice(fan_file, ell, jobs):
    """dim H^p of the q = ℓ − r slice of Γ(ic_t) of a boundary fan F(π)∖{π}."""
    fan = load_fan(fan_file)
    boundary_cone(fan)
    row = gamma_betti(fan, "top", jobs).slice(ell - fan.rank)
    for p in range(fan.rank + 1):
        click.echo(f"{p}\t{row.get(p, 0)}")


@main.group("corpus")
def corpus_group():
    """Built-in test fans."""


@corpus_group.command("list")
def corpus_list():
    for n in corpus.names():
        click.echo(n)


@corpus_group.command("export")
@click.argument("name", type=click.Choice(corpus.names()))
@click.option("--output", "-o", help="Output file; stdout if omitted.")
def corpus_export(name, output):
    doc = corpus.get(name).to_json()
    if output:
        _write(output, doc)
    else:
        click.echo(json.dumps(doc, indent=1))


if __name__ == "__main__":
    main()
