"""Command-line pipeline: one subcommand per construction stage.

    generate    -> map document for a linear holomorphic map
    dual        -> map document of the Christoffel dual
    weierstrass -> family document (map + parameter + integrated frame)
    gauss       -> pair document extracted from a family
    darboux     -> pair document propagated from a seed point
    invert      -> weierstrass document recovered from a pair
    validate    -> machine-readable report over all geometric checks
    export      -> quad OBJ mesh of one family member in the Poincare ball

Exit codes: 0 all good, 1 validation failure, 2 input error.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import click
import numpy as np

from . import io
from .errors import DiscreteGeometryError, InputError
from .front import build_front, eval_front_coords
from .gauss import darboux_propagate, lift_affine
from .grid import QuadGrid
from .holo import HolomorphicMap, christoffel_dual, make_linear
from .invert import invert_pair

EXIT_VALIDATION = 1
EXIT_INPUT = 2


@dataclass(frozen=True)
class RunConfig:
    """Validated common options of a CLI invocation."""

    input_path: str | None = None
    output_path: str | None = None
    t: float | None = None
    s_values: tuple = ()
    tolerances: dict = field(default_factory=dict)
    report_path: str | None = None

    def __post_init__(self):
        paths = [p for p in (self.input_path, self.output_path, self.report_path) if p]
        if len(set(paths)) != len(paths):
            raise InputError("input, output and report paths must be distinct")
        for s in self.s_values:
            if not np.isfinite(s):
                raise InputError(f"s must be finite, got {s}")


def _parse_tolerances(pairs: tuple[str, ...]) -> dict:
    out = {}
    for item in pairs:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"tolerance override must look like name=value, got {item!r}")
        try:
            out[name] = float(value)
        except ValueError as exc:
            raise InputError(f"bad tolerance value in {item!r}") from exc
    return out


def _run(action):
    try:
        return action()
    except InputError as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except DiscreteGeometryError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_INPUT)


@click.group()
def main() -> None:
    """Discrete flat fronts in hyperbolic 3-space."""


@main.command()
@click.option("--rows", type=int, required=True, help="Vertex rows (>= 2)")
@click.option("--cols", type=int, required=True, help="Vertex columns (>= 2)")
@click.option("--alpha", type=float, default=1.0, show_default=True, help="Horizontal step")
@click.option("--beta", type=float, default=1.0, show_default=True, help="Vertical step")
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
def generate(rows, cols, alpha, beta, output_path) -> None:
    """Write the linear holomorphic map m*alpha + i*n*beta."""

    def action():
        cfg = RunConfig(output_path=output_path)
        try:
            hmap = make_linear(QuadGrid(rows, cols), alpha, beta)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        io.save_doc(io.holomap_to_doc(hmap), cfg.output_path)
        click.echo(f"wrote map document {cfg.output_path}")

    _run(action)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
def dual(input_path, output_path) -> None:
    """Integrate the Christoffel dual of a holomorphic map."""

    def action():
        cfg = RunConfig(input_path=input_path, output_path=output_path)
        hmap = io.holomap_from_doc(io.load_doc(cfg.input_path))
        gstar, residual = christoffel_dual(hmap)
        out = HolomorphicMap(hmap.grid, hmap.labelling, gstar)
        io.save_doc(io.holomap_to_doc(out), cfg.output_path)
        click.echo(f"wrote dual map {cfg.output_path} (closure residual {residual:.3e})")

    _run(action)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--t", type=float, required=True, help="Family parameter, t not in {0, 1/a}")
@click.option("--complex-branch", is_flag=True, help="Allow 1 - t*a < 0 (principal complex sqrt)")
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
def weierstrass(input_path, t, complex_branch, output_path) -> None:
    """Build the edge connection and integrate the frame."""

    def action():
        cfg = RunConfig(input_path=input_path, output_path=output_path, t=t)
        hmap = io.holomap_from_doc(io.load_doc(cfg.input_path))
        family = build_front(hmap, t, allow_complex=complex_branch)
        io.save_doc(io.family_to_doc(family), cfg.output_path)
        click.echo(
            f"wrote family document {cfg.output_path} "
            f"(path residual {family.frame.path_residual:.3e})"
        )

    _run(action)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
def gauss(input_path, output_path) -> None:
    """Extract the Gauss-map pair of a front family."""

    def action():
        cfg = RunConfig(input_path=input_path, output_path=output_path)
        family = io.family_from_doc(io.load_doc(cfg.input_path))
        from .gauss import extract_pair

        io.save_doc(io.pair_to_doc(extract_pair(family)), cfg.output_path)
        click.echo(f"wrote pair document {cfg.output_path}")

    _run(action)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Map document providing the first leg and its labelling b")
@click.option("--t", type=float, required=True)
@click.option("--seed-re", type=float, required=True, help="Seed point, real part")
@click.option("--seed-im", type=float, required=True, help="Seed point, imaginary part")
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
def darboux(input_path, t, seed_re, seed_im, output_path) -> None:
    """Propagate the second leg of a Darboux pair from a seed point."""

    def action():
        cfg = RunConfig(input_path=input_path, output_path=output_path, t=t)
        hmap = io.holomap_from_doc(io.load_doc(cfg.input_path))
        seed = np.array([seed_re + 1j * seed_im, 1.0], dtype=complex)
        pair = darboux_propagate(lift_affine(hmap.g), hmap.labelling, t, seed)
        io.save_doc(io.pair_to_doc(pair), cfg.output_path)
        worst = float(np.max(pair.face_residuals))
        click.echo(f"wrote pair document {cfg.output_path} (face residual {worst:.3e})")

    _run(action)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--w-root-re", type=float, default=1.0, show_default=True)
@click.option("--w-root-im", type=float, default=0.0, show_default=True)
@click.option("--g-root-re", type=float, default=0.0, show_default=True)
@click.option("--g-root-im", type=float, default=0.0, show_default=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
def invert(input_path, w_root_re, w_root_im, g_root_re, g_root_im, output_path) -> None:
    """Recover Weierstrass data (potential, labelling, gauge) from a pair."""

    def action():
        cfg = RunConfig(input_path=input_path, output_path=output_path)
        pair = io.pair_from_doc(io.load_doc(cfg.input_path))
        wdata = invert_pair(
            pair, w_root=w_root_re + 1j * w_root_im, g_root=g_root_re + 1j * g_root_im
        )
        io.save_doc(io.wdata_to_doc(wdata), cfg.output_path)
        click.echo(f"wrote weierstrass document {cfg.output_path}")

    _run(action)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--s", "s_values", type=float, multiple=True,
              help="Family parameter; repeatable, default s=0 only")
@click.option("--tolerance", "tolerances", type=str, multiple=True,
              help="Override as name=value; repeatable")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None)
def validate(input_path, s_values, tolerances, report_path) -> None:
    """Run all geometric checks on a family document."""

    def action():
        cfg = RunConfig(
            input_path=input_path,
            s_values=tuple(s_values),
            tolerances=_parse_tolerances(tolerances),
            report_path=report_path,
        )
        family = io.family_from_doc(io.load_doc(cfg.input_path))
        report = io.run_validation(family, s_values=cfg.s_values, tolerances=cfg.tolerances)
        click.echo(report.summary())
        if cfg.report_path:
            io.save_doc(report.to_doc(), cfg.report_path)
            click.echo(f"wrote report {cfg.report_path}")
        if not report.passed:
            sys.exit(EXIT_VALIDATION)

    _run(action)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--s", type=float, default=0.0, show_default=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
def export(input_path, s, output_path) -> None:
    """Project one family member to the Poincare ball and write an OBJ mesh."""

    def action():
        cfg = RunConfig(input_path=input_path, output_path=output_path, s_values=(s,))
        family = io.family_from_doc(io.load_doc(cfg.input_path))
        xc, _ = eval_front_coords(family, s)
        io.export_obj(io.poincare_project(xc), cfg.output_path)
        click.echo(f"wrote OBJ mesh {cfg.output_path}")

    _run(action)


if __name__ == "__main__":
    main()
