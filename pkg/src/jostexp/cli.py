"""``jost`` command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import analysis, expansion
from .analysis import RootNotFoundError, SingularJostError
from .channels import SheetSelector
from .config import ConfigError, RunConfig, bundled_text, load_config, parse_complex, parse_seed
from .expansion import GridSpec
from .ode import IntegrationError
from .solver import ThresholdError, integrate_coefficients

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
SCAN_CHUNK = 128

log = logging.getLogger("jostexp")


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)
        log.info("wrote %s", out)


def _common(f):
    f = click.option("--out", "out", default=None, help="Output file (default: stdout).")(f)
    f = click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True,
                     help="Worker processes for grid and seed work.")(f)
    f = click.option("--override", "overrides", multiple=True, metavar="KEY=VALUE",
                     help="Override a config entry, e.g. solver.R=50 (repeatable).")(f)
    return f


def _config(path, overrides) -> RunConfig:
    if path is None:
        raise ConfigError("--config is required for this command")
    return load_config(path, overrides)


def _pair(value, name):
    if value is None:
        return None
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"{name} must be a two-element list")
    return float(value[0]), float(value[1])


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Multichannel Jost matrices, spectral points and power-series expansions."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)


# -- spectrum -----------------------------------------------------------------------


def _seed_task(args):
    cs, p, s, seed = args
    src = analysis.DirectSource(cs, p, s)
    try:
        return analysis.find_spectral_point(src, cs, seed.energy, seed.sheet)
    except RootNotFoundError as exc:
        log.warning("seed %s on %s: %s", seed.energy, seed.sheet, exc)
        return None


@cli.command()
@click.option("--config", "config_path", required=True, help="Config file or bundled example name.")
@click.option("--interval", nargs=2, type=float, default=None, help="Real interval for the bound-state scan.")
@click.option("--no-bound-states", is_flag=True, help="Skip the bound-state scan.")
@click.option("--seed", "seeds", multiple=True, metavar="E@SHEET", help="Resonance seed, e.g. 4.7@-- (repeatable).")
@click.option("--table", "table_path", default=None, help="Search an expansion table instead of integrating.")
@_common
def spectrum(config_path, interval, no_bound_states, seeds, table_path, overrides, jobs, out):
    """Bound states on the physical sheet and resonances from seeds."""
    cfg = _config(config_path, overrides)
    sec = cfg.section("spectrum")
    cs, p, s = cfg.channels, cfg.potential, cfg.solver
    if table_path is not None:
        tbl, tcs = expansion.load_table(table_path)
        if tcs != cs:
            raise ConfigError("expansion table was built for a different channel set")
        source = analysis.ExpansionSource(tbl, cs)
    else:
        source = analysis.DirectSource(cs, p, s)
    points = []
    interval = interval or _pair(sec.get("interval"), "spectrum.interval")
    if interval is not None and not no_bound_states:
        per_unit = int(sec.get("samples_per_unit", analysis.SAMPLES_PER_UNIT))
        points += analysis.bound_state_scan(source, cs, interval, per_unit)
    seed_list = [parse_seed(x) for x in seeds] if seeds else cfg.seeds()
    for sd in seed_list:
        if len(sd.sheet) != cs.n:
            raise ConfigError(f"seed sheet {sd.sheet} does not match {cs.n} channels")
    if table_path is not None:
        found = []
        for sd in seed_list:
            try:
                found.append(analysis.find_spectral_point(source, cs, sd.energy, sd.sheet))
            except RootNotFoundError as exc:
                log.warning("seed %s on %s: %s", sd.energy, sd.sheet, exc)
    else:
        found = expansion._run_tasks(_seed_task, [(cs, p, s, sd) for sd in seed_list], jobs)
    points += [pt for pt in found if pt is not None]
    if seed_list and not any(pt is not None for pt in found):
        raise RootNotFoundError("no resonance seed converged")
    _emit(analysis.spectral_csv(analysis.dedupe(points)), out)


# -- scan -----------------------------------------------------------------------------


def _scan_task(args):
    cs, p, s, energies = args
    return analysis.scan_cross_sections(cs, p, energies, s)


@cli.command()
@click.option("--config", "config_path", required=True, help="Config file or bundled example name.")
@click.option("--range", "erange", nargs=2, type=float, default=None, help="Energy range START STOP.")
@click.option("--step", type=float, default=None, help="Energy step.")
@_common
def scan(config_path, erange, step, overrides, jobs, out):
    """Cross sections on a real energy grid."""
    cfg = _config(config_path, overrides)
    sec = cfg.section("scan")
    start, stop = erange if erange else (sec.get("start"), sec.get("stop"))
    step = step if step is not None else sec.get("step")
    if start is None or stop is None or step is None:
        raise ConfigError("scan needs start, stop and step (config [scan] or --range/--step)")
    start, stop, step = float(start), float(stop), float(step)
    if not (step > 0 and stop >= start):
        raise ConfigError("scan needs step > 0 and stop >= start")
    cs = cfg.channels
    if stop <= cs.thresholds.min():
        raise ConfigError("no open channels: the whole range lies below the lowest threshold")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    energies = start + step * np.arange(count)
    chunks = [energies[i : i + SCAN_CHUNK] for i in range(0, count, SCAN_CHUNK)]
    parts = expansion._run_tasks(_scan_task, [(cs, cfg.potential, cfg.solver, c) for c in chunks], jobs)
    sigma = np.concatenate(parts) if parts else np.zeros((0, cs.n, cs.n))
    _emit(analysis.cross_section_csv(cs, energies, sigma), out)


# -- expand / eval ----------------------------------------------------------------------


@cli.command()
@click.option("--config", "config_path", required=True, help="Config file or bundled example name.")
@click.option("--center", default=None, help="Expansion centre, e.g. 5 or 7.5-2i.")
@click.option("--order", type=int, default=None, help="Highest power M.")
@_common
def expand(config_path, center, order, overrides, jobs, out):
    """Write the power-series coefficients around a centre energy as JSON."""
    cfg = _config(config_path, overrides)
    sec = cfg.section("expand")
    center = center if center is not None else sec.get("center")
    order = order if order is not None else sec.get("order")
    if center is None or order is None:
        raise ConfigError("expand needs a centre and an order (config [expand] or --center/--order)")
    order = int(order)
    if order < 0:
        raise ConfigError("order must be non-negative")
    tbl = integrate_coefficients(cfg.channels, cfg.potential, parse_complex(center), order, cfg.solver)
    expansion.save_table(tbl, out)


def _cnum(z) -> str:
    z = complex(z)
    # adding 0.0 turns -0.0 into 0.0 so signs of exact zeros do not vary
    return f"{z.real + 0.0:+.12e}{z.imag + 0.0:+.12e}i"


def _matrix_lines(name, m) -> list[str]:
    lines = [f"{name}:"]
    for row in np.atleast_2d(m):
        lines.append("  " + "  ".join(_cnum(z) for z in row))
    return lines


@cli.command(name="eval")
@click.option("--table", "table_path", required=True, help="Expansion table written by 'jost expand'.")
@click.option("--energy", required=True, help="Energy, e.g. 4.77-0.001i.")
@click.option("--sheet", default=None, help="Sign string such as ++ or -- (default: physical).")
@click.option("--out", "out", default=None, help="Output file (default: stdout).")
def eval_cmd(table_path, energy, sheet, out):
    """Evaluate Jost matrices, det F_in and S from an expansion table."""
    try:
        tbl, cs = expansion.load_table(table_path)
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    e = parse_complex(energy)
    sel = SheetSelector.parse(sheet) if sheet else SheetSelector((1,) * cs.n)
    if len(sel) != cs.n:
        raise ConfigError(f"sheet {sel} does not match {cs.n} channels")
    jp = expansion.jost_from_expansion(tbl, cs, e, sel)
    lines = [f"E: {_cnum(e)}", f"sheet: {sel}"]
    lines += _matrix_lines("F_in", jp.F_in) + _matrix_lines("F_out", jp.F_out)
    d = jp.det_in
    lines.append(f"det_F_in: {_cnum(d)}")
    try:
        lines += _matrix_lines("S", analysis.s_matrix(jp))
    except SingularJostError:
        lines.append("S: undefined (F_in is singular)")
    _emit("\n".join(lines) + "\n", out)


# -- maps ---------------------------------------------------------------------------------


def _grid(sec, re, im, steps, default_steps) -> GridSpec:
    re = re or _pair(sec.get("re"), "re")
    im = im or _pair(sec.get("im"), "im")
    steps = steps or sec.get("steps", default_steps)
    if re is None or im is None:
        raise ConfigError("a rectangle is required (config re/im or --re/--im)")
    if not (isinstance(steps, (list, tuple)) and len(steps) == 2):
        raise ConfigError("steps must be two integers")
    return GridSpec(re[0], re[1], im[0], im[1], int(steps[0]), int(steps[1]))


@cli.command(name="accuracy-map")
@click.option("--config", "config_path", required=True, help="Config file or bundled example name.")
@click.option("--table", "table_path", required=True, help="Expansion table written by 'jost expand'.")
@click.option("--re", "re_", nargs=2, type=float, default=None, help="Real-part range.")
@click.option("--im", "im_", nargs=2, type=float, default=None, help="Imaginary-part range.")
@click.option("--steps", nargs=2, type=int, default=None, help="Grid points along re and im.")
@click.option("--sheet", default=None, help="Sign string (default from config, else physical).")
@_common
def accuracy_map_cmd(config_path, table_path, re_, im_, steps, sheet, overrides, jobs, out):
    """Relative error of det F_in from the table against direct integration."""
    cfg = _config(config_path, overrides)
    sec = cfg.section("accuracy_map")
    grid = _grid(sec, re_, im_, steps, [101, 101])
    tbl, tcs = expansion.load_table(table_path)
    if tcs != cfg.channels:
        raise ConfigError("expansion table was built for a different channel set")
    sheet = sheet or sec.get("sheet")
    sel = SheetSelector.parse(sheet) if sheet else SheetSelector((1,) * tcs.n)
    amap = expansion.accuracy_map(tbl, cfg.channels, cfg.potential, grid, sel, cfg.solver, jobs=jobs)
    _emit(expansion.map_csv_text(amap), out)


@cli.command()
@click.option("--config", "config_path", required=True, help="Config file or bundled example name.")
@click.option("--re", "re_", nargs=2, type=float, default=None, help="Real-part range.")
@click.option("--im", "im_", nargs=2, type=float, default=None, help="Imaginary-part range.")
@click.option("--steps", nargs=2, type=int, default=None, help="Grid points along re and im.")
@click.option("--map", "as_map", is_flag=True, help="Write the per-point margin instead of the boundary.")
@_common
def domain(config_path, re_, im_, steps, as_map, overrides, jobs, out):
    """Boundary of the region where the expansion coefficients converge."""
    cfg = _config(config_path, overrides)
    grid = _grid(cfg.section("domain"), re_, im_, steps, [201, 201])
    cs, p = cfg.channels, cfg.potential
    if as_map:
        e = grid.energies()
        margin = expansion.domain_margin(cs, p, e)
        lines = ["re_E,im_E,margin,inside"]
        for z, m in zip(e.ravel(), margin.ravel()):
            lines.append(f"{z.real:.12g},{z.imag:.12g},{m:.12g},{int(m > 0)}")
    else:
        im = grid.im
        re = expansion.domain_boundary(cs, p, im)
        lines = ["re_E,im_E"]
        lines += [f"{r:.12g},{i:.12g}" for r, i in zip(re, im)]
    _emit("\n".join(lines) + "\n", out)


@cli.command()
@click.argument("name")
def example(name):
    """Print a bundled example configuration (noro_taylor, zero)."""
    click.echo(bundled_text(name), nl=False)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="jost", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (IntegrationError, RootNotFoundError, SingularJostError, ThresholdError) as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    return EXIT_OK


def run() -> None:
    sys.exit(main())
