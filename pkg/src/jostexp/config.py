"""Run configuration: TOML files with command-line overrides.

A configuration names the channels, the potential and the solver settings,
plus optional per-command blocks.  Unknown keys are rejected so typos fail
loudly instead of silently falling back to defaults.

Example::

    hbar = 1.0

    [[channels]]
    threshold = 0.0
    mass = 1.0
    l = 0

    [potential]
    builtin = "noro_taylor"

    [solver]
    R = 40.0
    theta = "auto"
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channels import Channel, ChannelSet, SheetSelector
from .potential import RadialPotential, TabulatedPotential, make_potential
from .solver import SolverSettings

BUNDLED = ("noro_taylor", "zero")

_TOP_KEYS = {"hbar", "channels", "potential", "solver", "spectrum", "scan", "expand", "accuracy_map", "domain"}
_CHANNEL_KEYS = {"threshold", "mass", "l"}
_POTENTIAL_KEYS = {"builtin", "params", "table", "tail_decay"}
_SOLVER_KEYS = {"r_min", "R", "theta", "rel_tol", "abs_tol", "max_steps"}
_SECTION_KEYS = {
    "spectrum": {"interval", "samples_per_unit", "seeds"},
    "scan": {"start", "stop", "step"},
    "expand": {"center", "order"},
    "accuracy_map": {"re", "im", "steps", "sheet"},
    "domain": {"re", "im", "steps"},
}
_SEED_KEYS = {"energy", "sheet"}


class ConfigError(ValueError):
    """The configuration file or an override is invalid."""


@dataclass(frozen=True)
class Seed:
    energy: complex
    sheet: SheetSelector


@dataclass
class RunConfig:
    channels: ChannelSet
    potential: RadialPotential
    solver: SolverSettings
    sections: dict = field(default_factory=dict)
    source: str = ""

    def section(self, name: str) -> dict:
        return dict(self.sections.get(name, {}))

    def seeds(self) -> list[Seed]:
        return [parse_seed(item) for item in self.section("spectrum").get("seeds", [])]


def parse_complex(value) -> complex:
    """Accept a number, an ``[re, im]`` pair or a string such as ``"7.3-0.7i"``."""
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        text = value.strip().replace(" ", "").replace("i", "j")
        try:
            return complex(text)
        except ValueError:
            pass
    raise ConfigError(f"cannot read a complex energy from {value!r}")


def parse_seed(item) -> Seed:
    if isinstance(item, str):
        if "@" not in item:
            raise ConfigError(f"seed {item!r} must look like 'ENERGY@SHEET', e.g. '4.7@--'")
        energy, sheet = item.rsplit("@", 1)
        item = {"energy": energy, "sheet": sheet}
    if not isinstance(item, dict):
        raise ConfigError(f"invalid seed {item!r}")
    _check_keys(item, _SEED_KEYS, "spectrum.seeds")
    if "energy" not in item or "sheet" not in item:
        raise ConfigError("each seed needs 'energy' and 'sheet'")
    try:
        sheet = SheetSelector.parse(str(item["sheet"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return Seed(parse_complex(item["energy"]), sheet)


def _check_keys(table: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _parse_value(text: str):
    """Read an override value as TOML, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``dotted.key=value`` overrides to a parsed document."""
    doc = copy.deepcopy(doc)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, text = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigError(f"override {item!r} has an empty key")
        node = doc
        for p in parts[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {item!r}: {p!r} is not a section")
            node = nxt
        node[parts[-1]] = _parse_value(text.strip())
    return doc


def _build_channels(doc: dict) -> ChannelSet:
    chans = doc.get("channels")
    if not isinstance(chans, list) or not chans:
        raise ConfigError("at least one [[channels]] entry is required")
    out = []
    for i, c in enumerate(chans):
        if not isinstance(c, dict):
            raise ConfigError(f"channels[{i}] must be a table")
        _check_keys(c, _CHANNEL_KEYS, f"channels[{i}]")
        if "threshold" not in c:
            raise ConfigError(f"channels[{i}] needs a threshold")
        try:
            out.append(Channel(float(c["threshold"]), float(c.get("mass", 1.0)), c.get("l", 0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"channels[{i}]: {exc}") from None
    try:
        return ChannelSet(tuple(out), float(doc.get("hbar", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _build_potential(doc: dict, base_dir: Path) -> RadialPotential:
    spec = doc.get("potential")
    if not isinstance(spec, dict):
        raise ConfigError("a [potential] section is required")
    _check_keys(spec, _POTENTIAL_KEYS, "potential")
    has_builtin, has_table = "builtin" in spec, "table" in spec
    if has_builtin == has_table:
        raise ConfigError("[potential] needs exactly one of 'builtin' or 'table'")
    try:
        if has_table:
            if "params" in spec:
                raise ConfigError("'params' only applies to builtin potentials")
            path = Path(spec["table"])
            if not path.is_absolute():
                path = base_dir / path
            return TabulatedPotential.from_file(path, tail_decay=spec.get("tail_decay"))
        if "tail_decay" in spec:
            raise ConfigError("'tail_decay' only applies to tabulated potentials")
        params = spec.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("[potential].params must be a table")
        return make_potential(str(spec["builtin"]), **params)
    except ConfigError:
        raise
    except (OSError, TypeError, ValueError) as exc:
        raise ConfigError(f"potential: {exc}") from None


def _build_solver(doc: dict) -> SolverSettings:
    spec = doc.get("solver", {})
    if not isinstance(spec, dict):
        raise ConfigError("[solver] must be a table")
    _check_keys(spec, _SOLVER_KEYS, "solver")
    kw = dict(spec)
    if "theta" in kw:
        kw["theta"] = None if kw["theta"] == "auto" else kw["theta"]
    try:
        for key in ("r_min", "R", "rel_tol", "abs_tol"):
            if key in kw:
                kw[key] = float(kw[key])
        if kw.get("theta") is not None:
            kw["theta"] = float(kw["theta"])
        if "max_steps" in kw:
            kw["max_steps"] = int(kw["max_steps"])
        return SolverSettings(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None


def build_config(doc: dict, base_dir: Path | str = ".", source: str = "") -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a table")
    _check_keys(doc, _TOP_KEYS, "the top level")
    sections = {}
    for name, allowed in _SECTION_KEYS.items():
        if name in doc:
            if not isinstance(doc[name], dict):
                raise ConfigError(f"[{name}] must be a table")
            _check_keys(doc[name], allowed, name)
            sections[name] = doc[name]
    cs = _build_channels(doc)
    pot = _build_potential(doc, Path(base_dir))
    if pot.n_channels != cs.n:
        raise ConfigError(f"potential has {pot.n_channels} channels but {cs.n} are configured")
    cfg = RunConfig(cs, pot, _build_solver(doc), sections, source)
    cfg.seeds()  # validate early
    return cfg


def bundled_text(name: str) -> str:
    if name not in BUNDLED:
        raise ConfigError(f"no bundled configuration {name!r}; choose from {', '.join(BUNDLED)}")
    return resources.files("jostexp").joinpath("configs", f"{name}.toml").read_text()


def load_config(path_or_name: str, overrides=()) -> RunConfig:
    """Load a config file, or a bundled example by name, and apply overrides."""
    path = Path(path_or_name)
    if path.is_file():
        text, base, source = path.read_text(), path.parent, str(path)
    elif path_or_name in BUNDLED:
        text, base, source = bundled_text(path_or_name), Path("."), path_or_name
    else:
        raise ConfigError(f"config {path_or_name!r} not found (bundled examples: {', '.join(BUNDLED)})")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return build_config(apply_overrides(doc, overrides), base, source)
