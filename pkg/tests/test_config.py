import pytest

from jostexp.config import (
    BUNDLED,
    ConfigError,
    apply_overrides,
    build_config,
    bundled_text,
    load_config,
    parse_complex,
    parse_seed,
)
from jostexp.potential import NoroTaylorPotential, TabulatedPotential, write_table

MINIMAL = """
[[channels]]
threshold = 0.0

[potential]
builtin = "exponential"
params = { strengths = [[-2.0]], power = 1.0, decay = 0.5 }
"""


def test_bundled_configs_load():
    for name in BUNDLED:
        cfg = load_config(name)
        assert cfg.channels.n == 2
    cfg = load_config("noro_taylor")
    assert isinstance(cfg.potential, NoroTaylorPotential)
    assert cfg.solver.theta is None and cfg.solver.R == 40.0
    assert [str(sd.sheet) for sd in cfg.seeds()] == ["--", "--", "--"]
    assert cfg.seeds()[1].energy == 7.3 - 0.7j
    assert cfg.section("expand") == {"center": 5.0, "order": 5}


def test_overrides():
    cfg = load_config("noro_taylor", ["solver.R=50", "solver.theta=0.2", "expand.center='7.5-2i'"])
    assert cfg.solver.R == 50.0 and cfg.solver.theta == 0.2
    assert parse_complex(cfg.section("expand")["center"]) == 7.5 - 2j
    cfg = load_config("noro_taylor", ["spectrum.seeds=[]"])
    assert cfg.seeds() == []
    with pytest.raises(ConfigError):
        apply_overrides({}, ["novalue"])
    with pytest.raises(ConfigError):
        apply_overrides({"solver": 3}, ["solver.R=1"])


def test_unknown_keys_rejected(tmp_path):
    for extra in ("colour = 1", "[solver]\nRR = 3", "[scan]\nstrat = 0"):
        path = tmp_path / "c.toml"
        path.write_text(MINIMAL + "\n" + extra + "\n")
        with pytest.raises(ConfigError, match="unknown key"):
            load_config(str(path))


def test_structural_errors(tmp_path):
    bad = {
        "no channels": '[potential]\nbuiltin = "zero"\n',
        "two sources": MINIMAL.replace('builtin = "exponential"', 'builtin = "exponential"\ntable = "x.txt"'),
        "bad builtin": MINIMAL.replace("exponential", "coulomb"),
        "channel count": MINIMAL.replace("strengths = [[-2.0]]", "strengths = [[-2.0, 0.0], [0.0, 1.0]]"),
        "bad mass": MINIMAL.replace("threshold = 0.0", "threshold = 0.0\nmass = -1.0"),
        "bad toml": "[[channels]\n",
        "bad tolerance": MINIMAL + "[solver]\nrel_tol = 0\n",
    }
    for name, text in bad.items():
        path = tmp_path / "c.toml"
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_config(str(path))
    with pytest.raises(ConfigError):
        load_config("no-such-config")


def test_tabulated_potential_relative_to_config(tmp_path):
    import numpy as np

    r = np.linspace(0, 30, 601)
    write_table(tmp_path / "v.txt", r, NoroTaylorPotential().evaluate(r).real)
    text = bundled_text("noro_taylor").replace('builtin = "noro_taylor"', 'table = "v.txt"')
    (tmp_path / "c.toml").write_text(text)
    cfg = load_config(str(tmp_path / "c.toml"))
    assert isinstance(cfg.potential, TabulatedPotential)


def test_parse_complex_forms():
    assert parse_complex(3) == 3
    assert parse_complex([7.5, -2]) == 7.5 - 2j
    assert parse_complex("7.5-2i") == 7.5 - 2j
    assert parse_complex(" 4.77 - 0.001i ") == 4.77 - 0.001j
    for bad in ("x", True, [1, 2, 3], None):
        with pytest.raises(ConfigError):
            parse_complex(bad)


def test_parse_seed_forms():
    sd = parse_seed("4.7@--")
    assert sd.energy == 4.7 and str(sd.sheet) == "--"
    sd = parse_seed({"energy": [8.2, -3.2], "sheet": "+-"})
    assert sd.energy == 8.2 - 3.2j
    for bad in ("4.7", {"energy": 1.0}, {"energy": 1, "sheet": "+", "x": 0}, "1@+x"):
        with pytest.raises(ConfigError):
            parse_seed(bad)


def test_build_config_from_dict():
    doc = {"channels": [{"threshold": 0.0, "l": 1}], "potential": {"builtin": "zero", "params": {"channels": 1}}}
    cfg = build_config(doc)
    assert list(cfg.channels.ls) == [1]
