import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jostexp.potential import (
    ExponentialPotential,
    NoroTaylorPotential,
    OutsideSectorError,
    ScaledPotential,
    TabulatedPotential,
    ZeroPotential,
    make_potential,
    write_table,
)


def test_noro_taylor_values():
    p = NoroTaylorPotential()
    assert np.all(p.evaluate(0.0) == 0)
    e = math.exp(-1.0)
    assert np.allclose(p.evaluate(1.0), [[-e, -7.5 * e], [-7.5 * e, 7.5 * e]], rtol=1e-15)
    assert np.allclose(p.evaluate(1.0), [[-0.3678794, -2.7590958], [-2.7590958, 2.7590958]], atol=5e-8)
    # largest entry at r = 25 is 7.5 r**2 e^-r = 6.51e-8
    bound = 7.5 * 25.0**2 * math.exp(-25.0)
    assert np.isclose(np.max(np.abs(p.evaluate(25.0))), bound, rtol=1e-14)
    assert 6.50e-8 < bound < 6.52e-8


def test_decay_rates():
    assert NoroTaylorPotential().min_decay_rate() == 1.0
    assert ScaledPotential(NoroTaylorPotential(), 2.0).min_decay_rate() == 2.0
    assert ExponentialPotential([[1.0]], 0.0, 3.0).min_decay_rate() == 3.0
    assert ZeroPotential(2).min_decay_rate() == np.inf


def test_scaled_potential_rescales_the_radius():
    p = NoroTaylorPotential()
    q = ScaledPotential(p, 2.0)
    assert np.allclose(q.evaluate(0.7 + 0.2j), p.evaluate(1.4 + 0.4j))
    with pytest.raises(ValueError):
        ScaledPotential(p, 0.0)


def test_sector_checks():
    p = NoroTaylorPotential()
    p.evaluate(3.0 * np.exp(1.2j))
    with pytest.raises(OutsideSectorError):
        p.evaluate(3.0 * np.exp(1.6j))
    with pytest.raises(ValueError):
        p.evaluate(complex("nan"))


def test_exponential_validation():
    with pytest.raises(ValueError):
        ExponentialPotential([[1.0, 2.0]])
    with pytest.raises(ValueError):
        ExponentialPotential([[1.0]], decay=-1.0)
    with pytest.raises(ValueError):
        ExponentialPotential([[1.0]], power=-1.0)


def test_builtins_by_name():
    assert isinstance(make_potential("noro_taylor"), NoroTaylorPotential)
    assert make_potential("zero", channels=3).n_channels == 3
    p = make_potential("exponential", strengths=[[-2.0]], power=1.0, decay=0.5)
    assert np.isclose(p.evaluate(2.0)[0, 0], -2.0 * 2.0 * math.exp(-1.0))
    with pytest.raises(ValueError):
        make_potential("coulomb")


@given(st.floats(0, 60))
def test_noro_taylor_symmetric_and_real_on_the_axis(r):
    v = NoroTaylorPotential().evaluate(r)
    assert np.array_equal(v, v.T)
    assert np.all(v.imag == 0)


def test_decay_bound_on_a_grid():
    p = NoroTaylorPotential()
    r = np.linspace(1, 60, 400)
    v = np.abs(p.evaluate(r)).max(axis=(-1, -2))
    scaled = v * np.exp(p.min_decay_rate() * r)
    # r**2 growth is all that remains once the exponential is removed
    assert np.all(scaled <= 7.5 * r**2 * (1 + 1e-12))


def test_tabulated_roundtrip_and_tail(tmp_path):
    p = NoroTaylorPotential()
    radii = np.linspace(0.0, 30.0, 3001)
    values = p.evaluate(radii).real
    path = tmp_path / "nt.txt"
    write_table(path, radii, values)
    header = path.read_text().splitlines()[0]
    assert header == "# r V11 V12 V21 V22"
    tab = TabulatedPotential.from_file(path)
    assert tab.n_channels == 2
    mid = np.array([0.55, 3.3, 17.77])
    assert np.allclose(tab.evaluate(mid), p.evaluate(mid).real, atol=1e-8)
    # beyond the grid the tail decays at the estimated rate (close to 1 for r**2 e^-r at r = 30)
    assert np.allclose(tab.decay_rates, 1 - 2 / 30, atol=5e-3)
    assert np.all(np.abs(tab.evaluate(60.0)) < np.abs(tab.evaluate(30.0)))
    with pytest.raises(OutsideSectorError):
        tab.evaluate(1.0 + 0.1j)


def test_tabulated_validation(tmp_path):
    r = np.linspace(0, 1, 5)
    with pytest.raises(ValueError):
        TabulatedPotential(r[::-1], np.ones((5, 1, 1)))
    with pytest.raises(ValueError):
        TabulatedPotential(r, np.ones((5, 1, 2)))
    with pytest.raises(ValueError):
        TabulatedPotential(r, np.ones((5, 1, 1)))  # no decay at the end
    bad = tmp_path / "bad.txt"
    bad.write_text("# r V11 V12\n0 1 2\n1 1 2\n2 1 2\n3 1 2\n")
    with pytest.raises(ValueError):
        TabulatedPotential.from_file(bad)
