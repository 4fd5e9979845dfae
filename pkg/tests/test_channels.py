import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jostexp.channels import (
    Channel,
    ChannelSet,
    SheetSelector,
    channel_momenta,
    enumerate_sheets,
    kinetic_k2,
    physical_sheet,
    upper_sqrt,
)

finite = st.floats(-50, 50, allow_nan=False)


def test_channel_validation():
    with pytest.raises(ValueError):
        Channel(0.0, reduced_mass=0.0)
    with pytest.raises(ValueError):
        Channel(0.0, angular_momentum=-1)
    with pytest.raises(ValueError):
        Channel(float("nan"))
    with pytest.raises(ValueError):
        ChannelSet(())
    with pytest.raises(ValueError):
        ChannelSet.from_lists([0.0], hbar=0.0)


def test_coincident_thresholds_allowed():
    cs = ChannelSet.from_lists([0.0, 0.0], ls=[0, 2])
    assert cs.n == 2 and list(cs.ls) == [0, 2]


def test_momenta_examples():
    cs = ChannelSet.from_lists([0.0, 0.1])
    k = channel_momenta(cs, 5.0, "++")
    assert np.allclose(k, [np.sqrt(10.0), np.sqrt(9.8)], rtol=0, atol=1e-14)
    k = channel_momenta(cs, -1.0, "++")
    assert np.allclose(k, [1j * np.sqrt(2.0), 1j * np.sqrt(2.2)], atol=1e-14)
    assert np.allclose(channel_momenta(cs, 5.0, "--"), -channel_momenta(cs, 5.0, "++"))


def test_momenta_at_threshold_is_zero():
    cs = ChannelSet.from_lists([0.0, 0.1])
    assert channel_momenta(cs, 0.1)[1] == 0


def test_mass_and_hbar_enter_the_momentum():
    cs = ChannelSet.from_lists([0.0], masses=[2.0], hbar=0.5)
    assert np.isclose(channel_momenta(cs, 1.0)[0], np.sqrt(2 * 2.0 * 1.0) / 0.5)


def test_sheet_parsing_and_errors():
    assert SheetSelector.parse("+-").signs == (1, -1)
    assert SheetSelector.parse("(--)").signs == (-1, -1)
    assert str(SheetSelector((1, -1))) == "+-"
    with pytest.raises(ValueError):
        SheetSelector.parse("+x")
    with pytest.raises(ValueError):
        SheetSelector((1, 0))
    cs = ChannelSet.from_lists([0.0, 0.1])
    with pytest.raises(ValueError):
        channel_momenta(cs, 1.0, "+")
    with pytest.raises(ValueError):
        channel_momenta(cs, complex("nan"))


def test_enumerate_sheets_order():
    cs = ChannelSet.from_lists([0.0, 0.1])
    assert [str(s) for s in enumerate_sheets(cs)] == ["++", "-+", "+-", "--"]
    assert enumerate_sheets(cs)[0] == physical_sheet(cs)


def test_enumerate_sheets_refuses_huge_sets():
    cs = ChannelSet.from_lists([0.0] * 17)
    with pytest.raises(ValueError):
        enumerate_sheets(cs)


@given(finite, finite)
def test_physical_sheet_has_nonnegative_imaginary_momenta(re, im):
    cs = ChannelSet.from_lists([0.0, 0.1, -2.0], masses=[1.0, 2.5, 0.3])
    k = channel_momenta(cs, complex(re, im))
    assert np.all(k.imag >= 0)


@given(finite, finite)
def test_momentum_squares_to_kinetic_energy(re, im):
    cs = ChannelSet.from_lists([0.0, 0.1], masses=[1.0, 3.0], hbar=1.3)
    e = complex(re, im)
    for sheet in enumerate_sheets(cs):
        k = channel_momenta(cs, e, sheet)
        assert np.allclose(k**2, kinetic_k2(cs, e), rtol=1e-12, atol=1e-12)


@given(finite, finite)
def test_upper_sqrt_branch(re, im):
    z = complex(re, im)
    w = upper_sqrt(z)
    assert w.imag >= 0
    assert np.isclose(w * w, z, rtol=1e-12, atol=1e-12)
