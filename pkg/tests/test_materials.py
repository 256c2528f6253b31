import math

import pytest
from hypothesis import given, strategies as st

from fieldforge import materials as M
from fieldforge.constants import EPS0, MU0


def test_builtin_values():
    lib = M.builtin_library()
    assert set(lib) == {"Cu", "Si", "SiO2", "Vacuum", "PEC"}
    assert lib["Cu"].sigma("cryo") == 2.9e8 and lib["Cu"].sigma("room") == 5.9e7
    assert lib["Si"].eps_r("cryo") == 11.45 and lib["Si"].eps_r("room") == 11.75
    assert lib["Si"].sigma("cryo") == 4.26e-7 and lib["Si"].sigma("room") == 4.26e-4
    assert lib["SiO2"].eps_r("cryo") == 3.9
    assert lib["PEC"].is_pec and lib["Cu"].is_conductor


def test_temperature_aliases():
    assert M.TemperatureClass.parse("4K") is M.TemperatureClass.CRYOGENIC
    assert M.TemperatureClass.parse("RT") is M.TemperatureClass.ROOM
    with pytest.raises(ValueError):
        M.TemperatureClass.parse("warm")


def test_lookup_unknown_lists_known():
    with pytest.raises(KeyError, match="Cu"):
        M.lookup("Gold")


@pytest.mark.parametrize("sigma,eps", [(-1.0, 2.0), (1.0, 0.5), (math.nan, 2.0), (math.inf, 2.0)])
def test_invalid_material(sigma, eps):
    with pytest.raises(ValueError):
        M.Material("x", sigma, eps)


def test_skin_depth_copper_28ghz():
    # delta = 1 / sqrt(pi f mu sigma)
    d = M.skin_depth(5.9e7, 1.0, 28e9)
    assert d == pytest.approx(1 / math.sqrt(math.pi * 28e9 * MU0 * 5.9e7), rel=1e-12)
    assert 0.38e-6 < d < 0.40e-6


def test_surface_resistance_is_inverse_sigma_delta():
    s, f = 2.9e8, 28e9
    assert M.surface_resistance(s, 1.0, f) == pytest.approx(1 / (s * M.skin_depth(s, 1.0, f)), rel=1e-12)


def test_loss_tangent_definition():
    assert M.loss_tangent(4.26e-4, 11.75, 28e9) == pytest.approx(4.26e-4 / (2 * math.pi * 28e9 * EPS0 * 11.75))


@given(st.floats(1e3, 1e9), st.floats(1e8, 1e11))
def test_skin_depth_scaling(sigma, f):
    d = M.skin_depth(sigma, 1.0, f)
    assert M.skin_depth(4 * sigma, 1.0, f) == pytest.approx(d / 2, rel=1e-12)
    assert M.skin_depth(sigma, 1.0, 4 * f) == pytest.approx(d / 2, rel=1e-12)


def test_roundtrip_dict():
    cu = M.builtin_library()["Cu"]
    assert M.Material.from_dict(cu.to_dict()) == cu
