import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fieldforge import cavity as CV
from fieldforge.constants import C0


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_bessel_roots_match_mpmath(n):
    j, jp = CV.bessel_roots(n, 4)
    for k in range(4):
        assert j[k] == pytest.approx(float(mpmath.besseljzero(n, k + 1)), abs=1e-9)
        # mpmath lists x = 0 as the first zero of J0'; the TE convention skips it
        kk = k + 2 if n == 0 else k + 1
        assert jp[k] == pytest.approx(float(mpmath.besseljzero(n, kk, derivative=1)), abs=1e-9)


def test_tm010_section():
    modes = CV.cylinder_modes(0.15, 0.10, 2e9)
    assert modes[0].label == "TM010"
    assert modes[0].frequency / 1e9 == pytest.approx(0.765, abs=1e-4)
    assert modes[0].frequency == pytest.approx(C0 * 2.404825557695773 / (2 * math.pi * 0.15), rel=1e-12)


def test_modes_sorted_and_below_fmax():
    modes = CV.cylinder_modes(0.05, 0.08, 12e9)
    f = [m.frequency for m in modes]
    assert f == sorted(f) and max(f) <= 12e9


@given(st.floats(0.02, 0.2), st.floats(0.02, 0.2))
def test_mode_count_tracks_weyl(a, d):
    f = 40 * C0 / (2 * math.pi * min(a, d))
    n = CV.mode_count(CV.cylinder_modes(a, d, f))
    w = CV.weyl_count(math.pi * a * a * d, f)
    assert abs(n - w) / w < 0.15


def test_section_modes_below_28ghz_within_15pct_of_weyl():
    for a, d in CV.cryostat_sections():
        n = CV.mode_count(CV.cylinder_modes(a, d, 28e9))
        w = CV.weyl_count(math.pi * a * a * d, 28e9)
        assert abs(n - w) / w < 0.15


def test_tm010_q_closed_form_matches_field_integration():
    md = CV.cylinder_modes(0.15, 0.10, 1e9)[0]
    q = CV.wall_q(md, 5.9e7, 0.15, 0.10)
    assert q == pytest.approx(CV.stored_energy_q_tm010(0.15, 0.10, 5.9e7), rel=1e-9)


@given(st.floats(1e6, 1e9))
def test_q_scales_with_sqrt_sigma(sigma):
    md = CV.cylinder_modes(0.1, 0.1, 2.5e9)[0]
    assert CV.wall_q(md, 4 * sigma, 0.1, 0.1) == pytest.approx(2 * CV.wall_q(md, sigma, 0.1, 0.1), rel=1e-9)


def test_mode_density_window():
    modes = CV.cylinder_modes(0.15, 0.10, 28.2e9)
    dens = CV.mode_density(modes, 28e9, 100e6)
    assert dens.count > 100  # overmoded: many modes inside +-100 MHz
    assert abs(dens.nearest_offset) < 100e6
    expected = 8 * math.pi * math.pi * 0.15 ** 2 * 0.10 * 28e9 ** 2 / C0 ** 3 * 200e6
    assert dens.count == pytest.approx(expected, rel=0.15)


def test_mode_density_requires_coverage():
    with pytest.raises(ValueError):
        CV.mode_density(CV.cylinder_modes(0.1, 0.1, 3e9), 3e9, 1e8)


def test_invalid_geometry():
    with pytest.raises(ValueError):
        CV.cylinder_modes(0.0, 0.1, 1e9)


def test_rect_modes_box():
    modes = CV.rect_modes(10e-3, 8e-3, 6e-3, 40e9)
    assert modes[0].label == "TM110"
    assert modes[0].frequency == pytest.approx(C0 / 2 * math.hypot(100, 125), rel=1e-12)
    te101 = next(m for m in modes if m.key == ("TE", 1, 0, 1))
    assert te101.frequency / 1e9 == pytest.approx(29.14, abs=0.01)


def test_degeneracy_counts_pairs():
    modes = CV.cylinder_modes(0.1, 0.1, 3e9)
    assert all(m.degeneracy == (1 if m.m == 0 else 2) for m in modes)
    assert CV.mode_count(modes) == sum(m.degeneracy for m in modes)
