import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from fieldforge import design as D
from fieldforge.constants import C0


def test_halfwave_length_cryo_si():
    d = D.dipole_design(28e9, 11.45)
    assert d.eps_eff == 6.225
    assert d.L * 1e3 == pytest.approx(2.146, abs=1e-3)
    assert d.L == pytest.approx(C0 / 28e9 / (2 * math.sqrt(6.225)), rel=1e-15)


@given(st.floats(1e9, 1e11), st.floats(1.0, 20.0))
def test_length_scaling(f0, eps_r):
    L = D.halfwave_dipole_length(f0, eps_r)
    assert D.halfwave_dipole_length(2 * f0, eps_r) == pytest.approx(L / 2, rel=1e-12)
    assert L <= C0 / f0 / 2 * (1 + 1e-12)


@pytest.mark.parametrize("bad", [0.5, -3.0])
def test_eps_below_one_rejected(bad):
    with pytest.raises(ValueError):
        D.effective_permittivity(bad)


@given(st.floats(1e-3, 60.0))
def test_sici_against_mpmath(x):
    si, ci = D.sici(x)
    assert si == pytest.approx(float(mpmath.si(x)), abs=1e-10)
    assert ci == pytest.approx(float(mpmath.ci(x)), abs=1e-10)


@pytest.mark.parametrize("x", [0.5, 1.0, 1.999, 2.0, 2.001, 5.0, 30.0])
def test_sici_switchover_continuity(x):
    si, ci = D.sici(x)
    assert si == pytest.approx(float(mpmath.si(x)), abs=1e-12)
    assert ci == pytest.approx(float(mpmath.ci(x)), abs=1e-12)


def test_sici_rejects_nonpositive():
    with pytest.raises(ValueError):
        D.sici(0.0)


def test_induced_emf_halfwave_classic_values():
    lam = C0 / 1e9
    z = D.thin_dipole_impedance(lam / 2, lam / 1e5, 1e9)
    assert z.real == pytest.approx(73.08, abs=0.05)
    assert z.imag == pytest.approx(42.5, abs=0.1)


def test_induced_emf_reactance_zero_crossing_below_half_wave():
    lam = C0 / 28e9
    a = lam / 400
    x = [D.thin_dipole_impedance(r * lam, a, 28e9).imag for r in (0.44, 0.5)]
    assert x[0] < 0 < x[1]


def test_thin_wire_guard():
    with pytest.raises(ValueError):
        D.thin_dipole_impedance(1e-3, 1e-4, 28e9)


@given(st.complex_numbers(max_magnitude=1e4, allow_nan=False, allow_infinity=False).filter(lambda z: z.real >= 0))
def test_passive_load_reflection_bounded(z):
    assert abs(D.s11_from_impedance(z, 50.0)) <= 1 + 1e-12


def test_matched_reflection_is_zero():
    assert D.s11_from_impedance(50.0, 50.0) == 0
    assert D.to_db(0.0) == -math.inf


def test_microstrip_synthesis_roundtrip():
    ms = D.microstrip_synthesize(50.0, 3.9, 3.823e-6)
    z, _ = D.microstrip_analysis(ms.W, ms.h, 3.9)
    assert z == pytest.approx(50.0, rel=1e-3)
    assert ms.Z_diff == pytest.approx(2 * 50 * (1 - 0.48 * 0.05 / 0.48), rel=1e-3)


def test_microstrip_hammerstad_reference_point():
    # independent oracle: the simpler quasi-static closed form for W/h >= 1
    u, er = 1.0, 9.8
    ee_ref = (er + 1) / 2 + (er - 1) / 2 / math.sqrt(1 + 12 / u)
    z_ref = 120 * math.pi / (math.sqrt(ee_ref) * (u + 1.393 + 0.667 * math.log(u + 1.444)))
    z, ee = D.microstrip_analysis(1.0, 1.0, er)
    assert z == pytest.approx(z_ref, rel=0.01)
    assert ee == pytest.approx(ee_ref, rel=0.02)


@given(st.floats(20.0, 150.0), st.floats(1.0, 12.0))
def test_wider_strip_lower_impedance(z0, eps_r):
    ms = D.microstrip_synthesize(z0, eps_r, 1e-4)
    z_wide, _ = D.microstrip_analysis(ms.W * 1.2, 1e-4, eps_r)
    assert z_wide < ms.Z0


def test_microstrip_range_guard():
    with pytest.raises(ValueError):
        D.microstrip_synthesize(5.0, 3.9, 1e-5)
