import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fieldforge import postproc as P
from fieldforge.constants import C0, ETA0
from fieldforge.fdtd.solver import FaceRecord, NearFieldRecord, PortRecord

F = np.array([27e9, 28e9, 29e9])


def _record(pid, V, I, R=50.0):
    V, I = np.atleast_1d(V).astype(complex), np.atleast_1d(I).astype(complex)
    return PortRecord(pid, F[: len(V)], V, I, np.zeros(len(V), complex), R, 1.0)


def _solve_two_port(Z, emf, R=50.0):
    """Terminal V, I of a Z-matrix network driven by Thevenin sources (emf, R)."""
    I = np.linalg.solve(Z + R * np.eye(2), emf)
    return Z @ I, I


def _network():
    return np.array([[40 + 25j, 12 - 8j], [12 - 8j, 55 - 10j]])


def test_matched_load_has_no_reflected_wave():
    a, b = P.power_waves(_record(1, 50.0, 1.0))
    assert abs(b[0]) < 1e-15 and a[0] == pytest.approx(100 / (2 * math.sqrt(50)))


def test_port_impedance_masks_zero_current():
    z = P.port_impedance(_record(1, [1.0, 2.0], [0.0, 0.1]))
    assert np.isnan(z[0]) and z[1] == pytest.approx(20.0)


def test_s_matrix_matches_circuit_theory():
    Z, R = _network(), 50.0
    runs = {}
    for j in (1, 2):
        emf = np.zeros(2)
        emf[j - 1] = 1.0
        V, I = _solve_two_port(Z, emf)
        runs[j] = {i: _record(i, V[i - 1], I[i - 1]) for i in (1, 2)}
    S = P.s_matrix(runs)[0]
    S_ref = (Z - R * np.eye(2)) @ np.linalg.inv(Z + R * np.eye(2))
    assert np.allclose(S, S_ref, atol=1e-12)
    assert P.reciprocity_error(S[None]) < 1e-12


def test_single_run_differential_matches_mixed_mode_reduction():
    Z, R = _network(), 50.0
    runs = {}
    for j in (1, 2):
        emf = np.zeros(2)
        emf[j - 1] = 1.0
        V, I = _solve_two_port(Z, emf)
        runs[j] = {i: _record(i, V[i - 1], I[i - 1]) for i in (1, 2)}
    S = P.s_matrix(runs)
    V, I = _solve_two_port(Z, np.array([1.0, -1.0]))
    sdd_single = P.differential_sdd11(_record(1, V[0], I[0]), _record(2, V[1], I[1]))
    assert sdd_single[0] == pytest.approx(P.mixed_mode_sdd11(S)[0], abs=1e-12)


def test_differential_impedance_of_floating_load():
    # a resistor Rd across the outer terminals: each port absorbs half of it, with opposite currents
    Rd, i = 73.0, 0.01
    p = _record(1, Rd / 2 * i, i)
    n = _record(2, -Rd / 2 * i, -i)
    assert P.differential_impedance(p, n)[0] == pytest.approx(Rd)
    assert P.accepted_power([p, n])[0] == pytest.approx(0.5 * Rd * i * i)


def test_reciprocity_warning():
    S = np.array([[[0.1, 0.5], [0.3, 0.1]]])
    with pytest.warns(P.ReciprocityWarning):
        P.mixed_mode_sdd11(S)


def test_mixed_mode_shape_guard():
    with pytest.raises(ValueError):
        P.mixed_mode_sdd11(np.zeros((3, 3)))


@given(st.floats(0.01, 10.0), st.floats(0.0, 1.0))
def test_accepted_power_of_resistor(r, i):
    rec = _record(1, r * i, i, R=50.0)
    assert P.accepted_power([rec])[0] == pytest.approx(0.5 * r * i * i, abs=1e-15)


def test_efficiency_guard_and_gain():
    eff, g = P.efficiency_and_gain(0.9, 1.0, 2.0, 0.1)
    assert eff == 0.9
    assert g == pytest.approx(2 + 10 * math.log10(0.9) + 10 * math.log10(0.99))
    with pytest.raises(P.EnergyAccountingError):
        P.efficiency_and_gain(1.05, 1.0, 2.0)
    with pytest.raises(P.EnergyAccountingError):
        P.efficiency_and_gain(0.5, 0.0, 2.0)


def test_sphere_integral_exact_cases():
    th, ph = P.angle_grid(1.0)
    assert P.sphere_integral(np.ones((len(th), len(ph))), th, ph) == pytest.approx(4 * np.pi, rel=1e-4)
    u = np.sin(th)[:, None] ** 2 * np.ones(len(ph))
    assert P.sphere_integral(u, th, ph) == pytest.approx(8 * np.pi / 3, rel=1e-4)


def test_to_db():
    assert P.to_db(0.1) == pytest.approx(-20)
    assert np.isfinite(P.to_db(0.0))


# --- near-field to far-field against the closed-form short dipole ---------------------


def _dipole_fields(x, y, z, k, idl=1.0):
    """Complete E and H phasors of a z-directed current element at the origin."""
    r = np.sqrt(x * x + y * y + z * z)
    ct, stt = z / r, np.sqrt(x * x + y * y) / r
    cp = np.where(stt > 0, x / np.maximum(r * stt, 1e-300), 1.0)
    sp = np.where(stt > 0, y / np.maximum(r * stt, 1e-300), 0.0)
    jkr = 1j * k * r
    ph = np.exp(-jkr)
    hphi = 1j * k * idl * stt / (4 * np.pi * r) * (1 + 1 / jkr) * ph
    er = ETA0 * idl * ct / (2 * np.pi * r * r) * (1 + 1 / jkr) * ph
    eth = 1j * ETA0 * k * idl * stt / (4 * np.pi * r) * (1 + 1 / jkr - 1 / (k * r) ** 2) * ph
    E = np.stack([er * stt * cp + eth * ct * cp, er * stt * sp + eth * ct * sp, er * ct - eth * stt])
    H = np.stack([-hphi * sp, hphi * cp, np.zeros_like(hphi)])
    return E, H


def _synthetic_box(f, half=4e-3, n=41):
    k = 2 * np.pi * f / C0
    faces = []
    u = np.linspace(-half, half, n)
    w1 = np.full(n, u[1] - u[0])
    w1[[0, -1]] *= 0.5
    w = np.outer(w1, w1)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        for s in (-1, 1):
            B, Cc = np.meshgrid(u, u, indexing="ij")
            pos = [None] * 3
            pos[a], pos[b], pos[c] = np.full_like(B, s * half), B, Cc
            E, H = _dipole_fields(*pos, k)
            faces.append(FaceRecord(a, s, s * half, E[b][None], H[c][None], E[c][None], H[b][None],
                                    u, u, w, u, u, w))
    return NearFieldRecord(np.array([f]), faces, (-half, half) * 3)


def test_ntff_recovers_short_dipole():
    f = 28e9
    near = _synthetic_box(f)
    k = 2 * np.pi * f / C0
    p_exact = ETA0 * k * k / (12 * np.pi)
    assert P.poynting_flux(near)[0] == pytest.approx(p_exact, rel=0.01)
    ff = P.ntff(near, 0, *P.angle_grid(3.0))
    assert ff.radiated_power == pytest.approx(p_exact, rel=0.01)
    d, th, _ = ff.max_directivity()
    assert d == pytest.approx(1.5, rel=0.01)
    assert th == pytest.approx(np.pi / 2, abs=0.06)
    # pattern follows sin^2(theta)
    assert np.allclose(ff.directivity[:, 0], 1.5 * np.sin(ff.theta) ** 2, atol=0.02)


def test_ntff_refuses_open_surface():
    near = _synthetic_box(28e9, n=5)
    near.faces.pop()
    with pytest.raises(ValueError, match="closed"):
        P.ntff(near, 0)


def _sweep(eff):
    n = len(eff)
    z = np.zeros(n, complex)
    return P.SweepResult(F[:n], z, np.zeros((0,)), z, np.ones(n), np.asarray(eff), np.zeros(n),
                         np.asarray(eff), np.asarray(eff))


def test_sweep_csv_deterministic_and_formatted():
    a, b = _sweep([0.9, 0.8]).to_csv(), _sweep([0.9, 0.8]).to_csv()
    assert a == b
    lines = a.splitlines()
    assert lines[0].startswith("f_Hz,Zin_re") and len(lines) == 3
    assert lines[1].split(",")[9] == "0.9"


def test_passivity_flag():
    with pytest.warns(P.PassivityWarning):
        s = _sweep([1.1])
    assert s.flags
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not _sweep([1.01]).flags
