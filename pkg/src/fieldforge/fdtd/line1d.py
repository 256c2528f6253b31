"""One-dimensional Yee line (Ex, Hy along z) for boundary and port checks.

It reuses the 3-D CPML coefficients and the lumped-port conductivity, so its
reflections measure exactly what the 3-D solver applies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constants import C0, EPS0, ETA0, MU0
from .cpml import CPMLConfig, axis_profile
from .solver import dft, port_conductivity
from .sources import ModulatedGaussian


@dataclass(frozen=True)
class Shunt:
    """Lumped resistor across a parallel-plate line at node ``index``.

    The plates are ``height`` apart and ``width`` wide, so the line impedance
    is ``eta0 * height / width``.
    """

    index: int
    resistance: float
    height: float = 1.0
    width: float = 1.0

    @property
    def line_impedance(self) -> float:
        return ETA0 * self.height / self.width


def run_line(n_cells: int, dz: float, cpml: CPMLConfig | None, steps: int, source: int, probe: int,
             pulse=None, shunt: Shunt | None = None, courant: float = 0.99) -> tuple[np.ndarray, float]:
    """Ex at ``probe`` for every step of a soft current source at ``source``.

    ``cpml=None`` leaves bare PEC walls at both ends.
    """
    pulse = pulse or ModulatedGaussian()
    dt = courant * dz / C0
    npml = cpml.thickness if cpml else 0
    prof = axis_profile(n_cells, npml, dz, dz, cpml or CPMLConfig(), dt)
    e = np.zeros(n_cells + 1)
    h = np.zeros(n_cells)
    psi_e = np.zeros(len(prof.e_idx))
    psi_h = np.zeros(len(prof.h_idx))
    sigma = np.zeros(n_cells + 1)
    if shunt is not None:
        sigma[shunt.index] = port_conductivity(shunt.height, shunt.width * dz, shunt.resistance)
    loss = sigma * dt / (2 * EPS0)
    ca = (1 - loss) / (1 + loss)
    cb = (dt / EPS0) / (1 + loss)
    ca[[0, -1]] = 0.0
    cb[[0, -1]] = 0.0
    db = dt / MU0
    inv_h = 1.0 / (prof.h_kappa * dz)
    inv_e = 1.0 / (prof.e_kappa * dz)
    out = np.zeros(steps)
    for n in range(steps):
        de = np.diff(e)
        h -= db * de * inv_h
        if npml:
            psi_h[:] = prof.h_b * psi_h + prof.h_c * de[prof.h_idx] / dz
            h[prof.h_idx] -= db * psi_h
        dh = np.zeros(n_cells + 1)
        dh[1:-1] = np.diff(h)
        e[:] = ca * e - cb * dh * inv_e
        if npml:
            psi_e[:] = prof.e_b * psi_e + prof.e_c * dh[prof.e_idx] / dz
            e[prof.e_idx] -= cb[prof.e_idx] * psi_e
        e[source] -= cb[source] * float(pulse((n + 0.5) * dt))
        out[n] = e[probe]
    return out, dt


def cpml_reflection(cpml: CPMLConfig, cells_per_wavelength: float = 30.0, f_max: float = 32e9,
                    freqs=None) -> np.ndarray:
    """Normal-incidence CPML reflection (magnitude) across ``freqs``.

    The reflected wave is the difference between a short line ending in the
    layer and a line long enough that its far end stays out of the window.
    """
    freqs = np.linspace(24e9, 32e9, 17) if freqs is None else np.asarray(freqs)
    pulse = ModulatedGaussian()
    dz = C0 / f_max / cells_per_wavelength
    n_inner = 60
    src, probe = cpml.thickness + 20, cpml.thickness + 40
    n_test = n_inner + 2 * cpml.thickness
    dt = 0.99 * dz / C0
    steps = int(pulse.duration / dt) + int(3 * n_test * 1.02 / 0.99)
    # echo-free reference: the far walls lie beyond what the window can reach
    pad = steps + 10
    ref, _ = run_line(n_test + 2 * pad, dz, None, steps, src + pad, probe + pad, pulse)
    test, dt = run_line(n_test, dz, cpml, steps, src, probe, pulse)
    t = dt * np.arange(1, steps + 1)
    inc = dft(ref, t, freqs, dt)
    refl = dft(test - ref, t, freqs, dt)
    return np.abs(refl) / np.abs(inc)


def shunt_reflection(resistance: float, height: float = 1.0, width: float = 1.0,
                     cells_per_wavelength: float = 40.0, f_max: float = 32e9, freqs=None) -> np.ndarray:
    """Complex reflection of a lumped shunt resistor on a matched line."""
    freqs = np.linspace(24e9, 32e9, 17) if freqs is None else np.asarray(freqs)
    pulse = ModulatedGaussian()
    dz = C0 / f_max / cells_per_wavelength
    dt = 0.99 * dz / C0
    steps = int(pulse.duration / dt) + 400
    n = 2 * steps + 400
    src, probe, node = n // 2 - 200, n // 2 - 100, n // 2
    ref, _ = run_line(n, dz, None, steps, src, probe, pulse)
    test, dt = run_line(n, dz, None, steps, src, probe, pulse, Shunt(node, resistance, height, width))
    t = dt * np.arange(1, steps + 1)
    inc = dft(ref, t, freqs, dt)
    refl = dft(test - ref, t, freqs, dt)
    # move the reference plane from the probe to the resistor: two passes of (node - probe) cells
    k = 2 * np.pi * freqs / C0
    return refl / inc * np.exp(2j * k * (node - probe) * dz)


def shunt_reflection_theory(resistance: float, line_impedance: float) -> float:
    return -line_impedance / (2 * resistance + line_impedance)
