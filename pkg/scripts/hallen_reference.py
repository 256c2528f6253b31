#!/usr/bin/env python3
"""Finite-radius reference for the thin-dipole check: Hallen's equation by moment method.

Pulse basis, point matching, exact kernel, delta-gap feed.  The induced-EMF
formula assumes a sinusoidal current and is the zero-radius limit; this
solves for the actual current on a wire of radius a.

Usage: hallen_reference.py RADIUS [RADIUS ...]
"""

import sys

import numpy as np
from scipy.integrate import quad

from fieldforge.constants import C0, EPS0, MU0


def hallen_impedance(L: float, a: float, f: float, n: int = 81) -> complex:
    k = 2 * np.pi * f / C0
    eta = np.sqrt(MU0 / EPS0)
    d = L / n
    z = -L / 2 + d * (np.arange(n) + 0.5)

    def kernel(zm, zn):
        def g(zp, part):
            r = np.hypot(zm - zp, a)
            v = np.exp(-1j * k * r) / (4 * np.pi * r)
            return v.real if part == 0 else v.imag
        return complex(quad(g, zn - d / 2, zn + d / 2, args=(0,), limit=200)[0],
                       quad(g, zn - d / 2, zn + d / 2, args=(1,), limit=200)[0])

    m = np.zeros((n + 1, n + 1), complex)
    b = np.zeros(n + 1, complex)
    m[:n, :n] = [[kernel(zm, zn) for zn in z] for zm in z]
    m[:n, n] = 1j / eta * np.cos(k * z)
    b[:n] = -1j / eta * 0.5 * np.sin(k * np.abs(z))
    m[n, 0], m[n, 1] = 1.5, -0.5  # current extrapolates to zero at the tip
    current = np.linalg.solve(m, b)[:n]
    centre = current[n // 2] if n % 2 else 0.5 * (current[n // 2 - 1] + current[n // 2])
    return 1 / centre


def main():
    L = C0 / 28e9 / 2
    for a in [float(v) for v in sys.argv[1:]] or [2.5e-6, 5e-6, 1.25e-5, 5e-5]:
        z41, z81 = hallen_impedance(L, a, 28e9, 41), hallen_impedance(L, a, 28e9, 81)
        print(f"a = {a * 1e6:7.2f} um  Zin(L = lambda/2) = {z81.real:6.1f}{z81.imag:+6.1f}j ohm "
              f"(41 segments: {z41.real:.1f}{z41.imag:+.1f}j)")


if __name__ == "__main__":
    main()
