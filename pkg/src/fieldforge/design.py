"""Closed-form dipole and transmission-line design equations.

Also hosts the induced-EMF thin-dipole impedance, used as an independent
oracle for the FDTD port impedance.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import C0, ETA0

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class DipoleDesign:
    f0: float
    lambda0: float
    eps_eff: float
    L: float
    gap: float
    arm_width: float
    trace_thickness: float

    def __post_init__(self):
        if not (self.L > 0 and self.gap > 0):
            raise ValueError("dipole length and gap must be positive")
        if abs(self.lambda0 - C0 / self.f0) > 1e-12 * self.lambda0:
            raise ValueError("lambda0 inconsistent with f0")


@dataclass(frozen=True)
class MicrostripDesign:
    Z0_target: float
    W: float
    S: float
    h: float
    eps_r: float
    Z0: float = float("nan")
    eps_eff: float = float("nan")
    Z_diff: float = float("nan")

    def __post_init__(self):
        if not (self.W > 0 and self.S > 0):
            raise ValueError("W and S must be positive")


def effective_permittivity(eps_r: float) -> float:
    """Average of substrate and air permittivity, ``(eps_r + 1) / 2``."""
    if eps_r < 1:
        raise ValueError(f"eps_r must be >= 1, got {eps_r}")
    return (eps_r + 1.0) / 2.0


def halfwave_dipole_length(f0: float, eps_r: float) -> float:
    if not f0 > 0:
        raise ValueError("f0 must be positive")
    return (C0 / f0) / (2.0 * math.sqrt(effective_permittivity(eps_r)))


def dipole_design(f0: float, eps_r: float, gap: float = 3.0e-5, arm_width: float = 5.0e-5,
                  trace_thickness: float = 3.5e-6) -> DipoleDesign:
    return DipoleDesign(f0=f0, lambda0=C0 / f0, eps_eff=effective_permittivity(eps_r),
                        L=halfwave_dipole_length(f0, eps_r), gap=gap, arm_width=arm_width,
                        trace_thickness=trace_thickness)


# --- sine and cosine integrals -------------------------------------------------

_CF_SWITCH = 2.0
_EPS = 1e-16


def sici(x: float) -> tuple[float, float]:
    """Sine and cosine integrals ``Si(x), Ci(x)`` for ``x > 0``.

    Power series below the switchover, Lentz continued fraction for
    ``E1(ix)`` above it.  Absolute accuracy is better than 1e-12.
    """
    if not x > 0:
        raise ValueError("sici needs x > 0")
    if x < _CF_SWITCH:
        # Si = sum (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
        # Ci = gamma + ln x + sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
        si = 0.0
        ci = 0.0
        term = x
        k = 0
        while True:
            si_term = term / (2 * k + 1)
            si += si_term
            term *= -x / (2 * k + 2)
            ci_term = term / (2 * k + 2)
            ci += ci_term
            term *= x / (2 * k + 3)
            k += 1
            if abs(si_term) < _EPS * abs(si) and abs(ci_term) < _EPS * max(abs(ci), 1e-300):
                break
            if k > 200:
                break
        return si, EULER_GAMMA + math.log(x) + ci
    # modified Lentz on E1(ix) = e^{-ix} / (1 + ix - 1/(3 + ix - 4/(5 + ix - ...)))
    b = complex(1.0, x)
    c = 1.0 / 1e-300
    d = 1.0 / b
    h = d
    for i in range(1, 100000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < _EPS:
            break
    h *= complex(math.cos(x), -math.sin(x))
    return math.pi / 2 + h.imag, -h.real


def thin_dipole_impedance(L: float, wire_radius: float, f: float) -> complex:
    """Input impedance of a centre-fed thin dipole by the induced-EMF method.

    Sinusoidal current distribution; resistance and reactance referred to the
    feed point (divided by ``sin^2(kL/2)``).
    """
    if not f > 0:
        raise ValueError("f must be positive")
    if not (0 < wire_radius < L / 20):
        raise ValueError(f"thin-wire validity violated: radius {wire_radius} vs L/20 = {L / 20}")
    k = 2.0 * math.pi * f / C0
    kl = k * L
    si1, ci1 = sici(kl)
    si2, ci2 = sici(2.0 * kl)
    _, cia = sici(2.0 * k * wire_radius ** 2 / L)
    rr = ETA0 / (2 * math.pi) * (
        EULER_GAMMA + math.log(kl) - ci1
        + 0.5 * math.sin(kl) * (si2 - 2 * si1)
        + 0.5 * math.cos(kl) * (EULER_GAMMA + math.log(kl / 2) + ci2 - 2 * ci1))
    xm = ETA0 / (4 * math.pi) * (
        2 * si1 + math.cos(kl) * (2 * si1 - si2)
        - math.sin(kl) * (2 * ci1 - ci2 - cia))
    s2 = math.sin(kl / 2) ** 2
    return complex(rr / s2, xm / s2)


# --- reflection ----------------------------------------------------------------

def s11_from_impedance(Zin: complex, Z0: float = 50.0) -> complex:
    if not Z0 > 0:
        raise ValueError("Z0 must be positive")
    den = Zin + Z0
    if abs(den) < 1e-15 * Z0:
        raise ZeroDivisionError("Zin = -Z0: reflection coefficient is singular")
    return (Zin - Z0) / den


def to_db(x) -> np.ndarray:
    """``20 log10 |x|``; exact zeros map to -inf."""
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(x))


# --- microstrip ----------------------------------------------------------------

def microstrip_analysis(W: float, h: float, eps_r: float) -> tuple[float, float]:
    """Characteristic impedance and effective permittivity of a microstrip.

    Hammerstad-Jensen zero-thickness formulas; about 0.2 % accuracy for
    ``0.01 <= W/h <= 100``.
    """
    u = W / h
    a = (1 + math.log((u ** 4 + (u / 52) ** 2) / (u ** 4 + 0.432)) / 49
         + math.log(1 + (u / 18.1) ** 3) / 18.7)
    b = 0.564 * ((eps_r - 0.9) / (eps_r + 3)) ** 0.053
    eps_eff = (eps_r + 1) / 2 + (eps_r - 1) / 2 * (1 + 10 / u) ** (-a * b)
    fu = 6 + (2 * math.pi - 6) * math.exp(-((30.666 / u) ** 0.7528))
    z01 = ETA0 / (2 * math.pi) * math.log(fu / u + math.sqrt(1 + (2 / u) ** 2))
    return z01 / math.sqrt(eps_eff), eps_eff


def _wheeler_width(Z0: float, eps_r: float, h: float) -> float:
    a = Z0 / 60 * math.sqrt((eps_r + 1) / 2) + (eps_r - 1) / (eps_r + 1) * (0.23 + 0.11 / eps_r)
    b = ETA0 * math.pi / (2 * Z0 * math.sqrt(eps_r))
    wh = 8 * math.exp(a) / (math.exp(2 * a) - 2)
    if not 0 < wh <= 2:  # the narrow-strip branch is invalid (or negative) here
        wh = 2 / math.pi * (b - 1 - math.log(2 * b - 1)
                            + (eps_r - 1) / (2 * eps_r) * (math.log(b - 1) + 0.39 - 0.61 / eps_r))
    return wh * h


def coupled_diff_impedance(Z0: float, S: float, h: float) -> float:
    """Differential impedance of an edge-coupled microstrip pair.

    Closed-form approximation ``2 Z0 (1 - 0.48 exp(-0.96 S/h))``.
    """
    return 2.0 * Z0 * (1.0 - 0.48 * math.exp(-0.96 * S / h))


def microstrip_synthesize(Z0_target: float, eps_r: float, h: float,
                          coupling: float = 0.05, rtol: float = 1e-3) -> MicrostripDesign:
    """Line width for ``Z0_target`` and pair spacing for a loose coupling.

    The Wheeler/Hammerstad synthesis gives the starting width, then a bracketed
    solve on the analysis formula removes the residual.  The spacing is chosen
    so the even/odd coupling term in :func:`coupled_diff_impedance` equals
    ``coupling``.
    """
    if not 10 <= Z0_target <= 250:
        raise ValueError(f"Z0_target out of range [10, 250]: {Z0_target}")
    if eps_r < 1 or not h > 0:
        raise ValueError("need eps_r >= 1 and h > 0")
    w0 = _wheeler_width(Z0_target, eps_r, h)

    def resid(logw):
        return microstrip_analysis(math.exp(logw), h, eps_r)[0] - Z0_target

    lo, hi = math.log(w0 / 4), math.log(w0 * 4)
    try:
        logw = brentq(resid, lo, hi, xtol=1e-12)
    except ValueError:
        raise RuntimeError(f"microstrip synthesis did not bracket; residual at guess "
                           f"{resid(math.log(w0)):.3g} ohm") from None
    W = math.exp(logw)
    z, ee = microstrip_analysis(W, h, eps_r)
    if abs(z - Z0_target) > rtol * Z0_target:
        raise RuntimeError(f"microstrip synthesis residual {z - Z0_target:.3g} ohm")
    S = h * math.log(0.48 / coupling) / 0.96
    return MicrostripDesign(Z0_target=Z0_target, W=W, S=S, h=h, eps_r=eps_r, Z0=z, eps_eff=ee,
                            Z_diff=coupled_diff_impedance(z, S, h))
