"""Analytic resonances of PEC cavities.

Cylindrical sections stand in for the cryostat levels; the rectangular box is
the validation target for the FDTD core.  Modes whose azimuthal index m > 0
come in cos/sin pairs; they are listed once with ``degeneracy = 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv, jvp

from .constants import C0, MU0
from .materials import skin_depth


@dataclass(frozen=True, order=True)
class CavityMode:
    frequency: float
    family: str
    m: int
    n: int
    p: int
    degeneracy: int = 1
    Q: float | None = None

    def __post_init__(self):
        if self.family not in ("TE", "TM"):
            raise ValueError(f"unknown family {self.family!r}")
        if min(self.m, self.n, self.p) < 0:
            raise ValueError("mode indices must be non-negative")
        if self.family == "TE" and self.p < 1:
            raise ValueError("TE modes need p >= 1")
        if not self.frequency > 0:
            raise ValueError("mode frequency must be positive")

    @property
    def label(self) -> str:
        return f"{self.family}{self.m}{self.n}{self.p}"

    @property
    def key(self) -> tuple:
        return (self.family, self.m, self.n, self.p)


# --- Bessel roots ----------------------------------------------------------------

def _roots_of(func, n: int, k: int, start: float) -> list[float]:
    """First k positive roots of func above ``start`` by scan + Brent."""
    roots: list[float] = []
    step = 0.25
    x0 = max(start, 1e-6)
    f0 = func(x0)
    while len(roots) < k:
        x1 = x0 + step
        f1 = func(x1)
        if f0 == 0.0:
            roots.append(x0)
        elif f0 * f1 < 0:
            roots.append(brentq(func, x0, x1, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))
        x0, f0 = x1, f1
    return roots[:k]


@lru_cache(maxsize=None)
def _bessel_roots(n: int, k: int, derivative: bool) -> tuple[float, ...]:
    if derivative:
        func = lambda x: float(jvp(n, x))  # noqa: E731
        # J0' = -J1 has its first zero at the origin; skip it.
        start = 1e-3 if n == 0 else max(n * 0.9, 0.5)
    else:
        func = lambda x: float(jv(n, x))  # noqa: E731
        # no zero of J_n (n >= 1) lies below n
        start = max(float(n), 0.5) if n > 0 else 0.5
    return tuple(_roots_of(func, n, k, start))


def bessel_roots(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """First k positive roots of ``J_n`` and of ``J_n'``."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    return np.array(_bessel_roots(n, k, False)), np.array(_bessel_roots(n, k, True))


def _roots_below(n: int, xmax: float, derivative: bool) -> list[float]:
    k = 4
    while True:
        roots = _bessel_roots(n, k, derivative)
        if roots[-1] > xmax:
            return [r for r in roots if r <= xmax]
        k *= 2


# --- cylinder --------------------------------------------------------------------

def cylinder_mode_frequency(x: float, a: float, d: float, p: int) -> float:
    return C0 / (2 * math.pi) * math.hypot(x / a, p * math.pi / d)


def cylinder_modes(a: float, d: float, f_max: float) -> list[CavityMode]:
    """All TM_mnp and TE_mnp modes of a PEC cylinder up to ``f_max``, ascending."""
    if not (a > 0 and d > 0):
        raise ValueError("radius and height must be positive")
    kmax = 2 * math.pi * f_max / C0
    xmax = kmax * a
    modes: list[CavityMode] = []
    m = 0
    while True:
        tm = _roots_below(m, xmax, False)
        te = _roots_below(m, xmax, True)
        if not tm and not te:
            break
        deg = 1 if m == 0 else 2
        for family, roots, pmin in (("TM", tm, 0), ("TE", te, 1)):
            for n, x in enumerate(roots, start=1):
                kz_max2 = kmax ** 2 - (x / a) ** 2
                if kz_max2 < 0:
                    continue
                pmax = int(math.floor(math.sqrt(kz_max2) * d / math.pi + 1e-12))
                for p in range(pmin, pmax + 1):
                    f = cylinder_mode_frequency(x, a, d, p)
                    if f <= f_max:
                        modes.append(CavityMode(f, family, m, n, p, deg))
        m += 1
    modes.sort()
    return modes


def mode_count(modes) -> int:
    """Total number of modes counting polarization degeneracy."""
    return int(sum(md.degeneracy for md in modes))


def weyl_count(volume: float, f: float) -> float:
    """Asymptotic number of EM cavity modes below f, ``8 pi V f^3 / (3 c^3)``."""
    return 8 * math.pi * volume * f ** 3 / (3 * C0 ** 3)


@dataclass(frozen=True)
class ModeDensity:
    count: int
    nearest: CavityMode | None
    nearest_offset: float
    modes: tuple


def mode_density(modes, f0: float, delta: float) -> ModeDensity:
    """Modes with frequency in ``[f0 - delta, f0 + delta]`` and the closest one.

    ``count`` includes polarization degeneracy.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if not modes:
        return ModeDensity(0, None, math.inf, ())
    if max(md.frequency for md in modes) < f0 + delta:
        raise ValueError("mode list does not cover f0 + delta")
    inside = tuple(md for md in modes if f0 - delta <= md.frequency <= f0 + delta)
    nearest = min(modes, key=lambda md: abs(md.frequency - f0))
    return ModeDensity(mode_count(inside), nearest, nearest.frequency - f0, inside)


def wall_q(mode: CavityMode, sigma_wall: float, a: float, d: float, mu_r: float = 1.0) -> float:
    """Conductor-loss Q of a cylindrical-cavity mode (radius a, height d).

    Closed forms for ``Q * delta / lambda`` (Harrington); lambda is the
    free-space wavelength of the mode.
    """
    if not sigma_wall > 0:
        raise ValueError("sigma_wall must be positive")
    if mode.family == "TM":
        if mode.n < 1:
            raise ValueError(f"unsupported mode {mode.label}")
        x = _bessel_roots(mode.m, mode.n, False)[-1]
        if mode.p == 0:
            qdl = x / (2 * math.pi * (1 + a / d))
        else:
            qdl = math.hypot(x, mode.p * math.pi * a / d) / (2 * math.pi * (1 + 2 * a / d))
    elif mode.family == "TE":
        if mode.n < 1 or mode.p < 1:
            raise ValueError(f"unsupported mode {mode.label}")
        x = _bessel_roots(mode.m, mode.n, True)[-1]
        m, p = mode.m, mode.p
        t = p * math.pi * a / d
        num = (1 - (m / x) ** 2) * (x ** 2 + t ** 2) ** 1.5
        den = 2 * math.pi * (x ** 2 + 2 * a / d * t ** 2 + (1 - 2 * a / d) * (m * t / x) ** 2)
        qdl = num / den
    else:  # pragma: no cover - guarded by CavityMode
        raise ValueError(mode.family)
    f = cylinder_mode_frequency(x, a, d, mode.p)
    lam = C0 / f
    return qdl * lam / skin_depth(sigma_wall, mu_r, f)


def with_q(modes, sigma_wall: float, a: float, d: float) -> list[CavityMode]:
    out = []
    for md in modes:
        out.append(CavityMode(md.frequency, md.family, md.m, md.n, md.p, md.degeneracy,
                              wall_q(md, sigma_wall, a, d)))
    return out


# --- rectangular box -------------------------------------------------------------

def rect_mode_frequency(a: float, b: float, d: float, m: int, n: int, p: int) -> float:
    return C0 / 2 * math.sqrt((m / a) ** 2 + (n / b) ** 2 + (p / d) ** 2)


def rect_modes(a: float, b: float, d: float, f_max: float) -> list[CavityMode]:
    """Modes of an ``a x b x d`` PEC box (TE/TM relative to z) up to ``f_max``."""
    if not (a > 0 and b > 0 and d > 0):
        raise ValueError("box dimensions must be positive")
    kmax = 2 * f_max / C0
    modes = []
    for m in range(int(kmax * a) + 1):
        for n in range(int(kmax * b) + 1):
            for p in range(int(kmax * d) + 1):
                f = rect_mode_frequency(a, b, d, m, n, p)
                if f > f_max or f == 0:
                    continue
                if p >= 1 and (m > 0 or n > 0):
                    modes.append(CavityMode(f, "TE", m, n, p))
                if m >= 1 and n >= 1:
                    modes.append(CavityMode(f, "TM", m, n, p))
    modes.sort()
    return modes


# --- cryostat sections -----------------------------------------------------------

def cryostat_sections(radius: float = 0.15, heights=(0.10, 0.15)) -> list[tuple[float, float]]:
    """(radius, height) of each analysed level of the cryostat."""
    return [(radius, h) for h in heights]


def stored_energy_q_tm010(a: float, d: float, sigma_wall: float) -> float:
    """TM010 Q from direct numerical field integration (no closed form)."""
    from scipy.integrate import quad

    x01 = _bessel_roots(0, 1, False)[0]
    kc = x01 / a
    f = C0 * kc / (2 * math.pi)
    omega = 2 * math.pi * f
    rs = 1 / (sigma_wall * skin_depth(sigma_wall, 1.0, f))
    # Ez = J0(kc r), H_phi = (j omega eps / kc) J1(kc r); use |H| up to a constant
    # and eps*|E|^2 = mu*|H|^2 at resonance with the shared constant eps0.
    eps = 1 / (MU0 * C0 ** 2)
    h_amp = omega * eps / kc
    # time-averaged total energy = 2 * (eps/4) * integral |E|^2
    w = 0.5 * eps * d * 2 * math.pi * quad(lambda r: jv(0, kc * r) ** 2 * r, 0, a, limit=200)[0]
    side = rs / 2 * (h_amp * jv(1, x01)) ** 2 * 2 * math.pi * a * d
    caps = 2 * rs / 2 * 2 * math.pi * quad(lambda r: (h_amp * jv(1, kc * r)) ** 2 * r, 0, a, limit=200)[0]
    return omega * w / (side + caps)
