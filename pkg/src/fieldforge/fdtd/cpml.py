"""Convolutional PML coefficient profiles.

Complex-frequency-shifted stretching ``s = kappa + sigma / (alpha + j w eps0)``
graded as ``rho**m`` with depth fraction ``rho`` (0 at the interface, 1 at the
outer wall); ``alpha`` grades linearly the other way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..constants import EPS0, ETA0


@dataclass(frozen=True)
class CPMLConfig:
    """CPML grading parameters.

    Attributes
    ----------
    thickness : int
        Cells per side; the scene's boundary carries the value used for meshing.
    order : float
        Polynomial grading order.
    kappa_max : float
        Peak real coordinate stretching.
    sigma_scale : float
        Peak conductivity as a multiple of ``0.8 (order + 1) / (eta0 * d)``.
    alpha_max : float
        Peak complex-frequency shift (S/m), applied at the interface.
    """

    thickness: int = 8
    order: float = 3.0
    kappa_max: float = 3.0
    sigma_scale: float = 1.0
    alpha_max: float = 0.05

    def __post_init__(self):
        if self.thickness < 1:
            raise ValueError("CPML thickness must be at least one cell")
        if self.order <= 0 or self.kappa_max < 1 or self.sigma_scale < 0 or self.alpha_max < 0:
            raise ValueError("invalid CPML grading parameters")


def sigma_max(cfg: CPMLConfig, d: float) -> float:
    return cfg.sigma_scale * 0.8 * (cfg.order + 1) / (ETA0 * d)


def coefficients(rho: np.ndarray, d: float, cfg: CPMLConfig, dt: float):
    """Recursive-convolution ``b``, ``c`` and ``kappa`` at depth fractions ``rho``."""
    rho = np.clip(np.asarray(rho, dtype=float), 0.0, 1.0)
    g = rho ** cfg.order
    sig = sigma_max(cfg, d) * g
    kap = 1.0 + (cfg.kappa_max - 1.0) * g
    alp = cfg.alpha_max * (1.0 - rho)
    b = np.exp(-(sig / kap + alp) * dt / EPS0)
    denom = sig * kap + kap * kap * alp
    c = np.where(denom > 0, sig / np.where(denom > 0, denom, 1.0) * (b - 1.0), 0.0)
    return b, c, kap


@dataclass
class AxisProfile:
    """CPML data of one axis: stretched node (E) and cell (H) positions."""

    e_idx: np.ndarray
    e_b: np.ndarray
    e_c: np.ndarray
    e_kappa: np.ndarray  # per node, 1 outside the layer
    h_idx: np.ndarray
    h_b: np.ndarray
    h_c: np.ndarray
    h_kappa: np.ndarray  # per cell


def axis_profile(n_cells: int, npml: int, d_low: float, d_high: float, cfg: CPMLConfig,
                 dt: float) -> AxisProfile:
    """Profiles for an axis with ``npml`` layer cells at each end.

    Node ``i`` of the low layer sits at depth ``(npml - i) / npml``; the outer
    wall node is never updated.  Cell centres sit half a cell deeper or
    shallower.
    """
    e_kappa = np.ones(n_cells + 1)
    h_kappa = np.ones(n_cells)
    if npml == 0:
        z = np.zeros(0)
        return AxisProfile(np.zeros(0, dtype=np.int64), z, z, e_kappa, np.zeros(0, dtype=np.int64), z, z, h_kappa)
    n = npml
    e_lo = np.arange(1, n)
    e_hi = np.arange(n_cells - n + 1, n_cells)
    h_lo = np.arange(0, n)
    h_hi = np.arange(n_cells - n, n_cells)
    be_lo, ce_lo, ke_lo = coefficients((n - e_lo) / n, d_low, cfg, dt)
    be_hi, ce_hi, ke_hi = coefficients((e_hi - (n_cells - n)) / n, d_high, cfg, dt)
    bh_lo, ch_lo, kh_lo = coefficients((n - h_lo - 0.5) / n, d_low, cfg, dt)
    bh_hi, ch_hi, kh_hi = coefficients((h_hi + 0.5 - (n_cells - n)) / n, d_high, cfg, dt)
    e_kappa[e_lo] = ke_lo
    e_kappa[e_hi] = ke_hi
    h_kappa[h_lo] = kh_lo
    h_kappa[h_hi] = kh_hi
    return AxisProfile(
        np.concatenate([e_lo, e_hi]).astype(np.int64), np.concatenate([be_lo, be_hi]),
        np.concatenate([ce_lo, ce_hi]), e_kappa,
        np.concatenate([h_lo, h_hi]).astype(np.int64), np.concatenate([bh_lo, bh_hi]),
        np.concatenate([ch_lo, ch_hi]), h_kappa,
    )


def reflection_estimate(cfg: CPMLConfig, d: float) -> float:
    """Theoretical normal-incidence reflection of the continuous graded layer."""
    smax = sigma_max(cfg, d)
    return math.exp(-2 * ETA0 * smax * cfg.thickness * d / (cfg.order + 1))
