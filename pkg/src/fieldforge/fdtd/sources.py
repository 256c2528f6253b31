"""Excitation waveforms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_QUIET_WIDTHS = math.sqrt(math.log(1e6))


@dataclass(frozen=True)
class ModulatedGaussian:
    """Sine carrier under a Gaussian envelope.

    The amplitude spectrum is a Gaussian centred on ``f_center`` that has
    fallen by ``edge_db`` at ``f_center +/- half_band``; the DC content is
    ``exp(-(pi tau f_center)^2)``, negligible for any practical band.
    """

    f_center: float = 28e9
    half_band: float = 4e9
    edge_db: float = 20.0
    amplitude: float = 1.0
    delay_widths: float = 4.5

    @property
    def tau(self) -> float:
        # |S(f)| ~ exp(-(pi tau (f - fc))^2); solve for the edge attenuation
        return math.sqrt(self.edge_db / 20.0 * math.log(10.0)) / (math.pi * self.half_band)

    @property
    def t0(self) -> float:
        return self.delay_widths * self.tau

    @property
    def duration(self) -> float:
        return 2 * self.t0

    @property
    def quiet_after(self) -> float:
        """Time after which the envelope stays below 1e-6 of its peak."""
        return self.t0 + _QUIET_WIDTHS * self.tau

    def __call__(self, t):
        u = (np.asarray(t) - self.t0) / self.tau
        return self.amplitude * np.sin(2 * math.pi * self.f_center * (np.asarray(t) - self.t0)) * np.exp(-u * u)

    def spectrum(self, f):
        """Analytic Fourier transform magnitude (engineering convention)."""
        f = np.asarray(f, dtype=float)
        g = lambda x: math.sqrt(math.pi) * self.tau * np.exp(-(math.pi * self.tau * x) ** 2)  # noqa: E731
        return self.amplitude * 0.5 * np.abs(g(f - self.f_center) - g(f + self.f_center))


@dataclass(frozen=True)
class GaussianDerivative:
    """First derivative of a Gaussian, peak-normalized; broadband with zero DC."""

    f_peak: float = 28e9
    amplitude: float = 1.0
    delay_widths: float = 5.0

    @property
    def tau(self) -> float:
        # spectrum ~ f exp(-(pi tau f)^2) peaks at f = 1/(pi tau sqrt 2)
        return 1.0 / (math.pi * self.f_peak * math.sqrt(2.0))

    @property
    def t0(self) -> float:
        return self.delay_widths * self.tau

    @property
    def duration(self) -> float:
        return 2 * self.t0

    @property
    def quiet_after(self) -> float:
        return self.t0 + _QUIET_WIDTHS * self.tau + self.tau

    def __call__(self, t):
        u = (np.asarray(t) - self.t0) / self.tau
        return self.amplitude * (-math.sqrt(2 * math.e)) * u * np.exp(-u * u)
