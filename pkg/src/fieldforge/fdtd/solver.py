"""Leapfrog Yee time stepping with CPML, lumped ports and DFT recorders.

Time stamps: ``E`` carries integer steps ``n dt`` and ``H`` half steps
``(n + 1/2) dt``.  Each step updates H from E, then E from H; port sources are
evaluated at the half step.  All spectra use the ``exp(-j 2 pi f t)`` kernel,
so they are phasors in the ``exp(+j w t)`` convention.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..constants import EPS0, MU0
from ..grid import MaterialArrays, YeeGrid, assign_materials, courant_dt
from ..scene import Scene, SceneError
from . import kernels
from .cpml import AxisProfile, CPMLConfig, axis_profile
from .snapshot import field_plane
from .sources import GaussianDerivative, ModulatedGaussian

COMPONENTS = ("Ex", "Ey", "Ez", "Hx", "Hy", "Hz")
_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


class SimulationDiverged(RuntimeError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite field values at step {step}")


class ConvergenceWarning(UserWarning):
    pass


def default_sweep() -> tuple[float, ...]:
    return tuple(float(f) for f in np.linspace(24e9, 32e9, 41))


@dataclass(frozen=True)
class SimulationConfig:
    """Run parameters.

    Attributes
    ----------
    sweep_frequencies : tuple of float
        Frequencies (Hz) of every port, flux and loss spectrum.
    f_center, half_band : float
        Pulse spectrum centre and the offset of its -20 dB edges.
    pulse : str
        ``"modulated"`` (band-limited, default) or ``"gaussian-derivative"``.
    max_steps : int
        Hard step limit; reaching it flags the result as unconverged.
    energy_stop : float
        Stop once the total field energy falls below this fraction of its peak.
    check_interval : int
        Steps between energy and finiteness checks.
    cpml : CPMLConfig
        Grading of the absorbing layer.
    record_near_field : bool
        Accumulate tangential fields on a closed box for flux and far field.
    box_margin : int
        Cells between the CPML interface and the near-field box.
    samples_per_period : int
        Field DFT sampling density at the highest sweep frequency.
    courant : float
        Fraction of the Courant limit used for ``dt``.
    """

    sweep_frequencies: tuple[float, ...] = field(default_factory=default_sweep)
    f_center: float = 28e9
    half_band: float = 4e9
    pulse: str = "modulated"
    max_steps: int = 200_000
    energy_stop: float = 1e-5
    check_interval: int = 200
    cpml: CPMLConfig = field(default_factory=CPMLConfig)
    record_near_field: bool = True
    box_margin: int = 2
    samples_per_period: int = 16
    courant: float = 0.99

    def __post_init__(self):
        f = np.asarray(self.sweep_frequencies, dtype=float)
        if f.size == 0 or np.any(f <= 0):
            raise ValueError("sweep frequencies must be positive")
        if self.pulse == "modulated" and (f.min() < self.f_center - self.half_band - 1e-3
                                          or f.max() > self.f_center + self.half_band + 1e-3):
            raise ValueError("pulse band f_center +/- half_band must cover every sweep frequency")
        if not 0 < self.energy_stop < 1:
            raise ValueError("energy_stop must lie in (0, 1)")
        if self.max_steps < 1 or self.check_interval < 1:
            raise ValueError("max_steps and check_interval must be positive")
        if self.pulse not in ("modulated", "gaussian-derivative"):
            raise ValueError(f"unknown pulse {self.pulse!r}")
        if not 0 < self.courant <= 1:
            raise ValueError("courant fraction must lie in (0, 1]")

    @property
    def frequencies(self) -> np.ndarray:
        return np.asarray(self.sweep_frequencies, dtype=float)

    def waveform(self):
        if self.pulse == "modulated":
            return ModulatedGaussian(self.f_center, self.half_band)
        return GaussianDerivative(self.f_center)


@dataclass
class FieldState:
    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    hz: np.ndarray
    t: float = 0.0
    step_index: int = 0

    @classmethod
    def zeros(cls, shape: tuple[int, int, int]) -> "FieldState":
        nx, ny, nz = shape
        return cls(np.zeros((nx, ny + 1, nz + 1)), np.zeros((nx + 1, ny, nz + 1)),
                   np.zeros((nx + 1, ny + 1, nz)), np.zeros((nx + 1, ny, nz)),
                   np.zeros((nx, ny + 1, nz)), np.zeros((nx, ny, nz + 1)))

    @property
    def e(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.ex, self.ey, self.ez

    @property
    def h(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.hx, self.hy, self.hz

    def component(self, name: str) -> np.ndarray:
        if name not in COMPONENTS:
            raise ValueError(f"unknown component {name!r}")
        return getattr(self, name.lower())

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.e + self.h)


@dataclass
class PortRecord:
    """Port spectra: terminal voltage, current into the structure, source EMF.

    ``V`` is the potential of the port end relative to its start and ``I`` the
    current leaving the end terminal, from the H circulation around the edge.
    """

    port_id: int
    frequencies: np.ndarray
    V: np.ndarray
    I: np.ndarray
    Vs: np.ndarray
    resistance: float
    amplitude: float
    v_series: np.ndarray | None = None
    i_series: np.ndarray | None = None
    dt: float = 0.0

    def __post_init__(self):
        n = len(self.frequencies)
        if not (len(self.V) == len(self.I) == len(self.Vs) == n):
            raise ValueError("accumulator count must equal the sweep frequency count")

    @property
    def driven(self) -> bool:
        return self.amplitude != 0


@dataclass
class FaceRecord:
    """Tangential phasors on one face of the near-field box.

    The face is normal to ``axis`` (``a``); ``b`` and ``c`` are the next two axes
    in cyclic order.  ``eb``/``hc`` share the grid (``b`` cell centres x ``c``
    nodes), ``ec``/``hb`` the grid (``b`` nodes x ``c`` cell centres).  Weights
    are the surface patches of each sample.
    """

    axis: int
    sign: int
    position: float
    eb: np.ndarray
    hc: np.ndarray
    ec: np.ndarray
    hb: np.ndarray
    b_eb: np.ndarray
    c_eb: np.ndarray
    w_eb: np.ndarray
    b_ec: np.ndarray
    c_ec: np.ndarray
    w_ec: np.ndarray


@dataclass
class NearFieldRecord:
    frequencies: np.ndarray
    faces: list[FaceRecord]
    bounds: tuple[float, ...]
    background_eps_r: float = 1.0


@dataclass
class LossRecord:
    """Per-frequency dissipated power split into volume and sheet parts (W)."""

    frequencies: np.ndarray
    volume: np.ndarray
    sheet: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.volume + self.sheet


@dataclass
class CurrentSource:
    """Ideal current ``amplitude * waveform(t)`` (A) along one grid edge."""

    component: int
    index: tuple[int, int, int]
    waveform: Callable[[float], float]
    amplitude: float = 1.0


@dataclass
class SimulationResult:
    ports: dict[int, PortRecord]
    near_field: NearFieldRecord | None
    losses: LossRecord | None
    probes: dict[str, np.ndarray]
    energy: list[tuple[int, float]]
    steps: int
    dt: float
    converged: bool
    peak_energy: float
    final_energy: float
    wall_time: float
    state: FieldState
    snapshots: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def frequencies(self) -> np.ndarray:
        rec = next(iter(self.ports.values()), None)
        return rec.frequencies if rec is not None else np.zeros(0)


class _DFTBank:
    """Running DFT of sampled vectors, batched into matrix products."""

    def __init__(self, freqs: np.ndarray, size: int, weight: float, batch: int = 64):
        self.freqs = freqs
        self.weight = weight
        self.acc = np.zeros((len(freqs), size), dtype=complex)
        self._buf = np.empty((batch, size))
        self._t = np.empty(batch)
        self._n = 0

    def add(self, t: float, values: np.ndarray):
        self._buf[self._n] = values
        self._t[self._n] = t
        self._n += 1
        if self._n == len(self._t):
            self.flush()

    def flush(self):
        if self._n == 0:
            return
        ph = -2 * np.pi * np.outer(self.freqs, self._t[:self._n])
        buf = self._buf[:self._n]
        self.acc += (np.cos(ph) @ buf + 1j * (np.sin(ph) @ buf)) * self.weight
        self._n = 0


def dft(series: np.ndarray, times: np.ndarray, freqs: np.ndarray, weight: float) -> np.ndarray:
    out = np.zeros(len(freqs), dtype=complex)
    for s in range(0, len(series), 4096):
        ph = -2 * np.pi * np.outer(freqs, times[s:s + 4096])
        out += (np.cos(ph) + 1j * np.sin(ph)) @ series[s:s + 4096]
    return out * weight


def port_conductivity(length: float, dual_area: float, resistance: float) -> float:
    """Edge conductivity that makes a one-edge resistor of ``resistance`` ohm."""
    return length / (dual_area * resistance)


def _moved(arr: np.ndarray, order: tuple[int, int, int]) -> np.ndarray:
    return np.transpose(arr, order)


def _shrunk(shape, axis: int, n: int) -> tuple[int, ...]:
    s = list(shape)
    s[axis] = n
    return tuple(s)


def _trapezoid_weights(lines: np.ndarray, i0: int, i1: int) -> np.ndarray:
    d = np.diff(lines[i0:i1 + 1])
    w = np.zeros(i1 - i0 + 1)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


class Simulation:
    """One FDTD run over a meshed scene.

    Parameters
    ----------
    scene, grid :
        Validated scene and its generated grid.
    config : SimulationConfig
    temperature :
        Material temperature class; defaults to the scene's ``meta``.
    excitation : dict, optional
        Source amplitude per port id.  Defaults to each active port's polarity;
        ports not listed are passive loads.
    current_sources, probes :
        Extra ideal edge currents and point probes ``name -> (component, index)``.
    """

    def __init__(self, scene: Scene, grid: YeeGrid, config: SimulationConfig | None = None,
                 temperature=None, excitation: dict[int, float] | None = None,
                 materials: MaterialArrays | None = None,
                 current_sources: list[CurrentSource] | None = None,
                 probes: dict[str, tuple[str, tuple[int, int, int]]] | None = None,
                 keep_series: bool = False):
        self.scene = scene
        self.grid = grid
        self.config = config or SimulationConfig()
        cfg = self.config
        temp = temperature or scene.meta.get("temperature", "cryo")
        self.materials = materials or assign_materials(scene, grid, temp, rs_frequency=cfg.f_center)
        self.dt = courant_dt(grid, cfg.courant)
        self.waveform = cfg.waveform()
        self.state = FieldState.zeros(grid.shape)
        self.keep_series = keep_series
        self.current_sources = list(current_sources or [])
        self.probes = dict(probes or {})
        if excitation is None:
            excitation = {p.id: float(p.polarity) for p in scene.active_ports()}
        ids = {p.id for p in scene.ports}
        unknown = set(excitation) - ids
        if unknown:
            raise SceneError(f"excitation names unknown ports {sorted(unknown)}")
        self.excitation = {pid: float(excitation.get(pid, 0.0)) for pid in sorted(ids)}
        self._loops: dict = {}
        self._build_coefficients()
        self._build_cpml()

    # --- setup -------------------------------------------------------------

    def _build_coefficients(self):
        g, m, dt = self.grid, self.materials, self.dt
        self.ca, self.cb = [], []
        sig = [s.copy() for s in m.sigma]
        for pe in g.port_edges:
            sig[pe.axis][pe.index] += port_conductivity(pe.length, pe.dual_area, pe.port.source_resistance)
        self.sigma = sig
        for a in range(3):
            eps = EPS0 * m.eps_r[a]
            loss = sig[a] * dt / (2 * eps)
            ca = (1 - loss) / (1 + loss)
            cb = (dt / eps) / (1 + loss)
            ca[m.pec[a]] = 0.0
            cb[m.pec[a]] = 0.0
            self.ca.append(np.ascontiguousarray(ca))
            self.cb.append(np.ascontiguousarray(cb))
        self.db = dt / MU0

    def _build_cpml(self):
        g, cfg = self.grid, self.config
        npml = g.npml
        self.profiles: list[AxisProfile] = []
        for a in range(3):
            d = g.spacing(a)
            self.profiles.append(axis_profile(len(d), npml, float(d[0]), float(d[-1]), cfg.cpml, self.dt))
        self.inv_e = [1.0 / (self.profiles[a].e_kappa * g.dual_spacing(a)) for a in range(3)]
        self.inv_h = [1.0 / (self.profiles[a].h_kappa * g.spacing(a)) for a in range(3)]
        self.inv_dual = [1.0 / g.dual_spacing(a) for a in range(3)]
        self.inv_prim = [1.0 / g.spacing(a) for a in range(3)]
        self._psi = []
        for a, b, c in _CYCLIC:
            n_e, n_h = len(self.profiles[a].e_idx), len(self.profiles[a].h_idx)
            self._psi.append((np.zeros(_shrunk(self.state.e[b].shape, a, n_e)),
                              np.zeros(_shrunk(self.state.e[c].shape, a, n_e)),
                              np.zeros(_shrunk(self.state.h[b].shape, a, n_h)),
                              np.zeros(_shrunk(self.state.h[c].shape, a, n_h))))

    # --- stepping ----------------------------------------------------------

    def _update_h(self):
        st = self.state
        kernels.update_h(st.hx, st.hy, st.hz, st.ex, st.ey, st.ez,
                         self.inv_h[0], self.inv_h[1], self.inv_h[2], self.db)
        if self.grid.npml:
            for (a, b, c), psi in zip(_CYCLIC, self._psi):
                p = self.profiles[a]
                kernels.CPML_H[a](st.h[b], st.h[c], st.e[b], st.e[c], psi[2], psi[3], p.h_idx, p.h_b, p.h_c,
                                  self.inv_prim[a], self.db)

    def _update_e(self, t_half: float):
        st = self.state
        ca, cb = self.ca, self.cb
        kernels.update_e(st.ex, st.ey, st.ez, st.hx, st.hy, st.hz, ca[0], cb[0], ca[1], cb[1], ca[2], cb[2],
                         self.inv_e[0], self.inv_e[1], self.inv_e[2])
        if self.grid.npml:
            for (a, b, c), psi in zip(_CYCLIC, self._psi):
                p = self.profiles[a]
                kernels.CPML_E[a](st.e[b], st.e[c], st.h[b], st.h[c], psi[0], psi[1], p.e_idx, p.e_b, p.e_c,
                                  self.inv_dual[a], cb[b], cb[c])
        w = float(self.waveform(t_half))
        for pe in self.grid.port_edges:
            amp = self.excitation[pe.port.id]
            if amp:
                vs = amp * w
                st.e[pe.axis][pe.index] -= cb[pe.axis][pe.index] * pe.direction * vs / (
                    pe.port.source_resistance * pe.dual_area)
        for src in self.current_sources:
            area = self._dual_area(src.component, src.index)
            st.e[src.component][src.index] -= cb[src.component][src.index] * src.amplitude * float(
                src.waveform(t_half)) / area

    def _dual_area(self, axis: int, index) -> float:
        u, v = [i for i in range(3) if i != axis]
        return float(self.grid.dual_spacing(u)[index[u]] * self.grid.dual_spacing(v)[index[v]])

    def step(self, n: int = 1):
        """Advance ``n`` leapfrog steps without recording."""
        for _ in range(n):
            self._update_h()
            self._update_e(self.state.t + 0.5 * self.dt)
            self.state.t += self.dt
            self.state.step_index += 1

    # --- observables -------------------------------------------------------

    def port_voltage(self, pe) -> float:
        return -pe.direction * self.state.e[pe.axis][pe.index] * pe.length

    def loop_current(self, axis: int, index) -> float:
        """Right-handed H circulation around an E edge (current along +axis)."""
        key = (axis, tuple(index))
        plan = self._loops.get(key)
        if plan is None:
            a, b, c = _CYCLIC[axis]
            g = self.grid
            ib, ic = list(index), list(index)
            ib[b] -= 1
            ic[c] -= 1
            plan = (c, tuple(index), tuple(ib), float(g.dual_spacing(c)[index[c]]),
                    b, tuple(ic), float(g.dual_spacing(b)[index[b]]))
            self._loops[key] = plan
        c, i, ib, wc, b, ic, wb = plan
        hc, hb = self.state.h[c], self.state.h[b]
        return float((hc[i] - hc[ib]) * wc - (hb[i] - hb[ic]) * wb)

    def edge_volumes(self) -> list[np.ndarray]:
        g = self.grid
        d = [g.spacing(a) for a in range(3)]
        dd = [g.dual_spacing(a) for a in range(3)]
        out = []
        for a in range(3):
            w = [dd[0], dd[1], dd[2]]
            w[a] = d[a]
            out.append((w[0], w[1], w[2]))
        return out

    def energy(self, h_prev=None) -> float:
        """Electromagnetic energy (J) over the whole grid.

        With ``h_prev`` (H one step earlier) the magnetic part pairs the two
        half steps, which is the exactly conserved quantity of the scheme.
        """
        g, st = self.grid, self.state
        d = [g.spacing(a) for a in range(3)]
        dd = [g.dual_spacing(a) for a in range(3)]
        w_e = 0.0
        for a in range(3):
            w = [dd[0], dd[1], dd[2]]
            w[a] = d[a]
            w_e += kernels.weighted_sq_sum(st.e[a] * np.sqrt(self.materials.eps_r[a]), *w)
        w_h = 0.0
        for a in range(3):
            w = [d[0], d[1], d[2]]
            w[a] = dd[a]
            if h_prev is None:
                w_h += kernels.weighted_sq_sum(st.h[a], *w)
            else:
                w_h += kernels.weighted_dot(st.h[a], h_prev[a], *w)
        return 0.5 * EPS0 * w_e + 0.5 * MU0 * w_h

    # --- recorders ---------------------------------------------------------

    def near_field_box(self) -> tuple[int, ...]:
        """Node index bounds ``(i0, i1, j0, j1, k0, k1)`` of the flux box."""
        g = self.grid
        m = g.npml + self.config.box_margin if g.npml else self.config.box_margin
        out = []
        for a in range(3):
            n = len(g.lines[a]) - 1
            lo, hi = m, n - m
            if hi - lo < 2:
                raise SceneError("grid too small for a near-field box")
            out += [lo, hi]
        return tuple(out)

    def _face_plan(self):
        """Index slices and geometry of each box face."""
        g = self.grid
        box = self.near_field_box()
        plans = []
        for a, b, c in _CYCLIC:
            o = (a, b, c)
            b0, b1 = box[2 * b], box[2 * b + 1]
            c0, c1 = box[2 * c], box[2 * c + 1]
            lb, lc = g.lines[b], g.lines[c]
            cb_, cc_ = g.centers(b), g.centers(c)
            wb_node = _trapezoid_weights(lb, b0, b1)
            wc_node = _trapezoid_weights(lc, c0, c1)
            for sign, i in ((-1, box[2 * a]), (+1, box[2 * a + 1])):
                plans.append(dict(
                    axis=a, sign=sign, i=i, order=o, position=float(g.lines[a][i]),
                    s_eb=(i, slice(b0, b1), slice(c0, c1 + 1)),
                    s_ec=(i, slice(b0, b1 + 1), slice(c0, c1)),
                    s_h_eb=(slice(i - 1, i + 1), slice(b0, b1), slice(c0, c1 + 1)),
                    s_h_ec=(slice(i - 1, i + 1), slice(b0, b1 + 1), slice(c0, c1)),
                    b_eb=cb_[b0:b1], c_eb=lc[c0:c1 + 1],
                    w_eb=np.outer(np.diff(lb[b0:b1 + 1]), wc_node),
                    b_ec=lb[b0:b1 + 1], c_ec=cc_[c0:c1],
                    w_ec=np.outer(wb_node, np.diff(lc[c0:c1 + 1])),
                ))
        return plans

    def _gather_e_faces(self, plans) -> np.ndarray:
        st = self.state
        parts = []
        for p in plans:
            a, b, c = p["order"]
            parts.append(_moved(st.e[b], p["order"])[p["s_eb"]].ravel())
            parts.append(_moved(st.e[c], p["order"])[p["s_ec"]].ravel())
        return np.concatenate(parts)

    def _gather_h_faces(self, plans) -> np.ndarray:
        st = self.state
        parts = []
        for p in plans:
            a, b, c = p["order"]
            parts.append(_moved(st.h[c], p["order"])[p["s_h_eb"]].mean(axis=0).ravel())
            parts.append(_moved(st.h[b], p["order"])[p["s_h_ec"]].mean(axis=0).ravel())
        return np.concatenate(parts)

    def _lossy_edges(self):
        """Flat indices and ``dV`` of dissipative edges (port resistors excluded)."""
        m = self.materials
        vols = self.edge_volumes()
        out = []
        port_keys = {(pe.axis, pe.index) for pe in self.grid.port_edges}
        sheet_masks = []
        for a in range(3):
            mask = np.zeros(m.sigma[a].shape, dtype=bool)
            for s in m.sheets:
                if s.component == a:
                    mask[s.index] = True
            sheet_masks.append(mask)
        interior = self._interior_mask_slices()
        for a in range(3):
            sig = m.sigma[a].copy()
            sig[m.pec[a]] = 0.0
            keep = np.zeros(sig.shape, dtype=bool)
            keep[interior[a]] = True
            keep &= sig > 0
            for ax, idx in port_keys:
                if ax == a:
                    keep[idx] = False
            idx = np.nonzero(keep)
            w0, w1, w2 = vols[a]
            dv = w0[idx[0]] * w1[idx[1]] * w2[idx[2]]
            out.append((idx, sig[idx] * dv, sheet_masks[a][idx]))
        return out

    def _interior_mask_slices(self):
        """E edges strictly inside the near-field box (or the CPML-free region)."""
        g = self.grid
        if self.config.record_near_field:
            box = self.near_field_box()
        else:
            box = []
            for a in range(3):
                n = len(g.lines[a]) - 1
                box += [g.npml, n - g.npml]
        sl = []
        for a in range(3):
            s = []
            for ax in range(3):
                lo, hi = box[2 * ax], box[2 * ax + 1]
                s.append(slice(lo, hi) if ax == a else slice(lo, hi + 1))
            sl.append(tuple(s))
        return sl

    def _probe_value(self, comp: str, index) -> float:
        return float(self.state.component(comp)[tuple(index)])

    # --- main loop ---------------------------------------------------------

    def run(self, progress: Callable[[int, float], None] | None = None,
            energy_log_interval: int | None = None, exact_energy: bool = False,
            snapshot: tuple | None = None) -> SimulationResult:
        """Step until the energy has decayed or ``max_steps`` is reached.

        ``snapshot=((component, axis, position), t)`` stores the plane slice
        at the first step reaching time ``t`` under ``snapshots["feed"]``.
        """
        cfg, g, dt = self.config, self.grid, self.dt
        freqs = cfg.frequencies
        t_start = time.perf_counter()
        n_max = cfg.max_steps
        port_edges = list(g.port_edges)
        v_ser = np.zeros((len(port_edges), n_max))
        i_ser = np.zeros((len(port_edges), n_max))
        probe_ser = {k: np.zeros(n_max) for k in self.probes}
        stride = max(1, int(1.0 / (cfg.samples_per_period * freqs.max() * dt)))
        plans = None
        bank_e = bank_h = None
        if cfg.record_near_field:
            plans = self._face_plan()
            n_e = len(self._gather_e_faces(plans))
            bank_e = _DFTBank(freqs, n_e, stride * dt)
            bank_h = _DFTBank(freqs, n_e, stride * dt)
        lossy = self._lossy_edges()
        n_loss = sum(len(w) for _, w, _ in lossy)
        bank_l = _DFTBank(freqs, n_loss, stride * dt) if n_loss else None
        energies: list[tuple[int, float]] = []
        peak = 0.0
        w_now = 0.0
        converged = False
        src_end = self.waveform.quiet_after
        if self.current_sources:
            src_end = max(src_end, max(getattr(s.waveform, "quiet_after", 0.0) for s in self.current_sources))
        log_every = energy_log_interval
        steps_done = 0
        st = self.state
        snaps: dict[str, np.ndarray] = {}
        for n in range(n_max):
            measure = log_every is not None and n % log_every == 0
            check = (n + 1) % cfg.check_interval == 0
            h_prev = None
            if measure and exact_energy:
                h_prev = tuple(h.copy() for h in st.h)
                # energy at step n pairs H(n-1/2) and H(n+1/2)
            t_half = st.t + 0.5 * dt
            self._update_h()
            if measure:
                energies.append((n, self.energy(h_prev) if exact_energy else self.energy()))
            for k, pe in enumerate(port_edges):
                i_ser[k, n] = pe.direction * self.loop_current(pe.axis, pe.index)
            sample = (n + 1) % stride == 0
            if sample and bank_h is not None:
                bank_h.add(t_half, self._gather_h_faces(plans))
            self._update_e(t_half)
            st.t += dt
            st.step_index += 1
            steps_done = n + 1
            for k, pe in enumerate(port_edges):
                v_ser[k, n] = self.port_voltage(pe)
            for name, (comp, idx) in self.probes.items():
                probe_ser[name][n] = self._probe_value(comp, idx)
            if snapshot is not None and "feed" not in snaps and st.t >= snapshot[1]:
                snaps["feed"] = field_plane(g, st, *snapshot[0])
            if sample:
                if bank_e is not None:
                    bank_e.add(st.t, self._gather_e_faces(plans))
                if bank_l is not None:
                    bank_l.add(st.t, np.concatenate([st.e[a][idx] for a, (idx, _, _) in enumerate(lossy)]))
            if check:
                w_now = self.energy()
                if not math.isfinite(w_now):
                    raise SimulationDiverged(st.step_index)
                peak = max(peak, w_now)
                if progress:
                    progress(st.step_index, w_now / peak if peak else 0.0)
                if st.t > src_end and peak > 0 and w_now < cfg.energy_stop * peak:
                    converged = True
                    break
        if not converged:
            warnings.warn(f"energy did not decay below {cfg.energy_stop:g} of peak in {n_max} steps",
                          ConvergenceWarning, stacklevel=2)
        n = steps_done
        t_e = dt * np.arange(1, n + 1)
        t_h = t_e - 0.5 * dt
        wf = np.asarray(self.waveform(t_h), dtype=float)
        vs_spec = dft(wf, t_h, freqs, dt)
        ports = {}
        for k, pe in enumerate(port_edges):
            amp = self.excitation[pe.port.id]
            ports[pe.port.id] = PortRecord(
                pe.port.id, freqs, dft(v_ser[k, :n], t_e, freqs, dt), dft(i_ser[k, :n], t_h, freqs, dt),
                amp * vs_spec, pe.port.source_resistance, amp,
                v_ser[k, :n].copy() if self.keep_series else None,
                i_ser[k, :n].copy() if self.keep_series else None, dt)
        near = None
        if bank_e is not None:
            bank_e.flush()
            bank_h.flush()
            near = self._unpack_faces(plans, bank_e.acc, bank_h.acc, freqs)
        losses = None
        if bank_l is not None:
            bank_l.flush()
            e2 = np.abs(bank_l.acc) ** 2
            w = np.concatenate([w for _, w, _ in lossy])
            sheet = np.concatenate([s for _, _, s in lossy])
            losses = LossRecord(freqs, 0.5 * e2[:, ~sheet] @ w[~sheet], 0.5 * e2[:, sheet] @ w[sheet])
        elif cfg.record_near_field:
            losses = LossRecord(freqs, np.zeros(len(freqs)), np.zeros(len(freqs)))
        return SimulationResult(
            ports=ports, near_field=near, losses=losses,
            probes={k: v[:n] for k, v in probe_ser.items()}, energy=energies, steps=n, dt=dt,
            converged=converged, peak_energy=peak, final_energy=w_now,
            wall_time=time.perf_counter() - t_start, state=self.state, snapshots=snaps,
        )

    def _unpack_faces(self, plans, acc_e, acc_h, freqs) -> NearFieldRecord:
        faces = []
        pos = 0
        nf = len(freqs)
        for p in plans:
            n_eb = p["w_eb"].size
            n_ec = p["w_ec"].size
            eb = acc_e[:, pos:pos + n_eb].reshape((nf,) + p["w_eb"].shape)
            hc = acc_h[:, pos:pos + n_eb].reshape((nf,) + p["w_eb"].shape)
            pos += n_eb
            ec = acc_e[:, pos:pos + n_ec].reshape((nf,) + p["w_ec"].shape)
            hb = acc_h[:, pos:pos + n_ec].reshape((nf,) + p["w_ec"].shape)
            pos += n_ec
            faces.append(FaceRecord(p["axis"], p["sign"], p["position"], eb, hc, ec, hb,
                                    p["b_eb"], p["c_eb"], p["w_eb"], p["b_ec"], p["c_ec"], p["w_ec"]))
        g = self.grid
        box = self.near_field_box()
        bounds = tuple(float(g.lines[a // 2][box[a]]) for a in range(6))
        return NearFieldRecord(freqs, faces, bounds)


def run(scene: Scene, grid: YeeGrid, config: SimulationConfig | None = None, **kw) -> SimulationResult:
    """Build a :class:`Simulation` and run it to completion."""
    return Simulation(scene, grid, config, **kw).run()
