"""Scene -> grid -> FDTD -> engineering results, shared by the CLI and scripts."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import postproc
from .fdtd import CPMLConfig, Simulation, SimulationConfig, SimulationResult, field_plane
from .grid import DEFAULT_EDGE_REFINEMENT, YeeGrid, generate
from .materials import TemperatureClass
from .scene import Scene, check


@dataclass(frozen=True)
class SimulateOptions:
    """Knobs of one simulate run.

    Attributes
    ----------
    resolution : float
        Cells per wavelength at ``f_max``.
    edge_refinement : float
        Spacing at sheet and port ends is the local maximum divided by this.
    f_start, f_stop, n_freq :
        Sweep grid (Hz).
    f_max : float
        Meshing frequency; defaults to the pulse's upper band edge.
    full_s : bool
        Also run one single-ended excitation per pair member for the full S matrix.
    gain_every : int
        Far-field transform at every ``gain_every``-th sweep frequency (0: none).
    angle_step : float
        Far-field grid step (degrees).
    max_steps, energy_stop :
        Solver stop criteria.
    """

    resolution: float = 15.0
    edge_refinement: float = DEFAULT_EDGE_REFINEMENT
    f_start: float = 24e9
    f_stop: float = 32e9
    n_freq: int = 41
    f_center: float = 28e9
    half_band: float = 4e9
    f_max: float | None = None
    full_s: bool = False
    gain_every: int = 4
    angle_step: float = 2.0
    max_steps: int = 200_000
    energy_stop: float = 1e-5
    cpml_kappa_max: float = 3.0

    def sweep(self) -> tuple[float, ...]:
        return tuple(float(f) for f in np.linspace(self.f_start, self.f_stop, self.n_freq))

    def config(self) -> SimulationConfig:
        return SimulationConfig(sweep_frequencies=self.sweep(), f_center=self.f_center, half_band=self.half_band,
                                max_steps=self.max_steps, energy_stop=self.energy_stop,
                                cpml=CPMLConfig(kappa_max=self.cpml_kappa_max))

    def mesh_frequency(self) -> float:
        return self.f_max if self.f_max is not None else self.f_center + self.half_band


@dataclass
class SimulationOutcome:
    scene: Scene
    grid: YeeGrid
    temperature: str
    result: SimulationResult
    sweep: postproc.SweepResult
    pattern: postproc.FarField | None
    timings: dict[str, float] = field(default_factory=dict)
    single_ended: dict[int, SimulationResult] = field(default_factory=dict)
    snapshot: np.ndarray | None = None
    snapshot_plane: tuple | None = None

    def dip(self) -> tuple[float, float]:
        """Frequency and depth (dB) of the deepest |Sdd11| sample, refined by a parabola."""
        return dip_of(self.sweep.frequencies, postproc.to_db(self.sweep.Sdd11))

    def summary(self) -> dict:
        f_dip, db = self.dip()
        i0 = int(np.argmin(np.abs(self.sweep.frequencies - 28e9)))
        eff = self.sweep.efficiency
        return {
            "scene": self.scene.name, "temperature": self.temperature,
            "dip_frequency_Hz": f_dip, "dip_Sdd11_dB": db,
            "efficiency_at_28GHz": float(eff[i0]), "total_efficiency_at_28GHz": float(self.sweep.total_efficiency[i0]),
            "mean_efficiency": float(np.mean(eff)),
            "max_power_balance_error": float(np.max(np.abs(
                (self.sweep.P_accepted - self.sweep.P_radiated - self.sweep.P_ohmic) / self.sweep.P_accepted))),
            "steps": self.result.steps, "converged": self.result.converged, "cells": self.grid.n_cells,
        }


def dip_of(f: np.ndarray, db: np.ndarray) -> tuple[float, float]:
    i = int(np.argmin(db))
    if 0 < i < len(f) - 1:
        y0, y1, y2 = db[i - 1], db[i], db[i + 1]
        den = y0 - 2 * y1 + y2
        if den > 0:
            off = 0.5 * (y0 - y2) / den
            h = f[i + 1] - f[i]
            return float(f[i] + off * h), float(y1 - 0.25 * (y0 - y2) * off)
    return float(f[i]), float(db[i])


def _pair(scene: Scene) -> tuple[int, int] | None:
    pairs = scene.meta.get("differential_pairs") or []
    return tuple(pairs[0]) if pairs else None


def simulate(scene: Scene, temperature="cryo", options: SimulateOptions | None = None,
             grid: YeeGrid | None = None, progress=None) -> SimulationOutcome:
    """Run the full pipeline on one scene at one temperature class."""
    opt = options or SimulateOptions()
    temp = TemperatureClass.parse(temperature).value
    check(scene)
    timings = {}
    t0 = time.perf_counter()
    grid = grid or generate(scene, resolution=opt.resolution, f_max=opt.mesh_frequency(),
                           edge_refinement=opt.edge_refinement)
    timings["grid_s"] = time.perf_counter() - t0
    cfg = opt.config()
    sim = Simulation(scene, grid, cfg, temperature=temp)
    plane = _feed_plane(scene)
    t0 = time.perf_counter()
    snap_time = sim.waveform.t0
    res = sim.run(progress=progress, snapshot=(plane, snap_time) if plane else None)
    timings["fdtd_s"] = time.perf_counter() - t0
    pair = _pair(scene)
    single = {}
    if opt.full_s and pair:
        for pid in pair:
            t0 = time.perf_counter()
            s2 = Simulation(scene, grid, cfg, temperature=temp, materials=sim.materials, excitation={pid: 1.0})
            single[pid] = s2.run()
            timings[f"fdtd_port{pid}_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    sweep, pattern = summarize(res, pair, opt, single)
    timings["postproc_s"] = time.perf_counter() - t0
    return SimulationOutcome(scene, grid, temp, res, sweep, pattern, timings, single,
                             res.snapshots.get("feed"), plane)


def _feed_plane(scene: Scene):
    """Normal E on the plane of the first port: opposite charge on the two arms shows as a sign flip."""
    if not scene.ports:
        return None
    p = scene.ports[0]
    return ("Ez", 2, p.start[2])


def summarize(res: SimulationResult, pair, opt: SimulateOptions, single=None):
    """Sweep table plus the centre-frequency pattern."""
    freqs = res.frequencies
    if pair:
        p, n = res.ports[pair[0]], res.ports[pair[1]]
        sdd = postproc.differential_sdd11(p, n)
        zin = postproc.differential_impedance(p, n)
    else:
        rec = next(iter(res.ports.values()))
        a, b = postproc.power_waves(rec)
        sdd = b / a
        zin = postproc.port_impedance(rec)
    S = np.zeros((0,))
    if single and pair:
        S = postproc.s_matrix({pid: r.ports for pid, r in single.items()}, list(pair))
    bal = postproc.power_balance(res)
    eff = bal["P_radiated"] / bal["P_accepted"]
    mism = 1 - np.abs(sdd) ** 2
    gain = np.full(len(freqs), np.nan)
    dirs = [(math.nan, math.nan)] * len(freqs)
    pattern = None
    i_c = int(np.argmin(np.abs(freqs - opt.f_center)))
    idx = set(range(0, len(freqs), opt.gain_every)) if opt.gain_every else set()
    idx.add(i_c)
    theta, phi = postproc.angle_grid(opt.angle_step)
    for i in sorted(idx):
        ff = postproc.ntff(res.near_field, i, theta, phi)
        d, th, ph = ff.max_directivity()
        _, g = postproc.efficiency_and_gain(bal["P_radiated"][i], bal["P_accepted"][i], 10 * math.log10(d), sdd[i])
        gain[i] = g
        dirs[i] = (th, ph)
        if i == i_c:
            pattern = ff
    sweep = postproc.SweepResult(freqs, zin, S, sdd, bal["P_accepted"], bal["P_radiated"], bal["P_ohmic"], eff,
                                 eff * mism, gain, dirs)
    return sweep, pattern


def options_dict(opt: SimulateOptions) -> dict:
    return asdict(opt)


def with_thickness(scene_factory, thickness: float, **kw) -> Scene:
    return scene_factory(si_thickness=thickness, **kw)


__all__ = ["SimulateOptions", "SimulationOutcome", "dip_of", "options_dict", "replace", "simulate", "summarize"]
