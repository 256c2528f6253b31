#!/usr/bin/env python3
"""PEC box 10 x 8 x 6 mm: FDTD resonance of TE101 at 10, 15, 20 (or given) cells per wavelength.

Usage: cavity_convergence.py [RES ...]
"""

import sys
import warnings

import numpy as np

from fieldforge import cavity, grid
from fieldforge.fdtd import ConvergenceWarning, CurrentSource, GaussianDerivative, Simulation, SimulationConfig
from fieldforge.fdtd.solver import dft
from fieldforge.scene import Boundary, Scene

A, B, D = 10e-3, 8e-3, 6e-3


def resonance(res: float, steps: int = 16384) -> float:
    sc = Scene(name="box", boundary=Boundary("pec", 0), domain=(0, A, 0, B, 0, D))
    g = grid.generate(sc, resolution=res, f_max=29.14e9)
    i, j, k = len(g.x) // 3, len(g.y) // 2 - 1, len(g.z) // 3
    cfg = SimulationConfig(sweep_frequencies=(29e9,), f_center=29e9, max_steps=steps, record_near_field=False)
    sim = Simulation(sc, g, cfg, current_sources=[CurrentSource(1, (i, j, k), GaussianDerivative(29e9), 1e-3)],
                     probes={"p": ("Ey", (i + 1, j, k + 1))})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        r = sim.run()
    t = r.dt * np.arange(1, r.steps + 1)
    f = np.linspace(20e9, 34e9, 2801)
    mag = np.abs(dft(r.probes["p"] * np.hanning(r.steps), t, f, r.dt))
    n = next(n for n in range(1, len(f) - 1)
             if mag[n] >= mag[n - 1] and mag[n] > mag[n + 1] and mag[n] > 0.05 * mag.max())
    y0, y1, y2 = np.log(mag[n - 1:n + 2])
    return float(f[n] + 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2) * (f[1] - f[0]))


def main():
    exact = cavity.rect_mode_frequency(A, B, D, 1, 0, 1)
    print(f"analytic TE101 {exact / 1e9:.4f} GHz")
    for res in [float(v) for v in sys.argv[1:]] or [10, 15, 20]:
        f = resonance(res)
        print(f"{res:5.1f} cells/wavelength  {f / 1e9:.4f} GHz  error {100 * (f - exact) / exact:+.3f} %")


if __name__ == "__main__":
    main()
