#!/usr/bin/env python3
"""Free-space centre-fed strip dipole: FDTD input impedance against the induced-EMF oracle.

Usage: thin_dipole.py [--width M] [--gap M] [--resolution N] [--edge-refinement N] [--out FILE]
"""

import argparse
import csv
import sys

import numpy as np

from fieldforge import design, grid, postproc, presets
from fieldforge.constants import C0
from fieldforge.fdtd import Simulation, SimulationConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--width", type=float, default=2e-5, help="strip width (m); equivalent radius is width / 4")
    ap.add_argument("--gap", type=float, default=4e-5, help="feed gap (m)")
    ap.add_argument("--resolution", type=float, default=15)
    ap.add_argument("--edge-refinement", type=float, default=32)
    ap.add_argument("--f0", type=float, default=28e9, help="the dipole is half a wavelength long here (Hz)")
    ap.add_argument("--out", default="thin-dipole.csv")
    a = ap.parse_args(argv)
    L = C0 / a.f0 / 2
    scene = presets.free_space_dipole(L, width=a.width, gap=a.gap)
    g = grid.generate(scene, resolution=a.resolution, f_max=34e9, edge_refinement=a.edge_refinement)
    print(g.stats(), file=sys.stderr)
    f = np.linspace(24e9, 32e9, 33)
    cfg = SimulationConfig(sweep_frequencies=tuple(f), f_center=28e9, half_band=4e9, record_near_field=False,
                           energy_stop=1e-6)
    r = Simulation(scene, g, cfg).run()
    z = postproc.port_impedance(r.ports[1])
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("f_Hz", "L_over_lambda", "Zin_re", "Zin_im", "emf_re", "emf_im"))
        for fi, zi in zip(f, z):
            zo = design.thin_dipole_impedance(L, a.width / 4, fi)
            w.writerow((f"{fi:.9g}", f"{L * fi / C0:.6f}", f"{zi.real:.6g}", f"{zi.imag:.6g}",
                        f"{zo.real:.6g}", f"{zo.imag:.6g}"))
            print(f"{fi / 1e9:6.2f} GHz  L/lambda {L * fi / C0:.3f}  FDTD {zi.real:7.1f}{zi.imag:+7.1f}j  "
                  f"EMF {zo.real:6.1f}{zo.imag:+6.1f}j")
    print(f"{r.steps} steps, {r.wall_time:.0f} s, wrote {a.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
