"""Nonuniform Yee grid generation and per-edge material assignment.

Field layout (``Nx, Ny, Nz`` cells, node lines ``x[0..Nx]`` etc.)::

    Ex (Nx,   Ny+1, Nz+1)    Hx (Nx+1, Ny,   Nz)
    Ey (Nx+1, Ny,   Nz+1)    Hy (Nx,   Ny+1, Nz)
    Ez (Nx+1, Ny+1, Nz)      Hz (Nx,   Ny,   Nz+1)

The CPML occupies ``npml`` uniform cells outside the physical domain on
every side.  Conductor boxes and cylinders are rasterized as PEC (their skin
depth is never resolved); conductor sheets become resistive surface-impedance
edges.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .constants import C0
from .materials import Material, MaterialKind, TemperatureClass, surface_resistance
from .scene import AXES, Port, Primitive, Scene, SceneError, Shape

DEFAULT_CELL_BUDGET = 6e7
MAX_GRADING = 1.5
DEFAULT_EDGE_REFINEMENT = 8.0
_GROWTH = 0.3  # linear spacing growth rate; exp(0.3) ~ 1.35 < MAX_GRADING
_SNAP_TOL = 1e-10
# interval samples, geometrically dense toward both ends so um cells next to cm intervals resolve
_EDGE = np.geomspace(1e-9, 0.5, 600)
_UNIT_SAMPLES = np.unique(np.concatenate([[0.0], _EDGE, np.linspace(0, 1, 4001), 1 - _EDGE, [1.0]]))


class GridError(ValueError):
    pass


class CellBudgetError(GridError):
    def __init__(self, count: float, budget: float, hint: str = ""):
        self.count = count
        self.budget = budget
        msg = f"grid needs {count:.3g} cells, over the budget of {budget:.3g}"
        if hint:
            msg += f"; {hint}"
        super().__init__(msg)


def cell_budget() -> float:
    env = os.environ.get("FIELDFORGE_CELL_BUDGET")
    return float(env) if env else DEFAULT_CELL_BUDGET


@dataclass
class PortEdge:
    port: Port
    axis: int
    index: tuple[int, int, int]  # index into the E component array along ``axis``
    length: float
    dual_area: float
    direction: int


@dataclass
class YeeGrid:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    npml: int
    domain: tuple[float, ...]
    f_max: float
    resolution: float
    port_edges: list[PortEdge] = field(default_factory=list)

    @property
    def lines(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.x, self.y, self.z

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.x) - 1, len(self.y) - 1, len(self.z) - 1

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    def spacing(self, axis: int) -> np.ndarray:
        return np.diff(self.lines[axis])

    def dual_spacing(self, axis: int) -> np.ndarray:
        """Distance between neighbouring cell centres, per node (ends: half cells)."""
        d = self.spacing(axis)
        out = np.empty(len(d) + 1)
        out[1:-1] = 0.5 * (d[:-1] + d[1:])
        out[0] = 0.5 * d[0]
        out[-1] = 0.5 * d[-1]
        return out

    def centers(self, axis: int) -> np.ndarray:
        l = self.lines[axis]
        return 0.5 * (l[:-1] + l[1:])

    def node_index(self, axis: int, coord: float) -> int:
        l = self.lines[axis]
        i = int(np.argmin(np.abs(l - coord)))
        if abs(l[i] - coord) > _SNAP_TOL + 1e-9 * abs(coord):
            raise GridError(f"coordinate {coord} is not on a {AXES[axis]} grid line")
        return i

    def interior_slice(self, axis: int) -> slice:
        n = len(self.lines[axis]) - 1
        return slice(self.npml, n - self.npml)

    def stats(self) -> dict:
        d = [self.spacing(a) for a in range(3)]
        return {
            "nx": self.shape[0], "ny": self.shape[1], "nz": self.shape[2],
            "cells": self.n_cells, "npml": self.npml,
            "dx_min": float(d[0].min()), "dx_max": float(d[0].max()),
            "dy_min": float(d[1].min()), "dy_max": float(d[1].max()),
            "dz_min": float(d[2].min()), "dz_max": float(d[2].max()),
            "max_grading": float(max(max_ratio(l) for l in self.lines)),
            "dt": courant_dt(self),
        }


def max_ratio(lines: np.ndarray) -> float:
    d = np.diff(lines)
    if len(d) < 2:
        return 1.0
    r = d[1:] / d[:-1]
    return float(np.max(np.maximum(r, 1 / r)))


def courant_dt(grid: YeeGrid, safety: float = 0.99) -> float:
    """3-D Courant limit on the smallest spacing of each axis, times ``safety``."""
    inv = sum(1.0 / float(np.min(grid.spacing(a))) ** 2 for a in range(3))
    return safety / (C0 * math.sqrt(inv))


# --- 1-D line generation ------------------------------------------------------


def _hard_points(scene: Scene, axis: int, lo: float, hi: float) -> list[float]:
    pts = [lo, hi]
    for p in scene.all_primitives():
        if p.shape is Shape.CYLINDER:
            if axis == 2:
                pts += [p.extents["z_min"], p.extents["z_max"]]
            continue
        pts += [p.extents["min"][axis], p.extents["max"][axis]]
    for port in scene.ports:
        pts += [port.start[axis], port.end[axis]]
    pts = sorted(v for v in pts if lo - _SNAP_TOL <= v <= hi + _SNAP_TOL)
    merged = [pts[0]]
    for v in pts[1:]:
        if v - merged[-1] > _SNAP_TOL:
            merged.append(v)
    merged[0], merged[-1] = lo, hi
    return merged


def _edge_points(scene: Scene, axis: int) -> list[float]:
    """Coordinates where a sheet or port ends along ``axis`` (field singularities)."""
    pts = []
    for p in scene.all_primitives():
        if p.shape is Shape.SHEET:
            pts += [p.extents["min"][axis], p.extents["max"][axis]]
    return pts


def _port_spans(scene: Scene, axis: int) -> list[tuple[float, float]]:
    return [tuple(sorted((p.start[axis], p.end[axis]))) for p in scene.ports if p.axis == axis]


def _refractive_index(mat: Material) -> float:
    if mat.kind in (MaterialKind.PEC, MaterialKind.CONDUCTOR):
        return 1.0
    return max(math.sqrt(mat.eps_r(t) * mat.mu_r) for t in TemperatureClass)


def _interval_specs(scene: Scene, axis: int, pts: list[float], f_max: float, resolution: float,
                    min_layer_cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Max spacing and minimum cell count for each interval between hard points."""
    lib = scene.library()
    bg = lib[scene.background]
    n_bg = _refractive_index(bg)
    solids = [p for p in scene.all_primitives() if p.shape is not Shape.SHEET]
    hmax = np.empty(len(pts) - 1)
    ncell = np.ones(len(pts) - 1, dtype=int)
    for i, (a, b) in enumerate(zip(pts[:-1], pts[1:])):
        n = n_bg
        for p in solids:
            plo, phi = p.bbox()
            if plo[axis] < b - _SNAP_TOL and phi[axis] > a + _SNAP_TOL:
                mat = lib[p.material]
                n = max(n, _refractive_index(mat))
                # a thin layer bounded by this very interval gets min_layer_cells
                if (mat.name != bg.name and mat.kind is MaterialKind.DIELECTRIC
                        and abs(plo[axis] - a) <= _SNAP_TOL and abs(phi[axis] - b) <= _SNAP_TOL):
                    ncell[i] = max(ncell[i], min_layer_cells)
        hmax[i] = C0 / (f_max * n) / resolution
    return hmax, ncell


def _fill_lines(pts: list[float], hmax: np.ndarray, ncell: np.ndarray, growth: float,
                edge_h: np.ndarray | None = None, locked: np.ndarray | None = None) -> np.ndarray:
    pts_a = np.asarray(pts)
    lengths = np.diff(pts_a)
    h = np.minimum(hmax, lengths / ncell)
    # spacing target at each hard point, then linear growth away from it
    s_pt = np.empty(len(pts_a))
    s_pt[0] = min(h[0], lengths[0])
    s_pt[-1] = min(h[-1], lengths[-1])
    s_pt[1:-1] = np.minimum.reduce([h[:-1], h[1:], lengths[:-1], lengths[1:]])
    if edge_h is not None:
        s_pt = np.minimum(s_pt, edge_h)
    lines = [pts_a[0]]
    for i in range(len(lengths)):
        a, b = pts_a[i], pts_a[i + 1]
        if locked is not None and locked[i]:
            lines.append(b)
            continue
        xs = a + (b - a) * _UNIT_SAMPLES
        s = np.full_like(xs, h[i])
        for k in range(len(pts_a)):
            s = np.minimum(s, s_pt[k] + growth * np.abs(xs - pts_a[k]))
        dens = 1.0 / s
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(xs))])
        n = max(int(ncell[i]), int(math.ceil(cum[-1] - 0.05)))
        targets = np.linspace(0.0, cum[-1], n + 1)[1:-1]
        inner = np.interp(targets, cum, xs)
        lines.extend(inner.tolist())
        lines.append(b)
    return np.asarray(lines)


def _repair_grading(lines: np.ndarray, limit: float = MAX_GRADING) -> np.ndarray:
    lines = np.asarray(lines, dtype=float)
    for _ in range(200):
        d = np.diff(lines)
        if len(d) < 2:
            return lines
        r = d[1:] / d[:-1]
        bad_right = np.nonzero(r > limit)[0] + 1  # cell i+1 too large
        bad_left = np.nonzero(r < 1 / limit)[0]  # cell i too large
        bad = np.union1d(bad_right, bad_left)
        if len(bad) == 0:
            return lines
        mids = 0.5 * (lines[bad] + lines[bad + 1])
        lines = np.sort(np.concatenate([lines, mids]))
    raise GridError("grading repair did not converge")


def axis_lines(scene: Scene, axis: int, f_max: float, resolution: float,
               min_layer_cells: int = 2, edge_refinement: float = 1.0) -> np.ndarray:
    """Grid lines along one axis.

    Spacing at sheet and port ends is capped at the local maximum divided by
    ``edge_refinement``: a staircased conductor end acts about one cell
    longer than drawn, so fine cells there keep the electrical length honest.
    """
    if edge_refinement < 1:
        raise GridError("edge_refinement must be >= 1")
    b = scene.domain_bounds()
    lo, hi = b[2 * axis], b[2 * axis + 1]
    pts = _hard_points(scene, axis, lo, hi)
    hmax, ncell = _interval_specs(scene, axis, pts, f_max, resolution, min_layer_cells)
    pa = np.asarray(pts)
    # a port spans exactly one edge: its interval is never split and its ends are not refined below it
    locked = np.zeros(len(pts) - 1, dtype=bool)
    floor = np.zeros(len(pts))
    for a, b in _port_spans(scene, axis):
        i = int(np.argmin(np.abs(pa - a)))
        if i + 1 < len(pa) and abs(pa[i + 1] - b) <= _SNAP_TOL:
            locked[i] = True
            floor[i:i + 2] = np.maximum(floor[i:i + 2], (b - a) / (MAX_GRADING - 0.1))
    edge_h = None
    if edge_refinement > 1:
        edges = _edge_points(scene, axis)
        near = np.concatenate([[hmax[0]], np.minimum(hmax[:-1], hmax[1:]), [hmax[-1]]])
        fine = np.array([any(abs(v - e) <= _SNAP_TOL for e in edges) for v in pts])
        edge_h = np.where(fine, np.maximum(near / edge_refinement, floor), np.inf)
    return _repair_grading(_fill_lines(pts, hmax, ncell, _GROWTH, edge_h, locked))


def _add_pml(lines: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return lines
    d0 = lines[1] - lines[0]
    d1 = lines[-1] - lines[-2]
    low = lines[0] - d0 * np.arange(n, 0, -1)
    high = lines[-1] + d1 * np.arange(1, n + 1)
    return np.concatenate([low, lines, high])


def generate(scene: Scene, resolution: float = 15, f_max: float = 32e9,
             min_layer_cells: int = 2, budget: float | None = None,
             edge_refinement: float = DEFAULT_EDGE_REFINEMENT) -> YeeGrid:
    """Mesh a scene at ``resolution`` cells per wavelength at ``f_max``.

    Every interface and port end lies on a grid line; spacing never exceeds the
    local wavelength / resolution; adjacent cells differ by at most 1.5x.
    """
    if resolution < 10:
        raise GridError("resolution must be >= 10 cells per wavelength")
    budget = cell_budget() if budget is None else budget
    npml = scene.boundary.thickness if scene.boundary.kind == "cpml" else 0
    lines = []
    for a in range(3):
        l = axis_lines(scene, a, f_max, resolution, min_layer_cells, edge_refinement)
        lines.append(_add_pml(l, npml))
    count = float(np.prod([len(l) - 1 for l in lines]))
    if count > budget:
        raise CellBudgetError(count, budget, "lower the resolution or use a scaled-down preset "
                              "(set FIELDFORGE_CELL_BUDGET to override)")
    grid = YeeGrid(lines[0], lines[1], lines[2], npml, scene.domain_bounds(), f_max, resolution)
    grid.port_edges = [resolve_port(grid, p) for p in scene.ports]
    return grid


def resolve_port(grid: YeeGrid, port: Port) -> PortEdge:
    a = port.axis
    idx = [grid.node_index(i, port.start[i]) for i in range(3)]
    i0 = grid.node_index(a, port.start[a])
    i1 = grid.node_index(a, port.end[a])
    if abs(i1 - i0) != 1:
        raise GridError(f"port {port.id} spans {abs(i1 - i0)} grid edges; it must span exactly one")
    idx[a] = min(i0, i1)
    length = float(grid.spacing(a)[idx[a]])
    u, v = [i for i in range(3) if i != a]
    area = float(grid.dual_spacing(u)[idx[u]] * grid.dual_spacing(v)[idx[v]])
    return PortEdge(port, a, tuple(idx), length, area, port.direction)


# --- materials ---------------------------------------------------------------


@dataclass
class SheetEdges:
    """Resistive-sheet edges of one E component."""

    component: int
    index: tuple[np.ndarray, np.ndarray, np.ndarray]
    rs: np.ndarray  # ohm per square at the reference frequency
    length: np.ndarray  # edge length
    width: np.ndarray  # in-sheet dual width
    normal_dual: np.ndarray  # dual spacing across the sheet


@dataclass
class MaterialArrays:
    """Per-edge relative permittivity, conductivity and PEC flags."""

    eps_r: list[np.ndarray]
    sigma: list[np.ndarray]
    pec: list[np.ndarray]
    sheets: list[SheetEdges]
    temperature: TemperatureClass
    rs_frequency: float
    cell_material: np.ndarray
    material_names: list[str]


def _edge_shapes(grid: YeeGrid):
    nx, ny, nz = grid.shape
    return [(nx, ny + 1, nz + 1), (nx + 1, ny, nz + 1), (nx + 1, ny + 1, nz)]


def rasterize(scene: Scene, grid: YeeGrid) -> tuple[np.ndarray, list[str]]:
    """Material index per cell from cell-centre membership, priority ordered."""
    lib = scene.library()
    names = [scene.background]
    cells = np.zeros(grid.shape, dtype=np.int16)
    xc, yc, zc = (grid.centers(a) for a in range(3))
    prims = [p for p in scene.all_primitives() if p.shape is not Shape.SHEET]
    order = sorted(range(len(prims)), key=lambda i: (prims[i].priority, i))
    for i in order:
        p = prims[i]
        if p.material not in lib:
            raise SceneError(f"unresolved material {p.material!r}")
        if p.material not in names:
            names.append(p.material)
        code = names.index(p.material)
        if p.shape is Shape.BOX:
            lo, hi = p.extents["min"], p.extents["max"]
            mx = (xc > lo[0]) & (xc < hi[0])
            my = (yc > lo[1]) & (yc < hi[1])
            mz = (zc > lo[2]) & (zc < hi[2])
            cells[np.ix_(mx, my, mz)] = code
        else:
            e = p.extents
            cx, cy = e["center"]
            r = np.hypot(xc[:, None] - cx, yc[None, :] - cy)
            if e.get("invert"):
                m2 = r > e["radius"]
            elif e.get("shell"):
                m2 = (r > e["radius"]) & (r < e["radius"] + e["shell"])
            else:
                m2 = r < e["radius"]
            mz = (zc > e["z_min"]) & (zc < e["z_max"])
            sub = cells[:, :, mz]
            sub[m2] = code
            cells[:, :, mz] = sub
    return cells, names


def _average_to_edges(cell_val: np.ndarray, grid: YeeGrid, axis: int, reduce: str = "mean") -> np.ndarray:
    """Area-weighted average of cell values onto edges along ``axis``."""
    u, v = [i for i in range(3) if i != axis]
    du, dv = grid.spacing(u), grid.spacing(v)
    # move axis order to (axis, u, v)
    c = np.moveaxis(cell_val, (axis, u, v), (0, 1, 2)).astype(float)
    n0, nu, nv = c.shape
    pad = np.zeros((n0, nu + 2, nv + 2))
    pad[:, 1:-1, 1:-1] = c
    wu = np.concatenate([[0.0], du, [0.0]])
    wv = np.concatenate([[0.0], dv, [0.0]])
    acc = np.zeros((n0, nu + 1, nv + 1))
    wsum = np.zeros((nu + 1, nv + 1))
    for su in (0, 1):
        for sv in (0, 1):
            w = np.outer(wu[su:su + nu + 1], wv[sv:sv + nv + 1])
            blk = pad[:, su:su + nu + 1, sv:sv + nv + 1]
            if reduce == "max":
                acc = np.maximum(acc, blk * (w > 0))
            else:
                acc += blk * w
                wsum += w
    if reduce != "max":
        acc /= wsum
    return np.moveaxis(acc, (0, 1, 2), (axis, u, v))


def assign_materials(scene: Scene, grid: YeeGrid, temperature="cryo",
                     rs_frequency: float = 28e9) -> MaterialArrays:
    """Per-edge eps_r, sigma and PEC flags for one temperature class.

    Edges average the cells sharing them, weighted by their share of the dual
    face; any adjacent PEC (or conductor) cell makes the edge PEC.  Sheets add
    a conductivity ``1 / (Rs * dual_normal)`` with ``Rs`` at ``rs_frequency``.
    """
    temp = TemperatureClass.parse(temperature)
    lib = scene.library()
    cells, names = rasterize(scene, grid)
    mats = [lib[n] for n in names]
    eps_c = np.array([m.eps_r(temp) for m in mats])[cells]
    sig_c = np.array([0.0 if m.kind in (MaterialKind.PEC, MaterialKind.CONDUCTOR) else m.sigma(temp)
                      for m in mats])[cells]
    pec_c = np.array([m.kind in (MaterialKind.PEC, MaterialKind.CONDUCTOR) for m in mats])[cells]
    eps, sig, pec = [], [], []
    for a in range(3):
        eps.append(_average_to_edges(eps_c, grid, a))
        sig.append(_average_to_edges(sig_c, grid, a))
        pec.append(_average_to_edges(pec_c.astype(float), grid, a, reduce="max") > 0)
    # PEC cells also carry eps 1 in the average; irrelevant since those edges are forced to zero
    sheets: list[SheetEdges] = []
    prims = list(scene.primitives)
    order = sorted(range(len(prims)), key=lambda i: (prims[i].priority, i))
    sheet_masks: dict[int, np.ndarray] = {}
    sheet_rs: dict[int, np.ndarray] = {}
    shapes = _edge_shapes(grid)
    for i in order:
        p = prims[i]
        if p.shape is not Shape.SHEET:
            continue
        mat = lib[p.material]
        n = p.normal_axis
        kn = grid.node_index(n, p.extents["position"])
        for comp in (c for c in range(3) if c != n):
            other = 3 - n - comp
            sl = [None, None, None]
            sl[n] = slice(kn, kn + 1)
            c0 = grid.node_index(comp, p.extents["min"][comp])
            c1 = grid.node_index(comp, p.extents["max"][comp])
            o0 = grid.node_index(other, p.extents["min"][other])
            o1 = grid.node_index(other, p.extents["max"][other])
            sl[comp] = slice(c0, c1)
            sl[other] = slice(o0, o1 + 1)
            sl = tuple(sl)
            if mat.kind is MaterialKind.PEC:
                pec[comp][sl] = True
                if comp in sheet_masks:
                    sheet_masks[comp][sl] = False
                continue
            if mat.kind is not MaterialKind.CONDUCTOR:
                raise SceneError(f"sheet {p.label} must be a conductor or PEC")
            rs = surface_resistance(mat.sigma(temp), mat.mu_r, rs_frequency)
            mask = sheet_masks.setdefault(comp, np.zeros(shapes[comp], dtype=bool))
            rsa = sheet_rs.setdefault(comp, np.zeros(shapes[comp]))
            mask[sl] = True
            rsa[sl] = rs
    for comp, mask in sorted(sheet_masks.items()):
        mask &= ~pec[comp]
        idx = np.nonzero(mask)
        if len(idx[0]) == 0:
            continue
        # normal axis of each sheet edge: the one where the sheet lies; recover from geometry
        rs = sheet_rs[comp][idx]
        length = grid.spacing(comp)[idx[comp]]
        # sheets normal to either remaining axis can share a component; handle both
        normal = np.empty(len(rs), dtype=int)
        width = np.empty(len(rs))
        ndual = np.empty(len(rs))
        for i in order:
            p = prims[i]
            if p.shape is not Shape.SHEET or p.normal_axis == comp:
                continue
            n = p.normal_axis
            other = 3 - n - comp
            kn = grid.node_index(n, p.extents["position"])
            on = idx[n] == kn
            normal[on] = n
            width[on] = grid.dual_spacing(other)[idx[other][on]]
            ndual[on] = grid.dual_spacing(n)[kn]
        sig[comp][idx] += 1.0 / (rs * ndual)
        sheets.append(SheetEdges(comp, idx, rs, length, width, ndual))
    for pe in grid.port_edges:
        if pec[pe.axis][pe.index]:
            raise SceneError(f"port {pe.port.id} lies on a PEC edge")
        if any(s.component == pe.axis and np.any((s.index[0] == pe.index[0]) & (s.index[1] == pe.index[1])
                                                 & (s.index[2] == pe.index[2])) for s in sheets):
            raise SceneError(f"port {pe.port.id} lies on a conductor sheet")
    return MaterialArrays(eps, sig, pec, sheets, temp, rs_frequency, cells, names)


def cell_volumes(grid: YeeGrid) -> np.ndarray:
    dx, dy, dz = (grid.spacing(a) for a in range(3))
    return dx[:, None, None] * dy[None, :, None] * dz[None, None, :]


def stats_csv_rows(grid: YeeGrid) -> list[tuple[str, float]]:
    return sorted(grid.stats().items())
