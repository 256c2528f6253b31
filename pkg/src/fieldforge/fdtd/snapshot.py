"""Planar field slices interpolated to the cell centres of the plane."""

from __future__ import annotations

import numpy as np

from ..grid import YeeGrid
from ..scene import AXES, SceneError

# staggering per component: True where the component sits on nodes along an axis
_NODAL = {
    "Ex": (False, True, True), "Ey": (True, False, True), "Ez": (True, True, False),
    "Hx": (True, False, False), "Hy": (False, True, False), "Hz": (False, False, True),
}


def _positions(grid: YeeGrid, axis: int, nodal: bool) -> np.ndarray:
    return grid.lines[axis] if nodal else grid.centers(axis)


def _to_centers(arr: np.ndarray, axis: int, nodal: bool) -> np.ndarray:
    if not nodal:
        return arr
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    return 0.5 * (arr[tuple(lo)] + arr[tuple(hi)])


def plane_slice(grid: YeeGrid, arr: np.ndarray, component: str, axis: int, position: float) -> np.ndarray:
    """Values of ``arr`` (a ``component`` array) on the plane ``axis = position``.

    The result has shape ``(lines_u - 1, lines_v - 1)`` over the two remaining
    axes in increasing order.
    """
    if component not in _NODAL:
        raise ValueError(f"unknown component {component!r}")
    lines = grid.lines[axis]
    if not lines[0] <= position <= lines[-1]:
        raise SceneError(f"plane {AXES[axis]} = {position} lies outside the grid")
    nodal = _NODAL[component]
    pos = _positions(grid, axis, nodal[axis])
    k = int(np.clip(np.searchsorted(pos, position) - 1, 0, len(pos) - 2))
    w = float(np.clip((position - pos[k]) / (pos[k + 1] - pos[k]), 0.0, 1.0))
    a0 = np.take(arr, k, axis=axis)
    a1 = np.take(arr, k + 1, axis=axis)
    plane = (1 - w) * a0 + w * a1
    u, v = [i for i in range(3) if i != axis]
    plane = _to_centers(plane, 0, nodal[u])
    return _to_centers(plane, 1, nodal[v])


def field_plane(grid: YeeGrid, state, component: str, axis: int, position: float) -> np.ndarray:
    """Instantaneous slice of a component or of ``|E|`` / ``|H|``."""
    if component in ("|E|", "|H|"):
        fam = component[1]
        tot = sum(plane_slice(grid, state.component(f"{fam}{c}"), f"{fam}{c}", axis, position) ** 2
                  for c in "xyz")
        return np.sqrt(tot)
    return plane_slice(grid, state.component(component), component, axis, position)
