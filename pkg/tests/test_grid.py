import math

import numpy as np
import pytest

from fieldforge import grid as G, presets
from fieldforge.constants import C0
from fieldforge.scene import Port, Primitive, Scene, Shape


@pytest.fixture(scope="module")
def onchip():
    sc = presets.preset_onchip_dipole()
    return sc, G.generate(sc, resolution=15, f_max=32e9)


def test_interfaces_and_ports_on_lines(onchip):
    sc, g = onchip
    for z in sc.stack.interfaces():
        g.node_index(2, z)
    for p in sc.ports:
        for a in range(3):
            g.node_index(a, p.start[a])
            g.node_index(a, p.end[a])
    for p in sc.primitives:
        for a in (0, 1):
            g.node_index(a, p.extents["min"][a])
            g.node_index(a, p.extents["max"][a])


def test_grading_and_resolution(onchip):
    sc, g = onchip
    assert g.stats()["max_grading"] <= G.MAX_GRADING + 1e-9
    lam_min = C0 / 32e9 / math.sqrt(11.75)
    for a in range(3):
        d = g.spacing(a)[g.interior_slice(a)]
        assert d.max() <= C0 / 32e9 / 15 * (1 + 1e-9)
    # inside the substrate the spacing honours the dielectric wavelength
    z = g.lines[2]
    zs = sc.stack.interfaces()
    inside = (z[:-1] >= zs[0] - 1e-12) & (z[1:] <= zs[1] + 1e-12)
    assert np.diff(z)[inside].max() <= lam_min / 15 * (1 + 1e-9)


def test_thin_oxide_gets_two_cells(onchip):
    sc, g = onchip
    zs = sc.stack.interfaces()
    k0, k1 = g.node_index(2, zs[1]), g.node_index(2, zs[2])
    assert k1 - k0 >= 2


def test_port_edges_span_one_cell(onchip):
    sc, g = onchip
    assert len(g.port_edges) == 2
    for pe in g.port_edges:
        assert pe.axis == 0 and pe.length > 0 and pe.dual_area > 0


def test_cpml_cells_uniform(onchip):
    _, g = onchip
    for a in range(3):
        d = g.spacing(a)
        assert np.allclose(d[: g.npml], d[g.npml])
        assert np.allclose(d[-g.npml:], d[-g.npml - 1])


def test_courant_dt(onchip):
    _, g = onchip
    dt = G.courant_dt(g)
    inv = sum(1 / g.spacing(a).min() ** 2 for a in range(3))
    assert dt == pytest.approx(0.99 / (C0 * math.sqrt(inv)))


def test_cell_budget_refusal():
    sc = presets.preset_cryostat()
    with pytest.raises(G.CellBudgetError) as exc:
        G.generate(sc, resolution=15, f_max=32e9)
    assert "scaled" in str(exc.value)


def test_cell_budget_env(monkeypatch):
    monkeypatch.setenv("FIELDFORGE_CELL_BUDGET", "1000")
    with pytest.raises(G.CellBudgetError):
        G.generate(presets.preset_onchip_dipole())


def test_low_resolution_rejected():
    with pytest.raises(G.GridError):
        G.generate(presets.preset_onchip_dipole(), resolution=5)


def test_materials_cryo_vs_room(onchip):
    sc, g = onchip
    cryo = G.assign_materials(sc, g, "cryo")
    room = G.assign_materials(sc, g, "room")
    assert cryo.eps_r[2].max() == pytest.approx(11.45)
    assert room.eps_r[2].max() == pytest.approx(11.75)
    assert room.sigma[2].max() > cryo.sigma[2].max()
    # arm sheets are resistive, lower Rs when cold
    assert sum(len(s.rs) for s in cryo.sheets) > 0
    assert cryo.sheets[0].rs.max() < room.sheets[0].rs.max()


def test_edge_average_at_interface():
    # two half-spaces eps 1 / 11.45 split at z = 0: tangential edges on the interface see the mean
    sc = Scene(primitives=(Primitive(Shape.BOX, {"min": (-1e-3, -1e-3, -1e-3), "max": (1e-3, 1e-3, 0.0)}, "Si"),),
               ports=(Port(1, (0, 0, 0.5e-3), (0, 0, 0.6e-3)),), domain=(-1e-3, 1e-3, -1e-3, 1e-3, -1e-3, 1e-3),
               boundary=__import__("fieldforge.scene", fromlist=["Boundary"]).Boundary("pec", 0))
    g = G.generate(sc, resolution=10, f_max=30e9)
    m = G.assign_materials(sc, g, "cryo")
    k = g.node_index(2, 0.0)
    dz = g.spacing(2)
    w = dz[k - 1] / (dz[k - 1] + dz[k])
    ex = m.eps_r[0][g.shape[0] // 2, g.shape[1] // 2, k]
    assert ex == pytest.approx(11.45 * w + 1.0 * (1 - w))
    # normal edges keep the bulk values
    assert m.eps_r[2][g.shape[0] // 2, g.shape[1] // 2, k - 1] == pytest.approx(11.45)
    assert m.eps_r[2][g.shape[0] // 2, g.shape[1] // 2, k] == pytest.approx(1.0)


def test_port_on_pec_rejected():
    sc = Scene(primitives=(Primitive(Shape.BOX, {"min": (-1e-3, -1e-3, -1e-3), "max": (1e-3, 1e-3, 1e-3)}, "PEC"),),
               ports=(Port(1, (0, 0, 0), (0, 0, 1e-4)),), domain_padding=1e-3)
    g = G.generate(sc, resolution=10, f_max=30e9)
    with pytest.raises(Exception, match="PEC"):
        G.assign_materials(sc, g)


def test_stats_rows_sorted(onchip):
    _, g = onchip
    rows = G.stats_csv_rows(g)
    assert [r[0] for r in rows] == sorted(r[0] for r in rows)


def test_edge_refinement_caps_spacing_at_sheet_ends():
    L = C0 / 28e9 / 2
    sc = presets.free_space_dipole(L, width=2e-4, gap=2e-4)
    coarse = G.generate(sc, resolution=15, f_max=34e9, edge_refinement=1)
    fine = G.generate(sc, resolution=15, f_max=34e9, edge_refinement=8)
    hmax = C0 / 34e9 / 15
    i = fine.node_index(0, L / 2)
    # the fill spreads cells evenly, so the end cell lands within 10 % of the target
    assert fine.spacing(0)[i] <= hmax / 8 * 1.1
    assert coarse.spacing(0)[coarse.node_index(0, L / 2)] > hmax / 4
    # the sheet plane is refined along its normal too
    k = fine.node_index(2, 0.0)
    assert fine.spacing(2)[k] <= hmax / 8 * 1.1
    assert fine.stats()["max_grading"] <= G.MAX_GRADING + 1e-9


def test_edge_refinement_keeps_port_on_one_edge():
    L = C0 / 28e9 / 2
    sc = presets.free_space_dipole(L, width=2e-5, gap=4e-5)
    g = G.generate(sc, resolution=15, f_max=34e9, edge_refinement=64)
    (pe,) = g.port_edges
    assert pe.length == pytest.approx(4e-5)
    assert g.stats()["max_grading"] <= G.MAX_GRADING + 1e-9


def test_edge_refinement_below_one_rejected():
    with pytest.raises(G.GridError):
        G.axis_lines(presets.free_space_dipole(5e-3), 0, 34e9, 15, edge_refinement=0.5)
