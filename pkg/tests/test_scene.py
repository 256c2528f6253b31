import json

import pytest
from hypothesis import given, strategies as st

from fieldforge import presets
from fieldforge.scene import (Boundary, Layer, Port, Primitive, Scene, SceneError, Shape, check, load_scene,
                              save_scene, validate)


def _box(lo, hi, mat="PEC", prio=0):
    return Primitive(Shape.BOX, {"min": lo, "max": hi}, mat, prio)


def _sheet(lo, hi, z, mat="Cu", prio=0):
    return Primitive(Shape.SHEET, {"normal": "z", "position": z, "min": lo, "max": hi}, mat, prio)


def _port(i=1, pol=1):
    return Port(i, (0, 0, 0), (1e-3, 0, 0), pol)


def test_onchip_preset_is_valid():
    sc = presets.preset_onchip_dipole()
    assert check(sc) is sc
    assert [l.material for l in sc.layers] == ["Si", "SiO2"]
    assert sc.stack.interfaces()[-1] == pytest.approx(3.0e-4 + 3.823e-6)


def test_json_roundtrip_all_units(tmp_path):
    sc = presets.preset_onchip_dipole(pad_side=1e-4)
    for units in ("m", "mm", "um"):
        path = tmp_path / f"s-{units}.json"
        save_scene(sc, path, units)
        back = load_scene(path)
        assert back.content_hash() == pytest.approx(back.content_hash())
        for a, b in zip(back.primitives, sc.primitives):
            for k in ("min", "max"):
                assert a.extents[k] == pytest.approx(b.extents[k], rel=1e-12, abs=1e-18)
        assert len(back.ports) == 2


def test_hash_is_deterministic_and_content_sensitive():
    a = presets.preset_onchip_dipole()
    b = presets.preset_onchip_dipole()
    c = presets.preset_onchip_dipole(si_thickness=2.5e-4)
    assert a.content_hash() == b.content_hash() != c.content_hash()


def test_schema_version_enforced():
    d = presets.preset_onchip_dipole().to_dict()
    d["schema"] = 2
    with pytest.raises(SceneError, match="schema"):
        Scene.from_dict(d)


def test_unknown_units():
    d = presets.preset_onchip_dipole().to_dict()
    d["units"] = "inch"
    with pytest.raises(SceneError):
        Scene.from_dict(d)


def test_custom_material_overrides_builtin():
    d = presets.preset_onchip_dipole().to_dict()
    d["materials"] = [{"name": "Cu", "kind": "conductor", "sigma": {"room": 1e7, "cryo": 2e7}, "eps_r": 1.0}]
    sc = Scene.from_dict(json.loads(json.dumps(d)))
    assert sc.library()["Cu"].sigma("cryo") == 2e7


def test_unknown_material_diagnostic():
    sc = Scene(primitives=(_box((0, 0, 0), (1e-3, 1e-3, 1e-3), "Unobtainium"),), ports=(_port(),))
    d = validate(sc)
    assert any("Unobtainium" in str(x) and x.index == 0 for x in d)


def test_port_outside_domain():
    sc = Scene(primitives=(_box((0, 0, 0), (1e-3, 1e-3, 1e-3)),), ports=(Port(1, (5e-3, 0, 0), (6e-3, 0, 0)),),
               domain=(0, 1e-3, 0, 1e-3, 0, 1e-3))
    with pytest.raises(SceneError, match="outside"):
        check(sc)


def test_no_active_port():
    sc = Scene(primitives=(_box((0, 0, 0), (1e-3, 1e-3, 1e-3)),),
               ports=(Port(1, (0, 0, 0), (1e-3, 0, 0), role="passive"),))
    with pytest.raises(SceneError, match="active"):
        check(sc)


def test_dielectric_sheet_rejected():
    sc = Scene(primitives=(_sheet((0, 0, 0), (1e-3, 1e-3, 0), 0, "SiO2"),), ports=(_port(),))
    assert any("conductor" in str(x) for x in validate(sc))


def test_overlapping_equal_priority_sheets_warn():
    s1 = _sheet((0, 0, 0), (1e-3, 1e-3, 0), 0)
    s2 = _sheet((5e-4, 0, 0), (2e-3, 1e-3, 0), 0)
    d = validate(Scene(primitives=(s1, s2), ports=(_port(),)))
    assert [x.severity for x in d] == ["warning"]
    d = validate(Scene(primitives=(s1, _sheet((5e-4, 0, 0), (2e-3, 1e-3, 0), 0, prio=1)), ports=(_port(),)))
    assert d == []


def test_bad_differential_pair():
    sc = Scene(primitives=(_box((0, 0, 0), (1e-3, 1e-3, 1e-3)),), ports=(_port(1, 1), _port(2, 1)),
               meta={"differential_pairs": [[1, 2]]})
    with pytest.raises(SceneError, match="polarity"):
        check(sc)


@pytest.mark.parametrize("kw", [{"polarity": 2}, {"source_resistance": 0.0}])
def test_port_guards(kw):
    with pytest.raises(SceneError):
        Port(1, (0, 0, 0), (1, 0, 0), **kw)


def test_port_must_be_axis_aligned():
    with pytest.raises(SceneError):
        Port(1, (0, 0, 0), (1, 1, 0))


def test_boundary_guards():
    with pytest.raises(SceneError):
        Boundary("cpml", 4)
    with pytest.raises(SceneError):
        Boundary("mur", 8)


def test_layer_thickness_positive():
    with pytest.raises(SceneError):
        Layer("Si", 0.0)


@given(st.floats(1e-4, 5e-4))
def test_preset_thickness_in_range(t):
    sc = presets.preset_onchip_dipole(si_thickness=t)
    assert sc.layers[0].thickness == t


@pytest.mark.parametrize("t", [5e-5, 6e-4])
def test_preset_thickness_out_of_range(t):
    with pytest.raises(SceneError):
        presets.preset_onchip_dipole(si_thickness=t)


def test_cryostat_preset_places_chip_between_plates():
    sc = presets.preset_cryostat()
    z = sc.meta["chip_z"]
    assert sc.meta["plates"][1] < z < sc.meta["plates"][2]
    assert sc.boundary.kind == "pec"
    assert check(sc) is sc
