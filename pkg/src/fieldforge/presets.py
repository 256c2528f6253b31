"""The two built-in scenes: the on-chip differential dipole and the cryostat."""

from __future__ import annotations

import math
from dataclasses import replace

from .materials import TemperatureClass
from .scene import Boundary, Layer, Port, Primitive, Scene, SceneError, Shape, Stack

M7_THICKNESS = 3.5e-6
SIO2_THICKNESS = 3.823e-6
L_OPT = 2.8e-3
S_OPT = 3.0e-5
SI_OPT = 3.0e-4
L_CRYOSTAT = 3.06e-3
CHIP_LENGTH = 3.72e-3


def preset_onchip_dipole(temp="cryo", si_thickness: float = SI_OPT, L: float = L_OPT,
                         gap: float = S_OPT, arm_width: float = 5.0e-5,
                         chip_length: float | None = None, chip_width: float = 1.5e-3,
                         padding: float = 2.5e-3, port_resistance: float = 50.0,
                         pad_side: float | None = None, cpml_cells: int = 8) -> Scene:
    """Copper dipole on SiO2 on Si, fed by a differential port pair in the gap.

    The two arms are zero-thickness Cu sheets on top of the oxide (the M7
    metal's 3.5 um thickness is carried in ``meta`` only).  Each port
    spans half the gap, from the centre node to one arm; the pair is driven
    with opposite polarity.  ``pad_side`` adds the four floating GSSG pads
    (side length ``pad_side``) beside the feed.
    """
    if not 1e-4 <= si_thickness <= 5e-4:
        raise SceneError(f"Si thickness {si_thickness} outside [0.1, 0.5] mm")
    if not 1e-3 <= L <= 5e-3:
        raise SceneError(f"dipole length {L} outside [1, 5] mm")
    if not 0 < gap < L / 2:
        raise SceneError("gap must be positive and shorter than an arm")
    chip_length = max(CHIP_LENGTH, L + 0.4e-3) if chip_length is None else chip_length
    if chip_length < L:
        raise SceneError("dipole does not fit on the chip")
    temp = TemperatureClass.parse(temp)
    stack = Stack(
        (Layer("Si", si_thickness, "substrate"),
         Layer("SiO2", SIO2_THICKNESS, "oxide")),
        (-chip_length / 2, chip_length / 2, -chip_width / 2, chip_width / 2),
        0.0,
    )
    zs = si_thickness + SIO2_THICKNESS
    hw = arm_width / 2

    def sheet(x0, x1, y0, y1, name):
        return Primitive(Shape.SHEET, {"normal": "z", "position": zs, "min": (x0, y0, zs),
                                       "max": (x1, y1, zs)}, "Cu", 0, name)

    prims = [sheet(-L / 2, -gap / 2, -hw, hw, "arm-left"), sheet(gap / 2, L / 2, -hw, hw, "arm-right")]
    if pad_side:
        s = pad_side
        y0 = hw + 2 * s
        for k, xc in enumerate((-1.5 * s - gap, -gap / 2 - s / 2, gap / 2 + s / 2, 1.5 * s + gap)):
            prims.append(sheet(xc - s / 2, xc + s / 2, -y0 - s, -y0, f"gssg-pad-{k}"))
    ports = (
        Port(1, (0.0, 0.0, zs), (-gap / 2, 0.0, zs), +1, port_resistance),
        Port(2, (0.0, 0.0, zs), (gap / 2, 0.0, zs), -1, port_resistance),
    )
    return Scene(
        name="onchip-dipole",
        stack=stack,
        primitives=tuple(prims),
        ports=ports,
        boundary=Boundary("cpml", cpml_cells),
        domain_padding=padding,
        meta={"differential_pairs": [[1, 2]], "temperature": temp.value, "f_design": 28e9,
              "dipole_length": L, "gap": gap, "metal_thickness": M7_THICKNESS, "si_thickness": si_thickness, "arm_width": arm_width},
    )


def translate(scene: Scene, dx: float, dy: float, dz: float) -> Scene:
    """Shift every coordinate of a scene (its explicit domain is dropped)."""
    def mv(p):
        return (p[0] + dx, p[1] + dy, p[2] + dz)

    prims = []
    for p in scene.primitives:
        e = dict(p.extents)
        if p.shape is Shape.CYLINDER:
            e["center"] = (e["center"][0] + dx, e["center"][1] + dy)
            e["z_min"] += dz
            e["z_max"] += dz
        else:
            e["min"], e["max"] = mv(e["min"]), mv(e["max"])
            if p.shape is Shape.SHEET:
                e["position"] += (dx, dy, dz)[p.normal_axis]
        prims.append(replace(p, extents=e))
    stack = None
    if scene.stack:
        x0, x1, y0, y1 = scene.stack.footprint
        stack = Stack(scene.stack.layers, (x0 + dx, x1 + dx, y0 + dy, y1 + dy), scene.stack.z0 + dz)
    ports = [replace(p, start=mv(p.start), end=mv(p.end)) for p in scene.ports]
    return replace(scene, stack=stack, primitives=tuple(prims), ports=tuple(ports), domain=None)


def preset_cryostat(level_spacing_low: float = 0.10, level_spacing_high: float = 0.15,
                    diameter: float = 0.30, height: float = 0.70, bottom_plate: float = 0.20,
                    chip_gap: float = 0.06, scale: float = 1.0, temp="cryo",
                    chip: Scene | None = None, plate_material: str = "Cu") -> Scene:
    """Cylindrical enclosure with three cooling plates and the dipole chip.

    Plates sit at ``bottom_plate``, ``+level_spacing_low`` and
    ``+level_spacing_low + level_spacing_high`` above the floor; the chip rests
    ``chip_gap`` above the middle plate.  ``scale`` shrinks the enclosure (not
    the chip) for desk-scale FDTD; the full-size enclosure is refused by the
    grid's cell budget.
    """
    if not (level_spacing_low > 0 and level_spacing_high > 0):
        raise SceneError("plate spacings must be positive")
    if bottom_plate + level_spacing_low + level_spacing_high >= height:
        raise SceneError("plates do not fit below the cryostat lid")
    if not 0 < scale <= 1:
        raise SceneError("scale must be in (0, 1]")
    r = diameter / 2 * scale
    h = height * scale
    plates = [bottom_plate * scale, (bottom_plate + level_spacing_low) * scale,
              (bottom_plate + level_spacing_low + level_spacing_high) * scale]
    prims = [Primitive(Shape.CYLINDER, {"center": (0.0, 0.0), "radius": r, "z_min": 0.0, "z_max": h,
                                        "invert": True}, plate_material, 10, "shell")]
    for k, zp in enumerate(plates):
        prims.append(Primitive(Shape.SHEET, {"normal": "z", "position": zp, "min": (-r, -r, zp),
                                             "max": (r, r, zp)}, plate_material, 5, f"plate-{k}"))
    chip = preset_onchip_dipole(temp) if chip is None else chip
    zchip = plates[1] + chip_gap * scale
    if zchip + 1e-3 >= plates[2]:
        raise SceneError("chip does not fit between the plates")
    placed = translate(chip, 0.0, 0.0, zchip)
    return Scene(
        name="cryostat" if scale == 1 else f"cryostat-scaled-{scale:g}",
        stack=placed.stack,
        primitives=tuple(prims) + placed.primitives,
        ports=placed.ports,
        boundary=Boundary("pec", 0),
        domain=(-r, r, -r, r, 0.0, h),
        meta={"differential_pairs": [[1, 2]], "temperature": TemperatureClass.parse(temp).value,
              "radius": r, "height": h, "plates": plates,
              "sections": [[r, level_spacing_low * scale], [r, level_spacing_high * scale]],
              "chip_z": zchip, "scale": scale},
    )


def scaled_down(factor: float = 10.0, **kw) -> Scene:
    return preset_cryostat(scale=1.0 / factor, **kw)


def free_space_dipole(L: float, width: float = 2.0e-4, gap: float = 2.0e-4, padding: float = 3.0e-3,
                      material: str = "PEC", port_resistance: float = 50.0, cpml_cells: int = 8) -> Scene:
    """Centre-fed strip dipole along x in vacuum, one port across the gap.

    A flat strip of width ``w`` behaves like a round wire of radius ``w / 4``.
    """
    if not 0 < gap < L / 2:
        raise SceneError("gap must be positive and shorter than an arm")
    if not width > 0:
        raise SceneError("strip width must be positive")
    hw = width / 2

    def arm(x0, x1, name):
        return Primitive(Shape.SHEET, {"normal": "z", "position": 0.0, "min": (x0, -hw, 0.0),
                                       "max": (x1, hw, 0.0)}, material, 0, name)

    return Scene(
        name="free-space-dipole",
        primitives=(arm(-L / 2, -gap / 2, "arm-left"), arm(gap / 2, L / 2, "arm-right")),
        ports=(Port(1, (-gap / 2, 0.0, 0.0), (gap / 2, 0.0, 0.0), +1, port_resistance),),
        boundary=Boundary("cpml", cpml_cells),
        domain_padding=padding,
        meta={"dipole_length": L, "strip_width": width, "equivalent_radius": width / 4, "gap": gap},
    )
