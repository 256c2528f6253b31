"""Declarative geometry: layer stack, primitives, lumped ports and boundaries.

All coordinates are meters.  Scene files are JSON (``"schema": 1``) and may
declare ``"units"`` of ``"m"``, ``"mm"`` or ``"um"``; see ``docs/scene_schema.md``.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .materials import Material, MaterialKind, builtin_library

SCHEMA_VERSION = 1
UNITS = {"m": 1.0, "mm": 1e-3, "um": 1e-6}
AXES = "xyz"


class SceneError(ValueError):
    pass


class Shape(str, enum.Enum):
    BOX = "box"
    SHEET = "sheet"
    CYLINDER = "cylinder"


class PortRole(str, enum.Enum):
    ACTIVE = "active"
    PASSIVE = "passive"


@dataclass(frozen=True)
class Layer:
    material: str
    thickness: float
    name: str = ""

    def __post_init__(self):
        if not self.thickness > 0:
            raise SceneError(f"layer {self.name or self.material!r}: thickness must be > 0")


@dataclass(frozen=True)
class Primitive:
    """A box, an axis-aligned zero-thickness sheet, or a z-axis cylinder.

    ``extents`` keys by shape:

    * box: ``min``, ``max`` (3-vectors)
    * sheet: ``normal`` (axis letter), ``position``, ``min``, ``max`` (3-vectors;
      the normal coordinate is ignored and forced to ``position``)
    * cylinder: ``center`` (x, y), ``radius``, ``z_min``, ``z_max``, optional
      ``shell`` (wall thickness; the solid cylinder when absent) or
      ``invert`` (material fills everything outside the radius)
    """

    shape: Shape
    extents: Mapping
    material: str
    priority: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        ext = dict(self.extents)
        if self.shape in (Shape.BOX, Shape.SHEET):
            lo = tuple(float(v) for v in ext["min"])
            hi = tuple(float(v) for v in ext["max"])
            if len(lo) != 3 or len(hi) != 3:
                raise SceneError(f"{self.label}: min/max must be 3-vectors")
            if self.shape is Shape.SHEET:
                normal = ext.get("normal", "z")
                if normal not in AXES:
                    raise SceneError(f"{self.label}: sheets must be axis-aligned, got normal {normal!r}")
                a = AXES.index(normal)
                pos = float(ext["position"])
                lo = tuple(pos if i == a else v for i, v in enumerate(lo))
                hi = tuple(pos if i == a else v for i, v in enumerate(hi))
                ext["normal"] = normal
                ext["position"] = pos
                check = [i for i in range(3) if i != a]
            else:
                check = [0, 1, 2]
            for i in check:
                if not hi[i] > lo[i]:
                    raise SceneError(f"{self.label}: extents must be positive along {AXES[i]}")
            ext["min"], ext["max"] = lo, hi
        elif self.shape is Shape.CYLINDER:
            ext["center"] = tuple(float(v) for v in ext["center"])
            ext["radius"] = float(ext["radius"])
            ext["z_min"], ext["z_max"] = float(ext["z_min"]), float(ext["z_max"])
            if ext.get("shell") is not None:
                ext["shell"] = float(ext["shell"])
                if not ext["shell"] > 0:
                    raise SceneError(f"{self.label}: shell thickness must be positive")
            ext["invert"] = bool(ext.get("invert", False))
            if not (ext["radius"] > 0 and ext["z_max"] > ext["z_min"]):
                raise SceneError(f"{self.label}: cylinder extents must be positive")
        object.__setattr__(self, "extents", ext)

    @property
    def label(self) -> str:
        return self.name or f"{self.shape.value}:{self.material}"

    @property
    def normal_axis(self) -> int:
        return AXES.index(self.extents["normal"])

    def bbox(self) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        e = self.extents
        if self.shape is Shape.CYLINDER:
            r = e["radius"] + (e.get("shell") or 0.0)
            cx, cy = e["center"]
            return (cx - r, cy - r, e["z_min"]), (cx + r, cy + r, e["z_max"])
        return tuple(e["min"]), tuple(e["max"])


@dataclass(frozen=True)
class Port:
    """Lumped port on one straight, axis-aligned segment.

    Port voltage is ``phi(end) - phi(start)``; the active source drives
    ``polarity * v(t)``.  A differential pair shares the ``start`` node and has
    opposite polarities.
    """

    id: int
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    polarity: int = 1
    source_resistance: float = 50.0
    role: PortRole = PortRole.ACTIVE

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "end", tuple(float(v) for v in self.end))
        object.__setattr__(self, "role", PortRole(self.role))
        if self.polarity not in (1, -1):
            raise SceneError(f"port {self.id}: polarity must be +1 or -1")
        if not self.source_resistance > 0:
            raise SceneError(f"port {self.id}: source resistance must be positive")
        diff = [i for i in range(3) if self.start[i] != self.end[i]]
        if len(diff) != 1:
            raise SceneError(f"port {self.id}: segment must be axis-aligned and non-degenerate")

    @property
    def axis(self) -> int:
        return next(i for i in range(3) if self.start[i] != self.end[i])

    @property
    def direction(self) -> int:
        """+1 when ``end`` lies above ``start`` along the port axis."""
        a = self.axis
        return 1 if self.end[a] > self.start[a] else -1


@dataclass(frozen=True)
class Boundary:
    kind: str = "cpml"
    thickness: int = 8

    def __post_init__(self):
        if self.kind not in ("cpml", "pec"):
            raise SceneError(f"unknown boundary {self.kind!r}")
        if self.kind == "cpml" and self.thickness < 6:
            raise SceneError("CPML thickness must be >= 6 cells")


@dataclass(frozen=True)
class Stack:
    """Layers stacked upward from ``z0`` over a rectangular footprint."""

    layers: tuple[Layer, ...]
    footprint: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    z0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "footprint", tuple(float(v) for v in self.footprint))
        x0, x1, y0, y1 = self.footprint
        if not (x1 > x0 and y1 > y0):
            raise SceneError("stack footprint must have positive extent")

    def interfaces(self) -> list[float]:
        """z of every layer boundary, bottom first (cumulative thickness sums)."""
        zs = [self.z0]
        for layer in self.layers:
            zs.append(zs[-1] + layer.thickness)
        return zs

    @property
    def height(self) -> float:
        return math.fsum(layer.thickness for layer in self.layers)

    def as_primitives(self) -> list[Primitive]:
        x0, x1, y0, y1 = self.footprint
        zs = self.interfaces()
        return [Primitive(Shape.BOX, {"min": (x0, y0, zs[i]), "max": (x1, y1, zs[i + 1])},
                          layer.material, priority=-1, name=layer.name or layer.material)
                for i, layer in enumerate(self.layers)]


@dataclass(frozen=True)
class Scene:
    name: str = "scene"
    stack: Stack | None = None
    primitives: tuple[Primitive, ...] = ()
    ports: tuple[Port, ...] = ()
    boundary: Boundary = field(default_factory=Boundary)
    domain_padding: float = 0.0
    domain: tuple[float, ...] | None = None
    background: str = "Vacuum"
    materials: Mapping[str, Material] = field(default_factory=dict)
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        object.__setattr__(self, "ports", tuple(self.ports))
        if self.domain is not None:
            object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))

    @property
    def layers(self) -> tuple[Layer, ...]:
        return self.stack.layers if self.stack else ()

    def library(self) -> dict[str, Material]:
        lib = builtin_library()
        lib.update(self.materials)
        return lib

    def all_primitives(self) -> list[Primitive]:
        """Stack boxes (lowest priority) followed by the explicit primitives."""
        return (self.stack.as_primitives() if self.stack else []) + list(self.primitives)

    def geometry_bbox(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        los, his = [], []
        for p in self.all_primitives():
            lo, hi = p.bbox()
            los.append(lo)
            his.append(hi)
        for port in self.ports:
            los.append(tuple(min(a, b) for a, b in zip(port.start, port.end)))
            his.append(tuple(max(a, b) for a, b in zip(port.start, port.end)))
        if not los:
            raise SceneError("empty scene has no extent")
        return (tuple(min(v[i] for v in los) for i in range(3)),
                tuple(max(v[i] for v in his) for i in range(3)))

    def domain_bounds(self) -> tuple[float, float, float, float, float, float]:
        """Physical domain (without CPML) as xmin, xmax, ymin, ymax, zmin, zmax."""
        if self.domain is not None:
            return self.domain
        lo, hi = self.geometry_bbox()
        p = self.domain_padding
        return (lo[0] - p, hi[0] + p, lo[1] - p, hi[1] + p, lo[2] - p, hi[2] + p)

    def active_ports(self) -> list[Port]:
        return [p for p in self.ports if p.role is PortRole.ACTIVE]

    def with_ports(self, ports: Sequence[Port]) -> "Scene":
        return replace(self, ports=tuple(ports))

    # --- serialization -------------------------------------------------------

    def to_dict(self, units: str = "m") -> dict:
        s = 1.0 / UNITS[units]

        def v(x):
            return [float(c) * s for c in x]

        prims = []
        for p in self.primitives:
            e = p.extents
            d = {"shape": p.shape.value, "material": p.material, "priority": p.priority, "name": p.name}
            if p.shape is Shape.BOX:
                d.update(min=v(e["min"]), max=v(e["max"]))
            elif p.shape is Shape.SHEET:
                d.update(normal=e["normal"], position=e["position"] * s, min=v(e["min"]), max=v(e["max"]))
            else:
                d.update(center=v(e["center"]), radius=e["radius"] * s, z_min=e["z_min"] * s,
                         z_max=e["z_max"] * s, shell=None if e.get("shell") is None else e["shell"] * s,
                         invert=e["invert"])
            prims.append(d)
        out = {
            "schema": SCHEMA_VERSION,
            "units": units,
            "name": self.name,
            "background": self.background,
            "materials": [m.to_dict() for m in self.materials.values()],
            "stack": None if self.stack is None else {
                "z0": self.stack.z0 * s,
                "footprint": v(self.stack.footprint),
                "layers": [{"name": l.name, "material": l.material, "thickness": l.thickness * s}
                           for l in self.stack.layers],
            },
            "primitives": prims,
            "ports": [{"id": p.id, "start": v(p.start), "end": v(p.end), "polarity": p.polarity,
                       "resistance": p.source_resistance, "role": p.role.value} for p in self.ports],
            "boundary": {"type": self.boundary.kind, "thickness": self.boundary.thickness},
            "padding": self.domain_padding * s,
            "domain": None if self.domain is None else v(self.domain),
            "meta": dict(self.meta),
        }
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "Scene":
        if d.get("schema") != SCHEMA_VERSION:
            raise SceneError(f"unsupported scene schema {d.get('schema')!r}; expected {SCHEMA_VERSION}")
        units = d.get("units", "m")
        if units not in UNITS:
            raise SceneError(f"unknown units {units!r}; use one of {sorted(UNITS)}")
        s = UNITS[units]

        def v(x):
            return tuple(float(c) * s for c in x)

        stack = None
        if d.get("stack"):
            st = d["stack"]
            stack = Stack(tuple(Layer(l["material"], float(l["thickness"]) * s, l.get("name", ""))
                                for l in st["layers"]),
                          v(st["footprint"]), float(st.get("z0", 0.0)) * s)
        prims = []
        for p in d.get("primitives", []):
            shape = Shape(p["shape"])
            if shape is Shape.BOX:
                ext = {"min": v(p["min"]), "max": v(p["max"])}
            elif shape is Shape.SHEET:
                ext = {"normal": p.get("normal", "z"), "position": float(p["position"]) * s,
                       "min": v(p["min"]), "max": v(p["max"])}
            else:
                ext = {"center": v(p["center"]), "radius": float(p["radius"]) * s,
                       "z_min": float(p["z_min"]) * s, "z_max": float(p["z_max"]) * s,
                       "shell": None if p.get("shell") is None else float(p["shell"]) * s,
                       "invert": bool(p.get("invert", False))}
            prims.append(Primitive(shape, ext, p["material"], int(p.get("priority", 0)), p.get("name", "")))
        ports = [Port(int(p["id"]), v(p["start"]), v(p["end"]), int(p.get("polarity", 1)),
                      float(p.get("resistance", 50.0)), p.get("role", "active"))
                 for p in d.get("ports", [])]
        b = d.get("boundary", {})
        return cls(
            name=d.get("name", "scene"),
            stack=stack,
            primitives=tuple(prims),
            ports=tuple(ports),
            boundary=Boundary(b.get("type", "cpml"), int(b.get("thickness", 8))),
            domain_padding=float(d.get("padding", 0.0)) * s,
            domain=None if d.get("domain") is None else v(d["domain"]),
            background=d.get("background", "Vacuum"),
            materials={m["name"]: Material.from_dict(m) for m in d.get("materials", [])},
            meta=dict(d.get("meta", {})),
        )

    def to_json(self, units: str = "m") -> str:
        return json.dumps(self.to_dict(units), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Scene":
        return cls.from_dict(json.loads(text))

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def load_scene(path) -> Scene:
    with open(path) as fh:
        return Scene.from_json(fh.read())


def save_scene(scene: Scene, path, units: str = "m") -> None:
    with open(path, "w") as fh:
        fh.write(scene.to_json(units))
        fh.write("\n")


# --- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    subject: str
    index: int | None
    reason: str

    def __str__(self):
        where = self.subject if self.index is None else f"{self.subject}[{self.index}]"
        return f"{self.severity}: {where}: {self.reason}"


def _inside(pt, bounds, tol=1e-12) -> bool:
    return all(bounds[2 * i] - tol <= pt[i] <= bounds[2 * i + 1] + tol for i in range(3))


def _rects_overlap(a: Primitive, b: Primitive) -> bool:
    if a.normal_axis != b.normal_axis or a.extents["position"] != b.extents["position"]:
        return False
    ax = [i for i in range(3) if i != a.normal_axis]
    return all(min(a.extents["max"][i], b.extents["max"][i]) > max(a.extents["min"][i], b.extents["min"][i])
               for i in ax)


def validate(scene: Scene) -> list[Diagnostic]:
    """Check scene invariants; returns diagnostics instead of raising."""
    diags: list[Diagnostic] = []
    lib = scene.library()
    if scene.background not in lib:
        diags.append(Diagnostic("error", "background", None, f"unknown material {scene.background!r}"))
    try:
        bounds = scene.domain_bounds()
    except SceneError as exc:
        return [Diagnostic("error", "scene", None, str(exc))]
    for i, layer in enumerate(scene.layers):
        if layer.material not in lib:
            diags.append(Diagnostic("error", "layer", i, f"unknown material {layer.material!r}"))
    for i, p in enumerate(scene.primitives):
        if p.material not in lib:
            diags.append(Diagnostic("error", "primitive", i, f"unknown material {p.material!r}"))
            continue
        lo, hi = p.bbox()
        if not (_inside(lo, bounds) and _inside(hi, bounds)):
            diags.append(Diagnostic("error", "primitive", i, f"{p.label} extends outside the domain"))
        if p.shape is Shape.SHEET and lib[p.material].kind not in (MaterialKind.CONDUCTOR, MaterialKind.PEC):
            diags.append(Diagnostic("error", "primitive", i, f"sheet {p.label} must be a conductor or PEC"))
    sheets = [(i, p) for i, p in enumerate(scene.primitives) if p.shape is Shape.SHEET]
    for a in range(len(sheets)):
        for b in range(a + 1, len(sheets)):
            (ia, pa), (ib, pb) = sheets[a], sheets[b]
            if pa.priority == pb.priority and _rects_overlap(pa, pb):
                diags.append(Diagnostic("warning", "primitive", ib,
                                        f"overlaps {pa.label} (index {ia}) with equal priority; later-listed wins"))
    if not scene.active_ports():
        diags.append(Diagnostic("error", "scene", None, "at least one active port is required"))
    ids = [p.id for p in scene.ports]
    if len(set(ids)) != len(ids):
        diags.append(Diagnostic("error", "scene", None, "duplicate port ids"))
    for i, port in enumerate(scene.ports):
        if not (_inside(port.start, bounds) and _inside(port.end, bounds)):
            diags.append(Diagnostic("error", "port", i, f"port {port.id} lies outside the domain"))
    pairs = scene.meta.get("differential_pairs", [])
    by_id = {p.id: p for p in scene.ports}
    for pair in pairs:
        try:
            p1, p2 = by_id[pair[0]], by_id[pair[1]]
        except KeyError:
            diags.append(Diagnostic("error", "scene", None, f"differential pair {pair} names a missing port"))
            continue
        if p1.polarity != -p2.polarity or p1.source_resistance != p2.source_resistance:
            diags.append(Diagnostic("error", "port", ids.index(p2.id),
                                    f"differential pair {pair}: polarity must be opposite and resistance equal"))
    return diags


def check(scene: Scene) -> Scene:
    """Raise :class:`SceneError` listing every error-level diagnostic."""
    errors = [d for d in validate(scene) if d.severity == "error"]
    if errors:
        raise SceneError("; ".join(str(d) for d in errors))
    return scene
