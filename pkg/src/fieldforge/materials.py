"""Temperature-dependent material models and derived loss quantities.

Two temperature classes exist: room temperature and cryogenic (4 K).  Every
built-in material resolves under both.  Conductors are normal metals with a
finite conductivity; PEC is a flag, never a huge sigma.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

from .constants import EPS0, MU0


class TemperatureClass(str, enum.Enum):
    ROOM = "room"
    CRYOGENIC = "cryo"

    @classmethod
    def parse(cls, value: "str | TemperatureClass") -> "TemperatureClass":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"room": cls.ROOM, "rt": cls.ROOM, "300k": cls.ROOM,
                   "cryo": cls.CRYOGENIC, "cryogenic": cls.CRYOGENIC, "4k": cls.CRYOGENIC}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown temperature class {value!r}") from None


class MaterialKind(str, enum.Enum):
    CONDUCTOR = "conductor"
    DIELECTRIC = "dielectric"
    PEC = "pec"
    VACUUM = "vacuum"


def _per_class(value: "float | Mapping") -> dict:
    if isinstance(value, Mapping):
        out = {TemperatureClass.parse(k): float(v) for k, v in value.items()}
        missing = set(TemperatureClass) - set(out)
        if missing:
            raise ValueError(f"missing temperature classes: {sorted(m.value for m in missing)}")
        return out
    return {t: float(value) for t in TemperatureClass}


@dataclass(frozen=True)
class Material:
    """A named medium with per-temperature-class sigma and eps_r."""

    name: str
    sigma_by_class: Mapping[TemperatureClass, float]
    eps_r_by_class: Mapping[TemperatureClass, float]
    mu_r: float = 1.0
    kind: MaterialKind = MaterialKind.DIELECTRIC

    def __post_init__(self):
        object.__setattr__(self, "sigma_by_class", _per_class(self.sigma_by_class))
        object.__setattr__(self, "eps_r_by_class", _per_class(self.eps_r_by_class))
        object.__setattr__(self, "kind", MaterialKind(self.kind))
        for t in TemperatureClass:
            s = self.sigma_by_class[t]
            e = self.eps_r_by_class[t]
            if not (math.isfinite(s) and s >= 0):
                raise ValueError(f"{self.name}: sigma must be finite and >= 0, got {s}")
            if not (math.isfinite(e) and e >= 1):
                raise ValueError(f"{self.name}: eps_r must be >= 1, got {e}")
        if not self.mu_r >= 1:
            raise ValueError(f"{self.name}: mu_r must be >= 1")

    def sigma(self, temp: "TemperatureClass | str") -> float:
        return self.sigma_by_class[TemperatureClass.parse(temp)]

    def eps_r(self, temp: "TemperatureClass | str") -> float:
        return self.eps_r_by_class[TemperatureClass.parse(temp)]

    @property
    def is_pec(self) -> bool:
        return self.kind is MaterialKind.PEC

    @property
    def is_conductor(self) -> bool:
        return self.kind is MaterialKind.CONDUCTOR

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "sigma": {t.value: self.sigma_by_class[t] for t in TemperatureClass},
            "eps_r": {t.value: self.eps_r_by_class[t] for t in TemperatureClass},
            "mu_r": self.mu_r,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Material":
        return cls(name=d["name"], sigma_by_class=d.get("sigma", 0.0),
                   eps_r_by_class=d.get("eps_r", 1.0), mu_r=d.get("mu_r", 1.0),
                   kind=d.get("kind", "dielectric"))


_R, _C = TemperatureClass.ROOM, TemperatureClass.CRYOGENIC

CU = Material("Cu", {_C: 2.9e8, _R: 5.9e7}, 1.0, kind=MaterialKind.CONDUCTOR)
SI = Material("Si", {_C: 4.26e-7, _R: 4.26e-4}, {_C: 11.45, _R: 11.75})
SIO2 = Material("SiO2", 0.0, 3.9)
VACUUM = Material("Vacuum", 0.0, 1.0, kind=MaterialKind.VACUUM)
PEC = Material("PEC", 0.0, 1.0, kind=MaterialKind.PEC)


def builtin_library() -> dict[str, Material]:
    """Return the built-in materials keyed by name."""
    return {m.name: m for m in (CU, SI, SIO2, VACUUM, PEC)}


def lookup(name: str, library: "Mapping[str, Material] | None" = None) -> Material:
    lib = builtin_library() if library is None else library
    try:
        return lib[name]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; known: {sorted(lib)}") from None


def skin_depth(sigma: float, mu_r: float, f: float) -> float:
    """Skin depth ``1/sqrt(pi f mu sigma)`` in meters."""
    if not sigma > 0 or not f > 0:
        raise ValueError("skin_depth needs sigma > 0 and f > 0")
    return 1.0 / math.sqrt(math.pi * f * MU0 * mu_r * sigma)


def loss_tangent(sigma: float, eps_r: float, f: float) -> float:
    if not f > 0 or eps_r < 1:
        raise ValueError("loss_tangent needs f > 0 and eps_r >= 1")
    return sigma / (2.0 * math.pi * f * EPS0 * eps_r)


def surface_resistance(sigma: float, mu_r: float, f: float) -> float:
    """Surface resistance of a good conductor, ohm per square."""
    if not sigma > 0 or not f > 0:
        raise ValueError("surface_resistance needs sigma > 0 and f > 0")
    return math.sqrt(math.pi * f * MU0 * mu_r / sigma)
