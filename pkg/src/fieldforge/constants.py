"""Physical constants (SI) shared by every module."""

import math

C0 = 2.99792458e8
"""Speed of light in vacuum (m/s)."""

EPS0 = 8.8541878128e-12
"""Vacuum permittivity (F/m)."""

MU0 = 1.25663706212e-6
"""Vacuum permeability (H/m)."""

ETA0 = math.sqrt(MU0 / EPS0)
"""Free-space wave impedance (ohm), about 376.73."""
