"""fieldforge: FDTD and analytic tools for an on-chip 28 GHz differential dipole."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("fieldforge")
except PackageNotFoundError:  # source tree without install
    __version__ = "0.0.0"
