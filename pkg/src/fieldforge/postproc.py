"""Engineering quantities from recorder output.

Power waves use the port source resistance ``R`` as reference:
``a = (V + R I) / (2 sqrt R)``, ``b = (V - R I) / (2 sqrt R)``.  A Thevenin
port with EMF ``Vs`` and resistance ``R`` launches ``a = Vs / (2 sqrt R)``, so
undriven ports see no incident wave and single-run ratios are exact
S-parameters.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .constants import C0, ETA0
from .fdtd.solver import NearFieldRecord, PortRecord, SimulationResult


class EnergyAccountingError(ValueError):
    pass


class ReciprocityWarning(UserWarning):
    pass


class PassivityWarning(UserWarning):
    pass


SLACK = 0.02


# --- ports -------------------------------------------------------------------


def port_impedance(record: PortRecord, floor: float = 1e-9) -> np.ndarray:
    """``V / I`` per frequency; NaN where ``|I|`` is below ``floor`` of its peak."""
    I = np.asarray(record.I)
    peak = np.max(np.abs(I)) if I.size else 0.0
    valid = np.abs(I) > floor * peak if peak > 0 else np.zeros(I.shape, dtype=bool)
    z = np.full(I.shape, np.nan + 1j * np.nan)
    z[valid] = record.V[valid] / I[valid]
    return z


def power_waves(record: PortRecord, reference: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    r = record.resistance if reference is None else reference
    k = 1.0 / (2 * math.sqrt(r))
    return (record.V + r * record.I) * k, (record.V - r * record.I) * k


def accepted_power(records) -> np.ndarray:
    """Net real power flowing from all ports into the structure (W)."""
    recs = list(records.values()) if isinstance(records, dict) else list(records)
    return sum(0.5 * np.real(r.V * np.conj(r.I)) for r in recs)


def s_matrix(runs: dict[int, dict[int, PortRecord]], port_ids: list[int] | None = None) -> np.ndarray:
    """Full S matrix ``(n_freq, n, n)`` from one run per excited port.

    ``runs[j]`` holds every port record of the run that drives port ``j`` alone.
    """
    ids = sorted(runs) if port_ids is None else list(port_ids)
    nf = len(next(iter(next(iter(runs.values())).values())).frequencies)
    S = np.zeros((nf, len(ids), len(ids)), dtype=complex)
    for col, j in enumerate(ids):
        recs = runs[j]
        a_j, _ = power_waves(recs[j])
        for row, i in enumerate(ids):
            _, b_i = power_waves(recs[i])
            S[:, row, col] = b_i / a_j
    return S


def reciprocity_error(S: np.ndarray) -> float:
    S = np.asarray(S)
    num = np.abs(S[..., 0, 1] - S[..., 1, 0])
    den = np.maximum(np.maximum(np.abs(S[..., 0, 1]), np.abs(S[..., 1, 0])), 1e-300)
    return float(np.max(num / den))


def mixed_mode_sdd11(S: np.ndarray, tol: float = 0.01) -> np.ndarray:
    """Differential reflection ``(S11 - S12 - S21 + S22) / 2`` of a 2-port pair.

    Warns with :class:`ReciprocityWarning` when ``S12`` and ``S21`` differ by
    more than ``tol`` (relative).
    """
    S = np.asarray(S, dtype=complex)
    if S.shape[-2:] != (2, 2):
        raise ValueError("mixed-mode reduction needs a 2x2 S matrix")
    if np.any(np.abs(S[..., 0, 1]) + np.abs(S[..., 1, 0]) > 0) and reciprocity_error(S) > tol:
        warnings.warn("S12 and S21 differ beyond the reciprocity tolerance", ReciprocityWarning, stacklevel=2)
    out = 0.5 * (S[..., 0, 0] - S[..., 0, 1] - S[..., 1, 0] + S[..., 1, 1])
    return out if out.ndim else complex(out)


def differential_sdd11(p: PortRecord, n: PortRecord) -> np.ndarray:
    """Single-run differential reflection of a pair driven with opposite signs.

    ``a_d = (a_p - a_n) / sqrt 2`` and likewise ``b_d``; exact when the common
    incident wave vanishes, as it does for equal and opposite EMFs.
    """
    ap, bp = power_waves(p)
    an, bn = power_waves(n)
    return (bp - bn) / (ap - an)


def differential_impedance(p: PortRecord, n: PortRecord) -> np.ndarray:
    """``(Vp - Vn) / ((Ip - In) / 2)`` across a pair sharing a centre node."""
    return (p.V - n.V) / (0.5 * (p.I - n.I))


def to_db(x) -> np.ndarray:
    return 20 * np.log10(np.maximum(np.abs(x), 1e-300))


# --- near field --------------------------------------------------------------


def poynting_flux(near: NearFieldRecord) -> np.ndarray:
    """Outward time-averaged power through the recorded box, per frequency."""
    p = np.zeros(len(near.frequencies))
    for f in near.faces:
        s = np.sum((f.eb * np.conj(f.hc)) * f.w_eb, axis=(1, 2)) - np.sum((f.ec * np.conj(f.hb)) * f.w_ec,
                                                                         axis=(1, 2))
        p += 0.5 * f.sign * np.real(s)
    return p


@dataclass
class FarField:
    """Far-zone pattern at one frequency on a (theta, phi) grid (radians).

    ``E_theta`` and ``E_phi`` are ``r exp(jkr)`` times the far field (V).
    """

    frequency: float
    theta: np.ndarray
    phi: np.ndarray
    E_theta: np.ndarray
    E_phi: np.ndarray

    @property
    def intensity(self) -> np.ndarray:
        """Radiation intensity ``U`` (W/sr)."""
        return (np.abs(self.E_theta) ** 2 + np.abs(self.E_phi) ** 2) / (2 * ETA0)

    @property
    def radiated_power(self) -> float:
        return sphere_integral(self.intensity, self.theta, self.phi)

    @property
    def directivity(self) -> np.ndarray:
        return 4 * np.pi * self.intensity / self.radiated_power

    def max_directivity(self) -> tuple[float, float, float]:
        """Peak directivity (linear) and its (theta, phi)."""
        d = self.directivity
        i, j = np.unravel_index(int(np.argmax(d)), d.shape)
        return float(d[i, j]), float(self.theta[i]), float(self.phi[j])


def sphere_integral(u: np.ndarray, theta: np.ndarray, phi: np.ndarray) -> float:
    """Trapezoid integral of ``u(theta, phi) sin(theta)`` over the sphere.

    ``phi`` is periodic and must not repeat its first point at ``2 pi``.
    """
    inner = trapezoid(u * np.sin(theta)[:, None], theta, axis=0)
    dphi = 2 * np.pi / len(phi)
    return float(np.sum(inner) * dphi)


def angle_grid(step_deg: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    n_t = int(round(180 / step_deg)) + 1
    n_p = int(round(360 / step_deg))
    return np.linspace(0, np.pi, n_t), np.arange(n_p) * (2 * np.pi / n_p)


def _surface_sum(x, w, bpos, cpos, a_phase, rb, rc, k):
    """``sum x w exp(jk(b rb + c rc))`` for every direction, times the face phase."""
    xw = x * w
    pc = np.exp(1j * k * np.outer(cpos, rc))  # (nc, nd)
    tmp = xw @ pc  # (nb, nd)
    pb = np.exp(1j * k * np.outer(bpos, rb))  # (nb, nd)
    return np.sum(tmp * pb, axis=0) * a_phase


def ntff(near: NearFieldRecord, f_index: int, theta: np.ndarray | None = None,
         phi: np.ndarray | None = None, chunk: int = 4096) -> FarField:
    """Far field from equivalent currents ``J = n x H``, ``M = -n x E`` on the box."""
    if theta is None or phi is None:
        theta, phi = angle_grid(1.0)
    _check_closed(near)
    f = float(near.frequencies[f_index])
    k = 2 * np.pi * f / C0
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    st, ct, sp, cp = np.sin(tt).ravel(), np.cos(tt).ravel(), np.sin(pp).ravel(), np.cos(pp).ravel()
    rhat = np.stack([st * cp, st * sp, ct])
    nd = rhat.shape[1]
    N = np.zeros((3, nd), dtype=complex)
    L = np.zeros((3, nd), dtype=complex)
    for s0 in range(0, nd, chunk):
        sl = slice(s0, min(nd, s0 + chunk))
        r = rhat[:, sl]
        for face in near.faces:
            a, sgn = face.axis, face.sign
            b, c = (a + 1) % 3, (a + 2) % 3
            aph = np.exp(1j * k * face.position * r[a])
            # J_b = -s Hc, M_c = -s Eb on the (eb) grid; J_c = s Hb, M_b = s Ec on the (ec) grid
            N[b, sl] += -sgn * _surface_sum(face.hc[f_index], face.w_eb, face.b_eb, face.c_eb, aph, r[b], r[c], k)
            L[c, sl] += -sgn * _surface_sum(face.eb[f_index], face.w_eb, face.b_eb, face.c_eb, aph, r[b], r[c], k)
            N[c, sl] += sgn * _surface_sum(face.hb[f_index], face.w_ec, face.b_ec, face.c_ec, aph, r[b], r[c], k)
            L[b, sl] += sgn * _surface_sum(face.ec[f_index], face.w_ec, face.b_ec, face.c_ec, aph, r[b], r[c], k)
    th_hat = np.stack([ct * cp, ct * sp, -st])
    ph_hat = np.stack([-sp, cp, np.zeros_like(sp)])
    n_t, n_p = np.sum(N * th_hat, 0), np.sum(N * ph_hat, 0)
    l_t, l_p = np.sum(L * th_hat, 0), np.sum(L * ph_hat, 0)
    pref = -1j * k / (4 * np.pi)
    e_t = pref * (l_p + ETA0 * n_t)
    e_p = -pref * (l_t - ETA0 * n_p)
    shape = tt.shape
    return FarField(f, theta, phi, e_t.reshape(shape), e_p.reshape(shape))


def _check_closed(near: NearFieldRecord):
    keys = {(f.axis, f.sign) for f in near.faces}
    if keys != {(a, s) for a in range(3) for s in (-1, 1)}:
        raise ValueError("near-field surface is not closed: all six box faces are required")


# --- efficiency and gain -----------------------------------------------------


def efficiency_and_gain(p_rad: float, p_accepted: float, directivity_dbi: float,
                        gamma: complex = 0.0) -> tuple[float, float]:
    """Radiation efficiency and realized gain (dBi).

    Realized gain adds ``10 log10(efficiency)`` and the mismatch term
    ``10 log10(1 - |gamma|^2)`` to the directivity.
    """
    if not p_accepted > 0:
        raise EnergyAccountingError("accepted power must be positive")
    if p_rad > p_accepted * (1 + SLACK):
        raise EnergyAccountingError(f"radiated power {p_rad:.4g} W exceeds accepted {p_accepted:.4g} W")
    eff = p_rad / p_accepted
    mism = 1 - abs(gamma) ** 2
    if mism <= 0:
        return eff, -math.inf
    return eff, directivity_dbi + 10 * math.log10(eff) + 10 * math.log10(mism)


def power_balance(result: SimulationResult) -> dict[str, np.ndarray]:
    """Accepted, radiated (box flux) and ohmic power with the relative mismatch."""
    p_acc = accepted_power(result.ports)
    p_rad = poynting_flux(result.near_field)
    p_ohm = result.losses.total if result.losses is not None else np.zeros_like(p_acc)
    err = (p_acc - p_rad - p_ohm) / p_acc
    return {"P_accepted": p_acc, "P_radiated": p_rad, "P_ohmic": p_ohm, "relative_error": err}


# --- sweep result ------------------------------------------------------------


@dataclass
class SweepResult:
    """Per-frequency engineering summary of a differential-pair run."""

    frequencies: np.ndarray
    Zin: np.ndarray
    S: np.ndarray
    Sdd11: np.ndarray
    P_accepted: np.ndarray
    P_radiated: np.ndarray
    P_ohmic: np.ndarray
    efficiency: np.ndarray
    total_efficiency: np.ndarray
    realized_gain: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gain_direction: list[tuple[float, float]] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if np.any(self.efficiency > 1 + SLACK):
            self.flags.append("efficiency above 1 + slack")
            warnings.warn("radiation efficiency exceeds 1 beyond numerical slack", PassivityWarning, stacklevel=2)
        if self.S.size and np.any(np.abs(self.S) > 1 + SLACK):
            self.flags.append("|S| above 1 + slack")
            warnings.warn("|S_ij| exceeds 1 beyond numerical slack", PassivityWarning, stacklevel=2)

    HEADER = ("f_Hz", "Zin_re", "Zin_im", "Sdd11_re", "Sdd11_im", "Sdd11_dB", "P_accepted_W", "P_radiated_W",
              "P_ohmic_W", "radiation_efficiency", "total_efficiency", "realized_gain_dBi", "theta_deg", "phi_deg")

    def rows(self) -> list[list[str]]:
        out = []
        for i, f in enumerate(self.frequencies):
            g = self.realized_gain[i] if len(self.realized_gain) else math.nan
            th, ph = self.gain_direction[i] if self.gain_direction else (math.nan, math.nan)
            vals = (f, self.Zin[i].real, self.Zin[i].imag, self.Sdd11[i].real, self.Sdd11[i].imag,
                    to_db(self.Sdd11[i]), self.P_accepted[i], self.P_radiated[i], self.P_ohmic[i],
                    self.efficiency[i], self.total_efficiency[i], g, math.degrees(th), math.degrees(ph))
            out.append([_fmt(v) for v in vals])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.HEADER)
        w.writerows(self.rows())
        return buf.getvalue()


def _fmt(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.9g}"


def sweep_result(result: SimulationResult, pair: tuple[int, int] = (1, 2), gain_freqs=None,
                 angle_step: float = 2.0) -> SweepResult:
    """Summarize a differential run; gain only at ``gain_freqs`` indices (all if None)."""
    p, n = result.ports[pair[0]], result.ports[pair[1]]
    sdd = differential_sdd11(p, n)
    zin = differential_impedance(p, n)
    bal = power_balance(result)
    eff = bal["P_radiated"] / bal["P_accepted"]
    mism = 1 - np.abs(sdd) ** 2
    nf = len(p.frequencies)
    gain = np.full(nf, np.nan)
    dirs = [(math.nan, math.nan)] * nf
    idx = range(nf) if gain_freqs is None else gain_freqs
    theta, phi = angle_grid(angle_step)
    for i in idx:
        ff = ntff(result.near_field, i, theta, phi)
        d, th, ph = ff.max_directivity()
        _, g = efficiency_and_gain(bal["P_radiated"][i], bal["P_accepted"][i], 10 * math.log10(d), sdd[i])
        gain[i] = g
        dirs[i] = (th, ph)
    return SweepResult(p.frequencies, zin, np.zeros((0,)), sdd, bal["P_accepted"], bal["P_radiated"],
                       bal["P_ohmic"], eff, eff * mism, gain, dirs)
