"""Command-line front end: design | simulate | sweep-thickness | cavity | materials."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, cavity, design, materials, postproc, presets, svg
from .grid import CellBudgetError, GridError, stats_csv_rows
from .scene import SceneError, load_scene

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_SCENE = 3
EXIT_BUDGET = 4
EXIT_DIVERGED = 5
EXIT_ENUMERATION = 6
EXIT_PARTIAL = 7
EXIT_IO = 8
EXIT_ENERGY = 9

EXIT_HELP = """exit status:
  0  all requested outputs written
  1  unexpected internal error
  2  usage error (bad or missing arguments)
  3  scene file invalid or unreadable
  4  grid cell budget exceeded (lower --resolution, use a scaled preset or set FIELDFORGE_CELL_BUDGET)
  5  simulation diverged (non-finite fields)
  6  cavity enumeration budget exceeded
  7  sweep finished with failed sub-runs (partial results written)
  8  output directory not writable
  9  energy accounting error (radiated power exceeds accepted power)
"""

ENUMERATION_BUDGET = 2_000_000


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


# --- output helpers ------------------------------------------------------------


class Outputs:
    """Writes files under one directory and remembers them for the manifest."""

    def __init__(self, root: Path):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot create output directory {root}: {exc}") from exc
        self.files: list[str] = []

    def write(self, name: str, text: str) -> Path:
        path = self.root / name
        try:
            path.write_text(text, encoding="utf-8", newline="")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc
        self.files.append(name)
        return path

    def csv(self, name: str, header, rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return self.write(name, buf.getvalue())

    def manifest(self, command: str, config: dict, timings: dict, extra: dict | None = None,
                 status: int = EXIT_OK) -> Path:
        data = {
            "tool": "fieldforge", "version": __version__, "command": command, "python": platform.python_version(),
            "config": config, "timings_s": {k: round(v, 4) for k, v in timings.items()},
            "outputs": sorted(self.files), "exit_status": status,
        }
        data.update(extra or {})
        path = self.root / "manifest.json"
        try:
            path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc
        return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def _g(v) -> str:
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.9g}"


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emit(args, table: list[tuple[str, object]], data: dict):
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True, default=_json_default))
    else:
        width = max(len(k) for k, _ in table)
        for k, v in table:
            print(f"{k:<{width}}  {v}")


# --- design ---------------------------------------------------------------------


def cmd_design(args) -> int:
    d = design.dipole_design(args.f0, args.eps_r)
    ms = design.microstrip_synthesize(args.z0, args.eps_r_feed, args.h)
    freqs = args.f0 * np.linspace(0.9, 1.1, 21)
    # homogeneous effective medium: length and radius scale by sqrt(eps_eff), impedance by 1/sqrt(eps_eff)
    n = math.sqrt(d.eps_eff)
    radius = args.wire_radius if args.wire_radius else d.L / 200
    zs = [design.thin_dipole_impedance(d.L * n, radius * n, f) / n for f in freqs]
    table = [("f0 [Hz]", f"{args.f0:.6g}"), ("lambda0 [m]", f"{d.lambda0:.9g}"), ("eps_eff", f"{d.eps_eff:.6g}"),
             ("L [mm]", f"{d.L * 1e3:.6f}"), ("W [um]", f"{ms.W * 1e6:.4f}"), ("S [um]", f"{ms.S * 1e6:.4f}"),
             ("Z0 check [ohm]", f"{ms.Z0:.4f}"), ("Zdiff [ohm]", f"{ms.Z_diff:.4f}")]
    data = {"f0": args.f0, "eps_r": args.eps_r, "lambda0": d.lambda0, "eps_eff": d.eps_eff, "L": d.L,
            "W": ms.W, "S": ms.S, "h": ms.h, "Z0_feed": ms.Z0, "Z_diff": ms.Z_diff,
            "oracle": [{"f": float(f), "Zin": [z.real, z.imag]} for f, z in zip(freqs, zs)]}
    _emit(args, table, data)
    if args.out:
        out = Outputs(args.out)
        out.csv("design.csv", ("quantity", "value"),
                [("f0_Hz", _g(args.f0)), ("eps_r", _g(args.eps_r)), ("lambda0_m", _g(d.lambda0)),
                 ("eps_eff", _g(d.eps_eff)), ("L_m", _g(d.L)), ("W_m", _g(ms.W)), ("S_m", _g(ms.S)),
                 ("h_m", _g(ms.h)), ("Z0_feed_ohm", _g(ms.Z0)), ("Zdiff_ohm", _g(ms.Z_diff))])
        out.csv("oracle-zin.csv", ("f_Hz", "Zin_re", "Zin_im"),
                [(_g(f), _g(z.real), _g(z.imag)) for f, z in zip(freqs, zs)])
        out.manifest("design", vars_clean(args), {})
    return EXIT_OK


def vars_clean(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


# --- simulate -------------------------------------------------------------------


def _scene_from_args(args, si_thickness: float | None = None):
    if getattr(args, "scene", None):
        try:
            return load_scene(args.scene), file_hash(args.scene)
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(EXIT_SCENE, f"cannot load scene {args.scene}: {exc}") from exc
    kw = {}
    if si_thickness is not None:
        kw["si_thickness"] = si_thickness
    elif getattr(args, "si_thickness", None):
        kw["si_thickness"] = args.si_thickness
    if getattr(args, "length", None):
        kw["L"] = args.length
    try:
        if args.preset == "onchip":
            scene = presets.preset_onchip_dipole(args.temp if args.temp != "both" else "cryo", **kw)
        elif args.preset == "cryostat":
            scene = presets.preset_cryostat(temp=args.temp if args.temp != "both" else "cryo",
                                            chip=presets.preset_onchip_dipole(**kw))
        else:
            scene = presets.scaled_down(10.0, chip=presets.preset_onchip_dipole(**kw))
    except SceneError as exc:
        raise CliError(EXIT_SCENE, str(exc)) from exc
    return scene, scene.content_hash()


def _options(args):
    from .pipeline import SimulateOptions

    return SimulateOptions(resolution=args.resolution, edge_refinement=args.edge_refinement, f_start=args.f_start, f_stop=args.f_stop, n_freq=args.n_freq,
                           full_s=args.full_s, gain_every=args.gain_every, angle_step=args.angle_step,
                           max_steps=args.max_steps)


def _run_one(scene, temp: str, options):
    """Worker body (also used in-process); returns the outcome without the field state."""
    from .pipeline import simulate

    out = simulate(scene, temp, options)
    out.result.state = None
    for r in out.single_ended.values():
        r.state = None
    return out


def _write_outcome(out: Outputs, o, prefix: str = ""):
    sw = o.sweep
    out.write(f"{prefix}s-params.csv", _sparams_csv(o))
    out.csv(f"{prefix}efficiency.csv",
            ("f_Hz", "P_accepted_W", "P_radiated_W", "P_ohmic_W", "radiation_efficiency", "total_efficiency",
             "balance_error", "realized_gain_dBi"),
            [(_g(f), _g(a), _g(r), _g(h), _g(e), _g(te), _g((a - r - h) / a), _g(g)) for f, a, r, h, e, te, g in
             zip(sw.frequencies, sw.P_accepted, sw.P_radiated, sw.P_ohmic, sw.efficiency, sw.total_efficiency,
                 sw.realized_gain)])
    out.write(f"{prefix}sweep.csv", sw.to_csv())
    rows = []
    for pid, rec in sorted(o.result.ports.items()):
        for f, v, i in zip(rec.frequencies, rec.V, rec.I):
            rows.append((pid, _g(f), _g(v.real), _g(v.imag), _g(i.real), _g(i.imag)))
    out.csv(f"{prefix}ports.csv", ("port", "f_Hz", "V_re", "V_im", "I_re", "I_im"), rows)
    out.csv(f"{prefix}grid.csv", ("quantity", "value"), [(k, _g(v)) for k, v in stats_csv_rows(o.grid)])
    if o.pattern is not None:
        ff = o.pattern
        d = 10 * np.log10(np.maximum(ff.directivity, 1e-30))
        rows = [(_g(math.degrees(t)), _g(math.degrees(p)), _g(d[i, j]))
                for i, t in enumerate(ff.theta) for j, p in enumerate(ff.phi)]
        out.csv(f"{prefix}pattern.csv", ("theta_deg", "phi_deg", "directivity_dBi"), rows)
        j90 = int(np.argmin(np.abs(ff.phi - math.pi / 2)))
        cut = np.concatenate([d[:, 0], d[::-1, j90 if j90 < d.shape[1] else 0]])
        ang = np.concatenate([ff.theta, 2 * math.pi - ff.theta[::-1]])
        out.write(f"{prefix}pattern-cut.svg", svg.polar_cut(ang, cut, f"Directivity cut at {ff.frequency / 1e9:.2f} GHz"))
    out.write(f"{prefix}sdd11.svg", svg.line_plot(sw.frequencies / 1e9, {"|Sdd11| (dB)": postproc.to_db(sw.Sdd11)},
                                                  "Differential reflection", "f (GHz)", "dB", hline=-10))
    out.write(f"{prefix}efficiency.svg", svg.line_plot(
        sw.frequencies / 1e9, {"radiation": sw.efficiency, "total": sw.total_efficiency},
        "Efficiency", "f (GHz)", ""))
    if o.snapshot is not None:
        comp, axis, pos = o.snapshot_plane
        u, v = [a for a in range(3) if a != axis]
        snap = o.snapshot
        out.csv(f"{prefix}snapshot-{comp}.csv", ("iu", "iv", "value"),
                [(i, j, _g(snap[i, j])) for i in range(snap.shape[0]) for j in range(snap.shape[1])])
        out.write(f"{prefix}snapshot-{comp}.svg", svg.heatmap(snap, o.grid.lines[u], o.grid.lines[v],
                                                              f"{comp} on the feed plane"))


def _sparams_csv(o) -> str:
    sw = o.sweep
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["f_Hz", "Sdd11_re", "Sdd11_im", "Sdd11_dB", "Zdiff_re", "Zdiff_im"]
    full = sw.S.size > 0
    if full:
        for i in (1, 2):
            for j in (1, 2):
                head += [f"S{i}{j}_re", f"S{i}{j}_im"]
        head += ["Sdd11_mixed_re", "Sdd11_mixed_im"]
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mixed = postproc.mixed_mode_sdd11(sw.S)
    w.writerow(head)
    for k, f in enumerate(sw.frequencies):
        row = [_g(f), _g(sw.Sdd11[k].real), _g(sw.Sdd11[k].imag), _g(postproc.to_db(sw.Sdd11[k])),
               _g(sw.Zin[k].real), _g(sw.Zin[k].imag)]
        if full:
            for i in range(2):
                for j in range(2):
                    row += [_g(sw.S[k, i, j].real), _g(sw.S[k, i, j].imag)]
            row += [_g(mixed[k].real), _g(mixed[k].imag)]
        w.writerow(row)
    return buf.getvalue()


def _map_runs(jobs: int, tasks):
    """Run ``(scene, temp, options)`` tasks, in worker processes when ``jobs > 1``."""
    results = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [ex.submit(_run_one, *t) for t in tasks]
            for f in futs:
                try:
                    results.append(f.result())
                except Exception as exc:  # noqa: BLE001 - reported per sub-run
                    results.append(exc)
    else:
        for t in tasks:
            try:
                results.append(_run_one(*t))
            except Exception as exc:  # noqa: BLE001
                results.append(exc)
    return results


def _raise_for(exc: Exception):
    from .fdtd import SimulationDiverged

    if isinstance(exc, CellBudgetError):
        raise CliError(EXIT_BUDGET, str(exc)) from exc
    if isinstance(exc, SimulationDiverged):
        raise CliError(EXIT_DIVERGED, str(exc)) from exc
    if isinstance(exc, postproc.EnergyAccountingError):
        raise CliError(EXIT_ENERGY, str(exc)) from exc
    if isinstance(exc, (SceneError, GridError)):
        raise CliError(EXIT_SCENE, str(exc)) from exc
    raise exc


def cmd_simulate(args) -> int:
    t_start = time.perf_counter()
    scene, shash = _scene_from_args(args)
    opts = _options(args)
    temps = ["cryo", "room"] if args.temp == "both" else [args.temp]
    out = Outputs(args.out)
    runs = _map_runs(args.jobs, [(scene, t, opts) for t in temps])
    for r in runs:
        if isinstance(r, Exception):
            _raise_for(r)
    summaries = {}
    timings = {}
    for t, o in zip(temps, runs):
        prefix = f"{t}-" if len(temps) > 1 else ""
        _write_outcome(out, o, prefix)
        summaries[t] = o.summary()
        timings.update({f"{prefix}{k}": v for k, v in o.timings.items()})
    if len(temps) > 1:
        c, r = summaries["cryo"], summaries["room"]
        summaries["comparison"] = {"efficiency_cryo_minus_room": c["efficiency_at_28GHz"] - r["efficiency_at_28GHz"],
                                   "cryo_exceeds_room": c["efficiency_at_28GHz"] > r["efficiency_at_28GHz"]}
    timings["total"] = time.perf_counter() - t_start
    out.write("summary.json", json.dumps(summaries, indent=2, sort_keys=True, default=_json_default) + "\n")
    out.manifest("simulate", {**vars_clean(args), "options": _json_safe(opts)}, timings,
                 {"scene_hash": shash, "grid": runs[0].grid.stats(), "scene_name": scene.name})
    table = []
    for t, s in summaries.items():
        if t == "comparison":
            table.append(("cryo efficiency > room", s["cryo_exceeds_room"]))
            continue
        table += [(f"{t}: dip frequency [GHz]", f"{s['dip_frequency_Hz'] / 1e9:.4f}"),
                  (f"{t}: dip |Sdd11| [dB]", f"{s['dip_Sdd11_dB']:.2f}"),
                  (f"{t}: radiation efficiency @28 GHz", f"{s['efficiency_at_28GHz']:.4f}"),
                  (f"{t}: max power-balance error", f"{s['max_power_balance_error']:.4f}")]
    _emit(args, table, summaries)
    return EXIT_OK


def _json_safe(opts) -> dict:
    from dataclasses import asdict

    return asdict(opts)


def cmd_sweep_thickness(args) -> int:
    t_start = time.perf_counter()
    thick = args.thickness
    if not thick:
        raise CliError(EXIT_USAGE, "empty thickness list")
    if len(thick) == 1:
        args.si_thickness = thick[0]
        return cmd_simulate(args)
    opts = _options(args)
    tasks, hashes = [], {}
    for t in thick:
        scene, h = _scene_from_args(args, si_thickness=t)
        tasks.append((scene, args.temp, opts))
        hashes[f"{t:g}"] = h
    out = Outputs(args.out)
    runs = _map_runs(args.jobs, tasks)
    rows, series, failures = [], {}, {}
    dips = []
    freqs = None
    for t, o in zip(thick, runs):
        if isinstance(o, Exception):
            failures[f"{t:g}"] = f"{type(o).__name__}: {o}"
            continue
        _write_outcome(out, o, prefix=f"si{t * 1e3:.3f}mm-")
        db = postproc.to_db(o.sweep.Sdd11)
        freqs = o.sweep.frequencies
        series[f"Si {t * 1e3:.2f} mm"] = db
        f_dip, d_dip = o.dip()
        dips.append((t, f_dip, d_dip))
        for f, v in zip(freqs, db):
            rows.append((_g(t), _g(f), _g(v)))
    out.csv("thickness-sweep.csv", ("si_thickness_m", "f_Hz", "Sdd11_dB"), rows)
    out.csv("thickness-dips.csv", ("si_thickness_m", "dip_f_Hz", "dip_Sdd11_dB"),
            [(_g(t), _g(f), _g(d)) for t, f, d in dips])
    if series:
        out.write("thickness-sweep.svg", svg.line_plot(freqs / 1e9, series, "|Sdd11| vs Si thickness", "f (GHz)", "dB"))
    best = min(dips, key=lambda r: r[2]) if dips else None
    status = EXIT_PARTIAL if failures else EXIT_OK
    out.manifest("sweep-thickness", {**vars_clean(args), "options": _json_safe(opts)},
                 {"total": time.perf_counter() - t_start},
                 {"scene_hashes": hashes, "failures": failures,
                  "best_thickness_m": best[0] if best else None}, status=status)
    table = [(f"Si {t * 1e3:.3f} mm", f"dip {f / 1e9:.3f} GHz at {d:.2f} dB") for t, f, d in dips]
    table += [(f"Si {k} m", f"FAILED {v}") for k, v in failures.items()]
    if best:
        table.append(("deepest dip", f"Si {best[0] * 1e3:.3f} mm"))
    _emit(args, table, {"dips": dips, "failures": failures, "best": best})
    if failures:
        print(f"{len(failures)} sub-run(s) failed; partial results written", file=sys.stderr)
    return status


# --- cavity ---------------------------------------------------------------------


def cmd_cavity(args) -> int:
    t_start = time.perf_counter()
    a = args.radius
    out = Outputs(args.out)
    reports = []
    for d in args.section:
        vol = math.pi * a * a * d
        est = cavity.weyl_count(vol, args.f_max)
        if est > args.budget:
            raise CliError(EXIT_ENUMERATION, f"enumerating {a} m x {d} m up to {args.f_max:.4g} Hz needs ~{est:.3g} "
                                             f"modes, over the budget of {args.budget:.3g}")
        modes = cavity.with_q(cavity.cylinder_modes(a, d, args.f_max), args.sigma_wall, a, d)
        tag = f"a{a:g}-d{d:g}"
        out.csv(f"modes-{tag}.csv", ("family", "m", "n", "p", "degeneracy", "f_Hz", "Q"),
                [(m.family, m.m, m.n, m.p, m.degeneracy, _g(m.frequency), _g(m.Q)) for m in modes])
        rep = {"radius_m": a, "height_m": d, "modes": len(modes), "mode_count": cavity.mode_count(modes),
               "weyl_estimate": est}
        if args.focus is not None:
            if args.focus + args.window > args.f_max:
                raise CliError(EXIT_USAGE, "--focus + --window must not exceed --f-max")
            dens = cavity.mode_density(modes, args.focus, args.window)
            rep.update({"focus_Hz": args.focus, "window_Hz": args.window, "modes_in_window": dens.count,
                        "nearest_mode_offset_Hz": dens.nearest_offset})
            lo, hi = args.focus - 10 * args.window, args.focus + 10 * args.window
            edges = np.linspace(max(lo, 0.0), min(hi, args.f_max), 41)
            fs = np.array([m.frequency for m in modes])
            counts, _ = np.histogram(fs, bins=edges)
            out.write(f"density-{tag}.svg", svg.bar_chart(edges / 1e9, counts, f"Mode density, {a} m x {d} m",
                                                          "f (GHz)", "modes per bin"))
            out.csv(f"density-{tag}.csv", ("f_lo_Hz", "f_hi_Hz", "count"),
                    [(_g(e0), _g(e1), int(c)) for e0, e1, c in zip(edges[:-1], edges[1:], counts)])
        reports.append(rep)
    out.csv("cavity-summary.csv", ("radius_m", "height_m", "entries", "mode_count", "weyl_estimate",
                                   "modes_in_window", "nearest_mode_offset_Hz"),
            [(_g(r["radius_m"]), _g(r["height_m"]), r["modes"], r["mode_count"], _g(r["weyl_estimate"]),
              r.get("modes_in_window", ""), _g(r.get("nearest_mode_offset_Hz", math.nan))) for r in reports])
    out.manifest("cavity", vars_clean(args), {"total": time.perf_counter() - t_start}, {"sections": reports})
    table = []
    for r in reports:
        table.append((f"section {r['radius_m']} m x {r['height_m']} m", f"{r['mode_count']} modes "
                      f"(Weyl {r['weyl_estimate']:.0f})"))
        if "modes_in_window" in r:
            table.append(("  in window", f"{r['modes_in_window']} modes, nearest offset "
                                         f"{r['nearest_mode_offset_Hz'] / 1e6:.3f} MHz"))
    _emit(args, table, {"sections": reports})
    return EXIT_OK


# --- materials ------------------------------------------------------------------


def cmd_materials(args) -> int:
    lib = materials.builtin_library()
    rows, data = [], []
    for name in sorted(lib):
        m = lib[name]
        for t in materials.TemperatureClass:
            sig, eps = m.sigma(t), m.eps_r(t)
            delta = materials.skin_depth(sig, m.mu_r, args.f) if sig > 0 and m.kind.value == "conductor" else math.nan
            rs = materials.surface_resistance(sig, m.mu_r, args.f) if not math.isnan(delta) else math.nan
            tand = materials.loss_tangent(sig, eps, args.f) if m.kind.value == "dielectric" else math.nan
            rows.append((name, t.value, m.kind.value, _g(sig), _g(eps), _g(delta), _g(rs), _g(tand)))
            data.append({"name": name, "temperature": t.value, "kind": m.kind.value, "sigma": sig, "eps_r": eps,
                         "skin_depth": delta, "Rs": rs, "tan_delta": tand})
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(f"{'material':<8} {'temp':<5} {'kind':<10} {'sigma[S/m]':>11} {'eps_r':>7} {'delta[m]':>11} "
              f"{'Rs[ohm]':>10} {'tan_d':>10}")
        for r in rows:
            print(f"{r[0]:<8} {r[1]:<5} {r[2]:<10} {float(r[3]):>11.4g} {float(r[4]):>7.4g} {float(r[5]):>11.4g} "
                  f"{float(r[6]):>10.4g} {float(r[7]):>10.4g}")
    if args.out:
        out = Outputs(args.out)
        out.csv("materials.csv", ("material", "temperature", "kind", "sigma_S_per_m", "eps_r", "skin_depth_m",
                                  "Rs_ohm", "tan_delta"), rows)
        out.manifest("materials", vars_clean(args), {})
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def _positive(v: str) -> float:
    try:
        x = float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {v!r}") from None
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"must be positive: {v!r}")
    return x


def _at_least_one(v: str) -> float:
    x = _positive(v)
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v!r}")
    return x


def _float_list(v: str) -> list[float]:
    items = [s for s in v.replace(" ", "").split(",") if s]
    try:
        return [_positive(s) for s in items]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_sim_args(p):
    p.add_argument("--temp", default="cryo", choices=["cryo", "room", "both"], help="material temperature class")
    p.add_argument("--resolution", type=_positive, default=15.0, help="cells per wavelength at the mesh frequency")
    p.add_argument("--edge-refinement", type=_at_least_one, default=8.0,
                   help="spacing divisor at sheet and port ends")
    p.add_argument("--f-start", type=_positive, default=24e9)
    p.add_argument("--f-stop", type=_positive, default=32e9)
    p.add_argument("--n-freq", type=int, default=41)
    p.add_argument("--max-steps", type=int, default=200_000)
    p.add_argument("--full-s", action="store_true", help="two extra single-ended runs for the full 2x2 S matrix")
    p.add_argument("--gain-every", type=int, default=4, help="far-field transform every N-th sweep frequency")
    p.add_argument("--angle-step", type=_positive, default=2.0, help="far-field grid step in degrees")
    p.add_argument("--jobs", type=int, default=1, help="parallel simulation processes")
    p.add_argument("--out", default="fieldforge-out", help="output directory")
    p.add_argument("--json", action="store_true", help="print the summary as JSON")
    p.add_argument("--preset", default="onchip", choices=["onchip", "cryostat", "cryostat-scaled"])
    p.add_argument("--length", type=_positive, help="dipole length for the preset (m)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fieldforge", description=__doc__, epilog=EXIT_HELP,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"fieldforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="closed-form dipole and feed design", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--f0", type=_positive, required=True, help="design frequency (Hz)")
    p.add_argument("--eps-r", type=_at_least_one, default=11.45, help="substrate relative permittivity")
    p.add_argument("--z0", type=_positive, default=50.0, help="single-ended feed impedance (ohm)")
    p.add_argument("--h", type=_positive, default=presets.SIO2_THICKNESS, help="feed dielectric height (m)")
    p.add_argument("--eps-r-feed", type=_at_least_one, default=3.9, help="feed dielectric permittivity")
    p.add_argument("--wire-radius", type=_positive, help="oracle equivalent wire radius (m); default L/200")
    p.add_argument("--out", help="write CSV files to this directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="FDTD run of a scene file or preset", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("scene", nargs="?", help="scene JSON file (default: --preset)")
    p.add_argument("--si-thickness", type=_positive, help="Si thickness for the preset (m)")
    _add_sim_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-thickness", help="one simulate run per Si thickness", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--thickness", type=_float_list, required=True, help="comma-separated Si thicknesses (m)")
    _add_sim_args(p)
    p.set_defaults(func=cmd_sweep_thickness, scene=None)

    p = sub.add_parser("cavity", help="cryostat section modes, Q and mode density", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--radius", type=_positive, default=0.15, help="section radius (m)")
    p.add_argument("--section", type=_positive, nargs="+", default=[0.10, 0.15], help="section heights (m)")
    p.add_argument("--f-max", type=_positive, default=28.2e9, help="enumerate modes up to this frequency (Hz)")
    p.add_argument("--sigma-wall", type=_positive, default=5.9e7, help="wall conductivity (S/m)")
    p.add_argument("--focus", type=_positive, default=28e9, help="density report centre (Hz)")
    p.add_argument("--window", type=_positive, default=100e6, help="density half-window (Hz)")
    p.add_argument("--budget", type=_positive, default=ENUMERATION_BUDGET, help="maximum estimated mode count")
    p.add_argument("--out", default="fieldforge-cavity", help="output directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cavity)

    p = sub.add_parser("materials", help="material table with skin depth, Rs and loss tangent", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--f", type=_positive, default=28e9, help="evaluation frequency (Hz)")
    p.add_argument("--out", help="write materials.csv to this directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_materials)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n_freq", 2) < 1 or getattr(args, "jobs", 1) < 1 or getattr(args, "max_steps", 1) < 1:
        parser.error("--n-freq, --jobs and --max-steps must be positive")
    if getattr(args, "f_start", 0) and args.f_start > args.f_stop:
        parser.error("--f-start must not exceed --f-stop")
    try:
        return args.func(args)
    except CliError as exc:
        if exc.code == EXIT_USAGE:
            parser.error(str(exc))
        print(f"fieldforge: error: {exc}", file=sys.stderr)
        return exc.code
    except CellBudgetError as exc:
        print(f"fieldforge: error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SceneError, GridError) as exc:
        print(f"fieldforge: error: {exc}", file=sys.stderr)
        return EXIT_SCENE
    except postproc.EnergyAccountingError as exc:
        print(f"fieldforge: error: {exc}", file=sys.stderr)
        return EXIT_ENERGY


if __name__ == "__main__":
    sys.exit(main())
