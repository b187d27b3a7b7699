"""
Experiment drivers: error-vs-degree sweeps, the thickness table and the
star-shaped scattering runs, with CSV / JSON / field-dump emission.
"""

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import sem2d
from .config import ExperimentConfig
from .errors import ConfigError
from .geometry import StarLayer, circle, radius
from .modal import (
    ScatterConfig,
    _mie_cutoff,
    circular_solve,
    default_interior_degree,
    default_mode_cutoff,
    mie_exact,
    waveguide_exact,
    waveguide_modal_solve,
)
from .transform1d import WaveguideConfig, make_mode

__all__ = [
    "CSV_HEADER",
    "SolveReport",
    "ThicknessTable",
    "ScatterResult",
    "suggest_thickness",
    "worker_count",
    "count_extrema",
    "layer_profile_extrema",
    "non_oscillatory",
    "convergence_slope",
    "run_waveguide_compare",
    "run_circular_compare",
    "run_thickness_table",
    "run_scatter2d",
    "scatter_config",
]

CSV_HEADER = ("N", "max_error", "l2_error", "seconds")


@dataclass
class SolveReport:
    """Error-vs-degree rows (N, max_error, l2_error, seconds), sorted by N."""

    label: str
    params: dict
    rows: list = field(default_factory=list)
    residual: float = 0.0
    extras: dict = field(default_factory=dict)

    def add(self, N, max_error, l2_error, seconds, residual=0.0):
        self.rows.append((int(N), float(max_error), float(l2_error), float(seconds)))
        self.rows.sort(key=lambda r: r[0])
        self.residual = max(self.residual, float(residual))

    @property
    def degrees(self):
        return [r[0] for r in self.rows]

    @property
    def max_errors(self):
        return [r[1] for r in self.rows]

    def error_at(self, N):
        for row in self.rows:
            if row[0] == N:
                return row[1]
        raise KeyError(N)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for N, e, l2, s in self.rows:
                w.writerow([N, "%.17g" % e, "%.17g" % l2, "%.17g" % s])

    def to_dict(self):
        return {"label": self.label, "params": self.params, "columns": list(CSV_HEADER),
                "rows": [list(r) for r in self.rows], "residual": self.residual, "extras": self.extras}


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(f"not serialisable: {type(v)}")


def suggest_thickness(k, R1):
    """Rule-of-thumb layer thickness d = 10 / (k R1); a suggestion only."""
    if k <= 0 or R1 <= 0:
        raise ConfigError("k and R1 must be positive")
    return 10.0 / (k * R1)


def worker_count(default=1):
    """Worker cap from PALH_THREADS (falls back to ``default``)."""
    raw = os.environ.get("PALH_THREADS")
    if raw is None or raw.strip() == "":
        return max(1, int(default))
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"PALH_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"PALH_THREADS must be a positive integer, got {raw!r}")
    return n


def _errors(num, ref):
    e = np.abs(np.asarray(num) - np.asarray(ref))
    return float(e.max()), float(np.sqrt(np.mean(e**2)))


def convergence_slope(degrees, errors):
    """Least-squares slope of log10(error) against N."""
    N = np.asarray(degrees, dtype=float)
    e = np.log10(np.maximum(np.asarray(errors, dtype=float), 1e-300))
    return float(np.polyfit(N, e, 1)[0])


def count_extrema(values, rel_tol=1e-6):
    """Number of strict interior local extrema of a sampled profile.

    Differences below ``rel_tol`` times the profile range are treated as flat
    so rounding noise on plateaus is not counted.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return 0
    scale = np.ptp(v)
    if scale == 0:
        return 0
    dv = np.diff(v)
    sgn = np.where(np.abs(dv) <= rel_tol * scale, 0, np.sign(dv))
    sgn = sgn[sgn != 0]
    return int(np.sum(sgn[1:] != sgn[:-1]))


# ---------------------------------------------------------------- waveguide


def _wg_config(cfg, kind, d):
    p = cfg["problem"]
    if kind == "pal":
        # alpha = sigma1 + i sigma0 (the solver's S_I carries a 1/k)
        return WaveguideConfig(p["k"], p["length"], d, cfg.get("pal", "sigma0") * p["k"], cfg.get("pal", "sigma1"),
                               1, "pal")
    return WaveguideConfig(p["k"], p["length"], d, cfg.get("pml", "sigma0"), 1.0, cfg.get("pml", "exponent"), kind)


def run_waveguide_compare(cfg: ExperimentConfig, out_dir=None):
    """Error of each layer kind against the exact modal series, per thickness."""
    p = cfg["problem"]
    disc = cfg["discretization"]
    samp = cfg["sampling"]
    source = {int(l): g for l, g in p["source"].items()}
    x = np.linspace(0.0, p["length"], samp["nx"])
    y = np.linspace(0.0, math.pi, samp["ny"])
    reports = {}
    for d in p["thickness"]:
        for kind in disc["kinds"]:
            wc = _wg_config(cfg, kind, d)
            exact = waveguide_exact(wc, source, x[:, None], y[None, :])
            rep = SolveReport(f"{kind}_d{d:g}", {"kind": kind, "d": d, "k": wc.k, "L": wc.L, "sigma0": wc.sigma0,
                                                  "sigma1": wc.sigma1, "exponent": wc.abf_exponent})
            for N in disc["degrees"]:
                t0 = time.perf_counter()
                u = np.zeros_like(exact)
                res = 0.0
                for l, g in source.items():
                    sol = waveguide_modal_solve(wc, make_mode(wc, l, g), N, disc["interior_degree"])
                    u += sol(x)[:, None] * np.sin(l * y)[None, :]
                    res = max(res, sol.residual)
                dt = time.perf_counter() - t0
                rep.add(N, *_errors(u, exact), dt, res)
            reports[(kind, d)] = rep
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for (kind, d), rep in reports.items():
            rep.write_csv(os.path.join(out_dir, f"waveguide_{kind}_d{d:g}.csv"))
        _write_json(os.path.join(out_dir, "waveguide_report.json"),
                    {"config": cfg.echo(), "reports": [r.to_dict() for r in reports.values()]})
    return reports


# ---------------------------------------------------------------- circular


def _pick(val, k, auto):
    if val == "auto":
        return auto
    if isinstance(val, dict):
        return int(val[k])
    return int(val)


def _polar_grid(R0, R1, nr, nt):
    r = np.linspace(R0, R1, nr)
    th = np.linspace(0.0, 2 * math.pi, nt, endpoint=False)
    return np.meshgrid(r, th, indexing="ij")


def run_circular_compare(cfg: ExperimentConfig, out_dir=None, workers=None):
    """PAL vs PML_n vs PML_inf on the circular problem against the series solution."""
    p = cfg["problem"]
    disc = cfg["discretization"]
    samp = cfg["sampling"]
    workers = worker_count() if workers is None else workers
    reports = {}
    for k in p["k"]:
        rr, tt = _polar_grid(p["r0"], p["r1"], samp["nr"], samp["ntheta"])
        base = ScatterConfig(k, circle(p["r0"]), StarLayer(circle(p["r1"]), p["r2"] / p["r1"]), p["theta0"])
        exact = mie_exact(base, rr, tt)
        N1 = _pick(disc["interior_degree"], k, default_interior_degree(k, p["r1"]))
        M = _pick(disc["modes"], k, default_mode_cutoff(k, p["r1"]))
        for kind in disc["kinds"]:
            if kind == "pal":
                s0, s1 = cfg.get("pal", "sigma0"), cfg.get("pal", "sigma1")
            else:
                s0, s1 = cfg.get("pml", f"{kind}_sigma0")[k], 1.0
            sc = ScatterConfig(k, circle(p["r0"]), StarLayer(circle(p["r1"]), p["r2"] / p["r1"], s0, s1),
                               p["theta0"])
            rep = SolveReport(f"{kind}_k{k:g}", {"kind": kind, "k": k, "N1": N1, "M": M, "sigma0": s0,
                                                  "sigma1": s1, "R0": p["r0"], "R1": p["r1"], "R2": p["r2"]})
            for N in disc["degrees"]:
                t0 = time.perf_counter()
                sol = circular_solve(sc, N1, N, kind, M, cfg.get("pml", "exponent"), workers)
                u = sol(rr, tt)
                rep.add(N, *_errors(u, exact), time.perf_counter() - t0, sol.residual)
            reports[(kind, k)] = rep
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for (kind, k), rep in reports.items():
            rep.write_csv(os.path.join(out_dir, f"circular_{kind}_k{k:g}.csv"))
        _write_json(os.path.join(out_dir, "circular_report.json"),
                    {"config": cfg.echo(), "reports": [r.to_dict() for r in reports.values()]})
    return reports


# ---------------------------------------------------------------- thickness


@dataclass
class ThicknessTable:
    ks: list
    ds: list
    errors: np.ndarray
    seconds: np.ndarray
    params: dict = field(default_factory=dict)

    def error(self, k, d):
        return float(self.errors[self.ks.index(k), self.ds.index(d)])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k"] + [f"d={d:g}" for d in self.ds])
            for i, k in enumerate(self.ks):
                w.writerow([f"{k:g}"] + ["%.17g" % e for e in self.errors[i]])

    def to_dict(self):
        return {"k": self.ks, "d": self.ds, "max_error": self.errors.tolist(), "seconds": self.seconds.tolist(),
                "params": self.params}


def thickness_modes(k, R0, R1):
    """Mode cutoff covering both the layer (k R1) and the data decay (J_M(k R0) below 1e-16)."""
    return max(default_mode_cutoff(k, R1), _mie_cutoff(k * R0))


def run_thickness_table(cfg: ExperimentConfig, out_dir=None, workers=None):
    """Max PAL error in the interior for each (k, d) pair at fixed layer degree."""
    p = cfg["problem"]
    disc = cfg["discretization"]
    samp = cfg["sampling"]
    workers = worker_count() if workers is None else workers
    ks, ds = list(p["k"]), list(p["thickness"])
    err = np.zeros((len(ks), len(ds)))
    secs = np.zeros_like(err)
    used = {}
    rr, tt = _polar_grid(p["r0"], p["r1"], samp["nr"], samp["ntheta"])
    for i, k in enumerate(ks):
        N1 = _pick(disc["interior_degree"], k, default_interior_degree(k, p["r1"]))
        M = _pick(disc["modes"], k, thickness_modes(k, p["r0"], p["r1"]))
        used[f"{k:g}"] = {"N1": N1, "M": M}
        base = ScatterConfig(k, circle(p["r0"]), StarLayer(circle(p["r1"]), 2.0), p["theta0"])
        exact = mie_exact(base, rr, tt)
        for j, d in enumerate(ds):
            lay = StarLayer(circle(p["r1"]), (p["r1"] + d) / p["r1"], cfg.get("pal", "sigma0"),
                            cfg.get("pal", "sigma1"))
            sc = ScatterConfig(k, circle(p["r0"]), lay, p["theta0"])
            t0 = time.perf_counter()
            sol = circular_solve(sc, N1, disc["layer_degree"], "pal", M, 1, workers)
            err[i, j] = _errors(sol(rr, tt), exact)[0]
            secs[i, j] = time.perf_counter() - t0
    table = ThicknessTable(ks, ds, err, secs, {"N": disc["layer_degree"], "per_k": used})
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        table.write_csv(os.path.join(out_dir, "thickness_table.csv"))
        _write_json(os.path.join(out_dir, "thickness_report.json"), {"config": cfg.echo(), "table": table.to_dict()})
    return table


# ---------------------------------------------------------------- star-shaped scattering


def scatter_config(cfg: ExperimentConfig):
    """ScatterConfig described by a scatter2d experiment config."""
    p = cfg["problem"]
    med = cfg["medium"]
    inner = p["layer"].scaled(p["layer_scale"]) if p["layer_scale"] != 1 else p["layer"]
    layer = StarLayer(inner, p["rho"], cfg.get("pal", "sigma0"), cfg.get("pal", "sigma1"))
    refr = None
    if med["refraction"] == "gaussian":
        refr = (med["c0"], med["c1"], med["x0"], med["y0"])
    try:
        return ScatterConfig(p["k"], p["scatterer"], layer, p["theta0"], refr)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class ScatterResult:
    report: SolveReport
    reference: object
    profiles: dict
    samples: tuple


AXIS_ANGLES = {"x+": 0.0, "y+": 0.5 * math.pi, "x-": math.pi, "y-": 1.5 * math.pi}


def _axis_profiles(sol, n):
    """Profiles along the four half-axes from the scatterer to the outer layer edge."""
    cfg = sol.mesh.cfg
    out = {}
    for name, th in AXIS_ANGLES.items():
        R0 = float(radius(cfg.scatterer, th)[0])
        R1, _, R2 = (float(v) for v in cfg.layer.radii(th))
        # n samples across the interior part and n across the layer
        r = np.concatenate([np.linspace(R0, R1, n), np.linspace(R1, R2, n)[1:]])
        thv = np.full(r.size, th)
        out[name] = {"r": r, "theta": thv, "R1": R1, "R2": R2, "u": sol.evaluate(r, thv),
                     "v": sol.evaluate(r, thv, physical=False)}
    return out


def layer_profile_extrema(profile, rel_floor=1e-4):
    """Extrema counts of Re v, Im v and |u| on the layer part of a profile.

    Re v and Im v are only examined where |v| is at least ``rel_floor``
    times its inner-edge value; below that the profile is discretisation
    noise around zero.
    """
    sel = profile["r"] >= profile["R1"]
    v = profile["v"][sel]
    u = profile["u"][sel]
    keep = np.abs(v) >= rel_floor * abs(v[0])
    return {"re_v": count_extrema(v[keep].real), "im_v": count_extrema(v[keep].imag),
            "abs_u": count_extrema(np.abs(u))}


def non_oscillatory(extrema):
    """|u| decays monotonically and Re v, Im v turn at most once."""
    return extrema["abs_u"] == 0 and extrema["re_v"] <= 1 and extrema["im_v"] <= 1


def _sample_points(cfg, n, seed):
    rng = np.random.default_rng(seed)
    th = rng.uniform(0.0, 2 * math.pi, n)
    R0 = radius(cfg.scatterer, th)[0]
    R1 = radius(cfg.layer.inner, th)[0]
    r = R0 + rng.uniform(0.0, 1.0, n) * (R1 - R0)
    return r, th


def run_scatter2d(cfg: ExperimentConfig, out_dir=None, label="scatter"):
    """Self-convergence sweep in the layer degree against a high-degree reference."""
    sc = scatter_config(cfg)
    disc = cfg["discretization"]
    samp = cfg["sampling"]
    mesh_kw = {"n_sectors": disc["sectors"], "interior_rings": disc["interior_rings"],
               "layer_rings": disc["layer_rings"], "N1": disc["interior_degree"]}
    r, th = _sample_points(sc, samp["points"], samp["seed"])
    t0 = time.perf_counter()
    ref = sem2d.solve_scattering(sc, N=disc["reference_degree"], **mesh_kw)
    ref_time = time.perf_counter() - t0
    uref = ref.evaluate(r, th)
    rep = SolveReport(label, {**cfg.echo(), "ndof_reference": ref.mesh.ndof,
                              "elements": len(ref.mesh.elements)})
    rep.extras["reference_seconds"] = ref_time
    rep.extras["reference_max_abs"] = float(np.abs(uref).max())
    rep.residual = ref.residual
    for N in disc["degrees"]:
        t0 = time.perf_counter()
        sol = sem2d.solve_scattering(sc, N=N, **mesh_kw)
        u = sol.evaluate(r, th)
        rep.add(N, *_errors(u, uref), time.perf_counter() - t0, sol.residual)
    profiles = _axis_profiles(ref, samp["profile_points"])
    rep.extras["layer_extrema"] = {name: layer_profile_extrema(pr) for name, pr in profiles.items()}
    rep.extras["non_oscillatory"] = all(non_oscillatory(e) for e in rep.extras["layer_extrema"].values())
    rep.extras["slope"] = convergence_slope(rep.degrees, rep.max_errors)
    result = ScatterResult(rep, ref, profiles, (r, th))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        rep.write_csv(os.path.join(out_dir, f"{label}_errors.csv"))
        _write_json(os.path.join(out_dir, f"{label}_report.json"), rep.to_dict())
        for name, pr in profiles.items():
            sem2d.write_field_dump(os.path.join(out_dir, f"{label}_profile_{name}.txt"), ref, pr["r"], pr["theta"])
        _field_dump(os.path.join(out_dir, f"{label}_field.txt"), ref, samp["dump_nr"], samp["dump_ntheta"])
    return result


def _field_dump(path, sol, nr, nt):
    cfg = sol.mesh.cfg
    th = np.linspace(0.0, 2 * math.pi, nt, endpoint=False)
    R0 = radius(cfg.scatterer, th)[0]
    R2 = cfg.layer.radii(th)[2]
    s = np.linspace(0.0, 1.0, nr)
    r = R0[None, :] + s[:, None] * (R2 - R0)[None, :]
    sem2d.write_field_dump(path, sol, r, np.broadcast_to(th, r.shape))
