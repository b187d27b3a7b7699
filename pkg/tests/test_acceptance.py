import math
import time

import numpy as np

from manufactured import patch_residual
from oracles import brute_coefficients
from palh.coeffs import substituted_coeffs
from palh.config import bundled_config, parse_config
from palh.experiments import non_oscillatory, run_circular_compare, run_scatter2d, run_thickness_table, \
    run_waveguide_compare
from palh.geometry import StarLayer, circle, circular_layer, ellipse, perturbed, radius, rectangle
from palh.modal import ScatterConfig, decay_bound, mie_exact, pal_layer_series
from palh.modal import waveguide_modal_solve
from palh.transform1d import WaveguideConfig, make_mode, per_mode_pml_solution, reflection_bounds, \
    reflection_factor
from palh.transform2d import transform_state
from verdicts import record


def _layer_points(layer, n, rng, avoid=()):
    th = rng.uniform(0, 2 * math.pi, n)
    for a in avoid:
        gap = np.abs((th - a + math.pi) % (2 * math.pi) - math.pi)
        th = np.where(gap < 1e-3, th + 2e-3, th)
    R1 = radius(layer.inner, th)[0]
    return R1 * (1 + (layer.rho - 1) * rng.uniform(0, 0.999, n)), th


def test_criterion_1_coefficient_oracle():
    rect = rectangle(1.5, 0.75)
    corners = [math.atan2(sy * 0.75, sx * 1.5) for sx in (1, -1) for sy in (1, -1)]
    cases = {
        "circle": (circular_layer(2.0, 2.4), ()),
        "perturbed": (StarLayer(perturbed(2.0, 0.3), 1.2), ()),
        "ellipse": (StarLayer(ellipse(1.88, 1.14), 1.2), ()),
        "rectangle": (StarLayer(rect, 17 / 15), corners),
    }
    rng = np.random.default_rng(2024)
    k = 37.0
    t0 = time.perf_counter()
    worst = 0.0
    for layer, avoid in cases.values():
        r, th = _layer_points(layer, 10_000, rng, avoid)
        R1, dR1 = radius(layer.inner, th)
        c = substituted_coeffs(transform_state(layer, r, th), layer, k)
        ref = brute_coefficients(R1, dR1, layer.rho, layer.sigma0, layer.sigma1, r, k)
        for got, want in zip((c.Bbreve, c.p, c.q, c.nbreve), ref):
            scale = np.abs(want).reshape(len(r), -1).max(axis=1)
            worst = max(worst, float((np.abs(got - want).reshape(len(r), -1).max(axis=1) / scale).max()))
    dt = time.perf_counter() - t0
    ok = record(1, "closed-form coefficients vs brute force", worst <= 1e-10 and dt < 10,
                f"max rel err {worst:.2e}, {dt:.1f} s")
    assert ok


def test_criterion_2_waveguide_mode_oracle():
    cfg = WaveguideConfig(k=5.0, L=1.0, d=0.5, sigma0=20.0, abf_exponent=1, kind="pml_n")
    x = np.linspace(0.0, 1.5, 301)
    xs = np.linspace(0.0, 1.0, 101)
    t0 = time.perf_counter()
    e_sol = e_R = 0.0
    inside = True
    kinds = set()
    for l in range(1, 21):
        m = make_mode(cfg, l)
        kinds.add("cutoff" if m.cutoff else "propagating" if m.propagating else "evanescent")
        sol = waveguide_modal_solve(cfg, m, 40)
        ref = per_mode_pml_solution(cfg, m, x, math.pi / (2 * l))
        e_sol = max(e_sol, float(np.abs(sol(x) - ref).max()))
        # R from the numeric field u = g e^{i kh x} (1 - R) where the incident mode is visible
        inc = m.gcoef * np.exp(1j * m.khat * xs) if not m.cutoff else np.full(xs.shape, m.gcoef, complex)
        keep = np.abs(inc) >= 1e-2
        R_num = 1.0 - sol(xs[keep]) / inc[keep]
        e_R = max(e_R, float(np.abs(R_num - reflection_factor(cfg, m, xs[keep])).max()))
        if not m.cutoff:
            lo, hi = reflection_bounds(cfg, m, xs[keep])
            a = np.abs(R_num)
            inside &= bool(np.all(a >= lo - 1e-10) and np.all(a <= hi + 1e-10))
    dt = time.perf_counter() - t0
    ok = e_sol <= 1e-8 and e_R <= 1e-6 and inside and len(kinds) == 3 and dt < 30
    record(2, "per-mode PML_n solve vs analytic solution", ok,
           f"field err {e_sol:.2e}, R err {e_R:.2e}, bounds {'hold' if inside else 'violated'}, {dt:.1f} s")
    assert ok


def test_criterion_3_waveguide_pal_exactness():
    cfg = bundled_config("waveguide")
    cfg["problem"]["thickness"] = [0.1]
    t0 = time.perf_counter()
    reps = run_waveguide_compare(cfg)
    dt = time.perf_counter() - t0
    pal = reps[("pal", 0.1)]
    best = min(e for N, e in zip(pal.degrees, pal.max_errors) if N <= 48)
    floors = {k: min(reps[(k, 0.1)].max_errors) for k in ("pml_n", "pml_inf")}
    ok = best <= 1e-9 and all(f > 1e-2 for f in floors.values()) and dt < 120
    record(3, "waveguide PAL below 1e-9 by N=48, PMLs plateau", ok,
           f"PAL best {best:.2e}, PML_n floor {floors['pml_n']:.2e}, PML_inf floor {floors['pml_inf']:.2e}, "
           f"{dt:.1f} s")
    assert ok


def test_criterion_4_circular_scattering():
    t0 = time.perf_counter()
    c50 = parse_config("[problem]\nk = 50\n[discretization]\nkinds = pal\ndegrees = 30\n"
                       "interior_degree = 160\nmodes = 100\n", "circular_compare")
    e50 = run_circular_compare(c50, workers=1)[("pal", 50.0)].error_at(30)
    c100 = bundled_config("circular")
    c100["problem"]["k"] = [100.0]
    c100["discretization"]["degrees"] = [20]
    reps = run_circular_compare(c100, workers=1)
    e100 = {kind: reps[(kind, 100.0)].error_at(20) for kind in ("pal", "pml_n", "pml_inf")}
    dt = time.perf_counter() - t0
    ok = e50 <= 1e-9 and e100["pal"] < min(e100["pml_n"], e100["pml_inf"]) and dt < 300
    record(4, "circular PAL vs Mie series", ok,
           f"k=50 N=30 {e50:.2e}; k=100 N=20 PAL {e100['pal']:.2e}, PML_inf {e100['pml_inf']:.2e}, "
           f"PML_n {e100['pml_n']:.2e}, {dt:.1f} s")
    assert ok


def test_criterion_5_thickness_table():
    t0 = time.perf_counter()
    cfg = bundled_config("thickness")
    out = {}
    for k, d in ((10.0, 1.0), (50.0, 0.1), (10.0, 0.001)):
        cfg["problem"]["k"] = [k]
        cfg["problem"]["thickness"] = [d]
        out[(k, d)] = run_thickness_table(cfg, workers=1).error(k, d)
    dt = time.perf_counter() - t0
    thin = out[(10.0, 0.001)]
    ok = out[(10.0, 1.0)] <= 1e-10 and out[(50.0, 0.1)] <= 1e-9 and 1.69e-3 <= thin <= 1.69e-1 and dt < 300
    record(5, "thickness table subset", ok,
           f"k=10 d=1 {out[(10.0, 1.0)]:.2e}, k=50 d=0.1 {out[(50.0, 0.1)]:.2e}, k=10 d=0.001 {thin:.2e}, "
           f"{dt:.1f} s")
    assert ok


def test_criterion_6_decay_bound():
    worst = -np.inf
    for k in (10.0, 50.0):
        cfg = ScatterConfig(k, circle(1.0), circular_layer(2.0, 2.2), 0.0)
        n = 4 * int(2 * k) + 8
        th = 2 * math.pi * np.arange(n) / n
        r = np.linspace(2.0, 2.2, 51)[:-1]
        ser = pal_layer_series(cfg, mie_exact(cfg, 2.0, th), r, th)
        norms = np.sqrt(np.mean(np.abs(ser) ** 2, axis=1))
        worst = max(worst, float((norms - decay_bound(cfg.layer, k, r) * norms[0]).max()))
    ok = record(6, "layer field below decay bound", worst <= 1e-12, f"max excess {worst:.2e}")
    assert ok


def test_criterion_7_transformed_operator():
    res, load = patch_residual()
    ok = record(7, "manufactured weak residual on a curved patch", res <= 1e-8,
                f"residual {res:.2e}, load scale {load:.2e}")
    assert ok


SCATTER_CASES = ("scatter_hexstar_circle", "scatter_hexstar_star", "scatter_peanut_ellipse",
                 "scatter_peanut_rectangle")


def test_criterion_8_star_shaped_self_convergence():
    lines = []
    ok = True
    t0 = time.perf_counter()
    for name in SCATTER_CASES:
        res = run_scatter2d(bundled_config(name))
        errs = np.array(res.report.max_errors)
        ups = int(np.sum(np.diff(errs) >= 0))
        slope = res.report.extras["slope"]
        smooth = all(non_oscillatory(e) for e in res.report.extras["layer_extrema"].values())
        good = ups <= 1 and slope <= -0.4 and smooth
        ok &= good
        lines.append(f"{name.removeprefix('scatter_')}: slope {slope:.3f}, up-steps {ups}, "
                     f"{'smooth' if smooth else 'oscillatory'}, {'pass' if good else 'fail'}")
    dt = time.perf_counter() - t0
    record(8, "star-shaped self-convergence", ok, "; ".join(lines) + f", {dt:.0f} s")
    assert ok
