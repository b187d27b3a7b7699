import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import waveguide_mode_truncated
from palh.errors import ConfigError, DomainError
from palh.transform1d import (
    WaveguideConfig,
    make_mode,
    per_mode_pml_solution,
    reflection_bounds,
    reflection_factor,
    stretch,
)


def test_mode_branches():
    cfg = WaveguideConfig(k=5.0)
    assert make_mode(cfg, 3).khat == 4.0
    assert make_mode(cfg, 13).khat == 12j
    m = make_mode(cfg, 5)
    assert m.cutoff and not m.propagating
    with pytest.raises(DomainError):
        make_mode(cfg, 0)


@pytest.mark.parametrize("kind", ["pml_n", "pml_inf", "pal"])
def test_stretch_continuous_at_interface(kind):
    cfg = WaveguideConfig(k=7.3, L=1.0, d=0.2, sigma0=3.0, kind=kind)
    s = stretch(cfg, np.array([0.3, 1.0, 1.0 + 1e-12]))
    assert s.S[0] == 0.3 and s.S[1] == 1.0
    assert abs(s.S[2] - 1.0) < 1e-10
    assert s.Sprime[1] == 1.0


def test_pml_n_values():
    cfg = WaveguideConfig(k=2.0, L=1.0, d=0.5, sigma0=4.0, abf_exponent=2, kind="pml_n")
    s = stretch(cfg, 1.25)
    z = 0.5
    assert complex(s.S) == pytest.approx(1.25 + 1j * 0.5 * 4.0 / (3 * 2.0) * z**3)
    assert complex(s.Sprime) == pytest.approx(1 + 1j * 2.0 * z**2)
    assert s.sd_finite and s.Sd == pytest.approx(1.5 + 1j * 0.5 * 4.0 / 6.0)


def test_singular_kinds_flag_infinite_end():
    s = stretch(WaveguideConfig(k=3.0, kind="pml_inf"), 0.5)
    assert s.sd_im_infinite and not s.sd_re_infinite
    s = stretch(WaveguideConfig(k=3.0, kind="pal"), 0.5)
    assert s.sd_im_infinite and s.sd_re_infinite
    assert np.isfinite(s.Sd)
    with pytest.raises(DomainError):
        stretch(WaveguideConfig(k=3.0, kind="pal"), 1.1)


def test_pal_w2_sprime_constant():
    cfg = WaveguideConfig(k=9.0, L=1.0, d=0.3, sigma0=2.0, sigma1=1.5, kind="pal")
    x = np.linspace(1.0, 1.3, 50, endpoint=False)[1:]
    s = stretch(cfg, x)
    w = (1.3 - x) / 0.3
    assert np.allclose(w**2 * s.Sprime, 1.5 + 2.0j / 9.0, rtol=1e-13)


def test_pal_imag_part_equals_integrated_absorption():
    # S_I = sigma0 (rho - L) / k equals (1/k) int_L^x sigma0 (d / (L + d - t))^2 dt
    cfg = WaveguideConfig(k=4.0, L=1.0, d=0.5, sigma0=2.0, sigma1=1.0, kind="pal")
    x = 1.3
    from scipy.integrate import quad

    val = quad(lambda t: 2.0 * (0.5 / (1.5 - t)) ** 2, 1.0, x)[0] / 4.0
    assert complex(stretch(cfg, x).S).imag == pytest.approx(val, rel=1e-12)


def test_reflection_zero_for_pal():
    cfg = WaveguideConfig(k=9.99, kind="pal")
    assert np.all(reflection_factor(cfg, make_mode(cfg, 4), np.linspace(0, 1, 7)) == 0)


def test_reflection_evanescent_value():
    cfg = WaveguideConfig(k=2.0, L=1.0, d=0.5, sigma0=1.0, kind="pml_n")
    R = reflection_factor(cfg, make_mode(cfg, 3), 1.0)
    # direct evaluation of (1 - e^{-2i kh x}) / (1 - e^{-2i kh S_d})
    kh = 1j * math.sqrt(5.0)
    Sd = 1.5 + 1j * 0.5 * 1.0 / (2 * 2.0)
    direct = (1 - np.exp(-2j * kh * 1.0)) / (1 - np.exp(-2j * kh * Sd))
    assert complex(R) == pytest.approx(direct, rel=1e-13)
    assert abs(R) == pytest.approx(math.exp(-2 * math.sqrt(5.0) * 0.5), rel=0.05)


def test_cutoff_mode_uses_linear_profile():
    cfg = WaveguideConfig(k=3.0, L=1.0, d=0.5, sigma0=2.0, kind="pml_n")
    m = make_mode(cfg, 3)
    x = np.array([0.2, 0.7])
    Sd = stretch(cfg, 0.0).Sd
    R = reflection_factor(cfg, m, x)
    assert np.allclose(R, x / Sd)
    u = per_mode_pml_solution(cfg, m, x, math.pi / 6)
    assert np.allclose(u, 1 - x / Sd)
    # the error u_exact - u_truncated = R e^{i kh x} with kh = 0
    assert np.allclose(1 - u, R)


def test_cutoff_reflection_is_limit_of_general_formula():
    cfg = WaveguideConfig(k=3.0, L=1.0, d=0.5, sigma0=2.0, kind="pml_n")
    Sd = complex(stretch(cfg, 0.0).Sd)
    x = np.array([0.2, 0.7])
    kh = 1e-7
    general = (1 - np.exp(-2j * kh * x)) / (1 - np.exp(-2j * kh * Sd))
    assert np.allclose(reflection_factor(cfg, make_mode(cfg, 3), x), general, rtol=1e-6)


def test_pml_inf_evanescent_has_no_limit():
    cfg = WaveguideConfig(k=3.0, kind="pml_inf")
    assert reflection_factor(cfg, make_mode(cfg, 2), 0.5) == 0
    with pytest.raises(DomainError):
        reflection_factor(cfg, make_mode(cfg, 5), 0.5)


@settings(max_examples=100, deadline=None)
@given(l=st.integers(1, 40), x=st.floats(0.01, 1.0), k=st.floats(0.5, 30.0), s0=st.floats(0.5, 20.0),
       n=st.integers(0, 3))
def test_reflection_bounds_sandwich(l, x, k, s0, n):
    cfg = WaveguideConfig(k=k, L=1.0, d=0.3, sigma0=s0, abf_exponent=n, kind="pml_n")
    m = make_mode(cfg, l)
    if m.cutoff:
        return
    lo, hi = reflection_bounds(cfg, m, x)
    R = abs(complex(reflection_factor(cfg, m, x)))
    assert lo * (1 - 1e-9) - 1e-300 <= R <= hi * (1 + 1e-9) + 1e-300


@pytest.mark.parametrize("l", [1, 2, 3, 4, 6, 9])
def test_truncated_solution_matches_sine_form(l):
    cfg = WaveguideConfig(k=4.5, L=1.0, d=0.4, sigma0=6.0, abf_exponent=1, kind="pml_n")
    m = make_mode(cfg, l)
    x = np.linspace(0.0, 1.4, 41)
    u = per_mode_pml_solution(cfg, m, x, math.pi / 2) / math.sin(l * math.pi / 2) if l % 2 else None
    if u is None:
        u = per_mode_pml_solution(cfg, m, x, math.pi / (2 * l)) / math.sin(math.pi / 2)
    ref = waveguide_mode_truncated(4.5, 1.0, 0.4, 6.0, 1, l, x)
    assert np.allclose(u, ref, atol=1e-12, rtol=1e-10)


def test_truncated_solution_consistency_with_reflection():
    cfg = WaveguideConfig(k=6.0, L=1.0, d=0.3, sigma0=5.0, kind="pml_n")
    for l in (2, 8):
        m = make_mode(cfg, l, 0.7 - 0.2j)
        x = np.linspace(0.05, 0.95, 9)
        y = 0.4
        lhs = per_mode_pml_solution(cfg, m, x, y)
        rhs = (1 - reflection_factor(cfg, m, x)) * m.gcoef * np.exp(1j * m.khat * x) * math.sin(l * y)
        assert np.allclose(lhs, rhs, rtol=1e-11, atol=1e-14)


def test_truncated_solution_boundary_values():
    cfg = WaveguideConfig(k=6.0, L=1.0, d=0.3, sigma0=5.0, kind="pml_n")
    m = make_mode(cfg, 4)
    assert abs(per_mode_pml_solution(cfg, m, 1.3, 1.0)) < 1e-14
    assert np.all(np.abs(per_mode_pml_solution(cfg, m, 0.5, np.array([0.0, math.pi]))) < 1e-14)


def test_truncated_solution_ode_residual():
    # (u'/S')'/S' + kh^2 u = 0 in the layer, checked by finite differences
    cfg = WaveguideConfig(k=6.0, L=1.0, d=0.3, sigma0=5.0, abf_exponent=2, kind="pml_n")
    m = make_mode(cfg, 3)
    h = 1e-4
    for x in (0.3, 1.1, 1.2):
        u = lambda s: per_mode_pml_solution(cfg, m, s, math.pi / 2 / 3)
        Sp = lambda s: stretch(cfg, s).Sprime
        flux = lambda s: (u(s + h / 2) - u(s - h / 2)) / h / Sp(s)
        res = (flux(x + h / 2) - flux(x - h / 2)) / h / Sp(x) + m.khat**2 * u(x)
        assert abs(res) < 1e-6 * max(1.0, abs(m.khat) ** 2)


def test_config_validation():
    with pytest.raises(ConfigError):
        WaveguideConfig(k=-1.0)
    with pytest.raises(ConfigError):
        WaveguideConfig(k=1.0, kind="abc")
    with pytest.raises(ConfigError):
        WaveguideConfig(k=1.0, abf_exponent=1.5)
