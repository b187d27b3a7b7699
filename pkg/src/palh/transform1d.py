"""
Waveguide layer stretchings and the closed-form truncation-error oracles.

The waveguide occupies (0, inf) x (0, pi) and is truncated at x = L + d.
Three kinds of layer live on (L, L + d):

``pml_n``   polynomial absorbing function, S_d finite;
``pml_inf`` unbounded absorbing function, Im S_d infinite;
``pal``     complex compression, both parts of S_d infinite.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "KINDS",
    "WaveguideConfig",
    "Mode",
    "Stretch1D",
    "make_mode",
    "stretch",
    "reflection_factor",
    "reflection_bounds",
    "per_mode_pml_solution",
]

KINDS = ("pml_n", "pml_inf", "pal")


@dataclass(frozen=True)
class WaveguideConfig:
    k: float
    L: float = 1.0
    d: float = 0.1
    sigma0: float = 1.0
    sigma1: float = 1.0
    abf_exponent: int = 1
    kind: str = "pal"

    def __post_init__(self):
        for name in ("k", "L", "d", "sigma0", "sigma1"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"{name} must be a positive number, got {val!r}")
        if int(self.abf_exponent) != self.abf_exponent or self.abf_exponent < 0:
            raise ConfigError("abf_exponent must be a nonnegative integer")
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")

    @property
    def length(self):
        return self.L + self.d

    @property
    def integer_k(self):
        return float(self.k).is_integer()


@dataclass(frozen=True)
class Mode:
    l: int
    khat: complex
    gcoef: complex = 1.0

    @property
    def cutoff(self):
        return self.khat == 0

    @property
    def propagating(self):
        return self.khat.imag == 0 and self.khat.real > 0


def make_mode(cfg, l, gcoef=1.0):
    """Mode ``l`` with k_hat = sqrt(k^2 - l^2) on the evanescent branch i sqrt(l^2 - k^2)."""
    l = int(l)
    if l < 1:
        raise DomainError("mode index must be a positive integer")
    k = float(cfg.k)
    if l < k:
        khat = complex(math.sqrt(k * k - l * l), 0.0)
    elif l > k:
        khat = complex(0.0, math.sqrt(l * l - k * k))
    else:
        khat = 0j
    return Mode(l, khat, complex(gcoef))


@dataclass(frozen=True)
class Stretch1D:
    """S(x), S'(x) and the end value S_d = S(L + d).

    Infinite parts of S_d are flagged, never stored as float infinities;
    the corresponding component of ``Sd`` is zero.
    """

    S: np.ndarray
    Sprime: np.ndarray
    Sd: complex
    sd_re_infinite: bool = False
    sd_im_infinite: bool = False

    @property
    def sd_finite(self):
        return not (self.sd_re_infinite or self.sd_im_infinite)


def _end_value(cfg):
    k, L, d, s0, n = cfg.k, cfg.L, cfg.d, cfg.sigma0, cfg.abf_exponent
    if cfg.kind == "pml_n":
        return complex(L + d, d * s0 / ((n + 1) * k)), False, False
    if cfg.kind == "pml_inf":
        return complex(L + d, 0.0), False, True
    return 0j, True, True


def stretch(cfg, x):
    """Evaluate the layer stretching at ``x`` in (0, L + d)."""
    x = np.asarray(x, dtype=float)
    k, L, d, s0, s1 = cfg.k, cfg.L, cfg.d, cfg.sigma0, cfg.sigma1
    end = L + d
    singular = cfg.kind in ("pml_inf", "pal")
    if np.any(x < 0) or np.any(x > end) or (singular and np.any(x >= end)):
        raise DomainError("x outside the stretching domain (singular endpoint excluded)")
    inl = x > L
    xi = np.where(inl, x, L)
    if cfg.kind == "pml_n":
        n = cfg.abf_exponent
        z = (xi - L) / d
        S = xi + 1j * d * s0 / ((n + 1) * k) * z ** (n + 1)
        Sp = 1.0 + 1j * s0 / k * z**n
    elif cfg.kind == "pml_inf":
        gap = end - xi
        S = xi + 1j * d * s0 / k * np.log(d / gap)
        Sp = 1.0 + 1j * s0 / k * d / gap
    else:
        gap = end - xi
        rho = L + d * (xi - L) / gap
        drho = (d / gap) ** 2
        alpha = s1 + 1j * s0 / k
        S = L + alpha * (rho - L)
        Sp = alpha * drho
    S = np.where(inl, S, x + 0j)
    Sp = np.where(inl, Sp, 1.0 + 0j)
    Sd, re_inf, im_inf = _end_value(cfg)
    return Stretch1D(S, Sp, Sd, re_inf, im_inf)


def reflection_factor(cfg, mode, x):
    """Per-mode reflection factor R_l(x) on the physical segment (0, L).

    Zero for the compression layer.  For an unbounded absorbing function and
    an evanescent mode the limit does not exist and a DomainError is raised.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > cfg.L):
        raise DomainError("reflection factor is defined on [0, L]")
    if cfg.kind == "pal":
        return np.zeros(x.shape, dtype=complex)
    st = stretch(cfg, cfg.L)
    kh = mode.khat
    if mode.cutoff:
        if st.sd_im_infinite:
            return np.zeros(x.shape, dtype=complex)
        # limit kh -> 0 of the general formula; consistent with u_exact - u = R e^{i kh x}
        return x / st.Sd + 0j
    if st.sd_im_infinite:
        if mode.propagating:
            return np.zeros(x.shape, dtype=complex)
        raise DomainError("reflection factor has no limit for evanescent modes with Im S_d infinite")
    # written with factors of modulus <= 1 in the denominator
    e = np.exp(2j * kh * st.Sd)
    return (1.0 - np.exp(-2j * kh * x)) * e / (e - 1.0)


def reflection_bounds(cfg, mode, x):
    """Lower and upper bounds on |R_l(x)| for a finite-end PML (non-cutoff modes)."""
    x = np.asarray(x, dtype=float)
    st = stretch(cfg, cfg.L)
    if not st.sd_finite or mode.cutoff:
        raise DomainError("bounds need a finite S_d and a non-cutoff mode")
    kh = mode.khat
    if mode.propagating:
        kr = kh.real
        top = 2.0 * np.abs(np.sin(kr * x))
        g = np.exp(2.0 * kr * st.Sd.imag)
        return top / (g + 1.0), top / (g - 1.0)
    kap = kh.imag
    top = np.expm1(2.0 * kap * x)
    g = np.exp(2.0 * kap * st.Sd.real)
    return top / (g + 1.0), top / (g - 1.0)


def per_mode_pml_solution(cfg, mode, x, y):
    """Analytic two-domain solution U_{p,l}(x, y) of the truncated problem.

    Valid for the finite-end PML; for the cutoff mode the profile is
    linear in S, 1 - S/S_d.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x >= cfg.length):
        x = np.minimum(x, cfg.length)
    st_all = stretch(cfg, np.where(x < cfg.length, x, cfg.L))
    S = np.where(x < cfg.length, st_all.S, np.nan)
    if not st_all.sd_finite:
        raise DomainError("analytic truncated solution needs a finite S_d")
    Sd = st_all.Sd
    S = np.where(np.isnan(S), Sd, S)
    kh = mode.khat
    if mode.cutoff:
        prof = 1.0 - S / Sd
    else:
        den = 1.0 - np.exp(2j * kh * Sd)
        if abs(den) < 1e-14:
            raise DomainError("degenerate end value: resonant S_d")
        prof = np.exp(1j * kh * S) * (1.0 - np.exp(2j * kh * (Sd - S))) / den
    return mode.gcoef * prof * np.sin(mode.l * y)
