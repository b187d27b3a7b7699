"""
Series solutions and per-mode solvers.

Waveguide: modes sin(l y) on (0, pi), solved in x on {(0, L), (L, L + d)}.
Circular scatterer: Fourier modes e^{i m theta}, solved in r on
{(R0, R1), (R1, R2)}.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import transform1d as t1
from .coeffs import substituted_coeffs, substitution_w
from .errors import ConfigError, DomainError
from .geometry import StarBoundary, StarLayer
from .sem1d import Element1D, solve_1d
from .specfun import bessel_j_all, hankel1_ratio
from .transform2d import pml_radial_stretch, transform_state

__all__ = [
    "ScatterConfig",
    "waveguide_exact",
    "waveguide_error_profile",
    "plane_wave_gcoefs",
    "waveguide_modal_solve",
    "mie_coefficients",
    "mie_exact",
    "circular_modal_solve",
    "CircularSolution",
    "circular_solve",
    "pal_layer_series",
    "decay_bound",
    "default_interior_degree",
    "default_mode_cutoff",
]


@dataclass(frozen=True)
class ScatterConfig:
    """Plane wave exp(i k x . (cos theta0, sin theta0)) hitting a sound-soft scatterer."""

    k: float
    scatterer: StarBoundary
    layer: StarLayer
    theta0: float = 0.0
    refraction: tuple = None

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ConfigError("k must be positive")
        th = np.linspace(0.0, 2.0 * math.pi, 2049)
        from .geometry import radius

        R0 = radius(self.scatterer, th)[0]
        R1 = radius(self.layer.inner, th)[0]
        if np.any(R0 >= R1):
            raise ConfigError("the scatterer must lie strictly inside the layer")
        if self.refraction is not None and len(self.refraction) != 4:
            raise ConfigError("refraction takes (c0, c1, x0, y0)")

    def refraction_index(self, x, y):
        """n(x) = 1 + c0 exp(-|x - x0|^2 / (2 c1^2)), or 1 when homogeneous."""
        x = np.asarray(x, dtype=float)
        if self.refraction is None:
            return np.ones(x.shape)
        c0, c1, x0, y0 = self.refraction
        return 1.0 + c0 * np.exp(-((x - x0) ** 2 + (np.asarray(y) - y0) ** 2) / (2.0 * c1 * c1))

    def boundary_data(self, theta):
        """g = -exp(i k R0(theta) cos(theta - theta0)) on the scatterer."""
        from .geometry import radius

        R0 = radius(self.scatterer, theta)[0]
        return -np.exp(1j * self.k * R0 * np.cos(np.asarray(theta) - self.theta0))


# ---------------------------------------------------------------- waveguide


def plane_wave_gcoefs(k, lmax):
    """g_l = i^l J_l(k), l = 1..lmax, mimicking a plane-wave expansion."""
    J = bessel_j_all(lmax, k)
    l = np.arange(1, lmax + 1)
    return (1j) ** l * J[1:]


def _modes(cfg, gcoefs):
    if isinstance(gcoefs, dict):
        items = sorted(gcoefs.items())
    else:
        items = list(enumerate(gcoefs, start=1))
    return [t1.make_mode(cfg, l, g) for l, g in items if g != 0]


def waveguide_exact(cfg, gcoefs, x, y):
    """Sum of g_l exp(i k_l x) sin(l y).

    ``gcoefs`` is a sequence indexed from l = 1 or a dict {l: g_l}.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for m in _modes(cfg, gcoefs):
        out += m.gcoef * np.exp(1j * m.khat * x) * np.sin(m.l * y)
    return out


def waveguide_error_profile(cfg, x, y, lmax=100):
    """Truncation error sum_l i^l J_l(k) R_l(x) exp(i k_l x) sin(l y) on (0, L)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    if cfg.kind == "pal":
        return out
    for m in _modes(cfg, plane_wave_gcoefs(cfg.k, lmax)):
        R = t1.reflection_factor(cfg, m, x)
        out += m.gcoef * R * np.exp(1j * m.khat * x) * np.sin(m.l * y)
    return out


def waveguide_modal_solve(cfg, mode, N, N1=None):
    """Spectral-element solve of one waveguide mode on {(0, L), (L, L + d)}.

    ``N`` is the layer degree and ``N1`` the degree on the physical segment
    (defaults to max(N, 60)).  The returned solution evaluates the physical
    field profile u_l(x); multiply by sin(l y) for the 2D mode.
    """
    N = int(N)
    if N < 2:
        raise DomainError("degree must be at least 2")
    N1 = max(N, 60) if N1 is None else int(N1)
    k, L, d = cfg.k, cfg.L, cfg.d
    lam = mode.l**2 - k * k
    inner = Element1D(0.0, L, N1, lambda x: (1.0, 0.0, 0.0, lam), tag="interior")
    if cfg.kind == "pal":
        # w = (L + d - x)/d and w^2 S' = alpha turn the layer form into
        # (w^2/alpha)(w v' - v/d)(w phi' - phi/d) + alpha (l^2 - k^2) v phi
        al = cfg.sigma1 + 1j * cfg.sigma0 / k

        def co(x):
            w = (L + d - x) / d
            return w**4 / al, -(w**3) / (al * d), -(w**3) / (al * d), w**2 / (al * d * d) + al * lam

        layer = Element1D(L, L + d, N, co, weight=lambda x: (L + d - x) / d, tag="layer")
        return solve_1d([inner, layer], mode.gcoef)

    def co(x):
        Sp = t1.stretch(cfg, x).Sprime
        return 1.0 / Sp, 0.0, 0.0, Sp * lam

    layer = Element1D(L, L + d, N, co, tag="layer")
    return solve_1d([inner, layer], mode.gcoef, 0.0)


# ---------------------------------------------------------------- circular


def default_mode_cutoff(k, R1):
    return int(math.ceil(k * R1))


def default_interior_degree(k, R1):
    """Resolution rule N1 >= 1.2 k R1 / 2 + 16."""
    return int(math.ceil(1.2 * k * R1 / 2.0 + 16))


def _mie_cutoff(kR0):
    return int(min(2000, math.ceil(kR0 + 12.0 * kR0 ** (1.0 / 3.0) + 30)))


def mie_coefficients(k, R0, theta0, M=None):
    """Coefficients c_m (m = -M..M) of the scattered field on r = R0.

    The field is U = sum_m c_m H_m(k r)/H_m(k R0) e^{i m theta}.
    """
    kR0 = k * R0
    M = _mie_cutoff(kR0) if M is None else int(M)
    J = bessel_j_all(M, kR0)
    m = np.arange(-M, M + 1)
    am = np.abs(m)
    return m, -(1j) ** am * J[am] * np.exp(-1j * m * theta0)


def mie_exact(cfg, r, theta):
    """Scattered field of a sound-soft circular cylinder of radius R0."""
    if not cfg.scatterer.is_circle:
        raise DomainError("the series solution needs a circular scatterer")
    R0 = cfg.scatterer.params[0] * cfg.scatterer.scale
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(r < R0 * (1 - 1e-14)):
        raise DomainError("r must be at least R0")
    r, theta = np.broadcast_arrays(r, theta)
    m, c = mie_coefficients(cfg.k, R0, cfg.theta0)
    ur, inv = np.unique(r.ravel(), return_inverse=True)
    ratio = hankel1_ratio(np.abs(m)[None, :], cfg.k * ur[:, None] + 0j, cfg.k * R0)
    coef = (c[None, :] * ratio)[inv]
    vals = np.sum(coef * np.exp(1j * np.outer(theta.ravel(), m)), axis=1)
    return vals.reshape(r.shape)


def circular_modal_solve(cfg, m, N1, N, kind="pal", exponent=1, essential_outer=False):
    """Radial spectral-element solve of Fourier mode ``m`` with unit data on r = R0.

    Interior form  int (u' phi' r + m^2 u phi / r - k^2 u phi r) dr;
    the layer uses the substituted coefficients (pal) or the stretched
    coefficients beta/alpha, alpha/beta (pml_n, pml_inf).
    """
    layer = cfg.layer
    if not (cfg.scatterer.is_circle and layer.is_circle):
        raise DomainError("modal solver needs circular scatterer and layer")
    k = cfg.k
    R0 = cfg.scatterer.params[0] * cfg.scatterer.scale
    R1, R2 = layer.R1, layer.R2
    m2 = float(m) ** 2

    inner = Element1D(R0, R1, int(N1), lambda r: (r, 0.0, 0.0, m2 / r - k * k * r), tag="interior")
    if kind == "pal":
        def co(r):
            st = transform_state(layer, r, 0.0)
            c = substituted_coeffs(st, layer, k)
            b11 = c.Bbreve[..., 0, 0]
            b22 = c.Bbreve[..., 1, 1]
            return b11 * r, c.p[..., 0] * r, c.q[..., 0] * r, (b22 * m2 / r**2 + c.nbreve) * r

        def weight(r):
            return substitution_w(transform_state(layer, r, 0.0, allow_end=True), k)

        lay = Element1D(R1, R2, int(N), co, weight=weight, tag="layer")
        return solve_1d([inner, lay], 1.0, 0.0 if essential_outer else None)
    if kind in ("pml_n", "pml_inf"):
        def co(r):
            rt, drt = pml_radial_stretch(kind, layer, r, exponent)
            al, be = drt, rt / r
            return be / al * r, 0.0, 0.0, (al / be * m2 / r**2 - k * k * al * be) * r

        lay = Element1D(R1, R2, int(N), co, tag="layer")
        return solve_1d([inner, lay], 1.0, 0.0)
    raise DomainError(f"unknown layer kind {kind!r}")


@dataclass
class CircularSolution:
    """Assembled Fourier-mode solution u(r, theta) = sum_m c_m psi_|m|(r) e^{i m theta}."""

    cfg: ScatterConfig
    modes: np.ndarray
    data: np.ndarray
    radial: dict
    kind: str
    residual: float = 0.0
    extras: dict = field(default_factory=dict)

    def radial_coefficients(self, r):
        """Array (len(r), n_modes) of c_m psi_|m|(r)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty((r.size, self.modes.size), dtype=complex)
        cache = {}
        for j, m in enumerate(self.modes):
            am = abs(int(m))
            if am not in cache:
                cache[am] = self.radial[am](r)
            out[:, j] = self.data[j] * cache[am]
        return out

    def __call__(self, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        r, theta = np.broadcast_arrays(r, theta)
        ur, inv = np.unique(r.ravel(), return_inverse=True)
        coef = self.radial_coefficients(ur)[inv]
        vals = np.sum(coef * np.exp(1j * np.outer(theta.ravel(), self.modes)), axis=1)
        return vals.reshape(r.shape)


def circular_solve(cfg, N1, N, kind="pal", M=None, exponent=1, workers=1):
    """Solve all Fourier modes |m| <= M for plane-wave incidence on a circle."""
    R0 = cfg.scatterer.params[0] * cfg.scatterer.scale
    M = default_mode_cutoff(cfg.k, cfg.layer.R1) if M is None else int(M)
    modes, data = mie_coefficients(cfg.k, R0, cfg.theta0, M)

    def one(am):
        return am, circular_modal_solve(cfg, am, N1, N, kind, exponent)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(one, range(M + 1)))
    else:
        results = [one(am) for am in range(M + 1)]
    radial = dict(results)
    res = max(s.residual for s in radial.values())
    return CircularSolution(cfg, modes, data, radial, kind, res)


def pal_layer_series(cfg, trace, r, theta, M=None):
    """Layer field sum_m a_m H_m(k S(r))/H_m(k R1) e^{i m theta}.

    ``trace`` holds samples of the solution on r = R1 at equispaced angles
    2 pi j / n; the coefficients a_m are read off by FFT.
    """
    layer = cfg.layer
    if not layer.is_circle:
        raise DomainError("series continuation needs a circular layer")
    trace = np.asarray(trace, dtype=complex)
    n = trace.size
    M = (n - 1) // 4 if M is None else int(M)
    if n < 4 * M:
        raise DomainError("need at least 4M trace samples")
    a = np.fft.fft(trace) / n
    m = np.arange(-M, M + 1)
    am = a[m % n]
    r = np.atleast_1d(np.asarray(r, dtype=float))
    st = transform_state(layer, r, 0.0)
    ratio = hankel1_ratio(np.abs(m)[None, :], cfg.k * st.S[:, None], cfg.k * layer.R1)
    coef = am[None, :] * ratio
    theta = np.asarray(theta, dtype=float)
    return coef @ np.exp(1j * np.multiply.outer(m, theta))


def decay_bound(layer, k, r):
    """Upper bound on the ratio of circle L^2 norms ||U(r)|| / ||U(R1)|| in the layer."""
    r = np.asarray(r, dtype=float)
    R1, R2 = layer.R1, layer.R2
    d = R2 - R1
    s0, s1 = layer.sigma0, layer.sigma1
    tau = (r - R1) / d
    if np.any(tau < 0) or np.any(tau > 1):
        raise DomainError("r must lie in [R1, R2]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = R1**2 / ((R1 * (1 - tau) + s1 * d * tau) ** 2 + (s0 * d * tau) ** 2)
        expo = -s0 * d * k * tau / (1 - tau) * np.sqrt(np.clip(1 - h * (1 - tau) ** 2, 0.0, None))
        out = np.where(tau < 1, np.exp(expo), 0.0)
    if out.ndim == 0:
        return float(out)
    return out
