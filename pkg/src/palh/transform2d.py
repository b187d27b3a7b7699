"""
Complex compression of a star-shaped layer and the regular auxiliary scalars.

In the layer R1(theta) <= r < R2(theta) = rho R1(theta),

    T = (R2 - R1)(r - R1) / (R2 - r),      S = R1 + alpha T,  alpha = sigma1 + i sigma0,

and the auxiliaries t, tau, beta, gamma1, gamma2 are evaluated from rational
closed forms sharing the denominator R1 (R2 - r) + sigma1 (rho - 1) R1 (r - R1),
so they stay finite up to and including r = R2.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "TransformState",
    "compression",
    "transform_state",
    "identity_state",
    "pml_radial_stretch",
]


@dataclass
class TransformState:
    r: np.ndarray
    theta: np.ndarray
    R1: np.ndarray
    R1p: np.ndarray
    R2: np.ndarray
    alpha: complex
    sigma1: float
    T: np.ndarray
    T_r: np.ndarray
    T_theta: np.ndarray
    S: np.ndarray
    S_r: np.ndarray
    S_theta: np.ndarray
    t: np.ndarray
    tau: np.ndarray
    beta: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray


def _layer_arrays(layer, r, theta, allow_end):
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    R1, R1p, R2 = layer.radii(theta)
    R1 = np.asarray(R1, dtype=float)
    R1p = np.asarray(R1p, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    scale = np.maximum(R1, 1.0)
    lo = r < R1 - 1e-13 * scale
    hi = r > R2 if allow_end else r >= R2
    if np.any(lo) or np.any(hi):
        raise DomainError("point outside the layer R1 <= r < R2")
    r = np.clip(r, R1, R2)
    return r, theta, R1, R1p, R2


def compression(layer, r, theta):
    """Return (T, T_r, T_theta) inside the layer."""
    r, theta, R1, R1p, R2 = _layer_arrays(layer, r, theta, allow_end=False)
    rho = layer.rho
    gap = R2 - r
    T = (R2 - R1) * (r - R1) / gap
    T_r = ((rho - 1.0) * R1 / gap) ** 2
    T_theta = (1.0 - rho) * R1p * (R1 * gap + r * (r - R1)) / gap**2
    return T, T_r, T_theta


def transform_state(layer, r, theta, allow_end=False):
    """Full transformation state at layer points.

    With ``allow_end=True`` the point r = R2 is accepted; the singular
    fields (T, S and their partials) are then infinite there while the
    auxiliaries keep their finite limits.
    """
    r, theta, R1, R1p, R2 = _layer_arrays(layer, r, theta, allow_end)
    rho, s1 = layer.rho, layer.sigma1
    alpha = layer.alpha
    gap = R2 - r
    den = R1 * gap + s1 * (rho - 1.0) * R1 * (r - R1)
    t = R1 * gap / den
    tau = (rho - 1.0) * R1**2 * (r - R1) / den
    beta = R1 + (alpha - s1) * tau
    gamma1 = (rho - 1.0) ** 2 * R1**4 / den**2
    gamma2 = (1.0 - rho) * R1**2 * R1p * (R1 * gap + r * (r - R1)) / den**2
    with np.errstate(divide="ignore", invalid="ignore"):
        T = np.where(gap > 0, (R2 - R1) * (r - R1) / gap, np.inf)
        T_r = np.where(gap > 0, ((rho - 1.0) * R1 / gap) ** 2, np.inf)
        T_theta = np.where(gap > 0, (1.0 - rho) * R1p * (R1 * gap + r * (r - R1)) / gap**2, np.inf)
    S = R1 + alpha * T
    S_r = alpha * T_r
    S_theta = R1p + alpha * T_theta
    return TransformState(r, theta, R1, R1p, R2, alpha, s1, T, T_r, T_theta, S, S_r, S_theta,
                          t, tau, beta, gamma1, gamma2)


def identity_state(r, theta):
    """State of the identity map used for interior points (S = r)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    one = np.ones(r.shape)
    zero = np.zeros(r.shape)
    return TransformState(r, theta, r, zero, r, 1.0 + 0j, 1.0, zero, one, zero, r + 0j, one + 0j,
                          zero + 0j, one, zero, r + 0j, one, zero)


def pml_radial_stretch(kind, layer, r, exponent=1):
    """Complex radial stretch r~ and its derivative for circular PML layers.

    ``kind`` is ``"pml_n"`` (polynomial, with ``exponent`` n) or ``"pml_inf"``.
    The absorbing strength is ``layer.sigma0``.
    """
    if not layer.is_circle:
        raise DomainError("radial PML stretches need a circular layer")
    r = np.asarray(r, dtype=float)
    R1, R2 = layer.R1, layer.R2
    d = R2 - R1
    s0 = layer.sigma0
    if np.any(r < R1 - 1e-13 * R1) or np.any(r > R2) or (kind == "pml_inf" and np.any(r >= R2)):
        raise DomainError("point outside the PML layer (singular endpoint excluded)")
    if kind == "pml_n":
        n = int(exponent)
        z = np.clip((r - R1) / d, 0.0, None)
        rt = r + 1j * s0 * d / (n + 1) * z ** (n + 1)
        drt = 1.0 + 1j * s0 * z**n
    elif kind == "pml_inf":
        rt = r + 1j * s0 * np.log(d / (R2 - r))
        drt = 1.0 + 1j * s0 / (R2 - r)
    else:
        raise DomainError(f"unknown PML kind {kind!r}")
    return rt, drt
