"""
Transformed media and the substituted weak-form coefficients.

For u = w v in the layer, the form (C grad u, grad psi) - k^2 (n u, psi)
with psi = w phi becomes, in polar components grad~ = (d_r, d_theta / r),

    (B~ grad~ v, grad~ phi) + (p . grad~ v, phi) + (v, q* . grad~ phi) + (n~ v, phi).

The closed forms below only involve the bounded auxiliaries of the
compression (t, tau, beta, gamma1, gamma2), so every coefficient stays
finite up to the outer boundary.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "MediaTensors",
    "CoefficientSet",
    "rotation",
    "media_tensors",
    "substitution_w",
    "substituted_coeffs",
    "interior_coeffs",
]


def rotation(theta):
    """Stack of rotation matrices [[cos, -sin], [sin, cos]]."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


@dataclass
class MediaTensors:
    B: np.ndarray
    C: np.ndarray
    n: np.ndarray


@dataclass
class CoefficientSet:
    Bbreve: np.ndarray
    p: np.ndarray
    q: np.ndarray
    nbreve: np.ndarray
    w: np.ndarray
    theta: np.ndarray

    def cartesian(self):
        """Return (T B~ T^t, T p, T q) for use with Cartesian gradients."""
        Tm = rotation(self.theta)
        K = Tm @ self.Bbreve @ np.swapaxes(Tm, -1, -2)
        return K, np.einsum("...ij,...j->...i", Tm, self.p), np.einsum("...ij,...j->...i", Tm, self.q)


def _sym(b11, b12, b22):
    return np.stack([np.stack([b11, b12], -1), np.stack([b12, b22], -1)], -2)


def media_tensors(state, r=None, theta=None):
    """B, C = T B T^t and n = S S_r / r for a transformation state."""
    r = state.r if r is None else np.asarray(r, dtype=float)
    theta = state.theta if theta is None else np.asarray(theta, dtype=float)
    S, Sr, St = state.S, state.S_r, state.S_theta
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(Sr)) and np.all(np.isfinite(St))):
        raise DomainError("media tensors are singular at the outer boundary")
    B = _sym(S / (r * Sr) * (1.0 + (St / S) ** 2), -St / S, r * Sr / S)
    Tm = rotation(theta)
    C = Tm @ B @ np.swapaxes(Tm, -1, -2)
    return MediaTensors(B, C, S * Sr / r)


def substitution_w(state, k):
    """w = t^{3/2} exp(i k sigma1 T); equals 1 on the inner edge and 0 at R2."""
    T = np.where(np.isfinite(state.T), state.T, 0.0)
    w = state.t**1.5 * np.exp(1j * k * state.sigma1 * T)
    return np.where(state.t > 0, w, 0.0)


def substituted_coeffs(state, layer, k, theta=None):
    """Closed-form B~, p, q, n~ and w at layer points."""
    theta = state.theta if theta is None else np.asarray(theta, dtype=float)
    t, tau, beta = state.t, state.tau, state.beta
    g1, g2 = state.gamma1, state.gamma2
    R1, R1p, r = state.R1, state.R1p, state.r
    a = layer.alpha
    s1 = layer.sigma1
    ik = 1j * k
    t2 = t * t
    h = R1p * t2 + a * g2
    m = t + a * tau / R1

    nb = (k * k * (beta * s1**2 / a - a * beta + s1**2 * R1p**2 * t2 / (a * beta)) * g1 / r
          + 9.0 * g1 * s1**2 * t2 / (4.0 * r * R1**2)
          * (beta / a + R1p**2 / (a * beta * R1**2) * (R1 * t + a * tau) ** 2))
    b11 = beta * t2 / (a * g1 * r) * (t2 + h**2 / beta**2)
    b12 = -h * t2 / beta
    b22 = a * g1 * r * t2 / beta

    def first(sgn):
        c1 = (-(beta * s1 / (a * r)) * (3.0 * t / (2.0 * R1) + sgn * ik) * t2
              - (3.0 * R1p * s1 / (2.0 * r * R1 * a * beta) * m + sgn * ik * s1 * R1p / (r * a * beta)) * h * t2)
        c2 = 3.0 * R1p * g1 * s1 / (2.0 * R1 * beta) * m * t2 + sgn * ik * s1 * R1p * g1 * t2 / beta
        return np.stack([c1, c2], -1)

    return CoefficientSet(_sym(b11, b12, b22), first(1.0), first(-1.0), nb,
                          substitution_w(state, k), np.broadcast_to(theta, np.shape(t)))


def interior_coeffs(k, theta, refraction=None, x=None, y=None):
    """Interior values: B~ = I, p = q = 0, n~ = -k^2 n(x)."""
    theta = np.asarray(theta, dtype=float)
    one = np.ones(theta.shape)
    zero = np.zeros(theta.shape)
    nidx = one if refraction is None else refraction(x, y)
    return CoefficientSet(_sym(one + 0j, zero + 0j, one + 0j), np.zeros(theta.shape + (2,), complex),
                          np.zeros(theta.shape + (2,), complex), -k * k * nidx + 0j, one + 0j, theta)
