"""
Bessel and Hankel functions of integer order.

``bessel_j`` is computed by Miller's downward recurrence normalised with
J_0 + 2 sum J_2m = 1.  Complex-argument Hankel functions are delegated to
the AMOS routines in :mod:`scipy.special`, with an mpmath fallback when the
double-precision result overflows (very large orders at small arguments).
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "MAX_ORDER",
    "MAX_ARG",
    "bessel_j",
    "bessel_j_all",
    "hankel1",
    "hankel1_ratio",
]

MAX_ORDER = 2000
MAX_ARG = 5000.0

_BIG = 1e250


def _check_order(order):
    if int(order) != order or order < 0 or order > MAX_ORDER:
        raise DomainError(f"order must be an integer in [0, {MAX_ORDER}], got {order}")
    return int(order)


def bessel_j_all(nmax, x):
    """Return ``[J_0(x), ..., J_nmax(x)]`` for real ``x >= 0``.

    Miller's algorithm: recur downward from a start index well above
    ``max(nmax, x)`` and normalise with the Neumann series identity.
    """
    nmax = _check_order(nmax)
    x = float(x)
    if not math.isfinite(x) or x < 0.0 or x > MAX_ARG:
        raise DomainError(f"x must lie in [0, {MAX_ARG}], got {x}")
    out = np.zeros(nmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out

    top = max(nmax, int(x))
    start = top + 20 + int(math.sqrt(60.0 * (top + 1)))
    start += start % 2
    vals = np.zeros(start + 2)
    jp1, j = 0.0, 1e-300
    vals[start] = j
    norm = 0.0
    twox = 2.0 / x
    for m in range(start, 0, -1):
        jm1 = m * twox * j - jp1
        jp1, j = j, jm1
        vals[m - 1] = j
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2.0 * j
        if abs(j) > _BIG:
            vals[m - 1:] /= _BIG
            jp1 /= _BIG
            j /= _BIG
            norm /= _BIG
    norm += vals[0]
    out[:] = vals[: nmax + 1] / norm
    return out


def bessel_j(order, x):
    """Bessel function of the first kind J_order(x) for real x >= 0."""
    order = _check_order(order)
    return float(bessel_j_all(order, x)[order])


def _check_z(z):
    z = np.asarray(z, dtype=complex)
    if np.any(~np.isfinite(z)):
        raise DomainError("argument must be finite")
    if np.any(z.imag < 0) or np.any((z.real <= 0) & (z.imag == 0)):
        raise DomainError("argument must lie in the upper half plane away from the branch cut")
    return z


def _mp_hankel1(order, z):
    import mpmath

    with mpmath.workdps(30):
        return mpmath.hankel1(int(order), mpmath.mpc(z.real, z.imag))


def hankel1(order, z):
    """Hankel function of the first kind H^(1)_order(z).

    ``z`` must satisfy Im z >= 0 and may not sit on the non-positive real
    axis.  Accepts numpy arrays and broadcasts ``order`` against ``z``.
    """
    order = np.asarray(order)
    if np.any(order != np.round(order)) or np.any(order < 0) or np.any(order > MAX_ORDER):
        raise DomainError(f"order must be an integer in [0, {MAX_ORDER}]")
    z = _check_z(z)
    if np.any(np.abs(z) > MAX_ARG):
        raise DomainError(f"|z| must not exceed {MAX_ARG}")
    val = special.hankel1(order, z)
    if np.ndim(val) == 0:
        if not np.isfinite(val):
            raise DomainError(f"H^(1)_{int(order)}({complex(z)}) overflows double precision")
        return complex(val)
    if not np.all(np.isfinite(val)):
        raise DomainError("Hankel function overflows double precision")
    return val


def _ratio_scalar(m, z, z0):
    import mpmath

    bound = -z.imag * math.sqrt(max(0.0, 1.0 - (z0 / abs(z)) ** 2)) if abs(z) >= z0 else 0.0
    if bound < -700.0:
        return 0j
    with mpmath.workdps(30):
        num = mpmath.hankel1(m, mpmath.mpc(z.real, z.imag))
        den = mpmath.hankel1(m, mpmath.mpf(z0))
        return complex(num / den)


def hankel1_ratio(order, z, z0):
    """Return H^(1)_order(z) / H^(1)_order(z0) for real ``z0 > 0``.

    The exponentially scaled functions are used, so the factor
    ``exp(i (z - z0))`` carries the decay and no intermediate quantity
    overflows for moderate orders.  Entries that still overflow are
    recomputed in extended precision.  Broadcasts over ``order`` and ``z``.
    """
    z0 = float(z0)
    if not z0 > 0.0:
        raise DomainError("z0 must be positive")
    order = np.asarray(order)
    if np.any(order != np.round(order)) or np.any(order < 0) or np.any(order > MAX_ORDER):
        raise DomainError(f"order must be an integer in [0, {MAX_ORDER}]")
    z = _check_z(z)
    order, z = np.broadcast_arrays(order, z)
    shape = z.shape
    order = order.ravel()
    z = z.ravel()
    with np.errstate(all="ignore"):
        num = special.hankel1e(order, z)
        den = special.hankel1e(order, z0)
        phase = np.exp(1j * (z - z0))
        out = num / den * phase
    # the phase underflows to zero only where the true ratio is negligible
    bad = (~np.isfinite(num) | ~np.isfinite(den) | ~np.isfinite(out)) & (np.abs(phase) > 0)
    out[np.abs(phase) == 0] = 0.0
    for i in np.nonzero(bad)[0]:
        out[i] = _ratio_scalar(int(order[i]), complex(z[i]), z0)
    out = out.reshape(shape)
    if out.ndim == 0:
        return complex(out)
    return out
