"""Gauss-Lobatto-Legendre rules, Gauss-Legendre rules and nodal Lagrange bases."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SolverError

__all__ = ["GLLRule", "gll_rule", "gauss_rule", "lagrange_basis", "legendre"]


@dataclass(frozen=True)
class GLLRule:
    degree: int
    nodes: np.ndarray
    weights: np.ndarray


def legendre(n, x):
    """Return (L_n(x), L_n'(x)) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p0, p1 = np.ones_like(x), x.copy()
    if n == 0:
        return p0, np.zeros_like(x)
    for j in range(1, n):
        p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (x * p1 - p0) / (x**2 - 1.0)
    end = np.abs(np.abs(x) - 1.0) < 1e-15
    dp = np.where(end, 0.5 * n * (n + 1) * np.sign(x) ** (n + 1), dp)
    return p1, dp


def gll_rule(N):
    """Gauss-Lobatto-Legendre nodes and weights of degree ``N``.

    Nodes are -1, 1 and the roots of L_N'; weights 2 / (N (N+1) L_N(x_i)^2).
    """
    N = int(N)
    if N < 1:
        raise DomainError("GLL degree must be at least 1")
    if N == 1:
        return GLLRule(1, np.array([-1.0, 1.0]), np.array([1.0, 1.0]))
    # Newton on (1 - x^2) L_N'(x) starting from Chebyshev-Lobatto points
    x = -np.cos(np.pi * np.arange(N + 1) / N)
    for _ in range(100):
        p, dp = legendre(N, x[1:-1])
        # d/dx[(1-x^2) L_N'] = -N(N+1) L_N
        f = (1.0 - x[1:-1] ** 2) * dp
        step = f / (-N * (N + 1) * p)
        x[1:-1] -= step
        if np.max(np.abs(step)) < 1e-15:
            break
    else:
        raise SolverError("GLL Newton iteration did not converge")
    x = 0.5 * (x - x[::-1])
    p, _ = legendre(N, x)
    w = 2.0 / (N * (N + 1) * p**2)
    return GLLRule(N, x, w)


def gauss_rule(n):
    """Gauss-Legendre rule with ``n`` interior points."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    return x, w


def _bary_weights(nodes):
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    # scale to avoid overflow at high degree
    lw = np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    return sign * np.exp(-(lw - lw.mean()))


def lagrange_basis(nodes, x):
    """Values and derivatives of the Lagrange basis on ``nodes`` at ``x``.

    Returns arrays ``(phi, dphi)`` of shape ``(len(x), len(nodes))``.
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(nodes)
    w = _bary_weights(nodes)
    diff = x[:, None] - nodes[None, :]
    hit = np.abs(diff) < 1e-15
    on = hit.any(axis=1)
    phi = np.zeros((len(x), n))
    dphi = np.zeros((len(x), n))

    # differentiation matrix on the nodes
    dn = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(dn, 1.0)
    D = (w[None, :] / w[:, None]) / dn
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))

    off = ~on
    if np.any(off):
        d = diff[off]
        t = w[None, :] / d
        s = t.sum(axis=1)
        ph = t / s[:, None]
        phi[off] = ph
        # derivative of the barycentric form, dphi_i = phi_i (s2/s - 1/d_i), rewritten
        # around the nearest node j so that nothing cancels when x approaches x_j
        j = np.argmin(np.abs(d), axis=1)
        rows = np.arange(d.shape[0])
        dj = d[rows, j]
        xj = nodes[j]
        gap = nodes[None, :] - xj[:, None]
        c = (t * gap / d).sum(axis=1) / (s * dj)
        dphi[off] = ph * (c[:, None] - gap / (d * dj[:, None]))
    if np.any(on):
        idx = np.argmax(hit[on], axis=1)
        phi[on, idx] = 1.0
        dphi[on] = D[idx]
    return phi, dphi
