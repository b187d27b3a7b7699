"""
One-dimensional spectral elements for the per-mode problems.

Each element carries a GLL nodal basis and is integrated with a
Gauss-Legendre rule (interior points only), so singular endpoint
coefficients are never sampled.  The bilinear form on an element is

    int  a v' phi' + p v' phi + q v phi' + c v phi  dx
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import SolverError
from .spectral import gauss_rule, gll_rule, lagrange_basis

__all__ = ["Element1D", "Solution1D", "solve_1d", "reference_element"]


@lru_cache(maxsize=64)
def reference_element(degree, nquad):
    """GLL rule plus Gauss points, weights and basis tables on [-1, 1]."""
    rule = gll_rule(degree)
    xq, wq = gauss_rule(nquad)
    phi, dphi = lagrange_basis(rule.nodes, xq)
    for arr in (xq, wq, phi, dphi):
        arr.setflags(write=False)
    return rule, xq, wq, phi, dphi


@dataclass
class Element1D:
    """An element on [a, b] of polynomial ``degree``.

    ``coeffs(x)`` returns the four coefficient arrays (a, p, q, c) at ``x``.
    ``weight(x)`` maps the solved variable to the physical field.
    """

    a: float
    b: float
    degree: int
    coeffs: callable
    weight: callable = None
    nquad: int = None
    tag: str = ""
    nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        self.nquad = self.nquad or self.degree + 3
        self.rule = reference_element(self.degree, self.nquad)[0]
        self.nodes = self.a + 0.5 * (self.rule.nodes + 1.0) * (self.b - self.a)

    def matrix(self):
        _, xq, wq, phi, dphi = reference_element(self.degree, self.nquad)
        jac = 0.5 * (self.b - self.a)
        x = self.a + 0.5 * (xq + 1.0) * (self.b - self.a)
        dphi = dphi / jac
        a, p, q, c = (np.broadcast_to(np.asarray(v, dtype=complex), x.shape) for v in self.coeffs(x))
        w = wq * jac
        # rows: test functions, columns: trial functions
        return (
            dphi.T @ ((w * a)[:, None] * dphi)
            + phi.T @ ((w * p)[:, None] * dphi)
            + dphi.T @ ((w * q)[:, None] * phi)
            + phi.T @ ((w * c)[:, None] * phi)
        )


@dataclass
class Solution1D:
    elements: list
    values: np.ndarray
    offsets: list
    residual: float

    def _eval(self, x, physical):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.full(x.shape, np.nan + 0j)
        for e, off in zip(self.elements, self.offsets):
            sel = (x >= e.a) & (x <= e.b) & np.isnan(out)
            if not np.any(sel):
                continue
            ref = 2.0 * (x[sel] - e.a) / (e.b - e.a) - 1.0
            phi, _ = lagrange_basis(e.rule.nodes, ref)
            val = phi @ self.values[off: off + e.degree + 1]
            if physical and e.weight is not None:
                val = val * e.weight(x[sel])
            out[sel] = val
        return out

    def __call__(self, x):
        """Physical field at ``x``."""
        return self._eval(x, True)

    def raw(self, x):
        """Solved variable (before the layer weight) at ``x``."""
        return self._eval(x, False)

    @property
    def nodes(self):
        pts = [self.elements[0].nodes[:1]]
        for e in self.elements:
            pts.append(e.nodes[1:])
        return np.concatenate(pts)


def solve_1d(elements, left_value, right_value=None):
    """Assemble a chain of elements, impose Dirichlet data, solve densely.

    ``right_value=None`` leaves the right end natural.
    """
    n = sum(e.degree for e in elements) + 1
    A = np.zeros((n, n), dtype=complex)
    offsets = []
    off = 0
    for e in elements:
        offsets.append(off)
        m = e.degree + 1
        A[off: off + m, off: off + m] += e.matrix()
        off += e.degree
    fixed = {0: complex(left_value)}
    if right_value is not None:
        fixed[n - 1] = complex(right_value)
    idx_fixed = np.array(sorted(fixed))
    vals_fixed = np.array([fixed[i] for i in idx_fixed])
    free = np.setdiff1d(np.arange(n), idx_fixed)
    rhs = -A[np.ix_(free, idx_fixed)] @ vals_fixed
    K = A[np.ix_(free, free)]
    try:
        lu = scipy.linalg.lu_factor(K, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SolverError(f"per-mode factorisation failed: {exc}") from exc
    if np.any(np.diag(lu[0]) == 0):
        raise SolverError("singular per-mode system")
    sol = scipy.linalg.lu_solve(lu, rhs)
    res = np.linalg.norm(K @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300)
    u = np.zeros(n, dtype=complex)
    u[idx_fixed] = vals_fixed
    u[free] = sol
    return Solution1D(elements, u, offsets, float(res))
