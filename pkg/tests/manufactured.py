"""Manufactured-solution check of the transformed operator on a two-element patch.

For a real map x -> x~ = S(r, theta) e_r, u(x) = U(x~(x)) satisfies
div(C grad u) + k^2 n u = n (Lap U + k^2 U)(x~), so for test functions
vanishing on the patch boundary

    (C grad u, grad phi) - k^2 (n u, phi) + (n F(x~), phi) = 0,  F = Lap U + k^2 U.
"""

from types import SimpleNamespace

import numpy as np

from palh.coeffs import media_tensors
from palh.sem2d import Element2D, _element_matrix, _element_quadrature
from palh.spectral import gll_rule

A, B = 0.15, 0.5


def S_map(r, th):
    g = 1.0 + B * np.sin(th)
    return r + A * (r - 1.0) ** 2 * g, 1.0 + 2 * A * (r - 1.0) * g, A * (r - 1.0) ** 2 * B * np.cos(th)


def U(X, Y):
    return np.sin(1.3 * X) * np.cos(0.7 * Y) + X * Y**2


def F(X, Y, k):
    lap = -(1.3**2 + 0.7**2) * np.sin(1.3 * X) * np.cos(0.7 * Y) + 2 * X
    return lap + k * k * U(X, Y)


def _inner(th):
    return 1.0 + 0.1 * np.sin(3 * th), 0.3 * np.cos(3 * th)


def _outer(th):
    return 1.8 + 0.05 * np.cos(2 * th), -0.1 * np.sin(2 * th)


def _coeffs(x, y, k):
    r = np.hypot(x, y)
    th = np.arctan2(y, x)
    S, Sr, St = S_map(r, th)
    state = SimpleNamespace(S=S + 0j, S_r=Sr + 0j, S_theta=St + 0j, r=r, theta=th)
    m = media_tensors(state)
    return m.C, m.n, S * np.cos(th), S * np.sin(th)


def patch_residual(N=16, k=3.0, breaks=(0.2, 0.8, 1.5)):
    """Max weak residual over interior test functions, and the max load for scale."""
    elems = [Element2D("layer", breaks[i], breaks[i + 1], _inner, _outer, N, N, 0, i) for i in range(2)]
    nt = 2 * N + 1
    n = (N + 1) * nt
    Aglob = np.zeros((n, n), complex)
    load = np.zeros(n, complex)
    uval = np.zeros(n, complex)
    for j, e in enumerate(elems):
        ref_r, ref_t, x, y, J, W = _element_quadrature(e)
        C, nn, X, Y = _coeffs(x, y, k)
        P = np.zeros(x.shape + (2,), complex)
        Ae = _element_matrix(e, C, P, P, -k * k * nn, ref_r, ref_t, J, W)
        I = np.arange(N + 1)
        Jg = j * N + np.arange(N + 1)
        dofs = (I[:, None] * nt + Jg[None, :]).ravel()
        Aglob[np.ix_(dofs, dofs)] += Ae
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        f = nn * F(X, Y, k) * W * det
        load[dofs] += np.einsum("pq,pi,qj->ij", f, ref_r[3], ref_t[3]).ravel()
        # nodal values of u
        nodes = gll_rule(N).nodes
        xn, yn, _ = e.map(nodes[:, None], nodes[None, :])
        rn, tn = np.hypot(xn, yn), np.arctan2(yn, xn)
        Sn = S_map(rn, tn)[0]
        uval[dofs] = U(Sn * np.cos(tn), Sn * np.sin(tn)).ravel()
    I, Jg = np.meshgrid(np.arange(N + 1), np.arange(nt), indexing="ij")
    inner = ((I > 0) & (I < N) & (Jg > 0) & (Jg < nt - 1)).ravel()
    res = (Aglob @ uval + load)[inner]
    return float(np.abs(res).max()), float(np.abs(load[inner]).max())


if __name__ == "__main__":
    for N in (6, 10, 14, 18):
        print(N, patch_residual(N))
