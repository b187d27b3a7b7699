"""
Curvilinear quadrilateral spectral elements for the interior plus layer problem.

The mesh is ring-structured in polar form: angular sectors (with any
corner rays of the boundaries as sector edges) times radial rings between
the scatterer and R1(theta) and between R1(theta) and R2(theta).  Element
maps are Gordon-Hall blends of the four bounding curves.

In the layer the unknown is v = u / w; the interior unknown is u itself.
The weak form assembled on every element is

    (K grad v, grad phi) + (P . grad v, phi) + (v, Q . grad phi) + (c v, phi)

with (K, P, Q, c) = (T B~ T^t, T p, T q, n~) in the layer and
(I, 0, 0, -k^2 n(x)) in the interior.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coeffs import substituted_coeffs, substitution_w
from .errors import MeshError, SolverError
from .geometry import INTERIOR, LAYER, corner_angles, radius
from .sem1d import reference_element
from .spectral import GLLRule, gll_rule, lagrange_basis
from .transform2d import transform_state

__all__ = [
    "GLLRule",
    "gll_rule",
    "gordon_hall",
    "arc_curve",
    "segment_curve",
    "Element2D",
    "SEMesh",
    "build_mesh",
    "assemble",
    "assemble_form",
    "solve",
    "evaluate",
    "FieldSolution",
    "write_field_dump",
]

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------- curves and maps


def arc_curve(radius_fn, ta, tb):
    """Curve s in [-1, 1] -> R(theta) e(theta), theta affine in s on [ta, tb]."""
    half = 0.5 * (tb - ta)

    def c(s):
        s = np.asarray(s, dtype=float)
        th = ta + (s + 1.0) * half
        R, dR = radius_fn(th)
        cs, sn = np.cos(th), np.sin(th)
        pt = np.stack([R * cs, R * sn], -1)
        der = np.stack([dR * cs - R * sn, dR * sn + R * cs], -1) * half
        return pt, der

    return c


def segment_curve(p0, p1):
    """Straight segment from p0 (s = -1) to p1 (s = 1)."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)

    def c(s):
        s = np.asarray(s, dtype=float)[..., None]
        return p0 + 0.5 * (s + 1.0) * (p1 - p0), np.broadcast_to(0.5 * (p1 - p0), s.shape[:-1] + (2,))

    return c


def gordon_hall(curves, xi, eta):
    """Transfinite blend of four curves (left, right, bottom, top).

    ``left``/``right`` are parameterised by eta and sit at xi = -1/+1;
    ``bottom``/``top`` are parameterised by xi and sit at eta = -1/+1.
    Returns (x, y, J) with J[..., i, j] = d x_i / d (xi, eta)_j.
    """
    left, right, bottom, top = curves
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi, eta = np.broadcast_arrays(xi, eta)
    u = 0.5 * (xi + 1.0)[..., None]
    v = 0.5 * (eta + 1.0)[..., None]
    Cl, dCl = left(eta)
    Cr, dCr = right(eta)
    Cb, dCb = bottom(xi)
    Ct, dCt = top(xi)
    m1, p1 = np.array(-1.0), np.array(1.0)
    P00 = bottom(m1)[0]
    P10 = bottom(p1)[0]
    P01 = top(m1)[0]
    P11 = top(p1)[0]
    X = ((1 - u) * Cl + u * Cr + (1 - v) * Cb + v * Ct
         - ((1 - u) * (1 - v) * P00 + u * (1 - v) * P10 + (1 - u) * v * P01 + u * v * P11))
    Xxi = (0.5 * (Cr - Cl) + (1 - v) * dCb + v * dCt
           - 0.5 * ((1 - v) * (P10 - P00) + v * (P11 - P01)))
    Xeta = ((1 - u) * dCl + u * dCr + 0.5 * (Ct - Cb)
            - 0.5 * ((1 - u) * (P01 - P00) + u * (P11 - P10)))
    J = np.stack([Xxi, Xeta], -1)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    if np.any(det <= 0):
        raise MeshError("degenerate element map: nonpositive Jacobian")
    return X[..., 0], X[..., 1], J


# ---------------------------------------------------------------- mesh


@dataclass
class Element2D:
    """Quadrilateral in polar footprint [ta, tb] x [inner(theta), outer(theta)].

    Reference xi runs radially outward, eta counterclockwise.
    """

    region: str
    ta: float
    tb: float
    inner: callable
    outer: callable
    deg_r: int
    deg_t: int
    ring: int
    sector: int
    curves: tuple = field(repr=False, default=None)

    def __post_init__(self):
        a, b = self.ta, self.tb
        pa = [self.inner(a)[0] * math.cos(a), self.inner(a)[0] * math.sin(a)]
        qa = [self.outer(a)[0] * math.cos(a), self.outer(a)[0] * math.sin(a)]
        pb = [self.inner(b)[0] * math.cos(b), self.inner(b)[0] * math.sin(b)]
        qb = [self.outer(b)[0] * math.cos(b), self.outer(b)[0] * math.sin(b)]
        self.curves = (
            arc_curve(self.inner, a, b),
            arc_curve(self.outer, a, b),
            segment_curve(pa, qa),
            segment_curve(pb, qb),
        )

    def theta_of(self, eta):
        return self.ta + 0.5 * (np.asarray(eta) + 1.0) * (self.tb - self.ta)

    def map(self, xi, eta):
        return gordon_hall(self.curves, xi, eta)

    def reference_coords(self, r, theta):
        """Invert the polar blend: (r, theta) -> (xi, eta)."""
        theta = np.asarray(theta, dtype=float)
        eta = 2.0 * (theta - self.ta) / (self.tb - self.ta) - 1.0
        Ri = self.inner(theta)[0]
        Ro = self.outer(theta)[0]
        xi = 2.0 * (np.asarray(r) - Ri) / (Ro - Ri) - 1.0
        return xi, eta


@dataclass
class SEMesh:
    cfg: object
    elements: list
    breaks: np.ndarray
    ring_degrees: list
    ring_regions: list
    ring_fracs: list
    deg_t: int
    n_r: int
    n_t: int
    ring_offsets: list = field(default_factory=list)
    sector_offsets: list = field(default_factory=list)

    @property
    def ndof(self):
        return self.n_r * self.n_t

    def element_dofs(self, e):
        I = self.ring_offsets[e.ring] + np.arange(e.deg_r + 1)
        J = (self.sector_offsets[e.sector] + np.arange(e.deg_t + 1)) % self.n_t
        return (I[:, None] * self.n_t + J[None, :]).ravel()

    def dirichlet_dofs(self):
        return np.arange(self.n_t)

    def node_polar(self):
        """Polar coordinates of every global DOF (r, theta) and its region tag."""
        r = np.empty(self.ndof)
        th = np.empty(self.ndof)
        reg = np.empty(self.ndof, dtype=object)
        for e in self.elements:
            rule_r = gll_rule(e.deg_r).nodes
            rule_t = gll_rule(e.deg_t).nodes
            t = e.theta_of(rule_t)
            Ri = e.inner(t)[0]
            Ro = e.outer(t)[0]
            rr = Ri[None, :] + 0.5 * (rule_r[:, None] + 1.0) * (Ro - Ri)[None, :]
            dofs = self.element_dofs(e)
            r[dofs] = rr.ravel()
            th[dofs] = np.broadcast_to(t, rr.shape).ravel()
            reg[dofs] = e.region
        # interface nodes belong to the interior ring below them
        for e in self.elements:
            if e.region == INTERIOR:
                reg[self.element_dofs(e)] = INTERIOR
        return r, th, reg


def _sector_breaks(n_sectors, corners):
    corners = sorted(c % TWO_PI for c in corners)
    if not corners:
        return np.linspace(0.0, TWO_PI, n_sectors + 1)
    pts = corners + [corners[0] + TWO_PI]
    spans = np.diff(pts)
    counts = np.maximum(1, np.round(n_sectors * spans / TWO_PI).astype(int))
    out = []
    for a, span, c in zip(pts[:-1], spans, counts):
        out.extend(a + span * np.arange(c) / c)
    out.append(pts[-1])
    return np.array(out)


def build_mesh(cfg, n_sectors=16, interior_rings=2, layer_rings=1, N1=20, N=10, layer_degree=None):
    """Ring-structured mesh between the scatterer, R1 and R2 = rho R1.

    Interior ring edges split [R0, R1] uniformly in the radial fraction;
    layer ring edges split [R1, R2] uniformly.  Interior elements have
    degree N1 in both directions, layer elements N1 tangentially and N
    radially.
    """
    layer = cfg.layer
    scat = cfg.scatterer
    if n_sectors < 3 or interior_rings < 1 or layer_rings < 1:
        raise MeshError("need at least 3 sectors and one ring per region")
    corners = list(corner_angles(layer.inner)) + list(corner_angles(scat))
    breaks = _sector_breaks(n_sectors, corners)

    def r0(th):
        return radius(scat, np.mod(th, TWO_PI))

    def r1(th):
        return radius(layer.inner, np.mod(th, TWO_PI))

    def ring_interior(f):
        def fn(th):
            R0, d0 = r0(th)
            R1, d1 = r1(th)
            return R0 + f * (R1 - R0), d0 + f * (d1 - d0)
        return fn

    def ring_layer(g):
        c = layer.rho if g == 1.0 else 1.0 + g * (layer.rho - 1.0)

        def fn(th):
            R1, d1 = r1(th)
            return c * R1, c * d1
        return fn

    fr_i = np.linspace(0.0, 1.0, interior_rings + 1)
    fr_l = np.linspace(0.0, 1.0, layer_rings + 1)
    bounds = [ring_interior(f) for f in fr_i] + [ring_layer(g) for g in fr_l[1:]]
    regions = [INTERIOR] * interior_rings + [LAYER] * layer_rings
    deg_layer = N if layer_degree is None else layer_degree
    degrees = [N1] * interior_rings + [deg_layer] * layer_rings

    # sample check that ring curves are nested
    th = np.linspace(0.0, TWO_PI, 721)
    prev = bounds[0](th)[0]
    for fn in bounds[1:]:
        cur = fn(th)[0]
        if np.any(cur <= prev):
            raise MeshError("ring curves intersect: scatterer must lie inside R1")
        prev = cur

    elements = []
    for i in range(len(regions)):
        for j in range(len(breaks) - 1):
            elements.append(Element2D(regions[i], breaks[j], breaks[j + 1], bounds[i], bounds[i + 1],
                                      degrees[i], N1, i, j))
    ring_offsets = list(np.concatenate([[0], np.cumsum(degrees)[:-1]]).astype(int))
    n_s = len(breaks) - 1
    sector_offsets = [j * N1 for j in range(n_s)]
    mesh = SEMesh(cfg, elements, breaks, degrees, regions, list(fr_i) + list(fr_l[1:]), N1,
                  int(sum(degrees)) + 1, n_s * N1, ring_offsets, sector_offsets)
    return mesh


# ---------------------------------------------------------------- assembly


def _patterns():
    # (test-xi, trial-xi, test-eta, trial-eta); 'B' basis, 'D' derivative
    return {
        "Kxx": ("D", "D", "B", "B"),
        "Kxe": ("D", "B", "B", "D"),
        "Kex": ("B", "D", "D", "B"),
        "Kee": ("B", "B", "D", "D"),
        "Px": ("B", "D", "B", "B"),
        "Pe": ("B", "B", "B", "D"),
        "Qx": ("D", "B", "B", "B"),
        "Qe": ("B", "B", "D", "B"),
        "c": ("B", "B", "B", "B"),
    }


def _element_quadrature(e):
    nr, nt = e.deg_r + 3, e.deg_t + 3
    ref_r = reference_element(e.deg_r, nr)
    ref_t = reference_element(e.deg_t, nt)
    xi = ref_r[1][:, None]
    eta = ref_t[1][None, :]
    x, y, J = e.map(xi, eta)
    W = ref_r[2][:, None] * ref_t[2][None, :]
    return ref_r, ref_t, x, y, J, W


def _element_matrix(e, K, P, Q, c, ref_r, ref_t, J, W):
    """Sum-factorised element matrix; rows test, columns trial."""
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    Jinv = np.empty_like(J)
    Jinv[..., 0, 0] = J[..., 1, 1] / det
    Jinv[..., 1, 1] = J[..., 0, 0] / det
    Jinv[..., 0, 1] = -J[..., 0, 1] / det
    Jinv[..., 1, 0] = -J[..., 1, 0] / det
    w = W * det
    # reference-space coefficients: grad = Jinv^T grad_ref
    Kh = np.einsum("...ia,...ab,...jb->...ij", Jinv, K, Jinv) * w[..., None, None]
    Ph = np.einsum("...ia,...a->...i", Jinv, P) * w[..., None]
    Qh = np.einsum("...ia,...a->...i", Jinv, Q) * w[..., None]
    ch = c * w
    f = {"Kxx": Kh[..., 0, 0], "Kxe": Kh[..., 0, 1], "Kex": Kh[..., 1, 0], "Kee": Kh[..., 1, 1],
         "Px": Ph[..., 0], "Pe": Ph[..., 1], "Qx": Qh[..., 0], "Qe": Qh[..., 1], "c": ch}
    B1, D1 = ref_r[3], ref_r[4]
    B2, D2 = ref_t[3], ref_t[4]
    tab1 = {"B": B1, "D": D1}
    tab2 = {"B": B2, "D": D2}
    n1, n2 = B1.shape[1], B2.shape[1]
    A = np.zeros((n1, n1, n2, n2), dtype=complex)
    for key, (a1, b1, a2, b2) in _patterns().items():
        fk = f[key]
        if not np.any(fk):
            continue
        X2, Y2 = tab2[a2], tab2[b2]
        # T[q1, i2, j2] = sum_q2 f[q1, q2] X2[q2, i2] Y2[q2, j2]
        T = np.einsum("pq,qi,qj->pij", fk, X2, Y2, optimize=True)
        X1, Y1 = tab1[a1], tab1[b1]
        A += np.einsum("pi,pj,pkl->ijkl", X1, Y1, T, optimize=True)
    # local ordering (radial index, angular index)
    return A.transpose(0, 2, 1, 3).reshape(n1 * n2, n1 * n2)


def element_coefficients(mesh, e, x, y, eta_q):
    """(K, P, Q, c) at quadrature points of element ``e``."""
    cfg = mesh.cfg
    k = cfg.k
    shape = x.shape
    if e.region == INTERIOR:
        K = np.broadcast_to(np.eye(2, dtype=complex), shape + (2, 2))
        zero = np.zeros(shape + (2,), dtype=complex)
        c = -k * k * cfg.refraction_index(x, y) + 0j
        return K, zero, zero, c
    th = np.broadcast_to(e.theta_of(eta_q), shape)
    r = np.hypot(x, y)
    st = transform_state(cfg.layer, r, th)
    cs = substituted_coeffs(st, cfg.layer, k)
    K, P, Q = cs.cartesian()
    return K, P, Q, cs.nbreve


def assemble_form(mesh, coefficient_fn):
    """Assemble the global matrix for a user-supplied coefficient callback.

    ``coefficient_fn(element, x, y, eta)`` returns (K, P, Q, c) at the
    element's quadrature points.
    """
    n = mesh.ndof
    rows, cols, vals = [], [], []
    A = sp.csr_matrix((n, n), dtype=complex)
    batch = 0
    for e in mesh.elements:
        ref_r, ref_t, x, y, J, W = _element_quadrature(e)
        eta_q = np.broadcast_to(ref_t[1][None, :], x.shape)
        K, P, Q, c = coefficient_fn(e, x, y, eta_q)
        Ae = _element_matrix(e, K, P, Q, c, ref_r, ref_t, J, W)
        dofs = mesh.element_dofs(e).astype(np.int32)
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        vals.append(Ae.ravel())
        batch += Ae.size
        if batch > 4_000_000:
            A = A + sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                  shape=(n, n)).tocsr()
            rows, cols, vals, batch = [], [], [], 0
    if vals:
        A = A + sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(n, n)).tocsr()
    return A


def assemble(mesh, cfg=None):
    """System matrix and right-hand side for the scattering problem.

    Dirichlet data g on the scatterer is imposed by lifting: the returned
    system acts on the free DOFs only; ``rhs`` already carries -A_fd g_d.
    Returns (A_free, rhs, info) with info holding the full matrix and
    the DOF partition.
    """
    if cfg is not None and cfg is not mesh.cfg:
        mesh.cfg = cfg
    A = assemble_form(mesh, lambda e, x, y, eta: element_coefficients(mesh, e, x, y, eta))
    r, th, _ = mesh.node_polar()
    dd = mesh.dirichlet_dofs()
    g = mesh.cfg.boundary_data(th[dd])
    free = np.setdiff1d(np.arange(mesh.ndof), dd)
    A = A.tocsr()
    Aff = A[free][:, free].tocsc()
    rhs = -(A[free][:, dd] @ g)
    return Aff, rhs, {"matrix": A, "free": free, "dirichlet": dd, "g": g}


def solve(system, rhs, tol=1e-10):
    """Sparse LU solve; raises SolverError when the relative residual exceeds ``tol``."""
    A = sp.csc_matrix(system)
    b = np.asarray(rhs)
    try:
        lu = spla.splu(A, permc_spec="COLAMD")
        x = lu.solve(b)
    except RuntimeError as exc:
        raise SolverError(f"sparse factorisation failed: {exc}") from exc
    nb = np.linalg.norm(b)
    res = np.linalg.norm(A @ x - b) / (nb if nb > 0 else 1.0)
    if not np.all(np.isfinite(x)) or res > tol:
        raise SolverError(f"linear solve residual {res:.2e} exceeds {tol:.0e}")
    return x, float(res)


# ---------------------------------------------------------------- evaluation


@dataclass
class FieldSolution:
    mesh: SEMesh
    values: np.ndarray
    residual: float = 0.0

    def wrap(self, theta):
        """Shift angles into [breaks[0], breaks[0] + 2 pi)."""
        t0 = self.mesh.breaks[0]
        return t0 + np.mod(np.asarray(theta, dtype=float) - t0, TWO_PI)

    def locate(self, r, theta):
        """Element index for each polar point, or -1 when outside the mesh."""
        mesh = self.mesh
        theta = self.wrap(theta)
        r = np.asarray(r, dtype=float)
        sec = np.clip(np.searchsorted(mesh.breaks, theta, side="right") - 1, 0, len(mesh.breaks) - 2)
        n_s = len(mesh.breaks) - 1
        ring = np.full(r.shape, -1)
        nr = len(mesh.ring_degrees)
        for i in range(nr):
            e0 = mesh.elements[i * n_s]
            lo = e0.inner(theta)[0]
            hi = e0.outer(theta)[0]
            tol = 1e-12 * hi
            inside = (r >= lo - tol) & ((r < hi) | ((i == nr - 1) & (r <= hi + tol)))
            ring = np.where((ring < 0) & inside, i, ring)
        return np.where(ring >= 0, ring * n_s + sec, -1)

    def evaluate(self, r, theta, physical=True):
        """Field at polar points; u = w v in the layer when ``physical``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        theta = np.atleast_1d(self.wrap(theta))
        r, theta = np.broadcast_arrays(r, theta)
        shape = r.shape
        r, theta = r.ravel(), theta.ravel()
        eid = self.locate(r, theta)
        if np.any(eid < 0):
            raise MeshError("evaluation point outside the mesh")
        out = np.empty(r.shape, dtype=complex)
        for ei in np.unique(eid):
            e = self.mesh.elements[ei]
            sel = eid == ei
            xi, eta = e.reference_coords(r[sel], theta[sel])
            br, _ = lagrange_basis(gll_rule(e.deg_r).nodes, np.clip(xi, -1, 1))
            bt, _ = lagrange_basis(gll_rule(e.deg_t).nodes, np.clip(eta, -1, 1))
            loc = self.values[self.mesh.element_dofs(e)].reshape(e.deg_r + 1, e.deg_t + 1)
            val = np.einsum("pi,ij,pj->p", br, loc, bt)
            if physical and e.region == LAYER:
                lay = self.mesh.cfg.layer
                rs = np.minimum(r[sel], lay.radii(theta[sel])[2])
                st = transform_state(lay, rs, theta[sel], allow_end=True)
                val = val * substitution_w(st, self.mesh.cfg.k)
            out[sel] = val
        return out.reshape(shape)

    def region(self, r, theta):
        eid = self.locate(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        return np.array([self.mesh.elements[i].region if i >= 0 else "outside" for i in np.ravel(eid)])


def evaluate(mesh, solution, points):
    """Physical field at Cartesian ``points`` (array (..., 2))."""
    pts = np.asarray(points, dtype=float)
    fs = solution if isinstance(solution, FieldSolution) else FieldSolution(mesh, solution)
    r = np.hypot(pts[..., 0], pts[..., 1])
    th = np.arctan2(pts[..., 1], pts[..., 0])
    return fs.evaluate(r, th)


def solve_scattering(cfg, **mesh_kw):
    """Build, assemble and solve; returns a FieldSolution."""
    mesh = build_mesh(cfg, **mesh_kw)
    A, rhs, info = assemble(mesh)
    x, res = solve(A, rhs)
    vals = np.empty(mesh.ndof, dtype=complex)
    vals[info["free"]] = x
    vals[info["dirichlet"]] = info["g"]
    return FieldSolution(mesh, vals, res)


__all__.append("solve_scattering")


def write_field_dump(path, sol, r, theta):
    """Write ``x y re_u im_u re_v im_v region`` rows for polar sample points."""
    r = np.ravel(r)
    theta = np.ravel(theta)
    u = sol.evaluate(r, theta, physical=True)
    v = sol.evaluate(r, theta, physical=False)
    reg = sol.region(r, theta)
    with open(path, "w") as fh:
        fh.write("# x y re_u im_u re_v im_v region\n")
        for i in range(r.size):
            fh.write(f"{r[i] * math.cos(theta[i]):.17g} {r[i] * math.sin(theta[i]):.17g} "
                     f"{u[i].real:.17g} {u[i].imag:.17g} {v[i].real:.17g} {v[i].imag:.17g} {reg[i]}\n")
