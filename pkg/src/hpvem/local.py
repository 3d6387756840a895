"""Local virtual element space on one polygon.

The space of degree p on a cell K carries vertex values, internal
Gauss-Lobatto edge values (degree p_e per edge, p_e >= p under the maximum
rule), and moments against the elementwise L2-orthonormal basis up to degree
p-2. Three projectors are computable from those degrees of freedom:

* ``pi_nabla``  -- energy projection onto degree-p polynomials, constant mode
  fixed by the boundary average;
* ``pi_zero``   -- L2 projection onto degree p-1; the top degree slice is
  supplied by the enhancement constraint through ``pi_nabla``;
* ``pi_grad``   -- componentwise L2 projection of the gradient onto degree p-1.

All projector matrices map a local DOF vector to coefficients in the
orthonormal basis. Moment DOFs are scaled as |K|^(-1/2) * integral(v q_alpha),
which is invariant under homothety and keeps vertex and moment DOFs of
comparable size on graded meshes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.linalg import solve_triangular

from .geometry import GeometryError, polygon_area, polygon_centroid, polygon_diameter, star_center
from .polyspace import (ConditioningError, gauss_lobatto, mono_dx_matrix, mono_dy_matrix,
                        mono_laplacian_matrix, orthonormalize, poly_dim, polygon_quadrature)

S1_KINDS = ("explicit_p", "diagonal_recipe")
S0_KINDS = ("boundary_hp",)


@dataclass(frozen=True)
class StabChoice:
    """Stabilization selection for the stiffness (s1) and mass (s0) forms."""

    s1_kind: str = "diagonal_recipe"
    s0_kind: str = "boundary_hp"

    def __post_init__(self):
        if self.s1_kind not in S1_KINDS:
            raise ValueError(f"unknown s1 stabilization kind: {self.s1_kind!r}")
        if self.s0_kind not in S0_KINDS:
            raise ValueError(f"unknown s0 stabilization kind: {self.s0_kind!r}")


EXPLICIT = StabChoice("explicit_p")
DRECIPE = StabChoice("diagonal_recipe")


@dataclass(frozen=True)
class DofLayout:
    """Ordered DOF descriptors of one element: vertices, edges, moments."""

    degree: int
    edge_degrees: tuple
    n_vertices: int

    @property
    def n_moments(self):
        return poly_dim(self.degree - 2)

    @property
    def n_dofs(self):
        return self.n_vertices + sum(pe - 1 for pe in self.edge_degrees) + self.n_moments

    def edge_slice(self, i):
        start = self.n_vertices + sum(pe - 1 for pe in self.edge_degrees[:i])
        return slice(start, start + self.edge_degrees[i] - 1)

    @property
    def moment_slice(self):
        start = self.n_vertices + sum(pe - 1 for pe in self.edge_degrees)
        return slice(start, start + self.n_moments)

    def descriptors(self):
        """Yield ("vertex", i) / ("edge", i, k) / ("moment", a) in DOF order."""
        for i in range(self.n_vertices):
            yield ("vertex", i)
        for i, pe in enumerate(self.edge_degrees):
            for k in range(pe - 1):
                yield ("edge", i, k)
        for a in range(self.n_moments):
            yield ("moment", a)


def dof_layout(cell, p, edge_degrees=None):
    """DOF layout of the degree-p space on `cell` (vertex coordinate loop)."""
    cell = np.asarray(cell, dtype=float)
    if p < 1:
        raise ValueError("degree must be >= 1")
    nv = len(cell)
    if edge_degrees is None:
        edge_degrees = (int(p),) * nv
    edge_degrees = tuple(int(pe) for pe in edge_degrees)
    if len(edge_degrees) != nv:
        raise ValueError("need one edge degree per cell side")
    if min(edge_degrees) < 1:
        raise ValueError("edge degrees must be >= 1")
    return DofLayout(int(p), edge_degrees, nv)


@dataclass(frozen=True)
class ProjectorSet:
    """Computable projector matrices (coefficients in the orthonormal basis)."""

    pi_nabla: np.ndarray
    pi_zero: np.ndarray
    pi_grad_x: np.ndarray
    pi_grad_y: np.ndarray
    boundary_integrals: np.ndarray


@dataclass(frozen=True)
class LocalMatrices:
    """Stiffness (with s1 stabilization), potential, and stabilized mass."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    stab: StabChoice


class _EdgeData:
    __slots__ = ("degree", "length", "normal", "gl_points", "gauss_points",
                 "gauss_weights", "trace", "dofs")


def _lagrange_matrix(nodes, pts):
    """Values of the Lagrange basis on `nodes` at `pts` (barycentric form)."""
    nodes = np.asarray(nodes, dtype=float)
    pts = np.asarray(pts, dtype=float)
    n = len(nodes)
    bary = np.ones(n)
    for j in range(n):
        bary[j] = 1.0 / np.prod(np.delete(nodes[j] - nodes, j))
    diff = pts[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-14)
    safe = np.where(exact, 1.0, diff)
    mat = bary[None, :] / safe
    mat = mat / mat.sum(axis=1, keepdims=True)
    hit_rows = exact.any(axis=1)
    if hit_rows.any():
        mat[hit_rows] = exact[hit_rows].astype(float)
    return mat


@lru_cache(maxsize=None)
def _edge_reference(pe, ng):
    """Reference-edge data: Lobatto nodes, Gauss rule, trace interpolation."""
    from .polyspace import cached_leggauss

    gl = gauss_lobatto(pe)
    gx, gw = cached_leggauss(ng)
    return gl, gx, gw, _lagrange_matrix(gl.nodes, gx)


class LocalSpace:
    """All computable machinery of the local space on one polygon."""

    def __init__(self, vertices, degree, edge_degrees=None, quad_order=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.layout = dof_layout(self.vertices, degree, edge_degrees)
        self.p = self.layout.degree
        self.edge_degrees = self.layout.edge_degrees
        self.nv = self.layout.n_vertices
        self.area = polygon_area(self.vertices)
        if self.area <= 0:
            raise GeometryError("cell is not counterclockwise")
        self.centroid = polygon_centroid(self.vertices)
        self.diameter = polygon_diameter(self.vertices)
        self.star = star_center(self.vertices)
        order = int(quad_order) if quad_order is not None else 2 * self.p + 2
        self.quad = polygon_quadrature(self.vertices, max(order, 2 * self.p), center=self.star)
        self.ortho = orthonormalize(self.vertices, self.p, self.quad)
        self.edges = self._build_edges()

    # -- boundary machinery -------------------------------------------------

    def _build_edges(self):
        edges = []
        for i in range(self.nv):
            a = self.vertices[i]
            b = self.vertices[(i + 1) % self.nv]
            pe = self.edge_degrees[i]
            gl, gx, gw, trace = _edge_reference(pe, max(self.p, pe) + 1)
            e = _EdgeData()
            e.degree = pe
            tang = b - a
            e.length = float(np.hypot(*tang))
            e.normal = np.array([tang[1], -tang[0]]) / e.length
            e.gl_points = gl.map_to_segment(a, b)
            t = 0.5 * (gx + 1.0)
            e.gauss_points = a[None, :] + t[:, None] * tang[None, :]
            e.gauss_weights = 0.5 * gw * e.length
            e.trace = trace
            sl = self.layout.edge_slice(i)
            e.dofs = np.array([i, *range(sl.start, sl.stop), (i + 1) % self.nv],
                              dtype=np.intp)
            edges.append(e)
        return edges

    @cached_property
    def boundary_mass(self):
        """N x N matrix of the boundary inner product of the trace polynomials."""
        n = self.layout.n_dofs
        mat = np.zeros((n, n))
        for e in self.edges:
            block = e.trace.T @ (e.gauss_weights[:, None] * e.trace)
            mat[np.ix_(e.dofs, e.dofs)] += block
        return mat

    @cached_property
    def _boundary_tables(self):
        """Basis values and gradients at all edge Gauss points, with offsets."""
        pts = np.vstack([e.gauss_points for e in self.edges])
        offsets = np.cumsum([0] + [len(e.gauss_weights) for e in self.edges])
        vals, gx, gy = self.ortho.eval_all(pts)
        return offsets, vals, gx, gy

    @cached_property
    def dof_matrix(self):
        """DOF values of the orthonormal basis polynomials, shape (N, dim_p)."""
        layout = self.layout
        n = layout.n_dofs
        mat = np.zeros((n, self.ortho.dim))
        pts = [self.vertices]
        pts.extend(e.gl_points[1:-1] for e in self.edges if e.degree > 1)
        vals = self.ortho.eval(np.vstack(pts))
        mat[:self.nv] = vals[:self.nv]
        row = self.nv
        for i, e in enumerate(self.edges):
            sl = layout.edge_slice(i)
            count = sl.stop - sl.start
            if count:
                mat[sl] = vals[row:row + count]
                row += count
        npm2 = layout.n_moments
        if npm2:
            mat[layout.moment_slice, :npm2] = np.eye(npm2) / np.sqrt(self.area)
        return mat

    # -- projectors ----------------------------------------------------------

    @cached_property
    def projectors(self):
        p = self.p
        layout = self.layout
        n = layout.n_dofs
        dim_p = poly_dim(p)
        dim_pm1 = poly_dim(p - 1)
        dim_pm2 = poly_dim(p - 2)
        sq_area = np.sqrt(self.area)
        mono = self.ortho.mono
        coeff = self.ortho.coeff

        # right-hand sides of the energy projection, by parts:
        # (grad v, grad q) = -(v, lap q) + (v, dn q)_boundary
        offsets, bvals, bgx, bgy = self._boundary_tables
        bmat = np.zeros((dim_p, n))
        bvec = np.zeros(n)
        gconst = np.zeros(dim_p)
        for i, e in enumerate(self.edges):
            rows = slice(offsets[i], offsets[i + 1])
            dn = bgx[rows] * e.normal[0] + bgy[rows] * e.normal[1]
            wtrace = e.gauss_weights[:, None] * e.trace
            bmat[:, e.dofs] += dn.T @ wtrace
            bvec[e.dofs] += e.gauss_weights @ e.trace
            gconst += e.gauss_weights @ bvals[rows]
        if dim_pm2:
            lap = mono_laplacian_matrix(p, mono.h)
            lap_coeffs = coeff @ lap.T                      # rows: mono coeffs of lap q_alpha
            block = coeff[:dim_pm2, :dim_pm2]
            w = solve_triangular(block.T, lap_coeffs.T, lower=False, check_finite=False)
            bmat[:, layout.moment_slice] -= sq_area * w.T

        gx, gy = self.ortho.eval_grad(self.quad.points)
        wq = self.quad.weights[:, None]
        gmat = (gx * wq).T @ gx + (gy * wq).T @ gy
        gmat[0, :] = gconst
        bmat[0, :] = bvec
        try:
            pi_nabla = np.linalg.solve(gmat, bmat)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(
                f"singular constrained Gram system on cell at {tuple(self.centroid)}") from exc

        pi_zero = np.zeros((dim_pm1, n))
        if dim_pm2:
            pi_zero[:dim_pm2, layout.moment_slice] = sq_area * np.eye(dim_pm2)
        pi_zero[dim_pm2:dim_pm1] = pi_nabla[dim_pm2:dim_pm1]

        rx = np.zeros((dim_pm1, n))
        ry = np.zeros((dim_pm1, n))
        for i, e in enumerate(self.edges):
            qv = bvals[offsets[i]:offsets[i + 1], :dim_pm1]
            wtrace = e.gauss_weights[:, None] * e.trace
            block = qv.T @ wtrace
            rx[:, e.dofs] += e.normal[0] * block
            ry[:, e.dofs] += e.normal[1] * block
        if dim_pm2:
            block = coeff[:dim_pm2, :dim_pm2]
            for mat, deriv in ((rx, mono_dx_matrix(p - 1, mono.h)),
                               (ry, mono_dy_matrix(p - 1, mono.h))):
                dcoeffs = coeff[:dim_pm1, :dim_pm1] @ deriv.T
                w = solve_triangular(block.T, dcoeffs.T, lower=False, check_finite=False)
                mat[:, layout.moment_slice] -= sq_area * w.T

        return ProjectorSet(pi_nabla, pi_zero, rx, ry, bvec)

    @cached_property
    def residual_nabla(self):
        """DOF-space residual I - dofs(pi_nabla v), zero on degree-p polynomials."""
        n = self.layout.n_dofs
        return np.eye(n) - self.dof_matrix @ self.projectors.pi_nabla

    @cached_property
    def residual_zero(self):
        dim_pm1 = poly_dim(self.p - 1)
        n = self.layout.n_dofs
        return np.eye(n) - self.dof_matrix[:, :dim_pm1] @ self.projectors.pi_zero

    # -- stabilizations and local matrices -----------------------------------

    def stab_s1(self, kind, consistency=None):
        """Stiffness stabilization kernel, applied through the pi_nabla residual.

        ``explicit_p``: (p/h)^2 (pi0_{p-2} u, pi0_{p-2} v) + (p/h)(u, v)_bnd.
        ``diagonal_recipe``: diag(max(1, consistency diagonal)); requires the
        consistency matrix of the stiffness form.
        """
        if kind == "explicit_p":
            n = self.layout.n_dofs
            mat = (self.p / self.diameter) * self.boundary_mass.copy()
            sl = self.layout.moment_slice
            idx = np.arange(sl.start, sl.stop)
            mat[idx, idx] += (self.p / self.diameter) ** 2 * self.area
            return mat
        if kind == "diagonal_recipe":
            if consistency is None:
                raise ValueError("diagonal recipe needs the consistency matrix")
            return np.diag(np.maximum(1.0, np.diag(consistency)))
        raise ValueError(f"unknown s1 stabilization kind: {kind!r}")

    def stab_s0(self):
        """Mass stabilization kernel (h/p^2) (u, v)_bnd on the trace DOFs."""
        return (self.diameter / self.p ** 2) * self.boundary_mass

    def consistency_stiffness(self, coeffs=None):
        """Exact stiffness form on the projected gradients, variable tensor allowed."""
        proj = self.projectors
        dim_pm1 = poly_dim(self.p - 1)
        qv = self.ortho.eval(self.quad.points, dim=dim_pm1)
        w = self.quad.weights
        x, y = self.quad.points[:, 0], self.quad.points[:, 1]
        if coeffs is None:
            kxx = kyy = np.ones_like(w)
            kxy = np.zeros_like(w)
        else:
            kxx, kxy, kyy = coeffs.k_at(x, y)
            kxx = np.broadcast_to(np.asarray(kxx, dtype=float), w.shape)
            kxy = np.broadcast_to(np.asarray(kxy, dtype=float), w.shape)
            kyy = np.broadcast_to(np.asarray(kyy, dtype=float), w.shape)
        rx, ry = proj.pi_grad_x, proj.pi_grad_y
        mxx = (qv * (w * kxx)[:, None]).T @ qv
        myy = (qv * (w * kyy)[:, None]).T @ qv
        out = rx.T @ mxx @ rx + ry.T @ myy @ ry
        if np.any(kxy):
            mxy = (qv * (w * kxy)[:, None]).T @ qv
            cross = rx.T @ mxy @ ry
            out = out + cross + cross.T
        return out

    def consistency_potential(self, coeffs):
        proj = self.projectors
        w = self.quad.weights
        x, y = self.quad.points[:, 0], self.quad.points[:, 1]
        vvals = None if coeffs is None else coeffs.v_at(x, y)
        if vvals is None:
            n = self.layout.n_dofs
            return np.zeros((n, n))
        vvals = np.broadcast_to(np.asarray(vvals, dtype=float), w.shape)
        dim_pm1 = poly_dim(self.p - 1)
        qv = self.ortho.eval(self.quad.points, dim=dim_pm1)
        mv = (qv * (w * vvals)[:, None]).T @ qv
        return proj.pi_zero.T @ mv @ proj.pi_zero

    def local_matrices(self, coeffs=None, stab=DRECIPE):
        """Assemble the stiffness, potential, and mass matrices of this cell."""
        proj = self.projectors
        a_cons = self.consistency_stiffness(coeffs)
        s1 = self.stab_s1(stab.s1_kind, consistency=a_cons)
        dn = self.residual_nabla
        a = a_cons + dn.T @ s1 @ dn
        b = self.consistency_potential(coeffs)
        d0 = self.residual_zero
        c = proj.pi_zero.T @ proj.pi_zero + d0.T @ self.stab_s0() @ d0
        return LocalMatrices(a, b, c, stab)


# ---------------------------------------------------------------------------
# operation-style wrappers


def project_nabla(space):
    """Energy projector matrix of a LocalSpace (dim_p x N)."""
    return space.projectors.pi_nabla


def project_L2(space, pi_nabla=None):
    """L2 projector onto degree p-1; moments plus the enhancement slice."""
    if pi_nabla is None:
        return space.projectors.pi_zero
    layout = space.layout
    dim_pm1 = poly_dim(space.p - 1)
    dim_pm2 = poly_dim(space.p - 2)
    out = np.zeros((dim_pm1, layout.n_dofs))
    if dim_pm2:
        out[:dim_pm2, layout.moment_slice] = np.sqrt(space.area) * np.eye(dim_pm2)
    out[dim_pm2:dim_pm1] = pi_nabla[dim_pm2:dim_pm1]
    return out


def project_grad_L2(space):
    """Componentwise L2 projector of the gradient onto degree p-1."""
    proj = space.projectors
    return proj.pi_grad_x, proj.pi_grad_y


def stab_s1(kind, space, consistency=None):
    return space.stab_s1(kind, consistency=consistency)


def stab_s0(space):
    return space.stab_s0()


def local_matrices(space, coeffs=None, stab=DRECIPE):
    return space.local_matrices(coeffs, stab)


# ---------------------------------------------------------------------------
# DOF sampling of known functions (used by tests and the patch checks)


def dofs_of_function(space, fn):
    """DOF vector of a smooth function: point values plus quadrature moments."""
    layout = space.layout
    out = np.zeros(layout.n_dofs)
    out[:space.nv] = fn(space.vertices[:, 0], space.vertices[:, 1])
    for i, e in enumerate(space.edges):
        sl = layout.edge_slice(i)
        if sl.stop > sl.start:
            pts = e.gl_points[1:-1]
            out[sl] = fn(pts[:, 0], pts[:, 1])
    if layout.n_moments:
        qv = space.ortho.eval(space.quad.points, dim=layout.n_moments)
        vals = fn(space.quad.points[:, 0], space.quad.points[:, 1])
        out[layout.moment_slice] = (qv * space.quad.weights[:, None]).T @ vals / np.sqrt(space.area)
    return out


def dofs_of_poly(space, ortho_coeffs):
    """DOF vector of the polynomial with the given orthonormal-basis coefficients."""
    layout = space.layout
    coeffs = np.zeros(space.ortho.dim)
    coeffs[:len(ortho_coeffs)] = ortho_coeffs
    out = np.zeros(layout.n_dofs)
    out[:space.nv] = space.ortho.eval(space.vertices) @ coeffs
    for i, e in enumerate(space.edges):
        sl = layout.edge_slice(i)
        if sl.stop > sl.start:
            out[sl] = space.ortho.eval(e.gl_points[1:-1]) @ coeffs
    npm2 = layout.n_moments
    if npm2:
        out[layout.moment_slice] = coeffs[:npm2] / np.sqrt(space.area)
    return out
