"""Scaled polynomial bases on polygons, L2 orthonormalization, quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import cholesky, solve_triangular

from .geometry import polygon_area, polygon_centroid, polygon_diameter, subtriangulate


class ConditioningError(Exception):
    """Numerically singular Gram system on some element."""


def poly_dim(degree):
    """Dimension of the bivariate polynomial space of total degree <= `degree`."""
    if degree < 0:
        return 0
    return (degree + 1) * (degree + 2) // 2


@lru_cache(maxsize=None)
def mono_exponents(degree):
    """Exponent pairs (a, b) ordered by total degree, then by increasing b."""
    out = [(d - j, j) for d in range(degree + 1) for j in range(d + 1)]
    return np.array(out, dtype=np.intp).reshape(-1, 2)


def _exp_index(a, b):
    d = a + b
    return d * (d + 1) // 2 + b


@lru_cache(maxsize=None)
def _mono_recurrence(degree):
    """Parent column and multiplier choice building each monomial from a lower one."""
    exps = mono_exponents(degree)
    parent = np.zeros(len(exps), dtype=np.intp)
    use_x = np.zeros(len(exps), dtype=bool)
    for k, (a, b) in enumerate(exps):
        if a + b == 0:
            continue
        if a > 0:
            parent[k] = _exp_index(a - 1, b)
            use_x[k] = True
        else:
            parent[k] = _exp_index(a, b - 1)
    return parent, use_x


@dataclass(frozen=True)
class MonomialBasis:
    """Monomials ((x-xc)/h)^a ((y-yc)/h)^b with a+b <= degree."""

    degree: int
    center: tuple
    h: float

    @property
    def dim(self):
        return poly_dim(self.degree)

    @classmethod
    def for_cell(cls, vertices):
        return cls(0, tuple(polygon_centroid(vertices)), polygon_diameter(vertices))

    def scaled_coords(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return (pts - np.asarray(self.center)) / self.h

    def eval(self, points):
        sc = self.scaled_coords(points)
        parent, use_x = _mono_recurrence(self.degree)
        out = np.empty((len(sc), self.dim))
        out[:, 0] = 1.0
        xs, ys = sc[:, 0], sc[:, 1]
        for k in range(1, self.dim):
            out[:, k] = out[:, parent[k]] * (xs if use_x[k] else ys)
        return out

    def eval_grad(self, points, values=None):
        vals = self.eval(points) if values is None else values
        gx = np.zeros_like(vals)
        gy = np.zeros_like(vals)
        for k, (a, b) in enumerate(mono_exponents(self.degree)):
            if a > 0:
                gx[:, k] = (a / self.h) * vals[:, _exp_index(a - 1, b)]
            if b > 0:
                gy[:, k] = (b / self.h) * vals[:, _exp_index(a, b - 1)]
        return gx, gy


def mono_dx_matrix(degree, h):
    """Map monomial coefficients (degree <= `degree`) to those of d/dx."""
    rows, cols = poly_dim(degree - 1), poly_dim(degree)
    m = np.zeros((rows, cols))
    for k, (a, b) in enumerate(mono_exponents(degree)):
        if a > 0:
            m[_exp_index(a - 1, b), k] = a / h
    return m


def mono_dy_matrix(degree, h):
    rows, cols = poly_dim(degree - 1), poly_dim(degree)
    m = np.zeros((rows, cols))
    for k, (a, b) in enumerate(mono_exponents(degree)):
        if b > 0:
            m[_exp_index(a, b - 1), k] = b / h
    return m


def mono_laplacian_matrix(degree, h):
    rows, cols = poly_dim(degree - 2), poly_dim(degree)
    m = np.zeros((rows, cols))
    for k, (a, b) in enumerate(mono_exponents(degree)):
        if a > 1:
            m[_exp_index(a - 2, b), k] += a * (a - 1) / h ** 2
        if b > 1:
            m[_exp_index(a, b - 2), k] += b * (b - 1) / h ** 2
    return m


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Weighted points on one polygon with a declared polynomial exactness."""

    points: np.ndarray
    weights: np.ndarray
    order: int


@lru_cache(maxsize=None)
def cached_leggauss(n):
    return npleg.leggauss(n)


@lru_cache(maxsize=None)
def _duffy_reference(order):
    """Tensor Gauss rule on the unit triangle, exact to the requested degree."""
    n = (order + 3) // 2
    x, w = npleg.leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(wu, wu) * (1.0 - uu)
    xi = uu
    eta = vv * (1.0 - uu)
    return xi.ravel(), eta.ravel(), ww.ravel()


def triangle_rule(tri, order):
    """Gauss rule of the given exactness on one triangle (3, 2)."""
    xi, eta, w = _duffy_reference(order)
    v0, v1, v2 = np.asarray(tri, dtype=float)
    pts = v0 + np.outer(xi, v1 - v0) + np.outer(eta, v2 - v0)
    jac = (v1[0] - v0[0]) * (v2[1] - v0[1]) - (v1[1] - v0[1]) * (v2[0] - v0[0])
    return pts, w * jac


def polygon_quadrature(cell, order, center=None):
    """Composite rule on a star-shaped polygon: one Gauss rule per fan triangle."""
    tris = subtriangulate(cell, center=center)
    pts = []
    wts = []
    for tri in tris:
        p, w = triangle_rule(tri, order)
        pts.append(p)
        wts.append(w)
    return QuadratureRule(np.vstack(pts), np.concatenate(wts), int(order))


# ---------------------------------------------------------------------------
# edge nodes


@dataclass(frozen=True)
class EdgeNodes:
    """Gauss-Lobatto nodes of degree p on [-1, 1], endpoints included."""

    degree: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def internal(self):
        return self.nodes[1:-1]

    def map_to_segment(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        t = 0.5 * (self.nodes + 1.0)
        return a[None, :] + t[:, None] * (b - a)[None, :]


@lru_cache(maxsize=None)
def gauss_lobatto(p):
    """p+1 Gauss-Lobatto nodes: roots of (1-x^2) P_p'(x), weights 2/(p(p+1)P_p^2)."""
    if p < 1:
        raise ValueError("degree must be >= 1")
    if p == 1:
        return EdgeNodes(1, np.array([-1.0, 1.0]), np.array([1.0, 1.0]))
    coeffs = np.zeros(p + 1)
    coeffs[p] = 1.0
    interior = np.sort(npleg.legroots(npleg.legder(coeffs)))
    nodes = np.concatenate([[-1.0], interior.real, [1.0]])
    pn = npleg.legval(nodes, coeffs)
    weights = 2.0 / (p * (p + 1) * pn ** 2)
    return EdgeNodes(p, nodes, weights)


# ---------------------------------------------------------------------------
# orthonormalization


@dataclass(frozen=True)
class OrthoBasis:
    """Elementwise L2-orthonormal polynomial basis.

    Row alpha of `coeff` gives the monomial coefficients of basis function
    q_alpha; the triangular structure keeps the degree grading, so the leading
    poly_dim(l) functions span the degree-l subspace.
    """

    degree: int
    coeff: np.ndarray
    mono: MonomialBasis
    area: float

    @property
    def dim(self):
        return poly_dim(self.degree)

    def eval(self, points, dim=None):
        v = self.mono.eval(points) @ self.coeff.T
        return v if dim is None else v[:, :dim]

    def eval_grad(self, points, dim=None):
        gx, gy = self.mono.eval_grad(points)
        gx = gx @ self.coeff.T
        gy = gy @ self.coeff.T
        if dim is not None:
            gx, gy = gx[:, :dim], gy[:, :dim]
        return gx, gy

    def eval_all(self, points):
        """Values and both gradient components sharing one monomial table."""
        mv = self.mono.eval(points)
        gmx, gmy = self.mono.eval_grad(points, values=mv)
        ct = self.coeff.T
        return mv @ ct, gmx @ ct, gmy @ ct

    def mono_to_ortho(self, mono_coeffs, dim):
        """Re-express a polynomial given by monomial coefficients in this basis."""
        block = self.coeff[:dim, :dim]
        return solve_triangular(block.T, np.asarray(mono_coeffs)[:dim], lower=False,
                                check_finite=False)

    def gram(self, rule, dim=None):
        v = self.eval(rule.points, dim=dim)
        return (v * rule.weights[:, None]).T @ v


COND_LIMIT = 1e14


def orthonormalize(cell, degree, rule=None):
    """Orthonormal basis from a refined Cholesky of the monomial Gram matrix.

    The monomial Gram is diagonally prescaled, factored, and the factorization
    is then refined against the Gram of the current basis values; the value
    recomputation keeps each pass well conditioned, so the final deviation from
    identity sits at rounding level even on distorted cells.
    """
    cell = np.asarray(cell, dtype=float)
    if rule is None:
        rule = polygon_quadrature(cell, 2 * degree)
    if rule.order < 2 * degree:
        raise ValueError("quadrature exactness below 2*degree")
    area = polygon_area(cell)
    mono = MonomialBasis(degree, tuple(polygon_centroid(cell)), polygon_diameter(cell))
    v = mono.eval(rule.points)
    w = rule.weights[:, None]
    gram = (v * w).T @ v
    scale = 1.0 / np.sqrt(np.diag(gram))
    gs = gram * np.outer(scale, scale)
    cond = np.linalg.cond(0.5 * (gs + gs.T))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ConditioningError(
            f"scaled Gram condition {cond:.3e} beyond {COND_LIMIT:.0e} "
            f"(cell centered at {mono.center}, degree {degree})")
    coeff = np.diag(scale)
    n_passes = 2 if cond < 1e8 else 3
    for _ in range(n_passes):
        vq = v @ coeff.T
        g = (vq * w).T @ vq
        g = 0.5 * (g + g.T)
        try:
            low = cholesky(g, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(f"Gram Cholesky failed on cell at {mono.center}") from exc
        coeff = solve_triangular(low, coeff, lower=True, check_finite=False)
    return OrthoBasis(int(degree), coeff, mono, area)


def monomial_moments_greens(cell, degree):
    """Analytic moments of the scaled monomials via edge integration.

    Uses int_K m_(a,b) = h/(a+1) * sum_e int_e m_(a+1,b) n_x ds with exact 1D
    Gauss rules on each edge; this is the test oracle for polygon quadrature.
    """
    cell = np.asarray(cell, dtype=float)
    center = polygon_centroid(cell)
    h = polygon_diameter(cell)
    mono = MonomialBasis(degree + 1, tuple(center), h)
    exps = mono_exponents(degree)
    n = len(cell)
    moments = np.zeros(len(exps))
    ng = degree // 2 + 2
    gx, gw = npleg.leggauss(ng)
    t = 0.5 * (gx + 1.0)
    for i in range(n):
        a, b = cell[i], cell[(i + 1) % n]
        edge = b - a
        length = np.hypot(*edge)
        nx = edge[1] / length
        pts = a[None, :] + t[:, None] * edge[None, :]
        vals = mono.eval(pts)
        for k, (ea, eb) in enumerate(exps):
            col = _exp_index(ea + 1, eb)
            moments[k] += h / (ea + 1) * nx * np.sum(0.5 * gw * length * vals[:, col])
    return moments
