"""Global DOF enumeration and sparse assembly of the system matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .local import DRECIPE, LocalSpace
from .polyspace import poly_dim

DIRICHLET = "dirichlet_zero"
NEUMANN = "neumann"


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = DIRICHLET

    def __post_init__(self):
        if self.kind not in (DIRICHLET, NEUMANN):
            raise ValueError(f"unknown boundary condition kind: {self.kind!r}")

    @property
    def is_dirichlet(self):
        return self.kind == DIRICHLET


class CoefficientField:
    """Diffusion tensor and potential, evaluated at quadrature points.

    `diffusion` is a constant, a scalar function rho(x, y) for rho*I, or a
    function returning the (kxx, kxy, kyy) triple; `potential` is a constant
    or scalar function. Discontinuous fields must be aligned with cell
    interfaces (quadrature points never straddle a cell).
    """

    def __init__(self, diffusion=1.0, potential=None):
        self._diffusion = diffusion
        self._potential = potential

    def k_at(self, x, y):
        d = self._diffusion
        if callable(d):
            out = d(x, y)
            if isinstance(out, tuple):
                return out
            return out, np.zeros_like(np.asarray(out, dtype=float)), out
        k = float(d)
        ones = np.ones_like(np.asarray(x, dtype=float))
        return k * ones, 0.0 * ones, k * ones

    def v_at(self, x, y):
        v = self._potential
        if v is None:
            return None
        if callable(v):
            return np.asarray(v(x, y), dtype=float)
        return float(v) * np.ones_like(np.asarray(x, dtype=float))

    @property
    def has_potential(self):
        return self._potential is not None

    def sampled_bounds(self, points):
        """Eigenvalue range of the tensor and potential range over sample points."""
        x, y = points[:, 0], points[:, 1]
        kxx, kxy, kyy = (np.broadcast_to(np.asarray(a, dtype=float), x.shape)
                         for a in self.k_at(x, y))
        mean = 0.5 * (kxx + kyy)
        disc = np.sqrt(0.25 * (kxx - kyy) ** 2 + kxy ** 2)
        lo, hi = float((mean - disc).min()), float((mean + disc).max())
        v = self.v_at(x, y)
        vr = (0.0, 0.0) if v is None else (float(np.min(v)), float(np.max(v)))
        return (lo, hi), vr


@dataclass
class GlobalDofMap:
    """Deterministic global enumeration: vertices, then edges, then cells."""

    mesh: object
    degree_map: object
    bc: BoundaryCondition
    edge_offset: np.ndarray
    cell_offset: np.ndarray
    n_total: int
    free_index: np.ndarray
    n_free: int
    boundary_mask: np.ndarray

    def cell_to_global(self, ci):
        """Global index per local DOF slot of cell `ci` (reversing flipped edges)."""
        mesh = self.mesh
        loop = mesh.cells[ci]
        out = [int(v) for v in loop]
        for k, eid in enumerate(mesh.cell_edges[ci]):
            pe = int(self.degree_map.edge_degrees[eid])
            base = self.edge_offset[eid]
            slots = list(range(base, base + pe - 1))
            if not mesh.cell_edge_forward[ci][k]:
                slots.reverse()
            out.extend(slots)
        p = int(self.degree_map.cell_degrees[ci])
        base = self.cell_offset[ci]
        out.extend(range(base, base + poly_dim(p - 2)))
        return np.asarray(out, dtype=np.intp)


def build_dof_map(mesh, degree_map, bc):
    """Enumerate global DOFs and the free subset after boundary elimination."""
    if len(degree_map.edge_degrees) != mesh.n_edges:
        raise ValueError("degree map does not match the mesh edge table")
    if len(degree_map.cell_degrees) != mesh.n_cells:
        raise ValueError("degree map does not match the mesh cell count")
    nv = mesh.n_vertices
    edge_counts = degree_map.edge_degrees - 1
    edge_offset = nv + np.concatenate([[0], np.cumsum(edge_counts[:-1])])
    n_edge = int(edge_counts.sum())
    cell_counts = np.array([poly_dim(int(p) - 2) for p in degree_map.cell_degrees])
    cell_offset = nv + n_edge + np.concatenate([[0], np.cumsum(cell_counts[:-1])])
    n_total = nv + n_edge + int(cell_counts.sum())

    boundary = np.zeros(n_total, dtype=bool)
    boundary[:nv] = mesh.boundary_vertices
    for eid in np.flatnonzero(mesh.boundary_edges):
        boundary[edge_offset[eid]:edge_offset[eid] + edge_counts[eid]] = True

    free_index = np.full(n_total, -1, dtype=np.intp)
    if bc.is_dirichlet:
        free = ~boundary
    else:
        free = np.ones(n_total, dtype=bool)
    n_free = int(free.sum())
    if n_free == 0:
        raise ValueError("no free DOFs: mesh too coarse for Dirichlet elimination")
    free_index[free] = np.arange(n_free)
    return GlobalDofMap(mesh, degree_map, bc, edge_offset.astype(np.intp),
                        cell_offset.astype(np.intp), n_total, free_index, n_free, boundary)


@dataclass
class SystemMatrices:
    """Assembled stiffness-plus-potential matrix and mass matrix (free DOFs)."""

    a: sp.csr_matrix
    m: sp.csr_matrix
    dof_map: GlobalDofMap
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.a.shape[0]


def assemble(mesh, degree_map, coeffs=None, stab=DRECIPE, bc=BoundaryCondition(NEUMANN),
             quad_order=None, dof_map=None):
    """Scatter-add the local matrices of every cell into sparse CSR systems.

    `quad_order` may be a callable p -> order (default 2p+2 per element).
    Dirichlet rows and columns are eliminated, which keeps the generalized
    eigenproblem symmetric definite.
    """
    if dof_map is None:
        dof_map = build_dof_map(mesh, degree_map, bc)
    rows_a, cols_a, vals_a = [], [], []
    rows_m, cols_m, vals_m = [], [], []
    for ci in range(mesh.n_cells):
        p = int(degree_map.cell_degrees[ci])
        order = quad_order(p) if callable(quad_order) else quad_order
        try:
            space = LocalSpace(mesh.cell_vertices(ci), p,
                               degree_map.cell_edge_degrees(mesh, ci), quad_order=order)
            mats = space.local_matrices(coeffs, stab)
        except Exception as exc:
            raise type(exc)(f"cell {ci}: {exc}") from exc
        gdofs = dof_map.cell_to_global(ci)
        free = dof_map.free_index[gdofs]
        keep = free >= 0
        idx = free[keep]
        a_local = mats.a[np.ix_(keep, keep)]
        if mats.b.any():
            a_local = a_local + mats.b[np.ix_(keep, keep)]
        c_local = mats.c[np.ix_(keep, keep)]
        grid_r, grid_c = np.meshgrid(idx, idx, indexing="ij")
        rows_a.append(grid_r.ravel())
        cols_a.append(grid_c.ravel())
        vals_a.append(a_local.ravel())
        rows_m.append(grid_r.ravel())
        cols_m.append(grid_c.ravel())
        vals_m.append(c_local.ravel())
    n = dof_map.n_free
    a = sp.coo_matrix((np.concatenate(vals_a),
                       (np.concatenate(rows_a), np.concatenate(cols_a))), shape=(n, n)).tocsr()
    m = sp.coo_matrix((np.concatenate(vals_m),
                       (np.concatenate(rows_m), np.concatenate(cols_m))), shape=(n, n)).tocsr()
    meta = {"n_cells": mesh.n_cells, "regime": degree_map.regime, "bc": bc.kind}
    return SystemMatrices(a, m, dof_map, meta)


def constant_vector(dof_map):
    """Free-DOF vector of the constant function 1.

    Vertex and edge values are 1; each cell's moment block is (1, 0, ..., 0)
    because the higher orthonormal moments of a constant vanish. Coincides
    with the all-ones vector whenever every cell degree is <= 2.
    """
    mesh = dof_map.mesh
    full = np.zeros(dof_map.n_total)
    nv = mesh.n_vertices
    full[:nv] = 1.0
    counts = dof_map.degree_map.edge_degrees - 1
    for eid in range(mesh.n_edges):
        full[dof_map.edge_offset[eid]:dof_map.edge_offset[eid] + counts[eid]] = 1.0
    for ci in range(mesh.n_cells):
        if poly_dim(int(dof_map.degree_map.cell_degrees[ci]) - 2) > 0:
            full[dof_map.cell_offset[ci]] = 1.0
    return full[dof_map.free_index >= 0]


def write_coo(path, mat):
    """Coordinate-format text dump (`i j value` per line, 0-based indices)."""
    coo = sp.coo_matrix(mat)
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {float(v)!r}\n")


def read_coo(path):
    rows, cols, vals = [], [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            vals.append(float(parts[2]))
    n = max(max(rows), max(cols)) + 1 if rows else 0
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
