"""Per-cell and per-edge polynomial degree assignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DegreeMap:
    """Cell degrees plus edge degrees under the maximum rule."""

    cell_degrees: np.ndarray
    edge_degrees: np.ndarray
    regime: str

    def cell_edge_degrees(self, mesh, ci):
        return tuple(int(self.edge_degrees[e]) for e in mesh.cell_edges[ci])


def edge_degrees_from_cells(mesh, cell_degrees):
    """Maximum rule: interior edges take the larger adjacent cell degree."""
    cell_degrees = np.asarray(cell_degrees, dtype=np.intp)
    out = np.empty(mesh.n_edges, dtype=np.intp)
    for e, (c0, c1) in enumerate(mesh.edge_cells):
        if c1 < 0:
            out[e] = cell_degrees[c0]
        else:
            out[e] = max(cell_degrees[c0], cell_degrees[c1])
    return out


def assign_uniform(mesh, p):
    """All cells and edges at degree p."""
    if p < 1:
        raise ValueError("degree must be >= 1")
    cell = np.full(mesh.n_cells, int(p), dtype=np.intp)
    return DegreeMap(cell, edge_degrees_from_cells(mesh, cell), f"uniform({p})")


def assign_hp(layered, mu):
    """Layerwise-linear degrees: a cell in layer j gets degree mu*(j+1)."""
    if mu < 1:
        raise ValueError("mu must be >= 1")
    if layered.layer_of_cell is None or len(layered.layer_of_cell) != layered.mesh.n_cells:
        raise ValueError("layered mesh is missing layer data")
    cell = np.asarray(mu * (layered.layer_of_cell + 1), dtype=np.intp)
    return DegreeMap(cell, edge_degrees_from_cells(layered.mesh, cell), f"hp(mu={mu})")
