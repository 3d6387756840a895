"""Polygonal meshes: construction, generators, grading layers, quality audits."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np


class MeshError(Exception):
    """Invalid mesh topology: bad indices, non-manifold edges, wrong orientation."""


class GeometryError(Exception):
    """Geometric failure: degenerate polygon, empty star-shape kernel, bad seeds."""


# ---------------------------------------------------------------------------
# polygon primitives


def polygon_area(vertices):
    """Signed area of a closed vertex loop (positive for counterclockwise)."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(vertices):
    """Area centroid of a simple polygon."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    a = 0.5 * np.sum(cross)
    if abs(a) < 1e-300:
        raise GeometryError("degenerate polygon: zero area")
    cx = float(np.sum((x + np.roll(x, -1)) * cross) / (6.0 * a))
    cy = float(np.sum((y + np.roll(y, -1)) * cross) / (6.0 * a))
    return np.array([cx, cy])


def polygon_diameter(vertices):
    v = np.asarray(vertices, dtype=float)
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d * d).sum(-1)).max())


def edge_lengths(vertices):
    v = np.asarray(vertices, dtype=float)
    return np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)


def is_convex(vertices, rel_tol=1e-12):
    """True when every turn of the ccw loop is a left turn or straight."""
    v = np.asarray(vertices, dtype=float)
    e = np.roll(v, -1, axis=0) - v
    e2 = np.roll(e, -1, axis=0)
    cross = e[:, 0] * e2[:, 1] - e[:, 1] * e2[:, 0]
    scale = np.abs(cross).max()
    if scale == 0.0:
        raise GeometryError("degenerate polygon: all vertices collinear")
    return bool((cross >= -rel_tol * scale).all())


def _clip_halfplane(poly, p0, p1, tol):
    """Keep the part of `poly` on the left of the directed line p0 -> p1."""
    if len(poly) == 0:
        return poly
    d = p1 - p0
    cross = d[0] * (poly[:, 1] - p0[1]) - d[1] * (poly[:, 0] - p0[0])
    out = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        sa, sb = cross[i], cross[j]
        if sa >= -tol:
            out.append(poly[i])
        if (sa > tol and sb < -tol) or (sa < -tol and sb > tol):
            t = sa / (sa - sb)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    if not out:
        return np.zeros((0, 2))
    return np.array(out)


def polygon_kernel(vertices, tol=1e-8):
    """Star-shape kernel of a simple ccw polygon (intersection of edge half-planes).

    Returns a (possibly empty) ccw polygon. `tol` is relative to the diameter.
    """
    v = np.asarray(vertices, dtype=float)
    diam = polygon_diameter(v)
    lo = v.min(axis=0) - 0.5 * diam
    hi = v.max(axis=0) + 0.5 * diam
    ker = np.array([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    abs_tol = tol * diam * 1e-6
    n = len(v)
    for i in range(n):
        ker = _clip_halfplane(ker, v[i], v[(i + 1) % n], abs_tol)
        if len(ker) < 3:
            return np.zeros((0, 2))
    if abs(polygon_area(ker)) < (tol * diam) ** 2:
        return np.zeros((0, 2))
    return ker


def chebyshev_center(poly):
    """Center and radius of the largest disc inscribed in a convex ccw polygon."""
    from scipy.optimize import linprog

    v = np.asarray(poly, dtype=float)
    e = np.roll(v, -1, axis=0) - v
    lens = np.linalg.norm(e, axis=1)
    keep = lens > 1e-14 * lens.max()
    v, e, lens = v[keep], e[keep], lens[keep]
    # inward normal of a ccw edge is the left normal
    nrm = np.column_stack([-e[:, 1], e[:, 0]]) / lens[:, None]
    # maximize r subject to n_i . (x - v_i) >= r
    a_ub = np.column_stack([-nrm, np.ones(len(v))])
    b_ub = -np.sum(nrm * v, axis=1)
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=a_ub, b_ub=b_ub,
                  bounds=[(None, None)] * 3, method="highs")
    if not res.success or res.x[2] <= 0:
        raise GeometryError("no inscribed disc found (empty or degenerate kernel)")
    return np.array(res.x[:2]), float(res.x[2])


def star_center(vertices):
    """A point the polygon is star-shaped about.

    Centroid for convex cells, center of the largest disc inscribed in the
    star-shape kernel otherwise.
    """
    v = np.asarray(vertices, dtype=float)
    if is_convex(v):
        return polygon_centroid(v)
    ker = polygon_kernel(v)
    if len(ker) < 3:
        raise GeometryError("cell has empty star-shape kernel")
    return chebyshev_center(ker)[0]


def subtriangulate(vertices, center=None):
    """Fan of triangles connecting a star center to the cell boundary.

    Returns an array of shape (n_edges, 3, 2); triangle k is
    (center, v_k, v_{k+1}). Raises GeometryError when no valid center exists.
    """
    v = np.asarray(vertices, dtype=float)
    if center is None:
        center = star_center(v)
    center = np.asarray(center, dtype=float)
    n = len(v)
    tris = np.empty((n, 3, 2))
    tris[:, 0] = center
    tris[:, 1] = v
    tris[:, 2] = np.roll(v, -1, axis=0)
    a = tris[:, 1] - tris[:, 0]
    b = tris[:, 2] - tris[:, 0]
    areas = 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    if (areas <= 0).any():
        raise GeometryError("fan triangle with non-positive area: bad star center")
    return tris


def point_in_polygon(point, vertices, tol=0.0):
    """Closed-polygon membership test; `tol` admits points within that distance."""
    v = np.asarray(vertices, dtype=float)
    p = np.asarray(point, dtype=float)
    if tol > 0.0 and _dist_to_boundary(p, v) <= tol:
        return True
    inside = False
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        if (a[1] > p[1]) != (b[1] > p[1]):
            xi = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0])
            if p[0] < xi:
                inside = not inside
    return inside


def _dist_to_boundary(p, v):
    a = v
    b = np.roll(v, -1, axis=0)
    ab = b - a
    ap = p[None, :] - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", ap, ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.linalg.norm(p[None, :] - proj, axis=1).min())


# ---------------------------------------------------------------------------
# mesh data structure


@dataclass
class PolyMesh:
    """Conforming polygonal mesh with a derived edge table.

    Cells are counterclockwise vertex-index loops. Edge k joins
    ``edges[k, 0] < edges[k, 1]``; ``edge_cells[k]`` holds the one or two
    incident cells (-1 marks the missing side of a boundary edge).
    """

    vertices: np.ndarray
    cells: list
    edges: np.ndarray
    edge_cells: np.ndarray
    cell_edges: list
    cell_edge_forward: list
    domain_tag: str = "custom"

    @classmethod
    def from_cells(cls, vertices, cells, domain_tag="custom"):
        vertices = np.asarray(vertices, dtype=float)
        cells = [np.asarray(c, dtype=np.intp) for c in cells]
        for ci, loop in enumerate(cells):
            if len(loop) < 3:
                raise MeshError(f"cell {ci} has fewer than 3 vertices")
            if len(np.unique(loop)) != len(loop):
                raise MeshError(f"cell {ci} repeats a vertex: loop is not simple")
            if polygon_area(vertices[loop]) <= 0:
                raise MeshError(f"cell {ci} is not counterclockwise")
        edges, edge_cells, cell_edges, forward = build_edges(cells, vertices)
        return cls(vertices, cells, edges, edge_cells, cell_edges, forward, domain_tag)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def boundary_edges(self):
        return self.edge_cells[:, 1] < 0

    @property
    def boundary_vertices(self):
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary_edges].ravel()] = True
        return mask

    def cell_vertices(self, i):
        return self.vertices[self.cells[i]]

    def cell_areas(self):
        return np.array([polygon_area(self.cell_vertices(i)) for i in range(self.n_cells)])

    def cell_diameters(self):
        return np.array([polygon_diameter(self.cell_vertices(i)) for i in range(self.n_cells)])

    def cell_centroids(self):
        return np.array([polygon_centroid(self.cell_vertices(i)) for i in range(self.n_cells)])

    def h_max(self):
        return float(self.cell_diameters().max())

    def validate(self):
        """Full audit: simple loops, conforming interior edges, single boundary flag."""
        for ci in range(self.n_cells):
            v = self.cell_vertices(ci)
            n = len(v)
            for i in range(n):
                a0, a1 = v[i], v[(i + 1) % n]
                for j in range(i + 1, n):
                    if j == i or (j + 1) % n == i or (i + 1) % n == j:
                        continue
                    b0, b1 = v[j], v[(j + 1) % n]
                    if _segments_cross(a0, a1, b0, b1):
                        raise MeshError(f"cell {ci} loop self-intersects")
        counts = np.sum(self.edge_cells >= 0, axis=1)
        if not np.all((counts == 1) | (counts == 2)):
            raise MeshError("edge with adjacency count outside {1, 2}")


def _segments_cross(a0, a1, b0, b1):
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1 = orient(a0, a1, b0)
    d2 = orient(a0, a1, b1)
    d3 = orient(b0, b1, a0)
    d4 = orient(b0, b1, a1)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0


def build_edges(cells, vertices):
    """Derive the undirected edge table of a cell collection.

    Every vertex pair shared by cell boundaries appears exactly once; an edge
    adjacent to three or more cells is a structural error.
    """
    vertices = np.asarray(vertices, dtype=float)
    nv = len(vertices)
    index = {}
    edges = []
    edge_cells = []
    cell_edges = []
    forward_flags = []
    for ci, loop in enumerate(cells):
        loop = np.asarray(loop)
        if loop.min() < 0 or loop.max() >= nv:
            raise MeshError(f"cell {ci} references an invalid vertex index")
        ids = np.empty(len(loop), dtype=np.intp)
        fwd = np.empty(len(loop), dtype=bool)
        for k in range(len(loop)):
            a, b = int(loop[k]), int(loop[(k + 1) % len(loop)])
            if a == b:
                raise MeshError(f"cell {ci} has a zero-length side")
            key = (a, b) if a < b else (b, a)
            eid = index.get(key)
            if eid is None:
                eid = len(edges)
                index[key] = eid
                edges.append(key)
                edge_cells.append([ci, -1])
            else:
                if edge_cells[eid][1] >= 0:
                    raise MeshError(f"non-manifold edge {key}: more than two cells")
                edge_cells[eid][1] = ci
            ids[k] = eid
            fwd[k] = a < b
        cell_edges.append(ids)
        forward_flags.append(fwd)
    return (np.array(edges, dtype=np.intp).reshape(-1, 2),
            np.array(edge_cells, dtype=np.intp).reshape(-1, 2),
            cell_edges, forward_flags)


# ---------------------------------------------------------------------------
# layered meshes


@dataclass
class LayeredMesh:
    """Mesh with per-cell layer indices measured from marked singular points."""

    mesh: PolyMesh
    layer_of_cell: np.ndarray
    n_layers: int
    singular_points: np.ndarray
    sigma: float | None = None


def compute_layers(mesh, singular_points, n_layers):
    """Assign layer indices by cell-adjacency distance from the marked points.

    Layer 0 holds the cells whose closure touches a marked point; layer j the
    cells touching layer j-1 and no lower layer. Cells farther than the
    requested depth saturate at the last layer index.
    """
    pts = np.atleast_2d(np.asarray(singular_points, dtype=float))
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    nc = mesh.n_cells
    layer = np.full(nc, -1, dtype=np.intp)
    diams = mesh.cell_diameters()
    for ci in range(nc):
        poly = mesh.cell_vertices(ci)
        tol = 1e-9 * diams[ci]
        if any(point_in_polygon(p, poly, tol=tol) for p in pts):
            layer[ci] = 0
    if not (layer == 0).any():
        raise ValueError("no cell touches a singular point")

    vert_to_cells = defaultdict(set)
    for ci, loop in enumerate(mesh.cells):
        for v in loop:
            vert_to_cells[int(v)].add(ci)

    frontier = set(np.flatnonzero(layer == 0))
    for j in range(1, n_layers):
        nxt = set()
        for ci in frontier:
            for v in mesh.cells[ci]:
                for cj in vert_to_cells[int(v)]:
                    if layer[cj] < 0:
                        nxt.add(cj)
        if not nxt:
            break
        for cj in nxt:
            layer[cj] = j
        frontier = nxt
    layer[layer < 0] = n_layers - 1
    return LayeredMesh(mesh, layer, int(layer.max()) + 1, pts, None)


# ---------------------------------------------------------------------------
# generators


class _VertexPool:
    """Deduplicating vertex registry keyed on exact coordinates."""

    def __init__(self):
        self.coords = []
        self._index = {}

    def add(self, x, y):
        x = x + 0.0 if x != 0 else 0.0
        y = y + 0.0 if y != 0 else 0.0
        key = (x, y)
        idx = self._index.get(key)
        if idx is None:
            idx = len(self.coords)
            self._index[key] = idx
            self.coords.append([x, y])
        return idx

    def array(self):
        return np.array(self.coords, dtype=float)


def generate_cartesian(nx, ny, rect, domain_tag="cartesian"):
    """Uniform nx-by-ny mesh of axis-aligned rectangular cells."""
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    xmin, xmax, ymin, ymax = (float(t) for t in rect)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError("degenerate rectangle")
    xs = np.linspace(xmin, xmax, nx + 1)
    ys = np.linspace(ymin, ymax, ny + 1)
    xg, yg = np.meshgrid(xs, ys, indexing="xy")
    vertices = np.column_stack([xg.ravel(), yg.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    cells = []
    for j in range(ny):
        for i in range(nx):
            cells.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)])
    return PolyMesh.from_cells(vertices, cells, domain_tag)


def _mirror_points(pts, rect):
    xmin, xmax, ymin, ymax = rect
    left = np.column_stack([2 * xmin - pts[:, 0], pts[:, 1]])
    right = np.column_stack([2 * xmax - pts[:, 0], pts[:, 1]])
    bottom = np.column_stack([pts[:, 0], 2 * ymin - pts[:, 1]])
    top = np.column_stack([pts[:, 0], 2 * ymax - pts[:, 1]])
    return np.vstack([pts, left, right, bottom, top])


def _voronoi_polygons(pts, rect):
    """Clipped Voronoi cells of `pts` in `rect` via boundary mirroring.

    Returns (vertex coords, list of ccw index loops). Mirroring each seed
    across the four rectangle sides makes every original cell finite and
    aligned with the rectangle boundary.
    """
    from scipy.spatial import Voronoi

    vor = Voronoi(_mirror_points(pts, rect))
    loops = []
    for i in range(len(pts)):
        region = vor.regions[vor.point_region[i]]
        if len(region) < 3 or -1 in region:
            raise GeometryError(f"unbounded or empty Voronoi cell for seed {i}")
        coords = vor.vertices[region]
        ang = np.arctan2(coords[:, 1] - pts[i, 1], coords[:, 0] - pts[i, 0])
        order = np.argsort(ang)
        loops.append(np.asarray(region, dtype=np.intp)[order])
    return vor.vertices.copy(), loops


def _snap_and_merge(coords, loops, rect, tol):
    """Snap near-boundary coordinates onto the rectangle and merge duplicates."""
    from scipy.spatial import cKDTree

    xmin, xmax, ymin, ymax = rect
    for k, bound in ((0, xmin), (0, xmax), (1, ymin), (1, ymax)):
        hit = np.abs(coords[:, k] - bound) < tol
        coords[hit, k] = bound

    parent = np.arange(len(coords))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in cKDTree(coords).query_pairs(tol):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    root = np.array([find(a) for a in range(len(coords))])
    used = sorted({int(root[v]) for loop in loops for v in loop})
    remap = {r: k for k, r in enumerate(used)}
    new_coords = coords[used]
    new_loops = []
    for loop in loops:
        ids = [remap[int(root[v])] for v in loop]
        dedup = [ids[k] for k in range(len(ids)) if ids[k] != ids[(k + 1) % len(ids)]]
        if len(dedup) < 3:
            raise GeometryError("Voronoi cell collapsed during vertex merge")
        new_loops.append(np.asarray(dedup, dtype=np.intp))
    return new_coords, new_loops


def generate_voronoi(seeds, rect, lloyd_iterations=0, rng_seed=0):
    """Clipped Voronoi mesh of a rectangle after Lloyd centroid smoothing.

    `seeds` is either a seed count (sampled uniformly with `rng_seed`) or an
    explicit (n, 2) array of points inside the rectangle. Fixed seeds make the
    construction bit-reproducible.
    """
    xmin, xmax, ymin, ymax = (float(t) for t in rect)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError("degenerate rectangle")
    rng = np.random.default_rng(rng_seed)
    diam = float(np.hypot(xmax - xmin, ymax - ymin))
    if isinstance(seeds, (int, np.integer)):
        if seeds < 1:
            raise ValueError("need at least one seed")
        pts = rng.uniform([xmin, ymin], [xmax, ymax], size=(int(seeds), 2))
    else:
        pts = np.array(seeds, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("seed array must have shape (n, 2)")
        inside = (pts[:, 0] > xmin) & (pts[:, 0] < xmax) & (pts[:, 1] > ymin) & (pts[:, 1] < ymax)
        if not inside.all():
            raise ValueError("seeds must lie strictly inside the rectangle")
    # tiny deterministic jitter breaks cocircular degeneracies
    pts = pts + 1e-12 * diam * rng.uniform(-1.0, 1.0, size=pts.shape)
    if len(pts) > 1:
        d = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((d * d).sum(-1)) + np.eye(len(pts)) * diam
        if dist.min() < 1e-9 * diam:
            raise GeometryError("duplicate seeds after perturbation")

    for _ in range(int(lloyd_iterations)):
        coords, loops = _voronoi_polygons(pts, rect)
        pts = np.array([polygon_centroid(coords[loop]) for loop in loops])
    coords, loops = _voronoi_polygons(pts, rect)
    coords, loops = _snap_and_merge(coords, loops, (xmin, xmax, ymin, ymax), 1e-9 * diam)
    return PolyMesh.from_cells(coords, loops, "voronoi")


def generate_graded(domain_kind, n, sigma):
    """Geometrically graded mesh of nested frames shrinking toward the origin.

    For the L-shape the innermost layer is the three corner squares of side
    sigma^n and each surrounding L-frame is cut in two by the diagonal through
    the re-entrant corner; the frame cells next to the squares carry hanging
    vertices. For the checkerboard square the layers are concentric square
    frames split into quadrants.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not (0.0 < sigma < 1.0):
        raise ValueError("sigma must lie in (0, 1)")
    if domain_kind == "Lshape":
        mesh, layers = _graded_lshape(n, sigma)
    elif domain_kind == "square_checkerboard":
        mesh, layers = _graded_checkerboard(n, sigma)
    else:
        raise ValueError(f"unsupported domain kind: {domain_kind!r}")
    return LayeredMesh(mesh, layers, n + 1, np.array([[0.0, 0.0]]), sigma)


def _graded_lshape(n, sigma):
    pool = _VertexPool()
    scales = [sigma ** k for k in range(n + 1)]
    cells = []
    layers = []
    s = scales[n]
    # layer 0: three squares of side sigma^n around the re-entrant corner
    squares = [
        [(0, -s), (s, -s), (s, 0), (0, 0)],
        [(0, 0), (s, 0), (s, s), (0, s)],
        [(-s, 0), (0, 0), (0, s), (-s, s)],
    ]
    for sq in squares:
        cells.append([pool.add(*q) for q in sq])
        layers.append(0)
    # layers 1..n: L-frames between scales sigma^{k+1} and sigma^k,
    # each split by the diagonal segment from (a, a) to (b, b)
    for k in range(n - 1, -1, -1):
        a, b = scales[k + 1], scales[k]
        lower = [(a, a), (a, -a), (0, -a), (0, -b), (b, -b), (b, b)]
        upper = [(a, a), (b, b), (-b, b), (-b, 0), (-a, 0), (-a, a)]
        if k == n - 1:
            # hanging vertices where the frame meets the two stacked squares
            lower.insert(1, (a, 0))
            upper.append((0, a))
        j = n - k
        for loop in (lower, upper):
            cells.append([pool.add(*q) for q in loop])
            layers.append(j)
    mesh = PolyMesh.from_cells(pool.array(), cells, "lshape")
    return mesh, np.asarray(layers, dtype=np.intp)


def _graded_checkerboard(n, sigma):
    pool = _VertexPool()
    scales = [sigma ** k for k in range(n + 1)]

    def rot(pt, q):
        x, y = pt
        for _ in range(q):
            x, y = -y, x
        return x, y

    cells = []
    layers = []
    s = scales[n]
    for q in range(4):
        loop = [rot(p, q) for p in [(0, 0), (s, 0), (s, s), (0, s)]]
        cells.append([pool.add(*pt) for pt in loop])
        layers.append(0)
    for k in range(n - 1, -1, -1):
        a, b = scales[k + 1], scales[k]
        frame = [(a, 0), (b, 0), (b, b), (0, b), (0, a), (a, a)]
        j = n - k
        for q in range(4):
            loop = [rot(p, q) for p in frame]
            cells.append([pool.add(*pt) for pt in loop])
            layers.append(j)
    mesh = PolyMesh.from_cells(pool.array(), cells, "checkerboard")
    return mesh, np.asarray(layers, dtype=np.intp)


# ---------------------------------------------------------------------------
# shape regularity


@dataclass
class RegularityReport:
    """Mesh-wide shape-regularity audit.

    gamma_d1 is the minimum over cells of (shortest edge / diameter); gamma_d2
    the minimum of (largest disc inscribed in the star-shape kernel / diameter).
    """

    gamma_d1: float
    gamma_d2: float
    cell_gamma_d1: np.ndarray
    cell_gamma_d2: np.ndarray
    threshold: float
    flagged: np.ndarray


def check_regularity(mesh, gamma_threshold=0.0):
    nc = mesh.n_cells
    g1 = np.empty(nc)
    g2 = np.empty(nc)
    for ci in range(nc):
        v = mesh.cell_vertices(ci)
        diam = polygon_diameter(v)
        g1[ci] = edge_lengths(v).min() / diam
        ker = polygon_kernel(v)
        if len(ker) < 3:
            g2[ci] = 0.0
        else:
            g2[ci] = chebyshev_center(ker)[1] / diam
    flagged = np.flatnonzero((g1 < gamma_threshold) | (g2 < gamma_threshold))
    return RegularityReport(float(g1.min()), float(g2.min()), g1, g2,
                            float(gamma_threshold), flagged)


# ---------------------------------------------------------------------------
# mesh file io


def write_mesh(path, mesh, layers=None, degrees=None):
    """Write the line-based mesh format (`polymesh 1` header)."""
    lines = ["polymesh 1"]
    for x, y in mesh.vertices:
        lines.append(f"v {float(x)!r} {float(y)!r}")
    for loop in mesh.cells:
        lines.append("c " + " ".join(str(int(i)) for i in loop))
    if layers is not None:
        for j in layers:
            lines.append(f"layer {int(j)}")
    if degrees is not None:
        for p in degrees:
            lines.append(f"deg {int(p)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path):
    """Read a mesh file; returns (mesh, layers or None, degrees or None)."""
    vertices = []
    cells = []
    layers = []
    degrees = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "polymesh 1":
            raise MeshError(f"unsupported mesh file header: {header!r}")
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(parts[1]), float(parts[2])])
            elif parts[0] == "c":
                cells.append([int(t) for t in parts[1:]])
            elif parts[0] == "layer":
                layers.append(int(parts[1]))
            elif parts[0] == "deg":
                degrees.append(int(parts[1]))
            else:
                raise MeshError(f"unknown mesh file record: {parts[0]!r}")
    mesh = PolyMesh.from_cells(np.array(vertices), cells)
    return (mesh,
            np.asarray(layers, dtype=np.intp) if layers else None,
            np.asarray(degrees, dtype=np.intp) if degrees else None)
