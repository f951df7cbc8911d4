"""Interval and structured triangular meshes with node/cell connectivity.

Meshes are immutable after construction and safe for concurrent reads.
``h_min``/``h_max`` are conservative mesh-width bounds: the minimal shortest
edge and the maximal cell diameter.  For intervals both reduce to cell
lengths; for the structured triangulations the shortest edge is the grid
spacing and the diameter is the hypotenuse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class MeshError(ValueError):
    """Invalid mesh construction parameters."""


@dataclass(frozen=True, eq=False)
class SimplicialMesh:
    """Matching simplicial mesh of the unit interval or unit square.

    Attributes
    ----------
    dim : 1 or 2
    nodes : (n_nodes, dim) float array of vertex coordinates
    cells : (n_cells, dim+1) int array of vertex indices
    boundary_node_flags : (n_nodes,) bool array, True exactly on the
        domain boundary
    h_min, h_max : mesh-width bounds (see module docstring)
    """

    dim: int
    nodes: np.ndarray
    cells: np.ndarray
    boundary_node_flags: np.ndarray
    h_min: float
    h_max: float

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    def cell_measures(self) -> np.ndarray:
        """Lengths (1D) or areas (2D) of all cells."""
        verts = self.nodes[self.cells]
        if self.dim == 1:
            return verts[:, 1, 0] - verts[:, 0, 0]
        d1 = verts[:, 1] - verts[:, 0]
        d2 = verts[:, 2] - verts[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def cell_barycenters(self) -> np.ndarray:
        return self.nodes[self.cells].mean(axis=1)


@dataclass(frozen=True, eq=False)
class NodeAdjacency:
    """Node-to-cell incidence and node-sharing cell adjacency.

    ``cell_to_cells`` includes the cell itself; two cells are adjacent iff
    they share at least one node.
    """

    node_to_cells: sp.csr_array
    cell_to_cells: sp.csr_array

    def cells_of_node(self, j: int) -> np.ndarray:
        m = self.node_to_cells
        return m.indices[m.indptr[j]:m.indptr[j + 1]]

    def cells_near_cell(self, k: int) -> np.ndarray:
        m = self.cell_to_cells
        return m.indices[m.indptr[k]:m.indptr[k + 1]]


def build_interval_mesh(n_cells: int, perturb_fraction: float = 0.0,
                        seed: int = 0) -> SimplicialMesh:
    """Mesh of (0, 1) with ``n_cells`` intervals, optionally perturbed.

    Interior nodes are displaced independently and uniformly by at most
    ``perturb_fraction / n_cells``; the endpoints stay fixed.  Fractions
    below 0.45 keep the node ordering strict for every seed.
    """
    if n_cells < 1:
        raise MeshError(f"n_cells must be >= 1, got {n_cells}")
    if not 0.0 <= perturb_fraction < 0.45:
        raise MeshError(
            f"perturb_fraction must lie in [0, 0.45), got {perturb_fraction}")
    x = np.linspace(0.0, 1.0, n_cells + 1)
    if perturb_fraction > 0.0 and n_cells > 1:
        rng = np.random.default_rng(seed)
        amp = perturb_fraction / n_cells
        x[1:-1] += rng.uniform(-amp, amp, n_cells - 1)
    lengths = np.diff(x)
    if np.any(lengths <= 0.0):
        raise MeshError("perturbation broke the node ordering")
    cells = np.column_stack([np.arange(n_cells), np.arange(1, n_cells + 1)])
    flags = np.zeros(n_cells + 1, dtype=bool)
    flags[0] = flags[-1] = True
    return SimplicialMesh(
        dim=1,
        nodes=x.reshape(-1, 1),
        cells=cells.astype(np.int64),
        boundary_node_flags=flags,
        h_min=float(lengths.min()),
        h_max=float(lengths.max()),
    )


def build_unit_square_mesh(nx: int, ny: int) -> SimplicialMesh:
    """Structured triangulation of (0,1)^2 with ``2*nx*ny`` cells.

    Every grid square is split along the bottom-left/top-right diagonal;
    both triangles are positively oriented.
    """
    if nx < 1 or ny < 1:
        raise MeshError(f"grid sizes must be >= 1, got ({nx}, {ny})")
    xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    xx, yy = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    def nid(i, j):
        return j * (nx + 1) + i

    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    i = i.ravel()
    j = j.ravel()
    v00 = nid(i, j)
    v10 = nid(i + 1, j)
    v01 = nid(i, j + 1)
    v11 = nid(i + 1, j + 1)
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    cells = np.empty((2 * nx * ny, 3), dtype=np.int64)
    cells[0::2] = lower
    cells[1::2] = upper

    flags = np.zeros(nodes.shape[0], dtype=bool)
    gi, gj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    flags[((gi == 0) | (gi == nx) | (gj == 0) | (gj == ny)).ravel()] = True

    dx, dy = 1.0 / nx, 1.0 / ny
    return SimplicialMesh(
        dim=2,
        nodes=nodes,
        cells=cells,
        boundary_node_flags=flags,
        h_min=float(min(dx, dy)),
        h_max=float(np.hypot(dx, dy)),
    )


def build_adjacency(mesh: SimplicialMesh) -> NodeAdjacency:
    """Incidence tables backing overlap growth and prediction stencils."""
    n_cells, k = mesh.cells.shape
    rows = np.repeat(np.arange(n_cells), k)
    cols = mesh.cells.ravel()
    incidence = sp.csr_array(
        (np.ones(rows.size, dtype=np.int8), (rows, cols)),
        shape=(n_cells, mesh.n_nodes),
    )
    cell_to_cells = ((incidence @ incidence.T) > 0).astype(np.int8)
    cell_to_cells.sort_indices()
    node_to_cells = incidence.T.tocsr()
    node_to_cells.sort_indices()
    return NodeAdjacency(node_to_cells=node_to_cells, cell_to_cells=cell_to_cells)


def dump_mesh(mesh: SimplicialMesh, path) -> None:
    """Plain-text debug dump: one node per line, then one cell per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes {mesh.n_nodes} dim {mesh.dim}\n")
        for row in mesh.nodes:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        fh.write(f"# cells {mesh.n_cells}\n")
        for row in mesh.cells:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")
