"""Non-overlapping partitions, layer-grown overlaps, and nodal averaging.

Subdomains are cell-aligned by construction (a cell belongs to a region
entirely or not at all).  Overlap growth adds node-adjacency rings: one
layer is every cell sharing at least one node with the current region,
which matches diagonal-touching overlap strips in 2D.  The averaging
operator copies values at nodes interior to a non-overlapping subdomain
and takes the plain mean over the subdomains whose closure contains the
node everywhere else; restriction followed by averaging reproduces a
global function bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .fem import State
from .mesh import NodeAdjacency, SimplicialMesh


class DecompositionError(ValueError):
    """Invalid partition or averaging-plan construction."""


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Cell partition plus ell-layer overlapping subdomains.

    ``subdomain_nodes[i]`` lists the (sorted, global) nodes of the
    overlapping subdomain; local vectors on subdomain ``i`` follow that
    order.  ``interior_nodes[i]`` are the nodes strictly inside the
    non-overlapping subdomain; ``artificial_interface_nodes[i]`` sit on
    the part of the overlap boundary that lies inside the domain.
    """

    mesh: SimplicialMesh
    n_sub: int
    ell: int
    cell_owner: np.ndarray
    overlap_cells: tuple[np.ndarray, ...]
    subdomain_nodes: tuple[np.ndarray, ...]
    interior_nodes: tuple[np.ndarray, ...]
    artificial_interface_nodes: tuple[np.ndarray, ...]
    physical_boundary_nodes: tuple[np.ndarray, ...]
    realized_overlap_width: tuple[float, ...]

    def local_index(self, i: int, global_ids: np.ndarray) -> np.ndarray:
        """Positions of ``global_ids`` inside ``subdomain_nodes[i]``."""
        pos = np.searchsorted(self.subdomain_nodes[i], global_ids)
        if np.any(self.subdomain_nodes[i][pos] != global_ids):
            raise DecompositionError("node not contained in subdomain")
        return pos


@dataclass(frozen=True, eq=False)
class AveragingPlan:
    """Vectorized recipe for the nodal averaging operator.

    ``single_by_sub[i]`` is (global node ids, local indices) for the nodes
    whose only contributor is subdomain ``i`` (nodes interior to the
    non-overlapping subdomain).  Multi-contributor nodes are grouped by
    contributor count ``c``; each group stores the node ids (m,) and per
    column a list of (sub id, row selector, local indices) gather ops.
    """

    n_nodes: int
    dirichlet_mask: np.ndarray
    single_by_sub: tuple[tuple[np.ndarray, np.ndarray], ...]
    groups: tuple[tuple[np.ndarray, tuple, np.ndarray], ...]
    contributor_counts: np.ndarray


def partition_blocks(mesh: SimplicialMesh, nx_sub: int, ny_sub: int = 1) -> np.ndarray:
    """Assign every cell to an axis-aligned block by its barycenter."""
    if nx_sub < 1 or ny_sub < 1:
        raise DecompositionError("subdomain counts must be >= 1")
    bary = mesh.cell_barycenters()
    bx = np.minimum((bary[:, 0] * nx_sub).astype(np.int64), nx_sub - 1)
    if mesh.dim == 1:
        owner = bx
        n_sub = nx_sub
    else:
        by = np.minimum((bary[:, 1] * ny_sub).astype(np.int64), ny_sub - 1)
        owner = by * nx_sub + bx
        n_sub = nx_sub * ny_sub
    counts = np.bincount(owner, minlength=n_sub)
    if np.any(counts == 0):
        raise DecompositionError(
            f"empty subdomain: {nx_sub}x{ny_sub} blocks on {mesh.n_cells} cells")
    return owner


def grow_overlap(mesh: SimplicialMesh, adjacency: NodeAdjacency,
                 cell_owner: np.ndarray, ell: int) -> Decomposition:
    """Grow every owned cell set by ``ell`` node-adjacency rings and classify nodes."""
    if ell < 0:
        raise DecompositionError("ell must be >= 0")
    n_sub = int(cell_owner.max()) + 1
    node_cell_counts = np.diff(adjacency.node_to_cells.indptr)
    flags = mesh.boundary_node_flags

    overlap_cells = []
    sub_nodes = []
    interior_nodes = []
    artificial = []
    physical = []
    widths = []
    for i in range(n_sub):
        indicator = (cell_owner == i)
        for _ in range(ell):
            indicator = (adjacency.cell_to_cells @ indicator.astype(np.int8)) > 0
        cells_i = np.where(indicator)[0]
        overlap_cells.append(cells_i)

        counts_in = adjacency.node_to_cells @ indicator.astype(np.int64)
        on_sub = counts_in > 0
        art = on_sub & (counts_in < node_cell_counts) & ~flags
        phys = on_sub & flags

        counts_owned = adjacency.node_to_cells @ (cell_owner == i).astype(np.int64)
        interior = (counts_owned == node_cell_counts) & ~flags

        sub_nodes.append(np.where(on_sub)[0])
        interior_nodes.append(np.where(interior)[0])
        artificial.append(np.where(art)[0])
        physical.append(np.where(phys)[0])

        closure = np.where(counts_owned > 0)[0]
        art_ids = artificial[-1]
        if art_ids.size == 0 or closure.size == 0:
            widths.append(np.inf)
        else:
            tree = cKDTree(mesh.nodes[art_ids])
            dist, _ = tree.query(mesh.nodes[closure])
            widths.append(float(dist.min()))

    return Decomposition(
        mesh=mesh,
        n_sub=n_sub,
        ell=ell,
        cell_owner=np.asarray(cell_owner),
        overlap_cells=tuple(overlap_cells),
        subdomain_nodes=tuple(sub_nodes),
        interior_nodes=tuple(interior_nodes),
        artificial_interface_nodes=tuple(artificial),
        physical_boundary_nodes=tuple(physical),
        realized_overlap_width=tuple(widths),
    )


def build_averaging_plan(mesh: SimplicialMesh, dec: Decomposition) -> AveragingPlan:
    n_nodes = mesh.n_nodes
    flags = mesh.boundary_node_flags

    owner_of = np.full(n_nodes, -1, dtype=np.int64)
    for i in range(dec.n_sub):
        owner_of[dec.interior_nodes[i]] = i

    # closure membership: node -> subdomains owning an incident cell
    closure_sets: list[list[int]] = [[] for _ in range(n_nodes)]
    for i in range(dec.n_sub):
        verts = np.unique(mesh.cells[dec.cell_owner == i])
        for j in verts:
            closure_sets[j].append(i)

    single_nodes, single_sub = [], []
    multi: dict[int, list[tuple[int, list[int]]]] = {}
    counts = np.zeros(n_nodes, dtype=np.int64)
    for j in range(n_nodes):
        counts[j] = 1 if owner_of[j] >= 0 else len(closure_sets[j])
        if flags[j]:
            continue
        if owner_of[j] >= 0:
            single_nodes.append(j)
            single_sub.append(owner_of[j])
            continue
        contribs = closure_sets[j]
        if not contribs:
            raise DecompositionError(f"node {j} has no contributing subdomain")
        multi.setdefault(len(contribs), []).append((j, contribs))

    single_nodes = np.asarray(single_nodes, dtype=np.int64)
    single_sub = np.asarray(single_sub, dtype=np.int64)
    single_by_sub = []
    for i in range(dec.n_sub):
        ids = single_nodes[single_sub == i]
        single_by_sub.append((ids, dec.local_index(i, ids) if ids.size else ids))

    groups = []
    for c, entries in sorted(multi.items()):
        ids = np.asarray([e[0] for e in entries], dtype=np.int64)
        subs = np.asarray([e[1] for e in entries], dtype=np.int64)
        columns = []
        for col in range(c):
            gathers = []
            for i in range(dec.n_sub):
                sel = np.where(subs[:, col] == i)[0]
                if sel.size:
                    gathers.append((i, sel, dec.local_index(i, ids[sel])))
            columns.append(tuple(gathers))
        groups.append((ids, tuple(columns), subs))

    return AveragingPlan(
        n_nodes=n_nodes,
        dirichlet_mask=flags.copy(),
        single_by_sub=tuple(single_by_sub),
        groups=tuple(groups),
        contributor_counts=counts,
    )


def _pairwise_mean(cols: list[np.ndarray]) -> np.ndarray:
    """Mean with pairwise summation; exact for power-of-two counts of equal values."""
    work = list(cols)
    while len(work) > 1:
        nxt = [work[k] + work[k + 1] for k in range(0, len(work) - 1, 2)]
        if len(work) % 2:
            nxt.append(work[-1])
        work = nxt
    return work[0] / len(cols)


def _average_component(plan: AveragingPlan, values: list[np.ndarray]) -> np.ndarray:
    out = np.zeros(plan.n_nodes)
    for i, (ids, local) in enumerate(plan.single_by_sub):
        if ids.size:
            out[ids] = values[i][local]
    for ids, columns, _subs in plan.groups:
        cols = []
        for gathers in columns:
            v = np.empty(ids.shape[0])
            for i, sel, local in gathers:
                v[sel] = values[i][local]
            cols.append(v)
        mean = _pairwise_mean(cols)
        # equal contributions must reproduce exactly (restriction round trip)
        equal = np.ones(ids.shape[0], dtype=bool)
        for col in range(1, len(cols)):
            equal &= cols[col] == cols[0]
        mean[equal] = cols[0][equal]
        out[ids] = mean
    return out


def apply_averaging(plan: AveragingPlan, subdomain_states: list[State]) -> State:
    """Assemble the global state from per-subdomain states (Dirichlet nodes zero)."""
    q = _average_component(plan, [s.q for s in subdomain_states])
    p = _average_component(plan, [s.p for s in subdomain_states])
    q[plan.dirichlet_mask] = 0.0
    p[plan.dirichlet_mask] = 0.0
    return State(q=q, p=p, t=subdomain_states[0].t)


def restrict_to_subdomain(dec: Decomposition, i: int, state: State) -> State:
    ids = dec.subdomain_nodes[i]
    return State(q=state.q[ids].copy(), p=state.p[ids].copy(), t=state.t)


def local_overlap_count(dec: Decomposition) -> int:
    """Maximum number of overlapping subdomains covering a single node."""
    counts = np.zeros(dec.mesh.n_nodes, dtype=np.int64)
    for ids in dec.subdomain_nodes:
        counts[ids] += 1
    return int(counts.max())
