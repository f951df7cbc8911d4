"""P1 operators with mass lumping, discrete norms, and exact-solution errors.

The lumped mass assigns each vertex of a cell ``|K|/(dim+1)``; the stiffness
matrix carries the kappa^2-weighted gradient form.  ``apply_Lh`` realizes the
mass-lumped self-adjoint operator ``M^{-1} K`` on the zero-trace space.
Operators are immutable after assembly; everything here is pure and safe to
call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .linalg import SolverError, make_csr
from .mesh import SimplicialMesh


class AssemblyError(ValueError):
    """Degenerate cell or inconsistent assembly input."""


@dataclass(frozen=True, eq=False)
class DiscreteOperators:
    """Lumped mass diagonal, stiffness matrix, and Dirichlet mask."""

    lumped_mass: np.ndarray
    stiffness: sp.csr_array
    dirichlet_mask: np.ndarray
    kappa: float

    @property
    def n_nodes(self) -> int:
        return self.lumped_mass.shape[0]


@dataclass(eq=False)
class State:
    """Paired nodal vectors (q, p) ~ (u, du/dt) at time ``t``."""

    q: np.ndarray
    p: np.ndarray
    t: float

    def copy(self) -> "State":
        return State(self.q.copy(), self.p.copy(), self.t)


def assemble_lumped_mass(mesh: SimplicialMesh,
                         cells: np.ndarray | None = None) -> np.ndarray:
    """Per-node lumped mass; restrict to a cell subset when given."""
    cell_idx = np.arange(mesh.n_cells) if cells is None else np.asarray(cells)
    measures = mesh.cell_measures()[cell_idx]
    if measures.size and measures.min() <= 0.0:
        raise AssemblyError("zero-measure cell in lumped mass assembly")
    share = measures / (mesh.dim + 1)
    out = np.zeros(mesh.n_nodes)
    verts = mesh.cells[cell_idx]
    for loc in range(mesh.dim + 1):
        np.add.at(out, verts[:, loc], share)
    return out


def assemble_stiffness(mesh: SimplicialMesh, kappa: float,
                       cells: np.ndarray | None = None) -> sp.csr_array:
    """kappa^2-weighted P1 stiffness matrix over all cells or a subset."""
    if kappa <= 0.0:
        raise AssemblyError(f"kappa must be positive, got {kappa}")
    cell_idx = np.arange(mesh.n_cells) if cells is None else np.asarray(cells)
    verts = mesh.cells[cell_idx]
    coords = mesh.nodes[verts]
    k2 = kappa * kappa

    if mesh.dim == 1:
        lengths = coords[:, 1, 0] - coords[:, 0, 0]
        if lengths.size and lengths.min() <= 0.0:
            raise AssemblyError("zero-length interval in stiffness assembly")
        w = k2 / lengths
        local = np.array([[1.0, -1.0], [-1.0, 1.0]])
        blocks = w[:, None, None] * local
    else:
        # P1 gradients: grad phi_i = (b_i, c_i) / (2 A) with the usual
        # cyclic edge differences; K_ij = kappa^2 (b_i b_j + c_i c_j)/(4A).
        x = coords[..., 0]
        y = coords[..., 1]
        b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        area2 = x[:, 0] * b[:, 0] + x[:, 1] * b[:, 1] + x[:, 2] * b[:, 2]
        if area2.size and area2.min() <= 0.0:
            raise AssemblyError("degenerate or negatively oriented triangle")
        blocks = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :])
        blocks = blocks * (k2 / (2.0 * area2))[:, None, None]

    m = mesh.dim + 1
    rows = np.repeat(verts, m, axis=1).ravel()
    cols = np.tile(verts, (1, m)).ravel()
    mat = sp.coo_array((blocks.ravel(), (rows, cols)),
                       shape=(mesh.n_nodes, mesh.n_nodes))
    return make_csr(mat)


def assemble_operators(mesh: SimplicialMesh, kappa: float) -> DiscreteOperators:
    return DiscreteOperators(
        lumped_mass=assemble_lumped_mass(mesh),
        stiffness=assemble_stiffness(mesh, kappa),
        dirichlet_mask=mesh.boundary_node_flags.copy(),
        kappa=float(kappa),
    )


def apply_Lh(ops: DiscreteOperators, q: np.ndarray) -> np.ndarray:
    """M^{-1} K q with Dirichlet rows and columns zeroed."""
    if q.shape[0] != ops.n_nodes:
        raise ValueError("nodal vector has wrong length")
    qz = np.where(ops.dirichlet_mask, 0.0, q)
    out = (ops.stiffness @ qz) / ops.lumped_mass
    out[ops.dirichlet_mask] = 0.0
    return out


def operator_norm_estimate(ops: DiscreteOperators, tol: float = 1e-4,
                           max_iter: int = 10_000) -> float:
    """Largest eigenvalue of L_h on the zero-trace space.

    Works on the symmetrized form M^{-1/2} K M^{-1/2} restricted to free
    nodes.  Lanczos iteration (deterministic start vector); tiny systems
    fall back to a dense eigensolve.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    free = np.where(~ops.dirichlet_mask)[0]
    if free.size == 0:
        return 0.0
    k_ff = ops.stiffness[free][:, free].tocsr()
    s = 1.0 / np.sqrt(ops.lumped_mass[free])

    if free.size <= 32:
        dense = (s[:, None] * k_ff.toarray()) * s[None, :]
        return float(np.linalg.eigvalsh(dense)[-1])

    def matvec(v):
        return s * (k_ff @ (s * v))

    linop = spla.LinearOperator((free.size, free.size), matvec=matvec)
    v0 = np.random.default_rng(0).standard_normal(free.size)
    try:
        vals = spla.eigsh(linop, k=1, which="LA", tol=tol, v0=v0,
                          maxiter=max_iter, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        best = exc.eigenvalues[-1] if len(exc.eigenvalues) else None
        raise SolverError(
            f"operator norm estimate did not converge in {max_iter} iterations",
            iterate=best) from exc
    return float(vals[0])


def interpolate_nodal(mesh: SimplicialMesh, g) -> np.ndarray:
    """Nodal interpolation I_h g; ``g`` must broadcast over coordinate arrays."""
    if mesh.dim == 1:
        vals = g(mesh.nodes[:, 0])
    else:
        vals = g(mesh.nodes[:, 0], mesh.nodes[:, 1])
    return np.broadcast_to(np.asarray(vals, dtype=float), (mesh.n_nodes,)).copy()


def discrete_norms(ops: DiscreteOperators, state: State) -> tuple[float, float, float]:
    """(V_h seminorm of q, lumped L2 norm of p, discrete energy norm)."""
    vh2 = float(np.add.reduce(state.q * (ops.stiffness @ state.q)))
    hh2 = float(np.add.reduce(ops.lumped_mass * state.p * state.p))
    vh2 = max(vh2, 0.0)
    return np.sqrt(vh2), np.sqrt(hh2), np.sqrt(vh2 + hh2)


def energy_norm(ops: DiscreteOperators, state: State) -> float:
    return discrete_norms(ops, state)[2]


def b_norm(ops_sub: DiscreteOperators, z: np.ndarray, lam: float) -> float:
    """(lam^{-2} (z,z)_ML + a(z,z))^{1/2} over the cells ``ops_sub`` was built on."""
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    ml = float(np.add.reduce(ops_sub.lumped_mass * z * z))
    a = max(float(np.add.reduce(z * (ops_sub.stiffness @ z))), 0.0)
    return np.sqrt(ml / (lam * lam) + a)


# Quadrature rules on the reference triangle (barycentric points, weights
# summing to one).  The 3-point rule is exact to degree 2, the 7-point rule
# to degree 5.
_TRI_MID = (
    np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]),
    np.full(3, 1.0 / 3.0),
)
_A1 = (6.0 - np.sqrt(15.0)) / 21.0
_A2 = (6.0 + np.sqrt(15.0)) / 21.0
_TRI_DEG5 = (
    np.array([
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [1.0 - 2 * _A1, _A1, _A1], [_A1, 1.0 - 2 * _A1, _A1], [_A1, _A1, 1.0 - 2 * _A1],
        [1.0 - 2 * _A2, _A2, _A2], [_A2, 1.0 - 2 * _A2, _A2], [_A2, _A2, 1.0 - 2 * _A2],
    ]),
    np.concatenate([[9.0 / 40.0],
                    np.full(3, (155.0 - np.sqrt(15.0)) / 1200.0),
                    np.full(3, (155.0 + np.sqrt(15.0)) / 1200.0)]),
)


def _triangle_rule(order: int):
    if order <= 1:
        return np.full((1, 3), 1.0 / 3.0), np.ones(1)
    if order == 2:
        return _TRI_MID
    if order <= 5:
        return _TRI_DEG5
    raise NotImplementedError("triangle quadrature implemented up to degree 5")


def error_vs_exact(mesh: SimplicialMesh, ops: DiscreteOperators, state: State,
                   exact_u, exact_p, exact_grad_u,
                   quad_order: int | None = None) -> float:
    """Continuous energy-norm error against an exact pair at ``state.t``.

    Returns (int kappa^2 |grad q_h - grad u|^2 + int |p_h - p|^2)^{1/2} by
    element-wise quadrature.  ``exact_u``/``exact_p`` map coordinate arrays
    to values, ``exact_grad_u`` to a tuple of partial derivatives; all are
    evaluated at the state's time by the caller's closures.
    """
    if quad_order is None:
        quad_order = 4 if mesh.dim == 1 else 2
    if quad_order < 1:
        raise ValueError("quad_order must be >= 1")
    k2 = ops.kappa ** 2
    verts = mesh.cells
    q = state.q
    p = state.p

    if mesh.dim == 1:
        xl = mesh.nodes[verts[:, 0], 0]
        xr = mesh.nodes[verts[:, 1], 0]
        lengths = xr - xl
        gq = (q[verts[:, 1]] - q[verts[:, 0]]) / lengths
        xi, w = np.polynomial.legendre.leggauss(quad_order)
        lam = 0.5 * (xi + 1.0)
        err2 = 0.0
        for lam_g, w_g in zip(lam, w):
            xg = xl + lam_g * lengths
            pl = p[verts[:, 0]] + lam_g * (p[verts[:, 1]] - p[verts[:, 0]])
            du = gq - exact_grad_u(xg)[0]
            dp = pl - exact_p(xg)
            err2 += 0.5 * w_g * np.add.reduce(lengths * (k2 * du * du + dp * dp))
        return float(np.sqrt(err2))

    pts, w = _triangle_rule(quad_order)
    coords = mesh.nodes[verts]
    x = coords[..., 0]
    y = coords[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = x[:, 0] * b[:, 0] + x[:, 1] * b[:, 1] + x[:, 2] * b[:, 2]
    areas = 0.5 * area2
    qv = q[verts]
    pv = p[verts]
    gqx = np.add.reduce(qv * b, axis=1) / area2
    gqy = np.add.reduce(qv * c, axis=1) / area2

    err2 = 0.0
    for bary, w_g in zip(pts, w):
        xg = x @ bary
        yg = y @ bary
        gx, gy = exact_grad_u(xg, yg)
        dux = gqx - gx
        duy = gqy - gy
        dp = pv @ bary - exact_p(xg, yg)
        err2 += w_g * np.add.reduce(areas * (k2 * (dux * dux + duy * duy) + dp * dp))
    return float(np.sqrt(err2))
