from fractions import Fraction

import numpy as np
import pytest

from wavesplit.decomposition import DecompositionError, apply_averaging, \
    build_averaging_plan, grow_overlap, local_overlap_count, partition_blocks, \
    restrict_to_subdomain
from wavesplit.fem import State
from wavesplit.mesh import build_adjacency, build_interval_mesh, build_unit_square_mesh


def make_1d(n=10, nx_sub=2, ell=1, pf=0.0, seed=0):
    mesh = build_interval_mesh(n, pf, seed)
    adj = build_adjacency(mesh)
    owner = partition_blocks(mesh, nx_sub)
    dec = grow_overlap(mesh, adj, owner, ell)
    return mesh, adj, owner, dec


def make_2d(nx=8, ny=8, nx_sub=2, ny_sub=2, ell=1):
    mesh = build_unit_square_mesh(nx, ny)
    adj = build_adjacency(mesh)
    owner = partition_blocks(mesh, nx_sub, ny_sub)
    dec = grow_overlap(mesh, adj, owner, ell)
    return mesh, adj, owner, dec


def test_partition_1d_halves():
    mesh = build_interval_mesh(4)
    owner = partition_blocks(mesh, 2)
    assert list(owner) == [0, 0, 1, 1]


def test_partition_covers_every_cell_once():
    mesh = build_unit_square_mesh(10, 6)
    owner = partition_blocks(mesh, 5, 3)
    assert owner.shape == (mesh.n_cells,)
    assert owner.min() >= 0 and owner.max() == 14


def test_partition_2d_equal_blocks():
    mesh = build_unit_square_mesh(40, 40)
    owner = partition_blocks(mesh, 4, 4)
    counts = np.bincount(owner)
    assert len(counts) == 16
    assert (counts == mesh.n_cells // 16).all()


def test_partition_empty_subdomain_rejected():
    mesh = build_interval_mesh(3)
    with pytest.raises(DecompositionError):
        partition_blocks(mesh, 5)


def test_grow_overlap_1d_two_rings():
    # owned cells of subdomain 0 are (0, 0.5); two node-adjacency rings add 2h
    mesh, adj, owner, dec = make_1d(n=10, ell=2)
    assert set(dec.overlap_cells[0]) == set(range(7))
    assert set(dec.overlap_cells[1]) == set(range(3, 10))
    # artificial interface of subdomain 0 sits at x = 0.7
    assert list(dec.artificial_interface_nodes[0]) == [7]
    assert dec.realized_overlap_width[0] == pytest.approx(0.2)


def test_grow_overlap_zero_rings_is_owned():
    mesh, adj, owner, dec = make_1d(n=10, ell=0)
    np.testing.assert_array_equal(dec.overlap_cells[0], np.where(owner == 0)[0])


def test_grow_overlap_saturates():
    mesh, adj, owner, dec = make_1d(n=8, ell=8)
    for i in range(2):
        assert dec.overlap_cells[i].size == mesh.n_cells
        assert dec.artificial_interface_nodes[i].size == 0


def test_overlap_monotone_in_ell():
    mesh, adj, owner, _ = make_2d(8, 8, 2, 2, 1)
    prev = None
    for ell in (0, 1, 2, 3):
        dec = grow_overlap(mesh, adj, owner, ell)
        cells = set(dec.overlap_cells[0])
        if prev is not None:
            assert prev <= cells
        prev = cells


def test_closure_nodes_not_on_artificial_interface():
    for dec in (make_1d(n=12, ell=1)[3], make_2d(6, 6, 2, 2, 1)[3]):
        mesh = dec.mesh
        for i in range(dec.n_sub):
            owned_nodes = np.unique(mesh.cells[dec.cell_owner == i])
            assert not set(owned_nodes) & set(dec.artificial_interface_nodes[i])


def test_interior_nodes_unique_owner():
    _, _, _, dec = make_2d(8, 8, 2, 2, 2)
    seen = set()
    for i in range(dec.n_sub):
        ids = set(dec.interior_nodes[i])
        assert not ids & seen
        seen |= ids


def test_averaging_plan_contributors():
    mesh, adj, owner, dec = make_1d(n=4, ell=1)
    plan = build_averaging_plan(mesh, dec)
    # node at x=0.5 is the partition interface: two contributors
    assert plan.contributor_counts[2] == 2
    # interior nodes carry a single contributor
    assert plan.contributor_counts[1] == 1
    (ids0, _), (ids1, _) = plan.single_by_sub
    assert 1 in ids0 and 3 in ids1


def test_averaging_plan_2d_cross_point():
    mesh, adj, owner, dec = make_2d(8, 8, 2, 2, 1)
    plan = build_averaging_plan(mesh, dec)
    center = int(np.flatnonzero(
        (mesh.nodes[:, 0] == 0.5) & (mesh.nodes[:, 1] == 0.5))[0])
    assert plan.contributor_counts[center] == 4


def test_averaging_weights_sum_to_one():
    # mean weights 1/|J| over |J| contributors always total 1
    _, _, _, dec = make_2d(8, 8, 4, 2, 1)
    plan = build_averaging_plan(dec.mesh, dec)
    for ids, columns, subs in plan.groups:
        c = len(columns)
        assert np.all(subs.shape[1] == c)
        assert c * (1.0 / c) == 1.0


@pytest.mark.parametrize("seed", range(20))
def test_restrict_then_average_identity_bitwise(seed):
    mesh, adj, owner, dec = make_2d(8, 8, 2, 2, 1)
    plan = build_averaging_plan(mesh, dec)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(mesh.n_nodes)
    p = rng.standard_normal(mesh.n_nodes)
    q[mesh.boundary_node_flags] = 0.0
    p[mesh.boundary_node_flags] = 0.0
    g = State(q, p, 1.25)
    back = apply_averaging(plan, [restrict_to_subdomain(dec, i, g)
                                  for i in range(dec.n_sub)])
    assert np.array_equal(back.q, g.q)
    assert np.array_equal(back.p, g.p)
    assert back.t == g.t


def test_averaging_preserves_constants_inside():
    mesh, adj, owner, dec = make_1d(n=10, ell=2)
    plan = build_averaging_plan(mesh, dec)
    c = 3.25
    states = [State(np.full(ids.size, c), np.full(ids.size, c), 0.0)
              for ids in dec.subdomain_nodes]
    out = apply_averaging(plan, states)
    interior = ~mesh.boundary_node_flags
    assert np.all(out.q[interior] == c)


def test_averaging_mean_of_disagreeing_values():
    mesh, adj, owner, dec = make_1d(n=4, ell=1)
    plan = build_averaging_plan(mesh, dec)
    a, b = 1.0, 2.0
    states = []
    for i, ids in enumerate(dec.subdomain_nodes):
        val = a if i == 0 else b
        states.append(State(np.full(ids.size, val), np.zeros(ids.size), 0.0))
    out = apply_averaging(plan, states)
    assert out.q[2] == (a + b) / 2.0


def test_restriction_of_zero_and_identity():
    mesh, adj, owner, dec = make_1d(n=10, ell=1)
    zero = State(np.zeros(mesh.n_nodes), np.zeros(mesh.n_nodes), 0.0)
    loc = restrict_to_subdomain(dec, 0, zero)
    assert (loc.q == 0).all() and loc.q.shape == dec.subdomain_nodes[0].shape


def test_single_subdomain_roundtrip_identity():
    mesh = build_interval_mesh(6)
    adj = build_adjacency(mesh)
    dec = grow_overlap(mesh, adj, partition_blocks(mesh, 1), 1)
    plan = build_averaging_plan(mesh, dec)
    rng = np.random.default_rng(0)
    q = rng.standard_normal(7)
    q[[0, -1]] = 0.0
    st = State(q, q.copy(), 0.0)
    out = apply_averaging(plan, [restrict_to_subdomain(dec, 0, st)])
    assert np.array_equal(out.q, st.q)


def test_local_overlap_counts():
    mesh, adj, owner, dec1 = make_1d(n=20, nx_sub=1, ell=2)
    assert local_overlap_count(dec1) == 1
    _, _, _, dec2 = make_1d(n=20, nx_sub=2, ell=2)
    assert local_overlap_count(dec2) == 2
    _, _, _, dec3 = make_2d(16, 16, 4, 4, 1)
    assert local_overlap_count(dec3) <= 4


def test_nodewise_mean_square_inequality_exact():
    # (sum v / |J|)^2 <= sum v^2 / |J| in exact rational arithmetic
    rng = np.random.default_rng(10)
    for _ in range(200):
        k = int(rng.integers(2, 5))
        vals = [Fraction(int(rng.integers(-50, 50)), int(rng.integers(1, 9)))
                for _ in range(k)]
        mean_sq = (sum(vals) / k) ** 2
        sq_mean = sum(v * v for v in vals) / k
        assert mean_sq <= sq_mean


def test_partition_paper_scale_blocks():
    mesh = build_unit_square_mesh(1000, 1000)
    owner = partition_blocks(mesh, 4, 4)
    counts = np.bincount(owner)
    assert counts.shape == (16,)
    assert (counts == 125_000).all()
