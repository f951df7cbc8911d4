import numpy as np
import pytest
import scipy.sparse as sp

from wavesplit.fem import assemble_operators
from wavesplit.linalg import SolverError, cg_solve, make_csr, spmv, vdot
from wavesplit.mesh import build_interval_mesh


def test_spmv_identity():
    a = make_csr(sp.eye_array(5))
    x = np.arange(5.0)
    assert (spmv(a, x) == x).all()


def test_spmv_dimension_mismatch():
    a = make_csr(sp.eye_array(5))
    with pytest.raises(ValueError):
        spmv(a, np.ones(4))


def test_spmv_stiffness_kernel():
    ops = assemble_operators(build_interval_mesh(4), 1.0)
    y = spmv(ops.stiffness, np.ones(5))
    assert np.abs(y[1:-1]).max() == 0.0


def test_spmv_matches_dense():
    rng = np.random.default_rng(0)
    d = rng.standard_normal((5, 5))
    d[np.abs(d) < 0.6] = 0.0
    a = make_csr(sp.csr_array(d))
    x = rng.standard_normal(5)
    assert np.array_equal(spmv(a, x), a.toarray() @ x)


def test_cg_identity_one_iteration():
    a = make_csr(sp.eye_array(6))
    b = np.arange(1.0, 7.0)
    assert np.allclose(cg_solve(a, b, tol=1e-15), b, atol=0, rtol=1e-14)


def test_cg_mass_stiffness_system():
    ops = assemble_operators(build_interval_mesh(4), 1.0)
    tau = 0.1
    a = make_csr(sp.diags_array(ops.lumped_mass) + tau**2 / 4 * ops.stiffness)
    b = ops.lumped_mass * np.ones(5)
    x = cg_solve(a, b, tol=1e-14)
    xd = np.linalg.solve(a.toarray(), b)
    assert np.abs(x - xd).max() < 1e-10


@pytest.mark.parametrize("seed", range(20))
def test_cg_residual_contract_random_spd(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 120))
    m = rng.standard_normal((n, n))
    dense = m @ m.T + n * np.eye(n)
    a = make_csr(sp.csr_array(dense))
    b = rng.standard_normal(n)
    tol = 1e-11
    x = cg_solve(a, b, tol=tol)
    res = np.linalg.norm(dense @ x - b)
    assert res <= tol * np.linalg.norm(b) * (1 + 1e-9)
    assert np.abs(x - np.linalg.solve(dense, b)).max() < 1e-8


def test_cg_zero_rhs():
    a = make_csr(sp.eye_array(4))
    assert (cg_solve(a, np.zeros(4)) == 0.0).all()


def test_cg_singular_matrix_fails():
    d = np.diag([1.0, 1.0, 0.0])
    a = make_csr(sp.csr_array(d))
    with pytest.raises(SolverError) as err:
        cg_solve(a, np.array([1.0, 1.0, 1.0]), tol=1e-12, max_iter=50)
    assert err.value.iterate is not None


def test_cg_iteration_cap_carries_best_iterate():
    rng = np.random.default_rng(4)
    m = rng.standard_normal((40, 40))
    dense = m @ m.T + 0.05 * np.eye(40)  # ill-conditioned on purpose
    a = make_csr(sp.csr_array(dense))
    b = rng.standard_normal(40)
    with pytest.raises(SolverError) as err:
        cg_solve(a, b, tol=1e-15, max_iter=2)
    assert err.value.residual is not None
    assert err.value.iterate.shape == b.shape


def test_cg_determinism():
    rng = np.random.default_rng(9)
    m = rng.standard_normal((60, 60))
    dense = m @ m.T + 60 * np.eye(60)
    a = make_csr(sp.csr_array(dense))
    b = rng.standard_normal(60)
    x1 = cg_solve(a, b, tol=1e-12)
    x2 = cg_solve(a, b, tol=1e-12)
    assert np.array_equal(x1, x2)


def test_vdot_matches_math():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(100)
    y = rng.standard_normal(100)
    assert vdot(x, y) == pytest.approx(float(np.dot(x, y)), rel=1e-13)


def test_cg_contract_is_verified_true_residual():
    # the recursively updated residual drifts below the true one near the
    # rounding floor; an unreachable tolerance must fail instead of
    # claiming convergence
    from wavesplit.fem import assemble_operators
    from wavesplit.mesh import build_interval_mesh
    ops = assemble_operators(build_interval_mesh(600), 1.0)
    a = make_csr(sp.diags_array(ops.lumped_mass) + 1e-5 * ops.stiffness)
    b = np.random.default_rng(3).standard_normal(601)
    with pytest.raises(SolverError) as err:
        cg_solve(a, b, tol=1e-30)
    true_res = np.linalg.norm(a @ err.value.iterate - b)
    assert err.value.residual == pytest.approx(true_res, rel=1e-6)


def test_check_symmetric():
    from wavesplit.linalg import check_symmetric
    from wavesplit.fem import assemble_operators
    from wavesplit.mesh import build_unit_square_mesh
    ops = assemble_operators(build_unit_square_mesh(5, 4), 1.3)
    assert check_symmetric(ops.stiffness)
    skew = make_csr(sp.csr_array(np.array([[0.0, 1.0], [-1.0, 0.0]])))
    assert not check_symmetric(skew)
