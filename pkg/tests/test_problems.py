import numpy as np
import pytest

from wavesplit.problems import DirichletWave1D, mu, mu_prime, mu_second, \
    problem_1d, problem_2d

# C2 seams of the traveling profiles sit at the bump support endpoints;
# finite-difference residual stencils must not straddle them.
_SEAMS = np.array([0.25, 0.3, 0.35, 0.65, 0.7, 0.75])


def _far_from_seams(*phases, margin=0.02):
    ok = np.ones(phases[0].shape, dtype=bool)
    for ph in phases:
        z = np.mod(ph, 2.0)
        z = np.where(z > 1.0, 2.0 - z, z)  # odd extension folds back to [0,1]
        ok &= np.min(np.abs(z[:, None] - _SEAMS[None, :]), axis=1) > margin
    return ok


def test_mu_center_and_support_values():
    assert mu(0.5, 0.2, 0.5) == pytest.approx(-1.0)
    assert mu(0.5, 0.2, 0.7) == 0.0
    assert mu(0.5, 0.2, 0.3) == 0.0
    assert mu(0.5, 0.2, 0.9) == 0.0


def test_mu_rejects_bad_width():
    with pytest.raises(ValueError):
        mu(0.5, 0.0, 0.5)


def test_mu_prime_matches_finite_differences():
    rng = np.random.default_rng(0)
    z = rng.uniform(0.31, 0.69, 100)
    h = 1e-4
    fd = (mu(0.5, 0.2, z - 2 * h) - 8 * mu(0.5, 0.2, z - h)
          + 8 * mu(0.5, 0.2, z + h) - mu(0.5, 0.2, z + 2 * h)) / (12 * h)
    assert np.abs(fd - mu_prime(0.5, 0.2, z)).max() < 1e-6


def test_mu_second_matches_finite_differences():
    rng = np.random.default_rng(1)
    z = rng.uniform(0.32, 0.68, 100)
    h = 1e-4
    fd = (-mu(0.5, 0.2, z - 2 * h) + 16 * mu(0.5, 0.2, z - h) - 30 * mu(0.5, 0.2, z)
          + 16 * mu(0.5, 0.2, z + h) - mu(0.5, 0.2, z + 2 * h)) / (12 * h * h)
    assert np.abs(fd - mu_second(0.5, 0.2, z)).max() < 1e-5


def test_mu_is_c2_at_support_endpoints():
    # two-sided differences across both endpoints: value, first and second
    # derivative all continuous (the cubed sine kills two derivatives)
    h = 1e-6
    for z0 in (0.3, 0.7):
        for f, scale in ((mu, 1.0), (mu_prime, 1e2), (mu_second, 1e4)):
            left = f(0.5, 0.2, z0 - h)
            right = f(0.5, 0.2, z0 + h)
            assert abs(float(left) - float(right)) < 1e-4 * scale


def test_1d_initial_data_reduction():
    p1 = problem_1d()
    x = np.linspace(0, 1, 1000)
    assert np.abs(p1.exact_u(x, 0.0) - p1.u0(x)).max() < 1e-12
    assert np.abs(p1.exact_p(x, 0.0) - p1.v0(x)).max() < 1e-12


def test_1d_boundary_values_vanish():
    p1 = problem_1d()
    t = np.arange(0.1, 5.01, 0.1)
    assert np.abs(p1.exact_u(np.zeros_like(t), t)).max() < 1e-12
    assert np.abs(p1.exact_u(np.ones_like(t), t)).max() < 1e-12


def test_1d_time_periodicity():
    p1 = problem_1d()
    rng = np.random.default_rng(2)
    x = rng.uniform(0, 1, 500)
    t = rng.uniform(0, 3, 500)
    assert np.abs(p1.exact_u(x, t + 2.0) - p1.exact_u(x, t)).max() < 1e-12


def test_1d_wave_residual():
    p1 = problem_1d()
    rng = np.random.default_rng(3)
    x = rng.uniform(0.05, 0.95, 400)
    t = rng.uniform(0.05, 4.0, 400)
    h = 1e-3
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
    off = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    utt = sum(ci * p1.exact_u(x, t + o) for ci, o in zip(c, off))
    uxx = sum(ci * p1.exact_u(x + o, t) for ci, o in zip(c, off))
    assert np.abs(utt - uxx).max() < 1e-4


def test_1d_p_is_time_derivative():
    p1 = problem_1d()
    rng = np.random.default_rng(4)
    x = rng.uniform(0, 1, 300)
    t = rng.uniform(0.1, 4.0, 300)
    h = 1e-4
    fd = (p1.exact_u(x, t - 2 * h) - 8 * p1.exact_u(x, t - h)
          + 8 * p1.exact_u(x, t + h) - p1.exact_u(x, t + 2 * h)) / (12 * h)
    assert np.abs(fd - p1.exact_p(x, t)).max() < 1e-6


def test_1d_grad_is_space_derivative():
    p1 = problem_1d()
    rng = np.random.default_rng(5)
    x = rng.uniform(0.01, 0.99, 300)
    t = rng.uniform(0.1, 4.0, 300)
    h = 1e-4
    fd = (p1.exact_u(x - 2 * h, t) - 8 * p1.exact_u(x - h, t)
          + 8 * p1.exact_u(x + h, t) - p1.exact_u(x + 2 * h, t)) / (12 * h)
    assert np.abs(fd - p1.exact_grad_u(x, t)[0]).max() < 1e-6


def test_2d_forcing_vanishes_off_support():
    p2 = problem_2d()
    pts = np.array([0.1, 0.9, 0.05])
    assert np.abs(p2.forcing(pts, pts, 0.3)).max() == 0.0


def test_2d_manufactured_residual():
    p2 = problem_2d()
    rng = np.random.default_rng(6)
    x = rng.uniform(0.05, 0.95, 2000)
    y = rng.uniform(0.05, 0.95, 2000)
    t = rng.uniform(0.05, 0.95, 2000)
    keep = _far_from_seams(x - t, x + t, y - t, y + t, x, y)
    x, y, t = x[keep][:100], y[keep][:100], t[keep][:100]
    assert x.size >= 100
    h = 1e-3
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
    off = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    utt = sum(ci * p2.exact_u(x, y, t + o) for ci, o in zip(c, off))
    uxx = sum(ci * p2.exact_u(x + o, y, t) for ci, o in zip(c, off))
    uyy = sum(ci * p2.exact_u(x, y + o, t) for ci, o in zip(c, off))
    resid = utt - uxx - uyy - p2.forcing(x, y, t)
    assert np.abs(resid).max() < 1e-4


def test_2d_edges_vanish():
    p2 = problem_2d()
    rng = np.random.default_rng(7)
    s = rng.uniform(0, 1, 200)
    t = rng.uniform(0, 1, 200)
    zero = np.zeros_like(s)
    one = np.ones_like(s)
    for xs, ys in ((zero, s), (one, s), (s, zero), (s, one)):
        assert np.abs(p2.exact_u(xs, ys, t)).max() < 1e-12


def test_2d_initial_data_and_p():
    p2 = problem_2d()
    rng = np.random.default_rng(8)
    x = rng.uniform(0, 1, 300)
    y = rng.uniform(0, 1, 300)
    assert np.abs(p2.exact_u(x, y, 0.0) - p2.u0(x, y)).max() < 1e-12
    assert np.abs(p2.exact_p(x, y, 0.0) - p2.v0(x, y)).max() < 1e-12
    h = 1e-4
    t = rng.uniform(0.1, 0.9, 300)
    fd = (p2.exact_u(x, y, t - 2 * h) - 8 * p2.exact_u(x, y, t - h)
          + 8 * p2.exact_u(x, y, t + h) - p2.exact_u(x, y, t + 2 * h)) / (12 * h)
    assert np.abs(fd - p2.exact_p(x, y, t)).max() < 1e-6


def test_2d_gradient_matches_finite_differences():
    p2 = problem_2d()
    rng = np.random.default_rng(9)
    x = rng.uniform(0.02, 0.98, 300)
    y = rng.uniform(0.02, 0.98, 300)
    t = rng.uniform(0.1, 0.9, 300)
    h = 1e-4
    gx_fd = (p2.exact_u(x + h, y, t) - p2.exact_u(x - h, y, t)) / (2 * h)
    gy_fd = (p2.exact_u(x, y + h, t) - p2.exact_u(x, y - h, t)) / (2 * h)
    gx, gy = p2.exact_grad_u(x, y, t)
    assert np.abs(gx_fd - gx).max() < 1e-5
    assert np.abs(gy_fd - gy).max() < 1e-5


def test_traveling_wave_right_mover_before_reflection():
    # before the front reaches the boundary the solution is pure transport
    wave = DirichletWave1D(lambda z: mu(0.5, 0.2, z), lambda z: mu_prime(0.5, 0.2, z))
    x = np.linspace(0.3, 0.9, 50)
    assert np.abs(wave.u(x, 0.15) - mu(0.5, 0.2, x - 0.15)).max() < 1e-14
