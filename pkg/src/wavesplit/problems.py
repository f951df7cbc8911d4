"""Analytic reference problems for the unit interval and unit square.

The traveling profile is the C^2 bump

    mu_{xi,s}(z) = 1_{|z-xi|<s} * sin(pi (z - (xi+s)) / (2s))^3,

whose cubed sine gives two vanishing derivatives at the support endpoints.
The 1D initial data (bump difference, velocity = -d/dx of it) launches a
purely right-moving wave; with homogeneous Dirichlet ends the solution is
the d'Alembert form built from the odd 2-periodic extension mu~ of the
initial profile,

    u(x,t) = mu~(x-t) * [ (x-t) mod 2 in [0,1] ]
           + mu~(x+t) * [ (x+t) mod 2 in [1,2] ],

i.e. the right-moving branch plus its parity-reflected left-moving image.
Both boundary values vanish identically and the solution is 2-periodic in
time.  All callables broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

_PI = np.pi


def mu(xi: float, s: float, z) -> np.ndarray:
    """Bump value at z (vectorized)."""
    if s <= 0.0:
        raise ValueError("s must be positive")
    z = np.asarray(z, dtype=float)
    inside = np.abs(z - xi) < s
    theta = (z - (xi + s)) * (_PI / (2.0 * s))
    return np.where(inside, np.sin(theta) ** 3, 0.0)


def mu_prime(xi: float, s: float, z) -> np.ndarray:
    """First derivative of the bump (0 outside and at the support endpoints)."""
    if s <= 0.0:
        raise ValueError("s must be positive")
    z = np.asarray(z, dtype=float)
    inside = np.abs(z - xi) < s
    c = _PI / (2.0 * s)
    theta = (z - (xi + s)) * c
    val = 3.0 * c * np.sin(theta) ** 2 * np.cos(theta)
    return np.where(inside, val, 0.0)


def mu_second(xi: float, s: float, z) -> np.ndarray:
    """Second derivative of the bump (classical inside the open support)."""
    if s <= 0.0:
        raise ValueError("s must be positive")
    z = np.asarray(z, dtype=float)
    inside = np.abs(z - xi) < s
    c = _PI / (2.0 * s)
    theta = (z - (xi + s)) * c
    sin_t = np.sin(theta)
    val = 3.0 * c * c * sin_t * (2.0 * np.cos(theta) ** 2 - sin_t * sin_t)
    return np.where(inside, val, 0.0)


class DirichletWave1D:
    """Exact homogeneous-Dirichlet wave on (0,1) from a right-moving profile.

    ``profile``/``profile_prime`` give the initial displacement and its
    derivative on [0,1]; the support must stay strictly inside (0,1) so the
    odd 2-periodic extension is C^2.
    """

    def __init__(self, profile: Callable, profile_prime: Callable):
        self._f = profile
        self._df = profile_prime

    def _ext(self, z):
        """Odd 2-periodic extension of the profile."""
        y = np.mod(z, 2.0)
        return np.where(y <= 1.0, self._f(y), -self._f(2.0 - y))

    def _ext_prime(self, z):
        y = np.mod(z, 2.0)
        return np.where(y <= 1.0, self._df(y), self._df(2.0 - y))

    def u(self, x, t):
        a = np.mod(np.asarray(x, dtype=float) - t, 2.0)
        b = np.mod(np.asarray(x, dtype=float) + t, 2.0)
        right = np.where(a <= 1.0, self._f(a), 0.0)
        left = np.where(b >= 1.0, -self._f(2.0 - b), 0.0)
        return right + left

    def p(self, x, t):
        """Time derivative of u."""
        a = np.mod(np.asarray(x, dtype=float) - t, 2.0)
        b = np.mod(np.asarray(x, dtype=float) + t, 2.0)
        right = np.where(a <= 1.0, -self._df(a), 0.0)
        left = np.where(b >= 1.0, self._df(2.0 - b), 0.0)
        return right + left

    def ux(self, x, t):
        """Space derivative of u."""
        a = np.mod(np.asarray(x, dtype=float) - t, 2.0)
        b = np.mod(np.asarray(x, dtype=float) + t, 2.0)
        right = np.where(a <= 1.0, self._df(a), 0.0)
        left = np.where(b >= 1.0, self._df(2.0 - b), 0.0)
        return right + left


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Problem data: wave speed, initial pair, forcing, optional exact pair."""

    dim: int
    kappa: float
    final_time: float
    u0: Callable
    v0: Callable
    forcing: Callable | None = None
    exact_u: Callable | None = None
    exact_p: Callable | None = None
    exact_grad_u: Callable | None = None


def problem_1d(final_time: float = 5.0) -> ProblemSpec:
    """Homogeneous 1D problem: double-bump data, right-moving exact solution."""
    xi1, xi2, s = 0.55, 0.45, 0.2

    def profile(z):
        return mu(xi1, s, z) - mu(xi2, s, z)

    def profile_prime(z):
        return mu_prime(xi1, s, z) - mu_prime(xi2, s, z)

    wave = DirichletWave1D(profile, profile_prime)
    return ProblemSpec(
        dim=1,
        kappa=1.0,
        final_time=final_time,
        u0=profile,
        v0=lambda x: -profile_prime(x),
        forcing=None,
        exact_u=wave.u,
        exact_p=wave.p,
        exact_grad_u=lambda x, t: (wave.ux(x, t),),
    )


def problem_2d(final_time: float = 1.0) -> ProblemSpec:
    """Manufactured 2D problem u = w(x,t) mu(y) + w(y,t) mu(x).

    ``w`` is the 1D exact solution launched from the single bump
    mu_{0.5,0.2}.  Since w solves the 1D wave equation, the cross terms in
    the residual cancel and the forcing reduces to
    f = -w(x,t) mu''(y) - w(y,t) mu''(x).
    """
    xi, s = 0.5, 0.2

    def bump(z):
        return mu(xi, s, z)

    def bump_p(z):
        return mu_prime(xi, s, z)

    def bump_pp(z):
        return mu_second(xi, s, z)

    w = DirichletWave1D(bump, bump_p)

    def exact_u(x, y, t):
        return w.u(x, t) * bump(y) + w.u(y, t) * bump(x)

    def exact_p(x, y, t):
        return w.p(x, t) * bump(y) + w.p(y, t) * bump(x)

    def exact_grad_u(x, y, t):
        gx = w.ux(x, t) * bump(y) + w.u(y, t) * bump_p(x)
        gy = w.u(x, t) * bump_p(y) + w.ux(y, t) * bump(x)
        return gx, gy

    def forcing(x, y, t):
        return -w.u(x, t) * bump_pp(y) - w.u(y, t) * bump_pp(x)

    return ProblemSpec(
        dim=2,
        kappa=1.0,
        final_time=final_time,
        u0=lambda x, y: 2.0 * bump(x) * bump(y),
        v0=lambda x, y: -(bump_p(x) * bump(y) + bump_p(y) * bump(x)),
        forcing=forcing,
        exact_u=exact_u,
        exact_p=exact_p,
        exact_grad_u=exact_grad_u,
    )
