"""Configuration-driven experiment runner emitting CSV result tables.

Experiments mirror the library's study types: tau-convergence against the
exact solution and the global Crank-Nicolson reference, bisection scans for
the maximal stable step size per overlap count, elliptic decay ratios of
interface data into subdomain interiors, and subdomain-topology sweeps.
Numeric output is deterministic for a fixed configuration and thread count;
wall times are recorded only when ``record_timing`` is enabled so that CSV
files reproduce bitwise by default.
"""

from __future__ import annotations

import configparser
import csv
import math
import time
from dataclasses import dataclass, fields as dataclass_fields
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .decomposition import build_averaging_plan, grow_overlap, partition_blocks
from .fem import DiscreteOperators, State, assemble_lumped_mass, \
    assemble_operators, assemble_stiffness, b_norm, discrete_norms, \
    energy_norm, error_vs_exact, interpolate_nodal, operator_norm_estimate
from .integrators import SolverConfig, StepContext, ds_step, integrate, \
    prepare_subdomain_systems, stability_bounds
from .linalg import cg_solve, make_csr
from .mesh import SimplicialMesh, build_adjacency, build_interval_mesh, \
    build_unit_square_mesh
from .problems import ProblemSpec, problem_1d, problem_2d


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class BracketError(RuntimeError):
    """CFL bisection could not establish or refine a stable/unstable bracket."""


@dataclass
class ExperimentConfig:
    experiment_id: str = "experiment"
    kind: str = "convergence"
    dim: int = 1
    final_time: float | None = None
    n_cells: int = 2000
    perturb_fraction: float = 0.2
    seed: int = 7
    nx: int = 100
    ny: int = 100
    taus: tuple[float, ...] = ()
    schemes: tuple[str, ...] = ("cn", "ds")
    ell: int = 8
    ells: tuple[int, ...] = (1, 2, 4, 8, 12, 16)
    nx_sub: int = 2
    ny_sub: int = 1
    grids: tuple[tuple[int, int], ...] = ((2, 1), (2, 2), (4, 4))
    lambdas: tuple[str, ...] = ("h", "4h", "16h")
    tol: float = 1e-12
    blowup_factor: float = 1e3
    threads: int = 1
    record_timing: bool = False
    out_path: str = "results.csv"

    def validate(self) -> None:
        if self.kind not in ("run", "convergence", "cfl-scan", "decay", "topology"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.dim not in (1, 2):
            raise ConfigError("problem dim must be 1 or 2")
        if self.final_time is not None and self.final_time <= 0:
            raise ConfigError("final_time must be positive")
        if any(t <= 0 for t in self.taus):
            raise ConfigError("tau values must be positive")
        for s in self.schemes:
            if s not in ("cn", "ds", "lf"):
                raise ConfigError(f"unknown scheme {s!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if "ds" in self.schemes and (self.nx_sub < 1 or self.ny_sub < 1):
            raise ConfigError("ds scheme requires a subdomain grid")


@dataclass
class ResultRow:
    """One experiment outcome; lam/delta/ratio are decay-only extras."""

    experiment: str
    scheme: str
    tau: float
    h_min: float
    h_max: float
    ell: int
    nx_sub: int
    ny_sub: int
    err_exact: float | None
    err_vs_cn: float | None
    stable: bool
    steps: int
    wall_ms: float
    lam: float | None = None
    delta: float | None = None
    ratio: float | None = None


CSV_COLUMNS = [f.name for f in dataclass_fields(ResultRow)]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(rows: Sequence[ResultRow], path) -> None:
    """Header plus one line per row; '.' decimals, ',' separators, LF, UTF-8."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, name)) for name in CSV_COLUMNS])


def read_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for rec in reader:
            rows.append(ResultRow(
                experiment=rec["experiment"],
                scheme=rec["scheme"],
                tau=float(rec["tau"]),
                h_min=float(rec["h_min"]),
                h_max=float(rec["h_max"]),
                ell=int(rec["ell"]),
                nx_sub=int(rec["nx_sub"]),
                ny_sub=int(rec["ny_sub"]),
                err_exact=float(rec["err_exact"]) if rec["err_exact"] else None,
                err_vs_cn=float(rec["err_vs_cn"]) if rec["err_vs_cn"] else None,
                stable=rec["stable"] == "true",
                steps=int(rec["steps"]),
                wall_ms=float(rec["wall_ms"]),
                lam=float(rec["lam"]) if rec["lam"] else None,
                delta=float(rec["delta"]) if rec["delta"] else None,
                ratio=float(rec["ratio"]) if rec["ratio"] else None,
            ))
    return rows


@dataclass(eq=False)
class ProblemSetup:
    """Mesh, operators, initial state, and error closures for one problem."""

    config: ExperimentConfig
    problem: ProblemSpec
    mesh: SimplicialMesh
    ops: DiscreteOperators
    adjacency: object
    state0: State
    forcing_nodal: Callable[[float], np.ndarray] | None
    operator_norm: float

    def error_vs_exact_at(self, state: State) -> float:
        p = self.problem
        t = state.t
        if p.exact_u is None:
            raise ConfigError("problem has no exact solution")
        if p.dim == 1:
            return error_vs_exact(
                self.mesh, self.ops, state,
                lambda x: p.exact_u(x, t),
                lambda x: p.exact_p(x, t),
                lambda x: p.exact_grad_u(x, t))
        return error_vs_exact(
            self.mesh, self.ops, state,
            lambda x, y: p.exact_u(x, y, t),
            lambda x, y: p.exact_p(x, y, t),
            lambda x, y: p.exact_grad_u(x, y, t))


def build_setup(cfg: ExperimentConfig) -> ProblemSetup:
    cfg.validate()
    if cfg.dim == 1:
        problem = problem_1d(cfg.final_time if cfg.final_time else 5.0)
        mesh = build_interval_mesh(cfg.n_cells, cfg.perturb_fraction, cfg.seed)
    else:
        problem = problem_2d(cfg.final_time if cfg.final_time else 1.0)
        mesh = build_unit_square_mesh(cfg.nx, cfg.ny)
    ops = assemble_operators(mesh, problem.kappa)
    adjacency = build_adjacency(mesh)

    q0 = interpolate_nodal(mesh, problem.u0)
    p0 = interpolate_nodal(mesh, problem.v0)
    q0[ops.dirichlet_mask] = 0.0
    p0[ops.dirichlet_mask] = 0.0
    state0 = State(q=q0, p=p0, t=0.0)

    if problem.forcing is None:
        forcing_nodal = None
    else:
        if problem.dim == 1:
            def forcing_nodal(t, _m=mesh, _f=problem.forcing):
                return interpolate_nodal(_m, lambda x: _f(x, t))
        else:
            def forcing_nodal(t, _m=mesh, _f=problem.forcing):
                return interpolate_nodal(_m, lambda x, y: _f(x, y, t))

    norm = operator_norm_estimate(ops, tol=1e-6)
    return ProblemSetup(config=cfg, problem=problem, mesh=mesh, ops=ops,
                        adjacency=adjacency, state0=state0,
                        forcing_nodal=forcing_nodal, operator_norm=norm)


def build_decomposition(setup: ProblemSetup, nx_sub: int, ny_sub: int, ell: int):
    owner = partition_blocks(setup.mesh, nx_sub, ny_sub)
    dec = grow_overlap(setup.mesh, setup.adjacency, owner, ell)
    plan = build_averaging_plan(setup.mesh, dec)
    return dec, plan


def _steps_for(final_time: float, tau: float) -> tuple[int, float]:
    """Snap tau to an integer division of the final time."""
    steps = max(1, math.ceil(final_time / tau - 1e-12))
    return steps, final_time / steps


def _now_ms(enabled: bool) -> float:
    return time.perf_counter() * 1e3 if enabled else 0.0


def run_convergence(cfg: ExperimentConfig) -> list[ResultRow]:
    """CN/DS/LF runs over the tau list; errors vs exact and vs CN at T."""
    setup = build_setup(cfg)
    T = setup.problem.final_time
    solver = SolverConfig(tol=cfg.tol)
    rows: list[ResultRow] = []
    dec = plan = None
    if "ds" in cfg.schemes:
        dec, plan = build_decomposition(setup, cfg.nx_sub, cfg.ny_sub, cfg.ell)

    for tau_req in cfg.taus:
        steps, tau = _steps_for(T, tau_req)
        ctx = StepContext(tau=tau, forcing_nodal=setup.forcing_nodal)
        t0 = _now_ms(cfg.record_timing)
        res_cn = integrate("cn", setup.ops, ctx, setup.state0, steps,
                           solver=solver, blowup_factor=cfg.blowup_factor)
        t_cn = _now_ms(cfg.record_timing) - t0
        rows.append(_result_row(cfg, setup, "cn", tau, cfg.ell, 1, 1,
                                res_cn, res_cn, t_cn))
        for scheme in cfg.schemes:
            if scheme == "cn":
                continue
            kwargs = dict(solver=solver, blowup_factor=cfg.blowup_factor)
            if scheme == "ds":
                kwargs.update(dec=dec, plan=plan, threads=cfg.threads)
            t0 = _now_ms(cfg.record_timing)
            res = integrate(scheme, setup.ops, ctx, setup.state0, steps, **kwargs)
            wall = _now_ms(cfg.record_timing) - t0
            nx_s, ny_s = (cfg.nx_sub, cfg.ny_sub) if scheme == "ds" else (1, 1)
            rows.append(_result_row(cfg, setup, scheme, tau, cfg.ell,
                                    nx_s, ny_s, res, res_cn, wall))
    return rows


def _result_row(cfg, setup, scheme, tau, ell, nx_sub, ny_sub, res, res_cn,
                wall_ms) -> ResultRow:
    if res.stable and res_cn.stable:
        err_exact = setup.error_vs_exact_at(res.state)
        if scheme == "cn":
            err_vs_cn = 0.0
        else:
            diff = State(res.state.q - res_cn.state.q,
                         res.state.p - res_cn.state.p, res.state.t)
            err_vs_cn = discrete_norms(setup.ops, diff)[2]
    else:
        err_exact = float("inf")
        err_vs_cn = float("inf")
    return ResultRow(
        experiment=cfg.experiment_id, scheme=scheme, tau=tau,
        h_min=setup.mesh.h_min, h_max=setup.mesh.h_max, ell=ell,
        nx_sub=nx_sub, ny_sub=ny_sub, err_exact=err_exact,
        err_vs_cn=err_vs_cn, stable=res.stable, steps=res.steps_run,
        wall_ms=wall_ms)


def _stable_ds_run(setup: ProblemSetup, dec, plan, tau: float,
                   solver: SolverConfig, cfg: ExperimentConfig) -> bool:
    T = setup.problem.final_time
    steps = max(1, round(T / tau))
    ctx = StepContext(tau=tau, forcing_nodal=setup.forcing_nodal)
    res = integrate("ds", setup.ops, ctx, setup.state0, steps, dec=dec, plan=plan,
                    solver=solver, blowup_factor=cfg.blowup_factor,
                    threads=cfg.threads)
    return res.stable


def ds_growth_factor(setup: ProblemSetup, dec, plan, tau: float,
                     solver: SolverConfig, iters: int = 160,
                     tail: int = 40) -> float:
    """Dominant per-step growth factor of the splitting map (f = 0).

    Power iteration in the discrete energy norm; the geometric mean over
    the trailing iterations averages out complex-pair oscillations.
    Deterministic (fixed start vector).
    """
    ops = setup.ops
    ctx = StepContext(tau=tau)
    systems = prepare_subdomain_systems(ops, dec, tau)
    rng = np.random.default_rng(12345)
    q = rng.standard_normal(ops.n_nodes)
    p = rng.standard_normal(ops.n_nodes)
    q[ops.dirichlet_mask] = 0.0
    p[ops.dirichlet_mask] = 0.0
    state = State(q=q, p=p, t=0.0)
    e = energy_norm(ops, state)
    state = State(q=state.q / e, p=state.p / e, t=0.0)
    logs = []
    for _ in range(iters):
        state = ds_step(ops, ctx, dec, plan, systems, state, solver=solver)
        e = energy_norm(ops, state)
        if not np.isfinite(e) or e == 0.0:
            return float("inf")
        logs.append(np.log(e))
        state = State(q=state.q / e, p=state.p / e, t=0.0)
    return float(np.exp(np.mean(logs[-tail:])))


def find_tau_max(setup: ProblemSetup, dec, plan, ell: int,
                 cfg: ExperimentConfig) -> float:
    """Largest stable DS step size by bisection (1% relative resolution).

    Stability of a step size is judged on the worst-case state: tau counts
    as stable when the dominant growth factor r of the one-step map keeps
    r^(T/tau) <= blowup_factor, i.e. the energy of any run to T stays
    below the blow-up threshold.  (Runs started from the smooth problem
    data barely excite near-onset modes, so at desk-scale horizons an
    energy check on those runs overestimates tau_max severely.)

    Returns tau_max with a verified stable step size and a verified
    unstable one at 1.02 tau_max; raises BracketError listing the tried
    step sizes when no bracket can be established.
    """
    solver = SolverConfig(tol=cfg.tol)
    tau_lf, tau_ds = stability_bounds(setup.ops, max(ell, 1),
                                      operator_norm=setup.operator_norm)
    T = setup.problem.final_time
    log_thresh = np.log(cfg.blowup_factor) / T
    tried: list[float] = []
    cache: dict[float, bool] = {}

    def stable(tau: float) -> bool:
        if tau not in cache:
            tried.append(tau)
            r = ds_growth_factor(setup, dec, plan, tau, solver)
            cache[tau] = np.log(r) <= log_thresh * tau
        return cache[tau]

    lo = 0.45 * tau_lf
    for _ in range(8):
        if stable(lo):
            break
        lo *= 0.5
    else:
        raise BracketError(f"no stable step size found; tried {sorted(tried)}")

    for _ in range(3):  # restarts when 1.02*tau_max happens to be stable
        hi = lo * 1.3
        while stable(hi):
            lo = hi
            hi *= 1.3
            if hi > 20.0 * tau_ds:
                raise BracketError(
                    f"no unstable step size below {hi:g}; tried {sorted(tried)}")
        while hi - lo > 0.01 * lo:
            mid = 0.5 * (lo + hi)
            if stable(mid):
                lo = mid
            else:
                hi = mid
        if not stable(1.02 * lo):
            return lo
        lo = 1.02 * lo
    raise BracketError(
        f"stability boundary too jagged near {lo:g}; tried {sorted(tried)}")


def run_cfl_scan(cfg: ExperimentConfig) -> list[ResultRow]:
    """Maximal stable DS step size for each overlap count."""
    setup = build_setup(cfg)
    solver = SolverConfig(tol=cfg.tol)
    rows = []
    for ell in cfg.ells:
        dec, plan = build_decomposition(setup, cfg.nx_sub, cfg.ny_sub, ell)
        t0 = _now_ms(cfg.record_timing)
        tau_max = find_tau_max(setup, dec, plan, ell, cfg)
        wall = _now_ms(cfg.record_timing) - t0
        T = setup.problem.final_time
        steps = max(1, round(T / tau_max))
        ctx = StepContext(tau=tau_max, forcing_nodal=setup.forcing_nodal)
        res = integrate("ds", setup.ops, ctx, setup.state0, steps, dec=dec,
                        plan=plan, solver=solver, blowup_factor=cfg.blowup_factor,
                        threads=cfg.threads)
        err = setup.error_vs_exact_at(res.state) if res.stable else float("inf")
        rows.append(ResultRow(
            experiment=cfg.experiment_id, scheme="ds", tau=tau_max,
            h_min=setup.mesh.h_min, h_max=setup.mesh.h_max, ell=ell,
            nx_sub=cfg.nx_sub, ny_sub=cfg.ny_sub, err_exact=err,
            err_vs_cn=None, stable=res.stable, steps=res.steps_run,
            wall_ms=wall,
            delta=min(w for w in dec.realized_overlap_width if np.isfinite(w))))
    return rows


def _parse_lambda(spec: str, h_min: float) -> float:
    spec = spec.strip()
    if spec.endswith("h"):
        factor = spec[:-1]
        return (float(factor) if factor else 1.0) * h_min
    return float(spec)


def run_decay_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Elliptic decay of interface data into the distinguished subdomain.

    Solves (z, phi)_ML + lambda^2 a(z, phi) = 0 with z = g on the overlap
    boundary (g: one at artificial-interface nodes, zero on the physical
    boundary) and reports b-norm(z over owned cells) / b-norm(g over
    overlap cells) together with the realized overlap width.
    """
    setup = build_setup(cfg)
    mesh = setup.mesh
    kappa = setup.problem.kappa
    rows = []
    for ell in cfg.ells:
        dec, _ = build_decomposition(setup, cfg.nx_sub, cfg.ny_sub, ell)
        i = 0
        ids = dec.subdomain_nodes[i]
        cells = dec.overlap_cells[i]
        owned = np.where(dec.cell_owner == i)[0]
        mass = assemble_lumped_mass(mesh, cells)[ids]
        stiff = assemble_stiffness(mesh, kappa, cells)[ids][:, ids].tocsr()
        art_local = dec.local_index(i, dec.artificial_interface_nodes[i])
        phys_local = dec.local_index(i, dec.physical_boundary_nodes[i])
        dir_local = np.unique(np.concatenate([art_local, phys_local]))
        free = np.ones(ids.size, dtype=bool)
        free[dir_local] = False
        free = np.where(free)[0]

        ops_owned = DiscreteOperators(
            lumped_mass=assemble_lumped_mass(mesh, owned),
            stiffness=assemble_stiffness(mesh, kappa, owned),
            dirichlet_mask=np.zeros(mesh.n_nodes, dtype=bool), kappa=kappa)
        ops_overlap = DiscreteOperators(
            lumped_mass=assemble_lumped_mass(mesh, cells),
            stiffness=assemble_stiffness(mesh, kappa, cells),
            dirichlet_mask=np.zeros(mesh.n_nodes, dtype=bool), kappa=kappa)

        g_local = np.zeros(ids.size)
        g_local[art_local] = 1.0

        for lam_spec in cfg.lambdas:
            lam = _parse_lambda(str(lam_spec), mesh.h_min)
            a = make_csr(sp.diags_array(mass) + (lam * lam) * stiff)
            a_ff = a[free][:, free].tocsr()
            a_fd = a[free][:, dir_local].tocsr()
            z_local = g_local.copy()
            if np.any(g_local != 0.0):
                rhs = -(a_fd @ g_local[dir_local])
                z_local[free] = cg_solve(a_ff, rhs, tol=cfg.tol,
                                         precond_diag=a_ff.diagonal())
            else:
                z_local[free] = 0.0

            z_glob = np.zeros(mesh.n_nodes)
            z_glob[ids] = z_local
            g_glob = np.zeros(mesh.n_nodes)
            g_glob[ids] = g_local
            bz = b_norm(ops_owned, z_glob, lam)
            bg = b_norm(ops_overlap, g_glob, lam)
            ratio = bz / bg if bg > 0.0 else 0.0
            rows.append(ResultRow(
                experiment=cfg.experiment_id, scheme="decay", tau=0.0,
                h_min=mesh.h_min, h_max=mesh.h_max, ell=ell,
                nx_sub=cfg.nx_sub, ny_sub=cfg.ny_sub, err_exact=None,
                err_vs_cn=None, stable=True, steps=0, wall_ms=0.0,
                lam=lam, delta=dec.realized_overlap_width[i], ratio=ratio))
    return rows


def run_topology_sweep(cfg: ExperimentConfig) -> list[ResultRow]:
    """DS vs CN distance at T across subdomain grid configurations."""
    if cfg.dim != 2:
        raise ConfigError("topology sweep requires the 2d problem")
    setup = build_setup(cfg)
    T = setup.problem.final_time
    solver = SolverConfig(tol=cfg.tol)
    rows = []
    cn_results = {}
    for tau_req in cfg.taus:
        steps, tau = _steps_for(T, tau_req)
        ctx = StepContext(tau=tau, forcing_nodal=setup.forcing_nodal)
        cn_results[tau] = (steps, integrate(
            "cn", setup.ops, ctx, setup.state0, steps, solver=solver,
            blowup_factor=cfg.blowup_factor))
    for nx_sub, ny_sub in cfg.grids:
        dec, plan = build_decomposition(setup, nx_sub, ny_sub, cfg.ell)
        for tau, (steps, res_cn) in cn_results.items():
            ctx = StepContext(tau=tau, forcing_nodal=setup.forcing_nodal)
            t0 = _now_ms(cfg.record_timing)
            res = integrate("ds", setup.ops, ctx, setup.state0, steps, dec=dec,
                            plan=plan, solver=solver,
                            blowup_factor=cfg.blowup_factor, threads=cfg.threads)
            wall = _now_ms(cfg.record_timing) - t0
            rows.append(_result_row(cfg, setup, "ds", tau, cfg.ell,
                                    nx_sub, ny_sub, res, res_cn, wall))
    return rows


RUNNERS = {
    "run": run_convergence,
    "convergence": run_convergence,
    "cfl-scan": run_cfl_scan,
    "decay": run_decay_experiment,
    "topology": run_topology_sweep,
}


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    cfg.validate()
    return RUNNERS[cfg.kind](cfg)


def _parse_grid(token: str) -> tuple[int, int]:
    try:
        a, b = token.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {token!r}, expected like '4x4'") from exc


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read the sectioned key-value config file into an ExperimentConfig."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    cfg = ExperimentConfig()

    def get(section, key, cast, default):
        if parser.has_option(section, key):
            raw = parser.get(section, key)
            try:
                return cast(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
        return default

    def split(raw):
        return [tok for tok in raw.replace(",", " ").split() if tok]

    cfg.experiment_id = get("experiment", "id", str, cfg.experiment_id)
    cfg.kind = get("experiment", "kind", str, cfg.kind)
    cfg.dim = get("problem", "dim", int, cfg.dim)
    cfg.final_time = get("problem", "final_time", float, cfg.final_time)
    cfg.n_cells = get("mesh", "n_cells", int, cfg.n_cells)
    cfg.perturb_fraction = get("mesh", "perturb_fraction", float, cfg.perturb_fraction)
    cfg.seed = get("mesh", "seed", int, cfg.seed)
    cfg.nx = get("mesh", "nx", int, cfg.nx)
    cfg.ny = get("mesh", "ny", int, cfg.ny)
    cfg.taus = tuple(get("time", "taus", lambda r: [float(t) for t in split(r)],
                         list(cfg.taus)))
    cfg.schemes = tuple(get("run", "schemes", lambda r: [s.lower() for s in split(r)],
                            list(cfg.schemes)))
    cfg.ell = get("decomposition", "ell", int, cfg.ell)
    cfg.ells = tuple(get("decomposition", "ells", lambda r: [int(t) for t in split(r)],
                         list(cfg.ells)))
    grid = get("decomposition", "grid", str, None)
    if grid is not None:
        cfg.nx_sub, cfg.ny_sub = _parse_grid(grid)
    cfg.grids = tuple(get("decomposition", "grids",
                          lambda r: [_parse_grid(t) for t in split(r)],
                          list(cfg.grids)))
    cfg.lambdas = tuple(get("decomposition", "lambdas", split, list(cfg.lambdas)))
    cfg.tol = get("solver", "tol", float, cfg.tol)
    cfg.blowup_factor = get("solver", "blowup_factor", float, cfg.blowup_factor)
    cfg.threads = get("run", "threads", int, cfg.threads)
    cfg.record_timing = get("run", "record_timing",
                            lambda r: r.strip().lower() in ("1", "true", "yes", "on"),
                            cfg.record_timing)
    cfg.out_path = get("output", "path", str, cfg.out_path)

    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg
