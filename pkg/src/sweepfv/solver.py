"""Residual operator, time step, fixed-point drivers and the convergence loop.

Three drivers are provided:

* ``fe_jacobi``     forward Euler, every cell updated from the old field
* ``rk3_jacobi``    three-stage TVD Runge-Kutta, Jacobi in every stage
* ``fe_fast_sweep`` forward Euler Gauss-Seidel along eight alternating
                    orderings, each cell using the newest neighbour values

One complete update of all cells counts as one iteration, so one directional
sweep is one iteration and a full eight-direction cycle is eight.
"""
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit, prange

from .euler import (
    GAMMA, NonPhysicalStateError, get_case, is_physical, lax_friedrichs_into,
    primitive_to_conservative, source_averages,
)
from .mesh import BoundaryTag
from .quadrature import GAUSS3_WEIGHTS
from .stencil import build_operators, build_stencils, extend_with_ghosts
from .sweep import build_orderings
from .weno import WenoConfig, reconstruct_cell

DRIVERS = ("fe_jacobi", "rk3_jacobi", "fe_fast_sweep")
DRIVER_ALIASES = {"fe": "fe_jacobi", "rk3": "rk3_jacobi", "sweep": "fe_fast_sweep"}
DIVERGENCE_LIMIT = 1e6

# boundary codes used by the kernels
INTERIOR, FIXED, WALL, OUTFLOW = 0, 1, 2, 3
_KIND_CODE = {"dirichlet": FIXED, "exact": FIXED, "wall": WALL, "outflow": OUTFLOW}


class SolverError(RuntimeError):
    pass


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _exterior(code, um, nx, ny, fixed, ur):
    if code == FIXED:
        for c in range(4):
            ur[c] = fixed[c]
    elif code == WALL:
        mn = um[1] * nx + um[2] * ny
        ur[0] = um[0]
        ur[1] = um[1] - 2.0 * mn * nx
        ur[2] = um[2] - 2.0 * mn * ny
        ur[3] = um[3]
    else:
        for c in range(4):
            ur[c] = um[c]


@njit(cache=True)
def _edge_sum(i, k, uq_minus, uq_plus, geo, gamma_gas, alpha_fixed, acc, flux, work, ur):
    """Accumulate length * sum_m sigma_m * LF flux over edge ``k`` of cell ``i``.

    ``uq_plus[m]`` is the exterior state matching interior point ``m``; it is
    ignored on boundary edges, where the boundary code decides.
    """
    nbr, nbr_edge, lengths, normals, areas, bcode, bstate, src, qw = geo
    nx = normals[i, k, 0]
    ny = normals[i, k, 1]
    for m in range(3):
        um = uq_minus[3 * k + m]
        if nbr[i, k] >= 0:
            for c in range(4):
                ur[c] = uq_plus[m, c]
        else:
            _exterior(bcode[i, k], um, nx, ny, bstate[i, 3 * k + m], ur)
        if not (is_physical(um, gamma_gas) and is_physical(ur, gamma_gas)):
            return False
        lax_friedrichs_into(um, ur, nx, ny, gamma_gas, alpha_fixed, flux, work)
        for c in range(4):
            acc[c] += lengths[i, k] * qw[m] * flux[c]
    return True


@njit(cache=True)
def cell_residual(i, W, ops, geo, gamma_gas, alpha_fixed, eps, out):
    """Spatial operator L for cell ``i`` from the current array ``W``.

    Neighbour states are reconstructed on the fly from ``W``, so a caller
    that updates ``W`` cell by cell gets Gauss-Seidel behaviour. Returns
    False on a non-physical reconstructed state.
    """
    idx, count, degree, beta_op, point_op, gamma = ops
    nbr, nbr_edge, lengths, normals, areas, bcode, bstate, src, qw = geo
    uq = np.empty((9, 4))
    up = np.empty((3, 4))
    plus = np.empty((3, 4))
    acc = np.zeros(4)
    flux = np.empty(4)
    work = np.empty(4)
    ur = np.empty(4)
    reconstruct_cell(i, W, idx, count, degree, beta_op, point_op, gamma, eps, 0, 9, uq)
    for k in range(3):
        j = nbr[i, k]
        if j >= 0:
            kk = nbr_edge[i, k]
            reconstruct_cell(j, W, idx, count, degree, beta_op, point_op, gamma, eps,
                             3 * kk, 3 * kk + 3, up)
            for m in range(3):
                for c in range(4):
                    plus[m, c] = up[2 - m, c]
        if not _edge_sum(i, k, uq, plus, geo, gamma_gas, alpha_fixed, acc, flux, work, ur):
            return False
    for c in range(4):
        out[c] = -acc[c] / areas[i] + src[i, c]
    return True


@njit(cache=True, parallel=True)
def reconstruct_all(W, n_real, ops, eps, UQ):
    idx, count, degree, beta_op, point_op, gamma = ops
    for i in prange(n_real):
        reconstruct_cell(i, W, idx, count, degree, beta_op, point_op, gamma, eps, 0, 9, UQ[i])


@njit(cache=True, parallel=True)
def residual_all(UQ, geo, gamma_gas, alpha_fixed, L, ok):
    """Jacobi residual from precomputed Gauss-point states ``UQ`` (M, 9, 4)."""
    nbr, nbr_edge, lengths, normals, areas, bcode, bstate, src, qw = geo
    n = UQ.shape[0]
    for i in prange(n):
        acc = np.zeros(4)
        flux = np.empty(4)
        work = np.empty(4)
        ur = np.empty(4)
        plus = np.empty((3, 4))
        good = True
        for k in range(3):
            j = nbr[i, k]
            if j >= 0:
                kk = nbr_edge[i, k]
                for m in range(3):
                    for c in range(4):
                        plus[m, c] = UQ[j, 3 * kk + 2 - m, c]
            if not _edge_sum(i, k, UQ[i], plus, geo, gamma_gas, alpha_fixed, acc, flux, work, ur):
                good = False
                break
        ok[i] = good
        for c in range(4):
            L[i, c] = -acc[c] / areas[i] + src[i, c]


@njit(cache=True)
def sweep_kernel(order, W, dt, ops, geo, gamma_gas, alpha_fixed, eps):
    """In-place Gauss-Seidel forward Euler sweep; returns the failing position or -1."""
    L = np.empty(4)
    for pos in range(order.shape[0]):
        i = order[pos]
        if not cell_residual(i, W, ops, geo, gamma_gas, alpha_fixed, eps, L):
            return pos
        for c in range(4):
            W[i, c] += dt * L[c]
    return -1


# ---------------------------------------------------------------- discretization

class Discretization:
    """Everything precomputed once per mesh and case: stencils, operators,
    ghost-cell averages, boundary data and source averages."""

    def __init__(self, mesh, case, weno=None, alpha=None):
        self.mesh = mesh
        self.case = get_case(case) if isinstance(case, str) else case
        self.weno = weno or WenoConfig()
        self.gamma_gas = float(self.case.gamma)
        self.alpha_fixed = 0.0 if alpha is None else float(alpha)
        rules = self.case.rules
        tags_present = {BoundaryTag(t).name for t in np.unique(mesh.edge_tags) if t}
        missing = tags_present - set(rules)
        if missing:
            raise SolverError(f"case {self.case.name!r} has no rule for {sorted(missing)}")

        ghost_tags = {BoundaryTag[t] for t in tags_present if rules[t].kind == "exact"}
        if ghost_tags and self.case.exact is None:
            raise SolverError("exact boundaries need a case with an exact solution")
        self.complex = extend_with_ghosts(mesh, tags=ghost_tags)
        self.stencils = build_stencils(self.complex)
        self.operator = build_operators(mesh, self.complex, self.stencils, self.weno.linear_weights)
        cx = self.complex
        if cx.n_ghost:
            self.ghost = cx.cell_average(self.case.exact, np.arange(cx.n_real, cx.n_cells))
        else:
            self.ghost = np.zeros((0, 4))

        m = mesh.n_cells
        bcode = np.zeros((m, 3), dtype=np.int64)
        bstate = np.zeros((m, 9, 4))
        pts = mesh.edge_points.reshape(m, 9, 2)
        for i, k in zip(*np.nonzero(mesh.neighbors < 0)):
            rule = rules[BoundaryTag(mesh.edge_tags[i, k]).name]
            bcode[i, k] = _KIND_CODE[rule.kind]
            if rule.kind == "dirichlet":
                bstate[i, 3 * k:3 * k + 3] = primitive_to_conservative(rule.state, self.gamma_gas)
            elif rule.kind == "exact":
                p = pts[i, 3 * k:3 * k + 3]
                bstate[i, 3 * k:3 * k + 3] = self.case.exact(p[:, 0], p[:, 1])
        self.bcode = bcode
        self.bstate = bstate
        self.source = source_averages(mesh, self.case)
        op = self.operator
        self.ops = (op.idx, op.count, op.degree[:, :].copy(), op.beta, op.point, op.gamma)
        self.geo = (mesh.neighbors, mesh.neighbor_edge, np.ascontiguousarray(mesh.edge_lengths),
                    np.ascontiguousarray(mesh.normals), np.ascontiguousarray(mesh.areas),
                    bcode, bstate, np.ascontiguousarray(self.source), GAUSS3_WEIGHTS.copy())

    @property
    def n_cells(self):
        return self.mesh.n_cells

    def extend(self, U):
        """Work array: real cell averages followed by the fixed ghost averages."""
        return np.ascontiguousarray(np.vstack([np.asarray(U, dtype=float), self.ghost]))

    def initial_field(self):
        return self.mesh.cell_average(self.case.initial)

    def exact_averages(self):
        if self.case.exact is None:
            raise SolverError(f"case {self.case.name!r} has no exact solution")
        return self.mesh.cell_average(self.case.exact)

    def _eps(self):
        return float(self.weno.eps)

    def gauss_point_states(self, W):
        UQ = np.empty((self.n_cells, 9, 4))
        reconstruct_all(W, self.n_cells, self.ops, self._eps(), UQ)
        return UQ

    def residual(self, U):
        """L for every cell, all reading the same field (Jacobi)."""
        W = U if len(U) == self.complex.n_cells else self.extend(U)
        UQ = self.gauss_point_states(W)
        L = np.empty((self.n_cells, 4))
        ok = np.empty(self.n_cells, dtype=np.bool_)
        residual_all(UQ, self.geo, self.gamma_gas, self.alpha_fixed, L, ok)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            raise NonPhysicalStateError(f"non-physical reconstructed state at cell {bad}")
        return L

    def residual_cell(self, U, i):
        W = U if len(U) == self.complex.n_cells else self.extend(U)
        out = np.empty(4)
        if not cell_residual(int(i), W, self.ops, self.geo, self.gamma_gas,
                             self.alpha_fixed, self._eps(), out):
            raise NonPhysicalStateError(f"non-physical reconstructed state near cell {i}")
        return out

    def time_step(self, U, cfl):
        return compute_dt(U[:self.n_cells], self.mesh, cfl, self.gamma_gas)

    def density_errors(self, U):
        """Area-weighted L1 and max-norm density errors against exact averages."""
        err = np.abs(np.asarray(U)[:self.n_cells, 0] - self.exact_averages()[:, 0])
        areas = self.mesh.areas
        return float(np.sum(areas * err) / np.sum(areas)), float(err.max())


# ---------------------------------------------------------------- time step and residue

def compute_dt(U, mesh, cfl, gamma=GAMMA):
    """Global step: CFL / max_i sum_k (|v . n_k| + c) |e_k| / (2 |T_i|)."""
    U = np.asarray(U, dtype=float)
    rho = U[:, 0]
    vx = U[:, 1] / rho
    vy = U[:, 2] / rho
    p = (gamma - 1.0) * (U[:, 3] - 0.5 * rho * (vx * vx + vy * vy))
    if np.any(rho <= 0) or np.any(p <= 0) or not np.all(np.isfinite(p)):
        bad = int(np.flatnonzero(~((rho > 0) & (p > 0)))[0]) if np.any(~((rho > 0) & (p > 0))) else -1
        raise NonPhysicalStateError(f"non-physical cell average at cell {bad}")
    c = np.sqrt(gamma * p / rho)
    n = mesh.normals
    vn = np.abs(vx[:, None] * n[..., 0] + vy[:, None] * n[..., 1])
    rate = np.sum((vn + c[:, None]) * mesh.edge_lengths, axis=1) / (2.0 * mesh.areas)
    return float(cfl / rate.max())


def residue_resa(prev, new, dt):
    """Mean absolute update rate over cells and the four components."""
    prev = np.asarray(prev, dtype=float)
    new = np.asarray(new, dtype=float)
    m = len(prev)
    return float(np.sum(np.abs(new - prev)) / dt / (4 * m))


# ---------------------------------------------------------------- single steps

def step_fe_jacobi(disc, U, dt):
    U = np.asarray(U, dtype=float)
    return U + dt * disc.residual(U)


def step_rk3_jacobi(disc, U, dt):
    U = np.asarray(U, dtype=float)
    u1 = U + dt * disc.residual(U)
    u2 = 0.75 * U + 0.25 * u1 + 0.25 * dt * disc.residual(u1)
    return U / 3.0 + 2.0 / 3.0 * u2 + 2.0 / 3.0 * dt * disc.residual(u2)


def sweep_fe_gs(disc, U, ordering, dt):
    """One directional Gauss-Seidel sweep, updating ``U`` in place."""
    order = np.asarray(ordering, dtype=np.int64)
    if len(order) != disc.n_cells or not np.array_equal(np.sort(order), np.arange(disc.n_cells)):
        raise ValueError("ordering is not a permutation of the cells")
    W = disc.extend(U)
    pos = sweep_kernel(order, W, float(dt), disc.ops, disc.geo, disc.gamma_gas,
                       disc.alpha_fixed, disc._eps())
    if pos >= 0:
        raise NonPhysicalStateError(
            f"non-physical reconstructed state at cell {int(order[pos])} (sweep position {pos})")
    U[:] = W[:disc.n_cells]
    return U


# ---------------------------------------------------------------- convergence loop

@dataclass
class SolverConfig:
    driver: str = "fe_fast_sweep"
    cfl: float = 0.6
    delta: Optional[float] = None  # None: the case default
    max_iters: int = 100000
    case: str = "euler_nosource"
    weno: WenoConfig = field(default_factory=WenoConfig)
    ref_points: Optional[np.ndarray] = None
    # ResA this many times above its running minimum counts as divergence
    growth_limit: Optional[float] = 1e6

    def __post_init__(self):
        self.driver = DRIVER_ALIASES.get(self.driver, self.driver)
        if self.driver not in DRIVERS:
            raise ValueError(f"unknown driver {self.driver!r}")
        if not self.cfl > 0:
            raise ValueError("CFL must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive")


# full-field updates per step; an RK3 stage updates every cell once
UPDATES_PER_STEP = {"fe_jacobi": 1, "rk3_jacobi": 3, "fe_fast_sweep": 1}


@dataclass
class IterationReport:
    """Outcome of a run.

    ``residues[n]`` is the ResA measured after the step that ended at
    iteration ``iteration_numbers[n]``; for RK3 each step spans three
    iterations.
    """

    driver: str
    cfl: float
    iterations: int
    residues: np.ndarray
    dts: np.ndarray
    iteration_numbers: np.ndarray
    converged: bool
    seconds: float
    field: np.ndarray
    message: str = ""

    def csv(self):
        rows = ["iter,resA,dt,cfl,driver"]
        for n, r, dt in zip(self.iteration_numbers, self.residues, self.dts):
            rows.append(f"{n},{r:.17g},{dt:.17g},{self.cfl:g},{self.driver}")
        return "\n".join(rows) + "\n"

    def summary(self, case):
        return (f"{case} {self.driver} {self.cfl:g} {self.iterations} "
                f"{self.seconds:.3f} {str(self.converged).lower()}")


def run_to_convergence(config, disc, U0=None, orderings=None, progress=None):
    """Iterate until ResA <= delta, divergence, or ``max_iters`` iterations.

    The fast-sweeping driver checks convergence after every directional
    sweep. Divergence (ResA above 1e6 or far above its running minimum,
    non-finite values, a non-physical state) ends the run with
    ``converged=False``.
    """
    delta = disc.case.delta if config.delta is None else config.delta
    U = disc.initial_field() if U0 is None else np.array(U0, dtype=float)
    W = disc.extend(U)
    m = disc.n_cells
    eps = disc._eps()
    per_step = UPDATES_PER_STEP[config.driver]
    residues, dts, numbers = [], [], []
    converged = False
    message = "max iterations reached"
    if config.driver == "fe_fast_sweep":
        if orderings is None:
            orderings = build_orderings(disc.mesh, config.ref_points)
        schedule = [np.ascontiguousarray(o, dtype=np.int64) for o in orderings.schedule()]
    t0 = time.perf_counter()
    it = 0
    step = 0
    lowest = np.inf
    try:
        while it < config.max_iters:
            prev = W[:m].copy()
            dt = disc.time_step(prev, config.cfl)
            if config.driver == "fe_fast_sweep":
                order = schedule[step % len(schedule)]
                pos = sweep_kernel(order, W, dt, disc.ops, disc.geo, disc.gamma_gas,
                                   disc.alpha_fixed, eps)
                if pos >= 0:
                    raise NonPhysicalStateError(
                        f"non-physical state at cell {int(order[pos])}, sweep position {pos}, "
                        f"iteration {it + 1}")
            elif config.driver == "fe_jacobi":
                W[:m] = prev + dt * disc.residual(W)
            else:
                W[:m] = step_rk3_jacobi(disc, prev, dt)
            step += 1
            it += per_step
            res = residue_resa(prev, W[:m], dt)
            residues.append(res)
            dts.append(dt)
            numbers.append(it)
            if progress is not None:
                progress(it, res, dt)
            lowest = min(lowest, res)
            if not np.isfinite(res) or res > DIVERGENCE_LIMIT:
                message = f"diverged: ResA={res:.3e} at iteration {it}"
                break
            if config.growth_limit is not None and res > config.growth_limit * lowest:
                message = (f"diverged: ResA={res:.3e} grew {config.growth_limit:g}x above "
                           f"its minimum {lowest:.3e} by iteration {it}")
                break
            if res <= delta:
                converged = True
                message = "converged"
                break
    except NonPhysicalStateError as exc:
        message = f"diverged: {exc}"
    seconds = time.perf_counter() - t0
    return IterationReport(config.driver, config.cfl, it, np.array(residues), np.array(dts),
                           np.array(numbers, dtype=np.int64), converged, seconds,
                           W[:m].copy(), message)
