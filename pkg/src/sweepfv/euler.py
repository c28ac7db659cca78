"""Two-dimensional compressible Euler physics.

States are conservative 4-vectors ``(rho, rho*u, rho*v, E)``. The pointwise
kernels are numba-compiled so the solver loops can call them directly; the
plain-Python wrappers check admissibility and raise.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

GAMMA = 1.4


class NonPhysicalStateError(ValueError):
    pass


@dataclass(frozen=True)
class GasParams:
    gamma: float = GAMMA

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")


def primitive_to_conservative(prim, gamma=GAMMA):
    prim = np.asarray(prim, dtype=float)
    rho, u, v, p = prim[..., 0], prim[..., 1], prim[..., 2], prim[..., 3]
    e = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack([rho, rho * u, rho * v, e], axis=-1)


def conservative_to_primitive(cons, gamma=GAMMA):
    cons = np.asarray(cons, dtype=float)
    rho = cons[..., 0]
    u = cons[..., 1] / rho
    v = cons[..., 2] / rho
    p = (gamma - 1.0) * (cons[..., 3] - 0.5 * rho * (u * u + v * v))
    return np.stack([rho, u, v, p], axis=-1)


def pressure(cons, gamma=GAMMA):
    cons = np.asarray(cons, dtype=float)
    return (gamma - 1.0) * (cons[..., 3] - 0.5 * (cons[..., 1] ** 2 + cons[..., 2] ** 2) / cons[..., 0])


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def state_pressure(u, gamma):
    return (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])


@njit(cache=True)
def is_physical(u, gamma):
    return u[0] > 0.0 and state_pressure(u, gamma) > 0.0


@njit(cache=True)
def normal_flux_into(u, nx, ny, gamma, out):
    rho = u[0]
    vx = u[1] / rho
    vy = u[2] / rho
    p = (gamma - 1.0) * (u[3] - 0.5 * rho * (vx * vx + vy * vy))
    vn = vx * nx + vy * ny
    out[0] = rho * vn
    out[1] = u[1] * vn + p * nx
    out[2] = u[2] * vn + p * ny
    out[3] = (u[3] + p) * vn


@njit(cache=True)
def wave_speed(u, nx, ny, gamma):
    rho = u[0]
    vx = u[1] / rho
    vy = u[2] / rho
    p = (gamma - 1.0) * (u[3] - 0.5 * rho * (vx * vx + vy * vy))
    return abs(vx * nx + vy * ny) + np.sqrt(gamma * p / rho)


@njit(cache=True)
def lax_friedrichs_into(ul, ur, nx, ny, gamma, alpha_fixed, out, work):
    """Lax-Friedrichs flux from the interior state ``ul`` to ``ur``.

    ``alpha_fixed > 0`` replaces the local wave-speed bound.
    """
    normal_flux_into(ul, nx, ny, gamma, out)
    normal_flux_into(ur, nx, ny, gamma, work)
    if alpha_fixed > 0.0:
        alpha = alpha_fixed
    else:
        alpha = max(wave_speed(ul, nx, ny, gamma), wave_speed(ur, nx, ny, gamma))
    for c in range(4):
        out[c] = 0.5 * ((work[c] + out[c]) - alpha * (ur[c] - ul[c]))


# ---------------------------------------------------------------- public API

def _checked(state, gamma):
    u = np.ascontiguousarray(state, dtype=float)
    if u.shape != (4,):
        raise ValueError("state must be a conservative 4-vector")
    if not is_physical(u, gamma):
        raise NonPhysicalStateError(f"non-physical state {u.tolist()}")
    return u


def flux(state, params=GasParams()):
    """Physical fluxes ``(f, g)`` of a conservative state."""
    u = _checked(state, params.gamma)
    f = np.empty(4)
    g = np.empty(4)
    normal_flux_into(u, 1.0, 0.0, params.gamma, f)
    normal_flux_into(u, 0.0, 1.0, params.gamma, g)
    return f, g


def normal_flux(state, n, params=GasParams()):
    u = _checked(state, params.gamma)
    out = np.empty(4)
    normal_flux_into(u, float(n[0]), float(n[1]), params.gamma, out)
    return out


def max_wave_speed(state, n, params=GasParams()):
    u = _checked(state, params.gamma)
    return float(wave_speed(u, float(n[0]), float(n[1]), params.gamma))


def lax_friedrichs(ul, ur, n, params=GasParams(), alpha=None):
    a = _checked(ul, params.gamma)
    b = _checked(ur, params.gamma)
    out = np.empty(4)
    lax_friedrichs_into(a, b, float(n[0]), float(n[1]), params.gamma,
                        0.0 if alpha is None else float(alpha), out, np.empty(4))
    return out


# ---------------------------------------------------------------- boundaries

@dataclass(frozen=True)
class BoundaryRule:
    """How the exterior state at a boundary Gauss point is formed.

    ``kind`` is one of ``dirichlet`` (fixed primitive ``state``), ``wall``,
    ``outflow`` or ``exact`` (exact solution at the point).
    """

    kind: str
    state: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("dirichlet", "wall", "outflow", "exact"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet" and self.state is None:
            raise ValueError("dirichlet rule needs a primitive state")


def reflect(u, n):
    """Mirror the velocity of conservative state(s) ``u`` across normal ``n``."""
    u = np.array(u, dtype=float)
    n = np.asarray(n, dtype=float)
    mn = u[..., 1] * n[..., 0] + u[..., 2] * n[..., 1]
    u[..., 1] -= 2.0 * mn * n[..., 0]
    u[..., 2] -= 2.0 * mn * n[..., 1]
    return u


def boundary_state(rule, interior, n, point, exact=None, params=GasParams()):
    """Exterior conservative state at a boundary point."""
    if rule is None:
        raise KeyError("no boundary rule for this tag")
    if rule.kind == "dirichlet":
        return primitive_to_conservative(rule.state, params.gamma)
    if rule.kind == "outflow":
        return np.array(interior, dtype=float)
    if rule.kind == "wall":
        return reflect(interior, n)
    if exact is None:
        raise ValueError("exact boundary needs an exact-solution function")
    return np.asarray(exact(np.asarray(point[0]), np.asarray(point[1])), dtype=float)


# ---------------------------------------------------------------- cases

@dataclass(frozen=True)
class Case:
    """A steady problem: boundary rules, optional exact solution and source."""

    name: str
    rules: dict
    initial: Callable  # (x, y) -> conservative states
    exact: Optional[Callable] = None
    source: Optional[Callable] = None
    delta: float = 1e-12
    mesh_file: str = "square_58.mesh"
    gamma: float = GAMMA
    extra: dict = field(default_factory=dict)


def _euler_source_exact(x, y):
    s = 1.0 + 0.2 * np.sin(x + y)
    one = np.ones_like(s)
    return primitive_to_conservative(np.stack([s, one, one, s], axis=-1))


def _euler_source_rhs(x, y):
    c = np.cos(x + y)
    return np.stack([0.4 * c, 0.6 * c, 0.6 * c, 1.8 * c], axis=-1)


def _euler_nosource_exact(x, y):
    s = 1.0 + 0.2 * np.sin(x - y)
    one = np.ones_like(s)
    return primitive_to_conservative(np.stack([s, one, one, one], axis=-1))


SHOCK_LEFT = (1.0, 2.9, 0.0, 5.0 / 7.0)
SHOCK_TOP = (1.69997, 2.61934, -0.50632, 1.52819)


def uniform(prim):
    state = primitive_to_conservative(prim)

    def f(x, y):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(state, x.shape + (4,)).copy()
    return f


_EXACT_RULES = {tag: BoundaryRule("exact") for tag in
                ("DIRICHLET_LEFT", "DIRICHLET_TOP", "WALL", "OUTFLOW", "EXACT")}

CASES = {}


def register_case(case):
    CASES[case.name] = case
    return case


register_case(Case("euler_source", _EXACT_RULES, _euler_source_exact,
                   exact=_euler_source_exact, source=_euler_source_rhs))
register_case(Case("euler_nosource", _EXACT_RULES, _euler_nosource_exact,
                   exact=_euler_nosource_exact))
register_case(Case(
    "shock_reflection",
    {"DIRICHLET_LEFT": BoundaryRule("dirichlet", SHOCK_LEFT),
     "DIRICHLET_TOP": BoundaryRule("dirichlet", SHOCK_TOP),
     "WALL": BoundaryRule("wall"),
     "OUTFLOW": BoundaryRule("outflow")},
    uniform(SHOCK_LEFT), delta=1e-11, mesh_file="shock_reflection.mesh"))
register_case(Case("uniform_flow", _EXACT_RULES, uniform(SHOCK_LEFT),
                   exact=uniform(SHOCK_LEFT)))
register_case(Case(
    "freestream",
    {"DIRICHLET_LEFT": BoundaryRule("dirichlet", SHOCK_LEFT),
     "DIRICHLET_TOP": BoundaryRule("dirichlet", SHOCK_LEFT),
     "WALL": BoundaryRule("wall"),
     "OUTFLOW": BoundaryRule("outflow")},
    uniform(SHOCK_LEFT), delta=1e-12, mesh_file="shock_reflection.mesh"))


def get_case(name):
    try:
        return CASES[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; known: {sorted(CASES)}") from None


def exact_solution(case_id, point):
    case = get_case(case_id)
    if case.exact is None:
        raise ValueError(f"case {case_id!r} has no exact solution")
    p = np.asarray(point, dtype=float)
    return case.exact(p[..., 0], p[..., 1])


def source_average(mesh, i, case_id):
    case = get_case(case_id)
    if case.source is None:
        return np.zeros(4)
    return mesh.cell_average(case.source, cells=np.array([i]))[0]


def source_averages(mesh, case):
    if case.source is None:
        return np.zeros((mesh.n_cells, 4))
    return mesh.cell_average(case.source)
