"""WENO-Z nonlinear weights and the unequal-sized stencil reconstruction.

The big-stencil quartic is written as a convex-like blend with the four
linear polynomials; smooth data recovers the quartic, while a large
smoothness indicator switches weight onto the small stencils.
"""
from dataclasses import dataclass

import numpy as np
from numba import njit

from .stencil import monomial_exponents


@dataclass(frozen=True)
class WenoConfig:
    linear_weights: tuple = (0.96, 0.01, 0.01, 0.01, 0.01)
    eps: float = 1e-6

    def __post_init__(self):
        w = np.asarray(self.linear_weights, dtype=float)
        if w.shape != (5,) or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("linear weights must be 5 positive numbers summing to 1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


def smoothness_indicator(p, vertices):
    """Sum over 1 <= |alpha| <= degree of |T|^(|alpha|-1) * int_T (D^alpha p)^2.

    Derivatives are taken in physical coordinates and integrated with the
    degree-6 triangle rule, which is exact for quartic ``p``.
    """
    from .quadrature import triangle_quadrature

    verts = np.asarray(vertices, dtype=float)
    quad = triangle_quadrature(verts)
    a = verts[1] - verts[0]
    b = verts[2] - verts[0]
    area = 0.5 * abs(a[0] * b[1] - a[1] * b[0])
    xi = (quad.points[:, 0] - p.center[0]) / p.h
    eta = (quad.points[:, 1] - p.center[1]) / p.h
    exps = monomial_exponents(p.degree)
    coeffs = np.asarray(p.coeffs, dtype=float)
    beta = 0.0
    for order in range(1, p.degree + 1):
        for by in range(order + 1):
            ax = order - by
            d = np.zeros_like(xi)
            for c, (e1, e2) in zip(coeffs, exps):
                if e1 < ax or e2 < by:
                    continue
                fac = np.prod(np.arange(e1 - ax + 1, e1 + 1)) * np.prod(np.arange(e2 - by + 1, e2 + 1))
                d = d + c * fac * xi ** (e1 - ax) * eta ** (e2 - by)
            d = d / p.h ** order  # chain rule back to physical coordinates
            beta += area ** (order - 1) * area * np.dot(quad.weights, d * d)
    return float(beta)


def nonlinear_weights(cfg, beta, gamma=None):
    """WENO-Z weights; ``gamma`` defaults to ``cfg.linear_weights``.

    Entries of ``gamma`` equal to zero mark dropped stencils; they keep a zero
    weight and are left out of the global indicator difference.
    """
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(cfg.linear_weights if gamma is None else gamma, dtype=float)
    used = gamma[1:] > 0
    if used.any():
        tau = (np.abs(beta[0] - beta[1:])[used].sum() / used.sum()) ** 2
    else:
        tau = 0.0
    wbar = gamma * (1.0 + tau / (cfg.eps + beta))
    return wbar / wbar.sum()


def combine(values, omega, gamma):
    """omega_1 * (p_1/g_1 - sum g_m/g_1 p_m) + sum omega_m p_m over stacked values."""
    values = np.asarray(values, dtype=float)
    omega = np.asarray(omega, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    out = omega[0] / gamma[0] * values[0]
    for m in range(1, 5):
        if gamma[m] > 0:
            out = out + (omega[m] - omega[0] * gamma[m] / gamma[0]) * values[m]
    return out


def reconstruct_point(cfg, op, i, averages, point, vertices):
    """Reconstructed conservative state of cell ``i`` at ``point``.

    Reference path: builds the five polynomials explicitly and evaluates the
    indicators by quadrature, independent of the packed kernel arrays.
    ``averages`` is the (n_cells_total, 4) array including ghost cells.
    """
    averages = np.asarray(averages, dtype=float)
    polys = op.polynomials(i, averages)
    gamma = op.gamma[i]
    out = np.empty(averages.shape[1])
    for c in range(averages.shape[1]):
        beta = np.zeros(5)
        vals = np.zeros(5)
        for m, p in enumerate(polys):
            if p is None:
                continue
            pc = type(p)(p.degree, p.coeffs[:, c], p.center, p.h, p.cell)
            beta[m] = smoothness_indicator(pc, vertices)
            vals[m] = pc(np.asarray(point, dtype=float))
        w = nonlinear_weights(cfg, beta, gamma)
        out[c] = combine(vals, w, gamma)
    return out


# ---------------------------------------------------------------- kernel

@njit(cache=True)
def reconstruct_cell(c, U, idx, count, degree, beta_op, point_op, gamma, eps, q0, q1, out):
    """Reconstruct cell ``c`` at its Gauss points ``q0 <= q < q1``.

    Writes ``out[q - q0, comp]`` for the four conservative components.
    Returns nothing; every array argument is a packed operator field.
    """
    nq = q1 - q0
    ncomp = U.shape[1]
    vals = np.zeros((5, nq))
    beta = np.zeros(5)
    g0 = gamma[c, 0]
    for comp in range(ncomp):
        for m in range(5):
            n = count[c, m]
            beta[m] = 0.0
            for q in range(nq):
                vals[m, q] = 0.0
            if n == 0:
                continue
            b = 0.0
            d = degree[c, m]
            for r in range((d + 1) * (d + 2) // 2 - 1):
                s = 0.0
                for j in range(n):
                    s += beta_op[c, m, r, j] * U[idx[c, m, j], comp]
                b += s * s
            beta[m] = b
            for q in range(nq):
                s = 0.0
                for j in range(n):
                    s += point_op[c, m, q0 + q, j] * U[idx[c, m, j], comp]
                vals[m, q] = s
        tsum = 0.0
        nused = 0
        for m in range(1, 5):
            if gamma[c, m] > 0.0:
                tsum += abs(beta[0] - beta[m])
                nused += 1
        tau = 0.0
        if nused > 0:
            tau = (tsum / nused) ** 2
        wsum = 0.0
        w = np.zeros(5)
        for m in range(5):
            w[m] = gamma[c, m] * (1.0 + tau / (eps + beta[m]))
            wsum += w[m]
        for m in range(5):
            w[m] /= wsum
        for q in range(nq):
            v = w[0] / g0 * vals[0, q]
            for m in range(1, 5):
                if gamma[c, m] > 0.0:
                    v += (w[m] - w[0] * gamma[c, m] / g0) * vals[m, q]
            out[q, comp] = v
