"""Kantorovich distance H and its bounded variant MH between discrete measures.

H is solved as the primal transportation problem with Euclidean cost.  MH
(sup over 1-Lipschitz f with |f| <= 1) is the same problem with the truncated
cost min(d, 2): a function is 1-Lipschitz for min(d, 2) exactly when it is
1-Lipschitz for d and has oscillation at most 2, and shifting it into [-1, 1]
does not change the objective between two probability measures.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError, DomainError
from .measures import MASS_TOL, DiscreteMeasure

LIP_TOL = 1e-12
MAX_PIVOTS = 200_000


@dataclass
class LipPotential:
    """Values of a function on ``points``, pinned to zero at ``base_point_index``."""

    values: np.ndarray
    points: np.ndarray
    base_point_index: int = 0


@dataclass
class TransportResult:
    metric: str
    value: float
    iterations: int
    potential: LipPotential
    flow: np.ndarray
    dual_feasible: bool

    def to_json(self):
        return {
            "metric": self.metric,
            "value": self.value,
            "iterations": self.iterations,
            "dual_feasible": self.dual_feasible,
        }


def _check(mu: DiscreteMeasure, nu: DiscreteMeasure):
    for m in (mu, nu):
        if abs(float(m.weights.sum()) - 1.0) > MASS_TOL or np.any(m.weights < 0):
            raise DomainError("inputs must be probability vectors")
    if mu.dimension != nu.dimension:
        raise DomainError("measures live in spaces of different dimension")


def pairwise_distance(x, y):
    if x.shape[1] == 1:
        return np.abs(x[:, 0][:, None] - y[:, 0][None, :])
    diff = x[:, None, :] - y[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _key(m):
    return (len(m), m.atoms.tobytes(), m.weights.tobytes())


def _solve(mu, nu, cap, metric):
    _check(mu, nu)
    if _key(nu) < _key(mu):
        # solve in a canonical order so that swapping the arguments is exact
        res = _solve_ordered(nu.sorted(), mu.sorted(), cap, metric)
        n = len(nu)
        phi = -np.concatenate([res.potential.values[n:], res.potential.values[:n]])
        pts = np.concatenate([res.potential.points[n:], res.potential.points[:n]], axis=0)
        phi = phi - phi[0] if cap is None else phi
        res.potential = LipPotential(phi, pts, 0)
        res.flow = res.flow.T.copy()
        return res
    return _solve_ordered(mu.sorted(), nu.sorted(), cap, metric)


def _solve_ordered(mu_s, nu_s, cap, metric):
    # sorted inputs put 1-D problems in monotone order, where the north-west
    # corner start is already optimal
    x, y = mu_s.atoms, nu_s.atoms
    cost = pairwise_distance(x, y)
    if cap is not None:
        cost = np.minimum(cost, cap)
    eps = 1e-13 * max(1.0, float(cost.max()))
    flow, u, v, iters, optimal = _kernels.transport_simplex(
        mu_s.weights.copy(), nu_s.weights.copy(), np.ascontiguousarray(cost), eps, MAX_PIVOTS
    )
    if not optimal:
        raise ConvergenceError(f"transport simplex stopped after {iters} pivots")
    value = max(float(np.sum(flow * cost)), 0.0)
    pts = np.concatenate([x, y], axis=0)
    # c-transform of the column potential: min_j (c(z, y_j) - v_j)
    cz = pairwise_distance(pts, y)
    if cap is not None:
        cz = np.minimum(cz, cap)
    phi = (cz - v[None, :]).min(axis=1)
    if cap is not None:
        phi -= 0.5 * (phi.max() + phi.min())
    phi -= phi[0] if cap is None else 0.0
    pot = LipPotential(phi, pts, 0)
    feasible = lip_check(pot, pts, cap=cap)
    return TransportResult(metric, value, int(iters), pot, flow, bool(feasible))


def solve_h(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportResult:
    return _solve(mu, nu, None, "H")


def solve_mh(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportResult:
    return _solve(mu, nu, 2.0, "MH")


def kantorovich_h(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    return solve_h(mu, nu).value


def modified_kantorovich(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    return solve_mh(mu, nu).value


def kantorovich_h_cdf_oracle(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Integral of |F_mu - F_nu| over the line, summed over sorted breakpoints."""
    if mu.dimension != 1 or nu.dimension != 1:
        raise DomainError("the CDF formula needs measures on the line")
    pts = np.concatenate([mu.atoms[:, 0], nu.atoms[:, 0]])
    signed = np.concatenate([mu.weights, -nu.weights])
    order = np.argsort(pts, kind="stable")
    pts, signed = pts[order], signed[order]
    gap = np.cumsum(signed)[:-1]
    return float(np.sum(np.abs(gap) * np.diff(pts)))


def lip_check(f, points=None, cap=None, tol=LIP_TOL) -> bool:
    """True when |f_i - f_j| <= d_ij (+ tol) for every pair of points."""
    if isinstance(f, LipPotential):
        vals = np.asarray(f.values, dtype=float)
        pts = f.points if points is None else points
    else:
        vals = np.asarray(f, dtype=float)
        pts = points
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if vals.shape[0] != pts.shape[0]:
        raise DomainError("one value per point is required")
    d = pairwise_distance(pts, pts)
    if cap is not None:
        d = np.minimum(d, cap)
    ok = bool(np.all(np.abs(vals[:, None] - vals[None, :]) <= d + tol))
    if cap is not None:
        ok = ok and bool(np.all(np.abs(vals) <= cap / 2 + tol))
    return ok
