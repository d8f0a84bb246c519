"""Locally c-optimal designs on the stress region [0, 1]."""
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .criterion import build_criterion
from .design import Design, two_point
from .gamma_model import intensity

PRUNE = 1e-8


@dataclass(frozen=True)
class MultiplicativeResult:
    design: Design
    converged: bool
    iterations: int
    criterion: float
    history: np.ndarray  # design-dependent criterion part, one entry per iteration


@dataclass(frozen=True)
class Certificate:
    max_excess: float
    argmax: float
    passed: bool


def stress_grid(grid_step):
    n = round(1.0 / grid_step)
    if n < 1 or abs(n * grid_step - 1.0) > 1e-9:
        raise ValueError(f"grid_step={grid_step} must divide 1 evenly")
    return np.linspace(0.0, 1.0, n + 1)


def multiplicative_optimize(scenario, grid_step=0.01, max_iter=20_000, tol=1e-6,
                            power=0.5, criterion=None):
    """Multiplicative weight iteration for the (compound) c-criterion.

    Starting from uniform weights on the grid, each step sets
    ``w_i <- w_i (d_i / Φ)^power`` and renormalizes, where ``d_i`` is the
    sensitivity at grid point ``x_i`` and ``Φ = Σ_j w_j d_j`` the current
    criterion.  Points whose weight drops below 1e-8 are removed.  Stops when
    ``max |d_i / Φ - 1| <= tol`` over the remaining support.
    """
    crit = build_criterion(scenario) if criterion is None else criterion
    xs = stress_grid(grid_step)
    F = np.column_stack([np.ones_like(xs), xs])
    scales = crit.block_scales(xs)
    coefs = np.asarray(crit.coefs)
    c = crit.c

    w = np.full(xs.size, 1.0 / xs.size)
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        d = np.zeros_like(xs)
        phi = 0.0
        for a, lam in zip(coefs, scales):
            M = (F * (w * lam)[:, None]).T @ F
            u = np.linalg.solve(M, c)
            phi += a * (c @ u)
            d += a * lam * (F @ u) ** 2
        history.append(phi)
        ratio = d / phi
        support = w > 0
        if np.max(np.abs(ratio[support] - 1.0)) <= tol:
            converged = True
            break
        w = w * ratio ** power
        w /= w.sum()
        w[w < PRUNE] = 0.0
        w /= w.sum()

    keep = w > 0
    design = Design(tuple(xs[keep]), tuple(w[keep] / w[keep].sum()))
    return MultiplicativeResult(design, converged, it, crit.value(design), np.array(history))


def elfving_weight(params, schedule, x_u):
    """Closed-form c-optimal weight at x = 0 for the two-point design on {0, 1}."""
    if not x_u < 0:
        raise ValueError(f"x_u must be negative, got {x_u!r}")
    a = (1.0 + abs(x_u)) * math.sqrt(intensity(params.beta0 + params.beta1, schedule))
    b = abs(x_u) * math.sqrt(intensity(params.beta0, schedule))
    return a / (a + b)


def two_point_search(scenario, weight_step=0.01, criterion=None):
    """Best design {0: w, 1: 1-w}: grid scan over w, then golden-section refinement."""
    crit = build_criterion(scenario) if criterion is None else criterion

    def f(w):
        return crit.compound(two_point(w))

    grid = np.arange(1, round(1.0 / weight_step)) * weight_step
    vals = np.array([f(w) for w in grid])
    i = int(np.argmin(vals))
    lo = grid[i - 1] if i > 0 else grid[i] * 1e-3
    hi = grid[i + 1] if i + 1 < grid.size else 1.0 - (1.0 - grid[i]) * 1e-3
    res = optimize.minimize_scalar(f, bracket=(lo, grid[i], hi), method="golden",
                                   options={"xtol": 1e-9})
    w = float(res.x) if res.fun <= vals[i] else float(grid[i])
    return two_point(w)


def optimality_certificate(scenario, design, grid_step=0.01, tol=1e-4, criterion=None):
    """Check the c-optimality equivalence condition on a stress grid.

    Reports ``max_x d(x) / Φ(ξ) - 1``; the design is certified when this
    excess does not exceed ``tol``.
    """
    crit = build_criterion(scenario) if criterion is None else criterion
    comp = crit.compound(design)
    if not np.isfinite(comp):
        return Certificate(np.inf, float("nan"), False)
    xs = stress_grid(grid_step)
    excess = crit.sensitivity(design, xs) / comp - 1.0
    j = int(np.argmax(excess))
    return Certificate(float(excess[j]), float(xs[j]), bool(excess[j] <= tol))
