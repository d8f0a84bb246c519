"""Asymptotic variance of the estimated failure-time quantile as a design criterion.

Every model family reduces to a weighted sum of c-criteria with the common
direction ``c = (1, x_u)`` and a per-block information scale ``λ_l(x)``:

    Φ(ξ) = prefactor · (Σ_l a_l cᵀ M_l(ξ)⁻¹ c + constant),
    M_l(ξ) = Σ_i w_i λ_l(x_i) (1, x_i)ᵀ(1, x_i).

For a gamma block λ_l is the intensity at the linear predictor; for the LMEM
block λ_l ≡ 1 because the time part of the Kronecker information factors out
into the weight a_2.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .failure_time import Family, gradient_constants
from .gamma_model import intensity

COND_WARN = 1e12


class NonEstimableWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class CompoundCriterion:
    """c-criterion blocks of one scenario, with the nominal constants frozen."""

    x_u: float
    coefs: tuple
    gammas: tuple  # GammaComponentParams per block, None for the linear block
    schedule: object
    prefactor: float = 1.0
    constant: float = 0.0

    @property
    def c(self):
        return np.array([1.0, self.x_u])

    def block_scales(self, x):
        """λ_l(x) for every block, shape (n_blocks, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        rows = []
        for g in self.gammas:
            if g is None:
                rows.append(np.ones_like(x))
            else:
                rows.append(intensity(g.beta0 + g.beta1 * x, self.schedule))
        return np.array(rows)

    def informations(self, design):
        """2×2 information matrix of each block."""
        x, w = design.x, design.w
        F = np.column_stack([np.ones_like(x), x])
        return [(F * (w * lam)[:, None]).T @ F for lam in self.block_scales(x)]

    def block_values(self, design):
        return np.array([c_quadratic(M, self.c) for M in self.informations(design)])

    def compound(self, design):
        """Σ a_l cᵀ M_l⁻¹ c, the design-dependent part."""
        vals = self.block_values(design)
        if not np.all(np.isfinite(vals)):
            return np.inf
        return float(np.dot(self.coefs, vals))

    def value(self, design):
        comp = self.compound(design)
        if not np.isfinite(comp):
            return np.inf
        return self.prefactor * (comp + self.constant)

    def sensitivity(self, design, x):
        """d(x) = Σ a_l λ_l(x) (fᵀ M_l⁻¹ c)², with f = (1, x).

        At a c-optimal design d(x) ≤ Σ a_l cᵀ M_l⁻¹ c on the whole region,
        with equality on the support.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        F = np.column_stack([np.ones_like(x), x])
        out = np.zeros_like(x)
        for a, M, lam in zip(self.coefs, self.informations(design), self.block_scales(x)):
            u = np.linalg.solve(M, self.c)
            out += a * lam * (F @ u) ** 2
        return out


def c_quadratic(M, c):
    """cᵀ M⁻ c for a symmetric PSD 2×2 ``M``; +inf if c is outside the range of M."""
    a, b, d = M[0, 0], M[0, 1], M[1, 1]
    tr = a + d
    if not tr > 0:
        return np.inf
    det = a * d - b * b
    if det <= 1e-14 * tr * tr:
        # rank one: estimable only if c is parallel to the range direction
        vals, vecs = np.linalg.eigh(M)
        if abs(vecs[:, 0] @ c) > 1e-10 * np.linalg.norm(c):
            return np.inf
        return float((vecs[:, 1] @ c) ** 2 / vals[1])
    if tr * tr / det > COND_WARN:
        warnings.warn(f"ill-conditioned information matrix (cond ~ {tr * tr / det:.2e})",
                      NonEstimableWarning, stacklevel=3)
    return float((d * c[0] ** 2 - 2.0 * b * c[0] * c[1] + a * c[1] ** 2) / det)


def build_criterion(scenario, absolute=False, constants=None):
    """Compile the criterion for ``scenario`` at its nominal parameters.

    With ``absolute=False`` the family conventions are: the gamma family uses
    the bare direction ``(1, x_u)``; gamma+gamma drops the common factor
    ``f_T(t_alpha)^-2``; gamma+lmem keeps it together with the variance
    constant.  ``absolute=True`` always returns the full delta-method
    asymptotic variance of the quantile estimator per unit.
    """
    fam = scenario.family
    gc = gradient_constants(scenario) if constants is None else constants
    dens2 = gc.density ** -2
    if fam is Family.GAMMA:
        gammas = (scenario.gamma1,)
        coefs = (gc.c1 ** 2,) if absolute else (1.0,)
        pref = dens2 if absolute else 1.0
        const = 0.0
    elif fam is Family.GAMMA_GAMMA:
        gammas = (scenario.gamma1, scenario.gamma2)
        coefs = (gc.c1 ** 2, gc.c2 ** 2)
        pref = dens2 if absolute else 1.0
        const = 0.0
    else:
        gammas = (scenario.gamma1, None)
        coefs = (gc.c1 ** 2, gc.c2 ** 2)
        pref = dens2
        const = gc.c_var_sq
    return CompoundCriterion(scenario.x_u, coefs, gammas, scenario.schedule, pref, const)


def avar(scenario, design, criterion=None):
    """Family-dispatched asymptotic-variance criterion (+inf if not estimable)."""
    crit = build_criterion(scenario) if criterion is None else criterion
    return crit.value(design)


def absolute_avar(scenario, design):
    """Per-unit asymptotic variance of the quantile estimator: n·Var(t̂_alpha)."""
    return build_criterion(scenario, absolute=True).value(design)


def efficiency(scenario, design, optimal, criterion=None):
    """aVar(optimal) / aVar(design); 0 for a non-estimable design."""
    crit = build_criterion(scenario) if criterion is None else criterion
    v = crit.value(design)
    if not np.isfinite(v):
        return 0.0
    return crit.value(optimal) / v
