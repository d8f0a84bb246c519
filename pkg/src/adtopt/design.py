"""Approximate designs on the standardized stress region [0, 1]."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Design:
    """Finite set of stress levels with positive weights summing to one."""

    points: tuple
    weights: tuple

    def __post_init__(self):
        points = tuple(float(x) for x in np.atleast_1d(self.points))
        weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        if len(points) == 0 or len(points) != len(weights):
            raise ValueError("points and weights must be non-empty and of equal length")
        if len(set(points)) != len(points):
            raise ValueError("support points must be distinct; use Design.merged")
        if any(not 0.0 <= x <= 1.0 for x in points):
            raise ValueError(f"support points must lie in [0, 1], got {points}")
        if any(not w > 0.0 for w in weights):
            raise ValueError(f"weights must be positive, got {weights}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(weights)!r}")

    @classmethod
    def merged(cls, points, weights):
        """Build a design, summing weights of repeated points and renormalizing."""
        acc = {}
        for x, w in zip(np.atleast_1d(points), np.atleast_1d(weights)):
            acc[float(x)] = acc.get(float(x), 0.0) + float(w)
        xs = sorted(acc)
        ws = np.array([acc[x] for x in xs])
        return cls(tuple(xs), tuple(ws / ws.sum()))

    @property
    def x(self):
        return np.asarray(self.points)

    @property
    def w(self):
        return np.asarray(self.weights)

    def __len__(self):
        return len(self.points)

    def weight_at(self, x, atol=1e-12):
        """Weight at stress level ``x`` (0 if ``x`` is not a support point)."""
        for p, w in zip(self.points, self.weights):
            if abs(p - x) <= atol:
                return w
        return 0.0

    def apportion(self, n):
        """Integer unit counts for ``n`` units by largest-remainder rounding."""
        if n < 1:
            raise ValueError("n must be a positive integer")
        quotas = self.w * n
        counts = np.floor(quotas).astype(int)
        remainder = n - counts.sum()
        # ties broken by position, which keeps the result deterministic
        order = np.argsort(-(quotas - counts), kind="stable")
        counts[order[:remainder]] += 1
        return counts


def two_point(w):
    """Design with weight ``w`` at x = 0 and ``1 - w`` at x = 1."""
    return Design((0.0, 1.0), (w, 1.0 - w))


def uniform(m):
    """Uniform design on ``m`` equidistant points covering [0, 1]."""
    if m < 1:
        raise ValueError("m must be positive")
    if m == 1:
        return Design((0.0,), (1.0,))
    return Design(tuple(np.linspace(0.0, 1.0, m)), tuple(np.full(m, 1.0 / m)))
