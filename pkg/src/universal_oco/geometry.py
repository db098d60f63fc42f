"""Feasible sets, Euclidean and metric projections, and small vector helpers.

Decisions and gradients are plain 1-D ``numpy.float64`` arrays. Two convex
domains are supported, a Euclidean ball and an axis-aligned box; both have
closed-form Euclidean projections, which keeps every projection in the
library exact up to rounding.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, InvalidMetricError

Vector = np.ndarray


def as_vector(x) -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")


def dot(a, b) -> float:
    a, b = as_vector(a), as_vector(b)
    _check_same_dim(a, b)
    return float(a @ b)


def add(a, b) -> np.ndarray:
    a, b = as_vector(a), as_vector(b)
    _check_same_dim(a, b)
    return a + b


def sub(a, b) -> np.ndarray:
    a, b = as_vector(a), as_vector(b)
    _check_same_dim(a, b)
    return a - b


def scale(c: float, a) -> np.ndarray:
    return float(c) * as_vector(a)


class FeasibleSet:
    """A bounded convex domain with an exact Euclidean projection.

    Attributes:
        center: a point of the set, used to initialize every algorithm.
        diameter: Euclidean diameter of the set (the constant D).
        dim: ambient dimension.
    """

    center: np.ndarray
    diameter: float
    dim: int

    def project(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n points drawn uniformly from the set, shape (n, dim)."""
        raise NotImplementedError

    def max_dist(self, p: np.ndarray) -> float:
        """sup over x in the set of ||x - p||."""
        raise NotImplementedError

    def linear_range(self, a: np.ndarray) -> tuple[float, float]:
        """(min, max) of <a, x> over the set, in closed form."""
        raise NotImplementedError

    def _check_dim(self, p: np.ndarray) -> np.ndarray:
        p = as_vector(p)
        if p.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"point has dim {p.shape[0]}, set has dim {self.dim}"
            )
        return p


class Ball(FeasibleSet):
    """Euclidean ball {x : ||x - center|| <= radius}."""

    def __init__(self, center, radius: float):
        self.center = as_vector(center)
        self.radius = float(radius)
        if not (self.radius > 0):
            raise ValueError("radius must be positive")
        self.dim = self.center.shape[0]
        self.diameter = 2.0 * self.radius

    def project(self, p: np.ndarray) -> np.ndarray:
        p = self._check_dim(p)
        d = p - self.center
        nd = float(np.linalg.norm(d))
        if nd <= self.radius:
            return p.copy()
        s = self.radius / nd
        x = self.center + d * s
        # Shave ulps so the result is always a member; makes projection
        # bitwise idempotent.
        while float(np.linalg.norm(x - self.center)) > self.radius:
            s = np.nextafter(s, 0.0)
            x = self.center + d * s
        return x

    def contains(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        p = self._check_dim(p)
        return float(np.linalg.norm(p - self.center)) <= self.radius + tol

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        g = rng.standard_normal((n, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        u = rng.random(n) ** (1.0 / self.dim)
        return self.center + self.radius * g * u[:, None]

    def max_dist(self, p: np.ndarray) -> float:
        p = self._check_dim(p)
        return float(np.linalg.norm(p - self.center)) + self.radius

    def linear_range(self, a: np.ndarray) -> tuple[float, float]:
        a = self._check_dim(a)
        mid = float(a @ self.center)
        half = self.radius * float(np.linalg.norm(a))
        return mid - half, mid + half


class Box(FeasibleSet):
    """Axis-aligned box {x : lower <= x <= upper elementwise}."""

    def __init__(self, lower, upper):
        self.lower = as_vector(lower)
        self.upper = as_vector(upper)
        _check_same_dim(self.lower, self.upper)
        if not np.all(self.lower < self.upper):
            raise ValueError("box needs lower < upper elementwise")
        self.dim = self.lower.shape[0]
        self.center = 0.5 * (self.lower + self.upper)
        self.diameter = float(np.linalg.norm(self.upper - self.lower))

    def project(self, p: np.ndarray) -> np.ndarray:
        p = self._check_dim(p)
        return np.clip(p, self.lower, self.upper)

    def contains(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        p = self._check_dim(p)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random((n, self.dim))
        return self.lower + u * (self.upper - self.lower)

    def max_dist(self, p: np.ndarray) -> float:
        p = self._check_dim(p)
        far = np.maximum(np.abs(self.lower - p), np.abs(self.upper - p))
        return float(np.linalg.norm(far))

    def linear_range(self, a: np.ndarray) -> tuple[float, float]:
        a = self._check_dim(a)
        mid = float(a @ self.center)
        half = float(np.abs(a) @ (0.5 * (self.upper - self.lower)))
        return mid - half, mid + half


def project(fset: FeasibleSet, p) -> np.ndarray:
    """Euclidean projection of p onto the set (closed form)."""
    return fset.project(as_vector(p))


def _power_iteration_lambda_max(m: np.ndarray, iters: int = 100) -> float:
    v = np.ones(m.shape[0]) / np.sqrt(m.shape[0])
    for _ in range(iters):
        w = m @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
    return float(v @ (m @ v))


def generalized_project(
    fset: FeasibleSet,
    p,
    metric: np.ndarray,
    tol: float = 1e-10,
    max_iters: int = 10_000,
) -> np.ndarray:
    """argmin over x in the set of (x-p)^T M (x-p) for an SPD metric M.

    Solved by projected gradient descent with step 1/lambda_max(M)
    (lambda_max from 100 power-iteration steps); stops when successive
    iterates move less than ``tol`` or after ``max_iters`` steps. Points
    already inside the set are their own projection and returned directly.
    """
    p = fset._check_dim(as_vector(p))
    m = np.asarray(metric, dtype=np.float64)
    if m.shape != (fset.dim, fset.dim):
        raise DimensionMismatchError(
            f"metric has shape {m.shape}, expected {(fset.dim, fset.dim)}"
        )
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-10 * max(1.0, float(np.abs(m).max()))):
        raise InvalidMetricError("metric matrix is not symmetric")
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise InvalidMetricError("metric matrix is not positive definite") from exc
    if np.any(np.diag(chol) <= 0.0):
        raise InvalidMetricError("metric matrix is not positive definite")

    if fset.contains(p, tol=0.0):
        return p.copy()

    lam_max = _power_iteration_lambda_max(m)
    step = 1.0 / lam_max
    x = fset.project(p)
    for _ in range(max_iters):
        x_new = fset.project(x - step * (m @ (x - p)))
        moved = float(np.linalg.norm(x_new - x))
        x = x_new
        if moved < tol:
            break
    return x
