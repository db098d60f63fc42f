"""Loss oracles with curvature metadata and seeded synthetic streams.

Three loss families are generated, one per function class:

* quadratics ``0.5 * lam * ||x - c_t||^2`` for the strongly convex class,
* squared linear losses ``0.5 * (<a_t, x> - y_t)^2`` for the exp-concave
  class (coefficients scaled so the requested concavity modulus holds on
  the whole domain),
* Huber-smoothed absolute deviations for the general convex class.

Every oracle knows its own curvature constants, is nonnegative, smooth,
and respects the configured gradient bound G over the feasible set by
construction; generation fails loudly otherwise. Oracle callables accept
a single point of shape ``(d,)`` or a batch of shape ``(n, d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .errors import AssumptionViolationError, ConfigError, ParameterRangeError
from .geometry import FeasibleSet


@dataclass(frozen=True)
class ClassTags:
    """Curvature metadata attached to a loss oracle.

    ``None`` means the property is not advertised; advertised constants are
    truthful (witness inequalities hold for them on the whole domain).
    """

    strongly_convex: float | None = None
    exp_concave: float | None = None
    smooth: float | None = None
    nonnegative: bool = False


@dataclass(frozen=True)
class LossOracle:
    value: Callable[[np.ndarray], float | np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    tags: ClassTags


def quadratic_oracle(lam: float, center, offset: float = 0.0) -> LossOracle:
    """f(x) = 0.5 * lam * ||x - center||^2 + offset."""
    c = np.asarray(center, dtype=np.float64)
    lam = float(lam)
    if offset < 0:
        raise ValueError("offset must be nonnegative")

    def value(x):
        d = np.asarray(x, dtype=np.float64) - c
        v = 0.5 * lam * np.sum(d * d, axis=-1) + offset
        return float(v) if np.ndim(v) == 0 else v

    def gradient(x):
        return lam * (np.asarray(x, dtype=np.float64) - c)

    tags = ClassTags(strongly_convex=lam, smooth=lam, nonnegative=True)
    return LossOracle(value, gradient, tags)


def squared_linear_oracle(a, y: float, alpha: float | None = None) -> LossOracle:
    """f(x) = 0.5 * (<a, x> - y)^2, tagged alpha-exp-concave if alpha given."""
    a = np.asarray(a, dtype=np.float64)
    y = float(y)

    def value(x):
        r = np.asarray(x, dtype=np.float64) @ a - y
        v = 0.5 * r * r
        return float(v) if np.ndim(v) == 0 else v

    def gradient(x):
        r = np.asarray(x, dtype=np.float64) @ a - y
        if np.ndim(r) == 0:
            return r * a
        return r[..., None] * a

    tags = ClassTags(exp_concave=alpha, smooth=float(a @ a), nonnegative=True)
    return LossOracle(value, gradient, tags)


def huber_oracle(a, y: float, delta: float = 1.0) -> LossOracle:
    """Huber loss of the residual <a, x> - y with transition width delta."""
    a = np.asarray(a, dtype=np.float64)
    y = float(y)
    delta = float(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")

    def value(x):
        r = np.asarray(x, dtype=np.float64) @ a - y
        ar = np.abs(r)
        v = np.where(ar <= delta, 0.5 * r * r, delta * ar - 0.5 * delta * delta)
        return float(v) if np.ndim(v) == 0 else v

    def gradient(x):
        r = np.asarray(x, dtype=np.float64) @ a - y
        w = np.clip(r, -delta, delta)
        if np.ndim(w) == 0:
            return w * a
        return w[..., None] * a

    tags = ClassTags(smooth=float(a @ a) / delta, nonnegative=True)
    return LossOracle(value, gradient, tags)


@dataclass(frozen=True)
class StreamConfig:
    """Configuration of one synthetic loss stream.

    ``true_parameter`` is the strong-convexity modulus lambda or the
    exp-concavity modulus alpha; it is ignored for the general convex class.
    ``realizable`` (convex class only) pins every round's target to one
    fixed interior point so the best comparator has zero cumulative loss.
    """

    cls: str  # "strong" | "expconcave" | "convex"
    dim: int
    horizon_T: int
    seed: int
    true_parameter: float
    grad_bound_G: float
    huber_delta: float = 1.0
    realizable: bool = False
    target_noise: float = 0.5

    def __post_init__(self):
        if self.cls not in ("strong", "expconcave", "convex"):
            raise ConfigError(f"unknown stream class {self.cls!r}")
        if self.horizon_T < 1:
            raise ConfigError("horizon must be >= 1")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if not (self.grad_bound_G > 0):
            raise ConfigError("grad_bound_G must be positive")
        if self.huber_delta <= 0:
            raise ConfigError("huber_delta must be positive")


@dataclass
class SyntheticStream:
    """A materialized loss sequence plus closed-form batch helpers."""

    config: StreamConfig
    fset: FeasibleSet
    family: str  # "quadratic" | "squared_linear" | "huber"
    oracles: list[LossOracle]
    params: dict = field(default_factory=dict)
    smoothness: np.ndarray = None  # per-round H_t
    grad_sup: np.ndarray = None  # exact sup of ||grad f_t|| over the set

    def __len__(self) -> int:
        return len(self.oracles)

    def __getitem__(self, t: int) -> LossOracle:
        return self.oracles[t]

    def __iter__(self) -> Iterator[LossOracle]:
        return iter(self.oracles)

    def smoothness_sum(self) -> float:
        return float(np.sum(self.smoothness))

    def per_round_values(self, x: np.ndarray) -> np.ndarray:
        """f_t(x) for all rounds at a fixed point, vectorized over t."""
        x = np.asarray(x, dtype=np.float64)
        if self.family == "quadratic":
            d = x[None, :] - self.params["centers"]
            return 0.5 * self.params["lam"] * np.sum(d * d, axis=1)
        r = self.params["coeffs"] @ x - self.params["targets"]
        if self.family == "squared_linear":
            return 0.5 * r * r
        delta = self.params["delta"]
        ar = np.abs(r)
        return np.where(ar <= delta, 0.5 * r * r, delta * ar - 0.5 * delta * delta)

    def total_value(self, x: np.ndarray) -> float:
        return float(np.sum(self.per_round_values(x)))

    def total_gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient of sum_t f_t at x, vectorized over t."""
        x = np.asarray(x, dtype=np.float64)
        if self.family == "quadratic":
            lam = self.params["lam"]
            t = len(self)
            return lam * t * x - lam * self.params["center_sum"]
        a = self.params["coeffs"]
        r = a @ x - self.params["targets"]
        if self.family == "huber":
            r = np.clip(r, -self.params["delta"], self.params["delta"])
        return a.T @ r

    def vt_terms(self) -> np.ndarray:
        """Per-round terms of the gradient variation sum_t sup_x
        ||grad f_t(x) - grad f_{t-1}(x)||^2, with grad f_0 taken as zero.

        Exact for quadratics; a closed-form upper bound (coefficient
        differences times domain extremes) for the linear-composite
        families.
        """
        t_total = len(self)
        terms = np.empty(t_total)
        terms[0] = self.grad_sup[0] ** 2
        if self.family == "quadratic":
            lam = self.params["lam"]
            dc = np.diff(self.params["centers"], axis=0)
            terms[1:] = lam**2 * np.sum(dc * dc, axis=1)
            return terms
        coeffs = self.params["coeffs"]
        targets = self.params["targets"]
        if self.family == "squared_linear":
            # grad f_t - grad f_s is affine in x: (a_t a_t' - a_s a_s') x - v.
            for t in range(1, t_total):
                at, as_ = coeffs[t], coeffs[t - 1]
                m = np.outer(at, at) - np.outer(as_, as_)
                v = targets[t] * at - targets[t - 1] * as_
                mid = m @ self.fset.center - v
                sig = float(np.linalg.norm(m, ord=2))
                reach = self.fset.max_dist(self.fset.center)
                terms[t] = (float(np.linalg.norm(mid)) + sig * reach) ** 2
            return terms
        delta = self.params["delta"]
        for t in range(1, t_total):
            at, as_ = coeffs[t], coeffs[t - 1]
            da = at - as_
            lo, hi = self.fset.linear_range(da)
            dy = targets[t] - targets[t - 1]
            resid_gap = max(abs(lo - dy), abs(hi - dy))
            slope_gap = min(2.0 * delta, resid_gap)
            lo_s, hi_s = self.fset.linear_range(as_)
            prev_resid = max(abs(lo_s - targets[t - 1]), abs(hi_s - targets[t - 1]))
            prev_slope = min(delta, prev_resid)
            bound = slope_gap * float(np.linalg.norm(at)) + prev_slope * float(
                np.linalg.norm(da)
            )
            terms[t] = bound**2
        return terms


def _interior_points(fset: FeasibleSet, rng: np.random.Generator, n: int,
                     shrink: float = 0.9) -> np.ndarray:
    pts = fset.sample(rng, n)
    return fset.center + shrink * (pts - fset.center)


def gen_strongly_convex_stream(cfg: StreamConfig, fset: FeasibleSet) -> SyntheticStream:
    """Quadratic stream: f_t(x) = 0.5 * lam * ||x - c_t||^2, c_t uniform."""
    if cfg.cls != "strong":
        raise ConfigError(f"stream class is {cfg.cls!r}, expected 'strong'")
    lam = cfg.true_parameter
    t_total = cfg.horizon_T
    if not (1.0 / t_total <= lam <= 1.0):
        raise ParameterRangeError(
            f"lambda={lam} outside [1/T, 1] = [{1.0 / t_total}, 1]"
        )
    rng = np.random.default_rng(cfg.seed)
    centers = fset.sample(rng, t_total)
    grad_sup = np.array([lam * fset.max_dist(c) for c in centers])
    bad = grad_sup > cfg.grad_bound_G
    if np.any(bad):
        raise AssumptionViolationError(
            f"quadratic stream exceeds G={cfg.grad_bound_G}: "
            f"needs G >= {grad_sup.max():.6g} (lambda * max distance to a center)"
        )
    oracles = [quadratic_oracle(lam, c) for c in centers]
    return SyntheticStream(
        config=cfg,
        fset=fset,
        family="quadratic",
        oracles=oracles,
        params={"lam": lam, "centers": centers, "center_sum": centers.sum(axis=0)},
        smoothness=np.full(t_total, lam),
        grad_sup=grad_sup,
    )


def gen_expconcave_stream(cfg: StreamConfig, fset: FeasibleSet) -> SyntheticStream:
    """Squared linear stream scaled to be alpha-exp-concave on the set.

    The residual range of 0.5 * (<a, x> - y)^2 dictates the concavity
    modulus: the loss is (1/r_max^2)-exp-concave where r_max bounds the
    residual on the set. Coefficient norms are capped so both the requested
    alpha and the gradient bound G hold everywhere.
    """
    if cfg.cls != "expconcave":
        raise ConfigError(f"stream class is {cfg.cls!r}, expected 'expconcave'")
    alpha = cfg.true_parameter
    t_total = cfg.horizon_T
    if not (1.0 / t_total <= alpha <= 1.0):
        raise ParameterRangeError(
            f"alpha={alpha} outside [1/T, 1] = [{1.0 / t_total}, 1]"
        )
    rng = np.random.default_rng(cfg.seed)
    dirs = rng.standard_normal((t_total, cfg.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    anchors = _interior_points(fset, rng, t_total)
    coeffs = np.empty_like(dirs)
    targets = np.empty(t_total)
    grad_sup = np.empty(t_total)
    smooth = np.empty(t_total)
    for t in range(t_total):
        u, z = dirs[t], anchors[t]
        lo, hi = fset.linear_range(u)
        uz = float(u @ z)
        reach = max(abs(hi - uz), abs(uz - lo))  # sup |<u, x - z>| over the set
        s = min(np.sqrt(cfg.grad_bound_G / reach), 1.0 / (np.sqrt(alpha) * reach))
        coeffs[t] = s * u
        targets[t] = float(coeffs[t] @ z)
        grad_sup[t] = s * s * reach
        smooth[t] = s * s
    if np.any(grad_sup > cfg.grad_bound_G * (1 + 1e-12)):
        raise AssumptionViolationError("exp-concave stream exceeds G")
    oracles = [
        squared_linear_oracle(coeffs[t], targets[t], alpha=alpha)
        for t in range(t_total)
    ]
    return SyntheticStream(
        config=cfg,
        fset=fset,
        family="squared_linear",
        oracles=oracles,
        params={"coeffs": coeffs, "targets": targets, "alpha": alpha},
        smoothness=smooth,
        grad_sup=grad_sup,
    )


def gen_convex_stream(cfg: StreamConfig, fset: FeasibleSet) -> SyntheticStream:
    """Huberized absolute-deviation stream (convex, smooth, nonnegative)."""
    if cfg.cls != "convex":
        raise ConfigError(f"stream class is {cfg.cls!r}, expected 'convex'")
    t_total = cfg.horizon_T
    delta = cfg.huber_delta
    rng = np.random.default_rng(cfg.seed)
    dirs = rng.standard_normal((t_total, cfg.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    scales = (cfg.grad_bound_G / delta) * rng.uniform(0.5, 1.0, t_total)
    coeffs = scales[:, None] * dirs
    if cfg.realizable:
        x_zero = _interior_points(fset, rng, 1, shrink=0.5)[0]
        targets = coeffs @ x_zero
        params_extra = {"zero_loss_point": x_zero}
    else:
        anchors = _interior_points(fset, rng, t_total)
        noise = rng.uniform(-cfg.target_noise, cfg.target_noise, t_total)
        targets = np.einsum("td,td->t", coeffs, anchors) + noise
        params_extra = {}
    grad_sup = np.empty(t_total)
    for t in range(t_total):
        lo, hi = fset.linear_range(coeffs[t])
        resid_sup = max(abs(lo - targets[t]), abs(hi - targets[t]))
        grad_sup[t] = min(delta, resid_sup) * float(np.linalg.norm(coeffs[t]))
    if np.any(grad_sup > cfg.grad_bound_G * (1 + 1e-12)):
        raise AssumptionViolationError("convex stream exceeds G")
    oracles = [huber_oracle(coeffs[t], targets[t], delta) for t in range(t_total)]
    return SyntheticStream(
        config=cfg,
        fset=fset,
        family="huber",
        oracles=oracles,
        params={"coeffs": coeffs, "targets": targets, "delta": delta, **params_extra},
        smoothness=scales**2 / delta,
        grad_sup=grad_sup,
    )


_GENERATORS = {
    "strong": gen_strongly_convex_stream,
    "expconcave": gen_expconcave_stream,
    "convex": gen_convex_stream,
}


def generate_stream(cfg: StreamConfig, fset: FeasibleSet) -> SyntheticStream:
    """Dispatch to the class-specific generator."""
    return _GENERATORS[cfg.cls](cfg, fset)


def fd_gradient(value_fn: Callable, x: np.ndarray, step: float) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (value_fn(x + e) - value_fn(x - e)) / (2.0 * step)
    return g
