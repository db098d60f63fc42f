"""Expert algorithms, the geometric parameter grids, and the expert pool.

Each expert is an independent online learner that receives the original
loss oracle every round and queries gradients at its own iterate. The pool
instantiates one expert per (algorithm, grid parameter) pair for the
strongly convex and exp-concave blocks and one expert per algorithm for the
general convex block; everybody starts at the domain center.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, NumericError
from .geometry import FeasibleSet, generalized_project
from .losses import LossOracle

# Canonical ordering of algorithm identifiers; fixes the expert pool order.
ALGORITHM_IDS = ("ogd_convex", "ogd_strong", "ons", "sogd", "oegd_strong")


def build_grid(T: int) -> np.ndarray:
    """Exponentially spaced curvature grid {2^k / T : k = 0..ceil(log2 T)}.

    Covers [1/T, 1] with ratio 2: any parameter in that interval has a grid
    point within a factor of two below it.
    """
    if T < 1:
        raise ConfigError("horizon must be >= 1")
    n = math.ceil(math.log2(T)) if T > 1 else 0
    return np.array([2.0**k / T for k in range(n + 1)])


def select_grid_param(grid: np.ndarray, true_param: float) -> float:
    """Largest grid value not exceeding the true parameter."""
    eligible = grid[grid <= true_param]
    if eligible.size == 0:
        raise ConfigError(f"parameter {true_param} below the grid minimum {grid[0]}")
    return float(eligible[-1])


class Expert:
    """Base class: one online algorithm with an assumed curvature parameter."""

    algorithm_id: str = ""

    def __init__(self, fset: FeasibleSet, assumed_param: float = 0.0):
        self.fset = fset
        self.assumed_param = float(assumed_param)
        self.x = fset.center.copy()
        self.round = 0
        self.grad_queries = 0

    @property
    def name(self) -> str:
        if self.assumed_param > 0.0:
            return f"{self.algorithm_id}@{self.assumed_param:.10g}"
        return self.algorithm_id

    def predict(self) -> np.ndarray:
        """Current iterate; does not mutate state."""
        return self.x

    def update(self, oracle: LossOracle) -> None:
        raise NotImplementedError

    def _grad(self, oracle: LossOracle, at: np.ndarray) -> np.ndarray:
        g = oracle.gradient(at)
        self.grad_queries += 1
        if not np.all(np.isfinite(g)):
            raise NumericError(
                f"expert {self.name} got a non-finite gradient", self.round + 1
            )
        return g


class ConvexOGD(Expert):
    """Gradient descent with step D / (G * sqrt(t)) for general convex losses."""

    algorithm_id = "ogd_convex"

    def __init__(self, fset: FeasibleSet, G: float):
        super().__init__(fset)
        self.G = float(G)

    def update(self, oracle: LossOracle) -> None:
        t = self.round + 1
        g = self._grad(oracle, self.x)
        eta = self.fset.diameter / (self.G * math.sqrt(t))
        self.x = self.fset.project(self.x - eta * g)
        self.round = t


class StrongOGD(Expert):
    """Gradient descent with step 1 / (lambda * t) for strongly convex losses."""

    algorithm_id = "ogd_strong"

    def __init__(self, fset: FeasibleSet, lam: float):
        super().__init__(fset, assumed_param=lam)

    def update(self, oracle: LossOracle) -> None:
        t = self.round + 1
        g = self._grad(oracle, self.x)
        eta = 1.0 / (self.assumed_param * t)
        self.x = self.fset.project(self.x - eta * g)
        self.round = t


class NewtonStep(Expert):
    """Online Newton step for exp-concave losses.

    Accumulates A_t = eps*I + sum of gradient outer products and moves
    against (1/gamma) * A_t^{-1} g_t, projecting back in the A_t metric.
    The inverse is maintained by rank-one downdates and rebuilt from A_t
    every ``rebuild_every`` rounds to cap numerical drift.
    """

    algorithm_id = "ons"
    rebuild_every = 512

    def __init__(self, fset: FeasibleSet, alpha: float, G: float):
        super().__init__(fset, assumed_param=alpha)
        d_diam = fset.diameter
        self.gamma = 0.5 * min(1.0 / (4.0 * G * d_diam), alpha)
        eps = 1.0 / (self.gamma**2 * d_diam**2)
        self.mat = eps * np.eye(fset.dim)
        self.mat_inv = np.eye(fset.dim) / eps

    def update(self, oracle: LossOracle) -> None:
        g = self._grad(oracle, self.x)
        self.mat += np.outer(g, g)
        ainv_g = self.mat_inv @ g
        self.mat_inv -= np.outer(ainv_g, ainv_g) / (1.0 + float(g @ ainv_g))
        self.round += 1
        if self.round % self.rebuild_every == 0:
            self.mat_inv = np.linalg.inv(self.mat)
        target = self.x - (self.mat_inv @ g) / self.gamma
        self.x = generalized_project(self.fset, target, self.mat)


class SelfConfidentOGD(Expert):
    """Gradient descent with step D / sqrt(delta + sum of squared gradient
    norms seen so far); yields small-loss regret for smooth losses."""

    algorithm_id = "sogd"

    def __init__(self, fset: FeasibleSet, delta: float = 1.0):
        super().__init__(fset)
        self.delta = float(delta)
        self.grad_sq_sum = 0.0

    def update(self, oracle: LossOracle) -> None:
        g = self._grad(oracle, self.x)
        self.grad_sq_sum += float(g @ g)
        eta = self.fset.diameter / math.sqrt(self.delta + self.grad_sq_sum)
        self.x = self.fset.project(self.x - eta * g)
        self.round += 1


class ExtraGradStrong(Expert):
    """Extra-gradient descent for strongly convex smooth losses.

    Keeps an auxiliary sequence u and steps both sequences along the latest
    gradient with

        eta_t = 8 G^2 / (lambda * (S_t + G^2 / lambda)),
        S_t = sum_{i<=t} ||g_i - g_{i-1}||^2,   g_0 := 0.

    Both the u-step and the next prediction use eta_t, the freshest value
    computable after round t.
    """

    algorithm_id = "oegd_strong"

    def __init__(self, fset: FeasibleSet, lam: float, G: float):
        super().__init__(fset, assumed_param=lam)
        self.G = float(G)
        self.u = fset.center.copy()
        self.prev_grad = np.zeros(fset.dim)
        self.grad_diff_sum = 0.0

    def update(self, oracle: LossOracle) -> None:
        g = self._grad(oracle, self.x)
        diff = g - self.prev_grad
        self.grad_diff_sum += float(diff @ diff)
        lam = self.assumed_param
        eta = 8.0 * self.G**2 / (lam * (self.grad_diff_sum + self.G**2 / lam))
        self.u = self.fset.project(self.u - eta * g)
        self.x = self.fset.project(self.u - eta * g)
        self.prev_grad = g
        self.round += 1


# Registry: algorithm id -> (block, factory). Factories take
# (fset, G, T, param) and ignore what they do not need. User-supplied
# algorithms can be registered for any block.
_REGISTRY: dict[str, tuple[str, object]] = {}


def register_algorithm(algorithm_id: str, block: str, factory) -> None:
    if block not in ("strong", "expconcave", "convex"):
        raise ConfigError(f"unknown block {block!r}")
    _REGISTRY[algorithm_id] = (block, factory)


register_algorithm("ogd_convex", "convex", lambda fset, G, T, p: ConvexOGD(fset, G))
register_algorithm("ogd_strong", "strong", lambda fset, G, T, p: StrongOGD(fset, p))
register_algorithm("ons", "expconcave", lambda fset, G, T, p: NewtonStep(fset, p, G))
register_algorithm("sogd", "convex", lambda fset, G, T, p: SelfConfidentOGD(fset))
register_algorithm(
    "oegd_strong", "strong", lambda fset, G, T, p: ExtraGradStrong(fset, p, G)
)


def make_expert(algorithm_id: str, fset: FeasibleSet, G: float, T: int,
                param: float = 0.0) -> Expert:
    if algorithm_id not in _REGISTRY:
        raise ConfigError(f"unknown algorithm {algorithm_id!r}")
    _, factory = _REGISTRY[algorithm_id]
    return factory(fset, G, T, param)


def _canonical_order(ids: list[str]) -> list[str]:
    seen = sorted(set(ids), key=lambda a: (
        ALGORITHM_IDS.index(a) if a in ALGORITHM_IDS else len(ALGORITHM_IDS), a))
    return seen


def build_expert_pool(
    algs_str: list[str],
    algs_exp: list[str],
    algs_con: list[str],
    T: int,
    fset: FeasibleSet,
    G: float,
) -> list[Expert]:
    """Instantiate the full expert pool in its canonical deterministic order.

    Strong block first, then exp-concave, then convex; within a block the
    algorithms follow their canonical order and grid parameters ascend. The
    pool has |A_str|*|grid| + |A_exp|*|grid| + |A_con| experts.
    """
    for aid in list(algs_str) + list(algs_exp) + list(algs_con):
        if aid not in _REGISTRY:
            raise ConfigError(f"unknown algorithm {aid!r}")
    for aid, blk in ((a, "strong") for a in algs_str):
        if _REGISTRY[aid][0] != blk:
            raise ConfigError(f"{aid!r} is not a strongly-convex algorithm")
    for aid in algs_exp:
        if _REGISTRY[aid][0] != "expconcave":
            raise ConfigError(f"{aid!r} is not an exp-concave algorithm")
    for aid in algs_con:
        if _REGISTRY[aid][0] != "convex":
            raise ConfigError(f"{aid!r} is not a general-convex algorithm")
    if not (algs_str or algs_exp or algs_con):
        raise ConfigError("expert pool is empty: no algorithms configured")
    grid = build_grid(T)
    pool: list[Expert] = []
    for aid in _canonical_order(list(algs_str)):
        for p in grid:
            pool.append(make_expert(aid, fset, G, T, float(p)))
    for aid in _canonical_order(list(algs_exp)):
        for p in grid:
            pool.append(make_expert(aid, fset, G, T, float(p)))
    for aid in _canonical_order(list(algs_con)):
        pool.append(make_expert(aid, fset, G, T))
    return pool
