"""Expert tracking with the Adapt-ML-Prod meta-algorithm.

The meta-layer never sees the loss oracle. It scores expert predictions
with the normalized linearized loss

    ell_t^i = (<g_t, x_t^i - xbar> + G*D) / (2*G*D)  in [0, 1],

keeps one time-varying learning rate per expert,

    eta_t^i = min{ 1/2, sqrt( ln|E| / (1 + sum_{s<=t} (ell_s - ell_s^i)^2) ) },

and multiplicative weights

    w_t^i = ( w_{t-1}^i * (1 + eta_{t-1}^i (ell_t - ell_t^i)) )^(eta_t^i / eta_{t-1}^i),

starting from w_0^i = 1/|E|. Round-t mixing weights are
p_t^i proportional to eta_{t-1}^i * w_{t-1}^i. Weights are stored as
logarithms: the outer exponent becomes a multiplication in log space and
the weights cannot underflow on long runs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AssumptionViolationError, ConfigError, InvariantError

_RANGE_SLACK = 1e-12


def gamma_constant(num_experts: int, T: int) -> float:
    """The double-logarithmic constant of the meta-regret bound:
    3*ln(n) + ln(1 + n/(2e) * (1 + ln(T+1))).
    """
    if num_experts < 2:
        raise ConfigError("need at least 2 experts (ln of the pool size must be > 0)")
    if T < 1:
        raise ConfigError("horizon must be >= 1")
    n = float(num_experts)
    return 3.0 * math.log(n) + math.log(
        1.0 + n / (2.0 * math.e) * (1.0 + math.log(T + 1.0))
    )


def normalized_expert_loss(g, x_expert, xbar, G: float, D: float) -> float:
    """Linearized loss of one expert point, normalized into [0, 1]."""
    gd = G * D
    raw = (float(np.dot(g, np.asarray(x_expert) - np.asarray(xbar))) + gd) / (2.0 * gd)
    if raw < -_RANGE_SLACK or raw > 1.0 + _RANGE_SLACK:
        raise AssumptionViolationError(
            f"normalized loss {raw} outside [0,1]; G or D misconfigured"
        )
    return min(max(raw, 0.0), 1.0)


class AdaptMLProd:
    """Meta-state over a fixed pool of experts.

    Args:
        num_experts: pool size, at least 2.
        G: gradient-norm bound of the losses.
        D: diameter of the feasible set.
        anchor: reference point xbar of the linearized loss; any point of
            the domain works, the weight trajectory does not depend on it.
    """

    def __init__(self, num_experts: int, G: float, D: float, anchor):
        if num_experts < 2:
            raise ConfigError("need at least 2 experts; run a single expert directly")
        self.n = int(num_experts)
        self.G = float(G)
        self.D = float(D)
        self.anchor = np.asarray(anchor, dtype=np.float64)
        self.ln_n = math.log(self.n)
        self.log_w = np.full(self.n, -self.ln_n)
        self.eta = np.full(self.n, min(0.5, math.sqrt(self.ln_n)))
        self.cum_sq_excess = np.zeros(self.n)
        self.round = 0

    def weights(self) -> np.ndarray:
        """Mixing weights p proportional to eta * w; sums to one."""
        s = np.log(self.eta) + self.log_w
        e = np.exp(s - s.max())
        return e / e.sum()

    def normalized_losses(self, g: np.ndarray, expert_points: np.ndarray) -> np.ndarray:
        """Vector of ell_t^i for a stacked (n, d) matrix of expert points."""
        gd = self.G * self.D
        ell = ((expert_points - self.anchor) @ g + gd) / (2.0 * gd)
        if np.any(ell < -_RANGE_SLACK) or np.any(ell > 1.0 + _RANGE_SLACK):
            raise AssumptionViolationError(
                "normalized losses escaped [0,1]; G or D misconfigured"
            )
        return np.clip(ell, 0.0, 1.0)

    def update(self, g, expert_points, x_t) -> tuple[float, np.ndarray]:
        """Consume round-t information: the gradient at the aggregate x_t
        and the expert points that produced it. Returns (ell_t, ell_t^i).
        """
        g = np.asarray(g, dtype=np.float64)
        pts = np.asarray(expert_points, dtype=np.float64)
        if pts.shape != (self.n, g.shape[0]):
            raise InvariantError(
                f"expert points have shape {pts.shape}, expected {(self.n, g.shape[0])}"
            )
        ell_vec = self.normalized_losses(g, pts)
        p = self.weights()
        ell = float(p @ ell_vec)
        gd = self.G * self.D
        direct = (float(np.dot(g, np.asarray(x_t) - self.anchor)) + gd) / (2.0 * gd)
        if abs(ell - direct) > 1e-10:
            raise InvariantError(
                f"aggregate loss mismatch: sum p*ell = {ell} vs direct {direct}; "
                "x_t is not the p-weighted average of the expert points"
            )
        self._apply(ell, ell_vec)
        return ell, ell_vec

    def _apply(self, ell: float, ell_vec: np.ndarray) -> None:
        """Advance eta, w, and the squared-excess accumulators by one round."""
        excess = ell - ell_vec
        self.cum_sq_excess += excess * excess
        eta_new = np.minimum(0.5, np.sqrt(self.ln_n / (1.0 + self.cum_sq_excess)))
        self.log_w = (eta_new / self.eta) * (self.log_w + np.log1p(self.eta * excess))
        if not np.all(np.isfinite(self.log_w)):
            raise InvariantError("meta weights became non-finite")
        self.eta = eta_new
        self.round += 1
