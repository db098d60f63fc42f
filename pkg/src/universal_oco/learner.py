"""The two-layer universal learner: experts below, Adapt-ML-Prod on top.

Round protocol (order is load-bearing): query mixing weights, gather
expert predictions, emit the weighted average, evaluate the loss and its
gradient once at the aggregate, update the meta-layer with the gradient
only, then hand the full oracle to every expert. Experts therefore never
see round-t information before the aggregate is out, and the meta-layer
structurally cannot touch the original loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvariantError, NumericError
from .experts import Expert
from .geometry import FeasibleSet
from .losses import LossOracle
from .meta import AdaptMLProd


@dataclass
class RoundRecord:
    """Everything the harness needs about one round."""

    t: int
    x_t: np.ndarray
    expert_points: np.ndarray  # (n, d)
    weights: np.ndarray  # (n,)
    loss_value: float
    gradient_norm: float
    per_expert_linloss: np.ndarray  # (n,)
    meta_linloss: float


class UniversalLearner:
    """Aggregates a pool of black-box experts over one feasible set."""

    def __init__(self, experts: list[Expert], fset: FeasibleSet, G: float,
                 anchor=None):
        if len(experts) < 2:
            raise ConfigError(
                "need at least 2 experts; a single expert needs no meta-layer"
            )
        self.experts = list(experts)
        self.fset = fset
        self.meta = AdaptMLProd(
            len(experts), G, fset.diameter,
            fset.center if anchor is None else anchor,
        )
        self.round = 0
        self.meta_grad_queries = 0

    @property
    def num_experts(self) -> int:
        return len(self.experts)

    def expert_names(self) -> list[str]:
        return [e.name for e in self.experts]

    def gradient_queries(self) -> int:
        """Total oracle gradient queries so far: one per round for the
        meta-layer plus each expert's own."""
        return self.meta_grad_queries + sum(e.grad_queries for e in self.experts)

    def step(self, oracle: LossOracle) -> tuple[np.ndarray, RoundRecord]:
        t = self.round + 1
        p = self.meta.weights()
        pts = np.stack([e.predict() for e in self.experts])
        x_t = p @ pts
        if not self.fset.contains(x_t, tol=1e-12):
            raise InvariantError(f"aggregate point left the feasible set (round {t})")
        val = oracle.value(x_t)
        g = oracle.gradient(x_t)
        self.meta_grad_queries += 1
        if not (np.isfinite(val) and np.all(np.isfinite(g))):
            raise NumericError("loss oracle returned non-finite values", t)
        ell, ell_vec = self.meta.update(g, pts, x_t)
        for e in self.experts:
            e.update(oracle)
        self.round = t
        record = RoundRecord(
            t=t,
            x_t=x_t,
            expert_points=pts,
            weights=p,
            loss_value=float(val),
            gradient_norm=float(np.linalg.norm(g)),
            per_expert_linloss=ell_vec,
            meta_linloss=ell,
        )
        return x_t, record

    def run(self, stream) -> list[RoundRecord]:
        """Play the whole stream; returns one record per round."""
        return [self.step(oracle)[1] for oracle in stream]


def run_single_expert(expert: Expert, stream) -> tuple[np.ndarray, np.ndarray]:
    """Standalone expert run (no meta-layer), e.g. for baselines.

    Returns (per-round losses at the expert's own predictions,
    per-round gradient norms at those predictions).
    """
    losses = np.empty(len(stream))
    grad_norms = np.empty(len(stream))
    for t, oracle in enumerate(stream):
        x = expert.predict()
        losses[t] = oracle.value(x)
        grad_norms[t] = float(np.linalg.norm(oracle.gradient(x)))
        expert.update(oracle)
    return losses, grad_norms
