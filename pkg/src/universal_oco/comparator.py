"""Best-fixed-point comparator and gradient-variation accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Ball, FeasibleSet
from .losses import SyntheticStream


@dataclass
class ComparatorResult:
    x_star: np.ndarray
    total_loss: float  # L_T^* = sum_t f_t(x_star)
    per_round_losses: np.ndarray  # f_t(x_star) for regret prefixes
    grad_quality: float  # norm of the projected-gradient mapping at x_star


def _pgd_minimize(stream: SyntheticStream, fset: FeasibleSet, start: np.ndarray,
                  step: float, iters: int) -> np.ndarray:
    x = start
    for _ in range(iters):
        x_new = fset.project(x - step * stream.total_gradient(x))
        if float(np.linalg.norm(x_new - x)) < 1e-15:
            return x_new
        x = x_new
    return x


def _grid_points(fset: FeasibleSet, resolution: float) -> np.ndarray:
    if isinstance(fset, Ball):
        lo = fset.center - fset.radius
        hi = fset.center + fset.radius
    else:
        lo, hi = fset.lower, fset.upper
    axes = [np.arange(lo[j], hi[j] + resolution, resolution) for j in range(fset.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    if isinstance(fset, Ball):
        keep = np.linalg.norm(pts - fset.center, axis=1) <= fset.radius
        pts = pts[keep]
    return pts


def _grid_search(stream: SyntheticStream, fset: FeasibleSet,
                 resolution: float) -> np.ndarray:
    pts = _grid_points(fset, resolution)
    best_val = np.inf
    best = fset.center
    for chunk in np.array_split(pts, max(1, len(pts) // 2048)):
        if stream.family == "quadratic":
            lam = stream.params["lam"]
            d = chunk[:, None, :] - stream.params["centers"][None, :, :]
            vals = 0.5 * lam * np.sum(d * d, axis=2).sum(axis=1)
        else:
            r = chunk @ stream.params["coeffs"].T - stream.params["targets"]
            if stream.family == "squared_linear":
                vals = 0.5 * np.sum(r * r, axis=1)
            else:
                delta = stream.params["delta"]
                ar = np.abs(r)
                vals = np.where(
                    ar <= delta, 0.5 * r * r, delta * ar - 0.5 * delta**2
                ).sum(axis=1)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best = chunk[i]
    return best


def comparator_oracle(
    stream: SyntheticStream,
    fset: FeasibleSet,
    pgd_iters: int = 2000,
    grid_resolution: float | None = None,
    n_starts: int = 8,
    seed: int = 0,
) -> ComparatorResult:
    """Minimize sum_t f_t over the set.

    Projected gradient descent with step 1/(sum of smoothness constants),
    multi-started from the center plus seeded random points; for dim <= 2
    an optional grid search cross-checks (and can only improve) the result.
    """
    step = 1.0 / stream.smoothness_sum()
    rng = np.random.default_rng(seed)
    starts = [fset.center] + list(fset.sample(rng, n_starts - 1))
    best = None
    best_val = np.inf
    for s in starts:
        x = _pgd_minimize(stream, fset, np.asarray(s, dtype=np.float64),
                          step, pgd_iters)
        v = stream.total_value(x)
        if v < best_val:
            best_val, best = v, x
    if grid_resolution is not None and fset.dim <= 2:
        xg = _grid_search(stream, fset, grid_resolution)
        # Polish the grid winner with the same PGD.
        xg = _pgd_minimize(stream, fset, xg, step, pgd_iters)
        vg = stream.total_value(xg)
        if vg < best_val:
            best_val, best = vg, xg
    mapped = fset.project(best - step * stream.total_gradient(best))
    quality = float(np.linalg.norm(best - mapped)) / step
    return ComparatorResult(
        x_star=best,
        total_loss=best_val,
        per_round_losses=stream.per_round_values(best),
        grad_quality=quality,
    )


def gradient_variation(stream: SyntheticStream) -> tuple[float, np.ndarray]:
    """Total gradient variation V_T and its per-round terms (closed form)."""
    terms = stream.vt_terms()
    return float(terms.sum()), terms
