"""Weighted water-filling over parallel channels.

Maximizes sum_i (w_i/2) log(1 + a_i p_i) subject to sum_i p_i <= P, p >= 0.
The optimum is p_i = [w_i/(2 mu) - 1/a_i]^+ with mu chosen to meet the
budget; the kernel finds mu by bisection and applies one linear correction
so the budget is met to near machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleBudgetError, ValidationError
from .kernels import waterfill_kernel, waterfill_residual


@dataclass
class WaterfillResult:
    powers: np.ndarray
    water_price: float  # the budget-meeting mu

    def rate(self, gains, weights) -> float:
        return float(np.sum(0.5 * np.asarray(weights) * np.log1p(np.asarray(gains) * self.powers)))


def waterfill(gains, weights, budget: float) -> WaterfillResult:
    gains = np.ascontiguousarray(gains, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    if gains.shape != weights.shape or gains.ndim != 1:
        raise ValidationError("gains and weights must be 1-d arrays of equal length")
    if np.any(gains < 0) or np.any(weights < 0):
        raise ValidationError("gains and weights must be nonnegative")
    if budget < 0:
        raise InfeasibleBudgetError("power budget must be >= 0")
    if budget > 0 and not np.any(gains * weights > 0):
        raise InfeasibleBudgetError("positive budget but every channel has zero weighted gain")
    powers, mu = waterfill_kernel(gains, weights, float(budget))
    return WaterfillResult(powers=powers, water_price=float(mu))


def kkt_residual(gains, weights, budget: float, powers) -> float:
    """Max relative deviation of the active water levels plus budget mismatch."""
    gains = np.ascontiguousarray(gains, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    powers = np.ascontiguousarray(powers, dtype=float)
    return float(waterfill_residual(gains, weights, float(budget), powers))
