"""Feasibility checks for produced allocations."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .types import Allocation, ChannelRealization, IndividualBudgets, PairMode

_TOL = 1e-9


def validate_allocation(real: ChannelRealization, alloc: Allocation, *,
                        total_budget: float | None = None,
                        budgets: IndividualBudgets | None = None,
                        extra_allowed: bool = False,
                        tol: float = _TOL) -> list[str]:
    """Returns a list of violation messages; empty means feasible."""
    bad: list[str] = []
    m = real.m
    perm = np.asarray(alloc.pairing)
    if perm.shape != (m,) or not np.array_equal(np.sort(perm), np.arange(m)):
        bad.append("pairing is not a permutation")
        return bad
    for name, v in (("p_s", alloc.p_s), ("p_r", alloc.p_r), ("q_s", alloc.q_s)):
        if v.shape != (m,) or not np.all(np.isfinite(v)):
            bad.append(f"{name} has wrong shape or non-finite entries")
            return bad
        if np.any(v < -tol):
            bad.append(f"{name} has negative entries")

    if total_budget is not None:
        used = alloc.total_power()
        if used > total_budget * (1 + tol) + tol:
            bad.append(f"total power {used} exceeds budget {total_budget}")
    if budgets is not None:
        src = float(alloc.p_s.sum() + alloc.q_s.sum())
        rly = float(alloc.p_r.sum())
        if src > budgets.p_source * (1 + tol) + tol:
            bad.append(f"source power {src} exceeds budget {budgets.p_source}")
        if rly > budgets.p_relay * (1 + tol) + tol:
            bad.append(f"relay power {rly} exceeds budget {budgets.p_relay}")

    for k in range(m):
        j = int(perm[k])
        mode = int(alloc.modes[k])
        if mode == PairMode.DIRECT:
            if alloc.p_r[k] > tol:
                bad.append(f"direct pair {k} carries relay power")
            if not extra_allowed and alloc.q_s[k] > tol:
                bad.append(f"pair {k} uses the second slot without extra transmission")
        else:
            if alloc.q_s[k] > tol:
                bad.append(f"relay pair {k} carries second-slot source power")
            decode = real.a_sr[k] * alloc.p_s[k]
            combine = real.a_sd[k] * alloc.p_s[k] + real.a_rd[j] * alloc.p_r[k]
            if mode == PairMode.RELAY:
                scale = max(1.0, decode, combine)
                if abs(decode - combine) > 1e-6 * scale:
                    bad.append(f"relay pair {k} breaks the equal-information split")
            elif decode + tol * max(1.0, combine) < combine:
                bad.append(f"boundary pair {k} gives the relay less than it forwards")
    return bad


def assert_feasible(real, alloc, **kwargs) -> None:
    bad = validate_allocation(real, alloc, **kwargs)
    if bad:
        raise ValidationError("; ".join(bad))
