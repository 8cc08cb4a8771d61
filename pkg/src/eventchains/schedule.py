"""Unconditional CCA-instant sets.

Lambda(i, j) holds every instant at which a node can start a CCA while
in backoff stage i of transmission attempt j; R(i, j) holds the retry
landings after an unsuccessful transmission whose CCA started in
Lambda(i, j); Omega(i, j, t) holds the predecessor CCA instants that
can lead to a CCA at t.  Instants are exposed in symbols; internally
everything lives on the integer slot grid.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

from .params import DerivedModel


class StateIndex(NamedTuple):
    """Backoff stage i (1-based) within transmission attempt j (1-based)."""

    i: int
    j: int


def _check_state(model, i, j):
    if not (1 <= i <= model.b_max and 1 <= j <= model.t_max_attempts):
        raise ValueError(f"state ({i},{j}) outside 1..{model.b_max} x 1..{model.t_max_attempts}")


@lru_cache(maxsize=None)
def lambda_slots(model: DerivedModel, i: int, j: int) -> tuple:
    """Slot-grid instants of Lambda(i, j), sorted ascending."""
    _check_state(model, i, j)
    g = model.g_slots
    if j == 1 and i == 1:
        return tuple(range(model.w[0]))
    if i >= 2:
        # deferral after a busy CCA in stage i-1
        prev = lambda_slots(model, i - 1, j)
        w_i = model.w[i - 1]
        return tuple(sorted({t + g + w for t in prev for w in range(w_i)}))
    # i == 1, j >= 2: union of retry landings over every stage of attempt j-1
    out = set()
    for i_prev in range(1, model.b_max + 1):
        out.update(r_slots(model, i_prev, j - 1))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def r_slots(model: DerivedModel, i: int, j: int) -> tuple:
    """Retry CCA landings after a failed transmission started in Lambda(i, j)."""
    _check_state(model, i, j)
    w1 = model.w[0]
    return tuple(sorted({t + model.rtx_slots + w
                         for t in lambda_slots(model, i, j) for w in range(w1)}))


def lambda_set(model: DerivedModel, s: StateIndex) -> tuple:
    """Lambda(i, j) in symbols (sorted, strictly increasing)."""
    i, j = s
    return tuple(t * model.timing.d_bp for t in lambda_slots(model, i, j))


def omega_slots(model: DerivedModel, t_slot: int, i: int, j: int) -> tuple:
    """Predecessor CCA slots that can produce a CCA at t_slot in state (i, j)."""
    _check_state(model, i, j)
    g = model.g_slots
    if i == 1 and j == 1:
        return ()
    if i >= 2:
        w_i = model.w[i - 1]
        prev = lambda_slots(model, i - 1, j)
        lo, hi = t_slot - g - (w_i - 1), t_slot - g
        return tuple(ts for ts in prev if lo <= ts <= hi)
    # i == 1, j >= 2
    w1 = model.w[0]
    lo, hi = t_slot - model.rtx_slots - (w1 - 1), t_slot - model.rtx_slots
    out = set()
    for i_prev in range(1, model.b_max + 1):
        out.update(ts for ts in lambda_slots(model, i_prev, j - 1) if lo <= ts <= hi)
    return tuple(sorted(out))


def omega_set(model: DerivedModel, t: int, s: StateIndex) -> tuple:
    """Omega(i, j, t) in symbols; empty when t is unreachable in (i, j)."""
    i, j = s
    d_bp = model.timing.d_bp
    if t < 0 or t % d_bp != 0:
        return ()
    return tuple(ts * d_bp for ts in omega_slots(model, t // d_bp, i, j))
