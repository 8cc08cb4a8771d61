"""Exhaustive ground-truth oracle for tiny instances.

Walks every joint assignment of uniform backoff draws across all nodes,
stages and attempts, simulates each assignment deterministically with
the same grid mechanics as the simulator, and returns the exact
rational-weighted distribution over event sequences.  Directly
comparable to an exhaustive engine run.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import TreeTooLarge
from .params import DerivedModel

_ACTIVE, _DONE, _DROP_CCA, _DROP_RETRY = 0, 1, 2, 3


@dataclass
class ExactDistribution:
    outcomes: dict  # event-sequence signature (symbols) -> Fraction
    leaves: int
    delivery_ratio: Fraction
    latency_pdf: dict  # success finish (symbols) -> Fraction (expected count)

    def total_mass(self) -> Fraction:
        return sum(self.outcomes.values(), Fraction(0))


class _Walker:
    def __init__(self, model, max_leaves):
        self.m = model
        self.max_leaves = max_leaves
        self.leaves = 0
        self.outcomes = {}
        self.delivered = Fraction(0)
        self.latency = {}
        self.d_bp = model.timing.d_bp

    def run(self):
        m = self.m
        if m.w[0] ** m.n_nodes > self.max_leaves:
            raise TreeTooLarge(
                f"initial joint draws alone exceed {self.max_leaves} leaves")
        # every node draws its first backoff simultaneously at t = 0
        w1 = m.w[0]
        weight = Fraction(1, w1 ** m.n_nodes)
        for draws in product(range(w1), repeat=m.n_nodes):
            nodes = [[_ACTIVE, 1, 1, d, -1] for d in draws]  # status, j, i, cca, finish
            self._walk(nodes, 0, (), weight)
        return ExactDistribution(self.outcomes, self.leaves,
                                 self.delivered / m.n_nodes, self.latency)

    def _leaf(self, nodes, events, weight):
        self.leaves += 1
        if self.leaves > self.max_leaves:
            raise TreeTooLarge(f"joint choice tree exceeds {self.max_leaves} leaves")
        sig = tuple((k, s * self.d_bp) for k, s in events)
        self.outcomes[sig] = self.outcomes.get(sig, Fraction(0)) + weight
        for st in nodes:
            if st[0] == _DONE:
                self.delivered += weight
                f = st[4] * self.d_bp
                self.latency[f] = self.latency.get(f, Fraction(0)) + weight

    def _walk(self, nodes, busy_end, events, weight):
        m = self.m
        pending = [st[3] for st in nodes if st[0] == _ACTIVE]
        if not pending:
            self._leaf(nodes, events, weight)
            return
        t = min(pending)
        group = [ix for ix, st in enumerate(nodes) if st[0] == _ACTIVE and st[3] == t]

        if t < busy_end:
            # busy CCA for the whole group: advance stages, branch on redraws
            drawers = []
            base = [st[:] for st in nodes]
            for ix in group:
                st = base[ix]
                st[2] += 1
                if st[2] > m.b_max:
                    st[0] = _DROP_CCA
                else:
                    drawers.append(ix)
            self._branch(base, drawers, lambda st: m.w[st[2] - 1],
                         lambda st, w: t + m.g_slots + w, busy_end, events, weight)
            return

        # clear CCA: the whole group transmits
        base = [st[:] for st in nodes]
        if len(group) == 1:
            ix = group[0]
            base[ix][0] = _DONE
            base[ix][4] = t + m.success_len_slots
            self._walk(base, t + m.success_len_slots, events + (("S", t),), weight)
            return
        drawers = []
        for ix in group:
            st = base[ix]
            st[1] += 1
            if st[1] > m.t_max_attempts:
                st[0] = _DROP_RETRY
            else:
                st[2] = 1
                drawers.append(ix)
        self._branch(base, drawers, lambda st: m.w[0],
                     lambda st, w: t + m.rtx_slots + w,
                     t + m.fail_len_slots, events + (("F", t),), weight)

    def _branch(self, base, drawers, window_of, land, busy_end, events, weight):
        if not drawers:
            self._walk(base, busy_end, events, weight)
            return
        windows = [window_of(base[ix]) for ix in drawers]
        denom = 1
        for w in windows:
            denom *= w
        sub = weight / denom
        for combo in product(*(range(w) for w in windows)):
            nxt = [st[:] for st in base]
            for ix, w in zip(drawers, combo):
                nxt[ix][3] = land(nxt[ix], w)
            self._walk(nxt, busy_end, events, sub)


def enumerate_exact(model: DerivedModel, max_leaves: int = 10_000_000) -> ExactDistribution:
    """Exact outcome distribution by brute-force joint enumeration."""
    return _Walker(model, max_leaves).run()
