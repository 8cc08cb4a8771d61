"""Event-chain enumeration engine.

Builds every outcome of the unslotted CSMA/CA contention as a chain of
success/failure events, with exact conditional probabilities:

* initial events from the joint first-backoff distribution,
* per-chain conditional CCA tables over the slot grid, restricted to
  node trajectories consistent with the observed chain (a past CCA must
  have hit a busy slot or a collision start; anything else would have
  produced an event the chain does not contain, and a trajectory whose
  every continuation is inconsistent is itself inconsistent),
* residual-node split (dropped by CCA exhaustion, dropped by retry
  exhaustion, active participant, active non-participant),
* next-event probabilities marginalized over node compositions, with
  collision compositions constrained to carry at least two participants
  in the last event,
* a threshold-pruned worklist, optionally fanned out over a process
  pool; the finalized multiset is a pure function of the model and does
  not depend on the worker count.

Instants inside this module are slot indices (multiples of d_bp).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from math import comb, fsum

import numpy as np

from .chains import FAILURE, SUCCESS, Chain, NodeComposition, chain_from_slots, make_event
from .errors import BudgetExceeded, InvalidComposition, NormalizationViolation
from .params import DerivedModel
from . import metrics as _metrics

RESIDUAL_TOL = 1e-6
_TINY = 1e-300
_EPS = float(np.finfo(float).eps)


def _floor_zero(raw, scale):
    """Zero out values below the cancellation noise floor of their terms.

    Differences of closed-form powers leave ~eps-sized residue where the
    true value is zero; anything not clearly above that residue is
    numerically indistinguishable from zero and must not seed chains.
    """
    return np.where(raw > 32.0 * _EPS * scale, raw, 0.0)


# ---------------------------------------------------------------------------
# initialization: first events after t = 0
# ---------------------------------------------------------------------------

def initial_event_slots(model: DerivedModel):
    """[(kind, slot, probability)] for the first event; zero entries omitted.

    A success at slot i needs one node to draw i and the other N-1 to
    draw later; a failure needs two or more nodes on the same slot.
    """
    n, w1 = model.n_nodes, model.w[0]
    out = []
    for i in range(w1):
        q = (w1 - i - 1) / w1  # P{a node draws later than slot i}
        p_s = n * (1.0 / w1) * q ** (n - 1)
        # sum over k >= 2 colliders of C(n,k) (1/w1)^k q^(n-k)
        p_f = ((w1 - i) / w1) ** n - q ** n - p_s
        p_f = max(p_f, 0.0)
        if p_s > 0.0:
            out.append((SUCCESS, i, p_s))
        if p_f > 0.0:
            out.append((FAILURE, i, p_f))
    return out


def initial_events(model: DerivedModel):
    """Public form: [(Event, probability)] for the first network event."""
    return [(make_event(model, k, s * model.timing.d_bp), p)
            for k, s, p in initial_event_slots(model)]


# ---------------------------------------------------------------------------
# per-chain examination
# ---------------------------------------------------------------------------

@dataclass
class ExamResult:
    """Everything one chain examination produces."""

    no_txs: float
    events: list  # [(kind, start_slot, probability)], positive entries only
    p_fcca: float
    p_frtx: float
    p_ap: float
    p_anp: float
    p_drop_at_last: float  # participants of the last event on their final attempt
    cca_mass: float  # expected deferral CCAs per residual node before f_m
    conservation_dev: float
    residual_dev: float
    f_m: int  # slots
    anomaly: bool = False


def _suffix_sums(v):
    """s[o] = sum of v[o+1:] (same length as v)."""
    s = np.cumsum(v[::-1])[::-1]
    return s - v


class ChainExaminer:
    """Per-chain conditional probability machinery for one model.

    Stateless between calls apart from cached model constants; one
    instance per worker process.
    """

    def __init__(self, model: DerivedModel):
        self.model = model
        self.g = model.g_slots
        self.rtx = model.rtx_slots
        self.w = model.w
        self.b_max = model.b_max
        self.t_max = model.t_max_attempts
        self.pad = self.g + max(self.w) + self.rtx + 2

    # -- window helpers (padded cumulative sums, pure slicing) --------------

    @staticmethod
    def _win_sum_back(src, off, width):
        """out[u] = sum_{w in [0,width)} src[u - off - w]."""
        n = src.shape[0]
        pad = off + width
        c = np.empty(n + 1 + pad)
        c[: pad + 1] = 0.0
        src.cumsum(out=c[pad + 1:])
        return np.maximum(c[width + 1: width + 1 + n] - c[1: 1 + n], 0.0)

    @staticmethod
    def _win_count_ahead(mask, off, width):
        """h[t] = number of ones of `mask` in [t+off, t+off+width)."""
        n = mask.shape[0]
        pad = off + width
        c = np.empty(n + 1 + pad)
        c[0] = 0.0
        mask.cumsum(out=c[1: n + 1])
        c[n + 1:] = c[n]
        return c[off + width: off + width + n] - c[off: off + n]

    # -- main entry ---------------------------------------------------------

    def examine(self, events) -> ExamResult:
        """Examine a non-empty chain given as ((kind, start_slot), ...)."""
        model = self.model
        last_kind, t_m = events[-1]
        f_m = t_m + model.event_len_slots(last_kind)
        n_s = sum(1 for k, _ in events if k == SUCCESS)
        n_r = model.n_nodes - n_s
        m_w = model.m_w(last_kind)

        if n_r == 0:
            return ExamResult(1.0, [], 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, f_m)

        tp = f_m + m_w + 1 + self.pad
        busy = np.zeros(tp, dtype=bool)
        fail = np.zeros(tp, dtype=bool)
        for kind, s in events:
            busy[s + 1: s + model.event_len_slots(kind)] = True
            if kind == FAILURE:
                fail[s] = True

        feas = self._feasibility(busy, fail, f_m)
        table = self._forward_table(feas, busy, fail)
        if table is None:
            # no consistent residual trajectory; cannot happen for chains the
            # engine itself generates, kept as a guard for hand-built inputs
            return ExamResult(0.0, [], 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                              0.0, 1.0, f_m, anomaly=True)
        return self._finish(events, table, busy, fail, f_m, t_m, last_kind, n_r, m_w)

    def _feasibility(self, busy, fail, f_m):
        """Per-state consistency masks, closed backward over continuations."""
        future = np.zeros(busy.shape[0], dtype=bool)
        future[f_m:] = True
        feas = {}
        for j in range(self.t_max, 0, -1):
            for i in range(self.b_max, 0, -1):
                fe = future.copy()
                if i == self.b_max:
                    fe |= busy
                else:
                    nxt = feas[(i + 1, j)]
                    ok = self._win_count_ahead(nxt, self.g, self.w[i]) > 0
                    fe |= busy & ok
                if j == self.t_max:
                    fe |= fail
                else:
                    nxt = feas[(1, j + 1)]
                    ok = self._win_count_ahead(nxt, self.rtx, self.w[0]) > 0
                    fe |= fail & ok
                feas[(i, j)] = fe
        return feas

    def _forward_table(self, feas, busy, fail):
        """Conditional per-state CCA probabilities for one residual node."""
        w1 = self.w[0]
        lam11 = feas[(1, 1)].copy()
        lam11[w1:] = False
        count = int(lam11.sum())
        if count == 0:
            return None
        table = {(1, 1): lam11 / count}
        for j in range(1, self.t_max + 1):
            for i in range(2, self.b_max + 1):
                src = table[(i - 1, j)] * busy
                h = self._win_count_ahead(feas[(i, j)], self.g, self.w[i - 1])
                src /= np.maximum(h, 1.0)
                table[(i, j)] = feas[(i, j)] * self._win_sum_back(src, self.g, self.w[i - 1])
            if j < self.t_max:
                fsrc = table[(1, j)].copy()
                for i in range(2, self.b_max + 1):
                    fsrc += table[(i, j)]
                fsrc *= fail
                h = self._win_count_ahead(feas[(1, j + 1)], self.rtx, w1)
                fsrc /= np.maximum(h, 1.0)
                table[(1, j + 1)] = feas[(1, j + 1)] * self._win_sum_back(fsrc, self.rtx, w1)
        return table

    def _finish(self, events, table, busy, fail, f_m, t_m, last_kind, n_r, m_w):
        w1 = self.w[0]
        below = slice(0, f_m)

        p_fcca = fsum(float(np.sum(table[(self.b_max, j)][below] * busy[below]))
                      for j in range(1, self.t_max + 1))
        p_frtx = fsum(float(np.sum(table[(i, self.t_max)][below] * fail[below]))
                      for i in range(1, self.b_max + 1))

        alpha = 0.0
        d_tm = 0.0
        if last_kind == FAILURE:
            alpha = fsum(float(table[(i, j)][t_m])
                         for i in range(1, self.b_max + 1)
                         for j in range(1, self.t_max))
            d_tm = fsum(float(table[(i, self.t_max)][t_m])
                        for i in range(1, self.b_max + 1))

        fut = np.zeros(m_w + 1)
        tot_below = np.zeros(f_m)
        for arr in table.values():
            fut += arr[f_m: f_m + m_w + 1]
            tot_below += arr[below]
        cca_mass = float(np.sum(tot_below[~fail[below]]))

        pp = np.zeros(m_w + 1)
        if last_kind == FAILURE:
            pp[2: 2 + w1] = 1.0 / w1  # retry window is uniform over W_1 slots
        np_vec = _floor_zero(fut - alpha * pp, fut + alpha * pp)
        beta = fsum(np_vec.tolist())
        pnp = np_vec / beta if beta > _TINY else np.zeros(m_w + 1)

        d_rest = max(p_fcca + p_frtx - d_tm, 0.0)
        residual_dev = abs(alpha + beta + d_tm + d_rest - 1.0)

        no_txs, xs, xf, anomaly = self._event_marginals(
            last_kind, n_r, alpha, beta, d_tm, d_rest, pp, pnp)

        cons_dev = abs(fsum(xs.tolist()) + fsum(xf.tolist()) + no_txs - 1.0)

        out = []
        for o in range(m_w + 1):
            if xs[o] > 0.0:
                out.append((SUCCESS, f_m + o, float(xs[o])))
            if xf[o] > 0.0:
                out.append((FAILURE, f_m + o, float(xf[o])))
        return ExamResult(no_txs, out, p_fcca, p_frtx, alpha, beta, d_tm,
                          cca_mass, cons_dev, residual_dev, f_m, anomaly)

    def _event_marginals(self, last_kind, n_r, alpha, beta, d_tm, d_rest, pp, pnp):
        """No-more-events probability plus success/failure vectors per offset.

        Composition sums collapse to closed forms: a multinomial mixture
        of per-node categories turns the law of total probability into
        powers of category-weighted suffix masses.  For a collision last
        event, compositions with fewer than two participants (active or
        dropped on their last attempt) are excluded and the remainder is
        renormalized.
        """
        sp = _suffix_sums(pp)
        snp = _suffix_sums(pnp)
        d_all = d_tm + d_rest

        g_full = alpha * sp + beta * snp + d_all
        h_full = alpha * (pp + sp) + beta * (pnp + snp) + d_all
        mass = alpha * pp + beta * pnp
        hp = h_full ** n_r
        gp = g_full ** n_r
        xs_all = n_r * mass * g_full ** (n_r - 1)
        if n_r < 2:
            xf_all = np.zeros_like(pp)  # a collision needs two transmitters
        else:
            xf_all = _floor_zero(hp - gp - xs_all, hp + gp + xs_all)

        if last_kind == SUCCESS:
            return d_rest ** n_r, xs_all, xf_all, False

        # Collision last event: at least two residual nodes took part in it
        # (counting those that dropped there on their final attempt).
        # Condition on the participant count m >= 2; every term is then a
        # positive product, so the renormalized conditionals carry only
        # eps-level noise even when the valid-composition mass is tiny.
        s_mass = alpha + d_tm
        q_mass = beta + d_rest
        if n_r < 2 or s_mass <= 0.0:
            # unreachable for engine-generated chains
            return 0.0, np.zeros_like(pp), np.zeros_like(pp), True

        m_arr = np.arange(2, n_r + 1)
        w_m = np.array([comb(n_r, int(m)) for m in m_arr], dtype=float) \
            * s_mass ** m_arr * q_mass ** (n_r - m_arr)
        z = fsum(w_m.tolist())
        if z <= _TINY:
            return 0.0, np.zeros_like(pp), np.zeros_like(pp), True
        w_m /= z

        # per-node conditionals inside each group
        a_pp = alpha * pp / s_mass
        a_tail = (alpha * sp + d_tm) / s_mass  # CCA later, or dropped at t_m
        a_any = (alpha * (pp + sp) + d_tm) / s_mass
        if q_mass > 0.0:
            b_pp = beta * pnp / q_mass
            b_tail = (beta * snp + d_rest) / q_mass
            b_any = (beta * (pnp + snp) + d_rest) / q_mass
            drest_frac = d_rest / q_mass
        else:
            b_pp = np.zeros_like(pp)
            b_tail = np.zeros_like(pp)
            b_any = np.zeros_like(pp)
            drest_frac = 0.0
        dtm_frac = d_tm / s_mass

        mc = m_arr[:, None]
        nm = n_r - m_arr[:, None]
        a_m1 = a_tail[None, :] ** (mc - 1)
        a_m = a_m1 * a_tail[None, :]
        b_nm = b_tail[None, :] ** nm
        b_nm1 = b_tail[None, :] ** np.maximum(nm - 1, 0)
        one = mc * a_pp[None, :] * a_m1 * b_nm + nm * b_pp[None, :] * b_nm1 * a_m
        full = a_any[None, :] ** mc * b_any[None, :] ** nm
        none = a_m * b_nm
        xf_m = full - none - one

        xs = (w_m[:, None] * one).sum(axis=0)
        xf_scale = (w_m[:, None] * (full + none + one)).sum(axis=0)
        xf = _floor_zero((w_m[:, None] * np.maximum(xf_m, 0.0)).sum(axis=0), xf_scale)
        no_txs = float(np.sum(w_m * dtm_frac ** m_arr * drest_frac ** (n_r - m_arr)))
        return min(no_txs, 1.0), xs, xf, False


# ---------------------------------------------------------------------------
# public single-chain operations (thin wrappers over the examiner)
# ---------------------------------------------------------------------------

def _slot_events(model, chain):
    d_bp = model.timing.d_bp
    return tuple((e.kind, e.start // d_bp) for e in chain.events)


@dataclass
class ResidualProbs:
    """Per-residual-node split after a chain's last event."""

    p_fcca: float  # dropped: hit the CCA-attempt limit on a busy channel
    p_frtx: float  # dropped: collided on the final transmission attempt
    p_ap: float  # still active, participated in the last event
    p_anp: float  # still active, did not participate
    p_drop_at_last: float  # subset of p_frtx dropping exactly at the last event

    def total(self):
        return self.p_fcca + self.p_frtx + self.p_ap + self.p_anp


@dataclass
class CondCcaTable:
    """Conditional CCA probabilities P{CCA at t in stage i, attempt j | chain}."""

    per_state: dict  # (i, j) -> np.ndarray over slots [0, s_max]
    marginal: np.ndarray  # summed over states
    f_m: int  # slots
    m_w: int  # slots past f_m covered
    s_max: int  # slots

    def prob(self, t_symbols, i, j, d_bp):
        t = t_symbols // d_bp
        if t_symbols % d_bp or not (0 <= t <= self.s_max):
            return 0.0
        return float(self.per_state[(i, j)][t])


def infeasible_set(model: DerivedModel, chain, state=None):
    """Instants before f_m where a residual node cannot have done a CCA.

    Base rule: every idle-and-clear instant (not inside a busy interval,
    not a collision start) contradicts the chain.  With `state=(i, j)`
    the set is additionally closed over dead-end continuations for that
    stage/attempt.
    """
    ev = _slot_events(model, chain)
    exam = ChainExaminer(model)
    last_kind, t_m = ev[-1]
    f_m = t_m + model.event_len_slots(last_kind)
    tp = f_m + model.m_w(last_kind) + 1 + exam.pad
    busy = np.zeros(tp, dtype=bool)
    fail = np.zeros(tp, dtype=bool)
    for kind, s in ev:
        busy[s + 1: s + model.event_len_slots(kind)] = True
        if kind == FAILURE:
            fail[s] = True
    if state is None:
        bad = ~(busy | fail)
    else:
        feas = exam._feasibility(busy, fail, f_m)
        bad = ~feas[tuple(state)]
    d_bp = model.timing.d_bp
    return tuple(int(t) * d_bp for t in np.nonzero(bad[:f_m])[0])


def cond_cca_table(model: DerivedModel, chain) -> CondCcaTable:
    """Conditional CCA table over [0, s_max] for a non-empty chain."""
    ev = _slot_events(model, chain)
    exam = ChainExaminer(model)
    last_kind, t_m = ev[-1]
    f_m = t_m + model.event_len_slots(last_kind)
    m_w = model.m_w(last_kind)
    tp = f_m + m_w + 1 + exam.pad
    busy = np.zeros(tp, dtype=bool)
    fail = np.zeros(tp, dtype=bool)
    for kind, s in ev:
        busy[s + 1: s + model.event_len_slots(kind)] = True
        if kind == FAILURE:
            fail[s] = True
    feas = exam._feasibility(busy, fail, f_m)
    table = exam._forward_table(feas, busy, fail)
    s_max = f_m + m_w
    if table is None:
        table = {(i, j): np.zeros(tp) for i in range(1, model.b_max + 1)
                 for j in range(1, model.t_max_attempts + 1)}
    per_state = {k: v[: s_max + 1].copy() for k, v in table.items()}
    marginal = np.zeros(s_max + 1)
    for v in per_state.values():
        marginal += v
    return CondCcaTable(per_state, marginal, f_m, m_w, s_max)


def residual_probs(model: DerivedModel, chain, table=None) -> ResidualProbs:
    """Four-way residual-node probabilities; must sum to 1 within 1e-6."""
    res = ChainExaminer(model).examine(_slot_events(model, chain))
    n_r = model.n_nodes - chain.n_success
    probs = ResidualProbs(res.p_fcca, res.p_frtx, res.p_ap, res.p_anp,
                          res.p_drop_at_last)
    if n_r > 0 and abs(probs.total() - 1.0) > RESIDUAL_TOL:
        raise NormalizationViolation(
            f"residual probabilities sum to {probs.total()!r} (chain {chain.to_line()})")
    return probs


def composition_prob(model: DerivedModel, chain, residuals: ResidualProbs,
                     comp: NodeComposition) -> float:
    """Probability of a residual-node composition [n_p, n_np, n_d].

    After a success no participant can still be active.  After a failure
    the last event must have had at least two participants, counting
    both still-active ones and those that dropped on their final
    attempt; compositions violating that are masked out and the rest is
    renormalized.
    """
    if isinstance(comp, tuple):
        comp = NodeComposition(*comp)
    n_r = model.n_nodes - chain.n_success
    if comp.n_p < 0 or comp.n_np < 0 or comp.n_d < 0 or comp.total() != n_r:
        raise InvalidComposition(f"{comp} does not partition {n_r} residual nodes")

    a, b = residuals.p_ap, residuals.p_anp
    d_tm = residuals.p_drop_at_last
    d_rest = max(residuals.p_fcca + residuals.p_frtx - d_tm, 0.0)
    last_kind = chain.events[-1].kind

    if last_kind == SUCCESS:
        if comp.n_p > 0:
            return 0.0
        d = d_tm + d_rest
        return comb(n_r, comp.n_np) * b ** comp.n_np * d ** comp.n_d

    s_mass, q_mass = a + d_tm, b + d_rest
    z = fsum(comb(n_r, m) * s_mass ** m * q_mass ** (n_r - m)
             for m in range(2, n_r + 1))
    if z <= _TINY:
        return 0.0
    total = 0.0
    for k in range(comp.n_d + 1):  # k participants dropped at the last event
        if comp.n_p + k < 2:
            continue
        ways = (math.factorial(n_r)
                // (math.factorial(comp.n_p) * math.factorial(comp.n_np)
                    * math.factorial(k) * math.factorial(comp.n_d - k)))
        total += ways * a ** comp.n_p * b ** comp.n_np * d_tm ** k * d_rest ** (comp.n_d - k)
    return total / z


def no_txs_prob(model: DerivedModel, chain, residuals: ResidualProbs) -> float:
    """Probability that no further event follows the chain."""
    n_r = model.n_nodes - chain.n_success
    if n_r == 0:
        return 1.0
    return composition_prob(model, chain, residuals, NodeComposition(0, 0, n_r))


def next_event_probs(model: DerivedModel, chain, table=None, residuals=None):
    """[(Event, probability)] for every event that can follow the chain."""
    res = ChainExaminer(model).examine(_slot_events(model, chain))
    d_bp = model.timing.d_bp
    return [(make_event(model, k, s * d_bp), p) for k, s, p in res.events]


# ---------------------------------------------------------------------------
# worklist: threshold-pruned enumeration
# ---------------------------------------------------------------------------

@dataclass
class EccStats:
    examined: int = 0
    finalized: int = 0
    max_conservation_dev: float = 0.0
    max_residual_dev: float = 0.0
    anomalies: int = 0

    def absorb(self, other):
        self.examined += other.examined
        self.finalized += other.finalized
        self.max_conservation_dev = max(self.max_conservation_dev, other.max_conservation_dev)
        self.max_residual_dev = max(self.max_residual_dev, other.max_residual_dev)
        self.anomalies += other.anomalies


@dataclass
class EccResult:
    """Finalized outcome set plus run accounting."""

    model: DerivedModel
    acc: "_metrics.ChainAccumulator"
    stats: EccStats
    wall_time: float
    chains: list = field(default=None)  # list[Chain] when collected

    @property
    def coverage(self):
        return self.acc.coverage

    @property
    def chain_count(self):
        return self.stats.finalized

    def report(self) -> "_metrics.MetricsReport":
        return self.acc.finalize(self.model, self.wall_time)


class _Runner:
    """Serial depth-first worklist over (events, probability) entries."""

    def __init__(self, model, collect, cap, progress=None):
        self.model = model
        self.exam = ChainExaminer(model)
        self.collect = collect
        self.cap = cap
        self.progress = progress
        self.acc = _metrics.ChainAccumulator()
        self.stats = EccStats()
        self.chains = [] if collect else None
        self.theta = model.theta

    def _note(self, res):
        self.stats.examined += 1
        if res.conservation_dev > self.stats.max_conservation_dev:
            self.stats.max_conservation_dev = res.conservation_dev
        if res.residual_dev > self.stats.max_residual_dev:
            self.stats.max_residual_dev = res.residual_dev
        if res.anomaly:
            self.stats.anomalies += 1
        if self.progress is not None and self.stats.examined % 8192 == 0:
            self.progress(self.stats)
        if self.stats.examined > self.cap:
            raise BudgetExceeded(self.cap, self.stats.examined, self.stats.finalized)

    def _finalize(self, events, prob, res):
        energy = _metrics.chain_energy_slots(self.model, events, res.cca_mass)
        self.stats.finalized += 1
        self.acc.add_slots(self.model, events, prob, energy)
        if self.chains is not None:
            self.chains.append(chain_from_slots(self.model, events, prob, energy))

    def run(self, seeds):
        theta = self.theta
        stack = list(seeds)
        while stack:
            events, prob = stack.pop()
            res = self.exam.examine(events)
            self._note(res)
            if res.no_txs > 0.0:
                p_out = prob * res.no_txs
                if p_out >= theta:
                    self._finalize(events, p_out, res)
            if res.no_txs < 1.0:
                for kind, slot, q in res.events:
                    p_child = prob * q
                    if p_child >= theta and p_child > 0.0:
                        stack.append((events + ((kind, slot),), p_child))
        return self


def _seed_entries(model):
    theta = model.theta
    return [(((kind, slot),), p) for kind, slot, p in initial_event_slots(model)
            if p >= theta and p > 0.0]


# process-pool plumbing; workers re-create their examiner from the model
_WORKER_STATE = {}


def _pool_init(model, collect, cap):
    _WORKER_STATE["runner_args"] = (model, collect, cap)


def _pool_task(seed):
    model, collect, cap = _WORKER_STATE["runner_args"]
    runner = _Runner(model, collect, cap).run([seed])
    compact = None
    if collect:
        compact = [(tuple(c.signature()), c.prob, c.energy) for c in runner.chains]
    return runner.acc, runner.stats, compact


def run_ecc(model: DerivedModel, workers=None, collect=True, chain_cap=None,
            progress=None) -> EccResult:
    """Enumerate every outcome chain with terminal probability >= theta.

    With theta == 0 the enumeration is exhaustive.  `workers` > 1 fans
    the search out over a process pool; the finalized multiset (chains
    and their probabilities, bitwise) is identical for any worker count.
    `progress`, when given, is called with the running stats every few
    thousand examined chains (per completed subtree in parallel mode).
    """
    workers = workers or model.workers
    cap = chain_cap or model.chain_cap
    t0 = time.perf_counter()
    seeds = _seed_entries(model)

    if workers <= 1:
        runner = _Runner(model, collect, cap, progress).run(seeds)
        wall = time.perf_counter() - t0
        return EccResult(model, runner.acc, runner.stats, wall, runner.chains)

    # breadth-first split: grow the frontier in-process, then fan out
    import multiprocessing as mp
    from collections import deque

    target = max(64 * workers, 256)
    head = _Runner(model, collect, cap, progress)
    queue = deque(seeds)
    while queue and len(queue) < target:
        events, prob = queue.popleft()
        res = head.exam.examine(events)
        head._note(res)
        if res.no_txs > 0.0:
            p_out = prob * res.no_txs
            if p_out >= model.theta:
                head._finalize(events, p_out, res)
        if res.no_txs < 1.0:
            for kind, slot, q in res.events:
                p_child = prob * q
                if p_child >= model.theta and p_child > 0.0:
                    queue.append((events + ((kind, slot),), p_child))

    acc, stats = head.acc, head.stats
    chains = head.chains
    try:
        ctx = mp.get_context("fork")
    except ValueError:  # pragma: no cover
        ctx = mp.get_context()
    with ctx.Pool(workers, initializer=_pool_init, initargs=(model, collect, cap)) as pool:
        for task_acc, task_stats, compact in pool.imap(_pool_task, list(queue)):
            acc.merge(task_acc)
            stats.absorb(task_stats)
            if progress is not None:
                progress(stats)
            if stats.examined > cap:
                pool.terminate()
                raise BudgetExceeded(cap, stats.examined, stats.finalized)
            if chains is not None and compact is not None:
                d_bp = model.timing.d_bp
                for sig, prob, energy in compact:
                    chains.append(chain_from_slots(
                        model, [(k, s // d_bp) for k, s in sig], prob, energy))
    wall = time.perf_counter() - t0
    return EccResult(model, acc, stats, wall, chains)
