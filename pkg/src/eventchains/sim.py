"""Monte-Carlo oracle: direct simulation of the unslotted CSMA/CA.

Executes the MAC state machine literally for every node (backoff
uniform in [0, 2^BE - 1] slots, CCA, busy -> NB/BE update with drop
past the backoff limit, clear -> transmit, ACK timeout -> retry up to
the retry limit) on the same slot grid as the analytical engine, so
simulated event starts and finishes are directly comparable to chains.
All runs advance together through numpy arrays; one Philox stream per
seed makes a run batch reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DerivedModel

_FAR = np.int64(1) << 60

# node status codes
_ACTIVE, _DONE, _DROP_CCA, _DROP_RETRY = 0, 1, 2, 3


@dataclass
class SimReport:
    """Empirical metrics with standard errors, plus per-state time ledger."""

    runs: int
    n_nodes: int
    delivery_ratio: float
    delivery_se: float
    latency_mean: float  # seconds, per delivered packet
    latency_se: float  # seconds
    latency_hist: dict  # success finish (symbols) -> expected count per run
    dropped_cca_ratio: float
    dropped_retry_ratio: float
    energy_mean: float  # joules per run, physical per-node ledger
    ledger_mean: dict  # mean symbols per run in tx/rx/idle/off
    outcome_counts: dict = None  # event-sequence signature -> run count

    def latency_pdf_total(self):
        return sum(self.latency_hist.values())


def simulate(model: DerivedModel, runs: int, seed: int,
             record_events: bool = False) -> SimReport:
    """Simulate `runs` independent contention rounds of N nodes."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    n = model.n_nodes
    rng = np.random.Generator(np.random.Philox(seed))

    w = np.asarray(model.w, dtype=np.int64)
    w1 = int(w[0])
    g = model.g_slots
    rtx = model.rtx_slots
    l_s = model.success_len_slots
    l_f = model.fail_len_slots
    t = model.timing

    status = np.full((runs, n), _ACTIVE, dtype=np.int8)
    stage = np.ones((runs, n), dtype=np.int16)
    attempt = np.ones((runs, n), dtype=np.int16)
    next_cca = rng.integers(0, w1, size=(runs, n)).astype(np.int64)
    finish = np.full((runs, n), -1, dtype=np.int64)
    end_slot = np.zeros((runs, n), dtype=np.int64)  # node terminal instant
    rx_sym = np.zeros((runs, n), dtype=np.int64)
    tx_sym = np.zeros((runs, n), dtype=np.int64)
    busy_end = np.zeros(runs, dtype=np.int64)

    max_events = n * model.t_max_attempts
    if record_events:
        ev_slot = np.full((runs, max_events), -1, dtype=np.int64)
        ev_kind = np.zeros((runs, max_events), dtype=np.int8)  # 1=S, 2=F
        ev_count = np.zeros(runs, dtype=np.int64)

    while True:
        active = status == _ACTIVE
        pending = np.where(active, next_cca, _FAR)
        t_ev = pending.min(axis=1)
        alive = t_ev < _FAR
        if not alive.any():
            break
        at_min = active & (next_cca == t_ev[:, None]) & alive[:, None]
        run_busy = alive & (t_ev < busy_end)

        # busy CCA: charge the CCA, move to the next stage or drop
        defer = at_min & run_busy[:, None]
        if defer.any():
            ri, ni = np.nonzero(defer)
            rx_sym[ri, ni] += t.d_cca
            new_stage = stage[ri, ni] + 1
            dropping = new_stage > model.b_max
            di = dropping
            status[ri[di], ni[di]] = _DROP_CCA
            end_slot[ri[di], ni[di]] = next_cca[ri[di], ni[di]] + g
            ki = ~dropping
            if ki.any():
                wk = w[new_stage[ki] - 1]
                draw = (rng.random(int(ki.sum())) * wk).astype(np.int64)
                stage[ri[ki], ni[ki]] = new_stage[ki]
                next_cca[ri[ki], ni[ki]] += g + draw

        # clear CCA: everyone at the minimum transmits simultaneously
        txm = at_min & ~run_busy[:, None] & alive[:, None]
        k = txm.sum(axis=1)
        ev_runs = k > 0
        if ev_runs.any():
            succ_runs = k == 1
            coll_runs = k >= 2

            sm = txm & succ_runs[:, None]
            if sm.any():
                ri, ni = np.nonzero(sm)
                rx_sym[ri, ni] += t.d_cca + 2 * t.d_tat + t.d_ack
                tx_sym[ri, ni] += t.d_tx
                status[ri, ni] = _DONE
                finish[ri, ni] = t_ev[ri] + l_s
                end_slot[ri, ni] = t_ev[ri] + l_s
                busy_end[ri] = t_ev[ri] + l_s

            cm = txm & coll_runs[:, None]
            if cm.any():
                ri, ni = np.nonzero(cm)
                rx_sym[ri, ni] += t.d_cca + t.d_tat + t.d_to
                tx_sym[ri, ni] += t.d_tx
                new_att = attempt[ri, ni] + 1
                dropping = new_att > model.t_max_attempts
                di = dropping
                status[ri[di], ni[di]] = _DROP_RETRY
                end_slot[ri[di], ni[di]] = t_ev[ri[di]] + rtx
                ki = ~dropping
                if ki.any():
                    draw = (rng.random(int(ki.sum())) * w1).astype(np.int64)
                    attempt[ri[ki], ni[ki]] = new_att[ki]
                    stage[ri[ki], ni[ki]] = 1
                    next_cca[ri[ki], ni[ki]] = t_ev[ri[ki]] + rtx + draw
                cri = np.unique(ri)
                busy_end[cri] = t_ev[cri] + l_f

            if record_events:
                eri = np.nonzero(ev_runs)[0]
                ev_slot[eri, ev_count[eri]] = t_ev[eri]
                ev_kind[eri, ev_count[eri]] = np.where(succ_runs[eri], 1, 2)
                ev_count[eri] += 1

    # metrics
    delivered = status == _DONE
    per_run_ratio = delivered.sum(axis=1) / n
    ratio = float(per_run_ratio.mean())
    ratio_se = float(per_run_ratio.std(ddof=1) / math.sqrt(runs)) if runs > 1 else 0.0

    fin = finish[delivered] * t.d_bp  # symbols
    sym_s = t.symbol_duration_s
    if fin.size:
        lat_mean = float(fin.mean()) * sym_s
        lat_se = float(fin.std(ddof=1)) * sym_s / math.sqrt(fin.size) if fin.size > 1 else 0.0
    else:
        lat_mean, lat_se = 0.0, 0.0
    vals, counts = np.unique(fin, return_counts=True)
    hist = {int(v): c / runs for v, c in zip(vals.tolist(), counts.tolist())}

    # state-time ledger: idle fills each node's life up to its terminal
    # instant, off runs from there to the run horizon
    horizon = end_slot.max(axis=1, keepdims=True)
    end_sym = end_slot * t.d_bp
    idle_sym = end_sym - rx_sym - tx_sym
    off_sym = horizon * t.d_bp - end_sym
    e = model.energy
    charge_ma_sym = (e.tx_ma * tx_sym + e.rx_ma * rx_sym
                     + e.idle_ma * idle_sym + e.off_ma * off_sym)
    energy_mean = float(charge_ma_sym.sum(axis=1).mean()) * 1e-3 * e.volt * sym_s

    outcome_counts = None
    if record_events:
        m = int(ev_count.max()) if runs else 0
        rows = np.stack([ev_slot[:, :m], ev_kind[:, :m]], axis=2).reshape(runs, -1)
        uniq, counts = np.unique(rows, axis=0, return_counts=True)
        outcome_counts = {}
        for row, c in zip(uniq, counts.tolist()):
            sig = []
            for idx in range(m):
                s, kind = int(row[2 * idx]), int(row[2 * idx + 1])
                if kind == 0:
                    break
                sig.append(("S" if kind == 1 else "F", s * t.d_bp))
            outcome_counts[tuple(sig)] = c

    return SimReport(
        runs=runs, n_nodes=n,
        delivery_ratio=ratio, delivery_se=ratio_se,
        latency_mean=lat_mean, latency_se=lat_se,
        latency_hist=hist,
        dropped_cca_ratio=float((status == _DROP_CCA).mean()),
        dropped_retry_ratio=float((status == _DROP_RETRY).mean()),
        energy_mean=energy_mean,
        ledger_mean={
            "tx": float(tx_sym.sum(axis=1).mean()),
            "rx": float(rx_sym.sum(axis=1).mean()),
            "idle": float(idle_sym.sum(axis=1).mean()),
            "off": float(off_sym.sum(axis=1).mean()),
            # per-node states partition [0, horizon]; their sum is n * horizon
            "horizon_times_n": float((horizon[:, 0] * t.d_bp * n).mean()),
        },
        outcome_counts=outcome_counts,
    )
